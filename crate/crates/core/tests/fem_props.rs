use std::f64::consts::PI;

use bvpdegree::fem1d::{
    mass_eigenvalues, resonance_align, Discretization, Linearization, ProblemDefinition, ProblemSpec,
};
use bvpdegree::numerics::{asymmetry, Vector};
use proptest::prelude::*;

fn spec(g: &str, gprime: &str) -> ProblemSpec {
    ProblemSpec::compile(&ProblemDefinition {
        p: Some("1 + x^2".into()),
        g: Some(g.into()),
        gprime0: Some(gprime.into()),
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn laplacian_spectrum_converges() {
    let disc = Discretization::new(200).unwrap();
    let s = ProblemSpec::compile(&ProblemDefinition::default()).unwrap();
    let lp = disc.linearization(&s, Linearization::Zero).unwrap();
    let eig = mass_eigenvalues(&lp).unwrap();
    for k in 1..=5 {
        let exact = (k as f64 * PI).powi(2);
        assert!((eig[k - 1].0 / exact - 1.0).abs() < 1e-3, "mode {k}");
    }
}

#[test]
fn galerkin_assembly_is_exactly_symmetric() {
    let disc = Discretization::new(37).unwrap();
    let s = spec("(3 + sin(7*x))*t", "3 + sin(7*x)");
    let lp = disc.linearization(&s, Linearization::Zero).unwrap();
    assert_eq!(asymmetry(&lp.pencil.a), 0.0);
    assert_eq!(asymmetry(&disc.stiffness), 0.0);
}

#[test]
fn alignment_is_idempotent() {
    let disc = Discretization::new(64).unwrap();
    for mode in 1..=3 {
        let c = format!("-({mode}*pi)^2");
        let s = ProblemSpec::compile(&ProblemDefinition {
            g: Some(format!("{c}*t")),
            gprime0: Some(c),
            ..Default::default()
        })
        .unwrap();
        let lp = disc.linearization(&s, Linearization::Zero).unwrap();
        let (once, _) = resonance_align(&lp, mode).unwrap();
        let (_, again) = resonance_align(&once, mode).unwrap();
        let top = mass_eigenvalues(&once).unwrap().last().unwrap().0;
        assert!(again.shift.abs() <= 1e-12 * top, "mode {mode}: {}", again.shift);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn linear_residual_is_the_pencil_action(u in prop::collection::vec(-5.0..5.0f64, 31), c in -20.0..20.0f64) {
        let disc = Discretization::new(32).unwrap();
        let s = spec(&format!("({c})*cos(x)*t"), &format!("({c})*cos(x)"));
        let lp = disc.linearization(&s, Linearization::Zero).unwrap();
        let u = Vector::from_vec(u);
        let r = disc.assemble_residual(&s, &u).unwrap();
        let au = &lp.pencil.a * &u;
        let scale = 1.0 + au.amax();
        prop_assert!((r - au).amax() <= 1e-12 * scale);
    }
}

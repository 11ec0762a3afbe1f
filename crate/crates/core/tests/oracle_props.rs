use bvpdegree::catalog;
use bvpdegree::fem1d::{Discretization, ProblemDefinition, ProblemSpec};
use bvpdegree::oracle::{find_solutions_newton, find_solutions_shooting, shoot_with_steps};
use bvpdegree::report::{to_json, AGREEMENT_TOLERANCE};

#[test]
fn seeded_newton_runs_repeat_exactly() {
    let spec = ProblemSpec::compile(&catalog::parity()).unwrap();
    let disc = Discretization::new(64).unwrap();
    for seed in [0, 3, 99] {
        let a = find_solutions_newton(&spec, &disc, 6, seed).unwrap();
        let b = find_solutions_newton(&spec, &disc, 6, seed).unwrap();
        assert_eq!(to_json(&a), to_json(&b));
    }
}

#[test]
fn shooting_and_newton_agree_on_classical_problems() {
    let disc = Discretization::new(200).unwrap();
    for def in [catalog::parity(), catalog::landesman_lazer()] {
        let spec = ProblemSpec::compile(&def).unwrap();
        let shots = find_solutions_shooting(&spec, &disc, [-20.0, 20.0], 400).unwrap();
        let newton = find_solutions_newton(&spec, &disc, 8, 0).unwrap();
        assert!(shots.agrees_with(&newton, AGREEMENT_TOLERANCE), "{:?}", def.g);
    }
}

#[test]
fn halving_the_step_divides_the_error_by_sixteen() {
    // u″ = u with u′(0) = 1 has u(1) = sinh 1
    let spec = ProblemSpec::compile(&ProblemDefinition {
        g: Some("t".into()),
        ..Default::default()
    })
    .unwrap();
    let exact = 1f64.sinh();
    let coarse = (shoot_with_steps(&spec, 1.0, 20).unwrap() - exact).abs();
    let fine = (shoot_with_steps(&spec, 1.0, 40).unwrap() - exact).abs();
    let ratio = coarse / fine;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

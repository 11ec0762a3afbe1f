use std::sync::Arc;

use bvpdegree::degree::{degree_2d_winding, FiniteMap, MAX_WINDING_SEGMENTS};
use bvpdegree::expr::Parity;
use bvpdegree::numerics::{DenseMatrix, Vector};
use bvpdegree::reduction::{
    analyze_pencil_with, build_reduced_map, index_at_zero, Assembler, IndexResult, OperatorPencil, PencilOptions,
    SpectralStructure,
};
use proptest::prelude::*;

/// `Q diag(d) Qᵀ` for a rotation by `angle` in each coordinate plane pair.
fn symmetric_with_spectrum(d: &[f64], angles: &[f64]) -> DenseMatrix {
    let n = d.len();
    let mut q = DenseMatrix::identity(n, n);
    for (i, &a) in angles.iter().enumerate() {
        let (p, r) = (i % n, (i + 1) % n);
        let mut g = DenseMatrix::identity(n, n);
        g[(p, p)] = a.cos();
        g[(r, r)] = a.cos();
        g[(p, r)] = -a.sin();
        g[(r, p)] = a.sin();
        q *= g;
    }
    let a = &q * DenseMatrix::from_diagonal(&Vector::from_vec(d.to_vec())) * q.transpose();
    (&a + a.transpose()) * 0.5
}

fn structure(a: &DenseMatrix, k: &DenseMatrix) -> SpectralStructure {
    let p = OperatorPencil::new(a.clone(), k.clone()).unwrap();
    analyze_pencil_with(&p, &PencilOptions::default()).unwrap()
}

fn integers(s: &SpectralStructure) -> (usize, usize, usize, usize, usize) {
    (s.nu, s.n0, s.l, s.root_exponent, s.complex_pairs)
}

/// `C(u) = (u·w)³ K w`, odd and homogeneous of order three.
fn cubic(k: &DenseMatrix, w: &[f64]) -> Assembler {
    let kw = k * Vector::from_vec(w.to_vec());
    let w = Vector::from_vec(w.to_vec());
    Arc::new(move |u: &Vector| Ok(&kw * u.dot(&w).powi(3)))
}

fn index(a: &DenseMatrix, k: &DenseMatrix, w: &[f64]) -> IndexResult {
    let p = OperatorPencil::new(a.clone(), k.clone()).unwrap();
    let s = analyze_pencil_with(&p, &PencilOptions::default()).unwrap();
    let theta = (s.l > 0).then(|| build_reduced_map(&s, &p, cubic(k, w), 3.0, Parity::Odd).unwrap());
    index_at_zero(&s, theta.as_ref()).unwrap()
}

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -3.0..-0.5f64, 0.5..3.0f64], 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetric_pencils_have_trivial_normalizer(d in spectrum(), angles in prop::collection::vec(0.0..3.0f64, 4)) {
        let a = symmetric_with_spectrum(&d, &angles);
        let s = structure(&a, &DenseMatrix::identity(4, 4));
        prop_assert_eq!(s.n0, s.l);
        prop_assert_eq!(s.n0, d.iter().filter(|&&v| v == 0.0).count());
        prop_assert_eq!(s.nu, d.iter().filter(|&&v| v < 0.0).count());
        let n = s.t.nrows();
        prop_assert!((&s.t - DenseMatrix::identity(n, n)).norm() <= 1e-8);
    }

    #[test]
    fn scaling_the_pencil_changes_nothing(
        d in spectrum(),
        angles in prop::collection::vec(0.0..3.0f64, 4),
        w in prop::collection::vec(-1.0..1.0f64, 4),
        c in prop::sample::select(vec![0.5, 2.0]),
    ) {
        let a = symmetric_with_spectrum(&d, &angles);
        let k = DenseMatrix::identity(4, 4) + symmetric_with_spectrum(&[0.3, 0.1, 0.2, 0.0], &angles);
        let s1 = structure(&a, &k);
        let s2 = structure(&(&a * c), &(&k * c));
        prop_assert_eq!(integers(&s1), integers(&s2));
        let kernel_w = s1.kernel_basis.transpose() * &k * Vector::from_vec(w.clone());
        prop_assume!(s1.l == 0 || (s1.l == 1 && kernel_w.norm() > 0.1));
        prop_assume!(s1.l <= 1);
        let i1 = index(&a, &k, &w);
        let i2 = index(&(&a * c), &(&k * c), &w);
        prop_assert_eq!(i1.value, i2.value);
    }

    #[test]
    fn permuting_coordinates_changes_nothing(
        v in prop::collection::vec(-2.0..2.0f64, 16),
        zero_rank in 0usize..3,
        perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let mut a = DenseMatrix::from_vec(4, 4, v);
        for i in 0..zero_rank {
            a.set_row(i, &(a.row(3) * 0.0));
        }
        let k = DenseMatrix::identity(4, 4);
        let mut p = DenseMatrix::zeros(4, 4);
        for (i, &j) in perm.iter().enumerate() {
            p[(i, j)] = 1.0;
        }
        let s1 = structure(&a, &k);
        let s2 = structure(&(p.transpose() * &a * &p), &k);
        prop_assert_eq!(integers(&s1), integers(&s2));
    }

    #[test]
    fn reduced_index_matches_direct_degree(a11 in prop_oneof![-2.0..-0.5f64, 0.5..2.0f64], w in -1.0..1.0f64, sign in prop::bool::ANY) {
        prop_assume!(w.abs() > 0.2);
        let sgn = if sign { 1.0 } else { -1.0 };
        let a = DenseMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, a11]);
        let k = DenseMatrix::identity(2, 2);
        let p = OperatorPencil::new(a.clone(), k.clone()).unwrap();
        let s = analyze_pencil_with(&p, &PencilOptions::default()).unwrap();
        let c: Assembler = Arc::new(move |u: &Vector| Ok(Vector::from_vec(vec![sgn * u[0].powi(3), w * u[0].powi(3)])));
        let theta = build_reduced_map(&s, &p, c, 3.0, Parity::Odd).unwrap();
        let idx = index_at_zero(&s, Some(&theta)).unwrap().value;
        let f = FiniteMap::new(2, move |u| vec![sgn * u[0].powi(3), a11 * u[1] + w * u[0].powi(3)]);
        let direct = degree_2d_winding(&f, 0.1, MAX_WINDING_SEGMENTS).unwrap();
        prop_assert_eq!(idx, direct);
    }
}

//! Spectral structure of a linearization pencil and the reduced kernel map.
//!
//! A pencil `(A, K)` stands for the operator `M = K⁻¹A`. All rank decisions
//! are made on the congruent matrix `L⁻¹ A L⁻ᵀ` (with `K = L Lᵀ`), which is
//! similar to `M` and avoids forming `K⁻¹` explicitly.

use std::sync::Arc;

use nalgebra::{Cholesky, Dyn};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::degree::{degree_homogeneous, sphere_samples, DegreeError, FiniteMap};
use crate::expr::Parity;
use crate::numerics::{
    asymmetry, cholesky, eigen_general, orthogonal_complement, orthonormalize, rank_split,
    rank_split_abs, spectral_norm, whiten, DenseMatrix, NumericsError, Vector, DEFAULT_KERNEL_TOL,
    MAX_DIM,
};

/// Relative bound on `|Im λ|` below which an eigenvalue counts as real.
pub const REALITY_TOL: f64 = 1e-8;

/// Required accuracy of `T·N = S`.
pub const T_RESIDUAL_TOL: f64 = 1e-8;

/// Required agreement of the two evaluation routes for symmetric pencils.
pub const PATH_AGREEMENT_TOL: f64 = 1e-8;

const FALLBACK_SEED: u64 = 0x7e57_5eed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("pencil matrices have mismatched sizes {a}x{a} and {k}x{k}")]
    Dimension { a: usize, k: usize },
    #[error(
        "kernel decision is unstable: {what} {value:e} lies in ({low:e}, {high:e}); change the tolerance"
    )]
    ToleranceAmbiguity {
        what: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("structural failure (n0 = {n0}, l = {l}): {msg}")]
    Structural { n0: usize, l: usize, msg: String },
    #[error("kernel is empty; there is no reduced map")]
    EmptyKernel,
    #[error("reduced map is not homogeneous of order {order} (violation {violation:e})")]
    NotHomogeneous { order: f64, violation: f64 },
    #[error("reduced map violates the declared {parity:?} parity (violation {violation:e})")]
    ParityMismatch { parity: Parity, violation: f64 },
    #[error("projection and duality evaluations disagree by {difference:e}")]
    PathMismatch { difference: f64 },
    #[error("principal order {order} is outside the {side} range")]
    OrderOutOfRange { order: f64, side: Side },
    #[error("reduced map vanishes on the unit sphere near {point:?}; the index is undefined")]
    ThetaVanishes { point: Vec<f64>, norm: f64 },
    #[error(transparent)]
    Degree(DegreeError),
    #[error("residual assembly failed: {0}")]
    Assembly(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Zero,
    Infinity,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Zero => "zero-side (order > 1)",
            Side::Infinity => "infinity-side (0 <= order < 1)",
        })
    }
}

/// `(A, K)` with `K` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct OperatorPencil {
    pub a: DenseMatrix,
    pub k: DenseMatrix,
}

impl OperatorPencil {
    pub fn new(a: DenseMatrix, k: DenseMatrix) -> Result<Self, ReductionError> {
        if a.nrows() != a.ncols() {
            return Err(NumericsError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            }
            .into());
        }
        if k.nrows() != a.nrows() || k.ncols() != a.nrows() {
            return Err(ReductionError::Dimension {
                a: a.nrows(),
                k: k.nrows(),
            });
        }
        cholesky(&k)?;
        Ok(OperatorPencil { a, k })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        asymmetry(&self.a) <= 1e-10
    }
}

/// How directions left free by `T·N = S` are completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "seed")]
pub enum Completion {
    /// Free directions go to the kernel coordinates by the identity.
    Canonical,
    /// A random nondegenerate block from this seed.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct PencilOptions {
    pub tol: f64,
    pub completion: Completion,
}

impl Default for PencilOptions {
    fn default() -> Self {
        PencilOptions {
            tol: DEFAULT_KERNEL_TOL,
            completion: Completion::Canonical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralStructure {
    /// Real eigenvalues below `−tol·‖M‖`, with multiplicity.
    pub nu: usize,
    /// Dimension of the root space at 0.
    pub n0: usize,
    /// Dimension of the kernel (number of Jordan blocks at 0).
    pub l: usize,
    /// Length of the longest Jordan chain at 0.
    pub root_exponent: usize,
    pub symmetric: bool,
    /// `‖M‖` in the norm induced by `K`.
    pub norm: f64,
    pub tol: f64,
    /// Eigenvalues of `M`, sorted by real then imaginary part.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Conjugate pairs off the real axis; they do not enter `nu`.
    pub complex_pairs: usize,
    /// `K`-orthonormal kernel basis `φ₁..φ_l`, one per column.
    pub kernel_basis: DenseMatrix,
    /// Basis of the root space; the first `l` columns are `kernel_basis`.
    pub root_basis: DenseMatrix,
    pub p0: DenseMatrix,
    pub p1: DenseMatrix,
    /// `M` restricted to the root space, in `root_basis` coordinates.
    pub n_matrix: DenseMatrix,
    /// `diag(0_l, I)`: the complement projection on the root space.
    pub s_matrix: DenseMatrix,
    pub t: DenseMatrix,
    pub det_t: f64,
    /// `‖T·N − S‖` (spectral norm).
    pub t_residual: f64,
    pub completion: Completion,
    chol: Cholesky<f64, Dyn>,
    /// Maps `JC` to kernel coordinates of `P₀ T P₁ JC`.
    theta_rows: DenseMatrix,
}

impl SpectralStructure {
    pub fn dim(&self) -> usize {
        self.p0.nrows()
    }

    pub fn is_degenerate(&self) -> bool {
        self.l > 0
    }

    /// Kernel coordinates of `P₀ T P₁ y` for `y` in the original coordinates.
    pub fn reduce(&self, y: &Vector) -> Vector {
        &self.theta_rows * y
    }
}

pub fn analyze_pencil(pencil: &OperatorPencil, tol: f64) -> Result<SpectralStructure, ReductionError> {
    analyze_pencil_with(
        pencil,
        &PencilOptions {
            tol,
            ..PencilOptions::default()
        },
    )
}

pub fn analyze_pencil_with(
    pencil: &OperatorPencil,
    opts: &PencilOptions,
) -> Result<SpectralStructure, ReductionError> {
    let n = pencil.dim();
    if n > MAX_DIM {
        return Err(NumericsError::TooLarge(n).into());
    }
    let tol = opts.tol;
    let chol = cholesky(&pencil.k)?;
    let symmetric = pencil.is_symmetric();
    let mut mh = whiten(&pencil.a, &chol);
    if symmetric {
        mh = (&mh + mh.transpose()) * 0.5;
    }
    let norm = spectral_norm(&mh);
    let cut = tol * norm;

    // Kernel and singular value ambiguity.
    let first = rank_split(&mh, tol);
    for &s in &first.singular_values {
        check_ambiguity("singular value", s, tol, norm)?;
    }
    let x0 = first.kernel.clone();
    let l = x0.ncols();

    let (x1, root_exponent) = root_space(&mh, x0.clone(), cut);
    let n0 = x1.ncols();

    // Eigenvalues; the n0 closest to the origin form the zero cluster.
    let eig: Vec<Eigenvalue> = if symmetric {
        let mut v: Vec<f64> = mh.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v.into_iter().map(|re| Eigenvalue { re, im: 0.0 }).collect()
    } else {
        eigen_general(&mh)?
            .into_iter()
            .map(|c| Eigenvalue { re: c.re, im: c.im })
            .collect()
    };
    let mut by_modulus: Vec<&Eigenvalue> = eig.iter().collect();
    by_modulus.sort_by(|a, b| a.re.hypot(a.im).total_cmp(&b.re.hypot(b.im)));
    let nonzero = &by_modulus[n0.min(n)..];
    let mut nu = 0;
    let mut off_axis = 0;
    for e in nonzero {
        check_ambiguity("eigenvalue modulus", e.re.hypot(e.im), tol, norm)?;
        if e.im.abs() > REALITY_TOL * norm {
            off_axis += 1;
        } else if e.re < -cut {
            nu += 1;
        }
    }

    // W: complement of X₀ inside X₁; R: invariant complement of X₁.
    let w = if n0 > l {
        let proj = &x1 - &x0 * (x0.transpose() * &x1);
        orthonormalize(&proj)
    } else {
        DenseMatrix::zeros(n, 0)
    };
    if w.ncols() != n0 - l {
        return Err(structural(n0, l, "root space does not extend the kernel"));
    }
    let r1 = hcat(&[&x0, &w]);
    let range = if n0 == 0 {
        DenseMatrix::identity(n, n)
    } else if symmetric {
        orthogonal_complement(&x0)
    } else {
        let (dual_root, _) = root_space(&mh.transpose(), rank_split_abs(&mh.transpose(), cut).kernel, cut);
        if dual_root.ncols() != n0 {
            return Err(structural(
                n0,
                l,
                &format!("left root space has dimension {}", dual_root.ncols()),
            ));
        }
        orthogonal_complement(&dual_root)
    };
    if range.ncols() != n - n0 {
        return Err(structural(n0, l, "invariant complement has the wrong dimension"));
    }
    let basis = hcat(&[&r1, &range]);
    let inv = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| structural(n0, l, "root space and its complement are not independent"))?;

    let proj = |k: usize| -> DenseMatrix {
        let cols = basis.columns(0, k);
        let rows = inv.rows(0, k);
        cols * rows
    };
    let p0_hat = proj(l);
    let p1_hat = proj(n0);

    let n_matrix = r1.transpose() * &mh * &r1;
    let mut s_matrix = DenseMatrix::zeros(n0, n0);
    for i in l..n0 {
        s_matrix[(i, i)] = 1.0;
    }
    let (t, completion) = solve_normalizer(&n_matrix, l, cut, opts.completion)?;
    let t_residual = spectral_norm(&(&t * &n_matrix - &s_matrix));
    if t_residual > T_RESIDUAL_TOL {
        return Err(structural(
            n0,
            l,
            &format!("T·N = S has residual {t_residual:e}"),
        ));
    }
    let det_t = if n0 == 0 { 1.0 } else { t.determinant() };

    // Back to original coordinates: M = L⁻ᵀ M̂ Lᵀ.
    let lt = chol.l().transpose();
    let from_hat = |x: &DenseMatrix| -> DenseMatrix {
        lt.solve_upper_triangular(x)
            .expect("Cholesky factor has a nonzero diagonal")
    };
    let kernel_basis = from_hat(&x0);
    let root_basis = from_hat(&r1);
    let p0 = from_hat(&p0_hat) * &lt;
    let p1 = from_hat(&p1_hat) * &lt;
    let coords = inv.rows(0, n0).into_owned();
    let theta_rows = (&t * coords).rows(0, l).into_owned() * &lt;

    Ok(SpectralStructure {
        nu,
        n0,
        l,
        root_exponent,
        symmetric,
        norm,
        tol,
        eigenvalues: eig,
        complex_pairs: off_axis / 2,
        kernel_basis,
        root_basis,
        p0,
        p1,
        n_matrix,
        s_matrix,
        t,
        det_t,
        t_residual,
        completion,
        chol,
        theta_rows,
    })
}

fn check_ambiguity(what: &'static str, value: f64, tol: f64, norm: f64) -> Result<(), ReductionError> {
    let (low, high) = (0.1 * tol * norm, 10.0 * tol * norm);
    if value > low && value < high {
        return Err(ReductionError::ToleranceAmbiguity { what, value, low, high });
    }
    Ok(())
}

fn structural(n0: usize, l: usize, msg: &str) -> ReductionError {
    ReductionError::Structural {
        n0,
        l,
        msg: msg.to_string(),
    }
}

fn hcat(parts: &[&DenseMatrix]) -> DenseMatrix {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut at = 0;
    for p in parts {
        out.view_mut((0, at), (rows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Grows `ker M ⊆ ker M² ⊆ …` one chain link at a time: `ker M^{j+1}` is the
/// kernel of `M` followed by projection off `ker M^j`. Stops when the
/// dimension stops growing.
fn root_space(m: &DenseMatrix, kernel: DenseMatrix, cut: f64) -> (DenseMatrix, usize) {
    let n = m.nrows();
    let mut z = kernel;
    if z.ncols() == 0 {
        return (z, 0);
    }
    let mut exponent = 1;
    while z.ncols() < n {
        let off = m - &z * (z.transpose() * m);
        let next = rank_split_abs(&off, cut).kernel;
        if next.ncols() <= z.ncols() {
            break;
        }
        z = next;
        exponent += 1;
    }
    (z, exponent)
}

/// Solves `T·N = S` with `S = diag(0_l, I)`, completes the free block and
/// fixes the orientation so that `sign det T = (−1)^{n0−l}`.
fn solve_normalizer(
    n_matrix: &DenseMatrix,
    l: usize,
    cut: f64,
    completion: Completion,
) -> Result<(DenseMatrix, Completion), ReductionError> {
    let n0 = n_matrix.nrows();
    if n0 == 0 {
        return Ok((DenseMatrix::zeros(0, 0), completion));
    }
    let lead = n_matrix.columns(0, l).norm();
    if lead > cut.max(f64::MIN_POSITIVE) * (n0 as f64).sqrt() {
        return Err(structural(
            n0,
            l,
            &format!("kernel columns of N are not zero ({lead:e})"),
        ));
    }
    // N = [0 | N₂]; T must send N₂ to the last n0−l unit columns.
    let n2 = n_matrix.columns(l, n0 - l).into_owned();
    let (ur, uperp, right) = if n0 == l {
        (DenseMatrix::zeros(n0, 0), DenseMatrix::identity(n0, n0), DenseMatrix::zeros(0, 0))
    } else {
        let split = rank_split_abs(&n2, cut);
        if split.range.ncols() != n0 - l {
            return Err(structural(
                n0,
                l,
                &format!("rank of N is {}, expected {}", split.range.ncols(), n0 - l),
            ));
        }
        let ur = split.range.clone();
        // N₂ = Uᵣ (Uᵣᵀ N₂), with an invertible square factor
        let coef = ur.transpose() * &n2;
        let coef_inv = coef
            .try_inverse()
            .ok_or_else(|| structural(n0, l, "restricted N is not invertible"))?;
        (ur.clone(), orthogonal_complement(&ur), coef_inv)
    };

    let build = |q: &DenseMatrix| -> DenseMatrix {
        // columns: images of Uᵣ then of U⊥
        let mut img = DenseMatrix::zeros(n0, n0);
        if n0 > l {
            // T Uᵣ = E_W (Uᵣᵀ N₂)⁻¹
            let mut ew = DenseMatrix::zeros(n0, n0 - l);
            ew.view_mut((l, 0), (n0 - l, n0 - l)).copy_from(&right);
            img.view_mut((0, 0), (n0, n0 - l)).copy_from(&ew);
        }
        img.view_mut((0, n0 - l), (l, l)).copy_from(q);
        let frame = hcat(&[&ur, &uperp]);
        img * frame.transpose()
    };

    let desired = if (n0 - l).is_multiple_of(2) { 1.0 } else { -1.0 };
    let attempt = |mut q: DenseMatrix| -> Option<DenseMatrix> {
        let mut t = build(&q);
        if t.determinant() * desired < 0.0 {
            q.column_mut(0).neg_mut();
            t = build(&q);
        }
        let sv = t.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        (hi > 0.0 && lo > 1e-12 * hi).then_some(t)
    };

    let canonical = || DenseMatrix::identity(l, l);
    let random = |seed: u64| -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let q = DenseMatrix::from_fn(l, l, |_, _| rng.random_range(-1.0..1.0));
            if q.determinant().abs() >= 0.1 {
                return q;
            }
        }
    };
    let first = match completion {
        Completion::Canonical => canonical(),
        Completion::Seeded(seed) => random(seed),
    };
    if let Some(t) = attempt(first) {
        return Ok((t, completion));
    }
    let fallback = Completion::Seeded(FALLBACK_SEED);
    attempt(random(FALLBACK_SEED))
        .map(|t| (t, fallback))
        .ok_or_else(|| structural(n0, l, "no nondegenerate completion of T found"))
}

/// Full-space residual `u ↦ C(u)`, returned as a covector.
pub type Assembler = Arc<dyn Fn(&Vector) -> Result<Vector, String> + Send + Sync>;

/// `Θ(c) = P₀ T P₁ J C(Σ cᵢ φᵢ)` in kernel coordinates.
#[derive(Clone)]
pub struct ReducedMap {
    pub dim: usize,
    pub order: f64,
    pub parity: Parity,
    eval: Arc<dyn Fn(&[f64]) -> Result<Vec<f64>, ReductionError> + Send + Sync>,
}

impl std::fmt::Debug for ReducedMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedMap")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("parity", &self.parity)
            .finish_non_exhaustive()
    }
}

impl ReducedMap {
    pub fn evaluate(&self, c: &[f64]) -> Result<Vec<f64>, ReductionError> {
        (self.eval)(c)
    }

    /// The map as a degree-engine input; evaluation failures become NaN.
    pub fn finite_map(&self) -> FiniteMap {
        let eval = self.eval.clone();
        let dim = self.dim;
        let map = FiniteMap::new(dim, move |c| eval(c).unwrap_or_else(|_| vec![f64::NAN; dim]))
            .homogeneous(self.order);
        if self.parity == Parity::Odd {
            map.odd()
        } else {
            map
        }
    }
}

fn rel_gap(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    if d == 0.0 {
        return 0.0;
    }
    let s = a.iter().chain(b).map(|v| v * v).sum::<f64>().sqrt();
    d / s
}

pub fn build_reduced_map(
    structure: &SpectralStructure,
    pencil: &OperatorPencil,
    assembler: Assembler,
    order: f64,
    parity: Parity,
) -> Result<ReducedMap, ReductionError> {
    if structure.l == 0 {
        return Err(ReductionError::EmptyKernel);
    }
    if pencil.dim() != structure.dim() {
        return Err(ReductionError::Dimension {
            a: pencil.dim(),
            k: structure.dim(),
        });
    }
    let phi = Arc::new(structure.kernel_basis.clone());
    let chol = structure.chol.clone();
    let rows = structure.theta_rows.clone();
    let l = structure.l;

    let full = {
        let phi = phi.clone();
        let assembler = assembler.clone();
        move |c: &[f64]| -> Result<(Vector, Vector), ReductionError> {
            let u = &*phi * Vector::from_column_slice(c);
            let r = assembler(&u).map_err(ReductionError::Assembly)?;
            if r.len() != u.len() {
                return Err(ReductionError::Assembly(format!(
                    "assembler returned length {}, expected {}",
                    r.len(),
                    u.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(ReductionError::Assembly("non-finite residual".into()));
            }
            let jc = chol.solve(&r);
            Ok((r, &rows * jc))
        }
    };
    let full = Arc::new(full);

    let samples = sphere_samples(l, 1.0, if l == 1 { 2 } else { 12 * l });
    let mut hom = 0.0f64;
    let mut par = 0.0f64;
    let mut path = 0.0f64;
    for c in &samples {
        let (r, theta) = full(c)?;
        for scale in [0.5, 2.0] {
            let cs: Vec<f64> = c.iter().map(|v| v * scale).collect();
            let (_, ts) = full(&cs)?;
            let expect: Vec<f64> = theta.iter().map(|v| v * scale.powf(order)).collect();
            hom = hom.max(rel_gap(ts.as_slice(), &expect));
        }
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        let (_, tm) = full(&neg)?;
        let flipped: Vec<f64> = theta.iter().map(|v| -v).collect();
        par = par.max(match parity {
            Parity::Odd => rel_gap(tm.as_slice(), &flipped),
            Parity::Even => rel_gap(tm.as_slice(), theta.as_slice()),
            Parity::None => 0.0,
        });
        if structure.symmetric {
            let dual = phi.transpose() * &r;
            let bound = phi.column_iter().map(|p| p.norm()).fold(0.0, f64::max) * r.norm();
            let diff = (&dual - &theta).amax();
            if bound > 0.0 {
                path = path.max(diff / bound);
            } else {
                path = path.max(diff);
            }
        }
    }
    if hom > 1e-8 {
        return Err(ReductionError::NotHomogeneous { order, violation: hom });
    }
    if par > 1e-8 {
        return Err(ReductionError::ParityMismatch { parity, violation: par });
    }
    if path > PATH_AGREEMENT_TOL {
        return Err(ReductionError::PathMismatch { difference: path });
    }

    Ok(ReducedMap {
        dim: l,
        order,
        parity,
        eval: Arc::new(move |c: &[f64]| {
            if c.len() != l {
                return Err(ReductionError::Dimension { a: c.len(), k: l });
            }
            full(c).map(|(_, t)| t.as_slice().to_vec())
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexResult {
    pub side: Side,
    pub value: i64,
    /// Set when the degree of `Θ` came from the multi-start engine.
    pub heuristic: bool,
    pub nu: usize,
    pub n0: usize,
    pub l: usize,
    /// Degree of `Θ` at 0; 1 when the kernel is trivial.
    pub theta_degree: i64,
    /// `(−1)^ν`, the index of the linearization on the invariant complement.
    pub complement_factor: i64,
}

fn sign_power(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn index_on(
    side: Side,
    structure: &SpectralStructure,
    theta: Option<&ReducedMap>,
) -> Result<IndexResult, ReductionError> {
    let (theta_degree, heuristic) = if structure.l == 0 {
        (1, false)
    } else {
        let theta = theta.ok_or(ReductionError::EmptyKernel)?;
        let in_range = match side {
            Side::Zero => theta.order > 1.0,
            Side::Infinity => (0.0..1.0).contains(&theta.order),
        };
        if !in_range {
            return Err(ReductionError::OrderOutOfRange {
                order: theta.order,
                side,
            });
        }
        if theta.dim != structure.l {
            return Err(ReductionError::Dimension {
                a: theta.dim,
                k: structure.l,
            });
        }
        match degree_homogeneous(&theta.finite_map()) {
            Ok(d) => (d.value, d.is_heuristic()),
            Err(DegreeError::SphereZero { point, norm }) => {
                return Err(ReductionError::ThetaVanishes { point, norm })
            }
            Err(e) => return Err(ReductionError::Degree(e)),
        }
    };
    let factor = sign_power(structure.nu + structure.n0 - structure.l);
    Ok(IndexResult {
        side,
        value: factor * theta_degree,
        heuristic,
        nu: structure.nu,
        n0: structure.n0,
        l: structure.l,
        theta_degree,
        complement_factor: sign_power(structure.nu),
    })
}

/// `(−1)^{ν+n0−l} · deg Θ` for a principal part of order greater than one.
pub fn index_at_zero(
    structure: &SpectralStructure,
    theta: Option<&ReducedMap>,
) -> Result<IndexResult, ReductionError> {
    index_on(Side::Zero, structure, theta)
}

/// `(−1)^{ν+n0−l} · deg Θ` for a principal part of order in `[0, 1)`.
pub fn index_at_infinity(
    structure: &SpectralStructure,
    theta: Option<&ReducedMap>,
) -> Result<IndexResult, ReductionError> {
    index_on(Side::Infinity, structure, theta)
}

/// The index at infinity equals the sum of the indices of the zeros.
pub fn kronecker_check(zero_indices: &[i64], infinity_index: i64) -> bool {
    zero_indices.iter().sum::<i64>() == infinity_index
}

//! Piecewise-linear Galerkin discretization of the Dirichlet problem on `(0, 1)`.
//!
//! The weak form is `∫ f(x,u′) v′ + q(x,u) v′ + g(x,u) v dx = 0` for all `v`.
//! Unknowns are the values at the `N − 1` interior nodes `x_j = j/N`.

mod checks;
mod problem;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{ExprError, Expression};
use crate::numerics::{
    cholesky, eigen_general, eigen_symmetric_pencil, whiten, DenseMatrix, NumericsError, Vector,
    MAX_DIM,
};
use crate::reduction::{Assembler, OperatorPencil, ReductionError};

pub use checks::{
    dirichlet_zero_check, gateaux_check, monotonicity_probe, remainder_check, GateauxReport,
    RemainderReport,
};
pub use problem::{
    Integrands, Linearization, Principal, PrincipalDefinition, PrincipalDefinitions,
    PrincipalParts, ProblemDefinition, ProblemSpec, SpecError, Term, TuningDefinition,
    MAX_PARAMETERS,
};

/// Smallest accepted element count.
pub const MIN_ELEMENTS: usize = 8;

/// Largest relative distance between the aligned eigenvalue and zero.
pub const RESONANCE_TOLERANCE: f64 = 0.05;

const GAUSS_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("mesh needs between {MIN_ELEMENTS} and {max} elements, got {found}", max = MAX_DIM + 1)]
    Mesh { found: usize },
    #[error("gradient coefficient is {value} at x = {x}; it must be positive")]
    Ellipticity { x: f64, value: f64 },
    #[error("evaluating `{expr}` at x = {x}, argument {arg}: {source}")]
    Expression {
        expr: String,
        x: f64,
        arg: f64,
        source: ExprError,
    },
    #[error(
        "no discrete eigenvalue near resonance for mode {mode}: nearest is {eigenvalue:e}, {relative:.1}% of the zero-order part away"
    )]
    Misdeclared {
        mode: usize,
        eigenvalue: f64,
        relative: f64,
    },
    #[error("mode {mode} of the pencil is not real ({re} + {im}i)")]
    ComplexMode { mode: usize, re: f64, im: f64 },
    #[error("input vector has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Debug, Clone, Copy)]
struct QuadPoint {
    element: usize,
    x: f64,
    /// Weight times element length.
    w: f64,
    phi_l: f64,
    phi_r: f64,
}

/// Mesh, quadrature and the stiffness and mass matrices.
#[derive(Debug, Clone)]
pub struct Discretization {
    n_elements: usize,
    h: f64,
    points: Arc<Vec<QuadPoint>>,
    /// `∫ u′ v′`, the Gram matrix of the discrete inner product.
    pub stiffness: DenseMatrix,
    /// `∫ u v`.
    pub mass: DenseMatrix,
}

impl Discretization {
    pub fn new(n_elements: usize) -> Result<Self, FemError> {
        if !(MIN_ELEMENTS..=MAX_DIM + 1).contains(&n_elements) {
            return Err(FemError::Mesh { found: n_elements });
        }
        let h = 1.0 / n_elements as f64;
        let mut points = Vec::with_capacity(4 * n_elements);
        for e in 0..n_elements {
            let (a, b) = (e as f64 * h, (e + 1) as f64 * h);
            let mid = 0.5 * (a + b);
            for (xi, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                let x = mid + 0.5 * h * xi;
                points.push(QuadPoint {
                    element: e,
                    x,
                    w: 0.5 * h * w,
                    phi_l: 0.5 * (1.0 - xi),
                    phi_r: 0.5 * (1.0 + xi),
                });
            }
        }
        let mut disc = Discretization {
            n_elements,
            h,
            points: Arc::new(points),
            stiffness: DenseMatrix::zeros(0, 0),
            mass: DenseMatrix::zeros(0, 0),
        };
        disc.stiffness = disc.assemble_form(|_| Ok((1.0, 0.0, 0.0)))?;
        disc.mass = disc.assemble_form(|_| Ok((0.0, 0.0, 1.0)))?;
        Ok(disc)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// Number of unknowns, `N − 1`.
    pub fn dim(&self) -> usize {
        self.n_elements - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (1..self.n_elements).map(|j| j as f64 * self.h).collect()
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector::from_iterator(self.dim(), self.nodes().into_iter().map(f))
    }

    pub fn quadrature_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.x)
    }

    /// Unknown indices of the left and right node of element `e`.
    fn dofs(&self, e: usize) -> [Option<usize>; 2] {
        let left = if e >= 1 { Some(e - 1) } else { None };
        let right = if e + 1 < self.n_elements { Some(e) } else { None };
        [left, right]
    }

    /// `∫ a u′v′ + b u v′ + c u v` with `(a, b, c)` given pointwise.
    fn assemble_form(
        &self,
        coef: impl Fn(f64) -> Result<(f64, f64, f64), FemError>,
    ) -> Result<DenseMatrix, FemError> {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        let dphi = [-1.0 / self.h, 1.0 / self.h];
        for p in self.points.iter() {
            let (a, b, c) = coef(p.x)?;
            let phi = [p.phi_l, p.phi_r];
            let dofs = self.dofs(p.element);
            for (i, di) in dofs.iter().enumerate() {
                let Some(row) = di else { continue };
                for (j, dj) in dofs.iter().enumerate() {
                    let Some(col) = dj else { continue };
                    // products of basis values are formed first so that the
                    // (i, j) and (j, i) entries round identically
                    let sym = a * (dphi[j] * dphi[i]) + c * (phi[j] * phi[i]);
                    m[(*row, *col)] += p.w * sym + p.w * (b * (phi[j] * dphi[i]));
                }
            }
        }
        Ok(m)
    }

    /// Values of `u` and `u′` at each quadrature point.
    fn trace(&self, u: &Vector, mut visit: impl FnMut(&QuadPoint, f64, f64) -> Result<(), FemError>) -> Result<(), FemError> {
        for p in self.points.iter() {
            let [l, r] = self.dofs(p.element);
            let ul = l.map_or(0.0, |i| u[i]);
            let ur = r.map_or(0.0, |i| u[i]);
            let val = ul * p.phi_l + ur * p.phi_r;
            let slope = (ur - ul) / self.h;
            visit(p, val, slope)?;
        }
        Ok(())
    }

    /// Covector of `v ↦ ∫ f(x,u′)v′ + q(x,u)v′ + g(x,u)v` for the given integrands.
    pub fn assemble_integrands(&self, terms: &Integrands, u: &Vector) -> Result<Vector, FemError> {
        let n = self.dim();
        if u.len() != n {
            return Err(FemError::Length {
                expected: n,
                found: u.len(),
            });
        }
        let mut r = Vector::zeros(n);
        let wrap = |e: &Expression, x: f64, arg: f64| {
            terms.eval(e, x, arg).map_err(|source| FemError::Expression {
                expr: e.to_string(),
                x,
                arg,
                source,
            })
        };
        let dphi = [-1.0 / self.h, 1.0 / self.h];
        self.trace(u, |p, val, slope| {
            let mut flux = 0.0;
            if let Some(f) = &terms.f {
                flux += wrap(f, p.x, slope)?;
            }
            if let Some(q) = &terms.q {
                flux += wrap(q, p.x, val)?;
            }
            let source = match &terms.g {
                Some(g) => wrap(g, p.x, val)?,
                None => 0.0,
            };
            let phi = [p.phi_l, p.phi_r];
            for (k, dof) in self.dofs(p.element).iter().enumerate() {
                if let Some(i) = dof {
                    r[*i] += p.w * (flux * dphi[k] + source * phi[k]);
                }
            }
            Ok(())
        })?;
        Ok(r)
    }

    pub fn assemble_residual(&self, spec: &ProblemSpec, u: &Vector) -> Result<Vector, FemError> {
        self.assemble_integrands(&spec.full_integrands(), u)
    }

    /// The integrand assembly as a shareable closure.
    pub fn assembler(&self, terms: Integrands) -> Assembler {
        let disc = self.clone();
        Arc::new(move |u: &Vector| disc.assemble_integrands(&terms, u).map_err(|e| e.to_string()))
    }

    /// Pencil of `∫ a u′v′ + b u v′ + c u v` against the stiffness matrix.
    pub fn assemble_linear_pencil(
        &self,
        spec: &ProblemSpec,
        a: &Expression,
        b: &Expression,
        c: &Expression,
    ) -> Result<LinearPencil, FemError> {
        let eval = |e: &Expression, x: f64| {
            spec.coefficient(e, x).map_err(|source| FemError::Expression {
                expr: e.to_string(),
                x,
                arg: f64::NAN,
                source,
            })
        };
        for x in self.quadrature_points() {
            let v = eval(a, x)?;
            if !(v > 0.0) {
                return Err(FemError::Ellipticity { x, value: v });
            }
        }
        let full = self.assemble_form(|x| Ok((eval(a, x)?, eval(b, x)?, eval(c, x)?)))?;
        let gradient = self.assemble_form(|x| Ok((eval(a, x)?, 0.0, 0.0)))?;
        Ok(LinearPencil {
            pencil: OperatorPencil::new(full, self.stiffness.clone())?,
            gradient,
            mass: self.mass.clone(),
            shift: 0.0,
        })
    }

    /// Pencil of the declared linearization on one side.
    pub fn linearization(&self, spec: &ProblemSpec, side: Linearization) -> Result<LinearPencil, FemError> {
        let [a, b, c] = spec.linear_coefficients(side);
        self.assemble_linear_pencil(spec, a, b, c)
    }
}

/// A linearized operator with the pieces alignment needs.
#[derive(Debug, Clone)]
pub struct LinearPencil {
    pub pencil: OperatorPencil,
    /// The `a u′v′` part alone.
    pub gradient: DenseMatrix,
    pub mass: DenseMatrix,
    /// Total mass multiple subtracted so far.
    pub shift: f64,
}

/// Eigenvalues of `A v = μ M_h v`, ascending by real part.
pub fn mass_eigenvalues(lp: &LinearPencil) -> Result<Vec<(f64, f64)>, FemError> {
    let chol = cholesky(&lp.mass)?;
    let c = whiten(&lp.pencil.a, &chol);
    let mut v: Vec<(f64, f64)> = if lp.pencil.is_symmetric() {
        let c = (&c + c.transpose()) * 0.5;
        c.symmetric_eigenvalues().iter().map(|&re| (re, 0.0)).collect()
    } else {
        eigen_general(&c)?.into_iter().map(|z| (z.re, z.im)).collect()
    };
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(v)
}

/// Outcome of shifting a pencil onto an exact discrete resonance.
#[derive(Debug, Clone, Serialize)]
pub struct Alignment {
    pub mode: usize,
    /// Mass-pencil eigenvalue removed by the shift.
    pub shift: f64,
    /// Same mode of the gradient part alone.
    pub reference: f64,
    /// `|shift| / |reference − shift|`.
    pub relative: f64,
}

/// Subtracts `μ_k M_h`, where `μ_k` is the `mode`-th eigenvalue of
/// `A v = μ M_h v`, so that the pencil has an exact kernel.
pub fn resonance_align(lp: &LinearPencil, mode: usize) -> Result<(LinearPencil, Alignment), FemError> {
    let vals = mass_eigenvalues(lp)?;
    let k = mode.max(1) - 1;
    let Some(&(mu, im)) = vals.get(k) else {
        return Err(FemError::Misdeclared {
            mode,
            eigenvalue: f64::NAN,
            relative: f64::INFINITY,
        });
    };
    let scale = vals.iter().map(|v| v.0.hypot(v.1)).fold(0.0, f64::max);
    if im.abs() > 1e-8 * scale {
        return Err(FemError::ComplexMode { mode, re: mu, im });
    }
    let reference = eigen_symmetric_pencil(&lp.gradient, &lp.mass)?.values[k];
    let zero_order = (reference - mu).abs();
    let relative = if mu == 0.0 {
        0.0
    } else if zero_order == 0.0 {
        f64::INFINITY
    } else {
        mu.abs() / zero_order
    };
    if relative > RESONANCE_TOLERANCE {
        return Err(FemError::Misdeclared {
            mode,
            eigenvalue: mu,
            relative: 100.0 * relative,
        });
    }
    let a = &lp.pencil.a - &lp.mass * mu;
    let aligned = LinearPencil {
        pencil: OperatorPencil::new(a, lp.pencil.k.clone())?,
        gradient: lp.gradient.clone(),
        mass: lp.mass.clone(),
        shift: lp.shift + mu,
    };
    Ok((
        aligned,
        Alignment {
            mode,
            shift: mu,
            reference,
            relative,
        },
    ))
}

/// Mode closest to resonance, as `(mode, relative)` with `relative` measured
/// like [`Alignment::relative`]. Only the lowest `modes` real modes are scanned.
pub fn nearest_resonance(lp: &LinearPencil, modes: usize) -> Result<(usize, f64), FemError> {
    let vals = mass_eigenvalues(lp)?;
    let reference = eigen_symmetric_pencil(&lp.gradient, &lp.mass)?.values;
    let mut best = (0, f64::INFINITY);
    for (k, (&(mu, im), &r)) in vals.iter().zip(&reference).take(modes).enumerate() {
        if im != 0.0 {
            continue;
        }
        let relative = if mu == 0.0 { 0.0 } else { mu.abs() / (r - mu).abs() };
        if relative < best.1 {
            best = (k + 1, relative);
        }
    }
    Ok(best)
}

/// `1/√λ_min` of the stiffness–mass pencil: the norm of the embedding of the
/// discrete energy space into `L²`.
pub fn embedding_constant(disc: &Discretization) -> Result<f64, FemError> {
    let e = eigen_symmetric_pencil(&disc.stiffness, &disc.mass)?;
    Ok(1.0 / e.values[0].sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Parity;
    use crate::reduction::{analyze_pencil, build_reduced_map};
    use std::f64::consts::PI;

    fn spec(def: ProblemDefinition) -> ProblemSpec {
        ProblemSpec::compile(&def).unwrap()
    }

    fn linear(g: &str) -> ProblemSpec {
        spec(ProblemDefinition {
            g: Some(g.into()),
            ..Default::default()
        })
    }

    fn coef(text: &str) -> Expression {
        Expression::parse(text, &["x"]).unwrap()
    }

    #[test]
    fn linear_residual_is_stiffness_action() {
        let d = Discretization::new(50).unwrap();
        let u = d.interpolate(|x| (PI * x).sin());
        let r = d.assemble_residual(&linear("0"), &u).unwrap();
        assert!((&r - &d.stiffness * &u).amax() <= 1e-12 * r.amax());
    }

    #[test]
    fn zero_is_preserved() {
        let d = Discretization::new(16).unwrap();
        let s = linear("t^3 - 3*t");
        assert_eq!(d.assemble_residual(&s, &Vector::zeros(15)).unwrap().amax(), 0.0);
    }

    #[test]
    fn aligned_eigenvector_has_tiny_residual() {
        let d = Discretization::new(200).unwrap();
        let s = linear("-pi^2*t");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("0"), &coef("-pi^2")).unwrap();
        let (aligned, _) = resonance_align(&lp, 1).unwrap();
        let st = analyze_pencil(&aligned.pencil, 1e-8).unwrap();
        assert_eq!(st.l, 1);
        let u = st.kernel_basis.column(0).into_owned();
        let r = &aligned.pencil.a * &u;
        let kn = crate::numerics::spectral_norm(&d.stiffness);
        assert!(r.norm() <= 1e-10 * kn * u.norm());
    }

    #[test]
    fn identity_pencil() {
        let d = Discretization::new(20).unwrap();
        let s = linear("0");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("0"), &coef("0")).unwrap();
        assert_eq!(lp.pencil.a, d.stiffness);
    }

    #[test]
    fn shifted_laplacian_is_nearly_singular() {
        let d = Discretization::new(200).unwrap();
        let s = linear("0");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("0"), &coef("-pi^2")).unwrap();
        let e = eigen_symmetric_pencil(&lp.pencil.a, &lp.pencil.k).unwrap();
        assert!(e.values[0].abs() < 1e-3);
    }

    #[test]
    fn first_order_term_breaks_symmetry() {
        let d = Discretization::new(20).unwrap();
        let s = linear("0");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("cos(2*pi*x)"), &coef("0")).unwrap();
        assert!(!lp.pencil.is_symmetric());
        let lp = d.assemble_linear_pencil(&s, &coef("1+x"), &coef("0"), &coef("x^2")).unwrap();
        assert_eq!(lp.pencil.a, lp.pencil.a.transpose());
    }

    #[test]
    fn ellipticity_is_enforced() {
        let d = Discretization::new(10).unwrap();
        let s = linear("0");
        let e = d.assemble_linear_pencil(&s, &coef("x - 0.5"), &coef("0"), &coef("0")).unwrap_err();
        assert!(matches!(e, FemError::Ellipticity { .. }));
    }

    #[test]
    fn misdeclared_resonance() {
        let d = Discretization::new(50).unwrap();
        let s = linear("0");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("0"), &coef("-5")).unwrap();
        match resonance_align(&lp, 1).unwrap_err() {
            FemError::Misdeclared { relative, .. } => assert!(relative > 90.0),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn alignment_targets_requested_mode() {
        let d = Discretization::new(200).unwrap();
        let s = linear("0");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("0"), &coef("-4*pi^2")).unwrap();
        let (aligned, _) = resonance_align(&lp, 2).unwrap();
        let st = analyze_pencil(&aligned.pencil, 1e-8).unwrap();
        assert_eq!((st.l, st.nu), (1, 1));
        let u = st.kernel_basis.column(0).into_owned();
        let exact = d.interpolate(|x| (2.0 * PI * x).sin());
        let c = (u.transpose() * &d.mass * &exact)[0] / (exact.transpose() * &d.mass * &exact)[0];
        let err = &u - &exact * c;
        let l2 = (err.transpose() * &d.mass * &err)[0].sqrt() / (c.abs() * (0.5f64).sqrt());
        assert!(l2 < 1e-2, "relative L2 error {l2}");
    }

    #[test]
    fn realigning_changes_nothing() {
        let d = Discretization::new(100).unwrap();
        let s = linear("0");
        let lp = d.assemble_linear_pencil(&s, &coef("1"), &coef("0"), &coef("-pi^2")).unwrap();
        let (once, _) = resonance_align(&lp, 1).unwrap();
        let (_, again) = resonance_align(&once, 1).unwrap();
        let top = mass_eigenvalues(&once).unwrap().last().unwrap().0;
        assert!(again.shift.abs() <= 1e-12 * top);
    }

    #[test]
    fn embedding_constant_tends_to_inverse_pi() {
        let coarse = embedding_constant(&Discretization::new(10).unwrap()).unwrap();
        let fine = embedding_constant(&Discretization::new(200).unwrap()).unwrap();
        let k = 1.0 / PI;
        assert!((coarse - k).abs() < 1e-2 * k);
        assert!((fine - k).abs() < 1e-3 * k);
        let finer = embedding_constant(&Discretization::new(400).unwrap()).unwrap();
        assert!((finer - k).abs() < (fine - k).abs());
    }

    #[test]
    fn reduced_map_for_square_root_principal_part() {
        let d = Discretization::new(200).unwrap();
        let s = spec(ProblemDefinition {
            g: Some("-pi^2*t + sign(t)*abs(t)^0.5".into()),
            gprime_inf: Some("-pi^2".into()),
            principal_inf: PrincipalDefinitions {
                g: Some(PrincipalDefinition::new("sign(t)*abs(t)^0.5", 0.5, Parity::Odd)),
                ..Default::default()
            },
            resonant_at_infinity: true,
            ..Default::default()
        });
        let lp = d.linearization(&s, Linearization::Infinity).unwrap();
        let (aligned, _) = resonance_align(&lp, 1).unwrap();
        let st = analyze_pencil(&aligned.pencil, 1e-8).unwrap();
        let terms = s.principal_integrands(Linearization::Infinity).unwrap();
        let theta = build_reduced_map(&st, &aligned.pencil, d.assembler(terms), 0.5, Parity::Odd).unwrap();
        let plus = theta.evaluate(&[1.0]).unwrap()[0];
        let minus = theta.evaluate(&[-1.0]).unwrap()[0];
        assert!(plus.abs() > 0.0);
        assert_eq!(plus, -minus);
    }
}

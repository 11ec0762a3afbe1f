//! Independent solution search on the discretized problem: shooting for
//! problems of the form `p u″ = g(x, u)` and multi-start Newton on the
//! assembled residual.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fem1d::{Discretization, FemError, ProblemSpec};
use crate::numerics::{eigen_symmetric_pencil, solve_tridiagonal, spectral_norm, Vector};

pub const RK4_STEPS: usize = 10_000;
pub const DIVERGENCE_BOUND: f64 = 1e12;
pub const SHOOT_TOLERANCE: f64 = 1e-10;
pub const DISTINCTNESS_RADIUS: f64 = 1e-4;
pub const NEWTON_TOLERANCE: f64 = 1e-8;
pub const NEWTON_ITERATIONS: usize = 100;
pub const NEWTON_HALVINGS: usize = 30;
/// Extra steps taken after the stopping test first passes.
pub const POLISH_STEPS: usize = 60;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShootError {
    #[error("trajectory exceeded {DIVERGENCE_BOUND:e} at x = {x}")]
    Diverged { x: f64 },
    #[error("g failed at x = {x}, t = {t}: {msg}")]
    Expression { x: f64, t: f64, msg: String },
    #[error("problem is not of the form (p u′)′ = g(x, u) with constant p and q = 0")]
    NotClassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    Newton,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    /// Nodal values at the interior mesh nodes.
    pub coefficients: Vec<f64>,
    /// `|u(1)|` for shooting, `‖R(u)‖₂` for Newton.
    pub residual: f64,
    pub max_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSet {
    pub method: Method,
    pub solutions: Vec<Solution>,
    pub radius: f64,
    pub starts: usize,
    pub converged: usize,
}

impl SolutionSet {
    /// Solutions with `‖u‖∞ > threshold`.
    pub fn nontrivial(&self, threshold: f64) -> impl Iterator<Item = &Solution> {
        self.solutions.iter().filter(move |s| s.max_norm > threshold)
    }

    /// Every solution of `self` has one in `other` within `tol` in max-norm, and vice versa.
    pub fn agrees_with(&self, other: &SolutionSet, tol: f64) -> bool {
        let covered = |a: &SolutionSet, b: &SolutionSet| {
            a.solutions
                .iter()
                .all(|s| b.solutions.iter().any(|t| max_distance(&s.coefficients, &t.coefficients) <= tol))
        };
        covered(self, other) && covered(other, self)
    }
}

fn max_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sorts by max-norm, then lexicographically, and drops near duplicates.
fn canonicalize(mut found: Vec<Solution>, radius: f64) -> Vec<Solution> {
    found.sort_by(|a, b| {
        a.max_norm.total_cmp(&b.max_norm).then_with(|| {
            a.coefficients
                .iter()
                .zip(&b.coefficients)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut kept: Vec<Solution> = Vec::new();
    for s in found {
        if kept.iter().all(|k| max_distance(&k.coefficients, &s.coefficients) > radius) {
            kept.push(s);
        }
    }
    kept
}

struct Classical<'a> {
    spec: &'a ProblemSpec,
    p: f64,
}

impl<'a> Classical<'a> {
    fn new(spec: &'a ProblemSpec) -> Result<Self, ShootError> {
        let p = spec.classical_coefficient().ok_or(ShootError::NotClassical)?;
        Ok(Classical { spec, p })
    }

    fn accel(&self, x: f64, u: f64) -> Result<f64, ShootError> {
        self.spec
            .nonlinearity(&self.spec.g, x, u)
            .map(|g| g / self.p)
            .map_err(|e| ShootError::Expression {
                x,
                t: u,
                msg: e.to_string(),
            })
    }

    /// `(u, u′)` at every RK4 grid point.
    fn trajectory(&self, slope: f64, steps: usize) -> Result<Vec<[f64; 2]>, ShootError> {
        let h = 1.0 / steps as f64;
        let mut y = [0.0, slope];
        let mut out = Vec::with_capacity(steps + 1);
        out.push(y);
        for i in 0..steps {
            let x = i as f64 * h;
            let f = |x: f64, y: [f64; 2]| -> Result<[f64; 2], ShootError> { Ok([y[1], self.accel(x, y[0])?]) };
            let k1 = f(x, y)?;
            let k2 = f(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]])?;
            let k3 = f(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]])?;
            let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
            for j in 0..2 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            if !(y[0].abs() <= DIVERGENCE_BOUND && y[1].abs() <= DIVERGENCE_BOUND) {
                return Err(ShootError::Diverged { x: x + h });
            }
            out.push(y);
        }
        Ok(out)
    }
}

/// `u(1)` for `p u″ = g(x, u)`, `u(0) = 0`, `u′(0) = slope`, by classical RK4.
pub fn shoot(spec: &ProblemSpec, slope: f64) -> Result<f64, ShootError> {
    shoot_with_steps(spec, slope, RK4_STEPS)
}

pub fn shoot_with_steps(spec: &ProblemSpec, slope: f64, steps: usize) -> Result<f64, ShootError> {
    let c = Classical::new(spec)?;
    Ok(c.trajectory(slope, steps)?.last().expect("nonempty")[0])
}

/// Cubic Hermite interpolation of a trajectory at the interior mesh nodes.
fn to_mesh(traj: &[[f64; 2]], disc: &Discretization) -> Vec<f64> {
    let steps = traj.len() - 1;
    let h = 1.0 / steps as f64;
    disc.nodes()
        .iter()
        .map(|&x| {
            let pos = x * steps as f64;
            let i = (pos.floor() as usize).min(steps - 1);
            let s = pos - i as f64;
            let ([u0, v0], [u1, v1]) = (traj[i], traj[i + 1]);
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * u0
                + (s3 - 2.0 * s2 + s) * h * v0
                + (-2.0 * s3 + 3.0 * s2) * u1
                + (s3 - s2) * h * v1
        })
        .collect()
}

/// Scans `slope` over `grid + 1` points of `range`, bisects every sign change
/// of `u(1)` to `|u(1)| ≤ 10⁻¹⁰`, and samples each shot at the mesh nodes.
pub fn find_solutions_shooting(
    spec: &ProblemSpec,
    disc: &Discretization,
    range: [f64; 2],
    grid: usize,
) -> Result<SolutionSet, ShootError> {
    let c = Classical::new(spec)?;
    let grid = grid.max(1);
    let end = |s: f64| c.trajectory(s, RK4_STEPS).ok().map(|t| t.last().expect("nonempty")[0]);
    let slopes: Vec<f64> = (0..=grid)
        .map(|i| range[0] + (range[1] - range[0]) * i as f64 / grid as f64)
        .collect();
    let ends: Vec<Option<f64>> = slopes.par_iter().map(|&s| end(s)).collect();

    let mut roots = Vec::new();
    for i in 0..slopes.len() {
        if ends[i] == Some(0.0) {
            roots.push(slopes[i]);
        }
        if i + 1 == slopes.len() {
            break;
        }
        let (Some(fa), Some(fb)) = (ends[i], ends[i + 1]) else {
            continue;
        };
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let (mut a, mut b, mut fa) = (slopes[i], slopes[i + 1], fa);
        let mut root = None;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let Some(fm) = end(m) else { break };
            if fm.abs() <= SHOOT_TOLERANCE {
                root = Some(m);
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if a == m && b - a <= f64::EPSILON * a.abs().max(1.0) {
                break;
            }
        }
        roots.extend(root);
    }

    let found = roots
        .into_iter()
        .filter_map(|s| {
            let traj = c.trajectory(s, RK4_STEPS).ok()?;
            let coefficients = to_mesh(&traj, disc);
            let max_norm = coefficients.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            Some(Solution {
                residual: traj.last().expect("nonempty")[0].abs(),
                coefficients,
                max_norm,
                slope: Some(s),
            })
        })
        .collect();
    let solutions = canonicalize(found, DISTINCTNESS_RADIUS);
    Ok(SolutionSet {
        method: Method::Shooting,
        converged: solutions.len(),
        solutions,
        radius: DISTINCTNESS_RADIUS,
        starts: slopes.len(),
    })
}

/// Jacobian of the residual as `(lower, diag, upper)` by central differences,
/// three residual pairs per evaluation.
fn tridiagonal_jacobian(
    disc: &Discretization,
    spec: &ProblemSpec,
    u: &Vector,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), FemError> {
    let n = u.len();
    let h = 1e-6 * (1.0 + u.amax());
    let (mut lower, mut diag, mut upper) = (vec![0.0; n.saturating_sub(1)], vec![0.0; n], vec![0.0; n.saturating_sub(1)]);
    for color in 0..3 {
        let mut plus = u.clone();
        let mut minus = u.clone();
        for j in (color..n).step_by(3) {
            plus[j] += h;
            minus[j] -= h;
        }
        let d = (disc.assemble_residual(spec, &plus)? - disc.assemble_residual(spec, &minus)?) / (2.0 * h);
        for j in (color..n).step_by(3) {
            diag[j] = d[j];
            if j > 0 {
                upper[j - 1] = d[j - 1];
            }
            if j + 1 < n {
                lower[j] = d[j + 1];
            }
        }
    }
    Ok((lower, diag, upper))
}

struct NewtonOutcome {
    u: Vector,
    residual: f64,
    converged: bool,
}

fn newton(disc: &Discretization, spec: &ProblemSpec, start: Vector, k_norm: f64) -> NewtonOutcome {
    let done = |u: &Vector, r: f64| r <= NEWTON_TOLERANCE * (1.0 + k_norm * u.norm());
    let mut u = start;
    let Ok(mut r) = disc.assemble_residual(spec, &u) else {
        return NewtonOutcome {
            residual: f64::INFINITY,
            u,
            converged: false,
        };
    };
    let mut rn = r.norm();
    let mut polish = 0;
    for _ in 0..NEWTON_ITERATIONS {
        // once converged, keep stepping while the residual still decreases
        if done(&u, rn) {
            polish += 1;
            if polish > POLISH_STEPS {
                break;
            }
        }
        let Ok((lo, d, up)) = tridiagonal_jacobian(disc, spec, &u) else { break };
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let Ok(step) = solve_tridiagonal(&lo, &d, &up, &rhs) else { break };
        let step = Vector::from_vec(step);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=NEWTON_HALVINGS {
            let trial = &u + &step * lambda;
            if let Ok(rt) = disc.assemble_residual(spec, &trial) {
                let tn = rt.norm();
                if tn < rn {
                    u = trial;
                    r = rt;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let converged = done(&u, rn);
    NewtonOutcome {
        u,
        residual: rn,
        converged,
    }
}

/// Damped Newton from `0`, from `±a·φ_k` for the first three discrete modes
/// `φ_k` (scaled to max-norm 1) and `a ∈ {0.1, 1, 10}`, and from `random`
/// seeded combinations of the first five modes.
pub fn find_solutions_newton(
    spec: &ProblemSpec,
    disc: &Discretization,
    random: usize,
    seed: u64,
) -> Result<SolutionSet, FemError> {
    let n = disc.dim();
    let modes = eigen_symmetric_pencil(&disc.stiffness, &disc.mass)?.vectors;
    let mode = |k: usize| -> Vector {
        let v = modes.column(k).into_owned();
        // fix the sign so the first nonzero entry is positive
        let s = v.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
        v * (s / modes.column(k).amax())
    };
    let amplitudes = [0.1, 1.0, 10.0];
    let mut starts = vec![Vector::zeros(n)];
    for k in 0..3.min(n) {
        let phi = mode(k);
        for a in amplitudes {
            starts.push(&phi * a);
            starts.push(&phi * -a);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..random {
        let a = amplitudes[i % amplitudes.len()];
        let mut v = Vector::zeros(n);
        for k in 0..5.min(n) {
            v += mode(k) * rng.random_range(-1.0..1.0);
        }
        let m = v.amax();
        if m > 0.0 {
            v *= a / m;
        }
        starts.push(v);
    }

    let k_norm = spectral_norm(&disc.stiffness);
    let outcomes: Vec<NewtonOutcome> = starts
        .par_iter()
        .map(|s| newton(disc, spec, s.clone(), k_norm))
        .collect();
    let converged = outcomes.iter().filter(|o| o.converged).count();
    let found = outcomes
        .into_iter()
        .filter(|o| o.converged)
        .map(|o| Solution {
            max_norm: o.u.amax(),
            coefficients: o.u.iter().copied().collect(),
            residual: o.residual,
            slope: None,
        })
        .collect();
    Ok(SolutionSet {
        method: Method::Newton,
        solutions: canonicalize(found, DISTINCTNESS_RADIUS),
        radius: DISTINCTNESS_RADIUS,
        starts: starts.len(),
        converged,
    })
}

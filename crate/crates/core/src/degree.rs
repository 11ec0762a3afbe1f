//! Brouwer degree of finite-dimensional maps on balls centred at the origin.
//!
//! Dimensions one and two are handled exactly (sign formula and winding
//! number). Higher dimensions use a multi-start Newton count of preimages of
//! a small regular value and are flagged heuristic.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Hard cap on winding-number segments.
pub const MAX_WINDING_SEGMENTS: usize = 1 << 20;
/// Absolute boundary threshold for the 1-D and winding engines.
pub const BOUNDARY_EPS: f64 = 1e-12;
/// Relative threshold for the sphere check of homogeneous maps.
pub const SPHERE_EPS: f64 = 1e-10;
/// Points sampled on the unit circle when checking a planar homogeneous map.
pub const CIRCLE_SAMPLES: usize = 360;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("map vanishes on the boundary near {point:?} (|F| = {norm:e})")]
    BoundaryZero { point: Vec<f64>, norm: f64 },
    #[error("winding subdivision exceeded {segments} segments")]
    RefinementLimit { segments: usize },
    #[error("zero at {root:?} has a near-singular Jacobian (det = {det:e})")]
    DegenerateZero { root: Vec<f64>, det: f64 },
    #[error("map vanishes on the unit sphere near {point:?} (relative |F| = {norm:e})")]
    SphereZero { point: Vec<f64>, norm: f64 },
    #[error("map returned a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("engine expects dimension {expected}, map has dimension {found}")]
    Dimension { expected: usize, found: usize },
}

type Evaluator = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A continuous map `R^d -> R^d` with optional structural declarations.
#[derive(Clone)]
pub struct FiniteMap {
    dim: usize,
    eval: Arc<Evaluator>,
    homogeneous: Option<f64>,
    odd: bool,
}

impl fmt::Debug for FiniteMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMap")
            .field("dim", &self.dim)
            .field("homogeneous", &self.homogeneous)
            .field("odd", &self.odd)
            .finish()
    }
}

impl FiniteMap {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        FiniteMap {
            dim,
            eval: Arc::new(eval),
            homogeneous: None,
            odd: false,
        }
    }

    /// Linear map `u -> A u`.
    pub fn linear(a: DMatrix<f64>) -> Self {
        let d = a.nrows();
        FiniteMap::new(d, move |u| (&a * DVector::from_column_slice(u)).as_slice().to_vec())
            .homogeneous(1.0)
            .odd()
    }

    pub fn homogeneous(mut self, order: f64) -> Self {
        self.homogeneous = Some(order);
        self
    }

    pub fn odd(mut self) -> Self {
        self.odd = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> Option<f64> {
        self.homogeneous
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        (self.eval)(u)
    }

    fn eval_checked(&self, u: &[f64]) -> Result<Vec<f64>, DegreeError> {
        let v = self.eval(u);
        if v.len() != self.dim {
            return Err(DegreeError::Dimension {
                expected: self.dim,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(DegreeError::NonFinite { point: u.to_vec() });
        }
        Ok(v)
    }

    /// The map `u -> s · F(u)`.
    pub fn scaled(&self, s: f64) -> FiniteMap {
        let inner = self.eval.clone();
        FiniteMap {
            dim: self.dim,
            eval: Arc::new(move |u| inner(u).into_iter().map(|v| v * s).collect()),
            homogeneous: self.homogeneous,
            odd: self.odd,
        }
    }

    /// The map `u -> F(center + u)`; structural flags are dropped.
    pub fn shifted(&self, center: &[f64]) -> FiniteMap {
        let inner = self.eval.clone();
        let c = center.to_vec();
        FiniteMap::new(self.dim, move |u| {
            let p: Vec<f64> = u.iter().zip(&c).map(|(a, b)| a + b).collect();
            inner(&p)
        })
    }

    /// Worst relative violation of `F(c u) = c^r F(u)` on the given points.
    pub fn homogeneity_violation(&self, points: &[Vec<f64>]) -> Option<f64> {
        let r = self.homogeneous?;
        let mut worst = 0.0f64;
        for u in points {
            let fu = self.eval(u);
            for c in [0.5, 2.0, 10.0] {
                let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
                let fcu = self.eval(&cu);
                let diff: f64 = fu
                    .iter()
                    .zip(&fcu)
                    .map(|(a, b)| (b - c.powf(r) * a).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let scale = norm(&fcu).max(c.powf(r) * norm(&fu));
                if diff > 0.0 {
                    worst = worst.max(diff / scale);
                }
            }
        }
        Some(worst)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeResult {
    pub value: i64,
    pub confidence: Confidence,
    /// For `d <= 2`, whether the Newton count agreed with the exact engine.
    pub cross_check: Option<bool>,
}

impl DegreeResult {
    fn exact(value: i64) -> Self {
        DegreeResult {
            value,
            confidence: Confidence::Exact,
            cross_check: None,
        }
    }

    pub fn is_heuristic(&self) -> bool {
        self.confidence == Confidence::Heuristic
    }
}

/// `(sign F(r) − sign F(−r)) / 2`.
pub fn degree_1d(f: &FiniteMap, radius: f64) -> Result<i64, DegreeError> {
    if f.dim != 1 {
        return Err(DegreeError::Dimension {
            expected: 1,
            found: f.dim,
        });
    }
    let hi = f.eval_checked(&[radius])?[0];
    let lo = f.eval_checked(&[-radius])?[0];
    for (p, v) in [(radius, hi), (-radius, lo)] {
        if v.abs() < BOUNDARY_EPS {
            return Err(DegreeError::BoundaryZero {
                point: vec![p],
                norm: v.abs(),
            });
        }
    }
    Ok((sign(hi) - sign(lo)) / 2)
}

/// Winding number of `θ -> F(r cos θ, r sin θ)` around the origin.
///
/// Parameter intervals are bisected until the image turns by less than a
/// quarter turn over each one.
pub fn degree_2d_winding(
    f: &FiniteMap,
    radius: f64,
    max_segments: usize,
) -> Result<i64, DegreeError> {
    if f.dim != 2 {
        return Err(DegreeError::Dimension {
            expected: 2,
            found: f.dim,
        });
    }
    let at = |theta: f64| -> Result<[f64; 2], DegreeError> {
        let p = [radius * theta.cos(), radius * theta.sin()];
        let v = f.eval_checked(&p)?;
        let n = v[0].hypot(v[1]);
        if n < BOUNDARY_EPS {
            return Err(DegreeError::BoundaryZero {
                point: p.to_vec(),
                norm: n,
            });
        }
        Ok([v[0], v[1]])
    };
    let turn = |a: [f64; 2], b: [f64; 2]| -> f64 {
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        cross.atan2(dot)
    };

    let initial = 64usize;
    let mut segments = initial;
    let mut total = 0.0;
    let mut stack = Vec::new();
    let thetas: Vec<f64> = (0..=initial).map(|k| 2.0 * PI * k as f64 / initial as f64).collect();
    let values = thetas.iter().map(|&t| at(t)).collect::<Result<Vec<_>, _>>()?;
    for k in (0..initial).rev() {
        stack.push((thetas[k], values[k], thetas[k + 1], values[k + 1]));
    }
    while let Some((ta, fa, tb, fb)) = stack.pop() {
        let d = turn(fa, fb);
        if d.abs() < PI / 2.0 {
            total += d;
            continue;
        }
        if segments >= max_segments {
            return Err(DegreeError::RefinementLimit { segments });
        }
        segments += 1;
        let tm = 0.5 * (ta + tb);
        let fm = at(tm)?;
        stack.push((tm, fm, tb, fb));
        stack.push((ta, fa, tm, fm));
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Options for [`degree_nd_regular`].
#[derive(Debug, Clone, Copy)]
pub struct RegularOptions {
    /// Starting points per coordinate axis.
    pub grid: usize,
    /// Central-difference step relative to the radius.
    pub jacobian_step: f64,
}

impl Default for RegularOptions {
    fn default() -> Self {
        RegularOptions {
            grid: 6,
            jacobian_step: 1e-6,
        }
    }
}

fn generic_direction(d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|i| (1.3 + 2.1 * i as f64).sin() + 0.05).collect();
    let n = norm(&w);
    w.into_iter().map(|v| v / n).collect()
}

/// Deterministic points on the sphere of the given radius.
pub fn sphere_samples(d: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    match d {
        0 => vec![],
        1 => vec![vec![radius], vec![-radius]],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![radius * t.cos(), radius * t.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut pts = Vec::with_capacity(count + 2 * d);
            for i in 0..d {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; d];
                    e[i] = s * radius;
                    pts.push(e);
                }
            }
            while pts.len() < count + 2 * d {
                let g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = norm(&g);
                if n > 1e-3 && n <= 1.0 {
                    pts.push(g.into_iter().map(|v| radius * v / n).collect());
                }
            }
            pts
        }
    }
}

fn fd_jacobian(f: &FiniteMap, u: &[f64], h: f64) -> Result<DMatrix<f64>, DegreeError> {
    let d = u.len();
    let mut j = DMatrix::zeros(d, d);
    let mut p = u.to_vec();
    for c in 0..d {
        p[c] = u[c] + h;
        let fp = f.eval_checked(&p)?;
        p[c] = u[c] - h;
        let fm = f.eval_checked(&p)?;
        p[c] = u[c];
        for r in 0..d {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn newton_root(
    f: &FiniteMap,
    target: &[f64],
    start: Vec<f64>,
    h: f64,
    tol: f64,
) -> Option<Vec<f64>> {
    let g = |u: &[f64]| -> Option<Vec<f64>> {
        let v = f.eval_checked(u).ok()?;
        Some(v.iter().zip(target).map(|(a, b)| a - b).collect())
    };
    let mut u = start;
    let mut gu = g(&u)?;
    for _ in 0..100 {
        let gn = norm(&gu);
        if gn <= tol {
            return Some(u);
        }
        let j = fd_jacobian(f, &u, h).ok()?;
        let step = j.lu().solve(&DVector::from_column_slice(&gu))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a - lambda * s).collect();
            if let Some(gt) = g(&trial) {
                if norm(&gt) < gn {
                    u = trial;
                    gu = gt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (norm(&gu) <= tol).then_some(u)
}

/// Degree by counting signed preimages of a small regular value.
///
/// Roots of `F(u) = y` are located by damped Newton from a uniform grid of
/// starts inside the ball; `y` is a fixed generic vector of length
/// `1e-3 · min_{|u|=r} |F(u)|`, so the count equals the degree at 0.
pub fn degree_nd_regular(
    f: &FiniteMap,
    radius: f64,
    opts: RegularOptions,
) -> Result<DegreeResult, DegreeError> {
    let d = f.dim;
    if d == 0 {
        return Ok(DegreeResult::exact(1));
    }
    let boundary = sphere_samples(d, radius, 720.max(200 * d));
    let mut min_b = f64::INFINITY;
    for p in &boundary {
        let n = norm(&f.eval_checked(p)?);
        if n < BOUNDARY_EPS {
            return Err(DegreeError::BoundaryZero {
                point: p.clone(),
                norm: n,
            });
        }
        min_b = min_b.min(n);
    }
    let target: Vec<f64> = generic_direction(d).into_iter().map(|w| 1e-3 * min_b * w).collect();

    let g = opts.grid.max(2);
    let mut starts = vec![vec![0.0; d]];
    let total = g.pow(d as u32);
    for idx in 0..total {
        let mut k = idx;
        let p: Vec<f64> = (0..d)
            .map(|_| {
                let c = k % g;
                k /= g;
                -radius + (c as f64 + 0.5) * 2.0 * radius / g as f64
            })
            .collect();
        if norm(&p) < radius {
            starts.push(p);
        }
    }

    let h = opts.jacobian_step * radius;
    let tol = 1e-11 * min_b;
    let mut roots: Vec<Vec<f64>> = starts
        .into_par_iter()
        .filter_map(|s| newton_root(f, &target, s, h, tol))
        .filter(|u| norm(u) < radius)
        .collect();
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for r in roots {
        let dup = distinct.iter().any(|q| {
            let dist: f64 = q.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            dist <= 1e-6 * radius
        });
        if !dup {
            distinct.push(r);
        }
    }

    let det_scale = (min_b / radius).powi(d as i32);
    let mut value = 0;
    for r in &distinct {
        let det = fd_jacobian(f, r, h)?.determinant();
        if det.abs() < 1e-10 * det_scale {
            return Err(DegreeError::DegenerateZero {
                root: r.clone(),
                det,
            });
        }
        value += sign(det);
    }

    match d {
        1 | 2 => {
            let exact = if d == 1 {
                degree_1d(f, radius)?
            } else {
                degree_2d_winding(f, radius, MAX_WINDING_SEGMENTS)?
            };
            Ok(DegreeResult {
                value: exact,
                confidence: Confidence::Exact,
                cross_check: Some(exact == value),
            })
        }
        _ => Ok(DegreeResult {
            value,
            confidence: Confidence::Heuristic,
            cross_check: None,
        }),
    }
}

/// Degree at 0 of a positively homogeneous map that does not vanish on the
/// unit sphere; the value does not depend on the radius.
pub fn degree_homogeneous(f: &FiniteMap) -> Result<DegreeResult, DegreeError> {
    let d = f.dim;
    if d == 0 {
        return Ok(DegreeResult::exact(1));
    }
    let samples = match d {
        1 => sphere_samples(1, 1.0, 2),
        2 => sphere_samples(2, 1.0, CIRCLE_SAMPLES),
        _ => sphere_samples(d, 1.0, 360 * d),
    };
    let norms = samples
        .iter()
        .map(|p| f.eval_checked(p).map(|v| norm(&v)))
        .collect::<Result<Vec<_>, _>>()?;
    let scale = norms.iter().copied().fold(0.0, f64::max);
    let (imin, nmin) = norms
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty sample");
    if scale == 0.0 || nmin < SPHERE_EPS * scale {
        return Err(DegreeError::SphereZero {
            point: samples[imin].clone(),
            norm: if scale == 0.0 { 0.0 } else { nmin / scale },
        });
    }
    // pre-scale to O(1) on the sphere so absolute engine thresholds apply
    let g = f.scaled(1.0 / scale);
    match d {
        1 => Ok(DegreeResult::exact(degree_1d(&g, 1.0)?)),
        2 => Ok(DegreeResult::exact(degree_2d_winding(&g, 1.0, MAX_WINDING_SEGMENTS)?)),
        _ => degree_nd_regular(&g, 1.0, RegularOptions::default()),
    }
}

/// Degree at 0 on the ball of the given radius with the engine for `F`'s dimension.
pub fn degree_on_ball(f: &FiniteMap, radius: f64) -> Result<DegreeResult, DegreeError> {
    match f.dim {
        1 => degree_1d(f, radius).map(DegreeResult::exact),
        2 => degree_2d_winding(f, radius, MAX_WINDING_SEGMENTS).map(DegreeResult::exact),
        _ => degree_nd_regular(f, radius, RegularOptions::default()),
    }
}

/// Names accepted by [`builtin_map`].
pub const BUILTIN_MAPS: [&str; 8] = [
    "identity",
    "neg-identity",
    "cube",
    "square",
    "complex-square",
    "complex-cube",
    "neg-identity-3d",
    "cubic-axis-3d",
];

pub fn builtin_map(name: &str) -> Option<FiniteMap> {
    let m = match name {
        "identity" => FiniteMap::new(2, |u| u.to_vec()).homogeneous(1.0).odd(),
        "neg-identity" => FiniteMap::new(2, |u| vec![-u[0], -u[1]]).homogeneous(1.0).odd(),
        "cube" => FiniteMap::new(1, |u| vec![u[0].powi(3)]).homogeneous(3.0).odd(),
        "square" => FiniteMap::new(1, |u| vec![u[0] * u[0]]).homogeneous(2.0),
        "complex-square" => {
            FiniteMap::new(2, |u| vec![u[0] * u[0] - u[1] * u[1], 2.0 * u[0] * u[1]]).homogeneous(2.0)
        }
        "complex-cube" => FiniteMap::new(2, |u| {
            let (a, b) = (u[0], u[1]);
            vec![a * a * a - 3.0 * a * b * b, 3.0 * a * a * b - b * b * b]
        })
        .homogeneous(3.0)
        .odd(),
        "neg-identity-3d" => FiniteMap::new(3, |u| u.iter().map(|v| -v).collect()).homogeneous(1.0).odd(),
        "cubic-axis-3d" => FiniteMap::new(3, |u| vec![u[0].powi(3), u[1], u[2]]).odd(),
        _ => return None,
    };
    Some(m)
}

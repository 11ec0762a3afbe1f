//! Sampled validation of user declarations.

use serde::Serialize;

use super::{Discretization, FemError, Linearization, ProblemSpec, Term};
use crate::expr::Expression;
use crate::numerics::Vector;
use crate::reduction::OperatorPencil;

/// Whether `f(x,0)`, `q(x,0)`, `g(x,0)` vanish at every quadrature point.
pub fn dirichlet_zero_check(spec: &ProblemSpec, disc: &Discretization) -> bool {
    disc.quadrature_points().all(|x| {
        [&spec.f, &spec.q, &spec.g]
            .iter()
            .all(|e| spec.nonlinearity(e, x, 0.0).is_ok_and(|v| v.abs() <= 1e-12))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    /// Smallest slope quotient found.
    pub m_hat: f64,
    /// `(x, ξ, η)` where it was attained.
    pub witness: [f64; 3],
    pub samples: usize,
}

/// Lower bound `m̂` of `(f(x,ξ) − f(x,η)) / (ξ − η)` on a deterministic grid
/// with `ξ, η ∈ [−10, 10]`.
///
/// The grid mixes uniform points with `±10·2^−j`, so degeneracy at small
/// slopes (as for `s³`) is seen.
pub fn monotonicity_probe(spec: &ProblemSpec, sample_count: usize) -> Result<MonotonicityReport, FemError> {
    let sample_count = sample_count.max(1000);
    let xs: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
    let uniform = ((2 * sample_count / xs.len()) as f64).sqrt().ceil() as usize + 1;
    let mut pts: Vec<f64> = (0..uniform)
        .map(|i| -10.0 + 20.0 * i as f64 / (uniform - 1) as f64)
        .collect();
    for j in 0..30 {
        let v = 10.0 * 0.5f64.powi(j);
        pts.push(v);
        pts.push(-v);
    }
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut best = MonotonicityReport {
        m_hat: f64::INFINITY,
        witness: [0.0; 3],
        samples: 0,
    };
    for &x in &xs {
        let vals = pts
            .iter()
            .map(|&s| {
                spec.nonlinearity(&spec.f, x, s).map_err(|source| FemError::Expression {
                    expr: spec.f.to_string(),
                    x,
                    arg: s,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let quotient = (vals[j] - vals[i]) / (pts[j] - pts[i]);
                best.samples += 1;
                if quotient < best.m_hat {
                    best.m_hat = quotient;
                    best.witness = [x, pts[j], pts[i]];
                }
            }
        }
    }
    Ok(best)
}

/// Growth check of the remainder after the linearization and principal part.
#[derive(Debug, Clone, Serialize)]
pub struct RemainderReport {
    pub term: Term,
    pub side: Linearization,
    /// Exponent the remainder is compared against.
    pub order: f64,
    pub amplitudes: Vec<f64>,
    /// `max_x |h − h′ t − h^k| / |t|^order` at each amplitude.
    pub ratios: Vec<f64>,
    pub passed: bool,
}

/// For each of `f`, `q`, `g`: the remainder `h − h′·t − h^k` must shrink
/// relative to `|t|^k` as `|t|` moves through `{10², 10³, 10⁴}` (infinity)
/// or `{10⁻², 10⁻³, 10⁻⁴}` (zero). Without a principal part the comparison
/// exponent is 1.
pub fn remainder_check(spec: &ProblemSpec, side: Linearization) -> Vec<RemainderReport> {
    let amplitudes = match side {
        Linearization::Infinity => vec![1e2, 1e3, 1e4],
        Linearization::Zero => vec![1e-2, 1e-3, 1e-4],
    };
    let parts = spec.principal(side);
    let order = parts.order().unwrap_or(1.0);
    let [df, dq, dg] = spec.linear_coefficients(side);
    let terms: [(Term, &Expression, &Expression); 3] =
        [(Term::F, &spec.f, df), (Term::Q, &spec.q, dq), (Term::G, &spec.g, dg)];
    let xs: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();

    terms
        .iter()
        .map(|&(term, h, dh)| {
            let principal = parts.get(term).map(|p| &p.expr);
            let mut ratios = Vec::with_capacity(amplitudes.len());
            let mut failed = false;
            for &amp in &amplitudes {
                let mut worst = 0.0f64;
                for &x in &xs {
                    for t in [amp, -amp] {
                        let hv = spec.nonlinearity(h, x, t);
                        let lin = spec.coefficient(dh, x).map(|c| c * t);
                        let pk = principal.map_or(Ok(0.0), |e| spec.nonlinearity(e, x, t));
                        match (hv, lin, pk) {
                            (Ok(hv), Ok(lin), Ok(pk)) => {
                                let floor = 1e-13 * (hv.abs() + lin.abs() + pk.abs());
                                let rem = ((hv - lin - pk).abs() - floor).max(0.0);
                                worst = worst.max(rem / amp.powf(order));
                            }
                            _ => failed = true,
                        }
                    }
                }
                ratios.push(worst);
            }
            let first = ratios[0];
            let last = ratios[ratios.len() - 1];
            let passed = !failed && (ratios.iter().all(|&r| r <= 1e-9) || last < first);
            RemainderReport {
                term,
                side,
                order,
                amplitudes: amplitudes.clone(),
                ratios,
                passed,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GateauxReport {
    pub step: f64,
    /// Worst `‖(R(εv) − R(0))/ε − A v‖ / max(‖A v‖, ‖K v‖)` over the probe directions.
    pub max_relative_error: f64,
    pub passed: bool,
}

pub const GATEAUX_TOLERANCE: f64 = 1e-2;

/// Forward-difference check of the declared linearization at zero along the
/// first three sine modes.
pub fn gateaux_check(
    spec: &ProblemSpec,
    disc: &Discretization,
    linear: &OperatorPencil,
) -> Result<GateauxReport, FemError> {
    let step = 1e-6;
    let r0 = disc.assemble_residual(spec, &Vector::zeros(disc.dim()))?;
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let v = disc.interpolate(|x| (k as f64 * std::f64::consts::PI * x).sin());
        let v = &v / v.amax();
        let r = disc.assemble_residual(spec, &(&v * step))?;
        let fd = (r - &r0) / step;
        let av = &linear.a * &v;
        let scale = av.norm().max((&disc.stiffness * &v).norm());
        worst = worst.max((fd - av).norm() / scale);
    }
    Ok(GateauxReport {
        step,
        max_relative_error: worst,
        passed: worst <= GATEAUX_TOLERANCE,
    })
}

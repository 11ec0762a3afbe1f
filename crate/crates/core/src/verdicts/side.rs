//! Linearization, alignment, reduction and index on one side.

use serde::Serialize;

use crate::degree::sphere_samples;
use crate::degree::CIRCLE_SAMPLES;
use crate::expr::Parity;
use crate::fem1d::{
    mass_eigenvalues, resonance_align, Alignment, Discretization, FemError, LinearPencil,
    Linearization, ProblemSpec,
};
use crate::reduction::{
    analyze_pencil_with, build_reduced_map, index_at_infinity, index_at_zero, IndexResult,
    PencilOptions, ReducedMap, SpectralStructure,
};

/// Eigenvalues listed per pencil in reports.
pub const SPECTRUM_ROWS: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct PencilSummary {
    pub side: Linearization,
    pub dim: usize,
    pub symmetric: bool,
    /// Lowest eigenvalues of `A v = μ M_h v` as `[re, im]`.
    pub mass_eigenvalues: Vec<[f64; 2]>,
    pub nu: usize,
    pub n0: usize,
    pub l: usize,
    pub complex_pairs: usize,
    pub root_exponent: usize,
    pub t_residual: f64,
    pub det_t: f64,
}

impl PencilSummary {
    pub fn new(side: Linearization, lp: &LinearPencil, s: &SpectralStructure) -> Result<Self, FemError> {
        let eig = mass_eigenvalues(lp)?;
        Ok(PencilSummary {
            side,
            dim: s.dim(),
            symmetric: s.symmetric,
            mass_eigenvalues: eig.iter().take(SPECTRUM_ROWS).map(|&(re, im)| [re, im]).collect(),
            nu: s.nu,
            n0: s.n0,
            l: s.l,
            complex_pairs: s.complex_pairs,
            root_exponent: s.root_exponent,
            t_residual: s.t_residual,
            det_t: s.det_t,
        })
    }
}

/// `Θ` on the unit sphere of kernel coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaSamples {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    pub min_norm: f64,
    pub max_norm: f64,
    /// `min_norm > 10⁻¹⁰ · max_norm`.
    pub nonvanishing: bool,
}

const REPORTED_SAMPLES: usize = 8;

fn sample_theta(theta: &ReducedMap) -> Result<ThetaSamples, String> {
    let d = theta.dim;
    let pts = match d {
        1 => sphere_samples(1, 1.0, 2),
        2 => sphere_samples(2, 1.0, CIRCLE_SAMPLES),
        _ => sphere_samples(d, 1.0, CIRCLE_SAMPLES * d),
    };
    let mut values = Vec::with_capacity(pts.len());
    for p in &pts {
        values.push(theta.evaluate(p).map_err(|e| e.to_string())?);
    }
    let norms: Vec<f64> = values.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let min_norm = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    // keep the report small: evenly spaced subset
    let stride = pts.len().div_ceil(REPORTED_SAMPLES).max(1);
    let keep: Vec<usize> = (0..pts.len()).step_by(stride).collect();
    Ok(ThetaSamples {
        points: keep.iter().map(|&i| pts[i].clone()).collect(),
        values: keep.iter().map(|&i| values[i].clone()).collect(),
        min_norm,
        max_norm,
        nonvanishing: max_norm > 0.0 && min_norm > 1e-10 * max_norm,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SideReport {
    pub side: Linearization,
    pub pencil: PencilSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Alignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSamples>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexResult>,
    /// Why the index could not be computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_error: Option<String>,
}

impl SideReport {
    pub fn index_value(&self) -> Option<i64> {
        self.index.as_ref().map(|i| i.value)
    }

    pub fn heuristic(&self) -> bool {
        self.index.as_ref().is_some_and(|i| i.heuristic)
    }
}

/// Builds the declared linearization, aligns it when `align` is set, and
/// computes the index with the principal parts of that side.
pub fn run_side(
    spec: &ProblemSpec,
    disc: &Discretization,
    side: Linearization,
    align: bool,
    opts: &PencilOptions,
) -> Result<SideReport, FemError> {
    let lp = disc.linearization(spec, side)?;
    let (lp, alignment) = if align {
        let (a, al) = resonance_align(&lp, spec.resonance_mode(side))?;
        (a, Some(al))
    } else {
        (lp, None)
    };
    let structure = analyze_pencil_with(&lp.pencil, opts)?;
    let pencil = PencilSummary::new(side, &lp, &structure)?;

    let mut report = SideReport {
        side,
        pencil,
        alignment,
        theta: None,
        index: None,
        index_error: None,
    };
    let index = |theta: Option<&ReducedMap>| match side {
        Linearization::Zero => index_at_zero(&structure, theta),
        Linearization::Infinity => index_at_infinity(&structure, theta),
    };
    if structure.l == 0 {
        report.index = Some(index(None)?);
        return Ok(report);
    }
    let parts = spec.principal(side);
    let (Some(order), Some(terms)) = (parts.order(), spec.principal_integrands(side)) else {
        report.index_error = Some("kernel is nontrivial but no principal part is declared".into());
        return Ok(report);
    };
    let parity = parts.parity();
    let theta = match build_reduced_map(&structure, &lp.pencil, disc.assembler(terms), order, parity) {
        Ok(t) => t,
        Err(e) => {
            report.index_error = Some(e.to_string());
            return Ok(report);
        }
    };
    match sample_theta(&theta) {
        Ok(s) => report.theta = Some(s),
        Err(e) => {
            report.index_error = Some(e);
            return Ok(report);
        }
    }
    match index(Some(&theta)) {
        Ok(i) => report.index = Some(i),
        Err(e) => report.index_error = Some(e.to_string()),
    }
    Ok(report)
}

/// Parity of the principal parts on `side`, if any are declared.
pub fn principal_parity(spec: &ProblemSpec, side: Linearization) -> Option<Parity> {
    let parts = spec.principal(side);
    (!parts.is_empty()).then(|| parts.parity())
}

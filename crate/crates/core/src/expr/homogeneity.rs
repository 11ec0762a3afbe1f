use serde::Serialize;

use super::{Expression, HomogeneityDecl, Parity, HOMOGENEITY_TOLERANCE};

/// Outcome of a sampled homogeneity and parity check.
#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityReport {
    pub max_homogeneity_violation: f64,
    pub max_parity_violation: f64,
    pub samples: usize,
    pub passed: bool,
    /// Evaluation failure, if one occurred; the check fails in that case.
    pub error: Option<String>,
}

const SCALES: [f64; 3] = [0.5, 2.0, 10.0];

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / a.abs().max(b.abs())
}

/// Checks `h(x, c t) = c^r h(x, t)` and the declared parity on a fixed grid.
///
/// The grid uses `t = ±2^j` for `j = -3..=3` and `c` in `{0.5, 2, 10}`; the
/// number of `x` nodes in `[0, 1]` grows with `sample_count` (at least 16).
pub fn check_homogeneity(
    expr: &Expression,
    decl: &HomogeneityDecl,
    sample_count: usize,
) -> HomogeneityReport {
    check_homogeneity_with(expr, decl, sample_count, &[])
}

/// Like [`check_homogeneity`], with extra fixed bindings for parameters.
pub fn check_homogeneity_with(
    expr: &Expression,
    decl: &HomogeneityDecl,
    sample_count: usize,
    fixed: &[(&str, f64)],
) -> HomogeneityReport {
    let sample_count = sample_count.max(16);
    let per_x = 14 * SCALES.len();
    let nx = sample_count.div_ceil(per_x).max(2);

    let mut values = vec![0.0; expr.variables().len()];
    for (name, v) in fixed {
        if let Some(i) = expr.slot(name) {
            values[i] = *v;
        }
    }
    let x_slot = expr.slot("x");
    let h_slot = expr.slot(&decl.variable);

    let mut hom = 0.0f64;
    let mut par = 0.0f64;
    let mut samples = 0;
    let mut error = None;

    let mut eval = |x: f64, t: f64| -> Option<f64> {
        if let Some(i) = x_slot {
            values[i] = x;
        }
        if let Some(i) = h_slot {
            values[i] = t;
        }
        match expr.eval(&values) {
            Ok(v) => Some(v),
            Err(e) => {
                error.get_or_insert(e.to_string());
                None
            }
        }
    };

    'outer: for ix in 0..nx {
        let x = ix as f64 / (nx - 1) as f64;
        for j in -3..=3 {
            for sign in [1.0, -1.0] {
                let t = sign * 2f64.powi(j);
                let Some(h) = eval(x, t) else { break 'outer };
                for c in SCALES {
                    let Some(hc) = eval(x, c * t) else { break 'outer };
                    hom = hom.max(rel(hc, c.powf(decl.order) * h));
                    samples += 1;
                }
                if sign > 0.0 {
                    let Some(hm) = eval(x, -t) else { break 'outer };
                    let v = match decl.parity {
                        Parity::Odd => rel(hm, -h),
                        Parity::Even => rel(hm, h),
                        Parity::None => 0.0,
                    };
                    par = par.max(v);
                }
            }
        }
    }

    let passed = error.is_none() && hom <= HOMOGENEITY_TOLERANCE && par <= HOMOGENEITY_TOLERANCE;
    HomogeneityReport {
        max_homogeneity_violation: hom,
        max_parity_violation: par,
        samples,
        passed,
        error,
    }
}

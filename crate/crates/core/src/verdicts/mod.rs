//! Decision procedures: each checks its hypotheses on the discretized problem,
//! computes the indices it needs and states a conclusion only when every
//! checklist item passed.

mod side;

use serde::Serialize;

use crate::expr::Parity;
use crate::fem1d::{
    dirichlet_zero_check, embedding_constant, gateaux_check, mass_eigenvalues, monotonicity_probe,
    nearest_resonance, remainder_check, Discretization, FemError, Linearization, ProblemSpec,
    RESONANCE_TOLERANCE,
};
use crate::reduction::{IndexResult, PencilOptions, Side};

pub use side::{run_side, PencilSummary, SideReport, ThetaSamples, SPECTRUM_ROWS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    SolvResonant,
    SolvCoercive,
    NontrivialResonantInf,
    NontrivialDoubleDegenerate,
    NontrivialCoerciveDegenerateZero,
    NontrivialParity,
}

impl TheoremId {
    /// Order used by automatic selection.
    pub const AUTO_ORDER: [TheoremId; 6] = [
        TheoremId::NontrivialParity,
        TheoremId::SolvCoercive,
        TheoremId::SolvResonant,
        TheoremId::NontrivialResonantInf,
        TheoremId::NontrivialDoubleDegenerate,
        TheoremId::NontrivialCoerciveDegenerateZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::SolvResonant => "solv_resonant",
            TheoremId::SolvCoercive => "solv_coercive",
            TheoremId::NontrivialResonantInf => "nontrivial_resonant_inf",
            TheoremId::NontrivialDoubleDegenerate => "nontrivial_double_degenerate",
            TheoremId::NontrivialCoerciveDegenerateZero => "nontrivial_coercive_degenerate_zero",
            TheoremId::NontrivialParity => "nontrivial_parity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Solvable,
    NontrivialSolutionExists,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Concluded,
    Inconclusive,
    /// A precondition failed; the procedure does not apply.
    Refused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    /// Applicability; failure means refusal.
    Guard,
    Hypothesis,
    /// The index comparison that yields the conclusion.
    Decision,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub kind: ItemKind,
    pub passed: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningResult {
    pub parameter: String,
    pub value: f64,
    pub iterations: usize,
    /// Eigenvalue of the tuned mode before alignment.
    pub residual_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub theorem: TheoremId,
    pub status: Status,
    pub conclusion: Conclusion,
    pub checklist: Vec<CheckItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero: Option<SideReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infinity: Option<SideReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningResult>,
    /// Some index came from the multi-start degree engine.
    pub heuristic: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn index_zero(&self) -> Option<&IndexResult> {
        self.zero.as_ref().and_then(|s| s.index.as_ref())
    }

    pub fn index_infinity(&self) -> Option<&IndexResult> {
        self.infinity.as_ref().and_then(|s| s.index.as_ref())
    }

    pub fn all_passed(&self) -> bool {
        self.checklist.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerdictOptions {
    pub pencil: PencilOptions,
}

struct Builder {
    theorem: TheoremId,
    items: Vec<CheckItem>,
    zero: Option<SideReport>,
    infinity: Option<SideReport>,
    tuning: Option<TuningResult>,
    notes: Vec<String>,
}

impl Builder {
    fn new(theorem: TheoremId) -> Self {
        Builder {
            theorem,
            items: Vec::new(),
            zero: None,
            infinity: None,
            tuning: None,
            notes: Vec::new(),
        }
    }

    fn item(&mut self, kind: ItemKind, name: &str, passed: bool, evidence: impl Into<String>) -> bool {
        self.items.push(CheckItem {
            name: name.to_string(),
            kind,
            passed,
            evidence: evidence.into(),
        });
        passed
    }

    fn guard(&mut self, name: &str, passed: bool, evidence: impl Into<String>) -> bool {
        self.item(ItemKind::Guard, name, passed, evidence)
    }

    fn hyp(&mut self, name: &str, passed: bool, evidence: impl Into<String>) -> bool {
        self.item(ItemKind::Hypothesis, name, passed, evidence)
    }

    fn refused(&self) -> bool {
        self.items.iter().any(|c| c.kind == ItemKind::Guard && !c.passed)
    }

    fn finish(self, success: Conclusion) -> Verdict {
        let refused = self.refused();
        let all = self.items.iter().all(|c| c.passed);
        let (status, conclusion) = if refused {
            (Status::Refused, Conclusion::Inconclusive)
        } else if all {
            (Status::Concluded, success)
        } else {
            (Status::Inconclusive, Conclusion::Inconclusive)
        };
        let heuristic = [&self.zero, &self.infinity]
            .iter()
            .any(|s| s.as_ref().is_some_and(|s| s.heuristic()));
        let mut notes = self.notes;
        if conclusion == Conclusion::Inconclusive && !refused {
            notes.push("higher-order refinements of the principal terms are not attempted".into());
        }
        Verdict {
            theorem: self.theorem,
            status,
            conclusion,
            checklist: self.items,
            zero: self.zero,
            infinity: self.infinity,
            tuning: self.tuning,
            heuristic,
            notes,
        }
    }
}

fn parity_name(p: Option<Parity>) -> &'static str {
    match p {
        Some(Parity::Odd) => "odd",
        Some(Parity::Even) => "even",
        Some(Parity::None) => "mixed",
        None => "undeclared",
    }
}

fn remainder_items(b: &mut Builder, spec: &ProblemSpec, side: Linearization) {
    let label = match side {
        Linearization::Zero => "zero",
        Linearization::Infinity => "infinity",
    };
    for r in remainder_check(spec, side) {
        b.hyp(
            &format!("{} remainder at {label} is of lower order", r.term.name()),
            r.passed,
            format!("ratios {:?} at |t| = {:?} (exponent {})", r.ratios, r.amplitudes, r.order),
        );
    }
}

fn gateaux_item(b: &mut Builder, spec: &ProblemSpec, disc: &Discretization) {
    let res = disc
        .linearization(spec, Linearization::Zero)
        .and_then(|lp| gateaux_check(spec, disc, &lp.pencil));
    match res {
        Ok(g) => b.hyp(
            "declared linearization at zero matches finite differences",
            g.passed,
            format!("relative error {:e} (step {:e})", g.max_relative_error, g.step),
        ),
        Err(e) => b.hyp("declared linearization at zero matches finite differences", false, e.to_string()),
    };
}

/// Runs one side and records the outcome; returns whether an index exists.
fn side_items(
    b: &mut Builder,
    spec: &ProblemSpec,
    disc: &Discretization,
    side: Linearization,
    align: bool,
    opts: &VerdictOptions,
) -> bool {
    let label = match side {
        Linearization::Zero => "zero",
        Linearization::Infinity => "infinity",
    };
    match run_side(spec, disc, side, align, &opts.pencil) {
        Ok(rep) => {
            if align {
                let al = rep.alignment.as_ref().expect("aligned run");
                b.guard(
                    &format!("declared resonance at {label} exists"),
                    true,
                    format!("mode {} eigenvalue {:e} shifted out ({:.3e} relative)", al.mode, al.shift, al.relative),
                );
                b.guard(
                    &format!("kernel at {label} is nonempty"),
                    rep.pencil.l > 0,
                    format!("l = {}, n0 = {}", rep.pencil.l, rep.pencil.n0),
                );
            }
            if let Some(th) = &rep.theta {
                b.hyp(
                    &format!("reduced map at {label} does not vanish on the kernel sphere"),
                    th.nonvanishing,
                    format!("min |Θ| = {:e}, max |Θ| = {:e}", th.min_norm, th.max_norm),
                );
            }
            let ok = rep.index.is_some();
            b.hyp(
                &format!("index at {label} is defined"),
                ok,
                match (&rep.index, &rep.index_error) {
                    (Some(i), _) => format!(
                        "ind = {} (nu = {}, n0 = {}, l = {}, deg Θ = {})",
                        i.value, i.nu, i.n0, i.l, i.theta_degree
                    ),
                    (None, Some(e)) => e.clone(),
                    (None, None) => "not computed".into(),
                },
            );
            match side {
                Linearization::Zero => b.zero = Some(rep),
                Linearization::Infinity => b.infinity = Some(rep),
            }
            ok
        }
        Err(e @ (FemError::Misdeclared { .. } | FemError::ComplexMode { .. })) => {
            b.guard(&format!("declared resonance at {label} exists"), false, e.to_string());
            false
        }
        Err(e) => {
            b.hyp(&format!("spectral analysis at {label}"), false, e.to_string());
            false
        }
    }
}

fn differ_item(b: &mut Builder) {
    let z = b.zero.as_ref().and_then(|s| s.index_value());
    let i = b.infinity.as_ref().and_then(|s| s.index_value());
    let (passed, ev) = match (z, i) {
        (Some(z), Some(i)) => (z != i, format!("ind(0) = {z}, ind(∞) = {i}")),
        _ => (false, "an index is missing".to_string()),
    };
    b.item(ItemKind::Decision, "indices at zero and infinity differ", passed, ev);
}

/// Solvability at resonance at infinity with odd principal parts.
pub fn solv_resonant(spec: &ProblemSpec, disc: &Discretization, opts: &VerdictOptions) -> Verdict {
    let mut b = Builder::new(TheoremId::SolvResonant);
    let inf = Linearization::Infinity;
    let flag = b.guard("resonant at infinity", spec.is_resonant(inf), format!("flag = {}", spec.is_resonant(inf)));
    let parity = side::principal_parity(spec, inf);
    let declared = b.guard(
        "principal parts at infinity declared",
        parity.is_some(),
        parity_name(parity),
    );
    if !(flag && declared) {
        return b.finish(Conclusion::Solvable);
    }
    b.hyp("principal parts at infinity are odd", parity == Some(Parity::Odd), parity_name(parity));
    remainder_items(&mut b, spec, inf);
    if side_items(&mut b, spec, disc, inf, true, opts) {
        let v = b.infinity.as_ref().and_then(|s| s.index_value()).unwrap_or(0);
        b.item(ItemKind::Decision, "index at infinity is nonzero", v != 0, format!("ind(∞) = {v}"));
    }
    b.finish(Conclusion::Solvable)
}

/// Evidence for the coercivity conditions; shared with the degenerate-zero procedure.
fn coercive_items(b: &mut Builder, spec: &ProblemSpec, disc: &Discretization) -> bool {
    let Some(delta) = spec.definition.delta else {
        b.guard("delta supplied", false, "no delta in the problem");
        return false;
    };
    b.guard("delta supplied", true, format!("delta = {delta}"));

    let mono = monotonicity_probe(spec, 4000);
    let kemb = embedding_constant(disc);
    let (m, k) = match (mono, kemb) {
        (Ok(m), Ok(k)) => (m, k),
        (Err(e), _) | (_, Err(e)) => {
            b.hyp("gradient term strongly monotone", false, e.to_string());
            return false;
        }
    };
    b.hyp(
        "gradient term strongly monotone",
        m.m_hat > 0.0,
        format!("m = {:e} at (x, ξ, η) = {:?} over {} samples", m.m_hat, m.witness, m.samples),
    );
    let bound = m.m_hat / (k * k);
    b.hyp(
        "delta below m / K²",
        delta < bound,
        format!("delta = {delta}, m / K² = {bound} (K = {k})"),
    );

    let mut witness = None;
    'grid: for x in disc.quadrature_points() {
        for j in -10..=10 {
            for sign in [1.0, -1.0] {
                let t = sign * 2f64.powi(j);
                match spec.nonlinearity(&spec.g, x, t) {
                    Ok(g) if g * t >= -delta * t * t - 1e-12 * t * t => {}
                    Ok(g) => {
                        witness = Some(format!("g t = {} < -delta t² at x = {x}, t = {t}", g * t));
                        break 'grid;
                    }
                    Err(e) => {
                        witness = Some(format!("g fails at x = {x}, t = {t}: {e}"));
                        break 'grid;
                    }
                }
            }
        }
    }
    b.hyp(
        "g(x,t) t >= -delta t² on the sample grid",
        witness.is_none(),
        witness.unwrap_or_else(|| "no violation at quadrature points, |t| = 2^-10..2^10".into()),
    );

    let amps = [1e2, 1e3, 1e4];
    let mut ratios = Vec::new();
    let mut failed = None;
    for &t in &amps {
        let mut worst = 0.0f64;
        for x in disc.quadrature_points() {
            for s in [t, -t] {
                match spec.nonlinearity(&spec.q, x, s) {
                    Ok(v) => worst = worst.max((v / s).abs()),
                    Err(e) => failed = Some(e.to_string()),
                }
            }
        }
        ratios.push(worst);
    }
    let decays = failed.is_none() && (ratios.iter().all(|&r| r <= 1e-9) || ratios[2] < ratios[0]);
    b.hyp(
        "q is asymptotically zero",
        decays,
        failed.unwrap_or_else(|| format!("max |q / t| = {ratios:?} at |t| = {amps:?}")),
    );
    !b.refused() && b.items.iter().all(|c| c.passed)
}

/// Solvability under a one-sided growth bound on `g`.
pub fn solv_coercive(spec: &ProblemSpec, disc: &Discretization, _opts: &VerdictOptions) -> Verdict {
    let mut b = Builder::new(TheoremId::SolvCoercive);
    if coercive_items(&mut b, spec, disc) {
        b.notes.push("index at infinity is 1 by the a priori bound".into());
        b.infinity = Some(a_priori_infinity(disc));
    }
    b.finish(Conclusion::Solvable)
}

fn a_priori_infinity(disc: &Discretization) -> SideReport {
    let index = IndexResult {
        side: Side::Infinity,
        value: 1,
        heuristic: false,
        nu: 0,
        n0: 0,
        l: 0,
        theta_degree: 1,
        complement_factor: 1,
    };
    let pencil = PencilSummary {
        side: Linearization::Infinity,
        dim: disc.dim(),
        symmetric: true,
        mass_eigenvalues: Vec::new(),
        nu: 0,
        n0: 0,
        l: 0,
        complex_pairs: 0,
        root_exponent: 0,
        t_residual: 0.0,
        det_t: 1.0,
    };
    SideReport {
        side: Linearization::Infinity,
        pencil,
        alignment: None,
        theta: None,
        index: Some(index),
        index_error: None,
    }
}

/// Guard that a side is neither declared resonant nor within alignment
/// distance of a discrete resonance, and has an empty numerical kernel.
fn nondegenerate_guard(b: &mut Builder, spec: &ProblemSpec, disc: &Discretization, side: Linearization, rep: &SideReport) -> bool {
    let label = match side {
        Linearization::Zero => "zero",
        Linearization::Infinity => "infinity",
    };
    let name = format!("linearization at {label} is nondegenerate");
    if spec.is_resonant(side) {
        return b.guard(&name, false, format!("declared resonant at {label}"));
    }
    if rep.pencil.l > 0 {
        return b.guard(&name, false, format!("kernel dimension {}", rep.pencil.l));
    }
    let near = disc.linearization(spec, side).and_then(|lp| nearest_resonance(&lp, SPECTRUM_ROWS));
    match near {
        Ok((mode, rel)) if rel <= RESONANCE_TOLERANCE => b.guard(
            &name,
            false,
            format!("mode {mode} is within {:.2}% of resonance", 100.0 * rel),
        ),
        Ok((mode, rel)) => b.guard(
            &name,
            true,
            format!("nu = {}, closest mode {mode} at {:.1}% from resonance", rep.pencil.nu, 100.0 * rel),
        ),
        Err(e) => b.guard(&name, false, e.to_string()),
    }
}

fn zero_solution_item(b: &mut Builder, spec: &ProblemSpec, disc: &Discretization) -> bool {
    let ok = dirichlet_zero_check(spec, disc);
    b.guard("u = 0 solves the problem", ok, if ok { "f, q, g vanish at t = 0" } else { "some term is nonzero at t = 0" })
}

/// Nontrivial solution: nondegenerate at zero, resonant at infinity with even parts.
pub fn nontrivial_resonant_inf(spec: &ProblemSpec, disc: &Discretization, opts: &VerdictOptions) -> Verdict {
    let mut b = Builder::new(TheoremId::NontrivialResonantInf);
    let inf = Linearization::Infinity;
    let zero_ok = zero_solution_item(&mut b, spec, disc);
    let flag = b.guard("resonant at infinity", spec.is_resonant(inf), format!("flag = {}", spec.is_resonant(inf)));
    let parity = side::principal_parity(spec, inf);
    let declared = b.guard("principal parts at infinity declared", parity.is_some(), parity_name(parity));
    if !(zero_ok && flag && declared) {
        return b.finish(Conclusion::NontrivialSolutionExists);
    }
    match run_side(spec, disc, Linearization::Zero, false, &opts.pencil) {
        Ok(rep) => {
            let nondeg = nondegenerate_guard(&mut b, spec, disc, Linearization::Zero, &rep);
            b.zero = Some(rep);
            if !nondeg {
                b.notes.push("a degenerate zero side needs the double-degenerate procedure".into());
                return b.finish(Conclusion::NontrivialSolutionExists);
            }
        }
        Err(e) => {
            b.hyp("spectral analysis at zero", false, e.to_string());
        }
    }
    gateaux_item(&mut b, spec, disc);
    b.hyp("principal parts at infinity are even", parity == Some(Parity::Even), parity_name(parity));
    remainder_items(&mut b, spec, inf);
    side_items(&mut b, spec, disc, inf, true, opts);
    differ_item(&mut b);
    b.finish(Conclusion::NontrivialSolutionExists)
}

/// Nontrivial solution when both linearizations are resonant.
pub fn nontrivial_double_degenerate(spec: &ProblemSpec, disc: &Discretization, opts: &VerdictOptions) -> Verdict {
    let mut b = Builder::new(TheoremId::NontrivialDoubleDegenerate);
    let (zero, inf) = (Linearization::Zero, Linearization::Infinity);
    let zero_ok = zero_solution_item(&mut b, spec, disc);
    let flags = b.guard(
        "resonant at zero and at infinity",
        spec.is_resonant(zero) && spec.is_resonant(inf),
        format!("flags = ({}, {})", spec.is_resonant(zero), spec.is_resonant(inf)),
    );
    let pz = side::principal_parity(spec, zero);
    let pi = side::principal_parity(spec, inf);
    let declared = b.guard(
        "principal parts declared on both sides",
        pz.is_some() && pi.is_some(),
        format!("zero: {}, infinity: {}", parity_name(pz), parity_name(pi)),
    );
    if !(zero_ok && flags && declared) {
        return b.finish(Conclusion::NontrivialSolutionExists);
    }
    let k = spec.principal(inf).order().unwrap_or(f64::NAN);
    b.hyp("order at infinity lies in (0, 1)", k > 0.0 && k < 1.0, format!("k = {k}"));
    let paired = matches!(
        (pi, pz),
        (Some(Parity::Odd), Some(Parity::Even)) | (Some(Parity::Even), Some(Parity::Odd))
    );
    b.hyp(
        "principal parts have opposite parity",
        paired,
        format!("infinity {}, zero {}", parity_name(pi), parity_name(pz)),
    );
    gateaux_item(&mut b, spec, disc);
    remainder_items(&mut b, spec, zero);
    remainder_items(&mut b, spec, inf);
    side_items(&mut b, spec, disc, zero, true, opts);
    side_items(&mut b, spec, disc, inf, true, opts);
    differ_item(&mut b);
    b.finish(Conclusion::NontrivialSolutionExists)
}

/// Adjusts the tuning parameter until the resonant mode at zero has eigenvalue
/// zero, by the Illinois variant of regula falsi.
pub fn tune_resonance(spec: &ProblemSpec, disc: &Discretization) -> Result<(ProblemSpec, TuningResult), String> {
    let tuning = spec.definition.tuning.clone().ok_or("no tuning parameter declared")?;
    let mode = spec.resonance_mode(Linearization::Zero);
    let name = tuning.parameter.as_str();
    let eval = |a: f64| -> Result<f64, String> {
        let s = spec.with_parameter(name, a).ok_or("unknown tuning parameter")?;
        let lp = disc.linearization(&s, Linearization::Zero).map_err(|e| e.to_string())?;
        let vals = mass_eigenvalues(&lp).map_err(|e| e.to_string())?;
        let (re, im) = vals.get(mode - 1).copied().ok_or("mode out of range")?;
        if im != 0.0 {
            return Err(format!("mode {mode} is complex at {name} = {a}"));
        }
        Ok(re)
    };

    // find a bracket on a uniform scan
    let [lo, hi] = tuning.range;
    let steps = 16;
    let mut prev = (lo, eval(lo)?);
    let mut bracket = None;
    for i in 1..=steps {
        let a = lo + (hi - lo) * i as f64 / steps as f64;
        let v = eval(a)?;
        if prev.1 == 0.0 {
            bracket = Some((prev, prev));
            break;
        }
        if prev.1.signum() != v.signum() {
            bracket = Some((prev, (a, v)));
            break;
        }
        prev = (a, v);
    }
    let ((mut a0, mut f0), (mut a1, mut f1)) =
        bracket.ok_or_else(|| format!("no sign change of mode {mode} for {name} in [{lo}, {hi}]"))?;
    let mut iterations = 0;
    let mut side = 0i8;
    while a0 != a1 && iterations < 100 {
        iterations += 1;
        let a = (a0 * f1 - a1 * f0) / (f1 - f0);
        let v = eval(a)?;
        if v == 0.0 || (a1 - a0).abs() <= 1e-13 * a.abs().max(1.0) {
            a0 = a;
            a1 = a;
            f0 = v;
            break;
        }
        if v.signum() == f1.signum() {
            a1 = a;
            f1 = v;
            if side == -1 {
                f0 *= 0.5;
            }
            side = -1;
        } else {
            a0 = a;
            f0 = v;
            if side == 1 {
                f1 *= 0.5;
            }
            side = 1;
        }
        if v.abs() <= 1e-12 {
            a1 = a;
            a0 = a;
            f0 = v;
            break;
        }
    }
    let value = 0.5 * (a0 + a1);
    let tuned = spec.with_parameter(name, value).ok_or("unknown tuning parameter")?;
    let residual = eval(value).unwrap_or(f0);
    Ok((
        tuned,
        TuningResult {
            parameter: name.to_string(),
            value,
            iterations,
            residual_eigenvalue: residual,
        },
    ))
}

/// Nontrivial solution for a coercive problem with an even degeneracy at zero.
pub fn nontrivial_coercive_degenerate_zero(
    spec: &ProblemSpec,
    disc: &Discretization,
    opts: &VerdictOptions,
) -> Verdict {
    let mut b = Builder::new(TheoremId::NontrivialCoerciveDegenerateZero);
    let zero = Linearization::Zero;
    let zero_ok = zero_solution_item(&mut b, spec, disc);
    let flag = b.guard("resonant at zero", spec.is_resonant(zero), format!("flag = {}", spec.is_resonant(zero)));
    let parity = side::principal_parity(spec, zero);
    let declared = b.guard("principal parts at zero declared", parity.is_some(), parity_name(parity));
    if !(zero_ok && flag && declared) {
        return b.finish(Conclusion::NontrivialSolutionExists);
    }
    let coercive = coercive_items(&mut b, spec, disc);
    if b.refused() {
        return b.finish(Conclusion::NontrivialSolutionExists);
    }
    if coercive {
        b.infinity = Some(a_priori_infinity(disc));
    }

    let tuned = if spec.definition.tuning.is_some() {
        match tune_resonance(spec, disc) {
            Ok((s, t)) => {
                b.hyp(
                    "tuning reaches resonance",
                    true,
                    format!("{} = {} after {} steps", t.parameter, t.value, t.iterations),
                );
                b.tuning = Some(t);
                s
            }
            Err(e) => {
                b.hyp("tuning reaches resonance", false, e);
                return b.finish(Conclusion::NontrivialSolutionExists);
            }
        }
    } else {
        spec.clone()
    };

    b.hyp("principal parts at zero are even", parity == Some(Parity::Even), parity_name(parity));
    gateaux_item(&mut b, &tuned, disc);
    remainder_items(&mut b, &tuned, zero);
    if side_items(&mut b, &tuned, disc, zero, true, opts) {
        let v = b.zero.as_ref().and_then(|s| s.index_value()).unwrap_or(1);
        b.item(ItemKind::Decision, "index at zero differs from 1", v != 1, format!("ind(0) = {v}, ind(∞) = 1"));
    }
    b.finish(Conclusion::NontrivialSolutionExists)
}

/// Nontrivial solution when the negative eigenvalue counts at zero and at
/// infinity have different parity.
pub fn nontrivial_parity(spec: &ProblemSpec, disc: &Discretization, opts: &VerdictOptions) -> Verdict {
    let mut b = Builder::new(TheoremId::NontrivialParity);
    if !zero_solution_item(&mut b, spec, disc) {
        return b.finish(Conclusion::NontrivialSolutionExists);
    }
    for side in [Linearization::Zero, Linearization::Infinity] {
        let label = match side {
            Linearization::Zero => "zero",
            Linearization::Infinity => "infinity",
        };
        match run_side(spec, disc, side, false, &opts.pencil) {
            Ok(rep) => {
                nondegenerate_guard(&mut b, spec, disc, side, &rep);
                match side {
                    Linearization::Zero => b.zero = Some(rep),
                    Linearization::Infinity => b.infinity = Some(rep),
                }
            }
            Err(e) => {
                b.hyp(&format!("spectral analysis at {label}"), false, e.to_string());
            }
        }
    }
    if b.refused() {
        b.notes.push("a degenerate linearization needs one of the resonant procedures".into());
        return b.finish(Conclusion::NontrivialSolutionExists);
    }
    gateaux_item(&mut b, spec, disc);
    remainder_items(&mut b, spec, Linearization::Infinity);
    let nu0 = b.zero.as_ref().map(|s| s.pencil.nu);
    let nui = b.infinity.as_ref().map(|s| s.pencil.nu);
    let (passed, ev) = match (nu0, nui) {
        (Some(a), Some(c)) => (a % 2 != c % 2, format!("nu(0) = {a}, nu(∞) = {c}")),
        _ => (false, "a count is missing".into()),
    };
    b.item(ItemKind::Decision, "negative eigenvalue counts differ in parity", passed, ev);
    b.finish(Conclusion::NontrivialSolutionExists)
}

pub fn run(theorem: TheoremId, spec: &ProblemSpec, disc: &Discretization, opts: &VerdictOptions) -> Verdict {
    match theorem {
        TheoremId::SolvResonant => solv_resonant(spec, disc, opts),
        TheoremId::SolvCoercive => solv_coercive(spec, disc, opts),
        TheoremId::NontrivialResonantInf => nontrivial_resonant_inf(spec, disc, opts),
        TheoremId::NontrivialDoubleDegenerate => nontrivial_double_degenerate(spec, disc, opts),
        TheoremId::NontrivialCoerciveDegenerateZero => nontrivial_coercive_degenerate_zero(spec, disc, opts),
        TheoremId::NontrivialParity => nontrivial_parity(spec, disc, opts),
    }
}

/// Every procedure in the automatic order.
pub fn run_all(spec: &ProblemSpec, disc: &Discretization, opts: &VerdictOptions) -> Vec<Verdict> {
    TheoremId::AUTO_ORDER.iter().map(|&t| run(t, spec, disc, opts)).collect()
}

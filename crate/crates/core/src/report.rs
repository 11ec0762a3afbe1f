//! The `analyze` and `spectrum` pipelines and their JSON reports.

use std::io;
use std::time::Instant;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{Config, ConfigDocument, OracleMethod};
use crate::fem1d::{embedding_constant, resonance_align, Discretization, FemError, Linearization};
use crate::oracle::{find_solutions_newton, find_solutions_shooting, SolutionSet};
use crate::reduction::{analyze_pencil_with, Completion, PencilOptions};
use crate::verdicts::{self, Conclusion, PencilSummary, Status, Verdict, VerdictOptions};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Solutions with a larger max-norm count as nontrivial.
pub const NONTRIVIAL_THRESHOLD: f64 = 1e-2;

/// Agreement radius between shooting and Newton solution sets.
pub const AGREEMENT_TOLERANCE: f64 = 1e-3;

const SHOOTING_GRID: usize = 400;

const CONVENTIONS: [&str; 4] = [
    "nu counts real negative eigenvalues only; complex pairs are listed separately",
    "growth conditions on g and q are checked on finite samples only",
    "the linearization at zero is checked by forward differences of the assembled residual",
    "degrees in dimension 3 and above come from a multi-start preimage count and are flagged heuristic",
];

#[derive(Debug, Clone, Serialize)]
pub struct SpectralTable {
    pub side: Linearization,
    pub aligned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PencilSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscretizationSummary {
    pub n_elements: usize,
    pub dim: usize,
    pub embedding_constant: f64,
    pub spectra: Vec<SpectralTable>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Confirmation {
    pub theorem: verdicts::TheoremId,
    pub confirmed: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton: Option<SolutionSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shooting: Option<SolutionSet>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    /// Shooting and Newton found the same solutions within [`AGREEMENT_TOLERANCE`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<bool>,
    pub confirmations: Vec<Confirmation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ran,
    /// Requested procedures did not apply.
    Refused,
}

/// Everything that must be reproducible across runs.
#[derive(Debug, Clone, Serialize)]
pub struct MachineSection {
    pub command: &'static str,
    pub status: RunStatus,
    pub config: ConfigDocument,
    pub discretization: DiscretizationSummary,
    pub conventions: Vec<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub discretization_ms: f64,
    pub verdicts_ms: f64,
    pub oracle_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: &'static str,
    pub machine: MachineSection,
    pub summary: Vec<String>,
    pub timings: Timings,
}

impl Report {
    pub fn status(&self) -> RunStatus {
        self.machine.status
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// The reproducible part: machine section and summary.
    pub fn deterministic_json(&self) -> String {
        to_json(&(&self.machine, &self.summary))
    }
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn pencil_options(config: &Config) -> PencilOptions {
    PencilOptions {
        tol: config.document.analysis.tolerance,
        completion: Completion::Canonical,
    }
}

fn spectral_tables(config: &Config, disc: &Discretization) -> Vec<SpectralTable> {
    let opts = pencil_options(config);
    let spec = &config.spec;
    let mut out = Vec::new();
    for side in [Linearization::Zero, Linearization::Infinity] {
        let mut variants = vec![false];
        if spec.is_resonant(side) {
            variants.push(true);
        }
        for aligned in variants {
            let run = || -> Result<PencilSummary, FemError> {
                let lp = disc.linearization(spec, side)?;
                let lp = if aligned {
                    resonance_align(&lp, spec.resonance_mode(side))?.0
                } else {
                    lp
                };
                let s = analyze_pencil_with(&lp.pencil, &opts)?;
                PencilSummary::new(side, &lp, &s)
            };
            let (summary, error) = match run() {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(SpectralTable {
                side,
                aligned,
                summary,
                error,
            });
        }
    }
    out
}

fn discretization_summary(config: &Config, disc: &Discretization) -> Result<DiscretizationSummary, FemError> {
    Ok(DiscretizationSummary {
        n_elements: disc.n_elements(),
        dim: disc.dim(),
        embedding_constant: embedding_constant(disc)?,
        spectra: spectral_tables(config, disc),
    })
}

fn side_name(side: Linearization) -> &'static str {
    match side {
        Linearization::Zero => "zero",
        Linearization::Infinity => "infinity",
    }
}

/// Spectral tables only.
pub fn spectrum(config: &Config) -> Result<Report, FemError> {
    let start = Instant::now();
    let disc = config.discretization();
    let discretization = discretization_summary(config, &disc)?;
    let mut summary = vec![format!(
        "N = {}, embedding constant {:.10}",
        disc.n_elements(),
        discretization.embedding_constant
    )];
    for t in &discretization.spectra {
        let tag = if t.aligned { " (aligned)" } else { "" };
        summary.push(match (&t.summary, &t.error) {
            (Some(s), _) => format!(
                "{}{tag}: nu = {}, n0 = {}, l = {}, complex pairs = {}",
                side_name(t.side),
                s.nu,
                s.n0,
                s.l,
                s.complex_pairs
            ),
            (None, Some(e)) => format!("{}{tag}: {e}", side_name(t.side)),
            (None, None) => format!("{}{tag}: not computed", side_name(t.side)),
        });
    }
    let total = ms(start);
    Ok(Report {
        tool_version: TOOL_VERSION,
        machine: MachineSection {
            command: "spectrum",
            status: RunStatus::Ran,
            config: config.document.clone(),
            discretization,
            conventions: CONVENTIONS.to_vec(),
            verdicts: Vec::new(),
            oracle: None,
        },
        summary,
        timings: Timings {
            discretization_ms: total,
            verdicts_ms: 0.0,
            oracle_ms: 0.0,
            total_ms: total,
        },
    })
}

fn run_oracle(config: &Config, disc: &Discretization, verdicts: &[Verdict]) -> OracleReport {
    let oc = &config.document.analysis.oracle;
    let spec = &config.spec;
    let mut report = OracleReport {
        newton: None,
        shooting: None,
        errors: Vec::new(),
        agreement: None,
        confirmations: Vec::new(),
    };
    if matches!(oc.method, OracleMethod::Newton | OracleMethod::Both) {
        match find_solutions_newton(spec, disc, oc.starts, oc.seed) {
            Ok(s) => report.newton = Some(s),
            Err(e) => report.errors.push(format!("newton: {e}")),
        }
    }
    if matches!(oc.method, OracleMethod::Shooting | OracleMethod::Both) {
        match find_solutions_shooting(spec, disc, oc.s_range, SHOOTING_GRID) {
            Ok(s) => report.shooting = Some(s),
            Err(e) => report.errors.push(format!("shooting: {e}")),
        }
    }
    if let (Some(a), Some(b)) = (&report.newton, &report.shooting) {
        report.agreement = Some(a.agrees_with(b, AGREEMENT_TOLERANCE));
    }

    for v in verdicts.iter().filter(|v| v.status == Status::Concluded) {
        // a tuned verdict speaks about the tuned problem
        let tuned = v.tuning.as_ref().and_then(|t| spec.with_parameter(&t.parameter, t.value));
        let own;
        let sets: Vec<&SolutionSet> = match &tuned {
            Some(t) => match find_solutions_newton(t, disc, oc.starts, oc.seed) {
                Ok(s) => {
                    own = s;
                    vec![&own]
                }
                Err(e) => {
                    report.errors.push(format!("newton on tuned problem: {e}"));
                    vec![]
                }
            },
            None => report.newton.iter().chain(report.shooting.iter()).collect(),
        };
        let (confirmed, evidence) = match v.conclusion {
            Conclusion::Solvable => {
                let n: usize = sets.iter().map(|s| s.solutions.len()).sum();
                (n > 0, format!("{n} solutions found"))
            }
            Conclusion::NontrivialSolutionExists => {
                let best = sets
                    .iter()
                    .flat_map(|s| s.solutions.iter())
                    .map(|s| s.max_norm)
                    .fold(0.0, f64::max);
                (
                    best > NONTRIVIAL_THRESHOLD,
                    format!("largest max-norm {best:e} (threshold {NONTRIVIAL_THRESHOLD:e})"),
                )
            }
            Conclusion::Inconclusive => continue,
        };
        report.confirmations.push(Confirmation {
            theorem: v.theorem,
            confirmed,
            evidence,
        });
    }
    report
}

fn verdict_line(v: &Verdict) -> String {
    let status = match v.status {
        Status::Concluded => "concluded",
        Status::Inconclusive => "inconclusive",
        Status::Refused => "refused",
    };
    let conclusion = match v.conclusion {
        Conclusion::Solvable => "solvable",
        Conclusion::NontrivialSolutionExists => "nontrivial solution exists",
        Conclusion::Inconclusive => "no conclusion",
    };
    let mut line = format!("{}: {status}, {conclusion}", v.theorem.name());
    if let Some(i) = v.index_zero() {
        line.push_str(&format!("; ind(0) = {}", i.value));
    }
    if let Some(i) = v.index_infinity() {
        line.push_str(&format!("; ind(inf) = {}", i.value));
    }
    if let (Some(z), Some(i)) = (&v.zero, &v.infinity) {
        line.push_str(&format!("; nu(0) = {}, nu(inf) = {}", z.pencil.nu, i.pencil.nu));
    }
    if v.heuristic {
        line.push_str(" [heuristic degree]");
    }
    if v.status == Status::Refused {
        if let Some(c) = v.checklist.iter().find(|c| !c.passed) {
            line.push_str(&format!(" ({}: {})", c.name, c.evidence));
        }
    }
    line
}

/// Runs the selected procedures and, if requested, the oracle.
pub fn analyze(config: &Config) -> Result<Report, FemError> {
    let start = Instant::now();
    let disc = config.discretization();
    let discretization = discretization_summary(config, &disc)?;
    let t_disc = ms(start);

    let t = Instant::now();
    let opts = VerdictOptions {
        pencil: pencil_options(config),
    };
    let selection = &config.document.analysis.theorems;
    let verdicts: Vec<Verdict> = selection
        .theorems()
        .into_iter()
        .map(|th| verdicts::run(th, &config.spec, &disc, &opts))
        .collect();
    let t_verdicts = ms(t);

    let refused = if selection.is_auto() {
        verdicts.iter().all(|v| v.status == Status::Refused)
    } else {
        verdicts.iter().any(|v| v.status == Status::Refused)
    };

    let t = Instant::now();
    let oracle = config
        .document
        .analysis
        .verify_with_oracle
        .then(|| run_oracle(config, &disc, &verdicts));
    let t_oracle = ms(t);

    let mut summary = vec![format!(
        "N = {}, embedding constant {:.10}",
        disc.n_elements(),
        discretization.embedding_constant
    )];
    summary.extend(verdicts.iter().map(verdict_line));
    if let Some(o) = &oracle {
        for (name, set) in [("newton", &o.newton), ("shooting", &o.shooting)] {
            if let Some(s) = set {
                summary.push(format!(
                    "oracle {name}: {} solutions, {} nontrivial",
                    s.solutions.len(),
                    s.nontrivial(NONTRIVIAL_THRESHOLD).count()
                ));
            }
        }
        if let Some(a) = o.agreement {
            summary.push(format!("oracle methods agree: {a}"));
        }
        for c in &o.confirmations {
            summary.push(format!("oracle confirms {}: {}", c.theorem.name(), c.confirmed));
        }
    }

    Ok(Report {
        tool_version: TOOL_VERSION,
        machine: MachineSection {
            command: "analyze",
            status: if refused { RunStatus::Refused } else { RunStatus::Ran },
            config: config.document.clone(),
            discretization,
            conventions: CONVENTIONS.to_vec(),
            verdicts,
            oracle,
        },
        summary,
        timings: Timings {
            discretization_ms: t_disc,
            verdicts_ms: t_verdicts,
            oracle_ms: t_oracle,
            total_ms: ms(start),
        },
    })
}

//! Built-in verification runs, one per acceptance criterion.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog;
use crate::config::{AnalysisConfig, Config, ConfigDocument, MeshConfig, OracleConfig, OracleMethod, TheoremSelection};
use crate::degree::{builtin_map, degree_1d, degree_2d_winding, degree_on_ball, FiniteMap, MAX_WINDING_SEGMENTS};
use crate::expr::Parity;
use crate::fem1d::{
    embedding_constant, mass_eigenvalues, Discretization, Linearization, ProblemDefinition, ProblemSpec,
};
use crate::numerics::{DenseMatrix, Vector};
use crate::oracle::{find_solutions_newton, find_solutions_shooting, SHOOT_TOLERANCE};
use crate::reduction::{
    analyze_pencil_with, build_reduced_map, index_at_zero, kronecker_check, Assembler, Completion, OperatorPencil,
    PencilOptions,
};
use crate::report::{analyze, AGREEMENT_TOLERANCE, NONTRIVIAL_THRESHOLD};
use crate::verdicts::{self, run_side, Conclusion, TheoremId, Verdict, VerdictOptions};

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    /// Multiplies every floating-point tolerance; `1` is the shipped setting.
    pub tolerance_scale: f64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { tolerance_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

pub const CRITERIA: [&str; 10] = [
    "degree axioms",
    "index at zero against direct degree",
    "normalizer residual",
    "discrete spectrum",
    "resonant solvability",
    "coercive solvability",
    "parity criterion",
    "double degeneracy",
    "Kronecker consistency",
    "report determinism",
];

/// Criterion names followed by catalog problem ids.
pub fn list() -> Vec<String> {
    let mut out: Vec<String> = CRITERIA.iter().enumerate().map(|(i, n)| format!("{}: {n}", i + 1)).collect();
    out.extend(catalog::problems().iter().map(|p| format!("{}: {}", p.id, p.summary)));
    out
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

pub fn run(opts: SelftestOptions) -> Vec<CriterionResult> {
    let s = opts.tolerance_scale;
    let checks: [fn(f64) -> Check; 10] = [
        degree_axioms,
        theorem_one,
        normalizer_residual,
        discrete_spectrum,
        resonant_solvability,
        coercive_solvability,
        parity_criterion,
        double_degeneracy,
        kronecker,
        determinism,
    ];
    checks
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let t = Instant::now();
            let r = f(s);
            CriterionResult {
                id: i + 1,
                name: CRITERIA[i],
                passed: r.is_ok(),
                detail: r.unwrap_or_else(|e| e),
                elapsed_ms: t.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect()
}

fn degree_of(name: &str, radius: f64) -> Result<i64, String> {
    let m = builtin_map(name).ok_or_else(|| format!("unknown map {name}"))?;
    degree_on_ball(&m, radius).map(|d| d.value).map_err(|e| e.to_string())
}

fn degree_axioms(_: f64) -> Check {
    let t = Instant::now();
    for d in 1..=3 {
        let id = FiniteMap::new(d, |u| u.to_vec());
        let neg = FiniteMap::new(d, |u| u.iter().map(|v| -v).collect());
        let a = degree_on_ball(&id, 1.0).map_err(|e| e.to_string())?.value;
        let b = degree_on_ball(&neg, 1.0).map_err(|e| e.to_string())?.value;
        ensure(a == 1, format!("identity in dimension {d} has degree {a}"))?;
        let expect = if d % 2 == 0 { 1 } else { -1 };
        ensure(b == expect, format!("-identity in dimension {d} has degree {b}"))?;
    }
    ensure(degree_of("complex-square", 1.0)? == 2, "complex square")?;
    ensure(degree_of("complex-cube", 1.0)? == 3, "complex cube")?;

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut odd_maps = 0;
    while odd_maps < 20 {
        let c: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = FiniteMap::new(2, move |u| {
            let (x, y) = (u[0], u[1]);
            vec![
                c[0] * x + c[1] * y + c[2] * x * x * x + c[3] * x * y * y + c[4] * x * x * y,
                c[5] * x + c[6] * y + c[7] * y * y * y + c[8] * x * x * y + c[9] * x * y * y,
            ]
        });
        let min = (0..720)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 720.0;
                let v = f.eval(&[th.cos(), th.sin()]);
                v[0].hypot(v[1])
            })
            .fold(f64::INFINITY, f64::min);
        if min < 1e-2 {
            continue;
        }
        let d = degree_2d_winding(&f, 1.0, MAX_WINDING_SEGMENTS).map_err(|e| e.to_string())?;
        ensure(d % 2 != 0, format!("odd map with even degree {d}"))?;
        odd_maps += 1;
    }

    for _ in 0..50 {
        let a = DenseMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
        let det = a.determinant();
        if det.abs() < 1e-3 {
            continue;
        }
        let d = degree_2d_winding(&FiniteMap::linear(a), 1.0, MAX_WINDING_SEGMENTS).map_err(|e| e.to_string())?;
        ensure(d == det.signum() as i64, format!("linear map with det {det} has degree {d}"))?;
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("took {secs:.1} s"))?;
    Ok(format!("all exact; {secs:.2} s"))
}

fn cubic_assembler(slot: usize, sign: f64) -> Assembler {
    Arc::new(move |u: &Vector| {
        let mut r = Vector::zeros(u.len());
        r[slot] = sign * u[0].powi(3);
        Ok(r)
    })
}

struct FiniteCase {
    name: &'static str,
    a: DenseMatrix,
    slot: usize,
    sign: f64,
}

fn finite_cases() -> Vec<FiniteCase> {
    let m = |v: [f64; 4]| DenseMatrix::from_row_slice(2, 2, &v);
    vec![
        FiniteCase { name: "diag(0,1), +u1^3", a: m([0.0, 0.0, 0.0, 1.0]), slot: 0, sign: 1.0 },
        FiniteCase { name: "diag(0,1), -u1^3", a: m([0.0, 0.0, 0.0, 1.0]), slot: 0, sign: -1.0 },
        FiniteCase { name: "Jordan block", a: m([0.0, 1.0, 0.0, 0.0]), slot: 1, sign: 1.0 },
        FiniteCase { name: "diag(-1,1)", a: m([-1.0, 0.0, 0.0, 1.0]), slot: 0, sign: 1.0 },
    ]
}

fn finite_index(case: &FiniteCase, completion: Completion) -> Result<(i64, f64, f64), String> {
    let pencil = OperatorPencil::new(case.a.clone(), DenseMatrix::identity(2, 2)).map_err(|e| e.to_string())?;
    let opts = PencilOptions {
        completion,
        ..Default::default()
    };
    let s = analyze_pencil_with(&pencil, &opts).map_err(|e| e.to_string())?;
    let theta = if s.l > 0 {
        Some(
            build_reduced_map(&s, &pencil, cubic_assembler(case.slot, case.sign), 3.0, Parity::Odd)
                .map_err(|e| e.to_string())?,
        )
    } else {
        None
    };
    let idx = index_at_zero(&s, theta.as_ref()).map_err(|e| e.to_string())?;
    Ok((idx.value, s.t_residual, s.det_t))
}

fn direct_degree(case: &FiniteCase) -> Result<i64, String> {
    let a = case.a.clone();
    let (slot, sign) = (case.slot, case.sign);
    let f = FiniteMap::new(2, move |u| {
        let mut v = vec![a[(0, 0)] * u[0] + a[(0, 1)] * u[1], a[(1, 0)] * u[0] + a[(1, 1)] * u[1]];
        v[slot] += sign * u[0].powi(3);
        v
    });
    degree_2d_winding(&f, 0.1, MAX_WINDING_SEGMENTS).map_err(|e| e.to_string())
}

fn theorem_one(_: f64) -> Check {
    let mut parts = Vec::new();
    for case in finite_cases() {
        let (idx, _, _) = finite_index(&case, Completion::Canonical)?;
        let direct = direct_degree(&case)?;
        ensure(idx == direct, format!("{}: index {idx}, direct degree {direct}", case.name))?;
        parts.push(format!("{} {idx}", case.name));
    }
    let jordan = &finite_cases()[2];
    for seed in [11, 12345] {
        let (idx, _, _) = finite_index(jordan, Completion::Seeded(seed))?;
        ensure(idx == -1, format!("Jordan block with completion seed {seed}: index {idx}"))?;
    }
    Ok(parts.join(", "))
}

fn catalog_pencils() -> Result<Vec<(String, crate::reduction::SpectralStructure)>, String> {
    let mut out = Vec::new();
    for case in finite_cases() {
        let pencil = OperatorPencil::new(case.a.clone(), DenseMatrix::identity(2, 2)).map_err(|e| e.to_string())?;
        let s = analyze_pencil_with(&pencil, &PencilOptions::default()).map_err(|e| e.to_string())?;
        out.push((case.name.to_string(), s));
    }
    let disc = Discretization::new(100).map_err(|e| e.to_string())?;
    for p in catalog::problems() {
        let mut spec = ProblemSpec::compile(&p.definition).map_err(|e| e.to_string())?;
        if p.definition.tuning.is_some() {
            spec = verdicts::tune_resonance(&spec, &disc)?.0;
        }
        for side in [Linearization::Zero, Linearization::Infinity] {
            let lp = disc.linearization(&spec, side).map_err(|e| e.to_string())?;
            let lp = if spec.is_resonant(side) {
                crate::fem1d::resonance_align(&lp, spec.resonance_mode(side)).map_err(|e| e.to_string())?.0
            } else {
                lp
            };
            let s = analyze_pencil_with(&lp.pencil, &PencilOptions::default()).map_err(|e| e.to_string())?;
            out.push((format!("{} at {side:?}", p.id), s));
        }
    }
    Ok(out)
}

fn normalizer_residual(scale: f64) -> Check {
    let mut worst = 0.0f64;
    let pencils = catalog_pencils()?;
    for (name, s) in &pencils {
        ensure(
            s.t_residual <= 1e-8 * scale,
            format!("{name}: residual {:e}", s.t_residual),
        )?;
        ensure(s.det_t != 0.0, format!("{name}: det T = 0"))?;
        worst = worst.max(s.t_residual);
    }
    Ok(format!("{} pencils, worst residual {worst:e}", pencils.len()))
}

fn discrete_spectrum(scale: f64) -> Check {
    let t = Instant::now();
    let disc = Discretization::new(200).map_err(|e| e.to_string())?;
    let spec = ProblemSpec::compile(&ProblemDefinition::default()).map_err(|e| e.to_string())?;
    let lp = disc.linearization(&spec, Linearization::Zero).map_err(|e| e.to_string())?;
    let eig = mass_eigenvalues(&lp).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for k in 1..=5 {
        let exact = (k as f64 * PI).powi(2);
        let rel = (eig[k - 1].0 / exact - 1.0).abs();
        worst = worst.max(rel);
        ensure(rel < 1e-3 * scale, format!("mode {k}: relative error {rel:e}"))?;
    }
    let kemb = embedding_constant(&disc).map_err(|e| e.to_string())?;
    let rel = (kemb * PI - 1.0).abs();
    ensure(rel < 1e-3 * scale, format!("embedding constant {kemb}, relative error {rel:e}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("took {secs:.1} s"))?;
    Ok(format!("worst eigenvalue error {worst:e}, embedding error {rel:e}, {secs:.2} s"))
}

fn verdict_at(def: &ProblemDefinition, n: usize, theorem: TheoremId) -> Result<(ProblemSpec, Discretization, Verdict), String> {
    let spec = ProblemSpec::compile(def).map_err(|e| e.to_string())?;
    let disc = Discretization::new(n).map_err(|e| e.to_string())?;
    let v = verdicts::run(theorem, &spec, &disc, &VerdictOptions::default());
    Ok((spec, disc, v))
}

fn first_failure(v: &Verdict) -> String {
    v.checklist
        .iter()
        .find(|c| !c.passed)
        .map_or_else(|| format!("{:?}", v.status), |c| format!("{}: {}", c.name, c.evidence))
}

fn newton_residual(spec: &ProblemSpec, disc: &Discretization, scale: f64) -> Result<f64, String> {
    let set = find_solutions_newton(spec, disc, 8, 0).map_err(|e| e.to_string())?;
    let best = set.solutions.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min);
    ensure(best <= 1e-8 * scale, format!("best Newton residual {best:e}"))?;
    Ok(best)
}

fn resonant_solvability(scale: f64) -> Check {
    let def = catalog::landesman_lazer();
    let mut conclusions = Vec::new();
    for n in [100, 200] {
        let (_, _, v) = verdict_at(&def, n, TheoremId::SolvResonant)?;
        ensure(v.conclusion == Conclusion::Solvable, format!("N = {n}: {}", first_failure(&v)))?;
        let ind = v.index_infinity().map(|i| i.value);
        ensure(ind == Some(1), format!("N = {n}: ind(inf) = {ind:?}"))?;
        conclusions.push(v.conclusion);
    }
    let (spec, disc, _) = verdict_at(&def, 200, TheoremId::SolvResonant)?;
    let r = newton_residual(&spec, &disc, scale)?;
    Ok(format!("ind(inf) = 1 at N = 100 and 200, Newton residual {r:e}"))
}

fn coercive_solvability(scale: f64) -> Check {
    let (spec, disc, v) = verdict_at(&catalog::coercive(), 200, TheoremId::SolvCoercive)?;
    ensure(v.conclusion == Conclusion::Solvable, first_failure(&v))?;
    let r = newton_residual(&spec, &disc, scale)?;
    Ok(format!("solvable, Newton residual {r:e}"))
}

fn parity_criterion(scale: f64) -> Check {
    let (spec, disc, v) = verdict_at(&catalog::parity(), 200, TheoremId::NontrivialParity)?;
    ensure(v.conclusion == Conclusion::NontrivialSolutionExists, first_failure(&v))?;
    let nu = (v.zero.as_ref().map(|s| s.pencil.nu), v.infinity.as_ref().map(|s| s.pencil.nu));
    ensure(nu == (Some(0), Some(1)), format!("nu = {nu:?}"))?;
    let shots = find_solutions_shooting(&spec, &disc, [-20.0, 20.0], 400).map_err(|e| e.to_string())?;
    let nontrivial: Vec<_> = shots.nontrivial(NONTRIVIAL_THRESHOLD).collect();
    ensure(nontrivial.len() >= 2, format!("{} nontrivial shots", nontrivial.len()))?;
    let worst = nontrivial.iter().map(|s| s.residual).fold(0.0, f64::max);
    ensure(worst <= SHOOT_TOLERANCE * scale, format!("|u(1)| = {worst:e}"))?;
    let newton = find_solutions_newton(&spec, &disc, 8, 0).map_err(|e| e.to_string())?;
    ensure(
        shots.agrees_with(&newton, AGREEMENT_TOLERANCE * scale),
        "shooting and Newton solution sets differ",
    )?;
    Ok(format!("nu(0) = 0, nu(inf) = 1, {} nontrivial solutions", nontrivial.len()))
}

fn double_degeneracy(scale: f64) -> Check {
    let def = catalog::double_degenerate();
    // 4-point Gauss rule on the mesh against ∫ sin⁴(πx) dx = 3/8
    let disc = Discretization::new(200).map_err(|e| e.to_string())?;
    let h = disc.h();
    let quad: f64 = disc.quadrature_points().map(|x| (PI * x).sin().powi(4)).zip(gauss_weights_repeated(200)).map(|(f, w)| f * w * h).sum();
    ensure((quad - 0.375).abs() <= 1e-6 * scale, format!("quadrature of sin^4 gives {quad}"))?;

    let spec = ProblemSpec::compile(&def).map_err(|e| e.to_string())?;
    let zero = run_side(&spec, &disc, Linearization::Zero, true, &PencilOptions::default()).map_err(|e| e.to_string())?;
    let theta = zero.theta.as_ref().ok_or("no reduced map at zero")?;
    let at_one = theta
        .points
        .iter()
        .zip(&theta.values)
        .find(|(p, _)| p[0] > 0.0)
        .map(|(_, v)| v[0])
        .ok_or("no sample at c = 1")?;
    // K-normalized kernel vector is (√2/π) sin πx, so Θ(1) = (4/π⁴)·3/8
    let expect = 4.0 / PI.powi(4) * 0.375;
    let rel = (at_one / expect - 1.0).abs();
    ensure(rel <= 1e-3 * scale, format!("Θ(1) = {at_one}, expected {expect}"))?;

    let v = verdicts::run(TheoremId::NontrivialDoubleDegenerate, &spec, &disc, &VerdictOptions::default());
    ensure(v.conclusion == Conclusion::NontrivialSolutionExists, first_failure(&v))?;
    let (z, i) = (v.index_zero().map(|x| x.value), v.index_infinity().map(|x| x.value));
    ensure(matches!(z, Some(1) | Some(-1)) && i == Some(0), format!("ind(0) = {z:?}, ind(inf) = {i:?}"))?;
    let set = find_solutions_newton(&spec, &disc, 8, 0).map_err(|e| e.to_string())?;
    let best = set.nontrivial(NONTRIVIAL_THRESHOLD).map(|s| s.max_norm).fold(0.0, f64::max);
    ensure(best > NONTRIVIAL_THRESHOLD, "Newton found no nontrivial solution")?;
    Ok(format!("Θ(1) relative error {rel:e}, ind(0) = {}, ind(inf) = 0, solution max-norm {best:.4}", z.unwrap_or(0)))
}

fn gauss_weights_repeated(n_elements: usize) -> impl Iterator<Item = f64> {
    // weights of the 4-point rule on [0, 1]
    let a = (18.0 + 30f64.sqrt()) / 72.0;
    let b = (18.0 - 30f64.sqrt()) / 72.0;
    let w = [b, a, a, b];
    (0..n_elements).flat_map(move |_| w)
}

fn cubic_map(c: [f64; 4]) -> FiniteMap {
    FiniteMap::new(1, move |u| vec![c[0] + c[1] * u[0] + c[2] * u[0] * u[0] + c[3] * u[0].powi(3)])
}

fn kronecker_case(c: [f64; 4], zeros: &[f64]) -> Result<bool, String> {
    let f = cubic_map(c);
    let mut idx = Vec::new();
    for &z in zeros {
        let local = f.shifted(&[z]);
        idx.push(degree_1d(&local, 1e-4).map_err(|e| e.to_string())?);
    }
    let far = degree_1d(&f, 1e3).map_err(|e| e.to_string())?;
    Ok(kronecker_check(&idx, far))
}

fn kronecker(_: f64) -> Check {
    ensure(kronecker_case([0.0, 1.0, 0.0, -1.0], &[-1.0, 0.0, 1.0])?, "u - u^3")?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..5 {
        let lead = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(0.5..2.0);
        let (c, zeros) = if k % 2 == 0 {
            let mut r: Vec<f64> = (0..3).map(|i| -3.0 + 2.0 * i as f64 + rng.random_range(0.0..1.0)).collect();
            r.sort_by(f64::total_cmp);
            let c = [
                -lead * r[0] * r[1] * r[2],
                lead * (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]),
                -lead * (r[0] + r[1] + r[2]),
                lead,
            ];
            (c, r)
        } else {
            // one real zero r, the quadratic factor u² + p u + q has none
            let r = rng.random_range(-2.0..2.0);
            let p = rng.random_range(-1.0..1.0);
            let q = p * p / 4.0 + rng.random_range(0.5..2.0);
            let c = [-lead * r * q, lead * (q - r * p), lead * (p - r), lead];
            (c, vec![r])
        };
        ensure(kronecker_case(c, &zeros)?, format!("cubic {c:?}"))?;
    }
    Ok("u - u^3 and 5 random cubics".into())
}

fn determinism(_: f64) -> Check {
    let config = Config::from_document(ConfigDocument {
        problem: catalog::parity(),
        mesh: MeshConfig { n_elements: 60 },
        analysis: AnalysisConfig {
            theorems: TheoremSelection::default(),
            verify_with_oracle: true,
            oracle: OracleConfig {
                method: OracleMethod::Both,
                starts: 4,
                seed: 7,
                ..Default::default()
            },
            ..Default::default()
        },
    })
    .map_err(|e| e.to_string())?;
    let a = analyze(&config).map_err(|e| e.to_string())?.deterministic_json();
    let b = analyze(&config).map_err(|e| e.to_string())?.deterministic_json();
    ensure(a == b, "two analyze runs differ")?;
    Ok(format!("{} identical bytes", a.len()))
}

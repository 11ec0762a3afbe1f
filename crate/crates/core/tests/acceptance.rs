//! One line per acceptance criterion, each checked against an oracle that
//! lives in this file rather than in the library.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use bvpdegree::catalog;
use bvpdegree::config::Config;
use bvpdegree::degree::{builtin_map, degree_1d, degree_2d_winding, degree_on_ball, FiniteMap, MAX_WINDING_SEGMENTS};
use bvpdegree::expr::Parity;
use bvpdegree::fem1d::{
    embedding_constant, mass_eigenvalues, resonance_align, Discretization, Linearization, ProblemDefinition,
    ProblemSpec,
};
use bvpdegree::numerics::{DenseMatrix, Vector};
use bvpdegree::oracle::{find_solutions_newton, find_solutions_shooting, Solution};
use bvpdegree::reduction::{
    analyze_pencil_with, build_reduced_map, index_at_zero, Assembler, Completion, OperatorPencil, PencilOptions,
    SpectralStructure,
};
use bvpdegree::report::analyze;
use bvpdegree::verdicts::{self, run_side, tune_resonance, Conclusion, TheoremId, Verdict, VerdictOptions};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// ---------- test-side oracles ----------

/// Winding number of `f` around the circle by summing wrapped angle increments.
fn winding(f: impl Fn(f64, f64) -> [f64; 2], radius: f64) -> i64 {
    let n = 20_000;
    let angle = |k: usize| {
        let th = 2.0 * PI * k as f64 / n as f64;
        let v = f(radius * th.cos(), radius * th.sin());
        v[1].atan2(v[0])
    };
    let mut total = 0.0;
    let mut prev = angle(0);
    for k in 1..=n {
        let cur = angle(k % n);
        let mut d = cur - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = cur;
    }
    (total / (2.0 * PI)).round() as i64
}

/// Closed-form eigenvalues of the P1 stiffness–mass pencil on a uniform mesh.
fn p1_laplacian_eigenvalue(k: usize, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let c = (k as f64 * PI * h).cos();
    6.0 / (h * h) * (1.0 - c) / (2.0 + c)
}

/// Weak residual `∫ flux(x, u′) v′ + g(x, u) v` over hat functions, with a
/// 4-point Gauss rule written out here.
fn weak_residual(u: &[f64], flux: impl Fn(f64, f64) -> f64, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = u.len() + 1;
    let h = 1.0 / n as f64;
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30f64.sqrt()) / 36.0;
    let wb = (18.0 - 30f64.sqrt()) / 36.0;
    let rule = [(-b, wb), (-a, wa), (a, wa), (b, wb)];
    let nodal = |j: usize| if j == 0 || j == n { 0.0 } else { u[j - 1] };
    let mut r = vec![0.0; u.len()];
    for e in 0..n {
        let (ul, ur) = (nodal(e), nodal(e + 1));
        let slope = (ur - ul) / h;
        for (xi, w) in rule {
            let s = 0.5 * (1.0 + xi);
            let x = (e as f64 + s) * h;
            let val = ul * (1.0 - s) + ur * s;
            let (fl, src) = (flux(x, slope), g(x, val));
            let w = 0.5 * h * w;
            if e >= 1 {
                r[e - 1] += w * (fl * (-1.0 / h) + src * (1.0 - s));
            }
            if e + 1 < n {
                r[e] += w * (fl * (1.0 / h) + src * s);
            }
        }
    }
    r
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// RK4 for `u″ = acc(x, u)` from `u(0) = 0`, `u′(0) = slope`; returns `u(1)` and `max |u|`.
fn rk4(acc: &dyn Fn(f64, f64) -> f64, slope: f64, steps: usize) -> (f64, f64) {
    let h = 1.0 / steps as f64;
    let (mut u, mut v, mut peak) = (0.0f64, slope, 0.0f64);
    for i in 0..steps {
        let x = i as f64 * h;
        let k1 = (v, acc(x, u));
        let k2 = (v + 0.5 * h * k1.1, acc(x + 0.5 * h, u + 0.5 * h * k1.0));
        let k3 = (v + 0.5 * h * k2.1, acc(x + 0.5 * h, u + 0.5 * h * k2.0));
        let k4 = (v + h * k3.1, acc(x + h, u + h * k3.0));
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        peak = peak.max(u.abs());
    }
    (u, peak)
}

/// Nontrivial shooting solutions: `(slope, |u(1)|, max |u|)`.
fn shoot_scan(acc: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, grid: usize) -> Vec<(f64, f64, f64)> {
    let steps = 4000;
    let end = |s: f64| rk4(acc, s, steps).0;
    let mut out = Vec::new();
    let slopes: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    for w in slopes.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (end(a), end(b));
        if fa.signum() == fb.signum() || a.abs().max(b.abs()) < 1e-9 || (a <= 0.0 && b >= 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = end(m);
            if fm.abs() <= 1e-12 || b - a < 1e-15 {
                a = m;
                fa = fm;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let (_, peak) = rk4(acc, a, steps);
        out.push((a, fa.abs(), peak));
    }
    out
}

fn verdict(def: &ProblemDefinition, n: usize, t: TheoremId) -> Result<(ProblemSpec, Discretization, Verdict), String> {
    let spec = ProblemSpec::compile(def).map_err(err)?;
    let disc = Discretization::new(n).map_err(err)?;
    let v = verdicts::run(t, &spec, &disc, &VerdictOptions::default());
    Ok((spec, disc, v))
}

fn failed_items(v: &Verdict) -> String {
    let names: Vec<String> = v
        .checklist
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.evidence))
        .collect();
    format!("{:?}/{:?}: {}", v.status, v.conclusion, names.join("; "))
}

fn best_newton(spec: &ProblemSpec, disc: &Discretization, nontrivial: bool) -> Result<Solution, String> {
    let set = find_solutions_newton(spec, disc, 8, 0).map_err(err)?;
    set.solutions
        .into_iter()
        .filter(|s| !nontrivial || s.max_norm > 1e-2)
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .ok_or_else(|| "Newton found nothing".to_string())
}

// ---------- criteria ----------

fn c1_degree_axioms() -> Outcome {
    let t = Instant::now();
    for d in 1..=3usize {
        let id = FiniteMap::new(d, |u| u.to_vec());
        let neg = FiniteMap::new(d, |u| u.iter().map(|v| -v).collect());
        let a = degree_on_ball(&id, 1.0).map_err(err)?.value;
        let b = degree_on_ball(&neg, 1.0).map_err(err)?.value;
        ensure(a == 1, format!("identity d={d}: {a}"))?;
        ensure(b == (-1i64).pow(d as u32), format!("-identity d={d}: {b}"))?;
    }
    for (name, expect) in [("complex-square", 2), ("complex-cube", 3)] {
        let got = degree_on_ball(&builtin_map(name).unwrap(), 1.0).map_err(err)?.value;
        ensure(got == expect, format!("{name}: {got}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut odd = 0;
    while odd < 20 {
        let c: [f64; 8] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let f = move |x: f64, y: f64| {
            [
                c[0] * x + c[1] * y + c[2] * x * x * x + c[3] * x * y * y,
                c[4] * x + c[5] * y + c[6] * y * y * y + c[7] * x * x * y,
            ]
        };
        let min = (0..2000)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 2000.0;
                let v = f(th.cos(), th.sin());
                v[0].hypot(v[1])
            })
            .fold(f64::INFINITY, f64::min);
        if min < 5e-2 {
            continue;
        }
        let lib = degree_2d_winding(&FiniteMap::new(2, move |u| f(u[0], u[1]).to_vec()), 1.0, MAX_WINDING_SEGMENTS)
            .map_err(err)?;
        ensure(lib % 2 != 0, format!("odd map {c:?} has degree {lib}"))?;
        ensure(lib == winding(f, 1.0), format!("odd map {c:?}: library {lib}, angle sum differs"))?;
        odd += 1;
    }
    let mut linear = 0;
    while linear < 50 {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let det = v[0] * v[3] - v[1] * v[2];
        if det.abs() < 1e-3 {
            continue;
        }
        let a = DenseMatrix::from_row_slice(2, 2, &v);
        let lib = degree_2d_winding(&FiniteMap::linear(a), 1.0, MAX_WINDING_SEGMENTS).map_err(err)?;
        ensure(lib == det.signum() as i64, format!("matrix {v:?}: degree {lib}, det {det}"))?;
        linear += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("exact on all maps, {secs:.2} s"))
}

struct Case {
    name: &'static str,
    a: [f64; 4],
    c: fn(f64, f64) -> [f64; 2],
}

fn finite_catalog() -> [Case; 4] {
    [
        Case { name: "diag(0,1), (u1^3, 0)", a: [0.0, 0.0, 0.0, 1.0], c: |x, _| [x * x * x, 0.0] },
        Case { name: "diag(0,1), (-u1^3, 0)", a: [0.0, 0.0, 0.0, 1.0], c: |x, _| [-x * x * x, 0.0] },
        Case { name: "Jordan, (0, u1^3)", a: [0.0, 1.0, 0.0, 0.0], c: |x, _| [0.0, x * x * x] },
        Case { name: "diag(-1,1), (u1^3, 0)", a: [-1.0, 0.0, 0.0, 1.0], c: |x, _| [x * x * x, 0.0] },
    ]
}

fn finite_structure(case: &Case, completion: Completion) -> Result<(OperatorPencil, SpectralStructure), String> {
    let p = OperatorPencil::new(DenseMatrix::from_row_slice(2, 2, &case.a), DenseMatrix::identity(2, 2)).map_err(err)?;
    let opts = PencilOptions { completion, ..Default::default() };
    let s = analyze_pencil_with(&p, &opts).map_err(err)?;
    Ok((p, s))
}

fn finite_index(case: &Case, completion: Completion) -> Result<i64, String> {
    let (p, s) = finite_structure(case, completion)?;
    let c = case.c;
    let assembler: Assembler = Arc::new(move |u: &Vector| Ok(Vector::from_vec(c(u[0], u[1]).to_vec())));
    let theta = (s.l > 0)
        .then(|| build_reduced_map(&s, &p, assembler, 3.0, Parity::Odd))
        .transpose()
        .map_err(err)?;
    Ok(index_at_zero(&s, theta.as_ref()).map_err(err)?.value)
}

fn c2_reduction_against_direct_degree() -> Outcome {
    let mut seen = Vec::new();
    for case in finite_catalog() {
        let idx = finite_index(&case, Completion::Canonical)?;
        let (a, c) = (case.a, case.c);
        let phi = move |x: f64, y: f64| {
            let n = c(x, y);
            [a[0] * x + a[1] * y + n[0], a[2] * x + a[3] * y + n[1]]
        };
        let engine = degree_2d_winding(&FiniteMap::new(2, move |u| phi(u[0], u[1]).to_vec()), 0.1, MAX_WINDING_SEGMENTS)
            .map_err(err)?;
        let angle_sum = winding(phi, 0.1);
        ensure(
            idx == engine && engine == angle_sum,
            format!("{}: index {idx}, winding engine {engine}, angle sum {angle_sum}", case.name),
        )?;
        seen.push(idx);
    }
    ensure(seen[2] == -1, format!("Jordan index {}", seen[2]))?;
    let jordan = &finite_catalog()[2];
    let (_, canon) = finite_structure(jordan, Completion::Canonical)?;
    for seed in [1, 77, 4242] {
        let (_, seeded) = finite_structure(jordan, Completion::Seeded(seed))?;
        ensure((&seeded.t - &canon.t).norm() > 1e-6, format!("seed {seed} reproduced the canonical completion"))?;
        let idx = finite_index(jordan, Completion::Seeded(seed))?;
        ensure(idx == -1, format!("Jordan with seeded completion {seed}: {idx}"))?;
    }
    Ok(format!("indices {seen:?} match both degree computations; completions agree"))
}

fn t_residual(s: &SpectralStructure) -> f64 {
    let r = &s.t * &s.n_matrix - &s.s_matrix;
    if r.is_empty() {
        return 0.0;
    }
    r.svd(false, false).singular_values.max()
}

fn c3_normalizer() -> Outcome {
    let mut pencils: Vec<(String, SpectralStructure)> = Vec::new();
    for case in finite_catalog() {
        pencils.push((case.name.to_string(), finite_structure(&case, Completion::Canonical)?.1));
    }
    let disc = Discretization::new(100).map_err(err)?;
    for p in catalog::problems() {
        let mut spec = ProblemSpec::compile(&p.definition).map_err(err)?;
        if p.definition.tuning.is_some() {
            spec = tune_resonance(&spec, &disc)?.0;
        }
        for side in [Linearization::Zero, Linearization::Infinity] {
            let mut lp = disc.linearization(&spec, side).map_err(err)?;
            if spec.is_resonant(side) {
                lp = resonance_align(&lp, spec.resonance_mode(side)).map_err(err)?.0;
            }
            let s = analyze_pencil_with(&lp.pencil, &PencilOptions::default()).map_err(err)?;
            pencils.push((format!("{} {side:?}", p.id), s));
        }
    }
    let mut worst = 0.0f64;
    for (name, s) in &pencils {
        let r = t_residual(s);
        let det = if s.t.is_empty() { 1.0 } else { s.t.determinant() };
        ensure(r <= 1e-8, format!("{name}: residual {r:e}"))?;
        ensure(det != 0.0 && det.is_finite(), format!("{name}: det T = {det}"))?;
        worst = worst.max(r);
    }
    Ok(format!("{} pencils, max ‖T·N − S‖ = {worst:.2e}", pencils.len()))
}

fn c4_spectrum() -> Outcome {
    let t = Instant::now();
    let n = 200;
    let disc = Discretization::new(n).map_err(err)?;
    let spec = ProblemSpec::compile(&ProblemDefinition::default()).map_err(err)?;
    let lp = disc.linearization(&spec, Linearization::Zero).map_err(err)?;
    let eig = mass_eigenvalues(&lp).map_err(err)?;
    let mut worst = 0.0f64;
    for k in 1..=5 {
        let closed = p1_laplacian_eigenvalue(k, n);
        ensure(
            (eig[k - 1].0 / closed - 1.0).abs() < 1e-9,
            format!("mode {k}: {} against closed form {closed}", eig[k - 1].0),
        )?;
        let rel = (eig[k - 1].0 / (k as f64 * PI).powi(2) - 1.0).abs();
        ensure(rel < 1e-3, format!("mode {k}: relative error {rel:e}"))?;
        worst = worst.max(rel);
    }
    let kemb = embedding_constant(&disc).map_err(err)?;
    ensure((kemb * p1_laplacian_eigenvalue(1, n).sqrt() - 1.0).abs() < 1e-9, "embedding constant against closed form")?;
    let rel = (kemb * PI - 1.0).abs();
    ensure(rel < 1e-3, format!("embedding constant {kemb}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!("max |λ/(kπ)² − 1| = {worst:.2e}, K_emb error {rel:.2e}, {secs:.2} s"))
}

fn c5_resonant() -> Outcome {
    let def = catalog::landesman_lazer();
    let mut conclusions = Vec::new();
    for n in [100, 200] {
        let (_, _, v) = verdict(&def, n, TheoremId::SolvResonant)?;
        let ind = v.index_infinity().map(|i| i.value);
        ensure(ind == Some(1), format!("N = {n}: ind(∞) = {ind:?}; {}", failed_items(&v)))?;
        ensure(v.conclusion == Conclusion::Solvable, format!("N = {n}: {}", failed_items(&v)))?;
        conclusions.push(v.conclusion);
    }
    ensure(conclusions[0] == conclusions[1], "conclusions differ between meshes")?;
    let (spec, disc, _) = verdict(&def, 200, TheoremId::SolvResonant)?;
    let sol = best_newton(&spec, &disc, false)?;
    let r = norm2(&weak_residual(
        &sol.coefficients,
        |_, s| s,
        |x, t| -PI * PI * t + t.signum() * t.abs().sqrt() + 0.1 * (2.0 * PI * x).sin(),
    ));
    ensure(r <= 1e-8, format!("independent residual {r:e}"))?;
    Ok(format!("ind(∞) = 1, solvable at N = 100 and 200; residual {r:.2e}"))
}

fn c6_coercive() -> Outcome {
    let (spec, disc, v) = verdict(&catalog::coercive(), 200, TheoremId::SolvCoercive)?;
    ensure(v.conclusion == Conclusion::Solvable, failed_items(&v))?;
    ensure(3.0 < PI * PI, "delta is not below the first eigenvalue")?;
    let zero = weak_residual(&vec![0.0; disc.dim()], |x, s| s + (2.0 * PI * x).sin(), |_, t| t * t * t - 3.0 * t);
    ensure(norm2(&zero) > 1e-3, "u = 0 solves the coercive problem")?;
    let sol = best_newton(&spec, &disc, false)?;
    let r = norm2(&weak_residual(&sol.coefficients, |x, s| s + (2.0 * PI * x).sin(), |_, t| t * t * t - 3.0 * t));
    ensure(r <= 1e-8, format!("independent residual {r:e}"))?;
    Ok(format!("solvable; residual {r:.2e}, solution max-norm {:.4}", sol.max_norm))
}

fn c7_parity() -> Outcome {
    let (spec, disc, v) = verdict(&catalog::parity(), 200, TheoremId::NontrivialParity)?;
    // −u″ − 5u has spectrum (kπ)² − 5 > 0; −u″ − 15u has exactly π² − 15 < 0
    let expected_nu = (
        (1..10).filter(|&k| ((k as f64) * PI).powi(2) - 5.0 < 0.0).count(),
        (1..10).filter(|&k| ((k as f64) * PI).powi(2) - 15.0 < 0.0).count(),
    );
    let nu = (
        v.zero.as_ref().map(|s| s.pencil.nu).unwrap_or(usize::MAX),
        v.infinity.as_ref().map(|s| s.pencil.nu).unwrap_or(usize::MAX),
    );
    ensure(nu == expected_nu && nu == (0, 1), format!("ν = {nu:?}"))?;
    ensure(v.conclusion == Conclusion::NontrivialSolutionExists, failed_items(&v))?;

    let acc = |_: f64, u: f64| -5.0 * u - 10.0 * u * u * u / (1.0 + u * u);
    let reference = shoot_scan(&acc, -20.0, 20.0, 400);
    let lib = find_solutions_shooting(&spec, &disc, [-20.0, 20.0], 400).map_err(err)?;
    let nontrivial: Vec<&Solution> = lib.nontrivial(1e-2).collect();
    ensure(nontrivial.len() >= 2, format!("{} nontrivial shooting solutions", nontrivial.len()))?;
    ensure(
        nontrivial.len() == reference.len(),
        format!("library finds {}, reference scan {}", nontrivial.len(), reference.len()),
    )?;
    for s in &nontrivial {
        ensure(s.residual <= 1e-10, format!("|u(1)| = {:e}", s.residual))?;
        let slope = s.slope.ok_or("shooting solution without a slope")?;
        let (end, _) = rk4(&acc, slope, 10_000);
        ensure(end.abs() <= 1e-9, format!("reference RK4 from slope {slope} ends at {end:e}"))?;
        let near = reference.iter().any(|r| (r.0 - slope).abs() < 1e-6 && (r.2 - s.max_norm).abs() < 1e-3);
        ensure(near, format!("slope {slope} has no counterpart in the reference scan"))?;
    }
    let newton = find_solutions_newton(&spec, &disc, 8, 0).map_err(err)?;
    ensure(lib.agrees_with(&newton, 1e-3), "shooting and Newton sets differ by more than 1e-3")?;
    Ok(format!("ν₀ = 0, ν∞ = 1, {} nontrivial solutions, methods agree", nontrivial.len()))
}

fn c8_double_degenerate() -> Outcome {
    // composite Simpson on 2000 panels
    let m = 2000;
    let h = 1.0 / m as f64;
    let f = |x: f64| (PI * x).sin().powi(4);
    let simpson: f64 = (0..m)
        .map(|i| {
            let a = i as f64 * h;
            h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h))
        })
        .sum();
    ensure((simpson - 0.375).abs() <= 1e-6, format!("∫sin⁴ = {simpson}"))?;

    let (spec, disc, v) = verdict(&catalog::double_degenerate(), 200, TheoremId::NontrivialDoubleDegenerate)?;
    let zero = run_side(&spec, &disc, Linearization::Zero, true, &PencilOptions::default()).map_err(err)?;
    let theta = zero.theta.ok_or("no reduced map at zero")?;
    // with the kernel normalized in ∫u′², φ = (√2/π) sin πx and Θ(c) = c³ ∫φ⁴
    let scale = 4.0 / PI.powi(4);
    let mut checked = 0;
    for (p, val) in theta.points.iter().zip(&theta.values) {
        let expect = p[0].powi(3) * simpson * scale;
        ensure((val[0] / expect - 1.0).abs() <= 1e-3, format!("Θ({}) = {} against {expect}", p[0], val[0]))?;
        checked += 1;
    }
    ensure(checked > 0, "no Θ samples")?;
    let (z, i) = (v.index_zero().map(|x| x.value), v.index_infinity().map(|x| x.value));
    ensure(matches!(z, Some(1) | Some(-1)), format!("ind(0) = {z:?}"))?;
    ensure(i == Some(0), format!("ind(∞) = {i:?}"))?;
    ensure(v.conclusion == Conclusion::NontrivialSolutionExists, failed_items(&v))?;
    let sol = best_newton(&spec, &disc, true)?;
    let r = norm2(&weak_residual(
        &sol.coefficients,
        |_, s| s,
        |_, t| -PI * PI * t + t.powi(3) / (1.0 + t.powi(4)) + t.powi(4) / (1.0 + t.abs()).powf(3.5),
    ));
    ensure(r <= 1e-8, format!("independent residual {r:e}"))?;
    Ok(format!(
        "∫sin⁴ = 3/8 ± {:.1e}; ind(0) = {}, ind(∞) = 0; nontrivial solution max-norm {:.4}",
        (simpson - 0.375).abs(),
        z.unwrap_or(0),
        sol.max_norm
    ))
}

fn kronecker_case(c: [f64; 4], zeros: &[f64]) -> Result<(), String> {
    let map = FiniteMap::new(1, move |u| vec![c[0] + c[1] * u[0] + c[2] * u[0] * u[0] + c[3] * u[0].powi(3)]);
    let mut sum = 0;
    for &z in zeros {
        let lib = degree_1d(&map.shifted(&[z]), 1e-4).map_err(err)?;
        let deriv = c[1] + 2.0 * c[2] * z + 3.0 * c[3] * z * z;
        ensure(lib == deriv.signum() as i64, format!("zero {z}: library {lib}, f′ = {deriv}"))?;
        sum += lib;
    }
    let far = degree_1d(&map, 1e3).map_err(err)?;
    ensure(far == c[3].signum() as i64, format!("index at infinity {far} for leading coefficient {}", c[3]))?;
    ensure(sum == far, format!("{c:?}: zero indices sum to {sum}, infinity gives {far}"))
}

fn c9_kronecker() -> Outcome {
    kronecker_case([0.0, 1.0, 0.0, -1.0], &[-1.0, 0.0, 1.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..5 {
        let lead = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            let mut r: Vec<f64> = (0..3).map(|i| -3.0 + 2.0 * i as f64 + rng.random_range(0.1..0.9)).collect();
            r.sort_by(f64::total_cmp);
            let c = [
                -lead * r[0] * r[1] * r[2],
                lead * (r[0] * r[1] + r[0] * r[2] + r[1] * r[2]),
                -lead * (r[0] + r[1] + r[2]),
                lead,
            ];
            kronecker_case(c, &r)?;
        } else {
            let r = rng.random_range(-2.0..2.0);
            let p = rng.random_range(-1.0..1.0);
            let q = p * p / 4.0 + rng.random_range(0.5..2.0);
            kronecker_case([-lead * r * q, lead * (q - r * p), lead * (p - r), lead], &[r])?;
        }
    }
    Ok("u − u³ and 5 random cubics".into())
}

fn c10_determinism() -> Outcome {
    let text = r#"{
        "problem": {"g": "-5*t - 10*t^3/(1+t^2)", "gprime0": "-5", "gprime_inf": "-15"},
        "mesh": {"n_elements": 64},
        "analysis": {"theorems": "auto", "verify_with_oracle": true,
                     "oracle": {"method": "both", "starts": 5, "seed": 11}}
    }"#;
    let first = analyze(&Config::from_json(text).map_err(err)?).map_err(err)?.deterministic_json();
    for _ in 0..2 {
        let again = analyze(&Config::from_json(text).map_err(err)?).map_err(err)?.deterministic_json();
        ensure(again == first, "machine sections differ between runs")?;
    }
    Ok(format!("3 runs, {} identical bytes", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("degree axioms", c1_degree_axioms),
        ("reduced index equals direct degree", c2_reduction_against_direct_degree),
        ("normalizer residual", c3_normalizer),
        ("discrete spectrum", c4_spectrum),
        ("resonant solvability", c5_resonant),
        ("coercive solvability", c6_coercive),
        ("parity criterion", c7_parity),
        ("double degeneracy", c8_double_degenerate),
        ("Kronecker consistency", c9_kronecker),
        ("report determinism", c10_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({ms:.0} ms): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name} ({ms:.0} ms): {detail}", i + 1);
            }
        }
    }
    println!("{}/{} acceptance criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

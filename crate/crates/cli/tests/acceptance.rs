//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p qsfrac-cli --test acceptance`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use qsfrac_cli::{compare_runs, parse_config, run_scenario, Checks, RunOptions, Scenario, ScenarioConfig};
use qsfrac_core::analysis::{
    balance_pairs, discrete_energy_estimate, griffith_check, hausdorff_distance, minimality_check_with, TOL_G,
};
use qsfrac_core::mesh::admissible_extensions;
use qsfrac_core::solver::{energy, harmonic_energy, l2_distance, penalized_energy, solve_harmonic, solve_penalized};
use qsfrac_core::{
    build_rect_mesh, CrackSet, Evolution, EvolutionTrace, ExtensionPolicy, Mesh, PenaltyWeight, Side, StepRecord,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest swept λ from which no crack appears in the no-nucleation scenario.
const LAMBDA_STAR: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn scenario_file(name: &str) -> ScenarioConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn build(c: &ScenarioConfig) -> Scenario {
    c.build().expect("scenario builds")
}

fn run(s: &Scenario) -> EvolutionTrace {
    s.evolution.run(&s.mesh, &s.initial_crack, &s.program, s.schedule).expect("evolution runs")
}

/// Traces kept for the suite-wide checks.
struct Suite {
    traces: Vec<(String, Scenario, EvolutionTrace)>,
}

// A1

fn max_nodal_error(n: usize, f: impl Fn([f64; 2]) -> f64 + Copy) -> (Mesh, Vec<f64>, f64) {
    let mesh = build_rect_mesh(1.0, 1.0, n, n, &Side::ALL).unwrap();
    let exact = mesh.nodal(f);
    let u = solve_harmonic(&mesh, &CrackSet::empty(), &exact).unwrap();
    let err = u.values().iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (mesh, u.values().to_vec(), err)
}

fn ratios(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| w[0] / w[1]).collect()
}

fn in_band(r: &[f64]) -> bool {
    r.iter().all(|x| (3.5..=4.5).contains(x))
}

fn a1() -> Outcome {
    let start = Instant::now();
    let quad = |p: [f64; 2]| p[0] * p[0] - p[1] * p[1];
    let mut nodal = Vec::new();
    let mut midpoint = Vec::new();
    for n in [8, 16, 32] {
        let (mesh, u, e) = max_nodal_error(n, quad);
        nodal.push(e);
        // piecewise-linear interpolant error at edge midpoints
        let m = mesh
            .edges()
            .iter()
            .map(|ed| {
                let [a, b] = ed.vertices;
                let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
                ((u[a] + u[b]) / 2.0 - quad(mid)).abs()
            })
            .fold(0.0, f64::max);
        midpoint.push(m);
    }
    let smooth: Vec<f64> = [8, 16, 32].into_iter().map(|n| max_nodal_error(n, |p| p[0].exp() * p[1].sin()).2).collect();
    let secs = start.elapsed().as_secs_f64();

    let nodal_r = ratios(&nodal);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    let fmt_e = |v: &[f64]| v.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(", ");
    if in_band(&nodal_r) {
        return Outcome::new(secs < 5.0, format!("nodal ratios {} ({secs:.2} s)", fmt(&nodal_r)));
    }
    // P1 on this grid reproduces quadratic harmonics at the nodes, so the
    // nodal errors are round-off and their ratios carry no order information
    let roundoff = nodal.iter().all(|&e| e <= 1e-12);
    let (mid_r, smooth_r) = (ratios(&midpoint), ratios(&smooth));
    let pass = roundoff && in_band(&mid_r) && in_band(&smooth_r) && secs < 5.0;
    Outcome::new(
        pass,
        format!(
            "x²−y² nodal errors [{}] are at round-off (nodally exact); midpoint error ratios {}; e^x·sin y nodal ratios {} ({secs:.2} s)",
            fmt_e(&nodal),
            fmt(&mid_r),
            fmt(&smooth_r)
        ),
    )
}

// A2

fn random_dirichlet(rng: &mut ChaCha8Rng) -> Vec<Side> {
    loop {
        let sides: Vec<Side> = Side::ALL.into_iter().filter(|_| rng.random_bool(0.5)).collect();
        if !sides.is_empty() {
            return sides;
        }
    }
}

fn random_crack(rng: &mut ChaCha8Rng, mesh: &Mesh, max_edges: usize, m: usize) -> CrackSet {
    let interior: Vec<usize> = mesh.interior_edges().collect();
    loop {
        let k = rng.random_range(0..=max_edges);
        let picked: BTreeSet<usize> = interior.choose_multiple(rng, k).copied().collect();
        let c = CrackSet::new(mesh, picked).unwrap();
        if c.n_components() <= m {
            return c;
        }
    }
}

fn a2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_dist: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    let mut pass = true;
    for case in 0..10 {
        let mesh = build_rect_mesh(1.0, 1.0, 8, 8, &random_dirichlet(&mut rng)).unwrap();
        let crack = random_crack(&mut rng, &mesh, 8, usize::MAX);
        let g: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lambda = PenaltyWeight::new([0.1, 1.0, 10.0][case % 3]).unwrap();
        let w = solve_harmonic(&mesh, &crack, &g).unwrap();
        let u = solve_penalized(&mesh, &crack, &g, &w, lambda).unwrap();
        let d = l2_distance(&mesh, &u, &w).unwrap();
        let e_lam = penalized_energy(&mesh, &crack, &g, &w, lambda).unwrap().total;
        let e = harmonic_energy(&mesh, &crack, &g).unwrap().total;
        let de = (e_lam - e).abs();
        worst_dist = worst_dist.max(d);
        worst_energy = worst_energy.max(de / (1.0 + e));
        pass &= d <= 1e-9 && de <= 1e-9 * (1.0 + e);
    }
    Outcome::new(pass, format!("10 cases: max ‖u − w‖ = {worst_dist:.1e}, max |ℰ_λ − ℰ|/(1+ℰ) = {worst_energy:.1e}"))
}

// A3

fn a3(suite: &mut Suite) -> Outcome {
    let base = scenario_file("no_nucleation.json");
    let lambdas = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    let mut quiet = Vec::new();
    for &lam in &lambdas {
        let mut c = base.clone();
        c.lambda = lam;
        let s = build(&c);
        let trace = run(&s);
        let empty = trace.records.iter().all(|r| r.crack.is_empty());
        let mut minimal = true;
        for i in 1..trace.records.len() {
            let probes = admissible_extensions(
                &s.mesh,
                &trace.records[i].crack,
                trace.m,
                ExtensionPolicy::TipNucleate { budget: 1 },
            )
            .unwrap();
            minimal &= minimality_check_with(&s.mesh, &trace, i, &probes).unwrap().passed();
        }
        quiet.push(empty && minimal);
        suite.traces.push((format!("no_nucleation λ={lam}"), s, trace));
    }
    // smallest λ from which every larger tested λ stays uncracked
    let star = (0..lambdas.len()).find(|&k| quiet[k..].iter().all(|&q| q)).map(|k| lambdas[k]);
    match star {
        Some(s) => Outcome::new(
            s == LAMBDA_STAR,
            format!(
                "λ* = {s} (regression constant {LAMBDA_STAR}); empty crack and single-edge minimality for all λ ≥ λ*"
            ),
        ),
        None => Outcome::new(false, "cracks appear at the largest tested λ"),
    }
}

// A4

fn linear_loading_constant(delta: f64) -> f64 {
    let mut c = scenario_file("no_nucleation.json");
    c.schedule.delta = delta;
    let s = build(&c);
    let trace = run(&s);
    assert!(trace.final_crack().is_empty());
    let phi = &s.program.modes()[0].spatial;
    let bulk_phi = s.mesh.stiffness_product(phi, phi);
    let pairs = balance_pairs(trace.records.len(), 20, c.seed);
    let report = discrete_energy_estimate(&s.mesh, &trace, &s.program, &pairs).unwrap();
    report
        .rows
        .iter()
        .map(|r| {
            let start = &trace.records[r.i].energies;
            let change = r.lhs - start.bulk - start.surface;
            (change - (r.t * r.t - r.s * r.s) * bulk_phi).abs() / delta
        })
        .fold(0.0, f64::max)
}

fn a4(suite: &Suite) -> Outcome {
    let mut rows = 0;
    let mut worst = f64::INFINITY;
    let mut failed = Vec::new();
    for (name, s, trace) in &suite.traces {
        let pairs = balance_pairs(trace.records.len(), 20, 4);
        let report = discrete_energy_estimate(&s.mesh, trace, &s.program, &pairs).unwrap();
        rows += report.rows.len();
        worst =
            worst.min(report.rows.iter().map(|r| r.slack / (1.0 + report.energy_scale)).fold(f64::INFINITY, f64::min));
        if !report.passed() {
            failed.push(name.clone());
        }
    }
    let (c1, c2) = (linear_loading_constant(0.05), linear_loading_constant(0.025));
    let stable = c2 <= 1.1 * c1 + 1e-12;
    let pass = failed.is_empty() && stable;
    let mut detail = format!(
        "{rows} pairs over {} traces, worst relative slack {worst:.2e}; linear loading C(0.05) = {c1:.4}, C(0.025) = {c2:.4}",
        suite.traces.len()
    );
    if !failed.is_empty() {
        detail.push_str(&format!("; violated in {}", failed.join(", ")));
    }
    Outcome::new(pass, detail)
}

// A5

fn griffith_residual(c: &ScenarioConfig, suite: &mut Suite, name: &str) -> Result<(f64, usize, usize), String> {
    let s = build(c);
    let trace = run(&s);
    let report = griffith_check(&s.mesh, &trace, &s.program, TOL_G).unwrap();
    let out = if !report.applicable {
        Err(format!("{name}: not applicable ({})", report.reason.clone().unwrap_or_default()))
    } else if report.advancing_steps() == 0 {
        Err(format!("{name}: the crack never advanced"))
    } else if !report.passed() || report.rows.iter().any(|r| r.advance < 0.0) {
        Err(format!("{name}: worst residual {:.4}", report.worst_residual()))
    } else {
        Ok((report.worst_residual(), report.advancing_steps(), report.rows.len()))
    };
    suite.traces.push((name.into(), s, trace));
    out
}

fn a5(suite: &mut Suite) -> Outcome {
    let coarse = scenario_file("slit_growth.json");
    let mut fine = coarse.clone();
    fine.geometry.nx = 64;
    fine.geometry.ny = 64;
    fine.schedule.delta = 0.01;
    let a = griffith_residual(&coarse, suite, "slit 32×32 δ=0.02");
    let b = griffith_residual(&fine, suite, "slit 64×64 δ=0.01");
    match (a, b) {
        (Ok((ra, adv_a, n_a)), Ok((rb, adv_b, n_b))) => Outcome::new(
            rb <= ra,
            format!(
                "32×32: worst residual {ra:.4} ({adv_a} advancing of {n_a} rows); 64×64: {rb:.4} ({adv_b} of {n_b}); tol {TOL_G}"
            ),
        ),
        (a, b) => Outcome::new(false, [a.err(), b.err()].into_iter().flatten().collect::<Vec<_>>().join("; ")),
    }
}

// A6

fn identical(a: &EvolutionTrace, b: &EvolutionTrace) -> bool {
    a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(x, y)| {
            x.crack == y.crack
                && x.field.values().iter().zip(y.field.values()).all(|(p, q)| p.to_bits() == q.to_bits())
                && x.energies.total.to_bits() == y.energies.total.to_bits()
        })
}

fn a6(suite: &Suite) -> Outcome {
    let monotone =
        suite.traces.iter().all(|(_, _, t)| t.records.windows(2).all(|w| w[1].crack.is_superset_of(&w[0].crack)));
    let mut repeated = 0;
    let mut same = true;
    for name in ["slit_growth.json", "tearing.json", "no_nucleation.json"] {
        let s = build(&scenario_file(name));
        same &= identical(&run(&s), &run(&s));
        repeated += 1;
    }
    Outcome::new(
        monotone && same,
        format!(
            "{} traces nondecreasing: {monotone}; {repeated} scenarios rerun bit-identically: {same}",
            suite.traces.len()
        ),
    )
}

// A7

fn components(mesh: &Mesh, edges: &[usize]) -> usize {
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut parent: Vec<usize> = (0..mesh.n_vertices()).collect();
    for &e in edges {
        let [a, b] = mesh.edges()[e].vertices;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    edges.iter().map(|&e| find(&mut parent, mesh.edges()[e].vertices[0])).collect::<BTreeSet<_>>().len()
}

/// Minimizer over `prev` and all supersets adding one or two interior edges,
/// enumerated directly, under the same acceptance threshold and tie rule.
fn brute_force(mesh: &Mesh, prev: &StepRecord, g: &[f64], lambda: PenaltyWeight, m: usize) -> (CrackSet, f64) {
    let free: Vec<usize> =
        (0..mesh.n_edges()).filter(|&e| !mesh.edges()[e].is_boundary() && !prev.crack.contains(e)).collect();
    let mut added: Vec<Vec<usize>> = free.iter().map(|&e| vec![e]).collect();
    for (i, &a) in free.iter().enumerate() {
        for &b in &free[i + 1..] {
            added.push(vec![a, b]);
        }
    }
    let base = penalized_energy(mesh, &prev.crack, g, &prev.field, lambda).unwrap().total;
    let threshold = base - 1e-10 * base.abs().max(1.0);
    let mut best: Option<(CrackSet, f64)> = None;
    for extra in added {
        let mut edges = prev.crack.edges().to_vec();
        edges.extend(&extra);
        if components(mesh, &edges) > m {
            continue;
        }
        let k = CrackSet::new(mesh, edges).unwrap();
        let total = penalized_energy(mesh, &k, g, &prev.field, lambda).unwrap().total;
        if total < threshold && best.as_ref().is_none_or(|(_, b)| total < *b) {
            best = Some((k, total));
        }
    }
    best.unwrap_or((prev.crack.clone(), base))
}

fn a7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agree = 0;
    let mut grew = 0;
    let mut mismatches = Vec::new();
    for case in 0..25 {
        let mesh = build_rect_mesh(1.0, 1.0, 3, 3, &random_dirichlet(&mut rng)).unwrap();
        let m = rng.random_range(1..=3);
        let lambda = PenaltyWeight::new(*[0.0, 0.1, 1.0, 10.0].choose(&mut rng).unwrap()).unwrap();
        let crack = random_crack(&mut rng, &mesh, 3, m);
        let g_prev: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let field = solve_harmonic(&mesh, &crack, &g_prev).unwrap();
        let energies = energy(&mesh, &crack, &field).unwrap();
        let prev =
            StepRecord { index: 0, time: 0.0, crack, field, energies, increment_norm: 0.0, candidates_evaluated: 0 };
        let amp = rng.random_range(0.5..4.0);
        let g: Vec<f64> = (0..mesh.n_vertices()).map(|_| amp * rng.random_range(-1.0..1.0)).collect();
        let evo = Evolution::new(lambda, m, ExtensionPolicy::Exhaustive { k: 2 });
        let got = evo.step(&mesh, &prev, &g, 1.0).unwrap();
        let (k, total) = brute_force(&mesh, &prev, &g, lambda, m);
        if got.crack == k && (got.energies.total - total).abs() <= 1e-9 * total.abs().max(1.0) {
            agree += 1;
        } else {
            mismatches.push(case);
        }
        if got.crack != prev.crack {
            grew += 1;
        }
    }
    let mut detail = format!("{agree}/25 instances agree with enumeration ({grew} with growth)");
    if !mismatches.is_empty() {
        detail.push_str(&format!("; mismatched cases {mismatches:?}"));
    }
    Outcome::new(agree == 25, detail)
}

// A8

fn a8() -> Outcome {
    let mesh = build_rect_mesh(1.0, 1.0, 8, 8, &Side::ALL).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut symmetric = true;
    let mut worst_triangle = f64::INFINITY;
    let mut identity = true;
    for _ in 0..200 {
        let [a, b, c] = [(); 3].map(|_| random_crack(&mut rng, &mesh, 6, usize::MAX));
        let ab = hausdorff_distance(&mesh, &a, &b);
        symmetric &= ab.to_bits() == hausdorff_distance(&mesh, &b, &a).to_bits();
        let slack = hausdorff_distance(&mesh, &a, &c) + hausdorff_distance(&mesh, &c, &b) - ab;
        worst_triangle = worst_triangle.min(slack);
        identity &= hausdorff_distance(&mesh, &a, &a) == 0.0;
    }
    let e = CrackSet::empty();
    let k = CrackSet::new(&mesh, [mesh.interior_edges().next().unwrap()]).unwrap();
    let empty = hausdorff_distance(&mesh, &e, &e) == 0.0
        && hausdorff_distance(&mesh, &e, &k) == mesh.diameter()
        && hausdorff_distance(&mesh, &k, &e) == mesh.diameter();
    Outcome::new(
        symmetric && identity && empty && worst_triangle >= -1e-12,
        format!("200 triples: symmetric {symmetric}, worst triangle slack {worst_triangle:.2e}, empty-set conventions {empty}"),
    )
}

// A9

fn a9(suite: &mut Suite) -> Outcome {
    let tmp = tempfile::tempdir().expect("temp dir");
    let base = scenario_file("tearing.json");
    let mut dirs = Vec::new();
    for lam in [0.0, LAMBDA_STAR] {
        let mut c = base.clone();
        c.lambda = lam;
        let dir = tmp.path().join(format!("lambda_{lam}"));
        let opts = RunOptions { out: Some(dir.clone()), checks: Checks::NONE, svg: false };
        let outcome = run_scenario(&c, &opts).expect("tearing run");
        suite.traces.push((format!("tearing λ={lam}"), outcome.scenario, outcome.trace));
        dirs.push(dir);
    }
    let cmp = compare_runs(&dirs[0], &dirs[1]).expect("comparison");
    let end = base.schedule.end;
    let max_h = cmp.rows.iter().map(|r| r.hausdorff).fold(0.0, f64::max);
    match cmp.first_divergence {
        Some(t) if t < end => Outcome::new(
            true,
            format!("λ = 0 vs λ = {LAMBDA_STAR}: first divergence at t = {t} < T = {end}, max Hausdorff distance {max_h:.4}"),
        ),
        Some(t) => Outcome::new(false, format!("divergence only at t = {t}")),
        None => Outcome::new(false, "the two runs never diverge"),
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut suite = Suite { traces: Vec::new() };
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut timed = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        results.push((name, o, start.elapsed().as_secs_f64()));
    };
    // the suite-wide checks need the traces of the scenario criteria
    timed("A1", &mut a1);
    timed("A2", &mut a2);
    timed("A3", &mut || a3(&mut suite));
    timed("A5", &mut || a5(&mut suite));
    timed("A9", &mut || a9(&mut suite));
    timed("A4", &mut || a4(&suite));
    timed("A6", &mut || a6(&suite));
    timed("A7", &mut a7);
    timed("A8", &mut a8);
    results.sort_by_key(|r| r.0);
    for (name, o, secs) in &results {
        let label = if o.pass { "PASS" } else { "FAIL" };
        println!("{name} {label} {} [{secs:.1} s]", o.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        ExitCode::FAILURE
    }
}

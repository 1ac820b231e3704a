use qsfrac_core::solver::penalized_energy;
use qsfrac_core::{
    build_rect_mesh, BoundaryProgram, CrackSet, Evolution, EvolutionTrace, ExtensionPolicy, Mesh, Mode, PenaltyWeight,
    Schedule, Side, StepRecord, TimeProfile,
};

fn components(mesh: &Mesh, edges: &[usize]) -> usize {
    let mut parent: Vec<usize> = (0..mesh.n_vertices()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut roots = std::collections::BTreeSet::new();
    for &e in edges {
        let [a, b] = mesh.edges()[e].vertices;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    for &e in edges {
        roots.insert(find(&mut parent, mesh.edges()[e].vertices[0]));
    }
    roots.len()
}

/// Best crack among `prev` and its supersets adding one interior edge, by
/// direct enumeration.
fn brute_force_one(mesh: &Mesh, prev: &StepRecord, g: &[f64], lambda: PenaltyWeight, m: usize) -> (CrackSet, f64) {
    let base = penalized_energy(mesh, &prev.crack, g, &prev.field, lambda).unwrap().total;
    let threshold = base - 1e-10 * base.abs().max(1.0);
    let mut best = (prev.crack.clone(), base);
    let mut best_total = f64::INFINITY;
    for e in 0..mesh.n_edges() {
        if mesh.edges()[e].is_boundary() || prev.crack.contains(e) {
            continue;
        }
        let mut edges = prev.crack.edges().to_vec();
        edges.push(e);
        if components(mesh, &edges) > m {
            continue;
        }
        let k = CrackSet::new(mesh, edges).unwrap();
        let total = penalized_energy(mesh, &k, g, &prev.field, lambda).unwrap().total;
        if total < threshold && total < best_total {
            best_total = total;
            best = (k, total);
        }
    }
    best
}

fn tearing(mesh: &Mesh, amplitude: f64) -> BoundaryProgram {
    let profile = TimeProfile::new(vec![(0.0, 0.0), (1.0, amplitude)]).unwrap();
    let spatial = mesh.nodal(|p| (p[1] - 0.5).signum() * if p[1] == 0.5 { 0.0 } else { 1.0 });
    BoundaryProgram::new(mesh, vec![Mode { profile, spatial }]).unwrap()
}

fn loaded_run(policy: ExtensionPolicy, lambda: f64) -> (Mesh, BoundaryProgram, EvolutionTrace) {
    let mesh = build_rect_mesh(1.0, 1.0, 4, 4, &[Side::Bottom, Side::Top]).unwrap();
    let program = tearing(&mesh, 3.0);
    let evo = Evolution::new(PenaltyWeight::new(lambda).unwrap(), 2, policy);
    let trace = evo.run(&mesh, &CrackSet::empty(), &program, Schedule::new(1.0, 0.125).unwrap()).unwrap();
    (mesh, program, trace)
}

#[test]
fn exhaustive_one_step_matches_brute_force() {
    for lambda in [0.0, 0.5, 4.0] {
        let (mesh, program, trace) = loaded_run(ExtensionPolicy::Exhaustive { k: 1 }, lambda);
        assert!(!trace.final_crack().is_empty(), "no growth at lambda {lambda}");
        for w in trace.records.windows(2) {
            let g = program.at(w[1].time);
            let (k, total) = brute_force_one(&mesh, &w[0], &g, trace.lambda, 2);
            assert_eq!(w[1].crack, k, "step {} lambda {lambda}", w[1].index);
            assert!((w[1].energies.total - total).abs() <= 1e-10 * total.abs().max(1.0));
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    let (_, _, a) = loaded_run(ExtensionPolicy::TipNucleate { budget: 2 }, 0.5);
    let (_, _, b) = loaded_run(ExtensionPolicy::TipNucleate { budget: 2 }, 0.5);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.crack, y.crack);
        assert_eq!(x.field.values(), y.field.values());
        assert_eq!(x.energies.total.to_bits(), y.energies.total.to_bits());
    }
}

#[test]
fn cracks_never_heal() {
    for policy in [
        ExtensionPolicy::Tip { budget: 1 },
        ExtensionPolicy::TipNucleate { budget: 3 },
        ExtensionPolicy::Exhaustive { k: 2 },
    ] {
        let (_, _, trace) = loaded_run(policy, 0.25);
        for w in trace.records.windows(2) {
            assert!(w[1].crack.is_superset_of(&w[0].crack));
        }
    }
}

#[test]
fn accepted_steps_lower_the_energy_of_the_previous_crack() {
    let (mesh, program, trace) = loaded_run(ExtensionPolicy::TipNucleate { budget: 3 }, 0.5);
    for w in trace.records.windows(2) {
        let g = program.at(w[1].time);
        let stay = penalized_energy(&mesh, &w[0].crack, &g, &w[0].field, trace.lambda).unwrap().total;
        assert!(w[1].energies.total <= stay + 1e-12 * stay.abs().max(1.0));
    }
}

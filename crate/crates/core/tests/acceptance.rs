//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Tolerances are exact everywhere; randomized suites use 1000 cases.

mod support;

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wdk_core::decompositions::{
    blockage_from_tangle, bramble_from_tangle, stree_to_branch_decomposition, tangle_from_blockage,
    tangle_from_bramble,
};
use wdk_core::duality::DualityWitness;
use wdk_core::families::ExplicitFamily;
use wdk_core::oracle::{
    branchwidth_exact, named_graphs, negative_controls, pathwidth_exact, small_graphs, suite_jobs, treewidth_exact,
};
use wdk_core::problem::{Instance, Mode, Problem};
use wdk_core::separation::SetSep;
use wdk_core::universe::{Graph, Matroid};

const PROPERTY_CASES: usize = 1000;
const CONTROLS_PER_MODE: usize = 100;

type Outcome = Result<String, String>;

fn problem(g: &Graph, mode: Mode, k: usize, w: Option<usize>) -> Problem {
    Problem::build(&Instance::Graph(g.clone()), mode, k, w, None).expect("problem builds")
}

fn is_tangle(g: &Graph, mode: Mode, k: usize) -> bool {
    problem(g, mode, k, None).solve().expect("solves").is_tangle()
}

fn dichotomy_suite() -> Outcome {
    let modes = [Mode::Tree, Mode::Path, Mode::Branch, Mode::Adhesion, Mode::Carving, Mode::Rank];
    let jobs = suite_jobs(&small_graphs(5), &modes);
    let mut failures = Vec::new();
    let mut sides = [0usize; 2];
    for job in &jobs {
        let r = job.run();
        sides[usize::from(r.side == "tangle")] += 1;
        if !r.verified {
            failures.push(format!("{} {} k={}: {}", r.instance, r.mode, r.k, r.detail));
        }
    }
    if failures.is_empty() {
        Ok(format!("{} checks, {} tree side, {} tangle side", jobs.len(), sides[0], sides[1]))
    } else {
        Err(format!("{} of {} failed, first: {}", failures.len(), jobs.len(), failures[0]))
    }
}

/// Largest k with a branch-mode tangle, scanning upwards from 1.
fn branch_tangle_number(g: &Graph) -> usize {
    (1..=g.vertex_count() + 2).take_while(|&k| is_tangle(g, Mode::Branch, k)).last().unwrap_or(0)
}

fn branch_facts() -> Outcome {
    let mut seen = Vec::new();
    let mut expect = |label: &str, g: &Graph, bw: usize, tangles: usize| -> Result<(), String> {
        let got_bw = branchwidth_exact(g).map_err(|e| e.to_string())?;
        let got_t = branch_tangle_number(g);
        if got_bw != bw || got_t != tangles {
            return Err(format!("{label}: bw {got_bw} (want {bw}), tangle number {got_t} (want {tangles})"));
        }
        // a k=3 tree converts to a branch decomposition of width <= 2
        let p = problem(g, Mode::Branch, 3, None);
        if let DualityWitness::Tree(t) = p.solve().map_err(|e| e.to_string())? {
            let bd = stree_to_branch_decomposition(&t, g, 3).map_err(|e| e.to_string())?;
            if bd.width(g) > 2 {
                return Err(format!("{label}: converted decomposition has width {}", bd.width(g)));
            }
        }
        seen.push(format!("{label}={bw}"));
        Ok(())
    };
    // a single edge has branch-width 0 under the usual |E| <= 1 convention
    expect("K1_1", &Graph::star(1), 0, 2)?;
    for n in 2..=4 {
        expect(&format!("K1_{n}"), &Graph::star(n), 1, 2)?;
    }
    expect("P4", &Graph::path(4), 2, 2)?;
    expect("C4", &Graph::cycle(4), 2, 2)?;
    expect("M2", &Graph::matching(2), 0, 2)?;
    let mut with_edges = 0;
    for g in small_graphs(5).iter().chain(named_graphs().iter()) {
        if g.graph.edge_count() > 0 {
            with_edges += 1;
            if !is_tangle(&g.graph, Mode::Branch, 2) {
                return Err(format!("{} has an edge but no order-2 tangle", g.name));
            }
        }
    }
    Ok(format!("{}; order-2 tangle on all {with_edges} graphs with an edge", seen.join(" ")))
}

fn treewidth_facts() -> Outcome {
    for n in 2..=5 {
        let g = Graph::complete(n);
        let tw = treewidth_exact(&g).map_err(|e| e.to_string())?;
        if tw != n - 1 {
            return Err(format!("tw(K{n}) = {tw}"));
        }
        let flip = (1..=n + 1).find(|&k| !is_tangle(&g, Mode::Tree, k));
        if flip != Some(n + 1) || !is_tangle(&g, Mode::Tree, n) {
            return Err(format!("K{n}: first tree side at k={flip:?}, want {}", n + 1));
        }
    }
    let mut round_trips = 0;
    for g in small_graphs(5).iter().chain(named_graphs().iter()) {
        for k in 1..=g.graph.vertex_count() + 1 {
            let p = problem(&g.graph, Mode::Tree, k, None);
            let DualityWitness::Tangle(o) = p.solve().map_err(|e| e.to_string())? else { continue };
            let bramble = bramble_from_tangle(&o, &p.system, &g.graph, k).map_err(|e| format!("{} k={k}: {e}", g.name))?;
            bramble.validate(&g.graph).map_err(|e| format!("{} k={k}: bramble invalid: {e}", g.name))?;
            if bramble.order(&g.graph) < k {
                return Err(format!("{} k={k}: bramble of order {}", g.name, bramble.order(&g.graph)));
            }
            let back = tangle_from_bramble(&bramble, &p.system).map_err(|e| format!("{} k={k}: {e}", g.name))?;
            if back.ids() != o.ids() {
                return Err(format!("{} k={k}: bramble does not give back the tangle", g.name));
            }
            round_trips += 1;
        }
    }
    Ok(format!("tw(K2..K5) = 1..4, last tangle at k=n; {round_trips} bramble round trips"))
}

fn pathwidth_facts() -> Outcome {
    for n in 2..=6 {
        let pw = pathwidth_exact(&Graph::path(n)).map_err(|e| e.to_string())?;
        if pw != 1 {
            return Err(format!("pw(P{n}) = {pw}"));
        }
    }
    // depth counts edge levels: depth 2 has 7 vertices and is a caterpillar
    let bt = [(2, 1), (3, 2)];
    for (depth, want) in bt {
        let g = Graph::complete_binary_tree(depth);
        let pw = pathwidth_exact(&g).map_err(|e| e.to_string())?;
        if pw != want {
            return Err(format!("pw(binary tree depth {depth}) = {pw}, want {want}"));
        }
        if g.vertex_count() > 12 {
            // beyond the engine's vertex cap; the exact oracle alone decides
            continue;
        }
        let engine = (1..=g.vertex_count() + 1).take_while(|&k| is_tangle(&g, Mode::Path, k)).last().unwrap_or(0);
        if engine != pw + 1 {
            return Err(format!("binary tree depth {depth}: last path tangle at k={engine}, want {}", pw + 1));
        }
    }
    let mut round_trips = 0;
    for g in small_graphs(5).iter().chain(named_graphs().iter()) {
        for k in 1..=g.graph.vertex_count() + 1 {
            let p = problem(&g.graph, Mode::Path, k, None);
            let DualityWitness::Tangle(o) = p.solve().map_err(|e| e.to_string())? else { continue };
            let blockage = blockage_from_tangle(&o, &p.system, k);
            blockage.validate(&g.graph, &p.system).map_err(|e| format!("{} k={k}: {e}", g.name))?;
            let back = tangle_from_blockage(&blockage, &p.system).map_err(|e| format!("{} k={k}: {e}", g.name))?;
            if back.ids() != o.ids() {
                return Err(format!("{} k={k}: blockage does not give back the tangle", g.name));
            }
            round_trips += 1;
        }
    }
    Ok(format!("pw(P2..P6) = 1, pw(binary tree) = 1 at depth 2 and 2 at depth 3; {round_trips} blockage round trips"))
}

fn matroid_facts() -> Outcome {
    let mut checked = 0;
    for g in small_graphs(5).iter().chain(named_graphs().iter()) {
        let graph = &g.graph;
        if !graph.is_connected() || graph.edge_count() == 0 || graph.edge_count() > 8 {
            continue;
        }
        let m = Matroid::graphic(graph.clone()).map_err(|e| e.to_string())?;
        let instance = Instance::Matroid(m);
        let tw = treewidth_exact(graph).map_err(|e| e.to_string())?;
        let mut last = 0;
        for k in 1..=graph.edge_count() + 1 {
            let p = Problem::build(&instance, Mode::MatroidTree, k, None, None).map_err(|e| e.to_string())?;
            let w = p.solve().map_err(|e| e.to_string())?;
            p.verify(&w).map_err(|e| format!("{} k={k}: {e}", g.name))?;
            if w.is_tangle() {
                last = k;
            } else {
                break;
            }
        }
        if last != tw {
            return Err(format!("{}: matroid tree-width {last}, treewidth {tw}", g.name));
        }
        checked += 1;
    }
    Ok(format!("{checked} connected graphs with <= 8 edges agree"))
}

fn adhesion_matches_tree() -> Outcome {
    let mut checked = 0;
    for g in small_graphs(5).iter().chain(named_graphs().iter()) {
        for k in 1..=g.graph.vertex_count() + 1 {
            let tree = problem(&g.graph, Mode::Tree, k, None);
            let adhesion = problem(&g.graph, Mode::Adhesion, k, Some(k));
            let (a, b) = (tree.solve().map_err(|e| e.to_string())?, adhesion.solve().map_err(|e| e.to_string())?);
            let body_a = serde_json::to_string(&tree.witness_file(&a).body).expect("json");
            let body_b = serde_json::to_string(&adhesion.witness_file(&b).body).expect("json");
            if body_a != body_b {
                return Err(format!("{} k={k}: witnesses differ", g.name));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} instances identical"))
}

fn property_suites() -> Outcome {
    let cases = |check: fn(&mut ChaCha8Rng) -> support::Check, seed: u64| -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..PROPERTY_CASES).try_for_each(|_| check(&mut rng))
    };
    let suites: [(&str, fn(&mut ChaCha8Rng) -> support::Check); 7] = [
        ("order reversal", support::order_reversal),
        ("De Morgan", support::de_morgan),
        ("order functions", support::order_function),
        ("shifting", support::shifting_preserves_order),
        ("natural order", support::engine_tree_order),
        ("matroid star bound", support::matroid_star_bound),
        ("matroid tree stars", support::engine_matroid_stars),
    ];
    for (i, (name, check)) in suites.iter().enumerate() {
        cases(*check, 0xacce_0000 + i as u64).map_err(|e| format!("{name}: {e}"))?;
    }
    let mut stars = 0;
    let mut graphs = small_graphs(6);
    graphs.extend(named_graphs().into_iter().filter(|g| g.graph.vertex_count() <= 6));
    for g in &graphs {
        for k in 1..=4.min(g.graph.vertex_count() + 1) {
            stars += support::stars_suffice(&g.graph, k)?;
        }
    }
    Ok(format!("{} suites x {PROPERTY_CASES} cases; {stars} star-avoiding orientations on {} graphs", suites.len(), graphs.len()))
}

/// Explicit families on C5 at k=4: the node stars of a tree-mode tree, and
/// the smallest standard family.
fn custom_problems() -> Vec<Problem> {
    let c5 = Graph::cycle(5);
    let tree_mode = problem(&c5, Mode::Tree, 4, None);
    let Ok(DualityWitness::Tree(t)) = tree_mode.solve() else { panic!("C5 k=4 is tree side") };
    // singletons that force every trivial separation keep the family standard
    let sys = &tree_mode.system;
    let forcing: Vec<Vec<SetSep>> =
        sys.ids().filter(|&r| sys.is_trivial(r)).map(|r| vec![sys.get(sys.inverse(r))]).collect();
    let mut stars: Vec<Vec<SetSep>> = t.nodes().map(|x| t.oriented_star_at(x)).collect();
    stars.extend(forcing.iter().cloned());
    let from_tree = ExplicitFamily::new("c5-bags", stars).expect("family");
    let minimal = ExplicitFamily::new("trivial-only", forcing).expect("family");
    [from_tree, minimal]
        .into_iter()
        .map(|f| Problem::build(&Instance::Graph(c5.clone()), Mode::Custom, 4, None, Some(f)).expect("custom builds"))
        .collect()
}

fn negative_control_suite() -> Outcome {
    let c5 = Graph::cycle(5);
    let k4 = Graph::complete(4);
    let mut lines = Vec::new();
    for mode in Mode::ALL {
        let problems: Vec<Problem> = match mode {
            Mode::Custom => custom_problems(),
            Mode::Adhesion => (2..=4).map(|k| problem(&c5, mode, k, Some(k + 1))).collect(),
            _ => [&c5, &k4].iter().flat_map(|g| (2..=4).map(|k| problem(g, mode, k, None))).collect(),
        };
        let mut witnesses = Vec::new();
        for p in &problems {
            let w = p.solve().map_err(|e| format!("{mode}: {e}"))?;
            if !witnesses.iter().any(|(_, x): &(&Problem, DualityWitness)| x.side() == w.side()) {
                witnesses.push((p, w));
            }
        }
        let share = CONTROLS_PER_MODE / witnesses.len();
        let (mut invalid, mut rejected) = (0, 0);
        for (i, (p, w)) in witnesses.iter().enumerate() {
            let count = if i + 1 == witnesses.len() { CONTROLS_PER_MODE - invalid } else { share };
            let r = negative_controls(p, w, count, 0xc0de + i as u64).map_err(|e| format!("{mode}: {e}"))?;
            if let Some(e) = r.escapes.first() {
                return Err(format!("{mode} k={}: {e}", p.k));
            }
            invalid += r.invalid;
            rejected += r.rejected;
        }
        if invalid < CONTROLS_PER_MODE || rejected != invalid {
            return Err(format!("{mode}: {rejected} of {invalid} invalid mutants rejected"));
        }
        let sides: Vec<&str> = witnesses.iter().map(|(_, w)| w.side()).collect();
        lines.push(format!("{mode}({})", sides.join("+")));
    }
    Ok(format!("{CONTROLS_PER_MODE} rejected per mode: {}", lines.join(" ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("dichotomy suite", dichotomy_suite),
        ("branch-width facts", branch_facts),
        ("tree-width and brambles", treewidth_facts),
        ("path-width and blockages", pathwidth_facts),
        ("matroid tree-width", matroid_facts),
        ("adhesion w=k equals tree mode", adhesion_matches_tree),
        ("property suites", property_suites),
        ("negative controls", negative_control_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

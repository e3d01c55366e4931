//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any required criterion fails.

use std::time::Instant;

use motifconv::bench::bench_pairwise;
use motifconv::classifier::loss_and_gradient;
use motifconv::experiment::best_bijection;
use motifconv::matching::graduated_assignment_traced;
use motifconv::*;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
    /// Failures of a hardware-bound check on a host with too few cores
    /// are reported but do not fail the run.
    advisory: bool,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        advisory: false,
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_arg(rng: &mut ChaCha8Rng, n: usize, p_edge: f64) -> ArgGraph {
    let nodes = (0..n).map(|_| vec![normal(rng)]).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p_edge) {
                edges.push(Edge::new(u, v, vec![normal(rng)]));
            }
        }
    }
    ArgGraph::new(nodes, edges, None, None).unwrap()
}

fn perturbed(g: &ArgGraph, rng: &mut ChaCha8Rng) -> ArgGraph {
    let mut nodes = g.nodes().to_vec();
    let mut edges = g.edges().to_vec();
    let slot = rng.gen_range(0..nodes.len() + edges.len());
    if slot < nodes.len() {
        nodes[slot][0] += 0.5;
    } else {
        edges[slot - nodes.len()].attrs[0] += 0.5;
    }
    ArgGraph::new(nodes, edges, None, None).unwrap()
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Binary, injective, in range.
fn hard_ok(h: &HardAssignment) -> bool {
    let m = h.to_matrix();
    m.rows()
        .into_iter()
        .all(|r| r.iter().map(|&x| x as usize).sum::<usize>() <= 1)
        && m.columns()
            .into_iter()
            .all(|c| c.iter().map(|&x| x as usize).sum::<usize>() <= 1)
        && m.iter().all(|&x| x <= 1)
        && h.validate().is_ok()
}

struct Constraints {
    hard_checked: usize,
    hard_bad: usize,
    steps_checked: usize,
    worst_residual: f64,
}

impl Constraints {
    fn hard(&mut self, h: &HardAssignment) {
        self.hard_checked += 1;
        if !hard_ok(h) {
            self.hard_bad += 1;
        }
    }
}

fn criterion_1(c: &mut Constraints) -> Outcome {
    let cfg = CompatConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_iso = 0.0f64;
    let mut worst_perturbed = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let g = random_arg(&mut rng, n, 0.4);
        let p = g.permuted(&random_perm(&mut rng, n)).unwrap();
        let (h, s) = brute_force_match(&g, &p, &cfg).unwrap();
        c.hard(&h);
        worst_iso = worst_iso.max((s - 1.0).abs());

        let q = perturbed(&g, &mut rng)
            .permuted(&random_perm(&mut rng, n))
            .unwrap();
        let (h, s) = brute_force_match(&g, &q, &cfg).unwrap();
        c.hard(&h);
        worst_perturbed = worst_perturbed.max(s);
    }
    outcome(
        worst_iso <= 1e-9 && worst_perturbed < 1.0 - 1e-4,
        format!("max |S-1| on permuted copies {worst_iso:.2e}; max S on perturbed copies {worst_perturbed:.6}"),
    )
}

fn criterion_2(c: &mut Constraints) -> Outcome {
    let cfg = CompatConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut made = 0;
    while made < 100 {
        let n = rng.gen_range(1..=7);
        let g = random_arg(&mut rng, n, 0.5);
        // a supergraph with an extra node, or a copy missing one edge
        let other = if rng.gen_bool(0.5) || g.edge_count() == 0 {
            let mut nodes = g.nodes().to_vec();
            nodes.push(vec![normal(&mut rng)]);
            let mut edges = g.edges().to_vec();
            if rng.gen_bool(0.5) {
                edges.push(Edge::new(rng.gen_range(0..n), n, vec![normal(&mut rng)]));
            }
            ArgGraph::new(nodes, edges, None, None).unwrap()
        } else {
            let mut edges = g.edges().to_vec();
            edges.remove(rng.gen_range(0..edges.len()));
            ArgGraph::new(g.nodes().to_vec(), edges, None, None).unwrap()
        };
        assert!(g.node_count() != other.node_count() || g.edge_count() != other.edge_count());
        let (h, s) = brute_force_match(&g, &other, &cfg).unwrap();
        c.hard(&h);
        worst = worst.max(s);
        made += 1;
    }
    outcome(
        worst < 1.0 - 1e-6,
        format!("max S over 100 size-mismatched pairs {worst:.6}"),
    )
}

fn criterion_3(c: &mut Constraints) -> Outcome {
    let cfg = CompatConfig::default();
    let mp = MatchParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut above = 0usize;
    let mut close = 0usize;
    let mut worst_ratio = f64::INFINITY;
    for _ in 0..100 {
        let n1 = rng.gen_range(1..=6);
        let n2 = rng.gen_range(1..=6);
        let g1 = random_arg(&mut rng, n1, 0.5);
        let g2 = random_arg(&mut rng, n2, 0.5);
        let (soft, trace) = graduated_assignment_traced(&g1, &g2, &cfg, &mp).unwrap();
        let h = greedy_hard_assignment(&soft).unwrap();
        c.hard(&h);
        if n1 == n2 {
            for step in &trace {
                c.steps_checked += 1;
                c.worst_residual = c
                    .worst_residual
                    .max(step.row_residual.max(step.col_residual));
            }
        }
        let s = similarity_score(&g1, &g2, &h, &cfg).unwrap();
        let (oh, o) = brute_force_match(&g1, &g2, &cfg).unwrap();
        c.hard(&oh);
        if s > o + 1e-9 {
            above += 1;
        }
        if s >= 0.9 * o {
            close += 1;
        }
        worst_ratio = worst_ratio.min(s / o);
    }
    outcome(
        above == 0 && close >= 90,
        format!("{above} pairs above the oracle; {close}/100 within 90% of it; worst ratio {worst_ratio:.4}"),
    )
}

fn criterion_4(c: &Constraints) -> Outcome {
    outcome(
        c.hard_bad == 0 && c.steps_checked > 0 && c.worst_residual < 1e-3,
        format!(
            "{} hard assignments, {} invalid; worst square-case marginal residual {:.2e} over {} annealing steps",
            c.hard_checked, c.hard_bad, c.worst_residual, c.steps_checked
        ),
    )
}

fn criteria_5_and_6() -> (Outcome, Outcome) {
    let mut accs = Vec::new();
    let mut twin_min = f64::INFINITY;
    let mut recovery_min = f64::INFINITY;
    let mut all_bijective = true;
    let mut seconds = Vec::new();
    for seed in 0..5 {
        let start = Instant::now();
        let config = ExperimentConfig {
            seed,
            ..ExperimentConfig::default()
        };
        let out = run_experiment(&config, None).unwrap();
        seconds.push(start.elapsed().as_secs_f64());
        let r = &out.report;
        accs.push(r.test_accuracy);
        for pc in r
            .per_class
            .iter()
            .filter(|pc| pc.class == 2 || pc.class == 5)
        {
            twin_min = twin_min.min(pc.accuracy.unwrap_or(0.0));
        }
        match best_bijection(&r.motif_template_similarity) {
            Some((_, min)) if r.motif_template_similarity.len() == 5 => {
                recovery_min = recovery_min.min(min)
            }
            _ => all_bijective = false,
        }
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let std = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
    let c5 = outcome(
        mean >= 0.95 && twin_min >= 0.90,
        format!(
            "test accuracy {mean:.3} +/- {std:.3} over 5 seeds; min accuracy on classes 2 and 5 {twin_min:.3}; {:.0} s",
            seconds.iter().sum::<f64>()
        ),
    );
    let c6 = outcome(
        all_bijective && recovery_min >= 0.9,
        format!("bijective motif-template recovery on every seed: {all_bijective}; min matched score {recovery_min:.4}"),
    );
    (c5, c6)
}

fn criterion_7() -> Outcome {
    let graphs = generate_dataset(100, 7, &NoiseConfig::default()).unwrap();
    let cfg = KernelPreset::Synthetic.config();
    let mp = MatchParams {
        sinkhorn_max_iters: 100,
        ..MatchParams::default()
    };
    let (report, _) = bench_pairwise(&graphs, &cfg, &mp, &[1, 2, 4, 8]).unwrap();
    let s2 = report.speedup(2).unwrap();
    let s4 = report.speedup(4).unwrap();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let pass = report.identical && s2 >= 1.6 && s4 >= 2.5;
    Outcome {
        pass,
        detail: format!(
            "bit-identical for workers 1,2,4,8: {}; speedup x{s2:.2} at 2 workers, x{s4:.2} at 4; {cores} core(s) available",
            report.identical
        ),
        advisory: !pass && report.identical && cores < 4,
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_grad = 0.0f64;
    for _ in 0..20 {
        let classes = rng.gen_range(2..=5);
        let dim = rng.gen_range(1..=6);
        let n = rng.gen_range(3..=15);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| normal(&mut rng)).collect())
            .collect();
        let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..classes)).collect();
        let w = Array2::from_shape_fn((classes, dim + 1), |_| normal(&mut rng));
        let l2 = 1e-3;
        let (_, grad) = loss_and_gradient(&w, &x, &y, l2).unwrap();
        let h = 1e-5;
        for idx in ndarray::indices(w.dim()) {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[idx] += h;
            wm[idx] -= h;
            let lp = loss_and_gradient(&wp, &x, &y, l2).unwrap().0;
            let lm = loss_and_gradient(&wm, &x, &y, l2).unwrap().0;
            let numeric = (lp - lm) / (2.0 * h);
            let analytic = grad[idx];
            let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst_grad = worst_grad.max(rel);
        }
    }

    let mut worst_sum = 0.0f64;
    for _ in 0..20 {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..4).map(|_| 3.0 * normal(&mut rng)).collect())
            .collect();
        let y: Vec<i64> = (0..30).map(|i| (i % 3) as i64 + 1).collect();
        let model = train_logreg(
            &x,
            &y,
            &LogRegParams {
                epochs: 50,
                ..LogRegParams::default()
            },
        )
        .unwrap();
        for _ in 0..50 {
            let probe: Vec<f64> = (0..4).map(|_| 10.0 * normal(&mut rng)).collect();
            let p = model.predict_proba(&probe).unwrap();
            worst_sum = worst_sum.max((p.iter().sum::<f64>() - 1.0).abs());
        }
    }

    let mut readout_mismatches = 0;
    for _ in 0..100 {
        let rows = rng.gen_range(1..=20);
        let cols = rng.gen_range(1..=6);
        let m = Array2::from_shape_fn((rows, cols), |_| 1e3 * normal(&mut rng));
        let perm = random_perm(&mut rng, rows);
        let p = m.select(ndarray::Axis(0), &perm);
        for mode in [Readout::Max, Readout::Mean, Readout::Sum] {
            let a = readout(&m, mode).unwrap();
            let b = readout(&p, mode).unwrap();
            if a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits()) {
                readout_mismatches += 1;
            }
        }
    }
    outcome(
        worst_grad <= 1e-5 && worst_sum <= 1e-12 && readout_mismatches == 0,
        format!(
            "worst gradient relative error {worst_grad:.2e}; worst |sum p - 1| {worst_sum:.2e}; {readout_mismatches} readout mismatches"
        ),
    )
}

fn main() {
    let mut constraints = Constraints {
        hard_checked: 0,
        hard_bad: 0,
        steps_checked: 0,
        worst_residual: 0.0,
    };
    let mut results = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        (o, start.elapsed().as_secs_f64())
    };
    results.push((
        "isomorphism maximum",
        timed(&mut || criterion_1(&mut constraints)),
    ));
    results.push((
        "size strictness",
        timed(&mut || criterion_2(&mut constraints)),
    ));
    results.push((
        "matcher vs oracle",
        timed(&mut || criterion_3(&mut constraints)),
    ));
    results.push(("assignment constraints", (criterion_4(&constraints), 0.0)));
    let start = Instant::now();
    let (c5, c6) = criteria_5_and_6();
    let elapsed = start.elapsed().as_secs_f64();
    results.push(("synthetic classification", (c5, elapsed)));
    results.push(("motif recovery", (c6, 0.0)));
    results.push(("parallel determinism and scaling", timed(&mut criterion_7)));
    results.push(("numerical checks", timed(&mut criterion_8)));

    let mut failed = 0;
    for (i, (name, (o, secs))) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {tag} {name}: {} [{secs:.1} s]",
            i + 1,
            o.detail
        );
        if !o.pass && !o.advisory {
            failed += 1;
        }
        if o.advisory {
            println!(
                "  (scaling targets need at least 4 cores; not counted as a failure on this host)"
            );
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

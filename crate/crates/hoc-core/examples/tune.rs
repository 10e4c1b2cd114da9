//! Scratch harness for search hyperparameter sweeps.

use hoc_core::network::NodeRef;
use hoc_core::{evolve, generate_planted, Algo, PlantSpec, SearchConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let algo: Algo = args.get(1).map_or(Algo::Poet, |s| s.parse().unwrap());
    let generations: usize = args.get(2).map_or(400, |s| s.parse().unwrap());
    let mutation_rate: f64 = args.get(3).map_or(0.25, |s| s.parse().unwrap());
    let seed: u64 = args.get(4).map_or(9, |s| s.parse().unwrap());
    let grid_side: usize = args.get(5).map_or(0, |s| s.parse().unwrap());
    let events: usize = args.get(6).map_or(8, |s| s.parse().unwrap());
    let freeze: usize = args.get(7).map_or(250, |s| s.parse().unwrap());

    let plant = PlantSpec::new(vec![0, 1, 2, 3, 4], 3, 19, 0.05);
    let rds = generate_planted(200, 19, &plant, 2024).unwrap();
    let relevant: Vec<usize> = vec![0, 1, 2, 3, 4, 19];

    let min_hoc: Option<f64> = args.get(8).and_then(|s| s.parse().ok());
    let sds_size: usize = args.get(9).map_or(2000, |s| s.parse().unwrap());
    let cfg = SearchConfig {
        algo,
        population: 50,
        generations,
        mutation_rate,
        grid_side,
        events_per_epoch: events,
        freeze_interval: freeze,
        layer_sizes: vec![4],
        sds_sample_size: sds_size,
        seed,
        constraints: hoc_core::RuleConstraints {
            min_hoc,
            ..Default::default()
        },
        ..SearchConfig::default()
    };
    let t0 = std::time::Instant::now();
    let outcome = evolve(&rds, &cfg).unwrap();
    let dt = t0.elapsed();
    println!(
        "algo={algo} gens={generations} rate={mutation_rate} seed={seed} side={grid_side} events={events} freeze={freeze}"
    );
    println!(
        "  best_fitness={:.4} final_cov={:.4} elapsed={dt:?}",
        outcome.best_fitness, outcome.coverage.cov
    );
    for r in &outcome.reports {
        let aligned = r
            .inputs
            .iter()
            .filter(|i| matches!(i, NodeRef::Input(c) if relevant.contains(c)))
            .count();
        println!(
            "  node L{}N{} inputs={} aligned={aligned} quorum={:?} qr={:.4} qs={:.4} hoc={:?}",
            r.layer + 1,
            r.node,
            r.inputs.len(),
            r.quorum,
            r.qr,
            r.qs,
            r.hoc.map(|h| (h * 1e4).round() / 1e4)
        );
    }
    let idx = [0, generations / 4, generations / 2, 3 * generations / 4, generations - 1];
    for i in idx {
        let s = &outcome.history[i];
        println!("  gen {} best={:.4} mean={:.4}", s.generation, s.best_fitness, s.mean_fitness);
    }
}

//! Scratch harness for the large synthetic run.

use hoc_core::metrics::top_per_layer;
use hoc_core::{evolve, generate_planted_multi, PlantSpec, SearchConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let generations: usize = args.get(1).map_or(200, |s| s.parse().unwrap());
    let sds_size: usize = args.get(2).map_or(2000, |s| s.parse().unwrap());
    let seed: u64 = args.get(3).map_or(1, |s| s.parse().unwrap());

    let plants = vec![
        PlantSpec::new(vec![0, 1, 2], 3, 995, 0.01),
        PlantSpec::new(vec![10, 11, 12], 3, 996, 0.01),
        PlantSpec::new(vec![20, 21, 22, 23], 4, 997, 0.01),
        PlantSpec::new(vec![30, 31, 32, 33], 4, 998, 0.01),
        PlantSpec::new(vec![40, 41, 42, 43, 44], 5, 999, 0.01),
    ];
    let rds = generate_planted_multi(100, 995, &plants, 77).unwrap();
    let cfg = SearchConfig {
        population: 50,
        generations,
        layer_sizes: vec![32, 32],
        sds_sample_size: sds_size,
        report_sample_size: 50_000,
        seed,
        ..SearchConfig::default()
    };
    let t0 = std::time::Instant::now();
    let outcome = evolve(&rds, &cfg).unwrap();
    let dt = t0.elapsed();
    println!(
        "gens={generations} sds={sds_size} seed={seed} elapsed={dt:?} ({:.1} ms/gen)",
        dt.as_millis() as f64 / generations as f64
    );
    println!(
        "gen0 best={:.4} final best={:.4} final cov={:.4} per-layer={:?}",
        outcome.history[0].best_fitness,
        outcome.best_fitness,
        outcome.coverage.cov,
        outcome.coverage.per_layer_cov
    );
    let top = top_per_layer(&outcome.reports, 5);
    for r in &top {
        println!(
            "  L{} N{} inputs={} quorum={:?} qr={:.3} qs={:.5} hoc={:?}",
            r.layer + 1,
            r.node,
            r.inputs.len(),
            r.quorum,
            r.qr,
            r.qs,
            r.hoc
        );
    }
    let monotone = outcome
        .history
        .windows(2)
        .all(|w| w[1].best_fitness >= w[0].best_fitness);
    let defined = top.iter().filter(|r| r.hoc.unwrap_or(0.0) > 0.0).count();
    println!("monotone={monotone} top5_defined={defined}/10");
}

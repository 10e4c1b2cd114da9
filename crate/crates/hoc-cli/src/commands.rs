//! Implementations of the five subcommands.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use hoc_core::{
    enumerate_exact, evolve_with, generate_planted_exhaustive, generate_planted_multi,
    mutual_information, pearson_binary, sample_mc, score_network, Checkpoint, Dataset,
    EvolveOptions, FeatureNetwork, GenerationStat, PlantSpec, ScrambleSource, SearchConfig,
    SearchOutcome,
};
use hoc_core::metrics::{reports_to_json, reports_to_tsv, top_per_layer};

use crate::manifest::{sidecar_path, RunManifest};
use crate::plant::parse_plant;
use crate::{
    BaselineArgs, CliError, CliResult, EvalArgs, GenerateArgs, ScrambleArgs, SearchArgs,
};

pub fn generate(args: GenerateArgs) -> CliResult<()> {
    let plants: Vec<PlantSpec> = args
        .plants
        .iter()
        .map(|s| parse_plant(s))
        .collect::<CliResult<_>>()?;
    let start = Instant::now();
    let ds = if args.exhaustive {
        if let Some(rows) = args.rows {
            let expected = 1usize << args.background.min(63);
            if rows != expected {
                return Err(CliError::Usage(format!(
                    "--exhaustive with {} background variables produces {expected} rows, not {rows}",
                    args.background
                )));
            }
        }
        generate_planted_exhaustive(args.background, &plants, args.seed)?
    } else {
        let rows = args
            .rows
            .ok_or_else(|| CliError::Usage("--rows is required without --exhaustive".into()))?;
        generate_planted_multi(rows, args.background, &plants, args.seed)?
    };
    ds.write_csv(&args.out)?;
    let mut manifest = RunManifest::new(
        "generate",
        json!({
            "rows": ds.n_rows(),
            "background": args.background,
            "plants": plants,
            "exhaustive": args.exhaustive,
        }),
    )
    .with_seed(args.seed)
    .with_dataset(&args.out, ds.n_rows(), ds.n_cols())?;
    manifest.record_output(&args.out);
    manifest.record_timing("generate", start.elapsed());
    manifest.write(&sidecar_path(&args.out))?;
    println!(
        "wrote {} ({} rows x {} columns)",
        args.out.display(),
        ds.n_rows(),
        ds.n_cols()
    );
    Ok(())
}

pub fn scramble(args: ScrambleArgs) -> CliResult<()> {
    let start = Instant::now();
    let ds = Dataset::load_csv(&args.input, args.binarize)?;
    let src = ScrambleSource::from_dataset(&ds);
    let (sds, mode) = if args.mc {
        (sample_mc(&src, args.size, args.seed), "mc")
    } else {
        (enumerate_exact(&src, args.cap)?, "exact")
    };
    sds.write_csv(&args.out, ds.names(), !args.no_weights)?;
    let mut manifest = RunManifest::new(
        "scramble",
        json!({
            "input": args.input.display().to_string(),
            "mode": mode,
            "size": args.size,
            "cap": args.cap,
            "binarize": args.binarize,
        }),
    )
    .with_seed(args.seed)
    .with_dataset(&args.input, ds.n_rows(), ds.n_cols())?;
    manifest.record_output(&args.out);
    manifest.record_timing("scramble", start.elapsed());
    manifest.write(&sidecar_path(&args.out))?;
    println!(
        "wrote {} ({} {} rows)",
        args.out.display(),
        hoc_core::DataSource::n_rows(&sds),
        mode
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> CliResult<()> {
    let start = Instant::now();
    let ds = Dataset::load_csv(&args.input, args.binarize)?;
    let (net, input_names) = FeatureNetwork::read_json(&args.network)?;
    if input_names != ds.names() {
        return Err(hoc_core::Error::InvalidNetwork(
            "network input columns do not match the dataset header".into(),
        )
        .into());
    }
    let src = ScrambleSource::from_dataset(&ds);
    let sds = if args.mc {
        sample_mc(&src, args.size, args.seed)
    } else {
        enumerate_exact(&src, args.cap)?
    };
    let mut reports = score_network(&net, &ds, &sds)?;
    if let Some(top) = args.top {
        reports = top_per_layer(&reports, top);
    }
    let text = match args.format.as_str() {
        "tsv" => reports_to_tsv(&reports, ds.names()),
        "json" => serde_json::to_string_pretty(&reports_to_json(&reports, ds.names()))
            .map_err(hoc_core::Error::from)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown format {other:?}; use tsv or json"
            )))
        }
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            let mut manifest = RunManifest::new(
                "eval",
                json!({
                    "input": args.input.display().to_string(),
                    "network": args.network.display().to_string(),
                    "mode": if args.mc { "mc" } else { "exact" },
                    "size": args.size,
                    "top": args.top,
                    "format": args.format,
                }),
            )
            .with_seed(args.seed)
            .with_dataset(&args.input, ds.n_rows(), ds.n_cols())?;
            manifest.record_output(path);
            manifest.record_timing("eval", start.elapsed());
            manifest.write(&sidecar_path(path))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn load_config(path: &Path) -> CliResult<SearchConfig> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text)
        .map_err(|e| hoc_core::Error::InvalidConfig(format!("{}: {e}", path.display())).into())
}

fn apply_overrides(cfg: &mut SearchConfig, args: &SearchArgs) -> CliResult<()> {
    if let Some(v) = args.algo {
        cfg.algo = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.population {
        cfg.population = v;
    }
    if let Some(v) = args.generations {
        cfg.generations = v;
    }
    if let Some(v) = args.tournament {
        cfg.tournament = v;
    }
    if let Some(v) = args.mutation_rate {
        cfg.mutation_rate = v;
    }
    if let Some(v) = args.mutation_sigma {
        cfg.mutation_sigma = v;
    }
    if let Some(v) = args.crossover_rate {
        cfg.crossover_rate = v;
    }
    if let Some(v) = args.freeze_interval {
        cfg.freeze_interval = v;
    }
    if let Some(v) = args.events_per_epoch {
        cfg.events_per_epoch = v;
    }
    if let Some(v) = args.grid_side {
        cfg.grid_side = v;
    }
    if let Some(text) = &args.layers {
        let sizes: Result<Vec<usize>, _> = text.split(',').map(|s| s.trim().parse()).collect();
        cfg.layer_sizes =
            sizes.map_err(|_| CliError::Usage(format!("bad --layers value {text:?}")))?;
    }
    if args.layerwise {
        cfg.layerwise = true;
    }
    if let Some(v) = args.top_h {
        cfg.top_h = v;
    }
    if let Some(v) = args.sds_size {
        cfg.sds_sample_size = v;
    }
    if args.sds_exact {
        cfg.sds_exact = true;
    }
    if let Some(v) = args.report_size {
        cfg.report_sample_size = v;
    }
    if let Some(v) = args.min_qr {
        cfg.constraints.min_qr = Some(v);
    }
    if let Some(v) = args.max_qs {
        cfg.constraints.max_qs = Some(v);
    }
    if let Some(v) = args.min_hoc {
        cfg.constraints.min_hoc = Some(v);
    }
    Ok(())
}

fn write_history(path: &Path, history: &[GenerationStat]) -> CliResult<()> {
    let mut out = String::from("generation,best_fitness,mean_fitness\n");
    for stat in history {
        out.push_str(&format!(
            "{},{},{}\n",
            stat.generation, stat.best_fitness, stat.mean_fitness
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_search_artifacts(
    out_dir: &Path,
    ds: &Dataset,
    outcome: &SearchOutcome,
) -> CliResult<Vec<std::path::PathBuf>> {
    let network_path = out_dir.join("best_network.json");
    outcome.network.write_json(&network_path, ds.names())?;
    let tsv_path = out_dir.join("rule_report.tsv");
    std::fs::write(&tsv_path, reports_to_tsv(&outcome.reports, ds.names()))?;
    let json_path = out_dir.join("rule_report.json");
    let report_doc = json!({
        "coverage": {
            "cov": outcome.coverage.cov,
            "per_layer_cov": outcome.coverage.per_layer_cov,
        },
        "best_fitness": outcome.best_fitness,
        "rules": reports_to_json(&outcome.reports, ds.names()),
    });
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&report_doc).map_err(hoc_core::Error::from)?,
    )?;
    let history_path = out_dir.join("history.csv");
    write_history(&history_path, &outcome.history)?;
    let checkpoint_path = out_dir.join("checkpoint.json");
    outcome.checkpoint.write_json(&checkpoint_path)?;
    Ok(vec![
        network_path,
        tsv_path,
        json_path,
        history_path,
        checkpoint_path,
    ])
}

pub fn search(args: SearchArgs) -> CliResult<()> {
    let start = Instant::now();
    let ds = Dataset::load_csv(&args.input, args.binarize)?;
    let (cfg, resume) = match &args.resume {
        Some(path) => {
            let ckpt = Checkpoint::read_json(path)?;
            (ckpt.config.clone(), Some(ckpt))
        }
        None => {
            let mut cfg = match &args.config {
                Some(path) => load_config(path)?,
                None => SearchConfig::default(),
            };
            apply_overrides(&mut cfg, &args)?;
            (cfg, None)
        }
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let checkpoint_path = args.out_dir.join("checkpoint.json");
    let mut sink = |ckpt: &Checkpoint| ckpt.write_json(&checkpoint_path);
    let opts = EvolveOptions {
        resume,
        checkpoint_every: args.checkpoint_every,
        on_checkpoint: if args.checkpoint_every > 0 {
            Some(&mut sink)
        } else {
            None
        },
    };
    let outcome = evolve_with(&ds, &cfg, opts)?;
    let outputs = write_search_artifacts(&args.out_dir, &ds, &outcome)?;
    let mut manifest = RunManifest::new("search", serde_json::to_value(&cfg).map_err(hoc_core::Error::from)?)
        .with_seed(cfg.seed)
        .with_dataset(&args.input, ds.n_rows(), ds.n_cols())?;
    for path in &outputs {
        manifest.record_output(path);
    }
    manifest.record_timing("search", start.elapsed());
    manifest.write(&args.out_dir.join("manifest.json"))?;
    println!(
        "search finished: best fitness {:.6}, final coverage {:.6}",
        outcome.best_fitness, outcome.coverage.cov
    );
    for (layer, cov) in outcome.coverage.per_layer_cov.iter().enumerate() {
        println!("  coverage through layer {}: {:.6}", layer + 1, cov);
    }
    println!("artifacts in {}", args.out_dir.display());
    Ok(())
}

fn write_matrix(
    path: &Path,
    names: &[String],
    cell: impl Fn(usize, usize) -> Option<f64>,
) -> CliResult<()> {
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(writer, "name")?;
    for name in names {
        write!(writer, ",{name}")?;
    }
    writeln!(writer)?;
    for (i, name) in names.iter().enumerate() {
        write!(writer, "{name}")?;
        for j in 0..names.len() {
            match cell(i, j) {
                Some(v) => write!(writer, ",{v}")?,
                None => write!(writer, ",undef")?,
            }
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn baseline(args: BaselineArgs) -> CliResult<()> {
    let start = Instant::now();
    let ds = Dataset::load_csv(&args.input, args.binarize)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let pearson_path = args.out_dir.join("pearson.csv");
    write_matrix(&pearson_path, ds.names(), |i, j| pearson_binary(&ds, i, j))?;
    let mi_path = args.out_dir.join("mi.csv");
    write_matrix(&mi_path, ds.names(), |i, j| {
        Some(mutual_information(&ds, i, j))
    })?;
    let mut manifest = RunManifest::new(
        "baseline",
        json!({
            "input": args.input.display().to_string(),
            "binarize": args.binarize,
        }),
    )
    .with_dataset(&args.input, ds.n_rows(), ds.n_cols())?;
    manifest.record_output(&pearson_path);
    manifest.record_output(&mi_path);
    manifest.record_timing("baseline", start.elapsed());
    manifest.write(&args.out_dir.join("manifest.json"))?;
    println!("wrote {} and {}", pearson_path.display(), mi_path.display());
    Ok(())
}

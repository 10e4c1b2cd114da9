//! Evolutionary optimisation of network parameters against coverage.
//!
//! Two optimisers share one generational loop: the POET grid genome
//! (ordered proliferation/swap events with a growing frozen prefix)
//! and a plain-vector GA baseline with uniform crossover and Gaussian
//! mutation. Fitness is the coverage of the decoded network on the
//! real dataset, with hoc scores estimated against one scrambled
//! sample per generation shared by the whole population. Runs are
//! reproducible for a fixed master seed at any worker count.

mod decode;
mod grid;

pub use decode::{params_to_network, NetworkShape};
pub use grid::{decode_grid, ChangeEvent, GridCell, PoetGenome, PoetGrid};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{hoc, score_network, HocReport};
use crate::network::FeatureNetwork;
use crate::objective::{coverage, coverage_from_bits, CoverageConfig, CoverageReport, NodeScope};
use crate::packed::{evaluate, PackedNetwork, PackedTable};
use crate::parallel;
use crate::rng::{derive_seed, stream_rng};
use crate::scramble::{enumerate_exact, sample_mc, ScrambleSource, SdsSample, DEFAULT_EXACT_CAP};

/// Which optimiser drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Poet,
    Ga,
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algo::Poet => write!(f, "poet"),
            Algo::Ga => write!(f, "ga"),
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "poet" => Ok(Algo::Poet),
            "ga" => Ok(Algo::Ga),
            other => Err(format!("unknown algorithm: {other}")),
        }
    }
}

/// Optional conditions imposed on rules before they enter the
/// objective; a node failing any of them scores 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConstraints {
    pub min_qr: Option<f64>,
    pub max_qs: Option<f64>,
    pub min_hoc: Option<f64>,
}

impl RuleConstraints {
    fn score(&self, qr: f64, qs: f64) -> f64 {
        let Some(h) = hoc(qr, qs) else { return 0.0 };
        if self.min_qr.is_some_and(|v| qr < v)
            || self.max_qs.is_some_and(|v| qs > v)
            || self.min_hoc.is_some_and(|v| h < v)
        {
            return 0.0;
        }
        h
    }
}

/// Full search configuration; every field has a default, so partial
/// config files work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub algo: Algo,
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub crossover_rate: f64,
    pub freeze_interval: usize,
    pub events_per_epoch: usize,
    /// POET grid side; 0 picks a side from the parameter count.
    pub grid_side: usize,
    pub layer_sizes: Vec<usize>,
    /// Train layers greedily one at a time instead of jointly.
    pub layerwise: bool,
    pub top_h: usize,
    /// Per-generation scrambled sample size (Monte-Carlo mode).
    pub sds_sample_size: usize,
    /// Use the exact scrambled dataset each generation when feasible.
    pub sds_exact: bool,
    /// Sample size for the final report when exact is out of reach.
    pub report_sample_size: usize,
    /// Use an exact scrambled dataset for the final report when the
    /// combination count is at most this.
    pub report_exact_cap: u64,
    pub seed: u64,
    pub constraints: RuleConstraints,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Poet,
            population: 50,
            generations: 1000,
            tournament: 3,
            mutation_rate: 0.25,
            mutation_sigma: 0.6,
            crossover_rate: 0.9,
            freeze_interval: 250,
            events_per_epoch: 8,
            grid_side: 0,
            layer_sizes: vec![32, 32],
            layerwise: false,
            top_h: 10,
            sds_sample_size: 10_000,
            sds_exact: false,
            report_sample_size: 50_000,
            report_exact_cap: 65_536,
            seed: 0,
            constraints: RuleConstraints::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig(msg.into()))
            }
        };
        check(self.population >= 1, "population must be >= 1")?;
        check(self.generations >= 1, "generations must be >= 1")?;
        check(
            self.tournament >= 1 && self.tournament <= self.population,
            "tournament size must be in 1..=population",
        )?;
        check(
            (0.0..=1.0).contains(&self.mutation_rate),
            "mutation_rate must be in [0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.crossover_rate),
            "crossover_rate must be in [0, 1]",
        )?;
        check(self.mutation_sigma >= 0.0, "mutation_sigma must be >= 0")?;
        check(self.freeze_interval >= 1, "freeze_interval must be >= 1")?;
        check(self.events_per_epoch >= 1, "events_per_epoch must be >= 1")?;
        check(
            !self.layer_sizes.is_empty() && self.layer_sizes.iter().all(|&s| s >= 1),
            "layer_sizes must be non-empty with every layer >= 1",
        )?;
        check(self.top_h >= 1, "top_h must be >= 1")?;
        check(self.sds_sample_size >= 1, "sds_sample_size must be >= 1")?;
        check(self.report_sample_size >= 1, "report_sample_size must be >= 1")?;
        if self.layerwise {
            check(
                self.generations >= self.layer_sizes.len(),
                "layerwise training needs at least one generation per layer",
            )?;
        }
        Ok(())
    }

    fn grid_side_for(&self, param_count: usize) -> usize {
        if self.grid_side > 0 {
            self.grid_side
        } else {
            (((4 * param_count) as f64).sqrt().ceil() as usize).clamp(8, 64)
        }
    }
}

/// One history row; `best_fitness` is the best-so-far (monotone).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStat {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

/// Serializable genome, either encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GenomeSnapshot {
    Poet(PoetGenome),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSnapshot {
    pub genome: GenomeSnapshot,
    pub fitness: f64,
    pub generation: usize,
}

/// Resumable run state: everything needed to continue a search and
/// reproduce the uninterrupted result exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: SearchConfig,
    /// Next generation to evaluate.
    pub generation: usize,
    /// Layerwise phase the run is in (0 when training jointly).
    pub phase: usize,
    /// Parameters pinned by completed layerwise phases.
    pub frozen_params: Vec<f64>,
    pub population: Vec<GenomeSnapshot>,
    pub best: Option<BestSnapshot>,
    pub history: Vec<GenerationStat>,
}

impl Checkpoint {
    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<Checkpoint> {
        let file = std::fs::File::open(path.as_ref())?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// Result of a search run.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best_genome: GenomeSnapshot,
    pub best_params: Vec<f64>,
    /// Training fitness of the best-ever individual.
    pub best_fitness: f64,
    pub network: FeatureNetwork,
    pub reports: Vec<HocReport>,
    pub coverage: CoverageReport,
    pub history: Vec<GenerationStat>,
    pub checkpoint: Checkpoint,
    /// Scrambled sample used for the final report.
    pub report_sds: SdsSample,
}

/// Optional knobs for [`evolve_with`].
#[derive(Default)]
pub struct EvolveOptions<'a> {
    pub resume: Option<Checkpoint>,
    /// Emit a checkpoint every this many generations (0: only at end).
    pub checkpoint_every: usize,
    #[allow(clippy::type_complexity)]
    pub on_checkpoint: Option<&'a mut dyn FnMut(&Checkpoint) -> Result<()>>,
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).unwrap().sample(rng)
}

/// Operators one optimiser contributes to the shared loop.
trait EvoOps: Sync {
    type Genome: Clone + Send + Sync;

    fn fresh(&self, rng: &mut ChaCha8Rng) -> Self::Genome;
    fn breed(&self, a: &Self::Genome, b: &Self::Genome, rng: &mut ChaCha8Rng) -> Self::Genome;
    /// Called at freeze boundaries; may restructure the genome.
    fn epoch_advance(&self, genome: &mut Self::Genome, rng: &mut ChaCha8Rng);
    fn decode(&self, genome: &Self::Genome) -> Vec<f64>;
    fn snapshot(&self, genome: &Self::Genome) -> GenomeSnapshot;
    fn restore(&self, snap: &GenomeSnapshot) -> Result<Self::Genome>;
}

struct PoetOps {
    grid: PoetGrid,
    param_count: usize,
    side: usize,
    max_radius: usize,
    mutation_rate: f64,
    mutation_sigma: f64,
    crossover_rate: f64,
    events_per_epoch: usize,
}

impl PoetOps {
    fn new(cfg: &SearchConfig, param_count: usize, phase: u64) -> Self {
        let side = cfg.grid_side_for(param_count);
        let mut rng = stream_rng(derive_seed(cfg.seed, "grid"), phase);
        Self {
            grid: PoetGrid::init(side, param_count, &mut rng),
            param_count,
            side,
            max_radius: (side / 6).max(1),
            mutation_rate: cfg.mutation_rate,
            mutation_sigma: cfg.mutation_sigma,
            crossover_rate: cfg.crossover_rate,
            events_per_epoch: cfg.events_per_epoch,
        }
    }

    fn random_event(&self, rng: &mut ChaCha8Rng) -> ChangeEvent {
        let coord = |rng: &mut ChaCha8Rng| {
            (
                rng.random_range(0..self.side),
                rng.random_range(0..self.side),
            )
        };
        // radius 0 is the single-cell brush; refinement depends on it
        if rng.random::<f64>() < 0.7 {
            ChangeEvent::Proliferation {
                center: coord(rng),
                radius: rng.random_range(0..=self.max_radius),
                base: gauss(rng, 1.0),
                spread: rng.random::<f64>() * 0.5,
                jitter_seed: rng.random(),
            }
        } else {
            ChangeEvent::Swap {
                center_a: coord(rng),
                center_b: coord(rng),
                radius: rng.random_range(0..=self.max_radius),
            }
        }
    }

    fn mutate_event(&self, event: &mut ChangeEvent, rng: &mut ChaCha8Rng) {
        if rng.random::<f64>() < 0.1 {
            *event = self.random_event(rng);
            return;
        }
        let nudge = |v: usize, rng: &mut ChaCha8Rng, hi: usize| -> usize {
            let delta = rng.random_range(-2i64..=2);
            (v as i64 + delta).clamp(0, hi as i64 - 1) as usize
        };
        match event {
            ChangeEvent::Proliferation {
                center,
                radius,
                base,
                spread,
                jitter_seed,
            } => {
                let roll = rng.random::<f64>();
                if roll < 0.4 {
                    *base += gauss(rng, self.mutation_sigma);
                } else if roll < 0.6 {
                    center.0 = nudge(center.0, rng, self.side);
                    center.1 = nudge(center.1, rng, self.side);
                } else if roll < 0.75 {
                    let delta = if rng.random::<bool>() { 1 } else { -1i64 };
                    *radius = (*radius as i64 + delta).clamp(0, self.max_radius as i64) as usize;
                } else if roll < 0.9 {
                    *jitter_seed = rng.random();
                } else {
                    *spread = rng.random::<f64>() * 0.5;
                }
            }
            ChangeEvent::Swap {
                center_a,
                center_b,
                radius,
            } => {
                let roll = rng.random::<f64>();
                if roll < 0.5 {
                    center_a.0 = nudge(center_a.0, rng, self.side);
                    center_a.1 = nudge(center_a.1, rng, self.side);
                } else if roll < 0.8 {
                    center_b.0 = nudge(center_b.0, rng, self.side);
                    center_b.1 = nudge(center_b.1, rng, self.side);
                } else {
                    let delta = if rng.random::<bool>() { 1 } else { -1i64 };
                    *radius = (*radius as i64 + delta).clamp(0, self.max_radius as i64) as usize;
                }
            }
        }
    }
}

impl EvoOps for PoetOps {
    type Genome = PoetGenome;

    fn fresh(&self, rng: &mut ChaCha8Rng) -> PoetGenome {
        PoetGenome {
            events: (0..self.events_per_epoch)
                .map(|_| self.random_event(rng))
                .collect(),
            frozen_prefix: 0,
        }
    }

    fn breed(&self, a: &PoetGenome, b: &PoetGenome, rng: &mut ChaCha8Rng) -> PoetGenome {
        let mut child = a.clone();
        let same_shape = a.frozen_prefix == b.frozen_prefix && a.events.len() == b.events.len();
        if same_shape && rng.random::<f64>() < self.crossover_rate {
            for i in child.frozen_prefix..child.events.len() {
                if rng.random::<bool>() {
                    child.events[i] = b.events[i].clone();
                }
            }
        }
        for i in child.frozen_prefix..child.events.len() {
            if rng.random::<f64>() < self.mutation_rate {
                self.mutate_event(&mut child.events[i], rng);
            }
        }
        child
    }

    fn epoch_advance(&self, genome: &mut PoetGenome, rng: &mut ChaCha8Rng) {
        genome.freeze_all();
        for _ in 0..self.events_per_epoch {
            let event = self.random_event(rng);
            genome.events.push(event);
        }
    }

    fn decode(&self, genome: &PoetGenome) -> Vec<f64> {
        decode_grid(genome, &self.grid, self.param_count)
    }

    fn snapshot(&self, genome: &PoetGenome) -> GenomeSnapshot {
        GenomeSnapshot::Poet(genome.clone())
    }

    fn restore(&self, snap: &GenomeSnapshot) -> Result<PoetGenome> {
        match snap {
            GenomeSnapshot::Poet(g) => Ok(g.clone()),
            GenomeSnapshot::Vector(_) => Err(Error::InvalidCheckpoint(
                "vector genome in a poet run".into(),
            )),
        }
    }
}

struct GaOps {
    param_count: usize,
    mutation_rate: f64,
    mutation_sigma: f64,
    crossover_rate: f64,
}

impl GaOps {
    fn new(cfg: &SearchConfig, param_count: usize) -> Self {
        Self {
            param_count,
            mutation_rate: cfg.mutation_rate,
            mutation_sigma: cfg.mutation_sigma,
            crossover_rate: cfg.crossover_rate,
        }
    }
}

impl EvoOps for GaOps {
    type Genome = Vec<f64>;

    fn fresh(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.param_count)
            .map(|_| gauss(rng, self.mutation_sigma.max(0.1)))
            .collect()
    }

    fn breed(&self, a: &Vec<f64>, b: &Vec<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut child = if rng.random::<f64>() < self.crossover_rate {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| if rng.random::<bool>() { x } else { y })
                .collect()
        } else {
            a.clone()
        };
        for gene in child.iter_mut() {
            if rng.random::<f64>() < self.mutation_rate {
                *gene += gauss(rng, self.mutation_sigma);
            }
        }
        child
    }

    fn epoch_advance(&self, _genome: &mut Vec<f64>, _rng: &mut ChaCha8Rng) {}

    fn decode(&self, genome: &Vec<f64>) -> Vec<f64> {
        genome.clone()
    }

    fn snapshot(&self, genome: &Vec<f64>) -> GenomeSnapshot {
        GenomeSnapshot::Vector(genome.clone())
    }

    fn restore(&self, snap: &GenomeSnapshot) -> Result<Vec<f64>> {
        match snap {
            GenomeSnapshot::Vector(v) if v.len() == self.param_count => Ok(v.clone()),
            GenomeSnapshot::Vector(v) => Err(Error::InvalidCheckpoint(format!(
                "genome length {} does not match parameter count {}",
                v.len(),
                self.param_count
            ))),
            GenomeSnapshot::Poet(_) => {
                Err(Error::InvalidCheckpoint("poet genome in a ga run".into()))
            }
        }
    }
}

fn constrained_scores(qr: &[f64], qs: &[f64], constraints: &RuleConstraints) -> Vec<f64> {
    qr.iter()
        .zip(qs)
        .map(|(&r, &s)| constraints.score(r, s))
        .collect()
}

struct FitnessCtx<'a> {
    shape: &'a NetworkShape,
    frozen: &'a [f64],
    rds: &'a PackedTable,
    sds: &'a PackedTable,
    top_h: usize,
    constraints: &'a RuleConstraints,
}

impl FitnessCtx<'_> {
    fn fitness(&self, segment: &[f64]) -> f64 {
        let mut full = Vec::with_capacity(self.frozen.len() + segment.len());
        full.extend_from_slice(self.frozen);
        full.extend_from_slice(segment);
        let net = params_to_network(&full, self.shape).expect("decode is total");
        let packed = PackedNetwork::from_network(&net);
        let rds_eval = evaluate(&packed, self.rds, true);
        let sds_eval = evaluate(&packed, self.sds, false);
        let scores = constrained_scores(&rds_eval.true_prob, &sds_eval.true_prob, self.constraints);
        coverage_from_bits(
            rds_eval.active_rows.as_ref().unwrap(),
            rds_eval.node_words,
            self.rds.n_rows(),
            &scores,
            self.top_h,
            packed.total_nodes(),
        )
    }
}

fn tournament(fits: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..fits.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..fits.len());
        if fits[challenger] > fits[best] {
            best = challenger;
        }
    }
    best
}

struct RunState<G> {
    population: Vec<G>,
    generation: usize,
    best: Option<(G, f64, usize)>,
}

#[allow(clippy::too_many_arguments)]
fn run_segment<O: EvoOps>(
    ops: &O,
    cfg: &SearchConfig,
    shape: &NetworkShape,
    frozen: &[f64],
    rds_packed: &PackedTable,
    src: &ScrambleSource,
    sds_exact_cache: Option<&PackedTable>,
    gen_end: usize,
    phase: usize,
    state: &mut RunState<O::Genome>,
    history: &mut Vec<GenerationStat>,
    opts: &mut EvolveOptions<'_>,
) -> Result<()> {
    let master = cfg.seed;
    while state.generation < gen_end {
        let g = state.generation;
        if g > 0 && g % cfg.freeze_interval == 0 {
            let mut rng = stream_rng(derive_seed(master, "epoch"), g as u64);
            for genome in &mut state.population {
                ops.epoch_advance(genome, &mut rng);
            }
        }
        let sds_owned;
        let sds = match sds_exact_cache {
            Some(table) => table,
            None => {
                let sample = sample_mc(
                    src,
                    cfg.sds_sample_size,
                    derive_seed(master, &format!("sds-{g}")),
                );
                sds_owned = PackedTable::from_source(&sample);
                &sds_owned
            }
        };
        let ctx = FitnessCtx {
            shape,
            frozen,
            rds: rds_packed,
            sds,
            top_h: cfg.top_h,
            constraints: &cfg.constraints,
        };
        let fits = parallel::map_ordered(&state.population, |genome| ctx.fitness(&ops.decode(genome)));
        let mut best_idx = 0;
        for i in 1..fits.len() {
            if fits[i] > fits[best_idx] {
                best_idx = i;
            }
        }
        if state.best.as_ref().is_none_or(|(_, f, _)| fits[best_idx] > *f) {
            state.best = Some((state.population[best_idx].clone(), fits[best_idx], g));
        }
        let best_so_far = state.best.as_ref().map(|(_, f, _)| *f).unwrap();
        let prev_best = history.last().map_or(f64::NEG_INFINITY, |s| s.best_fitness);
        history.push(GenerationStat {
            generation: g,
            best_fitness: best_so_far.max(prev_best),
            mean_fitness: fits.iter().sum::<f64>() / fits.len() as f64,
        });
        // breed unconditionally so a checkpoint taken at any horizon
        // resumes exactly, including runs extended past it
        let mut rng = stream_rng(derive_seed(master, "breed"), g as u64);
        let mut next = Vec::with_capacity(cfg.population);
        next.push(state.population[best_idx].clone());
        while next.len() < cfg.population {
            let a = tournament(&fits, cfg.tournament, &mut rng);
            let b = tournament(&fits, cfg.tournament, &mut rng);
            next.push(ops.breed(&state.population[a], &state.population[b], &mut rng));
        }
        state.population = next;
        state.generation += 1;
        let due = opts.checkpoint_every > 0 && state.generation % opts.checkpoint_every == 0;
        if due || state.generation == gen_end {
            if let Some(sink) = opts.on_checkpoint.as_mut() {
                let ckpt = build_checkpoint(ops, cfg, phase, frozen, state, history);
                sink(&ckpt)?;
            }
        }
    }
    Ok(())
}

fn build_checkpoint<O: EvoOps>(
    ops: &O,
    cfg: &SearchConfig,
    phase: usize,
    frozen: &[f64],
    state: &RunState<O::Genome>,
    history: &[GenerationStat],
) -> Checkpoint {
    Checkpoint {
        config: cfg.clone(),
        generation: state.generation,
        phase,
        frozen_params: frozen.to_vec(),
        population: state.population.iter().map(|g| ops.snapshot(g)).collect(),
        best: state.best.as_ref().map(|(g, f, gen)| BestSnapshot {
            genome: ops.snapshot(g),
            fitness: *f,
            generation: *gen,
        }),
        history: history.to_vec(),
    }
}

/// Generation range of a layerwise phase.
fn phase_bounds(cfg: &SearchConfig, phases: usize, phase: usize) -> (usize, usize) {
    let per = (cfg.generations / phases).max(1);
    let start = (phase * per).min(cfg.generations);
    let end = if phase + 1 == phases {
        cfg.generations
    } else {
        ((phase + 1) * per).min(cfg.generations)
    };
    (start, end)
}

fn run_phases<O: EvoOps>(
    make_ops: &dyn Fn(usize, usize) -> O,
    rds: &Dataset,
    cfg: &SearchConfig,
    mut opts: EvolveOptions<'_>,
) -> Result<SearchOutcome> {
    let full_shape = NetworkShape::new(rds.n_cols(), cfg.layer_sizes.clone());
    let src = ScrambleSource::from_dataset(rds);
    let rds_packed = PackedTable::from_source(rds);
    let sds_exact_cache = if cfg.sds_exact {
        Some(PackedTable::from_source(&enumerate_exact(&src, DEFAULT_EXACT_CAP)?))
    } else {
        None
    };
    let phases = if cfg.layerwise {
        cfg.layer_sizes.len()
    } else {
        1
    };

    let mut history: Vec<GenerationStat> = Vec::new();
    let mut frozen: Vec<f64> = Vec::new();
    let mut phase_start = 0usize;
    let mut resumed_state: Option<(usize, Vec<GenomeSnapshot>, Option<BestSnapshot>)> = None;
    if let Some(ckpt) = opts.resume.take() {
        if ckpt.config != *cfg {
            return Err(Error::InvalidCheckpoint(
                "checkpoint was produced by a different configuration".into(),
            ));
        }
        if ckpt.phase >= phases {
            return Err(Error::InvalidCheckpoint("phase out of range".into()));
        }
        history = ckpt.history;
        frozen = ckpt.frozen_params;
        phase_start = ckpt.phase;
        resumed_state = Some((ckpt.generation, ckpt.population, ckpt.best));
    }

    let mut last_best: Option<(Vec<f64>, GenomeSnapshot, f64)> = None;
    let mut final_checkpoint = None;
    for phase in phase_start..phases {
        let shape = if cfg.layerwise {
            full_shape.prefix(phase + 1)
        } else {
            full_shape.clone()
        };
        let segment_len = shape.param_count() - frozen.len();
        let ops = make_ops(phase, segment_len);
        let (start, end) = phase_bounds(cfg, phases, phase);
        let mut state = match resumed_state.take() {
            Some((generation, population, best)) => RunState {
                population: population
                    .iter()
                    .map(|s| ops.restore(s))
                    .collect::<Result<Vec<_>>>()?,
                generation,
                best: best
                    .map(|b| Ok::<_, Error>((ops.restore(&b.genome)?, b.fitness, b.generation)))
                    .transpose()?,
            },
            None => {
                let mut rng = stream_rng(derive_seed(cfg.seed, "init"), phase as u64);
                RunState {
                    population: (0..cfg.population).map(|_| ops.fresh(&mut rng)).collect(),
                    generation: start,
                    best: None,
                }
            }
        };
        run_segment(
            &ops,
            cfg,
            &shape,
            &frozen,
            &rds_packed,
            &src,
            sds_exact_cache.as_ref(),
            end,
            phase,
            &mut state,
            &mut history,
            &mut opts,
        )?;
        let (genome, fitness, _) = state
            .best
            .clone()
            .ok_or_else(|| Error::InvalidCheckpoint("run finished without a best genome".into()))?;
        if phase + 1 == phases {
            final_checkpoint = Some(build_checkpoint(&ops, cfg, phase, &frozen, &state, &history));
            let mut best_params = frozen.clone();
            best_params.extend(ops.decode(&genome));
            last_best = Some((best_params, ops.snapshot(&genome), fitness));
        } else {
            frozen.extend(ops.decode(&genome));
        }
    }

    let (best_params, best_genome, best_fitness) =
        last_best.ok_or_else(|| Error::InvalidCheckpoint("nothing was trained".into()))?;
    let network = params_to_network(&best_params, &full_shape)?;
    let report_sds = if src.exact_combination_count() <= cfg.report_exact_cap as u128 {
        enumerate_exact(&src, cfg.report_exact_cap)?
    } else {
        sample_mc(&src, cfg.report_sample_size, derive_seed(cfg.seed, "report"))
    };
    let reports = score_network(&network, rds, &report_sds)?;
    let scores: Vec<f64> = reports
        .iter()
        .map(|r| cfg.constraints.score(r.qr, r.qs))
        .collect();
    let table = network.propagate(rds)?;
    let coverage = coverage(
        &table,
        &scores,
        &CoverageConfig {
            top_h: cfg.top_h,
            scope: NodeScope::All,
        },
    );
    Ok(SearchOutcome {
        best_genome,
        best_params,
        best_fitness,
        network,
        reports,
        coverage,
        history,
        checkpoint: final_checkpoint.expect("final phase always checkpoints"),
        report_sds,
    })
}

/// Run the configured optimiser (POET by default).
pub fn evolve(rds: &Dataset, cfg: &SearchConfig) -> Result<SearchOutcome> {
    evolve_with(rds, cfg, EvolveOptions::default())
}

/// [`evolve`] with resume and checkpoint hooks.
pub fn evolve_with(
    rds: &Dataset,
    cfg: &SearchConfig,
    opts: EvolveOptions<'_>,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    match cfg.algo {
        Algo::Poet => run_phases(&|phase, params| PoetOps::new(cfg, params, phase as u64), rds, cfg, opts),
        Algo::Ga => run_phases(&|_, params| GaOps::new(cfg, params), rds, cfg, opts),
    }
}

/// Control optimiser: plain parameter vector with uniform crossover
/// and Gaussian mutation, same loop and fitness.
pub fn evolve_baseline_ga(rds: &Dataset, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let mut ga_cfg = cfg.clone();
    ga_cfg.algo = Algo::Ga;
    evolve_with(rds, &ga_cfg, EvolveOptions::default())
}

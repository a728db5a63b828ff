//! Repeated learning runs over grids of concepts, error targets, confidence
//! levels and schedules, with CSV output and per-group summaries.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anf::{all_parities, parity_anf, BitString, MAX_ARITY};
use crate::error::{QpacError, Result};
use crate::learner::{learn, LearnParams, LearnRecord, ParityUpdate, Schedule};
use crate::oracle::{Oracle, ProductDistribution};

/// Which parity concepts a grid covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConceptSelection {
    /// Every `s ∈ B^n`.
    All,
    /// `k` distinct masks drawn from the master seed.
    Random(usize),
    /// Explicit bitstrings in `x_0 … x_{n-1}` order.
    Explicit(Vec<String>),
}

impl FromStr for ConceptSelection {
    type Err = QpacError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::All);
        }
        if let Some(k) = s.strip_prefix("random:") {
            let k = k
                .trim()
                .parse()
                .map_err(|_| QpacError::Parse(format!("invalid concept count in {s:?}")))?;
            return Ok(Self::Random(k));
        }
        let list: Vec<String> = s
            .split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect();
        if list.is_empty() {
            return Err(QpacError::Parse("empty concept list".into()));
        }
        Ok(Self::Explicit(list))
    }
}

impl TryFrom<String> for ConceptSelection {
    type Error = QpacError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConceptSelection> for String {
    fn from(c: ConceptSelection) -> String {
        c.to_string()
    }
}

impl fmt::Display for ConceptSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => f.write_str("all"),
            Self::Random(k) => write!(f, "random:{k}"),
            Self::Explicit(list) => f.write_str(&list.join(",")),
        }
    }
}

fn default_repetitions() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub concepts: ConceptSelection,
    #[serde(alias = "epsilon")]
    pub epsilons: Vec<f64>,
    #[serde(alias = "delta")]
    pub deltas: Vec<f64>,
    #[serde(alias = "schedule", default = "default_schedules")]
    pub schedules: Vec<Schedule>,
    #[serde(alias = "reps", default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Draw one distribution per concept instead of one per repetition.
    #[serde(default)]
    pub fixed_distribution: bool,
    #[serde(default)]
    pub max_updates: Option<usize>,
    /// Fill `wall_time_ms`; off by default so output bytes depend only on the seed.
    #[serde(default)]
    pub timing: bool,
}

fn default_schedules() -> Vec<Schedule> {
    vec![Schedule::Linear]
}

impl ExperimentConfig {
    pub fn new(n: usize, concepts: ConceptSelection, epsilon: f64, delta: f64, seed: u64) -> Self {
        Self {
            n,
            concepts,
            epsilons: vec![epsilon],
            deltas: vec![delta],
            schedules: default_schedules(),
            repetitions: default_repetitions(),
            seed,
            out: None,
            workers: None,
            fixed_distribution: false,
            max_updates: None,
            timing: false,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_ARITY {
            return Err(QpacError::ArityTooLarge(self.n));
        }
        if self.repetitions == 0 {
            return Err(QpacError::InvalidParameter("repetitions must be ≥ 1".into()));
        }
        if self.epsilons.is_empty() || self.deltas.is_empty() || self.schedules.is_empty() {
            return Err(QpacError::InvalidParameter(
                "epsilon, delta and schedule lists must be nonempty".into(),
            ));
        }
        for &e in &self.epsilons {
            crate::amplification::m_max(e)?;
        }
        for &d in &self.deltas {
            crate::learner::compute_n(d)?;
        }
        if matches!(self.workers, Some(0)) {
            return Err(QpacError::InvalidParameter("workers must be ≥ 1".into()));
        }
        self.resolve_concepts().map(|_| ())
    }

    /// Concept masks covered by the grid, ascending and distinct.
    pub fn resolve_concepts(&self) -> Result<Vec<BitString>> {
        let mut concepts = match &self.concepts {
            ConceptSelection::All => all_parities(self.n)?,
            ConceptSelection::Random(k) => {
                let total = 1usize << self.n;
                if *k > total {
                    return Err(QpacError::InvalidParameter(format!(
                        "cannot pick {k} of {total} concepts"
                    )));
                }
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(&[&self.seed.to_string(), "concepts", &self.n.to_string()]));
                rand::seq::index::sample(&mut rng, total, *k)
                    .into_iter()
                    .map(|s| BitString::new(s as u64, self.n))
                    .collect::<Result<Vec<_>>>()?
            }
            ConceptSelection::Explicit(list) => list
                .iter()
                .map(|s| {
                    let b: BitString = s.parse()?;
                    if b.width() != self.n {
                        return Err(QpacError::WidthMismatch {
                            expected: self.n,
                            actual: b.width(),
                        });
                    }
                    Ok(b)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        concepts.sort_unstable();
        concepts.dedup();
        Ok(concepts)
    }

    pub fn row_count(&self) -> Result<usize> {
        Ok(self.resolve_concepts()?.len()
            * self.epsilons.len()
            * self.deltas.len()
            * self.schedules.len()
            * self.repetitions)
    }
}

/// First 8 bytes (little-endian) of SHA-256 over the `|`-joined parts.
pub fn derive_seed(parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"qpac-seed-v1");
    for p in parts {
        hasher.update(b"|");
        hasher.update(p.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Seed of the learner's sampling stream for one grid point.
pub fn run_seed(
    master: u64,
    concept: &BitString,
    epsilon: f64,
    delta: f64,
    schedule: Schedule,
    repetition: usize,
) -> u64 {
    derive_seed(&[
        &master.to_string(),
        "run",
        &concept.to_string(),
        &format!("{:016x}", epsilon.to_bits()),
        &format!("{:016x}", delta.to_bits()),
        schedule.as_str(),
        &repetition.to_string(),
    ])
}

/// Seed of the random product distribution. Shared across ε, δ and schedule
/// so that those axes are compared on the same oracles.
pub fn distribution_seed(master: u64, concept: &BitString, repetition: Option<usize>) -> u64 {
    let rep = repetition.map_or_else(|| "fixed".to_string(), |r| r.to_string());
    derive_seed(&[&master.to_string(), "distribution", &concept.to_string(), &rep])
}

/// One learning run, as written to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub concept: String,
    pub epsilon: f64,
    pub delta: f64,
    pub schedule: Schedule,
    pub repetition: usize,
    pub run_seed: u64,
    pub distribution_seed: u64,
    pub final_error: f64,
    pub updates: usize,
    pub sampling_phases: usize,
    pub oracle_calls: u64,
    pub shot_calls: u64,
    pub max_update_calls: u64,
    pub m_max: usize,
    pub n_shots: usize,
    pub terminated_ok: bool,
    pub wall_time_ms: u64,
    pub final_hypothesis: String,
    pub angles: String,
}

/// Fixed CSV column order.
pub const CSV_HEADER: &[&str] = &[
    "n",
    "concept",
    "epsilon",
    "delta",
    "schedule",
    "repetition",
    "run_seed",
    "distribution_seed",
    "final_error",
    "updates",
    "sampling_phases",
    "oracle_calls",
    "shot_calls",
    "max_update_calls",
    "m_max",
    "n_shots",
    "terminated_ok",
    "wall_time_ms",
    "final_hypothesis",
    "angles",
];

/// A full run: the CSV row plus the learner's detailed record.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: ResultRow,
    pub record: LearnRecord,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    concept: BitString,
    epsilon: f64,
    delta: f64,
    schedule: Schedule,
    repetition: usize,
}

fn grid_points(config: &ExperimentConfig, concept: BitString) -> Vec<GridPoint> {
    let mut pts = Vec::new();
    for &epsilon in &config.epsilons {
        for &delta in &config.deltas {
            for &schedule in &config.schedules {
                for repetition in 0..config.repetitions {
                    pts.push(GridPoint {
                        concept,
                        epsilon,
                        delta,
                        schedule,
                        repetition,
                    });
                }
            }
        }
    }
    pts
}

fn run_point(config: &ExperimentConfig, p: &GridPoint) -> Result<RunOutcome> {
    let started = Instant::now();
    let dist_seed = distribution_seed(
        config.seed,
        &p.concept,
        (!config.fixed_distribution).then_some(p.repetition),
    );
    let dist = ProductDistribution::random(config.n, &mut ChaCha8Rng::seed_from_u64(dist_seed))?;
    let oracle = Oracle::build(parity_anf(&p.concept), dist)?;
    let seed = run_seed(config.seed, &p.concept, p.epsilon, p.delta, p.schedule, p.repetition);
    let mut params = LearnParams::new(p.epsilon, p.delta, p.schedule, seed)?;
    params.max_updates = config.max_updates;
    let record = learn(&oracle, &params, &ParityUpdate)?;
    let wall_time_ms = if config.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    let angles: Vec<String> = oracle.distribution().angles().iter().map(|a| a.to_string()).collect();
    let row = ResultRow {
        n: config.n,
        concept: p.concept.to_string(),
        epsilon: p.epsilon,
        delta: p.delta,
        schedule: p.schedule,
        repetition: p.repetition,
        run_seed: seed,
        distribution_seed: dist_seed,
        final_error: record.final_error,
        updates: record.updates,
        sampling_phases: record.sampling_phases,
        oracle_calls: record.oracle_calls,
        shot_calls: record.shot_calls,
        max_update_calls: record.calls_per_update.iter().copied().max().unwrap_or(0),
        m_max: record.m_max,
        n_shots: record.n_shots,
        terminated_ok: record.terminated_ok,
        wall_time_ms,
        final_hypothesis: record.render_hypothesis(),
        angles: angles.join(";"),
    };
    Ok(RunOutcome { row, record })
}

/// Runs every grid point. Rows reach `sink` in canonical order (concept,
/// ε, δ, schedule, repetition) one concept at a time, so a failed write
/// leaves every earlier concept on disk.
pub fn run_grid_with(
    config: &ExperimentConfig,
    mut sink: Option<&mut csv::Writer<Box<dyn Write + Send>>>,
) -> Result<Vec<RunOutcome>> {
    config.validate()?;
    let concepts = config.resolve_concepts()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| QpacError::InvalidParameter(e.to_string()))?;

    let mut all = Vec::with_capacity(config.row_count()?);
    for concept in concepts {
        let points = grid_points(config, concept);
        let outcomes: Vec<RunOutcome> = pool.install(|| {
            points
                .par_iter()
                .map(|p| run_point(config, p))
                .collect::<Result<Vec<_>>>()
        })?;
        if let Some(w) = sink.as_deref_mut() {
            for o in &outcomes {
                w.serialize(&o.row)?;
            }
            w.flush()?;
        }
        all.extend(outcomes);
    }
    Ok(all)
}

pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    run_grid_with(config, None)
}

/// Runs the grid, streaming rows to `path`.
pub fn run_grid_to_csv(config: &ExperimentConfig, path: &Path) -> Result<Vec<RunOutcome>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let file: Box<dyn Write + Send> = Box::new(std::io::BufWriter::new(std::fs::File::create(path)?));
    let mut writer = csv::Writer::from_writer(file);
    run_grid_with(config, Some(&mut writer))
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(QpacError::Parse(format!("unexpected CSV header in {}", path.display())));
    }
    reader.deserialize().map(|r| r.map_err(QpacError::from)).collect()
}

/// Aggregate over the repetitions of one (concept, ε, δ, schedule) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub concept: String,
    pub epsilon: f64,
    pub delta: f64,
    pub schedule: Schedule,
    pub runs: usize,
    pub min_error: f64,
    pub median_error: f64,
    pub max_error: f64,
    /// Fraction of runs with `final_error < ε` (strict).
    pub fraction_below_epsilon: f64,
    pub mean_updates: f64,
    pub median_updates: f64,
    pub mean_oracle_calls: f64,
    pub terminated_ok: usize,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(QpacError::EmptyInput("no result rows to summarize"));
    }
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        (a.n, &a.concept)
            .cmp(&(b.n, &b.concept))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.schedule.cmp(&b.schedule))
    });
    let same_cell = |a: &ResultRow, b: &ResultRow| {
        a.n == b.n
            && a.concept == b.concept
            && a.epsilon.to_bits() == b.epsilon.to_bits()
            && a.delta.to_bits() == b.delta.to_bits()
            && a.schedule == b.schedule
    };
    Ok(sorted
        .chunk_by(|a, b| same_cell(a, b))
        .map(|cell| {
            let first = cell[0];
            let errors: Vec<f64> = cell.iter().map(|r| r.final_error).collect();
            let updates: Vec<f64> = cell.iter().map(|r| r.updates as f64).collect();
            let runs = cell.len();
            SummaryRow {
                n: first.n,
                concept: first.concept.clone(),
                epsilon: first.epsilon,
                delta: first.delta,
                schedule: first.schedule,
                runs,
                min_error: errors.iter().copied().fold(f64::INFINITY, f64::min),
                median_error: median(&errors).expect("cell is nonempty"),
                max_error: errors.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                fraction_below_epsilon: errors.iter().filter(|&&e| e < first.epsilon).count() as f64 / runs as f64,
                mean_updates: updates.iter().sum::<f64>() / runs as f64,
                median_updates: median(&updates).expect("cell is nonempty"),
                mean_oracle_calls: cell.iter().map(|r| r.oracle_calls as f64).sum::<f64>() / runs as f64,
                terminated_ok: cell.iter().filter(|r| r.terminated_ok).count(),
            }
        })
        .collect())
}

pub fn write_summary_json(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `results.csv` → `results.summary.json`.
pub fn summary_path_for(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary.json")
}

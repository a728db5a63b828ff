//! The tuning loop: sample the amplified state, compare the flagged count
//! against `N/2`, update the network when the count is too high, and stop
//! once the deepest amplification level still reports a low count.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplification::{self, AmplificationSetup};
use crate::anf::{Anf, BitString};
use crate::error::{QpacError, Result};
use crate::oracle::Oracle;
use crate::tnn::TnnState;

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(QpacError::InvalidParameter(format!("delta {delta} outside (0, 1/2)")));
    }
    Ok(())
}

/// Shots per sampling phase: `2·(⌊1/(πδ²)⌋ div 2) + 2`.
pub fn compute_n(delta: f64) -> Result<usize> {
    check_delta(delta)?;
    let floor = (1.0 / (std::f64::consts::PI * delta * delta)).floor() as usize;
    Ok(2 * (floor / 2) + 2)
}

/// Exact posterior `P(p < 1/2 | S ≤ N/2)` under a uniform prior on `p`:
/// `1/2 + (N+1)/(N+2) · (2^N − C(N, N/2)) / 2^(N+1)`.
pub fn posterior_confidence_exact(n_shots: usize) -> Result<BigRational> {
    if n_shots < 2 || !n_shots.is_multiple_of(2) {
        return Err(QpacError::InvalidParameter(format!(
            "shot count {n_shots} must be even and ≥ 2"
        )));
    }
    let n = n_shots as u64;
    let two_pow_n = BigUint::one() << n_shots;
    let central = central_binomial(n);
    let numer = BigInt::from(n + 1) * BigInt::from(two_pow_n.clone() - central);
    let denom = BigInt::from(n + 2) * BigInt::from(two_pow_n << 1usize);
    Ok(BigRational::new(BigInt::one(), BigInt::from(2)) + BigRational::new(numer, denom))
}

pub fn posterior_confidence(n_shots: usize) -> Result<f64> {
    let exact = posterior_confidence_exact(n_shots)?;
    exact
        .to_f64()
        .ok_or_else(|| QpacError::InvalidParameter(format!("posterior for N={n_shots} not representable")))
}

/// `C(n, n/2)` for even `n`.
fn central_binomial(n: u64) -> BigUint {
    let k = n / 2;
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lower bound `1 − 1/√(πN)` on the posterior.
pub fn posterior_lower_bound(n_shots: usize) -> f64 {
    1.0 - 1.0 / (std::f64::consts::PI * n_shots as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `0, 1, …, m_max`.
    Linear,
    /// `0, 1, 2, 4, …, m_max`.
    PowersOfTwo,
}

impl Schedule {
    pub fn values(self, m_max: usize) -> Vec<usize> {
        match self {
            Schedule::Linear => (0..=m_max).collect(),
            Schedule::PowersOfTwo => {
                let mut v = vec![0];
                let mut p = 1;
                while p < m_max {
                    v.push(p);
                    p *= 2;
                }
                if m_max > 0 {
                    v.push(m_max);
                }
                v
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Schedule::Linear => "linear",
            Schedule::PowersOfTwo => "powers-of-two",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Schedule {
    type Err = QpacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Schedule::Linear),
            "powers-of-two" | "powers_of_two" | "pow2" => Ok(Schedule::PowersOfTwo),
            other => Err(QpacError::Parse(format!("unknown schedule {other:?}"))),
        }
    }
}

pub fn schedule_values(kind: Schedule, m_max: usize) -> Vec<usize> {
    kind.values(m_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnParams {
    pub epsilon: f64,
    pub delta: f64,
    pub schedule: Schedule,
    pub seed: u64,
    /// Defaults to `10·2^n` when `None`.
    pub max_updates: Option<usize>,
    n_shots: usize,
    m_max: usize,
}

impl LearnParams {
    pub fn new(epsilon: f64, delta: f64, schedule: Schedule, seed: u64) -> Result<Self> {
        let m_max = amplification::m_max(epsilon)?;
        let n_shots = compute_n(delta)?;
        Ok(Self {
            epsilon,
            delta,
            schedule,
            seed,
            max_updates: None,
            n_shots,
            m_max,
        })
    }

    pub fn with_max_updates(mut self, cap: usize) -> Self {
        self.max_updates = Some(cap);
        self
    }

    /// `N`.
    pub fn n_shots(&self) -> usize {
        self.n_shots
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn update_cap(&self, n: usize) -> usize {
        self.max_updates.unwrap_or(10usize.saturating_mul(1usize << n))
    }
}

/// Distinct inputs bucketed by Hamming weight; bucket `i` is sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupedInputs {
    by_weight: Vec<Vec<BitString>>,
}

impl GroupedInputs {
    pub fn new(n: usize, inputs: impl IntoIterator<Item = BitString>) -> Self {
        let mut by_weight = vec![Vec::new(); n + 1];
        for x in inputs {
            by_weight[x.hamming_weight()].push(x);
        }
        for bucket in &mut by_weight {
            bucket.sort_unstable();
            bucket.dedup();
        }
        Self { by_weight }
    }

    pub fn n(&self) -> usize {
        self.by_weight.len().saturating_sub(1)
    }

    pub fn weight(&self, i: usize) -> &[BitString] {
        self.by_weight.get(i).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.by_weight.iter().all(Vec::is_empty)
    }
}

/// Chooses which gates to toggle from the misclassified and correctly
/// classified inputs seen in one sampling phase.
pub trait UpdateStrategy: Sync {
    fn update(&self, errors: &GroupedInputs, corrects: &GroupedInputs) -> Vec<BitString>;
}

/// Update rule for parity concepts: every gate it returns has one control.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParityUpdate;

impl UpdateStrategy for ParityUpdate {
    fn update(&self, errors: &GroupedInputs, corrects: &GroupedInputs) -> Vec<BitString> {
        parity_update(errors, corrects)
    }
}

/// Misclassified weight-1 inputs name a wrong gate directly. A misclassified
/// input next to a correctly classified one (Hamming distance 1, adjacent
/// weights) names the gate on the bit where they differ.
pub fn parity_update(errors: &GroupedInputs, corrects: &GroupedInputs) -> Vec<BitString> {
    let n = errors.n().max(corrects.n());
    let mut gates: Vec<BitString> = errors.weight(1).to_vec();
    let mut push_if_unit = |a: &BitString, b: &BitString| {
        if let Ok(d) = a.xor(b) {
            if d.hamming_weight() == 1 {
                gates.push(d);
            }
        }
    };
    for i in 1..n {
        for e in errors.weight(i) {
            for c in corrects.weight(i + 1) {
                push_if_unit(e, c);
            }
        }
        for c in corrects.weight(i) {
            for e in errors.weight(i + 1) {
                push_if_unit(c, e);
            }
        }
    }
    gates.sort_unstable();
    gates.dedup();
    gates
}

/// Outcome of measuring `Q^m A|0⟩` `N` times.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub m: usize,
    pub shots: usize,
    /// Inputs measured with ancillas `11`, with multiplicity.
    pub errors: Vec<BitString>,
    /// Inputs measured with ancillas `00`.
    pub corrects: Vec<BitString>,
    /// Inputs measured with ancillas `a_0 = 1, a_1 = 0`.
    pub discarded: Vec<BitString>,
}

impl SampleBatch {
    /// `S`, the flagged count.
    pub fn flagged(&self) -> usize {
        self.errors.len()
    }

    /// `S > N/2`.
    pub fn exceeds_half(&self) -> bool {
        2 * self.errors.len() > self.shots
    }

    pub fn oracle_calls(&self) -> u64 {
        self.shots as u64 * (1 + 2 * self.m as u64)
    }
}

/// Prepares `A|0⟩`, applies `Q` `m` times and measures `shots` times.
pub fn sampling_phase<R: Rng + ?Sized>(
    setup: &AmplificationSetup,
    m: usize,
    shots: usize,
    rng: &mut R,
) -> Result<SampleBatch> {
    let n = setup.n();
    let state = setup.amplified_state(m);
    let mut batch = SampleBatch {
        m,
        shots,
        errors: Vec::new(),
        corrects: Vec::new(),
        discarded: Vec::new(),
    };
    for idx in state.sample_indices(rng, shots) {
        let (input, a0, a1) = setup.split(idx);
        let x = BitString::new(input, n)?;
        match (a0, a1) {
            (true, true) => batch.errors.push(x),
            (false, false) => batch.corrects.push(x),
            (true, false) => batch.discarded.push(x),
            (false, true) => {
                return Err(QpacError::InvalidParameter(format!(
                    "scaling ancilla set without output ancilla (index {idx:#x})"
                )))
            }
        }
    }
    Ok(batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub m: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnRecord {
    pub n: usize,
    /// Gate masks of the final network, ascending.
    pub final_hypothesis: Vec<u64>,
    pub final_error: f64,
    pub updates: usize,
    pub sampling_phases: usize,
    /// EX applications, counting both `A` and `A⁻¹` inside every `Q`.
    pub oracle_calls: u64,
    /// Shots only (`N` per sampling phase).
    pub shot_calls: u64,
    /// Oracle calls between consecutive updates; the last entry is the
    /// final verification pass.
    pub calls_per_update: Vec<u64>,
    /// Gate masks toggled by each update.
    pub toggles: Vec<Vec<u64>>,
    pub trace: Vec<TraceEntry>,
    pub m_max: usize,
    pub n_shots: usize,
    pub terminated_ok: bool,
}

impl LearnRecord {
    pub fn hypothesis(&self) -> Anf {
        Anf::from_masks(self.n, self.final_hypothesis.iter().copied()).expect("masks fit arity")
    }

    pub fn render_hypothesis(&self) -> String {
        self.hypothesis().render()
    }
}

/// Runs the tuning loop from the identity network with a ChaCha8 stream
/// seeded from `params.seed`.
pub fn learn(oracle: &Oracle, params: &LearnParams, strategy: &dyn UpdateStrategy) -> Result<LearnRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    learn_with_rng(oracle, params, strategy, &mut rng)
}

pub fn learn_with_rng<R: Rng + ?Sized>(
    oracle: &Oracle,
    params: &LearnParams,
    strategy: &dyn UpdateStrategy,
    rng: &mut R,
) -> Result<LearnRecord> {
    let n = oracle.n();
    let shots = params.n_shots();
    let schedule = params.schedule.values(params.m_max());
    let cap = params.update_cap(n);

    let mut tnn = TnnState::identity(n)?;
    let mut setup = AmplificationSetup::new(oracle, &tnn)?;
    let mut record = LearnRecord {
        n,
        final_hypothesis: Vec::new(),
        final_error: 0.0,
        updates: 0,
        sampling_phases: 0,
        oracle_calls: 0,
        shot_calls: 0,
        calls_per_update: Vec::new(),
        toggles: Vec::new(),
        trace: Vec::new(),
        m_max: params.m_max(),
        n_shots: shots,
        terminated_ok: false,
    };
    let mut segment_calls = 0u64;
    let mut pos = 0;

    loop {
        let m = schedule[pos];
        let batch = sampling_phase(&setup, m, shots, rng)?;
        record.sampling_phases += 1;
        record.oracle_calls += batch.oracle_calls();
        record.shot_calls += shots as u64;
        segment_calls += batch.oracle_calls();
        record.trace.push(TraceEntry {
            m,
            flagged: batch.flagged(),
        });

        if batch.exceeds_half() {
            if record.updates >= cap {
                break;
            }
            let errors = GroupedInputs::new(n, batch.errors.iter().copied());
            let corrects = GroupedInputs::new(n, batch.corrects.iter().copied());
            let gates = strategy.update(&errors, &corrects);
            tnn.toggle(&gates)?;
            setup = AmplificationSetup::new(oracle, &tnn)?;
            record.updates += 1;
            record.toggles.push(gates.iter().map(BitString::bits).collect());
            record.calls_per_update.push(segment_calls);
            segment_calls = 0;
            pos = 0;
        } else if pos + 1 == schedule.len() {
            record.terminated_ok = true;
            break;
        } else {
            pos += 1;
        }
    }

    record.calls_per_update.push(segment_calls);
    let hypothesis = tnn.hypothesis();
    record.final_error = oracle.exact_error(&hypothesis)?;
    record.final_hypothesis = hypothesis.monomials().collect();
    Ok(record)
}

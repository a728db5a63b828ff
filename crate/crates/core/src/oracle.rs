//! The example oracle `EX(c, D)`: an Ry layer preparing a product
//! distribution over the inputs followed by the concept's multi-controlled X
//! gates writing `c(x)` onto the output ancilla.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anf::Anf;
use crate::error::{QpacError, Result};
use crate::statevector::{Circuit, Gate};

/// Product distribution `D(x) = ∏_i (cos²(θ_i/2) if x_i = 0 else sin²(θ_i/2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    angles: Vec<f64>,
}

impl ProductDistribution {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() > crate::anf::MAX_ARITY {
            return Err(QpacError::ArityTooLarge(angles.len()));
        }
        if let Some(bad) = angles.iter().find(|a| !(0.0..=PI).contains(*a)) {
            return Err(QpacError::InvalidParameter(format!(
                "rotation angle {bad} outside [0, π]"
            )));
        }
        Ok(Self { angles })
    }

    /// Uniform distribution over all inputs (every angle π/2).
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![PI / 2.0; n])
    }

    /// Angles drawn uniformly from the closed interval `[0, π]`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| rng.random_range(0.0..=PI)).collect())
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Marginal probability that `x_i = 1`.
    pub fn p_one(&self, i: usize) -> f64 {
        (self.angles[i] / 2.0).sin().powi(2)
    }

    pub fn probability(&self, x: u64) -> f64 {
        self.angles
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (s, c) = (a / 2.0).sin_cos();
                if (x >> i) & 1 == 1 {
                    s * s
                } else {
                    c * c
                }
            })
            .product()
    }

    /// `D(x)` for every `x`, indexed by the input's integer value.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut d = Vec::with_capacity(1 << self.n());
        d.push(1.0);
        for (i, a) in self.angles.iter().enumerate() {
            let (s, c) = (a / 2.0).sin_cos();
            let (p0, p1) = (c * c, s * s);
            for x in 0..1usize << i {
                d.push(d[x] * p1);
                d[x] *= p0;
            }
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    concept: Anf,
    distribution: ProductDistribution,
    circuit: Circuit,
}

impl Oracle {
    /// Circuit on `n + 1` qubits: `Ry(θ_i)` on each input `q_i`, then one
    /// McX per concept monomial targeting the ancilla `q_n`.
    pub fn build(concept: Anf, distribution: ProductDistribution) -> Result<Self> {
        let n = concept.n();
        if distribution.n() != n {
            return Err(QpacError::WidthMismatch {
                expected: n,
                actual: distribution.n(),
            });
        }
        let mut circuit = Circuit::new(n + 1);
        for (qubit, &angle) in distribution.angles().iter().enumerate() {
            circuit.push(Gate::Ry { qubit, angle })?;
        }
        for controls in concept.monomials() {
            circuit.push(Gate::McX { controls, target: n })?;
        }
        Ok(Self {
            concept,
            distribution,
            circuit,
        })
    }

    pub fn n(&self) -> usize {
        self.concept.n()
    }

    pub fn concept(&self) -> &Anf {
        &self.concept
    }

    pub fn distribution(&self) -> &ProductDistribution {
        &self.distribution
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// `err_D(h, c) = Σ_{x : h(x) ≠ c(x)} D(x)`, evaluated analytically.
    pub fn exact_error(&self, hypothesis: &Anf) -> Result<f64> {
        let diff = self.concept.xor(hypothesis)?;
        let table = diff.to_truth_table();
        let err = self
            .distribution
            .probabilities()
            .into_iter()
            .zip(table.values())
            .filter_map(|(d, &wrong)| wrong.then_some(d))
            .fold(0.0, |acc, d| acc + d);
        Ok(err.clamp(0.0, 1.0))
    }

    pub fn record(&self, seed: Option<u64>) -> OracleRecord {
        OracleRecord {
            n: self.n(),
            concept: self.concept.monomials().collect(),
            angles: self.distribution.angles().to_vec(),
            seed,
        }
    }
}

/// Key-value form of an oracle for configs and result records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub n: usize,
    pub concept: Vec<u64>,
    pub angles: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TryFrom<OracleRecord> for Oracle {
    type Error = QpacError;

    fn try_from(r: OracleRecord) -> Result<Oracle> {
        Oracle::build(Anf::from_masks(r.n, r.concept)?, ProductDistribution::new(r.angles)?)
    }
}

//! Dense statevector simulation for the small gate set used by the learner.
//!
//! Amplitude index bit `i` is qubit `q_i` (little-endian), the same
//! convention as [`BitString`].

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::anf::{BitString, MAX_ARITY};
use crate::error::{QpacError, Result};

/// Inputs, the output ancilla and the scaling ancilla.
pub const MAX_QUBITS: usize = MAX_ARITY + 2;

/// States at least this large are updated with rayon.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// X on `target` when every qubit in `controls` is 1. Empty `controls`
    /// is an unconditional X.
    McX { controls: u64, target: usize },
    /// `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    Ry { qubit: usize, angle: f64 },
    /// Ry on `target` conditioned on `control` being 1.
    CRy { control: usize, target: usize, angle: f64 },
    /// Negates amplitudes where both qubits are 1 (symmetric).
    Cz { control: usize, target: usize },
    /// Negates the amplitude of `|0…0⟩`, i.e. `I − 2|0⟩⟨0|`.
    ReflectZero,
}

impl Gate {
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Ry { qubit, angle } => Gate::Ry { qubit, angle: -angle },
            Gate::CRy { control, target, angle } => Gate::CRy {
                control,
                target,
                angle: -angle,
            },
            g => g,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(QpacError::QubitOutOfRange { qubit: q, n_qubits })
            }
        };
        match *self {
            Gate::McX { controls, target } => {
                check(target)?;
                if n_qubits < 64 && controls >> n_qubits != 0 {
                    return Err(QpacError::InvalidGate(format!(
                        "control mask {controls:#x} exceeds {n_qubits} qubits"
                    )));
                }
                if (controls >> target) & 1 == 1 {
                    return Err(QpacError::InvalidGate(format!("target {target} is also a control")));
                }
            }
            Gate::Ry { qubit, angle } => {
                check(qubit)?;
                if !angle.is_finite() {
                    return Err(QpacError::InvalidGate("non-finite rotation angle".into()));
                }
            }
            Gate::CRy { control, target, angle } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(QpacError::InvalidGate("control equals target".into()));
                }
                if !angle.is_finite() {
                    return Err(QpacError::InvalidGate("non-finite rotation angle".into()));
                }
            }
            Gate::Cz { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(QpacError::InvalidGate("control equals target".into()));
                }
            }
            Gate::ReflectZero => {}
        }
        Ok(())
    }
}

/// Ordered gate list on a fixed register size.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends all gates of `other`, which may act on a smaller register.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits > self.n_qubits {
            return Err(QpacError::WidthMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(QpacError::ArityTooLarge(n_qubits));
        }
        if index >> n_qubits != 0 {
            return Err(QpacError::BitsOutOfRange {
                value: index,
                width: n_qubits,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(QpacError::InvalidParameter(format!(
                "{len} amplitudes is not a power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(QpacError::ArityTooLarge(n_qubits));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::McX { controls, target } => {
                let controls = controls as usize;
                for_each_pair(&mut self.amplitudes, target, |i, a0, a1| {
                    if i & controls == controls {
                        std::mem::swap(a0, a1);
                    }
                });
            }
            Gate::Ry { qubit, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                for_each_pair(&mut self.amplitudes, qubit, |_, a0, a1| rotate(a0, a1, c, s));
            }
            Gate::CRy { control, target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let cbit = 1usize << control;
                for_each_pair(&mut self.amplitudes, target, |i, a0, a1| {
                    if i & cbit != 0 {
                        rotate(a0, a1, c, s);
                    }
                });
            }
            Gate::Cz { control, target } => {
                // pairs over `target`: only the upper element has target = 1
                let cbit = 1usize << control;
                for_each_pair(&mut self.amplitudes, target, |i, _, a1| {
                    if i & cbit != 0 {
                        *a1 = -*a1;
                    }
                });
            }
            Gate::ReflectZero => self.amplitudes[0] = -self.amplitudes[0],
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        self.check_register(circuit)?;
        for g in circuit.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    /// Applies `circuit⁻¹`: gates in reverse order, each inverted.
    pub fn apply_inverse(&mut self, circuit: &Circuit) -> Result<()> {
        self.check_register(circuit)?;
        for g in circuit.gates().iter().rev() {
            self.apply_unchecked(&g.inverse());
        }
        Ok(())
    }

    fn check_register(&self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(QpacError::WidthMismatch {
                expected: self.n_qubits,
                actual: circuit.n_qubits(),
            });
        }
        Ok(())
    }

    /// Total probability of the basis states selected by `predicate`.
    pub fn probability(&self, predicate: impl Fn(u64) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| predicate(*i as u64))
            .fold(0.0, |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Draws `shots` basis indices i.i.d. from `|amplitude|²`.
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R, shots: usize) -> Vec<u64> {
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let last_nonzero = self.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
        (0..shots)
            .map(|_| {
                let u = rng.random::<f64>() * acc;
                let idx = cumulative.partition_point(|&c| c <= u);
                idx.min(last_nonzero) as u64
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, shots: usize) -> Vec<BitString> {
        self.sample_indices(rng, shots)
            .into_iter()
            .map(|i| BitString::new(i, self.n_qubits).expect("index fits register"))
            .collect()
    }
}

#[inline]
fn rotate(a0: &mut Complex64, a1: &mut Complex64, c: f64, s: f64) {
    let (x, y) = (*a0, *a1);
    *a0 = x * c - y * s;
    *a1 = x * s + y * c;
}

/// Visits every amplitude pair `(i, i | 1<<target)` with bit `target` of `i`
/// clear, passing `i` and both amplitudes. Pairs are disjoint, so the result
/// does not depend on visit order.
fn for_each_pair<F>(amps: &mut [Complex64], target: usize, f: F)
where
    F: Fn(usize, &mut Complex64, &mut Complex64) + Sync,
{
    let stride = 1usize << target;
    let block = stride << 1;
    let visit = |(ci, chunk): (usize, &mut [Complex64])| {
        let (lo, hi) = chunk.split_at_mut(stride);
        let base = ci * block;
        for (j, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            f(base + j, a0, a1);
        }
    };
    if amps.len() >= PAR_THRESHOLD && amps.len() / block >= 2 {
        amps.par_chunks_mut(block).enumerate().for_each(visit);
    } else {
        amps.chunks_mut(block).enumerate().for_each(visit);
    }
}

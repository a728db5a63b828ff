//! Tunable network: a set of multi-controlled X gates on the output ancilla.
//! The gate set is exactly the ANF of the expressed hypothesis.

use std::collections::BTreeSet;
use std::fmt;

use crate::anf::{Anf, BitString};
use crate::error::{QpacError, Result};
use crate::statevector::{Circuit, Gate};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TnnState {
    n: usize,
    gates: BTreeSet<u64>,
}

impl TnnState {
    /// The identity network, expressing the constant-0 hypothesis.
    pub fn identity(n: usize) -> Result<Self> {
        Anf::zero(n)?;
        Ok(Self {
            n,
            gates: BTreeSet::new(),
        })
    }

    pub fn from_anf(f: &Anf) -> Self {
        Self {
            n: f.n(),
            gates: f.monomials().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> impl Iterator<Item = u64> + '_ {
        self.gates.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn hypothesis(&self) -> Anf {
        Anf::from_masks(self.n, self.gates.iter().copied()).expect("gate masks fit arity")
    }

    /// McX gates on `n + 1` qubits targeting the ancilla `q_n`.
    pub fn as_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.n + 1);
        for &controls in &self.gates {
            c.push(Gate::McX {
                controls,
                target: self.n,
            })
            .expect("gate masks fit arity");
        }
        c
    }

    /// Flips the presence of each mask (symmetric difference).
    pub fn toggle<'a>(&mut self, masks: impl IntoIterator<Item = &'a BitString>) -> Result<()> {
        let masks: Vec<u64> = masks
            .into_iter()
            .map(|m| {
                if m.width() == self.n {
                    Ok(m.bits())
                } else {
                    Err(QpacError::WidthMismatch {
                        expected: self.n,
                        actual: m.width(),
                    })
                }
            })
            .collect::<Result<_>>()?;
        for m in masks {
            if !self.gates.remove(&m) {
                self.gates.insert(m);
            }
        }
        Ok(())
    }

    /// Whether every gate has a single control, i.e. the hypothesis is a parity.
    pub fn is_parity(&self) -> bool {
        self.gates.iter().all(|g| g.count_ones() == 1)
    }

    /// `"n=4; 0x1,0x4"`.
    pub fn render(&self) -> String {
        self.hypothesis().render()
    }
}

impl fmt::Display for TnnState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

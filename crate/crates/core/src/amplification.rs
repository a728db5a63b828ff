//! Amplitude amplification of the misclassified inputs.
//!
//! The preparation circuit `A(h)` runs the oracle, the tunable network and a
//! scaling rotation `R` on a second ancilla, so that the flagged subspace
//! (both ancillas equal to 1) carries probability `err / 5`. The diffusion
//! operator is applied as `X_G`, `A⁻¹`, `X_0`, `A`; the overall `−1` phase of
//! the textbook operator is dropped since it never shows up in
//! measurement statistics.

use std::f64::consts::FRAC_PI_4;

use crate::error::{QpacError, Result};
use crate::oracle::Oracle;
use crate::statevector::{Circuit, Gate, StateVector};
use crate::tnn::TnnState;

/// Scaling factor applied to the error by the `R` gate.
pub const ERROR_SCALE: f64 = 5.0;

/// Rotation angle of `R`: `R|10⟩ = 2/√5 |10⟩ + 1/√5 |11⟩`.
pub fn r_angle() -> f64 {
    2.0 * (1.0 / ERROR_SCALE.sqrt()).asin()
}

/// `θ_ε = arcsin(√(ε/5))`.
pub fn theta_eps(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((epsilon / ERROR_SCALE).sqrt().asin())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(QpacError::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, 1/2)"
        )));
    }
    Ok(())
}

/// Smallest `m ≥ 0` with `(2m + 1)·θ ≥ π/4`, compared directly in `f64`.
pub fn m_max_for_theta(theta: f64) -> Result<usize> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(QpacError::InvalidParameter(format!(
            "theta {theta} must be positive and finite"
        )));
    }
    let reaches = |m: usize| (2 * m + 1) as f64 * theta >= FRAC_PI_4;
    let mut m = ((FRAC_PI_4 / theta - 1.0) / 2.0).ceil().max(0.0) as usize;
    while m > 0 && reaches(m - 1) {
        m -= 1;
    }
    while !reaches(m) {
        m += 1;
    }
    Ok(m)
}

/// Deepest amplification level needed to decide `err < ε`.
pub fn m_max(epsilon: f64) -> Result<usize> {
    m_max_for_theta(theta_eps(epsilon)?)
}

/// `θ_ε` together with its `m_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPair {
    pub theta_eps: f64,
    pub m_max: usize,
}

impl ThetaPair {
    pub fn for_epsilon(epsilon: f64) -> Result<Self> {
        let theta_eps = theta_eps(epsilon)?;
        Ok(Self {
            theta_eps,
            m_max: m_max_for_theta(theta_eps)?,
        })
    }
}

/// Closed-form flagged probability after `m` rounds: `sin²((2m+1)·arcsin(√(err/5)))`.
pub fn predicted_probability(error: f64, m: usize) -> f64 {
    let theta = (error.clamp(0.0, 1.0) / ERROR_SCALE).sqrt().asin();
    ((2 * m + 1) as f64 * theta).sin().powi(2)
}

/// Evaluates both sides of the threshold lemma at `theta`: whether
/// `sin²((2m+1)θ) < 1/2` for every `m ≤ m_max(θ_ε)`, and whether `θ < θ_ε`.
/// A counterexample is `(true, false)`.
pub fn threshold_lemma_holds(theta: f64, theta_eps: f64) -> Result<(bool, bool)> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(QpacError::InvalidParameter(format!("theta {theta} outside [0, π/2]")));
    }
    if !(theta_eps > 0.0 && theta_eps < FRAC_PI_4) {
        return Err(QpacError::InvalidParameter(format!(
            "theta_eps {theta_eps} outside (0, π/4)"
        )));
    }
    let m_max = m_max_for_theta(theta_eps)?;
    let hypothesis = (0..=m_max).all(|m| ((2 * m + 1) as f64 * theta).sin().powi(2) < 0.5);
    Ok((hypothesis, theta < theta_eps))
}

/// Prepared circuit `A(h)` for one oracle and one network state, on
/// `n + 2` qubits: inputs, output ancilla `a_0 = q_n`, scaling ancilla
/// `a_1 = q_{n+1}`.
#[derive(Debug, Clone)]
pub struct AmplificationSetup {
    n: usize,
    prepare: Circuit,
}

impl AmplificationSetup {
    pub fn new(oracle: &Oracle, tnn: &TnnState) -> Result<Self> {
        Ok(Self {
            n: oracle.n(),
            prepare: build_a(oracle, tnn)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_qubits(&self) -> usize {
        self.n + 2
    }

    pub fn circuit(&self) -> &Circuit {
        &self.prepare
    }

    /// `A|0⟩`.
    pub fn prepare(&self) -> StateVector {
        let mut s = StateVector::new(self.n_qubits()).expect("arity checked at construction");
        s.apply_circuit(&self.prepare).expect("register matches");
        s
    }

    /// One diffusion round: `X_G`, `A⁻¹`, `X_0`, `A`.
    pub fn apply_q(&self, state: &mut StateVector) -> Result<()> {
        state.apply_gate(&Gate::Cz {
            control: self.n,
            target: self.n + 1,
        })?;
        state.apply_inverse(&self.prepare)?;
        state.apply_gate(&Gate::ReflectZero)?;
        state.apply_circuit(&self.prepare)
    }

    /// `Q^m A|0⟩`.
    pub fn amplified_state(&self, m: usize) -> StateVector {
        let mut s = self.prepare();
        for _ in 0..m {
            self.apply_q(&mut s).expect("register matches");
        }
        s
    }

    /// Probability that both ancillas read 1.
    pub fn flagged_probability(&self, state: &StateVector) -> f64 {
        let both = 0b11u64 << self.n;
        state.probability(|i| i & both == both)
    }

    /// Splits a measured basis index into the input bits and the ancilla
    /// pattern `(a_0, a_1)`.
    pub fn split(&self, index: u64) -> (u64, bool, bool) {
        let input = index & ((1u64 << self.n) - 1);
        (input, (index >> self.n) & 1 == 1, (index >> (self.n + 1)) & 1 == 1)
    }
}

/// Oracle on `q_0..q_n`, network gates on `a_0`, then `R` as a controlled Ry
/// from `a_0` onto `a_1`.
pub fn build_a(oracle: &Oracle, tnn: &TnnState) -> Result<Circuit> {
    let n = oracle.n();
    if tnn.n() != n {
        return Err(QpacError::WidthMismatch {
            expected: n,
            actual: tnn.n(),
        });
    }
    let mut c = Circuit::new(n + 2);
    c.extend(oracle.circuit())?;
    c.extend(&tnn.as_circuit())?;
    c.push(Gate::CRy {
        control: n,
        target: n + 1,
        angle: r_angle(),
    })?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::{parity_anf, Anf, BitString};
    use crate::oracle::ProductDistribution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parity(s: &str) -> Anf {
        parity_anf(&s.parse::<BitString>().unwrap())
    }

    #[test]
    fn r_gate_column() {
        let mut s = StateVector::basis(2, 0b01).unwrap();
        s.apply_gate(&Gate::CRy {
            control: 0,
            target: 1,
            angle: r_angle(),
        })
        .unwrap();
        assert!((s.amplitudes()[0b01].re - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((s.amplitudes()[0b11].re - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn m_max_values() {
        assert_eq!(m_max(0.01).unwrap(), 9);
        assert_eq!(m_max(0.05).unwrap(), 4);
        assert_eq!(m_max(0.1).unwrap(), 3);
        assert!(m_max(0.0).is_err());
        assert!(m_max(0.5).is_err());
        assert!(m_max(f64::NAN).is_err());
    }

    #[test]
    fn m_max_brackets_quarter_turn() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let eps = rng.random_range(1e-4..0.4999);
            let ThetaPair { theta_eps, m_max } = ThetaPair::for_epsilon(eps).unwrap();
            assert!((2 * m_max + 1) as f64 * theta_eps >= FRAC_PI_4);
            if m_max >= 1 {
                assert!((2 * m_max - 1) as f64 * theta_eps < FRAC_PI_4);
            }
        }
    }

    #[test]
    fn a_circuit_probabilities() {
        let o = Oracle::build(parity("11"), ProductDistribution::uniform(2).unwrap()).unwrap();
        let exact = AmplificationSetup::new(&o, &TnnState::from_anf(&parity("11"))).unwrap();
        assert!(exact.flagged_probability(&exact.prepare()) < 1e-15);

        let setup = AmplificationSetup::new(&o, &TnnState::identity(2).unwrap()).unwrap();
        let s = setup.prepare();
        assert!((setup.flagged_probability(&s) - 0.1).abs() < 1e-12);
        let p_a0 = s.probability(|i| (i >> 2) & 1 == 1);
        assert!((p_a0 - 0.5).abs() < 1e-12);
        assert!((setup.flagged_probability(&s) / p_a0 - 0.2).abs() < 1e-12);
        // a_1 never rotates without a_0
        assert!(s.probability(|i| i >> 2 == 0b10) < 1e-30);
    }

    #[test]
    fn tnn_arity_mismatch() {
        let o = Oracle::build(parity("11"), ProductDistribution::uniform(2).unwrap()).unwrap();
        assert!(AmplificationSetup::new(&o, &TnnState::identity(3).unwrap()).is_err());
    }

    /// Finds a product distribution with the requested error for the
    /// identity network against `p_1` (error = P(x_0 = 1) = sin²(θ_0/2)).
    fn setup_with_error(err: f64) -> AmplificationSetup {
        let theta0 = 2.0 * err.sqrt().asin();
        let dist = ProductDistribution::new(vec![theta0, 1.0]).unwrap();
        let o = Oracle::build(parity("10"), dist).unwrap();
        assert!((o.exact_error(&Anf::zero(2).unwrap()).unwrap() - err).abs() < 1e-14);
        AmplificationSetup::new(&o, &TnnState::identity(2).unwrap()).unwrap()
    }

    #[test]
    fn diffusion_examples() {
        let o = Oracle::build(parity("11"), ProductDistribution::uniform(2).unwrap()).unwrap();
        let zero = AmplificationSetup::new(&o, &TnnState::from_anf(&parity("11"))).unwrap();
        for m in 0..6 {
            assert!(zero.flagged_probability(&zero.amplified_state(m)) < 1e-20);
        }

        let s = setup_with_error(0.2);
        assert!((s.flagged_probability(&s.amplified_state(0)) - 0.04).abs() < 1e-12);
        let p3 = s.flagged_probability(&s.amplified_state(3));
        let closed = (7.0 * 0.2f64.asin()).sin().powi(2);
        assert!((p3 - closed).abs() < 1e-9);
        assert!((p3 - 0.97415).abs() < 1e-4);
    }

    #[test]
    fn q_preserves_norm() {
        let s = setup_with_error(0.37);
        let mut st = s.prepare();
        for _ in 0..20 {
            s.apply_q(&mut st).unwrap();
            assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lemma_examples() {
        assert_eq!(threshold_lemma_holds(0.0, 0.1).unwrap(), (true, true));
        assert_eq!(threshold_lemma_holds(FRAC_PI_4, 0.1).unwrap(), (false, false));
        assert!(threshold_lemma_holds(2.0, 0.1).is_err());
        assert!(threshold_lemma_holds(0.1, 0.0).is_err());
    }
}

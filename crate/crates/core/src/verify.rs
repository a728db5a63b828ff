//! Numerical cross-checks shared by the `verify` subcommand and the
//! acceptance tests. Each check compares an implementation path against an
//! independent route (quadrature, brute-force grid, closed form).

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::amplification::{self, AmplificationSetup};
use crate::anf::Anf;
use crate::error::Result;
use crate::learner::posterior_confidence;
use crate::oracle::{Oracle, ProductDistribution};
use crate::statevector::{Circuit, Gate, StateVector};
use crate::tnn::TnnState;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `P(S ≤ N/2)` for `S ~ Binomial(N, p)`, summed in the log domain.
fn binomial_cdf_half(n: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_c = 0.0f64;
    let mut total = 0.0;
    for k in 0..=n / 2 {
        if k > 0 {
            log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        total += (log_c + k as f64 * lp + (n - k) as f64 * lq).exp();
    }
    total
}

/// Posterior `P(p < 1/2 | S ≤ N/2)` with a uniform prior, as the ratio of
/// the two integrals of the binomial likelihood, evaluated by quadrature.
pub fn posterior_by_quadrature(n_shots: usize) -> f64 {
    let f = |p: f64| binomial_cdf_half(n_shots, p);
    let low = integrate(&f, 0.0, 0.5, 1e-15);
    let high = integrate(&f, 0.5, 1.0, 1e-15);
    low / (low + high)
}

/// Largest `|closed form − quadrature|` over even `N` in `[2, max_n]`.
pub fn posterior_quadrature_deviation(max_n: usize) -> Result<(usize, f64)> {
    let mut worst = (2, 0.0f64);
    for n in (2..=max_n).step_by(2) {
        let d = (posterior_confidence(n)? - posterior_by_quadrature(n)).abs();
        if d > worst.1 {
            worst = (n, d);
        }
    }
    Ok(worst)
}

/// Even `N ≤ max_n` where the posterior fails to reach `1 − 1/√(πN)`.
pub fn posterior_bound_violations(max_n: usize) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for n in (2..=max_n).step_by(2) {
        if posterior_confidence(n)? < crate::learner::posterior_lower_bound(n) {
            bad.push(n);
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaGridReport {
    pub points: usize,
    pub epsilons: Vec<f64>,
    pub checked: usize,
    /// `(θ, ε)` where the hypothesis held but `θ ≥ θ_ε`.
    pub counterexamples: Vec<(f64, f64)>,
}

/// Evaluates the threshold lemma on `points` equally spaced `θ ∈ [0, π/2]`
/// for every `ε`.
pub fn lemma_grid(points: usize, epsilons: &[f64]) -> Result<LemmaGridReport> {
    let mut report = LemmaGridReport {
        points,
        epsilons: epsilons.to_vec(),
        checked: 0,
        counterexamples: Vec::new(),
    };
    let steps = points.saturating_sub(1).max(1);
    for &eps in epsilons {
        let theta_eps = amplification::theta_eps(eps)?;
        for k in 0..points {
            let theta = (k as f64 * FRAC_PI_2 / steps as f64).min(FRAC_PI_2);
            let (hyp, concl) = amplification::threshold_lemma_holds(theta, theta_eps)?;
            report.checked += 1;
            if hyp && !concl {
                report.counterexamples.push((theta, eps));
            }
        }
    }
    Ok(report)
}

pub const LEMMA_EPSILONS: [f64; 6] = [0.01, 0.05, 0.1, 0.2, 0.3, 0.45];

fn random_anf<R: Rng>(n: usize, rng: &mut R) -> Anf {
    let k = rng.random_range(0..=n + 2);
    Anf::from_masks(n, (0..k).map(|_| rng.random_range(0..1u64 << n))).expect("masks fit arity")
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplificationReport {
    pub setups: usize,
    pub max_deviation: f64,
    pub max_norm_drift: f64,
    pub max_scaled_error: f64,
}

/// Random (concept, hypothesis, distribution, m) setups at `n ≤ max_n`:
/// simulated flagged probability after `Q^m` against the closed form.
pub fn amplification_closed_form(setups: usize, max_n: usize, max_m: usize, seed: u64) -> Result<AmplificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AmplificationReport {
        setups,
        max_deviation: 0.0,
        max_norm_drift: 0.0,
        max_scaled_error: 0.0,
    };
    for _ in 0..setups {
        let n = rng.random_range(1..=max_n);
        let concept = random_anf(n, &mut rng);
        let hypothesis = random_anf(n, &mut rng);
        let oracle = Oracle::build(concept, ProductDistribution::random(n, &mut rng)?)?;
        let m = rng.random_range(0..=max_m);
        let err = oracle.exact_error(&hypothesis)?;
        let setup = AmplificationSetup::new(&oracle, &TnnState::from_anf(&hypothesis))?;
        let state = setup.amplified_state(m);
        let dev = (setup.flagged_probability(&state) - amplification::predicted_probability(err, m)).abs();
        report.max_deviation = report.max_deviation.max(dev);
        report.max_norm_drift = report.max_norm_drift.max((state.norm_sqr() - 1.0).abs());
        report.max_scaled_error = report.max_scaled_error.max(setup.flagged_probability(&setup.prepare()));
    }
    Ok(report)
}

fn random_gate<R: Rng>(n: usize, rng: &mut R) -> Gate {
    let q = rng.random_range(0..n);
    let other = |rng: &mut R| {
        let o = rng.random_range(0..n - 1);
        if o >= q {
            o + 1
        } else {
            o
        }
    };
    match rng.random_range(0..5) {
        0 => Gate::McX {
            controls: rng.random_range(0..1u64 << n) & !(1 << q),
            target: q,
        },
        1 => Gate::Ry {
            qubit: q,
            angle: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        },
        2 if n > 1 => Gate::CRy {
            control: other(rng),
            target: q,
            angle: rng.random_range(-3.0..3.0),
        },
        3 if n > 1 => Gate::Cz {
            control: other(rng),
            target: q,
        },
        _ => Gate::ReflectZero,
    }
}

pub fn random_circuit<R: Rng>(n: usize, len: usize, rng: &mut R) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        c.push(random_gate(n, rng)).expect("generated gates are valid");
    }
    c
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitarityReport {
    pub max_norm_drift: f64,
    pub max_round_trip: f64,
}

/// Norm drift over one long random gate sequence and round-trip error of
/// `apply_inverse ∘ apply_circuit` on random circuits.
pub fn unitarity(n: usize, gates: usize, round_trips: usize, seed: u64) -> Result<UnitarityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = StateVector::new(n)?;
    // spread amplitude first so every gate acts nontrivially
    for q in 0..n {
        s.apply_gate(&Gate::Ry {
            qubit: q,
            angle: 1.0 + q as f64 * 0.1,
        })?;
    }
    let mut drift = 0.0f64;
    for _ in 0..gates {
        s.apply_gate(&random_gate(n, &mut rng))?;
        drift = drift.max((s.norm_sqr() - 1.0).abs());
    }
    let mut round = 0.0f64;
    for _ in 0..round_trips {
        let k = rng.random_range(2..=n.max(2));
        let c = random_circuit(k, 20, &mut rng);
        let mut start = StateVector::new(k)?;
        for q in 0..k {
            start.apply_gate(&Gate::Ry {
                qubit: q,
                angle: rng.random_range(0.0..3.0),
            })?;
        }
        let mut t = start.clone();
        t.apply_circuit(&c)?;
        t.apply_inverse(&c)?;
        for (a, b) in t.amplitudes().iter().zip(start.amplitudes()) {
            round = round.max((a - b).norm());
        }
    }
    Ok(UnitarityReport {
        max_norm_drift: drift,
        max_round_trip: round,
    })
}

/// The full suite run by `qpac verify`.
pub fn run_all() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let got: Vec<usize> = [0.01, 0.05, 0.1]
        .iter()
        .map(|&e| amplification::m_max(e))
        .collect::<Result<_>>()?;
    out.push(CheckOutcome::new(
        "m_max values",
        got == [9, 4, 3],
        format!("m_max(0.01, 0.05, 0.1) = {got:?}"),
    ));

    let lemma = lemma_grid(20001, &LEMMA_EPSILONS)?;
    out.push(CheckOutcome::new(
        "lemma grid",
        lemma.counterexamples.is_empty(),
        format!(
            "{} points checked, {} counterexamples",
            lemma.checked,
            lemma.counterexamples.len()
        ),
    ));

    let (worst_n, dev) = posterior_quadrature_deviation(64)?;
    let exact2 = crate::learner::posterior_confidence_exact(2)?;
    let eleven_sixteenths = num_rational::BigRational::new(11.into(), 16.into());
    out.push(CheckOutcome::new(
        "posterior quadrature",
        dev < 1e-10 && exact2 == eleven_sixteenths,
        format!("max |closed − quadrature| = {dev:.3e} at N={worst_n}; P(N=2) = {exact2}"),
    ));

    let violations = posterior_bound_violations(4096)?;
    out.push(CheckOutcome::new(
        "posterior lower bound",
        violations.is_empty(),
        format!("{} even N ≤ 4096 below 1 − 1/√(πN)", violations.len()),
    ));

    let amp = amplification_closed_form(200, 6, 12, 2024)?;
    out.push(CheckOutcome::new(
        "amplification closed form",
        amp.max_deviation < 1e-9 && amp.max_norm_drift < 1e-10 && amp.max_scaled_error <= 0.2 + 1e-12,
        format!(
            "max deviation {:.3e}, norm drift {:.3e}, max err/5 {:.4}",
            amp.max_deviation, amp.max_norm_drift, amp.max_scaled_error
        ),
    ));

    let u = unitarity(8, 10_000, 100, 77)?;
    out.push(CheckOutcome::new(
        "unitarity",
        u.max_norm_drift < 1e-10 && u.max_round_trip < 1e-10,
        format!(
            "norm drift {:.3e}, round trip {:.3e}",
            u.max_norm_drift, u.max_round_trip
        ),
    ));

    Ok(out)
}

//! Acceptance suite. Runs every exit criterion at its pinned tolerance and
//! prints one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use num_bigint::BigInt;
use num_rational::BigRational;
use qpac::experiments::{median, run_grid, ConceptSelection, ExperimentConfig, RunOutcome};
use qpac::learner::{posterior_confidence_exact, posterior_lower_bound};
use qpac::statevector::{Gate, StateVector};
use qpac::verify;
use qpac::{m_max, Anf, Schedule, TnnState, TruthTable};

const MASTER_SEED: u64 = 1;

struct Criterion {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn fractions_below_epsilon(outcomes: &[RunOutcome]) -> BTreeMap<(String, String), (usize, usize)> {
    let mut cells: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
    for o in outcomes {
        let cell = cells
            .entry((o.row.concept.clone(), o.row.schedule.to_string()))
            .or_default();
        cell.1 += 1;
        if o.row.final_error < o.row.epsilon {
            cell.0 += 1;
        }
    }
    cells
}

fn worst_fraction(cells: &BTreeMap<(String, String), (usize, usize)>) -> (f64, String) {
    cells
        .iter()
        .map(|((c, s), (ok, total))| (*ok as f64 / *total as f64, format!("{c}/{s}")))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is nonempty")
}

fn pac_n4(outcomes: &[RunOutcome]) -> Criterion {
    let cells = fractions_below_epsilon(outcomes);
    let (worst, at) = worst_fraction(&cells);
    let total_ok: usize = cells.values().map(|c| c.0).sum();
    Criterion {
        name: "PAC reproduction n=4 (16 parities, eps=0.1, delta=0.1, 50 reps, linear)",
        passed: cells.len() == 16 && outcomes.len() == 800 && worst >= 0.9,
        detail: format!("worst per-concept fraction {worst:.2} at {at}; aggregate {total_ok}/800 below eps"),
    }
}

fn complexity_n4(outcomes: &[RunOutcome]) -> Criterion {
    let mut worst_ratio = 0.0f64;
    let mut violations = 0;
    for o in outcomes {
        let r = &o.record;
        let bound = (r.m_max as u64 + 1) * r.n_shots as u64 * (1 + 2 * r.m_max as u64);
        for &calls in &r.calls_per_update {
            worst_ratio = worst_ratio.max(calls as f64 / bound as f64);
            if calls > bound {
                violations += 1;
            }
        }
        let traced: u64 = r.trace.iter().map(|t| r.n_shots as u64 * (1 + 2 * t.m as u64)).sum();
        if traced != r.oracle_calls {
            violations += 1;
        }
    }
    Criterion {
        name: "per-update oracle calls <= (m_max+1)*N*(1+2*m_max) on the n=4 grid",
        passed: violations == 0,
        detail: format!("{violations} violations; largest calls/bound ratio {worst_ratio:.3}"),
    }
}

fn mid_scale() -> Criterion {
    let mut cfg = ExperimentConfig::new(6, ConceptSelection::Random(4), 0.05, 0.05, MASTER_SEED);
    cfg.repetitions = 50;
    let outcomes = run_grid(&cfg).expect("grid runs");
    let cells = fractions_below_epsilon(&outcomes);
    let (worst, at) = worst_fraction(&cells);
    Criterion {
        name: "mid-scale n=6 (4 random parities, eps=0.05, delta=0.05, 50 reps)",
        passed: cells.len() == 4 && worst >= 0.95,
        detail: format!("worst per-concept fraction {worst:.2} at {at}"),
    }
}

fn schedules() -> Criterion {
    let mut cfg = ExperimentConfig::new(6, ConceptSelection::Random(2), 0.01, 0.1, MASTER_SEED);
    cfg.schedules = vec![Schedule::Linear, Schedule::PowersOfTwo];
    cfg.repetitions = 50;
    let outcomes = run_grid(&cfg).expect("grid runs");
    let cells = fractions_below_epsilon(&outcomes);
    let (worst, at) = worst_fraction(&cells);
    let med = |s: Schedule| {
        let u: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.row.schedule == s)
            .map(|o| o.row.updates as f64)
            .collect();
        median(&u).expect("nonempty")
    };
    let (lin, pow) = (med(Schedule::Linear), med(Schedule::PowersOfTwo));
    let ratio = if lin.min(pow) == 0.0 {
        if lin.max(pow) == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        lin.max(pow) / lin.min(pow)
    };
    Criterion {
        name: "schedule equivalence n=6 (eps=0.01, delta=0.1, 2 concepts, linear vs powers-of-two)",
        passed: cells.len() == 4 && worst >= 0.9 && ratio <= 2.0,
        detail: format!(
            "worst fraction {worst:.2} at {at}; median updates linear {lin} vs powers-of-two {pow} (ratio {ratio:.2})"
        ),
    }
}

fn m_max_values() -> Criterion {
    let got: Vec<usize> = [0.01, 0.05, 0.1]
        .iter()
        .map(|&e| m_max(e).expect("valid epsilon"))
        .collect();
    Criterion {
        name: "m_max values",
        passed: got == [9, 4, 3],
        detail: format!("eps 0.01, 0.05, 0.1 -> {got:?}"),
    }
}

fn posterior() -> Criterion {
    let (worst_n, dev) = verify::posterior_quadrature_deviation(64).expect("valid N");
    let exact2 = posterior_confidence_exact(2).expect("valid N");
    let eleven_16 = BigRational::new(BigInt::from(11), BigInt::from(16));
    let violations = verify::posterior_bound_violations(4096).expect("valid N");
    let tightest = (2..=4096usize)
        .step_by(2)
        .map(|n| qpac::posterior_confidence(n).unwrap() - posterior_lower_bound(n))
        .fold(f64::INFINITY, f64::min);
    Criterion {
        name: "posterior closed form vs quadrature, N=2 exact, lower bound to N=4096",
        passed: dev < 1e-10 && exact2 == eleven_16 && violations.is_empty(),
        detail: format!(
            "max deviation {dev:.2e} (N={worst_n}); P(2) = {exact2}; {} bound violations, min margin {tightest:.2e}",
            violations.len()
        ),
    }
}

fn amplification() -> Criterion {
    let r = verify::amplification_closed_form(200, 6, 12, 2024).expect("setups build");
    Criterion {
        name: "amplified probability matches sin^2((2m+1)asin(sqrt(err/5))) on 200 setups",
        passed: r.max_deviation < 1e-9 && r.max_scaled_error <= 0.2 + 1e-12,
        detail: format!(
            "max deviation {:.2e}; max err/5 {:.4}",
            r.max_deviation, r.max_scaled_error
        ),
    }
}

fn lemma() -> Criterion {
    let r = verify::lemma_grid(20001, &verify::LEMMA_EPSILONS).expect("valid grid");
    Criterion {
        name: "threshold lemma on 20001-point theta grid x 6 epsilons",
        passed: r.checked == 20001 * 6 && r.counterexamples.is_empty(),
        detail: format!("{} points, {} counterexamples", r.checked, r.counterexamples.len()),
    }
}

fn exactness() -> Criterion {
    let mut failures = Vec::new();

    // ANF <-> truth table, every function of arity <= 4
    for n in 0..=4usize {
        for code in 0u64..1 << (1 << n) {
            let t = TruthTable::from_fn(n, |x| (code >> x) & 1 == 1).unwrap();
            if Anf::from_truth_table(&t).to_truth_table() != t {
                failures.push(format!("round trip n={n} code={code:#x}"));
            }
        }
    }

    // TNN circuit vs ANF evaluation, every function of arity <= 4. The
    // network is a permutation of basis states, so one uniform superposition
    // checks every input at once.
    for n in 0..=4usize {
        for code in 0u64..1 << (1 << n) {
            let f = Anf::from_masks(n, (0..1u64 << n).filter(|u| (code >> u) & 1 == 1)).unwrap();
            let mut s = StateVector::new(n + 1).unwrap();
            for q in 0..n {
                s.apply_gate(&Gate::Ry {
                    qubit: q,
                    angle: std::f64::consts::FRAC_PI_2,
                })
                .unwrap();
            }
            s.apply_circuit(&TnnState::from_anf(&f).as_circuit()).unwrap();
            let weight = 1.0 / (1u64 << n) as f64;
            for x in 0..1u64 << n {
                let fx = f.evaluate_bits(x) as u64;
                let hit = s.amplitudes()[(x | (fx << n)) as usize].norm_sqr();
                let miss = s.amplitudes()[(x | ((1 - fx) << n)) as usize].norm_sqr();
                if (hit - weight).abs() > 1e-12 || miss > 1e-24 {
                    failures.push(format!("tnn n={n} code={code:#x} x={x}"));
                }
            }
        }
    }

    let u = verify::unitarity(8, 10_000, 100, 77).unwrap();
    if u.max_norm_drift >= 1e-10 {
        failures.push(format!("norm drift {:.2e}", u.max_norm_drift));
    }
    if u.max_round_trip >= 1e-10 {
        failures.push(format!("round trip {:.2e}", u.max_round_trip));
    }
    Criterion {
        name: "exactness: ANF<->table, TNN vs ANF (n<=4 exhaustive), norm drift, inverse round trip",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "norm drift {:.2e} over 1e4 gates; round trip {:.2e}",
                u.max_norm_drift, u.max_round_trip
            )
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
    }
}

fn main() -> ExitCode {
    let mut cfg = ExperimentConfig::new(4, ConceptSelection::All, 0.1, 0.1, MASTER_SEED);
    cfg.repetitions = 50;
    let n4 = run_grid(&cfg).expect("n=4 grid runs");

    let criteria = vec![
        pac_n4(&n4),
        mid_scale(),
        schedules(),
        m_max_values(),
        posterior(),
        amplification(),
        lemma(),
        exactness(),
        complexity_n4(&n4),
    ];

    let mut failed = 0;
    for c in &criteria {
        println!(
            "[{}] {} :: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        failed += usize::from(!c.passed);
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails for a reason other than a property that
//! is false as stated.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rta_core::adversary::{build_sequence, default_sequence, fuzz_instance, greedy_trap, run_adversary};
use rta_core::engine::{AlgorithmKind, FirstFit, Rta};
use rta_core::instance::Instance;
use rta_core::math::verify::{verify_boundary_conditions, ValidationReport};
use rta_core::math::{ratio, threshold_integral, CONSTANTS};
use rta_core::opt::exact_opt;
use rta_core::report::{run_instance, transcript_to_jsonl, DEFAULT_SLACK};

use common::{audited_rta, naive_opt};

/// The one property that cannot hold as stated: T(x, y) rises in y for
/// y < 1/4, e.g. T(0.45, phi) < T(0.45, 0.23).
const FALSE_AS_STATED: &str = "adjustment_nonincreasing_in_second";

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the only failures are ones that cannot be met as stated.
    known_failure: Option<&'static str>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            detail,
            known_failure: None,
        }
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn criterion_1() -> Outcome {
    let c = *CONSTANTS;
    let pass = c.ratio > 0.59061
        && c.ratio < 0.59062
        && (c.xi_c - 0.0372).abs() <= 5e-5
        && (c.phi - 0.2191).abs() <= 5e-5;
    Outcome::new(
        pass,
        format!("R = {:.8}, xi_c = {:.8}, phi = {:.8}", c.ratio, c.xi_c, c.phi),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let reports = verify_boundary_conditions(1e-4).expect("valid grid step");
    let by_id = |id: &str| -> &ValidationReport {
        reports
            .iter()
            .find(|r| r.property_id == id)
            .unwrap_or_else(|| panic!("missing report {id}"))
    };
    let required = [
        // threshold integral identities and Riemann sums
        "threshold_inverse_identity",
        "integral_over_threshold",
        "riemann_sum_bracket",
        // capped and excess gain
        "capped_gain_closed_form",
        "excess_gain_closed_form",
        "capped_plus_excess",
        "integral_plus_rectangle",
        // marking budget conditions, items 1 to 7
        "budget_area_nonincreasing",
        "pile_plus_area",
        "small_stack_level",
        "two_thirds_with_budget",
        "stack_with_large_marked",
        "tight_pile_with_large_marked",
        "doubled_pile_with_large_marked",
        // adjustment monotonicity
        "adjustment_nonincreasing_in_second",
        // two-thirds identity and linear floor
        "capped_gain_at_two_thirds",
        "capped_gain_linear_floor",
    ];
    let mut failed: Vec<String> = required
        .iter()
        .map(|id| by_id(id))
        .filter(|r| !r.pass)
        .map(|r| format!("{} (margin {:.3e})", r.property_id, r.min_margin))
        .collect();
    for (id, floor) in [
        ("small_stack_level_waypoint", 0.593),
        ("stack_with_large_marked_waypoint_left", 0.5997),
        ("stack_with_large_marked_waypoint_right", 0.5934),
    ] {
        let v = by_id(id).min_value.expect("waypoint value");
        if !(v > floor) {
            failed.push(format!("{id} = {v} not above {floor}"));
        }
    }
    if let Err(e) = within(Duration::from_secs(60), start) {
        failed.push(e);
    }
    let others_failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass && !required.contains(&r.property_id.as_str()))
        .map(|r| r.property_id.as_str())
        .collect();
    let only_false_claim = failed.len() == 1
        && failed[0].starts_with(&format!("{FALSE_AS_STATED} "))
        && others_failing.is_empty();
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "{} reports in {:?}; failing required: {:?}; failing auxiliary: {:?}",
            reports.len(),
            start.elapsed(),
            failed,
            others_failing
        ),
        known_failure: only_false_claim.then_some(
            "T(x, y) is not non-increasing in y below 1/4; every other property and waypoint passes",
        ),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let r = ratio();
    let mut worst = (f64::INFINITY, 0);
    for n in 3..=2000usize {
        let (u, _) = default_sequence(n).unwrap().theoretical_u();
        let margin = r - 1.0 / (52.0 * n as f64) - u;
        if margin < worst.0 {
            worst = (margin, n);
        }
    }
    let tiny: Vec<f64> = [1usize, 2]
        .iter()
        .map(|&n| default_sequence(n).unwrap().theoretical_u_unperturbed().0)
        .collect();
    let timely = within(Duration::from_secs(60), start);
    Outcome::new(
        worst.0 >= 0.0 && tiny.iter().all(|&u| u == 0.5) && timely.is_ok(),
        format!(
            "min margin {:.3e} at n = {}; U(1), U(2) without perturbation = {:?}",
            worst.0, worst.1, tiny
        ),
    )
}

fn criterion_4() -> Outcome {
    let r = ratio();
    let mut worst_prefix = f64::INFINITY;
    let mut worst_total = f64::INFINITY;
    for n in [3usize, 10, 100, 1000] {
        let seq = build_sequence(n, 1.0 / (8.0 * n as f64), 1e-12).unwrap();
        let prefix = seq.prefix_gains();
        for (j, &g) in prefix.iter().enumerate() {
            worst_prefix = worst_prefix.min(threshold_integral(j as f64 / n as f64).unwrap() - g);
        }
        worst_total = worst_total.min(r - 1.0 / (52.0 * n as f64) - prefix[n]);
    }
    // the prefix bound is an equality on the flat part of the threshold
    Outcome::new(
        worst_prefix >= -1e-12 && worst_total >= 0.0,
        format!("min prefix margin {worst_prefix:.3e}, min total margin {worst_total:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let r = ratio();
    let mut ratios = Vec::new();
    let mut ok = true;
    let mut worst_c = 0.0f64;
    for n in [100usize, 1000, 10000] {
        let seq = default_sequence(n).unwrap();
        let t = run_adversary(&seq, &mut Rta::new(n).unwrap()).unwrap();
        let nf = n as f64;
        ok &= t.ratio <= r - 1.0 / (52.0 * nf) + 1.0 / (64.0 * nf * nf);
        worst_c = worst_c.max((r - t.ratio) * nf);
        ratios.push(t.ratio);
    }
    ok &= ratios.windows(2).all(|w| w[0] <= w[1]);
    ok &= ratios[2] >= 0.58;
    ok &= within(Duration::from_secs(120), start).is_ok();
    Outcome::new(
        ok,
        format!("ratios {ratios:?}; measured c = max n (R - ratio) = {worst_c:.4}"),
    )
}

fn criterion_6() -> Outcome {
    let inst = greedy_trap(100, 0.001).unwrap();
    let (_, rep) = run_instance(AlgorithmKind::FirstFit, &inst, DEFAULT_SLACK).unwrap();
    let r = rep.ratio.unwrap();
    Outcome::new(
        (r - 0.5).abs() <= 0.01,
        format!("FirstFit ratio {r:.6}"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dominance_failures = 0;
    let mut mismatches = 0;
    let mut compared = 0;
    for k in 0..500u64 {
        let n = rng.random_range(1..=3usize);
        let len = rng.random_range(0..=14usize);
        let mix = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() + 0.05];
        let inst = fuzz_instance(n, len, mix, k).unwrap();
        let opt = exact_opt(&inst.items, n, None).unwrap();
        assert!(opt.exact);
        let kinds: &[AlgorithmKind] = if n >= 2 {
            &[AlgorithmKind::Rta, AlgorithmKind::FirstFit]
        } else {
            &[AlgorithmKind::FirstFit]
        };
        for &kind in kinds {
            let (out, _) = run_instance(kind, &inst, DEFAULT_SLACK).unwrap();
            if out.snapshot.total_load() > opt.value + 1e-9 {
                dominance_failures += 1;
            }
        }
        if len <= 8 {
            compared += 1;
            if (naive_opt(&inst.items, n) - opt.value).abs() > 1e-9 {
                mismatches += 1;
            }
        }
    }
    let timely = within(Duration::from_secs(300), start);
    Outcome::new(
        dominance_failures == 0 && mismatches == 0 && timely.is_ok(),
        format!(
            "500 instances, {dominance_failures} dominance failures, {mismatches} mismatches in {compared} exhaustive comparisons"
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut violations = Vec::new();
    let mut lemma_failures = Vec::new();
    let mut worst_terminal = f64::INFINITY;
    for n in [10usize, 100] {
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32));
            let len = rng.random_range(0..=20 * n);
            let mix = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() + 0.05];
            let inst = fuzz_instance(n, len, mix, seed).unwrap();
            let (_, bad) = audited_rta(n, &inst.items);
            violations.extend(bad.into_iter().map(|b| format!("n={n} seed={seed}: {b}")));
            let (_, rep) = run_instance(AlgorithmKind::Rta, &inst, DEFAULT_SLACK).unwrap();
            for c in &rep.lemma_checks {
                if !c.holds {
                    lemma_failures.push(format!("n={n} seed={seed}: {} margin {:?}", c.id, c.margin));
                }
                if c.id == "terminal_gain" {
                    if let Some(m) = c.margin {
                        // margin against R - 3/n, rescaled to the constant c in R - c/n
                        worst_terminal = worst_terminal.min(m * n as f64 - DEFAULT_SLACK);
                    }
                }
            }
        }
    }
    let timely = within(Duration::from_secs(600), start);
    violations.truncate(5);
    lemma_failures.truncate(5);
    Outcome::new(
        violations.is_empty() && lemma_failures.is_empty() && timely.is_ok(),
        format!(
            "2000 streams in {:?}; violations {violations:?}; check failures {lemma_failures:?}; terminal gain >= R - c/n with c = {:.3}",
            start.elapsed(),
            -worst_terminal
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut same = true;
    for seed in 0..20u64 {
        let a = fuzz_instance(50, 600, [1.0, 1.0, 1.0], seed).unwrap();
        let b = fuzz_instance(50, 600, [1.0, 1.0, 1.0], seed).unwrap();
        same &= a.to_json() == b.to_json();
        for kind in [AlgorithmKind::Rta, AlgorithmKind::FirstFit] {
            let (oa, ra) = run_instance(kind, &a, DEFAULT_SLACK).unwrap();
            let (ob, rb) = run_instance(kind, &b, DEFAULT_SLACK).unwrap();
            same &= transcript_to_jsonl(&oa.records) == transcript_to_jsonl(&ob.records);
            same &= serde_json::to_string(&ra).unwrap() == serde_json::to_string(&rb).unwrap();
        }
    }
    let seq = default_sequence(500).unwrap();
    let d1 = run_adversary(&seq, &mut Rta::new(500).unwrap()).unwrap();
    let d2 = run_adversary(&seq, &mut Rta::new(500).unwrap()).unwrap();
    same &= serde_json::to_string(&d1).unwrap() == serde_json::to_string(&d2).unwrap();
    let f1 = run_adversary(&seq, &mut FirstFit::new(500).unwrap()).unwrap();
    let f2 = run_adversary(&seq, &mut FirstFit::new(500).unwrap()).unwrap();
    same &= f1 == f2;
    let inst = Instance::new(4, vec![0.3; 10]);
    same &= run_instance(AlgorithmKind::Rta, &inst, DEFAULT_SLACK).unwrap().1
        == run_instance(AlgorithmKind::Rta, &inst, DEFAULT_SLACK).unwrap().1;
    Outcome::new(
        same,
        "20 fuzz seeds x 2 algorithms, adversary duels at n = 500".into(),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut unexpected = 0;
    for (id, check) in criteria {
        let o = check();
        println!("criterion {id}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        match (o.pass, o.known_failure) {
            (false, Some(why)) => println!("criterion {id}: unattainable as stated: {why}"),
            (false, None) => unexpected += 1,
            _ => {}
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected acceptance result(s)");
        std::process::exit(1);
    }
}

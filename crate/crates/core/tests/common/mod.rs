#![allow(dead_code)]

use rta_core::engine::{Label, OnlineAlgorithm, Rta};
use rta_core::item::classify;
use rta_core::math::threshold;
use rta_core::report::{audit, run_stream, RunOutcome};

/// Optimum by trying every item -> {dropped, bin 0..n} map. No pruning.
pub fn naive_opt(sizes: &[f64], n: usize) -> f64 {
    let m = sizes.len();
    let choices = n + 1;
    let total = choices.pow(m as u32);
    let mut best = 0.0f64;
    let mut loads = vec![0.0; n];
    for code in 0..total {
        loads.iter_mut().for_each(|l| *l = 0.0);
        let mut c = code;
        let mut value = 0.0;
        let mut feasible = true;
        for &s in sizes {
            let pick = c % choices;
            c /= choices;
            if pick > 0 {
                loads[pick - 1] += s;
                if loads[pick - 1] > 1.0 {
                    feasible = false;
                    break;
                }
                value += s;
            }
        }
        if feasible && value > best {
            best = value;
        }
    }
    best
}

/// Runs RTA item by item and checks, after every offer, everything that must
/// hold of a single step. Returns the outcome and every violation found.
pub fn audited_rta(n: usize, items: &[f64]) -> (RunOutcome, Vec<String>) {
    let mut rta = Rta::new(n).unwrap();
    let mut bad = Vec::new();
    let mut before = rta.snapshot();
    let mut large = 0usize;
    let mut tight: Option<f64> = None;
    for (i, &size) in items.iter().enumerate() {
        if rta.is_terminated() {
            assert!(rta.offer(size).is_err(), "offer after termination must fail");
            break;
        }
        let had_empty = before.count(Label::E) > 0;
        let d = rta.offer(size).unwrap();
        let after = rta.snapshot();
        for v in audit(&after) {
            bad.push(format!("item {i}: {v}"));
        }
        for (b0, b1) in before.bins.iter().zip(&after.bins) {
            let (l0, l1) = (b0.label.unwrap(), b1.label.unwrap());
            if l0 != l1 && !l0.may_become(l1) {
                bad.push(format!("item {i}: bin {} moved {l0:?} -> {l1:?}", b0.index));
            }
        }
        let class = classify(size).unwrap();
        if class.is_large() && d.accepted() {
            large += 1;
            let need = threshold((large as f64 / n as f64).min(1.0)).unwrap();
            if size < need {
                bad.push(format!("item {i}: large #{large} of size {size} below {need}"));
            }
        }
        if !class.is_large() && had_empty && !d.accepted() {
            bad.push(format!("item {i}: rejected {size} while an empty bin existed"));
        }
        let now = after.marked.as_ref().unwrap().min_tight();
        match (tight, now) {
            (Some(t), None) => bad.push(format!("item {i}: tight item {t} stopped being tight")),
            (Some(t), Some(m)) if m > t => bad.push(format!("item {i}: mt rose {t} -> {m}")),
            _ => {}
        }
        tight = now.or(tight);
        before = after;
    }
    let outcome = run_stream(&mut Rta::new(n).unwrap(), items).unwrap();
    (outcome, bad)
}

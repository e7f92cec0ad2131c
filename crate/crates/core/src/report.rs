//! Running streams, transcripts, and end-of-run accounting.

use serde::{Deserialize, Serialize};

use crate::engine::{
    Action, AlgorithmKind, Fractions, Gains, Label, OnlineAlgorithm, SideEffect, Snapshot,
};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::item::{classify_unchecked, ItemClass, MediumKind};
use crate::math::{phi, ratio, raw};
use crate::opt::{exact_opt, upper_bound, EXACT_CHECK_MAX_BINS, EXACT_CHECK_MAX_ITEMS};

/// Default slack constant for the end-of-run checks, in units of `1/n`.
pub const DEFAULT_SLACK: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Accept,
    Reject,
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub index: usize,
    pub size: f64,
    pub class: String,
    pub action: ActionKind,
    pub bin: Option<usize>,
    pub label_before: Option<Label>,
    pub label_after: Option<Label>,
    pub side_effects: Vec<SideEffect>,
}

pub fn transcript_to_jsonl(records: &[TranscriptRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

pub fn transcript_from_jsonl(text: &str) -> Result<Vec<TranscriptRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Transcript {
                index: i,
                reason: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<TranscriptRecord>,
    pub snapshot: Snapshot,
}

/// Feeds `items` in order until the stream ends or the algorithm stops.
pub fn run_stream(alg: &mut dyn OnlineAlgorithm, items: &[f64]) -> Result<RunOutcome> {
    let mut records = Vec::with_capacity(items.len());
    for (index, &size) in items.iter().enumerate() {
        if alg.is_terminated() {
            break;
        }
        let d = alg.offer(size).map_err(|e| match e {
            Error::ItemSize { size, .. } => Error::ItemSize { index, size },
            other => other,
        })?;
        let (label_before, label_after) = d.labels.unzip();
        records.push(TranscriptRecord {
            index,
            size,
            class: classify_unchecked(size).name().to_string(),
            action: match d.action {
                Action::Accept { .. } => ActionKind::Accept,
                Action::Reject => ActionKind::Reject,
            },
            bin: d.bin(),
            label_before,
            label_after,
            side_effects: d.side_effects,
        });
    }
    Ok(RunOutcome {
        records,
        snapshot: alg.snapshot(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Smallest tight marked size.
    pub mt_d: Option<f64>,
    pub level_star: f64,
    /// `min(1 - min(MS), 1/2 + phi)`; absent without MS-bins.
    pub thr_m: Option<f64>,
    pub t_star: f64,
    pub min_ms: Option<f64>,
    pub min_mstar: Option<f64>,
}

/// Diagnostic quantities recomputed from a snapshot; `None` for algorithms
/// without a marked set.
pub fn diagnostics(snap: &Snapshot) -> Option<Diagnostics> {
    let marked = snap.marked.as_ref()?;
    let mt_d = marked.min_tight();
    let has_sstar = snap.count(Label::SStar) > 0;
    let level_star = match mt_d {
        None => 1.0,
        Some(mt) if has_sstar => raw::pile(mt).min(1.0 - phi()),
        Some(mt) => raw::pile(mt),
    };
    let min_ms = snap.min_size(|l| l == Label::MS);
    let min_mstar = snap.min_size(Label::is_medium_stack);
    let thr_m = min_ms.map(|m| (1.0 - m).min(0.5 + phi()));
    let t_star = match (min_ms, mt_d) {
        (Some(m), Some(mt)) if m > mt.max(1.0 / 3.0) => raw::tight_adjustment(m, mt),
        _ => 0.0,
    };
    Some(Diagnostics {
        mt_d,
        level_star,
        thr_m,
        t_star,
        min_ms,
        min_mstar,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub id: String,
    /// False when the precondition does not hold; such checks pass vacuously.
    pub applicable: bool,
    pub holds: bool,
    /// Checked value minus bound; absent for vacuous checks.
    pub margin: Option<f64>,
}

impl LemmaCheck {
    fn vacuous(id: &str) -> Self {
        LemmaCheck {
            id: id.into(),
            applicable: false,
            holds: true,
            margin: None,
        }
    }

    fn at_least(id: &str, value: f64, bound: f64) -> Self {
        LemmaCheck {
            id: id.into(),
            applicable: true,
            holds: value >= bound,
            margin: Some(value - bound),
        }
    }
}

/// End-of-run accounting checks for RTA, each with slack `slack / n`.
pub fn lemma_checks(snap: &Snapshot, records: &[TranscriptRecord], stream_len: usize, slack: f64) -> Vec<LemmaCheck> {
    let Some(fr) = snap.fractions() else {
        return Vec::new();
    };
    let g = snap.gains();
    let n = snap.n as f64;
    let c = slack / n;
    let mut out = vec![LemmaCheck::at_least(
        "large_gain_vs_integral",
        g.large,
        raw::threshold_integral(fr.lplus.min(1.0)) - c,
    )];
    match snap.min_size(|l| l == Label::MS) {
        Some(m) => {
            out.push(LemmaCheck::at_least("marked_gain_vs_min", g.ms, m * fr.ms - c));
            out.push(LemmaCheck::at_least(
                "marked_fraction_within_budget",
                raw::marking_budget(m) + c,
                fr.ms,
            ));
        }
        None => {
            out.push(LemmaCheck::vacuous("marked_gain_vs_min"));
            out.push(LemmaCheck::vacuous("marked_fraction_within_budget"));
        }
    }
    if snap.count(Label::E) == 0 {
        // integer counts: the bound is met with equality when an A-bin is left
        let labelled = snap.bins.iter().filter(|b| b.label.is_some_and(|l| l != Label::A)).count();
        out.push(LemmaCheck::at_least(
            "labelled_fraction_sum",
            labelled as f64 / n,
            (snap.n - 1) as f64 / n,
        ));
        out.push(LemmaCheck::at_least("terminal_gain", g.total, ratio() - c));
    } else {
        out.push(LemmaCheck::vacuous("labelled_fraction_sum"));
        out.push(LemmaCheck::vacuous("terminal_gain"));
    }
    if snap.count(Label::E) > 0 && fr.lplus <= ratio() - 1.0 / n {
        let rejected = records.iter().filter(|r| r.action == ActionKind::Reject).count();
        let unseen = stream_len - records.len();
        out.push(LemmaCheck::at_least(
            "accepts_everything_below_ratio",
            -((rejected + unseen) as f64),
            0.0,
        ));
    } else {
        out.push(LemmaCheck::vacuous("accepts_everything_below_ratio"));
    }
    out
}

/// Structural problems in a labelled snapshot: capacity, label contents,
/// single auxiliary bin, marked set placement and budget, termination flag.
pub fn audit(snap: &Snapshot) -> Vec<String> {
    let mut bad = Vec::new();
    let ph = phi();
    let mut aux = 0;
    let mut in_ms = Vec::new();
    let mut in_lplus = Vec::new();
    for b in &snap.bins {
        let i = b.index;
        let sum: f64 = b.contents.iter().map(|it| it.size).sum();
        if b.load > 1.0 {
            bad.push(format!("bin {i}: load {} over capacity", b.load));
        }
        if (sum - b.load).abs() > 1e-9 {
            bad.push(format!("bin {i}: load {} != content sum {sum}", b.load));
        }
        for it in b.contents.iter().filter(|it| it.is_merged()) {
            if !(it.size >= ph && it.size < 2.0 * ph) {
                bad.push(format!("bin {i}: merged item of size {}", it.size));
            }
        }
        let classes: Vec<ItemClass> = b.contents.iter().map(|it| it.class()).collect();
        let all = |p: fn(ItemClass) -> bool| classes.iter().all(|&c| p(c));
        let Some(label) = b.label else { continue };
        let ok = match label {
            Label::E => classes.is_empty(),
            Label::A => {
                aux += 1;
                !classes.is_empty() && all(ItemClass::is_small) && b.load < ph
            }
            Label::SStar => !classes.is_empty() && all(ItemClass::is_small),
            Label::MS => {
                in_ms.extend(b.contents.iter().map(|it| it.size));
                classes.len() == 1 && classes[0].is_medium()
            }
            Label::Mt2 | Label::Mt3 | Label::Mt4 => {
                let kind = match label {
                    Label::Mt2 => MediumKind::Mt2,
                    Label::Mt3 => MediumKind::Mt3,
                    _ => MediumKind::Mt4,
                };
                !classes.is_empty() && classes.iter().all(|&c| c == ItemClass::Medium(kind))
            }
            Label::LPlus => {
                in_lplus.extend(
                    b.contents
                        .iter()
                        .filter(|it| it.class().is_medium())
                        .map(|it| it.size),
                );
                classes.iter().filter(|c| c.is_large()).count() == 1
            }
        };
        if !ok {
            bad.push(format!("bin {i}: contents {classes:?} break label {label:?}"));
        }
    }
    if aux > 1 {
        bad.push(format!("{aux} auxiliary bins"));
    }
    if snap.terminated != (snap.count(Label::E) == 0) {
        bad.push(format!(
            "terminated = {} with {} empty bins",
            snap.terminated,
            snap.count(Label::E)
        ));
    }
    if let Some(marked) = &snap.marked {
        if !marked.is_dominated_with(None) {
            bad.push("marked set exceeds its budget".into());
        }
        // every MS item is marked, and every marked item sits in MS or Lplus
        let mut pool = marked.sizes().to_vec();
        let take = |s: f64, pool: &mut Vec<f64>| match pool.iter().position(|&x| x == s) {
            Some(k) => {
                pool.swap_remove(k);
                true
            }
            None => false,
        };
        for &s in &in_ms {
            if !take(s, &mut pool) {
                bad.push(format!("MS item {s} is not marked"));
            }
        }
        let mut extra = in_lplus.clone();
        pool.retain(|&s| !take(s, &mut extra));
        if !pool.is_empty() {
            bad.push(format!("marked sizes {pool:?} not found in MS or Lplus bins"));
        }
    }
    bad
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptSource {
    Certificate,
    Oracle,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptReference {
    pub value: f64,
    pub source: OptSource,
}

/// Best available optimum: the instance certificate, else the exact oracle on
/// small instances, else the trivial upper bound.
pub fn opt_reference(inst: &Instance) -> Result<OptReference> {
    if let Some(value) = inst.opt_certificate {
        return Ok(OptReference {
            value,
            source: OptSource::Certificate,
        });
    }
    if inst.items.len() <= EXACT_CHECK_MAX_ITEMS && inst.n <= EXACT_CHECK_MAX_BINS {
        let r = exact_opt(&inst.items, inst.n, None)?;
        if r.exact {
            return Ok(OptReference {
                value: r.value,
                source: OptSource::Oracle,
            });
        }
    }
    Ok(OptReference {
        value: upper_bound(&inst.items, inst.n),
        source: OptSource::UpperBound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub n: usize,
    pub items: usize,
    pub offered: usize,
    pub accepted: usize,
    pub terminated: bool,
    pub gains: Gains,
    pub fractions: Option<Fractions>,
    pub diagnostics: Option<Diagnostics>,
    pub lemma_checks: Vec<LemmaCheck>,
    pub violations: Vec<String>,
    pub opt: Option<OptReference>,
    /// Accepted load over the optimum.
    pub ratio: Option<f64>,
}

impl RunReport {
    /// Every applicable check holds and the audit is clean.
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.lemma_checks.iter().all(|c| c.holds)
    }
}

pub fn build_report(
    outcome: &RunOutcome,
    stream_len: usize,
    opt: Option<OptReference>,
    slack: f64,
) -> RunReport {
    let snap = &outcome.snapshot;
    let labelled = snap.fractions().is_some();
    let load = snap.total_load();
    let ratio = opt.as_ref().map(|o| if o.value > 0.0 { load / o.value } else { 1.0 });
    RunReport {
        algorithm: snap.algorithm.clone(),
        n: snap.n,
        items: stream_len,
        offered: outcome.records.len(),
        accepted: outcome
            .records
            .iter()
            .filter(|r| r.action == ActionKind::Accept)
            .count(),
        terminated: snap.terminated,
        gains: snap.gains(),
        fractions: snap.fractions(),
        diagnostics: diagnostics(snap),
        lemma_checks: lemma_checks(snap, &outcome.records, stream_len, slack),
        violations: if labelled { audit(snap) } else { Vec::new() },
        opt,
        ratio,
    }
}

/// Runs `kind` on an instance and builds its report.
pub fn run_instance(kind: AlgorithmKind, inst: &Instance, slack: f64) -> Result<(RunOutcome, RunReport)> {
    inst.validate()?;
    let mut alg = kind.build(inst.n)?;
    let outcome = run_stream(alg.as_mut(), &inst.items)?;
    let report = build_report(&outcome, inst.items.len(), Some(opt_reference(inst)?), slack);
    Ok((outcome, report))
}

/// Re-runs the sizes of a stored transcript and rebuilds the report. Errors
/// at the first record whose decision differs from the stored one.
pub fn replay(
    kind: AlgorithmKind,
    inst: &Instance,
    stored: &[TranscriptRecord],
    slack: f64,
) -> Result<RunReport> {
    let (outcome, report) = run_instance(kind, inst, slack)?;
    if outcome.records.len() != stored.len() {
        return Err(Error::Transcript {
            index: outcome.records.len().min(stored.len()),
            reason: format!(
                "stored transcript has {} records, replay produced {}",
                stored.len(),
                outcome.records.len()
            ),
        });
    }
    if let Some((got, want)) = outcome.records.iter().zip(stored).find(|(a, b)| a != b) {
        return Err(Error::Transcript {
            index: want.index,
            reason: format!("replay decided {got:?}, stored {want:?}"),
        });
    }
    Ok(report)
}

/// Fixed CSV columns for ratio curves.
pub const CSV_HEADER: &str = "n,alg,gain,opt,ratio,b_L,b_MS,b_Mstar,b_Sstar,mt_D,level_star,thr_M,T_star";

/// One CSV row. `gain` and `opt` are normalized by `n`.
pub fn csv_row(alg: &str, snap: &Snapshot, opt_load: f64) -> String {
    let n = snap.n as f64;
    let gain = snap.total_load() / n;
    let opt = opt_load / n;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let fr = snap.fractions();
    let d = diagnostics(snap);
    [
        snap.n.to_string(),
        alg.to_string(),
        gain.to_string(),
        opt.to_string(),
        fmt((opt > 0.0).then(|| gain / opt)),
        fmt(fr.map(|f| f.lplus)),
        fmt(fr.map(|f| f.ms)),
        fmt(fr.map(|f| f.mstar)),
        fmt(fr.map(|f| f.sstar)),
        fmt(d.and_then(|d| d.mt_d)),
        fmt(d.map(|d| d.level_star)),
        fmt(d.and_then(|d| d.thr_m)),
        fmt(d.map(|d| d.t_star)),
    ]
    .join(",")
}

use std::collections::BTreeSet;

use super::{Action, BinSnapshot, Decision, Label, MarkedSet, OnlineAlgorithm, SideEffect, Snapshot};
use crate::error::{Error, Result};
use crate::item::{check_size, classify_unchecked, Item, ItemClass, MediumKind, Origin};
use crate::math::{phi, raw};

#[derive(Debug, Clone)]
struct RtaBin {
    label: Label,
    contents: Vec<Item>,
    load: f64,
}

impl RtaBin {
    fn fits(&self, size: f64) -> bool {
        self.load + size <= 1.0
    }
}

/// Rising Threshold Algorithm.
///
/// Large items are accepted only while they meet a threshold that rises with
/// the number of large items already held. Medium items are marked (kept alone
/// in their own bin, waiting for a large partner) as long as the marked set
/// stays within the marking budget, and stacked otherwise. Small items go on
/// top of large items, into small stacks, or into the single auxiliary bin,
/// which is merged into one medium item once it reaches `phi`.
///
/// Ties between candidate bins are broken by lowest index. The run stops as
/// soon as no empty bin is left.
#[derive(Debug, Clone)]
pub struct Rta {
    n: usize,
    bins: Vec<RtaBin>,
    // Bin indices per label, ordered, so "lowest index with room" is a scan
    // over one label only.
    by_label: [BTreeSet<usize>; 8],
    marked: MarkedSet,
    large: usize,
    offered: usize,
    terminated: bool,
}

impl Rta {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!(
                "RTA needs at least 2 bins, got {n}"
            )));
        }
        let mut by_label: [BTreeSet<usize>; 8] = Default::default();
        by_label[Label::E.slot()] = (0..n).collect();
        Ok(Rta {
            n,
            bins: vec![
                RtaBin {
                    label: Label::E,
                    contents: Vec::new(),
                    load: 0.0,
                };
                n
            ],
            by_label,
            marked: MarkedSet::new(n),
            large: 0,
            offered: 0,
            terminated: false,
        })
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.marked
    }

    /// Size a large item must reach to be accepted right now.
    pub fn large_threshold(&self) -> f64 {
        raw::threshold((self.large + 1) as f64 / self.n as f64)
    }

    fn first_with_room(&self, label: Label, size: f64) -> Option<usize> {
        self.by_label[label.slot()]
            .iter()
            .copied()
            .find(|&b| self.bins[b].fits(size))
    }

    fn first_empty(&self) -> usize {
        *self.by_label[Label::E.slot()]
            .first()
            .expect("a running RTA always has an empty bin")
    }

    fn relabel(&mut self, bin: usize, to: Label) {
        let from = self.bins[bin].label;
        debug_assert!(from.may_become(to) || from == to);
        if from != to {
            self.by_label[from.slot()].remove(&bin);
            self.by_label[to.slot()].insert(bin);
            self.bins[bin].label = to;
        }
    }

    /// Puts `item` into `bin`, relabelling it to `to`.
    fn place(&mut self, bin: usize, item: Item, to: Label) -> Decision {
        let before = self.bins[bin].label;
        self.bins[bin].load += item.size;
        self.bins[bin].contents.push(item);
        self.relabel(bin, to);
        Decision {
            action: Action::Accept { bin },
            side_effects: Vec::new(),
            labels: Some((before, to)),
        }
    }

    fn offer_large(&mut self, item: Item) -> Decision {
        if item.size < self.large_threshold() {
            return Decision::reject();
        }
        self.large += 1;
        match self.first_with_room(Label::MS, item.size) {
            Some(bin) => self.place(bin, item, Label::LPlus),
            None => {
                let bin = self.first_empty();
                self.place(bin, item, Label::LPlus)
            }
        }
    }

    fn offer_medium(&mut self, item: Item, kind: MediumKind) -> Decision {
        if let Some(bin) = self.first_with_room(Label::LPlus, item.size) {
            return self.place(bin, item, Label::LPlus);
        }
        if self.marked.is_dominated_with(Some(item.size)) {
            self.marked.insert(item.size);
            let bin = self.first_empty();
            let mut d = self.place(bin, item, Label::MS);
            d.side_effects.push(SideEffect::Marked);
            return d;
        }
        let stack = Label::stack(kind);
        let bin = self
            .first_with_room(stack, item.size)
            .unwrap_or_else(|| self.first_empty());
        self.place(bin, item, stack)
    }

    fn offer_small(&mut self, item: Item) -> Decision {
        if let Some(bin) = self.first_with_room(Label::LPlus, item.size) {
            return self.place(bin, item, Label::LPlus);
        }
        if let Some(bin) = self.first_with_room(Label::SStar, item.size) {
            return self.place(bin, item, Label::SStar);
        }
        let Some(&aux) = self.by_label[Label::A.slot()].first() else {
            let bin = self.first_empty();
            return self.place(bin, item, Label::A);
        };
        let mut d = self.place(aux, item, Label::A);
        let load = self.bins[aux].load;
        if load >= phi() {
            if self.marked.is_dominated_with(Some(load)) {
                let constituents = self.bins[aux]
                    .contents
                    .drain(..)
                    .flat_map(|it| it.stream_indices())
                    .collect();
                self.bins[aux].contents.push(Item {
                    size: load,
                    origin: Origin::Merged { constituents },
                });
                self.marked.insert(load);
                self.relabel(aux, Label::MS);
                d.side_effects.push(SideEffect::MergedAbin);
                d.side_effects.push(SideEffect::Marked);
                d.labels = Some((Label::A, Label::MS));
            } else {
                self.relabel(aux, Label::SStar);
                d.side_effects.push(SideEffect::RelabeledAtoSstar);
                d.labels = Some((Label::A, Label::SStar));
            }
        }
        d
    }
}

impl OnlineAlgorithm for Rta {
    fn name(&self) -> &'static str {
        "rta"
    }

    fn bin_count(&self) -> usize {
        self.n
    }

    fn offer(&mut self, size: f64) -> Result<Decision> {
        if self.terminated {
            return Err(Error::Usage("offer after RTA terminated".into()));
        }
        check_size(self.offered, size)?;
        let item = Item::stream(self.offered, size);
        self.offered += 1;
        let mut decision = match classify_unchecked(size) {
            ItemClass::Large => self.offer_large(item),
            ItemClass::Medium(kind) => self.offer_medium(item, kind),
            ItemClass::Small => self.offer_small(item),
        };
        if self.by_label[Label::E.slot()].is_empty() {
            self.terminated = true;
            decision.side_effects.push(SideEffect::Terminated);
        }
        Ok(decision)
    }

    fn is_terminated(&self) -> bool {
        self.terminated
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            algorithm: self.name().to_string(),
            n: self.n,
            bins: self
                .bins
                .iter()
                .enumerate()
                .map(|(index, b)| BinSnapshot {
                    index,
                    label: Some(b.label),
                    contents: b.contents.clone(),
                    load: b.load,
                })
                .collect(),
            marked: Some(self.marked.clone()),
            offered: self.offered,
            terminated: self.terminated,
        }
    }
}

//! Online algorithms for the proportional multiple knapsack problem.
//!
//! Every algorithm sees one item at a time through [`OnlineAlgorithm::offer`]
//! and answers with an irrevocable [`Decision`]. Snapshots are plain data and
//! can be compared, serialized, or handed to another thread.

mod first_fit;
mod marked;
mod rta;

pub use first_fit::FirstFit;
pub use marked::{xi_dominated, MarkedSet};
pub use rta::Rta;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::item::{Item, ItemClass, MediumKind};

/// Role of a bin in the rising threshold algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Empty.
    E,
    /// Auxiliary bin collecting small items below `phi`; at most one exists.
    A,
    /// Stack of small items.
    #[serde(rename = "Sstar")]
    SStar,
    /// A single marked medium item.
    MS,
    #[serde(rename = "MT2")]
    Mt2,
    #[serde(rename = "MT3")]
    Mt3,
    #[serde(rename = "MT4")]
    Mt4,
    /// One large item plus optional non-large items.
    #[serde(rename = "Lplus")]
    LPlus,
}

impl Label {
    pub const ALL: [Label; 8] = [
        Label::E,
        Label::A,
        Label::SStar,
        Label::MS,
        Label::Mt2,
        Label::Mt3,
        Label::Mt4,
        Label::LPlus,
    ];

    pub(crate) fn slot(self) -> usize {
        self as usize
    }

    pub fn stack(kind: MediumKind) -> Label {
        match kind {
            MediumKind::Mt2 => Label::Mt2,
            MediumKind::Mt3 => Label::Mt3,
            MediumKind::Mt4 => Label::Mt4,
        }
    }

    pub fn is_medium_stack(self) -> bool {
        matches!(self, Label::Mt2 | Label::Mt3 | Label::Mt4)
    }

    /// Whether the algorithm may ever move a bin from `self` to `to`.
    pub fn may_become(self, to: Label) -> bool {
        use Label::*;
        match self {
            E => !matches!(to, E | SStar),
            A => matches!(to, A | MS | SStar),
            MS => matches!(to, MS | LPlus),
            Mt2 | Mt3 | Mt4 | SStar | LPlus => to == self,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Action {
    Accept { bin: usize },
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideEffect {
    Marked,
    MergedAbin,
    RelabeledAtoSstar,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    pub side_effects: Vec<SideEffect>,
    /// Label of the target bin before and after the item was placed, for
    /// algorithms that label bins.
    pub labels: Option<(Label, Label)>,
}

impl Decision {
    pub fn reject() -> Self {
        Decision {
            action: Action::Reject,
            side_effects: Vec::new(),
            labels: None,
        }
    }

    pub fn accepted(&self) -> bool {
        matches!(self.action, Action::Accept { .. })
    }

    pub fn bin(&self) -> Option<usize> {
        match self.action {
            Action::Accept { bin } => Some(bin),
            Action::Reject => None,
        }
    }
}

/// Bin contents at a point in time. `index` is zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSnapshot {
    pub index: usize,
    pub label: Option<Label>,
    pub contents: Vec<Item>,
    pub load: f64,
}

impl BinSnapshot {
    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub algorithm: String,
    pub n: usize,
    pub bins: Vec<BinSnapshot>,
    pub marked: Option<MarkedSet>,
    pub offered: usize,
    pub terminated: bool,
}

/// Gains are loads divided by `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub total: f64,
    #[serde(rename = "g_L")]
    pub large: f64,
    #[serde(rename = "g_Lplus")]
    pub lplus: f64,
    #[serde(rename = "g_MS")]
    pub ms: f64,
    #[serde(rename = "g_Mstar")]
    pub mstar: f64,
    #[serde(rename = "g_Sstar")]
    pub sstar: f64,
}

/// Fraction of bins carrying each label. Sums to 1 for labelled algorithms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    #[serde(rename = "b_Lplus")]
    pub lplus: f64,
    #[serde(rename = "b_MS")]
    pub ms: f64,
    #[serde(rename = "b_Mstar")]
    pub mstar: f64,
    #[serde(rename = "b_Sstar")]
    pub sstar: f64,
    #[serde(rename = "b_E")]
    pub empty: f64,
    #[serde(rename = "b_A")]
    pub aux: f64,
}

impl Fractions {
    pub fn sum(&self) -> f64 {
        self.lplus + self.ms + self.mstar + self.sstar + self.empty + self.aux
    }
}

impl Snapshot {
    pub fn bins_with<'a>(&'a self, label: Label) -> impl Iterator<Item = &'a BinSnapshot> + 'a {
        self.bins.iter().filter(move |b| b.label == Some(label))
    }

    pub fn count(&self, label: Label) -> usize {
        self.bins_with(label).count()
    }

    pub fn total_load(&self) -> f64 {
        self.bins.iter().map(|b| b.load).fold(0.0, |a, x| a + x)
    }

    pub fn empty_bins(&self) -> usize {
        self.bins.iter().filter(|b| b.is_empty()).count()
    }

    pub fn large_items(&self) -> impl Iterator<Item = &Item> {
        self.bins
            .iter()
            .flat_map(|b| b.contents.iter())
            .filter(|it| it.class() == ItemClass::Large)
    }

    fn load_of(&self, pred: impl Fn(Label) -> bool) -> f64 {
        self.bins
            .iter()
            .filter(|b| b.label.is_some_and(&pred))
            .map(|b| b.load)
            .fold(0.0, |a, x| a + x)
    }

    pub fn gains(&self) -> Gains {
        let n = self.n as f64;
        Gains {
            total: self.total_load() / n,
            large: self.large_items().map(|it| it.size).fold(0.0, |a, x| a + x) / n,
            lplus: self.load_of(|l| l == Label::LPlus) / n,
            ms: self.load_of(|l| l == Label::MS) / n,
            mstar: self.load_of(Label::is_medium_stack) / n,
            sstar: self.load_of(|l| l == Label::SStar) / n,
        }
    }

    /// Per-label bin fractions; `None` for algorithms without labels.
    pub fn fractions(&self) -> Option<Fractions> {
        if self.bins.iter().any(|b| b.label.is_none()) {
            return None;
        }
        let n = self.n as f64;
        let frac = |pred: &dyn Fn(Label) -> bool| {
            self.bins.iter().filter(|b| b.label.is_some_and(pred)).count() as f64 / n
        };
        Some(Fractions {
            lplus: frac(&|l| l == Label::LPlus),
            ms: frac(&|l| l == Label::MS),
            mstar: frac(&Label::is_medium_stack),
            sstar: frac(&|l| l == Label::SStar),
            empty: frac(&|l| l == Label::E),
            aux: frac(&|l| l == Label::A),
        })
    }

    /// Smallest item size over bins with the given labels.
    pub fn min_size(&self, pred: impl Fn(Label) -> bool) -> Option<f64> {
        self.bins
            .iter()
            .filter(|b| b.label.is_some_and(&pred))
            .flat_map(|b| b.contents.iter().map(|it| it.size))
            .min_by(f64::total_cmp)
    }
}

/// The offer-at-a-time contract shared by all online algorithms.
pub trait OnlineAlgorithm {
    fn name(&self) -> &'static str;

    fn bin_count(&self) -> usize;

    /// Presents the next stream item. Errors if the algorithm has stopped or
    /// the size is outside `(0, 1]`.
    fn offer(&mut self, size: f64) -> Result<Decision>;

    fn is_terminated(&self) -> bool;

    fn snapshot(&self) -> Snapshot;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Rta,
    #[serde(rename = "firstfit")]
    FirstFit,
}

impl AlgorithmKind {
    pub fn build(self, n: usize) -> Result<Box<dyn OnlineAlgorithm + Send>> {
        Ok(match self {
            AlgorithmKind::Rta => Box::new(Rta::new(n)?),
            AlgorithmKind::FirstFit => Box::new(FirstFit::new(n)?),
        })
    }

    pub fn id(self) -> &'static str {
        match self {
            AlgorithmKind::Rta => "rta",
            AlgorithmKind::FirstFit => "firstfit",
        }
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rta" => Ok(AlgorithmKind::Rta),
            "firstfit" | "first-fit" | "ff" => Ok(AlgorithmKind::FirstFit),
            other => Err(crate::error::Error::Parameter(format!(
                "unknown algorithm `{other}` (expected rta or firstfit)"
            ))),
        }
    }
}

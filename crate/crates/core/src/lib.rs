//! Online proportional multiple knapsack: the rising threshold algorithm,
//! a FirstFit baseline, an exact offline optimum, an adaptive adversary and
//! numeric checks for the closed-form functions behind the ratio bound.

pub mod engine;
pub mod error;
pub mod adversary;
pub mod instance;
pub mod item;
pub mod math;
pub mod opt;
pub mod report;

pub use engine::{AlgorithmKind, Decision, FirstFit, OnlineAlgorithm, Rta, Snapshot};
pub use error::{Error, Result};
pub use item::{classify, Item, ItemClass, MediumKind};

use super::{Action, BinSnapshot, Decision, OnlineAlgorithm, Snapshot};
use crate::error::{Error, Result};
use crate::item::{check_size, Item};

/// Places every item into the lowest-indexed bin with enough room.
#[derive(Debug, Clone)]
pub struct FirstFit {
    bins: Vec<(f64, Vec<Item>)>,
    offered: usize,
}

impl FirstFit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("FirstFit needs at least 1 bin".into()));
        }
        Ok(FirstFit {
            bins: vec![(0.0, Vec::new()); n],
            offered: 0,
        })
    }
}

impl OnlineAlgorithm for FirstFit {
    fn name(&self) -> &'static str {
        "firstfit"
    }

    fn bin_count(&self) -> usize {
        self.bins.len()
    }

    fn offer(&mut self, size: f64) -> Result<Decision> {
        check_size(self.offered, size)?;
        let item = Item::stream(self.offered, size);
        self.offered += 1;
        let Some(bin) = self.bins.iter().position(|(load, _)| load + size <= 1.0) else {
            return Ok(Decision::reject());
        };
        let (load, contents) = &mut self.bins[bin];
        *load += size;
        contents.push(item);
        Ok(Decision {
            action: Action::Accept { bin },
            side_effects: Vec::new(),
            labels: None,
        })
    }

    fn is_terminated(&self) -> bool {
        false
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            algorithm: self.name().to_string(),
            n: self.bins.len(),
            bins: self
                .bins
                .iter()
                .enumerate()
                .map(|(index, (load, contents))| BinSnapshot {
                    index,
                    label: None,
                    contents: contents.clone(),
                    load: *load,
                })
                .collect(),
            marked: None,
            offered: self.offered,
            terminated: false,
        }
    }
}

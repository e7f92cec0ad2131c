use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::phi;

/// Medium subcategory: `Mt(i)` holds sizes in `(1/(i+1), 1/i]`, so at most `i`
/// of them share a bin. `Mt4` is truncated below at `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MediumKind {
    Mt2,
    Mt3,
    Mt4,
}

impl MediumKind {
    pub fn capacity(self) -> usize {
        match self {
            MediumKind::Mt2 => 2,
            MediumKind::Mt3 => 3,
            MediumKind::Mt4 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemClass {
    Small,
    Medium(MediumKind),
    Large,
}

impl ItemClass {
    pub fn is_large(self) -> bool {
        matches!(self, ItemClass::Large)
    }

    pub fn is_medium(self) -> bool {
        matches!(self, ItemClass::Medium(_))
    }

    pub fn is_small(self) -> bool {
        matches!(self, ItemClass::Small)
    }

    /// Short name used in transcripts.
    pub fn name(self) -> &'static str {
        match self {
            ItemClass::Small => "small",
            ItemClass::Medium(MediumKind::Mt2) => "MT2",
            ItemClass::Medium(MediumKind::Mt3) => "MT3",
            ItemClass::Medium(MediumKind::Mt4) => "MT4",
            ItemClass::Large => "large",
        }
    }
}

pub fn check_size(index: usize, size: f64) -> Result<()> {
    if size > 0.0 && size <= 1.0 {
        Ok(())
    } else {
        Err(Error::ItemSize { index, size })
    }
}

/// Classifies an item size. Both ends of the medium range are closed:
/// exactly 1/2 is `Mt2` and exactly `phi` is `Mt4`.
pub fn classify(size: f64) -> Result<ItemClass> {
    check_size(0, size)?;
    Ok(classify_unchecked(size))
}

pub(crate) fn classify_unchecked(size: f64) -> ItemClass {
    if size > 0.5 {
        ItemClass::Large
    } else if size > 1.0 / 3.0 {
        ItemClass::Medium(MediumKind::Mt2)
    } else if size > 0.25 {
        ItemClass::Medium(MediumKind::Mt3)
    } else if size >= phi() {
        ItemClass::Medium(MediumKind::Mt4)
    } else {
        ItemClass::Small
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Origin {
    /// Position in the input stream.
    Stream { index: usize },
    /// Small stream items coalesced into one medium item.
    Merged { constituents: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub size: f64,
    pub origin: Origin,
}

impl Item {
    pub fn stream(index: usize, size: f64) -> Self {
        Item {
            size,
            origin: Origin::Stream { index },
        }
    }

    pub fn class(&self) -> ItemClass {
        classify_unchecked(self.size)
    }

    pub fn is_merged(&self) -> bool {
        matches!(self.origin, Origin::Merged { .. })
    }

    /// Stream indices this item stands for.
    pub fn stream_indices(&self) -> Vec<usize> {
        match &self.origin {
            Origin::Stream { index } => vec![*index],
            Origin::Merged { constituents } => constituents.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_boundaries() {
        assert_eq!(classify(0.6).unwrap(), ItemClass::Large);
        assert_eq!(classify(1.0).unwrap(), ItemClass::Large);
        assert_eq!(classify(0.5).unwrap(), ItemClass::Medium(MediumKind::Mt2));
        assert_eq!(classify(1.0 / 3.0).unwrap(), ItemClass::Medium(MediumKind::Mt3));
        assert_eq!(classify(0.25).unwrap(), ItemClass::Medium(MediumKind::Mt4));
        assert_eq!(classify(0.22).unwrap(), ItemClass::Medium(MediumKind::Mt4));
        assert_eq!(classify(phi()).unwrap(), ItemClass::Medium(MediumKind::Mt4));
        assert_eq!(classify(0.219).unwrap(), ItemClass::Small);
        assert_eq!(classify(1e-9).unwrap(), ItemClass::Small);
    }

    #[test]
    fn classification_rejects_out_of_range() {
        assert!(classify(0.0).is_err());
        assert!(classify(-0.5).is_err());
        assert!(classify(1.0 + 1e-12).is_err());
        assert!(classify(f64::NAN).is_err());
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of chromophore sites in one FMO unit.
pub const NUM_SITES: usize = 7;
/// Site states plus the ground and sink states.
pub const FULL_DIM: usize = NUM_SITES + 2;

/// One of the nine basis states, ordered G, 1, …, 7, S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    Ground,
    Site(u8),
    Sink,
}

impl StateLabel {
    pub fn site(m: usize) -> Result<Self> {
        if (1..=NUM_SITES).contains(&m) {
            Ok(StateLabel::Site(m as u8))
        } else {
            Err(Error::SiteOutOfRange(m))
        }
    }

    /// All nine labels in matrix order.
    pub fn all() -> impl Iterator<Item = StateLabel> {
        std::iter::once(StateLabel::Ground)
            .chain((1..=NUM_SITES as u8).map(StateLabel::Site))
            .chain(std::iter::once(StateLabel::Sink))
    }

    /// Row/column index in the nine-dimensional basis.
    pub fn index(self) -> usize {
        match self {
            StateLabel::Ground => 0,
            StateLabel::Site(m) => m as usize,
            StateLabel::Sink => FULL_DIM - 1,
        }
    }

    /// Row/column index in a space of dimension `dim` (7: sites only, 9: full).
    pub fn index_in(self, dim: usize) -> Result<usize> {
        match (dim, self) {
            (FULL_DIM, l) => Ok(l.index()),
            (NUM_SITES, StateLabel::Site(m)) => Ok(m as usize - 1),
            (NUM_SITES, other) => Err(Error::NotASite(other.to_string())),
            (d, _) => Err(Error::DimensionMismatch { expected: FULL_DIM, found: d }),
        }
    }

    pub fn site_index(self) -> Option<usize> {
        match self {
            StateLabel::Site(m) => Some(m as usize),
            _ => None,
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Ground => write!(f, "G"),
            StateLabel::Site(m) => write!(f, "{m}"),
            StateLabel::Sink => write!(f, "S"),
        }
    }
}

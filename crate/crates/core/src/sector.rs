//! Collective-spin symmetry sectors `|m_j σ⟩`.
//!
//! Quantum numbers are stored doubled (`twice_j`, `twice_m`) so half-integer
//! spins stay exact. Flat ordering: decreasing `m`, and for equal `m` the
//! central spin up precedes down.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// State of the central spin.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigma {
    Up,
    Down,
}

impl Sigma {
    /// +1 for up, -1 for down.
    pub fn sign(self) -> f64 {
        match self {
            Sigma::Up => 1.0,
            Sigma::Down => -1.0,
        }
    }

    pub fn flip(self) -> Sigma {
        match self {
            Sigma::Up => Sigma::Down,
            Sigma::Down => Sigma::Up,
        }
    }

    pub fn short(self) -> char {
        match self {
            Sigma::Up => 'u',
            Sigma::Down => 'd',
        }
    }

    fn offset(self) -> usize {
        match self {
            Sigma::Up => 0,
            Sigma::Down => 1,
        }
    }
}

/// A basis label `|m σ⟩` with `m = twice_m / 2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub twice_m: i64,
    pub sigma: Sigma,
}

impl Label {
    pub fn new(twice_m: i64, sigma: Sigma) -> Self {
        Self { twice_m, sigma }
    }

    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    /// Image under a perfect π pulse: `|m σ⟩ → |−m σ̄⟩`.
    pub fn flipped(&self) -> Label {
        Label::new(-self.twice_m, self.sigma.flip())
    }

    /// Shift `m` by `delta` (in units of 1, i.e. `twice_m += 2 delta`).
    pub fn shifted(&self, delta: i64, sigma: Sigma) -> Label {
        Label::new(self.twice_m + 2 * delta, sigma)
    }
}

impl fmt::Display for Label {
    /// Column-header form `m<twice_m>_<u|d>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}_{}", self.twice_m, self.sigma.short())
    }
}

/// The `2(2j+1)`-dimensional sector of fixed total satellite spin `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorBasis {
    n_satellites: usize,
    twice_j: usize,
}

impl SectorBasis {
    pub fn new(n_satellites: usize, twice_j: usize) -> Result<Self> {
        if n_satellites == 0 || twice_j > n_satellites || (n_satellites - twice_j) % 2 != 0 {
            return Err(Error::InvalidSector {
                n_satellites,
                twice_j,
            });
        }
        Ok(Self {
            n_satellites,
            twice_j,
        })
    }

    /// The largest sector, `j = N/2`.
    pub fn largest(n_satellites: usize) -> Result<Self> {
        Self::new(n_satellites, n_satellites)
    }

    pub fn n_satellites(&self) -> usize {
        self.n_satellites
    }

    pub fn twice_j(&self) -> usize {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    /// Number of satellite levels `2j + 1`.
    pub fn satellite_dim(&self) -> usize {
        self.twice_j + 1
    }

    pub fn dim(&self) -> usize {
        2 * (self.twice_j + 1)
    }

    pub fn is_fully_symmetric(&self) -> bool {
        self.twice_j == self.n_satellites
    }

    /// Satellite level index for `twice_m` (0 is `m = j`).
    pub fn level_index(&self, twice_m: i64) -> Option<usize> {
        let tj = self.twice_j as i64;
        if twice_m.abs() > tj || (tj - twice_m) % 2 != 0 {
            return None;
        }
        Some(((tj - twice_m) / 2) as usize)
    }

    pub fn index_of(&self, label: Label) -> Option<usize> {
        self.level_index(label.twice_m)
            .map(|k| 2 * k + label.sigma.offset())
    }

    pub fn label(&self, index: usize) -> Label {
        assert!(index < self.dim(), "index {index} out of range for sector of dim {}", self.dim());
        let k = (index / 2) as i64;
        let sigma = if index % 2 == 0 { Sigma::Up } else { Sigma::Down };
        Label::new(self.twice_j as i64 - 2 * k, sigma)
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.dim()).map(move |i| self.label(i))
    }

    pub fn contains(&self, label: Label) -> bool {
        self.index_of(label).is_some()
    }
}

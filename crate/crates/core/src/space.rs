// SPDX-License-Identifier: Apache-2.0

//! Layout of the composite space: `n` qutrits followed by one truncated
//! cavity mode.
//!
//! Basis index of `|q1 q2 ... qn; m⟩` is
//! `((..((q1)·3 + q2)·3 + ..)·3 + qn)·(cutoff+1) + m`, with levels ordered
//! `g, e, f = 0, 1, 2` and `m` the photon number.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the dimension of any state vector.
pub const MAX_STATE_DIM: usize = 4096;
/// Hard cap on the dimension of a density matrix that gets evolved.
pub const MAX_DENSITY_DIM: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    G = 0,
    E = 1,
    F = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::F];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        match i {
            0 => Some(Level::G),
            1 => Some(Level::E),
            2 => Some(Level::F),
            _ => None,
        }
    }

    pub fn from_char(c: char) -> Option<Level> {
        match c {
            'g' => Some(Level::G),
            'e' => Some(Level::E),
            'f' => Some(Level::F),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::F => 'f',
        }
    }
}

/// A tensor factor of the composite space. Qutrits are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Qutrit(usize),
    Cavity,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Qutrit(k) => write!(f, "qutrit {k}"),
            Site::Cavity => write!(f, "cavity"),
        }
    }
}

/// `n` qutrits ⊗ one cavity mode truncated at `fock_cutoff` photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    n_qutrits: usize,
    fock_cutoff: usize,
}

impl HilbertSpace {
    pub fn new(n_qutrits: usize, fock_cutoff: usize) -> Result<Self> {
        if n_qutrits == 0 {
            return Err(Error::InvalidParams("space needs at least one qutrit".into()));
        }
        let dim = 3usize
            .checked_pow(n_qutrits as u32)
            .and_then(|q| q.checked_mul(fock_cutoff + 1))
            .unwrap_or(usize::MAX);
        if dim > MAX_STATE_DIM {
            return Err(Error::DimensionLimit { requested: dim, limit: MAX_STATE_DIM });
        }
        Ok(Self { n_qutrits, fock_cutoff })
    }

    pub fn n_qutrits(&self) -> usize {
        self.n_qutrits
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_cutoff + 1
    }

    /// Dimension of the qutrit factor alone, `3^n`.
    pub fn qutrit_dim(&self) -> usize {
        3usize.pow(self.n_qutrits as u32)
    }

    pub fn dim(&self) -> usize {
        self.qutrit_dim() * self.fock_dim()
    }

    /// Local dimension of a site.
    pub fn site_dim(&self, site: Site) -> Result<usize> {
        match site {
            Site::Cavity => Ok(self.fock_dim()),
            Site::Qutrit(k) if (1..=self.n_qutrits).contains(&k) => Ok(3),
            s => Err(Error::UnknownSite(s.to_string())),
        }
    }

    /// Ordered factor dimensions, qutrits first.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![3; self.n_qutrits];
        dims.push(self.fock_dim());
        dims
    }

    pub fn index_of(&self, levels: &[Level], photons: usize) -> Result<usize> {
        if levels.len() != self.n_qutrits {
            return Err(Error::WrongLength { expected: self.n_qutrits, got: levels.len() });
        }
        if photons > self.fock_cutoff {
            return Err(Error::DimensionMismatch { expected: self.fock_dim(), got: photons + 1 });
        }
        Ok(qutrit_index(levels) * self.fock_dim() + photons)
    }

    /// Inverse of [`HilbertSpace::index_of`].
    pub fn decompose(&self, index: usize) -> (Vec<Level>, usize) {
        let photons = index % self.fock_dim();
        (qutrit_levels(index / self.fock_dim(), self.n_qutrits), photons)
    }

    pub fn photons_at(&self, index: usize) -> usize {
        index % self.fock_dim()
    }

    /// Level of qutrit `k` (1-based) in basis state `index`.
    pub fn level_at(&self, index: usize, k: usize) -> Level {
        let q = index / self.fock_dim();
        let shift = 3usize.pow((self.n_qutrits - k) as u32);
        Level::from_index((q / shift) % 3).expect("mod 3")
    }

    /// Parses `"fee"`-style labels.
    pub fn parse_levels(&self, label: &str) -> Result<Vec<Level>> {
        let levels: Option<Vec<Level>> = label.chars().map(Level::from_char).collect();
        let levels = levels.ok_or_else(|| Error::InvalidBitstring(label.to_string()))?;
        if levels.len() != self.n_qutrits {
            return Err(Error::WrongLength { expected: self.n_qutrits, got: levels.len() });
        }
        Ok(levels)
    }
}

/// Index in the bare `3^n` qutrit space.
pub fn qutrit_index(levels: &[Level]) -> usize {
    levels.iter().fold(0, |acc, l| acc * 3 + l.index())
}

pub fn qutrit_levels(mut index: usize, n: usize) -> Vec<Level> {
    let mut out = vec![Level::G; n];
    for slot in out.iter_mut().rev() {
        *slot = Level::from_index(index % 3).expect("mod 3");
        index /= 3;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_map_is_bijection() {
        let space = HilbertSpace::new(3, 5).unwrap();
        let mut seen = vec![false; space.dim()];
        for i in 0..space.dim() {
            let (levels, m) = space.decompose(i);
            let j = space.index_of(&levels, m).unwrap();
            assert_eq!(i, j);
            assert!(!seen[j]);
            seen[j] = true;
            for (k, l) in levels.iter().enumerate() {
                assert_eq!(space.level_at(i, k + 1), *l);
            }
        }
    }

    #[test]
    fn normative_index() {
        let space = HilbertSpace::new(3, 5).unwrap();
        let fee = space.parse_levels("fee").unwrap();
        assert_eq!(space.index_of(&fee, 0).unwrap(), 132);
        assert_eq!(space.dim(), 162);
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(HilbertSpace::new(8, 5), Err(Error::DimensionLimit { .. })));
        assert!(HilbertSpace::new(3, 32).is_ok());
    }

    #[test]
    fn unknown_site() {
        let space = HilbertSpace::new(2, 1).unwrap();
        assert!(space.site_dim(Site::Qutrit(3)).is_err());
        assert!(space.site_dim(Site::Qutrit(0)).is_err());
        assert_eq!(space.site_dim(Site::Cavity).unwrap(), 2);
    }
}

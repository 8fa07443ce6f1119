//! Lattices and the `(position, coin)` basis.
//!
//! Flat basis index is `2 * offset + coin.index()`, where the offset of a
//! line position `x` is `x + horizon` and a cycle position is its own offset.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lattice {
    /// Positions `-horizon..=horizon`.
    Line { horizon: usize },
    /// Positions `0..size`, wrapping.
    Cycle { size: usize },
}

impl Lattice {
    pub fn line(horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidConfig("line horizon must be at least 1".into()));
        }
        Ok(Lattice::Line { horizon })
    }

    pub fn cycle(size: usize) -> Result<Self> {
        if size < 3 {
            return Err(Error::InvalidConfig(format!(
                "cycle size must be at least 3, got {size}"
            )));
        }
        Ok(Lattice::Cycle { size })
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Lattice::Line { .. })
    }

    pub fn is_cycle(&self) -> bool {
        matches!(self, Lattice::Cycle { .. })
    }

    pub fn num_positions(&self) -> usize {
        match *self {
            Lattice::Line { horizon } => 2 * horizon + 1,
            Lattice::Cycle { size } => size,
        }
    }

    /// Dimension of the position ⊗ coin Hilbert space.
    pub fn dim(&self) -> usize {
        2 * self.num_positions()
    }

    pub fn position_at(&self, offset: usize) -> i64 {
        match *self {
            Lattice::Line { horizon } => offset as i64 - horizon as i64,
            Lattice::Cycle { .. } => offset as i64,
        }
    }

    /// Offset of `x`; cycle positions are reduced mod `size`, line positions
    /// outside the horizon yield `None`.
    pub fn offset_of(&self, x: i64) -> Option<usize> {
        match *self {
            Lattice::Line { horizon } => {
                let h = horizon as i64;
                (-h..=h).contains(&x).then(|| (x + h) as usize)
            }
            Lattice::Cycle { size } => Some(x.rem_euclid(size as i64) as usize),
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.num_positions()).map(move |o| self.position_at(o))
    }

    /// Offset reached from `offset` by one step in direction `coin`.
    pub fn neighbour(&self, offset: usize, coin: Coin) -> Option<usize> {
        match *self {
            Lattice::Line { horizon } => {
                let next = offset as i64 + coin.sign();
                (0..=2 * horizon as i64).contains(&next).then_some(next as usize)
            }
            Lattice::Cycle { size } => Some((offset as i64 + coin.sign()).rem_euclid(size as i64) as usize),
        }
    }
}

/// Coin basis state. `Minus` is index 0, `Plus` index 1, everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coin {
    Minus,
    Plus,
}

impl Coin {
    pub const BOTH: [Coin; 2] = [Coin::Minus, Coin::Plus];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Coin::Minus => 0,
            Coin::Plus => 1,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Coin {
        if i & 1 == 0 {
            Coin::Minus
        } else {
            Coin::Plus
        }
    }

    #[inline]
    pub fn sign(self) -> i64 {
        match self {
            Coin::Minus => -1,
            Coin::Plus => 1,
        }
    }
}

/// A basis vector `|x, c>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub position: i64,
    pub coin: Coin,
}

impl BasisIndex {
    pub fn new(position: i64, coin: Coin) -> Self {
        Self { position, coin }
    }

    pub fn flat(&self, lattice: &Lattice) -> Option<usize> {
        lattice
            .offset_of(self.position)
            .map(|o| 2 * o + self.coin.index())
    }

    pub fn from_flat(lattice: &Lattice, flat: usize) -> Self {
        Self {
            position: lattice.position_at(flat / 2),
            coin: Coin::from_index(flat),
        }
    }
}

//! Small real vectors for wavevectors.

use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[f64; 3]>;

/// A Fourier wavevector in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WaveVector(pub Coords);

impl WaveVector {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("wavevector needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("wavevector coordinates must be finite"));
        }
        Ok(WaveVector(coords.iter().copied().collect()))
    }

    pub fn zeros(d: usize) -> Self {
        WaveVector(SmallVec::from_elem(0.0, d))
    }

    /// `norm * e_1` in `R^d`.
    pub fn along_first_axis(d: usize, norm: f64) -> Self {
        let mut v = Self::zeros(d);
        v.0[0] = norm;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &WaveVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        if self.0.len() == 2 {
            self.0[0].hypot(self.0[1])
        } else {
            self.dot(self).sqrt()
        }
    }

    pub fn scale(&self, k: f64) -> WaveVector {
        WaveVector(self.0.iter().map(|x| x * k).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// `e_xi = xi / |xi|`; refuses the zero vector.
    pub fn unit(&self) -> Result<WaveVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::domain("direction of the zero vector"));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Planar cross product `a_1 b_2 - a_2 b_1`.
    pub fn cross2(&self, other: &WaveVector) -> f64 {
        self.0[0] * other.0[1] - self.0[1] * other.0[0]
    }

    /// Counter-clockwise quarter turn of a planar vector.
    pub fn perp2(&self) -> WaveVector {
        WaveVector(SmallVec::from_slice(&[-self.0[1], self.0[0]]))
    }

    /// Unsigned angle in `[0, pi]` between two nonzero vectors.
    pub fn angle_to(&self, other: &WaveVector) -> f64 {
        let dot = self.dot(other);
        let cross = if self.dim() == 2 {
            self.cross2(other).abs()
        } else {
            let s2 = self.dot(self) * other.dot(other) - dot * dot;
            s2.max(0.0).sqrt()
        };
        cross.atan2(dot)
    }
}

impl Index<usize> for WaveVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Sub for &WaveVector {
    type Output = WaveVector;
    fn sub(self, rhs: &WaveVector) -> WaveVector {
        WaveVector(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Add for &WaveVector {
    type Output = WaveVector;
    fn add(self, rhs: &WaveVector) -> WaveVector {
        WaveVector(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

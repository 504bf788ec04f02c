//! Geometric scale and time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::scalar::Real;

/// Strictly decreasing positive radii, largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid<T> {
    radii: Vec<T>,
}

impl<T: Real> ScaleGrid<T> {
    pub fn new(radii: Vec<T>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::InvalidGrid(
                "scale grid needs at least 2 radii".into(),
            ));
        }
        if radii.iter().any(|r| !(*r > T::zero()) || !r.is_finite()) {
            return Err(Error::InvalidGrid(
                "scale grid radii must be positive and finite".into(),
            ));
        }
        if radii.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidGrid(
                "scale grid must be strictly decreasing".into(),
            ));
        }
        Ok(Self { radii })
    }

    /// `r_max, r_max·ratio, …` down to the last radius not below `r_min`
    /// (with a relative allowance of 1e-9 for rounding).
    pub fn geometric(r_max: T, r_min: T, ratio: T) -> Result<Self> {
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::InvalidGrid(format!(
                "grid ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if !(r_min > T::zero() && r_min < r_max) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        let floor = r_min * (T::one() - T::lit(1e-9));
        let mut radii = Vec::new();
        let mut k = 0i32;
        loop {
            let r = r_max * ratio.powi(k);
            if r < floor {
                break;
            }
            radii.push(r);
            k += 1;
        }
        Self::new(radii)
    }

    /// Powers `base^{-k}` for `k` in `k_min..=k_max`.
    pub fn powers(base: T, k_min: i32, k_max: i32) -> Result<Self> {
        Self::new((k_min..=k_max).map(|k| base.powi(-k)).collect())
    }

    /// Scaling window of a measure: from `diameter/8` down to eight median
    /// spacings, with the given ratio.
    pub fn default_for(mu: &AtomicMeasure<T>, ratio: T) -> Result<Self> {
        let eight = T::lit(8.0);
        let r_max = mu.diameter() / eight;
        let r_min = mu.median_spacing() * eight;
        Self::geometric(r_max, r_min, ratio)
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn max(&self) -> T {
        self.radii[0]
    }

    pub fn min(&self) -> T {
        *self.radii.last().expect("nonempty grid")
    }
}

/// Strictly increasing positive times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    times: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("time grid is empty".into()));
        }
        if times.iter().any(|t| !(*t > T::zero()) || !t.is_finite()) {
            return Err(Error::InvalidGrid(
                "times must be positive and finite".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { times })
    }

    /// `count` geometrically spaced times from `t_min` to `t_max` inclusive.
    pub fn geometric(t_min: T, t_max: T, count: usize) -> Result<Self> {
        if count < 2 || !(t_min > T::zero() && t_min < t_max) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < t_min < t_max and count >= 2, got [{t_min}, {t_max}] x {count}"
            )));
        }
        let last = T::of_usize(count - 1);
        let span = (t_max / t_min).ln();
        let mut times: Vec<T> = (0..count)
            .map(|i| t_min * (span * T::of_usize(i) / last).exp())
            .collect();
        times[count - 1] = t_max;
        Self::new(times)
    }

    /// Powers `base^k` for `k` in `k_min..=k_max`.
    pub fn powers(base: T, k_min: i32, k_max: i32) -> Result<Self> {
        Self::new((k_min..=k_max).map(|k| base.powi(k)).collect())
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn min(&self) -> T {
        self.times[0]
    }

    pub fn max(&self) -> T {
        *self.times.last().expect("nonempty grid")
    }
}

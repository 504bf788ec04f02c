//! Finite nonnegative Borel measures on the line, stored as sorted weighted atoms.
//!
//! Every estimator in the crate consumes an [`AtomicMeasure`]: self-similar
//! fixtures, uniform grids and spectral measures of finite operators all
//! arrive in this form. Atoms are kept in increasing position order and all
//! reductions walk them in that order, so results are bit-reproducible.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Positions closer than this are merged into a single atom.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Largest depth accepted by [`AtomicMeasure::cantor`].
pub const MAX_CANTOR_DEPTH: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure<T> {
    positions: Vec<T>,
    weights: Vec<T>,
    total_mass: T,
}

impl<T: Real> AtomicMeasure<T> {
    /// Builds a measure from unsorted atoms, merging coincident positions.
    pub fn new(points: &[T], weights: &[T]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        for (index, (&x, &w)) in points.iter().zip(weights).enumerate() {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if w < T::zero() {
                return Err(Error::NegativeWeight {
                    index,
                    weight: w.as_f64(),
                });
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].partial_cmp(&points[b]).expect("finite"));

        let tol = T::lit(MERGE_TOLERANCE);
        let mut positions: Vec<T> = Vec::with_capacity(points.len());
        let mut merged: Vec<T> = Vec::with_capacity(points.len());
        for i in order {
            let (x, w) = (points[i], weights[i]);
            match positions.last() {
                Some(&last) if x - last <= tol => {
                    *merged.last_mut().expect("parallel vectors") = *merged.last().unwrap() + w;
                }
                _ => {
                    positions.push(x);
                    merged.push(w);
                }
            }
        }
        Ok(Self::from_sorted_unchecked(positions, merged))
    }

    /// Caller guarantees strictly increasing positions and nonnegative weights.
    pub(crate) fn from_sorted_unchecked(positions: Vec<T>, weights: Vec<T>) -> Self {
        let total_mass = weights.iter().copied().sum();
        Self {
            positions,
            weights,
            total_mass,
        }
    }

    pub fn empty() -> Self {
        Self::from_sorted_unchecked(Vec::new(), Vec::new())
    }

    /// Unit point mass at `x`.
    pub fn dirac(x: T) -> Self {
        Self::from_sorted_unchecked(vec![x], vec![T::one()])
    }

    /// `n` atoms of mass `1/n` at the cell midpoints `(i + 1/2)/n` of `[0, 1]`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "uniform fixture needs n >= 1".into(),
            ));
        }
        let nn = T::of_usize(n);
        let half = T::lit(0.5);
        let positions = (0..n).map(|i| (T::of_usize(i) + half) / nn).collect();
        let weights = vec![T::one() / nn; n];
        Ok(Self::from_sorted_unchecked(positions, weights))
    }

    /// Middle-thirds Cantor measure at the given depth: `2^depth` atoms of equal
    /// mass at the left endpoints of the surviving intervals of `[0, 1]`.
    pub fn cantor(depth: u32) -> Result<Self> {
        if depth > MAX_CANTOR_DEPTH {
            return Err(Error::TooLarge {
                n: depth as usize,
                max: MAX_CANTOR_DEPTH as usize,
            });
        }
        // Both similarity maps x/3 and x/3 + 2/3 applied to the previous level;
        // the left image lies below 1/3 and the right above 2/3, so order is kept.
        let mut positions = vec![T::zero()];
        let three = T::lit(3.0);
        let two_thirds = T::lit(2.0) / three;
        for _ in 0..depth {
            let left: Vec<T> = positions.iter().map(|&x| x / three).collect();
            let right = left.iter().map(|&x| x + two_thirds);
            positions = left.iter().copied().chain(right).collect();
        }
        let n = positions.len();
        let w = T::one() / T::of_usize(n);
        Ok(Self::from_sorted_unchecked(positions, vec![w; n]))
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    /// True when there is at least one atom carrying positive mass.
    pub fn has_mass(&self) -> bool {
        self.total_mass > T::zero()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.positions
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Distance between the outermost atoms.
    pub fn diameter(&self) -> T {
        match (self.positions.first(), self.positions.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    /// Median gap between consecutive atoms; zero for fewer than two atoms.
    pub fn median_spacing(&self) -> T {
        if self.len() < 2 {
            return T::zero();
        }
        let mut gaps: Vec<T> = self.positions.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        gaps[(gaps.len() - 1) / 2]
    }

    /// Restriction to the open interval `(a, b)`; infinite endpoints are allowed.
    pub fn restrict(&self, a: T, b: T) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidInterval {
                a: a.as_f64(),
                b: b.as_f64(),
            });
        }
        let lo = self.positions.partition_point(|&x| x <= a);
        let hi = self.positions.partition_point(|&x| x < b);
        let (lo, hi) = (lo, hi.max(lo));
        Ok(Self::from_sorted_unchecked(
            self.positions[lo..hi].to_vec(),
            self.weights[lo..hi].to_vec(),
        ))
    }

    /// Same measure rescaled to unit total mass.
    pub fn normalized(&self) -> Result<Self> {
        if !self.has_mass() {
            return Err(Error::EmptyMeasure);
        }
        let m = self.total_mass;
        Ok(Self::from_sorted_unchecked(
            self.positions.clone(),
            self.weights.iter().map(|&w| w / m).collect(),
        ))
    }

    /// Index range of atoms inside the closed ball `[x - r, x + r]`.
    pub fn ball_range(&self, x: T, r: T) -> std::ops::Range<usize> {
        let lo = self.positions.partition_point(|&p| p < x - r);
        let hi = self.positions.partition_point(|&p| p <= x + r);
        lo..hi.max(lo)
    }

    /// Mass of the closed ball `[x - r, x + r]`.
    pub fn ball_mass(&self, x: T, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::NonPositiveRadius(r.as_f64()));
        }
        Ok(self.ball_mass_unchecked(x, r))
    }

    pub(crate) fn ball_mass_unchecked(&self, x: T, r: T) -> T {
        let range = self.ball_range(x, r);
        self.weights[range].iter().copied().sum()
    }

    /// Time-averaged squared Fourier transform `(1/t) ∫_0^t |μ̂(s)|² ds`.
    ///
    /// For atoms the average has the closed form
    /// `Σ_j Σ_k w_j w_k sin((x_j - x_k) t) / ((x_j - x_k) t)`, evaluated exactly.
    pub fn averaged_fourier_sq(&self, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::NonPositiveTime(t.as_f64()));
        }
        let n = self.len();
        let mut diag = T::zero();
        let mut off = T::zero();
        for j in 0..n {
            let (xj, wj) = (self.positions[j], self.weights[j]);
            diag = diag + wj * wj;
            let mut row = T::zero();
            for k in (j + 1)..n {
                let arg = (self.positions[k] - xj) * t;
                row = row + self.weights[k] * sinc(arg);
            }
            off = off + wj * row;
        }
        Ok(diag + off + off)
    }

    /// Writes `position,weight` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "position,weight")?;
        for (x, w) in self.atoms() {
            writeln!(out, "{:.16e},{:.16e}", x.as_f64(), w.as_f64())?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). Lines
    /// starting with `#` are ignored.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut header_seen = false;
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != "position,weight" {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected header `position,weight`, found `{line}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let mut cols = line.split(',');
            let mut field = |name: &str| -> Result<T> {
                let s = cols.next().ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: format!("missing {name}"),
                })?;
                let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad {name} `{s}`"),
                })?;
                Ok(T::lit(v))
            };
            points.push(field("position")?);
            weights.push(field("weight")?);
        }
        Self::new(&points, &weights)
    }
}

#[inline]
pub(crate) fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type M = AtomicMeasure<f64>;

    #[test]
    fn build_identity_sort_and_merge() {
        let m = M::new(&[0.0], &[1.0]).unwrap();
        assert_eq!(m.positions(), &[0.0]);
        assert_eq!(m.total_mass(), 1.0);

        let m = M::new(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_eq!(m.positions(), &[0.0, 1.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);

        let m = M::new(&[0.0, 0.0], &[0.3, 0.2]).unwrap();
        assert_eq!(m.len(), 1);
        assert_relative_eq!(m.weights()[0], 0.5);

        let m = M::new(&[1.0, 1.0 + 1e-13, 2.0], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            M::new(&[0.0, 1.0], &[0.5, -0.1]),
            Err(Error::NegativeWeight {
                index: 1,
                weight: -0.1
            })
        );
        assert!(matches!(
            M::new(&[0.0, 1.0], &[0.5]),
            Err(Error::LengthMismatch {
                points: 2,
                weights: 1
            })
        ));
        assert!(matches!(
            M::new(&[f64::NAN], &[1.0]),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn restrict_open_interval() {
        let m = M::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let r = m.restrict(f64::NEG_INFINITY, 0.5).unwrap();
        assert_eq!(r.positions(), &[0.0]);
        assert_eq!(r.total_mass(), 0.5);

        let single = M::dirac(0.0);
        let r = single.restrict(0.0, 1.0).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.total_mass(), 0.0);

        let four = M::new(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0], &[0.25; 4]).unwrap();
        let r = four.restrict(0.2, 0.8).unwrap();
        assert_eq!(r.len(), 2);
        assert_relative_eq!(r.total_mass(), 0.5);

        assert!(matches!(
            m.restrict(1.0, 1.0),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(matches!(
            m.restrict(2.0, 1.0),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn ball_mass_closed_convention() {
        let single = M::dirac(0.0);
        assert_eq!(single.ball_mass(0.0, 0.1).unwrap(), 1.0);
        assert_eq!(single.ball_mass(1.0, 0.5).unwrap(), 0.0);
        let two = M::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert_eq!(two.ball_mass(0.5, 0.5).unwrap(), 1.0);
        assert!(matches!(
            two.ball_mass(0.5, 0.0),
            Err(Error::NonPositiveRadius(_))
        ));
        assert!(matches!(
            two.ball_mass(0.5, -1.0),
            Err(Error::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn averaged_fourier_examples() {
        let single = M::dirac(0.3);
        for t in [0.1, 1.0, 7.0, 1e3] {
            assert_relative_eq!(single.averaged_fourier_sq(t).unwrap(), 1.0);
        }
        let two = M::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert_relative_eq!(two.averaged_fourier_sq(1e-9).unwrap(), 1.0, epsilon = 1e-12);
        // 1/4 + 1/4 + 2 (1/4) sin(pi)/pi
        let expected = 0.5 + 0.5 * std::f64::consts::PI.sin() / std::f64::consts::PI;
        assert_relative_eq!(
            two.averaged_fourier_sq(std::f64::consts::PI).unwrap(),
            expected,
            epsilon = 1e-15
        );
        assert!(matches!(
            two.averaged_fourier_sq(0.0),
            Err(Error::NonPositiveTime(_))
        ));
    }

    #[test]
    fn averaged_fourier_matches_direct_quadrature() {
        // Oracle: trapezoidal integration of |μ̂(s)|² on a fine grid.
        let m = M::new(&[-0.4, 0.1, 0.35, 1.2], &[0.1, 0.4, 0.2, 0.3]).unwrap();
        let t = 3.7;
        let steps = 200_000;
        let h = t / steps as f64;
        let fsq = |s: f64| {
            let (mut re, mut im) = (0.0, 0.0);
            for (x, w) in m.atoms() {
                re += w * (s * x).cos();
                im -= w * (s * x).sin();
            }
            re * re + im * im
        };
        let mut acc = 0.5 * (fsq(0.0) + fsq(t));
        for i in 1..steps {
            acc += fsq(i as f64 * h);
        }
        let quad = acc * h / t;
        assert_relative_eq!(m.averaged_fourier_sq(t).unwrap(), quad, epsilon = 1e-9);
    }

    #[test]
    fn cantor_fixtures() {
        let c1 = M::cantor(1).unwrap();
        assert_eq!(c1.positions(), &[0.0, 2.0 / 3.0]);
        assert_eq!(c1.weights(), &[0.5, 0.5]);
        let c2 = M::cantor(2).unwrap();
        let expect = [0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0];
        for (a, b) in c2.positions().iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        let c10 = M::cantor(10).unwrap();
        assert_eq!(c10.len(), 1024);
        assert!((c10.total_mass() - 1.0).abs() < 1e-12);
        assert!(c10.positions().windows(2).all(|w| w[0] < w[1]));
        assert!(M::cantor(21).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = M::cantor(6).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("position,weight\n"));
        assert_eq!(text.lines().count(), 65);
        let back = M::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn generic_over_f32() {
        let m = AtomicMeasure::<f32>::cantor(8).unwrap();
        assert_eq!(m.len(), 256);
        assert!((m.total_mass() - 1.0).abs() < 1e-5);
        assert!(m.ball_mass(0.0, 1.0 / 27.0).unwrap() > 0.1);
    }

    fn arb_measure() -> impl Strategy<Value = M> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..1.0), 1..40).prop_map(|atoms| {
            let (p, w): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
            M::new(&p, &w).unwrap()
        })
    }

    proptest! {
        #[test]
        fn restriction_splits_mass(m in arb_measure(), cut in -10.0f64..10.0) {
            prop_assume!(m.positions().iter().all(|&x| x != cut));
            let left = m.restrict(f64::NEG_INFINITY, cut).unwrap();
            let right = m.restrict(cut, f64::INFINITY).unwrap();
            let sum = left.total_mass() + right.total_mass();
            prop_assert!((sum - m.total_mass()).abs() <= 1e-12 * m.total_mass().max(1.0));
        }

        #[test]
        fn ball_mass_monotone_in_radius(m in arb_measure(), x in -12.0f64..12.0, r in 1e-3f64..5.0) {
            let a = m.ball_mass(x, r).unwrap();
            let b = m.ball_mass(x, 2.0 * r).unwrap();
            prop_assert!(a <= b);
            let all = m.ball_mass(x, 1e6).unwrap();
            prop_assert!((all - m.total_mass()).abs() <= 1e-12);
        }

        #[test]
        fn averaged_fourier_in_range(m in arb_measure(), t in 1e-3f64..100.0) {
            let v = m.averaged_fourier_sq(t).unwrap();
            let mass = m.total_mass();
            prop_assert!(v >= -1e-12 && v <= mass * mass * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn build_is_idempotent(m in arb_measure()) {
            let again = M::new(m.positions(), m.weights()).unwrap();
            prop_assert_eq!(again, m);
        }
    }
}

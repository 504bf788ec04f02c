//! Log-log power-law fits.
//!
//! A fit takes samples `(scale, value)` together with transformed coordinates
//! `(log_scale, log_value)` whose least-squares slope is the exponent of
//! interest. Callers choose the transform, e.g. `ln I(ε) / (q - 1)` against
//! `ln ε` for generalized dimensions, so the slope is the dimension itself.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest sub-window used by the windowed estimators.
pub const MIN_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// Least squares over every sample.
    Regression,
    /// Largest slope over contiguous sub-windows; estimates a limsup.
    WindowedMax,
    /// Smallest slope over contiguous sub-windows; estimates a liminf.
    WindowedMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub scale: T,
    pub value: T,
    pub log_scale: T,
    pub log_value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit<T> {
    pub exponent: T,
    /// Scale range of the sub-window the exponent came from.
    pub window: (T, T),
    /// RMS residual of the chosen line on its sub-window.
    pub residual: T,
    pub mode: FitMode,
    pub samples: Vec<Sample<T>>,
}

/// Least-squares slope, intercept and RMS residual.
fn least_squares<T: Real>(pts: &[Sample<T>]) -> (T, T, T) {
    let n = T::of_usize(pts.len());
    let mx = pts.iter().map(|p| p.log_scale).sum::<T>() / n;
    let my = pts.iter().map(|p| p.log_value).sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for p in pts {
        let dx = p.log_scale - mx;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * (p.log_value - my);
    }
    let slope = if sxx > T::zero() {
        sxy / sxx
    } else {
        T::zero()
    };
    let icept = my - slope * mx;
    let ss: T = pts
        .iter()
        .map(|p| {
            let r = p.log_value - (icept + slope * p.log_scale);
            r * r
        })
        .sum();
    (slope, icept, (ss / n).sqrt())
}

impl<T: Real> PowerLawFit<T> {
    /// Fits the samples in the requested mode. Samples are reordered by
    /// increasing scale; at least two distinct scales are required.
    pub fn fit(mut samples: Vec<Sample<T>>, mode: FitMode) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "a power-law fit needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples
            .iter()
            .any(|s| !s.log_scale.is_finite() || !s.log_value.is_finite())
        {
            return Err(Error::InvalidGrid(
                "non-finite sample in power-law fit".into(),
            ));
        }
        samples.sort_by(|a, b| a.scale.partial_cmp(&b.scale).expect("finite"));
        let n = samples.len();
        let w = MIN_WINDOW.min(n);

        let mut best: Option<(T, usize, usize, T)> = None;
        let ranges: Vec<(usize, usize)> = match mode {
            FitMode::Regression => vec![(0, n)],
            _ => (0..n)
                .flat_map(|lo| ((lo + w)..=n).map(move |hi| (lo, hi)))
                .collect(),
        };
        for (lo, hi) in ranges {
            let (slope, _, res) = least_squares(&samples[lo..hi]);
            let better = match (&best, mode) {
                (None, _) => true,
                (Some((b, ..)), FitMode::WindowedMin) => slope < *b,
                (Some((b, ..)), _) => slope > *b,
            };
            if better {
                best = Some((slope, lo, hi, res));
            }
        }
        let (exponent, lo, hi, residual) = best.expect("at least one window");
        Ok(Self {
            exponent,
            window: (samples[lo].scale, samples[hi - 1].scale),
            residual,
            mode,
            samples,
        })
    }

    /// Fits `ln value / divisor` against `ln scale`.
    pub fn from_values(scales: &[T], values: &[T], divisor: T, mode: FitMode) -> Result<Self> {
        let samples = scales
            .iter()
            .zip(values)
            .map(|(&s, &v)| Sample {
                scale: s,
                value: v,
                log_scale: s.ln(),
                log_value: v.ln() / divisor,
            })
            .collect();
        Self::fit(samples, mode)
    }

    /// Degenerate fit used for the `+∞` pointwise sentinel.
    pub fn infinite(scales: &[T], values: &[T], mode: FitMode) -> Self {
        let samples: Vec<Sample<T>> = scales
            .iter()
            .zip(values)
            .map(|(&s, &v)| Sample {
                scale: s,
                value: v,
                log_scale: s.ln(),
                log_value: v.ln(),
            })
            .collect();
        let (lo, hi) = scales
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(a, b), &s| {
                (a.min(s), b.max(s))
            });
        Self {
            exponent: T::infinity(),
            window: (lo, hi),
            residual: T::zero(),
            mode,
            samples,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.exponent.is_infinite()
    }

    /// Writes `scale,value,log_scale,log_value` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "scale,value,log_scale,log_value")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.scale.as_f64(),
                s.value.as_f64(),
                s.log_scale.as_f64(),
                s.log_value.as_f64()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn power(c: f64, a: f64, scales: &[f64]) -> Vec<f64> {
        scales.iter().map(|s| c * s.powf(a)).collect()
    }

    #[test]
    fn exact_power_law_recovered_in_every_mode() {
        let scales: Vec<f64> = (0..10).map(|k| 2f64.powi(-k)).collect();
        let values = power(3.0, 0.7, &scales);
        for mode in [
            FitMode::Regression,
            FitMode::WindowedMax,
            FitMode::WindowedMin,
        ] {
            let f = PowerLawFit::from_values(&scales, &values, 1.0, mode).unwrap();
            assert_relative_eq!(f.exponent, 0.7, epsilon = 1e-12);
            assert!(f.residual < 1e-12);
            assert!(f.window.0 < f.window.1);
        }
    }

    #[test]
    fn divisor_rescales_slope() {
        let scales = [1.0, 2.0, 4.0, 8.0];
        let values = power(1.0, 3.0, &scales);
        let f = PowerLawFit::from_values(&scales, &values, 3.0, FitMode::Regression).unwrap();
        assert_relative_eq!(f.exponent, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn windowed_max_picks_steep_end() {
        // Slope 1 on small scales, slope 2 on large ones.
        let scales: Vec<f64> = (0..12).map(|k| 2f64.powi(k)).collect();
        let values: Vec<f64> = scales
            .iter()
            .map(|&s| if s <= 32.0 { s } else { s * s / 32.0 })
            .collect();
        let max = PowerLawFit::from_values(&scales, &values, 1.0, FitMode::WindowedMax).unwrap();
        let min = PowerLawFit::from_values(&scales, &values, 1.0, FitMode::WindowedMin).unwrap();
        assert_relative_eq!(max.exponent, 2.0, epsilon = 1e-12);
        assert_relative_eq!(min.exponent, 1.0, epsilon = 1e-12);
        assert_eq!(max.window.0, 32.0);
        assert_eq!(min.window.0, 1.0);
    }

    #[test]
    fn rejects_short_or_nonfinite() {
        assert!(PowerLawFit::from_values(&[1.0], &[1.0], 1.0, FitMode::Regression).is_err());
        assert!(
            PowerLawFit::from_values(&[1.0, 2.0], &[0.0, 1.0], 1.0, FitMode::Regression).is_err()
        );
    }

    proptest! {
        #[test]
        fn mode_ordering(vals in prop::collection::vec(0.1f64..10.0, 2..16)) {
            let scales: Vec<f64> = (0..vals.len()).map(|k| 1.5f64.powi(k as i32)).collect();
            let r = PowerLawFit::from_values(&scales, &vals, 1.0, FitMode::Regression).unwrap();
            let hi = PowerLawFit::from_values(&scales, &vals, 1.0, FitMode::WindowedMax).unwrap();
            let lo = PowerLawFit::from_values(&scales, &vals, 1.0, FitMode::WindowedMin).unwrap();
            prop_assert!(hi.exponent >= r.exponent - 1e-12);
            prop_assert!(r.exponent >= lo.exponent - 1e-12);
            prop_assert!(hi.residual >= 0.0 && lo.residual >= 0.0);
        }
    }
}

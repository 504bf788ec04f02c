//! The Gaussian-kernel functional
//! `Ξ_μ(t) = ∫ dμ(x) (∫ dμ(y) e^{-(x-y)² t²/4})^{-1/2}`,
//! its growth exponent, and the two Fourier-side bounds built on Hölder witnesses.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::UahsWitness;
use crate::error::{Error, Result};
use crate::fit::{FitMode, PowerLawFit};
use crate::grid::TimeGrid;
use crate::measure::AtomicMeasure;
use crate::scalar::Real;

/// Tolerance on `max_t Ξ(t) / (μ(ℝ) D t^{α/2})`.
pub const XI_BOUND_TOLERANCE: f64 = 1.05;

/// Allowed excess of the fitted Fourier-average decay over `-α`.
pub const STRICHARTZ_SLACK: f64 = 0.1;

/// Mass trimmed when certifying an upper Hölder bound for the Fourier check.
pub const CERTIFICATION_DELTA: f64 = 0.05;

/// Smallest admissible slope of `ln sup μ(B)/r^α` against `ln r`.
pub const CERTIFICATION_SLOPE: f64 = -0.1;

/// `Ξ_μ(t)` by the exact double sum. Pairs whose kernel underflows to zero are
/// skipped; skipping them changes nothing at working precision.
pub fn xi_at<T: Real>(mu: &AtomicMeasure<T>, t: T) -> Result<T> {
    if !mu.has_mass() {
        return Err(Error::EmptyMeasure);
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if t == T::zero() {
        return Ok(mu.total_mass().sqrt());
    }
    let (xs, ws) = (mu.positions(), mu.weights());
    let half_t = t * T::lit(0.5);
    let reach = T::lit(2.0) * T::exp_underflow().sqrt() / t;
    let terms: Vec<T> = (0..mu.len())
        .into_par_iter()
        .map(|j| {
            let wj = ws[j];
            if !(wj > T::zero()) {
                return T::zero();
            }
            let range = mu.ball_range(xs[j], reach);
            let mut inner = T::zero();
            for k in range {
                let u = (xs[k] - xs[j]) * half_t;
                inner = inner + ws[k] * (-(u * u)).exp();
            }
            wj / inner.sqrt()
        })
        .collect();
    Ok(terms.into_iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiSeries<T> {
    pub t_grid: Vec<T>,
    pub values: Vec<T>,
    pub scaling: PowerLawFit<T>,
}

impl<T: Real> XiSeries<T> {
    /// Writes `t,xi,log_t,log_xi` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,xi,log_t,log_xi")?;
        for (&t, &v) in self.t_grid.iter().zip(&self.values) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                t.as_f64(),
                v.as_f64(),
                t.ln().as_f64(),
                v.ln().as_f64()
            )?;
        }
        Ok(())
    }
}

/// Resolution horizon `1 / median spacing`; infinite for a single atom.
pub fn resolution_horizon<T: Real>(mu: &AtomicMeasure<T>) -> T {
    let s = mu.median_spacing();
    if s > T::zero() {
        T::one() / s
    } else {
        T::infinity()
    }
}

fn check_horizon<T: Real>(mu: &AtomicMeasure<T>, grid: &TimeGrid<T>) -> Result<()> {
    let horizon = resolution_horizon(mu);
    if grid.max() > horizon {
        return Err(Error::BeyondHorizon {
            t_max: grid.max().as_f64(),
            horizon: horizon.as_f64(),
        });
    }
    Ok(())
}

fn xi_values<T: Real>(mu: &AtomicMeasure<T>, grid: &TimeGrid<T>) -> Result<Vec<T>> {
    grid.times().iter().map(|&t| xi_at(mu, t)).collect()
}

/// `Ξ` on a time grid with its windowed-max growth exponent.
pub fn xi_series<T: Real>(mu: &AtomicMeasure<T>, grid: &TimeGrid<T>) -> Result<XiSeries<T>> {
    check_horizon(mu, grid)?;
    let values = xi_values(mu, grid)?;
    let scaling = PowerLawFit::from_values(grid.times(), &values, T::one(), FitMode::WindowedMax)?;
    Ok(XiSeries {
        t_grid: grid.times().to_vec(),
        values,
        scaling,
    })
}

/// `Σ_{n≥0} e^{-(n+1)²/4}`.
pub fn gaussian_shell_sum<T: Real>() -> T {
    let mut acc = T::zero();
    let quarter = T::lit(0.25);
    for n in 1..64 {
        let k = T::of_usize(n);
        acc = acc + (-(k * k) * quarter).exp();
    }
    acc
}

/// Constant `D = (2 C Σ_{n≥0} e^{-(n+1)²/4})^{-1/2}` of the upper bound
/// `Ξ_μ(t) ≤ μ(ℝ) D t^{α/2}` for measures with `μ(B(x;r)) ≥ C r^α`.
pub fn stri_constant<T: Real>(c: T) -> T {
    (T::lit(2.0) * c * gaussian_shell_sum::<T>()).powf(T::lit(-0.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiBoundReport<T> {
    pub alpha: T,
    pub c: T,
    pub d: T,
    pub mass: T,
    pub t_grid: Vec<T>,
    pub xi: Vec<T>,
    pub ratios: Vec<T>,
    pub max_ratio: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Compares `Ξ_μ(t)` with `μ(ℝ) D t^{α/2}` using the constant from a lower Hölder witness.
pub fn uahs_xi_bound_check<T: Real>(
    mu: &AtomicMeasure<T>,
    witness: &UahsWitness<T>,
    grid: &TimeGrid<T>,
) -> Result<XiBoundReport<T>> {
    let t0 = T::one() / witness.r0;
    if grid.min() < t0 * (T::one() - T::lit(1e-12)) {
        return Err(Error::BelowWitnessThreshold {
            t_min: grid.min().as_f64(),
            t0: t0.as_f64(),
        });
    }
    check_horizon(mu, grid)?;
    let mass = mu.total_mass();
    let d = stri_constant(witness.c);
    let xi = xi_values(mu, grid)?;
    let half_alpha = witness.alpha * T::lit(0.5);
    let ratios: Vec<T> = grid
        .times()
        .iter()
        .zip(&xi)
        .map(|(&t, &v)| v / (mass * d * t.powf(half_alpha)))
        .collect();
    let max_ratio = ratios.iter().copied().fold(T::neg_infinity(), T::max);
    let tolerance = T::lit(XI_BOUND_TOLERANCE);
    Ok(XiBoundReport {
        alpha: witness.alpha,
        c: witness.c,
        d,
        mass,
        t_grid: grid.times().to_vec(),
        xi,
        ratios,
        max_ratio,
        pass: max_ratio <= tolerance,
        tolerance,
    })
}

/// Largest `μ(B(x;r))/r^α` over atoms after discarding the worst `delta` of mass.
fn trimmed_upper_ratio<T: Real>(mu: &AtomicMeasure<T>, alpha: T, r: T, delta: T) -> T {
    let (xs, ws) = (mu.positions(), mu.weights());
    let scale = r.powf(alpha);
    let mut vals: Vec<(T, T)> = (0..mu.len())
        .into_par_iter()
        .filter(|&i| ws[i] > T::zero())
        .map(|i| (mu.ball_mass_unchecked(xs[i], r) / scale, ws[i]))
        .collect();
    vals.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite"));
    let mut dropped = T::zero();
    for &(v, w) in &vals {
        if dropped + w >= delta {
            return v;
        }
        dropped = dropped + w;
    }
    vals.last().map(|p| p.0).unwrap_or_else(T::zero)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport<T> {
    pub alpha: T,
    /// Slope of the trimmed `sup μ(B)/r^α` against `ln r` at `r = 1/t`.
    pub certification_slope: T,
    pub t_grid: Vec<T>,
    pub averaged: Vec<T>,
    pub decay: PowerLawFit<T>,
    /// `max_t t^α (1/t)∫₀ᵗ |μ̂(s)|² ds`.
    pub d_tilde: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Fits the decay of `(1/t)∫₀ᵗ |μ̂(s)|² ds` and checks it against `t^{-α}`.
///
/// The measure must first pass an upper Hölder certification at exponent
/// `α` over the radii `1/t`: the `δ`-trimmed supremum of `μ(B)/r^α` may not
/// grow faster than `r^{-0.1}` as `r` shrinks.
pub fn strichartz_check<T: Real>(
    mu: &AtomicMeasure<T>,
    alpha: T,
    grid: &TimeGrid<T>,
) -> Result<StrichartzReport<T>> {
    if !mu.has_mass() {
        return Err(Error::EmptyMeasure);
    }
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(
            "Fourier decay fit needs at least 2 times".into(),
        ));
    }
    let delta = T::lit(CERTIFICATION_DELTA) * mu.total_mass();
    let radii: Vec<T> = grid.times().iter().map(|&t| T::one() / t).collect();
    let sup: Vec<T> = radii
        .iter()
        .map(|&r| trimmed_upper_ratio(mu, alpha, r, delta))
        .collect();
    let cert = PowerLawFit::from_values(&radii, &sup, T::one(), FitMode::Regression)?;
    if cert.exponent < T::lit(CERTIFICATION_SLOPE) {
        return Err(Error::NotHolderContinuous {
            alpha: alpha.as_f64(),
            slope: cert.exponent.as_f64(),
        });
    }
    let averaged = grid
        .times()
        .iter()
        .map(|&t| mu.averaged_fourier_sq(t))
        .collect::<Result<Vec<T>>>()?;
    let decay = PowerLawFit::from_values(grid.times(), &averaged, T::one(), FitMode::WindowedMax)?;
    let d_tilde = grid
        .times()
        .iter()
        .zip(&averaged)
        .map(|(&t, &a)| a * t.powf(alpha))
        .fold(T::neg_infinity(), T::max);
    let tolerance = T::lit(STRICHARTZ_SLACK);
    Ok(StrichartzReport {
        alpha,
        certification_slope: cert.exponent,
        t_grid: grid.times().to_vec(),
        averaged,
        pass: decay.exponent <= -alpha + tolerance,
        decay,
        d_tilde,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::check_uahs;
    use crate::grid::ScaleGrid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type M = AtomicMeasure<f64>;

    fn naive_xi(mu: &M, t: f64) -> f64 {
        let mut acc = 0.0;
        for (x, w) in mu.atoms() {
            let inner: f64 = mu
                .atoms()
                .map(|(y, v)| v * (-(x - y) * (x - y) * t * t / 4.0).exp())
                .sum();
            acc += w / inner.sqrt();
        }
        acc
    }

    #[test]
    fn closed_forms() {
        assert_eq!(xi_at(&M::dirac(0.0), 7.3).unwrap(), 1.0);
        let two = M::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert_relative_eq!(xi_at(&two, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        let expected = (2.0 / (1.0 + (-1.0f64).exp())).sqrt();
        assert_relative_eq!(xi_at(&two, 2.0).unwrap(), expected, epsilon = 1e-12);
        assert!((expected - 1.20915).abs() < 5e-5);
        assert_eq!(xi_at(&M::empty(), 1.0), Err(Error::EmptyMeasure));
    }

    #[test]
    fn cutoff_matches_naive_sum() {
        let mu = M::cantor(7).unwrap();
        for t in [0.5, 30.0, 400.0, 5000.0] {
            assert_relative_eq!(
                xi_at(&mu, t).unwrap(),
                naive_xi(&mu, t),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn atomic_limit() {
        let mu = M::new(&[0.0, 0.3, 1.0], &[0.2, 0.3, 0.5]).unwrap();
        let limit: f64 = mu.weights().iter().map(|w| w.sqrt()).sum();
        assert_relative_eq!(xi_at(&mu, 1e3 / 0.3).unwrap(), limit, epsilon = 1e-9);
    }

    #[test]
    fn shell_constant() {
        assert_relative_eq!(gaussian_shell_sum::<f64>(), 1.2724538509, epsilon = 1e-9);
        assert_relative_eq!(stri_constant(1.0f64), 0.626850, epsilon = 1e-6);
    }

    #[test]
    fn single_atom_bound_ratio_is_reciprocal_of_constant() {
        let mu = M::dirac(0.0);
        let g = ScaleGrid::geometric(0.5, 0.01, 0.5).unwrap();
        let w = check_uahs(&mu, 0.0, &g, 0.01).unwrap();
        let grid = TimeGrid::geometric(2.0, 100.0, 6).unwrap();
        let r = uahs_xi_bound_check(&mu, &w, &grid).unwrap();
        assert_relative_eq!(r.max_ratio, 1.0 / stri_constant(1.0), epsilon = 1e-12);
        let early = TimeGrid::geometric(1.0, 100.0, 6).unwrap();
        assert!(matches!(
            uahs_xi_bound_check(&mu, &w, &early),
            Err(Error::BelowWitnessThreshold { .. })
        ));
    }

    #[test]
    fn series_respects_horizon() {
        let mu = M::uniform(64).unwrap();
        let g = TimeGrid::geometric(1.0, 100.0, 5).unwrap();
        assert!(matches!(
            xi_series(&mu, &g),
            Err(Error::BeyondHorizon { .. })
        ));
        let single = xi_series(&M::dirac(0.0), &g).unwrap();
        assert!(single.scaling.exponent.abs() < 1e-12);
    }

    #[test]
    fn strichartz_single_atom() {
        let g = TimeGrid::geometric(1.0, 100.0, 8).unwrap();
        let r = strichartz_check(&M::dirac(0.0), 0.0, &g).unwrap();
        assert!(r.decay.exponent.abs() < 1e-12);
        assert_relative_eq!(r.d_tilde, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn strichartz_rejects_uncertified_alpha() {
        // A point mass is not Hölder continuous at any positive exponent.
        let g = TimeGrid::geometric(1.0, 100.0, 8).unwrap();
        assert!(matches!(
            strichartz_check(&M::dirac(0.0), 0.5, &g),
            Err(Error::NotHolderContinuous { .. })
        ));
    }

    fn arb_measure() -> impl Strategy<Value = M> {
        prop::collection::vec((-5.0f64..5.0, 1e-3f64..1.0), 1..30).prop_map(|atoms| {
            let (p, w): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
            M::new(&p, &w).unwrap()
        })
    }

    proptest! {
        #[test]
        fn monotone_and_bounded_below(mu in arb_measure(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let x0 = xi_at(&mu, lo).unwrap();
            let x1 = xi_at(&mu, hi).unwrap();
            prop_assert!(x0 <= x1);
            prop_assert!(x0 >= mu.total_mass().sqrt() * (1.0 - 1e-12));
        }

        #[test]
        fn scale_covariance(mu in arb_measure(), t in 0.1f64..20.0, lambda in 0.25f64..4.0) {
            let scaled = M::new(
                &mu.positions().iter().map(|x| x * lambda).collect::<Vec<_>>(),
                mu.weights(),
            ).unwrap();
            let a = xi_at(&mu, t).unwrap();
            let b = xi_at(&scaled, t / lambda).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn zero_time_is_root_mass(mu in arb_measure()) {
            prop_assert!((xi_at(&mu, 0.0).unwrap() - mu.total_mass().sqrt()).abs() < 1e-12);
        }
    }
}

//! Scaling exponents of atomic measures: pointwise upper exponents, their
//! mass-weighted essential supremum, upper generalized dimensions, box
//! counting, and uniform Hölder witnesses.
//!
//! Finite atomic measures are zero-dimensional at small enough scales, so every
//! estimator works on an explicit scale window (see [`ScaleGrid::default_for`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{FitMode, PowerLawFit, Sample};
use crate::grid::ScaleGrid;
use crate::measure::AtomicMeasure;
use crate::scalar::Real;

/// Mass quantile used as the essential supremum proxy.
pub const DEFAULT_QUANTILE: f64 = 0.99;

/// Above this many atoms the pointwise scan runs on a stride subsample.
pub const SUBSAMPLE_THRESHOLD: usize = 10_000;

/// Slack used by the report flags.
pub const REPORT_SLACK: f64 = 0.05;

fn require_mass<T: Real>(mu: &AtomicMeasure<T>) -> Result<()> {
    if mu.has_mass() {
        Ok(())
    } else {
        Err(Error::EmptyMeasure)
    }
}

fn ball_profile<T: Real>(mu: &AtomicMeasure<T>, x: T, grid: &ScaleGrid<T>) -> Vec<T> {
    grid.radii()
        .iter()
        .map(|&r| mu.ball_mass_unchecked(x, r))
        .collect()
}

/// Upper scaling exponent of `mu` at `x`: the windowed-max slope of
/// `ln μ(B(x;r))` against `ln r`. Returns the `+∞` sentinel fit when some ball
/// on the grid is empty.
pub fn pointwise_upper_exponent<T: Real>(
    mu: &AtomicMeasure<T>,
    x: T,
    grid: &ScaleGrid<T>,
) -> Result<PowerLawFit<T>> {
    require_mass(mu)?;
    let masses = ball_profile(mu, x, grid);
    if masses.iter().any(|&m| !(m > T::zero())) {
        return Ok(PowerLawFit::infinite(
            grid.radii(),
            &masses,
            FitMode::WindowedMax,
        ));
    }
    PowerLawFit::from_values(grid.radii(), &masses, T::one(), FitMode::WindowedMax)
}

/// Deterministic selection of atom indices for pointwise scans: every atom
/// with positive mass, or every k-th of them by mass rank when there are
/// more than [`SUBSAMPLE_THRESHOLD`].
fn scan_indices<T: Real>(mu: &AtomicMeasure<T>) -> Vec<usize> {
    let w = mu.weights();
    let live: Vec<usize> = (0..mu.len()).filter(|&i| w[i] > T::zero()).collect();
    if live.len() <= SUBSAMPLE_THRESHOLD {
        return live;
    }
    let stride = live.len().div_ceil(SUBSAMPLE_THRESHOLD);
    let mut ranked = live;
    ranked.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).expect("finite"));
    let mut picked: Vec<usize> = ranked.into_iter().step_by(stride).collect();
    picked.sort_unstable();
    picked
}

/// Pointwise upper exponents at the scanned atoms, as `(position, weight, exponent)`.
pub fn pointwise_exponents<T: Real>(
    mu: &AtomicMeasure<T>,
    grid: &ScaleGrid<T>,
) -> Result<Vec<(T, T, T)>> {
    require_mass(mu)?;
    let (xs, ws) = (mu.positions(), mu.weights());
    scan_indices(mu)
        .into_par_iter()
        .map(|i| {
            let fit = pointwise_upper_exponent(mu, xs[i], grid)?;
            Ok((xs[i], ws[i], fit.exponent))
        })
        .collect()
}

/// Smallest value `v` such that the mass of `{value ≤ v}` reaches `quantile` of the total.
pub fn weighted_quantile<T: Real>(mut pairs: Vec<(T, T)>, quantile: T) -> T {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN exponents"));
    let total: T = pairs.iter().map(|p| p.1).sum();
    let target = quantile * total - T::lit(1e-12) * total;
    let mut acc = T::zero();
    for &(v, w) in &pairs {
        acc = acc + w;
        if acc >= target {
            return v;
        }
    }
    pairs.last().map(|p| p.0).unwrap_or_else(T::zero)
}

/// Mass-weighted `quantile` of the pointwise upper exponents; the proxy for
/// the upper packing dimension of `mu`.
pub fn esssup_exponent<T: Real>(
    mu: &AtomicMeasure<T>,
    grid: &ScaleGrid<T>,
    quantile: T,
) -> Result<T> {
    if !(quantile > T::zero() && quantile <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "mass quantile must lie in (0, 1], got {quantile}"
        )));
    }
    let pts = pointwise_exponents(mu, grid)?;
    Ok(weighted_quantile(
        pts.into_iter().map(|(_, w, e)| (e, w)).collect(),
        quantile,
    ))
}

/// Correlation integral `I(ε) = Σ_j w_j μ(B(x_j;ε))^{q-1}` over atoms of positive mass.
pub fn correlation_integral<T: Real>(mu: &AtomicMeasure<T>, q: T, eps: T) -> Result<T> {
    let (xs, ws) = (mu.positions(), mu.weights());
    let qm1 = q - T::one();
    let terms: Vec<T> = (0..mu.len())
        .into_par_iter()
        .map(|j| {
            if !(ws[j] > T::zero()) {
                return Ok(T::zero());
            }
            let m = mu.ball_mass_unchecked(xs[j], eps);
            if !(m > T::zero()) {
                return Err(Error::ZeroBallMass {
                    index: j,
                    position: xs[j].as_f64(),
                    radius: eps.as_f64(),
                });
            }
            Ok(ws[j] * m.powf(qm1))
        })
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().sum())
}

/// Upper generalized dimension `D_q⁺`: windowed-max slope of
/// `ln I(ε) / (q - 1)` against `ln ε`.
pub fn generalized_dimension_upper<T: Real>(
    mu: &AtomicMeasure<T>,
    q: T,
    grid: &ScaleGrid<T>,
) -> Result<PowerLawFit<T>> {
    if q == T::one() {
        return Err(Error::QEqualsOne);
    }
    require_mass(mu)?;
    let values = grid
        .radii()
        .iter()
        .map(|&e| correlation_integral(mu, q, e))
        .collect::<Result<Vec<T>>>()?;
    PowerLawFit::from_values(grid.radii(), &values, q - T::one(), FitMode::WindowedMax)
}

/// Number of boxes `[x_min + iε, x_min + (i+1)ε)` meeting the support.
pub fn box_count<T: Real>(mu: &AtomicMeasure<T>, eps: T) -> usize {
    let mut count = 0usize;
    let mut last: Option<i64> = None;
    let mut origin: Option<T> = None;
    let nudge = T::lit(1e-9);
    for (x, w) in mu.atoms() {
        if !(w > T::zero()) {
            continue;
        }
        let x0 = *origin.get_or_insert(x);
        let idx = ((x - x0) / eps + nudge)
            .floor()
            .to_i64()
            .expect("finite box index");
        if last != Some(idx) {
            count += 1;
            last = Some(idx);
        }
    }
    count
}

/// Box-counting dimension of the support: windowed-max slope of `ln N(ε)`
/// against `ln(1/ε)`.
pub fn box_dimension_support<T: Real>(
    mu: &AtomicMeasure<T>,
    grid: &ScaleGrid<T>,
) -> Result<PowerLawFit<T>> {
    require_mass(mu)?;
    let samples = grid
        .radii()
        .iter()
        .map(|&e| {
            let n = T::of_usize(box_count(mu, e));
            Sample {
                scale: e,
                value: n,
                log_scale: -e.ln(),
                log_value: n.ln(),
            }
        })
        .collect();
    PowerLawFit::fit(samples, FitMode::WindowedMax)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderBound {
    /// `μ(B(x;r)) ≥ C r^α`.
    Lower,
    /// `μ(B(x;r)) ≤ C r^α`.
    Upper,
}

/// Constants witnessing a uniform Hölder bound on all but `delta` of the mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderWitness<T> {
    pub bound: HolderBound,
    pub alpha: T,
    pub c: T,
    pub r0: T,
    pub r_min: T,
    pub delta: T,
    pub covered_mass_fraction: T,
}

/// Witness for uniform α-Hölder singularity.
pub type UahsWitness<T> = HolderWitness<T>;
/// Witness for uniform α-Hölder continuity.
pub type UahcWitness<T> = HolderWitness<T>;

fn holder_scan<T: Real>(
    mu: &AtomicMeasure<T>,
    alpha: T,
    grid: &ScaleGrid<T>,
    delta: T,
    bound: HolderBound,
) -> Result<HolderWitness<T>> {
    require_mass(mu)?;
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if !(delta > T::zero() && delta < mu.total_mass()) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, total mass), got {delta}"
        )));
    }
    let (xs, ws) = (mu.positions(), mu.weights());
    let scaled: Vec<T> = grid.radii().iter().map(|&r| r.powf(alpha)).collect();
    let live: Vec<usize> = (0..mu.len()).filter(|&i| ws[i] > T::zero()).collect();
    let mut per_atom: Vec<(T, T)> = live
        .par_iter()
        .map(|&i| {
            let ratios = grid
                .radii()
                .iter()
                .zip(&scaled)
                .map(|(&r, &s)| mu.ball_mass_unchecked(xs[i], r) / s);
            let v = match bound {
                HolderBound::Lower => ratios.fold(T::infinity(), T::min),
                HolderBound::Upper => ratios.fold(T::neg_infinity(), T::max),
            };
            (v, ws[i])
        })
        .collect();
    // Worst atoms first; they form the discarded set.
    match bound {
        HolderBound::Lower => per_atom.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite")),
        HolderBound::Upper => per_atom.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite")),
    }
    let mut dropped = T::zero();
    let mut first = 0;
    while first < per_atom.len() && dropped + per_atom[first].1 < delta {
        dropped = dropped + per_atom[first].1;
        first += 1;
    }
    if first == per_atom.len() {
        return Err(Error::AllAtomsDiscarded {
            alpha: alpha.as_f64(),
            delta: delta.as_f64(),
        });
    }
    let kept: T = per_atom[first..].iter().map(|p| p.1).sum();
    Ok(HolderWitness {
        bound,
        alpha,
        c: per_atom[first].0,
        r0: grid.max(),
        r_min: grid.min(),
        delta,
        covered_mass_fraction: kept / mu.total_mass(),
    })
}

/// Largest `C` with `μ(B(x;r)) ≥ C r^α` on the grid for all atoms outside a
/// discarded set of mass below `delta`.
pub fn check_uahs<T: Real>(
    mu: &AtomicMeasure<T>,
    alpha: T,
    grid: &ScaleGrid<T>,
    delta: T,
) -> Result<UahsWitness<T>> {
    holder_scan(mu, alpha, grid, delta, HolderBound::Lower)
}

/// Smallest `C` with `μ(B(x;r)) ≤ C r^α` on the grid for all atoms outside a
/// discarded set of mass below `delta`.
pub fn check_uahc<T: Real>(
    mu: &AtomicMeasure<T>,
    alpha: T,
    grid: &ScaleGrid<T>,
    delta: T,
) -> Result<UahcWitness<T>> {
    holder_scan(mu, alpha, grid, delta, HolderBound::Upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedDimension<T> {
    pub q: T,
    pub fit: PowerLawFit<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionFlags<T> {
    pub alpha: T,
    pub slack: T,
    /// `esssup ≤ α + slack`.
    pub aapds: bool,
    /// `D_q + slack ≥ esssup`.
    pub chain_upper: bool,
    /// `esssup ≥ D_s - slack`.
    pub chain_lower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport<T> {
    pub d_plus_esssup: T,
    pub quantile: T,
    pub d_q: Vec<GeneralizedDimension<T>>,
    pub box_dim_support: PowerLawFit<T>,
    pub flags: DimensionFlags<T>,
}

impl<T: Real> DimensionReport<T> {
    pub fn d(&self, q: T) -> Option<&PowerLawFit<T>> {
        self.d_q.iter().find(|g| g.q == q).map(|g| &g.fit)
    }

    pub fn chain_holds(&self) -> bool {
        self.flags.chain_upper && self.flags.chain_lower
    }
}

/// Assembles `D_q⁺`, the esssup proxy, `D_s⁺` and the box dimension on one
/// scale grid and evaluates the chain `D_q ≥ esssup ≥ D_s` and the `≤ α` flag.
pub fn inequality_report<T: Real>(
    mu: &AtomicMeasure<T>,
    q: T,
    s: T,
    alpha: T,
    grid: &ScaleGrid<T>,
) -> Result<DimensionReport<T>> {
    if !(q < T::one() && s > T::one()) {
        return Err(Error::InvalidParameter(format!(
            "need q < 1 < s, got q = {q}, s = {s}"
        )));
    }
    let quantile = T::lit(DEFAULT_QUANTILE);
    let slack = T::lit(REPORT_SLACK);
    let esssup = esssup_exponent(mu, grid, quantile)?;
    let dq = generalized_dimension_upper(mu, q, grid)?;
    let ds = generalized_dimension_upper(mu, s, grid)?;
    let boxd = box_dimension_support(mu, grid)?;
    let flags = DimensionFlags {
        alpha,
        slack,
        aapds: esssup <= alpha + slack,
        chain_upper: dq.exponent + slack >= esssup,
        chain_lower: esssup >= ds.exponent - slack,
    };
    Ok(DimensionReport {
        d_plus_esssup: esssup,
        quantile,
        d_q: vec![
            GeneralizedDimension { q, fit: dq },
            GeneralizedDimension { q: s, fit: ds },
        ],
        box_dim_support: boxd,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type M = AtomicMeasure<f64>;

    fn grid_1024_to_8() -> ScaleGrid<f64> {
        ScaleGrid::geometric(0.125, 2f64.powi(-10), 0.5).unwrap()
    }

    #[test]
    fn single_atom_exponents() {
        let mu = M::dirac(0.0);
        let g = grid_1024_to_8();
        assert_eq!(
            pointwise_upper_exponent(&mu, 0.0, &g).unwrap().exponent,
            0.0
        );
        assert!(pointwise_upper_exponent(&mu, 5.0, &g)
            .unwrap()
            .is_infinite());
        assert_eq!(
            generalized_dimension_upper(&mu, 0.5, &g).unwrap().exponent,
            0.0
        );
        assert_eq!(box_dimension_support(&mu, &g).unwrap().exponent, 0.0);
        assert!(matches!(
            generalized_dimension_upper(&mu, 1.0, &g),
            Err(Error::QEqualsOne)
        ));
    }

    #[test]
    fn empty_measure_rejected() {
        let mu = M::empty();
        let g = grid_1024_to_8();
        assert_eq!(
            pointwise_upper_exponent(&mu, 0.0, &g),
            Err(Error::EmptyMeasure)
        );
        assert_eq!(esssup_exponent(&mu, &g, 0.99), Err(Error::EmptyMeasure));
    }

    #[test]
    fn correlation_integral_two_atoms() {
        let mu = M::new(&[0.0, 1.0, 3.0], &[0.5, 0.5, 0.0]).unwrap();
        let v = correlation_integral(&mu, 0.5, 0.1).unwrap();
        assert_relative_eq!(v, 2.0 * 0.5 * 0.5f64.powf(-0.5));
        let v = correlation_integral(&mu, 2.0, 2.0).unwrap();
        assert_relative_eq!(v, 1.0);
    }

    #[test]
    fn two_atom_pure_point_esssup_zero() {
        let mu = M::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let g = ScaleGrid::geometric(0.25, 2f64.powi(-10), 0.5).unwrap();
        assert!(esssup_exponent(&mu, &g, 0.99).unwrap().abs() < 1e-9);
    }

    #[test]
    fn uniform_pointwise_at_centre() {
        // Oracle: for the continuum uniform measure μ(B(0.5, r)) = 2r.
        let mu = M::uniform(4096).unwrap();
        let fit = pointwise_upper_exponent(&mu, 0.5, &grid_1024_to_8()).unwrap();
        for s in &fit.samples {
            assert_relative_eq!(s.value, 2.0 * s.scale, epsilon = 1e-12);
        }
        assert!((fit.exponent - 1.0).abs() <= 0.05);
    }

    #[test]
    fn uniform_box_count_matches_ceiling() {
        let mu = M::uniform(4096).unwrap();
        for k in 3..=10 {
            let eps = 2f64.powi(-k);
            // Atoms span [1/8192, 1 - 1/8192]; boxes anchored at the first atom.
            let expected = ((1.0 - 1.0 / 4096.0) / eps).floor() as usize + 1;
            assert_eq!(box_count(&mu, eps), expected);
            assert!(expected.abs_diff((1.0 / eps).ceil() as usize) <= 1);
        }
        let d = box_dimension_support(&mu, &grid_1024_to_8()).unwrap();
        assert!((d.exponent - 1.0).abs() <= 0.05);
    }

    #[test]
    fn cantor_box_count_is_power_of_two() {
        let mu = M::cantor(10).unwrap();
        for k in 1..=8 {
            assert_eq!(box_count(&mu, 3f64.powi(-k)), 1 << k);
        }
    }

    #[test]
    fn cantor_ball_masses_match_ternary_code() {
        // Oracle: an atom at depth 10 shares its first k ternary digits with
        // exactly 2^{10-k} atoms, all inside B(x, 3^{-k}); no other atom is.
        let mu = M::cantor(10).unwrap();
        for &x in mu.positions().iter().step_by(37) {
            for k in 2..=8 {
                let m = mu.ball_mass(x, 3f64.powi(-k)).unwrap();
                assert_relative_eq!(m, 2f64.powi(-k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn uahs_single_atom_alpha_zero() {
        let mu = M::dirac(0.0);
        let w = check_uahs(&mu, 0.0, &grid_1024_to_8(), 0.01).unwrap();
        assert_eq!(w.c, 1.0);
        assert!(w.covered_mass_fraction >= 0.99);
    }

    #[test]
    fn uahs_alpha_zero_gives_smallest_atom_mass() {
        let mu = M::new(&[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5]).unwrap();
        let g = ScaleGrid::geometric(0.4, 0.05, 0.5).unwrap();
        let w = check_uahs(&mu, 0.0, &g, 0.1).unwrap();
        assert_eq!(w.c, 0.2);
        assert_eq!(w.covered_mass_fraction, 1.0);
        let w = check_uahs(&mu, 0.0, &g, 0.25).unwrap();
        assert_eq!(w.c, 0.3);
        assert_relative_eq!(w.covered_mass_fraction, 0.8);
        assert!(matches!(
            check_uahs(&M::dirac(0.0), 0.0, &g, 0.5).map(|_| ()),
            Ok(())
        ));
    }

    #[test]
    fn uahs_uniform_alpha_one() {
        let mu = M::uniform(4096).unwrap();
        let w = check_uahs(&mu, 1.0, &grid_1024_to_8(), 0.05).unwrap();
        assert!(w.c >= 0.9, "C = {}", w.c);
        assert!(w.covered_mass_fraction >= 0.95);
    }

    #[test]
    fn uahs_uniform_alpha_half_degenerates() {
        // μ(B)/√r ≈ 2√r, so the constant collapses to the smallest radius. A
        // closed ball of radius m/4096 around an atom holds 2m+1 atoms.
        let mu = M::uniform(4096).unwrap();
        let g = grid_1024_to_8();
        let w = check_uahs(&mu, 0.5, &g, 0.05).unwrap();
        let m = g.min() * 4096.0;
        assert!(w.c <= (2.0 * m + 1.0) / 4096.0 / g.min().sqrt() + 1e-15);
        assert!(w.c < 2.0 * g.min().sqrt() * 1.2);
    }

    #[test]
    fn uahc_mirror_on_uniform() {
        let mu = M::uniform(4096).unwrap();
        let w = check_uahc(&mu, 1.0, &grid_1024_to_8(), 0.05).unwrap();
        // Closed balls hold 2m+1 atoms of mass 1/4096 at radius m/4096.
        assert!(w.c <= 2.0 * (1.0 + 1.0 / 8.0) && w.c >= 2.0);
    }

    #[test]
    fn cantor_report_chain() {
        let mu = M::cantor(10).unwrap();
        let g = ScaleGrid::powers(3.0, 2, 7).unwrap();
        let r = inequality_report(&mu, 0.5, 2.0, 0.7, &g).unwrap();
        let target = 2f64.ln() / 3f64.ln();
        assert!((r.d_plus_esssup - target).abs() <= 0.05);
        assert!((r.d(0.5).unwrap().exponent - target).abs() <= 0.05);
        assert!((r.d(2.0).unwrap().exponent - target).abs() <= 0.05);
        assert!((r.box_dim_support.exponent - target).abs() <= 0.05);
        assert!(r.chain_holds());
        assert!(r.flags.aapds);
    }

    #[test]
    fn translation_invariance() {
        let mu = M::cantor(8).unwrap();
        let shifted = M::new(
            &mu.positions().iter().map(|x| x + 17.0).collect::<Vec<_>>(),
            mu.weights(),
        )
        .unwrap();
        let g = ScaleGrid::powers(3.0, 2, 6).unwrap();
        let a = generalized_dimension_upper(&mu, 2.0, &g).unwrap().exponent;
        let b = generalized_dimension_upper(&shifted, 2.0, &g)
            .unwrap()
            .exponent;
        assert!((a - b).abs() < 1e-9);
    }
}

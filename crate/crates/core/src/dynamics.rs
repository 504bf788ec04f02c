//! Wavepacket dynamics from `δ_0`: exact evolution in the eigenbasis,
//! Abel-averaged position moments, transport exponents and return probabilities.
//!
//! Abel averages are computed in the energy domain. With `η = 1/t` and
//! `x(E) = (H - E - iη)^{-1} δ_0`, Plancherel gives
//!
//! `(2/t) ∫_0^∞ e^{-2s/t} |⟨δ_n, e^{-isH} δ_0⟩|² ds = (η/π) ∫ |x_n(E)|² dE`.
//!
//! Each `x(E)` is an O(N) continued-fraction solve, and the `E` integral is a
//! composite Gauss–Legendre rule resolving every eigenvalue at scale `η`.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{Eigensystem, SpectralData};
use crate::error::{Error, Result};
use crate::fit::{FitMode, PowerLawFit};
use crate::grid::TimeGrid;
use crate::measure::AtomicMeasure;
use crate::operators::TridiagonalOperator;
use crate::quadrature::{composite, gauss_legendre};
use crate::scalar::Real;

/// Monotonicity slack for transport exponents in `q`.
pub const GK_MONOTONE_SLACK: f64 = 0.02;
/// Admissible range for transport exponents, `[0, 1]` widened by estimator slack.
pub const GK_RANGE: (f64, f64) = (-0.05, 1.05);
/// Slack in `β⁺(q) ≥ dim`.
pub const BLIP_SLACK: f64 = 0.07;

const GL_ORDER: usize = 8;
/// Half-width, in units of `η`, of the window resolved around each eigenvalue.
const CLUSTER_REACH: f64 = 4.0;
/// Panel width inside resolved windows, in units of `η`.
const PANEL_WIDTH: f64 = 0.5;
/// Distance from the spectrum at which the energy integral is cut off.
const FAR_FIELD: f64 = 1e9;
/// Nodes per deterministic accumulation block.
const BLOCK: usize = 64;

/// `a_n(t) = ⟨δ_n, e^{-itH} δ_0⟩` for every site, in site order.
pub fn evolve_amplitudes<T: Real>(es: &Eigensystem<T>, t: T) -> Vec<Complex<T>> {
    let n = es.eigenvalues.len();
    let i0 = es.origin;
    let phases: Vec<Complex<T>> = es
        .eigenvalues
        .iter()
        .zip(&es.vectors)
        .map(|(&e, v)| {
            let (s, c) = (e * t).sin_cos();
            Complex::new(c, -s) * v[i0]
        })
        .collect();
    (0..n)
        .into_par_iter()
        .map(|site| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (p, v) in phases.iter().zip(&es.vectors) {
                acc = acc + *p * v[site];
            }
            acc
        })
        .collect()
}

/// Abel-averaged occupation probabilities `P_t(n)` of every site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupations<T> {
    pub t: T,
    /// Site label of entry 0.
    pub offset: i64,
    pub probabilities: Vec<T>,
}

impl<T: Real> Occupations<T> {
    pub fn total(&self) -> T {
        self.probabilities.iter().copied().sum()
    }

    /// `Σ_n |n|^q P_t(n)`.
    pub fn moment(&self, q: T) -> T {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let n = (i as i64 + self.offset).unsigned_abs();
                if n == 0 {
                    T::zero()
                } else {
                    T::of_usize(n as usize).powf(q) * p
                }
            })
            .sum()
    }
}

/// Breakpoints `0 = s_0 < s_1 < … = len`, starting at `h` and growing so each
/// panel is at most half its distance from the origin.
fn graded(len: f64, h: f64) -> Vec<f64> {
    let mut s = vec![0.0];
    let mut cur = 0.0f64;
    while cur < len {
        let step = h.max(cur * 0.5);
        cur = (cur + step).min(len);
        s.push(cur);
    }
    s
}

/// Quadrature nodes and weights for `∫ dE` resolving Lorentzians of width
/// `eta` at each eigenvalue, plus the far-field distance used for the tail.
fn energy_rule(eigs: &[f64], eta: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let reach = CLUSTER_REACH * eta;
    let h = PANEL_WIDTH * eta;
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for &e in eigs {
        match windows.last_mut() {
            Some(w) if e - reach <= w.1 => w.1 = e + reach,
            _ => windows.push((e - reach, e + reach)),
        }
    }
    let mut breaks: Vec<f64> = Vec::new();
    let lo = windows[0].0;
    for &s in graded(FAR_FIELD, h).iter().rev() {
        breaks.push(lo - s);
    }
    breaks.pop();
    for (i, &(a, b)) in windows.iter().enumerate() {
        let m = ((b - a) / h).ceil().max(1.0) as usize;
        for k in 0..m {
            breaks.push(a + (b - a) * k as f64 / m as f64);
        }
        let next = windows.get(i + 1).map(|w| w.0);
        match next {
            Some(c) => {
                let half = 0.5 * (c - b);
                let left = graded(half, h);
                for &s in &left {
                    breaks.push(b + s);
                }
                breaks.pop();
                for &s in graded(half, h).iter().rev() {
                    breaks.push(c - s);
                }
                breaks.pop();
            }
            None => {
                for &s in &graded(FAR_FIELD, h) {
                    breaks.push(b + s);
                }
            }
        }
    }
    let (x, w) = composite(&breaks, &gauss_legendre::<f64>(GL_ORDER));
    (x, w, FAR_FIELD)
}

/// Continued-fraction solve of `(H - z) x = δ_m` with unit hopping.
/// `left` and `right` are scratch buffers of length `N`.
fn resolvent_column<T: Real>(
    diag: &[T],
    m: usize,
    z: Complex<T>,
    left: &mut [Complex<T>],
    right: &mut [Complex<T>],
    x: &mut [Complex<T>],
) {
    let n = diag.len();
    let one = Complex::new(T::one(), T::zero());
    // left[i] = ℓ_i = a_i - z - 1/ℓ_{i-1}; right[i] = r_i likewise from the end.
    let mut prev: Option<Complex<T>> = None;
    for i in 0..m {
        let mut l = Complex::new(diag[i], T::zero()) - z;
        if let Some(p) = prev {
            l = l - one / p;
        }
        left[i] = l;
        prev = Some(l);
    }
    let mut prev: Option<Complex<T>> = None;
    for i in (m + 1..n).rev() {
        let mut r = Complex::new(diag[i], T::zero()) - z;
        if let Some(p) = prev {
            r = r - one / p;
        }
        right[i] = r;
        prev = Some(r);
    }
    let mut g = Complex::new(diag[m], T::zero()) - z;
    if m > 0 {
        g = g - one / left[m - 1];
    }
    if m + 1 < n {
        g = g - one / right[m + 1];
    }
    x[m] = one / g;
    for i in (0..m).rev() {
        x[i] = -x[i + 1] / left[i];
    }
    for i in m + 1..n {
        x[i] = -x[i - 1] / right[i];
    }
}

/// Abel-averaged dynamics of `δ_0` under a finite operator.
#[derive(Debug, Clone)]
pub struct WavePacket<T> {
    op: TridiagonalOperator<T>,
    eigenvalues: Vec<T>,
}

impl<T: Real> WavePacket<T> {
    pub fn new(op: TridiagonalOperator<T>, eigenvalues: Vec<T>) -> Self {
        Self { op, eigenvalues }
    }

    pub fn operator(&self) -> &TridiagonalOperator<T> {
        &self.op
    }

    /// Largest Abel time for which the ballistic front, moving at most at the
    /// hopping speed 2, stays a quarter-box away from the boundary: `N/(2·2)`.
    pub fn light_cone_limit(&self) -> T {
        T::of_usize(self.op.len()) / T::lit(4.0)
    }

    fn check_light_cone(&self, t: T) -> Result<()> {
        let limit = self.light_cone_limit();
        if t > limit {
            return Err(Error::LightCone {
                t: t.as_f64(),
                t_max: limit.as_f64(),
            });
        }
        Ok(())
    }

    /// `P_t(n)` for every site of the finite box, without the light-cone check.
    pub fn occupations(&self, t: T) -> Result<Occupations<T>> {
        if !(t > T::zero()) || !t.is_finite() {
            return Err(Error::NonPositiveTime(t.as_f64()));
        }
        let n = self.op.len();
        let m = self.op.index_of(0).expect("site 0 present");
        let eta = T::one() / t;
        let eigs: Vec<f64> = self.eigenvalues.iter().map(|e| e.as_f64()).collect();
        let (nodes, weights, far) = energy_rule(&eigs, eta.as_f64());
        let diag = self.op.diagonal();

        let blocks: Vec<Vec<T>> = nodes
            .par_chunks(BLOCK)
            .zip(weights.par_chunks(BLOCK))
            .map(|(xs, ws)| {
                let zero = Complex::new(T::zero(), T::zero());
                let mut left = vec![zero; n];
                let mut right = vec![zero; n];
                let mut x = vec![zero; n];
                let mut acc = vec![T::zero(); n];
                for (&e, &w) in xs.iter().zip(ws) {
                    let z = Complex::new(T::lit(e), eta);
                    resolvent_column(diag, m, z, &mut left, &mut right, &mut x);
                    let w = T::lit(w);
                    for (a, xi) in acc.iter_mut().zip(&x) {
                        *a = *a + w * xi.norm_sqr();
                    }
                }
                acc
            })
            .collect();
        let scale = eta / T::PI();
        let mut probabilities = vec![T::zero(); n];
        for b in &blocks {
            for (p, v) in probabilities.iter_mut().zip(b) {
                *p = *p + *v;
            }
        }
        for p in probabilities.iter_mut() {
            *p = *p * scale;
        }
        // Beyond the far field only δ_0 survives: |x_0|² ≈ 1/E².
        probabilities[m] = probabilities[m] + scale * T::lit(2.0 / far);
        Ok(Occupations {
            t,
            offset: self.op.offset(),
            probabilities,
        })
    }

    /// `⟨M^q⟩(t) = Σ_n |n|^q P_t(n)`, inside the light cone.
    pub fn abel_moment(&self, q: T, t: T) -> Result<T> {
        self.check_light_cone(t)?;
        Ok(self.occupations(t)?.moment(q))
    }

    /// Moments for several `q` on a time grid, sharing one occupation profile per time.
    pub fn transport_series(
        &self,
        q_list: &[T],
        grid: &TimeGrid<T>,
    ) -> Result<Vec<TransportSeries<T>>> {
        if q_list.is_empty() || q_list.iter().any(|q| !(*q > T::zero())) {
            return Err(Error::InvalidParameter(
                "moment orders must be positive".into(),
            ));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidGrid(
                "transport fits need at least 2 times".into(),
            ));
        }
        self.check_light_cone(grid.max())?;
        let occ = grid
            .times()
            .iter()
            .map(|&t| self.occupations(t))
            .collect::<Result<Vec<_>>>()?;
        q_list
            .iter()
            .map(|&q| {
                let moments: Vec<T> = occ.iter().map(|o| o.moment(q)).collect();
                TransportSeries::new(q, grid.times().to_vec(), moments)
            })
            .collect()
    }

    /// Transport exponents for a single `q`.
    pub fn transport_exponents(&self, q: T, grid: &TimeGrid<T>) -> Result<TransportSeries<T>> {
        Ok(self.transport_series(&[q], grid)?.remove(0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSeries<T> {
    pub q: T,
    pub t_grid: Vec<T>,
    pub moments: Vec<T>,
    pub beta_plus: PowerLawFit<T>,
    pub beta_minus: PowerLawFit<T>,
}

impl<T: Real> TransportSeries<T> {
    /// Fits `ln⟨M^q⟩ / q` against `ln t`: windowed-max for `β⁺`, windowed-min for `β⁻`.
    pub fn new(q: T, t_grid: Vec<T>, moments: Vec<T>) -> Result<Self> {
        let beta_plus = PowerLawFit::from_values(&t_grid, &moments, q, FitMode::WindowedMax)?;
        let beta_minus = PowerLawFit::from_values(&t_grid, &moments, q, FitMode::WindowedMin)?;
        Ok(Self {
            q,
            t_grid,
            moments,
            beta_plus,
            beta_minus,
        })
    }

    /// Writes `t,moment` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,moment")?;
        for (&t, &m) in self.t_grid.iter().zip(&self.moments) {
            writeln!(out, "{:.16e},{:.16e}", t.as_f64(), m.as_f64())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow<T> {
    pub q: T,
    pub beta_plus: T,
    pub beta_minus: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkReport<T> {
    pub rows: Vec<ExponentRow<T>>,
    pub monotone_slack: T,
    pub range: (T, T),
    /// Largest drop `β(q_i) - β(q_{i+1})` over consecutive orders, both signs.
    pub worst_drop: T,
    pub monotone: bool,
    pub in_range: bool,
    pub pass: bool,
}

/// Monotonicity in `q` and the range clause for a family of transport series.
pub fn gk_report<T: Real>(series: &[TransportSeries<T>]) -> GkReport<T> {
    let rows: Vec<ExponentRow<T>> = series
        .iter()
        .map(|s| ExponentRow {
            q: s.q,
            beta_plus: s.beta_plus.exponent,
            beta_minus: s.beta_minus.exponent,
        })
        .collect();
    let slack = T::lit(GK_MONOTONE_SLACK);
    let range = (T::lit(GK_RANGE.0), T::lit(GK_RANGE.1));
    let worst_drop = rows
        .windows(2)
        .flat_map(|w| {
            [
                w[0].beta_plus - w[1].beta_plus,
                w[0].beta_minus - w[1].beta_minus,
            ]
        })
        .fold(T::neg_infinity(), T::max);
    let monotone = rows.len() < 2 || worst_drop <= slack;
    let in_range = rows.iter().all(|r| {
        [r.beta_plus, r.beta_minus]
            .iter()
            .all(|&b| b >= range.0 && b <= range.1)
    });
    GkReport {
        rows,
        monotone_slack: slack,
        range,
        worst_drop,
        monotone,
        in_range,
        pass: monotone && in_range,
    }
}

/// Transport exponents for increasing `q_list` and their monotonicity/range report.
pub fn gk_check<T: Real>(
    packet: &WavePacket<T>,
    q_list: &[T],
    grid: &TimeGrid<T>,
) -> Result<(Vec<TransportSeries<T>>, GkReport<T>)> {
    if q_list.len() < 2 || q_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "q list must be increasing with at least 2 entries".into(),
        ));
    }
    let series = packet.transport_series(q_list, grid)?;
    let report = gk_report(&series);
    Ok((series, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlipReport<T> {
    pub dimension: T,
    pub slack: T,
    pub rows: Vec<ExponentRow<T>>,
    /// `min_q β⁺(q) - dimension`.
    pub margin: T,
    pub pass: bool,
}

/// `β⁺(q) ≥ dimension - slack` for every computed `q`.
pub fn blip_check<T: Real>(dimension: T, series: &[TransportSeries<T>]) -> BlipReport<T> {
    let slack = T::lit(BLIP_SLACK);
    let rows: Vec<ExponentRow<T>> = series
        .iter()
        .map(|s| ExponentRow {
            q: s.q,
            beta_plus: s.beta_plus.exponent,
            beta_minus: s.beta_minus.exponent,
        })
        .collect();
    let margin = rows
        .iter()
        .map(|r| r.beta_plus - dimension)
        .fold(T::infinity(), T::min);
    BlipReport {
        dimension,
        slack,
        rows,
        pass: margin >= -slack,
        margin,
    }
}

/// `p(t) = |Σ_j w_j e^{-itE_j}|²`.
pub fn return_probability_at<T: Real>(eigenvalues: &[T], weights: &[T], t: T) -> T {
    let (mut re, mut im) = (T::zero(), T::zero());
    for (&e, &w) in eigenvalues.iter().zip(weights) {
        let (s, c) = (e * t).sin_cos();
        re = re + w * c;
        im = im - w * s;
    }
    re * re + im * im
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries<T> {
    pub t_grid: Vec<T>,
    pub p_values: Vec<T>,
    pub averaged: Vec<T>,
}

impl<T: Real> ReturnSeries<T> {
    /// Writes `t,p,avg_p` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,p,avg_p")?;
        for i in 0..self.t_grid.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.t_grid[i].as_f64(),
                self.p_values[i].as_f64(),
                self.averaged[i].as_f64()
            )?;
        }
        Ok(())
    }
}

/// Return probabilities of `δ_0` and their time averages `(1/t)∫₀ᵗ p(s) ds`.
pub fn return_probability<T: Real>(
    sd: &SpectralData<T>,
    grid: &TimeGrid<T>,
) -> Result<ReturnSeries<T>> {
    let mu = AtomicMeasure::new(&sd.eigenvalues, &sd.weights_site0)?;
    let p_values = grid
        .times()
        .iter()
        .map(|&t| return_probability_at(&sd.eigenvalues, &sd.weights_site0, t))
        .collect();
    let averaged = grid
        .times()
        .iter()
        .map(|&t| mu.averaged_fourier_sq(t))
        .collect::<Result<Vec<T>>>()?;
    Ok(ReturnSeries {
        t_grid: grid.times().to_vec(),
        p_values,
        averaged,
    })
}

//! Limit-periodic potentials sampled along orbits of the dyadic odometer, and
//! their finite Dirichlet truncations `(Hψ)_n = ψ_{n+1} + ψ_{n-1} + V_n ψ_n`.

use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Deepest layer accepted in a spec; pattern tables have `2^k` entries.
pub const MAX_LAYER_EXPONENT: u32 = 24;

/// First `K` binary coordinates of a point of the dyadic odometer.
/// Coordinate 0 is the least significant digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OdometerPoint {
    bits: Vec<u8>,
}

impl OdometerPoint {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter(
                "odometer point needs at least one coordinate".into(),
            ));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(
                "odometer coordinates must be 0 or 1".into(),
            ));
        }
        Ok(Self { bits })
    }

    pub fn zero(len: usize) -> Self {
        Self {
            bits: vec![0; len.max(1)],
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Adds one with carry; all-ones wraps to all-zeros.
    pub fn step(&self) -> Self {
        let mut bits = self.bits.clone();
        for b in bits.iter_mut() {
            if *b == 0 {
                *b = 1;
                return Self { bits };
            }
            *b = 0;
        }
        Self { bits }
    }

    /// Integer value of the first `k` coordinates.
    pub fn offset(&self, k: u32) -> u64 {
        self.bits[..k as usize]
            .iter()
            .rev()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }
}

/// One periodic layer: `amplitude · pattern[m mod 2^k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    pub k: u32,
    pub amplitude: T,
    pub pattern: Vec<T>,
}

impl<T: Real> Layer<T> {
    pub fn new(k: u32, amplitude: T, pattern: Vec<T>) -> Result<Self> {
        if k == 0 || k > MAX_LAYER_EXPONENT {
            return Err(Error::InvalidParameter(format!(
                "layer exponent must lie in 1..={MAX_LAYER_EXPONENT}, got {k}"
            )));
        }
        if pattern.len() != 1usize << k {
            return Err(Error::InvalidParameter(format!(
                "layer k = {k} needs {} pattern entries, got {}",
                1usize << k,
                pattern.len()
            )));
        }
        if !amplitude.is_finite() || pattern.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "layer k = {k} has non-finite entries"
            )));
        }
        let peak = pattern.iter().fold(T::zero(), |m, p| m.max(p.abs()));
        if (peak - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "layer k = {k} pattern must have max |entry| = 1, got {peak}"
            )));
        }
        Ok(Self {
            k,
            amplitude,
            pattern,
        })
    }

    pub fn period(&self) -> usize {
        1usize << self.k
    }

    fn at(&self, m: i64) -> T {
        let p = self.period() as i64;
        self.amplitude * self.pattern[m.rem_euclid(p) as usize]
    }
}

/// Sampling function on the odometer written as a finite sum of periodic layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPeriodicSpec<T> {
    layers: Vec<Layer<T>>,
}

/// `t(m)`: parity of the number of ones in the binary expansion of `m`.
pub fn thue_morse(m: u64) -> u8 {
    (m.count_ones() & 1) as u8
}

impl<T: Real> LimitPeriodicSpec<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Result<Self> {
        if layers.windows(2).any(|w| w[1].k <= w[0].k) {
            return Err(Error::InvalidParameter(
                "layer periods must be strictly increasing".into(),
            ));
        }
        Ok(Self { layers })
    }

    /// `V_n = λ (-1)^n`.
    pub fn period_two(lambda: T) -> Self {
        Self {
            layers: vec![Layer {
                k: 1,
                amplitude: lambda,
                pattern: vec![T::one(), -T::one()],
            }],
        }
    }

    /// Layers `k = 1..=6` with amplitudes `4^{-k²}` and patterns given by the
    /// first `2^k` signs `1 - 2 t(m)` of the Thue–Morse sequence.
    pub fn canonical() -> Self {
        let layers = (1..=6u32)
            .map(|k| Layer {
                k,
                amplitude: T::lit(4f64.powi(-((k * k) as i32))),
                pattern: (0..1u64 << k)
                    .map(|m| T::lit(1.0 - 2.0 * thue_morse(m) as f64))
                    .collect(),
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn max_k(&self) -> u32 {
        self.layers.last().map_or(0, |l| l.k)
    }

    /// `g` at the odometer point whose first `max_k` coordinates encode `m`.
    fn g(&self, m: i64) -> T {
        self.layers.iter().map(|l| l.at(m)).sum()
    }

    /// `V_n(κ) = g(τ^n κ)` for `n` in `range`.
    pub fn sample_potential(&self, kappa: &OdometerPoint, range: Range<i64>) -> Result<Vec<T>> {
        let need = self.max_k() as usize;
        if kappa.len() < need {
            return Err(Error::ShortOdometer {
                len: kappa.len(),
                needed: need,
            });
        }
        Ok(range
            .map(|n| {
                self.layers
                    .iter()
                    .map(|l| l.at(n + kappa.offset(l.k) as i64))
                    .sum()
            })
            .collect())
    }

    /// Keeps the layers with `k ≤ depth` and returns the sup-norm distance
    /// `‖g - g_depth‖_∞`, evaluated exactly over one full period.
    pub fn periodic_approximant(&self, depth: u32) -> (Self, T) {
        let kept: Vec<Layer<T>> = self
            .layers
            .iter()
            .filter(|l| l.k <= depth)
            .cloned()
            .collect();
        let dropped = Self {
            layers: self
                .layers
                .iter()
                .filter(|l| l.k > depth)
                .cloned()
                .collect(),
        };
        let period = 1i64 << dropped.max_k();
        let distance = if dropped.layers.is_empty() {
            T::zero()
        } else {
            (0..period).fold(T::zero(), |m, n| m.max(dropped.g(n).abs()))
        };
        (Self { layers: kept }, distance)
    }

    /// `Σ |amplitude|`, an upper bound for `‖g‖_∞`.
    pub fn amplitude_sum(&self) -> T {
        self.layers.iter().map(|l| l.amplitude.abs()).sum()
    }

    /// Parses lines `k amplitude p_0 … p_{2^k-1}`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut layers = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let mut tok = line.split_whitespace();
            let k: u32 = tok
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| bad("expected layer exponent".into()))?;
            let amp: f64 = tok
                .next()
                .ok_or_else(|| bad("missing amplitude".into()))?
                .parse()
                .map_err(|_| bad("bad amplitude".into()))?;
            let pattern = tok
                .map(|s| {
                    s.parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| bad(format!("bad pattern entry `{s}`")))
                })
                .collect::<Result<Vec<T>>>()?;
            let layer = Layer::new(k, T::lit(amp), pattern).map_err(|e| bad(e.to_string()))?;
            layers.push(layer);
        }
        if layers.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "spec has no layers".into(),
            });
        }
        Self::new(layers)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# k amplitude pattern...\n");
        for l in &self.layers {
            write!(s, "{} {:e}", l.k, l.amplitude.as_f64()).expect("string write");
            for p in &l.pattern {
                write!(s, " {}", p.as_f64()).expect("string write");
            }
            s.push('\n');
        }
        s
    }
}

/// Dirichlet truncation with unit hopping. Entry `i` is site `i + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalOperator<T> {
    diagonal: Vec<T>,
    offset: i64,
}

impl<T: Real> TridiagonalOperator<T> {
    /// Sites `-⌊N/2⌋, …, N - 1 - ⌊N/2⌋`, so sites 0 and -1 are interior for `N ≥ 3`.
    pub fn new(potential: Vec<T>) -> Result<Self> {
        if potential.len() < 2 {
            return Err(Error::TooFewSites(potential.len()));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "potential has non-finite entries".into(),
            ));
        }
        let offset = -((potential.len() / 2) as i64);
        Ok(Self {
            diagonal: potential,
            offset,
        })
    }

    /// Potential of `spec` along the orbit of `kappa` on the centred window of `n` sites.
    pub fn from_spec(spec: &LimitPeriodicSpec<T>, kappa: &OdometerPoint, n: usize) -> Result<Self> {
        let lo = -((n / 2) as i64);
        Self::new(spec.sample_potential(kappa, lo..lo + n as i64)?)
    }

    /// Free Laplacian on `n` sites.
    pub fn free(n: usize) -> Result<Self> {
        Self::new(vec![T::zero(); n])
    }

    /// Free Laplacian with a single large well at site 0.
    pub fn trap(n: usize, height: T) -> Result<Self> {
        let mut op = Self::free(n)?;
        let i0 = op.index_of(0).expect("site 0 present");
        op.diagonal[i0] = height;
        Ok(op)
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn site(&self, index: usize) -> i64 {
        index as i64 + self.offset
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        let i = site - self.offset;
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    pub fn off_diagonal(&self) -> Vec<T> {
        vec![T::one(); self.len() - 1]
    }

    /// `2 + max|V|`, a bound for the operator norm.
    pub fn norm_bound(&self) -> T {
        T::lit(2.0) + self.diagonal.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> T {
        let n = self.len();
        (0..n)
            .map(|i| {
                let hops = (i > 0) as usize + (i + 1 < n) as usize;
                self.diagonal[i].abs() + T::of_usize(hops)
            })
            .fold(T::zero(), T::max)
    }

    /// `Hψ`.
    pub fn apply(&self, psi: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diagonal[i] * psi[i];
                if i > 0 {
                    v = v + psi[i - 1];
                }
                if i + 1 < n {
                    v = v + psi[i + 1];
                }
                v
            })
            .collect()
    }

    /// Writes `site,V` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "site,V")?;
        for (i, v) in self.diagonal.iter().enumerate() {
            writeln!(out, "{},{:.16e}", self.site(i), v.as_f64())?;
        }
        Ok(())
    }
}

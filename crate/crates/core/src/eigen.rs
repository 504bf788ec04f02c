//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues and inverse iteration for the eigenvectors.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::operators::TridiagonalOperator;
use crate::scalar::Real;

/// Largest matrix handled by [`eigensolve`].
pub const MAX_SPECTRAL_SIZE: usize = 1 << 14;

/// Largest matrix for which [`eigendecompose`] keeps every eigenvector.
pub const MAX_FULL_SIZE: usize = 1 << 12;

/// Consecutive eigenvalues closer than this (relative to the hopping scale)
/// have their eigenvectors orthogonalised against each other.
const CLUSTER_GAP: f64 = 1e-4;

const MAX_INVERSE_ITERATIONS: usize = 8;

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` strictly below `x`.
pub fn sturm_count<T: Real>(d: &[T], e: &[T], x: T, pivmin: T) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < T::zero() {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

fn pivmin<T: Real>(e: &[T]) -> T {
    let emax = e.iter().fold(T::one(), |m, &x| m.max(x * x));
    T::min_positive_value() * emax
}

fn gershgorin<T: Real>(d: &[T], e: &[T]) -> (T, T) {
    let n = d.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { T::zero() }
            + if i + 1 < n { e[i].abs() } else { T::zero() };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = (hi - lo).max(T::one()) * T::lit(4.0) * T::epsilon();
    (lo - pad, hi + pad)
}

/// All eigenvalues in increasing order by bisection on Sturm counts.
pub fn eigenvalues<T: Real>(d: &[T], e: &[T]) -> Vec<T> {
    let n = d.len();
    let (lo, hi) = gershgorin(d, e);
    let pm = pivmin(e);
    let scale = lo.abs().max(hi.abs());
    (0..n)
        .into_par_iter()
        .map(|j| {
            // j-th eigenvalue: smallest x with count(x) > j.
            let (mut a, mut b) = (lo, hi);
            let tol = T::lit(2.0) * T::epsilon() * scale + pm;
            while b - a > tol {
                let mid = a + (b - a) * T::lit(0.5);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(d, e, mid, pm) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            a + (b - a) * T::lit(0.5)
        })
        .collect()
}

/// LU factorisation of `T - λI` with partial pivoting, stored as the
/// multipliers, pivot flags and the three diagonals of `U`.
struct ShiftedLu<T> {
    mult: Vec<T>,
    swap: Vec<bool>,
    u0: Vec<T>,
    u1: Vec<T>,
    u2: Vec<T>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(d: &[T], e: &[T], lambda: T, tiny: T) -> Self {
        let n = d.len();
        let mut mult = vec![T::zero(); n.saturating_sub(1)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let mut u0 = vec![T::zero(); n];
        let mut u1 = vec![T::zero(); n];
        let mut u2 = vec![T::zero(); n];
        // Current (not yet eliminated) row, columns i, i+1, i+2.
        let (mut c0, mut c1, mut c2) = (
            d[0] - lambda,
            if n > 1 { e[0] } else { T::zero() },
            T::zero(),
        );
        for i in 0..n - 1 {
            let sub = e[i];
            let nd = d[i + 1] - lambda;
            let ns = if i + 2 < n { e[i + 1] } else { T::zero() };
            if sub.abs() > c0.abs() {
                swap[i] = true;
                let m = c0 / sub;
                mult[i] = m;
                u0[i] = sub;
                u1[i] = nd;
                u2[i] = ns;
                (c0, c1, c2) = (c1 - m * nd, c2 - m * ns, T::zero());
            } else {
                if c0 == T::zero() {
                    c0 = tiny;
                }
                let m = sub / c0;
                mult[i] = m;
                u0[i] = c0;
                u1[i] = c1;
                u2[i] = c2;
                (c0, c1, c2) = (nd - m * c1, ns - m * c2, T::zero());
            }
        }
        u0[n - 1] = if c0.abs() < tiny { tiny } else { c0 };
        for p in u0.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < T::zero() { -tiny } else { tiny };
            }
        }
        Self {
            mult,
            swap,
            u0,
            u1,
            u2,
        }
    }

    fn solve(&self, b: &mut [T]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] = b[i + 1] - self.mult[i] * b[i];
        }
        b[n - 1] = b[n - 1] / self.u0[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.u1[n - 2] * b[n - 1]) / self.u0[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.u1[i] * b[i + 1] - self.u2[i] * b[i + 2]) / self.u0[i];
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn normalize<T: Real>(v: &mut [T]) -> T {
    let nrm = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x = *x / nrm;
    }
    nrm
}

fn residual<T: Real>(d: &[T], e: &[T], lambda: T, v: &[T]) -> T {
    let n = d.len();
    let mut acc = T::zero();
    for i in 0..n {
        let mut r = (d[i] - lambda) * v[i];
        if i > 0 {
            r = r + e[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r = r + e[i] * v[i + 1];
        }
        acc = acc + r * r;
    }
    acc.sqrt()
}

/// Eigenvectors for the given sorted eigenvalues. Near-degenerate groups are
/// orthogonalised by Gram–Schmidt inside the group.
pub fn eigenvectors<T: Real>(d: &[T], e: &[T], lambdas: &[T]) -> Result<Vec<Vec<T>>> {
    let n = d.len();
    let (lo, hi) = gershgorin(d, e);
    let norm = lo.abs().max(hi.abs()).max(T::one());
    let hop = e
        .iter()
        .fold(T::zero(), |m, x| m.max(x.abs()))
        .max(T::min_positive_value());
    let gap = T::lit(CLUSTER_GAP) * hop;
    let tiny = T::epsilon() * norm;
    let res_tol = T::lit(1e3) * T::epsilon() * norm * T::of_usize(n).sqrt();

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for j in 1..=lambdas.len() {
        if j == lambdas.len() || lambdas[j] - lambdas[j - 1] > gap {
            clusters.push((start, j));
            start = j;
        }
    }

    let per_cluster: Vec<Vec<Vec<T>>> = clusters
        .par_iter()
        .map(|&(a, b)| {
            let mut vecs: Vec<Vec<T>> = Vec::with_capacity(b - a);
            for j in a..b {
                let lu = ShiftedLu::factor(d, e, lambdas[j], tiny);
                let mut rng = ChaCha8Rng::seed_from_u64(j as u64);
                let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
                normalize(&mut v);
                let mut done = false;
                for _ in 0..MAX_INVERSE_ITERATIONS {
                    lu.solve(&mut v);
                    for _ in 0..2 {
                        for u in &vecs {
                            let c = dot(u, &v);
                            for (x, &y) in v.iter_mut().zip(u) {
                                *x = *x - c * y;
                            }
                        }
                    }
                    normalize(&mut v);
                    if residual(d, e, lambdas[j], &v) <= res_tol {
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(Error::NoConvergence { index: j });
                }
                // Fix the sign so the largest component is positive.
                let (imax, _) = v
                    .iter()
                    .enumerate()
                    .fold((0, T::zero()), |(bi, bv), (i, &x)| {
                        if x.abs() > bv {
                            (i, x.abs())
                        } else {
                            (bi, bv)
                        }
                    });
                if v[imax] < T::zero() {
                    for x in v.iter_mut() {
                        *x = -*x;
                    }
                }
                vecs.push(v);
            }
            Ok(vecs)
        })
        .collect::<Result<_>>()?;
    Ok(per_cluster.into_iter().flatten().collect())
}

/// Eigenvalues with the squared overlaps of the eigenvectors with `δ_0` and `δ_{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData<T> {
    pub eigenvalues: Vec<T>,
    pub weights_site0: Vec<T>,
    pub weights_site_minus1: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Site {
    Zero,
    MinusOne,
}

impl<T: Real> SpectralData<T> {
    pub fn weights(&self, site: Site) -> &[T] {
        match site {
            Site::Zero => &self.weights_site0,
            Site::MinusOne => &self.weights_site_minus1,
        }
    }

    /// Spectral measure of `δ_0` or `δ_{-1}`.
    pub fn spectral_measure(&self, site: Site) -> Result<AtomicMeasure<T>> {
        AtomicMeasure::new(&self.eigenvalues, self.weights(site))
    }

    /// Writes `eigenvalue,weight0,weight_m1` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "eigenvalue,weight0,weight_m1")?;
        for i in 0..self.eigenvalues.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.eigenvalues[i].as_f64(),
                self.weights_site0[i].as_f64(),
                self.weights_site_minus1[i].as_f64()
            )?;
        }
        Ok(())
    }
}

/// Full eigendecomposition; `vectors[j]` belongs to `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem<T> {
    pub eigenvalues: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    /// Index of site 0.
    pub origin: usize,
}

impl<T: Real> Eigensystem<T> {
    pub fn spectral_data(&self) -> SpectralData<T> {
        let i0 = self.origin;
        let w = |i: usize| self.vectors.iter().map(|v| v[i] * v[i]).collect();
        SpectralData {
            eigenvalues: self.eigenvalues.clone(),
            weights_site0: w(i0),
            weights_site_minus1: if i0 > 0 {
                w(i0 - 1)
            } else {
                vec![T::zero(); self.eigenvalues.len()]
            },
        }
    }
}

fn operator_parts<T: Real>(
    h: &TridiagonalOperator<T>,
    max: usize,
) -> Result<(Vec<T>, Vec<T>, usize)> {
    if h.len() > max {
        return Err(Error::TooLarge { n: h.len(), max });
    }
    let origin = h.index_of(0).expect("site 0 lies in every centred window");
    Ok((h.diagonal().to_vec(), h.off_diagonal(), origin))
}

/// Eigenvalues of `h` with the spectral weights of `δ_0` and `δ_{-1}`.
pub fn eigensolve<T: Real>(h: &TridiagonalOperator<T>) -> Result<SpectralData<T>> {
    let (d, e, i0) = operator_parts(h, MAX_SPECTRAL_SIZE)?;
    let lambdas = eigenvalues(&d, &e);
    let vecs = eigenvectors(&d, &e, &lambdas)?;
    let pick = |i: usize| vecs.iter().map(|v| v[i] * v[i]).collect();
    Ok(SpectralData {
        eigenvalues: lambdas,
        weights_site0: pick(i0),
        weights_site_minus1: pick(i0 - 1),
    })
}

/// Eigenvalues and every eigenvector of `h`.
pub fn eigendecompose<T: Real>(h: &TridiagonalOperator<T>) -> Result<Eigensystem<T>> {
    let (d, e, origin) = operator_parts(h, MAX_FULL_SIZE)?;
    let eigenvalues = eigenvalues(&d, &e);
    let vectors = eigenvectors(&d, &e, &eigenvalues)?;
    Ok(Eigensystem {
        eigenvalues,
        vectors,
        origin,
    })
}

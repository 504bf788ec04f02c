//! Gauss–Legendre rules.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration on `P_n` from Chebyshev starting guesses.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nn = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nn + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nn * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// Composite rule: the `n`-point rule mapped onto each `[breaks[i], breaks[i+1]]`.
pub fn composite<T: Real>(breaks: &[T], rule: &(Vec<T>, Vec<T>)) -> (Vec<T>, Vec<T>) {
    let (xs, ws) = rule;
    let half = T::lit(0.5);
    let mut nodes = Vec::with_capacity(breaks.len().saturating_sub(1) * xs.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = (a + b) * half;
        let h = (b - a) * half;
        for (&x, &wt) in xs.iter().zip(ws) {
            nodes.push(c + h * x);
            weights.push(h * wt);
        }
    }
    (nodes, weights)
}

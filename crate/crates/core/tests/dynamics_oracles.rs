//! Abel-averaged occupations checked against two independent computations:
//! the eigenbasis Lorentzian pair sum and direct time-domain quadrature.

use packdim::dynamics::{evolve_amplitudes, WavePacket};
use packdim::eigen::{eigendecompose, eigensolve, Eigensystem};
use packdim::operators::{LimitPeriodicSpec, OdometerPoint, TridiagonalOperator};
use packdim::quadrature::{composite, gauss_legendre};

type Op = TridiagonalOperator<f64>;

fn packet(op: &Op) -> WavePacket<f64> {
    let sd = eigensolve(op).unwrap();
    WavePacket::new(op.clone(), sd.eigenvalues)
}

/// `P_t(n) = Σ_{j,k} c_j c_k / (1 + ((E_j - E_k) t / 2)²)` with `c_j = v_j(0) v_j(n)`.
fn lorentzian_occupations(es: &Eigensystem<f64>, t: f64) -> Vec<f64> {
    let n = es.eigenvalues.len();
    let i0 = es.origin;
    (0..n)
        .map(|site| {
            let c: Vec<f64> = es.vectors.iter().map(|v| v[i0] * v[site]).collect();
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let x = (es.eigenvalues[j] - es.eigenvalues[k]) * t * 0.5;
                    acc += c[j] * c[k] / (1.0 + x * x);
                }
            }
            acc
        })
        .collect()
}

/// `(2/t) ∫_0^{20t} e^{-2s/t} |a_n(s)|² ds` by composite Gauss–Legendre.
fn time_domain_occupations(es: &Eigensystem<f64>, t: f64, norm: f64) -> Vec<f64> {
    let s_max = 20.0 * t;
    let width = t.min(std::f64::consts::PI / norm) / 4.0;
    let panels = (s_max / width).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| s_max * i as f64 / panels as f64)
        .collect();
    let (nodes, weights) = composite(&breaks, &gauss_legendre(8));
    let mut p = vec![0.0; es.eigenvalues.len()];
    for (&s, &w) in nodes.iter().zip(&weights) {
        let a = evolve_amplitudes(es, s);
        let k = w * (2.0 / t) * (-2.0 * s / t).exp();
        for (pi, ai) in p.iter_mut().zip(&a) {
            *pi += k * ai.norm_sqr();
        }
    }
    p
}

fn fixtures(n: usize) -> Vec<(&'static str, Op)> {
    vec![
        ("free", Op::free(n).unwrap()),
        (
            "period-2",
            Op::from_spec(
                &LimitPeriodicSpec::period_two(1.0),
                &OdometerPoint::zero(1),
                n,
            )
            .unwrap(),
        ),
        ("trap", Op::trap(n, 1e3).unwrap()),
        (
            "canonical",
            Op::from_spec(&LimitPeriodicSpec::canonical(), &OdometerPoint::zero(6), n).unwrap(),
        ),
    ]
}

#[test]
fn occupations_match_lorentzian_pair_sum() {
    for (name, op) in fixtures(96) {
        let es = eigendecompose(&op).unwrap();
        let p = packet(&op);
        for t in [0.7, 5.0, 24.0] {
            let occ = p.occupations(t).unwrap();
            let oracle = lorentzian_occupations(&es, t);
            for (i, (a, b)) in occ.probabilities.iter().zip(&oracle).enumerate() {
                assert!(
                    (a - b).abs() < 1e-10,
                    "{name} t={t} site index {i}: {a} vs {b}"
                );
            }
            assert!(
                (occ.total() - 1.0).abs() < 1e-10,
                "{name}: total {}",
                occ.total()
            );
        }
    }
}

#[test]
fn occupations_match_time_domain_quadrature() {
    for (name, op) in fixtures(32) {
        if name == "trap" {
            // Panel width π/‖H‖ makes the literal quadrature needlessly long here.
            continue;
        }
        let es = eigendecompose(&op).unwrap();
        let p = packet(&op);
        let t = 3.0;
        let occ = p.occupations(t).unwrap();
        let oracle = time_domain_occupations(&es, t, op.norm_bound());
        for (a, b) in occ.probabilities.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn free_second_moment_is_ballistic() {
    // On the infinite lattice Σ n² |a_n(s)|² = 2s², whose Abel average is t².
    let p = packet(&Op::free(2048).unwrap());
    let t = 100.0;
    let m = p.abel_moment(2.0, t).unwrap();
    let c = m / (t * t);
    assert!((c - 1.0).abs() < 0.01, "c = {c}");
}

#[test]
fn unitarity_and_light_cone() {
    for (name, op) in fixtures(512) {
        let es = eigendecompose(&op).unwrap();
        let norm = op.norm_bound();
        for t in [0.0, 1.0, 10.0, 60.0] {
            let a = evolve_amplitudes(&es, t);
            let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-10, "{name} t={t}: {total}");
            let reach = 2.0 * norm * t + 20.0;
            let leak: f64 = a
                .iter()
                .enumerate()
                .filter(|(i, _)| (op.site(*i) as f64).abs() > reach)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            assert!(leak < 1e-10, "{name} t={t}: leak {leak}");
        }
    }
}

#[test]
fn moments_nondecreasing_in_q() {
    let p = packet(&Op::free(512).unwrap());
    for t in [2.0, 20.0, 100.0] {
        let occ = p.occupations(t).unwrap();
        let m: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&q| occ.moment(q))
            .collect();
        assert!(m.windows(2).all(|w| w[0] <= w[1]), "t={t}: {m:?}");
    }
}

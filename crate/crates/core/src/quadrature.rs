//! Deterministic summation and one-dimensional quadrature.
//!
//! All reductions in the crate go through [`pairwise_sum`] or
//! [`pairwise_sum_by`]: the summation tree depends only on the length of the
//! input, so serial and parallel evaluations agree bit for bit.

use crate::error::{Error, Result};

/// Leaf size of the summation tree.
const PAIRWISE_BLOCK: usize = 64;

/// Above this many terms the two halves of the tree are summed on the rayon
/// pool. The tree shape is unchanged.
const PARALLEL_THRESHOLD: usize = 1 << 16;

/// Pairwise (cascade) summation with a fixed tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

/// Pairwise summation of `term(0) + … + term(len − 1)`.
pub fn pairwise_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range(0, len, &term)
}

fn sum_range<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    if len >= PARALLEL_THRESHOLD {
        let (a, b) = rayon::join(|| sum_range(lo, mid, term), || sum_range(mid, hi, term));
        a + b
    } else {
        sum_range(lo, mid, term) + sum_range(mid, hi, term)
    }
}

// Kronrod 15-point abscissae (non-negative half) and weights; the Gauss
// 7-point rule uses every second abscissa.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    const MAX_PANELS: usize = 20_000;
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("bad interval [{a}, {b}]")));
    }
    let mut panels = vec![gk15(&f, a, b)];
    loop {
        let value = pairwise_sum_by(panels.len(), |i| panels[i].value);
        let error = pairwise_sum_by(panels.len(), |i| panels[i].error);
        if !value.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) || panels.len() >= MAX_PANELS {
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = pairwise_sum_by(panels.len(), |i| panels[i].value);
            return Ok(Quadrature {
                value,
                error_estimate: error,
                panels: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}

/// `∫₀^∞ g(r) ω_{n−1} r^{n−1} dr` for a radial integrand with power decay
/// `g(r) ~ C r^{−decay}` (`decay > n`).
///
/// The finite part `[0, R]` is integrated adaptively; `R` is doubled until the
/// tail bound `ω g(R) Rⁿ / (decay − n)` falls below `1e−10` of the integral,
/// and that leading-order tail is then added.
pub fn radial_integral<G>(g: G, n: usize, decay: f64, rel_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let nf = n as f64;
    if decay <= nf {
        return Err(Error::Domain(format!(
            "decay exponent {decay} does not make the radial integral converge in dimension {n}"
        )));
    }
    let omega = crate::conformal::sphere_volume(n - 1);
    let integrand = |r: f64| g(r) * omega * r.powi(n as i32 - 1);
    let tail = |r: f64| omega * g(r).abs() * r.powi(n as i32) / (decay - nf);

    let mut r_max = 8.0;
    while tail(r_max) > 1e-10 * integrate_adaptive(&integrand, 0.0, r_max, rel_tol, 0.0)?.value.abs()
    {
        r_max *= 2.0;
        if r_max > 1e12 {
            return Err(Error::Domain("radial tail does not decay".into()));
        }
    }
    // split at r = 1 so the core is resolved independently of r_max
    let core = integrate_adaptive(&integrand, 0.0, 1.0, rel_tol, 0.0)?;
    let outer = integrate_adaptive(&integrand, 1.0, r_max, rel_tol, 0.0)?;
    let signed_tail = omega * g(r_max) * r_max.powi(n as i32) / (decay - nf);
    Ok(core.value + outer.value + signed_tail)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `Pₖ`).
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let kf = k as f64;
    for i in 0..(k + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if k == 0 { 1.0 } else { p1 };
            dp = kf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pairwise_matches_exact_small_integers() {
        let v: Vec<f64> = (1..=10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 50_005_000.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn pairwise_is_more_accurate_than_naive_on_tiny_terms() {
        let v = vec![0.1f64; 1 << 20];
        let exact = 0.1 * (1u64 << 20) as f64;
        assert!((pairwise_sum(&v) - exact).abs() <= 1e-9);
    }

    #[test]
    fn pairwise_is_bitwise_deterministic() {
        let v: Vec<f64> = (0..300_000).map(|i| ((i as f64) * 0.37).sin()).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum_by(v.len(), |i| v[i]);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn gk_integrates_polynomials_and_smooth_functions() {
        let q = integrate_adaptive(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let q = integrate_adaptive(|x: f64| x.sin(), 0.0, PI, 1e-13, 0.0).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
        let q = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn gk_rejects_bad_interval() {
        assert!(integrate_adaptive(|x| x, 1.0, 0.0, 1e-8, 0.0).is_err());
    }

    #[test]
    fn radial_integral_of_power_law() {
        // ∫ (1+r²)^{-3} dx over ℝ³ = π²/4
        let v = radial_integral(|r| (1.0 + r * r).powi(-3), 3, 6.0, 1e-13).unwrap();
        assert!((v / (PI * PI / 4.0) - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn radial_integral_requires_decay() {
        assert!(radial_integral(|r| 1.0 / (1.0 + r * r), 3, 2.0, 1e-8).is_err());
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2k_minus_1() {
        for k in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(k);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for d in 0..2 * k {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(a, b)| a.powi(d as i32) * b).sum();
                assert!((q - exact).abs() < 1e-13, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn composite_gauss_integrates_exponential() {
        let (x, w) = composite_gauss(0.0, 3.0, 4, 6);
        let q: f64 = x.iter().zip(&w).map(|(a, b)| a.exp() * b).sum();
        assert!((q - (3f64.exp() - 1.0)).abs() < 1e-12);
    }
}

//! Sphere constants, the Sobolev/Yamabe chain, and the conformal transfer of
//! the sharp pair from ℝⁿ to Sⁿ via inverse stereographic projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{Sign, Spinor};
use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss, pairwise_sum, radial_integral};
use crate::sharp::{potential_ln_norm, random_points, SharpFamily};

/// `Γ(k/2)` for a positive integer `k`, by the half-step recursion.
fn gamma_half(k: usize) -> f64 {
    let mut value = if k % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut j = if k % 2 == 0 { 2 } else { 1 };
    while j < k {
        value *= j as f64 / 2.0;
        j += 2;
    }
    value
}

/// Volume of the unit sphere `Sⁿ ⊂ ℝⁿ⁺¹`, `2π^{(n+1)/2}/Γ((n+1)/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(0.5 * (n as f64 + 1.0)) / gamma_half(n + 1)
}

/// Optimal Euclidean Sobolev constant `S_n = n(n−2)/4 · |Sⁿ|^{2/n}`.
pub fn sobolev_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidDimension(n, 3));
    }
    let nf = n as f64;
    Ok(nf * (nf - 2.0) / 4.0 * sphere_volume(n).powf(2.0 / nf))
}

/// Yamabe invariant of the round sphere, `n(n−1)|Sⁿ|^{2/n}`.
pub fn yamabe_sphere(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * sphere_volume(n).powf(2.0 / nf)
}

/// Coefficient `c_n = 4(n−1)/(n−2)` of the conformal Laplacian.
pub fn conformal_coefficient(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidDimension(n, 3));
    }
    let nf = n as f64;
    Ok(4.0 * (nf - 1.0) / (nf - 2.0))
}

/// Sphere constants for one dimension and the residuals of
/// `n/(4(n−1))·Y(Sⁿ) = n²/4·|Sⁿ|^{2/n} = n/(n−2)·S_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub n: usize,
    pub sphere_volume: f64,
    pub sobolev_constant: f64,
    pub yamabe_sphere: f64,
    pub chain_defects: [f64; 2],
    /// `‖A‖²_{Lⁿ}` of the sharp potential (odd `n` only).
    pub potential_norm_sq: Option<f64>,
    /// `|n/(4(n−1))·Y − ‖A‖²| / ‖A‖²` (odd `n` only).
    pub sharpness_defect: Option<f64>,
}

impl ConstantsReport {
    pub fn new(n: usize) -> Result<Self> {
        let nf = n as f64;
        let vol = sphere_volume(n);
        let sob = sobolev_constant(n)?;
        let yam = yamabe_sphere(n);
        let a = nf / (4.0 * (nf - 1.0)) * yam;
        let b = nf * nf / 4.0 * vol.powf(2.0 / nf);
        let c = nf / (nf - 2.0) * sob;
        let (potential_norm_sq, sharpness_defect) = if n % 2 == 1 {
            let norm = potential_ln_norm(n)?;
            let sq = norm * norm;
            (Some(sq), Some((a - sq).abs() / sq))
        } else {
            (None, None)
        };
        Ok(ConstantsReport {
            n,
            sphere_volume: vol,
            sobolev_constant: sob,
            yamabe_sphere: yam,
            chain_defects: [(a - b).abs() / b, (b - c).abs() / b],
            potential_norm_sq,
            sharpness_defect,
        })
    }
}

/// The extremal profile `(1+r²)^{−(n−2)/2}`.
pub fn talenti_bubble(n: usize, r: f64) -> f64 {
    (1.0 + r * r).powf(-0.5 * (n as f64 - 2.0))
}

/// `Ā(x) = (1+|x|²)/2 · A(x)`.
pub fn pushforward_potential(a: &[f64], x: &[f64]) -> Vec<f64> {
    let f = 0.5 * (1.0 + x.iter().map(|v| v * v).sum::<f64>());
    a.iter().map(|v| v * f).collect()
}

/// `max | (2/(1+|x|²))^{−(n−1)/2} |ψ(x)| − 2^{−(n−1)/2} |` over `points`.
pub fn sphere_spinor_norm_defect(family: &SharpFamily, psi0: &Spinor, points: &[Vec<f64>]) -> f64 {
    let nf = family.dim() as f64;
    let target = 2f64.powf(-0.5 * (nf - 1.0));
    points
        .iter()
        .map(|x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let weight = (2.0 / (1.0 + r2)).powf(-0.5 * (nf - 1.0));
            (weight * family.zero_mode(psi0, x).norm() - target).abs()
        })
        .fold(0.0, f64::max)
}

/// [`sphere_spinor_norm_defect`] for an admissible `ψ₀` over seeded points
/// of standard deviation `spread`.
pub fn sphere_spinor_norm_check(n: usize, samples: usize, spread: f64, seed: u64) -> Result<f64> {
    let family = SharpFamily::new(n, Sign::Plus)?;
    let psi0 = family.admissible_psi0(50, seed)?;
    let points: Vec<Vec<f64>> = random_points(n, samples, seed.wrapping_add(1))
        .into_iter()
        .map(|x| x.into_iter().map(|v| v * spread).collect())
        .collect();
    Ok(sphere_spinor_norm_defect(&family, &psi0, &points))
}

/// Residual of the Yamabe identity on Sⁿ for a spinor of constant length
/// `2^{−(n−1)/2}`: the gradient term vanishes and
/// `Y/c_n·(∫|φ|^{2n/(n−1)})^{(n−2)/n} = (1/c_n)∫ scal |φ|^{2(n−2)/(n−1)}`
/// with `scal = n(n−1)`. Relative residual.
pub fn yamabe_functional_sphere_check(n: usize) -> Result<f64> {
    let nf = n as f64;
    let cn = conformal_coefficient(n)?;
    let vol = sphere_volume(n);
    let phi = 2f64.powf(-0.5 * (nf - 1.0));
    let lhs = yamabe_sphere(n) / cn
        * (vol * phi.powf(2.0 * nf / (nf - 1.0))).powf((nf - 2.0) / nf);
    let rhs = nf * (nf - 1.0) / cn * vol * phi.powf(2.0 * (nf - 2.0) / (nf - 1.0));
    Ok((lhs - rhs).abs() / rhs)
}

/// `‖Ā‖_{Lⁿ(Sⁿ)}` of the pushed-forward sharp potential, by radial pullback
/// quadrature of `∫|Ā|ⁿ(2/(1+|x|²))ⁿ dx`.
pub fn sharp_pushforward_sphere_norm(n: usize) -> Result<f64> {
    let family = SharpFamily::new(n, Sign::Plus)?;
    let nf = n as f64;
    let integrand = |r: f64| {
        let mut x = vec![0.0; n];
        x[1] = r;
        let abar = pushforward_potential(&family.potential(&x), &x);
        let len: f64 = abar.iter().map(|v| v * v).sum::<f64>().sqrt();
        (len * 2.0 / (1.0 + r * r)).powi(n as i32)
    };
    Ok(radial_integral(integrand, n, 2.0 * nf, 1e-13)?.powf(1.0 / nf))
}

/// Smooth compactly supported vector field on ℝ³: a sum of
/// `cₖ exp(−1/(1−|x−pₖ|²/ρₖ²))` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpPotential {
    pub centers: Vec<[f64; 3]>,
    pub radii: Vec<f64>,
    pub coefficients: Vec<[f64; 3]>,
}

impl BumpPotential {
    pub fn random(bumps: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::new();
        let mut radii = Vec::new();
        let mut coefficients = Vec::new();
        for _ in 0..bumps {
            centers.push([0; 3].map(|_| rng.gen_range(-1.0..1.0)));
            radii.push(rng.gen_range(0.6..1.2));
            coefficients.push([0; 3].map(|_| rng.gen_range(-2.0..2.0)));
        }
        BumpPotential {
            centers,
            radii,
            coefficients,
        }
    }

    /// Radius of a ball about the origin containing the support.
    pub fn support_radius(&self) -> f64 {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() + r)
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for ((c, r), a) in self.centers.iter().zip(&self.radii).zip(&self.coefficients) {
            let t2 = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)) / (r * r);
            if t2 < 1.0 {
                let b = (1.0 - 1.0 / (1.0 - t2)).exp();
                for k in 0..3 {
                    out[k] += a[k] * b;
                }
            }
        }
        out
    }
}

/// `‖A‖_{L³(ℝ³)}` by a tensor composite Gauss rule on `[−R, R]³`.
pub fn flat_l3_norm<F>(field: F, half_width: f64, panels: usize, order: usize) -> f64
where
    F: Fn(&[f64]) -> [f64; 3] + Sync,
{
    let (x, w) = composite_gauss(-half_width, half_width, panels, order);
    let m = x.len();
    let slabs: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(m * m);
            for j in 0..m {
                for k in 0..m {
                    let a = field(&[x[i], x[j], x[k]]);
                    let len = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
                    row.push(w[i] * w[j] * w[k] * len * len * len);
                }
            }
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&slabs).cbrt()
}

/// `‖Ā‖_{L³(S³)}` computed intrinsically on the round sphere.
///
/// A point at geodesic distance `θ` from the image of the origin, in
/// direction `ω ∈ S²`, corresponds to `x = tan(θ/2) ω`; the volume element is
/// `sin²θ dθ dω`. Only `θ ≤ θ_max` is integrated, so the field must vanish for
/// `|x| > tan(θ_max/2)`.
pub fn sphere_l3_norm<F>(field: F, theta_max: f64, panels: usize, order: usize, azimuths: usize) -> f64
where
    F: Fn(&[f64]) -> [f64; 3] + Sync,
{
    let (th, wth) = composite_gauss(0.0, theta_max, panels, order);
    let (mu, wmu) = composite_gauss(-1.0, 1.0, panels, order);
    let dphi = 2.0 * std::f64::consts::PI / azimuths as f64;
    let slabs: Vec<f64> = (0..th.len())
        .into_par_iter()
        .map(|i| {
            let rho = (0.5 * th[i]).tan();
            let vol = th[i].sin().powi(2) * wth[i];
            let mut row = Vec::with_capacity(mu.len() * azimuths);
            for (m, wm) in mu.iter().zip(&wmu) {
                let st = (1.0 - m * m).max(0.0).sqrt();
                for p in 0..azimuths {
                    let phi = p as f64 * dphi;
                    let x = [rho * st * phi.cos(), rho * st * phi.sin(), rho * m];
                    let abar = pushforward_potential(&field(&x), &x);
                    let len: f64 = abar.iter().map(|v| v * v).sum::<f64>().sqrt();
                    row.push(vol * wm * dphi * len * len * len);
                }
            }
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&slabs).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(0) - 2.0).abs() < 1e-15);
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_volume(5) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn sphere_volume_recursion() {
        // oracle: |Sⁿ| = 2π/(n−1) |Sⁿ⁻²|
        for n in 2..15 {
            let rec = 2.0 * PI / (n as f64 - 1.0) * sphere_volume(n - 2);
            assert!((sphere_volume(n) / rec - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sobolev_and_yamabe_values() {
        let s3 = sobolev_constant(3).unwrap();
        assert!((s3 - 0.75 * (2.0 * PI * PI).powf(2.0 / 3.0)).abs() < 1e-13);
        assert!((s3 - 5.478).abs() < 1e-3);
        let s4 = sobolev_constant(4).unwrap();
        assert!((s4 - 2.0 * sphere_volume(4).sqrt()).abs() < 1e-13);
        assert!((yamabe_sphere(3) - 43.824).abs() < 1e-3);
        assert!((0.375 * yamabe_sphere(3) - 16.434).abs() < 1e-3);
        assert!(sobolev_constant(2).is_err());
        for n in 3..9 {
            assert!(sobolev_constant(n + 1).unwrap() > sobolev_constant(n).unwrap());
        }
    }

    #[test]
    fn chain_defects_vanish() {
        for n in 3..=9 {
            let r = ConstantsReport::new(n).unwrap();
            assert!(r.chain_defects[0] <= 1e-14 && r.chain_defects[1] <= 1e-14, "{r:?}");
            assert!(r.sphere_volume > 0.0 && r.sobolev_constant > 0.0 && r.yamabe_sphere > 0.0);
            assert_eq!(r.sharpness_defect.is_some(), n % 2 == 1);
        }
    }

    #[test]
    fn sharp_potential_saturates_the_constant() {
        let r = ConstantsReport::new(3).unwrap();
        assert!(r.sharpness_defect.unwrap() < 1e-6);
        assert!((r.potential_norm_sq.unwrap() - 16.434).abs() < 1e-3);
    }

    #[test]
    fn bubble_values() {
        assert_eq!(talenti_bubble(3, 0.0), 1.0);
        let (r1, r2) = (1e5, 2e5);
        let slope = (talenti_bubble(5, r2) / talenti_bubble(5, r1)).ln() / 2f64.ln();
        assert!((slope + 3.0).abs() < 1e-8);
    }

    #[test]
    fn bubble_is_a_power_of_the_zero_mode_length() {
        for n in [3, 5] {
            let family = SharpFamily::new(n, Sign::Plus).unwrap();
            let psi0 = family.admissible_psi0(50, 2).unwrap();
            let nf = n as f64;
            for x in random_points(n, 50, 6) {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let len = family.zero_mode(&psi0, &x).norm();
                assert!((len.powf((nf - 2.0) / (nf - 1.0)) - talenti_bubble(n, r)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pushforward_has_constant_length() {
        let family = SharpFamily::new(3, Sign::Plus).unwrap();
        assert_eq!(pushforward_potential(&family.potential(&[0.0; 3]), &[0.0; 3]), vec![1.5, 0.0, 0.0]);
        for x in random_points(3, 200, 12) {
            let x: Vec<f64> = x.iter().map(|v| 4.0 * v).collect();
            let abar = pushforward_potential(&family.potential(&x), &x);
            let len: f64 = abar.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((len - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn pushforward_norm_matches_flat_norm() {
        for n in [3, 5] {
            let sphere = sharp_pushforward_sphere_norm(n).unwrap();
            let flat = potential_ln_norm(n).unwrap();
            assert!((sphere / flat - 1.0).abs() < 1e-6);
            // intrinsic oracle: |Ā| = n/2 on Sⁿ
            let exact = 0.5 * n as f64 * sphere_volume(n).powf(1.0 / n as f64);
            assert!((sphere / exact - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_spinor_has_constant_length() {
        assert!(sphere_spinor_norm_check(3, 200, 3.0, 1).unwrap() < 1e-10);
        assert!(sphere_spinor_norm_check(5, 200, 3.0, 1).unwrap() < 1e-10);
    }

    #[test]
    fn sphere_spinor_defect_is_even_in_x() {
        let family = SharpFamily::new(3, Sign::Plus).unwrap();
        let psi0 = family.admissible_psi0(50, 1).unwrap();
        let pts = random_points(3, 30, 3);
        let neg: Vec<Vec<f64>> = pts.iter().map(|x| x.iter().map(|v| -v).collect()).collect();
        let a = sphere_spinor_norm_defect(&family, &psi0, &pts);
        let b = sphere_spinor_norm_defect(&family, &psi0, &neg);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn yamabe_functional_reduces_on_the_sphere() {
        for n in [3, 5, 7, 9] {
            assert!(yamabe_functional_sphere_check(n).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn l3_norm_is_conformally_invariant_for_bump_fields() {
        for seed in 0..5 {
            let a = BumpPotential::random(3, seed);
            let r = a.support_radius();
            let field = |x: &[f64]| a.eval(x);
            let flat = flat_l3_norm(field, r, 24, 8);
            let sphere = sphere_l3_norm(field, 2.0 * r.atan(), 24, 8, 192);
            assert!(flat > 0.0);
            assert!((sphere / flat - 1.0).abs() < 1e-6, "seed {seed}: {flat} vs {sphere}");
        }
    }
}

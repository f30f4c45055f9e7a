//! The sharp zero-mode pair `(A, ψ)` on ℝⁿ for odd `n`.
//!
//! ```text
//! A(x) = n (1+|x|²)⁻² [ (1−|x|²) e₁ + 2⟨x,e₁⟩ x + 2 L x ]
//! ψ(x) = (1+|x|²)^{−n/2} (1 + s x·) ψ₀
//! ```
//!
//! `L` is the skew generator with a zero first row/column followed by 2×2
//! rotation blocks, and `x·` is Clifford multiplication in the module of
//! orientation `s` (see [`CliffordRep::with_orientation`]). The pair solves
//! `Dψ = iA·ψ` exactly when `ψ₀` lies in the common nullspace of the residual
//! matrices `R(x)`; that nullspace is found numerically.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::clifford::{CliffordRep, Sign, Spinor, C64};
use crate::error::{Error, Result};
use crate::quadrature::radial_integral;

/// Relative singular-value cut-off for the admissible nullspace.
pub const NULLSPACE_THRESHOLD: f64 = 1e-10;

fn norm_sqr(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// The skew-symmetric matrix `L` (row-major `n×n`).
#[derive(Debug, Clone, PartialEq)]
pub struct SkewGenerator {
    n: usize,
    matrix: Vec<f64>,
}

impl SkewGenerator {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n, 3));
        }
        if n % 2 == 0 {
            return Err(Error::EvenDimension(n));
        }
        let mut matrix = vec![0.0; n * n];
        for b in (1..n).step_by(2) {
            matrix[b * n + b + 1] = -1.0;
            matrix[(b + 1) * n + b] = 1.0;
        }
        Ok(SkewGenerator { n, matrix })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Parameters of one member of the sharp family.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroModeParams {
    pub n: usize,
    pub sign: Sign,
    pub psi0: Spinor,
}

impl ZeroModeParams {
    pub fn new(n: usize, sign: Sign, psi0: Spinor) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::EvenDimension(n));
        }
        if n < 3 {
            return Err(Error::InvalidDimension(n, 3));
        }
        let size = 1usize << (n / 2);
        if psi0.len() != size {
            return Err(Error::Shape {
                expected: size,
                got: psi0.len(),
            });
        }
        if (psi0.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "base spinor must have unit norm, got {}",
                psi0.norm()
            )));
        }
        Ok(ZeroModeParams { n, sign, psi0 })
    }
}

/// Everything about the sharp family that does not depend on `ψ₀`.
#[derive(Debug, Clone)]
pub struct SharpFamily {
    n: usize,
    sign: Sign,
    rep: CliffordRep,
    skew: SkewGenerator,
}

/// Orthonormal basis of admissible base spinors plus the SVD that produced it.
#[derive(Debug, Clone)]
pub struct AdmissibleBasis {
    pub basis: Vec<Spinor>,
    /// Singular values of the stacked residual, descending.
    pub singular_values: Vec<f64>,
}

impl AdmissibleBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `σ_min / σ_max` of the stacked residual.
    pub fn relative_gap(&self) -> f64 {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        let min = self.singular_values.last().copied().unwrap_or(0.0);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }
}

impl SharpFamily {
    pub fn new(n: usize, sign: Sign) -> Result<Self> {
        let skew = SkewGenerator::new(n)?;
        let rep = CliffordRep::new(n)?.with_orientation(sign);
        Ok(SharpFamily { n, sign, rep, skew })
    }

    pub fn from_params(params: &ZeroModeParams) -> Result<Self> {
        Self::new(params.n, params.sign)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// The oriented representation used for `x·`.
    pub fn rep(&self) -> &CliffordRep {
        &self.rep
    }

    pub fn skew(&self) -> &SkewGenerator {
        &self.skew
    }

    pub fn spinor_size(&self) -> usize {
        self.rep.size()
    }

    /// The potential `A(x)`.
    pub fn potential(&self, x: &[f64]) -> Vec<f64> {
        let r2 = norm_sqr(x);
        let pref = self.n as f64 / ((1.0 + r2) * (1.0 + r2));
        let lx = self.skew.apply(x);
        (0..self.n)
            .map(|i| {
                let e1 = if i == 0 { 1.0 - r2 } else { 0.0 };
                pref * (e1 + 2.0 * x[0] * x[i] + 2.0 * lx[i])
            })
            .collect()
    }

    /// `ψ(x) = (1+|x|²)^{−n/2}(ψ₀ + s x·ψ₀)`.
    pub fn zero_mode(&self, psi0: &Spinor, x: &[f64]) -> Spinor {
        let r2 = norm_sqr(x);
        let f = (1.0 + r2).powf(-0.5 * self.n as f64);
        let mut xpsi = vec![C64::new(0.0, 0.0); self.rep.size()];
        self.rep.apply_vector_into(x, psi0.as_slice(), &mut xpsi);
        let s = self.sign.value();
        Spinor(
            psi0.as_slice()
                .iter()
                .zip(&xpsi)
                .map(|(p, q)| (p + q * s) * f)
                .collect(),
        )
    }

    /// Analytic Dirac image `Dψ(x) = −n(1+|x|²)^{−n/2−1}(x· + s)ψ₀`.
    pub fn closed_form_dirac(&self, psi0: &Spinor, x: &[f64]) -> Spinor {
        let r2 = norm_sqr(x);
        let nf = self.n as f64;
        let pref = -nf * (1.0 + r2).powf(-0.5 * nf - 1.0);
        let mut xpsi = vec![C64::new(0.0, 0.0); self.rep.size()];
        self.rep.apply_vector_into(x, psi0.as_slice(), &mut xpsi);
        let s = self.sign.value();
        Spinor(
            psi0.as_slice()
                .iter()
                .zip(&xpsi)
                .map(|(p, q)| (q + p * s) * pref)
                .collect(),
        )
    }

    /// `R(x)` with `R(x)ψ₀ = Dψ(x) − i A(x)·ψ(x)`.
    pub fn residual_matrix(&self, x: &[f64]) -> DMatrix<C64> {
        let size = self.rep.size();
        let nf = self.n as f64;
        let r2 = norm_sqr(x);
        let s = C64::new(self.sign.value(), 0.0);
        let id = DMatrix::<C64>::identity(size, size);
        let xm = self.rep.vector_matrix(x).expect("dimension checked");
        let am = self
            .rep
            .vector_matrix(&self.potential(x))
            .expect("dimension checked");
        let dirac = (&xm + &id * s) * C64::new(-nf * (1.0 + r2).powf(-0.5 * nf - 1.0), 0.0);
        let psi = (&id + &xm * s) * C64::new((1.0 + r2).powf(-0.5 * nf), 0.0);
        dirac - am * psi * C64::new(0.0, 1.0)
    }

    /// Residual `|Dψ(x) − iA(x)·ψ(x)|` for a given `ψ₀`.
    pub fn residual_norm(&self, psi0: &Spinor, x: &[f64]) -> f64 {
        let r = self.residual_matrix(x);
        let v = nalgebra::DVector::from_column_slice(psi0.as_slice());
        (r * v).norm()
    }

    /// Stacked residual over `points` (rows `k·N … (k+1)·N` belong to point `k`).
    pub fn stacked_residual(&self, points: &[Vec<f64>]) -> DMatrix<C64> {
        let size = self.rep.size();
        let mut m = DMatrix::<C64>::zeros(points.len() * size, size);
        for (k, x) in points.iter().enumerate() {
            m.rows_mut(k * size, size).copy_from(&self.residual_matrix(x));
        }
        m
    }

    /// Orthonormal basis of `⋂ₓ ker R(x)` from the SVD of the stacked
    /// residual, cut at `σ < 1e−10·σ_max`.
    pub fn admissible_basis(&self, points: &[Vec<f64>]) -> Result<AdmissibleBasis> {
        let size = self.rep.size();
        if points.len() < size {
            return Err(Error::Domain(format!(
                "need at least {size} sample points, got {}",
                points.len()
            )));
        }
        for p in points {
            if p.len() != self.n {
                return Err(Error::Shape {
                    expected: self.n,
                    got: p.len(),
                });
            }
        }
        let stacked = self.stacked_residual(points);
        let svd = stacked.svd(false, true);
        let v_t = svd.v_t.expect("requested V*");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
        let sigma_max = singular_values[0];
        let basis = order
            .iter()
            .filter(|&&k| svd.singular_values[k] < NULLSPACE_THRESHOLD * sigma_max)
            .map(|&k| {
                let v: Vec<C64> = v_t.row(k).iter().map(|c| c.conj()).collect();
                Spinor(v).normalized()
            })
            .collect();
        Ok(AdmissibleBasis {
            basis,
            singular_values,
        })
    }

    /// First admissible base spinor found from `count` seeded random points.
    pub fn admissible_psi0(&self, count: usize, seed: u64) -> Result<Spinor> {
        let pts = random_points(self.n, count, seed);
        self.admissible_basis(&pts)?
            .basis
            .into_iter()
            .next()
            .ok_or(Error::NoAdmissibleSpinor {
                n: self.n,
                sign: self.sign.as_i32(),
            })
    }
}

/// Seeded standard-normal sample points in ℝⁿ.
pub fn random_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// Largest principal-angle sine between two orthonormal families spanning
/// subspaces of equal dimension. Returns 1 for mismatched dimensions.
pub fn subspace_distance(a: &[Spinor], b: &[Spinor]) -> f64 {
    if a.len() != b.len() {
        return 1.0;
    }
    if a.is_empty() {
        return 0.0;
    }
    let d = a.len();
    let m = DMatrix::<C64>::from_fn(d, d, |i, j| a[i].inner(&b[j]));
    let cos_min = m
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    (1.0 - cos_min * cos_min).max(0.0).sqrt()
}

/// `‖A‖_{Lⁿ(ℝⁿ)}` for the sharp potential, using `|A(x)| = n/(1+|x|²)`.
pub fn potential_ln_norm(n: usize) -> Result<f64> {
    if n < 3 || n % 2 == 0 {
        return Err(if n % 2 == 0 {
            Error::EvenDimension(n)
        } else {
            Error::InvalidDimension(n, 3)
        });
    }
    let nf = n as f64;
    let integral = radial_integral(|r| (nf / (1.0 + r * r)).powi(n as i32), n, 2.0 * nf, 1e-13)?;
    Ok(integral.powf(1.0 / nf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn family(n: usize, s: Sign) -> SharpFamily {
        SharpFamily::new(n, s).unwrap()
    }

    #[test]
    fn skew_generator_n3_matches_display() {
        let l = SkewGenerator::new(3).unwrap();
        assert_eq!(
            l.rows(),
            vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, -1.0],
                vec![0.0, 1.0, 0.0]
            ]
        );
        assert_eq!(l.apply(&[0.0, 1.0, 0.0]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn skew_generator_n5_is_skew() {
        let l = SkewGenerator::new(5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(l.entry(i, j) + l.entry(j, i), 0.0);
            }
            assert_eq!(l.entry(0, i), 0.0);
        }
        assert_eq!(l.entry(3, 4), -1.0);
        assert_eq!(l.entry(4, 3), 1.0);
        assert!(matches!(SkewGenerator::new(4), Err(Error::EvenDimension(4))));
    }

    #[test]
    fn potential_at_origin_and_on_axis() {
        let f = family(3, Sign::Plus);
        assert_eq!(f.potential(&[0.0; 3]), vec![3.0, 0.0, 0.0]);
        let a = f.potential(&[0.0, 1.0, 0.0]);
        assert!((a[0]).abs() < 1e-15 && a[1].abs() < 1e-15);
        assert!((a[2] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn potential_length_is_n_over_one_plus_r2() {
        // oracle: |(1−r²)e₁ + 2x₁x + 2Lx|² = (1+r²)²
        for n in [3, 5, 7] {
            let f = family(n, Sign::Plus);
            for x in random_points(n, 1000, 3) {
                let x: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
                let r2 = norm_sqr(&x);
                let lx = f.skew().apply(&x);
                let raw: Vec<f64> = (0..n)
                    .map(|i| (if i == 0 { 1.0 - r2 } else { 0.0 }) + 2.0 * x[0] * x[i] + 2.0 * lx[i])
                    .collect();
                assert!((norm_sqr(&raw).sqrt() / (1.0 + r2) - 1.0).abs() < 1e-12);
                let a = norm_sqr(&f.potential(&x)).sqrt();
                assert!((a * (1.0 + r2) - n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_mode_basics() {
        let f = family(3, Sign::Plus);
        let psi0 = Spinor(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        assert!(f.zero_mode(&psi0, &[0.0; 3]).max_abs_diff(&psi0) == 0.0);
        // linearity in ψ₀
        let u = Spinor(vec![C64::new(1.0, 0.5), C64::new(-0.2, 0.1)]);
        let v = Spinor(vec![C64::new(0.3, -1.0), C64::new(0.7, 0.4)]);
        let (a, b) = (C64::new(0.5, 2.0), C64::new(-1.5, 0.25));
        let combo = &(a * &u) + &(b * &v);
        for x in random_points(3, 20, 9) {
            let lhs = f.zero_mode(&combo, &x);
            let rhs = &f.zero_mode(&u, &x).scale(a) + &f.zero_mode(&v, &x).scale(b);
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
            let lhs = f.closed_form_dirac(&combo, &x);
            let rhs = &f.closed_form_dirac(&u, &x).scale(a) + &f.closed_form_dirac(&v, &x).scale(b);
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }
    }

    #[test]
    fn zero_mode_norm_expansion() {
        // |ψ|² = (1+r²)^{-n}(1 + r² + 2s Re⟨ψ₀, x·ψ₀⟩) and Re⟨ψ₀, x·ψ₀⟩ = 0
        for s in [Sign::Plus, Sign::Minus] {
            let f = family(5, s);
            let psi0 = Spinor(vec![
                C64::new(0.5, 0.1),
                C64::new(-0.3, 0.4),
                C64::new(0.2, 0.0),
                C64::new(0.0, -0.6),
            ])
            .normalized();
            for x in random_points(5, 100, 1) {
                let r2 = norm_sqr(&x);
                let xpsi = f.rep().clifford_apply(&x, &psi0).unwrap();
                let cross = psi0.inner(&xpsi).re;
                let expect = (1.0 + r2).powi(-5) * (1.0 + r2 + 2.0 * s.value() * cross);
                let got = f.zero_mode(&psi0, &x).norm_sqr();
                assert!((got - expect).abs() < 1e-14);
                assert!((got - (1.0 + r2).powi(-4)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_dirac_at_origin() {
        let f = family(3, Sign::Minus);
        let psi0 = Spinor(vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let d = f.closed_form_dirac(&psi0, &[0.0; 3]);
        // −n s ψ₀ with s = −1
        assert!(d.max_abs_diff(&psi0.scale(C64::new(3.0, 0.0))) < 1e-15);
    }

    #[test]
    fn closed_form_dirac_matches_finite_differences() {
        let f = family(3, Sign::Plus);
        let psi0 = Spinor(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let h = 1e-3;
        for x in random_points(3, 100, 4) {
            let mut fd = Spinor::zeros(2);
            for j in 0..3 {
                let shifted = |t: f64| {
                    let mut y = x.clone();
                    y[j] += t;
                    f.zero_mode(&psi0, &y)
                };
                let d: Vec<C64> = (0..2)
                    .map(|c| {
                        (shifted(-2.0 * h)[c] - shifted(2.0 * h)[c]
                            + (shifted(h)[c] - shifted(-h)[c]) * 8.0)
                            / (12.0 * h)
                    })
                    .collect();
                let gd = f.rep().clifford_apply(&basis_vec(3, j), &Spinor(d)).unwrap();
                fd = &fd + &gd;
            }
            let exact = f.closed_form_dirac(&psi0, &x);
            assert!(fd.max_abs_diff(&exact) <= 1e-9 * exact.norm().max(1e-3));
        }
    }

    fn basis_vec(n: usize, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        e
    }

    #[test]
    fn nullspace_is_nonempty_and_cross_validates() {
        for n in [3, 5, 7] {
            for s in [Sign::Plus, Sign::Minus] {
                let f = family(n, s);
                let basis = f.admissible_basis(&random_points(n, 50, 10)).unwrap();
                assert!(basis.dimension() >= 1, "n={n} s={s}");
                for psi0 in &basis.basis {
                    assert!((psi0.norm() - 1.0).abs() < 1e-12);
                    for x in random_points(n, 100, 77) {
                        let x: Vec<f64> = x.iter().map(|v| v * 3.0).collect();
                        assert!(f.residual_norm(psi0, &x) <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn fixed_module_with_opposite_sign_has_no_zero_mode() {
        // ψ = f(1 − x·)ψ₀ in the positively oriented module is never a solution
        let rep = CliffordRep::new(3).unwrap();
        let plus = family(3, Sign::Plus);
        let minus = SharpFamily {
            n: 3,
            sign: Sign::Minus,
            rep,
            skew: plus.skew().clone(),
        };
        let basis = minus.admissible_basis(&random_points(3, 50, 10)).unwrap();
        assert_eq!(basis.dimension(), 0);
    }

    #[test]
    fn residual_of_zero_is_zero() {
        let f = family(3, Sign::Plus);
        assert_eq!(f.residual_norm(&Spinor::zeros(2), &[0.3, -1.0, 2.0]), 0.0);
    }

    #[test]
    fn nullspace_is_stable_across_sample_sets() {
        let f = family(5, Sign::Plus);
        let a = f.admissible_basis(&random_points(5, 50, 1)).unwrap();
        let b = f.admissible_basis(&random_points(5, 50, 2)).unwrap();
        assert_eq!(a.dimension(), b.dimension());
        assert!(subspace_distance(&a.basis, &b.basis) < 1e-8);
    }

    #[test]
    fn admissible_residual_stays_small_far_out() {
        let f = family(3, Sign::Plus);
        let psi0 = f.admissible_psi0(50, 5).unwrap();
        for x in random_points(3, 50, 8) {
            let r = norm_sqr(&x).sqrt();
            let far: Vec<f64> = x.iter().map(|v| v / r * 100.0).collect();
            assert!(f.residual_norm(&psi0, &far) < 1e-12);
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let f = family(5, Sign::Plus);
        assert!(f.admissible_basis(&random_points(5, 2, 1)).is_err());
    }

    #[test]
    fn params_validation() {
        let psi0 = Spinor::basis(2, 0);
        assert!(ZeroModeParams::new(3, Sign::Plus, psi0.clone()).is_ok());
        assert!(ZeroModeParams::new(4, Sign::Plus, Spinor::basis(4, 0)).is_err());
        assert!(ZeroModeParams::new(3, Sign::Plus, psi0.scale(C64::new(2.0, 0.0))).is_err());
        assert!(ZeroModeParams::new(5, Sign::Plus, psi0).is_err());
    }

    #[test]
    fn ln_norm_of_sharp_potential() {
        // oracle: ‖A‖²_{Lⁿ} = n²/4 |Sⁿ|^{2/n}, |S³| = 2π², |S⁵| = π³
        let a3 = potential_ln_norm(3).unwrap();
        let exact3 = 9.0 / 4.0 * (2.0 * PI * PI).powf(2.0 / 3.0);
        assert!((a3 * a3 / exact3 - 1.0).abs() < 1e-9);
        let a5 = potential_ln_norm(5).unwrap();
        let exact5 = 25.0 / 4.0 * (PI.powi(3)).powf(2.0 / 5.0);
        assert!((a5 * a5 / exact5 - 1.0).abs() < 1e-9);
        assert!(potential_ln_norm(4).is_err());
    }
}

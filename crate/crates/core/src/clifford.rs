//! Matrix representations of the Clifford algebra with the convention
//! `γᵢγⱼ + γⱼγᵢ = −2δᵢⱼ`.
//!
//! Generators are built from the Jordan–Wigner tensor recursion on Hermitian
//! Pauli matrices `α₁…αₙ` (`αᵢαⱼ + αⱼαᵢ = 2δᵢⱼ`) and then multiplied by `i`,
//! which makes every `γᵢ = i·αᵢ` skew-adjoint and unitary. In odd dimension the
//! last generator is the chirality element of the even-dimensional
//! construction, so the representation size stays `2^⌊n/2⌋`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Orientation sign `s ∈ {+1, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i32(s: i32) -> Option<Self> {
        match s {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// A constant spinor, i.e. a vector in `ℂ^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spinor(pub Vec<C64>);

impl Spinor {
    pub fn zeros(size: usize) -> Self {
        Spinor(vec![ZERO; size])
    }

    pub fn from_slice(c: &[C64]) -> Self {
        Spinor(c.to_vec())
    }

    /// The `k`-th standard basis spinor.
    pub fn basis(size: usize, k: usize) -> Self {
        let mut s = Self::zeros(size);
        s.0[k] = ONE;
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    /// Hermitian product `⟨self, other⟩ = Σ conj(selfᵢ)·otherᵢ`.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, a: C64) -> Spinor {
        Spinor(self.0.iter().map(|c| a * c).collect())
    }

    pub fn normalized(&self) -> Spinor {
        let nrm = self.norm();
        self.scale(C64::new(1.0 / nrm, 0.0))
    }

    pub fn max_abs_diff(&self, other: &Spinor) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for Spinor {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Spinor {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &Spinor {
    type Output = Spinor;
    fn add(self, rhs: &Spinor) -> Spinor {
        Spinor(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Spinor {
    type Output = Spinor;
    fn sub(self, rhs: &Spinor) -> Spinor {
        Spinor(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&Spinor> for C64 {
    type Output = Spinor;
    fn mul(self, rhs: &Spinor) -> Spinor {
        rhs.scale(self)
    }
}

/// Matrix representation of `Cl(ℝⁿ)` on `ℂ^N`, `N = 2^⌊n/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    n: usize,
    size: usize,
    generators: Vec<DMatrix<C64>>,
}

fn pauli() -> [DMatrix<C64>; 3] {
    [
        DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

fn kron_chain(factors: &[&DMatrix<C64>]) -> DMatrix<C64> {
    factors
        .iter()
        .fold(DMatrix::from_element(1, 1, ONE), |acc, f| acc.kronecker(*f))
}

/// Hermitian generators `α₁…αₙ` with `αᵢαⱼ + αⱼαᵢ = 2δᵢⱼ`.
fn hermitian_generators(n: usize) -> Vec<DMatrix<C64>> {
    let [s1, s2, s3] = pauli();
    let id2 = DMatrix::<C64>::identity(2, 2);
    let k = n / 2;
    let mut out = Vec::with_capacity(n);
    for j in 0..k {
        for s in [&s1, &s2] {
            let mut factors: Vec<&DMatrix<C64>> = Vec::with_capacity(k);
            factors.extend(std::iter::repeat(&s3).take(j));
            factors.push(s);
            factors.extend(std::iter::repeat(&id2).take(k - j - 1));
            out.push(kron_chain(&factors));
        }
    }
    if n % 2 == 1 {
        // chirality element (−i)^k α₁⋯α₂ₖ
        let size = 1usize << k;
        let mut prod = DMatrix::<C64>::identity(size, size);
        for a in &out {
            prod = &prod * a;
        }
        let phase = (0..k).fold(ONE, |p, _| p * (-I));
        out.push(prod * phase);
    }
    out
}

impl CliffordRep {
    /// Deterministic representation for dimension `n ≥ 2`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n, 2));
        }
        let generators: Vec<_> = hermitian_generators(n)
            .into_iter()
            .map(|a| a * I)
            .collect();
        Ok(CliffordRep {
            n,
            size: 1 << (n / 2),
            generators,
        })
    }

    /// Wraps arbitrary square matrices as generators. Only the shapes are
    /// checked; use the defect functions to validate the algebra.
    pub fn from_generators(generators: Vec<DMatrix<C64>>) -> Result<Self> {
        let n = generators.len();
        if n < 2 {
            return Err(Error::InvalidDimension(n, 2));
        }
        let size = generators[0].nrows();
        for g in &generators {
            if g.nrows() != size || g.ncols() != size {
                return Err(Error::Shape {
                    expected: size,
                    got: g.ncols(),
                });
            }
        }
        Ok(CliffordRep {
            n,
            size,
            generators,
        })
    }

    /// The representation with the last generator multiplied by `s`.
    ///
    /// For odd `n` the two signs give the two inequivalent irreducible
    /// modules (the volume element changes sign).
    pub fn with_orientation(&self, s: Sign) -> Self {
        let mut out = self.clone();
        if s == Sign::Minus {
            let last = out.n - 1;
            out.generators[last] = -out.generators[last].clone();
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Representation size `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn generator(&self, i: usize) -> &DMatrix<C64> {
        &self.generators[i]
    }

    pub fn generators(&self) -> &[DMatrix<C64>] {
        &self.generators
    }

    /// `Σᵢ vᵢ γᵢ` as a matrix.
    pub fn vector_matrix(&self, v: &[f64]) -> Result<DMatrix<C64>> {
        self.check_vector(v)?;
        let mut m = DMatrix::<C64>::zeros(self.size, self.size);
        for (g, &vi) in self.generators.iter().zip(v) {
            if vi != 0.0 {
                m += g * C64::new(vi, 0.0);
            }
        }
        Ok(m)
    }

    /// Clifford multiplication `v·ψ = (Σᵢ vᵢγᵢ)ψ`.
    pub fn clifford_apply(&self, v: &[f64], psi: &Spinor) -> Result<Spinor> {
        self.check_vector(v)?;
        self.check_spinor(psi.as_slice())?;
        let mut out = vec![ZERO; self.size];
        self.apply_vector_into(v, psi.as_slice(), &mut out);
        Ok(Spinor(out))
    }

    /// `out += scale · γᵢ x` without shape checks; used in per-site loops.
    #[inline]
    pub fn apply_generator_add(&self, i: usize, x: &[C64], scale: C64, out: &mut [C64]) {
        let g = self.generators[i].as_slice();
        let size = self.size;
        // column-major storage
        for (c, &xc) in x.iter().enumerate() {
            if xc == ZERO {
                continue;
            }
            let col = &g[c * size..(c + 1) * size];
            let sx = scale * xc;
            for (o, &m) in out.iter_mut().zip(col) {
                if m != ZERO {
                    *o += m * sx;
                }
            }
        }
    }

    /// `out = (Σᵢ vᵢγᵢ) x` without shape checks.
    #[inline]
    pub fn apply_vector_into(&self, v: &[f64], x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                self.apply_generator_add(i, x, C64::new(vi, 0.0), out);
            }
        }
    }

    fn check_vector(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_spinor(&self, psi: &[C64]) -> Result<()> {
        if psi.len() != self.size {
            return Err(Error::Shape {
                expected: self.size,
                got: psi.len(),
            });
        }
        Ok(())
    }

    /// `maxᵢⱼ ‖γᵢγⱼ + γⱼγᵢ + 2δᵢⱼI‖_∞` (entrywise max modulus).
    pub fn anticommutation_defect(&self) -> f64 {
        let id = DMatrix::<C64>::identity(self.size, self.size);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let gi = &self.generators[i];
                let gj = &self.generators[j];
                let mut m = gi * gj + gj * gi;
                if i == j {
                    m += &id * C64::new(2.0, 0.0);
                }
                worst = worst.max(max_entry(&m));
            }
        }
        worst
    }

    /// `maxᵢ ‖γᵢ* + γᵢ‖_∞`.
    pub fn skew_adjoint_defect(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| max_entry(&(g.adjoint() + g)))
            .fold(0.0, f64::max)
    }

    /// `maxᵢ ‖γᵢ*γᵢ − I‖_∞`.
    pub fn unitarity_defect(&self) -> f64 {
        let id = DMatrix::<C64>::identity(self.size, self.size);
        self.generators
            .iter()
            .map(|g| max_entry(&(g.adjoint() * g - &id)))
            .fold(0.0, f64::max)
    }
}

fn max_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    fn random_spinor(rng: &mut ChaCha8Rng, size: usize) -> Spinor {
        Spinor(
            (0..size)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn n3_generators_square_to_minus_one() {
        let rep = CliffordRep::new(3).unwrap();
        assert_eq!(rep.size(), 2);
        let sq = rep.generator(0) * rep.generator(0);
        let id = DMatrix::<C64>::identity(2, 2);
        assert!(max_entry(&(sq + id)) == 0.0);
    }

    #[test]
    fn n3_distinct_generators_anticommute() {
        let rep = CliffordRep::new(3).unwrap();
        let (g1, g2) = (rep.generator(0), rep.generator(1));
        assert_eq!(max_entry(&(g1 * g2 + g2 * g1)), 0.0);
    }

    #[test]
    fn n5_brute_force_anticommutation() {
        let rep = CliffordRep::new(5).unwrap();
        assert_eq!(rep.size(), 4);
        let id = DMatrix::<C64>::identity(4, 4);
        let mut worst = 0.0f64;
        for i in 0..5 {
            for j in 0..5 {
                let (a, b) = (rep.generator(i), rep.generator(j));
                let delta = if i == j { 2.0 } else { 0.0 };
                let m = a * b + b * a + &id * C64::new(delta, 0.0);
                worst = worst.max(max_entry(&m));
            }
        }
        assert!(worst <= 1e-14);
    }

    #[test]
    fn invariants_hold_for_n_2_to_9() {
        for n in 2..=9 {
            let rep = CliffordRep::new(n).unwrap();
            assert_eq!(rep.size(), 1 << (n / 2));
            assert!(rep.anticommutation_defect() <= 1e-14, "n={n}");
            assert!(rep.skew_adjoint_defect() <= 1e-14, "n={n}");
            assert!(rep.unitarity_defect() <= 1e-14, "n={n}");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(CliffordRep::new(7).unwrap(), CliffordRep::new(7).unwrap());
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(
            CliffordRep::new(1),
            Err(Error::InvalidDimension(1, 2))
        ));
    }

    #[test]
    fn defect_of_duplicated_generator_is_two() {
        let rep = CliffordRep::new(3).unwrap();
        let mut gens = rep.generators().to_vec();
        gens[1] = gens[0].clone();
        let bad = CliffordRep::from_generators(gens).unwrap();
        assert!((bad.anticommutation_defect() - 2.0).abs() <= 1e-14);
        assert!(CliffordRep::new(7).unwrap().anticommutation_defect() <= 1e-14);
    }

    #[test]
    fn orientation_keeps_algebra() {
        let rep = CliffordRep::new(5).unwrap().with_orientation(Sign::Minus);
        assert!(rep.anticommutation_defect() <= 1e-14);
        assert!(rep.skew_adjoint_defect() <= 1e-14);
    }

    #[test]
    fn zero_vector_gives_zero_spinor() {
        let rep = CliffordRep::new(4).unwrap();
        let psi = Spinor(vec![C64::new(1.0, 2.0); 4]);
        let out = rep.clifford_apply(&[0.0; 4], &psi).unwrap();
        assert!(out.norm() == 0.0);
    }

    #[test]
    fn shape_errors() {
        let rep = CliffordRep::new(3).unwrap();
        let psi = Spinor::zeros(2);
        assert!(matches!(
            rep.clifford_apply(&[1.0, 0.0], &psi),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            rep.clifford_apply(&[1.0, 0.0, 0.0], &Spinor::zeros(3)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn double_application_is_minus_norm_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=7 {
            let rep = CliffordRep::new(n).unwrap();
            for _ in 0..20 {
                let v = random_vector(&mut rng, n);
                let psi = random_spinor(&mut rng, rep.size());
                let vv: f64 = v.iter().map(|x| x * x).sum();
                let twice = rep
                    .clifford_apply(&v, &rep.clifford_apply(&v, &psi).unwrap())
                    .unwrap();
                let expect = psi.scale(C64::new(-vv, 0.0));
                assert!(twice.max_abs_diff(&expect) <= 1e-12);
            }
        }
    }

    #[test]
    fn real_part_of_form_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rep = CliffordRep::new(5).unwrap();
        for _ in 0..200 {
            let v = random_vector(&mut rng, 5);
            let psi = random_spinor(&mut rng, 4);
            let vpsi = rep.clifford_apply(&v, &psi).unwrap();
            assert!(psi.inner(&vpsi).re.abs() <= 1e-13);
        }
    }
}

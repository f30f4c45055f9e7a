//! The regularised integral identity for `|T(ψ/|ψ|_ε^{n/(n−1)})|²|ψ|_ε²`, its
//! pointwise ingredients, and the equality-case decomposition
//! `P + R1 + R2 = S` with its ε-regularised counterpart.
//!
//! Every integral is a trapezoid sum over the stencil interior of the input
//! grid. Each side of an identity samples its own nonlinear fields before
//! differencing, so the two sides share no derivative values.

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, Spinor, C64};
use crate::conformal::{conformal_coefficient, sobolev_constant};
use crate::error::{Error, Result};
use crate::fd::{dirac_from_partials, integrate, map_interior, regularized_norm, twistor_norm_from_partials, Site};
use crate::grid::{GridSpec, ScalarField, SpinorField, VectorFieldGrid};
use crate::quadrature::pairwise_sum_by;
use crate::sharp::SharpFamily;

/// Largest pointwise mismatch of a step identity and the largest magnitude
/// of its left-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDefect {
    pub max_abs: f64,
    pub scale: f64,
}

impl StepDefect {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.max_abs
        } else {
            self.max_abs / self.scale
        }
    }
}

fn exponents(n: usize) -> Result<(f64, f64, f64)> {
    if n < 3 {
        return Err(Error::InvalidDimension(n, 3));
    }
    let nf = n as f64;
    // a = n/(n−1), b = (n−2)/(n−1), c = 2/(n−1)
    Ok((nf / (nf - 1.0), (nf - 2.0) / (nf - 1.0), 2.0 / (nf - 1.0)))
}

fn pointwise<F>(grid: &GridSpec, scratch: usize, f: F) -> Result<StepDefect>
where
    F: Fn(&Site, &mut [C64]) -> (f64, f64) + Sync,
{
    let diff = map_interior(grid, scratch, |s, b| f(s, b).0)?;
    let scale = map_interior(grid, scratch, |s, b| f(s, b).1.abs())?;
    Ok(StepDefect {
        max_abs: diff.max(),
        scale: scale.max(),
    })
}

fn sq(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn re_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Re⟨ψ, ∂ⱼψ⟩ = |ψ|∂ⱼ|ψ| = |ψ|_ε ∂ⱼ|ψ|_ε`: the largest pairwise mismatch.
pub fn step0_defect(field: &SpinorField, eps: f64) -> Result<StepDefect> {
    let plain = field.norm();
    let reg = regularized_norm(field, eps)?;
    let size = field.size;
    pointwise(&field.grid, size, |site, buf| {
        let i = site.index;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..site.dim() {
            site.d_spinor(&field.data, size, j, buf);
            let a = re_inner(field.site(i), buf);
            let b = plain.data[i] * site.d_scalar(&plain.data, j);
            let c = reg.data[i] * site.d_scalar(&reg.data, j);
            worst = worst.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
            scale = scale.max(a.abs());
        }
        (worst, scale)
    })
}

/// Samples `ψ/|ψ|_ε^{n/(n−1)}`, `|ψ|_ε` and `|ψ|_ε^{(n−2)/(n−1)}`.
fn regularised_fields(field: &SpinorField, eps: f64) -> Result<(SpinorField, ScalarField, ScalarField)> {
    let (a, b, _) = exponents(field.grid.dim())?;
    let pe = regularized_norm(field, eps)?;
    let phi = field.weighted(&pe.map(|v| v.powf(-a)))?;
    let u = pe.map(|v| v.powf(b));
    Ok((phi, pe, u))
}

/// Pointwise `|∇φ|²|ψ|_ε² = |∇ψ|²/|ψ|_ε^{2/(n−1)} + |∇u|²[(n/(n−2))²|ψ|²/|ψ|_ε² − 2n(n−1)/(n−2)²]`
/// with `φ = ψ/|ψ|_ε^{n/(n−1)}` and `u = |ψ|_ε^{(n−2)/(n−1)}`.
pub fn step1_defect(field: &SpinorField, eps: f64) -> Result<StepDefect> {
    let n = field.grid.dim();
    let nf = n as f64;
    let (_, _, c) = exponents(n)?;
    let (phi, pe, u) = regularised_fields(field, eps)?;
    let size = field.size;
    let k1 = (nf / (nf - 2.0)).powi(2);
    let k2 = 2.0 * nf * (nf - 1.0) / (nf - 2.0).powi(2);
    pointwise(&field.grid, size, |site, buf| {
        let i = site.index;
        let p = pe.data[i];
        let mut lhs = 0.0;
        let mut grad_psi = 0.0;
        let mut grad_u = 0.0;
        for j in 0..n {
            site.d_spinor(&phi.data, size, j, buf);
            lhs += sq(buf);
            site.d_spinor(&field.data, size, j, buf);
            grad_psi += sq(buf);
            grad_u += site.d_scalar(&u.data, j).powi(2);
        }
        lhs *= p * p;
        let psi2 = sq(field.site(i));
        let rhs = grad_psi / p.powf(c) + grad_u * (k1 * psi2 / (p * p) - k2);
        ((lhs - rhs).abs(), lhs)
    })
}

/// Pointwise `|Dφ|²|ψ|_ε² = |Dψ|²/|ψ|_ε^{2/(n−1)} + (n/(n−2))²|∇u|²|ψ|²/|ψ|_ε²
/// − 2n/(n−1)·|ψ|_ε^{−2/(n−1)−1} Re⟨Dψ, ∇|ψ|_ε·ψ⟩`.
pub fn step2_defect(rep: &CliffordRep, field: &SpinorField, eps: f64) -> Result<StepDefect> {
    let n = field.grid.dim();
    let nf = n as f64;
    let (_, _, c) = exponents(n)?;
    if rep.dim() != n || rep.size() != field.size {
        return Err(Error::Shape {
            expected: field.size,
            got: rep.size(),
        });
    }
    let (phi, pe, u) = regularised_fields(field, eps)?;
    let size = field.size;
    let k1 = (nf / (nf - 2.0)).powi(2);
    let k3 = 2.0 * nf / (nf - 1.0);
    pointwise(&field.grid, (n + 2) * size, |site, buf| {
        let i = site.index;
        let p = pe.data[i];
        let (partials, rest) = buf.split_at_mut(n * size);
        let (dirac, cross) = rest.split_at_mut(size);
        site.d_spinor_all(&phi.data, size, partials);
        dirac_from_partials(rep, partials, dirac);
        let lhs = sq(dirac) * p * p;

        site.d_spinor_all(&field.data, size, partials);
        dirac_from_partials(rep, partials, dirac);
        let grad_pe: Vec<f64> = (0..n).map(|j| site.d_scalar(&pe.data, j)).collect();
        let grad_u: f64 = (0..n).map(|j| site.d_scalar(&u.data, j).powi(2)).sum();
        rep.apply_vector_into(&grad_pe, field.site(i), &mut cross[..size]);
        let psi2 = sq(field.site(i));
        let rhs = sq(dirac) / p.powf(c) + k1 * grad_u * psi2 / (p * p)
            - k3 * p.powf(-c - 1.0) * re_inner(dirac, &cross[..size]);
        ((lhs - rhs).abs(), lhs)
    })
}

/// Pointwise `|Tψ|² = |∇ψ|² − (1/n)|Dψ|²` against analytic derivatives:
/// the left side from finite differences of the samples, the right side from
/// `gradient` evaluated exactly at each site.
pub fn twistor_norm_defect<G>(rep: &CliffordRep, field: &SpinorField, gradient: G) -> Result<StepDefect>
where
    G: Fn(&[f64]) -> Vec<Spinor> + Sync,
{
    let n = field.grid.dim();
    let size = field.size;
    let grid = &field.grid;
    pointwise(grid, (n + 3) * size, |site, buf| {
        let (partials, rest) = buf.split_at_mut(n * size);
        site.d_spinor_all(&field.data, size, partials);
        let lhs = twistor_norm_from_partials(rep, partials, rest);
        let x = grid.point(site.index);
        let exact = gradient(&x);
        let mut grad = 0.0;
        for (j, g) in exact.iter().enumerate() {
            grad += g.norm_sqr();
            partials[j * size..(j + 1) * size].copy_from_slice(g.as_slice());
        }
        dirac_from_partials(rep, partials, &mut rest[..size]);
        let rhs = grad - sq(&rest[..size]) / n as f64;
        ((lhs - rhs).abs(), lhs)
    })
}

/// A field of `N×N` endomorphisms (row-major per site).
#[derive(Debug, Clone, PartialEq)]
pub struct EndomorphismField {
    pub grid: GridSpec,
    pub size: usize,
    pub data: Vec<C64>,
}

impl EndomorphismField {
    /// `κ(x)·id`.
    pub fn scalar<F>(grid: &GridSpec, size: usize, kappa: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let k = ScalarField::sample(grid, kappa);
        let mut data = vec![C64::new(0.0, 0.0); grid.num_sites() * size * size];
        for (s, v) in k.data.iter().enumerate() {
            for c in 0..size {
                data[s * size * size + c * size + c] = C64::new(*v, 0.0);
            }
        }
        EndomorphismField {
            grid: grid.clone(),
            size,
            data,
        }
    }

    /// `Re⟨ψ, Kψ⟩` at a site.
    pub fn form(&self, site: usize, psi: &[C64]) -> f64 {
        let m = &self.data[site * self.size * self.size..(site + 1) * self.size * self.size];
        let mut acc = 0.0;
        for r in 0..self.size {
            let mut kr = C64::new(0.0, 0.0);
            for c in 0..self.size {
                kr += m[r * self.size + c] * psi[c];
            }
            acc += (psi[r].conj() * kr).re;
        }
        acc
    }
}

/// Operations each side of the integral identity is built from.
pub const LHS_OPS: &[&str] = &["regularized_norm", "sample(psi/|psi|_eps^(n/(n-1)))", "twistor_fd"];
pub const RHS_OPS: &[&str] = &["regularized_norm", "dirac_fd(psi)", "sample(|psi|_eps^((n-2)/(n-1)))", "gradient_fd"];

/// Named terms of the regularised integral identity on the grid interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub eps: f64,
    pub lhs: f64,
    pub term_dirac: f64,
    pub term_grad: f64,
    #[serde(rename = "term_K")]
    pub term_k: f64,
    /// `|lhs − (term_dirac − term_grad − term_K)| / max(|lhs|, 1)`.
    pub defect: f64,
    /// `∮ V·ν` over the interior box, the integration-by-parts remainder.
    pub boundary_flux: f64,
    /// The defect after adding the boundary flux back.
    pub flux_closed_defect: f64,
    /// Largest `|ψ|` on the trimmed margin.
    pub margin_max: f64,
    pub lhs_ops: Vec<String>,
    pub rhs_ops: Vec<String>,
}

/// Assembles every term of the identity independently and reports the defect.
pub fn integral_identity_report(
    rep: &CliffordRep,
    field: &SpinorField,
    eps: f64,
    curvature: Option<&EndomorphismField>,
) -> Result<IdentityReport> {
    let grid = &field.grid;
    let n = grid.dim();
    let nf = n as f64;
    if rep.dim() != n || rep.size() != field.size {
        return Err(Error::Shape {
            expected: field.size,
            got: rep.size(),
        });
    }
    if let Some(k) = curvature {
        if !k.grid.same_lattice(grid) || k.size != field.size {
            return Err(Error::InvalidGrid("curvature field does not match the spinor field".into()));
        }
    }
    let (_, _, c) = exponents(n)?;
    let size = field.size;

    let lhs = {
        let (phi, pe, _) = regularised_fields(field, eps)?;
        let density = map_interior(grid, (n + 2) * size, |site, buf| {
            let (partials, rest) = buf.split_at_mut(n * size);
            site.d_spinor_all(&phi.data, size, partials);
            let p = pe.data[site.index];
            twistor_norm_from_partials(rep, partials, rest) * p * p
        })?;
        integrate(&density)
    };

    let pe = regularized_norm(field, eps)?;
    let (_, b, _) = exponents(n)?;
    let u = pe.map(|v| v.powf(b));
    let term_dirac = {
        let density = map_interior(grid, 2 * size, |site, buf| {
            let (d, acc) = buf.split_at_mut(size);
            acc.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
            for j in 0..n {
                site.d_spinor(&field.data, size, j, d);
                rep.apply_generator_add(j, d, C64::new(1.0, 0.0), acc);
            }
            sq(acc) / pe.data[site.index].powf(c)
        })?;
        (nf - 1.0) / nf * integrate(&density)
    };
    let term_grad = {
        let density = map_interior(grid, 0, |site, _| {
            let i = site.index;
            let g: f64 = (0..n).map(|j| site.d_scalar(&u.data, j).powi(2)).sum();
            let p = pe.data[i];
            g * (2.0 * (nf - 1.0) - nf * sq(field.site(i)) / (p * p))
        })?;
        (nf - 1.0) / (nf - 2.0).powi(2) * integrate(&density)
    };
    let term_k = match curvature {
        None => 0.0,
        Some(k) => {
            let density = map_interior(grid, 0, |site, _| {
                let i = site.index;
                k.form(i, field.site(i)) / pe.data[i].powf(c)
            })?;
            integrate(&density)
        }
    };
    let boundary_flux = boundary_flux(rep, field, &pe)?;
    let rhs = term_dirac - term_grad - term_k;
    let scale = lhs.abs().max(1.0);
    Ok(IdentityReport {
        eps,
        lhs,
        term_dirac,
        term_grad,
        term_k,
        defect: (lhs - rhs).abs() / scale,
        boundary_flux,
        flux_closed_defect: (lhs - (rhs - boundary_flux)).abs() / scale,
        margin_max: field.margin_max(grid.trim()),
        lhs_ops: LHS_OPS.iter().map(|s| s.to_string()).collect(),
        rhs_ops: RHS_OPS.iter().map(|s| s.to_string()).collect(),
    })
}

/// `∮ V·ν dS` over the boundary of the interior box with
/// `V_j = |ψ|_ε^{−2/(n−1)} Σ_{k≠j} Re⟨γ_jψ, γ_k∂_kψ⟩`.
fn boundary_flux(rep: &CliffordRep, field: &SpinorField, pe: &ScalarField) -> Result<f64> {
    let grid = &field.grid;
    let n = grid.dim();
    let size = field.size;
    let (_, _, c) = exponents(n)?;
    let interior = grid.interior()?;
    let m = interior.points();
    let h = interior.spacing();
    let mut total = 0.0;
    for j in 0..n {
        let vj = map_interior(grid, 3 * size, |site, buf| {
            let i = site.index;
            let (d, rest) = buf.split_at_mut(size);
            let (acc, gpsi) = rest.split_at_mut(size);
            acc.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
            for k in (0..n).filter(|&k| k != j) {
                site.d_spinor(&field.data, size, k, d);
                rep.apply_generator_add(k, d, C64::new(1.0, 0.0), acc);
            }
            gpsi.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
            rep.apply_generator_add(j, field.site(i), C64::new(1.0, 0.0), gpsi);
            re_inner(gpsi, acc) / pe.data[i].powf(c)
        })?;
        let stride = interior.strides()[j];
        // faces index_j = 0 and m−1, trapezoid weights in the other axes
        let face = pairwise_sum_by(interior.num_sites() / m, |f| {
            let low = (f / stride) * stride * m + f % stride;
            let high = low + (m - 1) * stride;
            let mut w = h.powi(n as i32 - 1);
            let mut rest = low;
            for k in (0..n).rev() {
                let idx = rest % m;
                rest /= m;
                if k != j && (idx == 0 || idx == m - 1) {
                    w *= 0.5;
                }
            }
            w * (vj.data[high] - vj.data[low])
        });
        total += face;
    }
    Ok(total)
}

/// Terms of the equality-case decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityLedger {
    #[serde(rename = "P")]
    pub p: Option<f64>,
    #[serde(rename = "R1")]
    pub r1: Option<f64>,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "P_eps")]
    pub p_eps: Option<f64>,
    #[serde(rename = "R1_eps")]
    pub r1_eps: Option<f64>,
    #[serde(rename = "R2_eps")]
    pub r2_eps: Option<f64>,
    #[serde(rename = "R_eps")]
    pub r_eps: Option<f64>,
    #[serde(rename = "S1_eps")]
    pub s1_eps: Option<f64>,
    #[serde(rename = "S2_eps")]
    pub s2_eps: Option<f64>,
    pub eps: Option<f64>,
    pub yamabe_constant_used: f64,
    pub holder_lambda: f64,
    /// `max | |A| − λ|ψ|^{2/(n−1)} | / max |A|`.
    pub holder_residual: f64,
    /// `(n−1)/n ∫|Dψ|²|ψ|^{−2/(n−1)}`, the natural scale of every term.
    pub dirac_term: Option<f64>,
    /// `‖A‖²_{Lⁿ}` over the grid interior.
    pub potential_norm_sq: f64,
    /// `P + R1 + R2 − S`.
    pub closure: Option<f64>,
    /// `P_ε + R_ε + R1_ε + R2_ε − S1_ε − S2_ε`.
    pub closure_eps: Option<f64>,
}

impl EqualityLedger {
    /// `max(|P|, |R1|, |R2|, |S|) / dirac_term`.
    pub fn max_relative_term(&self) -> Option<f64> {
        let scale = self.dirac_term?;
        Some(
            [self.p?, self.r1?, self.r2?, self.s?]
                .iter()
                .map(|v| v.abs() / scale)
                .fold(0.0, f64::max),
        )
    }
}

/// The flat Yamabe constant `c_n·S_n = Y(Sⁿ)`.
pub fn flat_yamabe_constant(n: usize) -> Result<f64> {
    Ok(conformal_coefficient(n)? * sobolev_constant(n)?)
}

/// Computes the ledger for `(ψ, A)` sampled on the same grid.
pub fn equality_ledger(
    rep: &CliffordRep,
    psi: &SpinorField,
    potential: &VectorFieldGrid,
    eps: Option<f64>,
    yamabe: f64,
) -> Result<EqualityLedger> {
    let grid = &psi.grid;
    if !potential.grid.same_lattice(grid) {
        return Err(Error::InvalidGrid("potential and spinor fields live on different grids".into()));
    }
    let n = grid.dim();
    let nf = n as f64;
    let size = psi.size;
    if rep.dim() != n || rep.size() != size {
        return Err(Error::Shape {
            expected: size,
            got: rep.size(),
        });
    }
    let (a, b, c) = exponents(n)?;
    let cn = conformal_coefficient(n)?;
    let t = grid.trim();
    let hol = (nf - 2.0) / nf;

    let plain = psi.norm();
    let a_len = potential.norm();
    let a_int = a_len.restrict(t)?;
    let plain_int = plain.restrict(t)?;
    let a_norm_sq = integrate(&a_int.map(|v| v.powf(nf))).powf(2.0 / nf);

    // Hölder proportionality |A| ≈ λ|ψ|^{2/(n−1)}
    let w = plain_int.map(|v| v.powf(c));
    let num = pairwise_sum_by(w.data.len(), |i| w.data[i] * w.data[i] * a_int.data[i]);
    let den = pairwise_sum_by(w.data.len(), |i| w.data[i].powi(3));
    let holder_lambda = if den > 0.0 { num / den } else { 0.0 };
    let max_a = a_int.max();
    let holder_residual = (0..w.data.len())
        .map(|i| (a_int.data[i] - holder_lambda * w.data[i]).abs())
        .fold(0.0, f64::max)
        / if max_a > 0.0 { max_a } else { 1.0 };

    let positive = plain_int.min() > 0.0;
    if eps.is_none() && !positive {
        return Err(Error::Degenerate("the spinor vanishes at an interior site".into()));
    }

    let mut ledger = EqualityLedger {
        p: None,
        r1: None,
        r2: None,
        s: None,
        p_eps: None,
        r1_eps: None,
        r2_eps: None,
        r_eps: None,
        s1_eps: None,
        s2_eps: None,
        eps,
        yamabe_constant_used: yamabe,
        holder_lambda,
        holder_residual,
        dirac_term: None,
        potential_norm_sq: a_norm_sq,
        closure: None,
        closure_eps: None,
    };

    if positive {
        let phi = psi.weighted(&plain.map(|v| v.powf(-a)))?;
        let p_density = map_interior(grid, (n + 2) * size, |site, buf| {
            let (partials, rest) = buf.split_at_mut(n * size);
            site.d_spinor_all(&phi.data, size, partials);
            let v = plain.data[site.index];
            twistor_norm_from_partials(rep, partials, rest) * v * v
        })?;
        let p = integrate(&p_density);
        let dirac_density = map_interior(grid, (n + 1) * size, |site, buf| {
            let (partials, rest) = buf.split_at_mut(n * size);
            site.d_spinor_all(&psi.data, size, partials);
            dirac_from_partials(rep, partials, &mut rest[..size]);
            sq(&rest[..size]) / plain.data[site.index].powf(c)
        })?;
        let dirac_term = (nf - 1.0) / nf * integrate(&dirac_density);
        let q = integrate(&plain_int.map(|v| v.powf(2.0 * nf / (nf - 1.0))));
        let cross = integrate(&a_int.zip_map(&plain_int, |al, v| al * al * v.powf(2.0 * (nf - 2.0) / (nf - 1.0)))?);
        let r1 = (nf - 1.0) / nf * (a_norm_sq * q.powf(hol) - cross);
        let u0 = plain.map(|v| v.powf(b));
        let grad_u0 = integrate(&map_interior(grid, 0, |site, _| {
            (0..n).map(|j| site.d_scalar(&u0.data, j).powi(2)).sum()
        })?);
        let r2 = (nf - 1.0) / (nf - 2.0) * (grad_u0 - yamabe / cn * q.powf(hol));
        let s = ((nf - 1.0) / nf * a_norm_sq - yamabe / 4.0) * q.powf(hol);
        ledger.p = Some(p);
        ledger.r1 = Some(r1);
        ledger.r2 = Some(r2);
        ledger.s = Some(s);
        ledger.dirac_term = Some(dirac_term);
        ledger.closure = Some(p + r1 + r2 - s);
    }

    if let Some(eps) = eps {
        let (phi, pe, u) = regularised_fields(psi, eps)?;
        let p_eps = integrate(&map_interior(grid, (n + 2) * size, |site, buf| {
            let (partials, rest) = buf.split_at_mut(n * size);
            site.d_spinor_all(&phi.data, size, partials);
            let v = pe.data[site.index];
            twistor_norm_from_partials(rep, partials, rest) * v * v
        })?);
        let grad_u = map_interior(grid, 0, |site, _| (0..n).map(|j| site.d_scalar(&u.data, j).powi(2)).sum())?;
        let pe_int = pe.restrict(t)?;
        let r_eps = nf * (nf - 1.0) / (nf - 2.0).powi(2)
            * integrate(&grad_u.zip_map(&pe_int, |g, p| g * eps * eps / (p * p))?);
        let j_int = integrate(&plain_int.zip_map(&pe_int, |v, p| {
            v.powf(2.0 * nf / (nf - 2.0)) * p.powf(-2.0 * nf / ((nf - 1.0) * (nf - 2.0)))
        })?);
        let cross = integrate(&ScalarField::from_data(
            &a_int.grid,
            (0..a_int.data.len())
                .map(|i| a_int.data[i].powi(2) * plain_int.data[i].powi(2) * pe_int.data[i].powf(-c))
                .collect(),
        )?);
        let r1_eps = (nf - 1.0) / nf * (a_norm_sq * j_int.powf(hol) - cross);
        let shift = eps.powf(b);
        let tilde = integrate(&pe_int.map(|p| (p.powf(b) - shift).max(0.0).powf(2.0 * nf / (nf - 2.0))));
        let grad_total = integrate(&grad_u);
        let r2_eps = (nf - 1.0) / (nf - 2.0) * (grad_total - yamabe / cn * tilde.powf(hol));
        let s1_eps = (nf - 1.0) / nf * a_norm_sq * j_int.powf(hol) - yamabe / 4.0 * tilde.powf(hol);
        let s2_eps = 0.0;
        ledger.p_eps = Some(p_eps);
        ledger.r_eps = Some(r_eps);
        ledger.r1_eps = Some(r1_eps);
        ledger.r2_eps = Some(r2_eps);
        ledger.s1_eps = Some(s1_eps);
        ledger.s2_eps = Some(s2_eps);
        ledger.closure_eps = Some(p_eps + r_eps + r1_eps + r2_eps - s1_eps - s2_eps);
    }
    Ok(ledger)
}

/// Samples the sharp pair `(ψ, A)` of `family` on `grid`.
pub fn sharp_pair_fields(family: &SharpFamily, psi0: &Spinor, grid: &GridSpec) -> (SpinorField, VectorFieldGrid) {
    let psi = SpinorField::sample(grid, family.spinor_size(), |x| family.zero_mode(psi0, x));
    let a = VectorFieldGrid::sample(grid, |x| family.potential(x));
    (psi, a)
}

//! Central finite differences on [`GridSpec`] lattices.
//!
//! Every operator here reads a field on a grid and writes its result on the
//! stencil interior (`order/2` sites trimmed per side). Per-site work goes
//! through [`Site`], which knows how to difference any array sampled on the
//! parent grid, so integrands that mix several fields can be evaluated in one
//! fused pass without materialising intermediate derivative fields.

use rayon::prelude::*;

use crate::clifford::{CliffordRep, C64};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, SpinorField};
use crate::quadrature::pairwise_sum_by;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `c₁…c_t` of the antisymmetric first-derivative stencil.
pub fn first_derivative_weights(order: usize) -> &'static [f64] {
    match order {
        2 => &[0.5],
        _ => &[2.0 / 3.0, -1.0 / 12.0],
    }
}

/// `c₀…c_t` of the symmetric second-derivative stencil.
pub fn second_derivative_weights(order: usize) -> &'static [f64] {
    match order {
        2 => &[-2.0, 1.0],
        _ => &[-2.5, 4.0 / 3.0, -1.0 / 12.0],
    }
}

/// One interior site of a parent grid.
pub struct Site<'a> {
    /// Linear index in the parent grid.
    pub index: usize,
    strides: &'a [usize],
    weights: &'a [f64],
    inv_h: f64,
}

impl Site<'_> {
    pub fn dim(&self) -> usize {
        self.strides.len()
    }

    /// `∂ⱼf` of a scalar array sampled on the parent grid.
    #[inline]
    pub fn d_scalar(&self, data: &[f64], j: usize) -> f64 {
        let s = self.strides[j];
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let off = (k + 1) * s;
            acc += w * (data[self.index + off] - data[self.index - off]);
        }
        acc * self.inv_h
    }

    /// `∂ⱼψ` of a spinor array with `size` components per site.
    #[inline]
    pub fn d_spinor(&self, data: &[C64], size: usize, j: usize, out: &mut [C64]) {
        let s = self.strides[j];
        out.iter_mut().for_each(|o| *o = ZERO);
        for (k, &w) in self.weights.iter().enumerate() {
            let plus = (self.index + (k + 1) * s) * size;
            let minus = (self.index - (k + 1) * s) * size;
            for c in 0..size {
                out[c] += (data[plus + c] - data[minus + c]) * w;
            }
        }
        for o in out.iter_mut() {
            *o *= self.inv_h;
        }
    }

    /// All partials `∂₀ψ … ∂ₙ₋₁ψ` packed into `out` (`n·size` entries).
    #[inline]
    pub fn d_spinor_all(&self, data: &[C64], size: usize, out: &mut [C64]) {
        for j in 0..self.dim() {
            self.d_spinor(data, size, j, &mut out[j * size..(j + 1) * size]);
        }
    }
}

fn check_interior(grid: &GridSpec) -> Result<GridSpec> {
    grid.interior()
}

/// Evaluates `f` at every interior site, returning a field on the interior.
/// `scratch` is a per-thread buffer of the requested length.
pub fn map_interior<F>(grid: &GridSpec, scratch: usize, f: F) -> Result<ScalarField>
where
    F: Fn(&Site, &mut [C64]) -> f64 + Sync,
{
    let interior = check_interior(grid)?;
    let strides = grid.strides();
    let weights = first_derivative_weights(grid.order());
    let inv_h = 1.0 / grid.spacing();
    let trim = grid.trim();
    let data = (0..interior.num_sites())
        .into_par_iter()
        .map_init(
            || vec![ZERO; scratch],
            |buf, s| {
                let site = Site {
                    index: grid.embed(trim, s),
                    strides: &strides,
                    weights,
                    inv_h,
                };
                f(&site, buf)
            },
        )
        .collect();
    ScalarField::from_data(&interior, data)
}

/// Spinor-valued version of [`map_interior`]: `f` writes `size` components.
pub fn map_interior_spinor<F>(grid: &GridSpec, size: usize, scratch: usize, f: F) -> Result<SpinorField>
where
    F: Fn(&Site, &mut [C64], &mut [C64]) + Sync,
{
    let interior = check_interior(grid)?;
    let strides = grid.strides();
    let weights = first_derivative_weights(grid.order());
    let inv_h = 1.0 / grid.spacing();
    let trim = grid.trim();
    let mut out = SpinorField::zeros(&interior, size);
    out.data.par_chunks_mut(size).enumerate().for_each_init(
        || vec![ZERO; scratch],
        |buf, (s, o)| {
            let site = Site {
                index: grid.embed(trim, s),
                strides: &strides,
                weights,
                inv_h,
            };
            f(&site, buf, o);
        },
    );
    Ok(out)
}

fn check_rep(rep: &CliffordRep, field: &SpinorField) -> Result<()> {
    if rep.dim() != field.grid.dim() {
        return Err(Error::Shape {
            expected: field.grid.dim(),
            got: rep.dim(),
        });
    }
    if rep.size() != field.size {
        return Err(Error::Shape {
            expected: rep.size(),
            got: field.size,
        });
    }
    Ok(())
}

/// Per-direction derivatives of a scalar field.
pub fn gradient_scalar(field: &ScalarField) -> Result<Vec<ScalarField>> {
    (0..field.grid.dim())
        .map(|j| map_interior(&field.grid, 0, |site, _| site.d_scalar(&field.data, j)))
        .collect()
}

/// Per-direction derivatives of a spinor field.
pub fn gradient_spinor(field: &SpinorField) -> Result<Vec<SpinorField>> {
    (0..field.grid.dim())
        .map(|j| {
            map_interior_spinor(&field.grid, field.size, 0, |site, _, out| {
                site.d_spinor(&field.data, field.size, j, out)
            })
        })
        .collect()
}

/// `Dψ = Σⱼ γⱼ ∂ⱼψ`.
pub fn dirac_fd(rep: &CliffordRep, field: &SpinorField) -> Result<SpinorField> {
    check_rep(rep, field)?;
    let size = field.size;
    map_interior_spinor(&field.grid, size, size, |site, buf, out| {
        out.iter_mut().for_each(|o| *o = ZERO);
        for j in 0..site.dim() {
            site.d_spinor(&field.data, size, j, buf);
            rep.apply_generator_add(j, buf, C64::new(1.0, 0.0), out);
        }
    })
}

/// Dirac image at one site from packed partials (`n·size` entries).
#[inline]
pub fn dirac_from_partials(rep: &CliffordRep, partials: &[C64], out: &mut [C64]) {
    let size = rep.size();
    out.iter_mut().for_each(|o| *o = ZERO);
    for j in 0..rep.dim() {
        rep.apply_generator_add(j, &partials[j * size..(j + 1) * size], C64::new(1.0, 0.0), out);
    }
}

/// `Σⱼ |∂ⱼψ + (1/n)γⱼ Dψ|²` at one site from packed partials.
pub fn twistor_norm_from_partials(rep: &CliffordRep, partials: &[C64], scratch: &mut [C64]) -> f64 {
    let size = rep.size();
    let n = rep.dim();
    let (dirac, rest) = scratch.split_at_mut(size);
    let comp = &mut rest[..size];
    dirac_from_partials(rep, partials, dirac);
    let inv_n = C64::new(1.0 / n as f64, 0.0);
    let mut total = 0.0;
    for j in 0..n {
        comp.copy_from_slice(&partials[j * size..(j + 1) * size]);
        rep.apply_generator_add(j, dirac, inv_n, comp);
        total += comp.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    total
}

/// Components `∇ⱼψ + (1/n)γⱼ Dψ`, one field per direction.
pub fn twistor_fd(rep: &CliffordRep, field: &SpinorField) -> Result<Vec<SpinorField>> {
    check_rep(rep, field)?;
    let dirac = dirac_fd(rep, field)?;
    let grads = gradient_spinor(field)?;
    let size = field.size;
    let inv_n = C64::new(1.0 / rep.dim() as f64, 0.0);
    Ok(grads
        .into_iter()
        .enumerate()
        .map(|(j, mut g)| {
            g.data
                .par_chunks_mut(size)
                .zip(dirac.data.par_chunks(size))
                .for_each(|(out, d)| rep.apply_generator_add(j, d, inv_n, out));
            g
        })
        .collect())
}

/// Fused `|Tψ|²` on the interior.
pub fn twistor_norm_sq(rep: &CliffordRep, field: &SpinorField) -> Result<ScalarField> {
    check_rep(rep, field)?;
    let size = field.size;
    let n = rep.dim();
    map_interior(&field.grid, (n + 2) * size, |site, buf| {
        let (partials, rest) = buf.split_at_mut(n * size);
        site.d_spinor_all(&field.data, size, partials);
        twistor_norm_from_partials(rep, partials, rest)
    })
}

/// Fused `|∇ψ|²` on the interior.
pub fn gradient_norm_sq(field: &SpinorField) -> Result<ScalarField> {
    let size = field.size;
    map_interior(&field.grid, size, |site, buf| {
        (0..site.dim())
            .map(|j| {
                site.d_spinor(&field.data, size, j, buf);
                buf.iter().map(|c| c.norm_sqr()).sum::<f64>()
            })
            .sum()
    })
}

/// Fused `|Dψ|²` on the interior.
pub fn dirac_norm_sq(rep: &CliffordRep, field: &SpinorField) -> Result<ScalarField> {
    check_rep(rep, field)?;
    let size = field.size;
    map_interior(&field.grid, 2 * size, |site, buf| {
        let (d, acc) = buf.split_at_mut(size);
        acc.iter_mut().for_each(|o| *o = ZERO);
        for j in 0..site.dim() {
            site.d_spinor(&field.data, size, j, d);
            rep.apply_generator_add(j, d, C64::new(1.0, 0.0), acc);
        }
        acc.iter().map(|c| c.norm_sqr()).sum()
    })
}

/// Componentwise `Δψ` with the compact second-derivative stencil, on the
/// grid trimmed by `trim` sites (at least the stencil half-width).
pub fn laplacian_fd(field: &SpinorField, trim: usize) -> Result<SpinorField> {
    let grid = &field.grid;
    let weights = second_derivative_weights(grid.order());
    if trim < weights.len() - 1 {
        return Err(Error::Stencil {
            points: grid.points(),
            order: grid.order(),
        });
    }
    let sub = grid.shrink(trim)?;
    let strides = grid.strides();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let size = field.size;
    let mut out = SpinorField::zeros(&sub, size);
    out.data.par_chunks_mut(size).enumerate().for_each(|(s, o)| {
        let index = grid.embed(trim, s);
        for c in 0..size {
            // difference form: exact zero on constants
            let centre = field.data[index * size + c];
            let mut acc = C64::new(0.0, 0.0);
            for &st in &strides {
                for (k, &w) in weights.iter().enumerate().skip(1) {
                    acc += (field.data[(index + k * st) * size + c] - centre
                        + (field.data[(index - k * st) * size + c] - centre))
                        * w;
                }
            }
            o[c] = acc * inv_h2;
        }
    });
    Ok(out)
}

/// `‖D²ψ + Δψ‖ / ‖Δψ‖` over the sites where both are defined; `0` when
/// `Δψ` vanishes identically.
pub fn weitzenboeck_defect(rep: &CliffordRep, field: &SpinorField) -> Result<f64> {
    let t = field.grid.trim();
    let d2 = dirac_fd(rep, &dirac_fd(rep, field)?)?;
    let lap = laplacian_fd(field, 2 * t)?;
    let num = pairwise_sum_by(lap.data.len(), |i| (d2.data[i] + lap.data[i]).norm_sqr());
    let den = pairwise_sum_by(lap.data.len(), |i| lap.data[i].norm_sqr());
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

/// `|ψ|_ε = √(|ψ|² + ε²)`.
pub fn regularized_norm(field: &SpinorField, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("regularisation must be positive, got {eps}")));
    }
    let e2 = eps * eps;
    Ok(field.map_scalar(|v| (v.iter().map(|c| c.norm_sqr()).sum::<f64>() + e2).sqrt()))
}

/// Composite trapezoid rule over the field's own grid, pairwise summed.
pub fn integrate(field: &ScalarField) -> f64 {
    let g = &field.grid;
    pairwise_sum_by(field.data.len(), |s| g.trapezoid_weight(s) * field.data[s])
}

/// `Dψ` at a single point by a 4th-order stencil of spacing `h`.
pub fn dirac_at_point<F>(rep: &CliffordRep, f: F, x: &[f64], h: f64) -> Vec<C64>
where
    F: Fn(&[f64]) -> Vec<C64>,
{
    let mut out = vec![ZERO; rep.size()];
    let mut y = x.to_vec();
    for j in 0..rep.dim() {
        let mut shifted = |t: f64| {
            y[j] = x[j] + t;
            let v = f(&y);
            y[j] = x[j];
            v
        };
        let (p1, m1, p2, m2) = (shifted(h), shifted(-h), shifted(2.0 * h), shifted(-2.0 * h));
        let d: Vec<C64> = (0..rep.size())
            .map(|c| ((p1[c] - m1[c]) * 8.0 - (p2[c] - m2[c])) / (12.0 * h))
            .collect();
        rep.apply_generator_add(j, &d, C64::new(1.0, 0.0), &mut out);
    }
    out
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_slope(spacings: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

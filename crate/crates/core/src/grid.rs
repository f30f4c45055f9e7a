//! Uniform box grids on ℝⁿ and fields sampled on them.
//!
//! Sites are stored row-major (last axis fastest). Derivative operators in
//! [`crate::fd`] return fields on the interior grid, which is the same lattice
//! with `order/2` sites trimmed from each side.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::clifford::{Spinor, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
    points: usize,
    order: usize,
    // lower-left corner; equals −half_width for grids built with `new`
    origin: f64,
}

impl GridSpec {
    /// Box `[−R, R]ⁿ` with `points` sites per axis.
    pub fn new(n: usize, half_width: f64, points: usize, order: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(n, 1));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if order != 2 && order != 4 {
            return Err(Error::InvalidGrid(format!("stencil order must be 2 or 4, got {order}")));
        }
        if points < 9 || points < 2 * order + 1 {
            return Err(Error::Stencil { points, order });
        }
        let sites = (points as f64).powi(n as i32);
        if sites > 2e9 {
            return Err(Error::InvalidGrid(format!("{points}^{n} sites is too many")));
        }
        Ok(GridSpec {
            n,
            half_width,
            points,
            order,
            origin: -half_width,
        })
    }

    /// Grid on `[−R, R]ⁿ` with the given spacing (rounded to an odd point count).
    pub fn with_spacing(n: usize, half_width: f64, spacing: f64, order: usize) -> Result<Self> {
        let cells = (2.0 * half_width / spacing).round() as usize;
        Self::new(n, half_width, cells + 1, order)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Sites trimmed from each side by a first-derivative stencil.
    pub fn trim(&self) -> usize {
        self.order / 2
    }

    pub fn num_sites(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn coord(&self, i: usize) -> f64 {
        // symmetric evaluation keeps the centre site exactly at 0
        let h = self.spacing();
        let centre = 0.5 * (self.points - 1) as f64;
        self.origin + self.half_width + (i as f64 - centre) * h
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n];
        for k in (0..self.n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.points;
        }
        s
    }

    pub fn multi_index(&self, site: usize, out: &mut [usize]) {
        let mut rest = site;
        for k in (0..self.n).rev() {
            out[k] = rest % self.points;
            rest /= self.points;
        }
    }

    pub fn point_into(&self, site: usize, out: &mut [f64]) {
        let mut rest = site;
        for k in (0..self.n).rev() {
            out[k] = self.coord(rest % self.points);
            rest /= self.points;
        }
    }

    pub fn point(&self, site: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.point_into(site, &mut x);
        x
    }

    /// Linear index of the site closest to `x` (clamped to the box).
    pub fn nearest_site(&self, x: &[f64]) -> usize {
        let h = self.spacing();
        let mut site = 0;
        for &xk in x.iter().take(self.n) {
            let i = ((xk - self.origin) / h).round().clamp(0.0, (self.points - 1) as f64) as usize;
            site = site * self.points + i;
        }
        site
    }

    /// The grid left after trimming `count` sites from each side.
    pub fn shrink(&self, count: usize) -> Result<GridSpec> {
        if self.points < 2 * count + 1 {
            return Err(Error::Stencil {
                points: self.points,
                order: self.order,
            });
        }
        let h = self.spacing();
        let points = self.points - 2 * count;
        let half_width = 0.5 * (points - 1) as f64 * h;
        Ok(GridSpec {
            n: self.n,
            half_width,
            points,
            order: self.order,
            origin: self.origin + count as f64 * h,
        })
    }

    /// The stencil interior: [`shrink`](Self::shrink) by `order/2`.
    pub fn interior(&self) -> Result<GridSpec> {
        self.shrink(self.trim())
    }

    /// Index in `self` of site `sub_site` of `self.shrink(count)`.
    pub fn embed(&self, count: usize, sub_site: usize) -> usize {
        let sub_points = self.points - 2 * count;
        let mut rest = sub_site;
        let mut site = 0;
        let mut stride = 1;
        for _ in 0..self.n {
            site += (rest % sub_points + count) * stride;
            rest /= sub_points;
            stride *= self.points;
        }
        site
    }

    /// Trapezoid weight of a site: `hⁿ` halved once per boundary coordinate.
    pub fn trapezoid_weight(&self, site: usize) -> f64 {
        let mut w = self.spacing().powi(self.n as i32);
        let mut rest = site;
        for _ in 0..self.n {
            let i = rest % self.points;
            if i == 0 || i == self.points - 1 {
                w *= 0.5;
            }
            rest /= self.points;
        }
        w
    }

    pub fn same_lattice(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && self.points == other.points
            && (self.spacing() - other.spacing()).abs() <= 1e-12 * self.spacing()
            && (self.origin - other.origin).abs() <= 1e-12 * self.half_width.max(1.0)
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::InvalidGrid("fields live on different grids".into()))
        }
    }
}

/// Complex `N`-component spinor per site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    pub size: usize,
    pub data: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: &GridSpec, size: usize) -> Self {
        SpinorField {
            grid: grid.clone(),
            size,
            data: vec![C64::new(0.0, 0.0); grid.num_sites() * size],
        }
    }

    pub fn from_data(grid: &GridSpec, size: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.num_sites() * size {
            return Err(Error::Shape {
                expected: grid.num_sites() * size,
                got: data.len(),
            });
        }
        Ok(SpinorField {
            grid: grid.clone(),
            size,
            data,
        })
    }

    /// Pointwise evaluation of `f` at every site.
    pub fn sample<F>(grid: &GridSpec, size: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Spinor + Sync,
    {
        let mut field = Self::zeros(grid, size);
        field
            .data
            .par_chunks_mut(size)
            .enumerate()
            .for_each_init(
                || vec![0.0; grid.dim()],
                |x, (site, out)| {
                    grid.point_into(site, x);
                    out.copy_from_slice(f(x).as_slice());
                },
            );
        field
    }

    pub fn site(&self, site: usize) -> &[C64] {
        &self.data[site * self.size..(site + 1) * self.size]
    }

    pub fn spinor(&self, site: usize) -> Spinor {
        Spinor::from_slice(self.site(site))
    }

    pub fn norm(&self) -> ScalarField {
        self.map_scalar(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
    }

    pub fn map_scalar<F>(&self, f: F) -> ScalarField
    where
        F: Fn(&[C64]) -> f64 + Sync,
    {
        let data = self.data.par_chunks(self.size).map(&f).collect();
        ScalarField {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Site-wise `ψ ↦ w·ψ` for a real weight field on the same grid.
    pub fn weighted(&self, weight: &ScalarField) -> Result<SpinorField> {
        self.grid.check_same(&weight.grid)?;
        let mut out = self.clone();
        out.data
            .par_chunks_mut(self.size)
            .zip(&weight.data)
            .for_each(|(v, w)| v.iter_mut().for_each(|c| *c *= *w));
        Ok(out)
    }

    pub fn scale(&self, a: C64) -> SpinorField {
        SpinorField {
            grid: self.grid.clone(),
            size: self.size,
            data: self.data.par_iter().map(|c| c * a).collect(),
        }
    }

    /// Values on `grid.shrink(count)`.
    pub fn restrict(&self, count: usize) -> Result<SpinorField> {
        let sub = self.grid.shrink(count)?;
        let mut out = SpinorField::zeros(&sub, self.size);
        out.data
            .par_chunks_mut(self.size)
            .enumerate()
            .for_each(|(s, v)| v.copy_from_slice(self.site(self.grid.embed(count, s))));
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.par_iter().map(|c| c.norm()).reduce(|| 0.0, f64::max)
    }

    /// Largest `|ψ|` over sites within `count` sites of the boundary.
    pub fn margin_max(&self, count: usize) -> f64 {
        let g = &self.grid;
        (0..g.num_sites())
            .into_par_iter()
            .filter(|&s| {
                let mut rest = s;
                (0..g.dim()).any(|_| {
                    let i = rest % g.points();
                    rest /= g.points();
                    i < count || i + count >= g.points()
                })
            })
            .map(|s| self.site(s).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .reduce(|| 0.0, f64::max)
    }

    /// Binary layout: `n: u64, m: u64, R: f64, N: u64` (little endian), then
    /// sites × `N` × `(re, im)` as little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.grid.dim() as u64).to_le_bytes())?;
        w.write_all(&(self.grid.points() as u64).to_le_bytes())?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&(self.size as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for c in &self.data {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads the layout of [`write_binary`](Self::write_binary); the stencil
    /// order is not stored and must be supplied.
    pub fn read_binary<R: Read>(mut r: R, order: usize) -> Result<SpinorField> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
            Ok(word)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let half_width = f64::from_le_bytes(next(&mut r)?);
        let size = u64::from_le_bytes(next(&mut r)?) as usize;
        if n == 0 || n > 16 || size == 0 || size > 1 << 8 {
            return Err(Error::Format(format!("implausible header n={n}, N={size}")));
        }
        let grid = GridSpec::new(n, half_width, m, order)?;
        let count = grid.num_sites() * size;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != count * 16 {
            return Err(Error::Format(format!(
                "expected {} payload bytes, found {}",
                count * 16,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(16)
            .map(|b| {
                C64::new(
                    f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(b[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        SpinorField::from_data(&grid, size, data)
    }

    /// CSV with columns `site, x1…xn, re0, im0, …`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["site".to_string()];
        header.extend((1..=self.grid.dim()).map(|k| format!("x{k}")));
        for c in 0..self.size {
            header.push(format!("re{c}"));
            header.push(format!("im{c}"));
        }
        out.write_record(&header).map_err(csv_error)?;
        let mut x = vec![0.0; self.grid.dim()];
        for s in 0..self.grid.num_sites() {
            self.grid.point_into(s, &mut x);
            let mut row = vec![s.to_string()];
            row.extend(x.iter().map(|v| format!("{v:e}")));
            for c in self.site(s) {
                row.push(format!("{:e}", c.re));
                row.push(format!("{:e}", c.im));
            }
            out.write_record(&row).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Real value per site.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn from_data(grid: &GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_sites() {
            return Err(Error::Shape {
                expected: grid.num_sites(),
                got: data.len(),
            });
        }
        Ok(ScalarField {
            grid: grid.clone(),
            data,
        })
    }

    pub fn sample<F>(grid: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let data = (0..grid.num_sites())
            .into_par_iter()
            .map_init(
                || vec![0.0; grid.dim()],
                |x, site| {
                    grid.point_into(site, x);
                    f(x)
                },
            )
            .collect();
        ScalarField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(f64) -> f64 + Sync,
    {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F>(&self, other: &ScalarField, f: F) -> Result<ScalarField>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        self.grid.check_same(&other.grid)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            data: self.data.par_iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn restrict(&self, count: usize) -> Result<ScalarField> {
        let sub = self.grid.shrink(count)?;
        let data = (0..sub.num_sites())
            .into_par_iter()
            .map(|s| self.data[self.grid.embed(count, s)])
            .collect();
        Ok(ScalarField { grid: sub, data })
    }

    pub fn min(&self) -> f64 {
        self.data.par_iter().copied().reduce(|| f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.par_iter().copied().reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

/// Real `n`-vector per site.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldGrid {
    pub grid: GridSpec,
    pub data: Vec<f64>,
}

impl VectorFieldGrid {
    pub fn sample<F>(grid: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        let n = grid.dim();
        let mut data = vec![0.0; grid.num_sites() * n];
        data.par_chunks_mut(n).enumerate().for_each_init(
            || vec![0.0; n],
            |x, (site, out)| {
                grid.point_into(site, x);
                out.copy_from_slice(&f(x));
            },
        );
        VectorFieldGrid {
            grid: grid.clone(),
            data,
        }
    }

    pub fn site(&self, site: usize) -> &[f64] {
        let n = self.grid.dim();
        &self.data[site * n..(site + 1) * n]
    }

    pub fn norm(&self) -> ScalarField {
        let n = self.grid.dim();
        ScalarField {
            grid: self.grid.clone(),
            data: self
                .data
                .par_chunks(n)
                .map(|v| v.iter().map(|a| a * a).sum::<f64>().sqrt())
                .collect(),
        }
    }

    pub fn restrict(&self, count: usize) -> Result<VectorFieldGrid> {
        let sub = self.grid.shrink(count)?;
        let n = self.grid.dim();
        let mut data = vec![0.0; sub.num_sites() * n];
        data.par_chunks_mut(n)
            .enumerate()
            .for_each(|(s, v)| v.copy_from_slice(self.site(self.grid.embed(count, s))));
        Ok(VectorFieldGrid { grid: sub, data })
    }
}

/// Sum of Gaussian bumps `Σₖ cₖ exp(−|x−pₖ|²/(2σₖ²))` with constant spinor
/// coefficients; derivatives are available in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSpinor {
    pub n: usize,
    pub size: usize,
    pub centers: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub coefficients: Vec<Spinor>,
}

impl BumpSpinor {
    /// Three bumps with centres in `[−1, 1]ⁿ`, widths in `[0.7, 1.2]` and
    /// standard complex normal coefficients.
    pub fn random(n: usize, size: usize, seed: u64) -> Self {
        Self::random_with(n, size, 3, 1.0, seed)
    }

    /// Unit-scale variant: widths in `[0.8, 1.2]` and unit coefficients
    /// divided by the bump count, so `|ψ| ≤ 1` everywhere.
    pub fn unit_scale(n: usize, size: usize, seed: u64) -> Self {
        let mut b = Self::random_with(n, size, 3, 1.0, seed);
        let count = b.coefficients.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_b0b5);
        for w in b.widths.iter_mut() {
            *w = rng.gen_range(0.8..1.2);
        }
        for c in b.coefficients.iter_mut() {
            *c = c.normalized().scale(C64::new(1.0 / count, 0.0));
        }
        b
    }

    pub fn random_with(n: usize, size: usize, bumps: usize, spread: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::new();
        let mut widths = Vec::new();
        let mut coefficients = Vec::new();
        for _ in 0..bumps {
            centers.push((0..n).map(|_| rng.gen_range(-spread..spread)).collect());
            widths.push(rng.gen_range(0.7..1.2));
            coefficients.push(Spinor(
                (0..size)
                    .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect(),
            ));
        }
        BumpSpinor {
            n,
            size,
            centers,
            widths,
            coefficients,
        }
    }

    fn weights(&self, x: &[f64]) -> impl Iterator<Item = (f64, &[f64], f64, &Spinor)> + '_ {
        let x = x.to_vec();
        self.centers
            .iter()
            .zip(&self.widths)
            .zip(&self.coefficients)
            .map(move |((p, &s), c)| {
                let d2: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                ((-0.5 * d2 / (s * s)).exp(), p.as_slice(), s, c)
            })
    }

    pub fn eval(&self, x: &[f64]) -> Spinor {
        let mut out = Spinor::zeros(self.size);
        for (g, _, _, c) in self.weights(x) {
            for k in 0..self.size {
                out[k] += c[k] * g;
            }
        }
        out
    }

    /// `∂ⱼψ(x)` for `j = 0…n−1`.
    pub fn gradient(&self, x: &[f64]) -> Vec<Spinor> {
        let mut out = vec![Spinor::zeros(self.size); self.n];
        for (g, p, s, c) in self.weights(x) {
            for (j, d) in out.iter_mut().enumerate() {
                let f = -g * (x[j] - p[j]) / (s * s);
                for k in 0..self.size {
                    d[k] += c[k] * f;
                }
            }
        }
        out
    }

    /// `Δψ(x)`.
    pub fn laplacian(&self, x: &[f64]) -> Spinor {
        let mut out = Spinor::zeros(self.size);
        for (g, p, s, c) in self.weights(x) {
            let d2: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            let f = g * (d2 / (s * s * s * s) - self.n as f64 / (s * s));
            for k in 0..self.size {
                out[k] += c[k] * f;
            }
        }
        out
    }
}

//! Radial profiles and the Sobolev quotient
//! `ω∫(u′)²r^{n−1}dr / (ω∫u^{2n/(n−2)}r^{n−1}dr)^{(n−2)/n}`.
//!
//! Derivatives are element differences `(u_{i+1} − u_i)/Δᵢ`, i.e. central
//! differences about the element midpoints, integrated with the midpoint
//! rule; node-centred differences would leave an odd/even mode invisible to
//! the numerator. The power integral uses the trapezoid rule on nodes.
//! Beyond the last node the profile is continued as `u_m (r_m/r)^{n−2}` and
//! both integrals get the matching closed-form tails.

use serde::{Deserialize, Serialize};

use crate::conformal::{sphere_volume, talenti_bubble};
use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum_by;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(n: usize, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n, 3));
        }
        if nodes.len() != values.len() {
            return Err(Error::Shape {
                expected: nodes.len(),
                got: values.len(),
            });
        }
        if nodes.len() < 3 || nodes[0] != 0.0 {
            return Err(Error::Domain("radial nodes must start at r = 0 and have at least 3 entries".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|r| r.is_finite()) {
            return Err(Error::Domain("radial nodes must be finite and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("profile values must be finite and non-negative".into()));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::Degenerate("profile is identically zero".into()));
        }
        Ok(RadialProfile { n, nodes, values })
    }

    /// `0` followed by `count` log-spaced radii in `[r_min, r_max]`.
    pub fn log_nodes(count: usize, r_min: f64, r_max: f64) -> Vec<f64> {
        let (a, b) = (r_min.ln(), r_max.ln());
        std::iter::once(0.0)
            .chain((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()))
            .collect()
    }

    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, nodes: Vec<f64>, f: F) -> Result<Self> {
        let values = nodes.iter().map(|&r| f(r)).collect();
        Self::new(n, nodes, values)
    }

    /// The extremal profile on the given nodes.
    pub fn bubble(n: usize, nodes: Vec<f64>) -> Result<Self> {
        Self::from_fn(n, nodes, |r| talenti_bubble(n, r))
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.nodes.clone(), values)
    }

    fn power(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 2.0)
    }

    /// Weights `r_{i+1/2}^{n−1}/Δᵢ` of the element Dirichlet form.
    fn element_weights(&self) -> Vec<f64> {
        let k = self.n as i32 - 1;
        self.nodes
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).powi(k) / (w[1] - w[0]))
            .collect()
    }

    /// Trapezoid weights `τᵢ rᵢ^{n−1}` on nodes.
    fn node_weights(&self) -> Vec<f64> {
        let m = self.nodes.len();
        let k = self.n as i32 - 1;
        (0..m)
            .map(|i| {
                let left = if i > 0 { self.nodes[i] - self.nodes[i - 1] } else { 0.0 };
                let right = if i + 1 < m { self.nodes[i + 1] - self.nodes[i] } else { 0.0 };
                0.5 * (left + right) * self.nodes[i].powi(k)
            })
            .collect()
    }

    fn robin(&self) -> f64 {
        let rm = *self.nodes.last().expect("non-empty");
        (self.n as f64 - 2.0) * rm.powi(self.n as i32 - 2)
    }

    /// `ω∫(u′)²r^{n−1}` including the tail.
    pub fn dirichlet(&self) -> f64 {
        let w = self.element_weights();
        let u = &self.values;
        let um = *u.last().expect("non-empty");
        let body = pairwise_sum_by(w.len(), |e| w[e] * (u[e + 1] - u[e]).powi(2));
        sphere_volume(self.n - 1) * (body + self.robin() * um * um)
    }

    /// `ω∫u^{2n/(n−2)}r^{n−1}` including the tail.
    pub fn power_integral(&self) -> f64 {
        let p = self.power();
        let w = self.node_weights();
        let u = &self.values;
        let rm = *self.nodes.last().expect("non-empty");
        let um = *u.last().expect("non-empty");
        let body = pairwise_sum_by(w.len(), |i| w[i] * u[i].powf(p));
        sphere_volume(self.n - 1) * (body + um.powf(p) * rm.powi(self.n as i32) / self.n as f64)
    }
}

/// The discrete Sobolev quotient.
pub fn sobolev_quotient(profile: &RadialProfile) -> Result<f64> {
    let den = profile.power_integral();
    if !(den > 0.0) {
        return Err(Error::Degenerate("zero denominator in the Sobolev quotient".into()));
    }
    let beta = (profile.n as f64 - 2.0) / profile.n as f64;
    Ok(profile.dirichlet() / den.powf(beta))
}

/// Exact gradient of [`sobolev_quotient`] with respect to the nodal values.
pub fn quotient_gradient(profile: &RadialProfile) -> Result<Vec<f64>> {
    let n = profile.n as f64;
    let beta = (n - 2.0) / n;
    let omega = sphere_volume(profile.n - 1);
    let num = profile.dirichlet();
    let den = profile.power_integral();
    if !(den > 0.0) {
        return Err(Error::Degenerate("zero denominator in the Sobolev quotient".into()));
    }
    let m = profile.values.len();
    let u = &profile.values;
    let mut dnum = stiffness_apply(profile, u);
    dnum.iter_mut().for_each(|v| *v *= 2.0 * omega);
    let p = profile.power();
    let w = profile.node_weights();
    let rm = *profile.nodes.last().expect("non-empty");
    let mut dden: Vec<f64> = (0..m).map(|i| omega * p * w[i] * u[i].powf(p - 1.0)).collect();
    dden[m - 1] += omega * p * u[m - 1].powf(p - 1.0) * rm.powi(profile.n as i32) / n;
    let a = den.powf(-beta);
    let b = beta * num * den.powf(-beta - 1.0);
    Ok((0..m).map(|i| a * dnum[i] - b * dden[i]).collect())
}

/// Tridiagonal stiffness matrix of the discrete Dirichlet form (without `ω`):
/// returns `(lower, diagonal, upper)`.
fn stiffness(profile: &RadialProfile) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let w = profile.element_weights();
    let m = profile.values.len();
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    for (e, &we) in w.iter().enumerate() {
        diag[e] += we;
        diag[e + 1] += we;
        off[e] = -we;
    }
    diag[m - 1] += profile.robin();
    (off.clone(), diag, off)
}

fn stiffness_apply(profile: &RadialProfile, u: &[f64]) -> Vec<f64> {
    let (lo, d, up) = stiffness(profile);
    let m = u.len();
    (0..m)
        .map(|i| {
            let mut v = d[i] * u[i];
            if i > 0 {
                v += lo[i - 1] * u[i - 1];
            }
            if i + 1 < m {
                v += up[i] * u[i + 1];
            }
            v
        })
        .collect()
}

/// Thomas algorithm for a tridiagonal system.
fn solve_tridiagonal(lo: &[f64], diag: &[f64], up: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = if m > 1 { up[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let denom = diag[i] - lo[i - 1] * c[i - 1];
        if i + 1 < m {
            c[i] = up[i] / denom;
        }
        d[i] = (rhs[i] - lo[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Outcome of [`radial_descent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentResult {
    pub profile: RadialProfile,
    /// Quotient before the first step and after each accepted step.
    pub trace: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// True when the line search found no decrease before `steps` ran out.
    pub stalled: bool,
}

/// Armijo sufficient-decrease constant of the line search.
pub const ARMIJO: f64 = 1e-4;

/// Projected gradient descent on the discrete quotient.
///
/// The search direction is the gradient taken in the metric of the discrete
/// Dirichlet form (one tridiagonal solve per step); iterates are projected
/// onto `u ≥ 0` and rescaled to unit power integral. The step length starts
/// at `step_size` and is halved until the Armijo condition holds.
pub fn radial_descent(initial: &RadialProfile, steps: usize, step_size: f64) -> Result<DescentResult> {
    let mut profile = normalise(initial)?;
    let (lo, diag, up) = stiffness(&profile);
    let omega = sphere_volume(initial.n - 1);
    let mut q = sobolev_quotient(&profile)?;
    let mut trace = vec![q];
    let mut step_sizes = Vec::new();
    let mut stalled = false;
    for _ in 0..steps {
        let g = quotient_gradient(&profile)?;
        // metric 2ω K / D^β with D = 1 after normalisation
        let scaled: Vec<f64> = g.iter().map(|v| v / (2.0 * omega)).collect();
        let dir = solve_tridiagonal(&lo, &diag, &up, &scaled);
        let mut t = step_size;
        let mut accepted = None;
        while t > 1e-14 {
            let trial: Vec<f64> = profile
                .values
                .iter()
                .zip(&dir)
                .map(|(u, d)| (u - t * d).max(0.0))
                .collect();
            if trial.iter().all(|v| *v == 0.0) {
                return Err(Error::Degenerate("descent collapsed the profile to zero".into()));
            }
            let cand = profile.with_values(trial)?;
            let qc = sobolev_quotient(&cand)?;
            let decrease: f64 = g
                .iter()
                .zip(cand.values.iter().zip(&profile.values))
                .map(|(gi, (a, b))| gi * (a - b))
                .sum();
            if qc <= q + ARMIJO * decrease && qc.is_finite() {
                accepted = Some((cand, qc));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, qc)) => {
                profile = normalise(&cand)?;
                q = qc;
                trace.push(q);
                step_sizes.push(t);
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    Ok(DescentResult {
        profile,
        trace,
        step_sizes,
        stalled,
    })
}

fn normalise(profile: &RadialProfile) -> Result<RadialProfile> {
    let den = profile.power_integral();
    if !(den > 0.0) {
        return Err(Error::Degenerate("profile has zero power integral".into()));
    }
    let s = den.powf(-1.0 / profile.power());
    profile.with_values(profile.values.iter().map(|v| v * s).collect())
}

/// Best rescaled bubble `a·B(r/λ)` in relative sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleFit {
    pub lambda: f64,
    pub amplitude: f64,
    /// `max |u − a B(r/λ)| / max |u|` over the nodes.
    pub residual: f64,
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fits `a·(1 + (r/λ)²)^{−(n−2)/2}` to the profile in the sup norm.
pub fn fit_bubble(profile: &RadialProfile) -> BubbleFit {
    let n = profile.n;
    let umax = profile.values.iter().copied().fold(0.0, f64::max);
    let sup = |a: f64, lambda: f64| {
        profile
            .nodes
            .iter()
            .zip(&profile.values)
            .map(|(r, u)| (u - a * talenti_bubble(n, r / lambda)).abs())
            .fold(0.0, f64::max)
    };
    let best_amp = |lambda: f64| golden(|a| sup(a, lambda), 0.5 * umax, 1.5 * umax, 60);
    let cost = |log_l: f64| {
        let l = log_l.exp();
        sup(best_amp(l), l)
    };
    // coarse scan, then refine around the best cell
    let grid: Vec<f64> = (0..=40).map(|k| -4.0 + 8.0 * k as f64 / 40.0).collect();
    let (mut best, mut best_c) = (0.0, f64::INFINITY);
    for &g in &grid {
        let c = cost(g);
        if c < best_c {
            best = g;
            best_c = c;
        }
    }
    let log_l = golden(cost, best - 0.2, best + 0.2, 60);
    let lambda = log_l.exp();
    let amplitude = best_amp(lambda);
    BubbleFit {
        lambda,
        amplitude,
        residual: sup(amplitude, lambda) / umax,
    }
}

/// Largest relative mismatch between [`quotient_gradient`] and a fourth-order
/// central difference of the quotient along the given coordinates.
pub fn gradient_check(profile: &RadialProfile, indices: &[usize], rel_step: f64) -> Result<f64> {
    let g = quotient_gradient(profile)?;
    let mut worst: f64 = 0.0;
    for &i in indices {
        let h = rel_step * profile.values[i].abs().max(1e-8);
        let eval = |t: f64| -> Result<f64> {
            let mut v = profile.values.clone();
            v[i] += t;
            sobolev_quotient(&RadialProfile {
                n: profile.n,
                nodes: profile.nodes.clone(),
                values: v,
            })
        };
        let fd = (8.0 * (eval(h)? - eval(-h)?) - (eval(2.0 * h)? - eval(-2.0 * h)?)) / (12.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::sobolev_constant;

    fn nodes(count: usize) -> Vec<f64> {
        RadialProfile::log_nodes(count, 1e-3, 1e3)
    }

    #[test]
    fn profile_validation() {
        assert!(RadialProfile::new(3, vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.2]).is_ok());
        assert!(RadialProfile::new(3, vec![0.1, 1.0, 2.0], vec![1.0, 0.5, 0.2]).is_err());
        assert!(RadialProfile::new(3, vec![0.0, 1.0, 1.0], vec![1.0, 0.5, 0.2]).is_err());
        assert!(RadialProfile::new(3, vec![0.0, 1.0, 2.0], vec![1.0, -0.5, 0.2]).is_err());
        assert!(matches!(
            RadialProfile::new(3, vec![0.0, 1.0, 2.0], vec![0.0; 3]),
            Err(Error::Degenerate(_))
        ));
        assert!(RadialProfile::new(2, vec![0.0, 1.0, 2.0], vec![1.0; 3]).is_err());
    }

    #[test]
    fn bubble_quotient_matches_sobolev_constant() {
        let b = RadialProfile::bubble(3, nodes(4000)).unwrap();
        let q = sobolev_quotient(&b).unwrap();
        let s3 = sobolev_constant(3).unwrap();
        assert!((q / s3 - 1.0).abs() < 1e-4, "{q} vs {s3}");
    }

    #[test]
    fn bubble_quotient_in_five_dimensions() {
        let b = RadialProfile::bubble(5, nodes(4000)).unwrap();
        let q = sobolev_quotient(&b).unwrap();
        assert!((q / sobolev_constant(5).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn quotient_is_scale_and_dilation_invariant() {
        let nd = nodes(4000);
        let f = |r: f64| (1.0 + r * r).powf(-0.5) * (1.0 + 0.3 * (-r * r).exp());
        let base = sobolev_quotient(&RadialProfile::from_fn(3, nd.clone(), f).unwrap()).unwrap();
        let scaled = sobolev_quotient(&RadialProfile::from_fn(3, nd.clone(), |r| 7.0 * f(r)).unwrap()).unwrap();
        assert!((scaled / base - 1.0).abs() < 1e-12);
        let dilated = sobolev_quotient(&RadialProfile::from_fn(3, nd, |r| f(2.0 * r)).unwrap()).unwrap();
        assert!((dilated / base - 1.0).abs() < 1e-4);
    }

    #[test]
    fn perturbed_bubble_has_larger_quotient() {
        let nd = nodes(4000);
        let bubble = RadialProfile::bubble(3, nd.clone()).unwrap();
        let qb = sobolev_quotient(&bubble).unwrap();
        // compactly supported bump on [0.5, 2]
        let bump = |r: f64| if r > 0.5 && r < 2.0 { ((r - 0.5) * (2.0 - r)).powi(3) } else { 0.0 };
        let pert = RadialProfile::from_fn(3, nd, |r| talenti_bubble(3, r) + 0.1 * bump(r)).unwrap();
        let qp = sobolev_quotient(&pert).unwrap();
        assert!(qp - qb > 1e-3 * qb, "{qp} vs {qb}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let nd = nodes(400);
        let p = RadialProfile::from_fn(3, nd, |r| (-0.5 * r * r).exp()).unwrap();
        let g = quotient_gradient(&p).unwrap();
        let gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let idx: Vec<usize> = (0..g.len()).filter(|&i| g[i].abs() > 1e-2 * gmax).step_by(17).take(5).collect();
        assert_eq!(idx.len(), 5);
        assert!(gradient_check(&p, &idx, 1e-3).unwrap() < 1e-6);
    }

    #[test]
    fn gradient_vanishes_at_the_bubble() {
        let b = RadialProfile::bubble(3, nodes(2000)).unwrap();
        let g = quotient_gradient(&b).unwrap();
        let gauss = RadialProfile::from_fn(3, nodes(2000), |r| (-0.5 * r * r).exp()).unwrap();
        let gg = quotient_gradient(&gauss).unwrap();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm(&g) < 1e-2 * norm(&gg));
    }

    #[test]
    fn tridiagonal_solver() {
        let lo = [1.0, -2.0];
        let d = [4.0, 5.0, 6.0];
        let up = [0.5, 1.5];
        let x = [1.0, -1.0, 2.0];
        let rhs = [4.0 - 0.5, 1.0 - 5.0 + 3.0, 2.0 + 12.0];
        let got = solve_tridiagonal(&lo, &d, &up, &rhs);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn descent_from_gaussian_reaches_the_bubble() {
        let nd = nodes(4000);
        let init = RadialProfile::from_fn(3, nd, |r| (-0.5 * r * r).exp()).unwrap();
        let res = radial_descent(&init, 500, 1.0).unwrap();
        let s3 = sobolev_constant(3).unwrap();
        let last = *res.trace.last().unwrap();
        assert!((last / s3 - 1.0).abs() < 1e-2, "{last}");
        for w in res.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let fit = fit_bubble(&res.profile);
        assert!(fit.residual < 2e-2, "{fit:?}");
    }

    #[test]
    fn descent_is_stationary_at_the_bubble() {
        let b = RadialProfile::bubble(3, nodes(2000)).unwrap();
        let res = radial_descent(&b, 5, 1.0).unwrap();
        let q0 = res.trace[0];
        for q in &res.trace {
            assert!((q - q0).abs() <= 1e-6 * q0);
        }
    }

    #[test]
    fn fit_recovers_a_dilated_bubble() {
        let p = RadialProfile::from_fn(3, nodes(1000), |r| 2.5 * talenti_bubble(3, r / 3.0)).unwrap();
        let fit = fit_bubble(&p);
        assert!((fit.lambda - 3.0).abs() < 1e-4, "{fit:?}");
        assert!((fit.amplitude - 2.5).abs() < 1e-4);
        assert!(fit.residual < 1e-5);
    }
}

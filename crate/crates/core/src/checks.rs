//! The verification checks behind each CLI subcommand.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::clifford::{CliffordRep, Sign, C64};
use crate::conformal::{
    flat_l3_norm, sharp_pushforward_sphere_norm, sobolev_constant, sphere_l3_norm, sphere_spinor_norm_check,
    yamabe_functional_sphere_check, yamabe_sphere, BumpPotential, ConstantsReport,
};
use crate::error::{Error, Result};
use crate::fd::{convergence_slope, dirac_at_point, weitzenboeck_defect};
use crate::grid::{BumpSpinor, GridSpec, SpinorField};
use crate::identity::{
    equality_ledger, flat_yamabe_constant, integral_identity_report, sharp_pair_fields, step0_defect,
    step1_defect, step2_defect, twistor_norm_defect, EqualityLedger,
};
use crate::params;
use crate::radial::{fit_bubble, gradient_check, quotient_gradient, radial_descent, sobolev_quotient, RadialProfile};
use crate::report::{ToleranceConfig, VerificationReport};
use crate::sharp::{potential_ln_norm, random_points, SharpFamily};

pub const DEFAULT_GRID: usize = 129;
pub const DEFAULT_RADIUS: f64 = 8.0;
pub const DEFAULT_EPS: f64 = 0.1;
pub const LEDGER_GRID: usize = 193;
pub const LEDGER_RADIUS: f64 = 32.0;
pub const LEDGER_EPS: &[f64] = &[0.1, 0.01, 0.001];
pub const FD_SPACINGS: &[f64] = &[0.2, 0.1, 0.05];
pub const RADIAL_NODES: usize = 4000;
pub const DESCENT_STEPS: usize = 500;
pub const POINTWISE_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Bump,
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturbs the second generator so the algebra no longer closes.
    Gamma2,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: usize,
    pub sign: Sign,
    pub grid: Option<usize>,
    pub radius: Option<f64>,
    pub eps: Vec<f64>,
    pub order: usize,
    pub seed: u64,
    pub field: FieldKind,
    pub tolerances: ToleranceConfig,
    pub fault: Option<Fault>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 3,
            sign: Sign::Plus,
            grid: None,
            radius: None,
            eps: Vec::new(),
            order: 4,
            seed: 0,
            field: FieldKind::Bump,
            tolerances: ToleranceConfig::default(),
            fault: None,
        }
    }
}

impl RunConfig {
    fn tol(&self, key: &str) -> f64 {
        self.tolerances.get(key)
    }

    fn eps_or(&self, default: &[f64]) -> Vec<f64> {
        if self.eps.is_empty() {
            default.to_vec()
        } else {
            self.eps.clone()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckOutput {
    pub reports: Vec<VerificationReport>,
    pub artifacts: BTreeMap<String, Value>,
}

impl CheckOutput {
    fn push(&mut self, r: VerificationReport) {
        self.reports.push(r);
    }

    fn artifact<T: serde::Serialize>(&mut self, key: &str, value: &T) {
        self.artifacts
            .insert(key.to_string(), serde_json::to_value(value).expect("artifacts serialise"));
    }

    fn merge(&mut self, other: CheckOutput) {
        self.reports.extend(other.reports);
        self.artifacts.extend(other.artifacts);
    }
}

fn timed<F: FnOnce() -> Result<CheckOutput>>(f: F) -> Result<CheckOutput> {
    let start = Instant::now();
    let mut out = f()?;
    let ms = start.elapsed().as_millis() as u64;
    out.reports.iter_mut().for_each(|r| r.runtime_ms = ms);
    Ok(out)
}

fn oriented_rep(n: usize, sign: Sign, fault: Option<Fault>) -> Result<CliffordRep> {
    let rep = CliffordRep::new(n)?.with_orientation(sign);
    match fault {
        None => Ok(rep),
        Some(Fault::Gamma2) => {
            let mut gens = rep.generators().to_vec();
            gens[1][(0, 0)] += C64::new(1e-3, 0.0);
            CliffordRep::from_generators(gens)
        }
    }
}

fn rel(v: f64, scale: f64) -> f64 {
    v.abs() / scale.abs()
}

/// Anticommutation, skew-adjointness and unitarity of the generators.
pub fn gamma_check(cfg: &RunConfig, dims: &[usize]) -> Result<CheckOutput> {
    timed(|| {
        let mut out = CheckOutput::default();
        let tol = cfg.tol("gamma");
        for &n in dims {
            let rep = oriented_rep(n, cfg.sign, cfg.fault)?;
            let p = || params! {"n" => n, "s" => cfg.sign.as_i32()};
            out.push(VerificationReport::defect("gamma.anticommutation", p(), rep.anticommutation_defect(), tol));
            out.push(VerificationReport::defect("gamma.skew_adjoint", p(), rep.skew_adjoint_defect(), tol));
            out.push(VerificationReport::defect("gamma.unitarity", p(), rep.unitarity_defect(), tol));
        }
        Ok(out)
    })
}

fn spinor_json(s: &[C64]) -> Value {
    json!(s.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

/// Admissible base spinors from 50 seeded points.
pub fn nullspace_psi0(cfg: &RunConfig) -> Result<CheckOutput> {
    timed(|| {
        let family = SharpFamily::new(cfg.dim, cfg.sign)?;
        let basis = family.admissible_basis(&random_points(cfg.dim, 50, cfg.seed))?;
        let mut out = CheckOutput::default();
        let p = params! {"n" => cfg.dim, "s" => cfg.sign.as_i32(), "seed" => cfg.seed, "points" => 50};
        out.push(VerificationReport::against(
            "nullspace.dimension",
            p,
            basis.dimension() as f64,
            1.0,
            cfg.tol("zeromode.nullspace"),
        ));
        out.artifact("nullspace.singular_values", &basis.singular_values);
        out.artifact("nullspace.relative_gap", &basis.relative_gap());
        out.artifacts.insert(
            "nullspace.basis".into(),
            Value::Array(basis.basis.iter().map(|b| spinor_json(b.as_slice())).collect()),
        );
        Ok(out)
    })
}

/// Nullspace, closed-form residual on held-out points and the order of the
/// finite-difference Dirac cross-check.
pub fn zeromode_verify(cfg: &RunConfig) -> Result<CheckOutput> {
    timed(|| {
        let n = cfg.dim;
        let family = SharpFamily::new(n, cfg.sign)?;
        let basis = family.admissible_basis(&random_points(n, 50, cfg.seed))?;
        let held_out = random_points(n, 100, cfg.seed.wrapping_add(1));
        let base = || params! {"n" => n, "s" => cfg.sign.as_i32(), "seed" => cfg.seed};
        let mut out = CheckOutput::default();
        out.push(VerificationReport::against(
            "zeromode.nullspace_dimension",
            base(),
            basis.dimension() as f64,
            1.0,
            cfg.tol("zeromode.nullspace"),
        ));
        if basis.dimension() == 0 {
            return Err(Error::NoAdmissibleSpinor {
                n,
                sign: cfg.sign.as_i32(),
            });
        }
        let rep = family.rep();
        for (k, psi0) in basis.basis.iter().enumerate() {
            let residual = held_out
                .iter()
                .map(|x| family.residual_norm(psi0, x))
                .fold(0.0, f64::max);
            let mut p = base();
            p.insert("basis_index".into(), json!(k));
            p.insert("points".into(), json!(held_out.len()));
            out.push(VerificationReport::defect("zeromode.residual", p, residual, cfg.tol("zeromode.residual")));

            let errors: Vec<f64> = FD_SPACINGS
                .iter()
                .map(|&h| {
                    held_out[..10]
                        .iter()
                        .map(|x| {
                            let fd = dirac_at_point(rep, |y| family.zero_mode(psi0, y).0, x, h);
                            let exact = family.closed_form_dirac(psi0, x);
                            fd.iter().zip(exact.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            let mut p = base();
            p.insert("basis_index".into(), json!(k));
            p.insert("spacings".into(), json!(FD_SPACINGS));
            p.insert("errors".into(), json!(errors));
            out.push(VerificationReport::against(
                "zeromode.fd_dirac_order",
                p,
                convergence_slope(FD_SPACINGS, &errors),
                4.0,
                cfg.tol("zeromode.fd_slope"),
            ));
        }
        Ok(out)
    })
}

fn identity_field(cfg: &RunConfig, kind: FieldKind, seed: u64, grid: &GridSpec) -> Result<(CliffordRep, SpinorField)> {
    let n = cfg.dim;
    match kind {
        FieldKind::Sharp => {
            let family = SharpFamily::new(n, cfg.sign)?;
            let psi0 = family.admissible_psi0(50, seed)?;
            let (psi, _) = sharp_pair_fields(&family, &psi0, grid);
            Ok((family.rep().clone(), psi))
        }
        FieldKind::Bump => {
            let rep = oriented_rep(n, cfg.sign, None)?;
            let bump = BumpSpinor::unit_scale(n, rep.size(), seed);
            Ok((rep, SpinorField::sample(grid, bump.size, |x| bump.eval(x))))
        }
    }
}

/// The integral identity on one field over an ε sweep, with the defect on
/// the next-coarser grid and the pointwise step defects.
pub fn identity_check_field(cfg: &RunConfig, kind: FieldKind, seed: u64) -> Result<CheckOutput> {
    timed(|| {
        let m = cfg.grid.unwrap_or(DEFAULT_GRID);
        let radius = cfg.radius.unwrap_or(DEFAULT_RADIUS);
        let fine = GridSpec::new(cfg.dim, radius, m, cfg.order)?;
        let coarse = GridSpec::new(cfg.dim, radius, (m + 1) / 2, cfg.order)?;
        let (rep, field) = identity_field(cfg, kind, seed, &fine)?;
        let (_, coarse_field) = identity_field(cfg, kind, seed, &coarse)?;
        let label = match kind {
            FieldKind::Bump => "bump",
            FieldKind::Sharp => "sharp",
        };
        let mut out = CheckOutput::default();
        let mut reports = Vec::new();
        let mut steps = Vec::new();
        for eps in cfg.eps_or(&[DEFAULT_EPS]) {
            let p = || {
                params! {
                    "n" => cfg.dim, "s" => cfg.sign.as_i32(), "grid" => m, "radius" => radius,
                    "eps" => eps, "order" => cfg.order, "seed" => seed, "field" => label,
                }
            };
            let fine_report = integral_identity_report(&rep, &field, eps, None)?;
            let coarse_report = integral_identity_report(&rep, &coarse_field, eps, None)?;
            out.push(VerificationReport::defect(
                "identity.defect",
                p(),
                fine_report.defect,
                cfg.tol("identity.defect"),
            ));
            let mut pr = p();
            pr.insert("coarse_grid".into(), json!(coarse.points()));
            pr.insert("coarse_defect".into(), json!(coarse_report.defect));
            out.push(VerificationReport::defect(
                "identity.refinement_ratio",
                pr,
                fine_report.defect / coarse_report.defect,
                cfg.tol("identity.refinement"),
            ));
            steps.push(json!({
                "eps": eps,
                "step0": step0_defect(&field, eps)?,
                "step1": step1_defect(&field, eps)?,
                "step2": step2_defect(&rep, &field, eps)?,
            }));
            reports.push(fine_report);
        }
        out.artifact(&format!("identity.{label}.{seed}"), &reports);
        out.artifact(&format!("identity.{label}.{seed}.steps"), &steps);
        Ok(out)
    })
}

/// Pointwise step identities, the twistor-norm identity against analytic
/// derivatives and the Weitzenböck defect on a unit-scale bump field:
/// convergence order over [`FD_SPACINGS`] and the defect at `h = 0.1`.
///
/// `step0_eps` applies to the first step identity, `step_eps` to the two
/// expansion steps.
pub fn pointwise_check(cfg: &RunConfig, step0_eps: &[f64], step_eps: &[f64], seed: u64) -> Result<CheckOutput> {
    timed(|| {
        let n = cfg.dim;
        let rep = oriented_rep(n, cfg.sign, None)?;
        let bump = BumpSpinor::unit_scale(n, rep.size(), seed);
        let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for &h in FD_SPACINGS {
            let grid = GridSpec::with_spacing(n, POINTWISE_RADIUS, h, cfg.order)?;
            let field = SpinorField::sample(&grid, bump.size, |x| bump.eval(x));
            let mut put = |name: &str, eps: f64, v: f64| series.entry(format!("{name}@{eps}")).or_default().push(v);
            for &eps in step0_eps {
                put("step0", eps, step0_defect(&field, eps)?.max_abs);
            }
            for &eps in step_eps {
                put("step1", eps, step1_defect(&field, eps)?.max_abs);
                put("step2", eps, step2_defect(&rep, &field, eps)?.max_abs);
            }
            let twistor = twistor_norm_defect(&rep, &field, |x| bump.gradient(x))?.max_abs;
            series.entry("twistor".into()).or_default().push(twistor);
            series
                .entry("weitzenboeck".into())
                .or_default()
                .push(weitzenboeck_defect(&rep, &field)?);
        }
        let at = FD_SPACINGS
            .iter()
            .position(|&h| h == 0.1)
            .expect("h = 0.1 is one of the spacings");
        let mut out = CheckOutput::default();
        for (key, values) in &series {
            let (name, eps) = match key.split_once('@') {
                Some((name, eps)) => (name, Some(eps.parse::<f64>().expect("formatted above"))),
                None => (key.as_str(), None),
            };
            let p = || {
                params! {
                    "n" => n, "s" => cfg.sign.as_i32(), "order" => cfg.order, "seed" => seed,
                    "radius" => POINTWISE_RADIUS, "spacings" => FD_SPACINGS, "eps" => eps, "defects" => values,
                }
            };
            out.push(VerificationReport::against(
                &format!("pointwise.{name}.order"),
                p(),
                convergence_slope(FD_SPACINGS, values),
                cfg.order as f64,
                cfg.tol("pointwise.order"),
            ));
            out.push(VerificationReport::defect(
                &format!("pointwise.{name}.at_h0.1"),
                p(),
                values[at],
                cfg.tol("pointwise.abs"),
            ));
        }
        Ok(out)
    })
}

pub fn identity_check(cfg: &RunConfig) -> Result<CheckOutput> {
    let mut out = identity_check_field(cfg, cfg.field, cfg.seed)?;
    let sweep = cfg.eps_or(&[DEFAULT_EPS]);
    out.merge(pointwise_check(cfg, &sweep, &sweep, cfg.seed)?);
    Ok(out)
}

fn ledger_pair(
    cfg: &RunConfig,
    family: &SharpFamily,
    m: usize,
    radius: f64,
    eps: Option<f64>,
) -> Result<EqualityLedger> {
    let grid = GridSpec::new(cfg.dim, radius, m, cfg.order)?;
    let psi0 = family.admissible_psi0(50, cfg.seed)?;
    let (psi, a) = sharp_pair_fields(family, &psi0, &grid);
    equality_ledger(family.rep(), &psi, &a, eps, flat_yamabe_constant(cfg.dim)?)
}

/// Relative size of a ledger term, with values at rounding level reported
/// as exact zeros so refinement ratios are not ratios of noise.
fn ledger_relative(v: f64, scale: f64) -> f64 {
    let r = rel(v, scale);
    if r < 1e-12 {
        0.0
    } else {
        r
    }
}

/// The equality-case decomposition for the sharp pair, its refinement
/// behaviour and an ε sweep.
pub fn equality_ledger_check(cfg: &RunConfig) -> Result<CheckOutput> {
    timed(|| {
        let n = cfg.dim;
        let family = SharpFamily::new(n, cfg.sign)?;
        let m = cfg.grid.unwrap_or(LEDGER_GRID);
        let radius = cfg.radius.unwrap_or(LEDGER_RADIUS);
        let (mc, rc) = ((m + 1) / 2, radius / 2.0);
        let fine = ledger_pair(cfg, &family, m, radius, None)?;
        let coarse = ledger_pair(cfg, &family, mc, rc, None)?;
        let scale = fine.dirac_term.expect("set without ε");
        let coarse_scale = coarse.dirac_term.expect("set without ε");
        let base = || {
            params! {
                "n" => n, "s" => cfg.sign.as_i32(), "grid" => m, "radius" => radius,
                "order" => cfg.order, "seed" => cfg.seed,
            }
        };
        let mut out = CheckOutput::default();
        let terms = [
            ("P", fine.p, coarse.p),
            ("R1", fine.r1, coarse.r1),
            ("R2", fine.r2, coarse.r2),
            ("S", fine.s, coarse.s),
        ];
        for (name, f, c) in terms {
            let (f, c) = (f.expect("set without ε"), c.expect("set without ε"));
            let rf = ledger_relative(f, scale);
            let rc_ = ledger_relative(c, coarse_scale);
            out.push(VerificationReport::defect(
                &format!("ledger.{name}"),
                base(),
                rf,
                cfg.tol("ledger.term"),
            ));
            let mut p = base();
            p.insert("coarse_grid".into(), json!(mc));
            p.insert("coarse_radius".into(), json!(rc));
            p.insert("coarse_relative".into(), json!(rc_));
            let ratio = if rf == 0.0 { 0.0 } else { rf / rc_ };
            out.push(VerificationReport::defect(
                &format!("ledger.refinement.{name}"),
                p,
                ratio,
                cfg.tol("ledger.refinement"),
            ));
        }
        out.push(VerificationReport::defect(
            "ledger.holder_residual",
            base(),
            fine.holder_residual,
            cfg.tol("ledger.holder"),
        ));
        out.push(VerificationReport::defect(
            "ledger.twistor_norm",
            base(),
            rel(fine.p.expect("set without ε"), scale),
            cfg.tol("ledger.twistor"),
        ));

        let sweep = cfg.eps_or(LEDGER_EPS);
        let mut ledgers = Vec::new();
        for &eps in &sweep {
            ledgers.push(ledger_pair(cfg, &family, m, radius, Some(eps))?);
        }
        let series = |get: fn(&EqualityLedger) -> Option<f64>| -> Vec<f64> {
            ledgers.iter().map(|l| get(l).map_or(f64::NAN, |v| v.abs())).collect()
        };
        let trends: [(&str, fn(&EqualityLedger) -> Option<f64>); 4] = [
            ("R_eps", |l| l.r_eps),
            ("P_eps", |l| l.p_eps),
            ("R1_eps", |l| l.r1_eps),
            ("R2_eps", |l| l.r2_eps),
        ];
        for (name, get) in trends {
            let values = series(get);
            // largest ratio between consecutive sweep entries, ordered by decreasing ε
            let mut order: Vec<usize> = (0..sweep.len()).collect();
            order.sort_by(|&i, &j| sweep[j].total_cmp(&sweep[i]));
            let worst = order
                .windows(2)
                .map(|w| values[w[1]] / values[w[0]])
                .fold(0.0, f64::max);
            let mut p = base();
            p.insert("eps".into(), json!(sweep));
            p.insert("values".into(), json!(values));
            out.push(VerificationReport::defect(
                &format!("ledger.eps_trend.{name}"),
                p,
                if sweep.len() < 2 { f64::NAN } else { worst },
                cfg.tol("ledger.eps_trend"),
            ));
        }
        out.artifact("ledger.fine", &fine);
        out.artifact("ledger.coarse", &coarse);
        out.artifact("ledger.eps_sweep", &ledgers);
        Ok(out)
    })
}

/// Constant chain for every `n` in `dims`, sharpness of `‖A‖²` and the
/// sphere-side checks for odd `n`.
pub fn constants_check(cfg: &RunConfig, dims: &[usize]) -> Result<CheckOutput> {
    timed(|| {
        let mut out = CheckOutput::default();
        let mut tables = Vec::new();
        for &n in dims {
            let c = ConstantsReport::new(n)?;
            let p = || params! {"n" => n};
            out.push(VerificationReport::defect(
                "constants.chain",
                p(),
                c.chain_defects[0].max(c.chain_defects[1]),
                cfg.tol("constants.chain"),
            ));
            if n % 2 == 1 {
                let nf = n as f64;
                let target = nf / (4.0 * (nf - 1.0)) * yamabe_sphere(n);
                out.push(VerificationReport::against(
                    "constants.sharpness",
                    p(),
                    c.potential_norm_sq.expect("odd n"),
                    target,
                    cfg.tol("constants.sharpness") * target,
                ));
                let mut ps = p();
                ps.insert("seed".into(), json!(cfg.seed));
                ps.insert("samples".into(), json!(200));
                out.push(VerificationReport::defect(
                    "sphere.spinor_norm",
                    ps,
                    sphere_spinor_norm_check(n, 200, 2.0, cfg.seed)?,
                    cfg.tol("sphere.spinor_norm"),
                ));
                let flat = potential_ln_norm(n)?;
                out.push(VerificationReport::against(
                    "sphere.pullback_norm",
                    p(),
                    sharp_pushforward_sphere_norm(n)?,
                    flat,
                    cfg.tol("sphere.pullback") * flat,
                ));
                out.push(VerificationReport::defect(
                    "sphere.yamabe_functional",
                    p(),
                    yamabe_functional_sphere_check(n)?,
                    cfg.tol("sphere.yamabe_functional"),
                ));
            }
            if n == 3 {
                let mut worst: f64 = 0.0;
                for k in 0..5 {
                    let a = BumpPotential::random(3, cfg.seed.wrapping_add(k));
                    let r = a.support_radius();
                    let field = |x: &[f64]| a.eval(x);
                    let flat = flat_l3_norm(field, r, 24, 8);
                    let sphere = sphere_l3_norm(field, 2.0 * r.atan(), 24, 8, 192);
                    worst = worst.max((sphere / flat - 1.0).abs());
                }
                let mut ps = p();
                ps.insert("seed".into(), json!(cfg.seed));
                ps.insert("fields".into(), json!(5));
                out.push(VerificationReport::defect(
                    "sphere.bump_pullback",
                    ps,
                    worst,
                    cfg.tol("sphere.bump_pullback"),
                ));
            }
            tables.push(c);
        }
        out.artifact("constants", &tables);
        Ok(out)
    })
}

/// Radial Sobolev quotient of the bubble, descent from a Gaussian, and the
/// discrete-gradient audit.
pub fn yamabe_min(cfg: &RunConfig) -> Result<CheckOutput> {
    timed(|| {
        let n = cfg.dim;
        let sn = sobolev_constant(n)?;
        let nodes = RadialProfile::log_nodes(RADIAL_NODES, 1e-3, 1e3);
        let base = || params! {"n" => n, "nodes" => RADIAL_NODES, "r_min" => 1e-3, "r_max" => 1e3};
        let mut out = CheckOutput::default();

        let bubble = RadialProfile::bubble(n, nodes.clone())?;
        let qb = sobolev_quotient(&bubble)?;
        out.push(VerificationReport::against(
            "yamabe.bubble_quotient",
            base(),
            qb,
            sn,
            cfg.tol("yamabe.bubble") * sn,
        ));
        let stationary = radial_descent(&bubble, 5, 1.0)?;
        let drift = stationary
            .trace
            .iter()
            .map(|q| (q - stationary.trace[0]).abs() / stationary.trace[0])
            .fold(0.0, f64::max);
        out.push(VerificationReport::defect(
            "yamabe.bubble_stationary",
            base(),
            drift,
            cfg.tol("yamabe.stationary"),
        ));

        let gaussian = RadialProfile::from_fn(n, nodes, |r| (-0.5 * r * r).exp())?;
        let res = radial_descent(&gaussian, DESCENT_STEPS, 1.0)?;
        let last = *res.trace.last().expect("trace starts with the initial value");
        let mut p = base();
        p.insert("steps".into(), json!(DESCENT_STEPS));
        p.insert("steps_taken".into(), json!(res.trace.len() - 1));
        out.push(VerificationReport::against(
            "yamabe.descent_quotient",
            p.clone(),
            last,
            sn,
            cfg.tol("yamabe.descent") * sn,
        ));
        let rise = res
            .trace
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0])
            .fold(0.0, f64::max);
        out.push(VerificationReport::defect(
            "yamabe.descent_monotone",
            p.clone(),
            rise,
            cfg.tol("yamabe.monotone"),
        ));
        let fit = fit_bubble(&res.profile);
        let mut pf = p;
        pf.insert("lambda".into(), json!(fit.lambda));
        pf.insert("amplitude".into(), json!(fit.amplitude));
        out.push(VerificationReport::defect(
            "yamabe.descent_profile",
            pf,
            fit.residual,
            cfg.tol("yamabe.profile"),
        ));

        let g = quotient_gradient(&gaussian)?;
        let gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut candidates: Vec<usize> = (0..g.len()).filter(|&i| g[i].abs() > 1e-2 * gmax).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        candidates.shuffle(&mut rng);
        let mut picked: Vec<usize> = candidates.into_iter().take(5).collect();
        picked.sort_unstable();
        let mut pg = base();
        pg.insert("seed".into(), json!(cfg.seed));
        pg.insert("indices".into(), json!(picked));
        out.push(VerificationReport::defect(
            "yamabe.gradient_fd",
            pg,
            gradient_check(&gaussian, &picked, 1e-3)?,
            cfg.tol("yamabe.gradient"),
        ));

        out.artifact("yamabe.descent_trace", &res.trace);
        out.artifact("yamabe.bubble_fit", &fit);
        Ok(out)
    })
}

/// Every check with its defaults at `cfg.dim`, plus the dimension sweeps.
pub fn all(cfg: &RunConfig) -> Result<CheckOutput> {
    let mut out = CheckOutput::default();
    out.merge(gamma_check(cfg, &(2..=9).collect::<Vec<_>>())?);
    out.merge(zeromode_verify(cfg)?);
    out.merge(nullspace_psi0(cfg)?);
    out.merge(identity_check(cfg)?);
    out.merge(equality_ledger_check(cfg)?);
    out.merge(constants_check(cfg, &(3..=9).collect::<Vec<_>>())?);
    out.merge(yamabe_min(cfg)?);
    Ok(out)
}

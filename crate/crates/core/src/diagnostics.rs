//! Run-time checks of the discrete estimates: maximum principle, one-sided
//! jump decay, cubic and quadratic accumulators, positivity of `nu`, the LF
//! cell entropy inequality and the bound on the correction terms.

use crate::error::{DfluxError, Result};
use crate::flux::{Coefficient, Convexity, FluxModel};
use crate::grid::{extend_absorbing, Parity, StaggeredState};
use crate::limiter::LimiterKind;
use crate::scheme::{CflLevel, CorrectionTerms, MarchInfo, Observer, Scheme, SchemeConfig, Transition};

/// Absolute tolerance for every inequality checked here.
pub const TOL: f64 = 1e-12;

/// Jumps counted by the one-sided estimate: positive for convex fluxes,
/// negative (in magnitude) for concave ones.
fn signed_part(d: f64, convexity: Convexity) -> f64 {
    match convexity {
        Convexity::StrictlyConvex => d.max(0.0),
        Convexity::StrictlyConcave => (-d).max(0.0),
    }
}

fn jumps(values: &[f64]) -> impl Iterator<Item = f64> + '_ {
    values.windows(2).map(|w| w[1] - w[0])
}

/// The constant `Psi` of the one-sided estimate, with `C = C_{u0}` and
/// `||k||` the sup norm of the coefficient.
pub fn psi(model: &FluxModel, k_sup: f64, lambda: f64) -> f64 {
    let b = &model.bounds;
    let c = model.c_u0();
    let (fu, fk, fuk, g2) = (b.sup_fu, b.sup_fk, b.sup_fuk, b.gamma2);
    let l = lambda;
    72.0 * l * l * c * c * fuk
        + 114.0 * l * c * c * fuk
        + (708.0 * c * c + 48.0 * l * fu) * l * l * fu * fuk
        + (48.0 * l * l * c * k_sup + 132.0 * l * l * c * c * g2 * fu + 64.0 * l * fk * k_sup + 88.0 * c) * l * fk
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OneSidedCheck {
    /// `sum (du^{n+1})_+^2`.
    pub lhs: f64,
    /// `sum (du^n)_+^2 - (lambda g1 / 500) sum (du^n)_+^3 + Psi ||k||_BV`.
    pub rhs: f64,
    pub holds: bool,
    /// `rhs - lhs`.
    pub margin: f64,
}

pub fn onesided_check(
    prev: &StaggeredState,
    next: &StaggeredState,
    model: &FluxModel,
    coeff: &Coefficient,
    lambda: f64,
) -> OneSidedCheck {
    let cv = model.convexity;
    let lhs: f64 = jumps(&next.values).map(|d| signed_part(d, cv).powi(2)).sum();
    let (sq, cube) = jumps(&prev.values).fold((0.0, 0.0), |(s, c), d| {
        let p = signed_part(d, cv);
        (s + p * p, c + p * p * p)
    });
    let rhs = sq - lambda * model.bounds.gamma1 / 500.0 * cube + psi(model, coeff.sup_norm(), lambda) * coeff.bv_norm();
    OneSidedCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + TOL,
        margin: rhs - lhs,
    }
}

/// `nu_{j+1/2}` at every interface of `state`, given slopes aligned with
/// its cells. Concave models use `|f_uu|`. When `du = 0` the ratios are 0.
pub fn nu_coefficient(state: &StaggeredState, slopes: &[f64], model: &FluxModel, lambda: f64) -> Vec<f64> {
    nu_from_arrays(&state.values, &state.kbar, slopes, model, lambda)
}

fn nu_from_arrays(u: &[f64], k: &[f64], sigma: &[f64], model: &FluxModel, lambda: f64) -> Vec<f64> {
    let sign = model.convexity.sign();
    (0..u.len().saturating_sub(1))
        .map(|j| {
            let kt = 0.5 * (k[j] + k[j + 1]);
            let ut = 0.5 * (u[j] + u[j + 1]);
            let beta = lambda * model.d_u(kt, ut);
            let du = u[j + 1] - u[j];
            let (ratio, mean) = if du == 0.0 {
                (0.0, 0.0)
            } else {
                ((sigma[j + 1] - sigma[j]) / du, (sigma[j] + sigma[j + 1]) / (2.0 * du))
            };
            let w = 1.0 - 4.0 * beta * beta;
            0.125 * w * (1.0 - w / 16.0 * ratio * ratio - beta * ratio - mean) * sign * model.d_uu(kt, ut)
        })
        .collect()
}

/// Default Kruzkov constants: 11 equispaced values on `[u_lo, u_hi]`.
pub fn default_c_grid(model: &FluxModel) -> Vec<f64> {
    (0..=10)
        .map(|i| model.u_lo + (model.u_hi - model.u_lo) * i as f64 / 10.0)
        .collect()
}

fn kruzkov_flux(model: &FluxModel, k: f64, u: f64, c: f64) -> f64 {
    let s = if u > c {
        1.0
    } else if u < c {
        -1.0
    } else {
        0.0
    };
    s * (model.eval(k, u) - model.eval(k, c))
}

/// Largest cell entropy residual of `out`, whose cell `i` was produced
/// from the pair `(u[i + offset], u[i + offset + 1])`.
fn entropy_residual_pairs(
    u: &[f64],
    k: &[f64],
    offset: usize,
    out: &[f64],
    model: &FluxModel,
    lambda: f64,
    c_grid: &[f64],
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for &c in c_grid {
        for (i, &ub) in out.iter().enumerate() {
            let j = i + offset;
            let r = (ub - c).abs() - 0.5 * (u[j + 1] - c).abs() - 0.5 * (u[j] - c).abs()
                + lambda * (kruzkov_flux(model, k[j + 1], u[j + 1], c) - kruzkov_flux(model, k[j], u[j], c))
                - lambda * (model.eval(k[j + 1], c) - model.eval(k[j], c)).abs();
            worst = worst.max(r);
        }
    }
    worst
}

/// Maximum over `c_grid` and cells of the LF cell entropy functional for
/// the transition `prev -> next`. Non-positive for a valid LF step.
pub fn entropy_residual_lf(
    prev: &StaggeredState,
    next: &StaggeredState,
    model: &FluxModel,
    lambda: f64,
    c_grid: &[f64],
) -> Result<f64> {
    if next.parity != prev.parity.flip() || next.len() != prev.mesh.cell_count(next.parity) {
        return Err(DfluxError::ParityMismatch(format!(
            "{:?} state of {} cells cannot follow {:?} state of {} cells",
            next.parity,
            next.len(),
            prev.parity,
            prev.len()
        )));
    }
    let ext = extend_absorbing(prev, 1)?;
    let offset = match prev.parity {
        Parity::Base => 1,
        Parity::Half => 0,
    };
    Ok(entropy_residual_pairs(
        &ext.values,
        &ext.kbar,
        offset,
        &next.values,
        model,
        lambda,
        c_grid,
    ))
}

/// `dx * sum |du|^3` over interfaces of `state` with `|x| <= window_x`.
pub fn cubic_sum(state: &StaggeredState, window_x: f64) -> f64 {
    let mut s = 0.0;
    for (j, d) in jumps(&state.values).enumerate() {
        if state.mesh.interface(state.parity, j).abs() <= window_x {
            s += d.abs().powi(3);
        }
    }
    state.mesh.dx * s
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum CorrectionCheck {
    /// The bound applies only to the mesh-dependent limiter.
    NotApplicable,
    Checked { max_a: f64, bound: f64, holds: bool },
}

/// `(lambda^2 sup_fu^2 / 2 + 1/8) k_tilde dx^alpha`.
pub fn correction_bound(cfg: &SchemeConfig, model: &FluxModel, dx: f64) -> f64 {
    let l = cfg.lambda;
    let fu = model.bounds.sup_fu;
    (l * l * fu * fu / 2.0 + 0.125) * cfg.limiter.cap(dx)
}

pub fn correction_bound_check(
    corrections: &CorrectionTerms,
    cfg: &SchemeConfig,
    model: &FluxModel,
    dx: f64,
) -> CorrectionCheck {
    if cfg.scheme != Scheme::NessyahuTadmor || cfg.limiter.kind != LimiterKind::MinmodModified {
        return CorrectionCheck::NotApplicable;
    }
    let max_a = corrections.max_abs();
    let bound = correction_bound(cfg, model, dx);
    CorrectionCheck::Checked {
        max_a,
        bound,
        holds: max_a <= bound + TOL,
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticsReport {
    pub scheme: Scheme,
    pub lambda: f64,
    pub dx: f64,
    pub steps: u64,
    pub snapped_time: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// `"positive"` for convex models, `"negative"` for concave ones.
    pub onesided_jumps: &'static str,
    pub onesided_holds: bool,
    pub onesided_worst_margin: f64,
    pub onesided_series: Vec<f64>,
    pub psi: f64,
    pub cubic_accumulator: f64,
    pub quad_accumulator: f64,
    pub nu_min: f64,
    /// For NT runs this is evaluated on the NT output and only reported.
    pub entropy_max_residual: f64,
    pub correction_max: f64,
    /// `None` unless the mesh-dependent limiter is active.
    pub correction_bound: Option<f64>,
    pub correction_holds: bool,
    pub cfl_level: CflLevel,
    pub kappa_used: f64,
    pub kappa_bound: f64,
    pub warnings: Vec<String>,
}

impl DiagnosticsReport {
    fn empty(model: &FluxModel, cfg: &SchemeConfig, dx: f64) -> Self {
        DiagnosticsReport {
            scheme: cfg.scheme,
            lambda: cfg.lambda,
            dx,
            steps: 0,
            snapped_time: 0.0,
            u_min: f64::INFINITY,
            u_max: f64::NEG_INFINITY,
            onesided_jumps: match model.convexity {
                Convexity::StrictlyConvex => "positive",
                Convexity::StrictlyConcave => "negative",
            },
            onesided_holds: true,
            onesided_worst_margin: f64::INFINITY,
            onesided_series: Vec::new(),
            psi: 0.0,
            cubic_accumulator: 0.0,
            quad_accumulator: 0.0,
            nu_min: f64::INFINITY,
            entropy_max_residual: f64::NEG_INFINITY,
            correction_max: 0.0,
            correction_bound: None,
            correction_holds: true,
            cfl_level: cfg.cfl_level,
            kappa_used: cfg.lambda * model.bounds.sup_fu,
            kappa_bound: crate::scheme::cfl_bound(model, cfg.cfl_level),
            warnings: Vec::new(),
        }
    }

    /// Adds `dx * sum_{|x| <= X} |du|^3` of `state`.
    pub fn accumulate_cubic(&mut self, state: &StaggeredState, window_x: f64) {
        self.cubic_accumulator += cubic_sum(state, window_x);
    }

    fn track_extrema(&mut self, state: &StaggeredState) {
        let (lo, hi) = state.min_max();
        self.u_min = self.u_min.min(lo);
        self.u_max = self.u_max.max(hi);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    /// Half-width of the window for the cubic accumulator.
    pub window_x: f64,
    pub c_grid: Vec<f64>,
    pub onesided: bool,
    pub nu: bool,
    pub entropy: bool,
    pub correction: bool,
}

impl DiagnosticsConfig {
    /// All checks on, window covering the whole mesh.
    pub fn all(model: &FluxModel, mesh: &crate::grid::Mesh) -> Self {
        DiagnosticsConfig {
            window_x: mesh.x_min.abs().max(mesh.x_max.abs()),
            c_grid: default_c_grid(model),
            onesided: true,
            nu: true,
            entropy: true,
            correction: true,
        }
    }
}

/// Observer folding every transition of a march into a [`DiagnosticsReport`].
pub struct Diagnostics {
    cfg: DiagnosticsConfig,
    report: DiagnosticsReport,
}

impl Diagnostics {
    pub fn new(model: &FluxModel, coeff: &Coefficient, scheme: &SchemeConfig, initial: &StaggeredState, cfg: DiagnosticsConfig) -> Self {
        let mut report = DiagnosticsReport::empty(model, scheme, initial.mesh.dx);
        report.psi = psi(model, coeff.sup_norm(), scheme.lambda);
        if scheme.scheme == Scheme::NessyahuTadmor && scheme.limiter.kind == LimiterKind::MinmodModified {
            report.correction_bound = Some(correction_bound(scheme, model, initial.mesh.dx));
        }
        report.track_extrema(initial);
        Diagnostics { cfg, report }
    }

    pub fn report(&self) -> &DiagnosticsReport {
        &self.report
    }

    /// Records the march outcome and returns the report.
    pub fn finish(mut self, final_state: &StaggeredState, info: &MarchInfo) -> DiagnosticsReport {
        self.update_from(final_state, info);
        self.report
    }

    /// Updates step count, time and warnings after one (possibly resumed) march.
    pub fn update_from(&mut self, final_state: &StaggeredState, info: &MarchInfo) {
        self.report.track_extrema(final_state);
        self.report.steps = final_state.step_index;
        self.report.snapped_time = info.snapped_time;
        self.report.kappa_used = info.cfl.kappa_used;
        self.report.kappa_bound = info.cfl.kappa_bound;
        if let Some(w) = &info.cfl.warning {
            if !self.report.warnings.contains(w) {
                self.report.warnings.push(w.clone());
            }
        }
        if info.snapped {
            self.report.warnings.push(format!(
                "t = {} snapped to {} ({} steps)",
                info.requested_time, info.snapped_time, info.total_steps
            ));
        }
    }
}

impl Observer for Diagnostics {
    fn observe(&mut self, t: &Transition<'_>) {
        let r = &mut self.report;
        let lambda = t.cfg.lambda;
        r.track_extrema(t.next);
        r.accumulate_cubic(t.prev, self.cfg.window_x);

        if self.cfg.onesided {
            let c = onesided_check(t.prev, t.next, t.model, t.coeff, lambda);
            r.onesided_series.push(c.lhs);
            r.onesided_holds &= c.holds;
            r.onesided_worst_margin = r.onesided_worst_margin.min(c.margin);
        }

        let d = t.detail;
        let g = d.ext.ghost;
        let n = t.prev.len();
        if self.cfg.nu {
            let sigma = &d.slopes[g..g + n];
            let nu = nu_from_arrays(&t.prev.values, &t.prev.kbar, sigma, t.model, lambda);
            let mut q = 0.0;
            for (nu_j, du) in nu.iter().zip(jumps(&t.prev.values)) {
                q += nu_j * du * du;
                r.nu_min = r.nu_min.min(*nu_j);
            }
            r.quad_accumulator += t.prev.mesh.dx * q;
        }

        if self.cfg.entropy {
            let res = entropy_residual_pairs(
                &d.ext.values,
                &d.ext.kbar,
                d.offset,
                &t.next.values,
                t.model,
                lambda,
                &self.cfg.c_grid,
            );
            r.entropy_max_residual = r.entropy_max_residual.max(res);
        }

        if self.cfg.correction && t.cfg.scheme == Scheme::NessyahuTadmor {
            let a = d.active_corrections(t.next.len());
            let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            r.correction_max = r.correction_max.max(m);
            if let Some(b) = r.correction_bound {
                r.correction_holds &= m <= b + TOL;
            }
        }
    }
}

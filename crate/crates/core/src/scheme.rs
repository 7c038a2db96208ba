//! Staggered central schemes: first-order Lax-Friedrichs (LF) and the
//! second-order Nessyahu-Tadmor-type scheme (NT), CFL levels and the
//! time-marching driver.
//!
//! One step maps a state of one parity onto the other. The current state is
//! padded with constant ghost cells; output cell `i` is built from the padded
//! pair `(i + offset, i + offset + 1)`.

use crate::error::{DfluxError, Result};
use crate::flux::{Coefficient, FluxModel};
use crate::grid::{cell_average_coefficient, extend_absorbing, Extended, Parity, StaggeredState};
use crate::limiter::{slopes, LimiterConfig, LimiterKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Scheme {
    LaxFriedrichs,
    NessyahuTadmor,
}

impl Scheme {
    /// Ghost cells needed on each side: the NT slope stencil adds one.
    pub fn ghost_width(self) -> usize {
        match self {
            Scheme::LaxFriedrichs => 1,
            Scheme::NessyahuTadmor => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::LaxFriedrichs => "LF",
            Scheme::NessyahuTadmor => "NT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CflLevel {
    /// `kappa <= (sqrt 2 - 1)/2`: maximum principle.
    MaxPrinciple,
    /// `kappa <= min(g1/(7500 g2), 1/4000)`: one-sided jump estimate.
    OneSided,
    /// One-sided level further restricted for the cubic and quadratic estimates.
    CubicEstimate,
    /// No bound; `lambda` is taken as given and a warning is recorded.
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub limiter: LimiterConfig,
    /// `dt / dx`, fixed for the whole run.
    pub lambda: f64,
    pub cfl_level: CflLevel,
}

impl SchemeConfig {
    pub fn lax_friedrichs(lambda: f64) -> Self {
        SchemeConfig {
            scheme: Scheme::LaxFriedrichs,
            limiter: LimiterConfig::zero(),
            lambda,
            cfl_level: CflLevel::MaxPrinciple,
        }
    }

    pub fn nessyahu_tadmor(lambda: f64, limiter: LimiterConfig) -> Self {
        SchemeConfig {
            scheme: Scheme::NessyahuTadmor,
            limiter,
            lambda,
            cfl_level: CflLevel::MaxPrinciple,
        }
    }

    pub fn with_cfl_level(mut self, level: CflLevel) -> Self {
        self.cfl_level = level;
        self
    }

    /// Slopes actually used by this configuration.
    fn effective_limiter(&self) -> LimiterConfig {
        match self.scheme {
            Scheme::LaxFriedrichs => LimiterConfig::zero(),
            Scheme::NessyahuTadmor => self.limiter,
        }
    }
}

/// `chi = 228 + 13 C + 174 C g2 + 12 C^2 g2`.
pub fn cubic_chi(c_u0: f64, gamma2: f64) -> f64 {
    228.0 + 13.0 * c_u0 + 174.0 * c_u0 * gamma2 + 12.0 * c_u0 * c_u0 * gamma2
}

/// Admissible CFL number `kappa` for the chosen level; `Manual` is unbounded.
pub fn cfl_bound(model: &FluxModel, level: CflLevel) -> f64 {
    let g1 = model.bounds.gamma1;
    let g2 = model.bounds.gamma2;
    let one_sided = (g1 / (7500.0 * g2)).min(1.0 / 4000.0);
    match level {
        CflLevel::MaxPrinciple => (2f64.sqrt() - 1.0) / 2.0,
        CflLevel::OneSided => one_sided,
        CflLevel::CubicEstimate => {
            let c = model.c_u0();
            one_sided
                .min(7.0 / (85.0 + 16.0 * c))
                .min(g1 / (g2 * cubic_chi(c, g2)))
        }
        CflLevel::Manual => f64::INFINITY,
    }
}

/// Largest `lambda` allowed by `level`.
pub fn admissible_lambda(model: &FluxModel, level: CflLevel) -> f64 {
    cfl_bound(model, level) / model.bounds.sup_fu
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CflCheck {
    pub level: CflLevel,
    pub kappa_used: f64,
    pub kappa_bound: f64,
    pub warning: Option<String>,
}

/// Relative slack when comparing `kappa_used` with its bound, so a lambda
/// computed as `bound / sup_fu` is accepted.
const CFL_SLACK: f64 = 1e-12;

pub fn check_cfl(model: &FluxModel, cfg: &SchemeConfig) -> Result<CflCheck> {
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(DfluxError::InvalidParameter(format!(
            "lambda must be positive, got {}",
            cfg.lambda
        )));
    }
    let kappa_used = cfg.lambda * model.bounds.sup_fu;
    let kappa_bound = cfl_bound(model, cfg.cfl_level);
    if cfg.cfl_level == CflLevel::Manual {
        return Ok(CflCheck {
            level: cfg.cfl_level,
            kappa_used,
            kappa_bound,
            warning: Some(format!(
                "manual CFL level: lambda = {} (kappa = {kappa_used}) is not checked",
                cfg.lambda
            )),
        });
    }
    if kappa_used > kappa_bound * (1.0 + CFL_SLACK) {
        return Err(DfluxError::CflViolation {
            level: cfg.cfl_level,
            kappa_used,
            kappa_bound,
        });
    }
    Ok(CflCheck {
        level: cfg.cfl_level,
        kappa_used,
        kappa_bound,
        warning: None,
    })
}

/// `u_j - (lambda/2) f_u(k_j, u_j) sigma_j`.
pub fn mid_time_values(values: &[f64], kbar: &[f64], slopes: &[f64], model: &FluxModel, lambda: f64) -> Vec<f64> {
    values
        .iter()
        .zip(kbar)
        .zip(slopes)
        .map(|((&u, &k), &s)| u - 0.5 * lambda * model.d_u(k, u) * s)
        .collect()
}

/// Everything computed on the padded stencil during one step.
#[derive(Debug, Clone)]
pub struct StepDetail {
    pub ext: Extended,
    /// Output cell `i` uses padded cells `i + offset` and `i + offset + 1`.
    pub offset: usize,
    pub slopes: Vec<f64>,
    pub mid: Vec<f64>,
    /// The LF update of the previous state (the predictor).
    pub predictor: Vec<f64>,
    /// `a_j = lambda (f(k_j, u_j^{n+1/2}) - f(k_j, u_j)) + sigma_j / 8` on the padded grid.
    pub corrections: Vec<f64>,
}

impl StepDetail {
    /// Correction terms touching the output cells.
    pub fn active_corrections(&self, n_out: usize) -> &[f64] {
        &self.corrections[self.offset..self.offset + n_out + 1]
    }
}

/// Correction terms of the predictor-corrector form of one NT step.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTerms {
    pub a: Vec<f64>,
}

impl CorrectionTerms {
    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn offset_for(parity: Parity, ghost: usize) -> usize {
    match parity {
        Parity::Base => ghost,
        Parity::Half => ghost - 1,
    }
}

fn output_len(state: &StaggeredState) -> usize {
    state.mesh.cell_count(state.parity.flip())
}

fn next_state(prev: &StaggeredState, values: Vec<f64>, kbar: Vec<f64>, lambda: f64) -> StaggeredState {
    let step_index = prev.step_index + 1;
    StaggeredState {
        mesh: prev.mesh,
        values,
        kbar,
        parity: prev.parity.flip(),
        time: step_index as f64 * lambda * prev.mesh.dx,
        step_index,
    }
}

/// How the NT update is assembled; the two forms are algebraically equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Direct,
    PredictorCorrector,
}

fn compute_detail(
    state: &StaggeredState,
    model: &FluxModel,
    cfg: &SchemeConfig,
    ghost: usize,
    form: Form,
) -> Result<(Vec<f64>, StepDetail)> {
    if state.values.len() != state.kbar.len() {
        return Err(DfluxError::InvalidParameter(format!(
            "state has {} values but {} coefficient averages",
            state.values.len(),
            state.kbar.len()
        )));
    }
    if state.values.len() != state.mesh.cell_count(state.parity) {
        return Err(DfluxError::ParityMismatch(format!(
            "{:?} state on {} cells has {} values",
            state.parity,
            state.mesh.n_cells,
            state.values.len()
        )));
    }
    let ext = extend_absorbing(state, ghost)?;
    let offset = offset_for(state.parity, ghost);
    let n_out = output_len(state);
    let lambda = cfg.lambda;
    let limiter = cfg.effective_limiter();

    let u = &ext.values;
    let k = &ext.kbar;
    let sigma = slopes(u, state.mesh.dx, &limiter);
    let mid = if limiter.kind == LimiterKind::Zero {
        u.clone()
    } else {
        mid_time_values(u, k, &sigma, model, lambda)
    };
    let f_old: Vec<f64> = u.iter().zip(k).map(|(&u, &k)| model.eval(k, u)).collect();
    let f_mid: Vec<f64> = mid.iter().zip(k).map(|(&m, &k)| model.eval(k, m)).collect();
    let corrections: Vec<f64> = (0..u.len())
        .map(|j| lambda * (f_mid[j] - f_old[j]) + sigma[j] / 8.0)
        .collect();

    let mut predictor = Vec::with_capacity(n_out);
    let mut out = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let j = i + offset;
        let avg = 0.5 * (u[j] + u[j + 1]);
        let lf = avg - lambda * (f_old[j + 1] - f_old[j]);
        predictor.push(lf);
        let v = match (cfg.scheme, form) {
            (Scheme::LaxFriedrichs, _) => lf,
            (Scheme::NessyahuTadmor, Form::Direct) => {
                avg - 0.125 * (sigma[j + 1] - sigma[j]) - lambda * (f_mid[j + 1] - f_mid[j])
            }
            (Scheme::NessyahuTadmor, Form::PredictorCorrector) => lf - corrections[j + 1] + corrections[j],
        };
        out.push(v);
    }
    Ok((
        out,
        StepDetail {
            ext,
            offset,
            slopes: sigma,
            mid,
            predictor,
            corrections,
        },
    ))
}

fn step_with(
    state: &StaggeredState,
    model: &FluxModel,
    next_kbar: Vec<f64>,
    cfg: &SchemeConfig,
    form: Form,
) -> Result<(StaggeredState, StepDetail)> {
    let (values, detail) = compute_detail(state, model, cfg, cfg.scheme.ghost_width(), form)?;
    Ok((next_state(state, values, next_kbar, cfg.lambda), detail))
}

fn validate(model: &FluxModel, cfg: &SchemeConfig) -> Result<CflCheck> {
    cfg.limiter.validate()?;
    check_cfl(model, cfg)
}

/// One Lax-Friedrichs step:
/// `u'_{j+1/2} = (u_j + u_{j+1})/2 - lambda (f(k_{j+1}, u_{j+1}) - f(k_j, u_j))`.
pub fn lf_step(state: &StaggeredState, model: &FluxModel, coeff: &Coefficient, cfg: &SchemeConfig) -> Result<StaggeredState> {
    let cfg = SchemeConfig {
        scheme: Scheme::LaxFriedrichs,
        ..*cfg
    };
    validate(model, &cfg)?;
    let kbar = cell_average_coefficient(&state.mesh, coeff, state.parity.flip());
    Ok(step_with(state, model, kbar, &cfg, Form::Direct)?.0)
}

/// One staggered second-order step, with its correction terms on the
/// padded grid (`a[offset..offset + n_out + 1]` touch the output).
pub fn nt_step(
    state: &StaggeredState,
    model: &FluxModel,
    coeff: &Coefficient,
    cfg: &SchemeConfig,
) -> Result<(StaggeredState, CorrectionTerms)> {
    let cfg = SchemeConfig {
        scheme: Scheme::NessyahuTadmor,
        ..*cfg
    };
    validate(model, &cfg)?;
    let kbar = cell_average_coefficient(&state.mesh, coeff, state.parity.flip());
    let (next, detail) = step_with(state, model, kbar, &cfg, Form::Direct)?;
    let n_out = next.len();
    let a = detail.active_corrections(n_out).to_vec();
    Ok((next, CorrectionTerms { a }))
}

/// The NT step assembled as an LF predictor followed by the correction
/// `u' = u_bar - a_{j+1} + a_j`.
pub fn predictor_corrector_step(
    state: &StaggeredState,
    model: &FluxModel,
    coeff: &Coefficient,
    cfg: &SchemeConfig,
) -> Result<StaggeredState> {
    let cfg = SchemeConfig {
        scheme: Scheme::NessyahuTadmor,
        ..*cfg
    };
    validate(model, &cfg)?;
    let kbar = cell_average_coefficient(&state.mesh, coeff, state.parity.flip());
    Ok(step_with(state, model, kbar, &cfg, Form::PredictorCorrector)?.0)
}

/// One transition handed to observers during a march.
pub struct Transition<'a> {
    pub prev: &'a StaggeredState,
    pub next: &'a StaggeredState,
    pub detail: &'a StepDetail,
    pub model: &'a FluxModel,
    pub coeff: &'a Coefficient,
    pub cfg: &'a SchemeConfig,
}

pub trait Observer {
    fn observe(&mut self, t: &Transition<'_>);
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MarchInfo {
    pub requested_time: f64,
    /// Largest even multiple of `dt` not exceeding the requested time.
    pub snapped_time: f64,
    pub snapped: bool,
    pub total_steps: u64,
    pub steps_taken: u64,
    pub cfl: CflCheck,
}

/// Even step count reached at or below `t_end`.
pub fn snapped_steps(t_end: f64, dt: f64) -> u64 {
    let raw = (t_end / dt * (1.0 + 1e-12)).floor() as u64;
    raw - raw % 2
}

/// Advances `initial` to the even step count at or below `t_end`, feeding
/// every transition to `observers`.
pub fn march(
    initial: StaggeredState,
    model: &FluxModel,
    coeff: &Coefficient,
    cfg: &SchemeConfig,
    t_end: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<(StaggeredState, MarchInfo)> {
    if initial.is_empty() {
        return Err(DfluxError::EmptyState);
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(DfluxError::InvalidParameter(format!("t_end must be >= 0, got {t_end}")));
    }
    let cfl = validate(model, cfg)?;
    let dt = cfg.lambda * initial.mesh.dx;
    let total_steps = snapped_steps(t_end, dt);
    if total_steps < initial.step_index {
        return Err(DfluxError::InvalidParameter(format!(
            "t_end = {t_end} lies before the state's time {}",
            initial.time
        )));
    }
    let snapped_time = total_steps as f64 * dt;
    let kbar = [
        cell_average_coefficient(&initial.mesh, coeff, Parity::Base),
        cell_average_coefficient(&initial.mesh, coeff, Parity::Half),
    ];
    let mut state = initial;
    let mut steps_taken = 0;
    while state.step_index < total_steps {
        let next_kbar = match state.parity.flip() {
            Parity::Base => kbar[0].clone(),
            Parity::Half => kbar[1].clone(),
        };
        let (next, detail) = step_with(&state, model, next_kbar, cfg, Form::Direct)?;
        let t = Transition {
            prev: &state,
            next: &next,
            detail: &detail,
            model,
            coeff,
            cfg,
        };
        for obs in observers.iter_mut() {
            obs.observe(&t);
        }
        state = next;
        steps_taken += 1;
    }
    Ok((
        state,
        MarchInfo {
            requested_time: t_end,
            snapped_time,
            snapped: (snapped_time - t_end).abs() > 1e-12 * t_end.max(1.0),
            total_steps,
            steps_taken,
            cfl,
        },
    ))
}

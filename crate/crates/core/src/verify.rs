//! Property suites behind `dflux verify <suite>`: fixed seeds and canned
//! scenarios, each reporting its worst margin (negative means violated).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    correction_bound_check, default_c_grid, entropy_residual_lf, nu_coefficient, onesided_check, CorrectionCheck, TOL,
};
use crate::error::{DfluxError, Result};
use crate::experiments::{example_1, example_2, ExperimentSpec};
use crate::flux::{builtin_burgers, builtin_multiplicative, Coefficient, FluxModel};
use crate::grid::{InitialData, Mesh, StaggeredState};
use crate::limiter::{slopes, LimiterConfig};
use crate::scheme::{
    admissible_lambda, lf_step, march, nt_step, predictor_corrector_step, CflLevel, Observer, Scheme, SchemeConfig,
    Transition,
};

pub const SUITES: &[&str] = &["maxprinciple", "onesided", "nu", "entropy", "correction", "identity"];

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScenarioResult {
    pub id: String,
    pub passed: bool,
    /// Slack of the checked inequality at its tightest point.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub scenarios: Vec<ScenarioResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(|s| s.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ScenarioResult> {
        self.scenarios.iter().filter(|s| !s.passed)
    }
}

fn scenario(id: impl Into<String>, worst_margin: f64) -> ScenarioResult {
    ScenarioResult {
        id: id.into(),
        passed: worst_margin >= 0.0,
        worst_margin,
    }
}

/// Piecewise-constant data in `[lo, hi]` with random plateaus, mixed with
/// short linear ramps: bounded variation, deterministic for a seed.
pub fn random_bv_values(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut level = rng.gen_range(lo..=hi);
    while out.len() < n {
        let len = rng.gen_range(1..=n.div_ceil(6).max(2));
        let target = rng.gen_range(lo..=hi);
        if rng.gen_bool(0.3) {
            for i in 0..len {
                out.push(level + (target - level) * (i + 1) as f64 / len as f64);
            }
        } else {
            out.extend(std::iter::repeat_n(target, len));
        }
        level = target;
    }
    out.truncate(n);
    out
}

fn random_states(count: usize, seed: u64, mesh: Mesh, coeff: &Coefficient) -> Result<Vec<StaggeredState>> {
    (0..count as u64)
        .map(|i| StaggeredState::from_values(mesh, random_bv_values(seed + i, mesh.n_cells, 0.0, 1.0), coeff))
        .collect()
}

/// `nt_step` against its predictor-corrector form and, with zero slopes,
/// against `lf_step`, on 50 random states.
pub fn identity_suite() -> Result<SuiteReport> {
    let (m, k) = builtin_multiplicative(3.0, 1.0)?;
    let mesh = Mesh::new(-1.0, 1.0, 100)?;
    let lam = 1.0 / 30.0;
    let nt = SchemeConfig::nessyahu_tadmor(lam, LimiterConfig::minmod());
    let zero = SchemeConfig::nessyahu_tadmor(lam, LimiterConfig::zero());
    let lf = SchemeConfig::lax_friedrichs(lam);
    let (mut pc_gap, mut lf_gap) = (0.0f64, 0.0f64);
    for s in random_states(50, 1000, mesh, &k)? {
        let (a, _) = nt_step(&s, &m, &k, &nt)?;
        let b = predictor_corrector_step(&s, &m, &k, &nt)?;
        pc_gap = pc_gap.max(max_abs_diff(&a.values, &b.values));
        let (z, _) = nt_step(&s, &m, &k, &zero)?;
        let l = lf_step(&s, &m, &k, &lf)?;
        lf_gap = lf_gap.max(max_abs_diff(&z.values, &l.values));
    }
    Ok(SuiteReport {
        suite: "identity".to_string(),
        scenarios: vec![
            scenario("predictor-corrector", TOL - pc_gap),
            scenario("zero-limiter-is-lf", 1e-15 - lf_gap),
        ],
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

struct Extrema {
    lo: f64,
    hi: f64,
}

impl Observer for Extrema {
    fn observe(&mut self, t: &Transition<'_>) {
        let (lo, hi) = t.next.min_max();
        self.lo = self.lo.min(lo);
        self.hi = self.hi.max(hi);
    }
}

/// Global extrema over every state of a full run of `spec` to its last output time.
pub fn run_extrema(spec: &ExperimentSpec, scheme: Scheme) -> Result<(f64, f64)> {
    let (m, k) = spec.build_model()?;
    let s = StaggeredState::initial(spec.mesh(spec.dx)?, &spec.initial, &k)?;
    let (lo, hi) = s.min_max();
    let mut ext = Extrema { lo, hi };
    let t_end = spec.times.iter().copied().fold(0.0, f64::max);
    march(s, &m, &k, &spec.scheme_config(scheme), t_end, &mut [&mut ext])?;
    Ok((ext.lo, ext.hi))
}

pub fn maxprinciple_suite() -> Result<SuiteReport> {
    let mut scenarios = Vec::new();
    for spec in [example_1(), example_2()] {
        let (m, _) = spec.build_model()?;
        for scheme in [Scheme::LaxFriedrichs, Scheme::NessyahuTadmor] {
            let (lo, hi) = run_extrema(&spec, scheme)?;
            let margin = (lo - (m.u_lo - TOL)).min(m.u_hi + TOL - hi);
            scenarios.push(scenario(format!("{}/{}", spec.name, scheme.label()), margin));
        }
    }
    Ok(SuiteReport {
        suite: "maxprinciple".to_string(),
        scenarios,
    })
}

/// Burgers with `k = 1` on 64 cells from 10 random states, 100 NT steps.
fn burgers_runs(level: CflLevel, mut per_step: impl FnMut(&Transition<'_>, &FluxModel)) -> Result<()> {
    let (m, k) = builtin_burgers(1.0)?;
    let mesh = Mesh::new(0.0, 1.0, 64)?;
    let lam = admissible_lambda(&m, level);
    let cfg = SchemeConfig::nessyahu_tadmor(lam, LimiterConfig::minmod()).with_cfl_level(level);
    struct Probe<'a, F: FnMut(&Transition<'_>, &FluxModel)> {
        f: &'a mut F,
        model: &'a FluxModel,
    }
    impl<F: FnMut(&Transition<'_>, &FluxModel)> Observer for Probe<'_, F> {
        fn observe(&mut self, t: &Transition<'_>) {
            (self.f)(t, self.model)
        }
    }
    for s in random_states(10, 2000, mesh, &k)? {
        let mut probe = Probe {
            f: &mut per_step,
            model: &m,
        };
        march(s, &m, &k, &cfg, 100.0 * lam * mesh.dx, &mut [&mut probe])?;
    }
    Ok(())
}

pub fn onesided_suite() -> Result<SuiteReport> {
    let k = Coefficient::constant(1.0);
    let mut worst = f64::INFINITY;
    let mut steps = 0;
    burgers_runs(CflLevel::OneSided, |t, m| {
        let c = onesided_check(t.prev, t.next, m, &k, t.cfg.lambda);
        worst = worst.min(c.margin + TOL);
        steps += 1;
    })?;
    if steps != 1000 {
        return Err(DfluxError::InvalidParameter(format!("expected 1000 steps, ran {steps}")));
    }
    Ok(SuiteReport {
        suite: "onesided".to_string(),
        scenarios: vec![scenario("burgers-k1-random-bv", worst)],
    })
}

pub fn nu_suite() -> Result<SuiteReport> {
    let mut nu_min = f64::INFINITY;
    burgers_runs(CflLevel::CubicEstimate, |t, m| {
        let sigma = slopes(&t.prev.values, t.prev.mesh.dx, &t.cfg.limiter);
        let nu = nu_coefficient(t.prev, &sigma, m, t.cfg.lambda);
        nu_min = nu.iter().copied().fold(nu_min, f64::min);
    })?;
    Ok(SuiteReport {
        suite: "nu".to_string(),
        scenarios: vec![scenario("burgers-k1-cubic-cfl", nu_min + TOL)],
    })
}

/// Largest LF entropy residual over every step of a full LF run of `spec`.
pub fn lf_entropy_worst(spec: &ExperimentSpec) -> Result<f64> {
    let (m, k) = spec.build_model()?;
    let s = StaggeredState::initial(spec.mesh(spec.dx)?, &spec.initial, &k)?;
    let c_grid = default_c_grid(&m);
    struct Residual<'a> {
        model: &'a FluxModel,
        c_grid: &'a [f64],
        worst: f64,
        error: Option<DfluxError>,
    }
    impl Observer for Residual<'_> {
        fn observe(&mut self, t: &Transition<'_>) {
            match entropy_residual_lf(t.prev, t.next, self.model, t.cfg.lambda, self.c_grid) {
                Ok(r) => self.worst = self.worst.max(r),
                Err(e) => self.error = Some(e),
            }
        }
    }
    let mut obs = Residual {
        model: &m,
        c_grid: &c_grid,
        worst: f64::NEG_INFINITY,
        error: None,
    };
    let t_end = spec.times.iter().copied().fold(0.0, f64::max);
    march(s, &m, &k, &spec.scheme_config(Scheme::LaxFriedrichs), t_end, &mut [&mut obs])?;
    match obs.error {
        Some(e) => Err(e),
        None => Ok(obs.worst),
    }
}

pub fn entropy_suite() -> Result<SuiteReport> {
    let mut scenarios = Vec::new();
    for spec in [example_1(), example_2()] {
        let worst = lf_entropy_worst(&spec)?;
        scenarios.push(scenario(format!("{}/LF", spec.name), TOL - worst));
    }
    Ok(SuiteReport {
        suite: "entropy".to_string(),
        scenarios,
    })
}

/// Oscillatory data on `[-1, 1]` whose cell differences exceed the slope cap.
pub fn steep_initial_data() -> InitialData {
    InitialData::Function(Arc::new(|x: f64| {
        let base = 0.5 + 0.45 * (200.0 * x).sin();
        if x < 0.0 {
            base * 0.5
        } else {
            base
        }
    }))
}

/// Worst `bound - max|a_j|` over 20 NT steps with the mesh-dependent limiter.
pub fn correction_margin(dx: f64) -> Result<f64> {
    let (m, k) = builtin_multiplicative(3.0, 1.0)?;
    let mesh = Mesh::with_spacing(-1.0, 1.0, dx)?;
    let cfg = SchemeConfig::nessyahu_tadmor(1.0 / 30.0, LimiterConfig::modified(1.0, 0.75)?);
    let mut s = StaggeredState::initial(mesh, &steep_initial_data(), &k)?;
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let (next, a) = nt_step(&s, &m, &k, &cfg)?;
        match correction_bound_check(&a, &cfg, &m, dx) {
            CorrectionCheck::Checked { max_a, bound, .. } => worst = worst.min(bound + TOL - max_a),
            CorrectionCheck::NotApplicable => unreachable!("modified limiter is active"),
        }
        s = next;
    }
    Ok(worst)
}

pub fn correction_suite() -> Result<SuiteReport> {
    let scenarios = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&dx| Ok(scenario(format!("dx={dx:e}"), correction_margin(dx)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite: "correction".to_string(),
        scenarios,
    })
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "identity" => identity_suite(),
        "maxprinciple" => maxprinciple_suite(),
        "onesided" => onesided_suite(),
        "nu" => nu_suite(),
        "entropy" => entropy_suite(),
        "correction" => correction_suite(),
        other => Err(DfluxError::InvalidParameter(format!(
            "unknown suite '{other}'; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_values_are_deterministic_and_bounded() {
        let a = random_bv_values(5, 200, 0.0, 1.0);
        assert_eq!(a, random_bv_values(5, 200, 0.0, 1.0));
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_ne!(a, random_bv_values(6, 200, 0.0, 1.0));
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["identity", "onesided", "nu", "correction"] {
            let r = run_suite(name).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.scenarios);
        }
        assert!(run_suite("bogus").is_err());
    }
}

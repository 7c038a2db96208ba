//! Flux functions `f(k, u)` with a spatially varying coefficient `k(x)`.
//!
//! A [`FluxModel`] bundles a flux, its partial derivatives, the invariant box
//! `[k_lo, k_hi] x [u_lo, u_hi]` and the constants the schemes and the
//! diagnostics need (convexity bounds and suprema of the derivatives).

mod builtin;
mod coefficient;
mod hypotheses;

use std::fmt;
use std::sync::Arc;

pub use builtin::{builtin_burgers, builtin_multiplicative, builtin_two_flux_rational, ModelSelector};
pub use coefficient::{Coefficient, CoefficientPiece, CoefficientProfile};
pub use hypotheses::{verify_hypotheses, CheckStatus, Hypothesis, HypothesisCheck, HypothesisReport};

use crate::error::{DfluxError, Result};

/// Grid points per axis used when bounds are estimated by sampling.
pub const DEFAULT_BOUND_SAMPLES: usize = 1024;

/// A flux `f(k, u)` and its first and second partial derivatives.
pub trait Flux: Send + Sync + fmt::Debug {
    fn eval(&self, k: f64, u: f64) -> f64;
    fn d_u(&self, k: f64, u: f64) -> f64;
    fn d_k(&self, k: f64, u: f64) -> f64;
    fn d_uu(&self, k: f64, u: f64) -> f64;
    fn d_uk(&self, k: f64, u: f64) -> f64;

    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::Analytic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Convexity {
    StrictlyConvex,
    StrictlyConcave,
}

impl Convexity {
    /// `+1` for convex, `-1` for concave.
    pub fn sign(self) -> f64 {
        match self {
            Convexity::StrictlyConvex => 1.0,
            Convexity::StrictlyConcave => -1.0,
        }
    }
}

/// Where the derivatives of a model come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DerivativeSource {
    Analytic,
    /// At least one derivative is a centered finite difference of `eval`.
    FiniteDifference,
}

/// Convexity bounds and suprema over the model box.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FluxBounds {
    pub gamma1: f64,
    pub gamma2: f64,
    pub sup_fu: f64,
    pub sup_fk: f64,
    pub sup_fuk: f64,
}

#[derive(Clone)]
pub struct FluxModel {
    name: String,
    flux: Arc<dyn Flux>,
    pub u_lo: f64,
    pub u_hi: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    pub convexity: Convexity,
    pub bounds: FluxBounds,
    closed_form_bounds: bool,
    derivatives: DerivativeSource,
    crossing_declared: bool,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxModel")
            .field("name", &self.name)
            .field("u", &(self.u_lo, self.u_hi))
            .field("k", &(self.k_lo, self.k_hi))
            .field("convexity", &self.convexity)
            .field("bounds", &self.bounds)
            .field("derivatives", &self.derivatives)
            .finish()
    }
}

impl FluxModel {
    /// A model whose bounds are known in closed form.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn with_closed_form(
        name: &str,
        flux: Arc<dyn Flux>,
        u_range: (f64, f64),
        k_range: (f64, f64),
        convexity: Convexity,
        bounds: FluxBounds,
        crossing_declared: bool,
    ) -> Self {
        FluxModel {
            name: name.to_string(),
            flux,
            u_lo: u_range.0,
            u_hi: u_range.1,
            k_lo: k_range.0,
            k_hi: k_range.1,
            convexity,
            bounds,
            closed_form_bounds: true,
            derivatives: DerivativeSource::Analytic,
            crossing_declared,
        }
    }

    /// A user-supplied model. Convexity and bounds are estimated on a
    /// `DEFAULT_BOUND_SAMPLES`-point grid per axis.
    pub fn custom(
        name: &str,
        flux: Arc<dyn Flux>,
        u_range: (f64, f64),
        k_range: (f64, f64),
    ) -> Result<Self> {
        let (u_lo, u_hi) = u_range;
        let (k_lo, k_hi) = k_range;
        if !(u_lo.is_finite() && u_hi.is_finite() && u_lo < u_hi) {
            return Err(DfluxError::InvalidParameter(format!(
                "u range [{u_lo}, {u_hi}] must be finite and non-degenerate"
            )));
        }
        if !(k_lo.is_finite() && k_hi.is_finite() && k_lo <= k_hi) {
            return Err(DfluxError::InvalidParameter(format!(
                "k range [{k_lo}, {k_hi}] must be finite and ordered"
            )));
        }
        let bounds = sample_bounds(flux.as_ref(), u_range, k_range, DEFAULT_BOUND_SAMPLES);
        let convexity = sample_convexity(flux.as_ref(), u_range, k_range, DEFAULT_BOUND_SAMPLES)?;
        let derivatives = flux.derivative_source();
        Ok(FluxModel {
            name: name.to_string(),
            flux,
            u_lo,
            u_hi,
            k_lo,
            k_hi,
            convexity,
            bounds,
            closed_form_bounds: false,
            derivatives,
            crossing_declared: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flux(&self) -> &dyn Flux {
        self.flux.as_ref()
    }

    #[inline]
    pub fn eval(&self, k: f64, u: f64) -> f64 {
        self.flux.eval(k, u)
    }

    #[inline]
    pub fn d_u(&self, k: f64, u: f64) -> f64 {
        self.flux.d_u(k, u)
    }

    #[inline]
    pub fn d_k(&self, k: f64, u: f64) -> f64 {
        self.flux.d_k(k, u)
    }

    #[inline]
    pub fn d_uu(&self, k: f64, u: f64) -> f64 {
        self.flux.d_uu(k, u)
    }

    #[inline]
    pub fn d_uk(&self, k: f64, u: f64) -> f64 {
        self.flux.d_uk(k, u)
    }

    /// `C_{u0} = max(|u_lo|, |u_hi|)`.
    pub fn c_u0(&self) -> f64 {
        self.u_lo.abs().max(self.u_hi.abs())
    }

    pub fn has_closed_form_bounds(&self) -> bool {
        self.closed_form_bounds
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        self.derivatives
    }

    /// Whether the model's author asserts the crossing condition.
    pub fn crossing_declared(&self) -> bool {
        self.crossing_declared
    }
}

/// Convexity bounds and derivative suprema. Builtin models return their
/// closed-form values; other models are sampled on a `samples x samples` grid.
pub fn sup_bounds(model: &FluxModel, samples: usize) -> Result<FluxBounds> {
    if samples < 2 {
        return Err(DfluxError::InvalidParameter(format!(
            "sup_bounds needs at least 2 samples, got {samples}"
        )));
    }
    if model.closed_form_bounds {
        return Ok(model.bounds);
    }
    Ok(sample_bounds(
        model.flux(),
        (model.u_lo, model.u_hi),
        (model.k_lo, model.k_hi),
        samples,
    ))
}

pub(crate) fn grid(lo: f64, hi: f64, samples: usize) -> impl Iterator<Item = f64> {
    let n = samples.max(2);
    (0..n).map(move |i| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

fn sample_bounds(flux: &dyn Flux, u_range: (f64, f64), k_range: (f64, f64), samples: usize) -> FluxBounds {
    let k_samples = if k_range.0 == k_range.1 { 1 } else { samples };
    let mut b = FluxBounds {
        gamma1: f64::INFINITY,
        gamma2: 0.0,
        sup_fu: 0.0,
        sup_fk: 0.0,
        sup_fuk: 0.0,
    };
    for k in grid(k_range.0, k_range.1, k_samples).take(k_samples) {
        for u in grid(u_range.0, u_range.1, samples) {
            let fuu = flux.d_uu(k, u).abs();
            b.gamma1 = b.gamma1.min(fuu);
            b.gamma2 = b.gamma2.max(fuu);
            b.sup_fu = b.sup_fu.max(flux.d_u(k, u).abs());
            b.sup_fk = b.sup_fk.max(flux.d_k(k, u).abs());
            b.sup_fuk = b.sup_fuk.max(flux.d_uk(k, u).abs());
        }
    }
    b
}

fn sample_convexity(
    flux: &dyn Flux,
    u_range: (f64, f64),
    k_range: (f64, f64),
    samples: usize,
) -> Result<Convexity> {
    let (mut pos, mut neg) = (false, false);
    let k_samples = if k_range.0 == k_range.1 { 1 } else { samples };
    for k in grid(k_range.0, k_range.1, k_samples).take(k_samples) {
        for u in grid(u_range.0, u_range.1, samples) {
            let s = flux.d_uu(k, u);
            if s > 0.0 {
                pos = true;
            } else if s < 0.0 {
                neg = true;
            } else {
                return Err(DfluxError::InvalidParameter(format!(
                    "f_uu vanishes at (k, u) = ({k}, {u}); flux is not strictly convex or concave"
                )));
            }
        }
    }
    match (pos, neg) {
        (true, false) => Ok(Convexity::StrictlyConvex),
        (false, true) => Ok(Convexity::StrictlyConcave),
        _ => Err(DfluxError::InvalidParameter(
            "f_uu changes sign on the model box".to_string(),
        )),
    }
}

type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A flux built from closures. Derivatives that are not supplied fall back
/// to centered finite differences of `eval`.
#[derive(Clone)]
pub struct FnFlux {
    f: Scalar2,
    fu: Option<Scalar2>,
    fk: Option<Scalar2>,
    fuu: Option<Scalar2>,
    fuk: Option<Scalar2>,
}

impl fmt::Debug for FnFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFlux")
            .field("finite_difference", &self.uses_finite_differences())
            .finish()
    }
}

const FD_STEP_1: f64 = 1e-5;
const FD_STEP_2: f64 = 1e-4;

impl FnFlux {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        FnFlux {
            f: Arc::new(f),
            fu: None,
            fk: None,
            fuu: None,
            fuk: None,
        }
    }

    pub fn with_d_u(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.fu = Some(Arc::new(g));
        self
    }

    pub fn with_d_k(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.fk = Some(Arc::new(g));
        self
    }

    pub fn with_d_uu(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.fuu = Some(Arc::new(g));
        self
    }

    pub fn with_d_uk(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.fuk = Some(Arc::new(g));
        self
    }

    pub fn uses_finite_differences(&self) -> bool {
        self.fu.is_none() || self.fk.is_none() || self.fuu.is_none() || self.fuk.is_none()
    }
}

impl Flux for FnFlux {
    fn derivative_source(&self) -> DerivativeSource {
        if self.uses_finite_differences() {
            DerivativeSource::FiniteDifference
        } else {
            DerivativeSource::Analytic
        }
    }

    fn eval(&self, k: f64, u: f64) -> f64 {
        (self.f)(k, u)
    }

    fn d_u(&self, k: f64, u: f64) -> f64 {
        match &self.fu {
            Some(g) => g(k, u),
            None => {
                let h = FD_STEP_1 * (1.0 + u.abs());
                ((self.f)(k, u + h) - (self.f)(k, u - h)) / (2.0 * h)
            }
        }
    }

    fn d_k(&self, k: f64, u: f64) -> f64 {
        match &self.fk {
            Some(g) => g(k, u),
            None => {
                let h = FD_STEP_1 * (1.0 + k.abs());
                ((self.f)(k + h, u) - (self.f)(k - h, u)) / (2.0 * h)
            }
        }
    }

    fn d_uu(&self, k: f64, u: f64) -> f64 {
        match &self.fuu {
            Some(g) => g(k, u),
            None => {
                let h = FD_STEP_2 * (1.0 + u.abs());
                ((self.f)(k, u + h) - 2.0 * (self.f)(k, u) + (self.f)(k, u - h)) / (h * h)
            }
        }
    }

    fn d_uk(&self, k: f64, u: f64) -> f64 {
        match &self.fuk {
            Some(g) => g(k, u),
            None => {
                let hu = FD_STEP_2 * (1.0 + u.abs());
                let hk = FD_STEP_2 * (1.0 + k.abs());
                let f = &self.f;
                (f(k + hk, u + hu) - f(k + hk, u - hu) - f(k - hk, u + hu) + f(k - hk, u - hu))
                    / (4.0 * hu * hk)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers_fd_only() -> FnFlux {
        FnFlux::new(|k, u| 0.5 * k * u * u)
    }

    #[test]
    fn fn_flux_finite_differences_match_burgers() {
        let fl = burgers_fd_only();
        assert!(fl.uses_finite_differences());
        for &(k, u) in &[(1.0, 0.3), (2.0, 0.9), (0.5, 0.0)] {
            assert!((fl.d_u(k, u) - k * u).abs() < 1e-8);
            assert!((fl.d_k(k, u) - 0.5 * u * u).abs() < 1e-8);
            assert!((fl.d_uu(k, u) - k).abs() < 1e-5);
            assert!((fl.d_uk(k, u) - u).abs() < 1e-6);
        }
    }

    #[test]
    fn custom_model_is_flagged_and_sampled() {
        let m = FluxModel::custom("burgers-fd", Arc::new(burgers_fd_only()), (0.0, 1.0), (1.0, 1.0)).unwrap();
        assert_eq!(m.derivative_source(), DerivativeSource::FiniteDifference);
        assert_eq!(m.convexity, Convexity::StrictlyConvex);
        assert!(!m.has_closed_form_bounds());
        let b = sup_bounds(&m, 64).unwrap();
        assert!((b.sup_fu - 1.0).abs() < 1e-8);
        assert!((b.gamma1 - 1.0).abs() < 1e-5);
        assert!((b.gamma2 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn custom_model_with_analytic_derivatives() {
        let fl = FnFlux::new(|k, u| k * u * (1.0 - u))
            .with_d_u(|k, u| k * (1.0 - 2.0 * u))
            .with_d_k(|_, u| u * (1.0 - u))
            .with_d_uu(|k, _| -2.0 * k)
            .with_d_uk(|_, u| 1.0 - 2.0 * u);
        let m = FluxModel::custom("mult", Arc::new(fl), (0.0, 1.0), (1.0, 3.0)).unwrap();
        assert_eq!(m.derivative_source(), DerivativeSource::Analytic);
        assert_eq!(m.convexity, Convexity::StrictlyConcave);
        assert!((m.bounds.gamma1 - 2.0).abs() < 1e-12);
        assert!((m.bounds.gamma2 - 6.0).abs() < 1e-12);
        assert!((m.bounds.sup_fu - 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_flux_rejected_as_not_strictly_convex() {
        let fl = FnFlux::new(|_, u| u)
            .with_d_u(|_, _| 1.0)
            .with_d_k(|_, _| 0.0)
            .with_d_uu(|_, _| 0.0)
            .with_d_uk(|_, _| 0.0);
        assert!(FluxModel::custom("linear", Arc::new(fl), (0.0, 1.0), (1.0, 1.0)).is_err());
    }

    #[test]
    fn sup_bounds_rejects_single_sample() {
        let (m, _) = builtin_multiplicative(3.0, 1.0).unwrap();
        assert!(sup_bounds(&m, 1).is_err());
    }
}

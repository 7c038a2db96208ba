use std::sync::Arc;

use super::{Coefficient, Convexity, Flux, FluxBounds, FluxModel};
use crate::error::{DfluxError, Result};

/// `f(k, u) = k u (1 - u)`.
#[derive(Debug, Clone, Copy)]
pub struct Multiplicative;

impl Flux for Multiplicative {
    fn eval(&self, k: f64, u: f64) -> f64 {
        k * u * (1.0 - u)
    }
    fn d_u(&self, k: f64, u: f64) -> f64 {
        k * (1.0 - 2.0 * u)
    }
    fn d_k(&self, _k: f64, u: f64) -> f64 {
        u * (1.0 - u)
    }
    fn d_uu(&self, k: f64, _u: f64) -> f64 {
        -2.0 * k
    }
    fn d_uk(&self, _k: f64, u: f64) -> f64 {
        1.0 - 2.0 * u
    }
}

/// `f(k, u) = k f_r(u) + (1 - k) f_l(u)` with
/// `f_l = 2u(1-u)/(1+u)` and `f_r = 2u(1-u)/(2-u)`; `k` is a Heaviside switch.
#[derive(Debug, Clone, Copy)]
pub struct TwoFluxRational;

impl TwoFluxRational {
    fn left(u: f64) -> f64 {
        2.0 * u * (1.0 - u) / (1.0 + u)
    }
    fn right(u: f64) -> f64 {
        2.0 * u * (1.0 - u) / (2.0 - u)
    }
    fn left_u(u: f64) -> f64 {
        2.0 * (1.0 - 2.0 * u - u * u) / ((1.0 + u) * (1.0 + u))
    }
    fn right_u(u: f64) -> f64 {
        2.0 * (2.0 - 4.0 * u + u * u) / ((2.0 - u) * (2.0 - u))
    }
    fn left_uu(u: f64) -> f64 {
        -8.0 / ((1.0 + u) * (1.0 + u) * (1.0 + u))
    }
    fn right_uu(u: f64) -> f64 {
        -8.0 / ((2.0 - u) * (2.0 - u) * (2.0 - u))
    }
}

impl Flux for TwoFluxRational {
    fn eval(&self, k: f64, u: f64) -> f64 {
        k * Self::right(u) + (1.0 - k) * Self::left(u)
    }
    fn d_u(&self, k: f64, u: f64) -> f64 {
        k * Self::right_u(u) + (1.0 - k) * Self::left_u(u)
    }
    fn d_k(&self, _k: f64, u: f64) -> f64 {
        Self::right(u) - Self::left(u)
    }
    fn d_uu(&self, k: f64, u: f64) -> f64 {
        k * Self::right_uu(u) + (1.0 - k) * Self::left_uu(u)
    }
    fn d_uk(&self, _k: f64, u: f64) -> f64 {
        Self::right_u(u) - Self::left_u(u)
    }
}

/// `f(k, u) = k u^2 / 2`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledBurgers;

impl Flux for ScaledBurgers {
    fn eval(&self, k: f64, u: f64) -> f64 {
        0.5 * k * u * u
    }
    fn d_u(&self, k: f64, u: f64) -> f64 {
        k * u
    }
    fn d_k(&self, _k: f64, u: f64) -> f64 {
        0.5 * u * u
    }
    fn d_uu(&self, k: f64, _u: f64) -> f64 {
        k
    }
    fn d_uk(&self, _k: f64, u: f64) -> f64 {
        u
    }
}

/// Multiplicative flux `k u (1-u)` on `u in [0, 1]` with the two-piece
/// coefficient `k_left` for `x < 0`, `k_right` for `x >= 0`.
pub fn builtin_multiplicative(k_left: f64, k_right: f64) -> Result<(FluxModel, Coefficient)> {
    if !(k_left > 0.0 && k_right > 0.0 && k_left.is_finite() && k_right.is_finite()) {
        return Err(DfluxError::InvalidParameter(format!(
            "multiplicative model needs positive coefficients, got ({k_left}, {k_right})"
        )));
    }
    let k_min = k_left.min(k_right);
    let k_max = k_left.max(k_right);
    // |f_uu| = 2k; |f_u| = k|1-2u| peaks at u in {0, 1}; |f_k| = u(1-u) <= 1/4; |f_uk| = |1-2u| <= 1.
    let bounds = FluxBounds {
        gamma1: 2.0 * k_min,
        gamma2: 2.0 * k_max,
        sup_fu: k_max,
        sup_fk: 0.25,
        sup_fuk: 1.0,
    };
    let model = FluxModel::with_closed_form(
        "multiplicative",
        Arc::new(Multiplicative),
        (0.0, 1.0),
        (k_min, k_max),
        Convexity::StrictlyConcave,
        bounds,
        true,
    );
    let coeff = Coefficient::piecewise_constant(&[0.0], &[k_left, k_right])?;
    Ok((model, coeff))
}

/// Two rational fluxes joined at `x = 0` through a Heaviside coefficient.
pub fn builtin_two_flux_rational() -> Result<(FluxModel, Coefficient)> {
    // f_uu is affine in k, so |f_uu| is extremal at k in {0, 1}:
    // |f_l''| = 8/(1+u)^3 and |f_r''| = 8/(2-u)^3 both range over [1, 8].
    // f_u is affine in k too: f_l'(0) = 2 is the largest magnitude.
    // f_uk = f_r' - f_l' rises from -1 to 4/9 and falls back to -1.
    let bounds = FluxBounds {
        gamma1: 1.0,
        gamma2: 8.0,
        sup_fu: 2.0,
        sup_fk: sup_two_flux_difference(),
        sup_fuk: 1.0,
    };
    let model = FluxModel::with_closed_form(
        "two-flux-rational",
        Arc::new(TwoFluxRational),
        (0.0, 1.0),
        (0.0, 1.0),
        Convexity::StrictlyConcave,
        bounds,
        true,
    );
    let coeff = Coefficient::piecewise_constant(&[0.0], &[0.0, 1.0])?;
    Ok((model, coeff))
}

/// `max |f_r(u) - f_l(u)|` on `[0, 1]`. The difference is odd about `u = 1/2`
/// and has a single extremum on `(0, 1/2)`, found by golden-section search.
fn sup_two_flux_difference() -> f64 {
    let g = |u: f64| (TwoFluxRational::right(u) - TwoFluxRational::left(u)).abs();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 0.5);
    for _ in 0..200 {
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    g(0.5 * (a + b))
}

/// Burgers flux scaled by a constant coefficient `k`, on `u in [0, 1]`.
pub fn builtin_burgers(k: f64) -> Result<(FluxModel, Coefficient)> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(DfluxError::InvalidParameter(format!(
            "burgers coefficient must be positive, got {k}"
        )));
    }
    let bounds = FluxBounds {
        gamma1: k,
        gamma2: k,
        sup_fu: k,
        sup_fk: 0.5,
        sup_fuk: 1.0,
    };
    let model = FluxModel::with_closed_form(
        "burgers-const-k",
        Arc::new(ScaledBurgers),
        (0.0, 1.0),
        (k, k),
        Convexity::StrictlyConvex,
        bounds,
        true,
    );
    Ok((model, Coefficient::constant(k)))
}

/// Named model selection used by configs and the C API.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum ModelSelector {
    Multiplicative { k_left: f64, k_right: f64 },
    TwoFluxRational,
    BurgersConstK { k: f64 },
}

impl ModelSelector {
    /// Resolves `"multiplicative"`, `"two-flux-rational"` or
    /// `"burgers-const-k"`; `params` are `(k_left, k_right)` or `(k,)`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        match name {
            "multiplicative" => {
                let k_left = params.first().copied().unwrap_or(3.0);
                let k_right = params.get(1).copied().unwrap_or(1.0);
                Ok(ModelSelector::Multiplicative { k_left, k_right })
            }
            "two-flux-rational" => Ok(ModelSelector::TwoFluxRational),
            "burgers-const-k" => Ok(ModelSelector::BurgersConstK {
                k: params.first().copied().unwrap_or(1.0),
            }),
            other => Err(DfluxError::Config(format!("unknown model name '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSelector::Multiplicative { .. } => "multiplicative",
            ModelSelector::TwoFluxRational => "two-flux-rational",
            ModelSelector::BurgersConstK { .. } => "burgers-const-k",
        }
    }

    pub fn build(&self) -> Result<(FluxModel, Coefficient)> {
        match *self {
            ModelSelector::Multiplicative { k_left, k_right } => builtin_multiplicative(k_left, k_right),
            ModelSelector::TwoFluxRational => builtin_two_flux_rational(),
            ModelSelector::BurgersConstK { k } => builtin_burgers(k),
        }
    }
}

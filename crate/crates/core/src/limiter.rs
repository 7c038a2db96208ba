//! Minmod slope reconstruction and its mesh-dependent variant.

use crate::error::{DfluxError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LimiterKind {
    /// All slopes zero; the staggered scheme reduces to Lax-Friedrichs.
    Zero,
    Minmod,
    /// Minmod with a fourth argument `sign(u_{j+1} - u_j) * k_tilde * dx^alpha`.
    MinmodModified,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LimiterConfig {
    pub kind: LimiterKind,
    pub k_tilde: f64,
    pub alpha: f64,
}

pub const DEFAULT_ALPHA: f64 = 0.75;

impl LimiterConfig {
    pub fn zero() -> Self {
        LimiterConfig {
            kind: LimiterKind::Zero,
            k_tilde: 1.0,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn minmod() -> Self {
        LimiterConfig {
            kind: LimiterKind::Minmod,
            k_tilde: 1.0,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn modified(k_tilde: f64, alpha: f64) -> Result<Self> {
        let cfg = LimiterConfig {
            kind: LimiterKind::MinmodModified,
            k_tilde,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `K = 2 C_{u0} eps^-alpha`: with this constant the modified limiter
    /// coincides with plain minmod on every mesh with `dx >= eps`.
    pub fn default_k_tilde(c_u0: f64, smallest_dx: f64, alpha: f64) -> f64 {
        2.0 * c_u0 * smallest_dx.powf(-alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == LimiterKind::MinmodModified {
            if !(self.alpha > 2.0 / 3.0 && self.alpha < 1.0) {
                return Err(DfluxError::InvalidParameter(format!(
                    "limiter alpha must lie in (2/3, 1), got {}",
                    self.alpha
                )));
            }
            if !(self.k_tilde > 0.0 && self.k_tilde.is_finite()) {
                return Err(DfluxError::InvalidParameter(format!(
                    "limiter k_tilde must be positive, got {}",
                    self.k_tilde
                )));
            }
        }
        Ok(())
    }

    /// `k_tilde * dx^alpha`, the cap on modified slopes.
    pub fn cap(&self, dx: f64) -> f64 {
        self.k_tilde * dx.powf(self.alpha)
    }
}

/// `sign * min |a_i|` when every argument has the same strict sign, else 0.
pub fn minmod(args: &[f64]) -> f64 {
    let Some((&first, rest)) = args.split_first() else {
        return 0.0;
    };
    if first > 0.0 {
        let mut m = first;
        for &a in rest {
            if a <= 0.0 {
                return 0.0;
            }
            m = m.min(a);
        }
        m
    } else if first < 0.0 {
        let mut m = first;
        for &a in rest {
            if a >= 0.0 {
                return 0.0;
            }
            m = m.max(a);
        }
        m
    } else {
        0.0
    }
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Limited slopes (cell-width units). The first and last entries have only
/// one neighbour and are set to zero; callers pad with ghost cells.
pub fn slopes(values: &[f64], dx: f64, cfg: &LimiterConfig) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if cfg.kind == LimiterKind::Zero || n < 3 {
        return out;
    }
    let cap = cfg.cap(dx);
    for j in 1..n - 1 {
        let fwd = values[j + 1] - values[j];
        let bwd = values[j] - values[j - 1];
        let central = 0.5 * (values[j + 1] - values[j - 1]);
        out[j] = match cfg.kind {
            LimiterKind::Minmod => minmod(&[fwd, central, bwd]),
            LimiterKind::MinmodModified => minmod(&[fwd, central, bwd, signum0(fwd) * cap]),
            LimiterKind::Zero => 0.0,
        };
    }
    out
}

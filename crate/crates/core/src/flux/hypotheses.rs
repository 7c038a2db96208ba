//! Sampled checks of the structural assumptions on `f` and `k`.
//!
//! These are scans, not proofs: a pass means no violation was seen on the
//! sample grid.

use super::{grid, Coefficient, DerivativeSource, FluxModel};
use crate::error::{DfluxError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Hypothesis {
    /// `k` in BV with values in `[k_lo, k_hi]`.
    H1,
    /// `f(k, .)` strictly convex (or concave) with `gamma1 <= |f_uu| <= gamma2`.
    H2,
    /// `f` affine in `k`.
    H3,
    /// `f_u` is C1 in `k`. Implied by supplying `f_uk`; not checked.
    H4,
    /// `f(k, u_lo)` and `f(k, u_hi)` independent of `k`.
    H5,
    /// Finitely many discontinuities of `k`.
    H6,
    /// Crossing condition at every jump of `k`.
    H7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotChecked,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub status: CheckStatus,
    /// Magnitude of the worst violation seen (0 when none).
    pub worst_violation: f64,
    /// The sample that produced `worst_violation`, if any.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisReport {
    pub model: String,
    pub samples: usize,
    pub derivatives: DerivativeSource,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn status(&self, h: Hypothesis) -> CheckStatus {
        self.checks
            .iter()
            .find(|c| c.hypothesis == h)
            .map(|c| c.status)
            .unwrap_or(CheckStatus::NotChecked)
    }

    pub fn passed(&self, h: Hypothesis) -> bool {
        self.status(h) == CheckStatus::Pass
    }

    /// True when no checked hypothesis failed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

struct Worst {
    value: f64,
    witness: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, witness: None }
    }

    fn offer(&mut self, v: f64, w: impl FnOnce() -> String) {
        if v > self.value {
            self.value = v;
            self.witness = Some(w());
        }
    }

    fn into_check(self, h: Hypothesis) -> HypothesisCheck {
        HypothesisCheck {
            hypothesis: h,
            status: if self.witness.is_some() { CheckStatus::Fail } else { CheckStatus::Pass },
            worst_violation: self.value,
            witness: self.witness,
        }
    }
}

const H3_TOL: f64 = 1e-8;
const H5_TOL: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-12;

pub fn verify_hypotheses(model: &FluxModel, coeff: &Coefficient, samples: usize) -> Result<HypothesisReport> {
    if samples < 2 {
        return Err(DfluxError::InvalidParameter(format!(
            "hypothesis scan needs at least 2 samples, got {samples}"
        )));
    }
    let ks: Vec<f64> = grid(model.k_lo, model.k_hi, samples).collect();
    let us: Vec<f64> = grid(model.u_lo, model.u_hi, samples).collect();

    let mut h1 = Worst::new();
    for k in coeff.sample_values() {
        let excess = (model.k_lo - k).max(k - model.k_hi);
        if excess > RANGE_TOL {
            h1.offer(excess, || format!("k = {k} outside [{}, {}]", model.k_lo, model.k_hi));
        }
    }

    let mut h2 = Worst::new();
    let sign = model.convexity.sign();
    let g1 = model.bounds.gamma1;
    let g2 = model.bounds.gamma2;
    for &k in &ks {
        for &u in &us {
            let s = sign * model.d_uu(k, u);
            let lo_gap = g1 * (1.0 - 1e-9) - s;
            let hi_gap = s - g2 * (1.0 + 1e-9);
            let gap = lo_gap.max(hi_gap);
            if s <= 0.0 || gap > RANGE_TOL {
                h2.offer(gap.max(f64::MIN_POSITIVE), || format!("f_uu({k}, {u}) = {}", model.d_uu(k, u)));
            }
        }
    }

    let mut h3 = Worst::new();
    let h = 0.25 * (model.k_hi - model.k_lo).max(1.0);
    for &k in &ks {
        for &u in &us {
            let f0 = model.eval(k, u);
            let d2 = (model.eval(k + h, u) - 2.0 * f0 + model.eval(k - h, u)) / (h * h);
            let excess = d2.abs() - H3_TOL * (1.0 + f0.abs());
            if excess > 0.0 {
                h3.offer(d2.abs(), || format!("f_kk({k}, {u}) ~ {d2}"));
            }
        }
    }

    let mut h5 = Worst::new();
    for &edge in &[model.u_lo, model.u_hi] {
        for &k1 in &ks {
            let f1 = model.eval(k1, edge);
            for &k2 in &ks {
                let f2 = model.eval(k2, edge);
                let diff = (f1 - f2).abs();
                if diff > H5_TOL * (1.0 + f1.abs().max(f2.abs())) {
                    h5.offer(diff, || format!("f({k1}, {edge}) = {f1} but f({k2}, {edge}) = {f2}"));
                }
            }
        }
    }

    let mut h6 = Worst::new();
    let d = coeff.discontinuities();
    if d.iter().any(|x| !x.is_finite()) || d.windows(2).any(|w| w[0] >= w[1]) {
        h6.offer(1.0, || format!("discontinuity set {d:?} not finite and increasing"));
    }

    let mut h7 = Worst::new();
    for &x in d {
        let km = coeff.left_limit(x);
        let kp = coeff.right_limit(x);
        let scale = 1.0 + model.bounds.sup_fk * (kp - km).abs();
        let tol = 1e-13 * scale;
        // largest u1 with a negative flux jump, smallest u2 with a positive one
        let mut u1_max: Option<f64> = None;
        let mut u2_min: Option<f64> = None;
        for &u in &us {
            let jump = model.eval(kp, u) - model.eval(km, u);
            if jump < -tol {
                u1_max = Some(u1_max.map_or(u, |v: f64| v.max(u)));
            } else if jump > tol && u2_min.is_none() {
                u2_min = Some(u);
            }
        }
        if let (Some(u1), Some(u2)) = (u1_max, u2_min) {
            if u1 >= u2 {
                h7.offer(u1 - u2 + f64::MIN_POSITIVE, || {
                    format!("at x = {x}: (u1, u2) = ({u1}, {u2}) with u1 >= u2")
                });
            }
        }
    }

    Ok(HypothesisReport {
        model: model.name().to_string(),
        samples,
        derivatives: model.derivative_source(),
        checks: vec![
            h1.into_check(Hypothesis::H1),
            h2.into_check(Hypothesis::H2),
            h3.into_check(Hypothesis::H3),
            HypothesisCheck {
                hypothesis: Hypothesis::H4,
                status: CheckStatus::NotChecked,
                worst_violation: 0.0,
                witness: None,
            },
            h5.into_check(Hypothesis::H5),
            h6.into_check(Hypothesis::H6),
            h7.into_check(Hypothesis::H7),
        ],
    })
}

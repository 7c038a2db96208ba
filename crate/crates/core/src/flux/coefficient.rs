use std::fmt;
use std::sync::Arc;

use crate::error::{DfluxError, Result};

/// Samples used to estimate the variation and sup norm of smooth pieces.
const SMOOTH_SAMPLES: usize = 1024;

#[derive(Clone)]
pub enum CoefficientProfile {
    Constant(f64),
    Smooth(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl CoefficientProfile {
    fn at(&self, x: f64) -> f64 {
        match self {
            CoefficientProfile::Constant(c) => *c,
            CoefficientProfile::Smooth(g) => g(x),
        }
    }
}

impl fmt::Debug for CoefficientProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientProfile::Constant(c) => write!(f, "Constant({c})"),
            CoefficientProfile::Smooth(_) => write!(f, "Smooth(..)"),
        }
    }
}

/// One piece of `k(x)` on `[lo, hi)`.
#[derive(Debug, Clone)]
pub struct CoefficientPiece {
    pub lo: f64,
    pub hi: f64,
    pub profile: CoefficientProfile,
}

/// A piecewise smooth coefficient `k(x)`. The outermost pieces are constant
/// and extend to infinity.
#[derive(Debug, Clone)]
pub struct Coefficient {
    pieces: Vec<CoefficientPiece>,
    discontinuities: Vec<f64>,
    bv_norm: f64,
    sup_norm: f64,
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Coefficient {
            pieces: vec![CoefficientPiece {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                profile: CoefficientProfile::Constant(c),
            }],
            discontinuities: Vec::new(),
            bv_norm: 0.0,
            sup_norm: c.abs(),
        }
    }

    /// `values[i]` on `[breaks[i-1], breaks[i])`, with the first and last
    /// values extended to infinity.
    pub fn piecewise_constant(breaks: &[f64], values: &[f64]) -> Result<Self> {
        let profiles = values.iter().map(|&v| CoefficientProfile::Constant(v)).collect();
        Self::from_pieces(breaks, profiles)
    }

    pub fn from_pieces(breaks: &[f64], profiles: Vec<CoefficientProfile>) -> Result<Self> {
        if profiles.len() != breaks.len() + 1 {
            return Err(DfluxError::InvalidParameter(format!(
                "{} breaks need {} profiles, got {}",
                breaks.len(),
                breaks.len() + 1,
                profiles.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DfluxError::InvalidParameter(
                "coefficient breaks must be finite and strictly increasing".to_string(),
            ));
        }
        for (idx, p) in [0, profiles.len() - 1].into_iter().zip([&profiles[0], &profiles[profiles.len() - 1]]) {
            if !matches!(p, CoefficientProfile::Constant(_)) {
                return Err(DfluxError::InvalidParameter(format!(
                    "outermost coefficient piece {idx} must be constant"
                )));
            }
        }
        let mut pieces = Vec::with_capacity(profiles.len());
        for (i, profile) in profiles.into_iter().enumerate() {
            let lo = if i == 0 { f64::NEG_INFINITY } else { breaks[i - 1] };
            let hi = if i == breaks.len() { f64::INFINITY } else { breaks[i] };
            pieces.push(CoefficientPiece { lo, hi, profile });
        }

        let mut discontinuities = Vec::new();
        let mut bv = 0.0;
        for (i, &b) in breaks.iter().enumerate() {
            let left = pieces[i].profile.at(b);
            let right = pieces[i + 1].profile.at(b);
            if left != right {
                discontinuities.push(b);
                bv += (right - left).abs();
            }
        }
        let mut sup: f64 = 0.0;
        for p in &pieces {
            match &p.profile {
                CoefficientProfile::Constant(c) => sup = sup.max(c.abs()),
                CoefficientProfile::Smooth(g) => {
                    let mut prev = g(p.lo);
                    sup = sup.max(prev.abs());
                    for s in 1..=SMOOTH_SAMPLES {
                        let x = p.lo + (p.hi - p.lo) * s as f64 / SMOOTH_SAMPLES as f64;
                        let v = g(x);
                        bv += (v - prev).abs();
                        sup = sup.max(v.abs());
                        prev = v;
                    }
                }
            }
        }
        if !sup.is_finite() {
            return Err(DfluxError::InvalidParameter("coefficient is not bounded".to_string()));
        }
        Ok(Coefficient {
            pieces,
            discontinuities,
            bv_norm: bv,
            sup_norm: sup,
        })
    }

    pub fn pieces(&self) -> &[CoefficientPiece] {
        &self.pieces
    }

    /// The jump set `D`.
    pub fn discontinuities(&self) -> &[f64] {
        &self.discontinuities
    }

    /// Total variation of `k`.
    pub fn bv_norm(&self) -> f64 {
        self.bv_norm
    }

    /// `sup |k|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    fn piece_index(&self, x: f64) -> usize {
        self.pieces.partition_point(|p| p.hi <= x).min(self.pieces.len() - 1)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].profile.at(x)
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.hi < x).min(self.pieces.len() - 1);
        self.pieces[i].profile.at(x)
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        self.value(x)
    }

    /// All sampled values of `k`, used for range checks.
    pub(crate) fn sample_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.pieces {
            match &p.profile {
                CoefficientProfile::Constant(c) => out.push(*c),
                CoefficientProfile::Smooth(g) => {
                    for s in 0..=SMOOTH_SAMPLES {
                        out.push(g(p.lo + (p.hi - p.lo) * s as f64 / SMOOTH_SAMPLES as f64));
                    }
                }
            }
        }
        out
    }

    /// Mean of `k` over `[a, b]`. Constant pieces are integrated exactly;
    /// smooth pieces use a composite midpoint rule with `quad_points`
    /// subintervals on each sub-interval between breaks.
    pub fn average(&self, a: f64, b: f64, quad_points: usize) -> f64 {
        debug_assert!(b > a);
        let q = quad_points.max(1);
        let mut i = self.piece_index(a);
        if let CoefficientProfile::Constant(c) = self.pieces[i].profile {
            if self.pieces[i].hi >= b {
                return c;
            }
        }
        let mut total = 0.0;
        let mut lo = a;
        loop {
            let p = &self.pieces[i];
            let hi = p.hi.min(b);
            if hi > lo {
                total += match &p.profile {
                    CoefficientProfile::Constant(c) => c * (hi - lo),
                    CoefficientProfile::Smooth(g) => {
                        let h = (hi - lo) / q as f64;
                        (0..q).map(|s| g(lo + (s as f64 + 0.5) * h)).sum::<f64>() * h
                    }
                };
            }
            if p.hi >= b || i + 1 == self.pieces.len() {
                break;
            }
            lo = p.hi;
            i += 1;
        }
        total / (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_piece_step() {
        let k = Coefficient::piecewise_constant(&[0.0], &[3.0, 1.0]).unwrap();
        assert_eq!(k.value(-1e-9), 3.0);
        assert_eq!(k.value(0.0), 1.0);
        assert_eq!(k.left_limit(0.0), 3.0);
        assert_eq!(k.right_limit(0.0), 1.0);
        assert_eq!(k.bv_norm(), 2.0);
        assert_eq!(k.sup_norm(), 3.0);
        assert_eq!(k.average(-0.04, 0.0, 8), 3.0);
        assert_eq!(k.average(0.0, 0.04, 8), 1.0);
        assert!((k.average(-0.02, 0.02, 8) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn equal_neighbours_are_not_discontinuities() {
        let k = Coefficient::piecewise_constant(&[-1.0, 0.0, 1.0], &[1.0, 1.0, 2.0, 0.5]).unwrap();
        assert_eq!(k.discontinuities(), &[0.0, 1.0]);
        assert!((k.bv_norm() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_breaks() {
        assert!(Coefficient::piecewise_constant(&[1.0, 0.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(Coefficient::piecewise_constant(&[0.0], &[1.0]).is_err());
        assert!(Coefficient::piecewise_constant(&[f64::NAN], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn smooth_piece_bv_and_average() {
        let k = Coefficient::from_pieces(
            &[0.0, 1.0],
            vec![
                CoefficientProfile::Constant(1.0),
                CoefficientProfile::Smooth(Arc::new(|x| 1.0 + x)),
                CoefficientProfile::Constant(1.0),
            ],
        )
        .unwrap();
        // continuous at 0, jump of 1 at x = 1, smooth variation 1
        assert_eq!(k.discontinuities(), &[1.0]);
        assert!((k.bv_norm() - 2.0).abs() < 1e-12);
        assert!(k.bv_norm() >= 1.0);
        assert!((k.average(0.0, 1.0, 8) - 1.5).abs() < 1e-14);
        assert!((k.average(-1.0, 1.0, 8) - 1.25).abs() < 1e-14);
    }

    #[test]
    fn smooth_outer_piece_rejected() {
        let r = Coefficient::from_pieces(
            &[0.0],
            vec![CoefficientProfile::Smooth(Arc::new(|x| x)), CoefficientProfile::Constant(1.0)],
        );
        assert!(r.is_err());
    }
}

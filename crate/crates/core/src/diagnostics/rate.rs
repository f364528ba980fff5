use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Errors outside `[lo, hi]` are ignored: large ones are pre-asymptotic,
/// small ones sit at the rounding floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for RateWindow {
    fn default() -> Self {
        RateWindow { lo: 1e-14, hi: 1e-1 }
    }
}

impl RateWindow {
    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo && e <= self.hi
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "rate window needs 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    /// Geometric mean of `ηᵏ⁺¹/ηᵏ` over consecutive usable pairs.
    pub linear_rate: f64,
    /// Least-squares slope of `ln ηᵏ⁺¹` against `ln ηᵏ`.
    pub order_q: f64,
    /// Number of usable history points.
    pub tail_length: usize,
    /// `order_q > 1.2`
    pub superlinear: bool,
}

/// Minimum number of usable points: two consecutive pairs.
pub const MIN_USABLE_POINTS: usize = 3;

pub fn estimate_rate(errors: &[f64]) -> Result<RateEstimate> {
    estimate_rate_in(errors, RateWindow::default())
}

pub fn estimate_rate_in(errors: &[f64], window: RateWindow) -> Result<RateEstimate> {
    window.validate()?;
    let usable = errors.iter().filter(|e| window.contains(**e)).count();
    let pairs: Vec<(f64, f64)> = errors
        .windows(2)
        .filter(|w| window.contains(w[0]) && window.contains(w[1]))
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let insufficient = Error::InsufficientPoints {
        usable,
        required: MIN_USABLE_POINTS,
    };
    if usable < MIN_USABLE_POINTS || pairs.len() < 2 {
        return Err(insufficient);
    }
    let k = pairs.len() as f64;
    let linear_rate = (pairs.iter().map(|(a, b)| b - a).sum::<f64>() / k).exp();
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * (1.0 + mx * mx) * k {
        return Err(insufficient);
    }
    let order_q = sxy / sxx;
    Ok(RateEstimate {
        linear_rate,
        order_q,
        tail_length: usable,
        superlinear: order_q > 1.2,
    })
}

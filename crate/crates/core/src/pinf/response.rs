//! Score assigned to a post for the response it received.
//!
//! ```text
//!         ⎧ penalty               raw ≤ 1
//! f(raw) = ⎨ exp(−λ_h (m_h − x))   x > threshold
//!         ⎩ exp(−λ_l (m_l − x))   otherwise
//! ```
//!
//! with `x = min(raw / max_response, 1)`. The two exponentials are fitted so
//! that both pass through the same value at the threshold.

use serde::{Deserialize, Serialize};

use super::PInfError;

/// Values the response function is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseAnchors {
    /// Normalized response where the branches meet.
    pub threshold: f64,
    /// Score at the threshold, shared by both branches.
    pub at_threshold: f64,
    /// Score of the low branch at zero response.
    pub at_zero: f64,
    /// Score of the high branch at the maximum response.
    pub at_max: f64,
}

impl Default for ResponseAnchors {
    fn default() -> Self {
        Self {
            threshold: 0.25,
            at_threshold: 0.2,
            at_zero: 0.001,
            at_max: 1.0,
        }
    }
}

impl ResponseAnchors {
    /// Closed-form exponent and offset of both branches.
    ///
    /// Low branch: `λ_l·m_l = −ln(at_zero)` and `λ_l·(m_l − t) = −ln(at_threshold)`.
    /// High branch: `λ_h·(m_h − 1) = −ln(at_max)` and `λ_h·(m_h − t) = −ln(at_threshold)`.
    pub fn solve(&self) -> ResponseScoreParams {
        let t = self.threshold;
        let lambda_l = (self.at_threshold / self.at_zero).ln() / t;
        let m_l = -self.at_zero.ln() / lambda_l;
        let lambda_h = (self.at_max / self.at_threshold).ln() / (1.0 - t);
        let m_h = 1.0 - self.at_max.ln() / lambda_h;
        ResponseScoreParams {
            lambda_h,
            m_h,
            lambda_l,
            m_l,
            penalty: -0.1,
            branch_threshold: t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseScoreParams {
    pub lambda_h: f64,
    pub m_h: f64,
    pub lambda_l: f64,
    pub m_l: f64,
    /// Score of posts with at most one response.
    pub penalty: f64,
    /// Fraction of the maximum response separating the two branches.
    pub branch_threshold: f64,
}

impl Default for ResponseScoreParams {
    fn default() -> Self {
        solve_response_params(1.0)
    }
}

impl ResponseScoreParams {
    pub fn low_branch(&self, x: f64) -> f64 {
        (-self.lambda_l * (self.m_l - x)).exp()
    }

    pub fn high_branch(&self, x: f64) -> f64 {
        (-self.lambda_h * (self.m_h - x)).exp()
    }

    /// Score for a normalized response `x` (the non-penalty part of `f`).
    pub fn score_normalized(&self, x: f64) -> f64 {
        let x = x.min(1.0);
        if x > self.branch_threshold {
            self.high_branch(x)
        } else {
            self.low_branch(x)
        }
    }
}

/// Parameters fitted to the default anchors, with the high branch reaching
/// `max_anchor` at the maximum response.
pub fn solve_response_params(max_anchor: f64) -> ResponseScoreParams {
    ResponseAnchors {
        at_max: max_anchor,
        ..ResponseAnchors::default()
    }
    .solve()
}

/// Scores a raw response count against the slot's maximum response.
pub fn response_score(
    raw: u64,
    max_response: u64,
    params: &ResponseScoreParams,
) -> Result<f64, PInfError> {
    if max_response < 1 {
        return Err(PInfError::ZeroMaxResponse);
    }
    if raw <= 1 {
        return Ok(params.penalty);
    }
    Ok(params.score_normalized(raw as f64 / max_response as f64))
}

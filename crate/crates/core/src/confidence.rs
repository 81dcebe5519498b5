//! Strategies producing the confidence parameter `c_t`.
//!
//! The ML updates are driven by `c_t = m_t/σ_z²` where `m_t` is the per-tap
//! error variance. The genie-aided source computes it from the true channel;
//! the delay-and-extrapolate source estimates it from the leading taps of an
//! artificially extended filter whose true leading coefficients are zero.

use crate::error::{Error, Result};
use crate::state::{misalignment, Channel, FilterState};

/// Lower clamp for the confidence parameter.
pub const C_MIN: f64 = 1e-12;
/// Upper clamp for the confidence parameter. Also substituted when the
/// genie-aided value is undefined (`σ_z = 0`), where the update behaves as
/// APA with unit step.
pub const C_MAX: f64 = 1e12;

/// Clamps a confidence value into `[C_MIN, C_MAX]`.
pub fn clamp_confidence(c: f64) -> f64 {
    c.clamp(C_MIN, C_MAX)
}

/// A strategy producing `c_t` for the current filter state.
pub trait ConfidenceSource: Send {
    fn confidence(&self, state: &FilterState) -> Result<f64>;
    fn describe(&self) -> String;
}

/// Exact confidence from the true channel: `c_t = ‖w_t − w*‖²/(L·σ_z²)`.
#[derive(Debug, Clone)]
pub struct GenieConfidence {
    channel: Channel,
    sigma_z: f64,
}

impl GenieConfidence {
    pub fn new(channel: Channel, sigma_z: f64) -> Result<Self> {
        if !(sigma_z >= 0.0) || !sigma_z.is_finite() {
            return Err(Error::Parameter(format!(
                "sigma_z must be non-negative and finite, got {sigma_z}"
            )));
        }
        Ok(GenieConfidence { channel, sigma_z })
    }
}

/// Computes the genie-aided confidence, clamped into `[C_MIN, C_MAX]`.
pub fn genie_c(state: &FilterState, genie: &GenieConfidence) -> Result<f64> {
    if genie.sigma_z == 0.0 {
        return Ok(C_MAX);
    }
    let r = misalignment(state, &genie.channel)?;
    let l = genie.channel.len() as f64;
    Ok(clamp_confidence(r / (l * genie.sigma_z * genie.sigma_z)))
}

impl ConfidenceSource for GenieConfidence {
    fn confidence(&self, state: &FilterState) -> Result<f64> {
        genie_c(state, self)
    }

    fn describe(&self) -> String {
        "genie".into()
    }
}

/// Delay-and-extrapolate estimate from the leading `M` taps of an extended
/// filter of length `L + M`.
#[derive(Debug, Clone)]
pub struct DelayExtrapolateConfidence {
    delay: usize,
    sigma_z: f64,
}

impl DelayExtrapolateConfidence {
    pub fn new(delay: usize, sigma_z: f64) -> Result<Self> {
        if delay == 0 {
            return Err(Error::Config("delay M must be at least 1".into()));
        }
        if !(sigma_z > 0.0) || !sigma_z.is_finite() {
            return Err(Error::Parameter(format!(
                "delay-and-extrapolate needs sigma_z > 0, got {sigma_z}"
            )));
        }
        Ok(DelayExtrapolateConfidence { delay, sigma_z })
    }

    pub fn delay(&self) -> usize {
        self.delay
    }
}

/// Estimated confidence: `1/σ_z²` for the first `M` steps, afterwards
/// `(1/(M·σ_z²))·Σ_{i<M} w̃_i²`, clamped into `[C_MIN, C_MAX]`.
pub fn extrapolate_c(
    extended_state: &FilterState,
    cfg: &DelayExtrapolateConfidence,
    t: u64,
) -> Result<f64> {
    let m = cfg.delay;
    if m >= extended_state.dim() {
        return Err(Error::Config(format!(
            "delay M={m} must be smaller than the extended filter length {}",
            extended_state.dim()
        )));
    }
    let sz2 = cfg.sigma_z * cfg.sigma_z;
    if t < m as u64 {
        return Ok(clamp_confidence(1.0 / sz2));
    }
    let leading: f64 = extended_state.coefficients()[..m]
        .iter()
        .map(|w| w * w)
        .sum();
    Ok(clamp_confidence(leading / (m as f64 * sz2)))
}

impl ConfidenceSource for DelayExtrapolateConfidence {
    fn confidence(&self, state: &FilterState) -> Result<f64> {
        extrapolate_c(state, self, state.sample_index().saturating_sub(1))
    }

    fn describe(&self) -> String {
        format!("delay-extrapolate(M={})", self.delay)
    }
}

/// A constant confidence value, clamped. Used for noiseless runs where the
/// genie value is undefined.
#[derive(Debug, Clone, Copy)]
pub struct FixedConfidence(pub f64);

impl ConfidenceSource for FixedConfidence {
    fn confidence(&self, _state: &FilterState) -> Result<f64> {
        if !self.0.is_finite() || self.0 <= 0.0 {
            return Err(Error::Parameter(format!(
                "fixed confidence must be positive and finite, got {}",
                self.0
            )));
        }
        Ok(clamp_confidence(self.0))
    }

    fn describe(&self) -> String {
        format!("fixed(c={})", self.0)
    }
}

/// True channel of the delayed system: `[0_M ; w*]` of length `L + M`.
///
/// Delaying the observed outputs by `M` samples while the filter keeps
/// reading the live input is equivalent to identifying this zero-padded
/// channel; its leading `M` taps are exactly zero by causality, which is what
/// makes the extrapolation estimate well-grounded.
pub fn extend_for_delay(channel: &Channel, m: usize) -> Result<Channel> {
    if m == 0 {
        return Err(Error::Config(
            "delay M must be at least 1; M=0 would be the identity transform".into(),
        ));
    }
    let mut taps = vec![0.0; m];
    taps.extend_from_slice(channel.taps());
    Channel::new(taps)
}

//! Domain types shared by all algorithms: channels, sliding data windows,
//! filter state and misalignment metrics.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg;

/// Floor applied to dB metrics so that traces stay finite when the
/// misalignment underflows.
pub const DB_FLOOR: f64 = -400.0;

/// A linear time-invariant channel: the ground truth `w*` of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    taps: Vec<f64>,
}

impl Channel {
    /// Builds a channel, rejecting empty or non-finite tap vectors.
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Parameter("channel must have at least one tap".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("channel taps must be finite".into()));
        }
        Ok(Channel { taps })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.taps)
    }
}

/// Sliding window of the `P` most recent input vectors and outputs.
///
/// Column 0 is the newest vector; in streaming mode consecutive columns
/// overlap in `L−1` entries. Before `P` samples have been pushed the
/// trailing columns are zero-padded.
#[derive(Debug, Clone)]
pub struct DataWindow {
    dim: usize,
    inputs: VecDeque<Vec<f64>>,
    outputs: VecDeque<f64>,
}

impl DataWindow {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("window dimension must be positive".into()));
        }
        if order == 0 || order > dim {
            return Err(Error::Parameter(format!(
                "memory order must satisfy 1 <= P <= L, got P={order}, L={dim}"
            )));
        }
        Ok(DataWindow {
            dim,
            inputs: (0..order).map(|_| vec![0.0; dim]).collect(),
            outputs: std::iter::repeat(0.0).take(order).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Memory order `P`.
    pub fn order(&self) -> usize {
        self.inputs.len()
    }

    /// Input vector at lag `j` (0 = newest).
    pub fn input(&self, j: usize) -> &[f64] {
        &self.inputs[j]
    }

    /// Output at lag `j` (0 = newest).
    pub fn output(&self, j: usize) -> f64 {
        self.outputs[j]
    }

    /// Column slices, newest first.
    pub fn columns(&self) -> Vec<&[f64]> {
        self.inputs.iter().map(|c| c.as_slice()).collect()
    }

    /// Outputs as a vector, newest first.
    pub fn outputs(&self) -> Vec<f64> {
        self.outputs.iter().copied().collect()
    }

    fn push(&mut self, x_new: Vec<f64>, y_new: f64) {
        self.inputs.pop_back();
        self.inputs.push_front(x_new);
        self.outputs.pop_back();
        self.outputs.push_front(y_new);
    }
}

/// Filter estimate plus its data window and sample counter.
#[derive(Debug, Clone)]
pub struct FilterState {
    w: Vec<f64>,
    window: DataWindow,
    sample_index: u64,
}

impl FilterState {
    /// A zero-initialized filter of length `dim` with memory order `order`.
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        Ok(FilterState {
            w: vec![0.0; dim],
            window: DataWindow::new(dim, order)?,
            sample_index: 0,
        })
    }

    /// Starts from an explicit coefficient vector.
    pub fn with_coefficients(w: Vec<f64>, order: usize) -> Result<Self> {
        let window = DataWindow::new(w.len(), order)?;
        Ok(FilterState {
            w,
            window,
            sample_index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn order(&self) -> usize {
        self.window.order()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.w
    }

    pub(crate) fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn window(&self) -> &DataWindow {
        &self.window
    }

    /// Number of samples pushed so far (`t`).
    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    /// Shifts the window by one sample: the newest column becomes `x_new`,
    /// the oldest is dropped, and the sample counter increments.
    pub fn push_sample(&mut self, x_new: &[f64], y_new: f64) -> Result<()> {
        if x_new.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x_new.len(),
            });
        }
        self.window.push(x_new.to_vec(), y_new);
        self.sample_index += 1;
        Ok(())
    }

    /// Predicted output for the newest input vector, `ŷ_t = x_tᵀ w`.
    pub fn predicted_output(&self) -> f64 {
        linalg::dot(self.window.input(0), &self.w)
    }
}

/// Signal model: channel, input level and noise level.
#[derive(Debug, Clone)]
pub struct ObservationModel {
    pub channel: Channel,
    pub sigma_x: f64,
    pub sigma_z: f64,
}

impl ObservationModel {
    pub fn new(channel: Channel, sigma_x: f64, sigma_z: f64) -> Result<Self> {
        if !(sigma_x > 0.0) || !sigma_x.is_finite() {
            return Err(Error::Parameter(format!(
                "sigma_x must be positive and finite, got {sigma_x}"
            )));
        }
        if !(sigma_z >= 0.0) || !sigma_z.is_finite() {
            return Err(Error::Parameter(format!(
                "sigma_z must be non-negative and finite, got {sigma_z}"
            )));
        }
        Ok(ObservationModel {
            channel,
            sigma_x,
            sigma_z,
        })
    }
}

/// Squared misalignment `r = ‖w − w*‖²`.
pub fn misalignment(state: &FilterState, channel: &Channel) -> Result<f64> {
    misalignment_of(state.coefficients(), channel)
}

/// Squared misalignment for a raw coefficient vector.
pub fn misalignment_of(w: &[f64], channel: &Channel) -> Result<f64> {
    if w.len() != channel.len() {
        return Err(Error::Dimension {
            expected: channel.len(),
            got: w.len(),
        });
    }
    Ok(w.iter()
        .zip(channel.taps())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Normalized misalignment in decibels, `20·log10(‖w − w*‖ / ‖w*‖)`,
/// floored at [`DB_FLOOR`].
pub fn normalized_misalignment_db(state: &FilterState, channel: &Channel) -> Result<f64> {
    normalized_misalignment_db_of(state.coefficients(), channel)
}

/// dB metric for a raw coefficient vector.
pub fn normalized_misalignment_db_of(w: &[f64], channel: &Channel) -> Result<f64> {
    let denom = channel.norm();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric(
            "normalized misalignment needs a nonzero channel".into(),
        ));
    }
    let r = misalignment_of(w, channel)?;
    let db = 10.0 * (r / (denom * denom)).log10();
    Ok(db.max(DB_FLOOR))
}

/// Normalized misalignment `a = r·σ_x²/σ_z²`.
pub fn normalized_a(r: f64, model: &ObservationModel) -> Result<f64> {
    if model.sigma_z == 0.0 {
        return Err(Error::Parameter(
            "normalized misalignment is undefined for sigma_z = 0".into(),
        ));
    }
    if r < 0.0 {
        return Err(Error::Parameter(format!(
            "misalignment must be non-negative, got {r}"
        )));
    }
    Ok(r * model.sigma_x * model.sigma_x / (model.sigma_z * model.sigma_z))
}

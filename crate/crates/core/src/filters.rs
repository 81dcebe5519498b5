//! Adaptive-filter update rules behind one common interface.
//!
//! The maximum-likelihood updates (GA-OBML, GA-IML and the small-inverse IML
//! form) solve the P×P Gram system `(1/c)·I_P + XᵀX` produced by the sliding
//! window; the baselines (LMS, NLMS, regularized APA, RLS) follow their
//! textbook recursions. Production paths never materialize an L×L inverse;
//! the dense Lagrangian form exists only as an oracle for equivalence tests
//! and is guarded by a size cap.

use crate::confidence::{clamp_confidence, ConfidenceSource};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::state::FilterState;

/// Size cap for operations that materialize an L×L system.
pub const DENSE_SIZE_CAP: usize = 512;

/// Step size and regularization of the affine projection algorithm. The
/// memory order `P` lives in the filter state's window.
#[derive(Debug, Clone, Copy)]
pub struct ApaParams {
    pub mu: f64,
    pub delta: f64,
}

impl ApaParams {
    pub fn new(mu: f64, delta: f64) -> Result<Self> {
        if !mu.is_finite() || !(0.0..=1.0).contains(&mu) {
            return Err(Error::Parameter(format!(
                "APA step size must lie in [0, 1], got {mu}"
            )));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::Parameter(format!(
                "APA regularization must be non-negative, got {delta}"
            )));
        }
        Ok(ApaParams { mu, delta })
    }
}

/// Forgetting factor and initial inverse-correlation scaling for RLS.
#[derive(Debug, Clone, Copy)]
pub struct RlsParams {
    /// Forgetting factor in (0, 1].
    pub eta: f64,
    /// Ridge weight of the implicit initial regularization; the
    /// inverse-correlation matrix starts at `(1/delta_init)·I`.
    pub delta_init: f64,
}

impl RlsParams {
    pub fn new(eta: f64, delta_init: f64) -> Result<Self> {
        if !eta.is_finite() || !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Parameter(format!(
                "RLS forgetting factor must lie in (0, 1], got {eta}"
            )));
        }
        if !delta_init.is_finite() || delta_init <= 0.0 {
            return Err(Error::Parameter(format!(
                "RLS initial scaling must be positive, got {delta_init}"
            )));
        }
        Ok(RlsParams { eta, delta_init })
    }
}

fn validate_confidence(c: f64) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::Parameter(format!(
            "confidence parameter must be positive and finite, got {c}"
        )));
    }
    Ok(clamp_confidence(c))
}

/// Solves `((1/c)·I + XᵀX) z = rhs` and returns the step `X·z`.
fn ml_step(state: &FilterState, c: f64, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let cols = state.window().columns();
    let mut g = linalg::gram(&cols);
    g.add_diag(1.0 / c);
    let z = linalg::solve_spd(g, rhs).map_err(|e| {
        Error::Numerical(format!("ML Gram system lost positive definiteness: {e}"))
    })?;
    Ok(linalg::columns_times(&cols, &z, state.dim()))
}

/// GA-OBML block update: `w ← w + X·((1/c)·I_P + XᵀX)⁻¹·(y − Xᵀw)`.
pub fn ga_obml_update(state: &mut FilterState, c: f64) -> Result<()> {
    let c = validate_confidence(c)?;
    let rhs = {
        let cols = state.window().columns();
        let mut rhs = state.window().outputs();
        let xtw = linalg::columns_tr_times(&cols, state.coefficients());
        for (r, t) in rhs.iter_mut().zip(xtw) {
            *r -= t;
        }
        rhs
    };
    let step = ml_step(state, c, rhs)?;
    linalg::axpy(1.0, &step, state.coefficients_mut());
    Ok(())
}

/// GA-IML incremental update: only the newest entry of the error vector is
/// kept, `w ← w + X·((1/c)·I_P + XᵀX)⁻¹·[ε_t; 0]`.
pub fn ga_iml_update(state: &mut FilterState, c: f64) -> Result<()> {
    let c = validate_confidence(c)?;
    let eps = state.window().output(0) - state.predicted_output();
    let mut rhs = vec![0.0; state.order()];
    rhs[0] = eps;
    let step = ml_step(state, c, rhs)?;
    linalg::axpy(1.0, &step, state.coefficients_mut());
    Ok(())
}

/// IML update computed through the (P−1)-sized inverse.
///
/// Uses `x̃ = x − U·((1/c)·I_{P−1} + UᵀU)⁻¹·Uᵀx` followed by the
/// VR-NLMS-shaped step `w ← w + x̃·ε/(1/c + xᵀx̃)`. Equivalent to
/// [`ga_iml_update`] up to floating-point roundoff.
pub fn iml_update_via_small_inverse(state: &mut FilterState, c: f64) -> Result<()> {
    let c = validate_confidence(c)?;
    let (x_tilde, eps, denom) = {
        let cols = state.window().columns();
        let x = cols[0];
        let trailing = &cols[1..];
        let mut x_tilde = x.to_vec();
        if !trailing.is_empty() {
            let mut g = linalg::gram(trailing);
            g.add_diag(1.0 / c);
            let utx = linalg::columns_tr_times(trailing, x);
            let z = linalg::solve_spd(g, utx)?;
            let corr = linalg::columns_times(trailing, &z, x.len());
            for (t, v) in x_tilde.iter_mut().zip(corr) {
                *t -= v;
            }
        }
        let eps = state.window().output(0) - linalg::dot(x, state.coefficients());
        let denom = 1.0 / c + linalg::dot(x, &x_tilde);
        (x_tilde, eps, denom)
    };
    linalg::axpy(eps / denom, &x_tilde, state.coefficients_mut());
    Ok(())
}

/// Regularized APA: `w ← w + μ·X·(XᵀX + δ·I_P)⁻¹·(y − Xᵀw)`.
///
/// With `δ = 0` the Gram system is solved in the minimum-norm sense, so
/// rank-deficient windows get pseudo-inverse semantics.
pub fn apa_update(state: &mut FilterState, params: &ApaParams) -> Result<()> {
    if params.mu == 0.0 {
        return Ok(());
    }
    let step = {
        let cols = state.window().columns();
        let mut rhs = state.window().outputs();
        let xtw = linalg::columns_tr_times(&cols, state.coefficients());
        for (r, t) in rhs.iter_mut().zip(xtw) {
            *r -= t;
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite residual in APA update".into()));
        }
        let mut g = linalg::gram(&cols);
        let z = if params.delta > 0.0 {
            g.add_diag(params.delta);
            linalg::solve_spd(g, rhs)?
        } else {
            linalg::solve_sym_pinv(&g, &rhs)
        };
        linalg::columns_times(&cols, &z, state.dim())
    };
    linalg::axpy(params.mu, &step, state.coefficients_mut());
    Ok(())
}

/// Dense Lagrangian form of the regularized APA step,
/// `w ← (I + λ·XXᵀ)⁻¹·(w + λ·X·y)`.
///
/// Materializes an L×L system; rejected above `size_cap` (use
/// [`DENSE_SIZE_CAP`] for the default). Exists as an oracle for equivalence
/// against [`apa_update`] with `μ = 1`, `δ = 1/λ`.
pub fn lagrangian_form_update(state: &mut FilterState, lambda: f64, size_cap: usize) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Parameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let l = state.dim();
    if l > size_cap {
        return Err(Error::Config(format!(
            "lagrangian form materializes an {l}x{l} system; cap is {size_cap}"
        )));
    }
    let new_w = {
        let cols = state.window().columns();
        let y = state.window().outputs();
        let mut a = Mat::identity(l);
        for col in &cols {
            for i in 0..l {
                let ci = col[i];
                if ci == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    let v = a.get(i, j) + lambda * ci * col[j];
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
            }
        }
        let mut rhs = state.coefficients().to_vec();
        let xy = linalg::columns_times(&cols, &y, l);
        linalg::axpy(lambda, &xy, &mut rhs);
        linalg::solve_spd(a, rhs)?
    };
    state.coefficients_mut().copy_from_slice(&new_w);
    Ok(())
}

/// LMS step `w ← w + μ·x·(y − xᵀw)` on the newest sample.
pub fn lms_update(state: &mut FilterState, mu: f64) -> Result<()> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::Parameter(format!(
            "LMS step size must be non-negative, got {mu}"
        )));
    }
    let eps = state.window().output(0) - state.predicted_output();
    let x = state.window().input(0).to_vec();
    linalg::axpy(mu * eps, &x, state.coefficients_mut());
    Ok(())
}

/// Regularized NLMS step `w ← w + μ·x·(y − xᵀw)/(‖x‖² + δ)`.
pub fn nlms_update(state: &mut FilterState, mu: f64, delta: f64) -> Result<()> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::Parameter(format!(
            "NLMS step size must be non-negative, got {mu}"
        )));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Parameter(format!(
            "NLMS regularization must be non-negative, got {delta}"
        )));
    }
    let eps = state.window().output(0) - state.predicted_output();
    let x = state.window().input(0).to_vec();
    let denom = linalg::norm_sq(&x) + delta;
    if denom == 0.0 {
        // Zero input carries no information; leave the estimate alone.
        return Ok(());
    }
    linalg::axpy(mu * eps / denom, &x, state.coefficients_mut());
    Ok(())
}

/// Inverse-correlation matrix maintained by the RLS recursion.
#[derive(Debug, Clone)]
pub struct RlsState {
    inv_corr: Mat,
}

impl RlsState {
    pub fn new(dim: usize, params: &RlsParams) -> Self {
        let mut m = Mat::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, 1.0 / params.delta_init);
        }
        RlsState { inv_corr: m }
    }

    pub fn inv_corr(&self) -> &Mat {
        &self.inv_corr
    }
}

/// Exponentially-weighted RLS step on the newest sample.
///
/// The inverse-correlation matrix is re-symmetrized after every update; a
/// non-positive gain denominator reports numerical breakdown.
pub fn rls_update(state: &mut FilterState, rls: &mut RlsState, params: &RlsParams) -> Result<()> {
    let dim = state.dim();
    if rls.inv_corr.rows() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: rls.inv_corr.rows(),
        });
    }
    let x = state.window().input(0).to_vec();
    let px = rls.inv_corr.mat_vec(&x);
    let denom = params.eta + linalg::dot(&x, &px);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Numerical(format!(
            "RLS gain denominator {denom}; inverse correlation lost positive definiteness"
        )));
    }
    let eps = state.window().output(0) - state.predicted_output();
    let gain: Vec<f64> = px.iter().map(|v| v / denom).collect();
    linalg::axpy(eps, &gain, state.coefficients_mut());
    // P <- (P - k·(Px)^T)/eta, then symmetrize by averaging with the
    // transpose to keep roundoff from accumulating asymmetry.
    for j in 0..dim {
        let pxj = px[j];
        let col = rls.inv_corr.col_mut(j);
        for i in 0..dim {
            col[i] = (col[i] - gain[i] * pxj) / params.eta;
        }
    }
    for j in 0..dim {
        for i in 0..j {
            let v = 0.5 * (rls.inv_corr.get(i, j) + rls.inv_corr.get(j, i));
            rls.inv_corr.set(i, j, v);
            rls.inv_corr.set(j, i, v);
        }
    }
    Ok(())
}

/// Common interface the harness drives: one call per pushed sample, with the
/// implementation deciding its own update cadence.
pub trait AdaptiveFilter: Send {
    fn descriptor(&self) -> String;
    fn update(&mut self, state: &mut FilterState) -> Result<()>;
}

/// Never updates; the 0 dB reference trace.
pub struct IdentityFilter;

impl AdaptiveFilter for IdentityFilter {
    fn descriptor(&self) -> String {
        "identity".into()
    }

    fn update(&mut self, _state: &mut FilterState) -> Result<()> {
        Ok(())
    }
}

pub struct LmsFilter {
    pub mu: f64,
}

impl AdaptiveFilter for LmsFilter {
    fn descriptor(&self) -> String {
        format!("lms(mu={})", self.mu)
    }

    fn update(&mut self, state: &mut FilterState) -> Result<()> {
        lms_update(state, self.mu)
    }
}

pub struct NlmsFilter {
    pub mu: f64,
    pub delta: f64,
}

impl AdaptiveFilter for NlmsFilter {
    fn descriptor(&self) -> String {
        format!("nlms(mu={}, delta={})", self.mu, self.delta)
    }

    fn update(&mut self, state: &mut FilterState) -> Result<()> {
        nlms_update(state, self.mu, self.delta)
    }
}

pub struct ApaFilter {
    pub params: ApaParams,
}

impl AdaptiveFilter for ApaFilter {
    fn descriptor(&self) -> String {
        format!("apa(mu={}, delta={})", self.params.mu, self.params.delta)
    }

    fn update(&mut self, state: &mut FilterState) -> Result<()> {
        apa_update(state, &self.params)
    }
}

pub struct RlsFilter {
    params: RlsParams,
    state: Option<RlsState>,
}

impl RlsFilter {
    pub fn new(params: RlsParams) -> Self {
        RlsFilter {
            params,
            state: None,
        }
    }
}

impl AdaptiveFilter for RlsFilter {
    fn descriptor(&self) -> String {
        format!(
            "rls(eta={}, delta_init={})",
            self.params.eta, self.params.delta_init
        )
    }

    fn update(&mut self, state: &mut FilterState) -> Result<()> {
        let dim = state.dim();
        let params = self.params;
        let rls = self
            .state
            .get_or_insert_with(|| RlsState::new(dim, &params));
        rls_update(state, rls, &params)
    }
}

/// GA-OBML driven by a confidence source; updates once per `P` samples.
pub struct GaObmlFilter {
    confidence: Box<dyn ConfidenceSource>,
}

impl GaObmlFilter {
    pub fn new(confidence: Box<dyn ConfidenceSource>) -> Self {
        GaObmlFilter { confidence }
    }
}

impl AdaptiveFilter for GaObmlFilter {
    fn descriptor(&self) -> String {
        format!("ga-obml({})", self.confidence.describe())
    }

    fn update(&mut self, state: &mut FilterState) -> Result<()> {
        if state.sample_index() % state.order() as u64 != 0 {
            return Ok(());
        }
        let c = self.confidence.confidence(state)?;
        ga_obml_update(state, c)
    }
}

/// GA-IML driven by a confidence source; updates every sample.
pub struct GaImlFilter {
    confidence: Box<dyn ConfidenceSource>,
}

impl GaImlFilter {
    pub fn new(confidence: Box<dyn ConfidenceSource>) -> Self {
        GaImlFilter { confidence }
    }
}

impl AdaptiveFilter for GaImlFilter {
    fn descriptor(&self) -> String {
        format!("ga-iml({})", self.confidence.describe())
    }

    fn update(&mut self, state: &mut FilterState) -> Result<()> {
        let c = self.confidence.confidence(state)?;
        ga_iml_update(state, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{columns_times, columns_tr_times, dot, norm, solve_spd};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn rand_state(
        rng: &mut ChaCha12Rng,
        dim: usize,
        order: usize,
        full_window: bool,
    ) -> FilterState {
        let w: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut s = FilterState::with_coefficients(w, order).unwrap();
        let pushes = if full_window { order } else { 1 };
        for _ in 0..pushes {
            let x: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let y: f64 = rng.sample(StandardNormal);
            s.push_sample(&x, y).unwrap();
        }
        s
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let scale = norm(b).max(1e-30);
        diff / scale
    }

    /// Dense MAP oracle for the block-ML update:
    /// `w' = ((1/c)·I_L + XXᵀ)⁻¹·(X·y + (1/c)·w)`.
    fn dense_map_oracle(state: &FilterState, c: f64) -> Vec<f64> {
        let l = state.dim();
        let cols = state.window().columns();
        let y = state.window().outputs();
        let mut a = Mat::zeros(l, l);
        for i in 0..l {
            a.set(i, i, 1.0 / c);
        }
        for col in &cols {
            for i in 0..l {
                for j in 0..l {
                    let v = a.get(i, j) + col[i] * col[j];
                    a.set(i, j, v);
                }
            }
        }
        let mut rhs = columns_times(&cols, &y, l);
        linalg::axpy(1.0 / c, state.coefficients(), &mut rhs);
        solve_spd(a, rhs).unwrap()
    }

    /// Dense oracle for the long IML form:
    /// `w' = w + B⁻¹·x·ε/(1 + xᵀB⁻¹x)` with `B = (1/c)·I_L + UUᵀ`.
    fn dense_iml_long_oracle(state: &FilterState, c: f64) -> Vec<f64> {
        let l = state.dim();
        let cols = state.window().columns();
        let x = cols[0].to_vec();
        let mut b = Mat::zeros(l, l);
        for i in 0..l {
            b.set(i, i, 1.0 / c);
        }
        for col in &cols[1..] {
            for i in 0..l {
                for j in 0..l {
                    let v = b.get(i, j) + col[i] * col[j];
                    b.set(i, j, v);
                }
            }
        }
        let binv_x = solve_spd(b, x.clone()).unwrap();
        let eps = state.window().output(0) - dot(&x, state.coefficients());
        let denom = 1.0 + dot(&x, &binv_x);
        let mut w = state.coefficients().to_vec();
        linalg::axpy(eps / denom, &binv_x, &mut w);
        w
    }

    #[test]
    fn obml_zero_residual_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut s = rand_state(&mut rng, 5, 2, true);
        // Rewrite outputs so that the residual vanishes.
        let w = s.coefficients().to_vec();
        let xs: Vec<Vec<f64>> = (0..2).map(|j| s.window().input(j).to_vec()).collect();
        let mut s2 = FilterState::with_coefficients(w.clone(), 2).unwrap();
        for x in xs.iter().rev() {
            s2.push_sample(x, dot(x, &w)).unwrap();
        }
        ga_obml_update(&mut s2, 0.7).unwrap();
        assert!(rel_err(s2.coefficients(), &w) < 1e-14);
        // Make sure the original state is exercised too.
        ga_obml_update(&mut s, 0.7).unwrap();
    }

    #[test]
    fn obml_hand_checked_step() {
        // L=2, P=1, w=0, x=(1,1), y=1, c=0.5 -> w=(0.25, 0.25).
        let mut s = FilterState::new(2, 1).unwrap();
        s.push_sample(&[1.0, 1.0], 1.0).unwrap();
        ga_obml_update(&mut s, 0.5).unwrap();
        assert_relative_eq!(s.coefficients()[0], 0.25, epsilon = 1e-14);
        assert_relative_eq!(s.coefficients()[1], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn obml_matches_dense_map_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for &c in &[0.03, 1.0, 40.0] {
            let mut s = rand_state(&mut rng, 6, 2, true);
            let expected = dense_map_oracle(&s, c);
            ga_obml_update(&mut s, c).unwrap();
            assert!(
                rel_err(s.coefficients(), &expected) < 1e-10,
                "c={c}: {:?} vs {:?}",
                s.coefficients(),
                expected
            );
        }
    }

    #[test]
    fn obml_large_confidence_is_nlms_at_order_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut s = rand_state(&mut rng, 8, 1, true);
        let x = s.window().input(0).to_vec();
        let y = s.window().output(0);
        let mut expected = s.coefficients().to_vec();
        let eps = y - dot(&x, &expected);
        linalg::axpy(eps / linalg::norm_sq(&x), &x, &mut expected);
        ga_obml_update(&mut s, 1e9).unwrap();
        assert!(rel_err(s.coefficients(), &expected) < 1e-6);
    }

    #[test]
    fn obml_rejects_bad_confidence() {
        let mut s = FilterState::new(2, 1).unwrap();
        s.push_sample(&[1.0, 0.0], 1.0).unwrap();
        assert!(ga_obml_update(&mut s, 0.0).is_err());
        assert!(ga_obml_update(&mut s, -1.0).is_err());
        assert!(ga_obml_update(&mut s, f64::NAN).is_err());
        assert!(ga_obml_update(&mut s, f64::INFINITY).is_err());
    }

    #[test]
    fn iml_equals_obml_at_order_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let a = rand_state(&mut rng, 7, 1, true);
        let mut b = a.clone();
        let mut a = a;
        ga_obml_update(&mut a, 2.5).unwrap();
        ga_iml_update(&mut b, 2.5).unwrap();
        assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-14);
    }

    #[test]
    fn iml_zero_innovation_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut s = rand_state(&mut rng, 6, 3, true);
        let w = s.coefficients().to_vec();
        let x = s.window().input(0).to_vec();
        // Overwrite the newest output so the innovation vanishes.
        let y = dot(&x, &w);
        s.push_sample(&x, y).unwrap();
        ga_iml_update(&mut s, 3.0).unwrap();
        assert!(rel_err(s.coefficients(), &w) < 1e-14);
    }

    #[test]
    fn iml_matches_dense_long_form() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let mut s = rand_state(&mut rng, 8, 3, true);
        let expected = dense_iml_long_oracle(&s, 0.8);
        ga_iml_update(&mut s, 0.8).unwrap();
        assert!(rel_err(s.coefficients(), &expected) < 1e-10);
    }

    #[test]
    fn small_inverse_equals_vr_nlms_at_order_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let s0 = rand_state(&mut rng, 5, 1, true);
        let c = 4.0;
        let mut a = s0.clone();
        let mut b = s0;
        iml_update_via_small_inverse(&mut a, c).unwrap();
        nlms_update(&mut b, 1.0, 1.0 / c).unwrap();
        assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-14);
    }

    #[test]
    fn small_inverse_with_orthogonal_history_reduces_to_vr_nlms() {
        // U columns orthogonal to x: the Woodbury correction vanishes exactly.
        let mut s = FilterState::new(4, 3).unwrap();
        s.push_sample(&[0.0, 0.0, 1.0, 0.0], 0.3).unwrap();
        s.push_sample(&[0.0, 0.0, 0.0, 2.0], -0.1).unwrap();
        s.push_sample(&[1.0, 2.0, 0.0, 0.0], 0.7).unwrap();
        let c = 2.0;
        let mut a = s.clone();
        let mut b = s;
        iml_update_via_small_inverse(&mut a, c).unwrap();
        nlms_update(&mut b, 1.0, 1.0 / c).unwrap();
        assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-14);
    }

    #[test]
    fn small_inverse_matches_gram_form() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for &c in &[1e-3, 1.0, 1e3] {
            let s0 = rand_state(&mut rng, 8, 3, true);
            let mut a = s0.clone();
            let mut b = s0;
            ga_iml_update(&mut a, c).unwrap();
            iml_update_via_small_inverse(&mut b, c).unwrap();
            assert!(
                rel_err(a.coefficients(), b.coefficients()) < 1e-9,
                "forms diverge at c={c}"
            );
        }
    }

    #[test]
    fn apa_zero_step_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut s = rand_state(&mut rng, 5, 2, true);
        let w = s.coefficients().to_vec();
        apa_update(&mut s, &ApaParams::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(s.coefficients(), w.as_slice());
    }

    #[test]
    fn apa_order_one_is_nlms() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let s0 = rand_state(&mut rng, 6, 1, true);
        let mut a = s0.clone();
        let mut b = s0;
        apa_update(&mut a, &ApaParams::new(1.0, 0.0).unwrap()).unwrap();
        nlms_update(&mut b, 1.0, 0.0).unwrap();
        assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-12);
    }

    #[test]
    fn obml_equals_apa_with_reciprocal_regularization() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let c = 0.37;
        let s0 = rand_state(&mut rng, 9, 4, true);
        let mut a = s0.clone();
        let mut b = s0;
        ga_obml_update(&mut a, c).unwrap();
        apa_update(&mut b, &ApaParams::new(1.0, 1.0 / c).unwrap()).unwrap();
        assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-13);
    }

    #[test]
    fn apa_unit_step_interpolates_the_window() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let mut s = rand_state(&mut rng, 10, 4, true);
        apa_update(&mut s, &ApaParams::new(1.0, 0.0).unwrap()).unwrap();
        let cols = s.window().columns();
        let fit = columns_tr_times(&cols, s.coefficients());
        let y = s.window().outputs();
        for (f, yy) in fit.iter().zip(&y) {
            assert!((f - yy).abs() < 1e-8, "interpolation violated: {f} vs {yy}");
        }
    }

    #[test]
    fn apa_handles_rank_deficient_window_with_min_norm_step() {
        // Two identical columns: delta = 0 must fall back to the
        // pseudo-inverse instead of blowing up.
        let mut s = FilterState::new(3, 2).unwrap();
        s.push_sample(&[1.0, 1.0, 0.0], 2.0).unwrap();
        s.push_sample(&[1.0, 1.0, 0.0], 2.0).unwrap();
        apa_update(&mut s, &ApaParams::new(1.0, 0.0).unwrap()).unwrap();
        assert!(s.coefficients().iter().all(|v| v.is_finite()));
        // The consistent duplicated equation is now satisfied.
        let fit = dot(s.window().input(0), s.coefficients());
        assert_relative_eq!(fit, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn lagrangian_form_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        // lambda -> 0 approaches the identity.
        let mut s = rand_state(&mut rng, 6, 2, true);
        let w = s.coefficients().to_vec();
        lagrangian_form_update(&mut s, 1e-12, DENSE_SIZE_CAP).unwrap();
        assert!(rel_err(s.coefficients(), &w) < 1e-8);
        // Zero window is the identity for any lambda.
        let mut z = FilterState::with_coefficients(vec![0.4, -0.2], 1).unwrap();
        lagrangian_form_update(&mut z, 3.0, DENSE_SIZE_CAP).unwrap();
        assert_eq!(z.coefficients(), &[0.4, -0.2]);
    }

    #[test]
    fn lagrangian_form_equals_apa() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let lambda = 2.0;
        let s0 = rand_state(&mut rng, 16, 4, true);
        let mut a = s0.clone();
        let mut b = s0;
        lagrangian_form_update(&mut a, lambda, DENSE_SIZE_CAP).unwrap();
        apa_update(&mut b, &ApaParams::new(1.0, 1.0 / lambda).unwrap()).unwrap();
        assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-9);
    }

    #[test]
    fn lagrangian_form_respects_size_cap() {
        let mut s = FilterState::new(600, 2).unwrap();
        assert!(matches!(
            lagrangian_form_update(&mut s, 1.0, DENSE_SIZE_CAP),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn lms_examples() {
        let mut s = FilterState::new(1, 1).unwrap();
        s.push_sample(&[2.0], 3.0).unwrap();
        // mu = 0 is the identity.
        lms_update(&mut s, 0.0).unwrap();
        assert_eq!(s.coefficients(), &[0.0]);
        // Scalar case: w + mu*x*(y - x*w).
        lms_update(&mut s, 0.1).unwrap();
        assert_relative_eq!(s.coefficients()[0], 0.1 * 2.0 * 3.0, epsilon = 1e-15);
        // Zero residual leaves w unchanged.
        let mut t = FilterState::with_coefficients(vec![1.5], 1).unwrap();
        t.push_sample(&[2.0], 3.0).unwrap();
        lms_update(&mut t, 0.1).unwrap();
        assert_eq!(t.coefficients(), &[1.5]);
    }

    #[test]
    fn nlms_step_is_monotone_in_regularization() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let s0 = rand_state(&mut rng, 6, 1, true);
        let mut prev = f64::INFINITY;
        for &delta in &[0.0, 1.0, 10.0, 1e6] {
            let mut s = s0.clone();
            nlms_update(&mut s, 1.0, delta).unwrap();
            let step: f64 = s
                .coefficients()
                .iter()
                .zip(s0.coefficients())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(step <= prev + 1e-15, "step grew with delta={delta}");
            prev = step;
        }
    }

    #[test]
    fn nlms_unit_step_projects_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        let mut s = rand_state(&mut rng, 6, 1, true);
        nlms_update(&mut s, 1.0, 0.0).unwrap();
        let fit = s.predicted_output();
        assert_relative_eq!(fit, s.window().output(0), epsilon = 1e-10);
    }

    #[test]
    fn rls_converges_to_least_squares() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let dim = 4;
        let params = RlsParams::new(1.0, 1e-8).unwrap();
        let mut state = FilterState::new(dim, 1).unwrap();
        let mut rls = RlsState::new(dim, &params);
        let truth = [0.5, -1.0, 0.25, 2.0];
        let mut xs: Vec<Vec<f64>> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for _ in 0..50 {
            let x: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let y = dot(&x, &truth) + 0.01 * rng.sample::<f64, _>(StandardNormal);
            state.push_sample(&x, y).unwrap();
            rls_update(&mut state, &mut rls, &params).unwrap();
            xs.push(x);
            ys.push(y);
        }
        // Dense least-squares oracle: solve (Σ x xᵀ) w = Σ y x on the same data.
        let mut a = Mat::zeros(dim, dim);
        let mut rhs = vec![0.0; dim];
        for (x, &y) in xs.iter().zip(&ys) {
            for i in 0..dim {
                for j in 0..dim {
                    let v = a.get(i, j) + x[i] * x[j];
                    a.set(i, j, v);
                }
            }
            linalg::axpy(y, x, &mut rhs);
        }
        let ols = solve_spd(a, rhs).unwrap();
        assert!(
            rel_err(state.coefficients(), &ols) < 1e-6,
            "{:?} vs {:?}",
            state.coefficients(),
            ols
        );
    }

    #[test]
    fn rls_zero_residual_keeps_coefficients() {
        let params = RlsParams::new(0.999, 0.1).unwrap();
        let mut state = FilterState::with_coefficients(vec![1.0, -2.0], 1).unwrap();
        let mut rls = RlsState::new(2, &params);
        let x = [0.5, 0.25];
        let y = dot(&x, state.coefficients());
        state.push_sample(&x, y).unwrap();
        rls_update(&mut state, &mut rls, &params).unwrap();
        assert!(rel_err(state.coefficients(), &[1.0, -2.0]) < 1e-14);
    }

    #[test]
    fn rls_first_update_moves_along_the_input() {
        let params = RlsParams::new(1.0, 0.01).unwrap();
        let mut state = FilterState::new(3, 1).unwrap();
        let mut rls = RlsState::new(3, &params);
        state.push_sample(&[1.0, 0.0, 0.0], 2.0).unwrap();
        rls_update(&mut state, &mut rls, &params).unwrap();
        assert!(state.coefficients()[0] > 0.0);
        assert_eq!(state.coefficients()[1], 0.0);
        assert_eq!(state.coefficients()[2], 0.0);
    }

    #[test]
    fn obml_small_confidence_approaches_block_lms() {
        // As c -> 0 the update tends to c·X·(y − Xᵀw); relative deviation at
        // c = 1e-6 must be below 1e-3.
        let mut rng = ChaCha12Rng::seed_from_u64(18);
        let c = 1e-6;
        let s0 = rand_state(&mut rng, 12, 4, true);
        let mut s = s0.clone();
        ga_obml_update(&mut s, c).unwrap();
        let cols = s0.window().columns();
        let mut resid = s0.window().outputs();
        let xtw = columns_tr_times(&cols, s0.coefficients());
        for (r, t) in resid.iter_mut().zip(xtw) {
            *r -= t;
        }
        let lms_step = columns_times(&cols, &resid, s0.dim());
        let delta: Vec<f64> = s
            .coefficients()
            .iter()
            .zip(s0.coefficients())
            .map(|(a, b)| a - b)
            .collect();
        let scaled: Vec<f64> = lms_step.iter().map(|v| c * v).collect();
        assert!(rel_err(&delta, &scaled) < 1e-3);
    }

    #[test]
    fn ga_obml_filter_updates_on_block_cadence() {
        let truth = [1.0, -0.5, 0.25, 0.0];
        let channel = crate::state::Channel::new(truth.to_vec()).unwrap();
        let genie = crate::confidence::GenieConfidence::new(channel, 0.1).unwrap();
        let mut filter = GaObmlFilter::new(Box::new(genie));
        let mut state = FilterState::new(4, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let mut changes = Vec::new();
        for _ in 0..6 {
            let x: Vec<f64> = (0..4)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let y = dot(&x, &truth);
            let before = state.coefficients().to_vec();
            state.push_sample(&x, y).unwrap();
            filter.update(&mut state).unwrap();
            changes.push(rel_err(&before, state.coefficients()) > 0.0);
        }
        // Samples 1,3,5 (1-based odd) leave the state untouched; 2,4,6 update.
        assert_eq!(changes, vec![false, true, false, true, false, true]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn instance(
            seed: u64,
            dim: usize,
            order: usize,
            log_c: f64,
        ) -> (FilterState, f64) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let s = rand_state(&mut rng, dim, order, true);
            (s, 10f64.powf(log_c))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn iml_forms_agree(seed in 0u64..1u64 << 48, dim in 4usize..32, order in 1usize..6, log_c in -3.0..3.0f64) {
                let order = order.min(dim);
                let (s0, c) = instance(seed, dim, order, log_c);
                let mut a = s0.clone();
                let mut b = s0;
                ga_iml_update(&mut a, c).unwrap();
                iml_update_via_small_inverse(&mut b, c).unwrap();
                prop_assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-9);
            }

            #[test]
            fn lagrangian_matches_apa(seed in 0u64..1u64 << 48, dim in 4usize..32, order in 1usize..6, log_l in -3.0..3.0f64) {
                let order = order.min(dim);
                let (s0, lambda) = instance(seed, dim, order, log_l);
                let mut a = s0.clone();
                let mut b = s0;
                lagrangian_form_update(&mut a, lambda, DENSE_SIZE_CAP).unwrap();
                apa_update(&mut b, &ApaParams::new(1.0, 1.0 / lambda).unwrap()).unwrap();
                prop_assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-9);
            }

            #[test]
            fn iml_equals_obml_for_unit_order(seed in 0u64..1u64 << 48, dim in 4usize..32, log_c in -3.0..3.0f64) {
                let (s0, c) = instance(seed, dim, 1, log_c);
                let mut a = s0.clone();
                let mut b = s0;
                ga_iml_update(&mut a, c).unwrap();
                ga_obml_update(&mut b, c).unwrap();
                prop_assert!(rel_err(a.coefficients(), b.coefficients()) < 1e-9);
            }
        }
    }
}

//! Deterministic evaluators of the analytical convergence results.
//!
//! The block-ML recursion admits the one-step bound
//! `E[r_{t+1}] ≤ (1 − (1−γ_L)·(P/L)·σ_x²r/(σ_z² + σ_x²r))·r` with the slack
//! constant `γ_L` coming from singular-value concentration. In normalized
//! form this is the iteration `a_{t+1} = f(a_t)` with
//! `f(a) = (1 − η·a/(1+a))·a` and `η = (1−γ_L)·P/L`. Offline regularized
//! least squares obeys the matching lower bounds implemented in
//! [`offline_bound`], with the reference estimator in
//! [`offline_regularized_ls`].

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Slack constant of the one-step bound:
/// `γ_L = 1 − (1 − √(P/L) − √(log L / L))²·(1 − 2/√L)` with natural log.
///
/// Enforces the proof hypotheses `√L − √(log L) > √P` and
/// `log L ≤ √L − √P`; violations are domain errors naming the failed
/// inequality.
pub fn gamma_l(dim: usize, order: usize) -> Result<f64> {
    if dim == 0 || order == 0 {
        return Err(Error::Parameter("L and P must be positive".into()));
    }
    let l = dim as f64;
    let p = order as f64;
    let log_l = l.ln();
    if l.sqrt() - log_l.sqrt() <= p.sqrt() {
        return Err(Error::Domain(format!(
            "hypothesis sqrt(L) - sqrt(log L) > sqrt(P) fails for L={dim}, P={order}"
        )));
    }
    if log_l > l.sqrt() - p.sqrt() {
        return Err(Error::Domain(format!(
            "hypothesis log L <= sqrt(L) - sqrt(P) fails for L={dim}, P={order}"
        )));
    }
    let base = 1.0 - (p / l).sqrt() - (log_l / l).sqrt();
    Ok(1.0 - base * base * (1.0 - 2.0 / l.sqrt()))
}

/// One step of the normalized bound recursion, `f(a) = (1 − η·a/(1+a))·a`.
pub fn f_step(a: f64, eta: f64) -> f64 {
    (1.0 - eta * a / (1.0 + a)) * a
}

/// Parameters of the bound recursion for given dimensions.
#[derive(Debug, Clone, Copy)]
pub struct BoundParams {
    pub dim: usize,
    pub order: usize,
    pub a0: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl BoundParams {
    /// Derives `γ_L` and `η = (1−γ_L)·P/L` for the given dimensions.
    pub fn new(dim: usize, order: usize, a0: f64) -> Result<Self> {
        if !(a0 >= 0.0) || !a0.is_finite() {
            return Err(Error::Parameter(format!(
                "initial normalized misalignment must be non-negative and finite, got {a0}"
            )));
        }
        let gamma = gamma_l(dim, order)?;
        let eta = (1.0 - gamma) * order as f64 / dim as f64;
        Ok(BoundParams {
            dim,
            order,
            a0,
            gamma,
            eta,
        })
    }
}

/// A deterministic sequence of predicted normalized misalignments.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    values: Vec<f64>,
    samples_per_step: usize,
}

impl BoundCurve {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn samples_per_step(&self) -> usize {
        self.samples_per_step
    }

    /// Sample index of step `t` (`s = t·P`).
    pub fn sample_index(&self, t: usize) -> usize {
        t * self.samples_per_step
    }
}

/// Iterates the bound recursion for `steps` steps; `values[0] = a0`.
pub fn obml_bound_curve(params: &BoundParams, steps: usize) -> BoundCurve {
    let mut values = Vec::with_capacity(steps + 1);
    let mut a = params.a0;
    values.push(a);
    for _ in 0..steps {
        a = f_step(a, params.eta);
        values.push(a);
    }
    BoundCurve {
        values,
        samples_per_step: params.order,
    }
}

/// Lower bound on the normalized error of offline regularized least squares
/// after `s` samples: `(1 − (s/L)·a0/(1+a0))·a0` for `s ≤ L` and
/// `L·a0/(s·a0 + L)` for `s ≥ L`. The branches agree at `s = L`.
pub fn offline_bound(a0: f64, dim: usize, s: f64) -> f64 {
    let l = dim as f64;
    if s <= l {
        (1.0 - (s / l) * a0 / (1.0 + a0)) * a0
    } else {
        l * a0 / (s * a0 + l)
    }
}

/// Generalized regularized least-squares estimator
/// `w = w0 + X·(δ·I_s + XᵀX)⁻¹·(y − Xᵀw0)` for an L×s data matrix.
///
/// The solve runs on the smaller of the s×s Gram and its L×L dual
/// `(δ·I_L + XXᵀ)`; at `δ = 0` a rank-deficient system falls back to the
/// minimum-norm (pseudo-inverse) solution. The dense system is guarded by
/// `size_cap`.
pub fn offline_regularized_ls(
    x: &Mat,
    y: &[f64],
    w0: &[f64],
    delta: f64,
    size_cap: usize,
) -> Result<Vec<f64>> {
    let (l, s) = (x.rows(), x.cols());
    if y.len() != s {
        return Err(Error::Dimension {
            expected: s,
            got: y.len(),
        });
    }
    if w0.len() != l {
        return Err(Error::Dimension {
            expected: l,
            got: w0.len(),
        });
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Parameter(format!(
            "regularization must be non-negative, got {delta}"
        )));
    }
    if x.col(0).iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite inputs".into()));
    }
    let small = l.min(s);
    if small > size_cap {
        return Err(Error::Config(format!(
            "offline solve materializes a {small}x{small} system; cap is {size_cap}"
        )));
    }
    let mut resid = y.to_vec();
    let xtw0 = x.tr_mat_vec(w0);
    for (r, t) in resid.iter_mut().zip(xtw0) {
        *r -= t;
    }
    let mut w = w0.to_vec();
    if s <= l {
        // Primal s×s Gram system.
        let cols: Vec<&[f64]> = (0..s).map(|j| x.col(j)).collect();
        let mut g = linalg::gram(&cols);
        g.add_diag(delta);
        let z = if delta > 0.0 {
            linalg::solve_spd(g, resid)?
        } else {
            match linalg::solve_spd(g.clone(), resid.clone()) {
                Ok(z) => z,
                Err(_) => linalg::solve_sym_pinv(&g, &resid),
            }
        };
        let step = x.mat_vec(&z);
        linalg::axpy(1.0, &step, &mut w);
    } else {
        // Dual L×L system: (δI_L + XXᵀ)⁻¹·X·resid.
        let mut a = Mat::zeros(l, l);
        for j in 0..s {
            let c = x.col(j);
            for p in 0..l {
                let cp = c[p];
                if cp == 0.0 {
                    continue;
                }
                for q in 0..=p {
                    let v = a.get(p, q) + cp * c[q];
                    a.set(p, q, v);
                    a.set(q, p, v);
                }
            }
        }
        a.add_diag(delta);
        let rhs = x.mat_vec(&resid);
        let z = if delta > 0.0 {
            linalg::solve_spd(a, rhs)?
        } else {
            match linalg::solve_spd(a.clone(), rhs.clone()) {
                Ok(z) => z,
                Err(_) => linalg::solve_sym_pinv(&a, &rhs),
            }
        };
        linalg::axpy(1.0, &z, &mut w);
    }
    Ok(w)
}

/// One-step upper bound of the block-ML recursion given the exact
/// misalignment `r`.
pub fn theorem1_step_bound(
    r: f64,
    dim: usize,
    order: usize,
    sigma_x: f64,
    sigma_z: f64,
) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Parameter(format!(
            "misalignment must be non-negative and finite, got {r}"
        )));
    }
    if !(sigma_x > 0.0) || !(sigma_z >= 0.0) {
        return Err(Error::Parameter(
            "need sigma_x > 0 and sigma_z >= 0".into(),
        ));
    }
    let gamma = gamma_l(dim, order)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let l = dim as f64;
    let p = order as f64;
    let sx2r = sigma_x * sigma_x * r;
    let factor = 1.0 - (1.0 - gamma) * (p / l) * sx2r / (sigma_z * sigma_z + sx2r);
    Ok(factor * r)
}

/// Deterministic singular-value bounds with their probability guarantee:
/// with probability at least `1 − 2e^{−h/2}`, all singular values of an
/// m×n standard Gaussian matrix lie in `[√n − √m − √h, √n + √m + √h]`.
#[derive(Debug, Clone, Copy)]
pub struct SingularValueBounds {
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
}

pub fn singular_value_bounds(m: usize, n: usize, h: f64) -> SingularValueBounds {
    let (sm, sn, sh) = ((m as f64).sqrt(), (n as f64).sqrt(), h.max(0.0).sqrt());
    SingularValueBounds {
        lower: (sn - sm - sh).max(0.0),
        upper: sn + sm + sh,
        confidence: 1.0 - 2.0 * (-h.max(0.0) / 2.0).exp(),
    }
}

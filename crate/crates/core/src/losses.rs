//! Surrogate losses and their subgradients.
//!
//! `C_Δ(t; y) = ½(Δ|t| − y·t)` is a Leaky-ReLU of `−t·y`. It is convex in `t`
//! and affine in `y`, which is what lets the bandit learner debias it by
//! averaging over fake reward vectors.

use crate::types::{Context, Label, RewardVector, WeightVector};
use crate::vector::{axpy, dot, norm};
use crate::{Error, Result};

/// A loss value together with one subgradient at the evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub value: f64,
    pub subgrad: Vec<f64>,
}

impl LossEval {
    pub fn zero(d: usize) -> Self {
        Self {
            value: 0.0,
            subgrad: vec![0.0; d],
        }
    }
}

/// `+1` for `t ≥ 0`, `−1` otherwise.
#[inline]
pub fn sign_of(t: f64) -> f64 {
    Label::from_score(t).value()
}

/// `LeakyReLU_λ(t) = (1−λ)·t·1{t>0} + λ·t·1{t<0}`.
#[inline]
pub fn leaky_relu(lambda: f64, t: f64) -> f64 {
    if t > 0.0 {
        (1.0 - lambda) * t
    } else if t < 0.0 {
        lambda * t
    } else {
        0.0
    }
}

/// `C_Δ(t; y) = ½(Δ|t| − y·t)`. `y` may be any real (reward differences).
#[inline]
pub fn c_delta(delta: f64, t: f64, y: f64) -> f64 {
    0.5 * (delta * t.abs() - y * t)
}

/// Derivative of [`c_delta`] in `t`; at the kink `t = 0` the subgradient
/// `−y/2` is used.
#[inline]
pub fn c_delta_subgrad(delta: f64, t: f64, y: f64) -> f64 {
    let s = if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    };
    0.5 * (delta * s - y)
}

/// The margin-reweighted round loss
/// `ℓ(w) = C_Δ̃(w·x; y) / max(|w_ref·x|, τ)`.
///
/// `w_ref` is the current iterate and enters only through the constant
/// denominator.
pub fn reweighted_loss(
    w: &WeightVector,
    x: &[f64],
    y: Label,
    w_ref: &WeightVector,
    tau: f64,
    delta_tilde: f64,
) -> Result<LossEval> {
    if !(tau > 0.0) {
        return Err(Error::param("tau", format!("{tau} must be positive")));
    }
    w.check_dim(x)?;
    w_ref.check_dim(x)?;
    let denom = w_ref.dot(x).abs().max(tau);
    let t = w.dot(x);
    let yv = y.value();
    let value = c_delta(delta_tilde, t, yv) / denom;
    let g = c_delta_subgrad(delta_tilde, t, yv) / denom;
    Ok(LossEval {
        value,
        subgrad: x.iter().map(|xi| g * xi).collect(),
    })
}

/// Parameters of the k-arm loss `G(w; X, v, r, α)`.
#[derive(Debug, Clone, Copy)]
pub struct GLossParams<'a> {
    pub context: &'a Context,
    /// Reference vector; `0` selects the linear branch.
    pub v: &'a WeightVector,
    /// True or fake rewards. Fake rewards may exceed the reward cap.
    pub rewards: &'a RewardVector,
    /// Chosen arm (0-based).
    pub alpha: usize,
    pub delta: f64,
    pub rho: f64,
    pub lambda_cap: f64,
}

impl GLossParams<'_> {
    fn validate(&self, w: &WeightVector) -> Result<()> {
        let k = self.context.arms();
        if self.alpha >= k {
            return Err(Error::IndexOutOfRange {
                index: self.alpha,
                len: k,
            });
        }
        if self.rewards.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: self.rewards.len(),
            });
        }
        if !(self.rho > 0.0) {
            return Err(Error::param(
                "rho",
                format!("{} must be positive", self.rho),
            ));
        }
        if !(self.lambda_cap > 0.0) {
            return Err(Error::param(
                "lambda_cap",
                format!("{} must be positive", self.lambda_cap),
            ));
        }
        let d = self.context.dim();
        if w.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: w.dim(),
            });
        }
        if self.v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.v.dim(),
            });
        }
        Ok(())
    }

    /// The shifted differences `z_j = X_{α−j} + ρ·sign(X_{α−j}·v)·v/‖v‖` for
    /// every `j ≠ α`, paired with `j`. Requires `v ≠ 0`.
    pub fn shifted_differences(&self) -> Vec<(usize, Vec<f64>)> {
        let v = self.v.coords();
        let v_norm = norm(v);
        (0..self.context.arms())
            .filter(|&j| j != self.alpha)
            .map(|j| {
                let mut z = self.context.diff(self.alpha, j);
                let s = sign_of(dot(&z, v));
                axpy(self.rho * s / v_norm, v, &mut z);
                (j, z)
            })
            .collect()
    }
}

/// The k-arm surrogate loss `G(w; X, v, r, α)`.
///
/// With `y_j = r_α − r_j`: if `v = 0` the loss is `−Λ Σ_{j≠α} (w·X_{α−j})·y_j`;
/// otherwise it is `Σ_{j≠α} C_Δ(w·z_j; y_j) / |v·z_j|`. Since
/// `v·z_j = sign(v·X_{α−j})(|v·X_{α−j}| + ρ‖v‖)`, the denominators are at
/// least `ρ‖v‖ > 0`.
pub fn g_loss(w: &WeightVector, p: &GLossParams<'_>) -> Result<LossEval> {
    p.validate(w)?;
    let d = w.dim();
    let r_alpha = p.rewards.get(p.alpha);
    let mut out = LossEval::zero(d);

    if p.v.is_zero() {
        for j in (0..p.context.arms()).filter(|&j| j != p.alpha) {
            let y = r_alpha - p.rewards.get(j);
            let diff = p.context.diff(p.alpha, j);
            out.value -= p.lambda_cap * w.dot(&diff) * y;
            axpy(-p.lambda_cap * y, &diff, &mut out.subgrad);
        }
        return Ok(out);
    }

    for (j, z) in p.shifted_differences() {
        let y = r_alpha - p.rewards.get(j);
        let denom = p.v.dot(&z).abs();
        let t = w.dot(&z);
        out.value += c_delta(p.delta, t, y) / denom;
        axpy(c_delta_subgrad(p.delta, t, y) / denom, &z, &mut out.subgrad);
    }
    Ok(out)
}

/// Lipschitz constant `2Mk·max(Λ, 1/ρ)` of `G` for rewards in `[0, M]` and a
/// unit reference vector.
pub fn g_loss_lipschitz(reward_cap: f64, k: usize, lambda_cap: f64, rho: f64) -> f64 {
    2.0 * reward_cap * k as f64 * lambda_cap.max(1.0 / rho)
}

//! Projected online gradient descent on a Euclidean ball.

use serde::{Deserialize, Serialize};

use crate::types::WeightVector;
use crate::vector::{axpy, norm};
use crate::{Error, Result};

/// Fixed OGD step `D/(G·√T)` for a domain of diameter `D` and gradient bound `G`.
pub fn step_size(diameter: f64, lipschitz: f64, horizon: u64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::param(
            "diameter",
            format!("{diameter} must be positive"),
        ));
    }
    if !(lipschitz > 0.0) {
        return Err(Error::param(
            "lipschitz",
            format!("{lipschitz} must be positive"),
        ));
    }
    if horizon < 1 {
        return Err(Error::param("t_horizon", "must be at least 1"));
    }
    Ok(diameter / (lipschitz * (horizon as f64).sqrt()))
}

/// Euclidean projection onto the ball of the given radius.
pub fn project_ball(mut w: Vec<f64>, radius: f64) -> Vec<f64> {
    let n = norm(&w);
    if n > radius {
        let s = radius / n;
        w.iter_mut().for_each(|v| *v *= s);
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgdState {
    w: WeightVector,
    step: f64,
    radius: f64,
    round: u64,
    cumulative_loss: f64,
}

impl OgdState {
    pub fn new(w0: WeightVector, step: f64, radius: f64) -> Result<Self> {
        if !(step >= 0.0 && step.is_finite()) {
            return Err(Error::param(
                "step",
                format!("{step} must be finite and >= 0"),
            ));
        }
        if !(radius > 0.0) {
            return Err(Error::param(
                "domain_radius",
                format!("{radius} must be positive"),
            ));
        }
        Ok(Self {
            w: WeightVector::new(project_ball(w0.into_inner(), radius)),
            step,
            radius,
            round: 0,
            cumulative_loss: 0.0,
        })
    }

    pub fn w(&self) -> &WeightVector {
        &self.w
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.cumulative_loss
    }

    /// `w ← Π(w − step·g)`, charging `loss` (the round loss at the pre-update
    /// iterate) to the running total.
    pub fn update(&mut self, subgrad: &[f64], loss: f64) -> Result<()> {
        if subgrad.len() != self.w.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.w.dim(),
                got: subgrad.len(),
            });
        }
        let mut next = self.w.coords().to_vec();
        axpy(-self.step, subgrad, &mut next);
        self.w = WeightVector::new(project_ball(next, self.radius));
        self.round += 1;
        self.cumulative_loss += loss;
        Ok(())
    }
}

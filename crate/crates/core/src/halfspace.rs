//! Online halfspace learner for Massart label noise.
//!
//! Each round the learner predicts `sign(w·x)`, observes the label, and takes
//! one OGD step on `C_Δ̃(w·x; y) / max(|w^{(t)}·x|, τ)`, whether or not the
//! prediction was correct.

use crate::config::HalfspaceConfig;
use crate::losses::reweighted_loss;
use crate::optimizer::OgdState;
use crate::types::{Label, WeightVector};
use crate::{Error, Result};

/// What happened in one observed round.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceStep {
    pub prediction: Label,
    pub score: f64,
    pub mistake: bool,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct HalfspaceLearner {
    ogd: OgdState,
    config: HalfspaceConfig,
    mistakes: u64,
    round: u64,
}

impl HalfspaceLearner {
    /// Starts at `w⁽⁰⁾ = e₁`.
    pub fn new(config: HalfspaceConfig) -> Result<Self> {
        let ogd = OgdState::new(
            WeightVector::e1(config.d),
            config.params.step_size,
            config.domain_radius,
        )?;
        Ok(Self {
            ogd,
            config,
            mistakes: 0,
            round: 0,
        })
    }

    pub fn config(&self) -> &HalfspaceConfig {
        &self.config
    }

    pub fn w(&self) -> &WeightVector {
        self.ogd.w()
    }

    pub fn mistakes(&self) -> u64 {
        self.mistakes
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn ogd(&self) -> &OgdState {
        &self.ogd
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.ogd.w().check_dim(x)?;
        Ok(Label::from_score(self.ogd.w().dot(x)))
    }

    pub fn observe(&mut self, x: &[f64], y: Label) -> Result<HalfspaceStep> {
        if self.round >= self.config.horizon {
            return Err(Error::HorizonExceeded {
                horizon: self.config.horizon,
            });
        }
        let prediction = self.predict(x)?;
        let w = self.ogd.w().clone();
        let p = &self.config.params;
        let loss = reweighted_loss(&w, x, y, &w, p.tau, p.delta_tilde)?;
        self.ogd.update(&loss.subgrad, loss.value)?;
        let mistake = prediction != y;
        self.mistakes += u64::from(mistake);
        self.round += 1;
        Ok(HalfspaceStep {
            prediction,
            score: w.dot(x),
            mistake,
            loss: loss.value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{HalfspaceConfig, HalfspaceParams};
    use approx::assert_relative_eq;

    fn pinned(d: usize, horizon: u64, tau: f64, delta_tilde: f64, step: f64) -> HalfspaceConfig {
        let mut cfg = HalfspaceConfig::new(d, horizon, 0.1, 0.2, 0.0, 0).unwrap();
        cfg.params = HalfspaceParams {
            epsilon: cfg.params.epsilon,
            delta_tilde,
            tau,
            step_size: step,
            epsilon_clamped: false,
        };
        cfg
    }

    #[test]
    fn predict_examples() {
        let l = HalfspaceLearner::new(pinned(2, 10, 0.1, 0.4, 0.2)).unwrap();
        assert_eq!(l.predict(&[0.5, 0.1]).unwrap(), Label::Pos);
        assert_eq!(l.predict(&[0.0, 0.7]).unwrap(), Label::Pos);
        assert_eq!(l.predict(&[-0.5, 0.0]).unwrap(), Label::Neg);
        assert!(l.predict(&[1.0]).is_err());
    }

    #[test]
    fn one_full_update() {
        let mut l = HalfspaceLearner::new(pinned(2, 10, 0.1, 0.4, 0.2)).unwrap();
        let step = l.observe(&[0.5, 0.0], Label::Neg).unwrap();
        assert!(step.mistake);
        // subgrad = ½(0.4 + 1)/0.5 · x = (0.7, 0)
        assert_relative_eq!(l.w().coords()[0], 0.86, epsilon = 1e-15);
        assert_eq!(l.w().coords()[1], 0.0);
        assert_eq!(l.mistakes(), 1);
        assert_eq!(l.round(), 1);
    }

    #[test]
    fn updates_even_when_correct() {
        let mut l = HalfspaceLearner::new(pinned(2, 10, 0.1, 0.4, 0.2)).unwrap();
        let before = l.w().clone();
        let step = l.observe(&[0.3, 0.4], Label::Pos).unwrap();
        assert!(!step.mistake);
        assert_eq!(l.mistakes(), 0);
        assert_ne!(l.w(), &before);
    }

    #[test]
    fn zero_input_is_a_no_op() {
        let mut l = HalfspaceLearner::new(pinned(3, 10, 0.1, 0.4, 0.2)).unwrap();
        let step = l.observe(&[0.0; 3], Label::Neg).unwrap();
        assert_eq!(step.loss, 0.0);
        assert_eq!(l.w(), &WeightVector::e1(3));
    }

    #[test]
    fn horizon_is_enforced() {
        let mut l = HalfspaceLearner::new(pinned(2, 2, 0.1, 0.4, 0.2)).unwrap();
        l.observe(&[0.5, 0.0], Label::Pos).unwrap();
        l.observe(&[0.5, 0.0], Label::Pos).unwrap();
        assert!(matches!(
            l.observe(&[0.5, 0.0], Label::Pos),
            Err(Error::HorizonExceeded { horizon: 2 })
        ));
    }

    #[test]
    fn logged_prediction_matches_recomputation() {
        let mut l = HalfspaceLearner::new(pinned(2, 100, 0.05, 0.5, 0.1)).unwrap();
        let xs = [[0.3, -0.9], [-0.6, 0.2], [0.1, 0.1], [0.0, -0.4]];
        for (i, x) in xs.iter().cycle().take(40).enumerate() {
            let before = l.predict(x).unwrap();
            let y = if i % 3 == 0 { Label::Neg } else { Label::Pos };
            let step = l.observe(x, y).unwrap();
            assert_eq!(step.prediction, before);
            assert!(l.mistakes() <= l.round());
        }
    }
}

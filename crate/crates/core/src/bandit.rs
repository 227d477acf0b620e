//! Contextual bandit learner for monotone rewards.
//!
//! Plays the arm with the highest linear score. With probability `q` it
//! instead explores a uniform arm `β`, rebuilds a fake full reward vector from
//! that single observation, and takes an OGD step on `G/q` evaluated with the
//! fake rewards. The fake rewards average (over `β`) to the true reward
//! differences, so the step follows an unbiased estimate of the
//! full-information loss.

use rand::Rng;

use crate::config::{BanditConfig, SimRng};
use crate::losses::{g_loss, GLossParams, LossEval};
use crate::optimizer::OgdState;
use crate::types::{Context, Label, RewardVector, WeightVector};
use crate::vector::scaled;
use crate::{Error, Result};

/// Arm chosen by `argmax_i w·x_i` (lowest index on ties), or uniformly at
/// random when `w` is exactly zero.
pub fn select_action<R: Rng + ?Sized>(w: &WeightVector, x: &Context, rng: &mut R) -> Result<usize> {
    let k = x.arms();
    if k == 0 {
        return Err(Error::param("context", "context has no arms"));
    }
    w.check_dim(x.column(0))?;
    if w.is_zero() {
        return Ok(rng.random_range(0..k));
    }
    let mut best = 0;
    let mut best_score = w.dot(x.column(0));
    for i in 1..k {
        let s = w.dot(x.column(i));
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    Ok(best)
}

/// Fake reward vector built from the single observed reward `r_β`: entry `β`
/// is `(k−1)·r_β`, every other entry is `M − r_β`.
pub fn fake_rewards(k: usize, reward_cap: f64, beta: usize, r_beta: f64) -> Result<RewardVector> {
    if beta >= k {
        return Err(Error::IndexOutOfRange {
            index: beta,
            len: k,
        });
    }
    let other = reward_cap - r_beta;
    let mut v = vec![other; k];
    v[beta] = (k as f64 - 1.0) * r_beta;
    Ok(RewardVector::unchecked(v))
}

/// Maps a labelled example to a 2-arm round: context `(x, −x)` and rewards
/// `((1+y)/2, (1−y)/2)`.
pub fn reduce_classification_to_bandit(x: &[f64], y: Label) -> (Context, RewardVector) {
    let ctx = Context::new(vec![x.to_vec(), scaled(-1.0, x)]).expect("two equal-length columns");
    let yv = y.value();
    let r = RewardVector::unchecked(vec![(1.0 + yv) / 2.0, (1.0 - yv) / 2.0]);
    (ctx, r)
}

/// The learner's view of one round's feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditFeedback {
    pub observed_reward: f64,
    pub played_arm: usize,
    pub explored: bool,
    pub explore_arm: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditStep {
    /// Greedy arm `α`.
    pub alpha: usize,
    /// Score `w·x_α` of the greedy arm.
    pub score: f64,
    pub feedback: BanditFeedback,
    /// Value of the (scaled) round loss at the pre-update iterate.
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct BanditLearner {
    ogd: OgdState,
    config: BanditConfig,
    round: u64,
    cumulative_reward: f64,
    exploration_count: u64,
}

impl BanditLearner {
    /// Starts at `w⁽⁰⁾ = e₁`.
    pub fn new(config: BanditConfig) -> Result<Self> {
        let ogd = OgdState::new(
            WeightVector::e1(config.d),
            config.params.step_size,
            config.domain_radius,
        )?;
        Ok(Self {
            ogd,
            config,
            round: 0,
            cumulative_reward: 0.0,
            exploration_count: 0,
        })
    }

    pub fn config(&self) -> &BanditConfig {
        &self.config
    }

    pub fn w(&self) -> &WeightVector {
        self.ogd.w()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    pub fn exploration_count(&self) -> u64 {
        self.exploration_count
    }

    /// The exploration round loss `G(·; X, w^{(t)}, r̃, α)/q` for a given
    /// explored arm, evaluated at `w`.
    pub fn exploration_loss(
        &self,
        w: &WeightVector,
        context: &Context,
        alpha: usize,
        fake: &RewardVector,
    ) -> Result<LossEval> {
        let p = &self.config.params;
        let params = GLossParams {
            context,
            v: self.ogd.w(),
            rewards: fake,
            alpha,
            delta: self.config.delta,
            rho: p.rho,
            lambda_cap: p.lambda_cap,
        };
        let mut l = g_loss(w, &params)?;
        l.value /= p.q;
        l.subgrad.iter_mut().for_each(|g| *g /= p.q);
        Ok(l)
    }

    /// Plays one round. `reward_of(i)` reveals the reward of arm `i` and is
    /// called exactly once.
    pub fn play<F>(
        &mut self,
        context: &Context,
        mut reward_of: F,
        rng: &mut SimRng,
    ) -> Result<BanditStep>
    where
        F: FnMut(usize) -> f64,
    {
        if self.round >= self.config.horizon {
            return Err(Error::HorizonExceeded {
                horizon: self.config.horizon,
            });
        }
        let k = context.arms();
        if k != self.config.k {
            return Err(Error::DimensionMismatch {
                expected: self.config.k,
                got: k,
            });
        }
        let cap = self.config.reward_cap;
        let check = |r: f64| -> Result<f64> {
            if (0.0..=cap).contains(&r) {
                Ok(r)
            } else {
                Err(Error::param("reward", format!("{r} outside [0, {cap}]")))
            }
        };

        let w = self.ogd.w().clone();
        let alpha = select_action(&w, context, rng)?;
        let score = w.dot(context.column(alpha));
        let heads = rng.random::<f64>() < self.config.params.q;

        let (feedback, loss) = if heads {
            let beta = rng.random_range(0..k);
            let r_beta = check(reward_of(beta))?;
            let fake = fake_rewards(k, cap, beta, r_beta)?;
            let loss = self.exploration_loss(&w, context, alpha, &fake)?;
            let fb = BanditFeedback {
                observed_reward: r_beta,
                played_arm: beta,
                explored: true,
                explore_arm: Some(beta),
            };
            (fb, loss)
        } else {
            let r_alpha = check(reward_of(alpha))?;
            let fb = BanditFeedback {
                observed_reward: r_alpha,
                played_arm: alpha,
                explored: false,
                explore_arm: None,
            };
            (fb, LossEval::zero(w.dim()))
        };

        self.ogd.update(&loss.subgrad, loss.value)?;
        self.round += 1;
        self.cumulative_reward += feedback.observed_reward;
        self.exploration_count += u64::from(feedback.explored);
        Ok(BanditStep {
            alpha,
            score,
            feedback,
            loss: loss.value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{seeded_rng, BanditConfig};
    use approx::assert_relative_eq;

    fn ctx2(a: [f64; 2], b: [f64; 2]) -> Context {
        Context::new(vec![a.to_vec(), b.to_vec()]).unwrap()
    }

    #[test]
    fn argmax_and_ties() {
        let mut rng = seeded_rng(0);
        let w = WeightVector::e1(2);
        assert_eq!(
            select_action(&w, &ctx2([0.9, 0.0], [0.1, 0.0]), &mut rng).unwrap(),
            0
        );
        assert_eq!(
            select_action(&w, &ctx2([0.1, 0.0], [0.9, 0.0]), &mut rng).unwrap(),
            1
        );
        assert_eq!(
            select_action(&w, &ctx2([0.3, 0.5], [0.3, -0.5]), &mut rng).unwrap(),
            0
        );
    }

    #[test]
    fn zero_weight_selects_uniformly() {
        let mut rng = seeded_rng(11);
        let k = 4;
        let ctx = Context::new((0..k).map(|i| vec![i as f64 / 10.0, 0.0]).collect()).unwrap();
        let w = WeightVector::zeros(2);
        let n = 10_000;
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            counts[select_action(&w, &ctx, &mut rng).unwrap()] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() <= 3.0 * sigma, "{c}");
        }
    }

    #[test]
    fn argmax_is_scale_invariant() {
        let mut rng = seeded_rng(1);
        let ctx = Context::new(vec![vec![0.2, -0.4], vec![0.5, 0.1], vec![-0.3, 0.6]]).unwrap();
        let w = WeightVector::new(vec![0.3, 0.7]);
        let a = select_action(&w, &ctx, &mut rng).unwrap();
        for c in [1e-6, 0.5, 3.0] {
            let cw = WeightVector::new(scaled(c, w.coords()));
            assert_eq!(select_action(&cw, &ctx, &mut rng).unwrap(), a);
        }
    }

    #[test]
    fn fake_reward_examples() {
        let r = fake_rewards(3, 1.0, 1, 0.4).unwrap();
        for (got, want) in r.as_slice().iter().zip([0.6, 0.8, 0.6]) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
        assert_eq!(
            fake_rewards(2, 1.0, 0, 0.0).unwrap().as_slice(),
            &[0.0, 1.0]
        );
        assert_eq!(
            fake_rewards(2, 1.0, 0, 1.0).unwrap().as_slice(),
            &[1.0, 0.0]
        );
        assert!(fake_rewards(2, 1.0, 2, 0.5).is_err());
    }

    #[test]
    fn reduction_examples() {
        let (ctx, r) = reduce_classification_to_bandit(&[0.3, -0.4], Label::Pos);
        assert_eq!(ctx.column(1), &[-0.3, 0.4]);
        assert_eq!(r.as_slice(), &[1.0, 0.0]);
        let (_, r) = reduce_classification_to_bandit(&[0.3, -0.4], Label::Neg);
        assert_eq!(r.as_slice(), &[0.0, 1.0]);
        let (ctx, _) = reduce_classification_to_bandit(&[0.0, 0.0], Label::Neg);
        assert_eq!(ctx.column(0), ctx.column(1));
    }

    fn config(q: f64) -> BanditConfig {
        BanditConfig::new(2, 2, 100, 0.2, 0.5, 1.0, 0, 1.0)
            .unwrap()
            .with_exploration(q)
            .unwrap()
    }

    #[test]
    fn no_exploration_never_moves() {
        let mut l = BanditLearner::new(config(0.0)).unwrap();
        let mut rng = seeded_rng(3);
        let ctx = ctx2([0.6, 0.0], [0.1, 0.2]);
        for _ in 0..50 {
            let s = l.play(&ctx, |i| [0.2, 0.9][i], &mut rng).unwrap();
            assert!(!s.feedback.explored);
            assert_eq!(s.feedback.played_arm, 0);
        }
        assert_eq!(l.w(), &WeightVector::e1(2));
        assert_relative_eq!(l.cumulative_reward(), 10.0, epsilon = 1e-12);
        assert_eq!(l.exploration_count(), 0);
    }

    #[test]
    fn full_exploration_every_round() {
        let mut l = BanditLearner::new(config(1.0)).unwrap();
        let mut rng = seeded_rng(4);
        let ctx = ctx2([0.6, 0.0], [0.1, 0.2]);
        for _ in 0..100 {
            assert!(
                l.play(&ctx, |i| [0.2, 0.9][i], &mut rng)
                    .unwrap()
                    .feedback
                    .explored
            );
        }
        assert_eq!(l.exploration_count(), 100);
        assert!(l.play(&ctx, |_| 0.0, &mut rng).is_err());
    }

    #[test]
    fn one_exploration_round_by_hand() {
        let ctx = ctx2([0.6, 0.0], [0.1, 0.0]);
        let rewards = [1.0, 0.0];
        // find a seed whose exploration draw is arm 0
        let seed = (0..64)
            .find(|&s| {
                let mut probe = BanditLearner::new(config(1.0)).unwrap();
                let mut rng = seeded_rng(s);
                probe
                    .play(&ctx, |i| rewards[i], &mut rng)
                    .unwrap()
                    .feedback
                    .played_arm
                    == 0
            })
            .unwrap();
        let mut l = BanditLearner::new(config(1.0)).unwrap();

        // r̃ = ((k−1)·1, M−1) = (1, 0), y₂ = 1, z₂ = (0.5 + ρ, 0), w·z₂ = |v·z₂|,
        // so loss = ½(Δ−1) = −0.25 and subgrad = −0.25·z₂/(0.5+ρ) = (−0.25, 0)
        let fake = fake_rewards(2, 1.0, 0, 1.0).unwrap();
        assert_eq!(fake.as_slice(), &[1.0, 0.0]);
        let pre = l
            .exploration_loss(&WeightVector::e1(2), &ctx, 0, &fake)
            .unwrap();
        assert_relative_eq!(pre.value, -0.25, epsilon = 1e-15);
        assert_relative_eq!(pre.subgrad[0], -0.25, epsilon = 1e-15);
        assert_eq!(pre.subgrad[1], 0.0);

        let mut rng = seeded_rng(seed);
        let s = l.play(&ctx, |i| rewards[i], &mut rng).unwrap();
        assert_eq!(s.alpha, 0);
        assert_eq!(s.feedback.explore_arm, Some(0));
        assert_relative_eq!(s.loss, -0.25, epsilon = 1e-15);
        // e₁ + 0.25·step·e₁ projects back onto e₁
        assert_eq!(l.w(), &WeightVector::e1(2));
        assert_relative_eq!(l.cumulative_reward(), 1.0);
    }

    #[test]
    fn rejects_out_of_range_rewards() {
        let mut l = BanditLearner::new(config(0.0)).unwrap();
        let mut rng = seeded_rng(0);
        let ctx = ctx2([0.6, 0.0], [0.1, 0.0]);
        assert!(l.play(&ctx, |_| 1.5, &mut rng).is_err());
    }
}

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::bandit::{reduce_classification_to_bandit, BanditLearner};
use crate::config::{
    stream_rng, AdversaryKind, BanditConfig, EnvironmentKind, ExperimentConfig, HalfspaceConfig,
    Stream,
};
use crate::environments::{
    flip_rate, gen_context, gen_margin_example, massart_label, max_monotone_noise,
    sample_monotone_rewards, sample_sorted_rewards, AdversaryStrategy, HiddenTarget,
};
use crate::halfspace::HalfspaceLearner;
use crate::types::{Context, Label, LabeledRound, RewardVector};
use crate::vector::dot;
use crate::{Error, Result};

use super::baselines::Perceptron;
use super::records::{RoundRecord, TranscriptWriter};
use super::report::{Baselines, BoundCheck, ClampFlags, Diagnostics, ExperimentKind, RunReport};

/// A finished run: its report and, when requested, the CSV transcript.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub csv: Option<Vec<u8>>,
}

#[derive(Debug, Clone)]
pub struct HalfspaceExperiment {
    pub config: HalfspaceConfig,
    pub adversary: AdversaryKind,
}

impl HalfspaceExperiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        if cfg.environment != EnvironmentKind::Massart2 {
            return Err(Error::Config(format!(
                "halfspace runs use the massart2 environment, not {:?}",
                cfg.environment
            )));
        }
        Ok(Self {
            config: cfg.halfspace()?,
            adversary: cfg.adversary,
        })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut e = self.clone();
        e.config.seed = seed;
        e
    }
}

fn alignment(w: &[f64], w_star: &[f64]) -> f64 {
    let n = crate::vector::norm(w);
    if n == 0.0 {
        0.0
    } else {
        dot(w, w_star) / n
    }
}

/// Drives the halfspace learner against a Massart adversary for `T` rounds.
///
/// The perceptron and random-play baselines consume the same `(x, y)` stream
/// in lockstep. Every emitted point is re-validated; a violation aborts the
/// run with [`Error::EnvironmentViolation`].
pub fn run_halfspace_experiment(exp: &HalfspaceExperiment, keep_csv: bool) -> Result<RunOutput> {
    let started = Instant::now();
    let cfg = exp.config;
    let strategy = AdversaryStrategy::from(exp.adversary);
    let mut env_rng = stream_rng(cfg.seed, Stream::Environment);
    let mut baseline_rng = stream_rng(cfg.seed, Stream::Baseline);

    let target = HiddenTarget::random(cfg.d, cfg.eta, cfg.gamma, 0.0, 1.0, &mut env_rng)?;
    let mut learner = HalfspaceLearner::new(cfg)?;
    let mut perceptron = Perceptron::new(cfg.d);
    let mut random_mistakes = 0u64;
    let mut flips = 0u64;
    let mut disagreements = 0u64;
    let mut csv = TranscriptWriter::new(keep_csv);

    for round in 1..=cfg.horizon {
        let x = gen_margin_example(strategy, &target, Some(learner.w()), &mut env_rng)?;
        let prediction = learner.predict(&x)?;
        let eta_t = flip_rate(strategy, &target, &x, Some(prediction));
        let y = massart_label(&target, &x, eta_t, &mut env_rng)?;
        let labeled = LabeledRound { x, y };
        labeled
            .validate(Some((target.w_star(), cfg.gamma)))
            .map_err(|detail| Error::EnvironmentViolation { round, detail })?;

        let clean = target.clean_label(&labeled.x);
        flips += u64::from(clean != y);
        disagreements += u64::from(clean != prediction);
        let step = learner.observe(&labeled.x, y)?;
        debug_assert_eq!(step.prediction, prediction);

        perceptron.observe(&labeled.x, y);
        let coin = if baseline_rng.random::<bool>() {
            Label::Pos
        } else {
            Label::Neg
        };
        random_mistakes += u64::from(coin != y);

        csv.push(&RoundRecord {
            round,
            action: step.prediction.as_i64(),
            observed: y.value(),
            score: step.score,
            loss: step.loss,
            explored: false,
            cum_metric: learner.mistakes() as f64,
            w_norm: learner.w().norm(),
        })?;
    }

    let (csv_sha256, csv_bytes) = csv.finish()?;
    let t = cfg.horizon as f64;
    let mistakes = learner.mistakes();
    let excess_scale = t.powf(0.75) / cfg.gamma;
    let report = RunReport {
        experiment: ExperimentKind::Halfspace,
        seed: cfg.seed,
        horizon: cfg.horizon,
        adversary: exp.adversary,
        environment: EnvironmentKind::Massart2,
        halfspace_config: Some(cfg),
        bandit_config: None,
        environment_delta: None,
        total_mistakes: Some(mistakes),
        mistake_rate: Some(mistakes as f64 / t),
        total_reward: None,
        baselines: Baselines {
            random_play: Some(random_mistakes as f64),
            uniform_arm_mean: None,
            perceptron: Some(perceptron.mistakes() as f64),
        },
        bound_check: BoundCheck {
            eta_t: Some(cfg.eta * t),
            mistake_excess_scale: Some(excess_scale),
            normalized_excess: Some((mistakes as f64 - cfg.eta * t) / excess_scale),
            ..BoundCheck::default()
        },
        clamp_flags: ClampFlags {
            epsilon_clamped: cfg.params.epsilon_clamped,
            q_clamped: false,
        },
        diagnostics: Diagnostics {
            label_flips: Some(flips),
            target_disagreements: Some(disagreements),
            final_w_norm: learner.w().norm(),
            final_alignment: alignment(learner.w().coords(), target.w_star()),
            ..Diagnostics::default()
        },
        csv_sha256,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        report,
        csv: csv_bytes,
    })
}

#[derive(Debug, Clone)]
pub struct BanditExperiment {
    pub config: BanditConfig,
    pub environment: EnvironmentKind,
    pub adversary: AdversaryKind,
    /// Massart flip cap, used by the classification reduction.
    pub eta: f64,
    /// Reward margin the environment realises; the learner uses `config.delta`.
    pub environment_delta: f64,
    /// Uniform reward noise amplitude for `monotone_k`; `None` picks the
    /// largest amplitude that never clips.
    pub noise_scale: Option<f64>,
}

impl BanditExperiment {
    /// Builds the run from the flat config. The `reduction2` environment fixes
    /// `k = 2` and the reward margin `Δ = 1 − 2η` for both learner and
    /// environment.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let mut cfg = cfg.clone();
        match cfg.environment {
            EnvironmentKind::Massart2 => {
                return Err(Error::Config(
                    "massart2 is the halfspace environment; bandit runs use sorted_k, monotone_k or reduction2"
                        .into(),
                ))
            }
            EnvironmentKind::Reduction2 => {
                cfg.k = 2;
                cfg.delta = 1.0 - 2.0 * cfg.eta;
            }
            EnvironmentKind::SortedK | EnvironmentKind::MonotoneK => {}
        }
        Ok(Self {
            config: cfg.bandit()?,
            environment: cfg.environment,
            adversary: cfg.adversary,
            eta: cfg.eta,
            environment_delta: cfg.delta,
            noise_scale: None,
        })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut e = self.clone();
        e.config.seed = seed;
        e
    }
}

/// Drives the bandit learner for `T` rounds. The environment keeps every full
/// reward vector privately so the uniform-arm baseline is exact.
pub fn run_bandit_experiment(exp: &BanditExperiment, keep_csv: bool) -> Result<RunOutput> {
    let started = Instant::now();
    let cfg = exp.config;
    let mut env_rng = stream_rng(cfg.seed, Stream::Environment);
    let mut learner_rng = stream_rng(cfg.seed, Stream::Learner);
    let mut baseline_rng = stream_rng(cfg.seed, Stream::Baseline);

    let eta = if exp.environment == EnvironmentKind::Reduction2 {
        exp.eta
    } else {
        0.0
    };
    let target = HiddenTarget::random(
        cfg.d,
        eta,
        cfg.gamma,
        exp.environment_delta,
        cfg.reward_cap,
        &mut env_rng,
    )?;
    let strategy = AdversaryStrategy::from(exp.adversary);
    let noise = exp.noise_scale.unwrap_or_else(|| {
        max_monotone_noise(cfg.k, exp.environment_delta, cfg.reward_cap).max(0.0)
    });

    let mut learner = BanditLearner::new(cfg)?;
    let mut csv = TranscriptWriter::new(keep_csv);
    let mut uniform_mean = 0.0;
    let mut random_play = 0.0;
    let mut greedy_reward = 0.0;
    let mut best_arm = 0.0;
    let mut flips = 0u64;

    for round in 1..=cfg.horizon {
        let (context, rewards): (Context, RewardVector) = match exp.environment {
            EnvironmentKind::MonotoneK => {
                let ctx = gen_context(&target, cfg.k, &mut env_rng)?;
                let r = sample_monotone_rewards(&target, &ctx, noise, &mut env_rng)?;
                (ctx, r)
            }
            EnvironmentKind::SortedK => {
                let ctx = gen_context(&target, cfg.k, &mut env_rng)?;
                let r = sample_sorted_rewards(&target, &ctx, &mut env_rng);
                (ctx, r)
            }
            EnvironmentKind::Reduction2 => {
                let x = gen_margin_example(strategy, &target, Some(learner.w()), &mut env_rng)?;
                let prediction = Label::from_score(learner.w().dot(&x));
                let eta_t = flip_rate(strategy, &target, &x, Some(prediction));
                let y = massart_label(&target, &x, eta_t, &mut env_rng)?;
                flips += u64::from(y != target.clean_label(&x));
                reduce_classification_to_bandit(&x, y)
            }
            EnvironmentKind::Massart2 => {
                return Err(Error::Config("massart2 is not a bandit environment".into()))
            }
        };
        context
            .validate(Some((target.w_star(), cfg.gamma)))
            .and_then(|_| rewards.validate(cfg.reward_cap))
            .map_err(|detail| Error::EnvironmentViolation { round, detail })?;

        uniform_mean += rewards.mean();
        random_play += rewards.get(baseline_rng.random_range(0..cfg.k));
        best_arm += rewards.as_slice().iter().copied().fold(f64::MIN, f64::max);

        let step = learner.play(&context, |i| rewards.get(i), &mut learner_rng)?;
        greedy_reward += rewards.get(step.alpha);

        csv.push(&RoundRecord {
            round,
            action: step.feedback.played_arm as i64 + 1,
            observed: step.feedback.observed_reward,
            score: step.score,
            loss: step.loss,
            explored: step.feedback.explored,
            cum_metric: learner.cumulative_reward(),
            w_norm: learner.w().norm(),
        })?;
    }

    let (csv_sha256, csv_bytes) = csv.finish()?;
    let t = cfg.horizon as f64;
    let k = cfg.k as f64;
    let reward = learner.cumulative_reward();
    let is_reduction = exp.environment == EnvironmentKind::Reduction2;
    let report = RunReport {
        experiment: ExperimentKind::Bandit,
        seed: cfg.seed,
        horizon: cfg.horizon,
        adversary: exp.adversary,
        environment: exp.environment,
        halfspace_config: None,
        bandit_config: Some(cfg),
        environment_delta: Some(exp.environment_delta),
        total_mistakes: None,
        // for the classification reduction, reward = T − mistakes
        mistake_rate: is_reduction.then_some(1.0 - reward / t),
        total_reward: Some(reward),
        baselines: Baselines {
            random_play: Some(random_play),
            uniform_arm_mean: Some(uniform_mean),
            perceptron: None,
        },
        bound_check: BoundCheck {
            eta_t: is_reduction.then_some(exp.eta * t),
            reward_gain_target: Some((1.0 - 1.0 / k) * cfg.delta * t),
            reward_gain: Some(reward - uniform_mean),
            reward_deficit_scale: Some(
                t.powf(5.0 / 6.0) * (k * cfg.delta * cfg.reward_cap.powi(2)).cbrt() / cfg.gamma,
            ),
            ..BoundCheck::default()
        },
        clamp_flags: ClampFlags {
            epsilon_clamped: false,
            q_clamped: cfg.params.q_clamped,
        },
        diagnostics: Diagnostics {
            label_flips: is_reduction.then_some(flips),
            target_disagreements: None,
            exploration_count: Some(learner.exploration_count()),
            greedy_reward: Some(greedy_reward),
            best_arm_reward: Some(best_arm),
            final_w_norm: learner.w().norm(),
            final_alignment: alignment(learner.w().coords(), target.w_star()),
        },
        csv_sha256,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        report,
        csv: csv_bytes,
    })
}

/// Runs one closure per seed in parallel and returns the outputs sorted by seed.
pub fn run_seeds<F>(seeds: &[u64], run: F) -> Result<Vec<(u64, RunOutput)>>
where
    F: Fn(u64) -> Result<RunOutput> + Sync,
{
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.par_iter().map(|&s| run(s).map(|o| (s, o))).collect()
}

use serde::{Deserialize, Serialize};

use crate::config::{AdversaryKind, BanditConfig, EnvironmentKind, HalfspaceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Halfspace,
    Bandit,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// Mistakes (halfspace) or reward (bandit) of uniformly random play.
    pub random_play: Option<f64>,
    /// `Σ_t (1/k) Σ_i r_i^{(t)}`, the expected reward of a uniform arm.
    pub uniform_arm_mean: Option<f64>,
    /// Mistakes of the classic perceptron on the same stream.
    pub perceptron: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// `η·T`, the mistake floor.
    pub eta_t: Option<f64>,
    /// `T^{3/4}/γ`, the scale of the excess-mistake term.
    pub mistake_excess_scale: Option<f64>,
    /// `(M(T) − ηT)·γ/T^{3/4}`.
    pub normalized_excess: Option<f64>,
    /// `(1 − 1/k)·Δ·T`, the asymptotic reward gain over a uniform arm.
    pub reward_gain_target: Option<f64>,
    /// Learner reward minus `uniform_arm_mean`.
    pub reward_gain: Option<f64>,
    /// `T^{5/6}(kΔM²)^{1/3}/γ`, the scale of the reward-gain deficit.
    pub reward_deficit_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampFlags {
    pub epsilon_clamped: bool,
    pub q_clamped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Rounds whose label differs from `sign(w*·x)`.
    pub label_flips: Option<u64>,
    /// Rounds where the learner's prediction differs from `sign(w*·x)`.
    pub target_disagreements: Option<u64>,
    pub exploration_count: Option<u64>,
    /// `Σ_t r_{α^{(t)}}`, the reward of the greedy arm whether or not it was played.
    pub greedy_reward: Option<f64>,
    /// `Σ_t max_i r_i^{(t)}`.
    pub best_arm_reward: Option<f64>,
    pub final_w_norm: f64,
    /// Cosine between the final iterate and the hidden target.
    pub final_alignment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub horizon: u64,
    pub adversary: AdversaryKind,
    pub environment: EnvironmentKind,
    pub halfspace_config: Option<HalfspaceConfig>,
    pub bandit_config: Option<BanditConfig>,
    /// Reward margin of the environment (may differ from the learner's `Δ`).
    pub environment_delta: Option<f64>,
    pub total_mistakes: Option<u64>,
    pub mistake_rate: Option<f64>,
    pub total_reward: Option<f64>,
    pub baselines: Baselines,
    pub bound_check: BoundCheck,
    pub clamp_flags: ClampFlags,
    pub diagnostics: Diagnostics,
    pub csv_sha256: String,
    /// Excluded from reproducibility comparisons.
    pub wall_time_secs: f64,
}

impl RunReport {
    /// Copy with the wall-clock field zeroed, for byte-level comparisons.
    pub fn without_wall_time(&self) -> Self {
        Self {
            wall_time_secs: 0.0,
            ..self.clone()
        }
    }

    /// Mistakes for halfspace runs, reward for bandit runs.
    pub fn headline(&self) -> f64 {
        match self.experiment {
            ExperimentKind::Halfspace => self.total_mistakes.unwrap_or(0) as f64,
            ExperimentKind::Bandit => self.total_reward.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds: Vec<u64>,
    pub mean_mistake_rate: Option<f64>,
    pub mean_total_mistakes: Option<f64>,
    pub mean_total_reward: Option<f64>,
    pub mean_reward_gain: Option<f64>,
    pub mean_normalized_excess: Option<f64>,
    pub mean_perceptron_mistakes: Option<f64>,
    pub mean_random_play: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeedReport {
    pub aggregate: Aggregate,
    pub runs: Vec<RunReport>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty())
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Order-independent aggregation: runs are sorted by seed before summing.
pub fn aggregate(mut runs: Vec<RunReport>) -> MultiSeedReport {
    runs.sort_by_key(|r| r.seed);
    let aggregate = Aggregate {
        seeds: runs.iter().map(|r| r.seed).collect(),
        mean_mistake_rate: mean_of(runs.iter().map(|r| r.mistake_rate)),
        mean_total_mistakes: mean_of(runs.iter().map(|r| r.total_mistakes.map(|m| m as f64))),
        mean_total_reward: mean_of(runs.iter().map(|r| r.total_reward)),
        mean_reward_gain: mean_of(runs.iter().map(|r| r.bound_check.reward_gain)),
        mean_normalized_excess: mean_of(runs.iter().map(|r| r.bound_check.normalized_excess)),
        mean_perceptron_mistakes: mean_of(runs.iter().map(|r| r.baselines.perceptron)),
        mean_random_play: mean_of(runs.iter().map(|r| r.baselines.random_play)),
    };
    MultiSeedReport { aggregate, runs }
}

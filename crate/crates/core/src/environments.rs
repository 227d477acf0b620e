//! Adversaries, Massart label channels and reward families.
//!
//! Every generator here emits data satisfying the promises the learners rely
//! on: points in the unit ball with `|w*·x| ≥ γ`, contexts whose `w*`-scores
//! are pairwise `γ` apart, labels that disagree with `sign(w*·x)` with
//! probability at most `η`, and rewards in `[0, M]`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::AdversaryKind;
use crate::types::{Context, Label, RewardVector, WeightVector, GEOMETRY_TOL};
use crate::vector::{axpy, dot, norm, random_in_ball, random_unit, reject, scaled};
use crate::{Error, Result};

/// The hidden ground truth of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenTarget {
    w_star: Vec<f64>,
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub reward_cap: f64,
}

impl HiddenTarget {
    pub fn new(
        w_star: Vec<f64>,
        eta: f64,
        gamma: f64,
        delta: f64,
        reward_cap: f64,
    ) -> Result<Self> {
        let n = norm(&w_star);
        if (n - 1.0).abs() > GEOMETRY_TOL {
            return Err(Error::param("w_star", format!("norm {n} is not 1")));
        }
        if !(0.0..0.5).contains(&eta) {
            return Err(Error::param("eta", format!("{eta} must lie in [0, 1/2)")));
        }
        if !(gamma > 0.0) {
            return Err(Error::param("gamma", format!("{gamma} must be positive")));
        }
        if gamma > 1.0 {
            return Err(Error::Infeasible(format!(
                "margin {gamma} > 1 has no point in the unit ball"
            )));
        }
        if !(delta >= 0.0) {
            return Err(Error::param("delta", format!("{delta} must be >= 0")));
        }
        if !(reward_cap > 0.0) {
            return Err(Error::param(
                "reward_cap",
                format!("{reward_cap} must be positive"),
            ));
        }
        Ok(Self {
            w_star,
            eta,
            gamma,
            delta,
            reward_cap,
        })
    }

    /// Uniformly random unit target.
    pub fn random<R: Rng + ?Sized>(
        d: usize,
        eta: f64,
        gamma: f64,
        delta: f64,
        reward_cap: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let w = random_unit(d, rng);
        let n = norm(&w);
        Self::new(scaled(1.0 / n, &w), eta, gamma, delta, reward_cap)
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    pub fn clean_label(&self, x: &[f64]) -> Label {
        Label::from_score(dot(&self.w_star, x))
    }
}

/// How the adversary picks points and per-round flip rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdversaryStrategy {
    /// Uniform ball point with its `w*` component redrawn in `±[γ, 1]`;
    /// every label flipped with probability exactly `η`.
    IidUniformMargin,
    /// Points on the learner's current decision boundary whenever the margin
    /// promise allows it; flips with probability exactly `η`.
    BoundaryHugging,
    /// Boundary-hugging points; flips (with probability `η`) only rounds the
    /// learner would otherwise get right.
    AdaptiveWorst,
}

impl From<AdversaryKind> for AdversaryStrategy {
    fn from(k: AdversaryKind) -> Self {
        match k {
            AdversaryKind::Iid => Self::IidUniformMargin,
            AdversaryKind::Boundary => Self::BoundaryHugging,
            AdversaryKind::Adaptive => Self::AdaptiveWorst,
        }
    }
}

/// Random vector orthogonal to every unit vector in `basis`, with norm at most
/// `radius`.
fn orthogonal_noise<R: Rng + ?Sized>(
    basis: &[&[f64]],
    radius: f64,
    d: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut u = random_in_ball(d, rng);
    for b in basis {
        u = reject(&u, b);
    }
    scaled(radius, &u)
}

fn iid_margin_point<R: Rng + ?Sized>(target: &HiddenTarget, rng: &mut R) -> Vec<f64> {
    let w_star = target.w_star();
    let a = if target.gamma < 1.0 {
        rng.random_range(target.gamma..=1.0)
    } else {
        1.0
    };
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let radius = (1.0 - a * a).max(0.0).sqrt();
    let mut x = orthogonal_noise(&[w_star], radius, target.dim(), rng);
    axpy(sign * a, w_star, &mut x);
    x
}

/// A point with `|w*·x| = γ` and `|w·x|` as small as the unit ball allows.
fn boundary_point<R: Rng + ?Sized>(
    target: &HiddenTarget,
    w: &WeightVector,
    rng: &mut R,
) -> Vec<f64> {
    let w_star = target.w_star();
    let gamma = target.gamma;
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let w_hat = scaled(1.0 / w.norm(), w.coords());
    let c = dot(&w_hat, w_star);
    let perp = reject(&w_hat, w_star);
    let s = norm(&perp);
    let room = (1.0 - gamma * gamma).max(0.0).sqrt();

    let mut x = scaled(sign * gamma, w_star);
    if s > 1e-12 {
        // a second rejection pass; `perp` loses orthogonality when w ≈ w*
        let p_hat = reject(&scaled(1.0 / s, &perp), w_star);
        let p_hat = scaled(1.0 / norm(&p_hat), &p_hat);
        // w·x = ‖w‖(c·σγ + s·β) vanishes at β = −σγc/s
        let beta = (-sign * gamma * c / s).clamp(-room, room);
        axpy(beta, &p_hat, &mut x);
        let left = (1.0 - gamma * gamma - beta * beta).max(0.0).sqrt();
        let noise = orthogonal_noise(&[w_star, &p_hat], left, target.dim(), rng);
        axpy(1.0, &noise, &mut x);
    } else {
        let noise = orthogonal_noise(&[w_star], room, target.dim(), rng);
        axpy(1.0, &noise, &mut x);
    }
    x
}

/// Emits a point with `‖x‖ ≤ 1` and `|w*·x| ≥ γ`. Boundary strategies fall
/// back to the iid draw when no (nonzero) learner vector is supplied.
pub fn gen_margin_example<R: Rng + ?Sized>(
    strategy: AdversaryStrategy,
    target: &HiddenTarget,
    learner_w: Option<&WeightVector>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if target.gamma > 1.0 {
        return Err(Error::Infeasible(format!("margin {} > 1", target.gamma)));
    }
    if let Some(w) = learner_w {
        if w.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                got: w.dim(),
            });
        }
    }
    Ok(match (strategy, learner_w) {
        (AdversaryStrategy::IidUniformMargin, _) | (_, None) => iid_margin_point(target, rng),
        (_, Some(w)) if w.is_zero() => iid_margin_point(target, rng),
        (_, Some(w)) => boundary_point(target, w, rng),
    })
}

/// `sign(w*·x)`, flipped with probability `eta_t ≤ η`.
pub fn massart_label<R: Rng + ?Sized>(
    target: &HiddenTarget,
    x: &[f64],
    eta_t: f64,
    rng: &mut R,
) -> Result<Label> {
    if !(eta_t >= 0.0 && eta_t <= target.eta) {
        return Err(Error::param(
            "eta_t",
            format!("{eta_t} must lie in [0, {}]", target.eta),
        ));
    }
    let clean = target.clean_label(x);
    Ok(if rng.random::<f64>() < eta_t {
        clean.flipped()
    } else {
        clean
    })
}

/// Per-round flip rate the strategy uses, given the learner's prediction.
pub fn flip_rate(
    strategy: AdversaryStrategy,
    target: &HiddenTarget,
    x: &[f64],
    prediction: Option<Label>,
) -> f64 {
    match (strategy, prediction) {
        (AdversaryStrategy::AdaptiveWorst, Some(p)) => {
            if p == target.clean_label(x) {
                target.eta
            } else {
                0.0
            }
        }
        _ => target.eta,
    }
}

/// `k` arms whose `w*`-scores are pairwise at least `γ` apart, in random order.
pub fn gen_context<R: Rng + ?Sized>(
    target: &HiddenTarget,
    k: usize,
    rng: &mut R,
) -> Result<Context> {
    if k == 0 {
        return Err(Error::param("k", "at least one arm required"));
    }
    let gamma = target.gamma;
    let span = (k as f64 - 1.0) * gamma;
    if span > 2.0 {
        return Err(Error::Infeasible(format!(
            "{k} arms at gap {gamma} need a score range of {span} > 2"
        )));
    }
    // spread the unused score range over k+1 uniform spacings
    let slack = 2.0 - span;
    let weights: Vec<f64> = (0..=k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut scores = Vec::with_capacity(k);
    let mut s = -1.0 + slack * weights[0] / total;
    scores.push(s.clamp(-1.0, 1.0));
    for w in &weights[1..k] {
        s += gamma + slack * w / total;
        scores.push(s.clamp(-1.0, 1.0));
    }

    let w_star = target.w_star();
    let mut columns: Vec<Vec<f64>> = scores
        .iter()
        .map(|&s| {
            let radius = (1.0 - s * s).max(0.0).sqrt();
            let mut x = orthogonal_noise(&[w_star], radius, target.dim(), rng);
            axpy(s, w_star, &mut x);
            x
        })
        .collect();
    columns.shuffle(rng);
    Context::new(columns)
}

/// Rank of every arm by ascending `w*`-score (0 = lowest).
pub fn score_ranks(target: &HiddenTarget, x: &Context) -> Vec<usize> {
    let scores: Vec<f64> = x
        .columns()
        .iter()
        .map(|c| dot(target.w_star(), c))
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0; scores.len()];
    for (rank, &arm) in order.iter().enumerate() {
        ranks[arm] = rank;
    }
    ranks
}

/// Whether `(r_i − r_j)(w*·x_i − w*·x_j) ≥ 0` for every pair.
pub fn is_sorted_by_target(target: &HiddenTarget, x: &Context, r: &RewardVector) -> bool {
    let scores: Vec<f64> = x
        .columns()
        .iter()
        .map(|c| dot(target.w_star(), c))
        .collect();
    (0..scores.len())
        .all(|i| (0..scores.len()).all(|j| (r.get(i) - r.get(j)) * (scores[i] - scores[j]) >= 0.0))
}

/// Noiseless ranking rewards: `k` uniform draws from `[0, M]`, handed out in
/// score order.
pub fn sample_sorted_rewards<R: Rng + ?Sized>(
    target: &HiddenTarget,
    x: &Context,
    rng: &mut R,
) -> RewardVector {
    let m = target.reward_cap;
    let mut draws: Vec<f64> = (0..x.arms()).map(|_| rng.random_range(0.0..=m)).collect();
    draws.sort_by(f64::total_cmp);
    let ranks = score_ranks(target, x);
    RewardVector::unchecked(ranks.iter().map(|&r| draws[r]).collect())
}

/// Largest uniform noise amplitude that keeps every monotone reward inside
/// `[0, M]` for `k` arms at margin `Δ`.
pub fn max_monotone_noise(k: usize, delta: f64, reward_cap: f64) -> f64 {
    (reward_cap - delta * (k as f64 - 1.0)) / 2.0
}

/// Rank-linear rewards `M/2 + Δ·(rank − (k−1)/2)` plus independent uniform
/// noise on `±noise_scale`. Adjacent ranks differ by exactly `Δ` in
/// expectation.
pub fn sample_monotone_rewards<R: Rng + ?Sized>(
    target: &HiddenTarget,
    x: &Context,
    noise_scale: f64,
    rng: &mut R,
) -> Result<RewardVector> {
    let k = x.arms();
    let (m, delta) = (target.reward_cap, target.delta);
    if delta * (k as f64 - 1.0) > m {
        return Err(Error::Infeasible(format!(
            "margin {delta} over {k} arms exceeds reward cap {m}"
        )));
    }
    let max_noise = max_monotone_noise(k, delta, m);
    if !(noise_scale >= 0.0 && noise_scale <= max_noise + 1e-15) {
        return Err(Error::Infeasible(format!(
            "noise {noise_scale} would clip; at most {max_noise} allowed"
        )));
    }
    let ranks = score_ranks(target, x);
    let centre = (k as f64 - 1.0) / 2.0;
    let rewards = ranks
        .iter()
        .map(|&r| {
            let base = m / 2.0 + delta * (r as f64 - centre);
            let noise = if noise_scale > 0.0 {
                rng.random_range(-noise_scale..=noise_scale)
            } else {
                0.0
            };
            (base + noise).clamp(0.0, m)
        })
        .collect();
    Ok(RewardVector::unchecked(rewards))
}

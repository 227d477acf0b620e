//! Automated checks of the structural properties the learners rely on:
//! loss identities, convexity and Lipschitz bounds, the target's negative
//! expected loss, exact debiasing of the fake rewards, and OGD regret.
//!
//! Every check runs from a fixed seed, so a report is reproducible.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::bandit::{fake_rewards, select_action, BanditLearner};
use crate::config::{derive_halfspace_params, seeded_rng, BanditConfig, SimRng};
use crate::environments::{
    gen_context, gen_margin_example, sample_sorted_rewards, AdversaryStrategy, HiddenTarget,
};
use crate::losses::{
    c_delta, g_loss, g_loss_lipschitz, leaky_relu, reweighted_loss, sign_of, GLossParams, LossEval,
};
use crate::optimizer::{step_size, OgdState};
use crate::types::{Context, Label, RewardVector, WeightVector};
use crate::vector::{dot, norm, random_in_ball, random_unit, scaled, sub};
use crate::Result;

/// Signature of a fake-reward builder `(k, M, β, r_β) → r̃`.
pub type FakeRewardFn = fn(usize, f64, usize, f64) -> Result<RewardVector>;

/// Settings of the oracle suite. The defaults reproduce the acceptance
/// sample counts and tolerances.
#[derive(Debug, Clone)]
pub struct OracleSuite {
    pub seed: u64,
    /// Floor `τ` used by the reweighted-loss checks.
    pub tau: f64,
    /// Fake-reward builder under test; swap it to mutation-test the suite.
    pub fake_rewards: FakeRewardFn,
    pub leaky_samples: usize,
    pub convexity_pairs: usize,
    pub target_instances: usize,
    pub debias_instances: usize,
    pub exploration_rounds: u64,
    pub regret_horizons: Vec<u64>,
    /// Regret must stay below `regret_constant·G·D·√T`.
    pub regret_constant: f64,
    pub max_regret_slope: f64,
}

impl Default for OracleSuite {
    fn default() -> Self {
        let tau = derive_halfspace_params(0.1, 0.2, 10_000, 0.0, 1.0)
            .map(|p| p.tau)
            .unwrap_or(1e-3);
        Self {
            seed: 0,
            tau,
            fake_rewards,
            leaky_samples: 100_000,
            convexity_pairs: 10_000,
            target_instances: 10_000,
            debias_instances: 1_000,
            exploration_rounds: 10_000,
            regret_horizons: vec![1_000, 10_000, 100_000],
            regret_constant: 1.5,
            max_regret_slope: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OracleCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&OracleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {:<28} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

type Outcome = std::result::Result<String, String>;
type Check = fn(&OracleSuite, &mut SimRng) -> Outcome;

fn fail<E: fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

/// Runs every check and collects the results. Checks never panic; errors
/// raised by the code under test become failures with the error as detail.
pub fn verify_oracles(suite: &OracleSuite) -> OracleReport {
    let checks: [(&'static str, Check); 13] = [
        ("leaky_relu_equivalence", leaky_relu_equivalence),
        ("c_delta_leaky_relu", c_delta_leaky_relu),
        ("c_delta_affine_in_y", c_delta_affine_in_y),
        ("reweighted_loss_convexity", reweighted_loss_convexity),
        ("g_loss_linear_convexity", |s, r| {
            g_loss_convexity(s, r, false)
        }),
        ("g_loss_shifted_convexity", |s, r| {
            g_loss_convexity(s, r, true)
        }),
        ("g_loss_lipschitz", g_loss_lipschitz_check),
        ("z_sign_preservation", z_sign_preservation),
        ("target_negative_loss", target_negative_loss),
        ("fake_reward_debiasing", fake_reward_debiasing),
        ("fake_reward_differences", fake_reward_differences),
        ("exploration_frequency", exploration_frequency),
        ("argmax_scale_invariance", argmax_scale_invariance),
    ];
    let mut out: Vec<OracleCheck> = checks
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = seeded_rng(suite.seed.wrapping_mul(0x9e37_79b9).wrapping_add(i as u64));
            let (passed, detail) = match check(suite, &mut rng) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            OracleCheck {
                name,
                passed,
                detail,
            }
        })
        .collect();
    let (passed, detail) = match ogd_regret(suite) {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    out.push(OracleCheck {
        name: "ogd_regret",
        passed,
        detail,
    });
    OracleReport { checks: out }
}

fn leaky_relu_equivalence(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..s.leaky_samples {
        let lambda: f64 = rng.random();
        let t = rng.random_range(-10.0..10.0);
        let a = leaky_relu(lambda, t);
        let b = 0.5 * ((1.0 - 2.0 * lambda) * t.abs() + t);
        // the closed form cancels down to λt (t < 0) or (1−λ)t (t > 0), so
        // errors are measured against the size of its terms, |t|, rather
        // than of the result
        let scale = t.abs();
        let rel = if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        };
        worst = worst.max(rel);
    }
    let detail = format!("{} samples, max err/|t| {worst:.2e}", s.leaky_samples);
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c_delta_leaky_relu(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..s.leaky_samples / 10 {
        let delta: f64 = rng.random();
        let t = rng.random_range(-10.0..10.0);
        let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let a = c_delta(delta, t, y);
        let b = leaky_relu((1.0 - delta) / 2.0, -t * y);
        if t != 0.0 {
            worst = worst.max((a - b).abs() / t.abs());
        }
    }
    let detail = format!("max err/|t| {worst:.2e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c_delta_affine_in_y(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..s.leaky_samples / 10 {
        let delta: f64 = rng.random();
        let t = rng.random_range(-5.0..5.0);
        let y1 = rng.random_range(-3.0..3.0);
        let y2 = rng.random_range(-3.0..3.0);
        let a = rng.random_range(-2.0..2.0);
        let b = rng.random_range(-2.0..2.0);
        let lhs = c_delta(delta, t, a * y1 + b * y2);
        let rhs = a * c_delta(delta, t, y1)
            + b * c_delta(delta, t, y2)
            + (1.0 - a - b) * 0.5 * delta * t.abs();
        worst = worst.max((lhs - rhs).abs());
    }
    let detail = format!("max abs err {worst:.2e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Checks `ℓ(u) ≥ ℓ(w) + g(w)·(u−w)` and midpoint convexity for one pair.
fn convex_pair<F>(loss: F, w: &[f64], u: &[f64]) -> std::result::Result<f64, String>
where
    F: Fn(&WeightVector) -> Result<LossEval>,
{
    let wv = WeightVector::new(w.to_vec());
    let uv = WeightVector::new(u.to_vec());
    let mid = WeightVector::new(w.iter().zip(u).map(|(a, b)| 0.5 * (a + b)).collect());
    let lw = loss(&wv).map_err(fail)?;
    let lu = loss(&uv).map_err(fail)?;
    let lm = loss(&mid).map_err(fail)?;
    let subgrad_gap = lw.value + dot(&lw.subgrad, &sub(u, w)) - lu.value;
    let midpoint_gap = lm.value - 0.5 * (lw.value + lu.value);
    Ok(subgrad_gap.max(midpoint_gap))
}

fn verdict_convex(worst: f64, pairs: usize) -> Outcome {
    let detail = format!("{pairs} pairs, worst violation {worst:.2e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reweighted_loss_convexity(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..s.convexity_pairs {
        let d = rng.random_range(2..=8);
        let x = random_in_ball(d, rng);
        let y = if rng.random::<bool>() {
            Label::Pos
        } else {
            Label::Neg
        };
        let w_ref = WeightVector::new(random_in_ball(d, rng));
        let delta_tilde = rng.random_range(0.01..1.0);
        let w = random_in_ball(d, rng);
        let u = random_in_ball(d, rng);
        let gap = convex_pair(
            |v| reweighted_loss(v, &x, y, &w_ref, s.tau, delta_tilde),
            &w,
            &u,
        )?;
        worst = worst.max(gap);
    }
    verdict_convex(worst, s.convexity_pairs)
}

/// A random `G` instance: `d ≤ 8`, `k ≤ 6`, rewards in `[0, M]`, `Δ ≤ M`,
/// `ρ ≤ 1/(k−1)` and a unit (or zero) reference vector.
struct GInstance {
    context: Context,
    v: WeightVector,
    rewards: RewardVector,
    alpha: usize,
    delta: f64,
    rho: f64,
    lambda_cap: f64,
    reward_cap: f64,
}

impl GInstance {
    fn sample(rng: &mut SimRng, shifted: bool) -> Self {
        let d = rng.random_range(2..=8);
        let k = rng.random_range(2..=6);
        let reward_cap = rng.random_range(0.5..2.0);
        let columns = (0..k).map(|_| random_in_ball(d, rng)).collect();
        let context = Context::new(columns).expect("k ≥ 2 equal-length columns");
        let v = if shifted {
            WeightVector::new(random_unit(d, rng))
        } else {
            WeightVector::zeros(d)
        };
        let rewards =
            RewardVector::unchecked((0..k).map(|_| rng.random_range(0.0..=reward_cap)).collect());
        Self {
            context,
            v,
            rewards,
            alpha: rng.random_range(0..k),
            delta: rng.random_range(0.01..=reward_cap),
            rho: rng.random_range(0.01..=1.0 / (k as f64 - 1.0)),
            lambda_cap: rng.random_range(0.5..20.0),
            reward_cap,
        }
    }

    fn params<'a>(&'a self, rewards: &'a RewardVector) -> GLossParams<'a> {
        GLossParams {
            context: &self.context,
            v: &self.v,
            rewards,
            alpha: self.alpha,
            delta: self.delta,
            rho: self.rho,
            lambda_cap: self.lambda_cap,
        }
    }

    fn dim(&self) -> usize {
        self.context.dim()
    }
}

fn g_loss_convexity(s: &OracleSuite, rng: &mut SimRng, shifted: bool) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..s.convexity_pairs {
        let inst = GInstance::sample(rng, shifted);
        let w = random_in_ball(inst.dim(), rng);
        let u = random_in_ball(inst.dim(), rng);
        let p = inst.params(&inst.rewards);
        worst = worst.max(convex_pair(|v| g_loss(v, &p), &w, &u)?);
    }
    verdict_convex(worst, s.convexity_pairs)
}

fn g_loss_lipschitz_check(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst_ratio = 0.0f64;
    for i in 0..s.convexity_pairs {
        let inst = GInstance::sample(rng, i % 2 == 1);
        let w1 = WeightVector::new(random_in_ball(inst.dim(), rng));
        let w2 = WeightVector::new(random_in_ball(inst.dim(), rng));
        let p = inst.params(&inst.rewards);
        let l1 = g_loss(&w1, &p).map_err(fail)?.value;
        let l2 = g_loss(&w2, &p).map_err(fail)?.value;
        let bound = g_loss_lipschitz(
            inst.reward_cap,
            inst.context.arms(),
            inst.lambda_cap,
            inst.rho,
        );
        let dist = norm(&sub(w1.coords(), w2.coords()));
        if (l1 - l2).abs() > bound * dist + 1e-9 {
            return Err(format!(
                "|ΔG| = {:.3e} exceeds {bound:.3e}·{dist:.3e}",
                (l1 - l2).abs()
            ));
        }
        if dist > 0.0 {
            worst_ratio = worst_ratio.max((l1 - l2).abs() / (bound * dist));
        }
    }
    Ok(format!(
        "{} pairs, max |ΔG|/(L‖Δw‖) = {worst_ratio:.3}",
        s.convexity_pairs
    ))
}

fn z_sign_preservation(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut checked = 0usize;
    for _ in 0..s.convexity_pairs / 10 {
        let d = rng.random_range(2..=8);
        let k = rng.random_range(2..=6);
        let gamma = rng.random_range(0.02..(2.0 / (k as f64 - 1.0)).min(1.0));
        let target = HiddenTarget::random(d, 0.0, gamma, 0.0, 1.0, rng).map_err(fail)?;
        let context = gen_context(&target, k, rng).map_err(fail)?;
        let v = WeightVector::new(scaled(rng.random_range(0.1..1.0), &random_unit(d, rng)));
        let rewards = RewardVector::unchecked(vec![0.0; k]);
        for alpha in 0..k {
            let p = GLossParams {
                context: &context,
                v: &v,
                rewards: &rewards,
                alpha,
                delta: 0.5,
                rho: gamma / 2.0,
                lambda_cap: 1.0,
            };
            for (j, z) in p.shifted_differences() {
                let raw = dot(target.w_star(), &context.diff(alpha, j));
                let shifted = dot(target.w_star(), &z);
                if sign_of(raw) != sign_of(shifted) {
                    return Err(format!(
                        "sign flipped: w*·X = {raw:.3e}, w*·z = {shifted:.3e}"
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} differences"))
}

fn target_negative_loss(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..s.target_instances {
        let d = rng.random_range(2..=8);
        let eta = rng.random_range(0.0..0.49);
        let gamma = rng.random_range(0.01..=1.0);
        let target = HiddenTarget::random(d, eta, gamma, 0.0, 1.0, rng).map_err(fail)?;
        let x = gen_margin_example(AdversaryStrategy::IidUniformMargin, &target, None, rng)
            .map_err(fail)?;
        let eta_t = rng.random_range(0.0..=eta);
        let delta = 1.0 - 2.0 * eta;
        let epsilon = rng.random_range(1e-6..delta / 2.0);
        let delta_tilde = delta - epsilon;
        let t = dot(target.w_star(), &x);
        let y = sign_of(t);
        let expected =
            (1.0 - eta_t) * c_delta(delta_tilde, t, y) + eta_t * c_delta(delta_tilde, t, -y);
        worst = worst.max(expected + 0.5 * epsilon * t.abs());
    }
    let detail = format!(
        "{} instances, max E[C] + ε|t|/2 = {worst:.2e}",
        s.target_instances
    );
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fake_reward_debiasing(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..s.debias_instances {
        let inst = GInstance::sample(rng, i % 4 != 0);
        let k = inst.context.arms();
        let w = WeightVector::new(random_in_ball(inst.dim(), rng));
        let q = rng.random_range(0.05..=1.0);
        let truth = g_loss(&w, &inst.params(&inst.rewards)).map_err(fail)?;
        let mut value = 0.0;
        let mut grad = vec![0.0; inst.dim()];
        for beta in 0..k {
            let fake =
                (s.fake_rewards)(k, inst.reward_cap, beta, inst.rewards.get(beta)).map_err(fail)?;
            let l = g_loss(&w, &inst.params(&fake)).map_err(fail)?;
            // HEADS with probability q contributes G/q; TAILS contributes 0.
            value += q * (l.value / q) / k as f64;
            for (g, li) in grad.iter_mut().zip(&l.subgrad) {
                *g += q * (li / q) / k as f64;
            }
        }
        worst = worst.max((value - truth.value).abs());
        worst = worst.max(norm(&sub(&grad, &truth.subgrad)));
    }
    let detail = format!("{} instances, max abs err {worst:.2e}", s.debias_instances);
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fake_reward_differences(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..s.debias_instances {
        let k = rng.random_range(2..=6);
        let cap = rng.random_range(0.5..2.0);
        let r: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=cap)).collect();
        let fakes: Vec<RewardVector> = (0..k)
            .map(|b| (s.fake_rewards)(k, cap, b, r[b]))
            .collect::<Result<_>>()
            .map_err(fail)?;
        for alpha in 0..k {
            for j in 0..k {
                let mean: f64 =
                    fakes.iter().map(|f| f.get(alpha) - f.get(j)).sum::<f64>() / k as f64;
                worst = worst.max((mean - (r[alpha] - r[j])).abs());
            }
        }
    }
    let detail = format!("max abs err {worst:.2e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exploration_frequency(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    let n = s.exploration_rounds;
    let cfg = BanditConfig::new(5, 3, n, 0.2, 0.5, 1.0, s.seed, 1.0).map_err(fail)?;
    let q = cfg.params.q;
    let target = HiddenTarget::random(5, 0.0, 0.2, 0.5, 1.0, rng).map_err(fail)?;
    let mut learner = BanditLearner::new(cfg).map_err(fail)?;
    for _ in 0..n {
        let ctx = gen_context(&target, 3, rng).map_err(fail)?;
        let r = sample_sorted_rewards(&target, &ctx, rng);
        learner.play(&ctx, |i| r.get(i), rng).map_err(fail)?;
    }
    let heads = learner.exploration_count() as f64;
    let mean = q * n as f64;
    let sigma = (n as f64 * q * (1.0 - q)).sqrt();
    let detail = format!(
        "{heads} explorations, expected {mean:.1} ± {:.1}",
        3.0 * sigma
    );
    if (heads - mean).abs() <= 3.0 * sigma {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn argmax_scale_invariance(s: &OracleSuite, rng: &mut SimRng) -> Outcome {
    for _ in 0..s.convexity_pairs {
        let d = rng.random_range(1..=8);
        let k = rng.random_range(2..=6);
        let ctx = Context::new((0..k).map(|_| random_in_ball(d, rng)).collect()).map_err(fail)?;
        let w = random_in_ball(d, rng);
        let c = 10f64.powf(rng.random_range(-3.0..3.0));
        let a = select_action(&WeightVector::new(w.clone()), &ctx, rng).map_err(fail)?;
        let b = select_action(&WeightVector::new(scaled(c, &w)), &ctx, rng).map_err(fail)?;
        if a != b {
            return Err(format!(
                "scaling by {c:.3e} moved the argmax from {a} to {b}"
            ));
        }
    }
    Ok(format!("{} instances", s.convexity_pairs))
}

/// Regret of OGD on `ℓ_t(w) = |w·e₁ − 0.5|` over the unit ball, started at
/// `−e₁`. The comparator `0.5·e₁` has zero loss, so regret is the cumulative
/// loss. `G = 1`, `D = 2`.
pub fn ogd_regret_curve(horizons: &[u64]) -> Result<Vec<(u64, f64)>> {
    horizons
        .iter()
        .map(|&t| {
            let step = step_size(2.0, 1.0, t)?;
            let mut ogd = OgdState::new(WeightVector::new(vec![-1.0, 0.0]), step, 1.0)?;
            for _ in 0..t {
                let w1 = ogd.w().coords()[0];
                let loss = (w1 - 0.5).abs();
                let g = if w1 > 0.5 {
                    1.0
                } else if w1 < 0.5 {
                    -1.0
                } else {
                    0.0
                };
                ogd.update(&[g, 0.0], loss)?;
            }
            Ok((t, ogd.cumulative_loss()))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn ogd_regret(s: &OracleSuite) -> Outcome {
    let curve = ogd_regret_curve(&s.regret_horizons).map_err(fail)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for &(t, regret) in &curve {
        let scale = 2.0 * (t as f64).sqrt();
        ok &= regret <= s.regret_constant * scale;
        parts.push(format!("T={t}: {:.3}·GD√T", regret / scale));
    }
    let slope = if curve.len() >= 2 {
        let pts: Vec<(f64, f64)> = curve.iter().map(|&(t, r)| (t as f64, r)).collect();
        log_log_slope(&pts)
    } else {
        0.0
    };
    ok &= slope <= s.max_regret_slope;
    let detail = format!("{}; slope {slope:.3}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

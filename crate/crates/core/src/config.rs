//! Configuration, parameter schedules and the seeded randomness contract.
//!
//! Every random draw in an experiment comes from a [`SimRng`] derived from the
//! run seed, so a `(config, seed)` pair determines the whole transcript.

use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::optimizer::step_size;
use crate::{Error, Result};

/// Portable, seedable stream cipher RNG. Output is stable across platforms.
pub type SimRng = ChaCha8Rng;

/// Independent sub-streams of one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Environment = 0,
    Learner = 1,
    Baseline = 2,
}

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Gap kept below `(1−2η)/2` when the ε schedule is clamped.
pub const EPSILON_CLAMP_MARGIN: f64 = 1e-6;

/// Derived halfspace-learner parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceParams {
    pub epsilon: f64,
    pub delta_tilde: f64,
    pub tau: f64,
    pub step_size: f64,
    /// The raw `T^{-1/(4+2ζ)}/γ` schedule exceeded the cap and was clamped.
    pub epsilon_clamped: bool,
}

/// `ε = min(T^{-1/(4+2ζ)}/γ, (1−2η)/2 − 10⁻⁶)`, `Δ̃ = 1−2η−ε`,
/// `τ = ε^{1+ζ}γ/4` and the OGD step for gradient bound `1/τ` on a ball of
/// diameter `2·radius`.
pub fn derive_halfspace_params(
    eta: f64,
    gamma: f64,
    horizon: u64,
    zeta: f64,
    domain_radius: f64,
) -> Result<HalfspaceParams> {
    if !(0.0..0.5).contains(&eta) {
        return Err(Error::param("eta", format!("{eta} must lie in [0, 1/2)")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma", format!("{gamma} must lie in (0, 1]")));
    }
    if horizon < 1 {
        return Err(Error::param("t_horizon", "must be at least 1"));
    }
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::param(
            "zeta",
            format!("{zeta} must be finite and >= 0"),
        ));
    }
    if !(domain_radius > 0.0 && domain_radius.is_finite()) {
        return Err(Error::param("domain_radius", "must be positive"));
    }
    let cap = (1.0 - 2.0 * eta) / 2.0 - EPSILON_CLAMP_MARGIN;
    if cap <= 0.0 {
        return Err(Error::param(
            "eta",
            format!("{eta} leaves no room for epsilon"),
        ));
    }
    let raw = (horizon as f64).powf(-1.0 / (4.0 + 2.0 * zeta)) / gamma;
    let (epsilon, epsilon_clamped) = if raw > cap { (cap, true) } else { (raw, false) };
    let delta_tilde = 1.0 - 2.0 * eta - epsilon;
    let tau = epsilon.powf(1.0 + zeta) * gamma / 4.0;
    let step = step_size(2.0 * domain_radius, 1.0 / tau, horizon)?;
    Ok(HalfspaceParams {
        epsilon,
        delta_tilde,
        tau,
        step_size: step,
        epsilon_clamped,
    })
}

/// Derived bandit-learner parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditParams {
    pub rho: f64,
    pub lambda_cap: f64,
    pub q: f64,
    pub step_size: f64,
    /// `M/(γΛΔ)` exceeded 1 and the exploration probability was clamped.
    pub q_clamped: bool,
}

/// `ρ = γ/2`, `Λ = T^{1/6}(M/(kΔ))^{1/3}/γ`, `q = min(1, M/(γΛΔ))` and the OGD
/// step for gradient bound `2Mk·max(Λ, 1/ρ)/q`.
pub fn derive_bandit_params(
    gamma: f64,
    delta: f64,
    reward_cap: f64,
    k: usize,
    horizon: u64,
    domain_radius: f64,
) -> Result<BanditParams> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("{gamma} must be positive")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("{delta} must be positive")));
    }
    if !(reward_cap > 0.0 && reward_cap.is_finite()) {
        return Err(Error::param(
            "reward_cap",
            format!("{reward_cap} must be positive"),
        ));
    }
    if k < 2 {
        return Err(Error::param("k", format!("{k} arms; at least 2 required")));
    }
    if horizon < 1 {
        return Err(Error::param("t_horizon", "must be at least 1"));
    }
    if !(domain_radius > 0.0 && domain_radius.is_finite()) {
        return Err(Error::param("domain_radius", "must be positive"));
    }
    let rho = gamma / 2.0;
    let lambda_cap =
        (horizon as f64).powf(1.0 / 6.0) * (reward_cap / (k as f64 * delta)).cbrt() / gamma;
    let raw_q = reward_cap / (gamma * lambda_cap * delta);
    let (q, q_clamped) = if raw_q > 1.0 {
        (1.0, true)
    } else {
        (raw_q, false)
    };
    let lipschitz = 2.0 * reward_cap * k as f64 * lambda_cap.max(1.0 / rho) / q;
    let step = step_size(2.0 * domain_radius, lipschitz, horizon)?;
    Ok(BanditParams {
        rho,
        lambda_cap,
        q,
        step_size: step,
        q_clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceConfig {
    pub d: usize,
    pub horizon: u64,
    pub eta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub seed: u64,
    pub domain_radius: f64,
    pub params: HalfspaceParams,
}

impl HalfspaceConfig {
    pub fn new(d: usize, horizon: u64, eta: f64, gamma: f64, zeta: f64, seed: u64) -> Result<Self> {
        Self::with_radius(d, horizon, eta, gamma, zeta, seed, 1.0)
    }

    pub fn with_radius(
        d: usize,
        horizon: u64,
        eta: f64,
        gamma: f64,
        zeta: f64,
        seed: u64,
        domain_radius: f64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        let params = derive_halfspace_params(eta, gamma, horizon, zeta, domain_radius)?;
        Ok(Self {
            d,
            horizon,
            eta,
            gamma,
            zeta,
            seed,
            domain_radius,
            params,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub d: usize,
    pub k: usize,
    pub horizon: u64,
    pub gamma: f64,
    pub delta: f64,
    pub reward_cap: f64,
    pub seed: u64,
    pub domain_radius: f64,
    pub params: BanditParams,
}

impl BanditConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        k: usize,
        horizon: u64,
        gamma: f64,
        delta: f64,
        reward_cap: f64,
        seed: u64,
        domain_radius: f64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        let params = derive_bandit_params(gamma, delta, reward_cap, k, horizon, domain_radius)?;
        Ok(Self {
            d,
            k,
            horizon,
            gamma,
            delta,
            reward_cap,
            seed,
            domain_radius,
            params,
        })
    }

    /// Overrides the exploration probability, keeping every other parameter.
    /// Used to pin degenerate regimes (`q = 0` pure exploitation, `q = 1`).
    pub fn with_exploration(mut self, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::param("q", format!("{q} must lie in [0, 1]")));
        }
        self.params.q = q;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Iid,
    Boundary,
    Adaptive,
}

impl FromStr for AdversaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Self::Iid),
            "boundary" => Ok(Self::Boundary),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::Config(format!("unknown adversary `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Massart2,
    SortedK,
    MonotoneK,
    Reduction2,
}

impl FromStr for EnvironmentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "massart2" => Ok(Self::Massart2),
            "sorted_k" => Ok(Self::SortedK),
            "monotone_k" => Ok(Self::MonotoneK),
            "reduction2" => Ok(Self::Reduction2),
            other => Err(Error::Config(format!("unknown environment `{other}`"))),
        }
    }
}

/// The flat key/value experiment configuration shared by the config file and
/// the CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub t_horizon: u64,
    pub eta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub k: usize,
    pub delta: f64,
    pub reward_cap: f64,
    pub seed: u64,
    pub adversary: AdversaryKind,
    pub environment: EnvironmentKind,
    pub domain_radius: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 20,
            t_horizon: 10_000,
            eta: 0.1,
            gamma: 0.2,
            zeta: 0.0,
            k: 3,
            delta: 0.5,
            reward_cap: 1.0,
            seed: 0,
            adversary: AdversaryKind::Iid,
            environment: EnvironmentKind::Massart2,
            domain_radius: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn halfspace(&self) -> Result<HalfspaceConfig> {
        HalfspaceConfig::with_radius(
            self.d,
            self.t_horizon,
            self.eta,
            self.gamma,
            self.zeta,
            self.seed,
            self.domain_radius,
        )
    }

    pub fn bandit(&self) -> Result<BanditConfig> {
        BanditConfig::new(
            self.d,
            self.k,
            self.t_horizon,
            self.gamma,
            self.delta,
            self.reward_cap,
            self.seed,
            self.domain_radius,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = seeded_rng(0);
        let mut b = seeded_rng(0);
        let xa: Vec<u64> = (0..100).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..100).map(|_| b.random()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn distinct_seeds_and_streams_differ() {
        let mut a = seeded_rng(0);
        let mut b = seeded_rng(1);
        let xa: Vec<u64> = (0..100).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..100).map(|_| b.random()).collect();
        assert_ne!(xa, xb);

        let mut e = stream_rng(5, Stream::Environment);
        let mut l = stream_rng(5, Stream::Learner);
        assert_ne!(e.random::<u64>(), l.random::<u64>());
    }

    #[test]
    fn halfspace_schedule_clamped() {
        // raw ε = 10⁻¹/0.2 = 0.5 > 0.4 − 10⁻⁶
        let p = derive_halfspace_params(0.1, 0.2, 10_000, 0.0, 1.0).unwrap();
        assert!(p.epsilon_clamped);
        assert_relative_eq!(p.epsilon, 0.399999, epsilon = 1e-12);
        assert_relative_eq!(p.delta_tilde, 0.400001, epsilon = 1e-12);
        assert_relative_eq!(p.tau, 0.399999 * 0.2 / 4.0, epsilon = 1e-12);
        assert!((p.tau - 0.02).abs() < 1e-6);
        // step = D/(G√T) = 2τ/100
        assert_relative_eq!(p.step_size, 2.0 * p.tau / 100.0, epsilon = 1e-15);
    }

    #[test]
    fn halfspace_schedule_unclamped() {
        let p = derive_halfspace_params(0.25, 0.5, 100_000_000, 0.0, 1.0).unwrap();
        assert!(!p.epsilon_clamped);
        assert_relative_eq!(p.epsilon, 0.02, epsilon = 1e-12);
        assert_relative_eq!(p.delta_tilde, 0.48, epsilon = 1e-12);
        assert_relative_eq!(p.tau, 0.0025, epsilon = 1e-12);
    }

    #[test]
    fn halfspace_noiseless_limit() {
        let p = derive_halfspace_params(0.0, 1.0, 1u64 << 60, 0.0, 1.0).unwrap();
        assert!(p.epsilon < 1e-4);
        assert!(p.delta_tilde > 1.0 - 1e-4);
        assert!(p.tau < 1e-4);
    }

    #[test]
    fn halfspace_schedule_with_zeta() {
        let p = derive_halfspace_params(0.0, 0.5, 1_000_000, 1.0, 1.0).unwrap();
        // ε = 10^{-6/6}/0.5 = 0.2, τ = 0.2²·0.5/4
        assert_relative_eq!(p.epsilon, 0.2, epsilon = 1e-12);
        assert_relative_eq!(p.tau, 0.005, epsilon = 1e-12);
        assert!(p.tau <= p.epsilon * 0.5 / 2.0);
    }

    #[test]
    fn halfspace_schedule_rejects_bad_inputs() {
        assert!(derive_halfspace_params(0.5, 0.2, 10, 0.0, 1.0).is_err());
        assert!(derive_halfspace_params(0.1, 0.0, 10, 0.0, 1.0).is_err());
        assert!(derive_halfspace_params(0.1, -0.3, 10, 0.0, 1.0).is_err());
        assert!(derive_halfspace_params(0.1, 0.2, 0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bandit_schedule() {
        let p = derive_bandit_params(0.2, 0.5, 1.0, 2, 1_000_000, 1.0).unwrap();
        assert_relative_eq!(p.lambda_cap, 50.0, epsilon = 1e-9);
        assert_relative_eq!(p.q, 0.2, epsilon = 1e-12);
        assert_eq!(p.rho, 0.1);
        assert!(!p.q_clamped);
        // G = 2·1·2·max(50, 10)/0.2 = 1000; step = 2/(1000·1000)
        assert_relative_eq!(p.step_size, 2e-6, epsilon = 1e-15);
    }

    #[test]
    fn bandit_schedule_clamps_q() {
        let p = derive_bandit_params(0.01, 0.01, 1.0, 10, 100, 1.0).unwrap();
        assert!(p.q_clamped);
        assert_eq!(p.q, 1.0);
    }

    #[test]
    fn bandit_schedule_rejects_bad_inputs() {
        assert!(derive_bandit_params(1.0, 1.0, 1.0, 1, 10, 1.0).is_err());
        assert!(derive_bandit_params(0.0, 1.0, 1.0, 2, 10, 1.0).is_err());
        assert!(derive_bandit_params(1.0, 0.0, 1.0, 2, 10, 1.0).is_err());
        assert!(derive_bandit_params(1.0, 1.0, -1.0, 2, 10, 1.0).is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let text = r#"
            d = 5
            t_horizon = 1000
            eta = 0.2
            gamma = 0.3
            zeta = 0.0
            k = 4
            delta = 0.25
            reward_cap = 1.0
            seed = 9
            adversary = "boundary"
            environment = "monotone_k"
            domain_radius = 1.0
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.adversary, AdversaryKind::Boundary);
        assert_eq!(cfg.environment, EnvironmentKind::MonotoneK);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(ExperimentConfig::from_toml_str("alpha = 1.0").is_err());
        let partial = ExperimentConfig::from_toml_str("d = 3").unwrap();
        assert_eq!(partial.d, 3);
        assert_eq!(partial.t_horizon, ExperimentConfig::default().t_horizon);
    }
}

use massart_core::harness::{verify_oracles, OracleSuite};
use massart_core::types::RewardVector;
use massart_core::Result;

fn small_suite() -> OracleSuite {
    OracleSuite {
        leaky_samples: 10_000,
        convexity_pairs: 1_000,
        target_instances: 1_000,
        debias_instances: 200,
        regret_horizons: vec![100, 1_000, 10_000],
        ..OracleSuite::default()
    }
}

#[test]
fn default_suite_passes() {
    let report = verify_oracles(&OracleSuite::default());
    assert!(report.passed(), "{report}");
    assert_eq!(report.checks.len(), 14);
}

#[test]
fn suite_passes_across_seeds() {
    for seed in 1..4 {
        let report = verify_oracles(&OracleSuite {
            seed,
            ..small_suite()
        });
        assert!(report.passed(), "seed {seed}:\n{report}");
    }
}

fn off_by_one_fake_rewards(k: usize, cap: f64, beta: usize, r_beta: f64) -> Result<RewardVector> {
    let mut v = vec![cap - r_beta; k];
    v[beta] = k as f64 * r_beta;
    Ok(RewardVector::unchecked(v))
}

#[test]
fn corrupted_fake_rewards_are_caught() {
    let report = verify_oracles(&OracleSuite {
        fake_rewards: off_by_one_fake_rewards,
        ..small_suite()
    });
    assert!(!report.get("fake_reward_debiasing").unwrap().passed);
    assert!(!report.get("fake_reward_differences").unwrap().passed);
    assert!(report.get("leaky_relu_equivalence").unwrap().passed);
}

#[test]
fn zero_tau_surfaces_the_guard() {
    let report = verify_oracles(&OracleSuite {
        tau: 0.0,
        ..small_suite()
    });
    let check = report.get("reweighted_loss_convexity").unwrap();
    assert!(!check.passed);
    assert!(check.detail.contains("tau"), "{}", check.detail);
    assert_eq!(report.failures().count(), 1);
}

#[test]
fn one_third_regret_constant_is_too_tight_for_this_sequence() {
    // The descent from −e₁ alone costs about 0.56·√T; oscillation around the
    // minimiser adds about √T.
    let report = verify_oracles(&OracleSuite {
        regret_constant: 1.0 / 3.0,
        ..small_suite()
    });
    assert!(!report.get("ogd_regret").unwrap().passed);
}

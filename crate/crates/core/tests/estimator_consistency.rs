//! Finite-sample behaviour of the protocol estimators.

use diqkd_core::attack::build_optimal_attack;
use diqkd_core::simproto::{run_model, OutcomeModel, ProtocolConfig};

/// Mean absolute error over 100 seeds stays within a factor 3 of the
/// binomial prediction σ·√(2/π) at every n from 10³ to 10⁶.
#[test]
fn errors_shrink_like_inverse_sqrt_n() {
    let (s, q) = (2.5, 0.05);
    let attack = build_optimal_attack(s, q).unwrap();
    let model = OutcomeModel::from_attack(&attack).unwrap();
    let e = |x, y| model.correlator(x, y);
    let probs = ProtocolConfig::default();
    let (pa, pb) = (probs.setting_probs_alice, probs.setting_probs_bob);

    let mut previous: Option<(f64, f64)> = None;
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let nf = n as f64;
        let sigma_q = (q * (1.0 - q) / (nf * pa[0] * pb[0])).sqrt();
        let var_s: f64 = [(1, 0), (1, 1), (2, 0), (2, 1)]
            .iter()
            .map(|&(x, y)| (1.0 - e(x, y) * e(x, y)) / (nf * pa[x] * pb[y]))
            .sum();
        let sigma_s = var_s.sqrt();

        let (mut err_q, mut err_s) = (0.0, 0.0);
        for seed in 0..100 {
            let config = ProtocolConfig {
                n_rounds: n,
                seed,
                ..ProtocolConfig::default()
            };
            let r = run_model(&model, &config).unwrap().report;
            err_q += (r.qber.value - q).abs() / 100.0;
            err_s += (r.chsh.value - s).abs() / 100.0;
        }
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        let ratio_q = err_q / (sigma_q * expected);
        let ratio_s = err_s / (sigma_s * expected);
        assert!(
            (1.0 / 3.0..=3.0).contains(&ratio_q),
            "n={n}: Q error ratio {ratio_q}"
        );
        assert!(
            (1.0 / 3.0..=3.0).contains(&ratio_s),
            "n={n}: S error ratio {ratio_s}"
        );
        if let Some((pq, ps)) = previous {
            assert!(err_q < pq && err_s < ps, "n={n}: errors did not shrink");
        }
        previous = Some((err_q, err_s));
    }
}

#[test]
fn reported_standard_errors_match_prediction() {
    let attack = build_optimal_attack(2.7, 0.02).unwrap();
    let config = ProtocolConfig {
        n_rounds: 400_000,
        seed: 17,
        ..ProtocolConfig::default()
    };
    let model = OutcomeModel::from_attack(&attack).unwrap();
    let r = run_model(&model, &config).unwrap().report;
    let predicted_q = (0.02f64 * 0.98 / 100_000.0).sqrt();
    assert!(
        (r.qber.se / predicted_q - 1.0).abs() < 0.05,
        "{} vs {predicted_q}",
        r.qber.se
    );
    assert_eq!(
        r.n_key + r.n_discarded + r.n_test.iter().flatten().sum::<u64>(),
        400_000
    );
    let rates = r.key_rates.unwrap();
    assert_eq!(rates.qber, r.qber.value);
}

use degpen::renorm::{survival_estimate, ConeConfig, Dependence};

#[test]
fn survival_decreases_in_delta_under_common_numbers() {
    for mode in [Dependence::SharedSource, Dependence::Independent] {
        let est: Vec<_> = [0.1, 0.2, 0.3]
            .iter()
            .map(|&d| survival_estimate(&ConeConfig::new(d, 100).unwrap().with_mode(mode), 10_000, 41).unwrap())
            .collect();
        for w in est.windows(2) {
            assert!(w[0].survival >= w[1].survival, "{mode:?}: {} then {}", w[0].survival, w[1].survival);
            let sigma = (w[0].se.powi(2) + w[1].se.powi(2)).sqrt();
            assert!(w[0].survival - w[1].survival > 3.0 * sigma, "{mode:?}: no separation at delta {}", w[1].delta);
        }
        let last = est.last().unwrap();
        assert!(last.survival > 0.0 && last.survival < 1.0, "{mode:?}: {}", last.survival);
    }
}

#[test]
fn extremes_of_delta() {
    assert_eq!(survival_estimate(&ConeConfig::new(0.0, 50).unwrap(), 200, 1).unwrap().survival, 1.0);
    assert_eq!(survival_estimate(&ConeConfig::new(1.0, 50).unwrap(), 200, 1).unwrap().survival, 0.0);
}

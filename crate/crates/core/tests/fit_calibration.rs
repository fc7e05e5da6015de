//! Visibility recovery from Poisson-sampled dip scans.

use spectral_hom::config::RunConfig;
use spectral_hom::hom::{fit_gaussian_dip, hom_dip_scan, CoincidenceEngine, OutputMode};

#[test]
fn poisson_dips_recover_the_true_visibility() {
    let (config, _) = RunConfig::preset("hom-calibrated").unwrap();
    let interference = config.hom.unwrap().interference_config().unwrap();
    let range = (-1.5e-9, 1.5e-9);
    let source_rate = 80e6;

    // Scale the accumulation time so the baseline holds about 10^4 counts.
    let far = CoincidenceEngine::new(&interference.with_delay(range.1)).unwrap().coincidence(0, 0).unwrap();
    let accumulation_time = 1e4 / (far * source_rate);

    let expected = OutputMode::Counts { source_rate, accumulation_time, poisson_seed: None };
    let clean = hom_dip_scan(&interference, range, 61, &[(0, 0)], &expected).unwrap();
    let truth = fit_gaussian_dip(&clean.sweep.xs(), &clean.sweep.column(0)).unwrap().visibility;
    assert!((truth - 0.45).abs() < 5e-3);

    let estimates: Vec<f64> = (0..100u64)
        .map(|seed| {
            let mode = OutputMode::Counts { source_rate, accumulation_time, poisson_seed: Some(seed) };
            let scan = hom_dip_scan(&interference, range, 61, &[(0, 0)], &mode).unwrap();
            let fit = fit_gaussian_dip(&scan.sweep.xs(), &scan.sweep.column(0)).unwrap();
            assert!(fit.converged);
            fit.visibility
        })
        .collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let sd = (estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let standard_error = sd / n.sqrt();
    assert!(sd > 0.0);
    assert!((mean - truth).abs() < 3.0 * standard_error, "mean {mean}, truth {truth}, se {standard_error}");
}

#[test]
fn sampled_scans_depend_only_on_the_seed() {
    let (config, _) = RunConfig::preset("hom-calibrated").unwrap();
    let interference = config.hom.unwrap().interference_config().unwrap();
    let mode = OutputMode::Counts { source_rate: 80e6, accumulation_time: 10.0, poisson_seed: Some(3) };
    let a = hom_dip_scan(&interference, (-1e-9, 1e-9), 41, &[(0, 0), (1, 1)], &mode).unwrap();
    let b = hom_dip_scan(&interference, (-1e-9, 1e-9), 41, &[(0, 0), (1, 1)], &mode).unwrap();
    assert_eq!(a, b);
    let other = OutputMode::Counts { source_rate: 80e6, accumulation_time: 10.0, poisson_seed: Some(4) };
    assert_ne!(a, hom_dip_scan(&interference, (-1e-9, 1e-9), 41, &[(0, 0), (1, 1)], &other).unwrap());
}

use num_complex::Complex64;
use proptest::prelude::*;

use spectral_hom::hom::{
    hom_dip_scan, visibility, CoincidenceEngine, CoincidenceWindow, DetectionCell, DetectorModel, InterferenceConfig,
    OutputMode, PhaseModel,
};
use spectral_hom::keyrate::{enhancement_curve, ScenarioConfig};
use spectral_hom::photonic::{
    BinWeights, ModeExcitation, SpectralModeGrid, Station, TemporalEnvelope, WeakCoherentPulseSpec,
};
use spectral_hom::qubit::{build_state, Basis, TimeBinQubitSpec};
use spectral_hom::repeater::{relay_rate, repeater_rate, LinkConfig};
use spectral_hom::ssmm::SsmmModel;

fn weights(split: f64, phase: f64) -> BinWeights {
    BinWeights::new(Complex64::new(split.cos(), 0.0), Complex64::from_polar(split.sin(), phase)).unwrap()
}

prop_compose! {
    fn mode_excitation()(mu in 0.0..0.5f64, split in 0.0..std::f64::consts::FRAC_PI_2,
                         phase in 0.0..std::f64::consts::TAU, offset in 0.0..std::f64::consts::TAU)
        -> ModeExcitation {
        ModeExcitation { mean_photon_number: mu, weights: weights(split, phase), phase_offset: offset }
    }
}

prop_compose! {
    fn interference_config(max_modes: usize)(modes in 1..=max_modes)
        (a in prop::collection::vec(mode_excitation(), modes),
         b in prop::collection::vec(mode_excitation(), modes),
         rejection in 6.0..30.0f64,
         peak in 0.0..0.7f64,
         delay in -1.5e-9..1.5e-9f64,
         deficit in 0.0..=1.0f64,
         eta in 0.05..=1.0f64,
         dark in 0.0..1e-4f64,
         independent in any::<bool>(),
         window in 0..3usize)
        -> InterferenceConfig {
        let grid = SpectralModeGrid::new(0.0, 8e9, a.len()).unwrap();
        let ssmm = SsmmModel::new(grid, 3.2e9, peak, 60e9).unwrap().with_rejection_db(rejection).unwrap();
        let env = TemporalEnvelope::default();
        let a = WeakCoherentPulseSpec { station: Station::A, modes: a, envelope: env };
        let b = WeakCoherentPulseSpec { station: Station::B, modes: b, envelope: env };
        let detector = DetectorModel { efficiency: eta, dark_click_probability: dark, coincidence_window: 1e-9 };
        let mut config = InterferenceConfig::new(a, b, ssmm.clone(), ssmm, detector).unwrap();
        config.delta_t = delay;
        config.overlap_deficit = deficit;
        config.phase_model = if independent { PhaseModel::IndependentPerMode } else { PhaseModel::Common };
        config.window = [CoincidenceWindow::Early, CoincidenceWindow::Late, CoincidenceWindow::Both][window];
        config.quadrature_nodes = 64;
        config
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lossless_outputs_conserve_energy(config in interference_config(4), phi in 0.0..std::f64::consts::TAU) {
        let mut config = config;
        let grid = config.ssmm_1.grid;
        config.ssmm_1 = SsmmModel::lossless(grid);
        config.ssmm_2 = SsmmModel::lossless(grid);
        config.detectors = [vec![DetectorModel::ideal(); grid.mode_count], vec![DetectorModel::ideal(); grid.mode_count]];
        let engine = CoincidenceEngine::new(&config).unwrap();
        let mut total = 0.0;
        for port in 0..2 {
            for channel in 0..grid.mode_count {
                total += engine.mean_photon_number(&DetectionCell::new(port, channel, CoincidenceWindow::Both), phi).unwrap();
            }
        }
        let input: f64 = config.pulse_a.modes.iter().chain(&config.pulse_b.modes).map(|m| m.mean_photon_number).sum();
        prop_assert!((total - input).abs() < 1e-12, "{} vs {}", total, input);
    }

    #[test]
    fn exchanging_stations_leaves_coincidences_unchanged(config in interference_config(3)) {
        // Exchanging the stations conjugates every relative phase, so undo that.
        let mut swapped = config.swapped();
        for mode in swapped.pulse_a.modes.iter_mut().chain(swapped.pulse_b.modes.iter_mut()) {
            mode.phase_offset = -mode.phase_offset;
            mode.weights = BinWeights::new(mode.weights.early.conj(), mode.weights.late.conj()).unwrap();
        }
        let n = config.mode_count();
        let original = CoincidenceEngine::new(&config).unwrap();
        let exchanged = CoincidenceEngine::new(&swapped).unwrap();
        for c1 in 0..n {
            for c2 in 0..n {
                let p = original.coincidence(c1, c2).unwrap();
                let q = exchanged.coincidence(c1, c2).unwrap();
                prop_assert!((p - q).abs() < 1e-12, "pair ({}, {}): {} vs {}", c1, c2, p, q);
            }
        }
    }

    #[test]
    fn probabilities_are_bounded_by_singles(config in interference_config(3)) {
        let result = CoincidenceEngine::new(&config).unwrap().result().unwrap();
        let n = config.mode_count();
        for c1 in 0..n {
            for c2 in 0..n {
                let p = result.p_cc[c1][c2];
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(p <= result.singles[0][c1].min(result.singles[1][c2]) + 1e-15);
            }
        }
    }

    #[test]
    fn coherent_state_visibility_never_exceeds_one_half(config in interference_config(3)) {
        let sigma = config.pulse_a.envelope.sigma();
        let n = config.mode_count();
        let indist = CoincidenceEngine::new(&config.with_delay(0.0)).unwrap();
        let dist = CoincidenceEngine::new(&config.with_delay(40.0 * sigma)).unwrap();
        for c1 in 0..n {
            for c2 in 0..n {
                let c_dist = dist.coincidence(c1, c2).unwrap();
                if c_dist < 1e-14 {
                    continue;
                }
                let v = visibility(c_dist, indist.coincidence(c1, c2).unwrap()).unwrap();
                prop_assert!(v <= 0.5 + 1e-6, "pair ({}, {}): V = {}", c1, c2, v);
            }
        }
    }

    #[test]
    fn crosstalk_matrices_are_passive(modes in 1..12usize, spacing in 2e9..20e9f64, rejection in 3.0..40.0f64, peak in 0.0..=1.0f64) {
        let grid = SpectralModeGrid::new(0.0, spacing, modes).unwrap();
        let leak = 10f64.powf(-rejection / 10.0);
        let peak = peak / (1.0 + 2.0 * leak * 1.01);
        let model = SsmmModel { envelope_bandwidth: grid.span() + spacing, ..SsmmModel::new(grid, spacing / 2.0, peak, 1e12).unwrap() }
            .with_rejection_db(rejection)
            .unwrap();
        let t = model.crosstalk_matrix();
        for m in 0..modes {
            prop_assert!(t.column_sum(m) <= 1.0 + 1e-12);
            for c in 0..modes {
                prop_assert!((0.0..=1.0).contains(&t.get(c, m)));
                prop_assert!(t.get(c, m) <= t.get(c, c) + 1e-18);
            }
        }
    }

    #[test]
    fn relay_is_the_one_link_one_mode_repeater(distance in 1e3..500e3f64, loss in 0.0..1e-3f64, rate in 1.0..1e10f64, eff in 0.0..=1.0f64) {
        let cfg = LinkConfig {
            total_distance: distance, links: 1, loss_db_per_m: loss, source_rate: rate, modes: 1,
            storage_time: 0.0, fiber_speed: 2e8, link_efficiency: eff,
        };
        let relay = relay_rate(&cfg).unwrap();
        let repeater = repeater_rate(&cfg).unwrap();
        prop_assert!((relay - repeater).abs() <= 1e-12 * relay.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn repeater_rate_grows_with_modes_and_falls_with_loss(links in 1u32..6, modes in 1u64..100, loss in 1e-5..5e-4f64) {
        let cfg = LinkConfig {
            total_distance: 200e3, links, loss_db_per_m: loss, source_rate: 1.0, modes,
            storage_time: 0.0, fiber_speed: 2e8, link_efficiency: 1.0,
        };
        let base = repeater_rate(&cfg).unwrap();
        let more_modes = LinkConfig { modes: modes + 1, ..cfg };
        let lossier = LinkConfig { loss_db_per_m: loss * 1.1, ..cfg };
        prop_assert!(repeater_rate(&more_modes).unwrap() >= base);
        prop_assert!(repeater_rate(&lossier).unwrap() <= base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relay_identity_on_many_configs(distance in 1e3..500e3f64, loss in 0.0..1e-3f64, rate in 1.0..1e10f64) {
        let cfg = LinkConfig {
            total_distance: distance, links: 1, loss_db_per_m: loss, source_rate: rate, modes: 1,
            storage_time: 1e-4, fiber_speed: 2e8, link_efficiency: 1.0,
        };
        prop_assert_eq!(relay_rate(&cfg).unwrap(), repeater_rate(&cfg).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn qubit_states_are_normalized(early in 0.0..10.0f64, late in 0.0..10.0f64, background in 0.0..5.0f64,
                                   theta in -10.0..10.0f64, x_basis in any::<bool>()) {
        prop_assume!(early + late > 1e-9);
        let spec = TimeBinQubitSpec {
            signal_early: early, signal_late: late, background, theta,
            basis: if x_basis { Basis::X } else { Basis::Z },
        };
        let state = build_state(&spec).unwrap();
        let norm = state.amplitude_early.norm_sqr() + state.amplitude_late.norm_sqr();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&state.m));
        prop_assert!(state.b >= 0.0);
    }
}

#[test]
fn enhancement_grows_with_every_added_mode() {
    for scenario in ScenarioConfig::presets() {
        let curve = enhancement_curve(&scenario, scenario.mode_limit()).unwrap();
        for pair in curve.rows.windows(2) {
            assert!(pair[1].enhancement >= pair[0].enhancement);
        }
    }
}

#[test]
fn lossless_single_mode_matches_the_reference() {
    let mut scenario = ScenarioConfig::soa_coupling();
    let grid = SpectralModeGrid::new(0.0, 8e9, 1).unwrap();
    scenario.ssmm = SsmmModel::lossless(grid);
    let curve = enhancement_curve(&scenario, 1).unwrap();
    assert_eq!(curve.rows[0].enhancement, 1.0);
}

#[test]
fn symmetric_dips_are_even() {
    let grid = SpectralModeGrid::new(0.0, 8e9, 2).unwrap();
    let ssmm = SsmmModel::new(grid, 3.2e9, 0.05, 60e9).unwrap().with_rejection_db(10.0).unwrap();
    let env = TemporalEnvelope::default();
    let a = WeakCoherentPulseSpec::uniform(Station::A, 2, 0.1, BinWeights::late_only(), env).unwrap();
    let b = WeakCoherentPulseSpec::uniform(Station::B, 2, 0.1, BinWeights::late_only(), env).unwrap();
    let config = InterferenceConfig::new(a, b, ssmm.clone(), ssmm, DetectorModel::default()).unwrap();
    let scan = hom_dip_scan(&config, (-1.5e-9, 1.5e-9), 61, &[(0, 0), (0, 1)], &OutputMode::Probability).unwrap();
    for column in 0..2 {
        let values = scan.sweep.column(column);
        for i in 0..values.len() {
            let mirror = values[values.len() - 1 - i];
            assert!((values[i] - mirror).abs() <= 1e-15 * values[i].abs().max(1e-300) * 10.0);
        }
    }
}

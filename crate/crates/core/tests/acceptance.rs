//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use spectral_hom::config::RunConfig;
use spectral_hom::hom::{fit_gaussian_dip, fit_raised_cosine, hom_dip_scan, phase_scan, DipFit, OutputMode};
use spectral_hom::keyrate::{enhancement_curve, RateCurve, ScenarioConfig};
use spectral_hom::repeater::{repeater_rate, LinkConfig};
use spectral_hom::ssmm::frequency_response_scan;
use spectral_hom::sweep::linspace;
use spectral_hom::validation::{fock_equivalence, relay_identity, repeater_monte_carlo};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hom(preset: &str) -> spectral_hom::config::HomSection {
    RunConfig::preset(preset).unwrap().0.hom.unwrap()
}

fn fitted_dip(preset: &str, pair: (usize, usize)) -> DipFit {
    let section = hom(preset);
    let config = section.interference_config().unwrap();
    let range = (section.delay_range_s[0], section.delay_range_s[1]);
    let scan = hom_dip_scan(&config, range, section.steps, &[pair], &OutputMode::Probability).unwrap();
    fit_gaussian_dip(&scan.sweep.xs(), &scan.sweep.column(0)).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let worst = fock_equivalence(200, 8, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst < 1e-6 && elapsed < 60.0,
        format!("200 configs, max |diff| {worst:.2e} (< 1e-6), {elapsed:.1} s (< 60 s)"),
    )
}

fn coherent_state_limit() -> Outcome {
    let ideal = fitted_dip("hom-ideal", (0, 0)).visibility;
    let calibrated = fitted_dip("hom-calibrated", (0, 0)).visibility;
    check(
        (ideal - 0.5).abs() < 1e-3 && (calibrated - 0.45).abs() < 5e-3,
        format!("ideal V = {ideal:.5} (0.500 +- 1e-3), calibrated V = {calibrated:.5} (0.45 +- 0.005)"),
    )
}

fn dip_shape() -> Outcome {
    let sigma = hom("hom-ideal").interference_config().unwrap().pulse_a.envelope.sigma();
    let width = fitted_dip("hom-ideal", (0, 0)).width;
    let rel = (width / sigma - 1.0).abs();
    check(
        rel < 0.01,
        format!("fitted width {:.2} ps vs sigma {:.2} ps, relative gap {rel:.2e} (< 1%)", width * 1e12, sigma * 1e12),
    )
}

fn phase_dependence() -> Outcome {
    let section = hom("hom-phase");
    let config = section.interference_config().unwrap();
    let thetas = linspace(-std::f64::consts::PI, std::f64::consts::PI, 25);
    let range = (section.delay_range_s[0], section.delay_range_s[1]);
    let sweep = phase_scan(&config, &thetas, range, section.steps, (0, 0)).unwrap();
    let values = sweep.column(0);
    let fit = fit_raised_cosine(&sweep.xs(), &values).unwrap();
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    check(
        fit.max_residual < 1e-3 && edge < 1e-3,
        format!(
            "V_max {:.4}, max residual {:.2e} (< 1e-3), |V(+-pi)| {edge:.2e} (< 1e-3)",
            fit.v_max, fit.max_residual
        ),
    )
}

fn unmatched_visibility() -> Outcome {
    let ten = fitted_dip("hom-crosstalk", (0, 1)).visibility;
    let eighteen = fitted_dip("hom-crosstalk-18db", (0, 1)).visibility;
    check(
        ten > 0.0 && ten < 0.25 && eighteen < 0.02,
        format!("10 dB: V = {ten:.4} (in (0, 0.25)), 18 dB: V = {eighteen:.4} (< 0.02)"),
    )
}

fn frequency_response() -> Outcome {
    let section = RunConfig::preset("freq-response").unwrap().0.freq_response.unwrap();
    let model = &section.ssmm;
    let sweep = frequency_response_scan(model, -6e9, 6e9, 1e8).unwrap();
    let peaks: Vec<f64> = (0..2).map(|c| sweep.argmax(c).unwrap()).collect();
    let on_target = (peaks[0] + 4e9).abs() <= 1e8 && (peaks[1] - 4e9).abs() <= 1e8;
    let rejection = model.adjacent_rejection_db.unwrap();
    let t = model.crosstalk_matrix();
    let ratio_db = 10.0 * (t.get(0, 0) / t.get(0, 1)).log10();
    check(
        on_target && (ratio_db - rejection).abs() < 1e-9,
        format!(
            "peaks at {:+.2} / {:+.2} GHz, peak/adjacent {ratio_db:.12} dB vs {rejection} dB",
            peaks[0] / 1e9,
            peaks[1] / 1e9
        ),
    )
}

fn repeater() -> Outcome {
    let cfg = LinkConfig {
        total_distance: 100e3,
        links: 2,
        loss_db_per_m: 0.2e-3,
        source_rate: 1.0,
        modes: 10,
        storage_time: 0.0,
        fiber_speed: 2e8,
        link_efficiency: 1.0,
    };
    let rate = repeater_rate(&cfg).unwrap();
    let closed_form = (1.0 - 0.9f64.powi(10)).powi(2);
    let (gap, se) = repeater_monte_carlo(1_000_000, 0).unwrap();
    let relay = relay_identity(1000, 0).unwrap();
    check(
        (rate - closed_form).abs() < 1e-5 && gap < 3.0 * se && relay < 1e-12,
        format!(
            "rate {rate:.7} R vs (1 - 0.9^10)^2 = {closed_form:.7} (printed reference 0.42424), \
             MC gap {:.2} SE, relay identity max rel {relay:.1e} over 1000",
            gap / se
        ),
    )
}

fn saturating(curve: &RateCurve) -> bool {
    let e = curve.enhancements();
    e.windows(3).skip(1).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-12 * w[2].abs())
}

fn scenarios() -> Outcome {
    let start = Instant::now();
    let current = ScenarioConfig::current();
    let soa = ScenarioConfig::soa_coupling();
    let dense = ScenarioConfig::soa_coupling_dense();
    let c1 = enhancement_curve(&current, current.mode_limit()).unwrap();
    let c2 = enhancement_curve(&soa, soa.mode_limit()).unwrap();
    let c3 = enhancement_curve(&dense, 20).unwrap();
    let max1 = c1.enhancements().into_iter().fold(0.0, f64::max);
    let crossover = c2.crossover();
    let max3 = c3.enhancements().into_iter().fold(0.0, f64::max);
    let at_20 = c3.rows.last().unwrap().enhancement;
    let shapes = [&c1, &c2, &c3].iter().all(|c| saturating(c));
    let elapsed = start.elapsed().as_secs_f64();
    check(
        c1.rows.len() == 7
            && max1 < 1.0
            && matches!(crossover, Some(4..=7))
            && (2.8..=4.0).contains(&max3)
            && max3 == at_20
            && shapes,
        format!(
            "current max {max1:.4} (< 1), soa crossover M = {crossover:?} (4..7), dense {at_20:.3} at M = 20 \
             ([2.8, 4.0]), saturating {shapes}, {elapsed:.1} s"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_spectral-hom");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let subcommands = ["freq-response", "hom-dip", "phase-scan", "keyrate-sweep", "repeater-rate", "tbp-sweep"];
    let mut compared = 0;
    for subcommand in subcommands {
        let mut runs = Vec::new();
        for attempt in 0..2 {
            let out = tmp.path().join(format!("{subcommand}-{attempt}"));
            let status = Command::new(bin)
                .args([subcommand, "--seed", "7", "--counts", "--out"])
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{subcommand} failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            runs.push(csv_files(&out));
        }
        if runs[0] != runs[1] || runs[0].is_empty() {
            return Err(format!("{subcommand} outputs differ between runs"));
        }
        compared += runs[0].len();
    }
    Ok(format!("{compared} CSVs byte-identical across repeated runs of {} subcommands", subcommands.len()))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("coherent-state HOM limit", coherent_state_limit),
        ("dip-shape identity", dip_shape),
        ("phase scan", phase_dependence),
        ("unmatched-mode visibility", unmatched_visibility),
        ("frequency response", frequency_response),
        ("repeater rate", repeater),
        ("scenario reproduction", scenarios),
        ("determinism", cli_determinism),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} passed in {:.1} s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

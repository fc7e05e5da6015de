//! Brute-force validation oracle in a truncated photon-number basis.
//!
//! Each (spectral mode, time bin) is an independent pair of beam-splitter
//! inputs. B's wave packet is split into the part that overlaps A's and an
//! orthogonal remainder; each part meets its own beam-splitter unitary,
//! applied as an explicit matrix on two-mode number states. Threshold
//! detection with loss is the POVM `P(no click | n) = (1 - d)(1 - p)^n`.
//! The random phase of B is averaged by quadrature as in the analytic engine,
//! but nothing else is shared with it.

use num_complex::Complex64;

use super::{InterferenceConfig, PhaseModel};
use crate::error::{Error, Result};
use crate::photonic::{mode_amplitudes, Bin};

/// Largest neglected Poisson tail mass accepted per input mode.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

const MAX_SPECTRAL_MODES: usize = 2;

/// Beam-splitter unitary restricted to inputs with at most `n_max` photons per port.
///
/// `a† → (c† + d†)/√2`, `b† → (c† − d†)/√2`.
struct BeamSplitter {
    n_max: usize,
    // columns[n][m] = list of (p, amplitude on |p, n+m-p>)
    columns: Vec<Vec<Vec<(usize, f64)>>>,
}

impl BeamSplitter {
    fn new(n_max: usize) -> Self {
        let fact: Vec<f64> = (0..=2 * n_max)
            .scan(1.0, |acc, k| {
                if k > 0 {
                    *acc *= k as f64;
                }
                Some(*acc)
            })
            .collect();
        let binom = |n: usize, k: usize| fact[n] / (fact[k] * fact[n - k]);
        let columns = (0..=n_max)
            .map(|n| {
                (0..=n_max)
                    .map(|m| {
                        let total = n + m;
                        let norm = (fact[n] * fact[m]).sqrt() * 2f64.powf(total as f64 / 2.0);
                        (0..=total)
                            .map(|p| {
                                let q = total - p;
                                let mut sum = 0.0;
                                for i in p.saturating_sub(m)..=p.min(n) {
                                    let j = p - i;
                                    let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                                    sum += sign * binom(n, i) * binom(m, j);
                                }
                                (p, sum * (fact[p] * fact[q]).sqrt() / norm)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BeamSplitter { n_max, columns }
    }

    /// Joint output photon-number distribution `P[p][q]` for coherent inputs.
    fn output_distribution(&self, alpha: Complex64, beta: Complex64) -> Vec<Vec<f64>> {
        let a = coherent_vector(alpha, self.n_max);
        let b = coherent_vector(beta, self.n_max);
        let dim = 2 * self.n_max + 1;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (n, an) in a.iter().enumerate() {
            for (m, bm) in b.iter().enumerate() {
                let coeff = an * bm;
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                for &(p, u) in &self.columns[n][m] {
                    out[p][n + m - p] += coeff * u;
                }
            }
        }
        out.into_iter().map(|row| row.into_iter().map(|c| c.norm_sqr()).collect()).collect()
    }
}

fn coherent_vector(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(n_max + 1);
    let mut term = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    v.push(term);
    for n in 1..=n_max {
        term = term * alpha / (n as f64).sqrt();
        v.push(term);
    }
    v
}

/// `P(N > n_max)` for a Poisson variable with the given mean.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    for n in 1..=n_max {
        term *= mean / n as f64;
    }
    let mut tail = 0.0;
    let mut n = n_max;
    loop {
        n += 1;
        term *= mean / n as f64;
        tail += term;
        if term < tail * 1e-17 || term == 0.0 {
            break;
        }
    }
    tail
}

/// Coincidence probability between SSMM 1 channel `pair.0` and SSMM 2 channel
/// `pair.1`, evaluated in a number basis truncated at `n_max` photons per input.
pub fn fock_oracle_coincidence(config: &InterferenceConfig, pair: (usize, usize), n_max: usize) -> Result<f64> {
    config.validate()?;
    if n_max < 6 {
        return Err(Error::invalid("n_max", format!("must be at least 6, got {n_max}")));
    }
    let modes = config.mode_count();
    if modes > MAX_SPECTRAL_MODES {
        return Err(Error::invalid("modes", format!("oracle supports at most {MAX_SPECTRAL_MODES} spectral modes")));
    }
    for channel in [pair.0, pair.1] {
        if channel >= modes {
            return Err(Error::ChannelOutOfRange { index: channel, mode_count: modes });
        }
    }
    let amps_a = mode_amplitudes(&config.pulse_a);
    let amps_b = mode_amplitudes(&config.pulse_b);
    for amps in [&amps_a, &amps_b] {
        for mode in amps.iter() {
            for amp in mode {
                let mean = amp.norm_sqr();
                let tail = poisson_tail(mean, n_max);
                if tail > TRUNCATION_LIMIT {
                    return Err(Error::TruncationExceeded { mean, n_max, tail, limit: TRUNCATION_LIMIT });
                }
            }
        }
    }

    let kappa = config.interference_overlap()?;
    let remainder = (1.0 - kappa * kappa).max(0.0).sqrt();
    let t1 = config.ssmm_1.crosstalk_matrix();
    let t2 = config.ssmm_2.crosstalk_matrix();
    let det1 = config.detectors[0][pair.0];
    let det2 = config.detectors[1][pair.1];
    let bs = BeamSplitter::new(n_max);

    // Per-photon detection probability for each (mode, bin) at the two detectors.
    let detect = |mode: usize, bin: Bin| {
        if config.window.contains(bin) {
            (det1.efficiency * t1.get(pair.0, mode), det2.efficiency * t2.get(pair.1, mode))
        } else {
            (0.0, 0.0)
        }
    };

    // Generating-function values (E[u1^n1], E[u2^n2], E[u1^n1 u2^n2]) of one subsystem.
    let subsystem = |alpha: Complex64, beta: Complex64, p1: f64, p2: f64| {
        let dist = bs.output_distribution(alpha, beta);
        let (u1, u2) = (1.0 - p1, 1.0 - p2);
        let mut g = [0.0f64; 3];
        for (n1, row) in dist.iter().enumerate() {
            let w1 = u1.powi(n1 as i32);
            for (n2, &prob) in row.iter().enumerate() {
                if prob == 0.0 {
                    continue;
                }
                let w2 = u2.powi(n2 as i32);
                g[0] += prob * w1;
                g[1] += prob * w2;
                g[2] += prob * w1 * w2;
            }
        }
        g
    };

    let nodes = config.quadrature_nodes;
    let node = |j: usize| 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;

    // per_mode[m][j]: generating functions of mode m with B's phase at node j.
    let per_mode: Vec<Vec<[f64; 3]>> = (0..modes)
        .map(|mode| {
            (0..nodes)
                .map(|j| {
                    let rot = Complex64::from_polar(1.0, node(j));
                    let mut g = [1.0f64; 3];
                    for bin in Bin::ALL {
                        let (p1, p2) = detect(mode, bin);
                        let alpha = amps_a[mode][bin.index()];
                        let beta = amps_b[mode][bin.index()] * rot;
                        let overlapping = subsystem(alpha, beta * kappa, p1, p2);
                        let orthogonal = subsystem(Complex64::new(0.0, 0.0), beta * remainder, p1, p2);
                        for k in 0..3 {
                            g[k] *= overlapping[k] * orthogonal[k];
                        }
                    }
                    g
                })
                .collect()
        })
        .collect();

    let (q1, q2) = (1.0 - det1.dark_click_probability, 1.0 - det2.dark_click_probability);
    let coincidence = |node_of_mode: &[usize]| {
        let mut g = [1.0f64; 3];
        for (mode, &j) in node_of_mode.iter().enumerate() {
            for k in 0..3 {
                g[k] *= per_mode[mode][j][k];
            }
        }
        1.0 - q1 * g[0] - q2 * g[1] + q1 * q2 * g[2]
    };

    let total = match (config.phase_model, modes) {
        (PhaseModel::IndependentPerMode, 2) => {
            let mut sum = 0.0;
            for j in 0..nodes {
                for l in 0..nodes {
                    sum += coincidence(&[j, l]);
                }
            }
            sum / (nodes * nodes) as f64
        }
        _ => (0..nodes).map(|j| coincidence(&vec![j; modes])).sum::<f64>() / nodes as f64,
    };
    Ok(total)
}

//! Least-squares fits used to extract visibilities from scans.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;

/// Parameters of `C(t) = baseline * (1 - visibility * exp(-(t - center)^2 / (2 width^2)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipFit {
    pub baseline: f64,
    pub visibility: f64,
    pub center: f64,
    pub width: f64,
    /// Euclidean norm of the residuals in the data's own units.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DipFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        dip_model(&[self.baseline, self.visibility, self.center, self.width], t)
    }
}

fn dip_model(p: &[f64; 4], t: f64) -> f64 {
    let z = (t - p[2]) / p[3];
    p[0] * (1.0 - p[1] * (-0.5 * z * z).exp())
}

/// Residuals `y - f` and Jacobian of `f` in scaled coordinates.
fn residuals_and_jacobian(p: &[f64; 4], xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<[f64; 4]>) {
    let mut r = Vec::with_capacity(xs.len());
    let mut jac = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        let d = x - p[2];
        let g = (-0.5 * d * d / (p[3] * p[3])).exp();
        r.push(y - p[0] * (1.0 - p[1] * g));
        let cvg = p[0] * p[1] * g;
        jac.push([1.0 - p[1] * g, -p[0] * g, -cvg * d / (p[3] * p[3]), -cvg * d * d / (p[3] * p[3] * p[3])]);
    }
    (r, jac)
}

fn cost(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of a Gaussian dip.
///
/// Initialization: baseline = max, center = first argmin, width = range / 6.
pub fn fit_gaussian_dip(xs: &[f64], ys: &[f64]) -> Result<DipFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("points", "x and y lengths differ"));
    }
    if xs.len() < 5 {
        return Err(Error::invalid("points", format!("need at least 5 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("points", "non-finite sample"));
    }
    let (x_min, x_max) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let x_scale = x_max - x_min;
    if !(x_scale > 0.0) {
        return Err(Error::invalid("points", "sweep variable does not span a range"));
    }
    let y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(y_max > 0.0) {
        return Err(Error::invalid("points", "all counts are zero"));
    }
    let x_mid = 0.5 * (x_min + x_max);
    let sx: Vec<f64> = xs.iter().map(|x| (x - x_mid) / x_scale).collect();
    let sy: Vec<f64> = ys.iter().map(|y| y / y_max).collect();

    let argmin = ys.iter().enumerate().fold(0, |best, (i, &y)| if y < ys[best] { i } else { best });
    let mut p = [1.0, 1.0 - y_min / y_max, sx[argmin], 1.0 / 6.0];

    let (mut r, mut jac) = residuals_and_jacobian(&p, &sx, &sy);
    let mut current = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (row, &res) in jac.iter().zip(&r) {
            let j = Vector4::from_row_slice(row);
            jtj += j * j.transpose();
            jtr += j * res;
        }
        let gradient = jtr.amax();
        if current < 1e-30 || gradient < 1e-15 {
            converged = true;
            break;
        }
        iterations += 1;
        let diag_floor = 1e-12 * jtj.diagonal().max().max(1e-300);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for i in 0..4 {
                a[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            if trial[3] == 0.0 || trial.iter().any(|v| !v.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let (tr, tj) = residuals_and_jacobian(&trial, &sx, &sy);
            let trial_cost = cost(&tr);
            if trial_cost <= current {
                let relative_drop = (current - trial_cost) / current.max(1e-300);
                let step_size = step.amax() / (1.0 + trial.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                p = trial;
                r = tr;
                jac = tj;
                current = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if relative_drop < 1e-14 && step_size < 1e-10 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent direction left at machine precision.
            converged = gradient < 1e-10;
            break;
        }
    }

    let fit = DipFit {
        baseline: p[0] * y_max,
        visibility: p[1],
        center: p[2] * x_scale + x_mid,
        width: p[3].abs() * x_scale,
        residual_norm: (2.0 * current).sqrt() * y_max,
        iterations,
        converged,
    };
    if converged {
        Ok(fit)
    } else {
        Err(Error::FitDidNotConverge { iterations, best: Box::new(fit) })
    }
}

/// `V(theta) = v_max (1 + cos theta) / 2`, least squares in `v_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RaisedCosineFit {
    pub v_max: f64,
    pub max_residual: f64,
}

pub fn fit_raised_cosine(thetas: &[f64], values: &[f64]) -> Result<RaisedCosineFit> {
    if thetas.len() != values.len() || thetas.is_empty() {
        return Err(Error::invalid("points", "need matching, non-empty theta and value lists"));
    }
    let basis: Vec<f64> = thetas.iter().map(|t| 0.5 * (1.0 + t.cos())).collect();
    let denom: f64 = basis.iter().map(|b| b * b).sum();
    if denom == 0.0 {
        return Err(Error::invalid("points", "every theta sits at a node of the raised cosine"));
    }
    let v_max = basis.iter().zip(values).map(|(b, v)| b * v).sum::<f64>() / denom;
    let max_residual = basis.iter().zip(values).map(|(b, v)| (v - v_max * b).abs()).fold(0.0, f64::max);
    Ok(RaisedCosineFit { v_max, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::linspace;

    fn synthetic(params: [f64; 4], xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| dip_model(&params, x)).collect()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let sigma = 625e-12 / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let xs = linspace(-1.5e-9, 1.5e-9, 61);
        let ys = synthetic([1.0, 0.5, 0.0, sigma], &xs);
        let fit = fit_gaussian_dip(&xs, &ys).unwrap();
        assert!(fit.converged);
        assert!((fit.baseline - 1.0).abs() < 1e-6);
        assert!((fit.visibility - 0.5).abs() < 1e-6);
        assert!(fit.center.abs() < 1e-6 * sigma);
        assert!((fit.width - sigma).abs() < 1e-6 * sigma);
    }

    #[test]
    fn recovers_offset_dip_with_small_counts() {
        let xs = linspace(-1.5e-9, 1.5e-9, 41);
        let ys = synthetic([3.2e-5, 0.21, 1.3e-10, 3.1e-10], &xs);
        let fit = fit_gaussian_dip(&xs, &ys).unwrap();
        assert!((fit.visibility - 0.21).abs() < 1e-6);
        assert!((fit.center - 1.3e-10).abs() < 1e-15);
        assert!((fit.baseline / 3.2e-5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_data_gives_zero_visibility() {
        let xs = linspace(-1.0, 1.0, 21);
        let ys = vec![2.0; 21];
        let fit = fit_gaussian_dip(&xs, &ys).unwrap();
        assert_eq!(fit.visibility, 0.0);
        assert_eq!(fit.baseline, 2.0);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_gaussian_dip(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn raised_cosine_recovery() {
        let thetas = linspace(-std::f64::consts::PI, std::f64::consts::PI, 17);
        let values: Vec<f64> = thetas.iter().map(|t| 0.4 * 0.5 * (1.0 + t.cos())).collect();
        let fit = fit_raised_cosine(&thetas, &values).unwrap();
        assert!((fit.v_max - 0.4).abs() < 1e-15);
        assert!(fit.max_residual < 1e-15);
    }
}

//! Three-parameter fits `y ≈ scale·S(d, t) + baseline`.
//!
//! `S` keeps only the image-free (`m = 0`) term of the chain propagator on a
//! long chain. Per source site the thermal signal tends to `J_0(4dt)` and the
//! end-polarized signal is `Σ_p A_{1,p}(t)² = 2J_1(4dt)/(4dt)`.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SignalTrace;
use crate::chain::{ChainSpec, FAP_STRUCTURAL_COUPLING};
use crate::error::{Error, Result};
use crate::special::bessel_j;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Thermal,
    EndPolarized,
}

impl FitModel {
    /// Model signal, 1 at `t = 0`.
    pub fn eval(&self, d: f64, t: f64) -> f64 {
        let y = 4.0 * d * t;
        match self {
            FitModel::Thermal => bessel_j(0, y),
            FitModel::EndPolarized if y.abs() < 1e-8 => 1.0 - y * y / 8.0,
            FitModel::EndPolarized => 2.0 * bessel_j(1, y) / y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Starting coupling, rad/s.
    pub init_d: f64,
    pub max_iterations: usize,
    /// Stop once `‖δp‖/‖p‖` falls below this.
    pub step_tolerance: f64,
    /// Coarse scan over `[init_d/scan_span, init_d·scan_span]` before refining.
    pub scan_span: f64,
    pub scan_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            init_d: FAP_STRUCTURAL_COUPLING,
            max_iterations: 200,
            step_tolerance: 1e-10,
            scan_span: 2.0,
            scan_points: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub scale: f64,
    /// rad/s.
    pub coupling_d: f64,
    pub baseline: f64,
    /// Covariance of `(scale, coupling_d, baseline)`.
    pub covariance: [[f64; 3]; 3],
    /// `sqrt(Σ w_i r_i²)`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn coupling_sigma(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

struct Problem<'a> {
    trace: &'a SignalTrace,
    model: FitModel,
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, p: &Vector3<f64>) -> Vec<f64> {
        self.trace
            .times
            .iter()
            .zip(&self.trace.values)
            .map(|(&t, &y)| y - (p[0] * self.model.eval(p[1], t) + p[2]))
            .collect()
    }

    fn chi2(&self, p: &Vector3<f64>) -> f64 {
        self.residuals(p)
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * r * r)
            .sum()
    }

    /// Central-difference Jacobian of the model, one row per sample.
    fn jacobian(&self, p: &Vector3<f64>) -> Vec<[f64; 3]> {
        let model = |q: &Vector3<f64>, t: f64| q[0] * self.model.eval(q[1], t) + q[2];
        let steps = [
            1e-6 * p[0].abs().max(1e-12),
            1e-6 * p[1].abs().max(1e-12),
            1e-6 * p[2].abs().max(p[0].abs()).max(1e-12),
        ];
        self.trace
            .times
            .iter()
            .map(|&t| {
                let mut row = [0.0; 3];
                for (k, h) in steps.iter().enumerate() {
                    let mut up = *p;
                    let mut down = *p;
                    up[k] += h;
                    down[k] -= h;
                    row[k] = (model(&up, t) - model(&down, t)) / (2.0 * h);
                }
                row
            })
            .collect()
    }

    fn normal_equations(&self, p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
        let jac = self.jacobian(p);
        let r = self.residuals(p);
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for ((row, ri), w) in jac.iter().zip(&r).zip(&self.weights) {
            let j = Vector3::new(row[0], row[1], row[2]);
            jtj += j * j.transpose() * *w;
            jtr += j * (*w * ri);
        }
        (jtj, jtr)
    }

    /// Best weighted `(scale, baseline)` for a fixed coupling.
    fn linear_solve(&self, d: f64) -> Option<(f64, f64, f64)> {
        let (mut sw, mut sf, mut sff, mut sy, mut sfy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&t, &y), &w) in self.trace.times.iter().zip(&self.trace.values).zip(&self.weights) {
            let f = self.model.eval(d, t);
            sw += w;
            sf += w * f;
            sff += w * f * f;
            sy += w * y;
            sfy += w * f * y;
        }
        let det = sw * sff - sf * sf;
        if det.abs() <= 1e-14 * sw * sff {
            return None;
        }
        let scale = (sw * sfy - sf * sy) / det;
        let baseline = (sy - scale * sf) / sw;
        let p = Vector3::new(scale, d, baseline);
        Some((scale, baseline, self.chi2(&p)))
    }
}

/// Fit with default options and the given starting coupling.
pub fn fit_signal(trace: &SignalTrace, model: FitModel, init_d: f64) -> Result<FitResult> {
    fit_signal_with(
        trace,
        model,
        &FitOptions {
            init_d,
            ..FitOptions::default()
        },
    )
}

/// Damped least squares after a coarse scan over the coupling.
pub fn fit_signal_with(trace: &SignalTrace, model: FitModel, opts: &FitOptions) -> Result<FitResult> {
    trace.validate()?;
    if trace.len() < 10 {
        return Err(Error::DegenerateTrace(format!("need at least 10 samples, got {}", trace.len())));
    }
    let (lo, hi) = trace
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateTrace("signal is constant or not finite".into()));
    }
    if !(opts.init_d > 0.0 && opts.init_d.is_finite()) {
        return Err(Error::InvalidSpec(format!("initial coupling must be positive, got {}", opts.init_d)));
    }
    let weights = match &trace.sigma {
        Some(s) => s.iter().map(|v| 1.0 / (v * v)).collect(),
        None => vec![1.0; trace.len()],
    };
    let problem = Problem { trace, model, weights };

    // Coarse log-spaced scan: the cost has many local minima in d.
    let points = opts.scan_points.max(2);
    let span = opts.scan_span.max(1.0).ln();
    let mut start: Option<Vector3<f64>> = None;
    let mut best = f64::INFINITY;
    for i in 0..points {
        let d = opts.init_d * (-span + 2.0 * span * i as f64 / (points - 1) as f64).exp();
        if let Some((s, b, chi2)) = problem.linear_solve(d) {
            if chi2 < best {
                best = chi2;
                start = Some(Vector3::new(s, d, b));
            }
        }
    }
    let mut p = start.ok_or_else(|| Error::DegenerateTrace("model is flat on the trace".into()))?;
    let mut chi2 = problem.chi2(&p);

    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let (jtj, jtr) = problem.normal_equations(&p);
        let mut accepted = false;
        while lambda < 1e20 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let rel = step.norm() / p.norm().max(1e-300);
            if trial[1] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let trial_chi2 = problem.chi2(&trial);
            if trial_chi2 <= chi2 {
                p = trial;
                chi2 = trial_chi2;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < opts.step_tolerance {
                    converged = true;
                }
                break;
            }
            if rel < opts.step_tolerance {
                // Even tiny steps fail to lower the cost: already at the minimum.
                converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if converged || !accepted {
            converged = converged || !accepted && lambda >= 1e20;
            break;
        }
    }

    let (jtj, _) = problem.normal_equations(&p);
    let dof = trace.len().saturating_sub(3).max(1) as f64;
    let factor = if trace.sigma.is_some() { 1.0 } else { chi2 / dof };
    let cov = jtj
        .try_inverse()
        .map(|m| m * factor)
        .unwrap_or_else(|| Matrix3::from_element(f64::NAN));
    let mut covariance = [[0.0; 3]; 3];
    for (r, row) in covariance.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (cov[(r, c)] + cov[(c, r)]);
        }
    }
    Ok(FitResult {
        model,
        scale: p[0],
        coupling_d: p[1],
        baseline: p[2],
        covariance,
        residual_norm: chi2.sqrt(),
        iterations,
        converged,
    })
}

/// Model trace with optional Gaussian noise of standard deviation
/// `noise·|scale|`, reproducible from `seed`.
pub fn synthetic_trace(
    model: FitModel,
    d: f64,
    scale: f64,
    baseline: f64,
    times: &[f64],
    noise: f64,
    seed: u64,
) -> Result<SignalTrace> {
    let mut values: Vec<f64> = times.iter().map(|&t| scale * model.eval(d, t) + baseline).collect();
    let sigma = if noise > 0.0 {
        let sd = noise * scale.abs();
        let dist = Normal::new(0.0, sd).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut values {
            *v += dist.sample(&mut rng);
        }
        Some(vec![sd; times.len()])
    } else {
        None
    };
    let mut trace = SignalTrace::new(times.to_vec(), values, sigma)?;
    trace.meta.insert("model".into(), format!("{model:?}"));
    trace.meta.insert("d_rads".into(), format!("{d:?}"));
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityReport {
    pub coupling_d: f64,
    pub spacing_m: f64,
    /// `2·a·d`, m/s.
    pub v_g: f64,
    pub window_s: f64,
    pub displacement_m: f64,
    pub sites_per_window: f64,
}

/// Group velocity and the distance covered in `window` seconds.
pub fn velocity_report(fit: &FitResult, spacing: f64, window: f64) -> Result<VelocityReport> {
    let spec = ChainSpec::with_spacing(2, fit.coupling_d, spacing)?;
    let v_g = crate::chain::group_velocity(&spec);
    Ok(VelocityReport {
        coupling_d: fit.coupling_d,
        spacing_m: spacing,
        v_g,
        window_s: window,
        displacement_m: v_g * window,
        sites_per_window: v_g * window / spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{collective_signal, InitialState, HamiltonianKind, ReplicaCap};

    fn grid(d: f64) -> Vec<f64> {
        // About five oscillations of the thermal signal.
        (0..120).map(|i| i as f64 * 0.25 / d).collect()
    }

    #[test]
    fn models_are_the_long_chain_image_free_signals() {
        let d = 1.0;
        let spec = ChainSpec::new(400, d).unwrap().with_replica_cap(ReplicaCap::Max(0));
        for &t in &[0.0, 0.7, 3.0, 12.0] {
            let end = collective_signal(&spec, InitialState::SingleSite(1), HamiltonianKind::Dq, t).unwrap();
            assert!((end - FitModel::EndPolarized.eval(d, t)).abs() < 1e-12, "t={t}");
            let th = collective_signal(&spec, InitialState::Thermal, HamiltonianKind::Dq, t).unwrap() / 400.0;
            // Boundary correction is O(1/N).
            assert!((th - FitModel::Thermal.eval(d, t)).abs() < 2.0 / 400.0, "t={t}");
        }
    }

    #[test]
    fn noiseless_round_trip() {
        for model in [FitModel::Thermal, FitModel::EndPolarized] {
            let d = 8.32e3;
            let tr = synthetic_trace(model, d, 2.5, 0.1, &grid(d), 0.0, 0).unwrap();
            let fit = fit_signal(&tr, model, 8.17e3).unwrap();
            assert!((fit.coupling_d / d - 1.0).abs() < 1e-8, "{model:?} {fit:?}");
            assert!((fit.scale - 2.5).abs() < 1e-7);
            assert!((fit.baseline - 0.1).abs() < 1e-7);
            assert!(fit.converged);
        }
    }

    #[test]
    fn baseline_shift_is_absorbed() {
        let d = 8.5e3;
        let tr = synthetic_trace(FitModel::Thermal, d, 1.0, 0.0, &grid(d), 0.02, 3).unwrap();
        let mut shifted = tr.clone();
        for v in &mut shifted.values {
            *v += 0.75;
        }
        let a = fit_signal(&tr, FitModel::Thermal, 8.17e3).unwrap();
        let b = fit_signal(&shifted, FitModel::Thermal, 8.17e3).unwrap();
        assert!((a.coupling_d / b.coupling_d - 1.0).abs() < 1e-8);
        assert!((b.baseline - a.baseline - 0.75).abs() < 1e-8);
    }

    #[test]
    fn scale_and_time_covariance() {
        let d = 9.0e3;
        let tr = synthetic_trace(FitModel::EndPolarized, d, 1.0, 0.05, &grid(d), 0.02, 11).unwrap();
        let a = fit_signal(&tr, FitModel::EndPolarized, 8.17e3).unwrap();
        let mut scaled = tr.clone();
        for v in &mut scaled.values {
            *v *= 3.0;
        }
        scaled.sigma = scaled.sigma.map(|s| s.iter().map(|v| v * 3.0).collect());
        let b = fit_signal(&scaled, FitModel::EndPolarized, 8.17e3).unwrap();
        assert!((b.scale / a.scale / 3.0 - 1.0).abs() < 1e-8);
        assert!((b.coupling_d / a.coupling_d - 1.0).abs() < 1e-8);
        assert!((b.baseline / a.baseline / 3.0 - 1.0).abs() < 1e-8);

        let mut slow = tr.clone();
        for t in &mut slow.times {
            *t *= 2.0;
        }
        let c = fit_signal(&slow, FitModel::EndPolarized, 8.17e3 / 2.0).unwrap();
        assert!((c.coupling_d * 2.0 / a.coupling_d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let d = 8.7e3;
        let tr = synthetic_trace(FitModel::EndPolarized, d, 1.0, 0.0, &grid(d), 0.02, 5).unwrap();
        let fit = fit_signal(&tr, FitModel::EndPolarized, 8.17e3).unwrap();
        let m = Matrix3::from_fn(|r, c| fit.covariance[r][c]);
        assert_eq!(m, m.transpose());
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|v| *v >= -1e-12 * eig.amax()));
        assert!(fit.coupling_sigma() > 0.0);
    }

    #[test]
    fn degenerate_traces() {
        let t: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let tr = SignalTrace::new(t, vec![1.0; 5], None).unwrap();
        assert!(matches!(fit_signal(&tr, FitModel::Thermal, 1.0), Err(Error::DegenerateTrace(_))));
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let tr = SignalTrace::new(t, vec![1.0; 20], None).unwrap();
        assert!(fit_signal(&tr, FitModel::Thermal, 1.0).is_err());
    }

    #[test]
    fn velocity_numbers() {
        let fit = FitResult {
            model: FitModel::Thermal,
            scale: 1.0,
            coupling_d: 8.78e3,
            baseline: 0.0,
            covariance: [[0.0; 3]; 3],
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
        };
        let r = velocity_report(&fit, 3.442e-10, 1.5e-3).unwrap();
        assert!((r.v_g - 6.04e-6).abs() < 0.01e-6);
        assert!((r.displacement_m - 9.07e-9).abs() < 0.01e-9);
        assert!((r.sites_per_window - 26.0).abs() < 0.5);
        assert_eq!(velocity_report(&fit, 3.442e-10, 0.0).unwrap().sites_per_window, 0.0);
    }
}

//! Replica decomposition, mirror-time scans and scaling fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{
    amplitude_from_row, replica_range, replica_term, transport_probability, transport_row, amplitude_infinite,
    ChainSpec,
};
use crate::error::{Error, Result};

/// Per-image contributions to one amplitude `A_{j,q}(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaDecomposition {
    pub j: usize,
    pub q: usize,
    pub time: f64,
    /// `(m, term)` for `m = −M..=M`.
    pub terms: Vec<(i64, Complex64)>,
}

impl ReplicaDecomposition {
    pub fn sum(&self) -> Complex64 {
        self.terms.iter().map(|(_, v)| v).sum()
    }

    pub fn term(&self, m: i64) -> Complex64 {
        self.terms
            .iter()
            .find(|(k, _)| *k == m)
            .map(|(_, v)| *v)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Terms with magnitude above `threshold`.
    pub fn significant(&self, threshold: f64) -> Vec<(i64, Complex64)> {
        self.terms.iter().copied().filter(|(_, v)| v.norm() > threshold).collect()
    }
}

pub fn replica_decomposition(spec: &ChainSpec, j: usize, q: usize, t: f64) -> Result<ReplicaDecomposition> {
    spec.check_site(j)?;
    spec.check_site(q)?;
    let row = transport_row(spec.x(t));
    let m_max = replica_range(spec, &row);
    let terms = (-m_max..=m_max)
        .map(|m| (m, replica_term(spec.n_sites, &row, j, q, m)))
        .collect();
    Ok(ReplicaDecomposition { j, q, time: t, terms })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorReport {
    pub source: usize,
    pub site: usize,
    /// Refined time of the largest transfer probability, seconds.
    pub mirror_time_estimate: f64,
    /// `|A(t*)|² / |A_{m=0}(t*)|²` at the refined peak.
    pub enhancement_factor: f64,
    /// `max |A|² / max |A_{m=0}|²` over the whole window.
    pub window_peak_ratio: f64,
    pub peak_probability: f64,
}

/// Vertex of the parabola through three equally spaced samples, as an offset
/// in units of the spacing from the middle sample.
fn parabolic_offset(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (left - right) / denom).clamp(-1.0, 1.0)
    }
}

/// Locate the largest `|A_{source,target}|²` on a time grid and compare it with
/// the image-free term.
pub fn mirror_scan(spec: &ChainSpec, source: usize, target: usize, t_grid: &[f64]) -> Result<MirrorReport> {
    spec.check_site(source)?;
    spec.check_site(target)?;
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let probe = |t: f64| -> (f64, f64) {
        let row = transport_row(spec.x(t));
        let full = amplitude_from_row(spec, &row, source, target).norm_sqr();
        let direct = replica_term(spec.n_sites, &row, source, target, 0).norm_sqr();
        (full, direct)
    };
    let samples: Vec<(f64, f64)> = t_grid.iter().map(|&t| probe(t)).collect();
    let (mut best, mut best_full) = (0usize, f64::NEG_INFINITY);
    let mut direct_max = 0.0_f64;
    for (i, (full, direct)) in samples.iter().enumerate() {
        if *full > best_full {
            best = i;
            best_full = *full;
        }
        direct_max = direct_max.max(*direct);
    }
    let mut t_star = t_grid[best];
    if best > 0 && best + 1 < t_grid.len() {
        let h_left = t_grid[best] - t_grid[best - 1];
        let h_right = t_grid[best + 1] - t_grid[best];
        if (h_left - h_right).abs() <= 1e-9 * h_left.abs().max(h_right.abs()) {
            let off = parabolic_offset(samples[best - 1].0, samples[best].0, samples[best + 1].0);
            t_star += off * h_left;
        }
    }
    let (full, direct) = probe(t_star);
    let (full, direct, t_star) = if full >= best_full {
        (full, direct, t_star)
    } else {
        (best_full, samples[best].1, t_grid[best])
    };
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };
    Ok(MirrorReport {
        source,
        site: target,
        mirror_time_estimate: t_star,
        enhancement_factor: ratio(full, direct),
        window_peak_ratio: ratio(best_full, direct_max),
        peak_probability: full,
    })
}

fn check_range(n_min: usize, n_max: usize, d: f64) -> Result<()> {
    if n_min < 10 || n_min >= n_max {
        return Err(Error::DegenerateRange(format!(
            "need 10 ≤ n_min < n_max, got {n_min}..{n_max}"
        )));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidSpec(format!("coupling must be positive, got {d}")));
    }
    Ok(())
}

fn log_log_slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slope of `ln P^∞_{1,n}(n/2d)` against `ln n`.
pub fn scaling_exponent(n_min: usize, n_max: usize, d: f64) -> Result<f64> {
    check_range(n_min, n_max, d)?;
    Ok(log_log_slope((n_min..=n_max).map(|n| {
        let t = n as f64 / (2.0 * d);
        (n as f64, transport_probability(n, t, d))
    })))
}

/// Least-squares slope of `ln |A^∞_{1,n}(n/2d)|` against `ln n`.
pub fn amplitude_exponent(n_min: usize, n_max: usize, d: f64) -> Result<f64> {
    check_range(n_min, n_max, d)?;
    Ok(log_log_slope((n_min..=n_max).map(|n| {
        let t = n as f64 / (2.0 * d);
        (n as f64, amplitude_infinite(n, t, d).norm())
    })))
}

/// Zero-quantum overlap of the waves launched from `j` and its mirror site
/// `N+1−j`, seen at site `l`: `|A_{j,l}(t)|² + |A_{N+1−j,l}(t)|²`.
pub fn zq_pair_intensity(spec: &ChainSpec, j: usize, l: usize, t_grid: &[f64]) -> Result<Vec<f64>> {
    spec.check_site(j)?;
    spec.check_site(l)?;
    let mirror = spec.n_sites + 1 - j;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let row = transport_row(spec.x(t));
            amplitude_from_row(spec, &row, j, l).norm_sqr() + amplitude_from_row(spec, &row, mirror, l).norm_sqr()
        })
        .collect())
}

/// Scale a curve so its largest value is 1.
pub fn normalize_to_max(values: &[f64]) -> Vec<f64> {
    let m = values.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        values.iter().map(|v| v / m).collect()
    } else {
        values.to_vec()
    }
}

/// Uniform grid of `steps + 1` points on `[0, t_max]`.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t_max * i as f64 / steps.max(1) as f64).collect()
}

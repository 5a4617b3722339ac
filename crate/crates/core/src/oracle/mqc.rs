//! Coherence spectra from phase-incremented collective rotations.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::{evolve_density, DenseOperator};
use super::monomial::site_mask;
use crate::error::{Error, Result};
use crate::liouville::{Basis, CoherenceSpectrum};

const ALIASING_TOL: f64 = 1e-10;

/// `U ⊗ 1` on one site, applied from the left.
fn apply_left(m: &mut DMatrix<Complex64>, mask: usize, u: &[[Complex64; 2]; 2]) {
    let dim = m.nrows();
    for c in 0..dim {
        for r0 in (0..dim).filter(|r| r & mask == 0) {
            let r1 = r0 | mask;
            let (a, b) = (m[(r0, c)], m[(r1, c)]);
            m[(r0, c)] = u[0][0] * a + u[0][1] * b;
            m[(r1, c)] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// `M·(U ⊗ 1)†` on one site.
fn apply_right_adjoint(m: &mut DMatrix<Complex64>, mask: usize, u: &[[Complex64; 2]; 2]) {
    let dim = m.ncols();
    for c0 in (0..dim).filter(|c| c & mask == 0) {
        let c1 = c0 | mask;
        for r in 0..dim {
            let (a, b) = (m[(r, c0)], m[(r, c1)]);
            m[(r, c0)] = a * u[0][0].conj() + b * u[0][1].conj();
            m[(r, c1)] = a * u[1][0].conj() + b * u[1][1].conj();
        }
    }
}

/// `exp(−iφσ/2)` for σ = σx or σz.
fn site_rotation(axis: Basis, phi: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let zero = Complex64::new(0.0, 0.0);
    match axis {
        Basis::Z => [[Complex64::new(c, -s), zero], [zero, Complex64::new(c, s)]],
        Basis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
    }
}

/// `R ρ R†` with `R = exp(−iφ Σσ_axis/2)`.
pub fn rotate(rho: &DenseOperator, axis: Basis, phi: f64) -> DenseOperator {
    let n = rho.n_sites();
    let u = site_rotation(axis, phi);
    let mut m = rho.matrix.clone();
    for site in 1..=n {
        let mask = site_mask(n, site);
        apply_left(&mut m, mask, &u);
        apply_right_adjoint(&mut m, mask, &u);
    }
    DenseOperator::new(m, format!("R({phi})"))
}

/// Spectrum of an already evolved operator.
///
/// `S(φ_k) = Tr(ρ† R ρ R†)/2^N` at `φ_k = 2πk/K`, and the intensity of order
/// `n` is `(1/K) Σ_k S(φ_k) e^{inφ_k}`. Orders up to `K/2 − 1` are returned;
/// weight on the Nyquist order means `K` was too small.
pub fn spectrum_of(rho: &DenseOperator, axis: Basis, n_phases: usize) -> Result<CoherenceSpectrum> {
    if n_phases < 4 {
        return Err(Error::InvalidSpec(format!("need at least 4 phases, got {n_phases}")));
    }
    let dim = rho.dim() as f64;
    let signal: Vec<Complex64> = (0..n_phases)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phases as f64;
            let r = rotate(rho, axis, phi);
            rho.matrix
                .iter()
                .zip(r.matrix.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                / dim
        })
        .collect();
    let intensity = |order: i64| -> f64 {
        signal
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phases as f64;
                s * Complex64::from_polar(1.0, order as f64 * phi)
            })
            .sum::<Complex64>()
            .re
            / n_phases as f64
    };
    let nyquist = (n_phases / 2) as i64;
    let alias = intensity(nyquist);
    if alias.abs() > ALIASING_TOL {
        return Err(Error::Aliasing {
            order: nyquist as i32,
            intensity: alias,
        });
    }
    let mut intensities = BTreeMap::new();
    for order in -(nyquist - 1)..nyquist {
        intensities.insert(order as i32, intensity(order).max(0.0));
    }
    Ok(CoherenceSpectrum { basis: axis, intensities })
}

/// Evolve `ρ₀` under `H` for time `t`, then measure its coherence spectrum.
pub fn mq_spectrum(
    h: &DenseOperator,
    rho0: &DenseOperator,
    t: f64,
    axis: Basis,
    n_phases: usize,
) -> Result<CoherenceSpectrum> {
    spectrum_of(&evolve_density(h, rho0, t)?, axis, n_phases)
}

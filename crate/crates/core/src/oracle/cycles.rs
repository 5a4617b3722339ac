//! Multiple-pulse cycles that turn the secular dipolar coupling into an
//! effective DQ Hamiltonian.
//!
//! The primitive cycle is `[Δ/2, X, Δ′, X, Δ/2]` with `Δ′ = 2Δ + w`; the bar
//! version uses `−x` pulses. Its average Hamiltonian is
//! `H̄ = (H + 2·X†HX)/3`, which for the dipolar form `½d(3zz − σ⃗·σ⃗)` is
//! `−½d(xx − yy)`, a DQ Hamiltonian with reversed sign.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{check_size, DenseOperator, HamiltonianSpec, Propagator, DEFAULT_SIZE_CAP};
use super::monomial::Monomial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    /// Two pulses, `C`.
    C,
    /// Four pulses, `C̄·C` in time order `C` then `C̄`.
    CcBar,
    /// Eight pulses, `C C̄ C̄ C`.
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseCycle {
    pub kind: CycleKind,
    /// Pulse spacing `Δ`, seconds.
    pub delta: f64,
    /// π/2 pulse length `w`, seconds; 0 for ideal pulses.
    pub width: f64,
}

impl PulseCycle {
    pub fn ideal(kind: CycleKind, delta: f64) -> Self {
        PulseCycle { kind, delta, width: 0.0 }
    }

    pub fn with_width(kind: CycleKind, delta: f64, width: f64) -> Self {
        PulseCycle { kind, delta, width }
    }

    fn primitives(&self) -> usize {
        match self.kind {
            CycleKind::C => 1,
            CycleKind::CcBar => 2,
            CycleKind::S => 4,
        }
    }

    /// Total cycle time `τ_c`.
    pub fn cycle_time(&self) -> f64 {
        self.primitives() as f64 * 3.0 * (self.delta + self.width)
    }
}

fn collective_x(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for s in 1..=n {
        Monomial::sigma_x(n, s).add_to(&mut m, Complex64::new(0.5, 0.0));
    }
    m
}

struct CycleParts {
    free: Propagator,
    pulse: [DMatrix<Complex64>; 2],
    ideal_pulse: [DMatrix<Complex64>; 2],
}

impl CycleParts {
    fn new(h: &DenseOperator, width: f64) -> Result<Self> {
        let sx = collective_x(h.n_sites());
        let rotation = |sign: f64| -> Result<DMatrix<Complex64>> {
            let gen = DenseOperator::new(&sx * Complex64::new(sign, 0.0), "Sx");
            Ok(Propagator::new(&gen)?.unitary(std::f64::consts::FRAC_PI_2))
        };
        let ideal_pulse = [rotation(1.0)?, rotation(-1.0)?];
        let pulse = if width > 0.0 {
            let finite = |sign: f64| -> Result<DMatrix<Complex64>> {
                let rate = std::f64::consts::FRAC_PI_2 / width;
                let gen = &h.matrix + &sx * Complex64::new(sign * rate, 0.0);
                Ok(Propagator::new(&DenseOperator::new(gen, "pulse"))?.unitary(width))
            };
            [finite(1.0)?, finite(-1.0)?]
        } else {
            ideal_pulse.clone()
        };
        Ok(CycleParts {
            free: Propagator::new(h)?,
            pulse,
            ideal_pulse,
        })
    }

    /// One primitive, `sign = 0` for `x` pulses and 1 for `−x`.
    fn primitive(&self, delta: f64, width: f64, sign: usize) -> DMatrix<Complex64> {
        let half = self.free.unitary(delta / 2.0);
        let long = self.free.unitary(2.0 * delta + width);
        let p = &self.pulse[sign];
        &half * p * long * p * &half
    }
}

fn check_dipolar(spec: &HamiltonianSpec) -> Result<()> {
    check_size(spec.n_sites, DEFAULT_SIZE_CAP)?;
    if spec.kind != super::dense::CouplingKind::Dipolar {
        return Err(Error::InvalidSpec("pulse cycles act on a dipolar Hamiltonian".into()));
    }
    Ok(())
}

/// Unitary of one full cycle.
pub fn cycle_propagator(cycle: &PulseCycle, dipolar: &HamiltonianSpec) -> Result<DenseOperator> {
    check_dipolar(dipolar)?;
    let h = super::dense::build_hamiltonian(dipolar)?;
    let parts = CycleParts::new(&h, cycle.width)?;
    Ok(DenseOperator::new(compose(&parts, cycle), format!("{:?}", cycle.kind)))
}

fn compose(parts: &CycleParts, cycle: &PulseCycle) -> DMatrix<Complex64> {
    let c = parts.primitive(cycle.delta, cycle.width, 0);
    match cycle.kind {
        CycleKind::C => c,
        CycleKind::CcBar | CycleKind::S => {
            let cb = parts.primitive(cycle.delta, cycle.width, 1);
            if cycle.kind == CycleKind::CcBar {
                cb * c
            } else {
                &c * &cb * &cb * &c
            }
        }
    }
}

/// Net rotation left by the pulses of a cycle, ideal-pulse version.
fn frame(parts: &CycleParts, kind: CycleKind) -> DMatrix<Complex64> {
    let p = &parts.ideal_pulse[0];
    let pb = &parts.ideal_pulse[1];
    let pp = p * p;
    let pbpb = pb * pb;
    match kind {
        CycleKind::C => pp,
        CycleKind::CcBar => &pbpb * &pp,
        CycleKind::S => &pp * &pbpb * &pbpb * &pp,
    }
}

/// `(H + 2·X†HX)/3`, the lowest-order average Hamiltonian of the cycles.
pub fn average_hamiltonian(dipolar: &HamiltonianSpec) -> Result<DenseOperator> {
    check_dipolar(dipolar)?;
    let h = super::dense::build_hamiltonian(dipolar)?;
    let parts = CycleParts::new(&h, 0.0)?;
    let x = &parts.ideal_pulse[0];
    let m = (&h.matrix + x.adjoint() * &h.matrix * x * Complex64::new(2.0, 0.0)) / Complex64::new(3.0, 0.0);
    Ok(DenseOperator::new(m, "Hbar"))
}

/// Spectral-norm distance between the cycle and `F·exp(−iH̄τ_c)` after
/// removing a global phase, where `F` is the net pulse rotation.
pub fn cycle_defect(cycle: &PulseCycle, dipolar: &HamiltonianSpec) -> Result<f64> {
    check_dipolar(dipolar)?;
    let h = super::dense::build_hamiltonian(dipolar)?;
    let parts = CycleParts::new(&h, cycle.width)?;
    let hbar = average_hamiltonian(dipolar)?;
    let target = frame(&parts, cycle.kind) * Propagator::new(&hbar)?.unitary(cycle.cycle_time());
    let u = compose(&parts, cycle);
    Ok(phase_free_distance(&u, &target))
}

/// Defect of `repeats` back-to-back cycles, for comparisons at equal total time.
pub fn repeated_cycle_defect(cycle: &PulseCycle, dipolar: &HamiltonianSpec, repeats: u32) -> Result<f64> {
    check_dipolar(dipolar)?;
    let h = super::dense::build_hamiltonian(dipolar)?;
    let parts = CycleParts::new(&h, cycle.width)?;
    let hbar = average_hamiltonian(dipolar)?;
    let one = compose(&parts, cycle);
    let step = frame(&parts, cycle.kind) * Propagator::new(&hbar)?.unitary(cycle.cycle_time());
    let dim = one.nrows();
    let mut u = DMatrix::identity(dim, dim);
    let mut target = DMatrix::identity(dim, dim);
    for _ in 0..repeats {
        u = &one * u;
        target = &step * target;
    }
    Ok(phase_free_distance(&u, &target))
}

fn phase_free_distance(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    let overlap = (v.adjoint() * u).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let diff = u - v * phase;
    diff.singular_values().iter().copied().fold(0.0, f64::max)
}

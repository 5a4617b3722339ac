//! Closed-form free-fermion transport on open nearest-neighbour chains.
//!
//! The one-particle propagator of an open chain of `N` sites is the image sum
//!
//! ```text
//! A_{j,q}(t) = Σ_{m∈ℤ} [ g(δ + 2mÑ) − g(Σ + 2mÑ) ],   g(n) = iⁿ J_n(2dt)
//! ```
//!
//! with `δ = q − j`, `Σ = q + j` and `Ñ = N + 1`. Because `g(−n) = g(n)` the
//! negative-`m` images are the mirror copies. The same matrix equals
//! `Σ_k (2/Ñ) sin(kj) sin(kq) e^{i·2dt·cos k}` with `k = πκ/Ñ`, so it is
//! unitary and symmetric.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bessel_j, bessel_row, tail_cutoff, BesselRow};

/// Intra-chain ¹⁹F spacing in fluorapatite, metres.
pub const FAP_SPACING_M: f64 = 3.442e-10;

/// Nearest-neighbour coupling from the fluorapatite structure, rad/s.
pub const FAP_STRUCTURAL_COUPLING: f64 = 8.17e3;

/// Fraction of the mirror time `N/(2d)` up to which the two end waves of an
/// end-polarized chain are treated as independent.
pub const END_WAVE_OVERLAP_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicaCap {
    /// Keep every image whose Bessel order lies inside the tail cutoff.
    Auto,
    /// Keep images with `|m| ≤ cap`; `Max(0)` is the semi-infinite chain.
    Max(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    /// Nearest-neighbour coupling `d`, rad/s.
    pub coupling: f64,
    /// Lattice constant `a`, metres.
    pub spacing: f64,
    pub replica_cap: ReplicaCap,
}

impl ChainSpec {
    pub fn new(n_sites: usize, coupling: f64) -> Result<Self> {
        Self::with_spacing(n_sites, coupling, FAP_SPACING_M)
    }

    pub fn with_spacing(n_sites: usize, coupling: f64, spacing: f64) -> Result<Self> {
        let spec = ChainSpec {
            n_sites,
            coupling,
            spacing,
            replica_cap: ReplicaCap::Auto,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_replica_cap(mut self, cap: ReplicaCap) -> Self {
        self.replica_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "coupling must be positive, got {}",
                self.coupling
            )));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(())
    }

    /// Dimensionless time `2·d·t`.
    pub fn x(&self, t: f64) -> f64 {
        2.0 * self.coupling * t
    }

    /// Time for a given `2·d·t`.
    pub fn time_of(&self, x: f64) -> f64 {
        x / (2.0 * self.coupling)
    }

    /// `N/(2d)`, the time scale on which a wave crosses the chain.
    pub fn mirror_time(&self) -> f64 {
        self.n_sites as f64 / (2.0 * self.coupling)
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_sites {
            Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Deviation `−σz_j`.
    SingleSite(usize),
    /// Deviation `−(σz_1 + σz_N)`.
    EndPolarized,
    /// Deviation `−Σ σz_j`.
    Thermal,
}

impl InitialState {
    /// Source sites whose single-site evolutions add up to this state.
    pub fn sources(&self, n_sites: usize) -> Vec<usize> {
        match *self {
            InitialState::SingleSite(j) => vec![j],
            InitialState::EndPolarized => vec![1, n_sites],
            InitialState::Thermal => (1..=n_sites).collect(),
        }
    }

    pub(crate) fn validate(&self, spec: &ChainSpec) -> Result<()> {
        if let InitialState::SingleSite(j) = *self {
            spec.check_site(j)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    Dq,
    Xx,
}

/// `iⁿ` for any integer n.
pub(crate) fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// One image term `g(n) = iⁿ J_n(x)`.
fn image(row: &BesselRow, n: i64) -> Complex64 {
    i_pow(n) * row.get(n)
}

/// Largest image index worth visiting for a row of the given length.
fn auto_replicas(n_sites: usize, row: &BesselRow) -> i64 {
    let period = 2 * (n_sites as i64 + 1);
    (row.n_max() as i64 + 2 * n_sites as i64) / period + 1
}

/// Bessel row long enough to make every neglected order < 1e−15.
pub(crate) fn transport_row(x: f64) -> BesselRow {
    bessel_row(tail_cutoff(x), x)
}

/// The image of index `m` for the pair `(j, q)`.
pub(crate) fn replica_term(n_sites: usize, row: &BesselRow, j: usize, q: usize, m: i64) -> Complex64 {
    let period = 2 * (n_sites as i64 + 1);
    let delta = q as i64 - j as i64;
    let sigma = q as i64 + j as i64;
    image(row, delta + m * period) - image(row, sigma + m * period)
}

pub(crate) fn replica_range(spec: &ChainSpec, row: &BesselRow) -> i64 {
    match spec.replica_cap {
        ReplicaCap::Auto => auto_replicas(spec.n_sites, row),
        ReplicaCap::Max(cap) => cap as i64,
    }
}

/// `A_{j,q}` from a precomputed row; sites are assumed valid.
pub(crate) fn amplitude_from_row(spec: &ChainSpec, row: &BesselRow, j: usize, q: usize) -> Complex64 {
    let m_max = replica_range(spec, row);
    (-m_max..=m_max)
        .map(|m| replica_term(spec.n_sites, row, j, q, m))
        .sum()
}

/// Transport amplitude `A_{j,q}(t)`.
pub fn amplitude(spec: &ChainSpec, j: usize, q: usize, t: f64) -> Result<Complex64> {
    spec.check_site(j)?;
    spec.check_site(q)?;
    let row = transport_row(spec.x(t));
    Ok(amplitude_from_row(spec, &row, j, q))
}

/// All `A_{j,q}(t)` at one time, row-major `N×N`.
pub fn amplitude_matrix(spec: &ChainSpec, t: f64) -> Vec<Complex64> {
    let n = spec.n_sites;
    let row = transport_row(spec.x(t));
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 1..=n {
        for q in j..=n {
            let a = amplitude_from_row(spec, &row, j, q);
            out[(j - 1) * n + (q - 1)] = a;
            out[(q - 1) * n + (j - 1)] = a;
        }
    }
    out
}

/// `A_{j,q}(t)` on a time grid.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    pub spec: ChainSpec,
    pub times: Vec<f64>,
    entries: Vec<Complex64>,
}

impl AmplitudeTable {
    pub fn build(spec: &ChainSpec, times: &[f64]) -> Self {
        use rayon::prelude::*;
        let entries = times
            .par_iter()
            .flat_map_iter(|&t| amplitude_matrix(spec, t))
            .collect();
        AmplitudeTable {
            spec: *spec,
            times: times.to_vec(),
            entries,
        }
    }

    pub fn get(&self, j: usize, q: usize, time_index: usize) -> Complex64 {
        let n = self.spec.n_sites;
        self.entries[time_index * n * n + (j - 1) * n + (q - 1)]
    }

    /// Largest `|Σ_q |A_{j,q}|² − 1|` over the table.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.spec.n_sites;
        let mut worst = 0.0_f64;
        for ti in 0..self.times.len() {
            for j in 1..=n {
                let s: f64 = (1..=n).map(|q| self.get(j, q, ti).norm_sqr()).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }
}

/// Semi-infinite-chain amplitude from the end site,
/// `A^∞_{1,n}(t) = i^{n−1}·n·J_n(2dt)/(dt) = i^{n−1}(J_{n−1} + J_{n+1})`.
pub fn amplitude_infinite(n: usize, t: f64, d: f64) -> Complex64 {
    assert!(n >= 1, "site index starts at 1");
    let x = 2.0 * d * t;
    let envelope = if x == 0.0 {
        if n == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        2.0 * n as f64 * bessel_j(n, x) / x
    };
    i_pow(n as i64 - 1) * envelope
}

/// `|A^∞_{1,n}(t)|²`.
pub fn transport_probability(n: usize, t: f64, d: f64) -> f64 {
    amplitude_infinite(n, t, d).norm_sqr()
}

fn single_site_profile(spec: &ChainSpec, row: &BesselRow, j: usize, kind: HamiltonianKind) -> Vec<f64> {
    (1..=spec.n_sites)
        .map(|q| {
            let w = -amplitude_from_row(spec, row, j, q).norm_sqr();
            match kind {
                HamiltonianKind::Xx => w,
                HamiltonianKind::Dq if (j + q) % 2 == 1 => -w,
                HamiltonianKind::Dq => w,
            }
        })
        .collect()
}

/// Per-site `⟨σz_q⟩` of the evolved deviation operator.
///
/// Under XX a source `−σz_j` puts `−|A_{j,q}|²` on site `q`; under DQ the sign
/// alternates, `(−1)^{j+q}`. The thermal DQ profile is `−A_{q,q}(2t)`, and the
/// thermal XX profile never moves.
pub fn magnetization_profile(
    spec: &ChainSpec,
    state: InitialState,
    kind: HamiltonianKind,
    t: f64,
) -> Result<Vec<f64>> {
    state.validate(spec)?;
    let n = spec.n_sites;
    match (state, kind) {
        (InitialState::Thermal, HamiltonianKind::Xx) => Ok(vec![-1.0; n]),
        (InitialState::Thermal, HamiltonianKind::Dq) => {
            let row = transport_row(spec.x(2.0 * t));
            Ok((1..=n)
                .map(|q| -amplitude_from_row(spec, &row, q, q).re)
                .collect())
        }
        (state, kind) => {
            let row = transport_row(spec.x(t));
            let mut out = vec![0.0; n];
            for j in state.sources(n) {
                for (o, v) in out.iter_mut().zip(single_site_profile(spec, &row, j, kind)) {
                    *o += v;
                }
            }
            Ok(out)
        }
    }
}

/// Collective magnetization `Σ_q Tr(σz_q σz_j(t))/2^N` summed over sources.
///
/// Equals 1 at `t = 0` for a single site, 2 for the end-polarized state and
/// `N` for the thermal state. Under DQ a single source gives
/// `Σ_p A_{j,p}(t)²`, the thermal state gives `Σ_p A_{p,p}(2t)`.
pub fn collective_signal(
    spec: &ChainSpec,
    state: InitialState,
    kind: HamiltonianKind,
    t: f64,
) -> Result<f64> {
    state.validate(spec)?;
    let n = spec.n_sites;
    if kind == HamiltonianKind::Xx {
        return Ok(state.sources(n).len() as f64);
    }
    let total = match state {
        InitialState::Thermal => {
            let row = transport_row(spec.x(2.0 * t));
            (1..=n)
                .map(|p| amplitude_from_row(spec, &row, p, p))
                .sum::<Complex64>()
        }
        _ => {
            let row = transport_row(spec.x(t));
            state
                .sources(n)
                .into_iter()
                .flat_map(|j| {
                    let row = &row;
                    (1..=n).map(move |p| amplitude_from_row(spec, row, j, p).powi(2))
                })
                .sum::<Complex64>()
        }
    };
    debug_assert!(total.im.abs() < 1e-10, "imaginary residue {}", total.im);
    Ok(total.re)
}

/// Whether the two end waves of an end-polarized chain can still be treated
/// as independent at time `t`.
pub fn end_waves_independent(spec: &ChainSpec, t: f64) -> bool {
    t <= END_WAVE_OVERLAP_FRACTION * spec.mirror_time()
}

/// Nearest-neighbour two-spin correlation `Σ_i ⟨σx_i σy_{i+1} + σy_i σx_{i+1}⟩`.
///
/// Under DQ a source `−σz_j` gives `−2i Σ_p A_{j,p} A_{j,p+1}` and the thermal
/// state gives `−2i Σ_p A_{p,p+1}(2t)`. XX evolution never creates pair terms,
/// so the correlation vanishes there.
pub fn two_spin_signal(
    spec: &ChainSpec,
    state: InitialState,
    kind: HamiltonianKind,
    t: f64,
) -> Result<f64> {
    state.validate(spec)?;
    if kind == HamiltonianKind::Xx {
        return Ok(0.0);
    }
    let n = spec.n_sites;
    let minus_two_i = Complex64::new(0.0, -2.0);
    let total: Complex64 = match state {
        InitialState::Thermal => {
            let row = transport_row(spec.x(2.0 * t));
            (1..n)
                .map(|p| amplitude_from_row(spec, &row, p, p + 1))
                .sum::<Complex64>()
        }
        _ => {
            let row = transport_row(spec.x(t));
            let mut s = Complex64::new(0.0, 0.0);
            for j in state.sources(n) {
                let amps: Vec<Complex64> = (1..=n)
                    .map(|p| amplitude_from_row(spec, &row, j, p))
                    .collect();
                s += amps.windows(2).map(|w| w[0] * w[1]).sum::<Complex64>();
            }
            s
        }
    } * minus_two_i;
    debug_assert!(total.im.abs() < 1e-10, "imaginary residue {}", total.im);
    Ok(total.re)
}

/// `v_g = 2·a·d`, m/s.
pub fn group_velocity(spec: &ChainSpec) -> f64 {
    2.0 * spec.spacing * spec.coupling
}

/// `ω(k) = 2d|cos(k·a)|`, rad/s.
pub fn dispersion(k: f64, spec: &ChainSpec) -> f64 {
    2.0 * spec.coupling * (k * spec.spacing).cos().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Mode-sum route `Σ_k (2/Ñ) sin(kj) sin(kq) e^{ix cos k}`, independent of
    /// the Bessel image sum.
    fn mode_sum(n: usize, j: usize, q: usize, x: f64) -> Complex64 {
        let nt = (n + 1) as f64;
        (1..=n)
            .map(|kappa| {
                let k = std::f64::consts::PI * kappa as f64 / nt;
                let w = 2.0 / nt * (k * j as f64).sin() * (k * q as f64).sin();
                Complex64::from_polar(w, x * k.cos())
            })
            .sum()
    }

    #[test]
    fn amplitude_at_zero_time() {
        let spec = ChainSpec::new(7, 1.0).unwrap();
        assert_eq!(amplitude(&spec, 3, 3, 0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(amplitude(&spec, 1, 2, 0.0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn amplitude_rejects_bad_sites() {
        let spec = ChainSpec::new(5, 1.0).unwrap();
        assert!(matches!(
            amplitude(&spec, 0, 1, 1.0),
            Err(Error::SiteOutOfRange { site: 0, .. })
        ));
        assert!(amplitude(&spec, 1, 6, 1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ChainSpec::new(1, 1.0).is_err());
        assert!(ChainSpec::new(4, 0.0).is_err());
        assert!(ChainSpec::with_spacing(4, 1.0, -1.0).is_err());
    }

    #[test]
    fn image_sum_matches_mode_sum() {
        for n in [2usize, 5, 8, 13] {
            let spec = ChainSpec::new(n, 1.0).unwrap();
            for &x in &[0.3, 1.5, 7.0, 31.0] {
                let t = x / 2.0;
                for j in 1..=n {
                    for q in 1..=n {
                        let a = amplitude(&spec, j, q, t).unwrap();
                        let b = mode_sum(n, j, q, x);
                        assert!((a - b).norm() < 1e-12, "n={n} x={x} j={j} q={q}");
                    }
                }
            }
        }
    }

    #[test]
    fn infinite_amplitude_limits_and_identity() {
        assert_eq!(amplitude_infinite(1, 0.0, 3.0), c(1.0, 0.0));
        assert_eq!(amplitude_infinite(4, 0.0, 3.0), c(0.0, 0.0));
        let (n, x, d) = (3usize, 4.0, 2.0);
        let t = x / (2.0 * d);
        let want = i_pow(n as i64 - 1) * (bessel_j(n - 1, x) + bessel_j(n + 1, x));
        assert!((amplitude_infinite(n, t, d) - want).norm() < 1e-13);
        let p = transport_probability(5, 1.5 / d, d);
        assert!((p - amplitude_infinite(5, 1.5 / d, d).norm_sqr()).abs() < 1e-15);
        assert_eq!(transport_probability(1, 0.0, d), 1.0);
    }

    #[test]
    fn infinite_amplitude_is_the_uncapped_semi_infinite_limit() {
        // m = 0 images of a long chain reproduce the end-site formula.
        let spec = ChainSpec::new(60, 1.0).unwrap().with_replica_cap(ReplicaCap::Max(0));
        for n in 1..20 {
            let a = amplitude(&spec, 1, n, 2.5).unwrap();
            assert!((a - amplitude_infinite(n, 2.5, 1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn profile_at_zero_time() {
        let spec = ChainSpec::new(6, 1.0).unwrap();
        let p = magnetization_profile(&spec, InitialState::SingleSite(1), HamiltonianKind::Dq, 0.0).unwrap();
        assert_eq!(p, vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = magnetization_profile(&spec, InitialState::Thermal, HamiltonianKind::Dq, 0.0).unwrap();
        assert!(p.iter().all(|v| (v + 1.0).abs() < 1e-15));
    }

    #[test]
    fn dq_and_xx_profiles_differ_by_sublattice_sign() {
        let spec = ChainSpec::new(9, 2.0).unwrap();
        let j = 3;
        for &t in &[0.1, 0.7, 2.3] {
            let dq = magnetization_profile(&spec, InitialState::SingleSite(j), HamiltonianKind::Dq, t).unwrap();
            let xx = magnetization_profile(&spec, InitialState::SingleSite(j), HamiltonianKind::Xx, t).unwrap();
            for q in 1..=9 {
                let s = if (q + j) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((dq[q - 1] - s * xx[q - 1]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn collective_signal_initial_values() {
        let spec = ChainSpec::new(10, 1.0).unwrap();
        let s = |st| collective_signal(&spec, st, HamiltonianKind::Dq, 0.0).unwrap();
        assert!((s(InitialState::SingleSite(4)) - 1.0).abs() < 1e-15);
        assert!((s(InitialState::EndPolarized) - 2.0).abs() < 1e-15);
        assert!((s(InitialState::Thermal) - 10.0).abs() < 1e-15);
        for &t in &[0.0, 1.0, 17.0] {
            let xx = collective_signal(&spec, InitialState::Thermal, HamiltonianKind::Xx, t).unwrap();
            assert_eq!(xx, 10.0);
        }
    }

    #[test]
    fn collective_signal_is_sum_of_profile() {
        let spec = ChainSpec::new(8, 1.3).unwrap();
        for st in [InitialState::SingleSite(2), InitialState::EndPolarized, InitialState::Thermal] {
            for &t in &[0.2, 1.1, 4.0] {
                let s = collective_signal(&spec, st, HamiltonianKind::Dq, t).unwrap();
                let p: f64 = magnetization_profile(&spec, st, HamiltonianKind::Dq, t).unwrap().iter().sum();
                assert!((s + p).abs() < 1e-12, "{st:?} t={t}: {s} vs {p}");
            }
        }
    }

    #[test]
    fn end_polarized_signal_is_twice_the_end_return() {
        let spec = ChainSpec::new(12, 1.0).unwrap();
        for &t in &[0.3, 2.0, 5.5] {
            let s = collective_signal(&spec, InitialState::EndPolarized, HamiltonianKind::Dq, t).unwrap();
            let a11 = amplitude(&spec, 1, 1, 2.0 * t).unwrap();
            assert!((s - 2.0 * a11.re).abs() < 1e-12);
        }
        assert!(end_waves_independent(&spec, 0.5 * spec.mirror_time()));
        assert!(!end_waves_independent(&spec, 0.9 * spec.mirror_time()));
    }

    #[test]
    fn two_spin_signal_vanishes_initially() {
        let spec = ChainSpec::new(8, 1.0).unwrap();
        for st in [InitialState::SingleSite(1), InitialState::Thermal, InitialState::EndPolarized] {
            assert_eq!(two_spin_signal(&spec, st, HamiltonianKind::Dq, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_spin_signal_leads_magnetization_by_quarter_period() {
        // The first extremum of the two-spin signal sits where the collective
        // magnetization has its steepest descent, i.e. where d²S/dt² = 0,
        // well before the first turning point of S.
        let spec = ChainSpec::new(40, 1.0).unwrap();
        let st = InitialState::Thermal;
        let dt = 1e-3;
        let mut prev = 0.0;
        let mut first_extremum = None;
        let mut first_turn = None;
        let mut prev_slope = -1e-30;
        for i in 1..4000 {
            let t = i as f64 * dt;
            let v = two_spin_signal(&spec, st, HamiltonianKind::Dq, t).unwrap();
            if first_extremum.is_none() && i > 1 && v.abs() < prev {
                first_extremum = Some(t - dt);
            }
            prev = v.abs();
            let s1 = collective_signal(&spec, st, HamiltonianKind::Dq, t + dt).unwrap();
            let s0 = collective_signal(&spec, st, HamiltonianKind::Dq, t).unwrap();
            let slope = s1 - s0;
            if first_turn.is_none() && prev_slope < 0.0 && slope >= 0.0 {
                first_turn = Some(t);
            }
            prev_slope = slope;
            if first_extremum.is_some() && first_turn.is_some() {
                break;
            }
        }
        let (e, z) = (first_extremum.unwrap(), first_turn.unwrap());
        assert!(e < z, "two-spin extremum {e} should precede magnetization turn {z}");
    }

    #[test]
    fn velocity_and_dispersion() {
        let spec = ChainSpec::new(10, 8.78e3).unwrap();
        assert!((group_velocity(&spec) - 6.04e-6).abs() < 0.005e-6);
        let spec2 = ChainSpec::new(10, 8.17e3).unwrap();
        assert!((group_velocity(&spec2) - 5.62e-6).abs() < 0.005e-6);
        let wide = ChainSpec::with_spacing(10, 8.17e3, 2.0 * FAP_SPACING_M).unwrap();
        assert!((group_velocity(&wide) - 2.0 * group_velocity(&spec2)).abs() < 1e-18);

        assert!((dispersion(0.0, &spec) - 2.0 * spec.coupling).abs() < 1e-9);
        let k0 = std::f64::consts::PI / (2.0 * spec.spacing);
        assert!(dispersion(k0, &spec).abs() < 1e-9);
        // Slope from the left of the cusp at k = π/2a.
        let h = 1e-4 * k0;
        let slope = (dispersion(k0 - 2.0 * h, &spec) - dispersion(k0 - h, &spec)) / h;
        let central = {
            // central difference of the smooth branch 2d·cos(ka)
            let f = |k: f64| 2.0 * spec.coupling * (k * spec.spacing).cos();
            -(f(k0 + h) - f(k0 - h)) / (2.0 * h)
        };
        assert!((central / group_velocity(&spec) - 1.0).abs() < 1e-6);
        assert!((slope / group_velocity(&spec) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn table_is_unitary() {
        let spec = ChainSpec::new(7, 1.0).unwrap();
        let times: Vec<f64> = (0..25).map(|i| i as f64 * 0.4).collect();
        let table = AmplitudeTable::build(&spec, &times);
        assert!(table.unitarity_defect() < 1e-10);
        assert_eq!(table.get(2, 2, 0), c(1.0, 0.0));
        assert_eq!(table.get(2, 3, 0), c(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn unitarity_symmetry_mirror(n in 4usize..=12, x in 0.0f64..20.0) {
            let spec = ChainSpec::new(n, 1.0).unwrap();
            let m = amplitude_matrix(&spec, x / 2.0);
            for j in 0..n {
                let s: f64 = (0..n).map(|q| m[j * n + q].norm_sqr()).sum();
                prop_assert!((s - 1.0).abs() < 1e-10);
                for q in 0..n {
                    prop_assert!((m[j * n + q] - m[q * n + j]).norm() < 1e-12);
                    let mirror = m[(n - 1 - j) * n + (n - 1 - q)];
                    prop_assert!((m[j * n + q].norm() - mirror.norm()).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn infinite_chain_recurrence(n in 2usize..=30, x in 0.5f64..10.0) {
            // The dephased envelope a_n = (−i)^{n−1} A^∞_{1,n} obeys
            // ∂_t a_n = −d (a_{n+1} − a_{n−1}).
            let d = 1.7;
            let t = x / (2.0 * d);
            let env = |k: usize, t: f64| (i_pow(-(k as i64 - 1)) * amplitude_infinite(k, t, d)).re;
            let h = 1e-5 * t;
            let lhs = (env(n, t + h) - env(n, t - h)) / (2.0 * h);
            let rhs = -d * (env(n + 1, t) - env(n - 1, t));
            prop_assert!((lhs - rhs).abs() <= 1e-6 * rhs.abs().max(lhs.abs()).max(1e-3),
                "lhs {} rhs {}", lhs, rhs);
        }
    }
}

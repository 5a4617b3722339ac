//! The restricted Liouville space spanned by fermion bilinears.
//!
//! Spin operators map to fermions through `c_h = −(Π_{l<h} σz_l) σ⁺_h`, so a
//! fermion is a down spin and `c†_h c_h = (1 − σz_h)/2`. Every deviation
//! operator reachable from `σz` sources under nearest-neighbour DQ or XX
//! evolution is a combination of the `N(N+1)/2` operators
//!
//! | class           | `p > q`                    | `p = q`            |
//! |-----------------|----------------------------|--------------------|
//! | `Symmetric`     | `c†_p c_q + c†_q c_p`      | `c†_p c_p − 1/2`   |
//! | `Antisymmetric` | `c†_p c†_q − c_q c_p`      |                    |
//! | `Current`       | `c†_p c_q − c†_q c_p`      |                    |
//!
//! DQ evolution uses `Symmetric` on even distances and `Antisymmetric` on odd
//! ones; XX evolution uses `Current` on odd distances.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{
    amplitude_from_row, i_pow, transport_row, ChainSpec, HamiltonianKind, InitialState,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilinearClass {
    Symmetric,
    Antisymmetric,
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BilinearIndex {
    pub p: usize,
    pub q: usize,
    pub class: BilinearClass,
}

impl BilinearIndex {
    /// Index of the class that DQ evolution populates at this distance.
    pub fn dq(p: usize, q: usize) -> Self {
        let (p, q) = if p >= q { (p, q) } else { (q, p) };
        let class = if (p - q) % 2 == 0 {
            BilinearClass::Symmetric
        } else {
            BilinearClass::Antisymmetric
        };
        BilinearIndex { p, q, class }
    }

    /// Index of the class that XX evolution populates at this distance.
    pub fn xx(p: usize, q: usize) -> Self {
        let (p, q) = if p >= q { (p, q) } else { (q, p) };
        let class = if (p - q) % 2 == 0 {
            BilinearClass::Symmetric
        } else {
            BilinearClass::Current
        };
        BilinearIndex { p, q, class }
    }

    pub fn for_kind(kind: HamiltonianKind, p: usize, q: usize) -> Self {
        match kind {
            HamiltonianKind::Dq => Self::dq(p, q),
            HamiltonianKind::Xx => Self::xx(p, q),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }

    /// `Tr(B†B)/2^N` for the basis operator.
    pub fn norm_sqr(&self) -> f64 {
        if self.is_diagonal() {
            0.25
        } else {
            0.5
        }
    }

    /// Spin form of the basis operator.
    pub fn pauli_strings(&self) -> Vec<PauliString> {
        use SiteFactor::{Lower, Raise};
        let (p, q) = (self.p, self.q);
        if p == q {
            return vec![PauliString::single(q, SiteFactor::Z, Complex64::new(-0.5, 0.0))];
        }
        let one = Complex64::new(1.0, 0.0);
        match self.class {
            BilinearClass::Symmetric => vec![
                PauliString::span(q, p, Raise, Lower, one),
                PauliString::span(q, p, Lower, Raise, one),
            ],
            BilinearClass::Current => vec![
                PauliString::span(q, p, Raise, Lower, one),
                PauliString::span(q, p, Lower, Raise, -one),
            ],
            BilinearClass::Antisymmetric => vec![
                PauliString::span(q, p, Raise, Raise, one),
                PauliString::span(q, p, Lower, Lower, -one),
            ],
        }
    }
}

/// Sparse coefficients of an evolved deviation operator in the bilinear basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorCoefficients {
    pub spec: ChainSpec,
    #[serde(with = "entry_list")]
    pub entries: BTreeMap<BilinearIndex, Complex64>,
    pub source: InitialState,
    pub kind: HamiltonianKind,
    pub time: f64,
}

impl OperatorCoefficients {
    /// `Tr(ρ†ρ)/2^N` of the represented operator.
    pub fn norm_sqr(&self) -> f64 {
        self.entries
            .iter()
            .map(|(k, c)| c.norm_sqr() * k.norm_sqr())
            .sum()
    }

    /// The operator as a sum of Pauli strings, merged by support.
    pub fn pauli_expansion(&self) -> BTreeMap<(usize, Vec<SiteFactor>), Complex64> {
        let mut out = BTreeMap::new();
        for (index, c) in &self.entries {
            for s in index.pauli_strings() {
                *out.entry((s.first_site, s.factors))
                    .or_insert(Complex64::new(0.0, 0.0)) += s.scalar * c;
            }
        }
        out
    }

    pub fn get(&self, index: &BilinearIndex) -> Complex64 {
        self.entries
            .get(index)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }
}

/// JSON maps need string keys, so entries travel as a list of pairs.
mod entry_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<BilinearIndex, Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<BilinearIndex, Complex64>, D::Error> {
        let v: Vec<(BilinearIndex, Complex64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

fn add(map: &mut BTreeMap<BilinearIndex, Complex64>, k: BilinearIndex, v: Complex64) {
    *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
}

/// Coefficients of the evolved deviation operator.
///
/// For a source `−σz_j` under DQ the `(p, q)` coefficient is
/// `2·i^{p−q}·A_{j,q}A_{j,p}` on even distances and `i` times that on odd
/// ones. Under XX it is `2(−1)^{p−j}·A_{j,q}A_{j,p}`. The thermal DQ state has
/// `2·i^{p−q}·A_{p,q}(2t)` (times `i` on odd distances) and the thermal XX
/// state is stationary.
pub fn evolve_coefficients(
    spec: &ChainSpec,
    state: InitialState,
    kind: HamiltonianKind,
    t: f64,
) -> Result<OperatorCoefficients> {
    state.validate(spec)?;
    let n = spec.n_sites;
    let mut entries = BTreeMap::new();
    match (state, kind) {
        (InitialState::Thermal, HamiltonianKind::Xx) => {
            for p in 1..=n {
                add(&mut entries, BilinearIndex::xx(p, p), Complex64::new(2.0, 0.0));
            }
        }
        (InitialState::Thermal, HamiltonianKind::Dq) => {
            let row = transport_row(spec.x(2.0 * t));
            for p in 1..=n {
                for q in 1..=p {
                    let dist = (p - q) as i64;
                    let phase = i_pow(dist + dist % 2);
                    let v = 2.0 * phase * amplitude_from_row(spec, &row, p, q);
                    add(&mut entries, BilinearIndex::dq(p, q), v);
                }
            }
        }
        (state, kind) => {
            let row = transport_row(spec.x(t));
            for j in state.sources(n) {
                let amps: Vec<Complex64> = (1..=n)
                    .map(|q| amplitude_from_row(spec, &row, j, q))
                    .collect();
                for p in 1..=n {
                    for q in 1..=p {
                        let dist = (p - q) as i64;
                        let product = amps[q - 1] * amps[p - 1];
                        let phase = match kind {
                            HamiltonianKind::Dq => i_pow(dist + dist % 2),
                            HamiltonianKind::Xx => i_pow(2 * (p as i64 - j as i64)),
                        };
                        add(&mut entries, BilinearIndex::for_kind(kind, p, q), 2.0 * phase * product);
                    }
                }
            }
        }
    }
    entries.retain(|_, v| v.norm() > 1e-300);
    Ok(OperatorCoefficients {
        spec: *spec,
        entries,
        source: state,
        kind,
        time: t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteFactor {
    /// `σ⁺ = |↑⟩⟨↓|`.
    Raise,
    /// `σ⁻ = |↓⟩⟨↑|`.
    Lower,
    Z,
    Identity,
}

/// `scalar · factor_{first} ⊗ factor_{first+1} ⊗ …` on contiguous sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub first_site: usize,
    pub factors: Vec<SiteFactor>,
    pub scalar: Complex64,
}

impl PauliString {
    pub fn single(site: usize, factor: SiteFactor, scalar: Complex64) -> Self {
        PauliString {
            first_site: site,
            factors: vec![factor],
            scalar,
        }
    }

    /// `scalar · start_q σz … σz end_p`.
    pub fn span(q: usize, p: usize, start: SiteFactor, end: SiteFactor, scalar: Complex64) -> Self {
        debug_assert!(q < p);
        let mut factors = vec![start];
        factors.extend(std::iter::repeat_n(SiteFactor::Z, p - q - 1));
        factors.push(end);
        PauliString {
            first_site: q,
            factors,
            scalar,
        }
    }

    pub fn last_site(&self) -> usize {
        self.first_site + self.factors.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FermionTerm {
    /// `c†_p c†_q`.
    CreateCreate,
    /// `c_q c_p`.
    AnnihilateAnnihilate,
    /// `c†_q c_p`.
    CreateAnnihilate,
    /// `c†_p c_q`.
    AnnihilateCreate,
    /// `c†_q c_q`; requires `p = q`.
    Number,
}

/// Spin form of a single fermion product on sites `q ≤ p`.
pub fn to_pauli_string(p: usize, q: usize, term: FermionTerm) -> Result<Vec<PauliString>> {
    use SiteFactor::{Lower, Raise};
    if q == 0 || q > p {
        return Err(Error::InvalidSpec(format!("need 1 ≤ q ≤ p, got q={q}, p={p}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    match term {
        FermionTerm::Number if p == q => Ok(vec![
            PauliString::single(q, SiteFactor::Identity, half),
            PauliString::single(q, SiteFactor::Z, -half),
        ]),
        FermionTerm::Number => Err(Error::InvalidSpec("number term needs p = q".into())),
        _ if p == q => Err(Error::InvalidSpec(format!("{term:?} needs q < p"))),
        FermionTerm::CreateCreate => Ok(vec![PauliString::span(q, p, Lower, Lower, -one)]),
        FermionTerm::AnnihilateAnnihilate => Ok(vec![PauliString::span(q, p, Raise, Raise, -one)]),
        FermionTerm::CreateAnnihilate => Ok(vec![PauliString::span(q, p, Lower, Raise, one)]),
        FermionTerm::AnnihilateCreate => Ok(vec![PauliString::span(q, p, Raise, Lower, one)]),
    }
}

/// Real multi-spin correlation amplitudes along the chain.
///
/// Order 1 is `|A_{j,n}|²`; order `k ≥ 2` is the dephased product
/// `i^{−(2n+k−1−2j)} A_{j,n} A_{j,n+k−1}`, which is real.
pub fn correlation_amplitudes(
    spec: &ChainSpec,
    j: usize,
    t: f64,
    order: usize,
) -> Result<Vec<(usize, f64)>> {
    spec.check_site(j)?;
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidSpec(format!("correlation order must be 1..=4, got {order}")));
    }
    let n = spec.n_sites;
    let row = transport_row(spec.x(t));
    let amps: Vec<Complex64> = (1..=n)
        .map(|q| amplitude_from_row(spec, &row, j, q))
        .collect();
    if order == 1 {
        return Ok(amps.iter().enumerate().map(|(i, a)| (i + 1, a.norm_sqr())).collect());
    }
    let k = order - 1;
    Ok((1..=n.saturating_sub(k))
        .map(|site| {
            let phase = i_pow(-(2 * site as i64 + k as i64 - 2 * j as i64));
            (site, (phase * amps[site - 1] * amps[site - 1 + k]).re)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Z,
    X,
}

/// Intensity per coherence order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSpectrum {
    pub basis: Basis,
    pub intensities: BTreeMap<i32, f64>,
}

impl CoherenceSpectrum {
    pub fn total(&self) -> f64 {
        self.intensities.values().sum()
    }

    pub fn get(&self, order: i32) -> f64 {
        self.intensities.get(&order).copied().unwrap_or(0.0)
    }

    /// Copy scaled to unit total.
    pub fn normalized(&self) -> Self {
        let total = self.total();
        let scale = if total > 0.0 { 1.0 / total } else { 0.0 };
        CoherenceSpectrum {
            basis: self.basis,
            intensities: self.intensities.iter().map(|(k, v)| (*k, v * scale)).collect(),
        }
    }

    /// Largest intensity at an order that fails `allowed`.
    pub fn max_outside(&self, allowed: impl Fn(i32) -> bool) -> f64 {
        self.intensities
            .iter()
            .filter(|(k, _)| !allowed(**k))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

/// z-basis coherence spectrum; a string `σ^±…` has order `#σ⁺ − #σ⁻` and
/// weight `|scalar|²·2^{−#σ^±}`.
pub fn z_basis_spectrum(coeffs: &OperatorCoefficients) -> CoherenceSpectrum {
    let mut intensities = BTreeMap::new();
    for ((_, factors), c) in coeffs.pauli_expansion() {
        let mut order = 0i32;
        let mut weight = c.norm_sqr();
        for f in &factors {
            match f {
                SiteFactor::Raise => {
                    order += 1;
                    weight *= 0.5;
                }
                SiteFactor::Lower => {
                    order -= 1;
                    weight *= 0.5;
                }
                _ => {}
            }
        }
        *intensities.entry(order).or_insert(0.0) += weight;
    }
    CoherenceSpectrum {
        basis: Basis::Z,
        intensities,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Expand ladder factors into normalized Paulis: `σ^± = (X ± iY)/2`.
fn to_hermitian_paulis(factors: &[SiteFactor]) -> Vec<(Vec<Pauli>, Complex64)> {
    let mut terms = vec![(Vec::with_capacity(factors.len()), Complex64::new(1.0, 0.0))];
    for f in factors {
        let choices: &[(Pauli, Complex64)] = match f {
            SiteFactor::Identity => &[(Pauli::I, Complex64::new(1.0, 0.0))],
            SiteFactor::Z => &[(Pauli::Z, Complex64::new(1.0, 0.0))],
            SiteFactor::Raise => &[
                (Pauli::X, Complex64::new(0.5, 0.0)),
                (Pauli::Y, Complex64::new(0.0, 0.5)),
            ],
            SiteFactor::Lower => &[
                (Pauli::X, Complex64::new(0.5, 0.0)),
                (Pauli::Y, Complex64::new(0.0, -0.5)),
            ],
        };
        terms = terms
            .into_iter()
            .flat_map(|(ps, c)| {
                choices.iter().map(move |(p, w)| {
                    let mut ps = ps.clone();
                    ps.push(*p);
                    (ps, c * w)
                })
            })
            .collect();
    }
    terms
}

/// x-basis coherence spectrum.
///
/// About the x-axis `X` has order 0 while `Y` and `Z` split evenly between
/// orders ±1, so a Pauli string with `k` factors from `{Y, Z}` spreads its
/// weight binomially over `−k, −k+2, …, k`. Distinct strings in the bilinear
/// family never share an x-order eigenoperator, so their weights add.
pub fn x_basis_spectrum(coeffs: &OperatorCoefficients) -> CoherenceSpectrum {
    let mut paulis: BTreeMap<(usize, Vec<Pauli>), Complex64> = BTreeMap::new();
    for ((first, factors), c) in coeffs.pauli_expansion() {
        for (ps, w) in to_hermitian_paulis(&factors) {
            *paulis.entry((first, ps)).or_insert(Complex64::new(0.0, 0.0)) += c * w;
        }
    }
    let mut intensities = BTreeMap::new();
    for ((_, ps), c) in paulis {
        let weight = c.norm_sqr();
        if weight == 0.0 {
            continue;
        }
        let k = ps.iter().filter(|p| matches!(p, Pauli::Y | Pauli::Z)).count();
        let mut binom = 1.0_f64;
        let scale = 0.5_f64.powi(k as i32);
        for up in 0..=k {
            let order = 2 * up as i32 - k as i32;
            *intensities.entry(order).or_insert(0.0) += weight * binom * scale;
            binom = binom * (k - up) as f64 / (up + 1) as f64;
        }
    }
    CoherenceSpectrum {
        basis: Basis::X,
        intensities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::amplitude;
    use proptest::prelude::*;

    fn spec(n: usize) -> ChainSpec {
        ChainSpec::new(n, 1.0).unwrap()
    }

    #[test]
    fn single_site_at_zero_time_is_one_diagonal_entry() {
        let c = evolve_coefficients(&spec(6), InitialState::SingleSite(3), HamiltonianKind::Dq, 0.0).unwrap();
        assert_eq!(c.entries.len(), 1);
        assert_eq!(c.get(&BilinearIndex::dq(3, 3)), Complex64::new(2.0, 0.0));
        assert!((c.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thermal_xx_is_stationary() {
        let s = spec(7);
        let c0 = evolve_coefficients(&s, InitialState::Thermal, HamiltonianKind::Xx, 0.0).unwrap();
        let c1 = evolve_coefficients(&s, InitialState::Thermal, HamiltonianKind::Xx, 3.7).unwrap();
        assert_eq!(c0.entries, c1.entries);
    }

    #[test]
    fn entry_count_is_bounded_by_the_restricted_dimension() {
        let s = spec(9);
        for st in [InitialState::SingleSite(4), InitialState::Thermal, InitialState::EndPolarized] {
            let c = evolve_coefficients(&s, st, HamiltonianKind::Dq, 1.3).unwrap();
            assert!(c.entries.len() <= 9 * 10 / 2);
        }
    }

    #[test]
    fn norm_is_conserved() {
        let s = spec(8);
        for &t in &[0.0, 0.4, 2.5, 9.0] {
            for (st, want) in [
                (InitialState::SingleSite(2), 1.0),
                (InitialState::EndPolarized, 2.0),
                (InitialState::Thermal, 8.0),
            ] {
                for kind in [HamiltonianKind::Dq, HamiltonianKind::Xx] {
                    let c = evolve_coefficients(&s, st, kind, t).unwrap();
                    assert!((c.norm_sqr() - want).abs() < 1e-10, "{st:?} {kind:?} t={t}");
                }
            }
        }
    }

    #[test]
    fn symmetric_coefficients_are_real_for_dq() {
        let s = spec(9);
        for st in [InitialState::SingleSite(1), InitialState::SingleSite(5), InitialState::Thermal] {
            let c = evolve_coefficients(&s, st, HamiltonianKind::Dq, 1.7).unwrap();
            for (k, v) in &c.entries {
                if k.class == BilinearClass::Symmetric {
                    assert!(v.im.abs() < 1e-12, "{k:?} {v}");
                }
            }
        }
    }

    #[test]
    fn diagonal_reproduces_the_profile() {
        let s = spec(7);
        let t = 0.9;
        let c = evolve_coefficients(&s, InitialState::SingleSite(2), HamiltonianKind::Dq, t).unwrap();
        let profile = crate::chain::magnetization_profile(&s, InitialState::SingleSite(2), HamiltonianKind::Dq, t).unwrap();
        for q in 1..=7 {
            // c·(c†c − 1/2) = −(c/2)·σz.
            let from_coeffs = -0.5 * c.get(&BilinearIndex::dq(q, q)).re;
            assert!((from_coeffs - profile[q - 1]).abs() < 1e-13);
        }
    }

    #[test]
    fn pauli_forms() {
        use SiteFactor::*;
        let d = to_pauli_string(2, 2, FermionTerm::Number).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].factors, vec![Identity]);
        assert_eq!(d[1].factors, vec![Z]);
        assert_eq!(d[1].scalar, Complex64::new(-0.5, 0.0));

        let cc = to_pauli_string(2, 1, FermionTerm::CreateCreate).unwrap();
        assert_eq!(cc[0].factors, vec![Lower, Lower]);
        assert_eq!(cc[0].first_site, 1);

        let hop = to_pauli_string(3, 1, FermionTerm::AnnihilateCreate).unwrap();
        assert_eq!(hop[0].factors, vec![Raise, Z, Lower]);
        assert_eq!(hop[0].last_site(), 3);

        assert!(to_pauli_string(1, 2, FermionTerm::CreateCreate).is_err());
        assert!(to_pauli_string(2, 2, FermionTerm::CreateCreate).is_err());
        assert!(to_pauli_string(3, 2, FermionTerm::Number).is_err());
    }

    #[test]
    fn correlation_amplitudes_at_zero_time() {
        let s = spec(6);
        let one = correlation_amplitudes(&s, 2, 0.0, 1).unwrap();
        for (n, v) in one {
            assert_eq!(v, if n == 2 { 1.0 } else { 0.0 });
        }
        for order in 2..=4 {
            let v = correlation_amplitudes(&s, 2, 0.0, order).unwrap();
            assert_eq!(v.len(), 6 - (order - 1));
            assert!(v.iter().all(|(_, a)| *a == 0.0));
        }
        assert!(correlation_amplitudes(&s, 2, 0.0, 5).is_err());
    }

    #[test]
    fn correlation_amplitudes_match_products() {
        let s = spec(9);
        let t = 1.1;
        let a: Vec<Complex64> = (1..=9).map(|q| amplitude(&s, 1, q, t).unwrap()).collect();
        for order in 2..=4 {
            for (n, v) in correlation_amplitudes(&s, 1, t, order).unwrap() {
                let prod = a[n - 1] * a[n - 1 + order - 1];
                assert!((v.abs() - prod.norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectra_of_initial_polarization() {
        let c = evolve_coefficients(&spec(5), InitialState::SingleSite(2), HamiltonianKind::Dq, 0.0).unwrap();
        let z = z_basis_spectrum(&c);
        assert_eq!(z.intensities.len(), 1);
        assert!((z.get(0) - 1.0).abs() < 1e-15);
        let x = x_basis_spectrum(&c);
        assert!((x.get(1) - 0.5).abs() < 1e-15);
        assert!((x.get(-1) - 0.5).abs() < 1e-15);
        assert_eq!(x.get(0), 0.0);
    }

    #[test]
    fn coefficients_round_trip_through_json() {
        let c = evolve_coefficients(&spec(4), InitialState::SingleSite(1), HamiltonianKind::Dq, 0.3).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: OperatorCoefficients = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn normalized_spectrum_has_unit_total() {
        let c = evolve_coefficients(&spec(8), InitialState::Thermal, HamiltonianKind::Dq, 0.8).unwrap();
        let z = z_basis_spectrum(&c);
        assert!((z.total() - 8.0).abs() < 1e-10);
        assert!((z.normalized().total() - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn spectra_selection_rules(n in 3usize..=10, x in 0.0f64..12.0, j in 1usize..=10, thermal: bool) {
            let s = spec(n);
            let st = if thermal { InitialState::Thermal } else { InitialState::SingleSite(j.min(n)) };
            let c = evolve_coefficients(&s, st, HamiltonianKind::Dq, x / 2.0).unwrap();
            let z = z_basis_spectrum(&c);
            prop_assert!(z.max_outside(|o| o == 0 || o.abs() == 2) < 1e-10);
            prop_assert!((z.total() - c.norm_sqr()).abs() < 1e-10);
            let xs = x_basis_spectrum(&c);
            prop_assert!(xs.max_outside(|o| o % 2 != 0) < 1e-10);
            prop_assert!((xs.total() - c.norm_sqr()).abs() < 1e-10);
            for (o, v) in &xs.intensities {
                prop_assert!((v - xs.get(-o)).abs() < 1e-12);
            }
        }
    }
}

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::{build_hamiltonian, check_size, DenseOperator, HamiltonianSpec, Propagator, DEFAULT_SIZE_CAP};
use super::monomial::Monomial;
use crate::chain::InitialState;
use crate::error::{Error, Result};
use crate::liouville::{BilinearClass, BilinearIndex, OperatorCoefficients, PauliString, SiteFactor};

/// Deviation operator `−Σ_{j∈sources} σz_j`.
pub fn initial_density(n_sites: usize, state: InitialState) -> Result<DenseOperator> {
    check_size(n_sites, DEFAULT_SIZE_CAP)?;
    if let InitialState::SingleSite(j) = state {
        if j == 0 || j > n_sites {
            return Err(Error::SiteOutOfRange { site: j, n_sites });
        }
    }
    let dim = 1usize << n_sites;
    let mut m = DMatrix::zeros(dim, dim);
    for j in state.sources(n_sites) {
        Monomial::sigma_z(n_sites, j).add_to(&mut m, Complex64::new(-1.0, 0.0));
    }
    Ok(DenseOperator::new(m, format!("{state:?}")))
}

/// `Tr(σz_q ρ)/2^N` for every site.
pub fn site_magnetization(rho: &DenseOperator) -> Vec<f64> {
    let n = rho.n_sites();
    let dim = rho.dim() as f64;
    (1..=n)
        .map(|q| Monomial::sigma_z(n, q).overlap(&rho.matrix).re / dim)
        .collect()
}

/// `Σ_i Tr((σx_i σy_{i+1} + σy_i σx_{i+1}) ρ)/2^N`.
pub fn two_spin_correlation(rho: &DenseOperator) -> f64 {
    let n = rho.n_sites();
    let dim = rho.dim() as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 1..n {
        let xy = Monomial::sigma_x(n, i).mul(&Monomial::sigma_y(n, i + 1));
        let yx = Monomial::sigma_y(n, i).mul(&Monomial::sigma_x(n, i + 1));
        // Both are Hermitian, so Tr(Oρ) = Tr(O†ρ).
        total += xy.overlap(&rho.matrix) + yx.overlap(&rho.matrix);
    }
    total.re / dim
}

fn monomial_terms(n: usize, index: &BilinearIndex) -> Vec<(Monomial, Complex64)> {
    let (p, q) = (index.p, index.q);
    let one = Complex64::new(1.0, 0.0);
    if p == q {
        return vec![(Monomial::sigma_z(n, p), Complex64::new(-0.5, 0.0))];
    }
    let cd = |h| Monomial::create(n, h);
    let c = |h| Monomial::annihilate(n, h);
    match index.class {
        BilinearClass::Symmetric => vec![(cd(p).mul(&c(q)), one), (cd(q).mul(&c(p)), one)],
        BilinearClass::Current => vec![(cd(p).mul(&c(q)), one), (cd(q).mul(&c(p)), -one)],
        BilinearClass::Antisymmetric => vec![(cd(p).mul(&cd(q)), one), (c(q).mul(&c(p)), -one)],
    }
}

/// Basis operator built directly from Jordan-Wigner fermions.
pub fn bilinear_operator(n_sites: usize, index: &BilinearIndex) -> DenseOperator {
    let dim = 1usize << n_sites;
    let mut m = DMatrix::zeros(dim, dim);
    for (op, w) in monomial_terms(n_sites, index) {
        op.add_to(&mut m, w);
    }
    DenseOperator::new(m, format!("{index:?}"))
}

pub fn pauli_string_operator(n_sites: usize, s: &PauliString) -> DenseOperator {
    let mut op = Monomial::identity(n_sites);
    for (k, f) in s.factors.iter().enumerate() {
        let site = s.first_site + k;
        let m = match f {
            SiteFactor::Raise => Monomial::raise(n_sites, site),
            SiteFactor::Lower => Monomial::lower(n_sites, site),
            SiteFactor::Z => Monomial::sigma_z(n_sites, site),
            SiteFactor::Identity => continue,
        };
        op = op.mul(&m);
    }
    let dim = 1usize << n_sites;
    let mut out = DMatrix::zeros(dim, dim);
    op.add_to(&mut out, s.scalar);
    DenseOperator::new(out, "pauli")
}

/// Every basis index of the restricted space together with the current
/// class, `N + 3·N(N−1)/2` in total.
pub fn all_bilinear_indices(n_sites: usize) -> Vec<BilinearIndex> {
    let mut out = Vec::new();
    for p in 1..=n_sites {
        out.push(BilinearIndex { p, q: p, class: BilinearClass::Symmetric });
        for q in 1..p {
            for class in [BilinearClass::Symmetric, BilinearClass::Antisymmetric, BilinearClass::Current] {
                out.push(BilinearIndex { p, q, class });
            }
        }
    }
    out
}

/// Orthogonal projection of `ρ` onto the given bilinears.
pub fn project_bilinear(rho: &DenseOperator, indices: &[BilinearIndex]) -> BTreeMap<BilinearIndex, Complex64> {
    let n = rho.n_sites();
    let dim = rho.dim() as f64;
    indices
        .iter()
        .map(|index| {
            let overlap: Complex64 = monomial_terms(n, index)
                .iter()
                .map(|(op, w)| w.conj() * op.overlap(&rho.matrix))
                .sum();
            (*index, overlap / (dim * index.norm_sqr()))
        })
        .collect()
}

/// Dense operator represented by a coefficient set.
pub fn coefficients_to_dense(coeffs: &OperatorCoefficients) -> Result<DenseOperator> {
    let n = coeffs.spec.n_sites;
    check_size(n, DEFAULT_SIZE_CAP)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (index, c) in &coeffs.entries {
        for (op, w) in monomial_terms(n, index) {
            op.add_to(&mut m, w * c);
        }
    }
    Ok(DenseOperator::new(m, "coefficients"))
}

/// Indices spanning the DQ-reachable space: symmetric on even distances,
/// antisymmetric on odd.
pub fn dq_space_indices(n_sites: usize) -> Vec<BilinearIndex> {
    (1..=n_sites)
        .flat_map(|p| (1..=p).map(move |q| BilinearIndex::dq(p, q)))
        .collect()
}

/// `1 − ‖Pρ(t)‖/‖ρ(t)‖`, with `P` the projector onto the DQ-reachable
/// bilinear space.
pub fn leakage_fraction(spec: &HamiltonianSpec, state: InitialState, t: f64) -> Result<f64> {
    check_size(spec.n_sites, 10)?;
    let h = build_hamiltonian(spec)?;
    leakage_with(&Propagator::new(&h)?, spec.n_sites, state, t)
}

/// Leakage at several times sharing one diagonalization.
pub fn leakage_series(spec: &HamiltonianSpec, state: InitialState, times: &[f64]) -> Result<Vec<f64>> {
    check_size(spec.n_sites, 10)?;
    let h = build_hamiltonian(spec)?;
    let prop = Propagator::new(&h)?;
    times
        .iter()
        .map(|&t| leakage_with(&prop, spec.n_sites, state, t))
        .collect()
}

fn leakage_with(prop: &Propagator, n: usize, state: InitialState, t: f64) -> Result<f64> {
    let rho = prop.evolve(&initial_density(n, state)?, t);
    let total = rho.norm_sqr();
    if total == 0.0 {
        return Err(Error::DegenerateTrace("zero deviation operator".into()));
    }
    let projected: f64 = project_bilinear(&rho, &dq_space_indices(n))
        .iter()
        .map(|(k, c)| c.norm_sqr() * k.norm_sqr())
        .sum();
    Ok((1.0 - (projected / total).sqrt()).max(0.0))
}

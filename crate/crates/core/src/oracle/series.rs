//! Nested commutators of the short-time expansion and their closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::{check_size, DenseOperator, DEFAULT_SIZE_CAP};
use super::monomial::Monomial;
use crate::error::{Error, Result};

/// `[H,ρ₀], [H,[H,ρ₀]], …` up to `max_order` (at most 4).
pub fn short_time_series(h: &DenseOperator, rho0: &DenseOperator, max_order: usize) -> Result<Vec<DenseOperator>> {
    if max_order == 0 || max_order > 4 {
        return Err(Error::InvalidSpec(format!("series order must be 1..=4, got {max_order}")));
    }
    let mut out: Vec<DenseOperator> = Vec::with_capacity(max_order);
    let mut current = rho0.clone();
    for k in 1..=max_order {
        current = h.commutator(&current);
        current.label = format!("ad_H^{k}");
        out.push(current.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum Ladder {
    Raise,
    Lower,
    Z,
}

/// Product of factors on consecutive sites starting at `first`; `None` when
/// the string leaves the chain.
fn string(n: usize, first: isize, factors: &[Ladder]) -> Option<Monomial> {
    if first < 1 || first as usize + factors.len() - 1 > n {
        return None;
    }
    let mut op = Monomial::identity(n);
    for (k, f) in factors.iter().enumerate() {
        let site = first as usize + k;
        let m = match f {
            Ladder::Raise => Monomial::raise(n, site),
            Ladder::Lower => Monomial::lower(n, site),
            Ladder::Z => Monomial::sigma_z(n, site),
        };
        op = op.mul(&m);
    }
    Some(op)
}

fn pair_of_strings(n: usize, first: isize, a: &[Ladder], b: &[Ladder], sign: f64) -> Option<DenseOperator> {
    let (x, y) = (string(n, first, a)?, string(n, first, b)?);
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    x.add_to(&mut m, Complex64::new(1.0, 0.0));
    y.add_to(&mut m, Complex64::new(sign, 0.0));
    Some(DenseOperator::new(m, "h"))
}

/// `h2 = σ⁺_i σ⁺_{i+1} − σ⁻_i σ⁻_{i+1}`.
pub fn h2(n: usize, i: isize) -> Option<DenseOperator> {
    use Ladder::*;
    pair_of_strings(n, i, &[Raise, Raise], &[Lower, Lower], -1.0)
}

/// `h3 = σ⁺_i σz_{i+1} σ⁻_{i+2} + σ⁻_i σz_{i+1} σ⁺_{i+2}`.
pub fn h3(n: usize, i: isize) -> Option<DenseOperator> {
    use Ladder::*;
    pair_of_strings(n, i, &[Raise, Z, Lower], &[Lower, Z, Raise], 1.0)
}

/// `h4 = σ⁺_i σz σz σ⁺_{i+3} − σ⁻_i σz σz σ⁻_{i+3}`.
pub fn h4(n: usize, i: isize) -> Option<DenseOperator> {
    use Ladder::*;
    pair_of_strings(n, i, &[Raise, Z, Z, Raise], &[Lower, Z, Z, Lower], -1.0)
}

fn sigma_z(n: usize, site: isize) -> Option<DenseOperator> {
    if site < 1 || site as usize > n {
        return None;
    }
    Some(DenseOperator::new(Monomial::sigma_z(n, site as usize).to_dense(), "z"))
}

/// Closed form of the `order`-th nested commutator of `H_DQ` with `−σz_j`.
///
/// Terms that fall off the chain are dropped, so the result is exact only
/// when `j` sits at least `order` sites from either end.
pub fn commutator_closed_form(n: usize, j: usize, d: f64, order: usize) -> Result<DenseOperator> {
    check_size(n, DEFAULT_SIZE_CAP)?;
    if j == 0 || j > n {
        return Err(Error::SiteOutOfRange { site: j, n_sites: n });
    }
    let j = j as isize;
    type Builder = fn(usize, isize) -> Option<DenseOperator>;
    let terms: Vec<(f64, Builder, isize)> = match order {
        1 => vec![(2.0 * d, h2, j - 1), (2.0 * d, h2, j)],
        2 => {
            let c = -2.0 * d * d;
            vec![
                (c, sigma_z, j - 1),
                (2.0 * c, sigma_z, j),
                (c, sigma_z, j + 1),
                (c, h3, j - 2),
                (2.0 * c, h3, j - 1),
                (c, h3, j),
            ]
        }
        3 => {
            let c = d * d * d;
            vec![
                (6.0 * c, h2, j - 2),
                (18.0 * c, h2, j - 1),
                (18.0 * c, h2, j),
                (6.0 * c, h2, j + 1),
                (-2.0 * c, h4, j - 3),
                (-6.0 * c, h4, j - 2),
                (-6.0 * c, h4, j - 1),
                (-2.0 * c, h4, j),
            ]
        }
        _ => return Err(Error::InvalidSpec(format!("closed form known for orders 1..=3, got {order}"))),
    };
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (w, build, site) in terms {
        if let Some(op) = build(n, site) {
            m += op.matrix * Complex64::new(w, 0.0);
        }
    }
    Ok(DenseOperator::new(m, format!("closed form {order}")))
}

/// Coefficient of `basis` in `op`, `Tr(B†A)/Tr(B†B)`.
pub fn component(op: &DenseOperator, basis: &DenseOperator) -> Complex64 {
    basis.inner(op) / basis.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::InitialState;
    use crate::oracle::dense::{build_hamiltonian, HamiltonianSpec};
    use crate::oracle::fermion::initial_density;

    #[test]
    fn first_commutator_at_chain_end() {
        // Only the (1,2) pair exists next to site 1.
        let n = 5;
        let h = build_hamiltonian(&HamiltonianSpec::dq(n, 1.5)).unwrap();
        let rho = initial_density(n, InitialState::SingleSite(1)).unwrap();
        let s = short_time_series(&h, &rho, 1).unwrap();
        let want = commutator_closed_form(n, 1, 1.5, 1).unwrap();
        assert!(s[0].max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn order_bounds() {
        let h = build_hamiltonian(&HamiltonianSpec::dq(3, 1.0)).unwrap();
        let rho = initial_density(3, InitialState::SingleSite(2)).unwrap();
        assert!(short_time_series(&h, &rho, 5).is_err());
        assert!(short_time_series(&h, &rho, 0).is_err());
        assert_eq!(short_time_series(&h, &rho, 4).unwrap().len(), 4);
        assert!(commutator_closed_form(3, 2, 1.0, 4).is_err());
    }

    #[test]
    fn builders_drop_out_of_range() {
        assert!(h2(4, 0).is_none());
        assert!(h2(4, 3).is_some());
        assert!(h4(4, 2).is_none());
        assert!(h4(4, 1).is_some());
    }

    #[test]
    fn commutators_are_alternately_anti_hermitian() {
        let n = 5;
        let h = build_hamiltonian(&HamiltonianSpec::dq(n, 1.0)).unwrap();
        let rho = initial_density(n, InitialState::SingleSite(3)).unwrap();
        for (k, c) in short_time_series(&h, &rho, 4).unwrap().iter().enumerate() {
            let adj = DenseOperator::new(c.matrix.adjoint(), "");
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            let diff = (&c.matrix - adj.matrix * Complex64::new(sign, 0.0)).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }
}

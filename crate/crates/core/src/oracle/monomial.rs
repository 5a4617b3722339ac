//! Operators with at most one nonzero entry per column.
//!
//! Products of single-site Paulis and ladder operators are all of this form,
//! so Jordan-Wigner strings and bilinears can be built and traced in O(2^N).

use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `M[rows[c], c] = vals[c]`; `rows` is always a permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub n_sites: usize,
    pub rows: Vec<usize>,
    pub vals: Vec<Complex64>,
}

/// Bit mask of a 1-based site; site 1 is the most significant bit.
pub(crate) fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - site)
}

impl Monomial {
    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Monomial {
            n_sites,
            rows: (0..dim).collect(),
            vals: vec![ONE; dim],
        }
    }

    fn from_fn(n_sites: usize, f: impl Fn(usize) -> (usize, Complex64)) -> Self {
        let dim = 1usize << n_sites;
        let (rows, vals) = (0..dim).map(f).unzip();
        Monomial { n_sites, rows, vals }
    }

    pub fn sigma_x(n_sites: usize, site: usize) -> Self {
        let m = site_mask(n_sites, site);
        Self::from_fn(n_sites, |c| (c ^ m, ONE))
    }

    pub fn sigma_y(n_sites: usize, site: usize) -> Self {
        let m = site_mask(n_sites, site);
        // σy|↑⟩ = i|↓⟩, σy|↓⟩ = −i|↑⟩.
        Self::from_fn(n_sites, |c| {
            let v = if c & m == 0 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(0.0, -1.0)
            };
            (c ^ m, v)
        })
    }

    pub fn sigma_z(n_sites: usize, site: usize) -> Self {
        let m = site_mask(n_sites, site);
        Self::from_fn(n_sites, |c| (c, if c & m == 0 { ONE } else { -ONE }))
    }

    /// `σ⁺ = |↑⟩⟨↓|`.
    pub fn raise(n_sites: usize, site: usize) -> Self {
        let m = site_mask(n_sites, site);
        Self::from_fn(n_sites, |c| (c ^ m, if c & m != 0 { ONE } else { ZERO }))
    }

    /// `σ⁻ = |↓⟩⟨↑|`.
    pub fn lower(n_sites: usize, site: usize) -> Self {
        let m = site_mask(n_sites, site);
        Self::from_fn(n_sites, |c| (c ^ m, if c & m == 0 { ONE } else { ZERO }))
    }

    /// Fermion annihilator `c_h = −(Π_{l<h} σz_l) σ⁺_h`.
    pub fn annihilate(n_sites: usize, h: usize) -> Self {
        let mut op = Self::raise(n_sites, h).scale(-ONE);
        for l in 1..h {
            op = Self::sigma_z(n_sites, l).mul(&op);
        }
        op
    }

    pub fn create(n_sites: usize, h: usize) -> Self {
        Self::annihilate(n_sites, h).adjoint()
    }

    pub fn mul(&self, rhs: &Monomial) -> Monomial {
        assert_eq!(self.n_sites, rhs.n_sites);
        let (rows, vals) = rhs
            .rows
            .iter()
            .zip(&rhs.vals)
            .map(|(&r, &v)| (self.rows[r], self.vals[r] * v))
            .unzip();
        Monomial {
            n_sites: self.n_sites,
            rows,
            vals,
        }
    }

    pub fn scale(mut self, s: Complex64) -> Monomial {
        for v in &mut self.vals {
            *v *= s;
        }
        self
    }

    pub fn adjoint(&self) -> Monomial {
        let dim = self.rows.len();
        let mut rows = vec![0; dim];
        let mut vals = vec![ZERO; dim];
        for (c, (&r, &v)) in self.rows.iter().zip(&self.vals).enumerate() {
            rows[r] = c;
            vals[r] = v.conj();
        }
        Monomial {
            n_sites: self.n_sites,
            rows,
            vals,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| *v == ZERO)
    }

    /// `Tr(M† ρ)`.
    pub fn overlap(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        self.rows
            .iter()
            .zip(&self.vals)
            .enumerate()
            .map(|(c, (&r, &v))| v.conj() * rho[(r, c)])
            .sum()
    }

    /// `Tr(M† M)`.
    pub fn norm_sqr(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn add_to(&self, target: &mut DMatrix<Complex64>, scale: Complex64) {
        for (c, (&r, &v)) in self.rows.iter().zip(&self.vals).enumerate() {
            if v != ZERO {
                target[(r, c)] += scale * v;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.rows.len();
        let mut m = DMatrix::zeros(dim, dim);
        self.add_to(&mut m, ONE);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).iter().all(|v| v.norm() < 1e-14)
    }

    #[test]
    fn pauli_algebra() {
        let n = 3;
        for s in 1..=n {
            let x = Monomial::sigma_x(n, s).to_dense();
            let y = Monomial::sigma_y(n, s).to_dense();
            let z = Monomial::sigma_z(n, s).to_dense();
            let i = Complex64::new(0.0, 1.0);
            assert!(close(&(&x * &y), &(&z * i)));
            let p = Monomial::raise(n, s).to_dense();
            let m = Monomial::lower(n, s).to_dense();
            assert!(close(&p, &((&x + &y * i) * Complex64::new(0.5, 0.0))));
            assert!(close(&m, &p.adjoint()));
        }
    }

    #[test]
    fn site_one_is_most_significant() {
        let z = Monomial::sigma_z(3, 1);
        assert_eq!(z.vals[0b011], ONE);
        assert_eq!(z.vals[0b100], -ONE);
    }

    #[test]
    fn fermion_anticommutation() {
        let n = 4;
        let dim = 1 << n;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        for a in 1..=n {
            for b in 1..=n {
                let ca = Monomial::annihilate(n, a).to_dense();
                let cb = Monomial::annihilate(n, b).to_dense();
                let cbd = Monomial::create(n, b).to_dense();
                let anti = &ca * &cbd + &cbd * &ca;
                let want = if a == b { id.clone() } else { DMatrix::zeros(dim, dim) };
                assert!(close(&anti, &want), "{a} {b}");
                assert!(close(&(&ca * &cb + &cb * &ca), &DMatrix::zeros(dim, dim)));
            }
        }
    }

    #[test]
    fn number_operator_counts_down_spins() {
        let n = 3;
        let num = Monomial::create(n, 2).mul(&Monomial::annihilate(n, 2)).to_dense();
        let z = Monomial::sigma_z(n, 2).to_dense();
        let dim = 1 << n;
        let want = (DMatrix::<Complex64>::identity(dim, dim) - z) * Complex64::new(0.5, 0.0);
        assert!(close(&num, &want));
    }

    #[test]
    fn overlap_and_adjoint() {
        let n = 3;
        let a = Monomial::raise(n, 1).mul(&Monomial::sigma_y(n, 3));
        let d = a.to_dense();
        assert!(close(&a.adjoint().to_dense(), &d.adjoint()));
        let tr = (d.adjoint() * &d).trace();
        assert!((a.overlap(&d) - tr).norm() < 1e-14);
        assert!((a.norm_sqr() - tr.re).abs() < 1e-14);
    }
}

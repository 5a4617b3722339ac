use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::monomial::Monomial;
use crate::error::{Error, Result};

/// Largest chain the dense simulator accepts by default.
pub const DEFAULT_SIZE_CAP: usize = 12;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub label: String,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Self {
        DenseOperator {
            matrix,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Largest `|M − M†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0_f64;
        for c in 0..m.ncols() {
            for r in 0..=c {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(A†B)/dim`.
    pub fn inner(&self, other: &DenseOperator) -> Complex64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            / self.dim() as f64
    }

    /// `Tr(A†A)/dim`.
    pub fn norm_sqr(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.dim() as f64
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &DenseOperator) -> DenseOperator {
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        DenseOperator::new(m, format!("[{},{}]", self.label, other.label))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `½d(σxσx − σyσy)` per pair.
    Dq,
    /// `½d(σxσx + σyσy)` per pair.
    Xx,
    /// Secular dipolar `½d(3σzσz − σ⃗·σ⃗)` per pair.
    Dipolar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kind: CouplingKind,
    pub n_sites: usize,
    /// Nearest-neighbour coupling `d`, rad/s.
    pub coupling: f64,
    /// Pairs at distance `r` couple with `d/r^range_power`.
    pub range_power: f64,
    /// Largest coupled distance.
    pub cutoff: usize,
}

impl HamiltonianSpec {
    fn nn(kind: CouplingKind, n_sites: usize, coupling: f64) -> Self {
        HamiltonianSpec {
            kind,
            n_sites,
            coupling,
            range_power: 3.0,
            cutoff: 1,
        }
    }

    pub fn dq(n_sites: usize, coupling: f64) -> Self {
        Self::nn(CouplingKind::Dq, n_sites, coupling)
    }

    pub fn xx(n_sites: usize, coupling: f64) -> Self {
        Self::nn(CouplingKind::Xx, n_sites, coupling)
    }

    pub fn dipolar_nn(n_sites: usize, coupling: f64) -> Self {
        Self::nn(CouplingKind::Dipolar, n_sites, coupling)
    }

    /// Dipolar couplings `d/r³` between all pairs.
    pub fn dipolar_long_range(n_sites: usize, coupling: f64) -> Self {
        HamiltonianSpec {
            cutoff: n_sites.saturating_sub(1).max(1),
            ..Self::dipolar_nn(n_sites, coupling)
        }
    }

    /// DQ flip-flip couplings `d/r³` between all pairs.
    pub fn dq_long_range(n_sites: usize, coupling: f64) -> Self {
        HamiltonianSpec {
            cutoff: n_sites.saturating_sub(1).max(1),
            ..Self::dq(n_sites, coupling)
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn for_kind(kind: crate::HamiltonianKind, n_sites: usize, coupling: f64) -> Self {
        match kind {
            crate::HamiltonianKind::Dq => Self::dq(n_sites, coupling),
            crate::HamiltonianKind::Xx => Self::xx(n_sites, coupling),
        }
    }
}

pub(crate) fn check_size(n_sites: usize, cap: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::InvalidSpec("need at least one site".into()));
    }
    if n_sites > cap {
        return Err(Error::SizeCap { n_sites, cap });
    }
    Ok(())
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<DenseOperator> {
    build_hamiltonian_with_cap(spec, DEFAULT_SIZE_CAP)
}

pub fn build_hamiltonian_with_cap(spec: &HamiltonianSpec, cap: usize) -> Result<DenseOperator> {
    let n = spec.n_sites;
    check_size(n, cap)?;
    if !(spec.coupling.is_finite() && spec.cutoff >= 1) {
        return Err(Error::InvalidSpec(format!("bad Hamiltonian spec {spec:?}")));
    }
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 1..=n {
        for j in i + 1..=n.min(i + spec.cutoff) {
            let w = spec.coupling / ((j - i) as f64).powf(spec.range_power);
            let w = Complex64::new(w, 0.0);
            let pp = Monomial::raise(n, i).mul(&Monomial::raise(n, j));
            let mm = Monomial::lower(n, i).mul(&Monomial::lower(n, j));
            let pm = Monomial::raise(n, i).mul(&Monomial::lower(n, j));
            let mp = Monomial::lower(n, i).mul(&Monomial::raise(n, j));
            match spec.kind {
                CouplingKind::Dq => {
                    pp.add_to(&mut h, w);
                    mm.add_to(&mut h, w);
                }
                CouplingKind::Xx => {
                    pm.add_to(&mut h, w);
                    mp.add_to(&mut h, w);
                }
                CouplingKind::Dipolar => {
                    // ½(3zz − xx − yy − zz) = zz − (σ⁺σ⁻ + σ⁻σ⁺)
                    let zz = Monomial::sigma_z(n, i).mul(&Monomial::sigma_z(n, j));
                    zz.add_to(&mut h, w);
                    pm.add_to(&mut h, -w);
                    mp.add_to(&mut h, -w);
                }
            }
        }
    }
    let label = format!("{:?}(N={n})", spec.kind);
    Ok(DenseOperator::new(h, label))
}

/// Connected components of the nonzero pattern of `m`.
fn blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let dim = m.nrows();
    let mut label = vec![usize::MAX; dim];
    let mut out = Vec::new();
    for seed in 0..dim {
        if label[seed] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![seed];
        label[seed] = id;
        let mut k = 0;
        while k < members.len() {
            let r = members[k];
            for c in 0..dim {
                if label[c] == usize::MAX && (m[(r, c)] != Complex64::new(0.0, 0.0)) {
                    label[c] = id;
                    members.push(c);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

enum Vectors {
    /// Real Hamiltonians have real eigenvectors, which keeps products in
    /// fast real arithmetic.
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

struct Block {
    indices: Vec<usize>,
    vectors: Vectors,
    values: Vec<f64>,
}

fn split(m: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|v| v.re), m.map(|v| v.im))
}

fn join(re: DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex64> {
    re.zip_map(im, Complex64::new)
}

/// `l · x · r` for real `l`, `r` and complex `x`.
fn real_sandwich(l: &DMatrix<f64>, x: &DMatrix<Complex64>, r: &DMatrix<f64>) -> DMatrix<Complex64> {
    let (re, im) = split(x);
    join(l * re * r, &(l * im * r))
}

impl Block {
    fn new(h: &DMatrix<Complex64>, indices: Vec<usize>) -> Self {
        let k = indices.len();
        let sub = DMatrix::from_fn(k, k, |r, c| h[(indices[r], indices[c])]);
        if sub.iter().all(|v| v.im == 0.0) {
            let eig = SymmetricEigen::new(sub.map(|v| v.re));
            Block {
                indices,
                vectors: Vectors::Real(eig.eigenvectors),
                values: eig.eigenvalues.iter().copied().collect(),
            }
        } else {
            let eig = SymmetricEigen::new(sub);
            Block {
                indices,
                vectors: Vectors::Complex(eig.eigenvectors),
                values: eig.eigenvalues.iter().copied().collect(),
            }
        }
    }

    fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        match &self.vectors {
            Vectors::Real(v) => {
                let mut c = v.clone();
                let mut s = v.clone();
                for (k, &lambda) in self.values.iter().enumerate() {
                    let (sin, cos) = (-lambda * t).sin_cos();
                    c.column_mut(k).scale_mut(cos);
                    s.column_mut(k).scale_mut(sin);
                }
                join(c * v.transpose(), &(s * v.transpose()))
            }
            Vectors::Complex(v) => {
                let mut w = v.clone();
                for (k, &lambda) in self.values.iter().enumerate() {
                    let ph = Complex64::from_polar(1.0, -lambda * t);
                    for e in w.column_mut(k).iter_mut() {
                        *e *= ph;
                    }
                }
                w * v.adjoint()
            }
        }
    }
}

/// Eigendecomposition of a Hermitian operator, split into invariant blocks.
pub struct Propagator {
    dim: usize,
    blocks: Vec<Block>,
}

impl Propagator {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let defect = h.hermiticity_defect();
        let scale = h.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        let blocks = blocks(&h.matrix)
            .into_iter()
            .map(|indices| Block::new(&h.matrix, indices))
            .collect();
        Ok(Propagator {
            dim: h.dim(),
            blocks,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `e^{−iHt}` as a dense matrix.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let mut u = DMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let ub = b.unitary(t);
            for (r, &gr) in b.indices.iter().enumerate() {
                for (c, &gc) in b.indices.iter().enumerate() {
                    u[(gr, gc)] = ub[(r, c)];
                }
            }
        }
        u
    }

    fn evolve_pair(a: &Block, b: &Block, sub: DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
        match (&a.vectors, &b.vectors) {
            (Vectors::Real(va), Vectors::Real(vb)) => {
                // Rotate into the eigenbasis, apply phases, rotate back.
                let mut x = real_sandwich(&va.transpose(), &sub, vb);
                for (c, &eb) in b.values.iter().enumerate() {
                    for (r, &ea) in a.values.iter().enumerate() {
                        x[(r, c)] *= Complex64::from_polar(1.0, -(ea - eb) * t);
                    }
                }
                real_sandwich(va, &x, &vb.transpose())
            }
            _ => a.unitary(t) * sub * b.unitary(t).adjoint(),
        }
    }

    /// `e^{−iHt} ρ e^{iHt}`, one block pair at a time.
    pub fn evolve(&self, rho: &DenseOperator, t: f64) -> DenseOperator {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for a in &self.blocks {
            for b in &self.blocks {
                let sub = DMatrix::from_fn(a.indices.len(), b.indices.len(), |r, c| {
                    rho.matrix[(a.indices[r], b.indices[c])]
                });
                if sub.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                let evolved = Self::evolve_pair(a, b, sub, t);
                for (r, &gr) in a.indices.iter().enumerate() {
                    for (c, &gc) in b.indices.iter().enumerate() {
                        out[(gr, gc)] = evolved[(r, c)];
                    }
                }
            }
        }
        DenseOperator::new(out, format!("{}(t={t:e})", rho.label))
    }
}

/// `e^{−iHt} ρ₀ e^{iHt}`.
pub fn evolve_density(h: &DenseOperator, rho0: &DenseOperator, t: f64) -> Result<DenseOperator> {
    Ok(Propagator::new(h)?.evolve(rho0, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nonzero(m: &DMatrix<Complex64>) -> Vec<(usize, usize, Complex64)> {
        let mut v = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)].norm() > 0.0 {
                    v.push((r, c, m[(r, c)]));
                }
            }
        }
        v
    }

    #[test]
    fn two_site_dq_couples_all_up_and_all_down() {
        let h = build_hamiltonian(&HamiltonianSpec::dq(2, 3.0)).unwrap();
        let nz = nonzero(&h.matrix);
        assert_eq!(nz.len(), 2);
        for (r, c, v) in nz {
            assert_eq!((r.min(c), r.max(c)), (0b00, 0b11));
            assert_eq!(v, Complex64::new(3.0, 0.0));
        }
    }

    #[test]
    fn two_site_xx_couples_flip_flop_only() {
        let h = build_hamiltonian(&HamiltonianSpec::xx(2, 1.0)).unwrap();
        let nz = nonzero(&h.matrix);
        assert_eq!(nz.len(), 2);
        for (r, c, _) in nz {
            assert_eq!((r.min(c), r.max(c)), (0b01, 0b10));
        }
    }

    #[test]
    fn dq_matches_pauli_definition() {
        let n = 4;
        let h = build_hamiltonian(&HamiltonianSpec::dq(n, 1.3)).unwrap();
        let dim = 1 << n;
        let mut want = DMatrix::zeros(dim, dim);
        for i in 1..n {
            let xx = Monomial::sigma_x(n, i).mul(&Monomial::sigma_x(n, i + 1));
            let yy = Monomial::sigma_y(n, i).mul(&Monomial::sigma_y(n, i + 1));
            xx.add_to(&mut want, Complex64::new(0.65, 0.0));
            yy.add_to(&mut want, Complex64::new(-0.65, 0.0));
        }
        assert!((h.matrix - want).iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn long_range_with_unit_cutoff_is_nearest_neighbour() {
        let a = build_hamiltonian(&HamiltonianSpec::dipolar_long_range(5, 2.0).with_cutoff(1)).unwrap();
        let b = build_hamiltonian(&HamiltonianSpec::dipolar_nn(5, 2.0)).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn size_cap() {
        assert!(matches!(
            build_hamiltonian(&HamiltonianSpec::dq(13, 1.0)),
            Err(Error::SizeCap { n_sites: 13, cap: 12 })
        ));
        assert!(build_hamiltonian_with_cap(&HamiltonianSpec::dq(5, 1.0), 4).is_err());
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            Propagator::new(&DenseOperator::new(m, "bad")),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn evolution_preserves_trace_hermiticity_and_purity() {
        let n = 5;
        let h = build_hamiltonian(&HamiltonianSpec::dipolar_long_range(n, 1.0)).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let dim = 1 << n;
        // Pure state |ψ⟩⟨ψ| with generic amplitudes.
        let psi: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let rho = DMatrix::from_fn(dim, dim, |r, c| psi[r] * psi[c].conj() / (norm * norm));
        let rho = DenseOperator::new(rho, "psi");
        let energy = (h.matrix.clone() * &rho.matrix).trace();
        for &t in &[0.0, 0.3, 2.0, 11.0] {
            let r = prop.evolve(&rho, t);
            assert!((r.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(r.hermiticity_defect() < 1e-12);
            let purity = (r.matrix.clone() * &r.matrix).trace();
            assert!((purity.re - 1.0).abs() < 1e-12);
            let e = (h.matrix.clone() * &r.matrix).trace();
            assert!((e - energy).norm() < 1e-12);
        }
        assert_eq!(prop.evolve(&rho, 0.0).max_abs_diff(&rho) < 1e-14, true);
    }

    #[test]
    fn unitary_is_unitary() {
        let h = build_hamiltonian(&HamiltonianSpec::dq(4, 1.0)).unwrap();
        let prop = Propagator::new(&h).unwrap();
        assert!(prop.n_blocks() > 1);
        let u = prop.unitary(0.7);
        let id = DMatrix::<Complex64>::identity(16, 16);
        assert!((u.adjoint() * &u - id).iter().all(|v| v.norm() < 1e-13));
    }
}

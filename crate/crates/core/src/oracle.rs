//! Exact ground states (FCI reference) by diagonalizing the qubit Hamiltonian
//! inside a fixed particle-number sector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{expectation, QubitHamiltonian};
use crate::sim::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorSpec {
    pub n_electrons: usize,
    /// Restrict to basis states of Hamming weight `n_electrons`; otherwise
    /// the whole space is searched.
    pub restrict: bool,
}

impl SectorSpec {
    pub fn electrons(n_electrons: usize) -> Self {
        SectorSpec { n_electrons, restrict: true }
    }

    pub fn unrestricted() -> Self {
        SectorSpec { n_electrons: 0, restrict: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub max_qubits: usize,
    /// Sectors up to this dimension are diagonalized densely; larger ones by
    /// Lanczos.
    pub dense_limit: usize,
    pub residual_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_qubits: 14, dense_limit: 4096, residual_tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub sector_dimension: usize,
    /// `||H v - E v||` of the returned vector.
    pub residual: f64,
}

/// Sparse Hermitian matrix on the sector basis, column-major triplets.
struct SectorMatrix {
    basis: Vec<usize>,
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl SectorMatrix {
    fn build(h: &QubitHamiltonian, sector: &SectorSpec) -> Result<Self> {
        let n = h.n_qubits();
        let dim = h.dimension();
        let basis: Vec<usize> = (0..dim)
            .filter(|i| !sector.restrict || i.count_ones() as usize == sector.n_electrons)
            .collect();
        let mut position = vec![usize::MAX; dim];
        for (k, &b) in basis.iter().enumerate() {
            position[b] = k;
        }
        let masks: Vec<_> = h
            .nondiagonal_terms()
            .iter()
            .map(|t| (t.coefficient, t.masks()))
            .collect();
        let diag = h.diagonal_values();
        let tol = 1e-10 * h.coefficient_one_norm().max(1.0);

        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut columns = Vec::with_capacity(basis.len());
        for &b in &basis {
            for &(c, m) in &masks {
                let target = b ^ m.flip_mask;
                if scratch[target] == Complex64::new(0.0, 0.0) {
                    touched.push(target);
                }
                scratch[target] += c * m.phase(b);
            }
            let mut col = vec![(position[b], Complex64::new(diag[b] + h.identity_offset(), 0.0))];
            touched.sort_unstable();
            touched.dedup();
            for &t in &touched {
                let v = scratch[t];
                scratch[t] = Complex64::new(0.0, 0.0);
                if v.norm() <= tol {
                    continue;
                }
                if position[t] == usize::MAX {
                    return Err(Error::SectorViolation(format!(
                        "basis state {b:0n$b} couples to {t:0n$b} outside the {}-electron sector",
                        sector.n_electrons
                    )));
                }
                col.push((position[t], v));
            }
            touched.clear();
            columns.push(col);
        }
        Ok(SectorMatrix { basis, columns })
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn matvec(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (j, col) in self.columns.iter().enumerate() {
            let vj = v[j];
            for &(i, a) in col {
                out[i] += a * vj;
            }
        }
    }

    fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, a) in col {
                m[(i, j)] += a;
            }
        }
        m
    }
}

pub fn ground_state(h: &QubitHamiltonian, sector: &SectorSpec) -> Result<GroundState> {
    ground_state_with(h, sector, &OracleConfig::default())
}

pub fn ground_state_with(
    h: &QubitHamiltonian,
    sector: &SectorSpec,
    cfg: &OracleConfig,
) -> Result<GroundState> {
    if h.n_qubits() > cfg.max_qubits {
        return Err(Error::Resource(format!(
            "exact diagonalization of {} qubits exceeds the cap of {}",
            h.n_qubits(),
            cfg.max_qubits
        )));
    }
    if sector.restrict && sector.n_electrons > h.n_qubits() {
        return Err(Error::Validation(format!(
            "{} electrons do not fit in {} qubits",
            sector.n_electrons,
            h.n_qubits()
        )));
    }
    let m = SectorMatrix::build(h, sector)?;
    let (energy, vector) = if m.dim() <= cfg.dense_limit {
        dense_lowest(&m)
    } else {
        lanczos_lowest(&m, cfg.residual_tol)?
    };

    let mut hv = vec![Complex64::new(0.0, 0.0); m.dim()];
    m.matvec(&vector, &mut hv);
    let residual = hv
        .iter()
        .zip(&vector)
        .map(|(a, v)| (a - energy * v).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual >= cfg.residual_tol.max(1e-13 * energy.abs()) {
        return Err(Error::Convergence(format!(
            "ground-state residual {residual:.3e} above {:.1e}",
            cfg.residual_tol
        )));
    }

    let mut amps = vec![Complex64::new(0.0, 0.0); h.dimension()];
    for (k, &b) in m.basis.iter().enumerate() {
        amps[b] = vector[k];
    }
    Ok(GroundState {
        energy,
        state: StateVector::from_amplitudes(amps)?,
        sector_dimension: m.dim(),
        residual,
    })
}

/// Rotates the global phase so the largest component is real positive.
fn fix_phase(v: &mut [Complex64]) {
    let Some(big) = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) else {
        return;
    };
    if big.norm() > 0.0 {
        let phase = big.conj() / big.norm();
        v.iter_mut().for_each(|a| *a *= phase);
    }
}

fn dense_lowest(m: &SectorMatrix) -> (f64, Vec<Complex64>) {
    let eig = SymmetricEigen::new(m.to_dense());
    let (k, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("sector is non-empty");
    let mut v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
    fix_phase(&mut v);
    (energy, v)
}

/// Lanczos with full reorthogonalization, seeded deterministically.
fn lanczos_lowest(m: &SectorMatrix, tol: f64) -> Result<(f64, Vec<Complex64>)> {
    let dim = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, 0.0)).collect();
    normalize(&mut q);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let max_steps = dim.min(1000);
    for step in 0..max_steps {
        m.matvec(&basis[step], &mut w);
        let alpha = dot(&basis[step], &w).re;
        alphas.push(alpha);
        // full reorthogonalization, applied twice
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = norm(&w);

        let (theta, y) = tridiagonal_lowest(&alphas, &betas);
        let estimate = beta * y[y.len() - 1].abs();
        if estimate < 0.1 * tol || beta < 1e-12 || step + 1 == max_steps {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            for (coef, b) in y.iter().zip(&basis) {
                v.iter_mut().zip(b).for_each(|(x, bb)| *x += *coef * bb);
            }
            normalize(&mut v);
            fix_phase(&mut v);
            return Ok((theta, v));
        }
        betas.push(beta);
        let next: Vec<Complex64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    Err(Error::Convergence("Lanczos did not converge".into()))
}

fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let y: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    (theta, y.iter().copied().collect())
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

/// Energy of the reference basis state.
pub fn hf_energy(h: &QubitHamiltonian, hf_state_index: usize) -> Result<f64> {
    expectation(h, &StateVector::basis_state(h.n_qubits(), hf_state_index)?)
}

/// Binomial coefficient, for reporting sector dimensions.
pub fn sector_dimension(n_qubits: usize, n_electrons: usize) -> usize {
    if n_electrons > n_qubits {
        return 0;
    }
    (0..n_electrons).fold(1usize, |acc, i| acc * (n_qubits - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{split, PauliTerm};

    #[test]
    fn single_qubit_minus_z() {
        let h = split(&[PauliTerm::parse("Z", -1.0).unwrap()], 1).unwrap();
        let g = ground_state(&h, &SectorSpec::unrestricted()).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-14);
        assert!((g.state.amplitudes()[0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sector_dimensions() {
        assert_eq!(sector_dimension(4, 2), 6);
        assert_eq!(sector_dimension(6, 3), 20);
        assert_eq!(sector_dimension(14, 10), 1001);
    }

    #[test]
    fn violation_is_detected() {
        // X_0 alone changes particle number
        let h = split(&[PauliTerm::parse("XI", 1.0).unwrap()], 2).unwrap();
        assert!(matches!(
            ground_state(&h, &SectorSpec::electrons(1)),
            Err(Error::SectorViolation(_))
        ));
        // XX + YY conserves it
        let h = split(
            &[PauliTerm::parse("XX", 1.0).unwrap(), PauliTerm::parse("YY", 1.0).unwrap()],
            2,
        )
        .unwrap();
        let g = ground_state(&h, &SectorSpec::electrons(1)).unwrap();
        assert!((g.energy + 2.0).abs() < 1e-12);
        assert_eq!(g.sector_dimension, 2);
    }

    #[test]
    fn resource_cap() {
        let h = split(&[PauliTerm::parse("ZZZ", 1.0).unwrap()], 3).unwrap();
        let cfg = OracleConfig { max_qubits: 2, ..OracleConfig::default() };
        assert!(matches!(
            ground_state_with(&h, &SectorSpec::unrestricted(), &cfg),
            Err(Error::Resource(_))
        ));
    }
}

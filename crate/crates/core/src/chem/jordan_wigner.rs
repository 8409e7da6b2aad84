//! Second-quantized molecular Hamiltonian to qubits.
//!
//! Spin orbitals are interleaved (alpha, beta, alpha, beta, ...) over
//! ascending MO energy and spin orbital `j` is qubit `j`, so a closed- or
//! open-shell reference with `n` electrons is basis index `2^n - 1`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::integrals::{AoIntegrals, TwoElectronIntegrals};
use super::scf::ScfResult;
use crate::error::{Error, Result};
use crate::pauli::{split, Pauli, PauliTerm, QubitHamiltonian};

const INTEGRAL_CUTOFF: f64 = 1e-14;

/// Complex-weighted Pauli sum used while expanding ladder operators. Terms
/// keep the order in which they are first generated.
#[derive(Default)]
struct PauliAccumulator {
    index: HashMap<Vec<Pauli>, usize>,
    terms: Vec<(Vec<Pauli>, Complex64)>,
}

impl PauliAccumulator {
    fn add(&mut self, paulis: Vec<Pauli>, coeff: Complex64) {
        match self.index.get(&paulis) {
            Some(&k) => self.terms[k].1 += coeff,
            None => {
                self.index.insert(paulis.clone(), self.terms.len());
                self.terms.push((paulis, coeff));
            }
        }
    }

    fn into_terms(self) -> Result<Vec<PauliTerm>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (paulis, c) in self.terms {
            if c.im.abs() > 1e-10 {
                return Err(Error::Validation(format!(
                    "non-Hermitian residue {} on {}",
                    c.im,
                    crate::pauli::format_pauli_string(&paulis)
                )));
            }
            out.push(PauliTerm::new(paulis, c.re));
        }
        Ok(out)
    }
}

/// Jordan-Wigner image of `a_j` (dagger = false) or `a_j^dagger`:
/// `(X_j +- i Y_j)/2` with a Z string on qubits below `j`.
fn ladder(j: usize, n: usize, dagger: bool) -> [(Vec<Pauli>, Complex64); 2] {
    let mut x = vec![Pauli::I; n];
    for p in x.iter_mut().take(j) {
        *p = Pauli::Z;
    }
    let mut y = x.clone();
    x[j] = Pauli::X;
    y[j] = Pauli::Y;
    let sign = if dagger { -0.5 } else { 0.5 };
    [(x, Complex64::new(0.5, 0.0)), (y, Complex64::new(0.0, sign))]
}

fn multiply(a: &[Pauli], b: &[Pauli]) -> (Complex64, Vec<Pauli>) {
    let mut phase = Complex64::new(1.0, 0.0);
    let out = a
        .iter()
        .zip(b)
        .map(|(&pa, &pb)| {
            let (ph, p) = pa.mul(pb);
            phase *= ph;
            p
        })
        .collect();
    (phase, out)
}

/// Adds `coeff * prod ops` where each op is `(spin orbital, is_creation)`.
fn add_product(acc: &mut PauliAccumulator, ops: &[(usize, bool)], n: usize, coeff: f64) {
    let mut partial: Vec<(Vec<Pauli>, Complex64)> =
        vec![(vec![Pauli::I; n], Complex64::new(coeff, 0.0))];
    for &(j, dagger) in ops {
        let factors = ladder(j, n, dagger);
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (s, c) in &partial {
            for (f, fc) in &factors {
                let (ph, p) = multiply(s, f);
                next.push((p, c * fc * ph));
            }
        }
        partial = next;
    }
    for (s, c) in partial {
        acc.add(s, c);
    }
}

/// Qubit Hamiltonian from spatial-MO integrals (chemists' notation).
///
/// `H = sum h_pq a+_p a_q + 1/2 sum (pr|qs) a+_p a+_q a_s a_r + e_nuc`
/// over spin orbitals with spin conservation.
pub fn qubit_hamiltonian_from_mo(
    h1: &DMatrix<f64>,
    eri: &TwoElectronIntegrals,
    constant: f64,
) -> Result<QubitHamiltonian> {
    let norb = h1.nrows();
    let n = 2 * norb;
    let mut acc = PauliAccumulator::default();
    acc.add(vec![Pauli::I; n], Complex64::new(constant, 0.0));
    for p in 0..n {
        for q in 0..n {
            if p % 2 != q % 2 {
                continue;
            }
            let c = h1[(p / 2, q / 2)];
            if c.abs() > INTEGRAL_CUTOFF {
                add_product(&mut acc, &[(p, true), (q, false)], n, c);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            for r in 0..n {
                if p % 2 != r % 2 {
                    continue;
                }
                for s in 0..n {
                    if r == s || q % 2 != s % 2 {
                        continue;
                    }
                    let c = 0.5 * eri.get(p / 2, r / 2, q / 2, s / 2);
                    if c.abs() > INTEGRAL_CUTOFF {
                        add_product(&mut acc, &[(p, true), (q, true), (s, false), (r, false)], n, c);
                    }
                }
            }
        }
    }
    split(&acc.into_terms()?, n)
}

/// Maps a converged SCF solution to a qubit Hamiltonian and the basis index
/// of the Hartree-Fock reference state.
pub fn jordan_wigner(
    scf: &ScfResult,
    ints: &AoIntegrals,
    n_electrons: usize,
) -> Result<(QubitHamiltonian, usize)> {
    let c = &scf.orbital_coefficients;
    let h1 = c.transpose() * ints.core_hamiltonian() * c;
    let eri = ints.eri.transform(c);
    let h = qubit_hamiltonian_from_mo(&h1, &eri, scf.nuclear_repulsion)?;
    if n_electrons > h.n_qubits() {
        return Err(Error::Validation(format!(
            "{n_electrons} electrons exceed {} spin orbitals",
            h.n_qubits()
        )));
    }
    Ok((h, (1usize << n_electrons) - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_operator_image() {
        // a+_1 a_1 = (I - Z_1)/2
        let mut acc = PauliAccumulator::default();
        add_product(&mut acc, &[(1, true), (1, false)], 3, 1.0);
        let h = split(&acc.into_terms().unwrap(), 3).unwrap();
        assert!((h.identity_offset() - 0.5).abs() < 1e-15);
        assert_eq!(h.diagonal_terms().len(), 1);
        assert_eq!(h.diagonal_terms()[0].label(), "IZI");
        assert!((h.diagonal_terms()[0].coefficient + 0.5).abs() < 1e-15);
    }

    #[test]
    fn hopping_image() {
        // a+_0 a_2 + a+_2 a_0 = (X0 Z1 X2 + Y0 Z1 Y2)/2
        let mut acc = PauliAccumulator::default();
        add_product(&mut acc, &[(0, true), (2, false)], 3, 1.0);
        add_product(&mut acc, &[(2, true), (0, false)], 3, 1.0);
        let h = split(&acc.into_terms().unwrap(), 3).unwrap();
        let labels: Vec<_> = h.nondiagonal_terms().iter().map(|t| t.label()).collect();
        assert_eq!(labels, ["XZX", "YZY"]);
        for t in h.nondiagonal_terms() {
            assert!((t.coefficient - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn anti_hermitian_residue_is_rejected() {
        let mut acc = PauliAccumulator::default();
        add_product(&mut acc, &[(0, true), (1, false)], 2, 1.0);
        assert!(acc.into_terms().is_err());
    }
}

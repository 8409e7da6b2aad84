//! Dense statevector simulation.
//!
//! Amplitude layout is little-endian: bit `j` of a basis index is qubit `j`.

use num_complex::Complex64;

use crate::ansatz::{AnsatzCircuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliMasks, PauliTerm, QubitHamiltonian};

pub const MAX_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Resource(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Structural(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Structural(format!("amplitude count {dim} is not a power of two")));
        }
        Ok(StateVector { n_qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    fn check_length(&self, len: usize) -> Result<()> {
        if len != self.n_qubits {
            return Err(Error::Structural(format!(
                "operator acts on {len} qubits, state has {}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// `psi <- exp(-i angle P) psi = cos(angle) psi - i sin(angle) P psi`.
    ///
    /// The coefficient of a weighted term is the caller's business: pass the
    /// bare string and fold the weight into `angle`.
    pub fn apply_pauli_rotation(&mut self, paulis: &[Pauli], angle: f64) -> Result<()> {
        self.check_length(paulis.len())?;
        rotate(&mut self.amplitudes, &PauliMasks::from_paulis(paulis), angle);
        Ok(())
    }

    /// `psi_i <- exp(-i theta d_i) psi_i` where `d_i` is the value of the
    /// I/Z-only operator `sum coeff P` on basis state `i`.
    pub fn apply_diagonal_evolution(&mut self, diagonal_terms: &[PauliTerm], theta: f64) -> Result<()> {
        for term in diagonal_terms {
            self.check_length(term.n_qubits())?;
            if !term.is_diagonal() {
                return Err(Error::Validation(format!(
                    "term {} is not diagonal in the computational basis",
                    term.label()
                )));
            }
        }
        let diag = crate::pauli::diagonal_values(diagonal_terms, self.n_qubits);
        apply_phases(&mut self.amplitudes, &diag, theta);
        Ok(())
    }

    /// Applies a gate given the full parameter vector.
    pub(crate) fn apply_gate(&mut self, gate: &Gate, params: &[f64]) {
        match gate {
            Gate::PauliRotation { param, scale, masks } => {
                rotate(&mut self.amplitudes, masks, scale * params[*param])
            }
            Gate::DiagonalEvolution { param, diagonal } => {
                apply_phases(&mut self.amplitudes, diagonal, params[*param])
            }
            Gate::ControlledZ { a, b } => controlled_z(&mut self.amplitudes, *a, *b),
        }
    }

    pub(crate) fn apply_gate_inverse(&mut self, gate: &Gate, params: &[f64]) {
        match gate {
            Gate::PauliRotation { param, scale, masks } => {
                rotate(&mut self.amplitudes, masks, -scale * params[*param])
            }
            Gate::DiagonalEvolution { param, diagonal } => {
                apply_phases(&mut self.amplitudes, diagonal, -params[*param])
            }
            Gate::ControlledZ { a, b } => controlled_z(&mut self.amplitudes, *a, *b),
        }
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// In-place `exp(-i angle P)`. Pairs `(i, i ^ flip)` are visited once each.
pub(crate) fn rotate(amps: &mut [Complex64], masks: &PauliMasks, angle: f64) {
    if angle == 0.0 {
        return;
    }
    let (s, c) = angle.sin_cos();
    let minus_i_sin = Complex64::new(0.0, -s);
    let flip = masks.flip_mask;
    if flip == 0 {
        // Diagonal string: each amplitude picks up exp(-i angle (+-1)).
        for (i, a) in amps.iter_mut().enumerate() {
            *a *= Complex64::new(c, -s * masks.parity(i));
        }
        return;
    }
    let high = 1usize << (usize::BITS - 1 - flip.leading_zeros());
    for i in 0..amps.len() {
        if i & high != 0 {
            continue;
        }
        let j = i ^ flip;
        let (ai, aj) = (amps[i], amps[j]);
        // (P psi)_i = <i|P|j> psi_j, (P psi)_j = <j|P|i> psi_i
        amps[i] = c * ai + minus_i_sin * masks.phase(j) * aj;
        amps[j] = c * aj + minus_i_sin * masks.phase(i) * ai;
    }
}

pub(crate) fn apply_phases(amps: &mut [Complex64], diagonal: &[f64], theta: f64) {
    if theta == 0.0 {
        return;
    }
    for (a, d) in amps.iter_mut().zip(diagonal) {
        *a *= Complex64::from_polar(1.0, -theta * d);
    }
}

fn controlled_z(amps: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

/// `<psi|P|psi>` for a single Pauli string.
pub(crate) fn pauli_expectation(amps: &[Complex64], masks: &PauliMasks) -> Complex64 {
    let flip = masks.flip_mask;
    amps.iter()
        .enumerate()
        .map(|(i, a)| amps[i ^ flip].conj() * masks.phase(i) * a)
        .sum()
}

/// `<bra|P|ket>`.
fn pauli_matrix_element(bra: &[Complex64], ket: &[Complex64], masks: &PauliMasks) -> Complex64 {
    let flip = masks.flip_mask;
    ket.iter()
        .enumerate()
        .map(|(i, a)| bra[i ^ flip].conj() * masks.phase(i) * a)
        .sum()
}

/// `H psi` without the identity offset.
pub fn apply_hamiltonian(h: &QubitHamiltonian, psi: &StateVector) -> Result<Vec<Complex64>> {
    if psi.n_qubits() != h.n_qubits() {
        return Err(Error::Structural(format!(
            "state has {} qubits, Hamiltonian has {}",
            psi.n_qubits(),
            h.n_qubits()
        )));
    }
    let amps = psi.amplitudes();
    let mut out: Vec<Complex64> = h
        .diagonal_values()
        .iter()
        .zip(amps)
        .map(|(d, a)| d * a)
        .collect();
    for term in h.nondiagonal_terms() {
        let masks = term.masks();
        for (i, a) in amps.iter().enumerate() {
            out[i ^ masks.flip_mask] += term.coefficient * masks.phase(i) * a;
        }
    }
    Ok(out)
}

/// Energy (identity offset included) and its gradient with respect to every
/// circuit parameter, by one forward pass and one reverse sweep.
///
/// The reverse sweep carries `psi_g` (state after gate `g`) and
/// `lambda_g = (U_L ... U_{g+1})^dagger H psi_L`; a gate `exp(-i s p G)`
/// contributes `2 s Im <lambda_g|G|psi_g>` to `dE/dp`.
pub fn adjoint_gradient(
    circuit: &AnsatzCircuit,
    h: &QubitHamiltonian,
    params: &[f64],
    input: &StateVector,
) -> Result<(f64, Vec<f64>)> {
    if params.len() != circuit.parameter_count() {
        return Err(Error::Structural(format!(
            "circuit takes {} parameters, got {}",
            circuit.parameter_count(),
            params.len()
        )));
    }
    if h.n_qubits() != circuit.n_qubits() {
        return Err(Error::Structural(format!(
            "circuit acts on {} qubits, Hamiltonian on {}",
            circuit.n_qubits(),
            h.n_qubits()
        )));
    }
    let mut psi = circuit.apply(params, input)?;
    let h_psi = apply_hamiltonian(h, &psi)?;
    let energy = inner(psi.amplitudes(), &h_psi).re + h.identity_offset();
    let mut lambda = StateVector::from_amplitudes(h_psi)?;

    let mut grad = vec![0.0; params.len()];
    for gate in circuit.gates().iter().rev() {
        match gate {
            Gate::PauliRotation { param, scale, masks } => {
                let z = pauli_matrix_element(lambda.amplitudes(), psi.amplitudes(), masks);
                grad[*param] += 2.0 * scale * z.im;
            }
            Gate::DiagonalEvolution { param, diagonal } => {
                let z: Complex64 = lambda
                    .amplitudes()
                    .iter()
                    .zip(psi.amplitudes())
                    .zip(diagonal.iter())
                    .map(|((l, p), d)| l.conj() * p * d)
                    .sum();
                grad[*param] += 2.0 * z.im;
            }
            Gate::ControlledZ { .. } => {}
        }
        psi.apply_gate_inverse(gate, params);
        lambda.apply_gate_inverse(gate, params);
    }
    Ok((energy, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn basis_states() {
        let s = StateVector::basis_state(2, 0).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        let s = StateVector::basis_state(2, 3).unwrap();
        assert_eq!(s.amplitudes()[3], Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(matches!(StateVector::basis_state(2, 4), Err(Error::Structural(_))));
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let mut s = StateVector::basis_state(2, 1).unwrap();
        let before = s.clone();
        s.apply_pauli_rotation(&[Pauli::X, Pauli::Y], 0.0).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn x_rotation_by_half_pi() {
        let mut s = StateVector::basis_state(1, 0).unwrap();
        s.apply_pauli_rotation(&[Pauli::X], PI / 2.0).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_length_mismatch() {
        let mut s = StateVector::basis_state(2, 0).unwrap();
        assert!(matches!(s.apply_pauli_rotation(&[Pauli::X], 0.1), Err(Error::Structural(_))));
    }

    #[test]
    fn diagonal_evolution_contract() {
        let mut s = StateVector::basis_state(1, 0).unwrap();
        let before = s.clone();
        let z = [PauliTerm::parse("Z", 1.0).unwrap()];
        s.apply_diagonal_evolution(&z, 0.0).unwrap();
        assert_eq!(s, before);
        s.apply_diagonal_evolution(&z, PI).unwrap();
        assert_abs_diff_eq!(before.inner(&s).norm(), 1.0, epsilon = 1e-15);

        let x = [PauliTerm::parse("X", 1.0).unwrap()];
        assert!(matches!(s.apply_diagonal_evolution(&x, 0.3), Err(Error::Validation(_))));
    }

    #[test]
    fn controlled_z_flips_only_11() {
        let mut amps = vec![Complex64::new(0.5, 0.0); 4];
        controlled_z(&mut amps, 0, 1);
        assert_eq!(amps[3], Complex64::new(-0.5, 0.0));
        assert_eq!(amps[1], Complex64::new(0.5, 0.0));
    }
}

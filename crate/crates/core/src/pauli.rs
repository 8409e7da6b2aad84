//! Pauli strings and qubit Hamiltonians.
//!
//! A Pauli string is stored per qubit: character `k` of its text form acts on
//! qubit `k`, and qubit `k` is bit `k` of a computational-basis index.
//! [`QubitHamiltonian`] keeps the all-identity part as a scalar offset and the
//! remaining terms split into a computational-basis-diagonal part (letters
//! I/Z only) and a non-diagonal part (at least one X or Y).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Coefficients whose magnitude falls below this after merging are dropped.
pub const COEFFICIENT_CUTOFF: f64 = 1e-12;

/// Largest qubit count [`to_dense`] will materialize by default.
pub const DEFAULT_DENSE_CAP: usize = 14;

/// Single-qubit Pauli operator. The derived order is I < X < Y < Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Product `self * other` as (phase, letter).
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }
}

/// Parses a Pauli string such as `"XXYZ"`.
pub fn parse_pauli_string(s: &str) -> Result<Vec<Pauli>> {
    s.chars()
        .map(|c| {
            Pauli::from_char(c)
                .ok_or_else(|| Error::Validation(format!("invalid Pauli letter {c:?} in {s:?}")))
        })
        .collect()
}

pub fn format_pauli_string(paulis: &[Pauli]) -> String {
    paulis.iter().map(|p| p.as_char()).collect()
}

/// Bit-level action of a Pauli string on basis states:
/// `P|i> = i^n_y * (-1)^popcount(i & sign_mask) |i ^ flip_mask>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip_mask: usize,
    pub sign_mask: usize,
    pub n_y: u32,
}

impl PauliMasks {
    pub fn from_paulis(paulis: &[Pauli]) -> PauliMasks {
        let mut flip_mask = 0;
        let mut sign_mask = 0;
        let mut n_y = 0;
        for (q, p) in paulis.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => flip_mask |= 1 << q,
                Pauli::Y => {
                    flip_mask |= 1 << q;
                    sign_mask |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => sign_mask |= 1 << q,
            }
        }
        PauliMasks { flip_mask, sign_mask, n_y }
    }

    /// The factor `i^n_y`.
    #[inline]
    pub fn y_phase(&self) -> Complex64 {
        match self.n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Matrix element `<i ^ flip|P|i>`.
    #[inline]
    pub fn phase(&self, index: usize) -> Complex64 {
        let y = self.y_phase();
        if (index & self.sign_mask).count_ones() % 2 == 1 {
            -y
        } else {
            y
        }
    }

    /// Eigenvalue of an I/Z string on basis state `index`.
    #[inline]
    pub fn parity(&self, index: usize) -> f64 {
        if (index & self.sign_mask).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// A weighted Pauli string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub paulis: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(paulis: Vec<Pauli>, coefficient: f64) -> Self {
        PauliTerm { paulis, coefficient }
    }

    /// Convenience constructor from text, e.g. `PauliTerm::parse("XX", 0.2)`.
    pub fn parse(s: &str, coefficient: f64) -> Result<Self> {
        Ok(PauliTerm::new(parse_pauli_string(s)?, coefficient))
    }

    pub fn n_qubits(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_identity(&self) -> bool {
        self.paulis.iter().all(|&p| p == Pauli::I)
    }

    /// True when every letter is I or Z.
    pub fn is_diagonal(&self) -> bool {
        self.paulis.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn masks(&self) -> PauliMasks {
        PauliMasks::from_paulis(&self.paulis)
    }

    pub fn label(&self) -> String {
        format_pauli_string(&self.paulis)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:.16e}", self.label(), self.coefficient)
    }
}

impl FromStr for PauliTerm {
    type Err = Error;

    /// Parses `"<letters> <coefficient>"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let (Some(letters), Some(coeff), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Validation(format!("expected '<pauli> <coefficient>', got {s:?}")));
        };
        let coefficient: f64 = coeff
            .parse()
            .map_err(|_| Error::Validation(format!("invalid coefficient {coeff:?}")))?;
        PauliTerm::parse(letters, coefficient)
    }
}

/// Qubit Hamiltonian `offset * I + sum_P h_P P + sum_Q h_Q Q` with the
/// diagonal (P) and non-diagonal (Q) parts held separately, each merged and
/// sorted lexicographically (I < X < Y < Z, qubit 0 first).
///
/// Only constructible through [`split`], which enforces those invariants.
/// The order in which the non-diagonal strings first appeared in the input
/// is remembered separately; it takes no part in equality.
#[derive(Clone, Debug)]
pub struct QubitHamiltonian {
    n_qubits: usize,
    diagonal_terms: Vec<PauliTerm>,
    nondiagonal_terms: Vec<PauliTerm>,
    source_order: Vec<usize>,
    identity_offset: f64,
    diagonal_cache: OnceLock<Vec<f64>>,
}

impl PartialEq for QubitHamiltonian {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits
            && self.identity_offset == other.identity_offset
            && self.diagonal_terms == other.diagonal_terms
            && self.nondiagonal_terms == other.nondiagonal_terms
    }
}

impl QubitHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn diagonal_terms(&self) -> &[PauliTerm] {
        &self.diagonal_terms
    }

    pub fn nondiagonal_terms(&self) -> &[PauliTerm] {
        &self.nondiagonal_terms
    }

    /// Non-diagonal terms in order of first appearance in the input list.
    pub fn nondiagonal_in_source_order(&self) -> impl Iterator<Item = &PauliTerm> + '_ {
        self.source_order.iter().map(|&k| &self.nondiagonal_terms[k])
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    /// Number of Pauli terms including the identity (when nonzero).
    pub fn term_count(&self) -> usize {
        self.diagonal_terms.len()
            + self.nondiagonal_terms.len()
            + usize::from(self.identity_offset != 0.0)
    }

    /// All terms, identity first, then diagonal, then non-diagonal.
    pub fn terms(&self) -> Vec<PauliTerm> {
        let mut out = Vec::with_capacity(self.term_count());
        if self.identity_offset != 0.0 {
            out.push(PauliTerm::new(vec![Pauli::I; self.n_qubits], self.identity_offset));
        }
        out.extend(self.diagonal_terms.iter().cloned());
        out.extend(self.nondiagonal_terms.iter().cloned());
        out
    }

    /// Per-basis-state values of the diagonal part, identity offset excluded.
    pub fn diagonal_values(&self) -> &[f64] {
        self.diagonal_cache
            .get_or_init(|| diagonal_values(&self.diagonal_terms, self.n_qubits))
    }

    /// Sum of absolute coefficients (identity included); a cheap norm bound.
    pub fn coefficient_one_norm(&self) -> f64 {
        self.identity_offset.abs()
            + self
                .diagonal_terms
                .iter()
                .chain(&self.nondiagonal_terms)
                .map(|t| t.coefficient.abs())
                .sum::<f64>()
    }
}

pub(crate) fn diagonal_values(terms: &[PauliTerm], n_qubits: usize) -> Vec<f64> {
    let masks: Vec<(f64, PauliMasks)> = terms.iter().map(|t| (t.coefficient, t.masks())).collect();
    (0..1usize << n_qubits)
        .map(|i| masks.iter().map(|(c, m)| c * m.parity(i)).sum())
        .collect()
}

/// Partitions `terms` into identity offset, diagonal and non-diagonal parts.
pub fn split(terms: &[PauliTerm], n_qubits: usize) -> Result<QubitHamiltonian> {
    if n_qubits == 0 {
        return Err(Error::Structural("a Hamiltonian needs at least one qubit".into()));
    }
    if n_qubits > usize::BITS as usize - 2 {
        return Err(Error::Resource(format!("{n_qubits} qubits cannot be indexed")));
    }
    let mut merged: BTreeMap<Vec<Pauli>, (f64, usize)> = BTreeMap::new();
    for (position, term) in terms.iter().enumerate() {
        if term.paulis.len() != n_qubits {
            return Err(Error::Structural(format!(
                "term {} has length {}, expected {n_qubits}",
                term.label(),
                term.paulis.len()
            )));
        }
        if !term.coefficient.is_finite() {
            return Err(Error::Validation(format!(
                "term {} has non-finite coefficient {}",
                term.label(),
                term.coefficient
            )));
        }
        merged.entry(term.paulis.clone()).or_insert((0.0, position)).0 += term.coefficient;
    }

    let mut identity_offset = 0.0;
    let mut diagonal_terms = Vec::new();
    let mut nondiagonal_terms = Vec::new();
    let mut first_seen = Vec::new();
    for (paulis, (coefficient, position)) in merged {
        let term = PauliTerm::new(paulis, coefficient);
        if term.is_identity() {
            identity_offset = coefficient;
        } else if coefficient.abs() < COEFFICIENT_CUTOFF {
            continue;
        } else if term.is_diagonal() {
            diagonal_terms.push(term);
        } else {
            nondiagonal_terms.push(term);
            first_seen.push(position);
        }
    }
    let mut source_order: Vec<usize> = (0..nondiagonal_terms.len()).collect();
    source_order.sort_by_key(|&k| first_seen[k]);
    Ok(QubitHamiltonian {
        n_qubits,
        diagonal_terms,
        nondiagonal_terms,
        source_order,
        identity_offset,
        diagonal_cache: OnceLock::new(),
    })
}

/// `<psi|H|psi>` including the identity offset.
pub fn expectation(h: &QubitHamiltonian, psi: &StateVector) -> Result<f64> {
    if psi.n_qubits() != h.n_qubits() {
        return Err(Error::Structural(format!(
            "state has {} qubits, Hamiltonian has {}",
            psi.n_qubits(),
            h.n_qubits()
        )));
    }
    let amps = psi.amplitudes();
    let diag: f64 = h
        .diagonal_values()
        .iter()
        .zip(amps)
        .map(|(d, a)| d * a.norm_sqr())
        .sum();
    let mut off = Complex64::new(0.0, 0.0);
    for term in h.nondiagonal_terms() {
        off += term.coefficient * crate::sim::pauli_expectation(amps, &term.masks());
    }
    debug_assert!(
        off.im.abs() <= 1e-12 * h.coefficient_one_norm().max(1.0),
        "imaginary residual {} in expectation",
        off.im
    );
    Ok(diag + off.re + h.identity_offset())
}

/// Dense matrix with the default qubit cap.
pub fn to_dense(h: &QubitHamiltonian) -> Result<DMatrix<Complex64>> {
    to_dense_capped(h, DEFAULT_DENSE_CAP)
}

pub fn to_dense_capped(h: &QubitHamiltonian, max_qubits: usize) -> Result<DMatrix<Complex64>> {
    if h.n_qubits() > max_qubits {
        return Err(Error::Resource(format!(
            "dense matrix for {} qubits exceeds the cap of {max_qubits}",
            h.n_qubits()
        )));
    }
    let dim = h.dimension();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, d) in h.diagonal_values().iter().enumerate() {
        m[(i, i)] = Complex64::new(d + h.identity_offset(), 0.0);
    }
    for term in h.nondiagonal_terms() {
        let masks = term.masks();
        for col in 0..dim {
            m[(col ^ masks.flip_mask, col)] += term.coefficient * masks.phase(col);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn t(s: &str, c: f64) -> PauliTerm {
        PauliTerm::parse(s, c).unwrap()
    }

    #[test]
    fn split_partitions_terms() {
        let h = split(&[t("ZI", 0.5), t("XX", 0.2), t("II", 1.0)], 2).unwrap();
        assert_eq!(h.identity_offset(), 1.0);
        assert_eq!(h.diagonal_terms(), &[t("ZI", 0.5)]);
        assert_eq!(h.nondiagonal_terms(), &[t("XX", 0.2)]);
    }

    #[test]
    fn split_merges_duplicates() {
        let h = split(&[t("ZZ", 0.3), t("ZZ", 0.1)], 2).unwrap();
        assert_eq!(h.diagonal_terms().len(), 1);
        assert_abs_diff_eq!(h.diagonal_terms()[0].coefficient, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn split_drops_cancelled_terms() {
        let h = split(&[t("XY", 0.3), t("XY", -0.3), t("ZI", 1.0)], 2).unwrap();
        assert!(h.nondiagonal_terms().is_empty());
        assert_eq!(h.term_count(), 1);
    }

    #[test]
    fn split_orders_canonically() {
        let h = split(&[t("ZI", 1.0), t("IZ", 2.0), t("YX", 3.0), t("XZ", 4.0)], 2).unwrap();
        let diag: Vec<_> = h.diagonal_terms().iter().map(PauliTerm::label).collect();
        let off: Vec<_> = h.nondiagonal_terms().iter().map(PauliTerm::label).collect();
        assert_eq!(diag, ["IZ", "ZI"]);
        assert_eq!(off, ["XZ", "YX"]);
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(matches!(split(&[t("ZZZ", 1.0)], 2), Err(Error::Structural(_))));
        assert!(matches!(split(&[t("ZZ", f64::NAN)], 2), Err(Error::Validation(_))));
        assert!(matches!(split(&[t("ZZ", f64::INFINITY)], 2), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_rejects_unknown_letters() {
        assert!(parse_pauli_string("XQ").is_err());
        assert!("XX".parse::<PauliTerm>().is_err());
        let term: PauliTerm = "XYZ -1.5e-1".parse().unwrap();
        assert_eq!(term, t("XYZ", -0.15));
    }

    #[test]
    fn expectation_on_basis_states() {
        let z = split(&[t("Z", 1.0)], 1).unwrap();
        let x = split(&[t("X", 1.0)], 1).unwrap();
        let zero = StateVector::basis_state(1, 0).unwrap();
        assert_eq!(expectation(&z, &zero).unwrap(), 1.0);
        assert_eq!(expectation(&x, &zero).unwrap(), 0.0);
        let two = StateVector::basis_state(2, 0).unwrap();
        assert!(matches!(expectation(&z, &two), Err(Error::Structural(_))));
    }

    #[test]
    fn dense_single_terms() {
        let z = to_dense(&split(&[t("Z", 1.0)], 1).unwrap()).unwrap();
        assert_eq!(z[(0, 0)].re, 1.0);
        assert_eq!(z[(1, 1)].re, -1.0);
        assert_eq!(z[(0, 1)].norm(), 0.0);

        let xx = to_dense(&split(&[t("XX", 1.0)], 2).unwrap()).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r + c == 3 { 1.0 } else { 0.0 };
                assert_eq!(xx[(r, c)], Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn dense_y_convention() {
        // Y|0> = i|1> on qubit 0 (least significant bit).
        let y = to_dense(&split(&[t("Y", 1.0)], 1).unwrap()).unwrap();
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn dense_respects_cap() {
        let h = split(&[t("ZZZ", 1.0)], 3).unwrap();
        assert!(matches!(to_dense_capped(&h, 2), Err(Error::Resource(_))));
    }

    #[test]
    fn pauli_products() {
        assert_eq!(Pauli::X.mul(Pauli::Y), (Complex64::i(), Pauli::Z));
        assert_eq!(Pauli::Z.mul(Pauli::X), (Complex64::i(), Pauli::Y));
        assert_eq!(Pauli::Y.mul(Pauli::Y).1, Pauli::I);
    }
}

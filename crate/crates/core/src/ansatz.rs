//! Circuit builders.
//!
//! Hamiltonian-alternating circuits take parameters ordered
//! `[theta_1..theta_d, phi_1..phi_d]`. Layer `k` applies, to the state, the
//! one-step Trotter product `prod_Q exp(-i phi_k h_Q Q)` over the
//! non-diagonal terms, then `exp(-i theta_k H_HF)`. The product runs in
//! canonical order unless [`TrotterOrder::Source`] asks for the order in
//! which the terms were supplied.
//!
//! Hardware-efficient circuits take `2 n (d + 1)` rotation angles: `d` blocks
//! of per-qubit `Rx` then `Ry` followed by a CZ chain on neighbouring qubits,
//! then one trailing rotation layer. Input is `|0...0>`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliMasks, QubitHamiltonian};
use crate::sim::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    HamiltonianAlternating,
    HardwareEfficient,
}

impl std::str::FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamiltonian_alternating" | "ha" => Ok(AnsatzKind::HamiltonianAlternating),
            "hardware_efficient" | "he" => Ok(AnsatzKind::HardwareEfficient),
            other => Err(Error::Validation(format!("unknown ansatz kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnsatzKind::HamiltonianAlternating => "hamiltonian_alternating",
            AnsatzKind::HardwareEfficient => "hardware_efficient",
        })
    }
}

/// Order of the factors in the one-step Trotter product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    /// Lexicographic, as stored in the Hamiltonian.
    #[default]
    Canonical,
    /// First appearance in the term list the Hamiltonian was built from,
    /// e.g. the line order of an interchange file.
    Source,
}

impl std::str::FromStr for TrotterOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(TrotterOrder::Canonical),
            "source" => Ok(TrotterOrder::Source),
            other => Err(Error::Validation(format!("unknown Trotter order {other:?}"))),
        }
    }
}

impl std::fmt::Display for TrotterOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrotterOrder::Canonical => "canonical",
            TrotterOrder::Source => "source",
        })
    }
}

/// A parameterized gate. `angle = scale * params[param]` for rotations.
#[derive(Clone, Debug)]
pub enum Gate {
    PauliRotation { param: usize, scale: f64, masks: PauliMasks },
    DiagonalEvolution { param: usize, diagonal: Arc<[f64]> },
    ControlledZ { a: usize, b: usize },
}

#[derive(Clone, Debug)]
pub struct AnsatzCircuit {
    kind: AnsatzKind,
    depth: usize,
    n_qubits: usize,
    parameter_count: usize,
    gates: Vec<Gate>,
    hamiltonian: Option<Arc<QubitHamiltonian>>,
}

impl AnsatzCircuit {
    pub fn kind(&self) -> AnsatzKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// The Hamiltonian a Hamiltonian-alternating circuit was built from.
    pub fn bound_hamiltonian(&self) -> Option<&Arc<QubitHamiltonian>> {
        self.hamiltonian.as_ref()
    }

    /// Circuit input: the reference basis state for Hamiltonian-alternating
    /// circuits, `|0...0>` for hardware-efficient ones.
    pub fn input_state(&self, reference_index: usize) -> Result<StateVector> {
        match self.kind {
            AnsatzKind::HamiltonianAlternating => {
                StateVector::basis_state(self.n_qubits, reference_index)
            }
            AnsatzKind::HardwareEfficient => StateVector::basis_state(self.n_qubits, 0),
        }
    }

    pub fn apply(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        if params.len() != self.parameter_count {
            return Err(Error::Structural(format!(
                "circuit takes {} parameters, got {}",
                self.parameter_count,
                params.len()
            )));
        }
        if input.n_qubits() != self.n_qubits {
            return Err(Error::Structural(format!(
                "circuit acts on {} qubits, input state has {}",
                self.n_qubits,
                input.n_qubits()
            )));
        }
        let mut psi = input.clone();
        for gate in &self.gates {
            psi.apply_gate(gate, params);
        }
        Ok(psi)
    }
}

/// Hamiltonian-alternating circuit of depth `depth` bound to `h`, with the
/// Trotter product in canonical order.
pub fn build_ha(h: impl Into<Arc<QubitHamiltonian>>, depth: usize) -> Result<AnsatzCircuit> {
    build_ha_ordered(h, depth, TrotterOrder::Canonical)
}

pub fn build_ha_ordered(
    h: impl Into<Arc<QubitHamiltonian>>,
    depth: usize,
    order: TrotterOrder,
) -> Result<AnsatzCircuit> {
    let h: Arc<QubitHamiltonian> = h.into();
    if depth == 0 {
        return Err(Error::Validation("ansatz depth must be at least 1".into()));
    }
    if h.nondiagonal_terms().is_empty() {
        log::warn!(
            "Hamiltonian has no non-diagonal terms; the alternating ansatz cannot improve on the reference state"
        );
    }
    let diagonal: Arc<[f64]> = h.diagonal_values().into();
    let masks: Vec<(f64, PauliMasks)> = match order {
        TrotterOrder::Canonical => h.nondiagonal_terms().iter().map(|t| (t.coefficient, t.masks())).collect(),
        TrotterOrder::Source => h.nondiagonal_in_source_order().map(|t| (t.coefficient, t.masks())).collect(),
    };
    let mut gates = Vec::with_capacity(depth * (masks.len() + 1));
    for k in 0..depth {
        for &(scale, masks) in &masks {
            gates.push(Gate::PauliRotation { param: depth + k, scale, masks });
        }
        gates.push(Gate::DiagonalEvolution { param: k, diagonal: diagonal.clone() });
    }
    Ok(AnsatzCircuit {
        kind: AnsatzKind::HamiltonianAlternating,
        depth,
        n_qubits: h.n_qubits(),
        parameter_count: 2 * depth,
        gates,
        hamiltonian: Some(h),
    })
}

/// Hardware-efficient circuit; independent of any Hamiltonian.
pub fn build_he(n_qubits: usize, depth: usize) -> Result<AnsatzCircuit> {
    if depth == 0 {
        return Err(Error::Validation("ansatz depth must be at least 1".into()));
    }
    if n_qubits < 2 {
        return Err(Error::Validation("hardware-efficient ansatz needs at least 2 qubits".into()));
    }
    let mut gates = Vec::new();
    let mut next = 0;
    let mut rotation_layer = |gates: &mut Vec<Gate>| {
        for q in 0..n_qubits {
            for letter in [Pauli::X, Pauli::Y] {
                let mut paulis = vec![Pauli::I; n_qubits];
                paulis[q] = letter;
                gates.push(Gate::PauliRotation {
                    param: next,
                    scale: 0.5,
                    masks: PauliMasks::from_paulis(&paulis),
                });
                next += 1;
            }
        }
    };
    for _ in 0..depth {
        rotation_layer(&mut gates);
        for q in 0..n_qubits - 1 {
            gates.push(Gate::ControlledZ { a: q, b: q + 1 });
        }
    }
    rotation_layer(&mut gates);
    let parameter_count = 2 * n_qubits * (depth + 1);
    debug_assert_eq!(next, parameter_count);
    Ok(AnsatzCircuit {
        kind: AnsatzKind::HardwareEfficient,
        depth,
        n_qubits,
        parameter_count,
        gates,
        hamiltonian: None,
    })
}

/// Builds a circuit of either kind for `h`; `order` only affects the
/// alternating ansatz.
pub fn build(
    kind: AnsatzKind,
    h: &Arc<QubitHamiltonian>,
    depth: usize,
    order: TrotterOrder,
) -> Result<AnsatzCircuit> {
    match kind {
        AnsatzKind::HamiltonianAlternating => build_ha_ordered(h.clone(), depth, order),
        AnsatzKind::HardwareEfficient => build_he(h.n_qubits(), depth),
    }
}

//! Molecular qubit Hamiltonians: built in for hydrogen clusters (STO-3G,
//! RHF, Jordan-Wigner), or ingested from interchange files.

pub mod integrals;
pub mod jordan_wigner;
pub mod molecule;
pub mod scf;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use integrals::{boys_f0, sto3g_integrals, AoIntegrals, TwoElectronIntegrals};
pub use jordan_wigner::jordan_wigner;
pub use molecule::{Atom, HamiltonianFamily, MoleculeSpec, XUnits};
pub use scf::{rhf, rhf_with, ScfConfig, ScfResult};

use crate::error::{Error, Result};
use crate::format::{HamiltonianFile, HamiltonianMetadata};
use crate::pauli::QubitHamiltonian;

/// A qubit Hamiltonian at one family parameter `x` with its reference state.
#[derive(Clone, Debug)]
pub struct MolecularHamiltonian {
    pub x: f64,
    pub hamiltonian: Arc<QubitHamiltonian>,
    pub hf_state_index: usize,
    pub n_electrons: usize,
    /// SCF (or file-recorded) Hartree-Fock energy, when known.
    pub hf_energy: Option<f64>,
    /// File-recorded FCI energy, when known.
    pub reference_fci: Option<f64>,
}

impl MolecularHamiltonian {
    pub fn to_file(&self, label: &str, x_units: XUnits, provenance: Option<String>) -> HamiltonianFile {
        HamiltonianFile {
            metadata: HamiltonianMetadata {
                label: label.to_string(),
                x_value: self.x,
                x_units,
                n_electrons: self.n_electrons,
                reference_hf: self.hf_energy,
                reference_fci: self.reference_fci,
                provenance,
            },
            hamiltonian: (*self.hamiltonian).clone(),
            hf_state_index: self.hf_state_index,
        }
    }
}

/// Integrals, RHF and Jordan-Wigner for a hydrogen-only closed-shell
/// molecule; `x` is recorded as the family parameter.
pub fn build_molecular_hamiltonian(mol: &MoleculeSpec, x: f64) -> Result<(MolecularHamiltonian, ScfResult)> {
    let ints = sto3g_integrals(mol)?;
    let scf = rhf(mol, &ints)?;
    let n_electrons = mol.n_electrons()?;
    let (h, hf_state_index) = jordan_wigner(&scf, &ints, n_electrons)?;
    Ok((
        MolecularHamiltonian {
            x,
            hamiltonian: Arc::new(h),
            hf_state_index,
            n_electrons,
            hf_energy: Some(scf.hf_energy),
            reference_fci: None,
        },
        scf,
    ))
}

/// Reads and validates an interchange file.
pub fn ingest_hamiltonian(path: impl AsRef<Path>) -> Result<HamiltonianFile> {
    HamiltonianFile::read(path)
}

/// Anything that yields `H(x)`.
pub trait HamiltonianSource: Send + Sync {
    fn label(&self) -> &str;
    fn x_units(&self) -> XUnits;
    fn hamiltonian_at(&self, x: f64) -> Result<MolecularHamiltonian>;
    /// The x values this source can produce, if it is a finite set.
    fn available_xs(&self) -> Option<Vec<f64>> {
        None
    }
}

impl HamiltonianSource for HamiltonianFamily {
    fn label(&self) -> &str {
        &self.label
    }

    fn x_units(&self) -> XUnits {
        self.x_units
    }

    fn hamiltonian_at(&self, x: f64) -> Result<MolecularHamiltonian> {
        let mol = self.molecule(x)?;
        Ok(build_molecular_hamiltonian(&mol, x)?.0)
    }
}

/// Hamiltonians ingested from files, keyed by their `x_value`.
#[derive(Clone, Debug)]
pub struct FileFamily {
    label: String,
    x_units: XUnits,
    entries: BTreeMap<OrderedX, (PathBuf, HamiltonianFile)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrderedX(f64);

impl Eq for OrderedX {}

impl PartialOrd for OrderedX {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedX {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Tolerance when matching a requested x to a file's x_value.
const X_MATCH_TOL: f64 = 1e-9;

impl FileFamily {
    pub fn from_paths(paths: &[PathBuf]) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::Validation("no Hamiltonian files matched".into()));
        }
        let mut entries = BTreeMap::new();
        let mut label: Option<String> = None;
        let mut units = None;
        for path in paths {
            let file = ingest_hamiltonian(path)?;
            let m = &file.metadata;
            match &label {
                None => {
                    label = Some(m.label.clone());
                    units = Some(m.x_units);
                }
                Some(l) if *l != m.label || units != Some(m.x_units) => {
                    return Err(Error::Validation(format!(
                        "{} has label {} ({}), expected {l}",
                        path.display(),
                        m.label,
                        m.x_units.as_str()
                    )));
                }
                _ => {}
            }
            if entries
                .insert(OrderedX(m.x_value), (path.clone(), file.clone()))
                .is_some()
            {
                return Err(Error::Validation(format!("duplicate x_value {} in {}", m.x_value, path.display())));
            }
        }
        Ok(FileFamily { label: label.unwrap_or_default(), x_units: units.unwrap_or(XUnits::Angstrom), entries })
    }

    /// Resolves `dir`, `dir/prefix*suffix` or a single file path.
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        Self::from_paths(&resolve_pattern(pattern)?)
    }

    pub fn file_at(&self, x: f64) -> Result<&HamiltonianFile> {
        self.entries
            .iter()
            .find(|(k, _)| (k.0 - x).abs() <= X_MATCH_TOL * x.abs().max(1.0))
            .map(|(_, (_, f))| f)
            .ok_or_else(|| Error::Validation(format!("no Hamiltonian file for x = {x}")))
    }
}

impl HamiltonianSource for FileFamily {
    fn label(&self) -> &str {
        &self.label
    }

    fn x_units(&self) -> XUnits {
        self.x_units
    }

    fn hamiltonian_at(&self, x: f64) -> Result<MolecularHamiltonian> {
        let f = self.file_at(x)?;
        Ok(MolecularHamiltonian {
            x: f.metadata.x_value,
            hamiltonian: Arc::new(f.hamiltonian.clone()),
            hf_state_index: f.hf_state_index,
            n_electrons: f.metadata.n_electrons,
            hf_energy: f.metadata.reference_hf,
            reference_fci: f.metadata.reference_fci,
        })
    }

    fn available_xs(&self) -> Option<Vec<f64>> {
        Some(self.entries.keys().map(|k| k.0).collect())
    }
}

fn resolve_pattern(pattern: &str) -> Result<Vec<PathBuf>> {
    let path = Path::new(pattern);
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let (dir, name_pattern) = if path.is_dir() {
        (path.to_path_buf(), "*.ham".to_string())
    } else {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Validation(format!("bad ingest pattern {pattern:?}")))?;
        (dir.to_path_buf(), name.to_string())
    };
    let (prefix, suffix) = match name_pattern.split_once('*') {
        Some((p, s)) if !s.contains('*') => (p.to_string(), s.to_string()),
        Some(_) => return Err(Error::Validation(format!("only one '*' is supported in {pattern:?}"))),
        None => return Err(Error::Validation(format!("no file matches {pattern:?}"))),
    };
    let mut out: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.len() >= prefix.len() + suffix.len() && n.starts_with(&prefix) && n.ends_with(&suffix))
        })
        .collect();
    out.sort();
    Ok(out)
}

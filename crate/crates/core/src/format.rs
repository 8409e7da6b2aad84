//! Hamiltonian interchange files.
//!
//! Line-oriented text: `#` comments, a `key = value` header, then a line
//! `terms` followed by one `<pauli string> <coefficient>` per line. Character
//! `k` of a Pauli string acts on qubit `k`. Reals are written with 17
//! significant digits so binary64 values survive a round trip.
//!
//! ```text
//! format_version = 1
//! label = h2
//! x_value = 7.4139999999999995e-01
//! x_units = angstrom
//! n_qubits = 4
//! n_electrons = 2
//! identity_offset = -9.8863969335458532e-02
//! reference_hf = -1.1166843870853405e+00      (optional)
//! reference_fci = -1.1372701746609031e+00     (optional)
//! hf_state_index = 3                          (optional, default 2^n_electrons - 1)
//! provenance = free text                      (optional)
//! terms
//! IIIZ -2.2278593040418415e-01
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::chem::molecule::XUnits;
use crate::error::{Error, Result};
use crate::pauli::{parse_pauli_string, split, PauliTerm, QubitHamiltonian};

pub const HAMILTONIAN_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMetadata {
    pub label: String,
    pub x_value: f64,
    pub x_units: XUnits,
    pub n_electrons: usize,
    pub reference_hf: Option<f64>,
    pub reference_fci: Option<f64>,
    pub provenance: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianFile {
    pub metadata: HamiltonianMetadata,
    pub hamiltonian: QubitHamiltonian,
    pub hf_state_index: usize,
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl HamiltonianFile {
    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let h = &self.hamiltonian;
        let mut out = String::new();
        out.push_str("# qubit Hamiltonian interchange file\n");
        let _ = writeln!(out, "format_version = {HAMILTONIAN_FORMAT_VERSION}");
        let _ = writeln!(out, "label = {}", m.label);
        let _ = writeln!(out, "x_value = {}", fmt_real(m.x_value));
        let _ = writeln!(out, "x_units = {}", m.x_units.as_str());
        let _ = writeln!(out, "n_qubits = {}", h.n_qubits());
        let _ = writeln!(out, "n_electrons = {}", m.n_electrons);
        let _ = writeln!(out, "identity_offset = {}", fmt_real(h.identity_offset()));
        if let Some(e) = m.reference_hf {
            let _ = writeln!(out, "reference_hf = {}", fmt_real(e));
        }
        if let Some(e) = m.reference_fci {
            let _ = writeln!(out, "reference_fci = {}", fmt_real(e));
        }
        if self.hf_state_index != default_reference(m.n_electrons) {
            let _ = writeln!(out, "hf_state_index = {}", self.hf_state_index);
        }
        if let Some(p) = &m.provenance {
            let _ = writeln!(out, "provenance = {}", p.replace('\n', " "));
        }
        out.push_str("terms\n");
        // non-diagonal strings keep their source order, which a Trotter
        // product may depend on
        for t in h.diagonal_terms().iter().chain(h.nondiagonal_in_source_order()) {
            let _ = writeln!(out, "{} {}", t.label(), fmt_real(t.coefficient));
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Header::default();
        let mut terms: Vec<(usize, PauliTerm)> = Vec::new();
        let mut in_terms = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |message: String| Error::Parse { line: line_no, message };
            if in_terms {
                let mut parts = line.split_whitespace();
                let (Some(letters), Some(coeff), None) = (parts.next(), parts.next(), parts.next())
                else {
                    return Err(perr(format!("expected '<pauli> <coefficient>', got {line:?}")));
                };
                let paulis = parse_pauli_string(letters).map_err(|e| perr(e.to_string()))?;
                let coefficient: f64 = coeff
                    .parse()
                    .map_err(|_| perr(format!("invalid coefficient {coeff:?}")))?;
                terms.push((line_no, PauliTerm::new(paulis, coefficient)));
                continue;
            }
            if line == "terms" {
                in_terms = true;
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(perr(format!("expected 'key = value', got {line:?}")));
            };
            header.set(key.trim(), value.trim()).map_err(perr)?;
        }
        if !in_terms {
            return Err(Error::Parse { line: text.lines().count(), message: "missing 'terms' section".into() });
        }
        header.finish(terms)
    }
}

fn default_reference(n_electrons: usize) -> usize {
    (1usize << n_electrons) - 1
}

#[derive(Default)]
struct Header {
    format_version: Option<u32>,
    label: Option<String>,
    x_value: Option<f64>,
    x_units: Option<XUnits>,
    n_qubits: Option<usize>,
    n_electrons: Option<usize>,
    identity_offset: Option<f64>,
    reference_hf: Option<f64>,
    reference_fci: Option<f64>,
    hf_state_index: Option<usize>,
    provenance: Option<String>,
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for field '{key}'"))
}

impl Header {
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "format_version" => {
                let v: u32 = parse_field(key, value)?;
                if v != HAMILTONIAN_FORMAT_VERSION {
                    return Err(format!("unsupported format_version {v}"));
                }
                self.format_version = Some(v);
            }
            "label" => self.label = Some(value.to_string()),
            "x_value" => self.x_value = Some(parse_field(key, value)?),
            "x_units" => {
                self.x_units = Some(value.parse().map_err(|e: Error| e.to_string())?)
            }
            "n_qubits" => self.n_qubits = Some(parse_field(key, value)?),
            "n_electrons" => self.n_electrons = Some(parse_field(key, value)?),
            "identity_offset" => self.identity_offset = Some(parse_field(key, value)?),
            "reference_hf" => self.reference_hf = Some(parse_field(key, value)?),
            "reference_fci" => self.reference_fci = Some(parse_field(key, value)?),
            "hf_state_index" => self.hf_state_index = Some(parse_field(key, value)?),
            "provenance" => self.provenance = Some(value.to_string()),
            other => return Err(format!("unknown field '{other}'")),
        }
        Ok(())
    }

    fn finish(self, terms: Vec<(usize, PauliTerm)>) -> Result<HamiltonianFile> {
        let missing = |f: &str| Error::Validation(format!("missing required field '{f}'"));
        self.format_version.ok_or_else(|| missing("format_version"))?;
        let n_qubits = self.n_qubits.ok_or_else(|| missing("n_qubits"))?;
        let n_electrons = self.n_electrons.ok_or_else(|| missing("n_electrons"))?;
        let identity_offset = self.identity_offset.ok_or_else(|| missing("identity_offset"))?;
        if n_qubits == 0 || n_qubits > crate::sim::MAX_QUBITS {
            return Err(Error::Validation(format!("n_qubits = {n_qubits} is out of range")));
        }
        if n_electrons > n_qubits {
            return Err(Error::Validation(format!(
                "n_electrons = {n_electrons} exceeds n_qubits = {n_qubits}"
            )));
        }
        let mut all = Vec::with_capacity(terms.len() + 1);
        for (line, t) in terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::Validation(format!(
                    "line {line}: Pauli string {} has length {}, n_qubits is {n_qubits}",
                    t.label(),
                    t.n_qubits()
                )));
            }
            all.push(t);
        }
        all.push(PauliTerm::new(vec![crate::pauli::Pauli::I; n_qubits], identity_offset));
        let hamiltonian = split(&all, n_qubits)?;
        let hf_state_index = self.hf_state_index.unwrap_or_else(|| default_reference(n_electrons));
        if hf_state_index >= 1 << n_qubits {
            return Err(Error::Validation(format!("hf_state_index {hf_state_index} out of range")));
        }
        Ok(HamiltonianFile {
            metadata: HamiltonianMetadata {
                label: self.label.ok_or_else(|| missing("label"))?,
                x_value: self.x_value.ok_or_else(|| missing("x_value"))?,
                x_units: self.x_units.ok_or_else(|| missing("x_units"))?,
                n_electrons,
                reference_hf: self.reference_hf,
                reference_fci: self.reference_fci,
                provenance: self.provenance,
            },
            hamiltonian,
            hf_state_index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
format_version = 1
label = toy
x_value = 1.5
x_units = angstrom
n_qubits = 2
n_electrons = 1
identity_offset = 0.25
terms
ZI 0.5
XX 0.2
";

    #[test]
    fn parses_sample() {
        let f = HamiltonianFile::parse(SAMPLE).unwrap();
        assert_eq!(f.metadata.label, "toy");
        assert_eq!(f.hf_state_index, 1);
        assert_eq!(f.hamiltonian.identity_offset(), 0.25);
        assert_eq!(f.hamiltonian.diagonal_terms().len(), 1);
        assert_eq!(f.hamiltonian.nondiagonal_terms().len(), 1);
    }

    #[test]
    fn text_round_trip() {
        let f = HamiltonianFile::parse(SAMPLE).unwrap();
        let again = HamiltonianFile::parse(&f.to_text()).unwrap();
        assert_eq!(f, again);
        assert_eq!(f.to_text(), again.to_text());
    }

    #[test]
    fn nondiagonal_source_order_survives_writing() {
        let text = SAMPLE.replace("XX 0.2\n", "YY 0.1\nIZ 0.3\nXX 0.2\nYY 0.05\n");
        let f = HamiltonianFile::parse(&text).unwrap();
        let again = HamiltonianFile::parse(&f.to_text()).unwrap();
        let labels = |f: &HamiltonianFile| -> Vec<String> {
            f.hamiltonian.nondiagonal_in_source_order().map(|t| t.label()).collect()
        };
        assert_eq!(labels(&f), ["YY", "XX"]);
        assert_eq!(labels(&again), ["YY", "XX"]);
        let nondiag: Vec<String> = f.hamiltonian.nondiagonal_terms().iter().map(|t| t.label()).collect();
        assert_eq!(nondiag, ["XX", "YY"]);
    }

    #[test]
    fn length_mismatch_is_a_validation_error() {
        let bad = SAMPLE.replace("XX 0.2", "XXX 0.2");
        assert!(matches!(HamiltonianFile::parse(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_lines_report_position() {
        let bad = SAMPLE.replace("XX 0.2", "XX zero");
        match HamiltonianFile::parse(&bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 11);
                assert!(message.contains("zero"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = SAMPLE.replace("n_qubits = 2", "n_qubits two");
        assert!(matches!(HamiltonianFile::parse(&bad), Err(Error::Parse { line: 6, .. })));
        let bad = SAMPLE.replace("label = toy", "colour = blue");
        assert!(matches!(HamiltonianFile::parse(&bad), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn missing_fields() {
        let bad = SAMPLE.replace("n_electrons = 1\n", "");
        assert!(matches!(HamiltonianFile::parse(&bad), Err(Error::Validation(_))));
        let bad = SAMPLE.replace("terms\n", "");
        assert!(HamiltonianFile::parse(&bad).is_err());
    }
}

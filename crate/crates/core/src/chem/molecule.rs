use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bohr radius in Ångström (CODATA 2010).
pub const BOHR_ANGSTROM: f64 = 0.52917721092;

pub const BASIS_STO3G: &str = "STO-3G";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: String,
    /// Cartesian position in Ångström.
    pub position: [f64; 3],
}

impl Atom {
    pub fn new(element: &str, position: [f64; 3]) -> Self {
        Atom { element: element.to_string(), position }
    }

    pub fn atomic_number(&self) -> Result<u32> {
        atomic_number(&self.element)
    }

    pub fn position_bohr(&self) -> [f64; 3] {
        self.position.map(|c| c / BOHR_ANGSTROM)
    }
}

fn atomic_number(symbol: &str) -> Result<u32> {
    const TABLE: [&str; 10] = ["H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne"];
    TABLE
        .iter()
        .position(|&s| s.eq_ignore_ascii_case(symbol))
        .map(|i| i as u32 + 1)
        .ok_or_else(|| Error::Validation(format!("unknown element {symbol:?}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    pub atoms: Vec<Atom>,
    pub charge: i32,
}

impl MoleculeSpec {
    /// Validated molecule: at least one electron, no coincident atoms.
    pub fn new(atoms: Vec<Atom>, charge: i32) -> Result<Self> {
        let mol = MoleculeSpec { atoms, charge };
        mol.n_electrons()?;
        for (i, a) in mol.atoms.iter().enumerate() {
            for b in &mol.atoms[i + 1..] {
                if distance(&a.position, &b.position) < 1e-8 {
                    return Err(Error::Validation(format!(
                        "atoms {} and {} coincide at {:?}",
                        a.element, b.element, a.position
                    )));
                }
            }
        }
        Ok(mol)
    }

    pub fn basis(&self) -> &'static str {
        BASIS_STO3G
    }

    pub fn n_electrons(&self) -> Result<usize> {
        let mut z = 0i64;
        for atom in &self.atoms {
            z += i64::from(atom.atomic_number()?);
        }
        let n = z - i64::from(self.charge);
        if n < 1 {
            return Err(Error::Validation(format!("molecule has {n} electrons")));
        }
        Ok(n as usize)
    }

    /// Nuclear repulsion energy in Hartree.
    pub fn nuclear_repulsion(&self) -> Result<f64> {
        let mut e = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                let za = f64::from(a.atomic_number()?);
                let zb = f64::from(b.atomic_number()?);
                e += za * zb / distance(&a.position_bohr(), &b.position_bohr());
            }
        }
        Ok(e)
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XUnits {
    Angstrom,
    Degree,
}

impl XUnits {
    pub fn as_str(self) -> &'static str {
        match self {
            XUnits::Angstrom => "angstrom",
            XUnits::Degree => "degree",
        }
    }
}

impl std::str::FromStr for XUnits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angstrom" => Ok(XUnits::Angstrom),
            "degree" | "degrees" => Ok(XUnits::Degree),
            other => Err(Error::Validation(format!("unknown x unit {other:?}"))),
        }
    }
}

type Generator = Arc<dyn Fn(f64) -> Result<MoleculeSpec> + Send + Sync>;

/// Geometry family `x -> molecule`.
#[derive(Clone)]
pub struct HamiltonianFamily {
    pub label: String,
    pub x_units: XUnits,
    generator: Generator,
}

impl fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFamily")
            .field("label", &self.label)
            .field("x_units", &self.x_units)
            .finish()
    }
}

impl HamiltonianFamily {
    pub fn new(
        label: &str,
        x_units: XUnits,
        generator: impl Fn(f64) -> Result<MoleculeSpec> + Send + Sync + 'static,
    ) -> Self {
        HamiltonianFamily { label: label.to_string(), x_units, generator: Arc::new(generator) }
    }

    pub fn molecule(&self, x: f64) -> Result<MoleculeSpec> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Validation(format!("family parameter must be positive, got {x}")));
        }
        (self.generator)(x)
    }

    /// H2 with atoms at (0,0,0) and (r,0,0).
    pub fn h2() -> Self {
        Self::new("h2", XUnits::Angstrom, |r| {
            MoleculeSpec::new(vec![Atom::new("H", [0.0, 0.0, 0.0]), Atom::new("H", [r, 0.0, 0.0])], 0)
        })
    }

    /// Linear H3 with atoms at -r, 0, r along x. Open shell: build through
    /// Hamiltonian files.
    pub fn h3_linear() -> Self {
        Self::new("h3_linear", XUnits::Angstrom, |r| {
            MoleculeSpec::new(
                vec![
                    Atom::new("H", [-r, 0.0, 0.0]),
                    Atom::new("H", [0.0, 0.0, 0.0]),
                    Atom::new("H", [r, 0.0, 0.0]),
                ],
                0,
            )
        })
    }

    /// Equilateral H3+ with atoms at (0,0), (r,0), (r/2, sqrt(3) r/2).
    pub fn h3_triangle_plus() -> Self {
        Self::new("h3_triangle_plus", XUnits::Angstrom, |r| {
            MoleculeSpec::new(
                vec![
                    Atom::new("H", [0.0, 0.0, 0.0]),
                    Atom::new("H", [r, 0.0, 0.0]),
                    Atom::new("H", [r / 2.0, 3f64.sqrt() * r / 2.0, 0.0]),
                ],
                1,
            )
        })
    }

    /// Water with O at the origin and H at (r,0) and (r cos b, r sin b),
    /// r = 0.96 Å, x = b in degrees. Needs p functions, so the built-in
    /// integral engine rejects it; kept for file metadata.
    pub fn water() -> Self {
        Self::new("water", XUnits::Degree, |beta| {
            let r = 0.96;
            let b = beta.to_radians();
            MoleculeSpec::new(
                vec![
                    Atom::new("O", [0.0, 0.0, 0.0]),
                    Atom::new("H", [r, 0.0, 0.0]),
                    Atom::new("H", [r * b.cos(), r * b.sin(), 0.0]),
                ],
                0,
            )
        })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "h2" => Ok(Self::h2()),
            "h3_linear" => Ok(Self::h3_linear()),
            "h3_triangle_plus" => Ok(Self::h3_triangle_plus()),
            "water" => Ok(Self::water()),
            other => Err(Error::Validation(format!("unknown built-in family {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electron_counts() {
        let fam = HamiltonianFamily::h3_triangle_plus();
        assert_eq!(fam.molecule(1.0).unwrap().n_electrons().unwrap(), 2);
        assert_eq!(HamiltonianFamily::h3_linear().molecule(1.0).unwrap().n_electrons().unwrap(), 3);
        assert_eq!(HamiltonianFamily::water().molecule(104.5).unwrap().n_electrons().unwrap(), 10);
        assert!(MoleculeSpec::new(vec![Atom::new("H", [0.0; 3])], 1).is_err());
    }

    #[test]
    fn triangle_is_equilateral() {
        let mol = HamiltonianFamily::h3_triangle_plus().molecule(1.3).unwrap();
        let p: Vec<_> = mol.atoms.iter().map(|a| a.position).collect();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            assert!((distance(&p[a], &p[b]) - 1.3).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_coincident_atoms() {
        let atoms = vec![Atom::new("H", [0.0; 3]), Atom::new("H", [0.0; 3])];
        assert!(MoleculeSpec::new(atoms, 0).is_err());
        assert!(HamiltonianFamily::h2().molecule(0.0).is_err());
    }

    #[test]
    fn nuclear_repulsion_h2() {
        // 1 / (0.7414 / 0.52917721092)
        let mol = HamiltonianFamily::h2().molecule(0.7414).unwrap();
        assert!((mol.nuclear_repulsion().unwrap() - 0.7137539936876182).abs() < 1e-13);
    }
}

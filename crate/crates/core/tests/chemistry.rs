//! Integrals, SCF, Jordan-Wigner and the exact oracle checked against values
//! frozen from an independent quantum-chemistry package (pyscf 2.14, STO-3G).

use std::path::PathBuf;

use vqe_interp::chem::{
    build_molecular_hamiltonian, rhf, sto3g_integrals, FileFamily, HamiltonianFamily, HamiltonianSource,
};
use vqe_interp::experiment::{build_hamiltonians, ExperimentConfig, GridSpec};
use vqe_interp::format::HamiltonianFile;
use vqe_interp::opt::OptimizerConfig;
use vqe_interp::oracle::{ground_state, hf_energy, SectorSpec};
use vqe_interp::{AnsatzKind, Error, TrotterOrder};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn h2_ao_integrals_match_reference() {
    let mol = HamiltonianFamily::h2().molecule(0.7414).unwrap();
    let ints = sto3g_integrals(&mol).unwrap();
    let tol = 1e-10;
    assert!(close(ints.overlap[(0, 1)], 0.6589571202740983, tol));
    assert!(close(ints.overlap[(0, 0)], 1.0, tol));
    assert!(close(ints.kinetic[(0, 0)], 0.7600318835666091, tol));
    assert!(close(ints.kinetic[(0, 1)], 0.23612596653085838, tol));
    assert!(close(ints.nuclear[(0, 0)], -1.8800830254117247, tol));
    assert!(close(ints.nuclear[(0, 1)], -1.193858187935173, tol));
    assert!(close(ints.eri.get(0, 0, 0, 0), 0.7746059439198978, tol));
    assert!(close(ints.eri.get(0, 0, 1, 1), 0.5694684067537881, tol));
    assert!(close(ints.eri.get(0, 1, 0, 1), 0.2966631722990007, tol));
    assert!(close(ints.eri.get(0, 0, 0, 1), 0.44379315355964943, tol));
    assert!(close(ints.eri.get(1, 1, 1, 1), 0.7746059439198978, tol));
}

#[test]
fn h2_energies_match_reference() {
    let mol = HamiltonianFamily::h2().molecule(0.7414).unwrap();
    assert!(close(mol.nuclear_repulsion().unwrap(), 0.7137539936876182, 1e-12));
    let (mh, scf) = build_molecular_hamiltonian(&mol, 0.7414).unwrap();
    assert!(close(scf.hf_energy, -1.1166843870853405, 1e-9));
    let g = ground_state(&mh.hamiltonian, &SectorSpec::electrons(2)).unwrap();
    assert!(close(g.energy, -1.137270174660903, 1e-8));
    assert_eq!(g.sector_dimension, 6);
    let hf = hf_energy(&mh.hamiltonian, mh.hf_state_index).unwrap();
    assert!(hf - g.energy > 0.01);
}

#[test]
fn h2_curve_matches_reference() {
    let cases = [
        (0.4, -0.9043613941635389, -0.9141497046270843),
        (1.0, -1.0661086493179366, -1.1011503302326187),
        (2.2, -0.746401349991159, -0.9412240336932618),
    ];
    let fam = HamiltonianFamily::h2();
    for (r, e_hf, e_fci) in cases {
        let mh = fam.hamiltonian_at(r).unwrap();
        assert!(close(mh.hf_energy.unwrap(), e_hf, 1e-9), "HF at {r}");
        let g = ground_state(&mh.hamiltonian, &SectorSpec::electrons(2)).unwrap();
        assert!(close(g.energy, e_fci, 1e-8), "FCI at {r}: {}", g.energy);
    }
}

#[test]
fn triangle_h3_plus_matches_reference() {
    let cases = [
        (0.5, -0.7250596819824904, -0.7410926666180878),
        (1.0, -1.245914314971077, -1.2742751049879315),
        (2.5, -0.8416972660726889, -0.9821710302734391),
    ];
    let fam = HamiltonianFamily::h3_triangle_plus();
    for (r, e_hf, e_fci) in cases {
        let mh = fam.hamiltonian_at(r).unwrap();
        assert_eq!(mh.n_electrons, 2);
        assert_eq!(mh.hamiltonian.n_qubits(), 6);
        assert!(close(mh.hf_energy.unwrap(), e_hf, 1e-9), "HF at {r}");
        let g = ground_state(&mh.hamiltonian, &SectorSpec::electrons(2)).unwrap();
        assert!(close(g.energy, e_fci, 1e-8), "FCI at {r}: {}", g.energy);
    }
}

#[test]
fn h2_qubit_hamiltonian_matches_fixture_term_by_term() {
    let file = HamiltonianFile::read(fixtures().join("h2_0p7414.ham")).unwrap();
    let mh = HamiltonianFamily::h2().hamiltonian_at(0.7414).unwrap();
    let built = &mh.hamiltonian;
    let reference = &file.hamiltonian;
    assert_eq!(built.diagonal_terms().len(), 10);
    assert_eq!(built.nondiagonal_terms().len(), 4);
    assert_eq!(built.term_count(), 15);
    assert!(close(built.identity_offset(), reference.identity_offset(), 1e-10));
    for (a, b) in built
        .diagonal_terms()
        .iter()
        .chain(built.nondiagonal_terms())
        .zip(reference.diagonal_terms().iter().chain(reference.nondiagonal_terms()))
    {
        assert_eq!(a.paulis, b.paulis);
        assert!(close(a.coefficient, b.coefficient, 1e-10), "{}: {} vs {}", a.label(), a.coefficient, b.coefficient);
    }
    let nondiag: Vec<String> = built.nondiagonal_terms().iter().map(|t| t.label()).collect();
    assert_eq!(nondiag, ["XXYY", "XYYX", "YXXY", "YYXX"]);
}

#[test]
fn reference_state_energy_equals_scf_energy() {
    for (fam, xs) in [
        (HamiltonianFamily::h2(), vec![0.5, 0.7414, 1.7]),
        (HamiltonianFamily::h3_triangle_plus(), vec![0.6, 1.3, 2.4]),
    ] {
        for x in xs {
            let mh = fam.hamiltonian_at(x).unwrap();
            let e = hf_energy(&mh.hamiltonian, mh.hf_state_index).unwrap();
            assert!(close(e, mh.hf_energy.unwrap(), 1e-8), "{} at {x}", fam.label);
        }
    }
}

#[test]
fn linear_h3_fixtures_reproduce_recorded_fci() {
    let fam = FileFamily::from_pattern(fixtures().join("h3_linear").to_str().unwrap()).unwrap();
    let xs = fam.available_xs().unwrap();
    assert_eq!(xs.len(), 19);
    for x in xs {
        let f = fam.file_at(x).unwrap();
        let g = ground_state(&f.hamiltonian, &SectorSpec::electrons(3)).unwrap();
        assert_eq!(g.sector_dimension, 20);
        assert!(close(g.energy, f.metadata.reference_fci.unwrap(), 1e-8), "x = {x}");
        let hf = hf_energy(&f.hamiltonian, f.hf_state_index).unwrap();
        assert!(close(hf, f.metadata.reference_hf.unwrap(), 1e-8), "x = {x}");
    }
}

#[test]
fn water_fixture_reproduces_recorded_fci() {
    let f = HamiltonianFile::read(fixtures().join("water/water_54p00.ham")).unwrap();
    assert_eq!(f.hamiltonian.n_qubits(), 14);
    let g = ground_state(&f.hamiltonian, &SectorSpec::electrons(10)).unwrap();
    assert_eq!(g.sector_dimension, 1001);
    assert!(close(g.energy, -74.89397591044477, 1e-8));
    let hf = hf_energy(&f.hamiltonian, f.hf_state_index).unwrap();
    assert!(close(hf, -74.83540657626898, 1e-8));
}

#[test]
fn unsupported_systems_point_to_ingestion() {
    let water = HamiltonianFamily::water();
    match water.hamiltonian_at(104.5) {
        Err(e @ Error::UnsupportedElement { .. }) => assert!(e.to_string().contains("interchange file")),
        other => panic!("unexpected {other:?}"),
    }
    let mol = HamiltonianFamily::h3_linear().molecule(1.0).unwrap();
    let ints = sto3g_integrals(&mol).unwrap();
    assert!(matches!(rhf(&mol, &ints), Err(Error::Unsupported(_))));
}

#[test]
fn built_files_round_trip_and_carry_fci() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        family: "h2".parse().unwrap(),
        ansatz: AnsatzKind::HamiltonianAlternating,
        training_points: vec![0.7414],
        depth: 1,
        optimizer: OptimizerConfig::default(),
        eval_grid: GridSpec { min: 0.5, max: 1.0, count: 3 },
        output_dir: dir.path().to_path_buf(),
        trotter_order: TrotterOrder::Canonical,
    };
    let source = config.family.open().unwrap();
    let paths = build_hamiltonians(&config, source.as_ref(), dir.path()).unwrap();
    assert_eq!(paths.len(), 4);
    let files: Vec<HamiltonianFile> = paths.iter().map(|p| HamiltonianFile::read(p).unwrap()).collect();
    let xs: Vec<f64> = files.iter().map(|f| f.metadata.x_value).collect();
    assert_eq!(xs, [0.5, 0.7414, 0.75, 1.0]);
    let f = &files[1];
    assert!(close(f.metadata.reference_fci.unwrap(), -1.137270174660903, 1e-8));
    let again = HamiltonianFile::parse(&f.to_text()).unwrap();
    assert_eq!(f, &again);
    let first = std::fs::read(&paths[0]).unwrap();
    build_hamiltonians(&config, source.as_ref(), dir.path()).unwrap();
    assert_eq!(first, std::fs::read(&paths[0]).unwrap());
}

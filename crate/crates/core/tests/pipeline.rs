//! End-to-end training, interpolation and refinement on small molecules.

use std::sync::OnceLock;

use vqe_interp::chem::{HamiltonianFamily, HamiltonianSource};
use vqe_interp::experiment::{self, ExperimentConfig, GridSpec, TrainingRun};
use vqe_interp::interp::{evaluate_curve, warm_start_refine, TrainedModel};
use vqe_interp::opt::{OptimizerConfig, WarmStart};
use vqe_interp::oracle::{ground_state, SectorSpec};
use vqe_interp::{AnsatzKind, Error, TrotterOrder};

fn h2_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        family: "h2".parse().unwrap(),
        ansatz: AnsatzKind::HamiltonianAlternating,
        training_points: vec![0.4, 0.6, 1.0, 1.4, 1.8, 2.2],
        depth: 1,
        optimizer: OptimizerConfig { seed, ..OptimizerConfig::default() },
        eval_grid: GridSpec { min: 0.4, max: 2.2, count: 10 },
        output_dir: std::env::temp_dir(),
        trotter_order: TrotterOrder::Canonical,
    }
}

fn h2_run() -> &'static TrainingRun {
    static RUN: OnceLock<TrainingRun> = OnceLock::new();
    RUN.get_or_init(|| experiment::train(&h2_config(0), &HamiltonianFamily::h2()).unwrap())
}

#[test]
fn training_points_reach_the_exact_energy() {
    for p in &h2_run().points {
        assert!((p.result.best_energy - p.e_fci).abs() < 1e-6, "x = {}", p.x);
        assert_eq!(p.sector_dimension, 6);
    }
}

#[test]
fn interpolated_curve_reproduces_knots() {
    let run = h2_run();
    let xs: Vec<f64> = run.points.iter().map(|p| p.x).collect();
    let curve = evaluate_curve(&run.model, &HamiltonianFamily::h2(), &xs, false).unwrap();
    for (rec, p) in curve.iter().zip(&run.points) {
        assert!((rec.e_interp - p.result.best_energy).abs() < 1e-10, "x = {}", p.x);
        assert!((rec.e_direct_interp.unwrap() - p.result.best_energy).abs() < 1e-10);
    }
}

#[test]
fn interpolation_between_knots_is_accurate() {
    let curve = evaluate_curve(&h2_run().model, &HamiltonianFamily::h2(), &[0.8], false).unwrap();
    let r = &curve[0];
    assert!(r.e_interp >= r.e_fci - 1e-9);
    assert!(r.e_interp - r.e_fci <= 1e-4, "error {}", r.e_interp - r.e_fci);
    assert!(r.e_hf > r.e_fci);
}

#[test]
fn refinement_recovers_the_exact_energy() {
    let model = &h2_run().model;
    let fam = HamiltonianFamily::h2();
    let cfg = OptimizerConfig::default();
    for x in [0.8, 1.0] {
        let refined = warm_start_refine(model, &fam, x, &cfg, false).unwrap();
        let fci = ground_state(&fam.hamiltonian_at(x).unwrap().hamiltonian, &SectorSpec::electrons(2))
            .unwrap()
            .energy;
        let interpolated = evaluate_curve(model, &fam, &[x], false).unwrap()[0].e_interp;
        assert_eq!(refined.all_restart_energies.len(), 1);
        assert!(refined.best_energy - fci < 1e-6, "x = {x}");
        assert!(refined.best_energy <= interpolated + 1e-12);
    }
}

#[test]
fn extrapolation_is_refused_by_default() {
    let model = &h2_run().model;
    assert!(matches!(model.predict_params(2.5, false), Err(Error::OutOfRange { .. })));
    assert_eq!(model.predict_params(2.5, true).unwrap().len(), 2);
}

#[test]
fn model_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    h2_run().model.write(&path).unwrap();
    let back = TrainedModel::read(&path).unwrap();
    assert_eq!(&back, &h2_run().model);
    for x in [0.5, 1.3, 2.1] {
        assert_eq!(back.predict_params(x, false).unwrap(), h2_run().model.predict_params(x, false).unwrap());
    }
}

#[test]
fn identical_seeds_give_identical_runs() {
    let mut cfg = h2_config(7);
    cfg.training_points = vec![0.5, 1.0, 1.5];
    cfg.optimizer.restarts = 3;
    let a = experiment::train(&cfg, &HamiltonianFamily::h2()).unwrap();
    let b = experiment::train(&cfg, &HamiltonianFamily::h2()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.model.to_json().unwrap(), b.model.to_json().unwrap());
}

#[test]
fn warm_start_chain_trains_in_ascending_order() {
    let mut cfg = h2_config(3);
    cfg.training_points = vec![1.4, 0.6, 1.0];
    cfg.optimizer.restarts = 2;
    cfg.optimizer.warm_start = WarmStart::Chain;
    let run = experiment::train(&cfg, &HamiltonianFamily::h2()).unwrap();
    let xs: Vec<f64> = run.points.iter().map(|p| p.x).collect();
    assert_eq!(xs, [0.6, 1.0, 1.4]);
    for p in &run.points {
        assert!((p.result.best_energy - p.e_fci).abs() < 1e-6);
    }
}

#[test]
fn early_stop_trades_accuracy_for_iterations() {
    let mut cfg = h2_config(0);
    cfg.training_points = vec![0.4, 0.6, 1.0, 1.4];
    cfg.depth = 3;
    cfg.optimizer.restarts = 3;
    let full = experiment::simultaneous(&cfg, &HamiltonianFamily::h2(), false).unwrap();
    cfg.optimizer.grad_threshold_early_stop = Some(1e-2);
    let early = experiment::simultaneous(&cfg, &HamiltonianFamily::h2(), false).unwrap();
    assert!(early.result.final_grad_norms.iter().all(|&g| g < 1e-2));
    assert!(early.result.best_energy >= full.result.best_energy - 1e-12);
    let total = |r: &experiment::SimultaneousRun| r.result.iterations_per_restart.iter().sum::<usize>();
    assert!(total(&early) <= total(&full));
    assert_eq!(early.training.len(), 4);
}

#[test]
fn too_few_training_points_are_rejected() {
    let mut cfg = h2_config(0);
    cfg.training_points = vec![0.5, 1.0];
    assert!(matches!(
        experiment::train(&cfg, &HamiltonianFamily::h2()),
        Err(Error::InsufficientData(_))
    ));
}

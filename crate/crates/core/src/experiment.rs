//! Experiment configuration and the train / evaluate / simultaneous
//! pipelines shared by the command-line driver and the test suites.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{self, AnsatzKind, TrotterOrder};
use crate::chem::{FileFamily, HamiltonianFamily, HamiltonianSource, MolecularHamiltonian};
use crate::error::{Error, Result};
use crate::interp::{evaluate_fixed, CurveRecord, TrainedModel};
use crate::opt::{
    minimize, EnergyObjective, OptResult, OptimizerConfig, SimultaneousObjective, WarmStart,
};
use crate::oracle::{self, SectorSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Builtin(String),
    /// Directory, single file or `dir/prefix*suffix` of Hamiltonian files.
    Ingest(String),
}

impl std::str::FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(pattern) = s.strip_prefix("ingest:") {
            if pattern.is_empty() {
                return Err(Error::Validation("empty ingest pattern".into()));
            }
            return Ok(FamilySpec::Ingest(pattern.to_string()));
        }
        HamiltonianFamily::builtin(s)?;
        Ok(FamilySpec::Builtin(s.to_string()))
    }
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilySpec::Builtin(name) => f.write_str(name),
            FamilySpec::Ingest(pattern) => write!(f, "ingest:{pattern}"),
        }
    }
}

impl FamilySpec {
    pub fn open(&self) -> Result<Box<dyn HamiltonianSource>> {
        Ok(match self {
            FamilySpec::Builtin(name) => Box::new(HamiltonianFamily::builtin(name)?),
            FamilySpec::Ingest(pattern) => Box::new(FileFamily::from_pattern(pattern)?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Validation("evaluation grid needs at least 2 points".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Validation(format!("invalid grid range [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }

    /// Evenly spaced points, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.max } else { self.min + step * k as f64 })
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub ansatz: AnsatzKind,
    #[serde(default)]
    pub trotter_order: TrotterOrder,
    pub training_points: Vec<f64>,
    pub depth: usize,
    pub optimizer: OptimizerConfig,
    pub eval_grid: GridSpec,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        self.optimizer.seed
    }

    pub fn validate(&self) -> Result<()> {
        self.eval_grid.validate()?;
        self.optimizer.validate()?;
        if self.depth == 0 {
            return Err(Error::Validation("depth must be at least 1".into()));
        }
        if self.training_points.is_empty() {
            return Err(Error::InsufficientData("no training points".into()));
        }
        if let Some(x) = self.training_points.iter().find(|&&x| !self.eval_grid.contains(x)) {
            return Err(Error::Validation(format!(
                "training point {x} lies outside the grid [{}, {}]",
                self.eval_grid.min, self.eval_grid.max
            )));
        }
        Ok(())
    }

    /// Sorted training points.
    pub fn sorted_training_points(&self) -> Vec<f64> {
        let mut xs = self.training_points.clone();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// Grid for `source`: the configured linspace, or for file-backed
    /// families the available x values inside the grid range.
    pub fn grid_points(&self, source: &dyn HamiltonianSource) -> Vec<f64> {
        match source.available_xs() {
            Some(xs) => xs.into_iter().filter(|&x| self.eval_grid.contains(x)).collect(),
            None => self.eval_grid.points(),
        }
    }
}

/// Optimization outcome at one training point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub x: f64,
    pub e_hf: f64,
    pub e_fci: f64,
    pub sector_dimension: usize,
    pub result: OptResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingRun {
    pub model: TrainedModel,
    pub points: Vec<PointResult>,
}

fn objective_for(
    mh: &MolecularHamiltonian,
    kind: AnsatzKind,
    depth: usize,
    order: TrotterOrder,
) -> Result<EnergyObjective> {
    let circuit = ansatz::build(kind, &mh.hamiltonian, depth, order)?;
    EnergyObjective::new(mh.hamiltonian.clone(), circuit, mh.hf_state_index)
}

fn with_context(x: f64, e: Error) -> Error {
    match e {
        Error::Optimization(msg) => Error::Optimization(format!("at x = {x}: {msg}")),
        Error::Convergence(msg) => Error::Convergence(format!("at x = {x}: {msg}")),
        other => other,
    }
}

fn optimize_point(
    source: &dyn HamiltonianSource,
    x: f64,
    config: &ExperimentConfig,
    initial: Option<&[f64]>,
) -> Result<PointResult> {
    let mh = source.hamiltonian_at(x)?;
    let objective = objective_for(&mh, config.ansatz, config.depth, config.trotter_order)?;
    let result = minimize(&objective, &config.optimizer, initial).map_err(|e| with_context(x, e))?;
    let ground = oracle::ground_state(&mh.hamiltonian, &SectorSpec::electrons(mh.n_electrons))
        .map_err(|e| with_context(x, e))?;
    Ok(PointResult {
        x: mh.x,
        e_hf: oracle::hf_energy(&mh.hamiltonian, mh.hf_state_index)?,
        e_fci: ground.energy,
        sector_dimension: ground.sector_dimension,
        result,
    })
}

/// Independent optimization at each training point, then the fit.
pub fn train(config: &ExperimentConfig, source: &dyn HamiltonianSource) -> Result<TrainingRun> {
    config.validate()?;
    let xs = config.sorted_training_points();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "the parameter spline needs at least 3 training points, got {}",
            xs.len()
        )));
    }
    let points: Vec<PointResult> = match config.optimizer.warm_start {
        WarmStart::None => xs
            .par_iter()
            .map(|&x| optimize_point(source, x, config, None))
            .collect::<Result<_>>()?,
        WarmStart::Chain => {
            let mut out: Vec<PointResult> = Vec::with_capacity(xs.len());
            for &x in &xs {
                let previous = out.last().map(|p| p.result.best_params.clone());
                out.push(optimize_point(source, x, config, previous.as_deref())?);
            }
            out
        }
    };
    let mut points = points;
    select_smoothest_path(&mut points, config.optimizer.tie_tolerance);
    for p in &points {
        log::info!(
            "x = {}: E = {:.12} (FCI {:.12}, restart {})",
            p.x,
            p.result.best_energy,
            p.e_fci,
            p.result.best_restart
        );
    }
    let mut model = TrainedModel::fit(
        source.label(),
        source.x_units(),
        config.ansatz,
        config.depth,
        &points.iter().map(|p| p.x).collect::<Vec<_>>(),
        points.iter().map(|p| p.result.best_params.clone()).collect(),
        points.iter().map(|p| p.result.best_energy).collect(),
    )?;
    model.trotter_order = config.trotter_order;
    Ok(TrainingRun { model, points })
}

/// Among the restarts tied for the optimum at each point, picks the
/// sequence with the least total squared parameter change between
/// neighbouring points. Equal-energy optima can sit far apart in parameter
/// space, and the spline needs a consistent branch. Earlier restarts win
/// exact ties.
fn select_smoothest_path(points: &mut [PointResult], tie_tolerance: f64) {
    let candidates: Vec<Vec<usize>> = points.iter().map(|p| p.result.tied_restarts(tie_tolerance)).collect();
    let Some(first) = candidates.first() else {
        return;
    };
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut cost = vec![0.0; first.len()];
    let mut back: Vec<Vec<usize>> = vec![Vec::new()];
    for k in 1..points.len() {
        let (prev, cur) = (&points[k - 1].result, &points[k].result);
        let (next_cost, links): (Vec<f64>, Vec<usize>) = candidates[k]
            .iter()
            .map(|&r| {
                let (i, c) = candidates[k - 1]
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| (i, cost[i] + dist(&prev.restart_params[q], &cur.restart_params[r])))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("every point has a candidate");
                (c, i)
            })
            .unzip();
        cost = next_cost;
        back.push(links);
    }
    let mut i = (0..cost.len()).min_by(|a, b| cost[*a].total_cmp(&cost[*b])).expect("non-empty");
    for k in (0..points.len()).rev() {
        points[k].result.select(candidates[k][i]);
        if k > 0 {
            i = back[k][i];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimultaneousRun {
    pub ansatz: AnsatzKind,
    pub trotter_order: TrotterOrder,
    pub depth: usize,
    pub result: OptResult,
    /// `(x, E(x), E_FCI(x))` at each training point.
    pub training: Vec<(f64, f64, f64)>,
    pub curve: Vec<CurveRecord>,
}

/// Builds the summed-energy objective over the training points.
pub fn simultaneous_objective(
    source: &dyn HamiltonianSource,
    kind: AnsatzKind,
    depth: usize,
    order: TrotterOrder,
    xs: &[f64],
) -> Result<SimultaneousObjective> {
    let members = xs
        .iter()
        .map(|&x| {
            let mh = source.hamiltonian_at(x)?;
            Ok((mh.x, objective_for(&mh, kind, depth, order)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SimultaneousObjective::new(members)
}

/// One shared parameter vector trained on all training points, then
/// evaluated on the grid (skipped when `evaluate` is false).
pub fn simultaneous(
    config: &ExperimentConfig,
    source: &dyn HamiltonianSource,
    evaluate: bool,
) -> Result<SimultaneousRun> {
    config.validate()?;
    let xs = config.sorted_training_points();
    let objective = simultaneous_objective(source, config.ansatz, config.depth, config.trotter_order, &xs)?;
    let result = minimize(&objective, &config.optimizer, None)?;
    let energies = objective.energies(&result.best_params)?;
    let training = energies
        .into_iter()
        .map(|(x, e)| {
            let mh = source.hamiltonian_at(x)?;
            let fci = oracle::ground_state(&mh.hamiltonian, &SectorSpec::electrons(mh.n_electrons))?;
            Ok((x, e, fci.energy))
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = if evaluate {
        evaluate_fixed(
            source,
            config.ansatz,
            config.depth,
            config.trotter_order,
            &result.best_params,
            &config.grid_points(source),
        )?
    } else {
        Vec::new()
    };
    Ok(SimultaneousRun {
        ansatz: config.ansatz,
        trotter_order: config.trotter_order,
        depth: config.depth,
        result,
        training,
        curve,
    })
}

/// Writes one Hamiltonian file per x in training points and grid, with the
/// sector FCI energy recorded. Returns the paths in ascending x.
pub fn build_hamiltonians(
    config: &ExperimentConfig,
    source: &dyn HamiltonianSource,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let mut xs: Vec<f64> = config.sorted_training_points();
    xs.extend(config.grid_points(source));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    std::fs::create_dir_all(out_dir)?;
    let files = xs
        .par_iter()
        .map(|&x| {
            let mut mh = source.hamiltonian_at(x)?;
            if mh.reference_fci.is_none() {
                let g = oracle::ground_state(&mh.hamiltonian, &SectorSpec::electrons(mh.n_electrons))?;
                mh.reference_fci = Some(g.energy);
            }
            let name = format!("{}_{}.ham", source.label(), format!("{x:.6}").replace('.', "p"));
            let file = mh.to_file(
                source.label(),
                source.x_units(),
                Some("STO-3G RHF orbitals, Jordan-Wigner mapping; reference_fci is the particle-number sector minimum".into()),
            );
            Ok((out_dir.join(name), file))
        })
        .collect::<Result<Vec<_>>>()?;
    // writes are serialized
    for (path, file) in &files {
        file.write(path)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

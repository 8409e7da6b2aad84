//! Cost functions and the multi-start optimization protocol.

mod bfgs;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bfgs::{bfgs, BfgsOutcome, StopReason, TraceRecord};

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::pauli::QubitHamiltonian;
use crate::sim::{adjoint_gradient, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    #[default]
    None,
    /// Training points in ascending x; restart 0 at each point starts from
    /// the previous point's optimum.
    Chain,
}

impl std::str::FromStr for WarmStart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(WarmStart::None),
            "chain" => Ok(WarmStart::Chain),
            other => Err(Error::Validation(format!("unknown warm-start mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub init_low: f64,
    pub init_high: f64,
    /// Converged when `||grad||_inf` drops below this.
    pub grad_tolerance: f64,
    /// Stop as soon as `||grad||_2` drops below this.
    pub grad_threshold_early_stop: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
    pub warm_start: WarmStart,
    /// Restarts whose final costs lie within this of the lowest are treated
    /// as tied; the tie goes to the smallest parameter norm, then to the
    /// lowest restart index.
    pub tie_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 10,
            init_low: 0.0,
            init_high: 1e-2,
            grad_tolerance: 1e-8,
            grad_threshold_early_stop: None,
            max_iters: 1000,
            seed: 0,
            warm_start: WarmStart::None,
            tie_tolerance: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Validation("restarts must be at least 1".into()));
        }
        if !(self.init_low <= self.init_high) {
            return Err(Error::Validation(format!(
                "init_low {} exceeds init_high {}",
                self.init_low, self.init_high
            )));
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::Validation("tie_tolerance must be non-negative".into()));
        }
        if !(self.grad_tolerance > 0.0) {
            return Err(Error::Validation("grad_tolerance must be positive".into()));
        }
        if let Some(t) = self.grad_threshold_early_stop {
            if !(t >= 0.0) {
                return Err(Error::Validation("gradient threshold must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Initial parameters of one restart, drawn from its own stream.
    pub fn initial_params(&self, restart: usize, dimension: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        (0..dimension)
            .map(|_| {
                if self.init_high > self.init_low {
                    rng.gen_range(self.init_low..self.init_high)
                } else {
                    self.init_low
                }
            })
            .collect()
    }
}

/// A differentiable scalar cost over circuit parameters.
pub trait CostFunction: Sync {
    fn dimension(&self) -> usize;
    fn cost_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)>;

    fn cost(&self, params: &[f64]) -> Result<f64> {
        Ok(self.cost_and_gradient(params)?.0)
    }
}

/// `E(params) = <psi(params)|H|psi(params)>`.
#[derive(Clone, Debug)]
pub struct EnergyObjective {
    circuit: AnsatzCircuit,
    hamiltonian: Arc<QubitHamiltonian>,
    input: StateVector,
}

impl EnergyObjective {
    pub fn new(
        hamiltonian: Arc<QubitHamiltonian>,
        circuit: AnsatzCircuit,
        reference_index: usize,
    ) -> Result<Self> {
        if circuit.n_qubits() != hamiltonian.n_qubits() {
            return Err(Error::Structural(format!(
                "circuit acts on {} qubits, Hamiltonian on {}",
                circuit.n_qubits(),
                hamiltonian.n_qubits()
            )));
        }
        let input = circuit.input_state(reference_index)?;
        Ok(EnergyObjective { circuit, hamiltonian, input })
    }

    pub fn circuit(&self) -> &AnsatzCircuit {
        &self.circuit
    }

    pub fn hamiltonian(&self) -> &Arc<QubitHamiltonian> {
        &self.hamiltonian
    }

    pub fn state(&self, params: &[f64]) -> Result<StateVector> {
        self.circuit.apply(params, &self.input)
    }

    pub fn energy(&self, params: &[f64]) -> Result<f64> {
        crate::pauli::expectation(&self.hamiltonian, &self.state(params)?)
    }
}

impl CostFunction for EnergyObjective {
    fn dimension(&self) -> usize {
        self.circuit.parameter_count()
    }

    fn cost_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        adjoint_gradient(&self.circuit, &self.hamiltonian, params, &self.input)
    }
}

/// Sum of energies at several x sharing one parameter vector.
#[derive(Clone, Debug)]
pub struct SimultaneousObjective {
    members: Vec<(f64, EnergyObjective)>,
}

impl SimultaneousObjective {
    pub fn new(members: Vec<(f64, EnergyObjective)>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InsufficientData("no training points".into()));
        };
        let dim = first.1.dimension();
        if let Some((x, m)) = members.iter().find(|(_, m)| m.dimension() != dim) {
            return Err(Error::Structural(format!(
                "circuit at x = {x} takes {} parameters, expected {dim}",
                m.dimension()
            )));
        }
        Ok(SimultaneousObjective { members })
    }

    pub fn members(&self) -> &[(f64, EnergyObjective)] {
        &self.members
    }

    /// Per-member energies `(x, E(x))`.
    pub fn energies(&self, params: &[f64]) -> Result<Vec<(f64, f64)>> {
        self.members.iter().map(|(x, m)| Ok((*x, m.energy(params)?))).collect()
    }
}

impl CostFunction for SimultaneousObjective {
    fn dimension(&self) -> usize {
        self.members[0].1.dimension()
    }

    fn cost_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut total = 0.0;
        let mut grad = vec![0.0; self.dimension()];
        for (_, m) in &self.members {
            let (e, g) = m.cost_and_gradient(params)?;
            total += e;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        Ok((total, grad))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub best_restart: usize,
    /// Final cost per restart; non-finite or failed restarts hold `+inf`.
    pub all_restart_energies: Vec<f64>,
    pub iterations_per_restart: Vec<usize>,
    pub converged_flags: Vec<bool>,
    pub stop_reasons: Vec<Option<StopReason>>,
    /// Final `||grad||_2` per restart.
    pub final_grad_norms: Vec<f64>,
    pub traces: Vec<Vec<TraceRecord>>,
    /// Final parameters per restart; empty for failed restarts.
    #[serde(default)]
    pub restart_params: Vec<Vec<f64>>,
}

impl OptResult {
    /// Restarts tied with the lowest final cost under `tie_tolerance`.
    pub fn tied_restarts(&self, tie_tolerance: f64) -> Vec<usize> {
        let lowest = self.all_restart_energies.iter().cloned().fold(f64::INFINITY, f64::min);
        (0..self.all_restart_energies.len())
            .filter(|&r| self.all_restart_energies[r] <= lowest + tie_tolerance)
            .collect()
    }

    /// Makes restart `r` the reported optimum.
    pub fn select(&mut self, r: usize) {
        self.best_restart = r;
        self.best_energy = self.all_restart_energies[r];
        self.best_params = self.restart_params[r].clone();
    }

    pub fn best_trace(&self) -> &[TraceRecord] {
        &self.traces[self.best_restart]
    }

    pub fn best_grad_norm(&self) -> f64 {
        self.final_grad_norms[self.best_restart]
    }
}

/// Runs `cfg.restarts` independent BFGS minimizations and keeps the best.
/// Restart 0 starts from `initial` when given. Restarts run concurrently;
/// the reduction is deterministic, with near-ties resolved as described
/// on [`OptimizerConfig::tie_tolerance`].
pub fn minimize(
    cost: &dyn CostFunction,
    cfg: &OptimizerConfig,
    initial: Option<&[f64]>,
) -> Result<OptResult> {
    cfg.validate()?;
    let dim = cost.dimension();
    if let Some(x0) = initial {
        if x0.len() != dim {
            return Err(Error::Structural(format!(
                "initial vector has length {}, expected {dim}",
                x0.len()
            )));
        }
    }
    let outcomes: Vec<Result<BfgsOutcome>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = match (r, initial) {
                (0, Some(x0)) => x0.to_vec(),
                _ => cfg.initial_params(r, dim),
            };
            bfgs(|p| cost.cost_and_gradient(p), &x0, cfg)
        })
        .collect();

    let mut result = OptResult {
        best_params: Vec::new(),
        best_energy: f64::INFINITY,
        best_restart: 0,
        all_restart_energies: Vec::with_capacity(cfg.restarts),
        iterations_per_restart: Vec::with_capacity(cfg.restarts),
        converged_flags: Vec::with_capacity(cfg.restarts),
        stop_reasons: Vec::with_capacity(cfg.restarts),
        final_grad_norms: Vec::with_capacity(cfg.restarts),
        traces: Vec::with_capacity(cfg.restarts),
        restart_params: Vec::with_capacity(cfg.restarts),
    };
    let mut failures = Vec::new();
    let mut any_finite = false;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) if o.f.is_finite() => {
                any_finite = true;
                result.restart_params.push(o.x.clone());
                result.all_restart_energies.push(o.f);
                result.iterations_per_restart.push(o.iterations);
                result.converged_flags.push(o.converged());
                result.stop_reasons.push(Some(o.stop));
                result.final_grad_norms.push(o.grad_norm());
                result.traces.push(o.trace);
            }
            other => {
                let why = match other {
                    Err(e) => e.to_string(),
                    Ok(o) => format!("final cost {}", o.f),
                };
                log::warn!("restart {r} failed: {why}");
                failures.push(format!("restart {r}: {why}"));
                result.all_restart_energies.push(f64::INFINITY);
                result.iterations_per_restart.push(0);
                result.converged_flags.push(false);
                result.stop_reasons.push(None);
                result.final_grad_norms.push(f64::NAN);
                result.traces.push(Vec::new());
                result.restart_params.push(Vec::new());
            }
        }
    }
    if !any_finite {
        return Err(Error::Optimization(format!("every restart failed; {}", failures.join("; "))));
    }
    let norm = |r: &usize| result.restart_params[*r].iter().map(|v| v * v).sum::<f64>();
    let best = result
        .tied_restarts(cfg.tie_tolerance)
        .into_iter()
        .min_by(|a, b| norm(a).total_cmp(&norm(b)).then(a.cmp(b)))
        .expect("the lowest restart is always a candidate");
    result.select(best);
    Ok(result)
}

pub fn minimize_single(objective: &EnergyObjective, cfg: &OptimizerConfig) -> Result<OptResult> {
    minimize(objective, cfg, None)
}

pub fn minimize_simultaneous(
    objective: &SimultaneousObjective,
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    minimize(objective, cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_ha;
    use crate::pauli::{split, PauliTerm};

    fn toy() -> Arc<QubitHamiltonian> {
        let terms = [("ZI", 0.6), ("IZ", -0.4), ("XX", 0.3), ("YY", 0.3), ("ZZ", 0.1)];
        let terms: Vec<_> = terms.iter().map(|(s, c)| PauliTerm::parse(s, *c).unwrap()).collect();
        Arc::new(split(&terms, 2).unwrap())
    }

    #[test]
    fn restart_streams_are_distinct_and_reproducible() {
        let cfg = OptimizerConfig { seed: 7, ..OptimizerConfig::default() };
        let a = cfg.initial_params(0, 4);
        let b = cfg.initial_params(1, 4);
        assert_ne!(a, b);
        assert_eq!(a, cfg.initial_params(0, 4));
        assert!(a.iter().all(|v| (0.0..1e-2).contains(v)));
    }

    #[test]
    fn best_is_minimum_of_restarts() {
        let h = toy();
        let obj = EnergyObjective::new(h.clone(), build_ha(h, 1).unwrap(), 1).unwrap();
        let cfg = OptimizerConfig { restarts: 4, seed: 3, ..OptimizerConfig::default() };
        let r = minimize_single(&obj, &cfg).unwrap();
        let min = r.all_restart_energies.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(r.best_energy <= min + cfg.tie_tolerance);
        assert!(r.all_restart_energies.iter().all(|&e| r.best_energy <= e + cfg.tie_tolerance));
        assert_eq!(r.all_restart_energies.len(), 4);
        let again = minimize_single(&obj, &cfg).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn single_member_simultaneous_matches_single() {
        let h = toy();
        let obj = EnergyObjective::new(h.clone(), build_ha(h, 1).unwrap(), 1).unwrap();
        let cfg = OptimizerConfig { restarts: 2, ..OptimizerConfig::default() };
        let single = minimize_single(&obj, &cfg).unwrap();
        let sim = SimultaneousObjective::new(vec![(1.0, obj)]).unwrap();
        let joint = minimize_simultaneous(&sim, &cfg).unwrap();
        assert_eq!(single.best_params, joint.best_params);
        assert_eq!(single.best_energy, joint.best_energy);
    }

    #[test]
    fn invalid_configs() {
        let bad = OptimizerConfig { init_low: 1.0, init_high: 0.0, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { grad_tolerance: 0.0, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
    }
}

//! Interpolation of optimal circuit parameters across a Hamiltonian family.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{self, AnsatzKind, TrotterOrder};
use crate::chem::{HamiltonianSource, XUnits};
use crate::error::{Error, Result};
use crate::opt::{minimize, EnergyObjective, OptResult, OptimizerConfig};
use crate::oracle::{self, SectorSpec};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// C^1 piecewise-quadratic interpolant. On `[x_i, x_{i+1}]` the value is
/// `y_i + b_i t + c_i t^2` with `t = x - x_i`; the free condition is
/// `c_0 = c_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
}

impl QuadraticSpline {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        check_knots(xs)?;
        if ys.len() != xs.len() {
            return Err(Error::Structural(format!("{} knots but {} values", xs.len(), ys.len())));
        }
        let m = xs.len() - 1;
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
        // b0 h0 + c0 h0^2 = d0 and (b0 + 2 c0 h0) h1 + c0 h1^2 = d1
        let det = h[0] * h[1] * (h[0] + h[1]);
        let mut b = vec![0.0; m];
        let mut c = vec![0.0; m];
        b[0] = (d[0] * (2.0 * h[0] * h[1] + h[1] * h[1]) - h[0] * h[0] * d[1]) / det;
        c[0] = (h[0] * d[1] - h[1] * d[0]) / det;
        for i in 0..m - 1 {
            b[i + 1] = b[i] + 2.0 * c[i] * h[i];
            c[i + 1] = (d[i + 1] - b[i + 1] * h[i + 1]) / (h[i + 1] * h[i + 1]);
        }
        Ok(QuadraticSpline { knots: xs.to_vec(), values: ys.to_vec(), slopes: b, curvatures: c })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn segment(&self, x: f64) -> usize {
        let m = self.slopes.len();
        self.knots[1..m].partition_point(|&k| k <= x)
    }

    /// Value at `x`; outside the knots the end segments are continued.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let t = x - self.knots[i];
        self.values[i] + t * (self.slopes[i] + t * self.curvatures[i])
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        self.slopes[i] + 2.0 * self.curvatures[i] * (x - self.knots[i])
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.knots[0] && x <= self.knots[self.knots.len() - 1]
    }
}

fn check_knots(xs: &[f64]) -> Result<()> {
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "quadratic interpolation needs at least 3 training points, got {}",
            xs.len()
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation("training points must be finite and strictly ascending".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub family_label: String,
    pub x_units: XUnits,
    pub ansatz: AnsatzKind,
    #[serde(default)]
    pub trotter_order: TrotterOrder,
    pub depth: usize,
    pub training_xs: Vec<f64>,
    /// One row per training point.
    pub optimal_params: Vec<Vec<f64>>,
    pub training_energies: Vec<f64>,
    pub interpolants: Vec<QuadraticSpline>,
    /// Hash of the experiment configuration that produced the model.
    #[serde(default)]
    pub config_hash: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl TrainedModel {
    pub fn fit(
        family_label: &str,
        x_units: XUnits,
        ansatz: AnsatzKind,
        depth: usize,
        training_xs: &[f64],
        optimal_params: Vec<Vec<f64>>,
        training_energies: Vec<f64>,
    ) -> Result<Self> {
        check_knots(training_xs)?;
        if optimal_params.len() != training_xs.len() || training_energies.len() != training_xs.len() {
            return Err(Error::Structural(format!(
                "{} training points, {} parameter vectors, {} energies",
                training_xs.len(),
                optimal_params.len(),
                training_energies.len()
            )));
        }
        let dim = optimal_params[0].len();
        if optimal_params.iter().any(|p| p.len() != dim) {
            return Err(Error::Structural("parameter vectors differ in length".into()));
        }
        let interpolants = (0..dim)
            .map(|j| {
                let column: Vec<f64> = optimal_params.iter().map(|p| p[j]).collect();
                QuadraticSpline::fit(training_xs, &column)
            })
            .collect::<Result<_>>()?;
        Ok(TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            family_label: family_label.to_string(),
            x_units,
            ansatz,
            trotter_order: TrotterOrder::Canonical,
            depth,
            training_xs: training_xs.to_vec(),
            optimal_params,
            training_energies,
            interpolants,
            config_hash: None,
            seed: None,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.interpolants.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.training_xs[0], self.training_xs[self.training_xs.len() - 1])
    }

    pub fn predict_params(&self, x: f64, allow_extrapolate: bool) -> Result<Vec<f64>> {
        let (low, high) = self.range();
        if !(x >= low && x <= high) {
            if !allow_extrapolate || !x.is_finite() {
                return Err(Error::OutOfRange { x, low, high });
            }
            log::warn!("extrapolating parameters to x = {x} outside [{low}, {high}]");
        }
        Ok(self.interpolants.iter().map(|s| s.eval(x)).collect())
    }

    /// The same spline applied directly to the training energies.
    pub fn direct_energy_interpolant(&self) -> Result<QuadraticSpline> {
        QuadraticSpline::fit(&self.training_xs, &self.training_energies)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model format_version {}",
                model.format_version
            )));
        }
        // refit and compare so a hand-edited file cannot disagree with itself
        let refit = TrainedModel::fit(
            &model.family_label,
            model.x_units,
            model.ansatz,
            model.depth,
            &model.training_xs,
            model.optimal_params.clone(),
            model.training_energies.clone(),
        )?;
        if refit.interpolants != model.interpolants {
            return Err(Error::Validation("stored interpolants do not match the stored optima".into()));
        }
        Ok(model)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub x: f64,
    pub e_interp: f64,
    pub e_hf: f64,
    pub e_fci: f64,
    /// Direct spline of training energies; absent for fixed-parameter curves.
    pub e_direct_interp: Option<f64>,
    pub params: Vec<f64>,
}

/// Energies of the interpolated circuit on `grid`, with HF and FCI
/// references.
pub fn evaluate_curve(
    model: &TrainedModel,
    source: &dyn HamiltonianSource,
    grid: &[f64],
    allow_extrapolate: bool,
) -> Result<Vec<CurveRecord>> {
    let direct = model.direct_energy_interpolant()?;
    let params: Vec<Vec<f64>> = grid
        .iter()
        .map(|&x| model.predict_params(x, allow_extrapolate))
        .collect::<Result<_>>()?;
    let mut records = evaluate_points(source, model.ansatz, model.depth, model.trotter_order, grid, &params)?;
    for r in &mut records {
        r.e_direct_interp = Some(direct.eval(r.x));
    }
    Ok(records)
}

/// Energies of one shared parameter vector on `grid`.
pub fn evaluate_fixed(
    source: &dyn HamiltonianSource,
    kind: AnsatzKind,
    depth: usize,
    order: TrotterOrder,
    params: &[f64],
    grid: &[f64],
) -> Result<Vec<CurveRecord>> {
    let all = vec![params.to_vec(); grid.len()];
    evaluate_points(source, kind, depth, order, grid, &all)
}

fn evaluate_points(
    source: &dyn HamiltonianSource,
    kind: AnsatzKind,
    depth: usize,
    order: TrotterOrder,
    grid: &[f64],
    params: &[Vec<f64>],
) -> Result<Vec<CurveRecord>> {
    grid.par_iter()
        .zip(params)
        .map(|(&x, p)| {
            let mh = source.hamiltonian_at(x)?;
            let circuit = ansatz::build(kind, &mh.hamiltonian, depth, order)?;
            let objective = EnergyObjective::new(mh.hamiltonian.clone(), circuit, mh.hf_state_index)?;
            let e_interp = objective.energy(p)?;
            let e_hf = oracle::hf_energy(&mh.hamiltonian, mh.hf_state_index)?;
            let e_fci = oracle::ground_state(&mh.hamiltonian, &SectorSpec::electrons(mh.n_electrons))?.energy;
            Ok(CurveRecord { x, e_interp, e_hf, e_fci, e_direct_interp: None, params: p.clone() })
        })
        .collect()
}

/// One BFGS run at `x` started from the interpolated parameters.
pub fn warm_start_refine(
    model: &TrainedModel,
    source: &dyn HamiltonianSource,
    x: f64,
    cfg: &OptimizerConfig,
    allow_extrapolate: bool,
) -> Result<OptResult> {
    let start = model.predict_params(x, allow_extrapolate)?;
    let mh = source.hamiltonian_at(x)?;
    let circuit = ansatz::build(model.ansatz, &mh.hamiltonian, model.depth, model.trotter_order)?;
    let objective = EnergyObjective::new(mh.hamiltonian.clone(), circuit, mh.hf_state_index)?;
    let cfg = OptimizerConfig { restarts: 1, ..cfg.clone() };
    minimize(&objective, &cfg, Some(&start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_a_parabola() {
        let xs = [0.4, 0.6, 1.0, 1.4, 1.8, 2.2];
        let ys: Vec<f64> = xs.iter().map(|x| x * x - 0.3 * x + 2.0).collect();
        let s = QuadraticSpline::fit(&xs, &ys).unwrap();
        for k in 0..=100 {
            let x = 0.4 + 1.8 * k as f64 / 100.0;
            assert!((s.eval(x) - (x * x - 0.3 * x + 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_data() {
        let s = QuadraticSpline::fit(&[0.0, 1.0, 3.0, 4.0], &[2.5; 4]).unwrap();
        assert!((s.eval(2.2) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn first_two_segments_share_curvature() {
        let s = QuadraticSpline::fit(&[0.0, 1.0, 2.5, 3.0], &[0.0, 1.0, -1.0, 2.0]).unwrap();
        assert!((s.curvatures[0] - s.curvatures[1]).abs() < 1e-12);
    }

    #[test]
    fn too_few_or_unordered_points() {
        assert!(matches!(QuadraticSpline::fit(&[0.0, 1.0], &[0.0, 1.0]), Err(Error::InsufficientData(_))));
        assert!(matches!(
            QuadraticSpline::fit(&[0.0, 2.0, 1.0], &[0.0, 1.0, 2.0]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            QuadraticSpline::fit(&[0.0, 1.0, 1.0], &[0.0, 1.0, 2.0]),
            Err(Error::Validation(_))
        ));
    }

    fn model() -> TrainedModel {
        TrainedModel::fit(
            "toy",
            XUnits::Angstrom,
            AnsatzKind::HamiltonianAlternating,
            1,
            &[1.0, 2.0, 3.0],
            vec![vec![0.1, 0.2], vec![0.3, 0.1], vec![0.2, 0.0]],
            vec![-1.0, -1.1, -1.05],
        )
        .unwrap()
    }

    #[test]
    fn extrapolation_policy() {
        let m = model();
        assert!(matches!(m.predict_params(3.5, false), Err(Error::OutOfRange { .. })));
        assert!(m.predict_params(3.5, true).is_ok());
        assert_eq!(m.predict_params(2.0, false).unwrap(), vec![0.3, 0.1]);
    }

    #[test]
    fn json_round_trip() {
        let m = model();
        let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
        let tampered = m.to_json().unwrap().replacen("0.3", "0.35", 1);
        assert!(TrainedModel::from_json(&tampered).is_err());
    }
}

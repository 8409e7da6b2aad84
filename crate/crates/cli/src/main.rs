mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vqe_interp::ansatz::{self, AnsatzKind, TrotterOrder};
use vqe_interp::chem::HamiltonianSource;
use vqe_interp::experiment::{self, ExperimentConfig, FamilySpec, GridSpec};
use vqe_interp::format::fmt_real;
use vqe_interp::interp::{evaluate_curve, warm_start_refine, TrainedModel};
use vqe_interp::opt::{CostFunction, EnergyObjective, OptimizerConfig, WarmStart};
use vqe_interp::oracle::{self, SectorSpec};
use vqe_interp::{Error, Result};

use output::{config_hash, write_curve, write_json, write_table, Provenance};

#[derive(Parser)]
#[command(name = "vqe-interp", version, about = "Interpolated Hamiltonian-alternating VQE across molecular geometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write Hamiltonian files for the training points and grid.
    Build(Common),
    /// Optimize at each training point and fit the parameter model.
    Train(Common),
    /// Evaluate a trained model on the grid.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Re-optimize at one x starting from the interpolated parameters.
    Refine {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        x: f64,
    },
    /// Train one shared parameter vector on all training points.
    Simultaneous(Common),
    /// Hartree-Fock and exact sector energies at the training points and grid.
    Fci(Common),
    /// Compare analytic gradients with central differences.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// h2, h3_linear, h3_triangle_plus or ingest:<dir | file | dir/prefix*suffix>
    #[arg(long, default_value = "h2")]
    family: FamilySpec,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// hamiltonian_alternating (ha) or hardware_efficient (he)
    #[arg(long, default_value = "ha")]
    ansatz: AnsatzKind,
    /// Order of the non-diagonal rotations in each layer: canonical or
    /// source (as listed in the Hamiltonian input).
    #[arg(long, default_value = "canonical")]
    trotter_order: TrotterOrder,
    /// Comma-separated training points; defaults depend on the family.
    #[arg(long, value_delimiter = ',')]
    train_at: Vec<f64>,
    /// min:max:count; defaults to 100 points over the training range.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// none or chain
    #[arg(long, default_value = "none")]
    warm_start: WarmStart,
    /// Stop each optimization once the gradient 2-norm falls below this.
    #[arg(long)]
    grad_threshold: Option<f64>,
    #[arg(long)]
    allow_extrapolate: bool,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, count] = parts.as_slice() else {
        return Err("expected min:max:count".into());
    };
    let grid = GridSpec {
        min: min.parse().map_err(|_| format!("invalid grid minimum {min:?}"))?,
        max: max.parse().map_err(|_| format!("invalid grid maximum {max:?}"))?,
        count: count.parse().map_err(|_| format!("invalid grid count {count:?}"))?,
    };
    grid.validate().map_err(|e| e.to_string())?;
    Ok(grid)
}

fn default_training_points(family: &FamilySpec, source: &dyn HamiltonianSource) -> Vec<f64> {
    match family {
        FamilySpec::Builtin(name) if name == "h3_triangle_plus" => vec![0.5, 1.0, 1.5, 2.0, 2.5],
        FamilySpec::Builtin(_) => vec![0.4, 0.6, 1.0, 1.4, 1.8, 2.2],
        FamilySpec::Ingest(_) => source.available_xs().unwrap_or_default(),
    }
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, Box<dyn HamiltonianSource>)> {
        let source = self.family.open()?;
        let mut training_points = self.train_at.clone();
        if training_points.is_empty() {
            training_points = default_training_points(&self.family, source.as_ref());
        }
        training_points.sort_by(f64::total_cmp);
        let eval_grid = match self.grid {
            Some(g) => g,
            None => GridSpec {
                min: *training_points.first().ok_or_else(|| Error::InsufficientData("no training points".into()))?,
                max: *training_points.last().unwrap(),
                count: 100,
            },
        };
        let config = ExperimentConfig {
            family: self.family.clone(),
            ansatz: self.ansatz,
            training_points,
            depth: self.depth,
            optimizer: OptimizerConfig {
                restarts: self.restarts,
                seed: self.seed,
                warm_start: self.warm_start,
                grad_threshold_early_stop: self.grad_threshold,
                ..OptimizerConfig::default()
            },
            eval_grid,
            output_dir: self.out.clone(),
            trotter_order: self.trotter_order,
        };
        config.validate()?;
        std::fs::create_dir_all(&self.out)?;
        Ok((config, source))
    }
}

fn provenance(
    command: &'static str,
    config: &ExperimentConfig,
    source: &dyn HamiltonianSource,
    extra: &[&[u8]],
) -> Result<Provenance> {
    Ok(Provenance {
        command,
        config_hash: config_hash(command, config, extra)?,
        seed: config.seed(),
        x_units: source.x_units(),
    })
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(common) => {
            let (config, source) = common.resolve()?;
            let paths = experiment::build_hamiltonians(&config, source.as_ref(), &config.output_dir)?;
            for p in &paths {
                announce(p);
            }
        }
        Command::Train(common) => {
            let (config, source) = common.resolve()?;
            let prov = provenance("train", &config, source.as_ref(), &[])?;
            let mut run = experiment::train(&config, source.as_ref())?;
            run.model.config_hash = Some(prov.config_hash.clone());
            run.model.seed = Some(config.seed());
            let model_path = config.output_dir.join("model.json");
            run.model.write(&model_path)?;
            announce(&model_path);
            let records_path = config.output_dir.join("training.json");
            write_json(&records_path, &prov, &config, &run.points)?;
            announce(&records_path);
            for p in &run.points {
                println!(
                    "x = {}  E = {}  E_FCI = {}  error = {:.3e}",
                    p.x,
                    fmt_real(p.result.best_energy),
                    fmt_real(p.e_fci),
                    p.result.best_energy - p.e_fci
                );
            }
        }
        Command::Evaluate { common, model } => {
            let (config, source) = common.resolve()?;
            let model_text = std::fs::read(&model)?;
            let model = TrainedModel::read(&model)?;
            let prov = provenance("evaluate", &config, source.as_ref(), &[&model_text])?;
            let curve = evaluate_curve(&model, source.as_ref(), &config.grid_points(source.as_ref()), common.allow_extrapolate)?;
            let path = config.output_dir.join("curve.csv");
            write_curve(&path, &prov, &curve)?;
            announce(&path);
            let worst = curve.iter().map(|r| r.e_interp - r.e_fci).fold(f64::NEG_INFINITY, f64::max);
            println!("max(E_interp - E_FCI) = {worst:.3e} over {} points", curve.len());
        }
        Command::Refine { common, model, x } => {
            let (config, source) = common.resolve()?;
            let model_text = std::fs::read(&model)?;
            let model = TrainedModel::read(&model)?;
            let prov = provenance("refine", &config, source.as_ref(), &[&model_text, &x.to_le_bytes()])?;
            let result = warm_start_refine(&model, source.as_ref(), x, &config.optimizer, common.allow_extrapolate)?;
            let path = config.output_dir.join("refine.json");
            write_json(&path, &prov, &config, &result)?;
            announce(&path);
            println!("x = {x}  refined E = {}", fmt_real(result.best_energy));
        }
        Command::Simultaneous(common) => {
            let (config, source) = common.resolve()?;
            let prov = provenance("simultaneous", &config, source.as_ref(), &[])?;
            let run = experiment::simultaneous(&config, source.as_ref(), true)?;
            let path = config.output_dir.join("simultaneous.json");
            write_json(&path, &prov, &config, &run)?;
            announce(&path);
            let path = config.output_dir.join("simultaneous_curve.csv");
            write_curve(&path, &prov, &run.curve)?;
            announce(&path);
            println!(
                "cost = {}  final |grad| = {:.3e}",
                fmt_real(run.result.best_energy),
                run.result.best_grad_norm()
            );
        }
        Command::Fci(common) => {
            let (config, source) = common.resolve()?;
            let prov = provenance("fci", &config, source.as_ref(), &[])?;
            let mut xs = config.training_points.clone();
            xs.extend(config.grid_points(source.as_ref()));
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let rows = xs
                .iter()
                .map(|&x| {
                    let mh = source.hamiltonian_at(x)?;
                    let g = oracle::ground_state(&mh.hamiltonian, &SectorSpec::electrons(mh.n_electrons))?;
                    Ok(vec![
                        fmt_real(mh.x),
                        fmt_real(oracle::hf_energy(&mh.hamiltonian, mh.hf_state_index)?),
                        fmt_real(g.energy),
                        g.sector_dimension.to_string(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            let columns = ["x", "E_HF", "E_FCI", "sector_dimension"].map(String::from);
            let path = config.output_dir.join("fci.csv");
            write_table(&path, &prov, &columns, &rows)?;
            announce(&path);
        }
        Command::Gradcheck { common, samples } => {
            let (config, source) = common.resolve()?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
            let mut worst: f64 = 0.0;
            for _ in 0..samples {
                let x = config.training_points[rng.gen_range(0..config.training_points.len())];
                let mh = source.hamiltonian_at(x)?;
                let circuit = ansatz::build(config.ansatz, &mh.hamiltonian, config.depth, config.trotter_order)?;
                let obj = EnergyObjective::new(mh.hamiltonian.clone(), circuit, mh.hf_state_index)?;
                let params: Vec<f64> = (0..obj.dimension()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let (_, grad) = obj.cost_and_gradient(&params)?;
                for j in 0..params.len() {
                    let h = 1e-5;
                    let mut p = params.clone();
                    p[j] += h;
                    let up = obj.energy(&p)?;
                    p[j] -= 2.0 * h;
                    let down = obj.energy(&p)?;
                    let fd = (up - down) / (2.0 * h);
                    worst = worst.max((grad[j] - fd).abs() / (1e-6 * fd.abs()).max(1e-9));
                }
            }
            println!("worst |g - fd| / max(1e-6 |fd|, 1e-9) = {worst:.3}");
            if worst >= 1.0 {
                return Err(Error::Validation("analytic gradient disagrees with finite differences".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

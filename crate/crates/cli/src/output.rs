//! Result files: CSV curves and JSON records, each carrying the format
//! version, configuration hash, seed and unit tags.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use vqe_interp::chem::XUnits;
use vqe_interp::experiment::ExperimentConfig;
use vqe_interp::format::fmt_real;
use vqe_interp::interp::CurveRecord;
use vqe_interp::Result;

pub const OUTPUT_FORMAT_VERSION: u32 = 1;

/// First 16 hex digits of SHA-256 over the command name, the configuration
/// (output directory excluded) and any extra inputs.
pub fn config_hash(command: &str, config: &ExperimentConfig, extra: &[&[u8]]) -> Result<String> {
    let mut canonical = config.clone();
    canonical.output_dir = Default::default();
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    hasher.update([0u8]);
    hasher.update(serde_json::to_vec(&canonical)?);
    for e in extra {
        hasher.update([0u8]);
        hasher.update(e);
    }
    Ok(hex::encode(hasher.finalize())[..16].to_string())
}

#[derive(Clone, Debug)]
pub struct Provenance {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub x_units: XUnits,
}

impl Provenance {
    fn header_lines(&self) -> String {
        format!(
            "# format_version = {OUTPUT_FORMAT_VERSION}\n# command = {}\n# config_hash = {}\n# seed = {}\n# units: x = {}, energy = hartree\n",
            self.command,
            self.config_hash,
            self.seed,
            self.x_units.as_str()
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    format_version: u32,
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    x_units: XUnits,
    energy_units: &'static str,
    config: &'a ExperimentConfig,
    data: &'a T,
}

pub fn write_json<T: Serialize>(
    path: &Path,
    prov: &Provenance,
    config: &ExperimentConfig,
    data: &T,
) -> Result<()> {
    let env = Envelope {
        format_version: OUTPUT_FORMAT_VERSION,
        command: prov.command,
        config_hash: &prov.config_hash,
        seed: prov.seed,
        x_units: prov.x_units,
        energy_units: "hartree",
        config,
        data,
    };
    std::fs::write(path, serde_json::to_string_pretty(&env)? + "\n")?;
    Ok(())
}

fn csv_error(e: csv::Error) -> vqe_interp::Error {
    vqe_interp::Error::Io(std::io::Error::other(e))
}

/// Writes a table with `#` header lines followed by CSV.
pub fn write_table(path: &Path, prov: &Provenance, columns: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = prov.header_lines().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(columns).map_err(csv_error)?;
        for row in rows {
            w.write_record(row).map_err(csv_error)?;
        }
        w.flush()?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Curve CSV: `x, E_interp, E_HF, E_FCI, E_direct_interp, p0, p1, ...`.
pub fn write_curve(path: &Path, prov: &Provenance, curve: &[CurveRecord]) -> Result<()> {
    let n_params = curve.first().map_or(0, |r| r.params.len());
    let mut columns: Vec<String> =
        ["x", "E_interp", "E_HF", "E_FCI", "E_direct_interp"].iter().map(|s| s.to_string()).collect();
    columns.extend((0..n_params).map(|j| format!("p{j}")));
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt_real(r.x),
                fmt_real(r.e_interp),
                fmt_real(r.e_hf),
                fmt_real(r.e_fci),
                r.e_direct_interp.map(fmt_real).unwrap_or_default(),
            ];
            row.extend(r.params.iter().map(|&p| fmt_real(p)));
            row
        })
        .collect();
    write_table(path, prov, &columns, &rows)
}

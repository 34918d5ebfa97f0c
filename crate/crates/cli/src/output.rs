//! CSV files, plot scripts and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use xxrelay::sweep::SweepRow;

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Scientific notation with 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Output directory and the files written into it, in order.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let meta = fs::metadata(dir).map_err(|e| CliError::io(dir, e))?;
        if meta.permissions().readonly() {
            return Err(CliError::Config(format!("output directory {} is not writable", dir.display())));
        }
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Mean ± deviation curves, one row per abscissa and quantity.
    pub fn sweep_csv(
        &mut self,
        name: &str,
        axis_name: &str,
        ids: &[String],
        rows: &[SweepRow],
    ) -> Result<(), CliError> {
        self.csv(
            name,
            &[axis_name, "mean", "deviation", "quantity"],
            rows.iter().flat_map(|r| {
                r.summaries
                    .iter()
                    .zip(ids)
                    .map(move |(s, id)| vec![num(r.axis_value), num(s.mean), num(s.deviation), id.clone()])
            }),
        )
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

#[derive(Serialize)]
struct ManifestInfo<'a> {
    tool: &'a str,
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    registration_time: Option<f64>,
    files: &'a [String],
}

/// Resolved configuration plus provenance. The configuration part parses
/// back into an identical run.
pub fn manifest(config: &RunConfig, registration_time: Option<f64>, files: &[String]) -> Result<String, CliError> {
    let mut resolved = config.clone();
    if registration_time.is_some() {
        resolved.chain.registration_time = registration_time;
    }
    let mut table = toml::Table::try_from(&resolved).map_err(|e| CliError::Manifest(e.to_string()))?;
    let info =
        ManifestInfo { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), registration_time, files };
    table.insert("manifest".into(), toml::Value::try_from(info).map_err(|e| CliError::Manifest(e.to_string()))?);
    toml::to_string(&table).map_err(|e| CliError::Manifest(e.to_string()))
}

/// gnuplot script for a sweep file with columns (axis, mean, deviation, quantity).
pub fn sweep_script(data: &str, axis: &str, ylabel: &str, ids: &[String]) -> String {
    format!(
        "set datafile separator ','\nset key outside right\nset xlabel '{axis}'\nset ylabel '{ylabel}'\n\
         ids = \"{}\"\n\
         plot for [q in ids] '{data}' using 1:(strcol(4) eq q ? $2 : NaN):3 with yerrorbars title q\n",
        ids.join(" ")
    )
}

pub fn fig1_script(boundary: &str, points: &str, crossing: &str) -> String {
    format!(
        "set datafile separator ','\nset xlabel 'lambda_R'\nset ylabel 'lambda_S'\nset size square\n\
         plot '{boundary}' using 1:($3 == 0 ? $2 : NaN) with points pt 5 ps 0.4 lc rgb 'grey' title 'zero SR entanglement', \\\n\
         \x20    '{points}' using 1:2 with points pt 7 ps 0.5 title 'B', \\\n\
         \x20    x with lines dt 2 title 'bisectrix', \\\n\
         \x20    '{crossing}' using 1:1 with points pt 9 ps 2 title 'crossing'\n"
    )
}

pub fn fig2_script(data: &str) -> String {
    format!(
        "set datafile separator ','\nset xlabel 't'\n\
         plot '{data}' using 1:2 with lines lw 3 title 'C_1', '' using 1:3 with lines dt 2 title 'C_2'\n"
    )
}

pub fn fig5_script(data: &str, edge: &str, middle: &str) -> String {
    format!(
        "set datafile separator ','\nset xlabel 'lambda'\nset ylabel 'alpha'\nset view map\nset multiplot layout 1,2\n\
         set title '{edge}'\nsplot '{data}' using 1:2:3 with points pt 5 ps 0.6 palette notitle\n\
         set title '{middle}'\nsplot '{data}' using 1:2:4 with points pt 5 ps 0.6 palette notitle\n\
         unset multiplot\n"
    )
}

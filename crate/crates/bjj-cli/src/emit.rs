//! Output writers. Every file is written to a temporary sibling and
//! renamed into place, and identical configs produce byte-identical
//! files: floats are printed with 17 significant digits in CSV and with
//! the shortest round-trip representation in JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bjj_core::error::{Error, Result};
use serde_json::{json, Map, Value};

use crate::scenario::{BranchResults, ScenarioResults};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn trajectory_csv(t_grid: &[f64], branch: &BranchResults) -> String {
    let mut s = String::from("t_cm,two_m,p\n");
    for (t, dist) in t_grid.iter().zip(branch.trajectory.iter()) {
        for (two_m, p) in dist.entries() {
            s.push_str(&format!("{:.16e},{},{:.16e}\n", t, two_m, p));
        }
    }
    s
}

fn sweep_csv(results: &ScenarioResults) -> Option<String> {
    let rows = results.sweep.as_ref()?;
    let with_overlay = rows.iter().any(|r| r.var_overlay.is_some());
    let mut s = String::from(if with_overlay {
        "u_per_cm,var_no_overlay,var_overlay\n"
    } else {
        "u_per_cm,var_no_overlay\n"
    });
    for row in rows {
        match row.var_overlay {
            Some(vo) => s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                row.u, row.var_no_overlay, vo
            )),
            None => s.push_str(&format!("{:.16e},{:.16e}\n", row.u, row.var_no_overlay)),
        }
    }
    Some(s)
}

fn config_json(echo: &BTreeMap<String, String>) -> Value {
    let mut map = Map::new();
    for (k, v) in echo {
        map.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(map)
}

fn moments_json(branch: &BranchResults) -> Value {
    json!({
        "mean": branch.mean,
        "variance": branch.variance,
        "odd_suppression": branch.odd_suppression,
    })
}

fn branch_json(branch: &BranchResults) -> Value {
    let grid = &branch.final_grid;
    json!({
        "trajectory": branch
            .trajectory
            .iter()
            .map(|d| Value::from(d.probs().to_vec()))
            .collect::<Vec<Value>>(),
        "final_grid": {
            "rows": grid.shape().rows(),
            "cols": grid.shape().cols(),
            "p": grid.values().to_vec(),
        },
        "moments": moments_json(branch),
    })
}

fn summary_json(results: &ScenarioResults) -> String {
    let value = json!({
        "config": config_json(&results.config_echo),
        "t_final_cm": results.t_grid.last(),
        "t_samples": results.t_grid.len(),
        "base": moments_json(&results.base),
        "overlay": results.overlay.as_ref().map(moments_json),
    });
    format!("{:#}\n", value)
}

fn results_json(results: &ScenarioResults) -> String {
    let two_m: Vec<i64> = results.base.trajectory[0].entries().map(|(m, _)| m).collect();
    let value = json!({
        "config": config_json(&results.config_echo),
        "t_cm": results.t_grid,
        "two_m": two_m,
        "base": branch_json(&results.base),
        "overlay": results.overlay.as_ref().map(branch_json),
        "sweep": results.sweep.as_ref().map(|rows| {
            rows.iter()
                .map(|r| {
                    json!({
                        "u_per_cm": r.u,
                        "var_no_overlay": r.var_no_overlay,
                        "var_overlay": r.var_overlay,
                    })
                })
                .collect::<Vec<Value>>()
        }),
    });
    format!("{:#}\n", value)
}

/// Writes the result files into `out_dir` and returns their paths.
///
/// CSV mode emits `distribution.csv`, `grid.csv`, `trajectory.csv`
/// (with `_overlay` variants when the overlay branch ran) and `sweep.csv`
/// when a sweep was configured; JSON mode bundles the same data into
/// `results.json`. `summary.json` with the config echo and final moments
/// is always written.
pub fn emit(results: &ScenarioResults, format: OutputFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let put = |name: &str, contents: String| -> Result<PathBuf> {
        let path = out_dir.join(name);
        write_atomic(&path, &contents)?;
        Ok(path)
    };

    match format {
        OutputFormat::Csv => {
            let final_dist = results.base.trajectory.last().expect("non-empty trajectory");
            written.push(put("distribution.csv", final_dist.to_csv())?);
            written.push(put("grid.csv", results.base.final_grid.to_csv())?);
            written.push(put("trajectory.csv", trajectory_csv(&results.t_grid, &results.base))?);
            if let Some(overlay) = &results.overlay {
                let final_dist = overlay.trajectory.last().expect("non-empty trajectory");
                written.push(put("distribution_overlay.csv", final_dist.to_csv())?);
                written.push(put("grid_overlay.csv", overlay.final_grid.to_csv())?);
                written.push(put(
                    "trajectory_overlay.csv",
                    trajectory_csv(&results.t_grid, overlay),
                )?);
            }
            if let Some(csv) = sweep_csv(results) {
                written.push(put("sweep.csv", csv)?);
            }
        }
        OutputFormat::Json => {
            written.push(put("results.json", results_json(results))?);
        }
    }
    written.push(put("summary.json", summary_json(results))?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{preset, run_scenario};

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("yaml".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn summary_echoes_the_config() {
        let mut config = preset("fig3c").unwrap();
        config.t_samples = 3; // keep the test light
        let results = run_scenario(&config).unwrap();
        let summary = summary_json(&results);
        let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(parsed["config"]["scenario.initial"], "separated_corner");
        assert_eq!(parsed["t_samples"], 3);
        assert!(parsed["base"]["variance"].is_number());
    }
}

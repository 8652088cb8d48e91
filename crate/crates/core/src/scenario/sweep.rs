use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::format::fmt_g9;
use super::run::{execute, EXIT_CONFIG};

pub const SWEEP_CSV: &str = "sweep.csv";

fn children(v: &Value) -> Vec<String> {
    match v {
        Value::Object(map) => map.keys().cloned().collect(),
        Value::Array(items) => (0..items.len()).map(|i| i.to_string()).collect(),
        _ => Vec::new(),
    }
}

fn bad_path(path: &str, segment: &str, at: &Value) -> Error {
    Error::BadPath {
        path: path.to_string(),
        segment: segment.to_string(),
        valid: children(at),
    }
}

/// Follows a dotted path (array elements by index) to a numeric leaf.
pub fn numeric_leaf<'a>(root: &'a mut Value, path: &str) -> Result<&'a mut Value> {
    if path.is_empty() {
        return Err(bad_path(path, "", root));
    }
    let mut node = root;
    for segment in path.split('.') {
        let exists = match &*node {
            Value::Object(map) => map.contains_key(segment),
            Value::Array(items) => segment.parse::<usize>().is_ok_and(|i| i < items.len()),
            _ => false,
        };
        if !exists {
            return Err(bad_path(path, segment, node));
        }
        node = match node {
            Value::Object(map) => map.get_mut(segment).unwrap(),
            Value::Array(items) => &mut items[segment.parse::<usize>().unwrap()],
            _ => unreachable!(),
        };
    }
    if !node.is_number() {
        return Err(Error::config(path, format!("not a numeric field (found {node})")));
    }
    Ok(node)
}

/// Copy of `base` with the field at `path` set to `value`, revalidated.
pub fn with_value(base: &Value, path: &str, value: f64) -> Result<ScenarioConfig> {
    let mut v = base.clone();
    let leaf = numeric_leaf(&mut v, path)?;
    *leaf = if leaf.is_u64() && value >= 0.0 && value.fract() == 0.0 {
        Value::from(value as u64)
    } else {
        serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| Error::config(path, format!("{value} is not a finite number")))?
    };
    let config: ScenarioConfig = serde_json::from_value(v)?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub exit_code: i32,
    pub error: Option<String>,
    pub min_wheel_torque_nm: Option<f64>,
    pub max_wheel_torque_nm: Option<f64>,
    pub min_steer_torque_nm: Option<f64>,
    pub max_steer_torque_nm: Option<f64>,
    pub energy_j: Option<f64>,
    pub efficiency_ratio: Option<f64>,
    pub pass: bool,
}

fn run_point(base: &Value, path: &str, value: f64, out_dir: &Path, seed: Option<u64>) -> SweepRow {
    let mut row = SweepRow {
        value,
        exit_code: EXIT_CONFIG,
        error: None,
        min_wheel_torque_nm: None,
        max_wheel_torque_nm: None,
        min_steer_torque_nm: None,
        max_steer_torque_nm: None,
        energy_j: None,
        efficiency_ratio: None,
        pass: false,
    };
    let config = match with_value(base, path, value) {
        Ok(c) => c,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let (code, result) = execute(&config, out_dir, seed);
    row.exit_code = code;
    match result {
        Ok(s) => {
            let t = &s.traverse;
            row.min_wheel_torque_nm = t.drive_torque_nm.map(|e| e.min);
            row.max_wheel_torque_nm = t.drive_torque_nm.map(|e| e.max);
            row.min_steer_torque_nm = t.steering_torque_nm.map(|e| e.min);
            row.max_steer_torque_nm = t.steering_torque_nm.map(|e| e.max);
            row.energy_j = Some(t.energy_j);
            row.efficiency_ratio = Some(t.efficiency_ratio);
            row.pass = s.pass;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One full run per value, each in `out_dir/point_NNN`, then `sweep.csv` in `out_dir`.
pub fn sweep(base: &ScenarioConfig, path: &str, values: &[f64], out_dir: &Path, seed: Option<u64>) -> Result<Vec<SweepRow>> {
    let mut base_value = serde_json::to_value(base)?;
    numeric_leaf(&mut base_value, path)?;
    fs::create_dir_all(out_dir)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| run_point(&base_value, path, v, &out_dir.join(format!("point_{i:03}")), seed))
        .collect();
    write_sweep_csv(&out_dir.join(SWEEP_CSV), &rows)?;
    Ok(rows)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g9).unwrap_or_default()
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(
        b"value,exit_code,min_wheel_torque_Nm,max_wheel_torque_Nm,min_steer_torque_Nm,max_steer_torque_Nm,energy_J,efficiency_ratio,pass\n",
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_g9(r.value),
            r.exit_code,
            opt(r.min_wheel_torque_nm),
            opt(r.max_wheel_torque_nm),
            opt(r.min_steer_torque_nm),
            opt(r.max_steer_torque_nm),
            opt(r.energy_j),
            opt(r.efficiency_ratio),
            r.pass
        )?;
    }
    out.flush()?;
    Ok(())
}

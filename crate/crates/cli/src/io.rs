//! Stake and project ingestion, run manifests, and numeric formatting.

use crate::CliError;
use serde::Serialize;
use stakepower_core::Project;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// One ingested wallet: opaque address and its positive stake.
#[derive(Debug, Clone, PartialEq)]
pub struct StakeRecord {
    pub address: String,
    pub stake: f64,
}

/// Reads an `address,stake` CSV. Rows whose stake is non-positive or not a
/// number are dropped (count reported on stderr); duplicate addresses are
/// summed into one record, keeping first-appearance order (warning on
/// stderr); the optional minimum filter runs on the summed per-address
/// stakes.
pub fn ingest_stakes(path: &Path, min_stake: Option<f64>) -> Result<Vec<StakeRecord>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if headers.len() != 2 || &headers[0] != "address" || &headers[1] != "stake" {
        return Err(CliError::Data(format!(
            "{}: expected header `address,stake`, got `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut order: Vec<String> = Vec::new();
    let mut summed: HashMap<String, f64> = HashMap::new();
    let mut dropped = 0usize;
    let mut duplicates = 0usize;
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let address = row.get(0).unwrap_or("");
        match row.get(1).unwrap_or("").parse::<f64>() {
            Ok(stake) if stake.is_finite() && stake > 0.0 => {
                match summed.entry(address.to_string()) {
                    Entry::Occupied(mut e) => {
                        *e.get_mut() += stake;
                        duplicates += 1;
                    }
                    Entry::Vacant(e) => {
                        order.push(e.key().clone());
                        e.insert(stake);
                    }
                }
            }
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} rows with non-positive or non-numeric stake");
    }
    if duplicates > 0 {
        eprintln!("warning: summed {duplicates} duplicate-address rows into existing records");
    }

    let mut records: Vec<StakeRecord> = order
        .into_iter()
        .map(|address| {
            let stake = summed[&address];
            StakeRecord { address, stake }
        })
        .collect();
    if let Some(min) = min_stake {
        let before = records.len();
        records.retain(|r| r.stake >= min);
        let removed = before - records.len();
        if removed > 0 {
            eprintln!("note: minimum-stake filter {min} removed {removed} records");
        }
    }
    if records.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no usable stake records after filtering",
            path.display()
        )));
    }
    Ok(records)
}

/// Reads an `id,cost,approvals` CSV; `approvals` is a `|`-separated list of
/// agent indices into the stake file (0-based), possibly empty.
pub fn load_projects(path: &Path, n_agents: usize) -> Result<Vec<Project>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if headers.len() != 3 || &headers[0] != "id" || &headers[1] != "cost" || &headers[2] != "approvals"
    {
        return Err(CliError::Data(format!(
            "{}: expected header `id,cost,approvals`, got `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut seen = HashMap::new();
    let mut projects = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let id = row.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(CliError::Data(format!(
                "{} row {}: empty project id",
                path.display(),
                line + 1
            )));
        }
        if seen.insert(id.clone(), ()).is_some() {
            return Err(CliError::Data(format!(
                "{} row {}: duplicate project id `{id}`",
                path.display(),
                line + 1
            )));
        }
        let cost: f64 = row.get(1).unwrap_or("").parse().map_err(|_| {
            CliError::Data(format!(
                "{} row {}: cost is not a number",
                path.display(),
                line + 1
            ))
        })?;
        let mut approvals = vec![false; n_agents];
        let field = row.get(2).unwrap_or("");
        if !field.is_empty() {
            for token in field.split('|') {
                let agent: usize = token.trim().parse().map_err(|_| {
                    CliError::Data(format!(
                        "{} row {}: approval `{token}` is not an agent index",
                        path.display(),
                        line + 1
                    ))
                })?;
                if agent >= n_agents {
                    return Err(CliError::Data(format!(
                        "{} row {}: approval index {agent} out of range for {n_agents} agents",
                        path.display(),
                        line + 1
                    )));
                }
                approvals[agent] = true;
            }
        }
        projects.push(Project { id, cost, approvals });
    }
    if projects.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no projects found",
            path.display()
        )));
    }
    Ok(projects)
}

/// Reproducibility sidecar written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp_unix_seconds: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        let timestamp_unix_seconds = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_seconds,
        }
    }

    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn opt_param(self, key: &str, value: Option<impl Display>) -> Self {
        match value {
            Some(v) => self.param(key, v),
            None => self,
        }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// `results.csv` gets its manifest at `results.csv.manifest.json`.
fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Prints `body` to stdout, or writes it to `out` together with the JSON
/// manifest sidecar.
pub fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> Result<(), CliError> {
    let Some(path) = out else {
        print!("{body}");
        return Ok(());
    };
    fs::write(path, body)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    let sidecar = manifest_path(path);
    let json = serde_json::to_string_pretty(manifest).expect("manifest always serializes");
    fs::write(&sidecar, json + "\n")
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", sidecar.display())))?;
    Ok(())
}

/// Fixed-width scientific notation with 12 significant digits; every numeric
/// CSV cell goes through this so outputs are byte-stable.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::RunResult;
use crate::record::ResultRecord;

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub tool_version: &'a str,
    pub core_version: &'static str,
    pub scenario: &'a str,
    pub seed: u64,
    pub config: Option<String>,
    pub anchors_covered: Vec<String>,
    pub passed: bool,
    pub files: Vec<String>,
}

/// Writes `results.json`, `tables/*.csv` and `manifest.json` under `dir`.
pub fn write_outputs(dir: &Path, record: &ResultRecord, config: Option<&Path>) -> RunResult<Vec<PathBuf>> {
    let tables = dir.join("tables");
    fs::create_dir_all(&tables)?;
    let mut files = Vec::new();
    let results = dir.join("results.json");
    fs::write(&results, serde_json::to_string_pretty(record)?)?;
    files.push(results);
    for t in record.tables() {
        let path = tables.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv())?;
        files.push(path);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: &record.tool_version,
        core_version: paradiff_core::VERSION,
        scenario: &record.scenario,
        seed: record.seed,
        config: config.map(|p| p.display().to_string()),
        anchors_covered: record.anchors_covered(),
        passed: record.passed(),
        files: files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    files.push(path);
    Ok(files)
}

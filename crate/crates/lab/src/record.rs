use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{RunError, RunResult};

/// One measured quantity, tagged with the result it probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub anchor: String,
    pub name: String,
    /// Non-finite values serialize as `null`.
    pub value: f64,
    /// Verdict for checks; `None` for informational measurements.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scale: String,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "N")]
    pub size: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,s,p,q,N,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{:e}\n", r.scale, r.s, r.p, r.q, r.size, r.value));
        }
        out
    }
}

/// The deterministic part of a record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    pub metrics: Vec<Metric>,
    pub tables: Vec<Table>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario: String,
    pub params: ExperimentConfig,
    pub seed: u64,
    #[serde(flatten)]
    pub payload: Payload,
    pub wall_time_s: f64,
    pub tool_version: String,
}

impl ResultRecord {
    pub fn metrics(&self) -> &[Metric] {
        &self.payload.metrics
    }

    pub fn tables(&self) -> &[Table] {
        &self.payload.tables
    }

    /// Metrics and tables serialized without timing information.
    pub fn metrics_payload(&self) -> RunResult<String> {
        Ok(serde_json::to_string(&self.payload)?)
    }

    pub fn passed(&self) -> bool {
        self.metrics().iter().all(|m| m.pass != Some(false))
    }

    pub fn failures(&self) -> Vec<&Metric> {
        self.metrics().iter().filter(|m| m.pass == Some(false)).collect()
    }

    pub fn find(&self, anchor: &str, name: &str) -> Option<&Metric> {
        self.metrics().iter().find(|m| m.anchor == anchor && m.name == name)
    }

    pub fn anchors_covered(&self) -> Vec<String> {
        let mut a: Vec<String> = self.metrics().iter().map(|m| m.anchor.clone()).collect();
        a.sort();
        a.dedup();
        a
    }
}

/// Collects metrics and tables while a scenario runs.
#[derive(Debug, Default)]
pub struct Recorder {
    metrics: Vec<Metric>,
    tables: Vec<Table>,
}

impl Recorder {
    pub fn check(&mut self, anchor: &str, name: impl Into<String>, value: f64, pass: bool) {
        self.metrics.push(Metric { anchor: anchor.into(), name: name.into(), value, pass: Some(pass) });
    }

    pub fn info(&mut self, anchor: &str, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric { anchor: anchor.into(), name: name.into(), value, pass: None });
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    /// Fails if any declared anchor received no metric.
    pub fn finish(self, anchors: &[String]) -> RunResult<Payload> {
        let missing: Vec<String> = anchors
            .iter()
            .filter(|a| !self.metrics.iter().any(|m| &m.anchor == *a))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(RunError::Coverage(missing));
        }
        Ok(Payload { metrics: self.metrics, tables: self.tables })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_guard() {
        let mut r = Recorder::default();
        r.check("a", "x", 1.0, true);
        assert!(matches!(
            r.finish(&["a".into(), "b".into()]),
            Err(RunError::Coverage(m)) if m == vec!["b".to_string()]
        ));
        let mut r = Recorder::default();
        r.info("a", "x", f64::INFINITY);
        let p = r.finish(&["a".into()]).unwrap();
        assert!(serde_json::to_string(&p).unwrap().contains("null"));
    }

    #[test]
    fn csv_header() {
        let mut t = Table::new("t");
        t.rows.push(TableRow { scale: "F".into(), s: 0.5, p: 2.0, q: f64::INFINITY, size: 64, value: 1.5 });
        assert_eq!(t.to_csv(), "scale,s,p,q,N,value\nF,0.5,2,inf,64,1.5e0\n");
    }
}

use serde::Serialize;

use super::stats::TestOutcome;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    pub n: usize,
    pub statistic: f64,
    pub p: Option<f64>,
}

impl TestRecord {
    pub fn from_outcome(name: impl Into<String>, o: TestOutcome) -> Self {
        Self { name: name.into(), n: o.n, statistic: o.statistic, p: Some(o.p) }
    }

    /// A summary number with no p-value.
    pub fn scalar(name: impl Into<String>, n: usize, statistic: f64) -> Self {
        Self { name: name.into(), n, statistic, p: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub comparison: Comparison,
    pub threshold: f64,
    pub observed: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn at_least(criterion: impl Into<String>, threshold: f64, observed: f64) -> Self {
        Self { criterion: criterion.into(), comparison: Comparison::AtLeast, threshold, observed, pass: observed >= threshold }
    }

    pub fn at_most(criterion: impl Into<String>, threshold: f64, observed: f64) -> Self {
        Self { criterion: criterion.into(), comparison: Comparison::AtMost, threshold, observed, pass: observed <= threshold }
    }
}

/// Raw values behind a report, for optional CSV export.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> crate::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub tests: Vec<TestRecord>,
    pub verdicts: Vec<Verdict>,
    /// Wall-clock seconds; left empty unless timing is requested so that
    /// reports stay byte-identical across runs.
    pub runtime_s: Option<f64>,
    #[serde(skip)]
    pub samples: SampleTable,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, criterion: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }

    pub fn test(&self, name: &str) -> Option<&TestRecord> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// How a measured number is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Relation {
    AtMost {
        #[serde(with = "crate::serde_float")]
        bound: f64,
    },
    AtLeast {
        #[serde(with = "crate::serde_float")]
        bound: f64,
    },
    Within {
        target: f64,
        tolerance: f64,
    },
    /// Closed interval `[min, max]`.
    Between {
        min: f64,
        max: f64,
    },
    /// Open interval `(min, max)`.
    StrictlyBetween {
        min: f64,
        max: f64,
    },
}

impl Relation {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Relation::AtMost { bound } => v <= bound,
            Relation::AtLeast { bound } => v >= bound,
            Relation::Within { target, tolerance } => (v - target).abs() <= tolerance,
            Relation::Between { min, max } => min <= v && v <= max,
            Relation::StrictlyBetween { min, max } => min < v && v < max,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Relation::AtMost { bound } => format!("<= {bound}"),
            Relation::AtLeast { bound } => format!(">= {bound}"),
            Relation::Within { target, tolerance } => format!("= {target} +/- {tolerance}"),
            Relation::Between { min, max } => format!("in [{min}, {max}]"),
            Relation::StrictlyBetween { min, max } => format!("in ({min}, {max})"),
        }
    }
}

/// One pass/fail entry: the measured number, the threshold and the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::serde_float")]
    pub measured: f64,
    #[serde(flatten)]
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation) -> Self {
        Check {
            name: name.into(),
            measured,
            passed: relation.holds(measured),
            relation,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::AtMost { bound })
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, Relation::AtLeast { bound })
    }

    pub fn within(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, measured, Relation::Within { target, tolerance })
    }

    pub fn between(name: impl Into<String>, measured: f64, min: f64, max: f64) -> Self {
        Self::new(name, measured, Relation::Between { min, max })
    }

    pub fn strictly_between(name: impl Into<String>, measured: f64, min: f64, max: f64) -> Self {
        Self::new(name, measured, Relation::StrictlyBetween { min, max })
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.relation.describe()
        )
    }
}

/// A numeric table destined for `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn from_columns(name: impl Into<String>, columns: &[&str], data: &[&[f64]]) -> Self {
        let mut t = Table::new(name, columns);
        let len = data.first().map_or(0, |c| c.len());
        for i in 0..len {
            t.rows.push(data.iter().map(|c| c[i]).collect());
        }
        t
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRef {
    pub name: String,
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// Deterministic counters describing the work done.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Resources {
    /// Largest atomic measure handled.
    pub max_atoms: usize,
    /// Number of `W(t)` evaluations.
    pub w_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub results: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<TableRef>,
    pub resources: Resources,
    pub passed: bool,
}

impl Report {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "experiment {} (seed {}): {}\n",
            self.experiment,
            self.seed,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        for t in &self.tables {
            s.push_str(&format!("table {} ({} rows)\n", t.file, t.rows));
        }
        s
    }
}

/// A finished run: the report plus the tables it refers to.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed
    }

    /// Writes `report.json`, one CSV per table and `summary.txt`.
    pub fn write_to(&self, dir: &Path, elapsed: Option<std::time::Duration>) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            let file = std::fs::File::create(dir.join(t.file_name()))?;
            t.write_csv(std::io::BufWriter::new(file))?;
        }
        let mut json = serde_json::to_string_pretty(&self.report)?;
        json.push('\n');
        std::fs::write(dir.join("report.json"), json)?;
        let mut summary = self.report.summary();
        if let Some(d) = elapsed {
            summary.push_str(&format!("wall-clock {:.3} s\n", d.as_secs_f64()));
        }
        std::fs::write(dir.join("summary.txt"), summary)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_least("a", 0.5, 1.0).passed);
        assert!(Check::within("a", 0.62, 0.63, 0.02).passed);
        assert!(!Check::strictly_between("a", 0.05, 0.05, 0.95).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
    }

    #[test]
    fn check_serializes_threshold() {
        let c = Check::within("d2", 0.631, 0.6309, 0.02);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["relation"], "within");
        assert_eq!(v["tolerance"], 0.02);
        assert_eq!(v["passed"], true);
        let inf = serde_json::to_value(Check::at_least("d", f64::INFINITY, 2.5)).unwrap();
        assert_eq!(inf["measured"], "inf");
    }

    #[test]
    fn table_csv() {
        let t = Table::from_columns("w", &["t", "w"], &[&[1.0, 2.0], &[0.5, 0.25]]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,w\n1.0,0.5\n2.0,0.25\n");
    }
}

//! Machine-readable verification reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Bumped whenever a default tolerance changes.
pub const TOLERANCE_VERSION: u32 = 1;

/// Default tolerances by key. Relative tolerances are converted to absolute
/// ones against the target when a report is built.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("constants.chain", 1e-14),
    ("constants.sharpness", 1e-6),
    ("gamma", 1e-14),
    ("identity.defect", 1e-2),
    ("identity.refinement", 1.0),
    ("ledger.eps_trend", 1.0),
    ("ledger.holder", 1e-6),
    ("ledger.refinement", 1.0),
    ("ledger.term", 5e-2),
    ("ledger.twistor", 1e-2),
    ("pointwise.abs", 1e-3),
    ("pointwise.order", 0.3),
    ("sphere.bump_pullback", 1e-6),
    ("sphere.pullback", 1e-6),
    ("sphere.spinor_norm", 1e-10),
    ("sphere.yamabe_functional", 1e-12),
    ("yamabe.bubble", 5e-3),
    ("yamabe.descent", 1e-2),
    ("yamabe.gradient", 1e-6),
    ("yamabe.monotone", 1e-12),
    ("yamabe.profile", 2e-2),
    ("yamabe.stationary", 1e-6),
    ("zeromode.fd_slope", 0.3),
    ("zeromode.nullspace", 0.0),
    ("zeromode.residual", 1e-10),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub version: u32,
    pub values: BTreeMap<String, f64>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            version: TOLERANCE_VERSION,
            values: DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl ToleranceConfig {
    /// Applies `key=value` overrides; unknown keys are rejected.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self> {
        for o in overrides {
            let o = o.as_ref();
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("tolerance override `{o}` is not key=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("tolerance `{key}` has a non-numeric value")))?;
            if !(value >= 0.0) {
                return Err(Error::Domain(format!("tolerance `{key}` must be non-negative")));
            }
            match self.values.get_mut(key.trim()) {
                Some(slot) => *slot = value,
                None => return Err(Error::Domain(format!("unknown tolerance key `{key}`"))),
            }
        }
        Ok(self)
    }

    pub fn get(&self, key: &str) -> f64 {
        *self
            .values
            .get(key)
            .unwrap_or_else(|| panic!("tolerance `{key}` missing from the default table"))
    }
}

pub type Parameters = BTreeMap<String, Value>;

/// One check: `pass ⇔ |computed − target| ≤ tolerance` when a target is
/// given, `computed ≤ tolerance` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub parameters: Parameters,
    pub computed: f64,
    pub target: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl VerificationReport {
    pub fn against(name: &str, parameters: Parameters, computed: f64, target: f64, tolerance: f64) -> Self {
        VerificationReport {
            check_name: name.to_string(),
            parameters,
            computed,
            target: Some(target),
            tolerance,
            pass: (computed - target).abs() <= tolerance,
            runtime_ms: 0,
        }
    }

    pub fn defect(name: &str, parameters: Parameters, computed: f64, tolerance: f64) -> Self {
        VerificationReport {
            check_name: name.to_string(),
            parameters,
            computed,
            target: None,
            tolerance,
            pass: computed <= tolerance,
            runtime_ms: 0,
        }
    }
}

/// Builds a parameter map from `(key, value)` pairs.
#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = $crate::report::Parameters::new();
        $( m.insert($k.to_string(), serde_json::json!($v)); )*
        m
    }};
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub tolerance_config: ToleranceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub header: ReportHeader,
    pub pass: bool,
    pub reports: Vec<VerificationReport>,
    pub artifacts: BTreeMap<String, Value>,
}

impl ReportDocument {
    pub fn new(subcommand: &str, tolerances: ToleranceConfig) -> Self {
        ReportDocument {
            header: ReportHeader {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                subcommand: subcommand.to_string(),
                tolerance_config: tolerances,
            },
            pass: true,
            reports: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn extend(&mut self, reports: Vec<VerificationReport>, artifacts: BTreeMap<String, Value>) {
        self.reports.extend(reports);
        self.artifacts.extend(artifacts);
        self.pass = self.reports.iter().all(|r| r.pass);
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// One row per report; parameters are embedded as compact JSON.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        out.write_record(["check_name", "parameters", "computed", "target", "tolerance", "pass", "runtime_ms"])
            .map_err(csv_err)?;
        for r in &self.reports {
            let params = serde_json::to_string(&r.parameters).map_err(|e| Error::Format(e.to_string()))?;
            out.write_record([
                r.check_name.clone(),
                params,
                format!("{:e}", r.computed),
                r.target.map(|t| format!("{t:e}")).unwrap_or_default(),
                format!("{:e}", r.tolerance),
                r.pass.to_string(),
                r.runtime_ms.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Numeric-array artifacts as `index,value` tables, keyed by artifact name.
    pub fn series_csv(&self) -> Result<BTreeMap<String, String>> {
        let mut tables = BTreeMap::new();
        for (name, value) in &self.artifacts {
            let Some(items) = value.as_array() else { continue };
            let numbers: Option<Vec<f64>> = items.iter().map(Value::as_f64).collect();
            let Some(numbers) = numbers else { continue };
            let mut out = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Format(e.to_string());
            out.write_record(["index", "value"]).map_err(csv_err)?;
            for (i, v) in numbers.iter().enumerate() {
                out.write_record([i.to_string(), format!("{v:e}")]).map_err(csv_err)?;
            }
            let bytes = out.into_inner().map_err(|e| Error::Format(e.to_string()))?;
            tables.insert(name.clone(), String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?);
        }
        Ok(tables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rules() {
        let r = VerificationReport::against("x", params! {"n" => 3}, 1.0, 1.05, 0.1);
        assert!(r.pass);
        let r = VerificationReport::against("x", Parameters::new(), 1.0, 1.2, 0.1);
        assert!(!r.pass);
        assert!(VerificationReport::defect("x", Parameters::new(), 1e-15, 1e-14).pass);
        assert!(!VerificationReport::defect("x", Parameters::new(), f64::NAN, 1e-14).pass);
    }

    #[test]
    fn tolerance_overrides() {
        let t = ToleranceConfig::default().with_overrides(&["gamma=1e-10"]).unwrap();
        assert_eq!(t.get("gamma"), 1e-10);
        assert!(ToleranceConfig::default().with_overrides(&["nope=1"]).is_err());
        assert!(ToleranceConfig::default().with_overrides(&["gamma"]).is_err());
        assert!(ToleranceConfig::default().with_overrides(&["gamma=-1"]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_report() {
        let mut doc = ReportDocument::new("t", ToleranceConfig::default());
        doc.extend(
            vec![
                VerificationReport::defect("a", params! {"n" => 3}, 0.0, 1.0),
                VerificationReport::against("b", Parameters::new(), 2.0, 2.0, 0.0),
            ],
            BTreeMap::from([("trace".to_string(), serde_json::json!([3.0, 2.0]))]),
        );
        let mut buf = Vec::new();
        doc.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(doc.pass);
        let series = doc.series_csv().unwrap();
        assert_eq!(series["trace"].lines().count(), 3);
    }
}

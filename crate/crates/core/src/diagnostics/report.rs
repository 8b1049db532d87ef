use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::fronts::FrontFit;
use crate::geometry::DirectionSetEstimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSample {
    pub t: f64,
    pub value: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSample {
    pub t: f64,
    pub point: Vec<f64>,
    pub defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Everything a scenario measures, keyed so that verdicts can be recomputed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_fit: Option<FrontFit>,
    /// Sup-norm time series of `σ_k(D²u)` per `k`.
    #[serde(default)]
    pub sigma_stats: BTreeMap<usize, Vec<SigmaSample>>,
    #[serde(default)]
    pub planarity_defects: Vec<DefectSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_cloud: Option<DirectionSetEstimate>,
    /// Named scalar measurements (reach, contamination, profile distances, ...).
    #[serde(default)]
    pub measurements: BTreeMap<String, f64>,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> Result<String, DiagnosticsError> {
        serde_json::to_string_pretty(self).map_err(|e| DiagnosticsError::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, DiagnosticsError> {
        serde_json::from_str(text).map_err(|e| DiagnosticsError::Io(e.to_string()))
    }

    pub fn push_sigma(&mut self, k: usize, s: SigmaSample) {
        self.sigma_stats.entry(k).or_default().push(s);
    }

    pub fn measure(&mut self, key: impl Into<String>, value: f64) {
        self.measurements.insert(key.into(), value);
    }

    /// Entries must be finite (an absent cloud or fit is fine).
    pub fn all_finite(&self) -> bool {
        let fit_ok = self.speed_fit.map_or(true, |f| f.speed.is_finite() && f.log_coef.is_finite() && f.shift.is_finite());
        fit_ok
            && self.sigma_stats.values().flatten().all(|s| s.value.is_finite() && s.t.is_finite())
            && self.planarity_defects.iter().all(|d| d.defect.is_finite())
            && self.measurements.values().all(|v| v.is_finite())
    }

    /// CSV time series `t,value,x0,...` for one `k`.
    pub fn write_sigma_csv<W: Write>(&self, k: usize, w: W) -> Result<(), DiagnosticsError> {
        let mut out = csv::Writer::from_writer(w);
        let rows = self.sigma_stats.get(&k).map(Vec::as_slice).unwrap_or(&[]);
        let dim = rows.first().map_or(0, |r| r.argmax.len());
        let mut header = vec!["t".to_string(), "value".to_string()];
        header.extend((0..dim).map(|a| format!("x{a}")));
        out.write_record(&header).map_err(|e| DiagnosticsError::Io(e.to_string()))?;
        for r in rows {
            let mut rec = vec![r.t.to_string(), r.value.to_string()];
            rec.extend(r.argmax.iter().map(|v| v.to_string()));
            out.write_record(&rec).map_err(|e| DiagnosticsError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| DiagnosticsError::Io(e.to_string()))
    }

    /// CSV `t,defect,x0,...,label` of the planarity probes.
    pub fn write_defects_csv<W: Write>(&self, w: W) -> Result<(), DiagnosticsError> {
        let mut out = csv::Writer::from_writer(w);
        let dim = self.planarity_defects.first().map_or(0, |r| r.point.len());
        let mut header = vec!["t".to_string(), "defect".to_string()];
        header.extend((0..dim).map(|a| format!("x{a}")));
        header.push("label".into());
        out.write_record(&header).map_err(|e| DiagnosticsError::Io(e.to_string()))?;
        for r in &self.planarity_defects {
            let mut rec = vec![r.t.to_string(), r.defect.to_string()];
            rec.extend(r.point.iter().map(|v| v.to_string()));
            rec.push(r.label.clone().unwrap_or_default());
            out.write_record(&rec).map_err(|e| DiagnosticsError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| DiagnosticsError::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_csv() {
        let mut r = DiagnosticsReport::default();
        r.push_sigma(2, SigmaSample { t: 10.0, value: 0.5, argmax: vec![1.0, 2.0] });
        r.measure("reach", 3.0);
        let back = DiagnosticsReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let mut buf = Vec::new();
        r.write_sigma_csv(2, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value,x0,x1\n10,0.5,1,2\n");
    }
}

//! Output shapes: per-document agency, ledger and bias reports, and the
//! corpus summary tables.

use gaze_core::agency::AgencyResult;
use gaze_core::ledger::{ExclusionReason, GenderLedger, Method};
use gaze_core::model::Gender;
use gaze_core::stats::{CorpusSummary, FrequencyRow, MetricSummary};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderAgency {
    pub agents: usize,
    pub arguments: usize,
    pub agentivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgencyReport {
    pub doc_id: String,
    pub female: GenderAgency,
    pub male: GenderAgency,
    pub agency_bias: Option<f64>,
}

impl AgencyReport {
    pub fn new(doc_id: &str, r: &AgencyResult) -> Self {
        AgencyReport {
            doc_id: doc_id.into(),
            female: GenderAgency {
                agents: r.female_agents,
                arguments: r.female_arguments,
                agentivity: r.female_agentivity,
            },
            male: GenderAgency {
                agents: r.male_agents,
                arguments: r.male_arguments,
                agentivity: r.male_agentivity,
            },
            agency_bias: r.bias(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntity {
    pub surface: String,
    pub gender: Gender,
    pub method: Method,
    pub mentions: usize,
    pub surname: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerExclusion {
    pub surface: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub doc_id: String,
    pub entities: Vec<LedgerEntity>,
    pub excluded: Vec<LedgerExclusion>,
}

impl From<&GenderLedger> for LedgerReport {
    fn from(l: &GenderLedger) -> Self {
        LedgerReport {
            doc_id: l.doc_id.clone(),
            entities: l
                .entities
                .iter()
                .map(|e| LedgerEntity {
                    surface: e.surface.clone(),
                    gender: e.gender,
                    method: e.method,
                    mentions: e.mention_spans.len(),
                    surname: e.is_surname,
                })
                .collect(),
            excluded: l
                .excluded
                .iter()
                .map(|x| LedgerExclusion {
                    surface: x.surface.clone(),
                    reason: x.reason,
                })
                .collect(),
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `group,metric,n,mean,t,p,flagged`, one row per group and metric.
pub fn summary_csv(summary: &CorpusSummary) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "metric", "n", "mean", "t", "p", "flagged"])?;
    for g in &summary.groups {
        for (metric, m) in [("agency", &g.agency), ("appearance", &g.appearance)] {
            let MetricSummary {
                n,
                mean,
                t,
                p,
                flagged,
            } = *m;
            w.write_record([
                g.group.name().to_string(),
                metric.to_string(),
                n.to_string(),
                opt(mean),
                opt(t),
                opt(p),
                flagged.to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv"))
}

/// `doc_id,gender,mentions,agentivity,appearance_bias`.
pub fn frequency_csv(rows: &[FrequencyRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["doc_id", "gender", "mentions", "agentivity", "appearance_bias"])?;
    for r in rows {
        w.write_record([
            r.doc_id.clone(),
            r.gender.code().to_string(),
            r.mentions.to_string(),
            opt(r.agentivity),
            r.appearance_bias.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaze_core::agency::agency_from_counts;

    #[test]
    fn agency_report_shape() {
        let r = AgencyReport::new("alice_bob", &agency_from_counts(2, 2, 1, 3));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["female"]["agents"], 2);
        assert_eq!(v["male"]["arguments"], 3);
        assert!((v["agency_bias"].as_f64().unwrap() + 2.0 / 3.0).abs() < 1e-12);

        let r = AgencyReport::new("none", &agency_from_counts(0, 0, 1, 3));
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["agency_bias"].is_null());
        assert!(v["female"]["agentivity"].is_null());
    }

    #[test]
    fn empty_frequency_table_has_header_only() {
        assert_eq!(
            frequency_csv(&[]).unwrap(),
            "doc_id,gender,mentions,agentivity,appearance_bias\n"
        );
    }
}

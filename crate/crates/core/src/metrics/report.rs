//! Per-class metric reports with CSV and JSON renderings.

use crate::instruments::InstrumentModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    pub class_id: usize,
    pub name: String,
    pub count: usize,
    pub value: f64,
}

/// Per-class values plus their count-weighted aggregate, with the
/// configuration echoed for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub per_class: Vec<ClassStat>,
    pub aggregate: f64,
    pub total_count: usize,
    pub threshold_fraction: Option<f64>,
    pub model_set_hash: u64,
}

impl MetricReport {
    pub fn from_sums(
        metric: &str,
        sums: &[f64],
        counts: &[usize],
        threshold_fraction: Option<f64>,
        models: &[InstrumentModel<f64>],
    ) -> Self {
        let per_class: Vec<ClassStat> = models
            .iter()
            .map(|m| ClassStat {
                class_id: m.class_id,
                name: m.name.clone(),
                count: counts[m.class_id],
                value: if counts[m.class_id] == 0 {
                    0.0
                } else {
                    sums[m.class_id] / counts[m.class_id] as f64
                },
            })
            .collect();
        Self::assemble(metric, per_class, threshold_fraction, models)
    }

    pub fn from_ratios(
        metric: &str,
        hits: &[usize],
        counts: &[usize],
        threshold_fraction: Option<f64>,
        models: &[InstrumentModel<f64>],
    ) -> Self {
        let per_class: Vec<ClassStat> = models
            .iter()
            .map(|m| ClassStat {
                class_id: m.class_id,
                name: m.name.clone(),
                count: counts[m.class_id],
                value: if counts[m.class_id] == 0 {
                    0.0
                } else {
                    hits[m.class_id] as f64 / counts[m.class_id] as f64
                },
            })
            .collect();
        Self::assemble(metric, per_class, threshold_fraction, models)
    }

    fn assemble(
        metric: &str,
        per_class: Vec<ClassStat>,
        threshold_fraction: Option<f64>,
        models: &[InstrumentModel<f64>],
    ) -> Self {
        let total_count: usize = per_class.iter().map(|c| c.count).sum();
        let aggregate = if total_count == 0 {
            0.0
        } else {
            per_class
                .iter()
                .map(|c| c.value * c.count as f64)
                .sum::<f64>()
                / total_count as f64
        };
        Self {
            metric: metric.to_string(),
            per_class,
            aggregate,
            total_count,
            threshold_fraction,
            model_set_hash: model_set_hash(models),
        }
    }

    /// CSV with a `class,name,count,value` row per class plus an aggregate
    /// row.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# metric={}\nclass,name,count,value\n", self.metric);
        for c in &self.per_class {
            s.push_str(&format!(
                "{},{},{},{:?}\n",
                c.class_id, c.name, c.count, c.value
            ));
        }
        s.push_str(&format!(
            "aggregate,,{},{:?}\n",
            self.total_count, self.aggregate
        ));
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// FNV-1a over the model set's defining geometry; echoed in reports so runs
/// against different sets are never compared by accident.
pub fn model_set_hash(models: &[InstrumentModel<f64>]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(&(models.len() as u64).to_le_bytes());
    for m in models {
        eat(m.name.as_bytes());
        eat(&m.diameter.to_le_bytes());
        for kp in &m.keypoints {
            for v in kp.position {
                eat(&v.to_le_bytes());
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::make_instrument_set;

    #[test]
    fn aggregate_is_the_count_weighted_mean() {
        let models = make_instrument_set(7, 2);
        let report =
            MetricReport::from_sums("mpvpe_mm", &[2.0 * 3.0, 4.0 * 3.0], &[3, 3], None, &models);
        assert_eq!(report.per_class[0].value, 2.0);
        assert_eq!(report.per_class[1].value, 4.0);
        assert!((report.aggregate - 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trips() {
        let models = make_instrument_set(7, 2);
        let report = MetricReport::from_ratios("add_s_accuracy", &[1, 2], &[2, 4], Some(0.1), &models);
        let back: MetricReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn hash_tracks_the_model_set() {
        let a = make_instrument_set(7, 3);
        let b = make_instrument_set(8, 3);
        assert_ne!(model_set_hash(&a), model_set_hash(&b));
        assert_eq!(model_set_hash(&a), model_set_hash(&make_instrument_set(7, 3)));
    }
}

//! Metric symbols, tagged values and the per-pair report.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Whether larger or smaller values mean a better segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+")]
    HigherIsBetter,
    #[serde(rename = "-")]
    LowerIsBetter,
}

impl Direction {
    pub fn sign(self) -> &'static str {
        match self {
            Direction::HigherIsBetter => "+",
            Direction::LowerIsBetter => "-",
        }
    }
}

macro_rules! metrics {
    ($($variant:ident => $sym:literal, $dir:ident, $name:literal;)*) => {
        /// The twenty metrics, declared in reporting order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Metric {
            $($variant,)*
        }

        impl Metric {
            pub const ALL: [Metric; 20] = [$(Metric::$variant,)*];

            pub fn symbol(self) -> &'static str {
                match self {
                    $(Metric::$variant => $sym,)*
                }
            }

            pub fn name(self) -> &'static str {
                match self {
                    $(Metric::$variant => $name,)*
                }
            }

            pub fn direction(self) -> Direction {
                match self {
                    $(Metric::$variant => Direction::$dir,)*
                }
            }
        }
    };
}

metrics! {
    Dice => "DICE", HigherIsBetter, "Dice coefficient";
    Jac => "JAC", HigherIsBetter, "Jaccard coefficient";
    Msi => "MSI", HigherIsBetter, "Medical similarity index";
    Tpr => "TPR", HigherIsBetter, "Sensitivity (true positive rate)";
    Tnr => "TNR", HigherIsBetter, "Specificity (true negative rate)";
    Fpr => "FPR", LowerIsBetter, "Fallout (false positive rate)";
    Ppv => "PPV", HigherIsBetter, "Precision (positive predictive value)";
    Acc => "ACC", HigherIsBetter, "Accuracy";
    Auc => "AUC", HigherIsBetter, "Area under ROC curve (one operating point)";
    Vs => "VS", HigherIsBetter, "Volumetric similarity";
    Kap => "KAP", HigherIsBetter, "Cohen kappa";
    Ari => "ARI", HigherIsBetter, "Adjusted Rand index";
    Mi => "MI", HigherIsBetter, "Mutual information";
    Voi => "VOI", LowerIsBetter, "Variation of information";
    Gce => "GCE", LowerIsBetter, "Global consistency error";
    Icc => "ICC", HigherIsBetter, "Intraclass correlation";
    Pbd => "PBD", LowerIsBetter, "Probabilistic distance";
    Mhd => "MHD", LowerIsBetter, "Mahalanobis distance";
    Hd => "HD", LowerIsBetter, "Hausdorff distance";
    Avd => "AVD", LowerIsBetter, "Average Hausdorff distance";
}

impl Metric {
    pub fn index(self) -> usize {
        self as usize
    }

    /// Metrics computed from the confusion counts alone.
    pub fn is_count_based(self) -> bool {
        !matches!(self, Metric::Msi | Metric::Mhd | Metric::Hd | Metric::Avd)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown metric symbol `{0}`")]
pub struct UnknownMetric(pub String);

impl FromStr for Metric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.symbol().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A metric value, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricValue {
    Value(f64),
    Undefined(String),
}

impl MetricValue {
    pub fn undefined(reason: impl Into<String>) -> Self {
        MetricValue::Undefined(reason.into())
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(*v),
            MetricValue::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, MetricValue::Value(_))
    }
}

impl From<f64> for MetricValue {
    fn from(v: f64) -> Self {
        MetricValue::Value(v)
    }
}

/// Values for some or all of the twenty metrics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    values: [Option<MetricValue>; 20],
}

impl MetricReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, metric: Metric, value: impl Into<MetricValue>) {
        self.values[metric.index()] = Some(value.into());
    }

    pub fn get(&self, metric: Metric) -> Option<&MetricValue> {
        self.values[metric.index()].as_ref()
    }

    /// The numeric value, `None` when missing or undefined.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        self.get(metric).and_then(MetricValue::value)
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn merge(&mut self, other: MetricReport) {
        for (slot, v) in self.values.iter_mut().zip(other.values) {
            if v.is_some() {
                *slot = v;
            }
        }
    }

    /// Present entries in reporting order.
    pub fn iter(&self) -> impl Iterator<Item = (Metric, &MetricValue)> {
        Metric::ALL
            .into_iter()
            .zip(&self.values)
            .filter_map(|(m, v)| v.as_ref().map(|v| (m, v)))
    }

    pub fn csv_header() -> String {
        Metric::ALL.map(Metric::symbol).join(",")
    }

    /// One CSV row in reporting order; undefined or missing values are
    /// empty cells.
    pub fn csv_row(&self) -> String {
        Metric::ALL
            .map(|m| self.value(m).map(|v| v.to_string()).unwrap_or_default())
            .join(",")
    }
}

impl Serialize for MetricReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        for (m, v) in self.iter() {
            map.serialize_entry(m.symbol(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MetricReport {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = std::collections::BTreeMap::<String, MetricValue>::deserialize(d)?;
        let mut report = MetricReport::new();
        for (k, v) in raw {
            let m: Metric = k.parse().map_err(D::Error::custom)?;
            report.set(m, v);
        }
        Ok(report)
    }
}

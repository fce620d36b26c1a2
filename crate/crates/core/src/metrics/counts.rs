//! Metrics computed from the four confusion counts.
//!
//! With `n = tp + fp + fn + tn`:
//!
//! * `AUC = 1 - (FPR + FNR) / 2`, the single operating point form.
//! * `VS = 1 - |fn - fp| / (2 tp + fp + fn)`.
//! * `KAP = (Po - Pe) / (1 - Pe)`, `Po = ACC`,
//!   `Pe = ((tp + fn)(tp + fp) + (tn + fn)(tn + fp)) / n^2`.
//! * `ARI` from the pair counts `a, b, c, d` of the two labelings:
//!   `2 (a d - b c) / (c^2 + b^2 + 2 a d + (a + d)(c + b))`.
//! * `MI = H(T) + H(P) - H(T, P)` and `VOI = 2 H(T, P) - H(T) - H(P)`, in bits.
//! * `GCE = min(E1, E2) / n` with
//!   `E1 = fn (fn + 2 tp) / (tp + fn) + fp (fp + 2 tn) / (tn + fp)` and
//!   `E2 = fp (fp + 2 tp) / (tp + fp) + fn (fn + 2 tn) / (tn + fn)`.
//! * `ICC` is the one-way intraclass correlation of the two label columns
//!   taken about zero rather than about the grand mean:
//!   `MSb = 2 / (n - 1) * sum m^2` with `m` the per-pixel mean label, so
//!   `sum m^2 = tp + (fn + fp) / 4`; `MSw = (fn + fp) / (2 n)`;
//!   `ICC = (MSb - MSw) / (MSb + MSw)`.
//! * `PBD = (fp + fn) / (2 tp)`, and `-1` when the masks do not overlap.
//!
//! Worked 4x4 example (truth = left half, prediction = top half, so
//! `tp = fp = fn = tn = 4`): DICE 0.5, JAC 1/3, TPR = TNR = PPV = ACC =
//! AUC = 0.5, FPR 0.5, VS 1, KAP 0, ARI -1/14 (a = 24, b = c = d = 32),
//! MI 0, VOI 2, GCE 0.75, ICC (2/15*6 - 1/4)/(2/15*6 + 1/4) = 0.5238...,
//! PBD 1.

use serde::{Deserialize, Serialize};

use super::{Metric, MetricReport, MetricValue, MetricsError};
use crate::mask_io::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(truth: &BinaryMask, pred: &BinaryMask) -> Result<ConfusionCounts, MetricsError> {
    truth.check_same_frame(pred)?;
    let mut c = ConfusionCounts::default();
    for (&t, &p) in truth.data().iter().zip(pred.data()) {
        match (t, p) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: f64, den: f64, reason: &str) -> MetricValue {
    if den == 0.0 {
        MetricValue::undefined(reason)
    } else {
        MetricValue::Value(num / den)
    }
}

/// `-sum p log2 p` over the given counts, skipping empty cells.
fn entropy(counts: &[f64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.log2()
        })
        .sum()
}

fn pairs(k: f64) -> f64 {
    k * (k - 1.0) / 2.0
}

pub fn count_metrics(c: &ConfusionCounts) -> Result<MetricReport, MetricsError> {
    if c.total() == 0 {
        return Err(MetricsError::NoPixels);
    }
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let n = tp + fp + fn_ + tn;
    let mut r = MetricReport::new();

    const BOTH_EMPTY: &str = "truth and prediction are both empty";
    const TRUTH_EMPTY: &str = "truth is empty";
    const NO_BACKGROUND: &str = "truth has no background";
    const PRED_EMPTY: &str = "prediction is empty";

    r.set(
        Metric::Dice,
        ratio(2.0 * tp, 2.0 * tp + fp + fn_, BOTH_EMPTY),
    );
    r.set(Metric::Jac, ratio(tp, tp + fp + fn_, BOTH_EMPTY));
    let tpr = ratio(tp, tp + fn_, TRUTH_EMPTY);
    let tnr = ratio(tn, tn + fp, NO_BACKGROUND);
    let fpr = ratio(fp, tn + fp, NO_BACKGROUND);
    r.set(Metric::Ppv, ratio(tp, tp + fp, PRED_EMPTY));
    r.set(Metric::Acc, (tp + tn) / n);
    r.set(
        Metric::Auc,
        match (tpr.value(), fpr.value()) {
            (Some(t), Some(f)) => MetricValue::Value(1.0 - (f + (1.0 - t)) / 2.0),
            (None, _) => MetricValue::undefined(TRUTH_EMPTY),
            (_, None) => MetricValue::undefined(NO_BACKGROUND),
        },
    );
    r.set(Metric::Tpr, tpr);
    r.set(Metric::Tnr, tnr);
    r.set(Metric::Fpr, fpr);
    r.set(
        Metric::Vs,
        match ratio((fn_ - fp).abs(), 2.0 * tp + fp + fn_, BOTH_EMPTY) {
            MetricValue::Value(v) => MetricValue::Value(1.0 - v),
            u => u,
        },
    );

    let po = (tp + tn) / n;
    let pe = ((tp + fn_) * (tp + fp) + (tn + fn_) * (tn + fp)) / (n * n);
    r.set(
        Metric::Kap,
        ratio(
            po - pe,
            1.0 - pe,
            "chance agreement is 1 (single-class frame)",
        ),
    );

    let sum_sq = tp * tp + fp * fp + fn_ * fn_ + tn * tn;
    let a = pairs(tp) + pairs(fp) + pairs(fn_) + pairs(tn);
    let b = ((tp + fn_).powi(2) + (tn + fp).powi(2) - sum_sq) / 2.0;
    let cc = ((tp + fp).powi(2) + (tn + fn_).powi(2) - sum_sq) / 2.0;
    let d = pairs(n) - (a + b + cc);
    r.set(
        Metric::Ari,
        ratio(
            2.0 * (a * d - b * cc),
            cc * cc + b * b + 2.0 * a * d + (a + d) * (cc + b),
            "both labelings are constant",
        ),
    );

    let h_truth = entropy(&[tp + fn_, tn + fp], n);
    let h_pred = entropy(&[tp + fp, tn + fn_], n);
    let h_joint = entropy(&[tp, fp, fn_, tn], n);
    r.set(Metric::Mi, h_truth + h_pred - h_joint);
    r.set(Metric::Voi, 2.0 * h_joint - h_truth - h_pred);

    let term = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    let e1 = term(fn_ * (fn_ + 2.0 * tp), tp + fn_) + term(fp * (fp + 2.0 * tn), tn + fp);
    let e2 = term(fp * (fp + 2.0 * tp), tp + fp) + term(fn_ * (fn_ + 2.0 * tn), tn + fn_);
    r.set(Metric::Gce, e1.min(e2) / n);

    r.set(Metric::Icc, icc(tp, fp, fn_, n));

    r.set(
        Metric::Pbd,
        if tp == 0.0 {
            MetricValue::Value(-1.0)
        } else {
            MetricValue::Value((fp + fn_) / (2.0 * tp))
        },
    );
    Ok(r)
}

fn icc(tp: f64, fp: f64, fn_: f64, n: f64) -> MetricValue {
    if n < 2.0 {
        return MetricValue::undefined("needs at least two pixels");
    }
    let ms_between = 2.0 / (n - 1.0) * (tp + (fn_ + fp) / 4.0);
    let ms_within = (fn_ + fp) / (2.0 * n);
    ratio(
        ms_between - ms_within,
        ms_between + ms_within,
        "truth and prediction are both empty",
    )
}

//! Per-(method, step) summaries of experiment records.

use super::experiment::StepRecord;
use crate::data::Extended;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub t: usize,
    pub count: usize,
    pub coverage_mean: f64,
    pub coverage_se: f64,
    pub width_median: Extended,
    pub width_q25: Extended,
    pub width_q75: Extended,
    pub width_inf_fraction: f64,
    pub metric_mean: f64,
    pub metric_se: f64,
    pub bound_relative_mean: Option<f64>,
    pub bound_fallback_fraction: f64,
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Linear-interpolation quantile of ascending `sorted`; an infinite neighbor
/// makes the result infinite unless it carries zero interpolation weight.
pub fn interpolated_quantile(sorted: &[Extended], p: f64) -> Extended {
    if sorted.is_empty() {
        return Extended::Finite(f64::NAN);
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 >= sorted.len() {
        return sorted[lo];
    }
    match (sorted[lo], sorted[lo + 1]) {
        (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + frac * (b - a)),
        (Extended::Finite(_), other) => other,
        (other, _) => other,
    }
}

/// Rows ordered by first appearance of each method, then by step.
pub fn aggregate(records: &[StepRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    let mut method_order: Vec<&str> = Vec::new();
    for r in records {
        if !method_order.contains(&r.method.as_str()) {
            method_order.push(&r.method);
        }
        if !keys.iter().any(|(m, t)| *m == r.method && *t == r.t) {
            keys.push((r.method.clone(), r.t));
        }
    }
    keys.sort_by_key(|(m, t)| {
        (
            method_order.iter().position(|x| *x == m.as_str()).unwrap_or(usize::MAX),
            *t,
        )
    });
    keys.into_iter()
        .map(|(method, t)| {
            let group: Vec<&StepRecord> = records
                .iter()
                .filter(|r| r.method == method && r.t == t)
                .collect();
            summarize(method, t, &group)
        })
        .collect()
}

fn summarize(method: String, t: usize, group: &[&StepRecord]) -> SummaryRow {
    let n = group.len();
    let covered: Vec<f64> = group.iter().map(|r| f64::from(u8::from(r.covered))).collect();
    let (coverage_mean, coverage_se) = mean_se(&covered);
    let mut widths: Vec<Extended> = group.iter().map(|r| r.width).collect();
    widths.sort_by(|a, b| a.partial_cmp(b).expect("widths are never NaN"));
    let metrics: Vec<f64> = group.iter().map(|r| r.metric).collect();
    let (metric_mean, metric_se) = mean_se(&metrics);
    let bounds: Vec<f64> = group.iter().filter_map(|r| r.bound_relative).collect();
    SummaryRow {
        method,
        t,
        count: n,
        coverage_mean,
        coverage_se,
        width_median: interpolated_quantile(&widths, 0.5),
        width_q25: interpolated_quantile(&widths, 0.25),
        width_q75: interpolated_quantile(&widths, 0.75),
        width_inf_fraction: widths.iter().filter(|w| !w.is_finite()).count() as f64 / n as f64,
        metric_mean,
        metric_se,
        bound_relative_mean: (!bounds.is_empty())
            .then(|| bounds.iter().sum::<f64>() / bounds.len() as f64),
        bound_fallback_fraction: group.iter().filter(|r| r.bound_fallback).count() as f64
            / n as f64,
    }
}

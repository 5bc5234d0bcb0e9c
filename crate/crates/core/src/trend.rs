//! Growth summaries along families of measures.
//!
//! A single finite atomic measure always has finite box ratio and finite
//! inequality constant, so Carleson-ness is read off a family `μ_1, μ_2, ...`
//! from how the constants grow with the family index. Bounded families often
//! creep up towards their limit early on, so the growth rate is read off the
//! second half of the family.

use serde::{Deserialize, Serialize};

/// Log2-slope (per family step) at or above which a family is called divergent.
pub const DIVERGENCE_SLOPE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendClass {
    Bounded,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub values: Vec<f64>,
    /// Least-squares slope of `log2(value)` against the member index, over
    /// the tail of the family (see [`tail_slope`]).
    pub log2_slope: f64,
    pub class: TrendClass,
}

pub fn log2_slope(values: &[f64]) -> f64 {
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (k as f64, v.log2()))
        .collect();
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// [`log2_slope`] over the last `⌈n/2⌉` values (at least two).
pub fn tail_slope(values: &[f64]) -> f64 {
    let keep = values.len().div_ceil(2).max(2).min(values.len());
    log2_slope(&values[values.len() - keep..])
}

pub fn classify(values: &[f64]) -> TrendClass {
    if tail_slope(values) >= DIVERGENCE_SLOPE {
        TrendClass::Divergent
    } else {
        TrendClass::Bounded
    }
}

pub fn trend_of(values: Vec<f64>) -> TrendReport {
    let log2_slope = tail_slope(&values);
    let class = classify(&values);
    TrendReport { values, log2_slope, class }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes() {
        let geometric: Vec<f64> = (0..8).map(|k| 2f64.powf(0.3 * k as f64)).collect();
        assert!((log2_slope(&geometric) - 0.3).abs() < 1e-12);
        assert_eq!(classify(&geometric), TrendClass::Divergent);
        assert_eq!(log2_slope(&[3.0; 6]), 0.0);
        assert_eq!(classify(&[3.0; 6]), TrendClass::Bounded);
        assert_eq!(log2_slope(&[1.0]), 0.0);
        assert_eq!(classify(&[0.0, 0.0, 0.0]), TrendClass::Bounded);
        // early growth that levels off is bounded
        let creeping = [0.5, 1.0, 1.4, 1.7, 2.0, 2.2, 2.4, 2.5];
        assert!(log2_slope(&creeping) > DIVERGENCE_SLOPE);
        assert_eq!(classify(&creeping), TrendClass::Bounded);
    }
}

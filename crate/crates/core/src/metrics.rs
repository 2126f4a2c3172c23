//! Reliability diagrams and scalar scores for parity and quantile forecasts.

use serde::{Deserialize, Serialize};

use crate::distributions::{ForecastDistribution, ParityRecord, ProbabilitySource};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 30;
pub const DEFAULT_LEVELS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramKind {
    /// Fixed-width bins of predicted probabilities.
    Parity,
    /// One entry per quantile level; every entry counts all `T` forecasts.
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lo: f64,
    pub hi: f64,
    /// Average prediction, `None` for an empty bin.
    pub pred_avg: Option<f64>,
    /// Average outcome, `None` for an empty bin.
    pub obs_avg: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityDiagram {
    pub kind: DiagramKind,
    pub bins: Vec<ReliabilityBin>,
    pub total: usize,
}

/// Bin `m` covers `[m/n, (m+1)/n)`; the last bin is closed.
pub fn bin_index(p: f64, n_bins: usize) -> usize {
    let n = n_bins as f64;
    let mut m = ((p * n).floor().max(0.0) as usize).min(n_bins - 1);
    // settle rounding at the edges against the edges themselves
    if m + 1 < n_bins && p >= (m + 1) as f64 / n {
        m += 1;
    } else if m > 0 && p < m as f64 / n {
        m -= 1;
    }
    m
}

/// Reliability diagram of `(prediction, outcome)` pairs in `n_bins` fixed-width bins.
pub fn binned_reliability(pairs: &[(f64, bool)], n_bins: usize) -> Result<ReliabilityDiagram> {
    if pairs.is_empty() {
        return Err(Error::validation("reliability diagram needs at least one prediction"));
    }
    if n_bins == 0 {
        return Err(Error::validation("need at least one bin"));
    }
    let mut sums = vec![(0.0_f64, 0usize, 0usize); n_bins];
    for &(p, y) in pairs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(p));
        }
        let s = &mut sums[bin_index(p, n_bins)];
        s.0 += p;
        s.1 += usize::from(y);
        s.2 += 1;
    }
    let bins = sums
        .into_iter()
        .enumerate()
        .map(|(m, (pred, hits, count))| {
            let (pred_avg, obs_avg) = if count == 0 {
                (None, None)
            } else {
                (Some(pred / count as f64), Some(hits as f64 / count as f64))
            };
            ReliabilityBin {
                lo: m as f64 / n_bins as f64,
                hi: (m + 1) as f64 / n_bins as f64,
                pred_avg,
                obs_avg,
                count,
            }
        })
        .collect();
    Ok(ReliabilityDiagram {
        kind: DiagramKind::Parity,
        bins,
        total: pairs.len(),
    })
}

pub fn parity_reliability(
    records: &[ParityRecord],
    n_bins: usize,
    source: ProbabilitySource,
) -> Result<ReliabilityDiagram> {
    binned_reliability(&pairs(records, source), n_bins)
}

fn pairs(records: &[ParityRecord], source: ProbabilitySource) -> Vec<(f64, bool)> {
    records
        .iter()
        .map(|r| (r.probability(source), r.outcome))
        .collect()
}

fn weighted_sum(diagram: &ReliabilityDiagram, f: impl Fn(f64, f64) -> f64) -> f64 {
    let total = diagram.total as f64;
    diagram
        .bins
        .iter()
        .filter_map(|b| match (b.pred_avg, b.obs_avg) {
            (Some(pred), Some(obs)) if b.count > 0 => Some(b.count as f64 / total * f(pred, obs)),
            _ => None,
        })
        .sum()
}

/// Count-weighted mean absolute gap between average outcome and average prediction.
pub fn pce(diagram: &ReliabilityDiagram) -> f64 {
    weighted_sum(diagram, |pred, obs| (obs - pred).abs())
}

/// Count-weighted mean of squared per-bin outcome frequencies.
pub fn sharpness(diagram: &ReliabilityDiagram) -> f64 {
    weighted_sum(diagram, |_, obs| obs * obs)
}

/// `n` equi-spaced levels on `[0, 1]`, endpoints included.
pub fn quantile_levels(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Empirical coverage `p_obs = mean_t 1{y_t <= F̂_t⁻¹(p)}` at each level.
pub fn quantile_reliability(
    forecasts: &[ForecastDistribution],
    outcomes: &[f64],
    n_levels: usize,
) -> Result<ReliabilityDiagram> {
    if forecasts.len() != outcomes.len() {
        return Err(Error::validation(format!(
            "{} forecasts but {} outcomes",
            forecasts.len(),
            outcomes.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::validation("quantile reliability needs at least one forecast"));
    }
    if n_levels == 0 {
        return Err(Error::validation("need at least one quantile level"));
    }
    let levels = quantile_levels(n_levels);
    let mut covered = vec![0usize; n_levels];
    let mut cached: Option<(&ForecastDistribution, Vec<f64>)> = None;
    for (f, &y) in forecasts.iter().zip(outcomes) {
        // runs of identical forecasts share their quantiles
        let reuse = matches!(&cached, Some((prev, _)) if *prev == f);
        if !reuse {
            let q = levels
                .iter()
                .map(|&p| f.quantile(p))
                .collect::<Result<Vec<_>>>()?;
            cached = Some((f, q));
        }
        let (_, q) = cached.as_ref().expect("filled above");
        for (c, &qv) in covered.iter_mut().zip(q) {
            *c += usize::from(y <= qv);
        }
    }
    let t = forecasts.len();
    let bins = levels
        .iter()
        .zip(covered)
        .map(|(&p, c)| ReliabilityBin {
            lo: p,
            hi: p,
            pred_avg: Some(p),
            obs_avg: Some(c as f64 / t as f64),
            count: t,
        })
        .collect();
    Ok(ReliabilityDiagram {
        kind: DiagramKind::Quantile,
        bins,
        total: t,
    })
}

/// Mean absolute gap between nominal and observed coverage over the levels.
pub fn qce(diagram: &ReliabilityDiagram) -> f64 {
    let gaps: Vec<f64> = diagram
        .bins
        .iter()
        .filter_map(|b| Some((b.obs_avg? - b.pred_avg?).abs()))
        .collect();
    if gaps.is_empty() {
        0.0
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    }
}

/// Fraction of records where `p >= 0.5` agrees with the outcome.
pub fn accuracy(records: &[ParityRecord], source: ProbabilitySource) -> Result<f64> {
    binary_accuracy(&pairs(records, source))
}

pub fn binary_accuracy(pairs: &[(f64, bool)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::validation("accuracy of an empty record set"));
    }
    let hits = pairs.iter().filter(|&&(p, y)| (p >= 0.5) == y).count();
    Ok(hits as f64 / pairs.len() as f64)
}

pub fn auroc(records: &[ParityRecord], source: ProbabilitySource) -> Result<f64> {
    roc_auc(&pairs(records, source))
}

/// Area under the ROC curve via the rank-sum statistic with midranks for ties.
pub fn roc_auc(pairs: &[(f64, bool)]) -> Result<f64> {
    let n_pos = pairs.iter().filter(|(_, y)| *y).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined(
            "AUROC needs at least one positive and one negative outcome".into(),
        ));
    }
    if let Some(&(p, _)) = pairs.iter().find(|(p, _)| p.is_nan()) {
        return Err(Error::Domain(p));
    }
    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        // ranks i+1..=j share their mean
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = sorted[i..j].iter().filter(|(_, y)| *y).count();
        pos_rank_sum += midrank * pos_in_group as f64;
        i = j;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Ok((pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// The scalar summary written by `evaluate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub qce: Option<f64>,
    pub pce: f64,
    pub sharp: f64,
    pub acc: f64,
    /// `None` when only one outcome class is present.
    pub auroc: Option<f64>,
}

impl MetricsReport {
    pub fn from_records(
        records: &[ParityRecord],
        source: ProbabilitySource,
        n_bins: usize,
    ) -> Result<(Self, ReliabilityDiagram)> {
        let diagram = parity_reliability(records, n_bins, source)?;
        let auroc = match auroc(records, source) {
            Ok(v) => Some(v),
            Err(Error::Undefined(_)) => None,
            Err(e) => return Err(e),
        };
        let report = Self {
            qce: None,
            pce: pce(&diagram),
            sharp: sharpness(&diagram),
            acc: accuracy(records, source)?,
            auroc,
        };
        Ok((report, diagram))
    }

    pub fn with_qce(mut self, qce: f64) -> Self {
        self.qce = Some(qce);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: f64, y: bool) -> ParityRecord {
        ParityRecord {
            t: 2,
            p_raw: p,
            p_cal: p,
            outcome: y,
        }
    }

    #[test]
    fn bin_edges_go_right_and_last_bin_is_closed() {
        assert_eq!(bin_index(0.0, 30), 0);
        assert_eq!(bin_index(1.0, 30), 29);
        for m in 1..30 {
            let edge = m as f64 / 30.0;
            assert_eq!(bin_index(edge, 30), m, "edge {m}");
            assert_eq!(bin_index(edge - 1e-12, 30), m - 1);
        }
        assert_eq!(bin_index(29.0 / 30.0, 30), 29);
    }

    #[test]
    fn degenerate_single_bin() {
        let recs = vec![rec(0.999, true); 10];
        let d = parity_reliability(&recs, 30, ProbabilitySource::Raw).unwrap();
        let nonempty: Vec<_> = d.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(nonempty.len(), 1);
        assert_eq!(nonempty[0].obs_avg, Some(1.0));
        assert!((nonempty[0].pred_avg.unwrap() - 0.999).abs() < 1e-15);
        assert_eq!(d.bins.last().unwrap().count, 10);
        assert!((pce(&d) - 0.001).abs() < 1e-12);
    }

    #[test]
    fn single_bin_arithmetic() {
        let d = ReliabilityDiagram {
            kind: DiagramKind::Parity,
            bins: vec![ReliabilityBin {
                lo: 0.0,
                hi: 1.0,
                pred_avg: Some(0.7),
                obs_avg: Some(0.4),
                count: 5,
            }],
            total: 5,
        };
        assert!((pce(&d) - 0.3).abs() < 1e-15);
        assert!((sharpness(&d) - 0.16).abs() < 1e-15);
    }

    #[test]
    fn sharpness_of_two_pure_bins() {
        let recs = [rec(0.0, false), rec(1.0, true)];
        let d = parity_reliability(&recs, 30, ProbabilitySource::Raw).unwrap();
        assert_eq!(sharpness(&d), 0.5);
        assert_eq!(pce(&d), 0.0);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(parity_reliability(&[], 30, ProbabilitySource::Raw).is_err());
        assert!(accuracy(&[], ProbabilitySource::Raw).is_err());
        assert!(binned_reliability(&[(0.3, true)], 0).is_err());
    }

    #[test]
    fn accuracy_threshold_includes_half() {
        let recs = vec![rec(0.5, false); 4];
        assert_eq!(accuracy(&recs, ProbabilitySource::Raw).unwrap(), 0.0);
        let recs = [rec(1.0, true), rec(0.0, false)];
        assert_eq!(accuracy(&recs, ProbabilitySource::Raw).unwrap(), 1.0);
    }

    #[test]
    fn auroc_basic_cases() {
        let sep = [rec(0.1, false), rec(0.2, false), rec(0.8, true), rec(0.9, true)];
        assert_eq!(auroc(&sep, ProbabilitySource::Raw).unwrap(), 1.0);
        let ties = [rec(0.4, false), rec(0.4, true), rec(0.4, true)];
        assert_eq!(auroc(&ties, ProbabilitySource::Raw).unwrap(), 0.5);
        let one_class = [rec(0.4, true), rec(0.6, true)];
        assert!(matches!(
            auroc(&one_class, ProbabilitySource::Raw),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn levels_match_linspace() {
        let l = quantile_levels(100);
        assert_eq!(l.len(), 100);
        assert_eq!(l[0], 0.0);
        assert_eq!(l[99], 1.0);
        assert!((l[1] - 1.0 / 99.0).abs() < 1e-16);
    }

    #[test]
    fn qce_of_constant_offset() {
        let bins = quantile_levels(11)
            .into_iter()
            .map(|p| ReliabilityBin {
                lo: p,
                hi: p,
                pred_avg: Some(p),
                obs_avg: Some(p + 0.1),
                count: 7,
            })
            .collect();
        let d = ReliabilityDiagram {
            kind: DiagramKind::Quantile,
            bins,
            total: 7,
        };
        assert!((qce(&d) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn report_tolerates_single_class() {
        let recs = vec![rec(0.7, true); 3];
        let (r, _) = MetricsReport::from_records(&recs, ProbabilitySource::Raw, 30).unwrap();
        assert_eq!(r.auroc, None);
        assert_eq!(r.acc, 1.0);
    }

    #[test]
    fn quantile_reliability_length_mismatch() {
        let g = ForecastDistribution::gaussian(0.0, 1.0).unwrap();
        assert!(quantile_reliability(&[g], &[0.1, 0.2], 100).is_err());
    }
}

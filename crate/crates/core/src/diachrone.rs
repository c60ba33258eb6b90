//! Chronological equal-volume periods, per-period embedding series and
//! monotonic shift detection.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::TextUnit;
use crate::embed::{self, EmbeddingModel, TrainConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Period<T> {
    pub start_ts: i64,
    pub end_ts: i64,
    pub words: usize,
    pub items: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPartition<T> {
    pub periods: Vec<Period<T>>,
}

impl<T> PeriodPartition<T> {
    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PeriodPartition<U> {
        PeriodPartition {
            periods: self
                .periods
                .into_iter()
                .map(|p| Period {
                    start_ts: p.start_ts,
                    end_ts: p.end_ts,
                    words: p.words,
                    items: p.items.into_iter().map(&mut f).collect(),
                })
                .collect(),
        }
    }

    /// CSV `period,start_ts,end_ts,words`, periods numbered from 1.
    pub fn write_manifest<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["period", "start_ts", "end_ts", "words"])?;
        for (i, p) in self.periods.iter().enumerate() {
            out.write_record([(i + 1).to_string(), p.start_ts.to_string(), p.end_ts.to_string(), p.words.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Sorts items by time and cuts them into `k` contiguous periods of roughly
/// equal word volume. Boundary `i` sits before or after the item that
/// crosses `i * total / k` words, whichever leaves the running total closer.
pub fn partition_by<T>(
    mut items: Vec<T>,
    k: usize,
    timestamp: impl Fn(&T) -> i64,
    words: impl Fn(&T) -> usize,
) -> Result<PeriodPartition<T>> {
    if k < 2 {
        return Err(Error::Validation("k must be at least 2".into()));
    }
    if items.len() < k {
        return Err(Error::InsufficientData(format!("{} units for {k} periods", items.len())));
    }
    items.sort_by_key(|x| timestamp(x));
    let n = items.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0usize);
    for x in &items {
        cum.push(cum.last().unwrap() + words(x));
    }
    let total = cum[n] as f64;

    let mut cuts = Vec::with_capacity(k + 1);
    cuts.push(0usize);
    for i in 1..k {
        let prev = *cuts.last().unwrap();
        let target = total * i as f64 / k as f64;
        let lo = prev + 1;
        let hi = n - (k - i);
        let after = (lo..=hi).find(|&j| cum[j] as f64 >= target).unwrap_or(hi);
        let before = after.saturating_sub(1).max(lo);
        let cut = if (target - cum[before] as f64).abs() < (cum[after] as f64 - target).abs() {
            before
        } else {
            after
        };
        cuts.push(cut);
    }
    cuts.push(n);

    let mut rest = items.into_iter();
    let periods = cuts
        .windows(2)
        .map(|w| {
            let chunk: Vec<T> = rest.by_ref().take(w[1] - w[0]).collect();
            Period {
                start_ts: timestamp(&chunk[0]),
                end_ts: timestamp(chunk.last().expect("non-empty period")),
                words: cum[w[1]] - cum[w[0]],
                items: chunk,
            }
        })
        .collect();
    Ok(PeriodPartition { periods })
}

pub fn partition_equal_words(units: Vec<TextUnit>, k: usize) -> Result<PeriodPartition<TextUnit>> {
    partition_by(units, k, |u| u.created_utc, TextUnit::word_count)
}

fn with_seed(config: &TrainConfig, i: usize) -> TrainConfig {
    TrainConfig {
        seed: config.seed.wrapping_add(i as u64),
        ..*config
    }
}

/// One independently initialized model per period.
pub fn train_sequential<D: AsRef<[String]>>(periods: &[Vec<D>], config: &TrainConfig) -> Result<Vec<EmbeddingModel>> {
    periods
        .iter()
        .enumerate()
        .map(|(i, docs)| {
            embed::train(docs, &with_seed(config, i), None).map_err(|e| Error::Period {
                index: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Each period's model starts from the previous period's weights.
pub fn train_incremental<D: AsRef<[String]>>(periods: &[Vec<D>], config: &TrainConfig) -> Result<Vec<EmbeddingModel>> {
    let mut models: Vec<EmbeddingModel> = Vec::with_capacity(periods.len());
    for (i, docs) in periods.iter().enumerate() {
        let m = embed::train(docs, &with_seed(config, i), models.last()).map_err(|e| Error::Period {
            index: i + 1,
            source: Box::new(e),
        })?;
        models.push(m);
    }
    Ok(models)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    Sequential,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    None,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
            Self::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiachronicSeries {
    pub source: String,
    pub target: String,
    /// Cosine per period; `None` where either token is out of vocabulary.
    pub values: Vec<Option<f64>>,
    pub mode: TrainingMode,
}

impl DiachronicSeries {
    pub fn trend(&self) -> Result<Trend> {
        monotonic_trend(&self.values)
    }
}

/// Cosine between `source` and each target in every period's model.
pub fn shift_series<S: AsRef<str>>(
    models: &[EmbeddingModel],
    source: &str,
    targets: &[S],
    mode: TrainingMode,
) -> Result<Vec<DiachronicSeries>> {
    if !models.iter().any(|m| m.contains(source)) {
        return Err(Error::Oov(source.to_string()));
    }
    Ok(targets
        .iter()
        .map(|t| DiachronicSeries {
            source: source.to_string(),
            target: t.as_ref().to_string(),
            values: models.iter().map(|m| m.cosine(source, t.as_ref()).ok()).collect(),
            mode,
        })
        .collect())
}

/// Non-strict monotonicity over the scored periods. A flat series is
/// neither increasing nor decreasing.
pub fn monotonic_trend(values: &[Option<f64>]) -> Result<Trend> {
    let scored: Vec<f64> = values.iter().flatten().copied().collect();
    if scored.len() < 2 {
        return Err(Error::InsufficientData(format!("{} scored periods", scored.len())));
    }
    let up = scored.windows(2).all(|w| w[1] >= w[0]);
    let down = scored.windows(2).all(|w| w[1] <= w[0]);
    Ok(match (up, down) {
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        _ => Trend::None,
    })
}

/// CSV `source,target,period_1..period_k,trend`. Out-of-vocabulary periods
/// print `OOV`; series with fewer than two scored periods get trend `-`.
pub fn write_series_csv<W: Write>(series: &[DiachronicSeries], w: W) -> Result<()> {
    let k = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["source".to_string(), "target".to_string()];
    header.extend((1..=k).map(|i| format!("period_{i}")));
    header.push("trend".into());
    out.write_record(&header)?;
    for s in series {
        let mut row = vec![s.source.clone(), s.target.clone()];
        row.extend(s.values.iter().map(|v| v.map_or_else(|| "OOV".to_string(), |x| format!("{x:.4}"))));
        row.push(s.trend().map_or_else(|_| "-".to_string(), |t| t.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn items(words: &[usize]) -> Vec<(i64, usize)> {
        words.iter().enumerate().map(|(i, w)| (i as i64, *w)).collect()
    }

    fn part(words: &[usize], k: usize) -> PeriodPartition<(i64, usize)> {
        partition_by(items(words), k, |x| x.0, |x| x.1).unwrap()
    }

    #[test]
    fn equal_units_one_per_period() {
        let p = part(&[100, 100, 100, 100], 4);
        assert!(p.periods.iter().all(|x| x.items.len() == 1 && x.words == 100));
    }

    #[test]
    fn greedy_cut_hand_trace() {
        let mut w = vec![1; 10];
        w.push(10);
        let p = part(&w, 2);
        assert_eq!(p.periods[0].words, 10);
        assert_eq!(p.periods[1].words, 10);
    }

    #[test]
    fn too_few_units() {
        assert!(partition_by(items(&[5, 5]), 3, |x| x.0, |x| x.1).is_err());
        assert!(partition_by(items(&[5, 5]), 1, |x| x.0, |x| x.1).is_err());
    }

    #[test]
    fn manifest_csv() {
        let mut buf = Vec::new();
        part(&[3, 3], 2).write_manifest(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "period,start_ts,end_ts,words\n1,0,0,3\n2,1,1,3\n");
    }

    #[test]
    fn trend_examples() {
        let s = |v: &[f64]| v.iter().map(|x| Some(*x)).collect::<Vec<_>>();
        assert_eq!(monotonic_trend(&s(&[0.1, 0.2, 0.3])).unwrap(), Trend::Increasing);
        assert_eq!(monotonic_trend(&s(&[0.3, 0.1, 0.2])).unwrap(), Trend::None);
        assert_eq!(monotonic_trend(&s(&[0.2, 0.2, 0.3])).unwrap(), Trend::Increasing);
        assert_eq!(monotonic_trend(&s(&[0.2, 0.2])).unwrap(), Trend::None);
        assert_eq!(monotonic_trend(&[Some(0.3), None, Some(0.1)]).unwrap(), Trend::Decreasing);
        assert!(monotonic_trend(&[Some(0.3), None]).is_err());
    }

    #[test]
    fn published_start_end_values() {
        // snapper: fish rises, card falls
        assert_eq!(monotonic_trend(&[Some(0.388), Some(0.429)]).unwrap(), Trend::Increasing);
        assert_eq!(monotonic_trend(&[Some(0.418), Some(0.341)]).unwrap(), Trend::Decreasing);
    }

    #[test]
    fn series_csv_marks_oov() {
        let s = DiachronicSeries {
            source: "snapper".into(),
            target: "card".into(),
            values: vec![Some(0.418), None, Some(0.341)],
            mode: TrainingMode::Incremental,
        };
        let mut buf = Vec::new();
        write_series_csv(&[s], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "source,target,period_1,period_2,period_3,trend\nsnapper,card,0.4180,OOV,0.3410,decreasing\n"
        );
    }

    proptest! {
        #[test]
        fn partition_properties(words in proptest::collection::vec(1usize..40, 2..60), k in 2usize..6) {
            prop_assume!(words.len() >= k);
            let max_unit = *words.iter().max().unwrap();
            let total: usize = words.iter().sum();
            let p = part(&words, k);
            prop_assert_eq!(p.len(), k);
            let flat: Vec<(i64, usize)> = p.periods.iter().flat_map(|x| x.items.clone()).collect();
            prop_assert_eq!(flat, items(&words));
            prop_assert!(p.periods.windows(2).all(|w| w[0].end_ts <= w[1].start_ts));
            let mut cum = 0usize;
            for (i, per) in p.periods.iter().enumerate().take(k - 1) {
                cum += per.words;
                let target = total as f64 * (i + 1) as f64 / k as f64;
                prop_assert!(!per.items.is_empty());
                // boundaries stay within one unit of the ideal, unless forced
                // apart to keep every period non-empty
                let forced = per.items.len() == 1 || p.periods[i + 1..].iter().all(|q| q.items.len() == 1);
                prop_assert!(forced || (cum as f64 - target).abs() <= max_unit as f64, "{} vs {}", cum, target);
            }
        }
    }
}

//! Balanced, proportional and random sampling, length quantiles and
//! temporal splits for classification experiments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TextUnit;
use crate::error::{Error, Result};

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plan {
    Balanced,
    Proportional,
    Random,
}

impl std::str::FromStr for Plan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Self::Balanced),
            "proportional" => Ok(Self::Proportional),
            "random" => Ok(Self::Random),
            other => Err(Error::Validation(format!("unknown sampling plan {other:?}"))),
        }
    }
}

/// Settings recorded next to emitted splits so a run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub plan: Plan,
    pub fraction: Option<f64>,
    pub seed: u64,
    pub mgs: Option<usize>,
    pub test_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDataset {
    pub train: Vec<(TextUnit, String)>,
    pub test: Vec<(TextUnit, String)>,
    pub record: PlanRecord,
}

impl SplitDataset {
    pub fn class_counts(rows: &[(TextUnit, String)]) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for (_, l) in rows {
            *m.entry(l.clone()).or_insert(0) += 1;
        }
        m
    }
}

pub type UnitsByClass = BTreeMap<String, Vec<TextUnit>>;

/// A quarter of the smallest class, rounded down.
pub fn min_group_size(class_counts: &BTreeMap<String, usize>) -> Result<usize> {
    if class_counts.values().all(|&c| c == 0) {
        return Err(Error::InsufficientData("all class counts are zero".into()));
    }
    Ok(class_counts.values().copied().min().unwrap_or(0) / 4)
}

fn counts_of(units: &UnitsByClass) -> BTreeMap<String, usize> {
    units.iter().map(|(k, v)| (k.clone(), v.len())).collect()
}

fn check_fraction(f: f64, what: &str) -> Result<()> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::Validation(format!("{what} must be in (0, 1], got {f}")));
    }
    Ok(())
}

/// A unit is identified by its record and text type; a selfpost's title and
/// body are distinct units.
fn check_unique_ids(units: &UnitsByClass) -> Result<()> {
    let mut seen = BTreeSet::new();
    for u in units.values().flatten() {
        if !seen.insert((u.record_id.as_str(), u.text_type)) {
            return Err(Error::Validation(format!("{} unit of record {} appears more than once", u.text_type, u.record_id)));
        }
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, pool: &[TextUnit], k: usize) -> Vec<TextUnit> {
    index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i].clone()).collect()
}

fn test_size(n: usize, test_fraction: f64) -> usize {
    ((n as f64 * test_fraction).round() as usize).min(n)
}

fn split_labelled(
    drawn: Vec<TextUnit>,
    label: &str,
    test_fraction: f64,
    train: &mut Vec<(TextUnit, String)>,
    test: &mut Vec<(TextUnit, String)>,
) {
    let n_test = test_size(drawn.len(), test_fraction);
    for (i, u) in drawn.into_iter().enumerate() {
        if i < n_test {
            test.push((u, label.to_string()));
        } else {
            train.push((u, label.to_string()));
        }
    }
}

/// Draws `min_group_size` units from every class and splits each class
/// into train and test with the same fraction.
pub fn balanced_sample(units: &UnitsByClass, seed: u64, test_fraction: f64) -> Result<SplitDataset> {
    let mgs = min_group_size(&counts_of(units))?;
    if mgs == 0 {
        return Err(Error::InsufficientData("minimum group size is zero".into()));
    }
    let mut split = balanced_sample_n(units, mgs, seed, test_fraction)?;
    split.record.mgs = Some(mgs);
    Ok(split)
}

/// Balanced sampling with an explicit per-class size.
pub fn balanced_sample_n(units: &UnitsByClass, per_class: usize, seed: u64, test_fraction: f64) -> Result<SplitDataset> {
    check_fraction(test_fraction, "test fraction")?;
    check_unique_ids(units)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (label, pool) in units {
        if pool.len() < per_class {
            return Err(Error::InsufficientData(format!(
                "class {label} has {} units, {per_class} requested",
                pool.len()
            )));
        }
        let drawn = draw(&mut rng, pool, per_class);
        split_labelled(drawn, label, test_fraction, &mut train, &mut test);
    }
    Ok(SplitDataset {
        train,
        test,
        record: PlanRecord {
            plan: Plan::Balanced,
            fraction: None,
            seed,
            mgs: Some(per_class),
            test_fraction,
        },
    })
}

/// Each class contributes `round(count × fraction)` units.
pub fn proportional_sample(units: &UnitsByClass, fraction: f64, seed: u64, test_fraction: f64) -> Result<SplitDataset> {
    check_fraction(fraction, "sampling fraction")?;
    check_fraction(test_fraction, "test fraction")?;
    check_unique_ids(units)?;
    let sizes: BTreeMap<&String, usize> = units
        .iter()
        .map(|(k, v)| (k, (v.len() as f64 * fraction).round() as usize))
        .collect();
    if sizes.values().all(|&n| n == 0) {
        return Err(Error::InsufficientData(format!("fraction {fraction} selects no units")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (label, pool) in units {
        let drawn = draw(&mut rng, pool, sizes[label]);
        split_labelled(drawn, label, test_fraction, &mut train, &mut test);
    }
    Ok(SplitDataset {
        train,
        test,
        record: PlanRecord {
            plan: Plan::Proportional,
            fraction: Some(fraction),
            seed,
            mgs: None,
            test_fraction,
        },
    })
}

/// Draws `min_group_size × n_classes` units from the pooled corpus without
/// regard to class.
pub fn random_sample(units: &UnitsByClass, seed: u64, test_fraction: f64) -> Result<SplitDataset> {
    check_fraction(test_fraction, "test fraction")?;
    check_unique_ids(units)?;
    let mgs = min_group_size(&counts_of(units))?;
    let n = mgs * units.len();
    let pool: Vec<(&TextUnit, &String)> = units.iter().flat_map(|(l, v)| v.iter().map(move |u| (u, l))).collect();
    if n == 0 || pool.len() < n {
        return Err(Error::InsufficientData(format!("cannot draw {n} units from {}", pool.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, pool.len(), n);
    let n_test = test_size(n, test_fraction);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, idx) in picked.into_iter().enumerate() {
        let (u, l) = pool[idx];
        if i < n_test {
            test.push((u.clone(), l.clone()));
        } else {
            train.push((u.clone(), l.clone()));
        }
    }
    Ok(SplitDataset {
        train,
        test,
        record: PlanRecord {
            plan: Plan::Random,
            fraction: None,
            seed,
            mgs: Some(mgs),
            test_fraction,
        },
    })
}

/// Sorts by word count (stable) and cuts into `k` buckets whose sizes
/// differ by at most one.
pub fn length_quantiles(units: &[TextUnit], k: usize) -> Result<Vec<Vec<TextUnit>>> {
    if k < 2 {
        return Err(Error::Validation("need at least two quantiles".into()));
    }
    if units.len() < k {
        return Err(Error::InsufficientData(format!("{} units for {k} quantiles", units.len())));
    }
    let mut sorted: Vec<&TextUnit> = units.iter().collect();
    sorted.sort_by_key(|u| u.word_count());
    let n = sorted.len();
    Ok((0..k)
        .map(|i| sorted[i * n / k..(i + 1) * n / k].iter().map(|u| (*u).clone()).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quarter {
    pub year: i32,
    /// 1 to 4
    pub quarter: u32,
}

impl Quarter {
    pub fn of(ts: i64) -> Result<Self> {
        let dt = DateTime::from_timestamp(ts, 0).ok_or_else(|| Error::Validation(format!("timestamp {ts} out of range")))?;
        Ok(Self {
            year: dt.year(),
            quarter: (dt.month() - 1) / 3 + 1,
        })
    }

    pub fn next(self) -> Self {
        if self.quarter == 4 {
            Self {
                year: self.year + 1,
                quarter: 1,
            }
        } else {
            Self {
                year: self.year,
                quarter: self.quarter + 1,
            }
        }
    }

    pub fn start_ts(self) -> i64 {
        NaiveDate::from_ymd_opt(self.year, (self.quarter - 1) * 3 + 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .map(|d| d.and_utc().timestamp())
            .unwrap_or(i64::MIN)
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalSplit {
    pub train: Vec<TextUnit>,
    /// Calendar quarters from the cutoff's quarter to the last unit's,
    /// without gaps.
    pub buckets: Vec<(Quarter, Vec<TextUnit>)>,
}

/// Units strictly before the cutoff train; the rest fall into quarterly
/// test buckets. A unit stamped exactly at the cutoff is a test unit.
pub fn temporal_split(units: &[TextUnit], cutoff_ts: i64) -> Result<TemporalSplit> {
    let mut sorted: Vec<&TextUnit> = units.iter().collect();
    sorted.sort_by_key(|u| u.created_utc);
    let (before, after): (Vec<&TextUnit>, Vec<&TextUnit>) = sorted.into_iter().partition(|u| u.created_utc < cutoff_ts);
    if before.is_empty() {
        return Err(Error::InsufficientData("no units before the cutoff".into()));
    }
    let mut buckets: Vec<(Quarter, Vec<TextUnit>)> = Vec::new();
    if let Some(last) = after.last() {
        let mut q = Quarter::of(cutoff_ts)?;
        let end = Quarter::of(last.created_utc)?;
        while q <= end {
            buckets.push((q, Vec::new()));
            q = q.next();
        }
        for u in &after {
            let q = Quarter::of(u.created_utc)?;
            let slot = buckets.iter_mut().find(|(b, _)| *b == q).expect("quarter in range");
            slot.1.push((*u).clone());
        }
    }
    Ok(TemporalSplit {
        train: before.into_iter().cloned().collect(),
        buckets,
    })
}

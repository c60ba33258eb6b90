use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{TextType, TextUnit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub author: String,
    pub first_ts: i64,
    pub last_ts: i64,
    pub lifespan_days: f64,
    pub total_score: i64,
    /// Selfposts plus comments.
    pub interactions: usize,
    pub engagement_ratio: f64,
    pub lifespan_decile: u8,
    pub engagement_decile: u8,
}

#[derive(Default)]
struct Acc {
    first: i64,
    last: i64,
    records: BTreeMap<String, i64>,
}

/// One profile per author with at least one selfpost or comment. Link-post
/// titles and moderator-distinguished units are ignored; a selfpost's
/// title and body count once. Deciles are left at 0; see
/// [`assign_deciles`].
pub fn build_profiles(units: &[TextUnit]) -> Vec<UserProfile> {
    let mut by_author: BTreeMap<&str, Acc> = BTreeMap::new();
    for u in units {
        if u.moderator || u.text_type == TextType::Rpost {
            continue;
        }
        let acc = by_author.entry(u.author.as_str()).or_insert_with(|| Acc {
            first: u.created_utc,
            last: u.created_utc,
            records: BTreeMap::new(),
        });
        acc.first = acc.first.min(u.created_utc);
        acc.last = acc.last.max(u.created_utc);
        acc.records.insert(u.record_id.clone(), u.score);
    }
    by_author
        .into_iter()
        .map(|(author, acc)| {
            let interactions = acc.records.len();
            let total_score: i64 = acc.records.values().sum();
            UserProfile {
                author: author.to_string(),
                first_ts: acc.first,
                last_ts: acc.last,
                lifespan_days: (acc.last - acc.first) as f64 / 86_400.0,
                total_score,
                interactions,
                engagement_ratio: total_score as f64 / interactions as f64,
                lifespan_decile: 0,
                engagement_decile: 0,
            }
        })
        .collect()
}

/// Rank-based deciles, 1 for the highest values. Ties keep input order.
pub fn decile_assign(values: &[f64]) -> Result<Vec<u8>> {
    let n = values.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!("{n} values for deciles")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Validation("NaN in decile input".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut out = vec![0u8; n];
    for (rank, i) in order.into_iter().enumerate() {
        out[i] = (rank * 10 / n) as u8 + 1;
    }
    Ok(out)
}

pub fn assign_deciles(profiles: &mut [UserProfile]) -> Result<()> {
    let life = decile_assign(&profiles.iter().map(|p| p.lifespan_days).collect::<Vec<_>>())?;
    let eng = decile_assign(&profiles.iter().map(|p| p.engagement_ratio).collect::<Vec<_>>())?;
    for ((p, l), e) in profiles.iter_mut().zip(life).zip(eng) {
        p.lifespan_decile = l;
        p.engagement_decile = e;
    }
    Ok(())
}

/// CSV `author,first_ts,last_ts,lifespan_days,score,interactions,ratio,lifespan_decile,engagement_decile`.
pub fn write_profiles_csv<W: Write>(profiles: &[UserProfile], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "author", "first_ts", "last_ts", "lifespan_days", "score", "interactions", "ratio", "lifespan_decile",
        "engagement_decile",
    ])?;
    for p in profiles {
        out.write_record([
            p.author.clone(),
            p.first_ts.to_string(),
            p.last_ts.to_string(),
            format!("{:.4}", p.lifespan_days),
            p.total_score.to_string(),
            p.interactions.to_string(),
            format!("{:.4}", p.engagement_ratio),
            p.lifespan_decile.to_string(),
            p.engagement_decile.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Authors per community, excluding moderator-distinguished units.
pub fn community_users(units: &[TextUnit]) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for u in units.iter().filter(|u| !u.moderator) {
        out.entry(u.community.clone()).or_default().insert(u.author.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(id: &str, author: &str, ts: i64, score: i64, tt: TextType) -> TextUnit {
        TextUnit {
            record_id: id.into(),
            community: "nz".into(),
            text_type: tt,
            text: "kia ora".into(),
            created_utc: ts,
            author: author.into(),
            score,
            moderator: false,
        }
    }

    #[test]
    fn single_comment_profile() {
        let p = build_profiles(&[unit("a", "u", 100, 5, TextType::Rcomm)]);
        assert_eq!(p[0].lifespan_days, 0.0);
        assert_eq!(p[0].engagement_ratio, 5.0);
    }

    #[test]
    fn hand_divided_ratio() {
        let units = vec![
            unit("s1", "kiwi", 0, 10, TextType::Rstitle),
            unit("s1", "kiwi", 0, 10, TextType::Rstext),
            unit("c1", "kiwi", 86_400 * 3, 2, TextType::Rcomm),
            unit("c2", "kiwi", 86_400, -3, TextType::Rcomm),
            unit("l1", "kiwi", 86_400 * 9, 100, TextType::Rpost),
        ];
        let p = &build_profiles(&units)[0];
        assert_eq!(p.interactions, 3);
        assert_eq!(p.total_score, 9);
        assert_eq!(p.engagement_ratio, 3.0);
        assert_eq!(p.lifespan_days, 3.0);
    }

    #[test]
    fn moderators_and_link_only_users_skipped() {
        let mut m = unit("a", "mod", 0, 1, TextType::Rcomm);
        m.moderator = true;
        let units = vec![m, unit("b", "linker", 0, 1, TextType::Rpost)];
        assert!(build_profiles(&units).is_empty());
        assert!(community_users(&units)["nz"].contains("linker"));
        assert!(!community_users(&units)["nz"].contains("mod"));
    }

    #[test]
    fn hundred_users_ten_per_decile() {
        let v: Vec<f64> = (0..100).map(f64::from).collect();
        let d = decile_assign(&v).unwrap();
        for k in 1..=10u8 {
            assert_eq!(d.iter().filter(|x| **x == k).count(), 10);
        }
        assert_eq!(d[99], 1);
        assert_eq!(d[0], 10);
        assert!(decile_assign(&v[..9]).is_err());
    }

    proptest! {
        #[test]
        fn decile_sizes_balanced(v in proptest::collection::vec(-100.0f64..100.0, 10..200)) {
            let d = decile_assign(&v).unwrap();
            let sizes: Vec<usize> = (1..=10u8).map(|k| d.iter().filter(|x| **x == k).count()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if v[i] > v[j] {
                        prop_assert!(d[i] <= d[j]);
                    }
                }
            }
        }
    }
}

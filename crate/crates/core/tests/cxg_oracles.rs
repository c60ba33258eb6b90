use std::collections::{BTreeMap, BTreeSet};

use dialign::cxg::{
    induce_sem_clusters, match_count, mine_candidates, AnnotatedDoc, Construction, FeatureSet, MineConfig,
    SlotConstraint, SynClass,
};
use dialign::embed::{train, Architecture, TrainConfig};
use dialign::synth::two_topic_corpus;
use dialign::textprep::Tag;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 6] = ["kia", "ora", "the", "of", "bach", "tramp"];

fn random_doc(rng: &mut ChaCha8Rng, len: usize, n_sem: u32) -> AnnotatedDoc {
    let tokens: Vec<String> = (0..len).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
    let tags: Vec<Tag> = (0..len).map(|_| *[Tag::NN, Tag::VB, Tag::RB, Tag::IN, Tag::DET].choose(rng).unwrap()).collect();
    let sem = (0..len).map(|_| if rng.random_bool(0.8) { Some(rng.random_range(0..n_sem)) } else { None }).collect();
    let mut d = AnnotatedDoc::new(tokens).with_tags(tags).unwrap();
    d.sem = Some(sem);
    d
}

fn holds(doc: &AnnotatedDoc, slot: &SlotConstraint, i: usize) -> bool {
    match slot {
        SlotConstraint::Lex(w) => doc.tokens[i] == *w,
        SlotConstraint::Syn(SynClass::Tag(t)) => doc.tags.as_ref().unwrap()[i] == *t,
        SlotConstraint::Syn(SynClass::V) => matches!(doc.tags.as_ref().unwrap()[i], Tag::VB | Tag::VBD | Tag::VBN | Tag::VBG),
        SlotConstraint::Syn(SynClass::N) => matches!(doc.tags.as_ref().unwrap()[i], Tag::NN | Tag::NNS),
        SlotConstraint::Syn(SynClass::Prt) => matches!(doc.tags.as_ref().unwrap()[i], Tag::RB | Tag::IN),
        SlotConstraint::Sem(id) => doc.sem.as_ref().unwrap()[i] == Some(*id),
    }
}

fn window_starts(doc: &AnnotatedDoc, slots: &[SlotConstraint]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + slots.len() <= doc.tokens.len() {
        let mut ok = true;
        for (j, s) in slots.iter().enumerate() {
            if !holds(doc, s, i + j) {
                ok = false;
            }
        }
        if ok {
            out.push(i);
        }
        i += 1;
    }
    out
}

fn random_slot(rng: &mut ChaCha8Rng) -> SlotConstraint {
    match rng.random_range(0..3) {
        0 => SlotConstraint::Lex(WORDS.choose(rng).unwrap().to_string()),
        1 => SlotConstraint::Syn(
            *[SynClass::V, SynClass::N, SynClass::Prt, SynClass::Tag(Tag::DET), SynClass::Tag(Tag::NN)]
                .choose(rng)
                .unwrap(),
        ),
        _ => SlotConstraint::Sem(rng.random_range(0..3)),
    }
}

#[test]
fn matching_equals_window_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let doc = random_doc(&mut rng, 200, 3);
    let mut nonzero = 0;
    for k in 0..20 {
        let len = rng.random_range(2..=4);
        let slots: Vec<SlotConstraint> = (0..len).map(|_| random_slot(&mut rng)).collect();
        let c = Construction::new(format!("r{k}"), slots.clone()).unwrap();
        let expected = window_starts(&doc, &slots).len();
        assert_eq!(match_count(&doc, &c).unwrap(), expected, "{c}");
        nonzero += usize::from(expected > 0);
    }
    assert!(nonzero >= 5);
}

type Scored = (Vec<SlotConstraint>, u64, f64);

fn brute_level(docs: &[AnnotatedDoc], cands: Vec<Vec<SlotConstraint>>, cfg: &MineConfig) -> Vec<Scored> {
    let len = cands[0].len();
    let windows: u64 = docs.iter().map(|d| d.tokens.len().saturating_sub(len - 1) as u64).sum();
    let mut scored = Vec::new();
    for slots in cands {
        let count = |s: &[SlotConstraint], offset: usize| -> u64 {
            docs.iter()
                .map(|d| {
                    if d.tokens.len() < len {
                        return 0;
                    }
                    (0..=d.tokens.len() - len)
                        .filter(|&i| s.iter().enumerate().all(|(j, x)| holds(d, x, i + offset + j)))
                        .count() as u64
                })
                .sum()
        };
        let both = count(&slots, 0);
        if both < cfg.min_freq {
            continue;
        }
        let prefix = count(&slots[..len - 1], 0);
        let last = count(&slots[len - 1..], len - 1);
        let p_with = both as f64 / prefix as f64;
        let p_without = if windows == prefix { 0.0 } else { (last - both) as f64 / (windows - prefix) as f64 };
        let dp = p_with - p_without;
        if dp >= cfg.association_threshold {
            scored.push((slots, both, dp));
        }
    }
    // coverage pruning: best score wins, then the smaller slot sequence
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    let mut seen = BTreeSet::new();
    scored
        .into_iter()
        .filter(|(slots, _, _)| {
            let cover: Vec<(usize, usize)> = docs
                .iter()
                .enumerate()
                .flat_map(|(d, doc)| window_starts(doc, slots).into_iter().map(move |i| (d, i)))
                .collect();
            seen.insert(cover)
        })
        .collect()
}

#[test]
fn miner_equals_exhaustive_scoring() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut docs: Vec<AnnotatedDoc> = (0..12).map(|_| random_doc(&mut rng, 15, 3)).collect();
    // plant a collocation so later rounds have survivors
    for d in docs.iter_mut().take(8) {
        d.tokens[3] = "kia".into();
        d.tokens[4] = "ora".into();
        d.tokens[5] = "bach".into();
    }
    let mut alphabet: Vec<SlotConstraint> = WORDS.iter().map(|w| SlotConstraint::Lex(w.to_string())).collect();
    alphabet.extend(Tag::ALL.iter().map(|t| SlotConstraint::Syn(SynClass::Tag(*t))));
    alphabet.extend((0..3).map(SlotConstraint::Sem));
    let cfg = MineConfig {
        rounds: 5,
        min_freq: 3,
        association_threshold: 0.2,
        feature_set: FeatureSet::SemPlus,
    };
    let mut expected: Vec<Scored> = Vec::new();
    let mut level: Vec<Vec<SlotConstraint>> = alphabet.iter().map(|a| vec![a.clone()]).collect();
    for _ in 0..3 {
        let cands: Vec<Vec<SlotConstraint>> = level
            .iter()
            .flat_map(|p| alphabet.iter().map(move |a| [p.clone(), vec![a.clone()]].concat()))
            .collect();
        if cands.is_empty() {
            break;
        }
        let kept = brute_level(&docs, cands, &cfg);
        level = kept.iter().map(|k| k.0.clone()).collect();
        expected.extend(kept);
    }
    let mined = mine_candidates(&docs, &cfg).unwrap();
    let got: BTreeMap<Vec<SlotConstraint>, (u64, f64)> = mined.iter().map(|m| (m.slots.clone(), (m.freq, m.delta_p))).collect();
    let want: BTreeMap<Vec<SlotConstraint>, (u64, f64)> = expected.into_iter().map(|(s, f, d)| (s, (f, d))).collect();
    assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
    for (k, (f, d)) in &want {
        assert_eq!(got[k].0, *f);
        assert!((got[k].1 - d).abs() < 1e-12);
    }
    assert!(got.keys().any(|k| k.len() == 3), "no three-slot survivors");
    let planted = vec![SlotConstraint::Lex("kia".into()), SlotConstraint::Lex("ora".into())];
    assert!(got.contains_key(&planted));
}

#[test]
fn sem_clusters_follow_topics() {
    let c = two_topic_corpus(40_000, 20, 20, 3);
    let cfg = TrainConfig {
        dim: 30,
        min_count: 1,
        subsample: 0.0,
        architecture: Architecture::Sgns,
        ..TrainConfig::default()
    };
    let m = train(&c.docs, &cfg, None).unwrap();
    let clusters = induce_sem_clusters(&m, 2, 1).unwrap();
    for topic in &c.topics {
        let ids: BTreeSet<u32> = topic.iter().map(|w| clusters.get(w).unwrap()).collect();
        assert_eq!(ids.len(), 1);
    }
    assert_ne!(clusters.get("alpha0"), clusters.get("beta0"));
    let one = induce_sem_clusters(&m, 1, 1).unwrap();
    assert!(c.topics.iter().flatten().all(|w| one.get(w) == Some(0)));
    assert_eq!(induce_sem_clusters(&m, 2, 1).unwrap(), clusters);
    assert!(induce_sem_clusters(&m, m.len() + 1, 1).is_err());
}

use dialign::textprep::{parse_tagged, tokenize, Tagger};

#[test]
fn hand_tagged_fixture_agreement() {
    let text = include_str!("fixtures/pos_hand_tagged.txt");
    let sents = parse_tagged(text).unwrap();
    let total: usize = sents.iter().map(|(w, _)| w.len()).sum();
    assert!(total >= 100, "fixture has {total} tokens");
    let tagger = Tagger::seed();
    let mut agree = 0;
    for (words, gold) in &sents {
        let got = tagger.tag(words);
        for (i, (g, p)) in gold.iter().zip(&got).enumerate() {
            if g == p {
                agree += 1;
            } else {
                eprintln!("{}: gold {g} got {p}", words[i]);
            }
        }
    }
    let acc = agree as f64 / total as f64;
    eprintln!("tagger agreement {acc:.3} over {total} tokens");
    assert!(acc >= 0.90, "agreement {acc}");
}

#[test]
fn segmentation_matches_reference() {
    let text = include_str!("fixtures/segmentation.txt");
    let reference: Vec<&str> = include_str!("fixtures/segmentation.tokens").lines().collect();
    assert!(reference.len() >= 500);
    let got = tokenize(text).tokens;
    assert_eq!(got.len(), reference.len());
    assert_eq!(got, reference);
}

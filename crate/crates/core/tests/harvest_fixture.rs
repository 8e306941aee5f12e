use std::collections::BTreeSet;

use eamt_core::lexicon::wikidata::FixtureWikidataClient;
use eamt_core::lexicon::{harvest, parse_lexicon, to_lexicon_jsonl, HarvestOptions, NameSource};
use eamt_core::{Locale, Lookup, Qid};
use proptest::prelude::*;
use serde_json::{json, Map};

fn fixture_dir() -> String {
    format!("{}/tests/fixtures/wikidata", env!("CARGO_MANIFEST_DIR"))
}

fn q(s: &str) -> Qid {
    s.parse().unwrap()
}

fn l(s: &str) -> Locale {
    s.parse().unwrap()
}

#[test]
fn harvests_labels_and_aliases_offline() {
    let client = FixtureWikidataClient::open(fixture_dir()).unwrap();
    let opts = HarvestOptions { timestamp: Some(1_700_000_000), ..HarvestOptions::default() };
    let langs = [l("it"), l("de"), l("th")];
    let lex = harvest(&[q("Q42"), q("Q220"), q("Q42"), q("Q999999")], &langs, &client, &opts).unwrap();

    assert_eq!(lex.len(), 3);
    let it = lex.lookup(&q("Q42"), &l("it")).names().unwrap();
    assert_eq!(it.primary_label(), Some("Douglas Adams"));
    // "douglas adams" duplicates the label after normalization
    assert_eq!(it.aliases(), ["Douglas Noël Adams"]);
    assert_eq!(
        lex.lookup(&q("Q220"), &l("it")).names().unwrap().names().collect::<Vec<_>>(),
        ["Roma", "Città eterna", "Urbe"]
    );
    assert!(matches!(lex.lookup(&q("Q42"), &l("th")), Lookup::Names(n) if n.is_empty()));
    assert!(matches!(lex.lookup(&q("Q999999"), &l("de")), Lookup::Names(n) if n.is_empty()));
    assert!(matches!(lex.lookup(&q("Q42"), &l("fr")), Lookup::NotFetched));
    assert_eq!(lex.entry(&q("Q42")).unwrap().provenance.source, NameSource::File);
    assert_eq!(client.call_sizes(), [3]);
}

#[test]
fn labels_only() {
    let client = FixtureWikidataClient::open(fixture_dir()).unwrap();
    let opts = HarvestOptions { include_aliases: false, timestamp: Some(0), ..HarvestOptions::default() };
    let lex = harvest(&[q("Q220")], &[l("it")], &client, &opts).unwrap();
    assert_eq!(lex.lookup(&q("Q220"), &l("it")).names().unwrap().names().collect::<Vec<_>>(), ["Roma"]);
}

#[test]
fn harvest_is_idempotent_and_persists() {
    let client = FixtureWikidataClient::open(fixture_dir()).unwrap();
    let opts = HarvestOptions { timestamp: Some(5), ..HarvestOptions::default() };
    let ids = [q("Q220"), q("Q42")];
    let langs = [l("fr"), l("ja")];
    let a = harvest(&ids, &langs, &client, &opts).unwrap();
    let b = harvest(&ids, &langs, &client, &opts).unwrap();
    assert_eq!(to_lexicon_jsonl(&a), to_lexicon_jsonl(&b));
    let round = parse_lexicon(&to_lexicon_jsonl(&a)).unwrap();
    assert!(round.same_names(&a));
    assert_eq!(round, a);
}

fn synthetic(n: u64) -> FixtureWikidataClient {
    let mut entities = Map::new();
    for i in 1..=n {
        entities.insert(
            format!("Q{i}"),
            json!({"id": format!("Q{i}"), "labels": {"it": {"language": "it", "value": format!("e{i}")}}}),
        );
    }
    FixtureWikidataClient::from_response(json!({ "entities": entities })).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Batches partition the requested ids and none exceeds the size limit.
    #[test]
    fn batching_covers_every_id(
        ids in proptest::collection::vec(1u64..400, 0..300),
        batch_size in 1usize..=50,
        workers in 1usize..6,
    ) {
        let client = synthetic(400);
        let qids: Vec<Qid> = ids.iter().map(|i| q(&format!("Q{i}"))).collect();
        let opts = HarvestOptions { batch_size, max_in_flight: workers, timestamp: Some(0), ..HarvestOptions::default() };
        let lex = harvest(&qids, &[l("it")], &client, &opts).unwrap();
        let unique: BTreeSet<u64> = ids.iter().copied().collect();
        prop_assert_eq!(lex.len(), unique.len());
        let sizes = client.call_sizes();
        prop_assert!(sizes.iter().all(|&s| s >= 1 && s <= batch_size));
        prop_assert_eq!(sizes.iter().sum::<usize>(), unique.len());
        for i in unique {
            let names = lex.lookup(&q(&format!("Q{i}")), &l("it")).names().unwrap();
            prop_assert_eq!(names.primary_label().map(str::to_owned), Some(format!("e{i}")));
        }
    }
}

//! M-ETA against a brute-force reference implementation.

use std::collections::BTreeSet;

use caseless::default_case_fold_str;
use eamt_core::lexicon::{NameSource, Provenance};
use eamt_core::metrics::Denominator;
use eamt_core::{m_eta, EntityLexicon, GoldTarget, Instance, MatchPolicy, NameSet, Prediction, Qid};
use proptest::prelude::*;
use unicode_normalization::UnicodeNormalization;

fn norm(s: &str) -> String {
    let folded = default_case_fold_str(&s.nfkc().collect::<String>());
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Counts (correct, total) entities by trying every name of every entity.
fn oracle(
    insts: &[Instance],
    preds: &[Prediction],
    aliases: &[(Qid, Vec<String>)],
    use_aliases: bool,
    untranslated_rule: bool,
) -> (usize, usize, usize, usize) {
    let (mut correct, mut total, mut inst_ok, mut inst_total) = (0, 0, 0, 0);
    for inst in insts {
        if inst.entity_ids.is_empty() {
            continue;
        }
        let pred = preds.iter().find(|p| p.instance_id == inst.id).unwrap();
        let h = norm(&pred.hypothesis);
        let dead = pred.failed || (untranslated_rule && h == norm(&inst.source_text));
        let mut all = true;
        for qid in &inst.entity_ids {
            let mut names: Vec<String> = inst
                .gold_targets
                .iter()
                .filter_map(|t| t.entity_mention.clone())
                .collect();
            if use_aliases {
                for (q, list) in aliases {
                    if q == qid {
                        names.extend(list.iter().cloned());
                    }
                }
            }
            let hit = !dead
                && names.iter().any(|n| {
                    let n = norm(n);
                    !n.is_empty() && h.contains(n.as_str())
                });
            total += 1;
            if hit {
                correct += 1;
            } else {
                all = false;
            }
        }
        inst_total += 1;
        if all {
            inst_ok += 1;
        }
    }
    (correct, total, inst_ok, inst_total)
}

// Small alphabet so that hits, near misses and case/width variants are common.
fn text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            Just("a"), Just("B"), Just("b"), Just(" "), Just("  "), Just("ﬁ"), Just("fi"),
            Just("Ａ"), Just("ß"), Just("ss"), Just("é"), Just("e\u{301}"), Just("\t"),
        ],
        0..6,
    )
    .prop_map(|v| v.concat())
}

#[derive(Debug, Clone)]
struct Case {
    insts: Vec<Instance>,
    preds: Vec<Prediction>,
    aliases: Vec<(Qid, Vec<String>)>,
}

fn case() -> impl Strategy<Value = Case> {
    let inst = (
        text(),
        proptest::collection::vec(0u8..6, 0..=4),
        proptest::collection::vec(proptest::option::of(text()), 1..3),
        text(),
        any::<bool>(),
        any::<bool>(),
    );
    (
        proptest::collection::vec(inst, 1..=50),
        proptest::collection::vec(proptest::collection::vec(text(), 0..3), 6),
    )
        .prop_map(|(rows, alias_lists)| {
            let mut insts = Vec::new();
            let mut preds = Vec::new();
            for (i, (source, ents, mentions, hyp, failed, copy_source)) in rows.into_iter().enumerate() {
                let id = format!("i{i}");
                let ents: BTreeSet<u8> = ents.into_iter().collect();
                insts.push(Instance {
                    id: id.clone(),
                    source_text: source.clone(),
                    source_locale: "en".parse().unwrap(),
                    target_locale: "it".parse().unwrap(),
                    entity_ids: ents.iter().map(|e| format!("Q{}", e + 1).parse().unwrap()).collect(),
                    gold_targets: mentions
                        .into_iter()
                        .map(|m| GoldTarget { translation: "ref".into(), entity_mention: m })
                        .collect(),
                    metadata: Default::default(),
                });
                preds.push(Prediction {
                    instance_id: id,
                    hypothesis: if copy_source { source.to_uppercase() } else { hyp },
                    backend_id: "t".into(),
                    latency_ms: 0,
                    attempts: 1,
                    failed,
                    error: None,
                    raw: None,
                });
            }
            let aliases = alias_lists
                .into_iter()
                .enumerate()
                .map(|(i, list)| (format!("Q{}", i + 1).parse().unwrap(), list))
                .collect();
            Case { insts, preds, aliases }
        })
}

fn lexicon(aliases: &[(Qid, Vec<String>)]) -> EntityLexicon {
    let mut lex = EntityLexicon::new();
    for (q, list) in aliases {
        let mut it = list.iter().cloned();
        let label = it.next();
        lex.insert(
            q.clone(),
            "it".parse().unwrap(),
            NameSet::new(label, it),
            Provenance { source: NameSource::File, fetched_at: 0 },
        );
    }
    lex
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_brute_force(c in case(), use_aliases in any::<bool>(), untranslated_rule in any::<bool>()) {
        let lex = lexicon(&c.aliases);
        let (correct, total, inst_ok, inst_total) =
            oracle(&c.insts, &c.preds, &c.aliases, use_aliases, untranslated_rule);
        let policy = MatchPolicy { use_aliases, untranslated_rule, ..MatchPolicy::default() };
        let got = m_eta(&c.preds, &c.insts, &lex, &policy);
        if total == 0 {
            prop_assert!(got.is_err());
            return Ok(());
        }
        let got = got.unwrap();
        prop_assert_eq!((got.correct, got.total), (correct, total));
        prop_assert_eq!(got.score, correct as f64 / total as f64);
        prop_assert_eq!(got.log.iter().filter(|e| e.matched.is_some()).count(), correct);

        let per_inst = MatchPolicy { denominator: Denominator::Instances, ..policy };
        let got = m_eta(&c.preds, &c.insts, &lex, &per_inst).unwrap();
        prop_assert_eq!((got.correct, got.total), (inst_ok, inst_total));
    }

    #[test]
    fn prediction_order_is_irrelevant(c in case()) {
        let lex = lexicon(&c.aliases);
        let policy = MatchPolicy::default();
        let mut reversed = c.preds.clone();
        reversed.reverse();
        let a = m_eta(&c.preds, &c.insts, &lex, &policy);
        let b = m_eta(&reversed, &c.insts, &lex, &policy);
        prop_assert_eq!(a.map(|s| s.score).ok(), b.map(|s| s.score).ok());
    }
}

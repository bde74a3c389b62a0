//! Interchange files as an external producer writes them: a `#` header line,
//! then one JSON record per line.

use std::collections::BTreeMap;

use absa_core::ensemble::{
    group_ate_records, group_soe_records, majority_vote, median_ensemble, AteRecord, SoeRecord,
    TieBreak, Vote,
};
use absa_core::io::{read_jsonl, write_header, write_jsonl};
use absa_core::soe::{parse_completion, LabelLexicon};
use absa_core::tagging::tokenize;
use absa_core::toy::toy_corpus;
use absa_core::{Exec, Polarity};
use serde::Deserialize;
use serde_json::json;

#[test]
fn ate_file_round_trip() {
    let corpus = toy_corpus();
    let mut buf = Vec::new();
    write_header(&mut buf, &json!({"producer": "adapter", "model": "m"})).unwrap();
    let records: Vec<AteRecord> = corpus
        .iter()
        .map(|r| {
            let n = tokenize(&r.text).len();
            AteRecord::new("m", r, vec![[0.5, 0.25, 0.25]; n])
        })
        .collect();
    write_jsonl(&mut buf, &records).unwrap();
    let back: Vec<AteRecord> = read_jsonl(&buf[..]).unwrap();
    assert_eq!(back, records);
    for (rec, review) in back.iter().zip(&corpus) {
        rec.check_alignment(review).unwrap();
    }
    let merged = median_ensemble(&group_ate_records(&back).unwrap(), Exec::default()).unwrap();
    assert!(merged
        .iter()
        .all(|m| m.tags.iter().all(|t| t.as_str() == "O")));
}

#[test]
fn ate_wire_names() {
    let line = r#"{"model_id":"m","review_key":"k","tokens":[{"start":0,"end":5}],"probs":[[0.1,0.8,0.1]]}"#;
    let rec: AteRecord = serde_json::from_str(line).unwrap();
    assert_eq!(rec.validate().unwrap().probs[0], [0.1, 0.8, 0.1]);
    let off = r#"{"model_id":"m","review_key":"k","tokens":[{"start":0,"end":5}],"probs":[[0.1,0.8,0.2]]}"#;
    let rec: AteRecord = serde_json::from_str(off).unwrap();
    assert!(rec.validate().is_err());
}

#[test]
fn soe_file_with_abstentions() {
    let text = "#{\"producer\":\"adapter\"}\n\
        {\"model_id\":\"a\",\"review_id\":1,\"aspect_term\":\"hotel\",\"start\":0,\"end\":5,\"label\":\"abstain\"}\n\
        {\"model_id\":\"b\",\"review_id\":1,\"aspect_term\":\"hotel\",\"start\":0,\"end\":5,\"label\":\"negative\"}\n";
    let recs: Vec<SoeRecord> = read_jsonl(text.as_bytes()).unwrap();
    assert_eq!(recs[0].label, Vote::Abstain);
    let votes = majority_vote(&group_soe_records(&recs).unwrap(), &TieBreak::default()).unwrap();
    assert_eq!(
        votes.values().next(),
        Some(&Vote::Label(Polarity::Negative))
    );
}

#[derive(Deserialize)]
struct CompletionVector {
    completion: String,
    label: Option<Polarity>,
}

#[test]
fn shared_completion_vectors() {
    let vectors: Vec<CompletionVector> =
        serde_json::from_str(include_str!("../data/completion_vectors.json")).unwrap();
    let lex = LabelLexicon::default();
    let mut seen = BTreeMap::new();
    for v in &vectors {
        assert_eq!(
            parse_completion(&v.completion, &lex),
            v.label,
            "{:?}",
            v.completion
        );
        *seen.entry(v.label).or_insert(0) += 1;
    }
    assert!(seen.contains_key(&None));
}

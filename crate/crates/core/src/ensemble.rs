//! Combining several models' predictions.
//!
//! ATE: per token and per label, the median of the models' probabilities,
//! then argmax (ties O > B > I) and BIO repair. SOE: plurality vote over the
//! models that did not abstain, ties broken by a configured label order.
//!
//! Both interchange formats are JSON lines:
//!
//! ```text
//! {"model_id":"m1","review_key":"<sha256 hex>","tokens":[{"start":0,"end":1}],"probs":[[0.9,0.05,0.05]]}
//! {"model_id":"m1","review_id":2414,"aspect_term":"hotel","start":26,"end":31,"label":"positive"}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Polarity, Review};
use crate::tagging::{repair_bio, tokenize, BioTag};
use crate::{Error, Exec, Result};

/// Allowed deviation of a probability row's sum from 1.
pub const PROB_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenOffsets {
    pub start: usize,
    pub end: usize,
}

/// One line of an ATE prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteRecord {
    pub model_id: String,
    pub review_key: String,
    pub tokens: Vec<TokenOffsets>,
    pub probs: Vec<Vec<f64>>,
}

/// Validated per-token probabilities of one model for one review.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewProbs {
    pub tokens: Vec<TokenOffsets>,
    pub probs: Vec<[f64; 3]>,
}

impl AteRecord {
    pub fn new(model_id: &str, review: &Review, probs: Vec<[f64; 3]>) -> Self {
        AteRecord {
            model_id: model_id.to_string(),
            review_key: review.key(),
            tokens: tokenize(&review.text)
                .iter()
                .map(|t| TokenOffsets {
                    start: t.start,
                    end: t.end,
                })
                .collect(),
            probs: probs.into_iter().map(|p| p.to_vec()).collect(),
        }
    }

    /// Schema checks: one row of three probabilities in `[0, 1]` per token,
    /// each row summing to `1 ± PROB_TOLERANCE`, tokens ordered and disjoint.
    pub fn validate(&self) -> Result<ReviewProbs> {
        let bad = |msg: String| {
            Error::Prediction(format!(
                "model {} review {}: {msg}",
                self.model_id, self.review_key
            ))
        };
        if self.tokens.len() != self.probs.len() {
            return Err(bad(format!(
                "{} tokens but {} probability rows",
                self.tokens.len(),
                self.probs.len()
            )));
        }
        let mut prev_end = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.start >= t.end || t.start < prev_end {
                return Err(bad(format!(
                    "token {i} offsets ({}, {}) invalid",
                    t.start, t.end
                )));
            }
            prev_end = t.end;
        }
        let mut probs = Vec::with_capacity(self.probs.len());
        for (i, row) in self.probs.iter().enumerate() {
            let arr: [f64; 3] = row.as_slice().try_into().map_err(|_| {
                bad(format!(
                    "token {i} has {} probabilities, expected 3",
                    row.len()
                ))
            })?;
            if arr.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(bad(format!(
                    "token {i} probabilities {arr:?} outside [0, 1]"
                )));
            }
            let sum: f64 = arr.iter().sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(bad(format!("token {i} probabilities sum to {sum}")));
            }
            probs.push(arr);
        }
        Ok(ReviewProbs {
            tokens: self.tokens.clone(),
            probs,
        })
    }

    /// Token offsets must equal the canonical tokenization of `review`.
    pub fn check_alignment(&self, review: &Review) -> Result<()> {
        let canonical = tokenize(&review.text);
        let same = canonical.len() == self.tokens.len()
            && canonical
                .iter()
                .zip(&self.tokens)
                .all(|(c, t)| c.start == t.start && c.end == t.end);
        if same {
            Ok(())
        } else {
            Err(Error::TokenMismatch {
                review: self.review_key.clone(),
                detail: format!(
                    "model {} has {} tokens, canonical tokenization has {}{}",
                    self.model_id,
                    self.tokens.len(),
                    canonical.len(),
                    if canonical.len() == self.tokens.len() {
                        " (offsets differ)"
                    } else {
                        ""
                    }
                ),
            })
        }
    }
}

/// All of one model's ATE predictions, keyed by review key.
#[derive(Debug, Clone, PartialEq)]
pub struct AteModelPrediction {
    pub model_id: String,
    pub reviews: BTreeMap<String, ReviewProbs>,
}

/// Validate records and group them per model, in order of first appearance.
pub fn group_ate_records(records: &[AteRecord]) -> Result<Vec<AteModelPrediction>> {
    let mut order: Vec<AteModelPrediction> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for rec in records {
        let probs = rec.validate()?;
        let i = *slot.entry(rec.model_id.as_str()).or_insert_with(|| {
            order.push(AteModelPrediction {
                model_id: rec.model_id.clone(),
                reviews: BTreeMap::new(),
            });
            order.len() - 1
        });
        if order[i]
            .reviews
            .insert(rec.review_key.clone(), probs)
            .is_some()
        {
            return Err(Error::Prediction(format!(
                "model {} predicts review {} twice",
                rec.model_id, rec.review_key
            )));
        }
    }
    Ok(order)
}

/// Median of `values` (mean of the two middle values for even counts).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Per-label medians over models for one token.
pub fn token_medians(rows: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    let mut buf = Vec::with_capacity(rows.len());
    for (label, slot) in out.iter_mut().enumerate() {
        buf.clear();
        buf.extend(rows.iter().map(|r| r[label]));
        *slot = median(&mut buf);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembledReview {
    pub review_key: String,
    pub tokens: Vec<TokenOffsets>,
    /// Per-label medians. Not renormalized; only their argmax is used.
    pub medians: Vec<[f64; 3]>,
    pub tags: Vec<BioTag>,
}

/// Median ensemble over models, one output per review in key order.
pub fn median_ensemble(preds: &[AteModelPrediction], exec: Exec) -> Result<Vec<EnsembledReview>> {
    let first = preds
        .first()
        .ok_or(Error::Empty("no ATE models to ensemble"))?;
    for p in &preds[1..] {
        if p.reviews.len() != first.reviews.len()
            || p.reviews
                .keys()
                .zip(first.reviews.keys())
                .any(|(a, b)| a != b)
        {
            let missing = first
                .reviews
                .keys()
                .find(|k| !p.reviews.contains_key(*k))
                .or_else(|| p.reviews.keys().find(|k| !first.reviews.contains_key(*k)));
            return Err(Error::Prediction(format!(
                "models {} and {} cover different reviews (e.g. {})",
                first.model_id,
                p.model_id,
                missing.map_or("?", String::as_str)
            )));
        }
    }
    let keys: Vec<&String> = first.reviews.keys().collect();
    exec.try_map(&keys, |key| {
        let base = &first.reviews[*key];
        for p in &preds[1..] {
            let other = &p.reviews[*key];
            if other.tokens.len() != base.tokens.len() {
                return Err(Error::TokenMismatch {
                    review: (*key).clone(),
                    detail: format!(
                        "model {} has {} tokens, model {} has {}",
                        first.model_id,
                        base.tokens.len(),
                        p.model_id,
                        other.tokens.len()
                    ),
                });
            }
            if other.tokens != base.tokens {
                return Err(Error::TokenMismatch {
                    review: (*key).clone(),
                    detail: format!(
                        "models {} and {} disagree on token offsets",
                        first.model_id, p.model_id
                    ),
                });
            }
        }
        let mut rows = Vec::with_capacity(preds.len());
        let medians: Vec<[f64; 3]> = (0..base.tokens.len())
            .map(|t| {
                rows.clear();
                rows.extend(preds.iter().map(|p| p.reviews[*key].probs[t]));
                token_medians(&rows)
            })
            .collect();
        let raw: Vec<BioTag> = medians.iter().map(BioTag::argmax).collect();
        Ok(EnsembledReview {
            review_key: (*key).clone(),
            tokens: base.tokens.clone(),
            medians,
            tags: repair_bio(&raw),
        })
    })
}

/// A model's SOE output for one aspect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vote {
    Label(Polarity),
    Abstain,
}

impl Vote {
    pub fn as_str(self) -> &'static str {
        match self {
            Vote::Label(p) => p.as_str(),
            Vote::Abstain => "abstain",
        }
    }

    pub fn label(self) -> Option<Polarity> {
        match self {
            Vote::Label(p) => Some(p),
            Vote::Abstain => None,
        }
    }
}

impl From<Option<Polarity>> for Vote {
    fn from(p: Option<Polarity>) -> Self {
        p.map_or(Vote::Abstain, Vote::Label)
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Vote {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "abstain" => Ok(Vote::Abstain),
            other => other.parse().map(Vote::Label),
        }
    }
}

impl Serialize for Vote {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Vote {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One line of an SOE prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoeRecord {
    pub model_id: String,
    pub review_id: i64,
    pub aspect_term: String,
    pub start: usize,
    pub end: usize,
    pub label: Vote,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SoeKey {
    pub review_id: i64,
    pub start: usize,
    pub end: usize,
    pub aspect_term: String,
}

impl SoeRecord {
    pub fn key(&self) -> SoeKey {
        SoeKey {
            review_id: self.review_id,
            start: self.start,
            end: self.end,
            aspect_term: self.aspect_term.clone(),
        }
    }

    pub fn from_key(model_id: &str, key: &SoeKey, label: Vote) -> Self {
        SoeRecord {
            model_id: model_id.to_string(),
            review_id: key.review_id,
            aspect_term: key.aspect_term.clone(),
            start: key.start,
            end: key.end,
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoeModelPrediction {
    pub model_id: String,
    pub votes: BTreeMap<SoeKey, Vote>,
}

/// Group records per model; a repeated (model, key) pair is an error.
pub fn group_soe_records(records: &[SoeRecord]) -> Result<Vec<SoeModelPrediction>> {
    let mut order: Vec<SoeModelPrediction> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for rec in records {
        let i = *slot.entry(rec.model_id.as_str()).or_insert_with(|| {
            order.push(SoeModelPrediction {
                model_id: rec.model_id.clone(),
                votes: BTreeMap::new(),
            });
            order.len() - 1
        });
        if order[i].votes.insert(rec.key(), rec.label).is_some() {
            return Err(Error::Prediction(format!(
                "model {} predicts review {} aspect {:?}@({},{}) twice",
                rec.model_id, rec.review_id, rec.aspect_term, rec.start, rec.end
            )));
        }
    }
    Ok(order)
}

/// Label precedence used to break vote ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBreak(pub [Polarity; 3]);

impl Default for TieBreak {
    fn default() -> Self {
        TieBreak([Polarity::Positive, Polarity::Negative, Polarity::Neutral])
    }
}

impl TieBreak {
    pub fn new(order: [Polarity; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for p in order {
            seen[p as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            Ok(TieBreak(order))
        } else {
            Err(Error::Config(format!(
                "tie-break order must list each polarity once, got {order:?}"
            )))
        }
    }

    fn rank(&self, p: Polarity) -> usize {
        self.0.iter().position(|&q| q == p).unwrap_or(usize::MAX)
    }
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels: Vec<Polarity> = s.split(',').map(str::parse).collect::<Result<_>>()?;
        let order: [Polarity; 3] = labels
            .try_into()
            .map_err(|_| Error::Config(format!("tie-break order needs three labels, got {s:?}")))?;
        TieBreak::new(order)
    }
}

/// Plurality label among non-abstaining votes; `Abstain` if all abstain.
pub fn plurality(votes: &[Vote], tie_break: &TieBreak) -> Vote {
    let mut counts = [0usize; 3];
    for v in votes {
        if let Vote::Label(p) = v {
            counts[*p as usize] += 1;
        }
    }
    tie_break
        .0
        .iter()
        .copied()
        .filter(|p| counts[*p as usize] > 0)
        .max_by(|a, b| {
            counts[*a as usize]
                .cmp(&counts[*b as usize])
                .then_with(|| tie_break.rank(*b).cmp(&tie_break.rank(*a)))
        })
        .map_or(Vote::Abstain, Vote::Label)
}

/// Majority vote over every key predicted by any model. A model missing a
/// key counts as an abstention for it (with a warning).
pub fn majority_vote(
    preds: &[SoeModelPrediction],
    tie_break: &TieBreak,
) -> Result<BTreeMap<SoeKey, Vote>> {
    if preds.is_empty() {
        return Err(Error::Empty("no SOE models to ensemble"));
    }
    let mut keys: Vec<&SoeKey> = preds.iter().flat_map(|p| p.votes.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut out = BTreeMap::new();
    let mut votes = Vec::with_capacity(preds.len());
    for key in keys {
        votes.clear();
        for p in preds {
            match p.votes.get(key) {
                Some(v) => votes.push(*v),
                None => log::warn!(
                    "model {} has no prediction for review {} aspect {:?}; counting an abstention",
                    p.model_id,
                    key.review_id,
                    key.aspect_term
                ),
            }
        }
        out.insert(key.clone(), plurality(&votes, tie_break));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BioTag::B;
    use Polarity::*;

    fn one_token_model(id: &str, probs: [f64; 3]) -> AteModelPrediction {
        let mut reviews = BTreeMap::new();
        reviews.insert(
            "k".to_string(),
            ReviewProbs {
                tokens: vec![TokenOffsets { start: 0, end: 5 }],
                probs: vec![probs],
            },
        );
        AteModelPrediction {
            model_id: id.into(),
            reviews,
        }
    }

    #[test]
    fn median_rules() {
        assert_eq!(median(&mut [0.7, 0.2, 0.6]), 0.6);
        assert_eq!(median(&mut [0.1, 0.4, 0.3, 0.9]), 0.35);
        assert_eq!(median(&mut [0.5]), 0.5);
    }

    #[test]
    fn single_model_is_its_own_argmax() {
        let m = one_token_model("a", [0.2, 0.5, 0.3]);
        let out = median_ensemble(&[m], Exec::Sequential).unwrap();
        assert_eq!(out[0].tags, [B]);
        assert_eq!(out[0].medians[0], [0.2, 0.5, 0.3]);
    }

    #[test]
    fn three_models_b_probabilities() {
        let preds = [
            one_token_model("a", [0.2, 0.7, 0.1]),
            one_token_model("b", [0.7, 0.2, 0.1]),
            one_token_model("c", [0.3, 0.6, 0.1]),
        ];
        let out = median_ensemble(&preds, Exec::Sequential).unwrap();
        assert_eq!(out[0].medians[0][1], 0.6);
    }

    #[test]
    fn disagreeing_models_pick_b() {
        // two say B at 0.8, one says O at 0.9
        let preds = [
            one_token_model("a", [0.1, 0.8, 0.1]),
            one_token_model("b", [0.15, 0.8, 0.05]),
            one_token_model("c", [0.9, 0.05, 0.05]),
        ];
        let out = median_ensemble(&preds, Exec::Sequential).unwrap();
        // O: {0.1, 0.15, 0.9} -> 0.15; B: {0.8, 0.8, 0.05} -> 0.8; I -> 0.05
        assert_eq!(out[0].medians[0], [0.15, 0.8, 0.05]);
        assert_eq!(out[0].tags, [B]);
    }

    #[test]
    fn lone_i_is_repaired() {
        let out =
            median_ensemble(&[one_token_model("a", [0.1, 0.2, 0.7])], Exec::Sequential).unwrap();
        assert_eq!(out[0].tags, [B]);
    }

    #[test]
    fn token_count_mismatch_is_fatal() {
        let a = one_token_model("a", [1.0, 0.0, 0.0]);
        let mut b = one_token_model("b", [1.0, 0.0, 0.0]);
        let r = b.reviews.get_mut("k").unwrap();
        r.tokens.push(TokenOffsets { start: 6, end: 7 });
        r.probs.push([1.0, 0.0, 0.0]);
        match median_ensemble(&[a.clone(), b], Exec::Sequential).unwrap_err() {
            Error::TokenMismatch { review, detail } => {
                assert_eq!(review, "k");
                assert!(
                    detail.contains("model a") && detail.contains("model b"),
                    "{detail}"
                );
            }
            e => panic!("unexpected {e}"),
        }
        assert!(median_ensemble(&[], Exec::Sequential).is_err());
        let mut c = one_token_model("c", [1.0, 0.0, 0.0]);
        c.reviews.insert("other".into(), a.reviews["k"].clone());
        assert!(median_ensemble(&[a, c], Exec::Sequential).is_err());
    }

    #[test]
    fn record_validation() {
        let good = AteRecord {
            model_id: "m".into(),
            review_key: "k".into(),
            tokens: vec![TokenOffsets { start: 0, end: 1 }],
            probs: vec![vec![0.2, 0.3, 0.5]],
        };
        good.validate().unwrap();
        let mut short = good.clone();
        short.probs = vec![vec![0.5, 0.5]];
        assert!(short.validate().is_err());
        let mut off = good.clone();
        off.probs = vec![vec![0.2, 0.3, 0.51]];
        assert!(off.validate().is_err());
        let mut within = good.clone();
        within.probs = vec![vec![0.2, 0.3, 0.50005]];
        within.validate().unwrap();
        let mut neg = good.clone();
        neg.probs = vec![vec![-0.1, 0.6, 0.5]];
        assert!(neg.validate().is_err());
        let dup = group_ate_records(&[good.clone(), good]);
        assert!(dup.is_err());
    }

    #[test]
    fn alignment_against_corpus() {
        let review = Review::new("O hotel.", vec![1], vec![]);
        let rec = AteRecord::new("m", &review, vec![[1.0, 0.0, 0.0]; 3]);
        rec.check_alignment(&review).unwrap();
        let mut bad = rec.clone();
        bad.tokens.pop();
        bad.probs.pop();
        assert!(matches!(
            bad.check_alignment(&review),
            Err(Error::TokenMismatch { .. })
        ));
    }

    #[test]
    fn vote_examples() {
        let tb = TieBreak::default();
        let v = |ps: &[Polarity]| ps.iter().map(|&p| Vote::Label(p)).collect::<Vec<_>>();
        assert_eq!(
            plurality(&v(&[Positive, Positive, Negative, Neutral]), &tb),
            Vote::Label(Positive)
        );
        assert_eq!(
            plurality(&v(&[Positive, Positive, Negative, Negative]), &tb),
            Vote::Label(Positive)
        );
        assert_eq!(plurality(&v(&[Neutral]), &tb), Vote::Label(Neutral));
        assert_eq!(
            plurality(&v(&[Negative, Neutral]), &tb),
            Vote::Label(Negative)
        );
        assert_eq!(
            plurality(&[Vote::Abstain, Vote::Abstain], &tb),
            Vote::Abstain
        );
        let neutral_first: TieBreak = "neutral,negative,positive".parse().unwrap();
        assert_eq!(
            plurality(&v(&[Positive, Neutral]), &neutral_first),
            Vote::Label(Neutral)
        );
        assert!("positive,positive,neutral".parse::<TieBreak>().is_err());
        assert!("positive,neutral".parse::<TieBreak>().is_err());
    }

    #[test]
    fn majority_over_models() {
        let key = SoeKey {
            review_id: 1,
            start: 0,
            end: 5,
            aspect_term: "hotel".into(),
        };
        let other = SoeKey {
            review_id: 2,
            ..key.clone()
        };
        let recs = vec![
            SoeRecord::from_key("a", &key, Vote::Label(Negative)),
            SoeRecord::from_key("b", &key, Vote::Label(Negative)),
            SoeRecord::from_key("c", &key, Vote::Abstain),
            SoeRecord::from_key("a", &other, Vote::Label(Neutral)),
        ];
        let models = group_soe_records(&recs).unwrap();
        assert_eq!(models.len(), 3);
        let out = majority_vote(&models, &TieBreak::default()).unwrap();
        assert_eq!(out[&key], Vote::Label(Negative));
        assert_eq!(out[&other], Vote::Label(Neutral));
        assert!(majority_vote(&[], &TieBreak::default()).is_err());
        let dup = vec![recs[0].clone(), recs[0].clone()];
        assert!(group_soe_records(&dup).is_err());
    }

    #[test]
    fn soe_record_wire_format() {
        let rec: SoeRecord = serde_json::from_str(
            r#"{"model_id":"m","review_id":2414,"aspect_term":"hotel","start":26,"end":31,"label":"abstain"}"#,
        )
        .unwrap();
        assert_eq!(rec.label, Vote::Abstain);
        assert_eq!(
            serde_json::to_string(&SoeRecord {
                label: Vote::Label(Positive),
                ..rec
            })
            .unwrap(),
            r#"{"model_id":"m","review_id":2414,"aspect_term":"hotel","start":26,"end":31,"label":"positive"}"#
        );
        assert!(serde_json::from_str::<Vote>("\"great\"").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_models() -> impl Strategy<Value = Vec<Vec<[f64; 3]>>> {
            (1usize..6, 1usize..8).prop_flat_map(|(m, t)| {
                prop::collection::vec(
                    prop::collection::vec(
                        (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c)| {
                            let s = a + b + c + 1e-9;
                            [a / s, b / s, c / s]
                        }),
                        t,
                    ),
                    m,
                )
            })
        }

        fn models(rows: &[Vec<[f64; 3]>]) -> Vec<AteModelPrediction> {
            rows.iter()
                .enumerate()
                .map(|(i, probs)| {
                    let mut reviews = BTreeMap::new();
                    reviews.insert(
                        "k".to_string(),
                        ReviewProbs {
                            tokens: (0..probs.len())
                                .map(|j| TokenOffsets {
                                    start: 2 * j,
                                    end: 2 * j + 1,
                                })
                                .collect(),
                            probs: probs.clone(),
                        },
                    );
                    AteModelPrediction {
                        model_id: format!("m{i}"),
                        reviews,
                    }
                })
                .collect()
        }

        proptest! {
            #[test]
            fn median_is_bounded_and_order_free(rows in arb_models()) {
                let forward = median_ensemble(&models(&rows), Exec::Sequential).unwrap();
                let mut rev = rows.clone();
                rev.reverse();
                let backward = median_ensemble(&models(&rev), Exec::Parallel).unwrap();
                prop_assert_eq!(&forward[0].medians, &backward[0].medians);
                prop_assert_eq!(&forward[0].tags, &backward[0].tags);
                prop_assert!(crate::tagging::is_well_formed(&forward[0].tags));
                for (t, med) in forward[0].medians.iter().enumerate() {
                    for l in 0..3 {
                        let lo = rows.iter().map(|m| m[t][l]).fold(f64::INFINITY, f64::min);
                        let hi = rows.iter().map(|m| m[t][l]).fold(f64::NEG_INFINITY, f64::max);
                        prop_assert!(lo <= med[l] && med[l] <= hi);
                    }
                }
            }

            #[test]
            fn identical_models_collapse(rows in arb_models(), k in 1usize..5) {
                let single = median_ensemble(&models(&rows[..1]), Exec::Sequential).unwrap();
                let copies = vec![rows[0].clone(); k];
                let many = median_ensemble(&models(&copies), Exec::Sequential).unwrap();
                prop_assert_eq!(&single[0].tags, &many[0].tags);
            }
        }
    }
}

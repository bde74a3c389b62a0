//! Small models that stand in for the transformer models so the pipeline can
//! be exercised end to end on a laptop: an averaged perceptron BIO tagger and
//! a multinomial naive Bayes polarity classifier.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Polarity, Review};
use crate::ensemble::{AteModelPrediction, AteRecord, SoeKey, SoeModelPrediction, TieBreak, Vote};
use crate::soe::SoeExample;
use crate::tagging::{repair_bio, tokenize, BioTag, TaggedSequence, Token};
use crate::{Error, Exec, Result};

pub const MODEL_VERSION: u32 = 1;

fn features(tokens: &[Token], i: usize, prev: BioTag) -> Vec<String> {
    let word = |j: Option<usize>| match j.and_then(|j| tokens.get(j)) {
        Some(t) => t.text.to_lowercase(),
        None => "<none>".to_string(),
    };
    let w = word(Some(i));
    let chars: Vec<char> = w.chars().collect();
    let mut f = vec![
        "bias".to_string(),
        format!("w={w}"),
        format!("p={}", word(i.checked_sub(1))),
        format!("n={}", word(Some(i + 1))),
        format!("pp={}", word(i.checked_sub(2))),
        format!("t={}", prev.as_str()),
        format!("t+w={}+{w}", prev.as_str()),
    ];
    for k in 1..=3.min(chars.len()) {
        let suffix: String = chars[chars.len() - k..].iter().collect();
        f.push(format!("s{k}={suffix}"));
    }
    if tokens[i]
        .text
        .chars()
        .next()
        .is_some_and(char::is_uppercase)
    {
        f.push("cap".into());
    }
    if !tokens[i].text.chars().any(char::is_alphanumeric) {
        f.push("punct".into());
    }
    f
}

fn softmax(scores: [f64; 3]) -> [f64; 3] {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = scores.map(|s| (s - m).exp());
    let z: f64 = e.iter().sum();
    e.map(|x| x / z)
}

/// Averaged perceptron with greedy left-to-right decoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronTagger {
    pub version: u32,
    pub weights: BTreeMap<String, [f64; 3]>,
}

impl PerceptronTagger {
    fn scores(&self, feats: &[String]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for f in feats {
            if let Some(w) = self.weights.get(f) {
                for k in 0..3 {
                    s[k] += w[k];
                }
            }
        }
        s
    }

    /// Per-token label probabilities (softmax of the perceptron scores) and
    /// the repaired greedy tag sequence.
    pub fn predict(&self, tokens: &[Token]) -> (Vec<[f64; 3]>, Vec<BioTag>) {
        let mut prev = BioTag::O;
        let mut probs = Vec::with_capacity(tokens.len());
        let mut tags = Vec::with_capacity(tokens.len());
        for i in 0..tokens.len() {
            let s = self.scores(&features(tokens, i, prev));
            let tag = BioTag::argmax(&s);
            probs.push(softmax(s));
            tags.push(tag);
            prev = tag;
        }
        (probs, repair_bio(&tags))
    }

    pub fn tag(&self, text: &str) -> TaggedSequence {
        let tokens = tokenize(text);
        let (_, tags) = self.predict(&tokens);
        TaggedSequence { tokens, tags }
    }

    pub fn tag_batch(&self, texts: &[&str], exec: Exec) -> Vec<TaggedSequence> {
        exec.map(texts, |t| self.tag(t))
    }

    /// ATE interchange records for `reviews`, one per review.
    pub fn ate_records(&self, model_id: &str, reviews: &[Review], exec: Exec) -> Vec<AteRecord> {
        exec.map(reviews, |r| {
            let (probs, _) = self.predict(&tokenize(&r.text));
            AteRecord::new(model_id, r, probs)
        })
    }

    pub fn ate_prediction(
        &self,
        model_id: &str,
        reviews: &[Review],
        exec: Exec,
    ) -> Result<AteModelPrediction> {
        let records = self.ate_records(model_id, reviews, exec);
        let mut reviews = BTreeMap::new();
        for rec in &records {
            reviews.insert(rec.review_key.clone(), rec.validate()?);
        }
        Ok(AteModelPrediction {
            model_id: model_id.to_string(),
            reviews,
        })
    }
}

/// Train on gold sequences, visiting them in a seeded shuffled order each
/// epoch. Different seeds give different (but individually reproducible)
/// models.
pub fn train_tagger(seqs: &[TaggedSequence], epochs: usize, seed: u64) -> Result<PerceptronTagger> {
    if epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    if seqs.iter().all(|s| s.is_empty()) {
        return Err(Error::Empty("no training tokens"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: HashMap<String, [f64; 3]> = HashMap::new();
    let mut totals: HashMap<String, [f64; 3]> = HashMap::new();
    let mut stamps: HashMap<String, [u64; 3]> = HashMap::new();
    let mut clock: u64 = 0;
    let mut order: Vec<usize> = (0..seqs.len()).collect();

    let mut bump =
        |f: &str, k: usize, delta: f64, clock: u64, weights: &mut HashMap<String, [f64; 3]>| {
            let w = weights.entry(f.to_string()).or_default();
            let t = totals.entry(f.to_string()).or_default();
            let s = stamps.entry(f.to_string()).or_default();
            t[k] += (clock - s[k]) as f64 * w[k];
            s[k] = clock;
            w[k] += delta;
        };

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let seq = &seqs[si];
            let mut prev = BioTag::O;
            for i in 0..seq.len() {
                clock += 1;
                let feats = features(&seq.tokens, i, prev);
                let mut s = [0.0; 3];
                for f in &feats {
                    if let Some(w) = weights.get(f) {
                        for k in 0..3 {
                            s[k] += w[k];
                        }
                    }
                }
                let guess = BioTag::argmax(&s);
                let gold = seq.tags[i];
                if guess != gold {
                    for f in &feats {
                        bump(f, gold.index(), 1.0, clock, &mut weights);
                        bump(f, guess.index(), -1.0, clock, &mut weights);
                    }
                }
                prev = guess;
            }
        }
    }

    let mut averaged = BTreeMap::new();
    for (f, w) in &weights {
        let t = totals.get(f).copied().unwrap_or_default();
        let s = stamps.get(f).copied().unwrap_or_default();
        let mut avg = [0.0; 3];
        for k in 0..3 {
            avg[k] = (t[k] + (clock - s[k]) as f64 * w[k]) / clock as f64;
        }
        if avg.iter().any(|&x| x != 0.0) {
            averaged.insert(f.clone(), avg);
        }
    }
    Ok(PerceptronTagger {
        version: MODEL_VERSION,
        weights: averaged,
    })
}

fn bow(text: &str) -> impl Iterator<Item = String> + '_ {
    tokenize(text)
        .into_iter()
        .filter(|t| t.text.chars().any(char::is_alphanumeric))
        .map(|t| t.text.to_lowercase())
}

/// Multinomial naive Bayes over lowercased word tokens of the model input,
/// with add-one smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowPolarityModel {
    pub version: u32,
    /// Training examples per class.
    pub class_counts: BTreeMap<Polarity, u64>,
    /// Per word, occurrences in each class indexed by `Polarity as usize`.
    pub word_counts: BTreeMap<String, [u64; 3]>,
    pub tie_break: TieBreak,
}

impl BowPolarityModel {
    /// Log-posterior (up to a constant) of each seen class.
    pub fn log_scores(&self, text: &str) -> BTreeMap<Polarity, f64> {
        let n: u64 = self.class_counts.values().sum();
        let vocab = self.word_counts.len() as f64;
        let mut class_tokens = [0u64; 3];
        for c in self.word_counts.values() {
            for k in 0..3 {
                class_tokens[k] += c[k];
            }
        }
        let words: Vec<String> = bow(text)
            .filter(|w| self.word_counts.contains_key(w))
            .collect();
        self.class_counts
            .iter()
            .map(|(&p, &c)| {
                let k = p as usize;
                let denom = (class_tokens[k] as f64 + vocab).ln();
                let lik: f64 = words
                    .iter()
                    .map(|w| (self.word_counts[w][k] as f64 + 1.0).ln() - denom)
                    .sum();
                (p, (c as f64 / n as f64).ln() + lik)
            })
            .collect()
    }

    pub fn predict(&self, text: &str) -> Polarity {
        let scores = self.log_scores(text);
        let mut best: Option<(Polarity, f64)> = None;
        // tie-break order decides equal scores: earlier labels win
        for &p in &self.tie_break.0 {
            if let Some(&s) = scores.get(&p) {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((p, s));
                }
            }
        }
        best.map(|(p, _)| p)
            .expect("trained model has at least one class")
    }

    pub fn predict_soe(
        &self,
        model_id: &str,
        examples: &[SoeExample],
        exec: Exec,
    ) -> SoeModelPrediction {
        let labels = exec.map(examples, |e| self.predict(&e.input_text));
        SoeModelPrediction {
            model_id: model_id.to_string(),
            votes: examples
                .iter()
                .zip(labels)
                .map(|(e, p)| (soe_key(e), Vote::Label(p)))
                .collect(),
        }
    }
}

pub fn soe_key(e: &SoeExample) -> SoeKey {
    SoeKey {
        review_id: e.review_id,
        start: e.start,
        end: e.end,
        aspect_term: e.aspect_term.clone(),
    }
}

/// Fit on the gold-labelled examples. With `bootstrap_seed`, the model is fit
/// on a seeded resample (with replacement, same size) instead, which is how
/// diverse ensemble members are produced.
pub fn train_soe(examples: &[SoeExample], bootstrap_seed: Option<u64>) -> Result<BowPolarityModel> {
    let labelled: Vec<(&str, Polarity)> = examples
        .iter()
        .filter_map(|e| e.gold.map(|g| (e.input_text.as_str(), g)))
        .collect();
    if labelled.is_empty() {
        return Err(Error::Empty("no labelled SOE examples"));
    }
    let sample: Vec<(&str, Polarity)> = match bootstrap_seed {
        None => labelled,
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..labelled.len())
                .map(|_| labelled[rng.gen_range(0..labelled.len())])
                .collect()
        }
    };
    let mut class_counts = BTreeMap::new();
    let mut word_counts: BTreeMap<String, [u64; 3]> = BTreeMap::new();
    for (text, p) in sample {
        *class_counts.entry(p).or_insert(0) += 1;
        for w in bow(text) {
            word_counts.entry(w).or_default()[p as usize] += 1;
        }
    }
    Ok(BowPolarityModel {
        version: MODEL_VERSION,
        class_counts,
        word_counts,
        tie_break: TieBreak::default(),
    })
}

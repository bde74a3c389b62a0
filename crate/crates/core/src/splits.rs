//! Leakage-free train/test splits over grouped reviews.
//!
//! Reviews are atomic: a review text lands entirely on one side, so no
//! sentence is shared between train and test. Three strategies:
//!
//! * `Random`: seeded shuffle, cut at the train fraction.
//! * `PolarityStratified`: per dominant-polarity stratum, the same cut.
//! * `PolarityAndAspectStratified`: polarity quotas as above, with reviews
//!   placed greedily (most aspects first) on whichever side keeps each
//!   aspect term's train share closest to the train fraction.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Polarity, Review};
use crate::{Error, Result};

const EPS: f64 = 1e-9;

/// Number of most frequent aspects whose train shares are reported.
pub const REPORTED_ASPECTS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitStrategy {
    Random,
    PolarityStratified,
    PolarityAndAspectStratified,
}

impl SplitStrategy {
    pub const ALL: [SplitStrategy; 3] = [
        SplitStrategy::Random,
        SplitStrategy::PolarityStratified,
        SplitStrategy::PolarityAndAspectStratified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitStrategy::Random => "random",
            SplitStrategy::PolarityStratified => "polarity-stratified",
            SplitStrategy::PolarityAndAspectStratified => "polarity-and-aspect-stratified",
        }
    }
}

impl fmt::Display for SplitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "subset1" => Ok(SplitStrategy::Random),
            "polarity" | "polarity-stratified" | "subset2" => Ok(SplitStrategy::PolarityStratified),
            "polarity-aspect" | "polarity-and-aspect-stratified" | "subset3" => {
                Ok(SplitStrategy::PolarityAndAspectStratified)
            }
            other => Err(Error::Config(format!("unknown split strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub strategy: SplitStrategy,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, strategy: SplitStrategy, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            strategy,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideShare {
    pub total: usize,
    pub train: usize,
    pub test: usize,
    pub train_share: f64,
}

impl SideShare {
    fn new(train: usize, test: usize) -> Self {
        let total = train + test;
        SideShare {
            total,
            train,
            test,
            train_share: if total == 0 {
                0.0
            } else {
                train as f64 / total as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub strategy: SplitStrategy,
    pub seed: u64,
    pub train_fraction: f64,
    pub train_reviews: usize,
    pub test_reviews: usize,
    /// Reviews per dominant-polarity stratum.
    pub polarity: BTreeMap<String, SideShare>,
    /// Aspect occurrences for the most frequent aspects.
    pub aspects: BTreeMap<String, SideShare>,
    /// Largest `|train_share - train_fraction|` over `aspects`.
    pub slack: f64,
    /// Mean `|train_share - train_fraction|` over every aspect term.
    pub mean_aspect_deviation: f64,
    /// Strata with fewer than two reviews, assigned wholly to train.
    pub undersized_strata: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<Review>,
    pub test: Vec<Review>,
    pub report: SplitReport,
}

/// Majority polarity over a review's labelled spans; ties go to Positive,
/// then Negative, then Neutral. `None` when no span carries a label.
pub fn dominant_polarity(review: &Review) -> Option<Polarity> {
    let mut counts = [0usize; 3];
    for p in review.spans.iter().filter_map(|s| s.polarity) {
        counts[p as usize] += 1;
    }
    [Polarity::Positive, Polarity::Negative, Polarity::Neutral]
        .into_iter()
        .filter(|p| counts[*p as usize] > 0)
        .fold(None, |best: Option<Polarity>, p| match best {
            Some(b) if counts[b as usize] >= counts[p as usize] => Some(b),
            _ => Some(p),
        })
}

fn stratum_name(p: Option<Polarity>) -> String {
    p.map_or_else(|| "unlabeled".to_string(), |p| p.as_str().to_string())
}

const STRATUM_ORDER: [Option<Polarity>; 4] = [
    Some(Polarity::Positive),
    Some(Polarity::Negative),
    Some(Polarity::Neutral),
    None,
];

/// Train counts per stratum: `floor(f * n)` each, then the gap to
/// `floor(f * total)` handed one by one to the strata with the largest
/// fractional parts. Strata under two reviews go wholly to train.
pub fn train_quotas(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let mut quotas = vec![0; sizes.len()];
    let mut eligible = 0usize;
    let mut remainders = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        if n < 2 {
            quotas[i] = n;
            continue;
        }
        eligible += n;
        let exact = fraction * n as f64;
        let floor = (exact + EPS).floor() as usize;
        quotas[i] = floor.min(n);
        remainders.push((exact - floor as f64, i));
    }
    let target = (fraction * eligible as f64 + EPS).floor() as usize;
    let assigned: usize = sizes
        .iter()
        .zip(&quotas)
        .filter(|(&n, _)| n >= 2)
        .map(|(_, &q)| q)
        .sum();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(target.saturating_sub(assigned)) {
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
        }
    }
    quotas
}

/// Split grouped reviews. Both sides keep the corpus order.
pub fn split(corpus: &[Review], spec: &SplitSpec) -> Result<SplitResult> {
    SplitSpec::new(spec.train_fraction, spec.strategy, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let f = spec.train_fraction;
    let mut in_train = vec![false; corpus.len()];
    let mut undersized = Vec::new();

    let strata: Vec<(Option<Polarity>, Vec<usize>)> = match spec.strategy {
        SplitStrategy::Random => vec![(None, (0..corpus.len()).collect())],
        _ => {
            let mut by: HashMap<Option<Polarity>, Vec<usize>> = HashMap::new();
            for (i, r) in corpus.iter().enumerate() {
                by.entry(dominant_polarity(r)).or_default().push(i);
            }
            STRATUM_ORDER
                .iter()
                .filter_map(|p| by.remove(p).map(|v| (*p, v)))
                .collect()
        }
    };
    let sizes: Vec<usize> = strata.iter().map(|(_, v)| v.len()).collect();
    let quotas = train_quotas(&sizes, f);
    for ((p, _), &n) in strata.iter().zip(&sizes) {
        if n < 2 && spec.strategy != SplitStrategy::Random {
            log::warn!(
                "stratum {} has {n} review(s); assigning it to train",
                stratum_name(*p)
            );
            undersized.push(stratum_name(*p));
        }
    }

    match spec.strategy {
        SplitStrategy::Random | SplitStrategy::PolarityStratified => {
            for ((_, members), &q) in strata.iter().zip(&quotas) {
                let mut order = members.clone();
                order.shuffle(&mut rng);
                for &i in &order[..q] {
                    in_train[i] = true;
                }
            }
        }
        SplitStrategy::PolarityAndAspectStratified => {
            greedy_aspect_assign(corpus, &strata, &quotas, f, &mut rng, &mut in_train);
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, &t) in corpus.iter().zip(&in_train) {
        if t {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    let report = build_report(corpus, &in_train, spec, undersized);
    Ok(SplitResult {
        train,
        test,
        report,
    })
}

fn aspect_counts(review: &Review) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for s in &review.spans {
        *m.entry(s.key()).or_default() += 1;
    }
    m
}

fn greedy_aspect_assign(
    corpus: &[Review],
    strata: &[(Option<Polarity>, Vec<usize>)],
    quotas: &[usize],
    f: f64,
    rng: &mut ChaCha8Rng,
    in_train: &mut [bool],
) {
    let per_review: Vec<BTreeMap<String, usize>> = corpus.iter().map(aspect_counts).collect();
    let mut totals: HashMap<&str, usize> = HashMap::new();
    for m in &per_review {
        for (a, &c) in m {
            *totals.entry(a.as_str()).or_default() += c;
        }
    }

    // (review, stratum) in processing order: most aspects first, seeded
    // shuffle breaking ties.
    let mut order: Vec<(usize, usize)> = strata
        .iter()
        .enumerate()
        .flat_map(|(s, (_, members))| members.iter().map(move |&i| (i, s)))
        .collect();
    order.shuffle(rng);
    order.sort_by_key(|&(i, _)| std::cmp::Reverse(corpus[i].spans.len()));

    let mut train_left: Vec<usize> = quotas.to_vec();
    let mut test_left: Vec<usize> = strata
        .iter()
        .zip(quotas)
        .map(|((_, m), &q)| m.len() - q)
        .collect();
    let mut train_n: HashMap<&str, usize> = HashMap::new();
    let mut test_n: HashMap<&str, usize> = HashMap::new();

    for (i, s) in order {
        let to_train = if test_left[s] == 0 {
            true
        } else if train_left[s] == 0 {
            false
        } else {
            let cost = |extra_train: bool| -> f64 {
                per_review[i]
                    .iter()
                    .map(|(a, &c)| {
                        let mut tr = *train_n.get(a.as_str()).unwrap_or(&0);
                        let mut te = *test_n.get(a.as_str()).unwrap_or(&0);
                        if extra_train {
                            tr += c;
                        } else {
                            te += c;
                        }
                        let dev = tr as f64 - f * (tr + te) as f64;
                        dev.abs() / totals[a.as_str()] as f64
                    })
                    .sum()
            };
            let (ct, cs) = (cost(true), cost(false));
            if (ct - cs).abs() > EPS {
                ct < cs
            } else {
                train_left[s] as f64 / f >= test_left[s] as f64 / (1.0 - f)
            }
        };
        let side = if to_train { &mut train_n } else { &mut test_n };
        for (a, &c) in &per_review[i] {
            let key = totals.get_key_value(a.as_str()).map(|(k, _)| *k).unwrap();
            *side.entry(key).or_default() += c;
        }
        if to_train {
            train_left[s] -= 1;
            in_train[i] = true;
        } else {
            test_left[s] -= 1;
        }
    }
}

fn build_report(
    corpus: &[Review],
    in_train: &[bool],
    spec: &SplitSpec,
    undersized_strata: Vec<String>,
) -> SplitReport {
    let f = spec.train_fraction;
    let mut pol: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut asp: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (r, &t) in corpus.iter().zip(in_train) {
        let e = pol.entry(stratum_name(dominant_polarity(r))).or_default();
        if t {
            e.0 += 1
        } else {
            e.1 += 1
        }
        for (a, c) in aspect_counts(r) {
            let e = asp.entry(a).or_default();
            if t {
                e.0 += c
            } else {
                e.1 += c
            }
        }
    }
    let mean_aspect_deviation = if asp.is_empty() {
        0.0
    } else {
        asp.values()
            .map(|&(tr, te)| (SideShare::new(tr, te).train_share - f).abs())
            .sum::<f64>()
            / asp.len() as f64
    };
    let mut ranked: Vec<(String, (usize, usize))> = asp.into_iter().collect();
    ranked.sort_by(|a, b| {
        (b.1 .0 + b.1 .1)
            .cmp(&(a.1 .0 + a.1 .1))
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(REPORTED_ASPECTS);
    let aspects: BTreeMap<String, SideShare> = ranked
        .into_iter()
        .map(|(a, (tr, te))| (a, SideShare::new(tr, te)))
        .collect();
    let slack = aspects
        .values()
        .map(|s| (s.train_share - f).abs())
        .fold(0.0, f64::max);
    let train_reviews = in_train.iter().filter(|&&t| t).count();
    SplitReport {
        strategy: spec.strategy,
        seed: spec.seed,
        train_fraction: f,
        train_reviews,
        test_reviews: corpus.len() - train_reviews,
        polarity: pol
            .into_iter()
            .map(|(k, (tr, te))| (k, SideShare::new(tr, te)))
            .collect(),
        aspects,
        slack,
        mean_aspect_deviation,
        undersized_strata,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AspectSpan;
    use std::collections::HashSet;

    fn review(id: i64, polarities: &[Polarity]) -> Review {
        let mut text = String::new();
        let mut spans = Vec::new();
        for (i, p) in polarities.iter().enumerate() {
            let start = text.chars().count();
            let term = format!("a{}", i % 3);
            text.push_str(&term);
            text.push(' ');
            spans.push(AspectSpan::new(term, start, start + 2, Some(*p)).unwrap());
        }
        text.push_str(&format!("r{id}"));
        Review::new(text, vec![id], spans)
    }

    #[test]
    fn random_ten_reviews() {
        let corpus: Vec<Review> = (0..10).map(|i| review(i, &[Polarity::Positive])).collect();
        let spec = SplitSpec::new(0.7, SplitStrategy::Random, 42).unwrap();
        let a = split(&corpus, &spec).unwrap();
        assert_eq!((a.train.len(), a.test.len()), (7, 3));
        let train: HashSet<_> = a.train.iter().map(|r| &r.text).collect();
        assert!(a.test.iter().all(|r| !train.contains(&r.text)));
        assert_eq!(split(&corpus, &spec).unwrap(), a);
        let other = split(&corpus, &SplitSpec { seed: 43, ..spec }).unwrap();
        assert_eq!(other.train.len(), 7);
    }

    #[test]
    fn polarity_stratified_per_stratum_rounding() {
        let mut corpus: Vec<Review> = (0..6).map(|i| review(i, &[Polarity::Positive])).collect();
        corpus.extend((6..10).map(|i| review(i, &[Polarity::Negative, Polarity::Negative])));
        let spec = SplitSpec::new(0.5, SplitStrategy::PolarityStratified, 1).unwrap();
        let res = split(&corpus, &spec).unwrap();
        let count = |p| {
            res.train
                .iter()
                .filter(|r| dominant_polarity(r) == Some(p))
                .count()
        };
        assert_eq!(count(Polarity::Positive), 3);
        assert_eq!(count(Polarity::Negative), 2);
        assert_eq!(res.report.polarity["positive"].train, 3);
        assert_eq!(res.report.polarity["negative"].test, 2);
    }

    #[test]
    fn dominant_polarity_ties() {
        use Polarity::*;
        assert_eq!(
            dominant_polarity(&review(1, &[Negative, Positive])),
            Some(Positive)
        );
        assert_eq!(
            dominant_polarity(&review(1, &[Negative, Neutral])),
            Some(Negative)
        );
        assert_eq!(
            dominant_polarity(&review(1, &[Neutral, Neutral, Positive])),
            Some(Neutral)
        );
        assert_eq!(dominant_polarity(&Review::new("x", vec![1], vec![])), None);
    }

    #[test]
    fn quotas_use_largest_remainder() {
        assert_eq!(train_quotas(&[10], 0.7), vec![7]);
        assert_eq!(train_quotas(&[6, 4], 0.5), vec![3, 2]);
        // floors 3 + 3 = 6, target floor(0.7 * 10) = 7: the larger
        // remainder (0.5 vs 0.5, tie -> first) takes it
        assert_eq!(train_quotas(&[5, 5], 0.7), vec![4, 3]);
        assert_eq!(train_quotas(&[1, 4], 0.5), vec![1, 2]);
    }

    #[test]
    fn undersized_stratum_goes_to_train() {
        let mut corpus: Vec<Review> = (0..5).map(|i| review(i, &[Polarity::Positive])).collect();
        corpus.push(review(9, &[Polarity::Neutral]));
        for strategy in [
            SplitStrategy::PolarityStratified,
            SplitStrategy::PolarityAndAspectStratified,
        ] {
            let res = split(&corpus, &SplitSpec::new(0.7, strategy, 3).unwrap()).unwrap();
            assert!(res.train.iter().any(|r| r.source_ids == vec![9]));
            assert_eq!(res.report.undersized_strata, vec!["neutral"]);
        }
    }

    #[test]
    fn review_with_many_rows_is_atomic() {
        let mut r = review(
            1,
            &[Polarity::Positive, Polarity::Negative, Polarity::Neutral],
        );
        r.source_ids = vec![1, 2, 3];
        let mut corpus = vec![r];
        corpus.extend((2..8).map(|i| review(i * 10, &[Polarity::Positive])));
        for strategy in SplitStrategy::ALL {
            let res = split(&corpus, &SplitSpec::new(0.7, strategy, 5).unwrap()).unwrap();
            let sides: Vec<_> = res
                .train
                .iter()
                .chain(&res.test)
                .filter(|r| r.source_ids.contains(&2))
                .collect();
            assert_eq!(sides.len(), 1);
        }
    }

    #[test]
    fn aspect_stratified_balances_aspects() {
        // 40 reviews; aspects "piscina" and "quarto" each on half the reviews
        let corpus: Vec<Review> = (0..40)
            .map(|i| {
                let term = if i % 2 == 0 { "piscina" } else { "quarto" };
                let text = format!("{term} r{i}");
                Review::new(
                    text,
                    vec![i],
                    vec![AspectSpan::new(term, 0, term.len(), Some(Polarity::Positive)).unwrap()],
                )
            })
            .collect();
        let spec = SplitSpec::new(0.7, SplitStrategy::PolarityAndAspectStratified, 9).unwrap();
        let res = split(&corpus, &spec).unwrap();
        assert_eq!(res.train.len(), 28);
        assert!(res.report.slack <= 0.05 + 1e-12, "{:?}", res.report);
    }

    #[test]
    fn bad_fraction_rejected() {
        assert!(SplitSpec::new(1.0, SplitStrategy::Random, 0).is_err());
        assert!(SplitSpec::new(0.0, SplitStrategy::Random, 0).is_err());
        assert!(SplitSpec::new(f64::NAN, SplitStrategy::Random, 0).is_err());
    }

    #[test]
    fn strategy_names() {
        for s in SplitStrategy::ALL {
            assert_eq!(s.as_str().parse::<SplitStrategy>().unwrap(), s);
        }
        assert_eq!(
            "subset3".parse::<SplitStrategy>().unwrap(),
            SplitStrategy::PolarityAndAspectStratified
        );
    }
}

//! Target-swap augmentation.
//!
//! An aspect term is replaced by another term of the same category, shifting
//! the offsets of every later span. Categories come from a user-supplied map
//! or are inferred by clustering aspect context vectors: counts of the
//! non-stop-words within a token window around each occurrence, L2
//! normalized, grouped with seeded k-means.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AspectSpan, Review};
use crate::tagging::tokenize;
use crate::text::{char_len, char_splice};
use crate::{io, Error, Exec, Result};

/// Portuguese and English function words dropped from context windows.
pub const STOP_WORDS: &[&str] = &[
    "a", "à", "ao", "aos", "as", "às", "com", "como", "da", "das", "de", "do", "dos", "e", "é",
    "ela", "ele", "em", "era", "essa", "esse", "esta", "está", "estava", "este", "eu", "foi", "há",
    "isso", "já", "lhe", "mais", "mas", "me", "mesmo", "muito", "na", "nas", "nem", "no", "nos",
    "nós", "num", "numa", "o", "os", "ou", "para", "pela", "pelo", "por", "que", "se", "sem",
    "ser", "seu", "sua", "são", "também", "tem", "um", "uma", "the", "and", "of", "to", "in", "is",
    "was", "it", "for", "with",
];

/// Partition of the aspect vocabulary into categories. Terms are stored
/// lowercased and trimmed; each belongs to exactly one category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<String, Vec<String>>",
    into = "BTreeMap<String, Vec<String>>"
)]
pub struct AspectCategoryMap {
    categories: BTreeMap<String, BTreeSet<String>>,
    index: HashMap<String, String>,
}

impl AspectCategoryMap {
    pub fn new(categories: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut cats = BTreeMap::new();
        for (id, terms) in categories {
            let set: BTreeSet<String> = terms.iter().map(|t| t.trim().to_lowercase()).collect();
            for t in &set {
                if t.is_empty() {
                    return Err(Error::Config(format!("category {id} holds an empty term")));
                }
                if let Some(other) = index.insert(t.clone(), id.clone()) {
                    return Err(Error::Config(format!(
                        "term {t:?} is in both category {other} and {id}"
                    )));
                }
            }
            cats.insert(id, set);
        }
        Ok(AspectCategoryMap {
            categories: cats,
            index,
        })
    }

    /// Load `{category_id: [terms...]}`; `#` lines are ignored.
    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        io::read_json(r)
    }

    pub fn category_of(&self, term: &str) -> Option<&str> {
        self.index
            .get(&term.trim().to_lowercase())
            .map(String::as_str)
    }

    pub fn terms(&self, category: &str) -> Option<&BTreeSet<String>> {
        self.categories.get(category)
    }

    pub fn categories(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

impl TryFrom<BTreeMap<String, Vec<String>>> for AspectCategoryMap {
    type Error = Error;

    fn try_from(m: BTreeMap<String, Vec<String>>) -> Result<Self> {
        AspectCategoryMap::new(m)
    }
}

impl From<AspectCategoryMap> for BTreeMap<String, Vec<String>> {
    fn from(m: AspectCategoryMap) -> Self {
        m.categories
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryConfig {
    pub k: usize,
    pub window: usize,
    pub seed: u64,
    /// Independent k-means++ restarts; the lowest-inertia run wins.
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for CategoryConfig {
    fn default() -> Self {
        CategoryConfig {
            k: 10,
            window: 5,
            seed: 0,
            restarts: 10,
            max_iter: 100,
        }
    }
}

/// Per-aspect context vectors, L2 normalized. Returns the aspect keys
/// (sorted) and one row per key over a sorted context vocabulary.
pub fn context_vectors(corpus: &[Review], window: usize) -> (Vec<String>, Vec<Vec<f64>>) {
    let stop: BTreeSet<&str> = STOP_WORDS.iter().copied().collect();
    let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();

    for review in corpus {
        let words: Vec<_> = tokenize(&review.text)
            .into_iter()
            .filter(|t| t.text.chars().any(char::is_alphanumeric))
            .collect();
        for span in &review.spans {
            let first = words.partition_point(|t| t.end <= span.start);
            let last = words.partition_point(|t| t.start < span.end).max(first);
            let row = counts.entry(span.key()).or_default();
            let before = first.saturating_sub(window)..first;
            let after = last..(last + window).min(words.len());
            for t in before.chain(after).map(|i| &words[i]) {
                let w = t.text.to_lowercase();
                if !stop.contains(w.as_str()) {
                    *row.entry(w).or_default() += 1.0;
                }
            }
        }
    }

    let vocab: BTreeMap<&str, usize> = counts
        .values()
        .flat_map(|m| m.keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let mut keys = Vec::with_capacity(counts.len());
    let mut rows = Vec::with_capacity(counts.len());
    for (aspect, m) in &counts {
        let mut v = vec![0.0; vocab.len()];
        for (w, c) in m {
            v[vocab[w.as_str()]] = *c;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        keys.push(aspect.clone());
        rows.push(v);
    }
    (keys, rows)
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

/// Seeded k-means (k-means++ seeding, Lloyd iterations) keeping the best of
/// `restarts` runs. Every cluster of the result is non-empty.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::Config(format!(
            "k = {k} exceeds the {} points to cluster",
            points.len()
        )));
    }
    let mut best: Option<KMeansFit> = None;
    for run in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        let fit = lloyd(points, k, &mut rng, max_iter);
        if best
            .as_ref()
            .is_none_or(|b| fit.inertia < b.inertia - 1e-12)
        {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one run"))
}

fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng, max_iter: usize) -> KMeansFit {
    let n = points.len();
    let dim = points[0].len();

    // k-means++ seeding
    let mut chosen: Vec<usize> = vec![rng.gen_range(0..n)];
    while chosen.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                chosen
                    .iter()
                    .map(|&c| sq_dist(p, &points[c]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            if chosen.contains(&pick) {
                (0..n).find(|i| !chosen.contains(i)).unwrap()
            } else {
                pick
            }
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(next);
    }
    let mut centers: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
    let mut assignment = vec![usize::MAX; n];

    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = nearest(p, &centers);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        fill_empty_clusters(points, &centers, &mut assignment, k);
        centers = centroids(points, &assignment, k, dim);
        if !changed {
            break;
        }
    }
    let inertia = points
        .iter()
        .zip(&assignment)
        .map(|(p, &c)| sq_dist(p, &centers[c]))
        .sum();
    KMeansFit {
        assignment,
        inertia,
    }
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn centroids(points: &[Vec<f64>], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        sizes[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&sizes) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    sums
}

/// Move the worst-fitting point of a multi-member cluster into each empty
/// cluster.
fn fill_empty_clusters(
    points: &[Vec<f64>],
    centers: &[Vec<f64>],
    assignment: &mut [usize],
    k: usize,
) {
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignment.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .max_by(|&a, &b| {
                let da = sq_dist(&points[a], &centers[assignment[a]]);
                let db = sq_dist(&points[b], &centers[assignment[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("k <= n leaves a multi-member cluster");
        assignment[donor] = empty;
    }
}

/// Infer aspect categories from a corpus. Category ids are `"0"`, `"1"`, ...
/// ordered by each category's alphabetically first term.
pub fn infer_categories(corpus: &[Review], cfg: &CategoryConfig) -> Result<AspectCategoryMap> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus has no reviews"));
    }
    let (keys, rows) = context_vectors(corpus, cfg.window);
    if keys.is_empty() {
        return Err(Error::Empty("corpus has no aspect spans"));
    }
    if cfg.k > keys.len() {
        return Err(Error::Config(format!(
            "k = {} exceeds the {} unique aspects",
            cfg.k,
            keys.len()
        )));
    }
    let fit = kmeans(&rows, cfg.k, cfg.seed, cfg.restarts, cfg.max_iter)?;
    Ok(categories_from_assignment(&keys, &fit.assignment))
}

pub fn categories_from_assignment(keys: &[String], assignment: &[usize]) -> AspectCategoryMap {
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (k, &c) in keys.iter().zip(assignment) {
        groups.entry(c).or_default().push(k.clone());
    }
    let mut ordered: Vec<Vec<String>> = groups.into_values().collect();
    for g in &mut ordered {
        g.sort();
    }
    ordered.sort();
    let map = ordered
        .into_iter()
        .enumerate()
        .map(|(i, g)| (i.to_string(), g))
        .collect();
    AspectCategoryMap::new(map).expect("assignment is a partition")
}

/// One swapped copy of a review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedExample {
    pub base_review_id: i64,
    /// The span as it appeared in the base review.
    pub swapped_span: AspectSpan,
    pub replacement_term: String,
    pub new_text: String,
    /// All spans of the new text, shifted, the swapped one carrying the
    /// replacement term and the original polarity.
    pub spans: Vec<AspectSpan>,
}

impl AugmentedExample {
    pub fn to_review(&self) -> Review {
        Review::new(
            self.new_text.clone(),
            vec![self.base_review_id],
            self.spans.clone(),
        )
    }
}

/// Swap span `idx` of `review` for `replacement`.
pub fn swap_span(review: &Review, idx: usize, replacement: &str) -> Result<AugmentedExample> {
    let span = review.spans.get(idx).ok_or_else(|| {
        Error::Config(format!("review {} has no span {idx}", review.primary_id()))
    })?;
    let new_text =
        char_splice(&review.text, span.start, span.end, replacement).ok_or_else(|| {
            Error::Validation {
                id: review.primary_id(),
                message: format!("span {span} outside text"),
            }
        })?;
    let new_len = char_len(replacement);
    let delta = new_len as i64 - span.len() as i64;
    let spans = review
        .spans
        .iter()
        .enumerate()
        .map(|(j, s)| {
            if j == idx {
                AspectSpan {
                    term: replacement.to_string(),
                    start: s.start,
                    end: s.start + new_len,
                    polarity: s.polarity,
                }
            } else if s.start >= span.end {
                AspectSpan {
                    start: (s.start as i64 + delta) as usize,
                    end: (s.end as i64 + delta) as usize,
                    ..s.clone()
                }
            } else {
                s.clone()
            }
        })
        .collect();
    Ok(AugmentedExample {
        base_review_id: review.primary_id(),
        swapped_span: span.clone(),
        replacement_term: replacement.to_string(),
        new_text,
        spans,
    })
}

/// Emit up to `per_example` swapped variants for every (review, span) pair.
/// Replacements are drawn without replacement from the span's category
/// minus the original term. Review `i` draws from the ChaCha stream `i` of
/// `seed`, so the output is independent of `exec`.
pub fn target_swap(
    corpus: &[Review],
    map: &AspectCategoryMap,
    per_example: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<AugmentedExample>> {
    if per_example == 0 {
        return Ok(Vec::new());
    }
    let per_review = exec.map_indexed(corpus, |i, review| -> Result<Vec<AugmentedExample>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut out = Vec::new();
        for (j, span) in review.spans.iter().enumerate() {
            let key = span.key();
            let Some(cat) = map.category_of(&key) else {
                log::warn!("aspect {:?} has no category; skipping", span.term);
                continue;
            };
            let candidates: Vec<&String> = map
                .terms(cat)
                .into_iter()
                .flatten()
                .filter(|t| **t != key)
                .collect();
            if candidates.is_empty() {
                log::debug!("aspect {:?} is alone in category {cat}", span.term);
                continue;
            }
            for replacement in candidates.choose_multiple(&mut rng, per_example) {
                out.push(swap_span(review, j, replacement)?);
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for chunk in per_review {
        all.extend(chunk?);
    }
    Ok(all)
}

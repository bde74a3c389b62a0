//! Row-per-aspect dataset ingestion, grouping into reviews, statistics.
//!
//! Input files carry one row per annotated aspect:
//! `id, review, polarity, aspect, start_position, end_position`. Offsets are
//! 0-based char offsets with an exclusive end (`review[26..31] == "hotel"`).
//! Rows sharing the same review text are joined into one [`Review`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::tagging::tokenize;
use crate::text::{char_len, char_slice, normalized_eq};
use crate::{io, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Negative, Polarity::Neutral, Polarity::Positive];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Positive => "positive",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "negative" | "neg" => Ok(Polarity::Negative),
            "neutral" | "neu" => Ok(Polarity::Neutral),
            "positive" | "pos" => Ok(Polarity::Positive),
            other => Err(Error::Config(format!("unknown polarity {other:?}"))),
        }
    }
}

/// Integer codes used for polarity in delimited files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityCodes {
    pub negative: i64,
    pub neutral: i64,
    pub positive: i64,
}

impl Default for PolarityCodes {
    fn default() -> Self {
        PolarityCodes {
            negative: -1,
            neutral: 0,
            positive: 1,
        }
    }
}

impl PolarityCodes {
    pub fn new(negative: i64, neutral: i64, positive: i64) -> Result<Self> {
        if negative == neutral || neutral == positive || negative == positive {
            return Err(Error::Config(format!(
                "polarity codes must be distinct, got {negative},{neutral},{positive}"
            )));
        }
        Ok(PolarityCodes {
            negative,
            neutral,
            positive,
        })
    }

    pub fn decode(&self, code: i64) -> Option<Polarity> {
        if code == self.negative {
            Some(Polarity::Negative)
        } else if code == self.neutral {
            Some(Polarity::Neutral)
        } else if code == self.positive {
            Some(Polarity::Positive)
        } else {
            None
        }
    }

    pub fn encode(&self, p: Polarity) -> i64 {
        match p {
            Polarity::Negative => self.negative,
            Polarity::Neutral => self.neutral,
            Polarity::Positive => self.positive,
        }
    }
}

/// Parses `"neg,neu,pos"`, e.g. `"-1,0,1"`.
impl FromStr for PolarityCodes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("polarity codes {s:?}: {e}")))?;
        match parts[..] {
            [n, z, p] => PolarityCodes::new(n, z, p),
            _ => Err(Error::Config(format!(
                "polarity codes need three values (negative,neutral,positive), got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnNames {
    pub id: String,
    pub review: String,
    pub polarity: String,
    pub aspect: String,
    pub start: String,
    pub end: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        ColumnNames {
            id: "id".into(),
            review: "review".into(),
            polarity: "polarity".into(),
            aspect: "aspect".into(),
            start: "start_position".into(),
            end: "end_position".into(),
        }
    }
}

/// What to do with rows whose offsets or aspect text fail validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvalidRowPolicy {
    /// Fail the whole file on the first invalid row.
    #[default]
    Reject,
    /// Drop the row, log it and record it in [`ParsedRows::skipped`].
    Skip,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub delimiter: u8,
    /// Honour `"` quoting. Off by default for tab-separated input, where
    /// review text commonly contains bare quotes.
    pub quoting: bool,
    pub columns: ColumnNames,
    pub codes: PolarityCodes,
    /// The file stores inclusive end offsets; they are converted on read.
    pub end_inclusive: bool,
    pub invalid_rows: InvalidRowPolicy,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig::tsv()
    }
}

impl SchemaConfig {
    pub fn tsv() -> Self {
        SchemaConfig {
            delimiter: b'\t',
            quoting: false,
            columns: ColumnNames::default(),
            codes: PolarityCodes::default(),
            end_inclusive: false,
            invalid_rows: InvalidRowPolicy::Reject,
        }
    }

    pub fn csv() -> Self {
        SchemaConfig {
            delimiter: b',',
            quoting: true,
            ..SchemaConfig::tsv()
        }
    }
}

/// One line of the input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRow {
    pub id: i64,
    pub review: String,
    pub polarity: Option<Polarity>,
    pub aspect: String,
    pub start_pos: usize,
    pub end_pos: usize,
}

impl RawRow {
    /// Checks `start < end <= len(review)` and that the slice matches the
    /// aspect under [`normalized_eq`].
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::Validation {
            id: self.id,
            message,
        };
        if self.aspect.trim().is_empty() {
            return Err(invalid("empty aspect term".into()));
        }
        if self.start_pos >= self.end_pos {
            return Err(invalid(format!(
                "start {} must be below end {}",
                self.start_pos, self.end_pos
            )));
        }
        let len = char_len(&self.review);
        if self.end_pos > len {
            return Err(invalid(format!(
                "end {} beyond review length {len}",
                self.end_pos
            )));
        }
        let slice = char_slice(&self.review, self.start_pos, self.end_pos).unwrap_or_default();
        if !normalized_eq(slice, &self.aspect) {
            return Err(invalid(format!(
                "review[{}..{}] is {slice:?}, expected {:?}",
                self.start_pos, self.end_pos, self.aspect
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub row: usize,
    pub id: i64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRows {
    pub rows: Vec<RawRow>,
    pub skipped: Vec<RowIssue>,
}

/// Parse a header-bearing delimited stream into validated rows.
///
/// Structural problems (missing column, non-integer id/offset, unknown
/// polarity code) always fail with the row number. Offset/text mismatches
/// follow `cfg.invalid_rows`.
pub fn parse_rows<R: Read>(input: R, cfg: &SchemaConfig) -> Result<ParsedRows> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter)
        .quoting(cfg.quoting)
        .has_headers(true)
        .flexible(true)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::Parse {
                row: 1,
                message: format!("missing column {name:?} in header"),
            })
    };
    let c = &cfg.columns;
    let (ci, cr, cp, ca, cs, ce) = (
        col(&c.id)?,
        col(&c.review)?,
        col(&c.polarity)?,
        col(&c.aspect)?,
        col(&c.start)?,
        col(&c.end)?,
    );

    let mut out = ParsedRows::default();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(idx + 2, |p| p.line() as usize);
        let field = |i: usize, name: &str| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Parse {
                row,
                message: format!("missing field {name:?}"),
            })
        };
        let int = |i: usize, name: &str| -> Result<i64> {
            let raw = field(i, name)?;
            raw.trim().parse::<i64>().map_err(|_| Error::Parse {
                row,
                message: format!("{name} {raw:?} is not an integer"),
            })
        };
        let offset = |i: usize, name: &str| -> Result<usize> {
            let v = int(i, name)?;
            usize::try_from(v).map_err(|_| Error::Parse {
                row,
                message: format!("{name} {v} is negative"),
            })
        };

        let id = int(ci, &c.id)?;
        let review = field(cr, &c.review)?.to_string();
        let polarity = match field(cp, &c.polarity)?.trim() {
            "" => None,
            raw => {
                let code = raw.parse::<i64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("polarity {raw:?} is not an integer"),
                })?;
                Some(cfg.codes.decode(code).ok_or_else(|| Error::Parse {
                    row,
                    message: format!("unknown polarity code {code}"),
                })?)
            }
        };
        let aspect = field(ca, &c.aspect)?.to_string();
        let start_pos = offset(cs, &c.start)?;
        let mut end_pos = offset(ce, &c.end)?;
        if cfg.end_inclusive {
            end_pos += 1;
        }
        let raw = RawRow {
            id,
            review,
            polarity,
            aspect,
            start_pos,
            end_pos,
        };
        match raw.validate() {
            Ok(()) => out.rows.push(raw),
            Err(e) if cfg.invalid_rows == InvalidRowPolicy::Skip => {
                log::warn!("skipping row {row}: {e}");
                out.skipped.push(RowIssue {
                    row,
                    id,
                    message: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// An annotated aspect term inside a review.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AspectSpan {
    pub term: String,
    pub start: usize,
    pub end: usize,
    pub polarity: Option<Polarity>,
}

impl AspectSpan {
    pub fn new(
        term: impl Into<String>,
        start: usize,
        end: usize,
        polarity: Option<Polarity>,
    ) -> Result<Self> {
        let span = AspectSpan {
            term: term.into(),
            start,
            end,
            polarity,
        };
        span.check_shape()?;
        Ok(span)
    }

    fn check_shape(&self) -> Result<()> {
        if self.term.trim().is_empty() {
            return Err(Error::Config("aspect term must be non-empty".into()));
        }
        if self.start >= self.end {
            return Err(Error::Config(format!(
                "aspect {:?}: start {} must be below end {}",
                self.term, self.start, self.end
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &AspectSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Lowercased, trimmed term used as the aspect's identity in statistics,
    /// stratification and category maps.
    pub fn key(&self) -> String {
        self.term.trim().to_lowercase()
    }
}

impl fmt::Display for AspectSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@({},{})", self.term, self.start, self.end)
    }
}

/// One distinct review text with all its aspect spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub text: String,
    pub source_ids: Vec<i64>,
    pub spans: Vec<AspectSpan>,
}

impl Review {
    pub fn new(text: impl Into<String>, source_ids: Vec<i64>, spans: Vec<AspectSpan>) -> Self {
        Review {
            text: text.into(),
            source_ids,
            spans,
        }
    }

    /// Identifier used for SOE examples: the first source row id.
    pub fn primary_id(&self) -> i64 {
        self.source_ids.first().copied().unwrap_or_default()
    }

    /// Stable join key across prediction files: SHA-256 of the text, hex.
    pub fn key(&self) -> String {
        review_key(&self.text)
    }

    /// Checks sorted, non-overlapping spans whose slices match their terms.
    pub fn validate(&self) -> Result<()> {
        let id = self.primary_id();
        let len = char_len(&self.text);
        for (i, span) in self.spans.iter().enumerate() {
            span.check_shape().map_err(|e| Error::Validation {
                id,
                message: e.to_string(),
            })?;
            if span.end > len {
                return Err(Error::Validation {
                    id,
                    message: format!("span {span} beyond text length {len}"),
                });
            }
            let slice = char_slice(&self.text, span.start, span.end).unwrap_or_default();
            if !normalized_eq(slice, &span.term) {
                return Err(Error::Validation {
                    id,
                    message: format!("span {span} covers {slice:?}"),
                });
            }
            if let Some(prev) = i.checked_sub(1).map(|j| &self.spans[j]) {
                if prev.start > span.start {
                    return Err(Error::Validation {
                        id,
                        message: format!("spans not sorted: {prev} before {span}"),
                    });
                }
                if prev.overlaps(span) {
                    return Err(Error::Overlap {
                        ids: self.source_ids.clone(),
                        first: prev.to_string(),
                        second: span.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn review_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapPolicy {
    #[default]
    Reject,
    /// Keep the longer of two overlapping spans (the earlier one on ties).
    KeepLonger,
}

/// Join rows sharing the same review text into reviews, in order of first
/// appearance. Exact duplicate spans collapse to one; a duplicate with a
/// different polarity keeps the first and logs a warning.
pub fn group_reviews(rows: &[RawRow], overlaps: OverlapPolicy) -> Result<Vec<Review>> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut reviews: Vec<Review> = Vec::new();
    let mut seen: Vec<HashMap<(usize, usize, String), Option<Polarity>>> = Vec::new();

    for row in rows {
        let slot = *index.entry(row.review.as_str()).or_insert_with(|| {
            reviews.push(Review::new(row.review.clone(), Vec::new(), Vec::new()));
            seen.push(HashMap::new());
            reviews.len() - 1
        });
        let review = &mut reviews[slot];
        review.source_ids.push(row.id);

        let term = row.aspect.trim().to_string();
        let dedup_key = (row.start_pos, row.end_pos, term.clone());
        if let Some(prev) = seen[slot].get(&dedup_key) {
            if *prev != row.polarity {
                log::warn!(
                    "row id {}: duplicate span {term:?}@({},{}) with conflicting polarity, keeping first",
                    row.id,
                    row.start_pos,
                    row.end_pos
                );
            }
            continue;
        }
        seen[slot].insert(dedup_key, row.polarity);
        review.spans.push(AspectSpan {
            term,
            start: row.start_pos,
            end: row.end_pos,
            polarity: row.polarity,
        });
    }

    for review in &mut reviews {
        review.spans.sort_by_key(|s| (s.start, s.end));
        resolve_overlaps(review, overlaps)?;
    }
    Ok(reviews)
}

fn resolve_overlaps(review: &mut Review, policy: OverlapPolicy) -> Result<()> {
    let mut kept: Vec<AspectSpan> = Vec::with_capacity(review.spans.len());
    for span in review.spans.drain(..) {
        match kept.last_mut() {
            Some(last) if last.overlaps(&span) => match policy {
                OverlapPolicy::Reject => {
                    return Err(Error::Overlap {
                        ids: review.source_ids.clone(),
                        first: last.to_string(),
                        second: span.to_string(),
                    })
                }
                OverlapPolicy::KeepLonger => {
                    log::warn!("overlapping spans {last} and {span}, keeping the longer");
                    if span.len() > last.len() {
                        *last = span;
                    }
                }
            },
            _ => kept.push(span),
        }
    }
    review.spans = kept;
    Ok(())
}

/// Inverse of [`group_reviews`]: one row per span. Row ids are taken
/// positionally from `source_ids` when the counts line up, otherwise every
/// row gets the review's primary id.
pub fn expand_rows(reviews: &[Review]) -> Vec<RawRow> {
    reviews
        .iter()
        .flat_map(|r| {
            let positional = r.source_ids.len() == r.spans.len();
            r.spans.iter().enumerate().map(move |(i, s)| RawRow {
                id: if positional {
                    r.source_ids[i]
                } else {
                    r.primary_id()
                },
                review: r.text.clone(),
                polarity: s.polarity,
                aspect: s.term.clone(),
                start_pos: s.start,
                end_pos: s.end,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityHistogram {
    pub negative: usize,
    pub neutral: usize,
    pub positive: usize,
    pub unlabeled: usize,
}

impl PolarityHistogram {
    pub fn add(&mut self, p: Option<Polarity>) {
        match p {
            Some(Polarity::Negative) => self.negative += 1,
            Some(Polarity::Neutral) => self.neutral += 1,
            Some(Polarity::Positive) => self.positive += 1,
            None => self.unlabeled += 1,
        }
    }

    pub fn get(&self, p: Polarity) -> usize {
        match p {
            Polarity::Negative => self.negative,
            Polarity::Neutral => self.neutral,
            Polarity::Positive => self.positive,
        }
    }

    pub fn total(&self) -> usize {
        self.negative + self.neutral + self.positive + self.unlabeled
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectCount {
    pub term: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub reviews: usize,
    pub rows: usize,
    pub polarity_histogram: PolarityHistogram,
    pub positive_share: f64,
    pub unique_aspect_count: usize,
    pub top_k: usize,
    pub top_aspects: Vec<AspectCount>,
    pub top_k_aspect_share: f64,
    pub aspects_per_review_mean: f64,
    pub aspects_per_review_std: f64,
    pub words_per_review_mean: f64,
    pub words_per_review_std: f64,
}

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Dataset statistics. Polarity and aspect frequencies are counted per span
/// (one span per input row after deduplication); aspect and word moments
/// per review. Words are tokenizer tokens containing a letter or digit.
pub fn compute_stats(reviews: &[Review], top_k: usize) -> Result<CorpusStats> {
    if reviews.is_empty() {
        return Err(Error::Empty("corpus has no reviews"));
    }
    let mut hist = PolarityHistogram::default();
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    let mut aspects_per_review = Vec::with_capacity(reviews.len());
    let mut words_per_review = Vec::with_capacity(reviews.len());

    for r in reviews {
        for s in &r.spans {
            hist.add(s.polarity);
            *freq.entry(s.key()).or_default() += 1;
        }
        aspects_per_review.push(r.spans.len() as f64);
        let words = tokenize(&r.text)
            .iter()
            .filter(|t| t.text.chars().any(char::is_alphanumeric))
            .count();
        words_per_review.push(words as f64);
    }

    let rows = hist.total();
    let mut ranked: Vec<AspectCount> = freq
        .into_iter()
        .map(|(term, count)| AspectCount { term, count })
        .collect();
    let unique_aspect_count = ranked.len();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    ranked.truncate(top_k);
    let top_sum: usize = ranked.iter().map(|a| a.count).sum();
    let share = |n: usize| {
        if rows == 0 {
            0.0
        } else {
            n as f64 / rows as f64
        }
    };

    let (am, asd) = mean_std(&aspects_per_review);
    let (wm, wsd) = mean_std(&words_per_review);
    Ok(CorpusStats {
        reviews: reviews.len(),
        rows,
        polarity_histogram: hist,
        positive_share: share(hist.positive),
        unique_aspect_count,
        top_k,
        top_aspects: ranked,
        top_k_aspect_share: share(top_sum),
        aspects_per_review_mean: am,
        aspects_per_review_std: asd,
        words_per_review_mean: wm,
        words_per_review_std: wsd,
    })
}

/// Read corpus JSON lines (one [`Review`] per line) and validate each review.
pub fn read_corpus<R: BufRead>(r: R) -> Result<Vec<Review>> {
    let reviews: Vec<Review> = io::read_jsonl(r)?;
    for review in &reviews {
        review.validate()?;
    }
    Ok(reviews)
}

pub fn write_corpus<W: Write>(w: W, reviews: &[Review]) -> Result<()> {
    io::write_jsonl(w, reviews)
}

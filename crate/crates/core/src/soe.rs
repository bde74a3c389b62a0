//! Sentiment orientation inputs: generation prompts, sentence-pair inputs,
//! the aspect-sentence variant, and parsing of generated completions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AspectSpan, Polarity, Review};
use crate::tagging::tokenize;
use crate::text::{char_len, char_slice, normalized_eq};
use crate::{Error, Result};

pub const PROMPT_PREFIX: &str = "Review: ";
pub const PROMPT_ASPECT: &str = " Aspect: ";
pub const PROMPT_SUFFIX: &str = " Polarity:";
pub const DEFAULT_SEPARATOR: &str = "[SEP]";

/// Which part of the review is paired with the aspect term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextMode {
    #[default]
    FullReview,
    /// Only the sentence containing the aspect's start offset.
    AspectSentence,
}

impl FromStr for ContextMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "full-review" => Ok(ContextMode::FullReview),
            "sentence" | "aspect-sentence" => Ok(ContextMode::AspectSentence),
            other => Err(Error::Config(format!("unknown context mode {other:?}"))),
        }
    }
}

impl fmt::Display for ContextMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContextMode::FullReview => "full-review",
            ContextMode::AspectSentence => "aspect-sentence",
        })
    }
}

/// One SOE model input. Serializes to the prompt-file line
/// `{review_id, aspect_term, start, end, input_text, gold}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoeExample {
    pub review_id: i64,
    pub aspect_term: String,
    pub start: usize,
    pub end: usize,
    pub input_text: String,
    pub gold: Option<Polarity>,
}

/// Char range `[start, end)` of the sentence containing char `pos`.
///
/// A sentence ends after a `.`, `!` or `?` that is followed by whitespace, or
/// at the end of the text. Surrounding whitespace is excluded.
pub fn sentence_bounds(text: &str, pos: usize) -> (usize, usize) {
    let chars: Vec<char> = text.chars().collect();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let boundary = matches!(chars[i], '.' | '!' | '?')
            && chars.get(i + 1).is_some_and(|c| c.is_whitespace());
        if boundary {
            let end = i + 1;
            let mut next = end;
            while next < chars.len() && chars[next].is_whitespace() {
                next += 1;
            }
            if pos < next {
                return trim_range(&chars, start, end);
            }
            start = next;
            i = next;
            continue;
        }
        i += 1;
    }
    trim_range(&chars, start, chars.len())
}

fn trim_range(chars: &[char], mut start: usize, mut end: usize) -> (usize, usize) {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    (start, end)
}

fn context<'a>(review: &'a Review, span: &AspectSpan, mode: ContextMode) -> Result<&'a str> {
    let slice = char_slice(&review.text, span.start, span.end);
    if span.end > char_len(&review.text) || !slice.is_some_and(|s| normalized_eq(s, &span.term)) {
        return Err(Error::Validation {
            id: review.primary_id(),
            message: format!("span {span} does not belong to the review"),
        });
    }
    Ok(match mode {
        ContextMode::FullReview => &review.text,
        ContextMode::AspectSentence => {
            let (s, e) = sentence_bounds(&review.text, span.start);
            char_slice(&review.text, s, e).unwrap_or(&review.text)
        }
    })
}

fn example(review: &Review, span: &AspectSpan, input_text: String) -> SoeExample {
    SoeExample {
        review_id: review.primary_id(),
        aspect_term: span.term.clone(),
        start: span.start,
        end: span.end,
        input_text,
        gold: span.polarity,
    }
}

/// `"Review: {text} Aspect: {term} Polarity:"`.
pub fn render_prompt(text: &str, term: &str) -> String {
    format!("{PROMPT_PREFIX}{text}{PROMPT_ASPECT}{term}{PROMPT_SUFFIX}")
}

/// Inverse of [`render_prompt`] for prompts whose text does not itself
/// contain `" Aspect: "`.
pub fn split_prompt(prompt: &str) -> Option<(&str, &str)> {
    let body = prompt
        .strip_prefix(PROMPT_PREFIX)?
        .strip_suffix(PROMPT_SUFFIX)?;
    body.rsplit_once(PROMPT_ASPECT)
}

/// Generation prompt for one aspect of a review.
pub fn build_prompt(review: &Review, span: &AspectSpan, mode: ContextMode) -> Result<SoeExample> {
    let text = context(review, span, mode)?;
    Ok(example(review, span, render_prompt(text, &span.term)))
}

/// Sentence-pair input `"{text} {separator} {term}"`.
pub fn build_pair(
    review: &Review,
    span: &AspectSpan,
    mode: ContextMode,
    separator: &str,
) -> Result<SoeExample> {
    let text = context(review, span, mode)?;
    Ok(example(
        review,
        span,
        format!("{text} {separator} {}", span.term),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "format")]
pub enum InputFormat {
    Prompt,
    Pair { separator: String },
}

/// Build inputs for every span of every review, in corpus order.
pub fn build_examples(
    reviews: &[Review],
    format: &InputFormat,
    mode: ContextMode,
) -> Result<Vec<SoeExample>> {
    let mut out = Vec::new();
    for r in reviews {
        for s in &r.spans {
            out.push(match format {
                InputFormat::Prompt => build_prompt(r, s, mode)?,
                InputFormat::Pair { separator } => build_pair(r, s, mode, separator)?,
            });
        }
    }
    Ok(out)
}

/// Label words recognized in generated completions, compared lowercased.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelLexicon {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
}

impl Default for LabelLexicon {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        LabelLexicon {
            positive: words(&["positive", "positivo", "positiva"]),
            negative: words(&["negative", "negativo", "negativa"]),
            neutral: words(&["neutral", "neutro", "neutra"]),
        }
    }
}

impl LabelLexicon {
    pub fn lookup(&self, word: &str) -> Option<Polarity> {
        let w = word.to_lowercase();
        [
            (&self.positive, Polarity::Positive),
            (&self.negative, Polarity::Negative),
            (&self.neutral, Polarity::Neutral),
        ]
        .into_iter()
        .find(|(set, _)| set.iter().any(|x| x.to_lowercase() == w))
        .map(|(_, p)| p)
    }
}

/// Polarity named by the first label word in `generated`, or `None` when the
/// completion names no label (callers treat that as an abstention).
pub fn parse_completion(generated: &str, lexicon: &LabelLexicon) -> Option<Polarity> {
    tokenize(generated)
        .iter()
        .find_map(|t| lexicon.lookup(&t.text))
}

/// The canonical completion for a label.
pub fn render_label(p: Polarity) -> &'static str {
    p.as_str()
}

//! Offset-preserving tokenizer and the span <-> BIO codec.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AspectSpan, Review};
use crate::text::char_slice;
use crate::{Error, Exec, Result};

/// A word token with char offsets into its review.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Split `text` into maximal runs of alphanumeric chars; every other
/// non-whitespace char (punctuation, hyphen, symbol) is a token of its own.
///
/// `"Hospedei-me"` yields `Hospedei`, `-`, `me`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word: Option<(usize, String)> = None;
    for (pos, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            match &mut word {
                Some((_, buf)) => buf.push(ch),
                None => word = Some((pos, ch.to_string())),
            }
            continue;
        }
        if let Some((start, buf)) = word.take() {
            tokens.push(Token {
                end: pos,
                text: buf,
                start,
            });
        }
        if !ch.is_whitespace() {
            tokens.push(Token {
                text: ch.to_string(),
                start: pos,
                end: pos + 1,
            });
        }
    }
    if let Some((start, buf)) = word {
        let end = start + buf.chars().count();
        tokens.push(Token {
            text: buf,
            start,
            end,
        });
    }
    tokens
}

/// BIO label. The variant order is the index order of every probability
/// vector in the crate: `[O, B-ASPECT, I-ASPECT]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BioTag {
    #[serde(rename = "O")]
    O,
    #[serde(rename = "B-ASPECT")]
    B,
    #[serde(rename = "I-ASPECT")]
    I,
}

impl BioTag {
    pub const ALL: [BioTag; 3] = [BioTag::O, BioTag::B, BioTag::I];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<BioTag> {
        BioTag::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BioTag::O => "O",
            BioTag::B => "B-ASPECT",
            BioTag::I => "I-ASPECT",
        }
    }

    /// Highest-scoring tag, ties resolved toward O, then B.
    pub fn argmax(scores: &[f64; 3]) -> BioTag {
        let mut best = 0;
        for i in 1..3 {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        BioTag::ALL[best]
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(BioTag::O),
            "B-ASPECT" => Ok(BioTag::B),
            "I-ASPECT" => Ok(BioTag::I),
            other => Err(Error::Config(format!("unknown BIO tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSequence {
    pub tokens: Vec<Token>,
    pub tags: Vec<BioTag>,
}

impl TaggedSequence {
    pub fn new(tokens: Vec<Token>, tags: Vec<BioTag>) -> Result<Self> {
        if tokens.len() != tags.len() {
            return Err(Error::TokenMismatch {
                review: tokens.first().map(|t| t.text.clone()).unwrap_or_default(),
                detail: format!("{} tokens but {} tags", tokens.len(), tags.len()),
            });
        }
        Ok(TaggedSequence { tokens, tags })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// No I-ASPECT at position 0 or after an O.
    pub fn is_well_formed(&self) -> bool {
        is_well_formed(&self.tags)
    }
}

pub fn is_well_formed(tags: &[BioTag]) -> bool {
    let mut prev = BioTag::O;
    for &t in tags {
        if t == BioTag::I && prev == BioTag::O {
            return false;
        }
        prev = t;
    }
    true
}

/// How [`encode_bio`] treats a span edge that falls strictly inside a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentPolicy {
    /// Tag the whole covering token and log a warning.
    #[default]
    Expand,
    /// Fail with [`Error::Alignment`].
    Strict,
}

/// Tag `tokens` from the review's spans: the first token intersecting a span
/// gets B-ASPECT, the following intersecting tokens I-ASPECT, all others O.
pub fn encode_bio(
    review: &Review,
    tokens: &[Token],
    policy: AlignmentPolicy,
) -> Result<TaggedSequence> {
    let mut tags = vec![BioTag::O; tokens.len()];
    for span in &review.spans {
        let first = tokens.partition_point(|t| t.end <= span.start);
        let last = tokens.partition_point(|t| t.start < span.end);
        if first >= last {
            return Err(Error::Alignment {
                span: format!("{span} (covers no token)"),
            });
        }
        let inside = tokens[first].start < span.start || tokens[last - 1].end > span.end;
        if inside {
            match policy {
                AlignmentPolicy::Strict => {
                    return Err(Error::Alignment {
                        span: span.to_string(),
                    })
                }
                AlignmentPolicy::Expand => log::warn!(
                    "span {span} cuts through a token; tagging tokens {:?}..{:?}",
                    tokens[first].text,
                    tokens[last - 1].text
                ),
            }
        }
        for (i, tag) in tags[first..last].iter_mut().enumerate() {
            if *tag != BioTag::O {
                return Err(Error::Alignment {
                    span: format!("{span} (shares a token with another span)"),
                });
            }
            *tag = if i == 0 { BioTag::B } else { BioTag::I };
        }
    }
    TaggedSequence::new(tokens.to_vec(), tags)
}

/// Tokenize and encode every review.
pub fn encode_corpus(
    reviews: &[Review],
    policy: AlignmentPolicy,
    exec: Exec,
) -> Result<Vec<TaggedSequence>> {
    exec.try_map(reviews, |r| encode_bio(r, &tokenize(&r.text), policy))
}

/// Token index ranges `[first, last)` of each maximal `B I*` run. A stray
/// I-ASPECT opens a new run, matching [`repair_bio`].
pub fn tag_runs(tags: &[BioTag]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &t) in tags.iter().enumerate() {
        match t {
            BioTag::O => {
                if let Some(s) = open.take() {
                    runs.push((s, i));
                }
            }
            BioTag::B => {
                if let Some(s) = open.replace(i) {
                    runs.push((s, i));
                }
            }
            BioTag::I => {
                if open.is_none() {
                    open = Some(i);
                }
            }
        }
    }
    if let Some(s) = open {
        runs.push((s, tags.len()));
    }
    runs
}

/// Turn each `B I*` run back into an aspect span over `text`. The term is
/// the exact substring from the first token's start to the last token's end.
pub fn decode_bio(text: &str, seq: &TaggedSequence) -> Vec<AspectSpan> {
    tag_runs(&seq.tags)
        .into_iter()
        .map(|(a, b)| {
            let start = seq.tokens[a].start;
            let end = seq.tokens[b - 1].end;
            let term = char_slice(text, start, end)
                .map(str::to_string)
                .unwrap_or_else(|| {
                    seq.tokens[a..b]
                        .iter()
                        .map(|t| t.text.as_str())
                        .collect::<Vec<_>>()
                        .join(" ")
                });
            AspectSpan {
                term,
                start,
                end,
                polarity: None,
            }
        })
        .collect()
}

/// Rewrite every I-ASPECT that does not follow B/I into B-ASPECT.
pub fn repair_bio(tags: &[BioTag]) -> Vec<BioTag> {
    let mut out = Vec::with_capacity(tags.len());
    let mut prev = BioTag::O;
    for &t in tags {
        let fixed = if t == BioTag::I && prev == BioTag::O {
            BioTag::B
        } else {
            t
        };
        out.push(fixed);
        prev = fixed;
    }
    out
}

/// CoNLL export: `token<TAB>tag` per line, blank line after each review.
pub fn write_conll<W: Write>(mut w: W, seqs: &[TaggedSequence]) -> Result<()> {
    for seq in seqs {
        for (tok, tag) in seq.tokens.iter().zip(&seq.tags) {
            writeln!(w, "{}\t{}", tok.text, tag)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a CoNLL file written by [`write_conll`]. `#` lines are skipped.
///
/// The format carries no offsets, so token offsets are rebuilt as if tokens
/// were joined by single spaces. Two files read this way compare equal
/// exactly when their token surfaces match.
pub fn read_conll<R: BufRead>(r: R) -> Result<Vec<TaggedSequence>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let mut cursor = 0;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !tokens.is_empty() {
                out.push(TaggedSequence::new(
                    std::mem::take(&mut tokens),
                    std::mem::take(&mut tags),
                )?);
            }
            cursor = 0;
            continue;
        }
        let (text, tag) = line.split_once('\t').ok_or_else(|| Error::Parse {
            row: idx + 1,
            message: "expected token<TAB>tag".into(),
        })?;
        let tag: BioTag = tag.trim().parse().map_err(|e: Error| Error::Parse {
            row: idx + 1,
            message: e.to_string(),
        })?;
        let len = text.chars().count();
        tokens.push(Token {
            text: text.to_string(),
            start: cursor,
            end: cursor + len,
        });
        tags.push(tag);
        cursor += len + 1;
    }
    if !tokens.is_empty() {
        out.push(TaggedSequence::new(tokens, tags)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AspectSpan;
    use BioTag::{B, I, O};

    fn span_at(text: &str, term: &str) -> AspectSpan {
        let byte = text.find(term).unwrap();
        let start = text[..byte].chars().count();
        AspectSpan::new(term, start, start + term.chars().count(), None).unwrap()
    }

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn tokenizes_with_exact_offsets() {
        let toks = tokenize("A estrutura do hotel é muito boa.");
        assert_eq!(
            surfaces(&toks),
            ["A", "estrutura", "do", "hotel", "é", "muito", "boa", "."]
        );
        let offsets: Vec<_> = toks.iter().map(|t| (t.start, t.end)).collect();
        assert_eq!(
            offsets,
            [
                (0, 1),
                (2, 11),
                (12, 14),
                (15, 20),
                (21, 22),
                (23, 28),
                (29, 32),
                (32, 33)
            ]
        );
    }

    #[test]
    fn tokenize_edge_cases() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t\n").is_empty());
        assert_eq!(
            tokenize("hotel"),
            vec![Token {
                text: "hotel".into(),
                start: 0,
                end: 5
            }]
        );
        assert_eq!(
            surfaces(&tokenize("Hospedei-me, 3x!")),
            ["Hospedei", "-", "me", ",", "3x", "!"]
        );
    }

    #[test]
    fn three_aspect_encoding() {
        let text = "A estrutura do hotel é muito boa. A piscina é excelente e os quartos também.";
        let review = Review::new(
            text,
            vec![1],
            vec![
                span_at(text, "hotel"),
                span_at(text, "piscina"),
                span_at(text, "quartos"),
            ],
        );
        let toks = tokenize(text);
        let seq = encode_bio(&review, &toks, AlignmentPolicy::Strict).unwrap();
        let expected = [O, O, O, B, O, O, O, O, O, B, O, O, O, O, B, O, O];
        assert_eq!(seq.tags, expected);
        assert_eq!(decode_bio(text, &seq), review.spans);
    }

    #[test]
    fn zero_spans_all_outside() {
        let r = Review::new("O hotel é bom.", vec![1], vec![]);
        let seq = encode_bio(&r, &tokenize(&r.text), AlignmentPolicy::Strict).unwrap();
        assert!(seq.tags.iter().all(|&t| t == O));
        assert!(decode_bio(&r.text, &seq).is_empty());
    }

    #[test]
    fn multiword_span_matches_intersection_oracle() {
        let text = "O ar condicionado não funcionava.";
        let span = span_at(text, "ar condicionado");
        let r = Review::new(text, vec![1], vec![span.clone()]);
        let toks = tokenize(text);
        let seq = encode_bio(&r, &toks, AlignmentPolicy::Strict).unwrap();
        assert_eq!(seq.tags, [O, B, I, O, O, O]);

        // brute force: label each token by intersection, first hit is B
        let mut seen = false;
        let oracle: Vec<BioTag> = toks
            .iter()
            .map(|t| {
                if t.start < span.end && span.start < t.end {
                    let tag = if seen { I } else { B };
                    seen = true;
                    tag
                } else {
                    O
                }
            })
            .collect();
        assert_eq!(seq.tags, oracle);
        assert_eq!(decode_bio(text, &seq), vec![span]);
    }

    #[test]
    fn subtoken_span_policy() {
        let text = "os quartos limpos";
        let r = Review::new(
            text,
            vec![1],
            vec![AspectSpan::new("quarto", 3, 9, None).unwrap()],
        );
        let toks = tokenize(text);
        assert!(matches!(
            encode_bio(&r, &toks, AlignmentPolicy::Strict),
            Err(Error::Alignment { .. })
        ));
        let seq = encode_bio(&r, &toks, AlignmentPolicy::Expand).unwrap();
        assert_eq!(seq.tags, [O, B, O]);
    }

    #[test]
    fn span_over_whitespace_only_is_alignment_error() {
        let r = Review::new(
            "a  b",
            vec![1],
            vec![AspectSpan {
                term: " ".into(),
                start: 1,
                end: 2,
                polarity: None,
            }],
        );
        assert!(encode_bio(&r, &tokenize("a  b"), AlignmentPolicy::Expand).is_err());
    }

    #[test]
    fn decode_run_scan() {
        let text = "ar condicionado central";
        let toks = tokenize(text);
        let seq = TaggedSequence::new(toks, vec![B, I, I]).unwrap();
        let spans = decode_bio(text, &seq);
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].end), (0, 23));
        assert_eq!(spans[0].term, text);
        assert_eq!(tag_runs(&[B, I, O, B, B, I]), vec![(0, 2), (3, 4), (4, 6)]);
    }

    #[test]
    fn repair_examples() {
        assert_eq!(repair_bio(&[O, I, I]), [O, B, I]);
        assert_eq!(repair_bio(&[I]), [B]);
        assert_eq!(repair_bio(&[B, O, I, O]), [B, O, B, O]);
        assert!(repair_bio(&[]).is_empty());
    }

    #[test]
    fn argmax_ties_prefer_label_order() {
        assert_eq!(BioTag::argmax(&[0.4, 0.4, 0.2]), O);
        assert_eq!(BioTag::argmax(&[0.2, 0.4, 0.4]), B);
        assert_eq!(BioTag::argmax(&[0.1, 0.2, 0.7]), I);
    }

    #[test]
    fn tag_strings() {
        for t in BioTag::ALL {
            assert_eq!(t.as_str().parse::<BioTag>().unwrap(), t);
            assert_eq!(
                serde_json::to_string(&t).unwrap(),
                format!("\"{}\"", t.as_str())
            );
        }
        assert!("B-ASP".parse::<BioTag>().is_err());
    }

    #[test]
    fn conll_export_and_read() {
        let text = "O ar condicionado quebrou.";
        let r = Review::new(text, vec![1], vec![span_at(text, "ar condicionado")]);
        let seq = encode_bio(&r, &tokenize(text), AlignmentPolicy::Strict).unwrap();
        let mut buf = Vec::new();
        write_conll(&mut buf, &[seq.clone(), seq.clone()]).unwrap();
        let written = String::from_utf8(buf.clone()).unwrap();
        assert!(written.starts_with("O\tO\nar\tB-ASPECT\ncondicionado\tI-ASPECT\n"));
        assert_eq!(written.matches("\n\n").count(), 2);
        let back = read_conll(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].tags, seq.tags);
        assert_eq!(surfaces(&back[0].tokens), surfaces(&seq.tokens));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_tags() -> impl Strategy<Value = Vec<BioTag>> {
            prop::collection::vec(prop::sample::select(BioTag::ALL.to_vec()), 0..40)
        }

        proptest! {
            #[test]
            fn repair_is_idempotent_and_well_formed(tags in arb_tags()) {
                let once = repair_bio(&tags);
                prop_assert!(is_well_formed(&once));
                prop_assert_eq!(repair_bio(&once), once.clone());
                prop_assert_eq!(tag_runs(&tags), tag_runs(&once));
            }

            #[test]
            fn token_offsets_slice_back(text in "[a-zé .,!?-]{0,60}") {
                let toks = tokenize(&text);
                let mut prev_end = 0;
                for t in &toks {
                    prop_assert!(t.start >= prev_end && t.start < t.end);
                    prop_assert_eq!(char_slice(&text, t.start, t.end), Some(t.text.as_str()));
                    prev_end = t.end;
                }
            }
        }
    }
}

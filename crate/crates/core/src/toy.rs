//! A seeded synthetic hotel-review corpus in Portuguese. Used by the test
//! suites, the benchmarks and `absa toy` to exercise the pipeline without
//! licensed data.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{read_corpus, AspectSpan, Polarity, Review};
use crate::text::char_len;

/// (term, feminine)
pub const ASPECTS: [(&str, bool); 8] = [
    ("hotel", false),
    ("quarto", false),
    ("piscina", true),
    ("café da manhã", false),
    ("recepção", true),
    ("cama", true),
    ("banheiro", false),
    ("ar condicionado", false),
];

// `{o}` article, `{do}` contraction, `{a}` the aspect term.
const POSITIVE: [&str; 6] = [
    "{O} {a} é excelente.",
    "Adoramos {o} {a}!",
    "{O} {a} estava impecável e muito agradável.",
    "Gostei muito {do} {a}.",
    "Nota dez para {o} {a}.",
    "{O} {a} superou as expectativas.",
];
const NEGATIVE: [&str; 6] = [
    "{O} {a} é horrível.",
    "Detestamos {o} {a}.",
    "{O} {a} estava sujo e barulhento.",
    "Fiquei decepcionado com {o} {a}.",
    "{O} {a} deixou muito a desejar.",
    "Péssima experiência com {o} {a}!",
];
const NEUTRAL: [&str; 6] = [
    "{O} {a} fica no segundo andar.",
    "Usamos {o} {a} duas vezes.",
    "{O} {a} tem horário fixo.",
    "Vimos {o} {a} logo cedo.",
    "{O} {a} é do tamanho padrão.",
    "Não reparamos muito {do} {a}.",
];
const FILLER: [&str; 8] = [
    "Viajamos em família.",
    "Chegamos na sexta à noite.",
    "Ficamos três noites.",
    "Foi uma viagem a trabalho.",
    "O check-in foi rápido.",
    "Estava chovendo bastante.",
    "A cidade é tranquila.",
    "Voltaremos em maio.",
];

fn render(template: &str, term: &str, feminine: bool, out: &mut String) -> (usize, usize) {
    let (o, cap, de) = if feminine {
        ("a", "A", "da")
    } else {
        ("o", "O", "do")
    };
    let mut start = 0;
    let mut rest = template;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let j = i + rest[i..].find('}').expect("closed placeholder");
        match &rest[i + 1..j] {
            "o" => out.push_str(o),
            "O" => out.push_str(cap),
            "do" => out.push_str(de),
            _ => {
                start = char_len(out);
                out.push_str(term);
            }
        }
        rest = &rest[j + 1..];
    }
    out.push_str(rest);
    (start, start + char_len(term))
}

/// `n` distinct reviews with one to three aspect sentences each plus filler, source
/// ids `1000..1000 + n`. Deterministic in `seed`.
pub fn generate(n: usize, seed: u64) -> Vec<Review> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let review = {
            let n_aspects = rng.gen_range(1..=3);
            let aspects: Vec<_> = ASPECTS
                .choose_multiple(&mut rng, n_aspects)
                .copied()
                .collect();
            let mut parts: Vec<Option<(&str, bool, Polarity, &str)>> = aspects
                .iter()
                .map(|&(term, fem)| {
                    let p = *Polarity::ALL.choose(&mut rng).unwrap();
                    let pool = match p {
                        Polarity::Positive => &POSITIVE,
                        Polarity::Negative => &NEGATIVE,
                        Polarity::Neutral => &NEUTRAL,
                    };
                    Some((term, fem, p, *pool.choose(&mut rng).unwrap()))
                })
                .collect();
            for _ in 0..rng.gen_range(0..=2) {
                parts.push(None);
            }
            parts.shuffle(&mut rng);
            let mut text = String::new();
            let mut spans = Vec::new();
            for part in parts {
                if !text.is_empty() {
                    text.push(' ');
                }
                match part {
                    Some((term, fem, p, tpl)) => {
                        let (s, e) = render(tpl, term, fem, &mut text);
                        spans.push(AspectSpan::new(term, s, e, Some(p)).expect("non-empty term"));
                    }
                    None => text.push_str(FILLER.choose(&mut rng).unwrap()),
                }
            }
            spans.sort_by_key(|s| s.start);
            Review::new(text, vec![1000 + out.len() as i64], spans)
        };
        if seen.insert(review.text.clone()) {
            out.push(review);
        }
    }
    out
}

pub const TOY_REVIEWS: usize = 60;
pub const TOY_SEED: u64 = 0;

/// The bundled corpus file, `generate(TOY_REVIEWS, TOY_SEED)` in corpus JSON.
pub const TOY_CORPUS_JSONL: &str = include_str!("../data/toy_corpus.jsonl");

pub fn toy_corpus() -> Vec<Review> {
    read_corpus(TOY_CORPUS_JSONL.as_bytes()).expect("bundled toy corpus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::char_slice;

    #[test]
    fn reviews_validate_and_are_deterministic() {
        let a = generate(200, 3);
        assert_eq!(a, generate(200, 3));
        assert_ne!(a, generate(200, 4));
        let texts: HashSet<_> = a.iter().map(|r| &r.text).collect();
        assert_eq!(texts.len(), a.len());
        for r in &a {
            r.validate().unwrap();
            assert!(!r.spans.is_empty());
        }
    }

    #[test]
    fn bundled_file_matches_generator() {
        let c = toy_corpus();
        assert_eq!(c, generate(TOY_REVIEWS, TOY_SEED));
        let aspects: std::collections::BTreeSet<_> = c
            .iter()
            .flat_map(|r| r.spans.iter().map(|s| s.key()))
            .collect();
        assert_eq!(aspects.len(), ASPECTS.len());
    }

    #[test]
    fn placeholder_rendering() {
        let mut s = String::from("x ");
        let (st, en) = render("Gostei muito {do} {a}.", "piscina", true, &mut s);
        assert_eq!(s, "x Gostei muito da piscina.");
        assert_eq!(char_slice(&s, st, en), Some("piscina"));
        let mut s = String::new();
        let (st, en) = render("{O} {a} é bom", "café da manhã", false, &mut s);
        assert_eq!((st, en), (2, 15));
        assert_eq!(s, "O café da manhã é bom");
    }
}

//! Confusion matrices and classification reports.
//!
//! Conventions: a 0/0 precision, recall or F1 is 0; macro averages run over
//! the classes that have gold support; balanced accuracy is the macro recall.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use crate::corpus::Polarity;
use crate::ensemble::{SoeKey, Vote};
use crate::tagging::{tag_runs, BioTag, TaggedSequence};
use crate::{Error, Result};

/// Rows are gold labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Element-wise sum of two matrices over the same labels.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::Config(
                "cannot merge matrices over different labels".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

pub fn confusion<T: PartialEq + Display>(
    labels: &[T],
    gold: &[T],
    pred: &[T],
) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::Config(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(labels.iter().map(|l| l.to_string()).collect());
    let index = |x: &T| {
        labels
            .iter()
            .position(|l| l == x)
            .ok_or_else(|| Error::Config(format!("label {x} not in the declared label set")))
    };
    for (g, p) in gold.iter().zip(pred) {
        cm.counts[index(g)?][index(p)?] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: u64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub per_class: Vec<ClassScores>,
}

impl MetricsReport {
    pub fn class(&self, label: &str) -> Option<&ClassScores> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn report(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no items"));
    }
    let n = cm.labels.len();
    let mut per_class = Vec::with_capacity(n);
    let (mut p_sum, mut r_sum, mut f_sum, mut supported) = (0.0, 0.0, 0.0, 0usize);
    for i in 0..n {
        let tp = cm.counts[i][i];
        let support: u64 = cm.counts[i].iter().sum();
        let predicted: u64 = (0..n).map(|g| cm.counts[g][i]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        if support > 0 {
            supported += 1;
            p_sum += precision;
            r_sum += recall;
            f_sum += f1;
        }
        per_class.push(ClassScores {
            label: cm.labels[i].clone(),
            precision,
            recall,
            f1,
            support,
        });
    }
    let k = supported as f64;
    let recall_macro = r_sum / k;
    Ok(MetricsReport {
        total,
        accuracy: ratio(cm.trace(), total),
        balanced_accuracy: recall_macro,
        precision_macro: p_sum / k,
        recall_macro,
        f1_macro: f_sum / k,
        per_class,
    })
}

/// Exact-match span scores (supplementary; not part of token-level scoring).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanScores {
    pub gold_spans: usize,
    pub pred_spans: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Share of reviews whose predicted span set equals the gold set.
    pub review_exact_match: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteReport {
    /// Token-level scores over O / B-ASPECT / I-ASPECT.
    pub token: MetricsReport,
    pub span: SpanScores,
}

/// Token-level ATE scores plus span exact-match scores. Gold and predicted
/// sequences must have identical tokens.
pub fn score_ate(gold: &[TaggedSequence], pred: &[TaggedSequence]) -> Result<AteReport> {
    if gold.len() != pred.len() {
        return Err(Error::TokenMismatch {
            review: "*".into(),
            detail: format!("{} gold sequences but {} predicted", gold.len(), pred.len()),
        });
    }
    let mut g_tags = Vec::new();
    let mut p_tags = Vec::new();
    let (mut gold_spans, mut pred_spans, mut matched, mut exact) = (0, 0, 0, 0);
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.tokens != p.tokens {
            return Err(Error::TokenMismatch {
                review: format!("#{i}"),
                detail: format!(
                    "gold has {} tokens, prediction {} (or surfaces differ)",
                    g.tokens.len(),
                    p.tokens.len()
                ),
            });
        }
        g_tags.extend_from_slice(&g.tags);
        p_tags.extend_from_slice(&p.tags);
        let gs: BTreeSet<_> = tag_runs(&g.tags).into_iter().collect();
        let ps: BTreeSet<_> = tag_runs(&p.tags).into_iter().collect();
        gold_spans += gs.len();
        pred_spans += ps.len();
        matched += gs.intersection(&ps).count();
        exact += usize::from(gs == ps);
    }
    let token = report(&confusion(&BioTag::ALL, &g_tags, &p_tags)?)?;
    let precision = ratio(matched as u64, pred_spans as u64);
    let recall = ratio(matched as u64, gold_spans as u64);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(AteReport {
        token,
        span: SpanScores {
            gold_spans,
            pred_spans,
            matched,
            precision,
            recall,
            f1,
            review_exact_match: ratio(exact as u64, gold.len() as u64),
        },
    })
}

/// SOE scores over the gold keys. A missing or abstaining prediction is
/// scored as the extra column `abstain`, which never has gold support.
pub fn score_soe(
    gold: &BTreeMap<SoeKey, Polarity>,
    pred: &BTreeMap<SoeKey, Vote>,
) -> Result<MetricsReport> {
    let g: Vec<Vote> = gold.values().map(|&p| Vote::Label(p)).collect();
    let p: Vec<Vote> = gold
        .keys()
        .map(|k| pred.get(k).copied().unwrap_or(Vote::Abstain))
        .collect();
    let mut labels = vec![
        Vote::Label(Polarity::Positive),
        Vote::Label(Polarity::Negative),
        Vote::Label(Polarity::Neutral),
    ];
    if p.contains(&Vote::Abstain) {
        labels.push(Vote::Abstain);
    }
    report(&confusion(&labels, &g, &p)?)
}

/// CSV header and row laid out like an ATE results table.
pub fn ate_csv(run: &str, r: &AteReport) -> (String, String) {
    let t = &r.token;
    (
        "run,acc,precision,recall,f1,span_f1".into(),
        format!(
            "{run},{:.4},{:.4},{:.4},{:.4},{:.4}",
            t.accuracy, t.precision_macro, t.recall_macro, t.f1_macro, r.span.f1
        ),
    )
}

/// CSV header and row laid out like an SOE results table.
pub fn soe_csv(run: &str, r: &MetricsReport) -> (String, String) {
    let f1 = |l: &str| r.class(l).map_or(0.0, |c| c.f1);
    (
        "run,acc,f1,f1_pos,f1_neu,f1_neg,bacc,precision,recall".into(),
        format!(
            "{run},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.accuracy,
            r.f1_macro,
            f1("positive"),
            f1("neutral"),
            f1("negative"),
            r.balanced_accuracy,
            r.precision_macro,
            r.recall_macro
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagging::tokenize;
    use BioTag::{B, O};
    use Polarity::*;

    const P: Polarity = Positive;
    const N: Polarity = Negative;
    const U: Polarity = Neutral;

    #[test]
    fn diagonal_when_perfect() {
        let cm = confusion(&[P, N, U], &[P, N, U, P], &[P, N, U, P]).unwrap();
        assert_eq!(cm.counts, vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let r = report(&cm).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.f1_macro, 1.0);
        assert_eq!(r.balanced_accuracy, 1.0);
    }

    #[test]
    fn hand_tally() {
        let cm = confusion(&[P, N], &[P, P, N], &[P, N, N]).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn empty_inputs() {
        let cm = confusion::<Polarity>(&[P, N], &[], &[]).unwrap();
        assert_eq!(cm.total(), 0);
        assert!(matches!(report(&cm), Err(Error::Empty(_))));
        assert!(confusion(&[P], &[P], &[N]).is_err());
        assert!(confusion(&[P], &[P, P], &[P]).is_err());
    }

    #[test]
    fn balanced_accuracy_two_class() {
        // class P recall 1.0 (2/2), class N recall 0.5 (1/2)
        let cm = confusion(&[P, N], &[P, P, N, N], &[P, P, N, P]).unwrap();
        let r = report(&cm).unwrap();
        assert_eq!(r.balanced_accuracy, 0.75);
        assert_eq!(r.balanced_accuracy, r.recall_macro);
    }

    #[test]
    fn three_class_worked_example() {
        let gold = [P, P, N, U];
        let pred = [P, N, N, U];
        let r = report(&confusion(&[P, N, U], &gold, &pred).unwrap()).unwrap();
        assert_eq!(r.accuracy, 0.75);
        let f1 = |l| r.class(l).unwrap().f1;
        assert!((f1("positive") - 2.0 / 3.0).abs() < 1e-12);
        assert!((f1("negative") - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f1("neutral"), 1.0);
        assert!((r.f1_macro - 7.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_classes_leave_macro() {
        // neutral never appears in gold and is never predicted
        let r = report(&confusion(&[P, N, U], &[P, N], &[P, P]).unwrap()).unwrap();
        assert_eq!(r.per_class[2].support, 0);
        assert_eq!(r.recall_macro, 0.5);
        assert_eq!(r.precision_macro, (0.5 + 0.0) / 2.0);
    }

    fn seq(text: &str, tags: Vec<BioTag>) -> TaggedSequence {
        TaggedSequence::new(tokenize(text), tags).unwrap()
    }

    #[test]
    fn ate_scores() {
        let text = "O hotel e a piscina";
        let gold = seq(text, vec![O, B, O, O, B]);
        let same = score_ate(std::slice::from_ref(&gold), std::slice::from_ref(&gold)).unwrap();
        assert_eq!(same.token.accuracy, 1.0);
        assert_eq!(same.span.f1, 1.0);
        assert_eq!(same.span.review_exact_match, 1.0);

        let all_o = seq(text, vec![O; 5]);
        let r = score_ate(std::slice::from_ref(&gold), &[all_o]).unwrap();
        assert_eq!(r.token.accuracy, 3.0 / 5.0);
        assert_eq!(r.span.recall, 0.0);
        assert_eq!(r.span.precision, 0.0);

        let other = seq("O hotel e a sauna", vec![O; 5]);
        assert!(score_ate(&[gold], &[other]).is_err());
    }

    #[test]
    fn one_flip_in_hundred() {
        let text = vec!["x"; 100].join(" ");
        let gold = seq(&text, vec![O; 100]);
        let mut tags = vec![O; 100];
        tags[37] = B;
        let r = score_ate(&[gold], &[seq(&text, tags)]).unwrap();
        assert_eq!(r.token.accuracy, 0.99);
    }

    #[test]
    fn soe_abstentions_count_as_errors() {
        let key = |i| SoeKey {
            review_id: i,
            start: 0,
            end: 1,
            aspect_term: "x".into(),
        };
        let gold: BTreeMap<_, _> = [(key(1), P), (key(2), N)].into_iter().collect();
        let pred: BTreeMap<_, _> = [(key(1), Vote::Label(P))].into_iter().collect();
        let r = score_soe(&gold, &pred).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.per_class.len(), 4);
        assert_eq!(r.balanced_accuracy, 0.5);
        let (h, row) = soe_csv("run", &r);
        assert_eq!(h.split(',').count(), row.split(',').count());
    }
}

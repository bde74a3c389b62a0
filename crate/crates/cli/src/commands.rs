use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use absa_core::augment::{infer_categories, target_swap, AspectCategoryMap, CategoryConfig};
use absa_core::baseline::{soe_key, train_soe, train_tagger, BowPolarityModel, PerceptronTagger};
use absa_core::corpus::{
    compute_stats, group_reviews, parse_rows, read_corpus, write_corpus, ColumnNames, SchemaConfig,
};
use absa_core::ensemble::{
    group_ate_records, group_soe_records, majority_vote, median_ensemble, AteRecord,
    EnsembledReview, SoeKey, SoeRecord, Vote,
};
use absa_core::io::{is_comment, read_json, read_jsonl, write_header, write_jsonl};
use absa_core::metrics::{ate_csv, score_ate, score_soe, soe_csv};
use absa_core::soe::{build_examples, InputFormat, SoeExample};
use absa_core::splits::{split, SplitSpec};
use absa_core::tagging::{
    encode_bio, encode_corpus, read_conll, repair_bio, tokenize, write_conll,
};
use absa_core::toy::{generate, toy_corpus};
use absa_core::{BioTag, Exec, Polarity, Review, TaggedSequence};
use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use serde::Serialize;
use serde_json::Value;

use crate::cli::*;

/// Provenance line written at the top of every output file.
#[derive(Serialize)]
struct RunConfig<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a Command,
}

pub struct Ctx<'a> {
    header: RunConfig<'a>,
    exec: Exec,
}

impl<'a> Ctx<'a> {
    pub fn new(command: &'a Command, exec: Exec) -> Self {
        Ctx {
            header: RunConfig {
                tool: "absa",
                version: env!("CARGO_PKG_VERSION"),
                command,
            },
            exec,
        }
    }

    /// Writer for `path` (or standard output) with the header already written.
    fn output(&self, path: Option<&Path>) -> Result<Box<dyn Write>> {
        let mut w: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        write_header(&mut w, &self.header)?;
        Ok(w)
    }

    fn write_json<T: Serialize>(&self, path: Option<&Path>, value: &T) -> Result<()> {
        let mut w = self.output(path)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn write_lines<T: Serialize>(&self, path: Option<&Path>, items: &[T]) -> Result<()> {
        let mut w = self.output(path)?;
        write_jsonl(&mut w, items)?;
        w.flush()?;
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn load_corpus(path: &Path) -> Result<Vec<Review>> {
    read_corpus(open(path)?).with_context(|| format!("reading corpus {}", path.display()))
}

fn load_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl(open(path)?).with_context(|| format!("reading {}", path.display()))
}

pub fn run(cmd: &Command, ctx: &Ctx) -> Result<ExitCode> {
    match cmd {
        Command::Convert(a) => convert(a, ctx),
        Command::Stats(a) => {
            let corpus = load_corpus(&a.corpus.corpus)?;
            ctx.write_json(a.out.out.as_deref(), &compute_stats(&corpus, a.top_k)?)
        }
        Command::Tag(a) => {
            let corpus = load_corpus(&a.corpus.corpus)?;
            let seqs = encode_corpus(&corpus, a.alignment.into(), ctx.exec)?;
            let mut w = ctx.output(a.out.out.as_deref())?;
            write_conll(&mut w, &seqs)?;
            w.flush().map_err(Into::into)
        }
        Command::Split(a) => split_cmd(a, ctx),
        Command::Augment(AugmentCommand::InferCategories(a)) => {
            let corpus = load_corpus(&a.corpus.corpus)?;
            let cfg = CategoryConfig {
                k: a.k,
                window: a.window,
                seed: a.seed,
                restarts: a.restarts,
                max_iter: a.max_iter,
            };
            ctx.write_json(a.out.out.as_deref(), &infer_categories(&corpus, &cfg)?)
        }
        Command::Augment(AugmentCommand::TargetSwap(a)) => swap(a, ctx),
        Command::Prompt(a) => {
            let corpus = load_corpus(&a.corpus.corpus)?;
            let format = match a.format {
                PromptFormat::Prompt => InputFormat::Prompt,
                PromptFormat::Pair => InputFormat::Pair {
                    separator: a.separator.clone(),
                },
            };
            let examples = build_examples(&corpus, &format, a.context)?;
            info!("{} examples from {} reviews", examples.len(), corpus.len());
            ctx.write_lines(a.out.out.as_deref(), &examples)
        }
        Command::Ensemble(EnsembleCommand::Ate(a)) => ensemble_ate(a, ctx),
        Command::Ensemble(EnsembleCommand::Soe(a)) => ensemble_soe(a, ctx),
        Command::Eval(EvalCommand::Ate(a)) => eval_ate(a, ctx),
        Command::Eval(EvalCommand::Soe(a)) => eval_soe(a, ctx),
        Command::Baseline(BaselineCommand::Train(a)) => train(a, ctx),
        Command::Baseline(BaselineCommand::Predict(a)) => predict(a, ctx),
        Command::Validate(ValidateCommand::Ate(a)) => return validate_ate(a),
        Command::Validate(ValidateCommand::Soe(a)) => return validate_soe(a),
        Command::Toy(a) => {
            let corpus = match a.reviews {
                Some(n) => generate(n, a.seed),
                None => toy_corpus(),
            };
            let mut w = ctx.output(a.out.out.as_deref())?;
            write_corpus(&mut w, &corpus)?;
            w.flush().map_err(Into::into)
        }
    }?;
    Ok(ExitCode::SUCCESS)
}

fn convert(a: &ConvertArgs, ctx: &Ctx) -> Result<()> {
    let mut schema = match a.format {
        InputKind::Tsv => SchemaConfig::tsv(),
        InputKind::Csv => SchemaConfig::csv(),
    };
    if let Some(cols) = &a.columns {
        let names: Vec<&str> = cols.split(',').map(str::trim).collect();
        let [id, review, polarity, aspect, start, end] = names[..] else {
            bail!("--columns needs six names: id,review,polarity,aspect,start,end");
        };
        schema.columns = ColumnNames {
            id: id.into(),
            review: review.into(),
            polarity: polarity.into(),
            aspect: aspect.into(),
            start: start.into(),
            end: end.into(),
        };
    }
    schema.codes = a.codes;
    schema.end_inclusive = a.end_inclusive;
    schema.invalid_rows = a.invalid_rows.into();
    let parsed = parse_rows(open(&a.input)?, &schema)
        .with_context(|| format!("parsing {}", a.input.display()))?;
    if !parsed.skipped.is_empty() {
        warn!("skipped {} invalid rows", parsed.skipped.len());
    }
    let reviews = group_reviews(&parsed.rows, a.overlaps.into())?;
    info!("{} rows -> {} reviews", parsed.rows.len(), reviews.len());
    let mut w = ctx.output(a.out.out.as_deref())?;
    write_corpus(&mut w, &reviews)?;
    w.flush()?;
    Ok(())
}

fn split_cmd(a: &SplitArgs, ctx: &Ctx) -> Result<()> {
    let corpus = load_corpus(&a.corpus.corpus)?;
    let spec = SplitSpec::new(a.train_fraction, a.strategy, a.seed)?;
    let out = split(&corpus, &spec)?;
    for (path, part) in [(&a.train_out, &out.train), (&a.test_out, &out.test)] {
        let mut w = ctx.output(Some(path))?;
        write_corpus(&mut w, part)?;
        w.flush()?;
    }
    info!(
        "{} train / {} test reviews, aspect slack {:.4}",
        out.report.train_reviews, out.report.test_reviews, out.report.slack
    );
    ctx.write_json(a.report_out.as_deref(), &out.report)
}

fn swap(a: &SwapArgs, ctx: &Ctx) -> Result<()> {
    let corpus = load_corpus(&a.corpus.corpus)?;
    let map = AspectCategoryMap::read(open(&a.categories)?)
        .with_context(|| format!("reading categories {}", a.categories.display()))?;
    let variants = target_swap(&corpus, &map, a.per_example, a.seed, ctx.exec)?;
    info!("{} variants from {} reviews", variants.len(), corpus.len());
    match a.emit {
        SwapOutput::Examples => ctx.write_lines(a.out.out.as_deref(), &variants),
        SwapOutput::Corpus => {
            let reviews: Vec<Review> = variants.iter().map(|v| v.to_review()).collect();
            ctx.write_lines(a.out.out.as_deref(), &reviews)
        }
    }
}

fn read_ate_files(paths: &[PathBuf]) -> Result<Vec<AteRecord>> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(load_lines::<AteRecord>(p)?);
    }
    Ok(records)
}

fn read_soe_files(paths: &[PathBuf]) -> Result<Vec<SoeRecord>> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(load_lines::<SoeRecord>(p)?);
    }
    Ok(records)
}

fn ensemble_ate(a: &EnsembleAteArgs, ctx: &Ctx) -> Result<()> {
    let records = read_ate_files(&a.pred)?;
    if let Some(path) = &a.corpus {
        let corpus = load_corpus(path)?;
        let by_key: HashMap<String, &Review> = corpus.iter().map(|r| (r.key(), r)).collect();
        for rec in &records {
            let review = by_key.get(&rec.review_key).ok_or_else(|| {
                anyhow!(
                    "model {}: review {} not in corpus",
                    rec.model_id,
                    rec.review_key
                )
            })?;
            rec.check_alignment(review)?;
        }
    }
    let preds = group_ate_records(&records)?;
    info!("median of {} models", preds.len());
    let merged = median_ensemble(&preds, ctx.exec)?;
    ctx.write_lines(a.out.out.as_deref(), &merged)
}

fn ensemble_soe(a: &EnsembleSoeArgs, ctx: &Ctx) -> Result<()> {
    let preds = group_soe_records(&read_soe_files(&a.pred)?)?;
    info!("vote of {} models", preds.len());
    let votes = majority_vote(&preds, &a.tie_break)?;
    let out: Vec<SoeRecord> = votes
        .iter()
        .map(|(k, v)| SoeRecord::from_key(&a.model_id, k, *v))
        .collect();
    ctx.write_lines(a.out.out.as_deref(), &out)
}

/// The kinds of file `eval` accepts, told apart by their first data line.
enum Loaded {
    Corpus(Vec<Review>),
    Conll(Vec<TaggedSequence>),
    Ate(Vec<AteRecord>),
    Ensembled(Vec<EnsembledReview>),
    Prompts(Vec<SoeExample>),
}

fn sniff(path: &Path) -> Result<Loaded> {
    let mut first = None;
    for line in open(path)?.lines() {
        let line = line?;
        if !line.trim().is_empty() && !is_comment(&line) {
            first = Some(line);
            break;
        }
    }
    let Some(first) = first else {
        bail!("{} holds no data", path.display());
    };
    if !first.trim_start().starts_with('{') {
        let seqs =
            read_conll(open(path)?).with_context(|| format!("reading {}", path.display()))?;
        return Ok(Loaded::Conll(seqs));
    }
    let probe: Value = serde_json::from_str(&first)
        .with_context(|| format!("{}: first record is not JSON", path.display()))?;
    let has = |k: &str| probe.get(k).is_some();
    Ok(if has("probs") {
        Loaded::Ate(load_lines(path)?)
    } else if has("medians") {
        Loaded::Ensembled(load_lines(path)?)
    } else if has("input_text") {
        Loaded::Prompts(load_lines(path)?)
    } else if has("text") {
        Loaded::Corpus(load_corpus(path)?)
    } else {
        bail!("{}: unrecognized record layout", path.display())
    })
}

fn single_model<T>(mut groups: Vec<T>, name: impl Fn(&T) -> &str) -> Result<T> {
    match groups.len() {
        1 => Ok(groups.remove(0)),
        0 => bail!("prediction file holds no records"),
        _ => bail!(
            "prediction file holds {} models ({}); ensemble them first",
            groups.len(),
            groups.iter().map(&name).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn eval_ate(a: &EvalAteArgs, ctx: &Ctx) -> Result<()> {
    let policy = a.alignment.into();
    let (gold, gold_keys): (Vec<TaggedSequence>, Option<Vec<String>>);
    let gold_reviews: Vec<Review>;
    match sniff(&a.gold)? {
        Loaded::Corpus(c) => {
            gold_reviews = c;
            gold = gold_reviews
                .iter()
                .map(|r| encode_bio(r, &tokenize(&r.text), policy))
                .collect::<absa_core::Result<_>>()?;
            gold_keys = Some(gold_reviews.iter().map(Review::key).collect());
        }
        Loaded::Conll(s) => {
            gold = s;
            gold_keys = None;
        }
        _ => bail!("--gold must be a corpus or CoNLL file"),
    }
    let need_keys = || {
        gold_keys
            .as_ref()
            .ok_or_else(|| anyhow!("predictions keyed by review need a corpus as --gold"))
    };
    let missing = |k: &str| anyhow!("no prediction for review {k}");

    let pred: Vec<TaggedSequence> = match sniff(&a.pred)? {
        Loaded::Conll(p) => {
            if p.len() != gold.len() {
                bail!("{} gold sequences but {} predicted", gold.len(), p.len());
            }
            gold.iter()
                .zip(p)
                .enumerate()
                .map(|(i, (g, p))| {
                    let same = g.len() == p.len()
                        && g.tokens
                            .iter()
                            .zip(&p.tokens)
                            .all(|(x, y)| x.text == y.text);
                    if !same {
                        bail!("sequence {i}: predicted tokens differ from gold");
                    }
                    Ok(TaggedSequence {
                        tokens: g.tokens.clone(),
                        tags: p.tags,
                    })
                })
                .collect::<Result<_>>()?
        }
        Loaded::Corpus(c) => {
            let by_key: HashMap<String, Review> = c.into_iter().map(|r| (r.key(), r)).collect();
            need_keys()?
                .iter()
                .map(|k| {
                    let r = by_key.get(k).ok_or_else(|| missing(k))?;
                    Ok(encode_bio(r, &tokenize(&r.text), policy)?)
                })
                .collect::<Result<_>>()?
        }
        Loaded::Ate(records) => {
            let model = single_model(group_ate_records(&records)?, |m| &m.model_id)?;
            need_keys()?
                .iter()
                .zip(&gold)
                .map(|(k, g)| {
                    let p = model.reviews.get(k).ok_or_else(|| missing(k))?;
                    check_offsets(k, g, p.tokens.iter().map(|t| (t.start, t.end)))?;
                    let raw: Vec<BioTag> = p.probs.iter().map(BioTag::argmax).collect();
                    Ok(TaggedSequence {
                        tokens: g.tokens.clone(),
                        tags: repair_bio(&raw),
                    })
                })
                .collect::<Result<_>>()?
        }
        Loaded::Ensembled(merged) => {
            let by_key: HashMap<&str, &EnsembledReview> =
                merged.iter().map(|e| (e.review_key.as_str(), e)).collect();
            need_keys()?
                .iter()
                .zip(&gold)
                .map(|(k, g)| {
                    let e = by_key.get(k.as_str()).ok_or_else(|| missing(k))?;
                    check_offsets(k, g, e.tokens.iter().map(|t| (t.start, t.end)))?;
                    Ok(TaggedSequence {
                        tokens: g.tokens.clone(),
                        tags: e.tags.clone(),
                    })
                })
                .collect::<Result<_>>()?
        }
        Loaded::Prompts(_) => bail!("--pred holds SOE examples, not ATE predictions"),
    };
    let report = score_ate(&gold, &pred)?;
    info!(
        "token acc {:.4}, macro F1 {:.4}, span F1 {:.4}",
        report.token.accuracy, report.token.f1_macro, report.span.f1
    );
    if let Some(path) = &a.csv {
        append_csv(path, ate_csv(&a.run_name, &report))?;
    }
    ctx.write_json(a.out.out.as_deref(), &report)
}

fn check_offsets(
    key: &str,
    gold: &TaggedSequence,
    pred: impl ExactSizeIterator<Item = (usize, usize)>,
) -> Result<()> {
    let same = pred.len() == gold.len()
        && pred
            .zip(&gold.tokens)
            .all(|((s, e), t)| s == t.start && e == t.end);
    if !same {
        bail!("review {key}: predicted token offsets differ from the gold tokenization");
    }
    Ok(())
}

fn append_csv(path: &Path, (header, row): (String, String)) -> Result<()> {
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    writeln!(f, "{row}")?;
    Ok(())
}

fn gold_soe(path: &Path) -> Result<BTreeMap<SoeKey, Polarity>> {
    Ok(match sniff(path)? {
        Loaded::Prompts(examples) => examples
            .iter()
            .filter_map(|e| e.gold.map(|g| (soe_key(e), g)))
            .collect(),
        Loaded::Corpus(corpus) => corpus
            .iter()
            .flat_map(|r| {
                r.spans.iter().filter_map(|s| {
                    s.polarity.map(|p| {
                        (
                            SoeKey {
                                review_id: r.primary_id(),
                                start: s.start,
                                end: s.end,
                                aspect_term: s.term.clone(),
                            },
                            p,
                        )
                    })
                })
            })
            .collect(),
        _ => bail!("--gold must be a corpus or prompt file"),
    })
}

fn eval_soe(a: &EvalSoeArgs, ctx: &Ctx) -> Result<()> {
    let gold = gold_soe(&a.gold)?;
    if gold.is_empty() {
        bail!("{} holds no gold polarity labels", a.gold.display());
    }
    let mut records = load_lines::<SoeRecord>(&a.pred)?;
    if let Some(id) = &a.model_id {
        records.retain(|r| &r.model_id == id);
    }
    let model = single_model(group_soe_records(&records)?, |m| &m.model_id)?;
    let extra = model.votes.keys().filter(|k| !gold.contains_key(k)).count();
    if extra > 0 {
        warn!("{extra} predictions have no gold label and are ignored");
    }
    let missing = gold.keys().filter(|k| !model.votes.contains_key(k)).count();
    if missing > 0 {
        warn!("{missing} gold aspects have no prediction; scored as abstentions");
    }
    let report = score_soe(&gold, &model.votes)?;
    info!(
        "acc {:.4}, macro F1 {:.4}, bacc {:.4}",
        report.accuracy, report.f1_macro, report.balanced_accuracy
    );
    if let Some(path) = &a.csv {
        append_csv(path, soe_csv(&a.run_name, &report))?;
    }
    ctx.write_json(a.out.out.as_deref(), &report)
}

fn train(a: &TrainArgs, ctx: &Ctx) -> Result<()> {
    let corpus = load_corpus(&a.corpus.corpus)?;
    match a.task {
        Task::Ate => {
            let seqs = encode_corpus(&corpus, a.alignment.into(), ctx.exec)?;
            let model = train_tagger(&seqs, a.epochs, a.seed)?;
            info!("tagger with {} features", model.weights.len());
            ctx.write_json(Some(&a.model), &model)
        }
        Task::Soe => {
            let examples = build_examples(&corpus, &InputFormat::Prompt, a.context)?;
            let model = train_soe(&examples, a.bootstrap.then_some(a.seed))?;
            info!(
                "polarity model over {} words, {} classes",
                model.word_counts.len(),
                model.class_counts.len()
            );
            ctx.write_json(Some(&a.model), &model)
        }
    }
}

fn predict(a: &PredictArgs, ctx: &Ctx) -> Result<()> {
    let corpus = load_corpus(&a.corpus.corpus)?;
    let model_file = || format!("reading model {}", a.model.display());
    match a.task {
        Task::Ate => {
            let model: PerceptronTagger = read_json(open(&a.model)?).with_context(model_file)?;
            let records = model.ate_records(&a.model_id, &corpus, ctx.exec);
            ctx.write_lines(a.out.out.as_deref(), &records)
        }
        Task::Soe => {
            let model: BowPolarityModel = read_json(open(&a.model)?).with_context(model_file)?;
            let examples = build_examples(&corpus, &InputFormat::Prompt, a.context)?;
            let pred = model.predict_soe(&a.model_id, &examples, ctx.exec);
            let records: Vec<SoeRecord> = pred
                .votes
                .iter()
                .map(|(k, v)| SoeRecord::from_key(&a.model_id, k, *v))
                .collect();
            ctx.write_lines(a.out.out.as_deref(), &records)
        }
    }
}

fn finish_validation(what: &str, path: &Path, problems: &[String], summary: String) -> ExitCode {
    for p in problems {
        eprintln!("{}: {p}", path.display());
    }
    if problems.is_empty() {
        println!("{what} ok: {summary}");
        ExitCode::SUCCESS
    } else {
        println!("{what} invalid: {} problems ({summary})", problems.len());
        ExitCode::from(1)
    }
}

fn validate_ate(a: &ValidateArgs) -> Result<ExitCode> {
    let records: Vec<AteRecord> = load_lines(&a.pred)?;
    let corpus = a.corpus.as_deref().map(load_corpus).transpose()?;
    let by_key: Option<HashMap<String, &Review>> = corpus
        .as_ref()
        .map(|c| c.iter().map(|r| (r.key(), r)).collect());
    let mut problems = Vec::new();
    let mut seen = BTreeSet::new();
    let mut models = BTreeSet::new();
    for (i, rec) in records.iter().enumerate() {
        let at = format!("record {}", i + 1);
        models.insert(rec.model_id.as_str());
        if let Err(e) = rec.validate() {
            problems.push(format!("{at}: {e}"));
        }
        if !seen.insert((rec.model_id.as_str(), rec.review_key.as_str())) {
            problems.push(format!(
                "{at}: model {} repeats review {}",
                rec.model_id, rec.review_key
            ));
        }
        if let Some(map) = &by_key {
            match map.get(&rec.review_key) {
                None => problems.push(format!("{at}: review {} not in corpus", rec.review_key)),
                Some(r) => {
                    if let Err(e) = rec.check_alignment(r) {
                        problems.push(format!("{at}: {e}"));
                    }
                }
            }
        }
    }
    let summary = format!("{} records, {} models", records.len(), models.len());
    Ok(finish_validation("ate", &a.pred, &problems, summary))
}

fn validate_soe(a: &ValidateArgs) -> Result<ExitCode> {
    let records: Vec<SoeRecord> = load_lines(&a.pred)?;
    let known: Option<BTreeSet<SoeKey>> = match a.corpus.as_deref() {
        Some(p) => Some(
            load_corpus(p)?
                .iter()
                .flat_map(|r| {
                    r.spans.iter().map(|s| SoeKey {
                        review_id: r.primary_id(),
                        start: s.start,
                        end: s.end,
                        aspect_term: s.term.clone(),
                    })
                })
                .collect(),
        ),
        None => None,
    };
    let mut problems = Vec::new();
    let mut seen = BTreeSet::new();
    let mut models = BTreeSet::new();
    let mut abstentions = 0;
    for (i, rec) in records.iter().enumerate() {
        let at = format!("record {}", i + 1);
        models.insert(rec.model_id.as_str());
        abstentions += usize::from(rec.label == Vote::Abstain);
        if rec.start >= rec.end || rec.aspect_term.trim().is_empty() {
            problems.push(format!(
                "{at}: bad span {:?}@({},{})",
                rec.aspect_term, rec.start, rec.end
            ));
        }
        let key = rec.key();
        if let Some(k) = &known {
            if !k.contains(&key) {
                problems.push(format!(
                    "{at}: review {} has no aspect {:?}@({},{})",
                    rec.review_id, rec.aspect_term, rec.start, rec.end
                ));
            }
        }
        if !seen.insert((rec.model_id.clone(), key)) {
            problems.push(format!("{at}: model {} repeats this aspect", rec.model_id));
        }
    }
    let summary = format!(
        "{} records, {} models, {abstentions} abstentions",
        records.len(),
        models.len()
    );
    Ok(finish_validation("soe", &a.pred, &problems, summary))
}

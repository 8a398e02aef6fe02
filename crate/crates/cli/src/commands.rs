use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nameguess_core::abbrev::{Dictionaries, Fabricator, NamePair};
use nameguess_core::corpus::{filter_tables, ManifestEntry, Table};
use nameguess_core::difficulty::{
    calibrate, level_shares, normalized_distance, DifficultyThresholds, TargetSplit,
};
use nameguess_core::jsonl;
use nameguess_core::metrics::{
    aggregate, render_report, Convention, EvalRecord, EvalReport, Prediction,
};
use nameguess_core::promptkit::{
    build_bundles, extract_answers, PromptBundle, PromptMode, PromptOptions, SampleMode,
};
use nameguess_core::segment::{FrequencyLexicon, Vocabulary};
use nameguess_remote::{
    fetch_socrata, run_inference, CompletionBackend, OpenAiCompletions, RawCompletion,
};

use crate::config::AppConfig;
use crate::io::{self, read_jsonl, write_atomic, write_jsonl};
use crate::manifest::{self, Recorder};
use crate::stub::StubModel;
use crate::{
    Cli, ClassifyArgs, Command, ConventionArg, EndpointFailure, FabricateArgs, InferArgs,
    IngestArgs, ModeArg, PromptsArgs, ReportArgs, ScoreArgs, SegmentArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    let mut config = AppConfig::load(cli.config.as_deref())?;
    let seed = config.resolve_seed(cli.seed);
    let name = match &cli.command {
        Command::Ingest(_) => "ingest",
        Command::Fabricate(_) => "fabricate",
        Command::ClassifyDifficulty(_) => "classify-difficulty",
        Command::Prompts(_) => "prompts",
        Command::Infer(_) => "infer",
        Command::Score(_) => "score",
        Command::Report(_) => "report",
    };
    let mut rec = Recorder::new(name);
    if let Some(path) = &cli.config {
        rec.input(path);
    }
    let result = match &cli.command {
        Command::Ingest(a) => ingest(a, &mut config, &mut rec),
        Command::Fabricate(a) => fabricate(a, &mut config, &mut rec),
        Command::ClassifyDifficulty(a) => classify_difficulty(a, &mut config, &mut rec),
        Command::Prompts(a) => prompts(a, &mut config, &mut rec),
        Command::Infer(a) => infer(a, &mut config, &mut rec),
        Command::Score(a) => score(a, &config, &mut rec),
        Command::Report(a) => report(a, &config, &mut rec),
    };
    // a manifest is written even when the stage failed part-way
    let primary = rec.primary_output().map(Path::to_path_buf);
    let m = rec.finish(&config, seed);
    manifest::emit(&m, cli.manifest.as_deref(), primary.as_deref())?;
    result
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn ingest(a: &IngestArgs, config: &mut AppConfig, rec: &mut Recorder) -> Result<()> {
    config.filter.validate()?;
    if a.inputs.is_empty() && a.datasets.is_empty() {
        bail!("nothing to ingest: pass --input and/or --dataset");
    }
    let mut tables: Vec<Table> = Vec::new();
    let mut unreadable: Vec<ManifestEntry> = Vec::new();
    for input in &a.inputs {
        rec.input(input);
        for file in io::csv_files(input)? {
            match io::read_table(&file) {
                Ok(t) => tables.push(t),
                Err(e) if a.skip_bad => {
                    tracing::warn!(file = %file.display(), error = %format!("{e:#}"), "skipping unreadable table");
                    unreadable.push(ManifestEntry {
                        id: io::table_id(&file),
                        n_rows: 0,
                        n_cols: 0,
                        kept: false,
                        reason: Some(format!("parse error: {:#}", e)),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    if let Some(domain) = &a.socrata_domain {
        let rt = runtime()?;
        let client = nameguess_remote::HttpClient::new();
        for id in &a.datasets {
            let table = rt
                .block_on(fetch_socrata(&client, domain, id, a.limit))
                .map_err(|e| anyhow!(EndpointFailure(format!("dataset {id}: {e}"))))?;
            tables.push(table);
        }
    }
    rec.count("tables_read", tables.len() + unreadable.len());

    let outcome = filter_tables(tables, &config.filter);
    rec.count("tables_kept", outcome.kept.len());
    rec.count("tables_rejected", outcome.rejected.len() + unreadable.len());

    let manifest_path = a
        .corpus_manifest
        .clone()
        .unwrap_or_else(|| a.out_dir.join("corpus_manifest.jsonl"));
    let mut entries = outcome.manifest;
    entries.extend(unreadable);
    write_jsonl(&manifest_path, &entries)?;
    rec.output(&manifest_path);
    for t in &outcome.kept {
        let path = a.out_dir.join(format!("{}.csv", t.id));
        let mut buf = Vec::new();
        t.write_csv(&mut buf)?;
        write_atomic(&path, &buf)?;
    }
    rec.output(&a.out_dir);
    tracing::info!(kept = outcome.kept.len(), rejected = outcome.rejected.len(), "ingested");
    Ok(())
}

fn load_segmenters(
    args: &SegmentArgs,
    config: &mut AppConfig,
    rec: &mut Recorder,
) -> Result<(Vocabulary, FrequencyLexicon)> {
    if let Some(p) = &args.lexicon {
        config.segment.lexicon = Some(p.clone());
    }
    if let Some(p) = &args.vocab {
        config.segment.vocab = Some(p.clone());
    }
    if let Some(n) = args.min_word_len {
        config.segment.min_word_len = n;
    }
    let lexicon = match &config.segment.lexicon {
        Some(p) => {
            rec.input(p);
            FrequencyLexicon::load(File::open(p).with_context(|| format!("opening {}", p.display()))?)?
        }
        None => FrequencyLexicon::embedded(),
    };
    let vocab = match &config.segment.vocab {
        Some(p) => {
            rec.input(p);
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Vocabulary::build(BufReader::new(f), config.segment.min_word_len)?
        }
        None => Vocabulary::embedded_with_min_len(config.segment.min_word_len),
    };
    Ok((vocab, lexicon))
}

fn fabricate(a: &FabricateArgs, config: &mut AppConfig, rec: &mut Recorder) -> Result<()> {
    if let Some(p) = &a.lookup {
        config.fabrication.lookup_path = Some(p.clone());
    }
    if let Some(p) = &a.acronyms {
        config.fabrication.acronym_path = Some(p.clone());
    }
    config.fabrication.validate()?;
    let (vocab, lexicon) = load_segmenters(&a.segment, config, rec)?;
    let fab_cfg = &config.fabrication;
    for p in [&fab_cfg.lookup_path, &fab_cfg.acronym_path].into_iter().flatten() {
        rec.input(p);
    }
    let dicts = Dictionaries::load(fab_cfg.lookup_path.as_deref(), fab_cfg.acronym_path.as_deref())?;

    rec.input(&a.tables);
    let tables = io::load_tables(&a.tables)?;
    rec.count("tables", tables.len());
    rec.count("columns", tables.iter().map(Table::n_cols).sum());

    let fab = Fabricator { config: fab_cfg, dicts: &dicts, vocab: &vocab, lexicon: &lexicon };
    let mut pairs = match a.threads {
        Some(n) => fab.fabricate_with_threads(&tables, n)?,
        None => fab.fabricate_corpus(&tables)?,
    };
    if a.no_trace {
        pairs.iter_mut().for_each(|p| p.trace = None);
    }
    rec.count("pairs", pairs.len());
    write_jsonl(&a.out, &pairs)?;
    rec.output(&a.out);
    tracing::info!(pairs = pairs.len(), tables = tables.len(), "fabricated");
    Ok(())
}

fn classify_difficulty(a: &ClassifyArgs, config: &mut AppConfig, rec: &mut Recorder) -> Result<()> {
    rec.input(&a.pairs);
    let mut pairs: Vec<NamePair> = read_jsonl(&a.pairs)?;
    let distances: Vec<f64> = pairs
        .iter()
        .map(|p| {
            normalized_distance(&p.query_name, &p.logical_name).with_context(|| {
                format!("table {} column {}", p.table_id, p.column_index)
            })
        })
        .collect::<Result<_>>()?;

    let thresholds = match (&a.thresholds, &a.calibrate) {
        (Some(t), _) => t.parse::<DifficultyThresholds>()?,
        (None, Some(target)) => {
            let target: TargetSplit = target.parse()?;
            let t = calibrate(&distances, &target)?;
            let shares = level_shares(&distances, &t);
            println!(
                "calibrated thresholds {:.6},{:.6},{:.6}; shares {:.4},{:.4},{:.4},{:.4} (target {:.4},{:.4},{:.4},{:.4})",
                t.t1, t.t2, t.t3, shares[0], shares[1], shares[2], shares[3],
                target.0[0], target.0[1], target.0[2], target.0[3]
            );
            t
        }
        (None, None) => config.difficulty,
    };
    thresholds.validate()?;
    config.difficulty = thresholds;

    for (p, d) in pairs.iter_mut().zip(&distances) {
        p.difficulty = Some(thresholds.level(*d));
    }
    let shares = level_shares(&distances, &thresholds);
    for (level, share) in nameguess_core::DifficultyLevel::ALL.iter().zip(shares) {
        rec.count(&format!("level_{level:?}").to_lowercase(), (share * pairs.len() as f64).round() as usize);
    }
    rec.count("pairs", pairs.len());
    let out = a.out.as_ref().unwrap_or(&a.pairs);
    write_jsonl(out, &pairs)?;
    rec.output(out);
    Ok(())
}

fn group_pairs(pairs: &[NamePair]) -> BTreeMap<&str, Vec<&NamePair>> {
    let mut by_table: BTreeMap<&str, Vec<&NamePair>> = BTreeMap::new();
    for p in pairs {
        by_table.entry(p.table_id.as_str()).or_default().push(p);
    }
    by_table
}

fn prompts(a: &PromptsArgs, config: &mut AppConfig, rec: &mut Recorder) -> Result<()> {
    if let Some(k) = a.k {
        config.prompts.k = k;
    }
    if let Some(n) = a.n {
        config.prompts.n = n;
    }
    if a.demo {
        config.prompts.demo = true;
    }
    if let Some(s) = a.sample_seed {
        config.prompts.sample_seed = Some(s);
    }
    let opts = PromptOptions {
        k: config.prompts.k,
        n: config.prompts.n,
        mode: match a.mode {
            ModeArg::Train => PromptMode::Train,
            ModeArg::Infer => PromptMode::Infer,
        },
        demo: config.prompts.demo,
        sampling: match config.prompts.sample_seed {
            Some(seed) => SampleMode::Random { seed },
            None => SampleMode::First,
        },
    };
    rec.input(&a.pairs);
    rec.input(&a.tables);
    let pairs: Vec<NamePair> = read_jsonl(&a.pairs)?;
    let tables: HashMap<String, Table> = io::load_tables(&a.tables)?
        .into_iter()
        .map(|t| (t.id.clone(), t))
        .collect();
    let mut bundles: Vec<PromptBundle> = Vec::new();
    for (table_id, group) in group_pairs(&pairs) {
        let table = tables
            .get(table_id)
            .ok_or_else(|| anyhow!("pairs reference table {table_id:?}, not found under {}", a.tables.display()))?;
        bundles.extend(build_bundles(table, &group, &opts)?);
    }
    rec.count("pairs", pairs.len());
    rec.count("bundles", bundles.len());
    write_jsonl(&a.out, &bundles)?;
    rec.output(&a.out);
    tracing::info!(bundles = bundles.len(), "prompts built");
    Ok(())
}

/// Turns one bundle's completion into per-column predictions.
fn predictions_for(bundle: &PromptBundle, completion: Result<&str, String>) -> Vec<Prediction> {
    let answers = completion.and_then(|c| {
        extract_answers(c, bundle.columns.len()).map_err(|e| format!("extraction failed: {e}"))
    });
    bundle
        .columns
        .iter()
        .enumerate()
        .map(|(i, &c)| Prediction {
            table_id: bundle.table_id.clone(),
            column_index: c,
            prediction: answers.as_ref().ok().map(|a| a[i].clone()),
            bundle_id: Some(bundle.bundle_id.clone()),
            error: answers.as_ref().err().cloned(),
        })
        .collect()
}

fn sort_predictions(preds: &mut [Prediction]) {
    preds.sort_by(|a, b| (a.table_id.as_str(), a.column_index).cmp(&(b.table_id.as_str(), b.column_index)));
}

async fn drive<B: CompletionBackend>(
    backend: &B,
    bundles: &[PromptBundle],
    max_in_flight: usize,
    raw_log: &Path,
) -> Result<Vec<nameguess_remote::InferenceResult>> {
    if let Some(dir) = raw_log.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    // unbuffered: each record reaches the file as one whole-line write
    let mut log = File::create(raw_log).with_context(|| format!("creating {}", raw_log.display()))?;
    let run = run_inference(backend, bundles, max_in_flight, |raw: &RawCompletion| {
        jsonl::write_line(&mut log, raw)
    });
    tokio::select! {
        r = run => Ok(r?),
        _ = tokio::signal::ctrl_c() => bail!("interrupted; completed records are in {}", raw_log.display()),
    }
}

fn infer(a: &InferArgs, config: &mut AppConfig, rec: &mut Recorder) -> Result<()> {
    rec.input(&a.bundles);
    let bundles: Vec<PromptBundle> = read_jsonl(&a.bundles)?;
    rec.count("bundles", bundles.len());

    let mut preds: Vec<Prediction> = Vec::new();
    let mut endpoint_errors = 0usize;

    if let Some(replay) = &a.replay {
        rec.input(replay);
        let raw: Vec<RawCompletion> = read_jsonl(replay)?;
        let by_id: HashMap<&str, &RawCompletion> = raw.iter().map(|r| (r.bundle_id.as_str(), r)).collect();
        for b in &bundles {
            let completion = match by_id.get(b.bundle_id.as_str()) {
                Some(RawCompletion { completion: Some(c), .. }) => Ok(c.as_str()),
                Some(r) => Err(r.status.clone()),
                None => Err("no raw completion recorded".to_string()),
            };
            preds.extend(predictions_for(b, completion));
        }
    } else {
        let raw_log = a.raw_log.clone().unwrap_or_else(|| {
            let mut s = a.out.as_os_str().to_owned();
            s.push(".raw.jsonl");
            s.into()
        });
        let rt = runtime()?;
        let results = if let Some(kind) = a.stub {
            let golds = match &a.pairs {
                Some(p) => {
                    rec.input(p);
                    read_jsonl::<NamePair>(p)?
                        .into_iter()
                        .map(|p| ((p.table_id, p.column_index), p.logical_name))
                        .collect()
                }
                None if kind == crate::stub::StubKind::Identity => HashMap::new(),
                None => bail!("--stub {kind:?} needs --pairs for gold names"),
            };
            let model = StubModel { kind, golds, seed: config.fabrication.seed };
            rt.block_on(drive(&model, &bundles, 1, &raw_log))?
        } else {
            let ep = &mut config.endpoint;
            if let Some(v) = &a.endpoint_url {
                ep.base_url = v.clone();
            }
            if let Some(v) = &a.model {
                ep.model = v.clone();
            }
            if let Some(v) = a.max_new_tokens {
                ep.max_new_tokens = v;
            }
            if let Some(v) = a.temperature {
                ep.temperature = v;
            }
            if a.no_stop {
                ep.stop.clear();
            }
            if let Some(v) = a.max_in_flight {
                ep.max_in_flight = v;
            }
            if let Some(v) = a.max_retries {
                ep.max_retries = v;
            }
            if let Some(v) = a.timeout_secs {
                ep.timeout_secs = v;
            }
            let client = OpenAiCompletions::new(ep.clone())?;
            rt.block_on(drive(&client, &bundles, ep.max_in_flight, &raw_log))?
        };
        rec.output(&raw_log);
        let by_id: HashMap<&str, &PromptBundle> = bundles.iter().map(|b| (b.bundle_id.as_str(), b)).collect();
        for r in &results {
            let b = by_id[r.bundle_id.as_str()];
            let completion = r.completion.as_deref().map_err(|e| {
                endpoint_errors += 1;
                tracing::error!(bundle = %r.bundle_id, error = %e, "endpoint failure");
                e.to_string()
            });
            preds.extend(predictions_for(b, completion));
        }
    }
    sort_predictions(&mut preds);
    let extracted = preds.iter().filter(|p| p.prediction.is_some()).count();
    rec.count("predictions", preds.len());
    rec.count("extracted", extracted);
    rec.count("endpoint_errors", endpoint_errors);
    write_jsonl(&a.out, &preds)?;
    rec.primary(&a.out);
    tracing::info!(predictions = preds.len(), extracted, "inference done");
    if endpoint_errors > 0 {
        return Err(anyhow!(EndpointFailure(format!(
            "{endpoint_errors} of {} bundles failed at the endpoint",
            bundles.len()
        ))));
    }
    Ok(())
}

fn score_records(
    pairs: &[NamePair],
    preds: &[Prediction],
    thresholds: &DifficultyThresholds,
    rec: &mut Recorder,
) -> Result<Vec<EvalRecord>> {
    let mut by_key: HashMap<(&str, usize), &Prediction> = HashMap::new();
    for p in preds {
        if by_key.insert((p.table_id.as_str(), p.column_index), p).is_some() {
            bail!("duplicate prediction for table {} column {}", p.table_id, p.column_index);
        }
    }
    let mut missing = 0usize;
    let records = pairs
        .iter()
        .map(|pair| {
            let pred = by_key.remove(&(pair.table_id.as_str(), pair.column_index));
            if pred.is_none() {
                missing += 1;
            }
            let difficulty = match pair.difficulty {
                Some(d) => d,
                None => thresholds.level(normalized_distance(&pair.query_name, &pair.logical_name)?),
            };
            Ok(EvalRecord::score(
                pair.table_id.clone(),
                pair.column_index,
                pred.and_then(|p| p.prediction.clone()),
                pair.logical_name.clone(),
                difficulty,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    if missing > 0 {
        tracing::warn!(missing, "pairs without a prediction are scored as extraction failures");
    }
    if !by_key.is_empty() {
        tracing::warn!(unmatched = by_key.len(), "predictions without a matching pair were ignored");
    }
    rec.count("records", records.len());
    rec.count("missing_predictions", missing);
    rec.count("unmatched_predictions", by_key.len());
    Ok(records)
}

fn score(a: &ScoreArgs, config: &AppConfig, rec: &mut Recorder) -> Result<()> {
    rec.input(&a.pairs);
    rec.input(&a.preds);
    let pairs: Vec<NamePair> = read_jsonl(&a.pairs)?;
    let preds: Vec<Prediction> = read_jsonl(&a.preds)?;
    let records = score_records(&pairs, &preds, &config.difficulty, rec)?;
    let report = aggregate(&records)?;
    let o = &report.overall;
    println!(
        "EM {:.1} F1 {:.1} (all records); extracted {}/{} ({:.1}%)",
        o.em * 100.0,
        o.f1 * 100.0,
        o.extracted,
        o.n,
        o.extraction_rate * 100.0
    );
    if let Some(out) = &a.out {
        write_atomic(out, format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes())?;
        rec.output(out);
    }
    if let Some(out) = &a.records_out {
        write_jsonl(out, &records)?;
        rec.output(out);
    }
    Ok(())
}

/// A score report JSON, or a predictions file scored against `pairs`.
fn load_report(
    path: &Path,
    pairs: Option<&[NamePair]>,
    config: &AppConfig,
    rec: &mut Recorder,
) -> Result<EvalReport> {
    rec.input(path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(report) = serde_json::from_str::<EvalReport>(&text) {
        return Ok(report);
    }
    let pairs = pairs.ok_or_else(|| {
        anyhow!("{} is not a score report; pass --pairs to score it as predictions", path.display())
    })?;
    let preds: Vec<Prediction> = jsonl::read(text.as_bytes())
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(aggregate(&score_records(pairs, &preds, &config.difficulty, rec)?)?)
}

fn report(a: &ReportArgs, config: &AppConfig, rec: &mut Recorder) -> Result<()> {
    if a.q.is_none() && a.tq.is_none() {
        bail!("pass --q and/or --tq");
    }
    let pairs: Option<Vec<NamePair>> = match &a.pairs {
        Some(p) => {
            rec.input(p);
            Some(read_jsonl(p)?)
        }
        None => None,
    };
    let q = a.q.as_deref().map(|p| load_report(p, pairs.as_deref(), config, rec)).transpose()?;
    let tq = a.tq.as_deref().map(|p| load_report(p, pairs.as_deref(), config, rec)).transpose()?;
    let convention = match a.convention {
        ConventionArg::Extracted => Convention::Extracted,
        ConventionArg::All => Convention::All,
    };
    let text = render_report(&a.model, q.as_ref(), tq.as_ref(), convention);
    match &a.out {
        Some(out) => {
            write_atomic(out, text.as_bytes())?;
            rec.output(out);
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

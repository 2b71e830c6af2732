//! Command-line front end. Every subcommand reads and writes a single run
//! directory and leaves a manifest of what it produced.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    clusters_to_lines, explain, perturb_importance, top_words, AttentionReport, ClusterAssignment,
    Importances, PurityReport,
};
use crate::corpus::{
    parse_corpus, split, synth_corpus, write_corpus, DatasetSplits, GroundTruth, TweetKind,
    TweetRecord,
};
use crate::encoders::{CulturalProvider, StubProvider, SynthProvider};
use crate::error::{Error, Result};
use crate::fusion::MODALITIES;
use crate::hategraph::{edges_to_lines, read_edges, read_id_list, HateAccountSet};
use crate::model::{FeatureSource, GraphArtifacts, HateModel};
use crate::pipeline::{cluster_and_score, run_graph_stage, RunConfig};
use crate::training::{
    metrics_for, predict_inputs, train, train_linear_baseline, FeatureMode, LinearKind, Metrics,
};

#[derive(Debug, Parser)]
#[command(
    name = "mmhate",
    version,
    about = "Multi-modal hate speech classification and analysis"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every randomized component.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Run directory holding all artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use the text-only ablation instead of the fused model.
    #[arg(long, global = true)]
    text_only: bool,
    #[arg(long, global = true, value_name = "INT")]
    k_clusters: Option<usize>,
    #[arg(long, global = true, value_name = "FLOAT")]
    damping: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus, follow graph and planted categories.
    Synth,
    /// Rank the follow graph, select hate accounts and write follow vectors.
    Graph,
    /// Train a classifier on the training split.
    Train,
    /// Evaluate a trained classifier on the test split.
    Eval,
    /// Cluster hate embeddings of the test split and score purity.
    Cluster,
    /// Show attention and occlusion importances for one tweet.
    Explain { tweet_id: String },
    /// Assemble the model comparison and purity tables.
    Report,
}

/// Parse `argv` (program name first), run the command and return the exit
/// code: 0 on success, 1 on runtime failure, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    2
                }
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let diag = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{diag}");
            1
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    text_only: bool,
    written: BTreeMap<String, String>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} has no file name", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    config_sha256: String,
    artifacts: &'a BTreeMap<String, String>,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn variant(&self) -> &'static str {
        if self.text_only {
            "text-only"
        } else {
            "text-sc"
        }
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(name), bytes)?;
        self.written.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn manifest(&mut self, command: &str) -> Result<()> {
        let m = Manifest {
            command,
            seed: self.cfg.seed,
            config_sha256: sha256_hex(self.cfg.to_toml().as_bytes()),
            artifacts: &self.written,
        };
        let bytes = to_json(&m)?;
        write_atomic(&self.path(&format!("manifest-{command}.json")), &bytes)
    }

    fn input_path(&self, configured: &Option<PathBuf>, default: &str) -> PathBuf {
        configured.clone().unwrap_or_else(|| self.path(default))
    }

    fn records(&self) -> Result<Vec<TweetRecord>> {
        parse_corpus(open(
            &self.input_path(&self.cfg.paths.corpus, "corpus.jsonl"),
        )?)
    }

    fn edges(&self) -> Result<Vec<(String, String)>> {
        read_edges(open(&self.input_path(&self.cfg.paths.edges, "edges.txt"))?)
    }

    fn splits(&self, records: &[TweetRecord]) -> Result<DatasetSplits> {
        split(records, self.cfg.split_ratios(), self.cfg.seed)
    }

    fn graph_artifacts(&self) -> Result<GraphArtifacts> {
        let hate =
            HateAccountSet::from_ordered(read_id_list(open(&self.path("hate_accounts.txt"))?)?)?;
        Ok(GraphArtifacts::new(hate, &self.edges()?))
    }

    /// The synthetic provider when planted communities are on disk,
    /// otherwise the hash stub over the corpus authors.
    fn provider(&self, records: &[TweetRecord]) -> Result<Box<dyn CulturalProvider>> {
        let dim = self.cfg.model.cultural_dim;
        let path = self.path("communities.tsv");
        if path.exists() {
            let mut communities = BTreeMap::new();
            for (i, line) in read_to_string(&path)?.lines().enumerate().skip(1) {
                let bad = || Error::Parse {
                    line: i + 1,
                    message: "expected `author<TAB>community`".into(),
                };
                let (author, c) = line.split_once('\t').ok_or_else(bad)?;
                let c = if c == "-" {
                    None
                } else {
                    Some(c.parse().map_err(|_| bad())?)
                };
                communities.insert(author.to_string(), c);
            }
            Ok(Box::new(SynthProvider::new(
                dim,
                self.cfg.seed,
                communities,
            )))
        } else {
            let authors = records.iter().map(|r| r.author_id.clone());
            Ok(Box::new(StubProvider::with_known(
                dim,
                self.cfg.seed,
                authors,
            )))
        }
    }

    fn kinds(&self) -> Result<Option<BTreeMap<String, TweetKind>>> {
        let path = self.path("kinds.tsv");
        if !path.exists() {
            return Ok(None);
        }
        let mut out = BTreeMap::new();
        for (i, line) in read_to_string(&path)?.lines().enumerate().skip(1) {
            let parsed = line
                .split_once('\t')
                .and_then(|(id, k)| TweetKind::parse(k).map(|k| (id.to_string(), k)));
            let (id, k) = parsed.ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `tweet_id<TAB>kind`".into(),
            })?;
            out.insert(id, k);
        }
        Ok(Some(out))
    }

    fn truth(&self) -> Result<Option<GroundTruth>> {
        let path = self.path("truth.txt");
        if !path.exists() {
            return Ok(None);
        }
        let mut out = GroundTruth::new();
        for (i, line) in read_to_string(&path)?.lines().enumerate() {
            let parsed = line
                .split_once(' ')
                .and_then(|(id, c)| c.parse().ok().map(|c| (id.to_string(), c)));
            let (id, c) = parsed.ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `tweet_id category`".into(),
            })?;
            out.insert(id, c);
        }
        Ok(Some(out))
    }

    fn checkpoint_name(&self) -> String {
        format!("model-{}.ckpt", self.variant())
    }

    fn load_model(&self) -> Result<HateModel> {
        HateModel::load(&self.path(&self.checkpoint_name()))
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_toml(&read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(k) = cli.k_clusters {
        cfg.analysis.k_clusters = k;
    }
    if let Some(d) = cli.damping {
        cfg.graph.damping = d;
    }
    if let Some(out) = &cli.out {
        cfg.paths.out = Some(out.clone());
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let out = cfg
        .paths
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("run"));
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut ctx = Ctx {
        text_only: cli.text_only || cfg.train.text_only,
        cfg,
        out,
        written: BTreeMap::new(),
    };
    let name = match &cli.command {
        Command::Synth => {
            cmd_synth(&mut ctx)?;
            "synth"
        }
        Command::Graph => {
            cmd_graph(&mut ctx)?;
            "graph"
        }
        Command::Train => {
            cmd_train(&mut ctx)?;
            "train"
        }
        Command::Eval => {
            cmd_eval(&mut ctx)?;
            "eval"
        }
        Command::Cluster => {
            cmd_cluster(&mut ctx)?;
            "cluster"
        }
        Command::Explain { tweet_id } => {
            cmd_explain(&mut ctx, tweet_id)?;
            "explain"
        }
        Command::Report => {
            cmd_report(&mut ctx)?;
            "report"
        }
    };
    ctx.manifest(name)
}

fn cmd_synth(ctx: &mut Ctx) -> Result<()> {
    let corpus = synth_corpus(&ctx.cfg.synth)?;
    let mut buf = Vec::new();
    write_corpus(&mut buf, &corpus.records).map_err(|e| Error::io(ctx.path("corpus.jsonl"), e))?;
    ctx.write("corpus.jsonl", &buf)?;
    ctx.write(
        "edges.txt",
        edges_to_lines(corpus.edges.iter().map(|(a, b)| (a, b))).as_bytes(),
    )?;
    let seeds: String = corpus
        .seed_accounts
        .iter()
        .map(|s| format!("{s}\n"))
        .collect();
    ctx.write("seeds.txt", seeds.as_bytes())?;
    let truth: String = corpus
        .truth
        .iter()
        .map(|(id, c)| format!("{id} {c}\n"))
        .collect();
    ctx.write("truth.txt", truth.as_bytes())?;
    let mut comm = String::from("author\tcommunity\n");
    for (a, c) in &corpus.communities {
        comm.push_str(&format!(
            "{a}\t{}\n",
            c.map_or("-".to_string(), |c| c.to_string())
        ));
    }
    ctx.write("communities.tsv", comm.as_bytes())?;
    let mut kinds = String::from("tweet_id\tkind\n");
    for (id, k) in &corpus.kinds {
        kinds.push_str(&format!("{id}\t{}\n", k.as_str()));
    }
    ctx.write("kinds.tsv", kinds.as_bytes())?;
    ctx.write("lexicon.tsv", corpus.lexicon.to_tsv().as_bytes())?;
    println!(
        "synthesized {} tweets, {} edges, {} seed accounts into {}",
        corpus.records.len(),
        corpus.edges.len(),
        corpus.seed_accounts.len(),
        ctx.out.display()
    );
    Ok(())
}

fn cmd_graph(ctx: &mut Ctx) -> Result<()> {
    let edges = ctx.edges()?;
    let seeds = read_id_list(open(&ctx.input_path(&ctx.cfg.paths.seeds, "seeds.txt"))?)?;
    let edge_refs: Vec<(&str, &str)> = edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let seed_refs: Vec<&str> = seeds.iter().map(String::as_str).collect();
    let stage = run_graph_stage(&edge_refs, &seed_refs, &ctx.cfg.graph)?;
    let mut ranks = String::from("account\tpagerank\n");
    for (id, s) in stage.ids.iter().zip(&stage.ranks.scores) {
        ranks.push_str(&format!("{id}\t{s:.17e}\n"));
    }
    ctx.write("pagerank.tsv", ranks.as_bytes())?;
    ctx.write(
        "hate_accounts.txt",
        stage.artifacts.hate_accounts.to_lines().as_bytes(),
    )?;
    let authors: Vec<String> = match ctx.records() {
        Ok(records) => {
            let set: std::collections::BTreeSet<String> =
                records.into_iter().map(|r| r.author_id).collect();
            set.into_iter().collect()
        }
        Err(_) => stage.artifacts.author_edges.ids().to_vec(),
    };
    let mut vectors = String::new();
    for a in &authors {
        vectors.push_str(&format!(
            "{a} {}\n",
            stage.artifacts.follow_vector(a).to_bitstring()
        ));
    }
    ctx.write("follow_vectors.txt", vectors.as_bytes())?;
    println!(
        "pagerank over {} vertices ({} iterations); {} hate accounts; {} follow vectors",
        stage.ids.len(),
        stage.ranks.iterations,
        stage.artifacts.hate_accounts.len(),
        authors.len()
    );
    Ok(())
}

fn cmd_train(ctx: &mut Ctx) -> Result<()> {
    let records = ctx.records()?;
    let splits = ctx.splits(&records)?;
    let graph = ctx.graph_artifacts()?;
    let provider = ctx.provider(&records)?;
    let src = FeatureSource {
        graph: &graph,
        provider: provider.as_ref(),
    };
    let mut train_cfg = ctx.cfg.train.clone();
    train_cfg.text_only = ctx.text_only;
    let trained = train(&splits, ctx.cfg.model, &train_cfg, src)?;
    let mut buf = Vec::new();
    trained.model.write_checkpoint(&mut buf)?;
    let ckpt = ctx.checkpoint_name();
    ctx.write(&ckpt, &buf)?;
    let history = format!("history-{}.csv", ctx.variant());
    ctx.write(&history, trained.history_csv().as_bytes())?;
    println!(
        "trained {} for {} epochs; kept epoch {} (val f1_hate {:.4})",
        ctx.variant(),
        trained.history.len(),
        trained.best_epoch,
        trained.history[trained.best_epoch - 1].val_f1_hate
    );
    Ok(())
}

/// Metrics file contents for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub model: String,
    pub f1_hate: f64,
    pub f1_overall: f64,
    pub code_word_f1_hate: Option<f64>,
    pub metrics: Metrics,
}

fn metrics_table(rows: &[MetricsRecord]) -> String {
    let mut s = format!(
        "{:<12} {:>8} {:>10} {:>14}\n",
        "model", "f1_hate", "f1_overall", "code_word_hate"
    );
    for r in rows {
        let cw = r
            .code_word_f1_hate
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        s.push_str(&format!(
            "{:<12} {:>8.4} {:>10.4} {:>14}\n",
            r.model, r.f1_hate, r.f1_overall, cw
        ));
    }
    s
}

fn cmd_eval(ctx: &mut Ctx) -> Result<()> {
    let records = ctx.records()?;
    let splits = ctx.splits(&records)?;
    let graph = ctx.graph_artifacts()?;
    let provider = ctx.provider(&records)?;
    let src = FeatureSource {
        graph: &graph,
        provider: provider.as_ref(),
    };
    let model = ctx.load_model()?;
    let inputs = model.prepare_all(&splits.test, src)?;
    let preds = predict_inputs(&model, &inputs)?;
    let metrics = metrics_for(&splits.test, &preds)?;
    let code_word_f1_hate = match ctx.kinds()? {
        Some(kinds) => {
            let (r, p): (Vec<_>, Vec<_>) = splits
                .test
                .iter()
                .zip(&preds)
                .filter(|(r, _)| kinds.get(&r.id).is_some_and(|k| k.has_code_word()))
                .map(|(r, p)| (r.clone(), p.clone()))
                .unzip();
            if r.is_empty() {
                None
            } else {
                Some(metrics_for(&r, &p)?.f1_hate)
            }
        }
        None => None,
    };
    let rec = MetricsRecord {
        model: ctx.variant().to_string(),
        f1_hate: metrics.f1_hate,
        f1_overall: metrics.f1_overall,
        code_word_f1_hate,
        metrics,
    };
    let v = ctx.variant();
    ctx.write(&format!("metrics-{v}.json"), &to_json(&rec)?)?;
    let table = metrics_table(std::slice::from_ref(&rec));
    let tsv: String = table
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join("\t") + "\n")
        .collect();
    ctx.write(&format!("metrics-{v}.tsv"), tsv.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn cmd_cluster(ctx: &mut Ctx) -> Result<()> {
    let records = ctx.records()?;
    let splits = ctx.splits(&records)?;
    let graph = ctx.graph_artifacts()?;
    let provider = ctx.provider(&records)?;
    let src = FeatureSource {
        graph: &graph,
        provider: provider.as_ref(),
    };
    let model = ctx.load_model()?;
    let inputs = model.prepare_all(&splits.test, src)?;
    let preds = predict_inputs(&model, &inputs)?;
    let v = ctx.variant();
    let truth = ctx.truth()?.unwrap_or_default();
    let embeddings: Vec<(String, Vec<f64>)> = crate::analysis::hate_embeddings(&inputs, &preds)
        .into_iter()
        .map(|e| (e.id, e.vector))
        .collect();
    let clusters: ClusterAssignment =
        crate::analysis::agglomerative_cluster(&embeddings, ctx.cfg.analysis.k_clusters)?;
    ctx.write(
        &format!("clusters-{v}.txt"),
        clusters_to_lines(&clusters).as_bytes(),
    )?;
    let reports: BTreeMap<String, AttentionReport> = inputs
        .iter()
        .zip(&preds)
        .filter(|(x, _)| clusters.contains_key(&x.id))
        .map(|(x, p)| (x.id.clone(), AttentionReport::from_prediction(x, p)))
        .collect();
    let top = top_words(&reports, &clusters, ctx.cfg.analysis.top_words);
    let mut tsv = String::from("cluster\trank\tword\tattention_mass\n");
    for (c, words) in &top {
        for (i, (w, m)) in words.iter().enumerate() {
            tsv.push_str(&format!("{c}\t{}\t{w}\t{m:.6}\n", i + 1));
        }
    }
    ctx.write(&format!("top-words-{v}.tsv"), tsv.as_bytes())?;
    match cluster_and_score(&inputs, &preds, &truth, &ctx.cfg.analysis)? {
        Some((_, report)) => {
            ctx.write(&format!("purity-{v}.json"), &to_json(&report)?)?;
            println!(
                "{} hate embeddings in {} clusters; purity {:.4} over {} labelled tweets",
                embeddings.len(),
                ctx.cfg.analysis.k_clusters,
                report.purity,
                report.n
            );
        }
        None => println!(
            "{} hate embeddings in {} clusters; no planted categories to score against",
            embeddings.len(),
            ctx.cfg.analysis.k_clusters
        ),
    }
    Ok(())
}

fn bar(x: f64, width: usize) -> String {
    let n = (x.clamp(0.0, 1.0) * width as f64).round() as usize;
    format!("{}{}", "#".repeat(n), ".".repeat(width - n))
}

/// Aligned token view with attention and occlusion rows, plus modality bars.
pub fn render_explanation(report: &AttentionReport, imp: &Importances) -> String {
    let widths: Vec<usize> = report
        .tokens
        .iter()
        .map(|t| t.chars().count().max(6))
        .collect();
    let row = |cells: Vec<String>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = format!(
        "tweet {}  predicted {}  probs [{}]\n",
        report.id,
        report.label,
        report
            .probs
            .iter()
            .map(|p| format!("{p:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    s.push_str(&format!("token     {}\n", row(report.tokens.clone())));
    s.push_str(&format!(
        "alpha     {}\n",
        row(report.alpha.iter().map(|a| format!("{a:.3}")).collect())
    ));
    s.push_str(&format!(
        "occlusion {}\n",
        row(imp.tokens.iter().map(|d| format!("{d:+.3}")).collect())
    ));
    s.push_str("modality attention\n");
    for (m, b) in MODALITIES.iter().zip(&report.beta) {
        s.push_str(&format!("  {m:<9} {} {b:.3}\n", bar(*b, 30)));
    }
    s.push_str(&format!(
        "modality occlusion: cultural {:+.3}, social {:+.3}\n",
        imp.cultural, imp.social
    ));
    s
}

fn cmd_explain(ctx: &mut Ctx, tweet_id: &str) -> Result<()> {
    let records = ctx.records()?;
    let record = records
        .iter()
        .find(|r| r.id == tweet_id)
        .ok_or_else(|| Error::invalid(format!("no tweet with id `{tweet_id}`")))?;
    let graph = ctx.graph_artifacts()?;
    let provider = ctx.provider(&records)?;
    let src = FeatureSource {
        graph: &graph,
        provider: provider.as_ref(),
    };
    let model = ctx.load_model()?;
    let input = model.prepare(record, src)?;
    let report = explain(&model, &input)?;
    let imp = perturb_importance(&model, &input)?;
    #[derive(Serialize)]
    struct Explanation<'a> {
        report: &'a AttentionReport,
        importances: &'a Importances,
    }
    let v = ctx.variant();
    ctx.write(
        &format!("explain-{v}-{tweet_id}.json"),
        &to_json(&Explanation {
            report: &report,
            importances: &imp,
        })?,
    )?;
    print!("{}", render_explanation(&report, &imp));
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReportFile {
    models: Vec<MetricsRecord>,
    purity: BTreeMap<String, PurityReport>,
}

fn cmd_report(ctx: &mut Ctx) -> Result<()> {
    let records = ctx.records()?;
    let splits = ctx.splits(&records)?;
    let graph = ctx.graph_artifacts()?;
    let provider = ctx.provider(&records)?;
    let src = FeatureSource {
        graph: &graph,
        provider: provider.as_ref(),
    };
    let mut rows = Vec::new();
    for kind in [LinearKind::Logistic, LinearKind::Hinge] {
        let m = train_linear_baseline(
            kind,
            &splits,
            FeatureMode::TextSocialCultural,
            src,
            &ctx.cfg.linear,
        )?
        .evaluate(&splits.test, src)?;
        rows.push(MetricsRecord {
            model: kind.name().to_string(),
            f1_hate: m.f1_hate,
            f1_overall: m.f1_overall,
            code_word_f1_hate: None,
            metrics: m,
        });
    }
    let mut purity: BTreeMap<String, PurityReport> = BTreeMap::new();
    for v in ["text-only", "text-sc"] {
        let mp = ctx.path(&format!("metrics-{v}.json"));
        if mp.exists() {
            rows.push(serde_json::from_str(&read_to_string(&mp)?)?);
        }
        let pp = ctx.path(&format!("purity-{v}.json"));
        if pp.exists() {
            purity.insert(v.to_string(), serde_json::from_str(&read_to_string(&pp)?)?);
        }
    }
    let mut text = String::from("Classification (test split)\n");
    text.push_str(&metrics_table(&rows));
    text.push_str("\nHate embedding clusters\n");
    text.push_str(&format!(
        "{:<12} {:>8} {:>6} {:>4}\n",
        "model", "purity", "N", "k"
    ));
    for (m, p) in &purity {
        text.push_str(&format!(
            "{:<12} {:>8.4} {:>6} {:>4}\n",
            m, p.purity, p.n, p.k
        ));
    }
    ctx.write(
        "report.json",
        &to_json(&ReportFile {
            models: rows,
            purity,
        })?,
    )?;
    ctx.write("report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["mmhate"]), 2);
        assert_eq!(run(["mmhate", "frobnicate"]), 2);
        assert_eq!(run(["mmhate", "synth", "--seed", "abc"]), 2);
        assert_eq!(run(["mmhate", "--help"]), 0);
    }

    #[test]
    fn runtime_errors_exit_one() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(["mmhate", "train", "--out", out]), 1);
        assert_eq!(
            run([
                "mmhate",
                "synth",
                "--out",
                out,
                "--config",
                "/nonexistent.toml"
            ]),
            1
        );
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(
            &cfg,
            "seed = 1\n[analysis]\nk_clusters = 4\n[graph]\ndamping = 0.5\n",
        )
        .unwrap();
        let cli = Cli::try_parse_from([
            "mmhate",
            "graph",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--k-clusters",
            "7",
        ])
        .unwrap();
        let c = load_config(&cli).unwrap();
        assert_eq!((c.seed, c.train.seed, c.analysis.k_clusters), (9, 9, 7));
        assert_eq!(c.graph.damping, 0.5);
    }
}

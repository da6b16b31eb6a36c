//! Command-line pipeline: `index`, `learn`, `expand`, `search`, `eval` and
//! `experiment`.
//!
//! Settings resolve as command-line flag, then `--config` file entry, then
//! built-in default. The effective settings are echoed to stderr.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{parse_and_tokenize, CorpusIndex, StoplistSource, Tokenizer, TokenizerConfig};
use crate::error::{Error, Result};
use crate::evaluation::battery::write_file;
use crate::evaluation::{report, report_header, run_battery, BatteryConfig, QrelSet, DEFAULT_THRESHOLDS};
use crate::expansion::{expand_queries, is_query_file, query_file_header, read_query_file, write_query_file, QueryVector};
use crate::learner::{learn, BayesNet, Confidence, LearnOptions, DEFAULT_MAX_PARENTS};
use crate::retrieval::{run_header, search_all, RankedRun, DEFAULT_K};

#[derive(Debug, Parser)]
#[command(name = "polyqe", version, about = "Polytree thesaurus query expansion and evaluation")]
pub struct Cli {
    /// Worker threads (default: available processors; 1 = sequential).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// File of `key = value` lines supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an inverted file from a SMART document collection.
    Index(IndexArgs),
    /// Learn a polytree thesaurus from an index.
    Learn(LearnArgs),
    /// Expand SMART queries through a thesaurus.
    Expand(ExpandArgs),
    /// Rank documents for SMART or expanded queries.
    Search(SearchArgs),
    /// Evaluate a run against relevance judgments.
    Eval(EvalArgs),
    /// Run the confidence by threshold battery.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args, Default)]
pub struct TokenizerArgs {
    /// `builtin`, `none`, or a stoplist file.
    #[arg(long)]
    pub stoplist: Option<String>,
    /// Snowball English stemming: on or off.
    #[arg(long)]
    pub stem: Option<String>,
    /// Shortest token kept.
    #[arg(long = "min-len")]
    pub min_len: Option<String>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tokenizer: TokenizerArgs,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// One of 0.9, 0.95, 0.975, 0.99, 0.995.
    #[arg(long)]
    pub confidence: Option<String>,
    #[arg(long = "max-parents")]
    pub max_parents: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// Index whose tokenizer settings apply to the queries.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub net: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Posterior a term must exceed to be added, in (0, 1).
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// SMART query collection or expanded-query file.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Ranking depth (default: every scoring document).
    #[arg(short = 'k', long = "depth")]
    pub k: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Cutoff for the Recall and Precision rows.
    #[arg(short = 'k')]
    pub k: Option<String>,
    /// Report file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Recall-precision curve data file.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub docs: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Comma-separated confidence levels.
    #[arg(long)]
    pub confidences: Option<String>,
    /// Comma-separated thresholds.
    #[arg(long)]
    pub thresholds: Option<String>,
    #[arg(short = 'k')]
    pub k: Option<String>,
    #[arg(long = "max-parents")]
    pub max_parents: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tokenizer: TokenizerArgs,
}

const CONFIG_KEYS: &[&str] = &[
    "docs",
    "queries",
    "qrels",
    "index",
    "net",
    "run",
    "baseline",
    "out",
    "curve",
    "confidence",
    "confidences",
    "threshold",
    "thresholds",
    "k",
    "max_parents",
    "stoplist",
    "stem",
    "min_len",
    "jobs",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Flag,
    Config,
    Default,
}

/// Flag > config file > default resolution, recording what was used.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    effective: Vec<(String, String, &'static str)>,
}

impl Settings {
    /// Parse `key = value` lines; `#` starts a comment line. Keys may use
    /// `-` or `_`.
    pub fn parse_config<R: BufRead>(reader: R) -> Result<Self> {
        let mut file = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, "expected key = value"))?;
            let key = key.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::parse(idx + 1, format!("unknown setting {key:?}")));
            }
            file.insert(key, value.trim().to_string());
        }
        Ok(Settings {
            file,
            effective: Vec::new(),
        })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => open(p).and_then(Settings::parse_config).map_err(|e| e.in_file(p)),
        }
    }

    fn raw(&mut self, key: &str, flag: Option<String>, default: Option<String>) -> Option<String> {
        let (value, source) = match (flag, self.file.get(key)) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v.clone(), Source::Config),
            (None, None) => (default?, Source::Default),
        };
        let label = match source {
            Source::Flag => "flag",
            Source::Config => "config",
            Source::Default => "default",
        };
        self.effective.push((key.to_string(), value.clone(), label));
        Some(value)
    }

    fn value<T: FromStr>(&mut self, key: &str, flag: Option<String>, default: Option<String>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key, flag, default) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::InvalidArgument(format!("{}: invalid value {v:?}: {e}", flag_name(key)))),
        }
    }

    fn required<T: FromStr>(&mut self, key: &str, flag: Option<String>) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.value(key, flag, None)?.ok_or_else(|| {
            Error::InvalidArgument(format!("missing {} (or `{key}` in the config file)", flag_name(key)))
        })
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        self.value(key, flag.map(|p| p.to_string_lossy().into_owned()), None)
    }

    fn required_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        self.required(key, flag.map(|p| p.to_string_lossy().into_owned()))
    }

    fn tokenizer(&mut self, args: TokenizerArgs) -> Result<TokenizerConfig> {
        let defaults = TokenizerConfig::default();
        let mut config = defaults.clone();
        let stoplist = self.raw("stoplist", args.stoplist, Some(defaults.stoplist.to_string()));
        config.stoplist = StoplistSource::parse(&stoplist.unwrap_or_default());
        let stem = self.raw("stem", args.stem, Some("on".into())).unwrap_or_default();
        config.set("stem", &stem)?;
        let min_len = self.raw("min_len", args.min_len, Some(defaults.min_len.to_string())).unwrap_or_default();
        config.set("min_len", &min_len)?;
        Ok(config)
    }

    /// One `key=value (source)` line per setting used.
    pub fn describe(&self) -> String {
        self.effective
            .iter()
            .map(|(k, v, s)| format!("{k}={v} ({s})"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn unused_config_keys(&self) -> Vec<&str> {
        self.file
            .keys()
            .filter(|k| k.as_str() != "jobs" && !self.effective.iter().any(|(e, _, _)| e == *k))
            .map(String::as_str)
            .collect()
    }
}

fn flag_name(key: &str) -> String {
    if key == "k" {
        "-k".to_string()
    } else {
        format!("--{}", key.replace('_', "-"))
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn read_with<T>(path: &Path, parse: impl FnOnce(BufReader<File>) -> Result<T>) -> Result<T> {
    open(path).and_then(parse).map_err(|e| e.in_file(path))
}

pub fn read_index(path: &Path) -> Result<CorpusIndex> {
    read_with(path, CorpusIndex::read)
}

/// Queries from either an expanded-query file or a SMART query collection
/// tokenized like the index.
pub fn read_queries(path: &Path, tokenizer: &TokenizerConfig) -> Result<Vec<QueryVector>> {
    let first = read_with(path, |mut r| {
        let mut line = String::new();
        while r.read_line(&mut line)? > 0 {
            if !line.trim().is_empty() && !line.starts_with('#') {
                break;
            }
            line.clear();
        }
        Ok(line)
    })?;
    if is_query_file(&first) {
        return read_with(path, read_query_file);
    }
    let tokenizer = Tokenizer::new(tokenizer.clone()).map_err(|e| e.in_file(path))?;
    let docs = read_with(path, |r| parse_and_tokenize(r, &tokenizer))?;
    Ok(docs.iter().map(QueryVector::from_document).collect())
}

fn parse_list<T: FromStr>(key: &str, text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| Error::InvalidArgument(format!("{}: invalid entry {s:?}: {e}", flag_name(key))))
        })
        .collect()
}

fn format_list<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn check_threshold(t: f64) -> Result<f64> {
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(Error::InvalidArgument(format!("--threshold: {t} is not in (0, 1)")))
    }
}

/// Parse arguments, configure logging and threads, and run.
pub fn main_with_args<I, S>(args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    let mut settings = Settings::load(cli.config.as_deref())?;
    let jobs: Option<usize> = settings.value("jobs", cli.jobs.map(|j| j.to_string()), None)?;
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        // Fails only if a pool already exists, as in repeated in-process runs.
        if rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().is_err() {
            log::debug!("thread pool already initialized");
        }
    }
    run(cli.command, &mut settings)
}

pub fn run(command: Command, settings: &mut Settings) -> Result<()> {
    match command {
        Command::Index(a) => cmd_index(a, settings),
        Command::Learn(a) => cmd_learn(a, settings),
        Command::Expand(a) => cmd_expand(a, settings),
        Command::Search(a) => cmd_search(a, settings),
        Command::Eval(a) => cmd_eval(a, settings),
        Command::Experiment(a) => cmd_experiment(a, settings),
    }
}

fn echo(settings: &Settings) {
    eprintln!("polyqe: effective config: {}", settings.describe());
    for key in settings.unused_config_keys() {
        log::warn!("config setting {key:?} is not used by this command");
    }
}

fn cmd_index(a: IndexArgs, s: &mut Settings) -> Result<()> {
    let docs = s.required_path("docs", a.docs)?;
    let out = s.required_path("out", a.out)?;
    let config = s.tokenizer(a.tokenizer)?;
    echo(s);
    let index = build_index(&docs, config)?;
    write_file(&out, |w| index.write(w))
}

/// Parse, tokenize and index a SMART document collection.
pub fn build_index(docs: &Path, config: TokenizerConfig) -> Result<CorpusIndex> {
    let tokenizer = Tokenizer::new(config.clone())?;
    let documents = read_with(docs, |r| parse_and_tokenize(r, &tokenizer))?;
    CorpusIndex::build(&documents, config).map_err(|e| e.in_file(docs))
}

fn cmd_learn(a: LearnArgs, s: &mut Settings) -> Result<()> {
    let index_path = s.required_path("index", a.index)?;
    let confidence: Confidence = s.required("confidence", a.confidence)?;
    let max_parents: usize = s
        .value("max_parents", a.max_parents, Some(DEFAULT_MAX_PARENTS.to_string()))?
        .unwrap_or(DEFAULT_MAX_PARENTS);
    let out = s.required_path("out", a.out)?;
    echo(s);
    let index = read_index(&index_path)?;
    let net = learn(
        &index,
        LearnOptions {
            confidence,
            max_parents,
        },
    )
    .map_err(|e| e.in_file(&index_path))?;
    write_file(&out, |w| net.write(w))
}

fn cmd_expand(a: ExpandArgs, s: &mut Settings) -> Result<()> {
    let index_path = s.required_path("index", a.index)?;
    let net_path = s.required_path("net", a.net)?;
    let queries_path = s.required_path("queries", a.queries)?;
    let threshold = check_threshold(s.required("threshold", a.threshold)?)?;
    let out = s.required_path("out", a.out)?;
    echo(s);
    let index = read_index(&index_path)?;
    let net = read_with(&net_path, BayesNet::read)?;
    let queries = read_queries(&queries_path, &index.tokenizer)?;
    let (expanded, _) = expand_queries(&queries, &net, threshold)?;
    let header = query_file_header(net.confidence(), threshold);
    write_file(&out, |w| write_query_file(&expanded, &header, w))
}

fn cmd_search(a: SearchArgs, s: &mut Settings) -> Result<()> {
    let index_path = s.required_path("index", a.index)?;
    let queries_path = s.required_path("queries", a.queries)?;
    let depth: Option<usize> = s.value("k", a.k, None)?;
    let out = s.required_path("out", a.out)?;
    echo(s);
    let index = read_index(&index_path)?;
    let queries = read_queries(&queries_path, &index.tokenizer)?;
    let depth = depth.unwrap_or(index.inverted.n_docs() as usize);
    let run = search_all(&index, &queries, depth);
    write_file(&out, |w| run.write(&run_header(), w))
}

fn cmd_eval(a: EvalArgs, s: &mut Settings) -> Result<()> {
    let run_path = s.required_path("run", a.run)?;
    let qrels_path = s.required_path("qrels", a.qrels)?;
    let baseline_path = s.path("baseline", a.baseline)?;
    let k: usize = s.value("k", a.k, Some(DEFAULT_K.to_string()))?.unwrap_or(DEFAULT_K);
    let out = s.path("out", a.out)?;
    let curve = s.path("curve", a.curve)?;
    echo(s);
    let run = read_with(&run_path, RankedRun::read)?;
    let qrels = read_with(&qrels_path, QrelSet::read)?;
    let baseline = baseline_path
        .as_deref()
        .map(|p| read_with(p, RankedRun::read))
        .transpose()?;
    let rep = report(&run, &qrels, baseline.as_ref(), k)?;
    match &out {
        Some(path) => write_file(path, |w| rep.write_tsv(&report_header(), w))?,
        None => rep.write_tsv(&report_header(), std::io::stdout().lock())?,
    }
    if let Some(path) = &curve {
        write_file(path, |w| rep.write_curve(w))?;
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs, s: &mut Settings) -> Result<()> {
    let docs = s.required_path("docs", a.docs)?;
    let queries_path = s.required_path("queries", a.queries)?;
    let qrels_path = s.required_path("qrels", a.qrels)?;
    let defaults = BatteryConfig::default();
    let confidences: String = s
        .value("confidences", a.confidences, Some(format_list(&defaults.confidences)))?
        .unwrap_or_default();
    let thresholds: String = s
        .value("thresholds", a.thresholds, Some(format_list(&DEFAULT_THRESHOLDS)))?
        .unwrap_or_default();
    let k: usize = s.value("k", a.k, Some(DEFAULT_K.to_string()))?.unwrap_or(DEFAULT_K);
    let max_parents: usize = s
        .value("max_parents", a.max_parents, Some(DEFAULT_MAX_PARENTS.to_string()))?
        .unwrap_or(DEFAULT_MAX_PARENTS);
    let out = s.required_path("out", a.out)?;
    let tokenizer = s.tokenizer(a.tokenizer)?;
    let config = BatteryConfig {
        confidences: parse_list("confidences", &confidences)?,
        thresholds: parse_list::<f64>("thresholds", &thresholds)?
            .into_iter()
            .map(check_threshold)
            .collect::<Result<_>>()?,
        k,
        max_parents,
    };
    echo(s);

    let index = build_index(&docs, tokenizer)?;
    let queries = read_queries(&queries_path, &index.tokenizer)?;
    let qrels = read_with(&qrels_path, QrelSet::read)?;
    let unknown = qrels.unknown_documents(&index.inverted.doc_ids().into_iter().collect());
    if !unknown.is_empty() {
        log::warn!(
            "{}: {} judgments name documents missing from the collection",
            qrels_path.display(),
            unknown.len()
        );
    }
    let battery = run_battery(&index, &queries, &qrels, &config)?;
    battery.write_dir(&index, &out).map_err(|e| match e {
        e @ Error::File { .. } => e,
        e => e.in_file(&out),
    })?;
    let mut stderr = std::io::stderr().lock();
    battery.write_summary(&mut stderr)?;
    stderr.flush()?;
    Ok(())
}

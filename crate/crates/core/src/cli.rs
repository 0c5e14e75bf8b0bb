//! Command-line front end. Experiment commands read a `key = value` config
//! file; relative paths in it resolve against the file's directory.
//!
//! Exit codes: 0 success, 1 I/O, 2 configuration or validation, 3 numeric
//! divergence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::data::{corpus_dir, gen_synth_corpus, load_corpus, save_corpus, Corpus, DataFraction, PoolSpec, SynthLanguageSpec};
use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::model::{edit_distance, greedy_decode, load_model, prefix_beam_decode, save_model, MultiHeadModel};
use crate::numerics::log_softmax_rows;
use crate::training::{
    adapt_full, adapt_softmax, finetune, fresh_model, run_sweep, train, ExperimentReport, Mode, TrainConfig,
    TrainReport, WeightedCorpus,
};

/// Overrides the `workers` config key.
pub const WORKERS_ENV: &str = "POLYGLOT_CTC_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "polyglot-ctc", version, about = "Multilingual CTC phoneme recognition experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic corpora.
    GenSynth(RunArgs),
    /// Train a model from scratch (monolingual or multilingual).
    Train(RunArgs),
    /// Fine-tune an existing model on one of its languages.
    Finetune(RunArgs),
    /// Port a donor model to a new language.
    Adapt(RunArgs),
    /// Write hypotheses for every utterance of a corpus.
    Decode(DecodeArgs),
    /// Score a model on a corpus.
    Eval(DecodeArgs),
    /// Adaptation sweep over donors and data fractions.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines.
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Head to use; defaults to the corpus language.
    #[arg(long)]
    pub language: Option<String>,
    /// Prefix beam width; 0 decodes greedily.
    #[arg(long, default_value_t = 0)]
    pub beam: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Csv(_) => 1,
        Error::Divergence(_) => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns its
/// exit code. Reports go to `stdout`, errors to `stderr`.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let _ = stdout.write_all(report.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> u8 {
    run_from(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs one command, returning the text to print.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::GenSynth(a) => cmd_gen_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Finetune(a) => cmd_finetune(a),
        Command::Adapt(a) => cmd_adapt(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// Parsed config file. Keys are consumed as they are read; whatever is left
/// at [`ConfigFile::finish`] is an unknown key.
#[derive(Debug)]
pub struct ConfigFile {
    path: PathBuf,
    base: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, no + 1, format!("expected key = value, found {line:?}")))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(path, no + 1, "empty key"));
            }
            if entries.insert(key.clone(), (no + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse(path, no + 1, format!("duplicate key {key:?}")));
            }
        }
        Ok(ConfigFile {
            path: path.to_path_buf(),
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            entries,
        })
    }

    fn convert<T: FromStr>(&self, key: &str, line: usize, value: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        value
            .parse()
            .map_err(|e| Error::parse(&self.path, line, format!("{key}: {e}")))
    }

    pub fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            Some((line, v)) => self.convert(key, line, &v).map(Some),
            None => Ok(None),
        }
    }

    pub fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(key)?
            .ok_or_else(|| Error::Config(format!("{}: missing key {key:?}", self.path.display())))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, v)) = self.entries.remove(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| self.convert(key, line, s.trim()))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Removes every `prefix<suffix>` key, returning `(suffix, value)` pairs
    /// in key order.
    pub fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, String)> {
        let keys: Vec<String> = self.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        keys.into_iter()
            .map(|k| {
                let (_, v) = self.entries.remove(&k).expect("listed key");
                (k[prefix.len()..].to_string(), v)
            })
            .collect()
    }

    pub fn require_path(&mut self, key: &str) -> Result<PathBuf> {
        let v: String = self.require(key)?;
        Ok(self.resolve(&v))
    }

    pub fn resolve(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn finish(self) -> Result<()> {
        match self.entries.iter().next() {
            Some((key, (line, _))) => Err(Error::parse(&self.path, *line, format!("unknown key {key:?}"))),
            None => Ok(()),
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Range(usize, usize);

impl FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_range(s).map(|(a, b)| Range(a, b))
    }
}

fn require_dir(path: &Path, what: &str) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} {} is not a directory", path.display())))
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} {} does not exist", path.display())))
    }
}

fn output_dir(cfg: &mut ConfigFile, args: &RunArgs) -> Result<PathBuf> {
    let from_file: Option<String> = cfg.opt("out")?;
    match (&args.out, from_file) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(v)) => Ok(cfg.resolve(&v)),
        (None, None) => Err(Error::Config("no output directory (set `out` or pass --out)".into())),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn workers(cfg: &mut ConfigFile) -> Result<usize> {
    let from_file = cfg.get("workers", 1usize)?;
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("{WORKERS_ENV}={v:?}: {e}"))),
        Err(_) => Ok(from_file),
    }
}

/// Training keys shared by every training command.
fn train_config(cfg: &mut ConfigFile, args: &RunArgs, mode: Mode) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let file_seed = cfg.get("seed", d.seed)?;
    let seed = args.seed.unwrap_or(file_seed);
    let fraction = cfg.get("fraction", 1.0)?;
    let fraction_seed = cfg.get("fraction_seed", seed)?;
    let config = TrainConfig {
        learning_rate: cfg.get("learning_rate", d.learning_rate)?,
        epochs: cfg.get("epochs", d.epochs)?,
        batch_size: cfg.get("batch_size", d.batch_size)?,
        grad_clip_norm: cfg.get("grad_clip_norm", d.grad_clip_norm)?,
        seed,
        mode,
        target_fraction: DataFraction::new(fraction, fraction_seed)?,
        patience: cfg.get("patience", d.patience)?,
        workers: workers(cfg)?,
    };
    config.validate()?;
    Ok(config)
}

/// `corpus.<language> = dir` entries, validated to exist.
fn corpus_paths(cfg: &mut ConfigFile) -> Result<Vec<(String, PathBuf)>> {
    let out: Vec<(String, PathBuf)> = cfg
        .take_prefixed("corpus.")
        .into_iter()
        .map(|(lang, v)| (lang, cfg.resolve(&v)))
        .collect();
    for (lang, p) in &out {
        require_dir(p, &format!("corpus for {lang:?}"))?;
    }
    Ok(out)
}

fn load_corpora(paths: &[(String, PathBuf)]) -> Result<Vec<Corpus>> {
    paths
        .iter()
        .map(|(lang, p)| {
            let c = load_corpus(p)?;
            if c.language_id() != lang {
                return Err(Error::Config(format!(
                    "{} holds language {:?}, config says {lang:?}",
                    p.display(),
                    c.language_id()
                )));
            }
            Ok(c)
        })
        .collect()
}

fn single_corpus(cfg: &mut ConfigFile) -> Result<(String, PathBuf)> {
    let mut paths = corpus_paths(cfg)?;
    if paths.len() != 1 {
        return Err(Error::Config(format!(
            "exactly one corpus.<language> entry required, found {}",
            paths.len()
        )));
    }
    Ok(paths.remove(0))
}

fn report_text(report: &TrainReport, out: &Path) -> String {
    let mut s = String::new();
    for (lang, per) in &report.dev_per {
        let _ = writeln!(s, "dev PER {lang}: {per:.4}");
    }
    if report.skipped_infeasible > 0 {
        let _ = writeln!(s, "skipped infeasible utterances: {}", report.skipped_infeasible);
    }
    let _ = writeln!(s, "best epoch: {}", report.best_epoch);
    let _ = writeln!(s, "wrote {}", out.display());
    s
}

fn write_run(model: &MultiHeadModel, report: &TrainReport, out: &Path) -> Result<String> {
    save_model(model, &out.join("model.bin"))?;
    write_file(&out.join("curves.csv"), report.curves_csv()?.as_bytes())?;
    Ok(report_text(report, out))
}

fn cmd_gen_synth(args: &RunArgs) -> Result<String> {
    let mut cfg = ConfigFile::load(&args.config)?;
    let out = output_dir(&mut cfg, args)?;
    let d = PoolSpec::default();
    let pool = PoolSpec {
        size: cfg.get("pool_size", d.size)?,
        feature_dim: cfg.get("feature_dim", d.feature_dim)?,
        seed: cfg.get("pool_seed", d.seed)?,
    };
    let base_seed = args.seed;
    let languages: Vec<String> = cfg
        .list("languages")?
        .ok_or_else(|| Error::Config("missing key \"languages\"".into()))?;
    let mut specs = Vec::with_capacity(languages.len());
    for (i, lang) in languages.iter().enumerate() {
        if languages[..i].contains(lang) {
            return Err(Error::Config(format!("duplicate language_id {lang:?}")));
        }
        let key = |f: &str| format!("{lang}.{f}");
        let pool_indices: Vec<usize> = cfg
            .list(&key("pool_indices"))?
            .ok_or_else(|| Error::Config(format!("missing key {:?}", key("pool_indices"))))?;
        let toy = SynthLanguageSpec::toy(lang, pool_indices, 0);
        let phones: Range = cfg.get(&key("phones"), Range(toy.phones_per_utterance.0, toy.phones_per_utterance.1))?;
        let frames: Range = cfg.get(&key("frames"), Range(toy.frames_per_phone.0, toy.frames_per_phone.1))?;
        let seed: u64 = cfg.get(&key("seed"), i as u64)?;
        let spec = SynthLanguageSpec {
            utterances: cfg.get(&key("utterances"), toy.utterances)?,
            phones_per_utterance: (phones.0, phones.1),
            frames_per_phone: (frames.0, frames.1),
            noise_std: cfg.get(&key("noise_std"), toy.noise_std)?,
            seed: base_seed.map_or(seed, |b| b.wrapping_add(seed)),
            ..toy
        };
        spec.validate(&pool)?;
        specs.push(spec);
    }
    cfg.finish()?;

    let mut report = String::new();
    for spec in &specs {
        let corpus = gen_synth_corpus(spec, &pool)?;
        let dir = corpus_dir(&out, &spec.language_id);
        save_corpus(&corpus, &dir)?;
        let _ = writeln!(report, "{}: {} utterances -> {}", spec.language_id, corpus.len(), dir.display());
    }
    Ok(report)
}

fn cmd_train(args: &RunArgs) -> Result<String> {
    let mut cfg = ConfigFile::load(&args.config)?;
    let out = output_dir(&mut cfg, args)?;
    let paths = corpus_paths(&mut cfg)?;
    if paths.is_empty() {
        return Err(Error::Config("no corpus.<language> entries".into()));
    }
    let default_mode = if paths.len() > 1 { Mode::Multilingual } else { Mode::Monolingual };
    let mode: Mode = cfg.get("mode", default_mode)?;
    if !matches!(mode, Mode::Monolingual | Mode::Multilingual) {
        return Err(Error::Config(format!("train runs monolingual or multilingual, not {mode}")));
    }
    let weights: BTreeMap<String, f64> = cfg
        .take_prefixed("weight.")
        .into_iter()
        .map(|(lang, v)| {
            v.parse::<f64>()
                .map(|w| (lang.clone(), w))
                .map_err(|e| Error::Config(format!("weight.{lang}: {e}")))
        })
        .collect::<Result<_>>()?;
    for lang in weights.keys() {
        if !paths.iter().any(|(l, _)| l == lang) {
            return Err(Error::Config(format!("weight for unlisted corpus {lang:?}")));
        }
    }
    let d = EncoderConfig::toy(0);
    let num_layers = cfg.get("num_layers", d.num_layers)?;
    let hidden_dim = cfg.get("hidden_dim", d.hidden_dim)?;
    let config = train_config(&mut cfg, args, mode)?;
    cfg.finish()?;

    let corpora = load_corpora(&paths)?;
    let input_dim = corpora
        .iter()
        .find_map(Corpus::feature_dim)
        .ok_or_else(|| Error::Config("all corpora are empty".into()))?;
    let inventories: Vec<_> = corpora.iter().map(|c| c.inventory.clone()).collect();
    let mut model = fresh_model(EncoderConfig::new(num_layers, hidden_dim, input_dim)?, &inventories, config.seed)?;
    let mixture: Vec<WeightedCorpus> = corpora
        .iter()
        .map(|c| WeightedCorpus {
            corpus: c,
            weight: weights.get(c.language_id()).copied().unwrap_or(1.0),
        })
        .collect();
    create_dir(&out)?;
    let report = train(&mut model, &mixture, &config)?;
    write_run(&model, &report, &out)
}

fn cmd_finetune(args: &RunArgs) -> Result<String> {
    let mut cfg = ConfigFile::load(&args.config)?;
    let out = output_dir(&mut cfg, args)?;
    let model_path = cfg.require_path("model")?;
    require_file(&model_path, "model")?;
    let (_, corpus_path) = single_corpus(&mut cfg)?;
    let config = train_config(&mut cfg, args, Mode::Finetune)?;
    cfg.finish()?;

    let mut model = load_model(&model_path)?;
    let corpus = load_corpus(&corpus_path)?;
    create_dir(&out)?;
    let report = finetune(&mut model, &corpus, &config)?;
    write_run(&model, &report, &out)
}

fn cmd_adapt(args: &RunArgs) -> Result<String> {
    let mut cfg = ConfigFile::load(&args.config)?;
    let out = output_dir(&mut cfg, args)?;
    let donor_path = cfg.require_path("donor")?;
    require_file(&donor_path, "donor model")?;
    let (_, corpus_path) = single_corpus(&mut cfg)?;
    let mode: Mode = cfg.get("mode", Mode::AdaptSoftmax)?;
    let config = train_config(&mut cfg, args, mode)?;
    cfg.finish()?;

    let donor = load_model(&donor_path)?;
    let corpus = load_corpus(&corpus_path)?;
    create_dir(&out)?;
    let (model, report) = match mode {
        Mode::AdaptSoftmax => adapt_softmax(&donor, &corpus, config.target_fraction, &config)?,
        Mode::AdaptFull => adapt_full(&donor, &corpus, config.target_fraction, &config)?,
        other => return Err(Error::Config(format!("adapt runs adapt_softmax or adapt_full, not {other}"))),
    };
    write_run(&model, &report, &out)
}

struct Decoded {
    utterance_id: String,
    reference: Vec<String>,
    hypothesis: Vec<String>,
    counts: crate::model::ErrorCounts,
}

fn decode_corpus(args: &DecodeArgs) -> Result<(Corpus, Vec<Decoded>)> {
    require_file(&args.model, "model")?;
    require_dir(&args.corpus, "corpus")?;
    let model = load_model(&args.model)?;
    let corpus = load_corpus(&args.corpus)?;
    if corpus.is_empty() {
        return Err(Error::Config(format!("corpus {} is empty", args.corpus.display())));
    }
    let lang = args.language.clone().unwrap_or_else(|| corpus.language_id().to_string());
    let head = model.head(&lang)?;
    let mut out = Vec::with_capacity(corpus.len());
    for utt in &corpus.utterances {
        let logits = model.logits(&lang, &utt.features)?;
        let hyp = if args.beam == 0 {
            greedy_decode(&logits)
        } else {
            prefix_beam_decode(&log_softmax_rows(&logits)?, args.beam)?
        };
        let names = |z: &crate::ctc::LabelSeq, inv: &crate::model::PhoneInventory| -> Vec<String> {
            z.as_slice()
                .iter()
                .map(|&k| inv.name(k).unwrap_or("?").to_string())
                .collect()
        };
        out.push(Decoded {
            utterance_id: utt.utterance_id.clone(),
            reference: names(&utt.labels, &corpus.inventory),
            hypothesis: names(&hyp, &head.inventory),
            counts: edit_distance(&hyp, &utt.labels),
        });
    }
    Ok((corpus, out))
}

fn cmd_decode(args: &DecodeArgs) -> Result<String> {
    let (_, decoded) = decode_corpus(args)?;
    let mut tsv = String::from("utterance_id\thypothesis\n");
    for d in &decoded {
        let _ = writeln!(tsv, "{}\t{}", d.utterance_id, d.hypothesis.join(" "));
    }
    create_dir(&args.out)?;
    let path = args.out.join("decode.tsv");
    write_file(&path, tsv.as_bytes())?;
    Ok(format!("decoded {} utterances -> {}\n", decoded.len(), path.display()))
}

fn cmd_eval(args: &DecodeArgs) -> Result<String> {
    let (_, decoded) = decode_corpus(args)?;
    let mut tsv = String::from("utterance_id\treference\thypothesis\tsubstitutions\tinsertions\tdeletions\tref_length\n");
    for d in &decoded {
        let c = d.counts;
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            d.utterance_id,
            d.reference.join(" "),
            d.hypothesis.join(" "),
            c.substitutions,
            c.insertions,
            c.deletions,
            c.ref_length
        );
    }
    let total: crate::model::ErrorCounts = decoded.iter().map(|d| d.counts).sum();
    create_dir(&args.out)?;
    let path = args.out.join("eval.tsv");
    write_file(&path, tsv.as_bytes())?;
    Ok(format!(
        "PER {:.4} (S={} I={} D={} N={})\nwrote {}\n",
        total.per().unwrap_or(0.0),
        total.substitutions,
        total.insertions,
        total.deletions,
        total.ref_length,
        path.display()
    ))
}

fn cmd_sweep(args: &RunArgs) -> Result<String> {
    let mut cfg = ConfigFile::load(&args.config)?;
    let out = output_dir(&mut cfg, args)?;
    let donor_paths: Vec<(String, PathBuf)> = cfg
        .take_prefixed("donor.")
        .into_iter()
        .map(|(name, v)| (name, cfg.resolve(&v)))
        .collect();
    if donor_paths.is_empty() {
        return Err(Error::Config("no donor.<name> entries".into()));
    }
    for (name, p) in &donor_paths {
        require_file(p, &format!("donor {name:?}"))?;
    }
    let target_path = cfg.require_path("target")?;
    require_dir(&target_path, "target corpus")?;
    let fractions: Vec<f64> = cfg
        .list("fractions")?
        .ok_or_else(|| Error::Config("missing key \"fractions\"".into()))?;
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("fractions must be strictly ascending: {fractions:?}")));
    }
    for &f in &fractions {
        DataFraction::new(f, 0)?;
    }
    let mode: Mode = cfg.get("mode", Mode::AdaptSoftmax)?;
    let record_wall_time = cfg.get("record_wall_time", false)?;
    let seeds: Option<Vec<u64>> = cfg.list("seeds")?;
    let base = train_config(&mut cfg, args, mode)?;
    cfg.finish()?;
    let seeds = match (args.seed, seeds) {
        (Some(s), _) => vec![s],
        (None, Some(list)) => list,
        (None, None) => vec![base.seed],
    };

    let donors: Vec<(String, MultiHeadModel)> = donor_paths
        .iter()
        .map(|(n, p)| load_model(p).map(|m| (n.clone(), m)))
        .collect::<Result<_>>()?;
    let donor_refs: Vec<(&str, &MultiHeadModel)> = donors.iter().map(|(n, m)| (n.as_str(), m)).collect();
    let target = load_corpus(&target_path)?;
    create_dir(&out)?;

    let mut all = ExperimentReport { rows: Vec::new() };
    let mut text = String::new();
    for &seed in &seeds {
        let config = TrainConfig { seed, ..base.clone() };
        let report = run_sweep(&donor_refs, &target, &fractions, mode, &config)?;
        for (name, _) in &donor_refs {
            match report.crossover(name) {
                Some(f) => {
                    let _ = writeln!(text, "seed {seed} donor {name}: crossover at fraction {f}");
                }
                None => {
                    let _ = writeln!(text, "seed {seed} donor {name}: no crossover");
                }
            }
        }
        all.rows.extend(report.rows);
    }
    let path = out.join("sweep.csv");
    write_file(&path, all.to_csv(record_wall_time)?.as_bytes())?;
    let _ = writeln!(text, "wrote {}", path.display());
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigFile> {
        ConfigFile::parse(Path::new("/cfg/run.conf"), text)
    }

    #[test]
    fn config_parsing() {
        let mut c = parse("# comment\nepochs = 3 # trailing\n\nfractions = 0.1, 0.5\ncorpus.tur = data/tur\n").unwrap();
        assert_eq!(c.get("epochs", 0usize).unwrap(), 3);
        assert_eq!(c.list::<f64>("fractions").unwrap().unwrap(), vec![0.1, 0.5]);
        let corpora = c.take_prefixed("corpus.");
        assert_eq!(corpora, vec![("tur".to_string(), "data/tur".to_string())]);
        assert_eq!(c.resolve("data/tur"), PathBuf::from("/cfg/data/tur"));
        assert_eq!(c.resolve("/abs"), PathBuf::from("/abs"));
        c.finish().unwrap();
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let err = parse("a = 1\nnonsense\n").unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        assert!(parse("a = 1\na = 2\n").is_err());

        let mut c = parse("epochs = three\n").unwrap();
        assert!(c.get("epochs", 0usize).unwrap_err().to_string().contains(":1:"));

        let mut c = parse("epochs = 3\nlearnin_rate = 0.1\n").unwrap();
        c.get("epochs", 0usize).unwrap();
        let err = c.finish().unwrap_err().to_string();
        assert!(err.contains("learnin_rate") && err.contains(":2:"), "{err}");
    }

    #[test]
    fn ranges() {
        assert_eq!("2-5".parse::<Range>().unwrap(), Range(2, 5));
        assert_eq!("4".parse::<Range>().unwrap(), Range(4, 4));
        assert!("a-b".parse::<Range>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Divergence("x".into())), 3);
        assert_eq!(exit_code(&Error::io("x", std::io::Error::other("y"))), 1);
        assert_eq!(exit_code(&Error::UnknownLanguage("x".into())), 2);
    }
}

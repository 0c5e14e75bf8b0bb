//! SGD training for the shared-encoder model: monolingual and multilingual
//! training, per-language fine-tuning, and porting a donor model to an unseen
//! language by retraining either a fresh softmax head alone or the whole
//! network.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ctc::ctc_loss_and_grad;
use crate::data::{select_fraction, split_dev, Corpus, DataFraction, Utterance};
use crate::encoder::{encoder_backward, EncoderParams};
use crate::error::{Error, Result};
use crate::model::{edit_distance, greedy_decode, ErrorCounts, MultiHeadModel};
use crate::numerics::{axpy, gemv_t_acc, outer_acc, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Monolingual,
    Multilingual,
    Finetune,
    AdaptSoftmax,
    AdaptFull,
}

impl Mode {
    /// Whether encoder parameters receive updates.
    pub fn trains_encoder(self) -> bool {
        self != Mode::AdaptSoftmax
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Monolingual => "monolingual",
            Mode::Multilingual => "multilingual",
            Mode::Finetune => "finetune",
            Mode::AdaptSoftmax => "adapt_softmax",
            Mode::AdaptFull => "adapt_full",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "monolingual" => Mode::Monolingual,
            "multilingual" => Mode::Multilingual,
            "finetune" => Mode::Finetune,
            "adapt_softmax" => Mode::AdaptSoftmax,
            "adapt_full" => Mode::AdaptFull,
            other => return Err(Error::Config(format!("unknown mode {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub grad_clip_norm: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Share of each corpus's training split that is used.
    pub target_fraction: DataFraction,
    /// Epochs without dev improvement before the learning rate is halved.
    pub patience: usize,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 8,
            grad_clip_norm: 5.0,
            seed: 0,
            mode: Mode::Monolingual,
            target_fraction: DataFraction::full(),
            patience: 3,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be finite and non-negative, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.grad_clip_norm.is_nan() || self.grad_clip_norm <= 0.0 {
            return bad(format!("grad_clip_norm must be positive, got {}", self.grad_clip_norm));
        }
        if self.patience == 0 {
            return bad("patience must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        DataFraction::new(self.target_fraction.fraction, self.target_fraction.seed)?;
        Ok(())
    }
}

/// Seed for an independent random stream derived from a base seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const STREAM_INIT: u64 = 1;
const STREAM_DEV_SPLIT: u64 = 2;
const STREAM_BATCHES: u64 = 3;
const STREAM_HEAD: u64 = 4;
/// Seed stream used for nested fraction selection in sweeps.
pub const STREAM_FRACTION: u64 = 5;

/// Fresh model with one head per inventory, seeded from `seed`.
pub fn fresh_model(
    config: crate::encoder::EncoderConfig,
    inventories: &[crate::model::PhoneInventory],
    seed: u64,
) -> Result<MultiHeadModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_INIT));
    MultiHeadModel::init(config, inventories, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGrad {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients of one loss with respect to the encoder (absent when the
/// encoder is frozen) and the heads it touched.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub encoder: Option<EncoderParams>,
    pub heads: BTreeMap<String, HeadGrad>,
}

impl Gradients {
    fn accumulate(&mut self, other: &Gradients) -> Result<()> {
        match (&mut self.encoder, &other.encoder) {
            (Some(a), Some(b)) => a.add_scaled(b, 1.0)?,
            (None, Some(b)) => self.encoder = Some(b.clone()),
            _ => {}
        }
        for (lang, g) in &other.heads {
            match self.heads.get_mut(lang) {
                Some(acc) => {
                    acc.weight.add_scaled(&g.weight, 1.0)?;
                    axpy(&mut acc.bias, 1.0, &g.bias);
                }
                None => {
                    self.heads.insert(lang.clone(), g.clone());
                }
            }
        }
        Ok(())
    }

    fn scale(&mut self, alpha: f64) {
        if let Some(e) = &mut self.encoder {
            e.scale(alpha);
        }
        for g in self.heads.values_mut() {
            g.weight.scale(alpha);
            g.bias.iter_mut().for_each(|v| *v *= alpha);
        }
    }

    pub fn norm(&self) -> f64 {
        let enc = self.encoder.as_ref().map_or(0.0, EncoderParams::sum_squares);
        let heads: f64 = self
            .heads
            .values()
            .map(|g| g.weight.sum_squares() + g.bias.iter().map(|v| v * v).sum::<f64>())
            .sum();
        (enc + heads).sqrt()
    }

    /// Rescales so the global norm is at most `max_norm`.
    pub fn clip(&mut self, max_norm: f64) -> f64 {
        let norm = self.norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
        norm
    }
}

/// CTC loss of one utterance and its gradients.
pub fn utterance_loss_and_grad(model: &MultiHeadModel, utt: &Utterance, train_encoder: bool) -> Result<(f64, Gradients)> {
    let head = model.head(&utt.language_id)?;
    let out = model.encode(&utt.features)?;
    let logits = head.project(&out.e)?;
    let (loss, grad_logits) = ctc_loss_and_grad(&logits, &utt.labels)?;

    let mut hg = HeadGrad {
        weight: Matrix::zeros(head.weight.rows(), head.weight.cols()),
        bias: vec![0.0; head.bias.len()],
    };
    let mut grad_e = train_encoder.then(|| Matrix::zeros(out.e.rows(), out.e.cols()));
    for t in 0..out.e.rows() {
        let gl = grad_logits.row(t);
        outer_acc(&mut hg.weight, gl, out.e.row(t));
        axpy(&mut hg.bias, 1.0, gl);
        if let Some(ge) = &mut grad_e {
            gemv_t_acc(&head.weight, gl, ge.row_mut(t));
        }
    }
    let encoder = match grad_e {
        Some(ge) => Some(encoder_backward(&model.encoder, &out.cache, &ge)?.0),
        None => None,
    };
    let mut heads = BTreeMap::new();
    heads.insert(utt.language_id.clone(), hg);
    Ok((loss, Gradients { encoder, heads }))
}

fn apply_update(model: &mut MultiHeadModel, grads: &Gradients, lr: f64) -> Result<()> {
    if let Some(g) = &grads.encoder {
        model.encoder.add_scaled(g, -lr)?;
    }
    for (lang, g) in &grads.heads {
        let head = model.head_mut(lang)?;
        head.weight.add_scaled(&g.weight, -lr)?;
        axpy(&mut head.bias, -lr, &g.bias);
    }
    Ok(())
}

/// Mean loss over the batch, per-utterance gradients summed in batch order.
fn batch_gradients(
    model: &MultiHeadModel,
    batch: &[&Utterance],
    train_encoder: bool,
    workers: usize,
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    let results: Vec<Result<(f64, Gradients)>> = if workers > 1 {
        batch
            .par_iter()
            .map(|u| utterance_loss_and_grad(model, u, train_encoder))
            .collect()
    } else {
        batch
            .iter()
            .map(|u| utterance_loss_and_grad(model, u, train_encoder))
            .collect()
    };
    let mut total_loss = 0.0;
    let mut acc: Option<Gradients> = None;
    for (u, r) in batch.iter().zip(results) {
        let (loss, g) = r?;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "loss {loss} on utterance {}",
                u.utterance_id
            )));
        }
        total_loss += loss;
        match &mut acc {
            Some(a) => a.accumulate(&g)?,
            None => acc = Some(g),
        }
    }
    let n = batch.len() as f64;
    let mut grads = acc.expect("non-empty batch");
    grads.scale(1.0 / n);
    Ok((total_loss / n, grads))
}

fn sgd_step(
    model: &mut MultiHeadModel,
    batch: &[&Utterance],
    mode: Mode,
    lr: f64,
    clip: f64,
    workers: usize,
) -> Result<f64> {
    let (loss, mut grads) = batch_gradients(model, batch, mode.trains_encoder(), workers)?;
    let norm = grads.clip(clip);
    if !norm.is_finite() {
        return Err(Error::Divergence(format!("gradient norm {norm} at batch loss {loss}")));
    }
    apply_update(model, &grads, lr)?;
    Ok(loss)
}

/// One SGD update on `batch`: gradients of the mean CTC loss, global-norm
/// clipping, then a step of size `config.learning_rate`. In `AdaptSoftmax`
/// mode the encoder is left untouched. Returns the mean loss before the
/// update.
pub fn train_step(model: &mut MultiHeadModel, batch: &[&Utterance], config: &TrainConfig) -> Result<f64> {
    config.validate()?;
    if let Some(u) = batch.iter().find(|u| u.infeasible) {
        return Err(Error::InfeasibleAlignment {
            frames: u.frames(),
            labels: u.labels.len(),
            required: u.labels.min_frames(),
        });
    }
    sgd_step(
        model,
        batch,
        config.mode,
        config.learning_rate,
        config.grad_clip_norm,
        config.workers,
    )
}

/// Greedy-decoding error counts and mean CTC loss over a set of utterances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Evaluation {
    pub counts: ErrorCounts,
    /// Mean loss over feasible utterances; `NaN` when there are none.
    pub mean_loss: f64,
}

impl Evaluation {
    pub fn per(&self) -> f64 {
        self.counts.per().unwrap_or(0.0)
    }
}

pub fn evaluate(model: &MultiHeadModel, language_id: &str, utterances: &[Utterance]) -> Result<Evaluation> {
    let head = model.head(language_id)?;
    let mut counts = ErrorCounts::default();
    let mut loss = 0.0;
    let mut feasible = 0usize;
    for utt in utterances {
        let out = model.encode(&utt.features)?;
        let logits = head.project(&out.e)?;
        counts += edit_distance(&greedy_decode(&logits), &utt.labels);
        if !utt.infeasible {
            loss += ctc_loss_and_grad(&logits, &utt.labels)?.0;
            feasible += 1;
        }
    }
    Ok(Evaluation {
        counts,
        mean_loss: if feasible > 0 { loss / feasible as f64 } else { f64::NAN },
    })
}

/// One corpus in a training mixture. A weight of 1 visits every training
/// utterance once per epoch.
#[derive(Debug, Clone, Copy)]
pub struct WeightedCorpus<'a> {
    pub corpus: &'a Corpus,
    pub weight: f64,
}

impl<'a> WeightedCorpus<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        WeightedCorpus { corpus, weight: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub language: String,
    /// Mean training loss over the epoch's batches.
    pub mean_loss: f64,
    pub dev_loss: f64,
    pub dev_per: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub mode: Mode,
    pub records: Vec<EpochRecord>,
    pub skipped_infeasible: usize,
    /// Epoch whose parameters were kept; 0 means the starting parameters.
    pub best_epoch: usize,
    /// Dev PER per language of the kept parameters.
    pub dev_per: BTreeMap<String, f64>,
    pub epochs_run: usize,
    pub wall_seconds: f64,
}

impl TrainReport {
    pub fn mean_dev_per(&self) -> f64 {
        if self.dev_per.is_empty() {
            return f64::NAN;
        }
        self.dev_per.values().sum::<f64>() / self.dev_per.len() as f64
    }

    /// Records for one language in epoch order.
    pub fn curve(&self, language: &str) -> impl Iterator<Item = &EpochRecord> {
        let language = language.to_string();
        self.records.iter().filter(move |r| r.language == language)
    }

    /// `epoch,language,mean_loss,dev_per`.
    pub fn curves_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epoch", "language", "mean_loss", "dev_per"])?;
        for r in &self.records {
            w.write_record([
                r.epoch.to_string(),
                r.language.clone(),
                r.mean_loss.to_string(),
                r.dev_per.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

struct Prepared {
    language: String,
    train: Vec<Utterance>,
    dev: Vec<Utterance>,
    weight: f64,
}

/// Language-homogeneous batches for one epoch, interleaved across corpora in
/// proportion to each corpus's batch count.
fn epoch_batches(parts: &[Prepared], batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, Vec<usize>)> {
    let mut keyed = Vec::new();
    for (ci, part) in parts.iter().enumerate() {
        let n = part.train.len();
        if n == 0 {
            continue;
        }
        let visits = ((part.weight * n as f64).ceil() as usize).max(1);
        let mut order = Vec::with_capacity(visits);
        while order.len() < visits {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            order.extend(perm.into_iter().take(visits - order.len()));
        }
        let chunks: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
        let count = chunks.len() as f64;
        for (j, chunk) in chunks.into_iter().enumerate() {
            keyed.push(((j as f64 + 0.5) / count, ci, chunk));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, ci, chunk)| (ci, chunk)).collect()
}

/// Trains `model` on a mixture of corpora. Each corpus is split into train
/// and dev (10%); `config.target_fraction` of the train split is used.
/// After every epoch the dev PER of each language is measured, and the
/// parameters with the lowest mean dev PER are kept in `model`. The learning
/// rate halves after `patience` epochs without improvement.
pub fn train(model: &mut MultiHeadModel, mixture: &[WeightedCorpus<'_>], config: &TrainConfig) -> Result<TrainReport> {
    let started = Instant::now();
    config.validate()?;
    if mixture.is_empty() {
        return Err(Error::Config("training mixture is empty".into()));
    }
    let input_dim = model.encoder.config().input_dim;
    let mut parts = Vec::with_capacity(mixture.len());
    let mut skipped = 0;
    for wc in mixture {
        let lang = wc.corpus.language_id().to_string();
        if !(wc.weight > 0.0 && wc.weight.is_finite()) {
            return Err(Error::Config(format!("mixture weight for {lang:?} must be positive")));
        }
        if parts.iter().any(|p: &Prepared| p.language == lang) {
            return Err(Error::Config(format!("language {lang:?} appears twice in the mixture")));
        }
        let head = model.head(&lang)?;
        if head.inventory != wc.corpus.inventory {
            return Err(Error::Config(format!("corpus inventory for {lang:?} differs from the model head")));
        }
        if let Some(f) = wc.corpus.feature_dim() {
            if f != input_dim {
                return Err(Error::Config(format!(
                    "corpus {lang:?} has {f} features, encoder expects {input_dim}"
                )));
            }
        }
        let (train, dev) = split_dev(wc.corpus, derive_seed(config.seed, STREAM_DEV_SPLIT));
        let train = select_fraction(&train, config.target_fraction)?;
        let (feasible, infeasible): (Vec<_>, Vec<_>) = train.utterances.into_iter().partition(|u| !u.infeasible);
        skipped += infeasible.len();
        parts.push(Prepared {
            language: lang,
            train: feasible,
            dev: dev.utterances,
            weight: wc.weight,
        });
    }
    if parts.iter().all(|p| p.train.is_empty()) {
        return Err(Error::Config("no feasible training utterances".into()));
    }

    let pool = if config.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let (records, best_epoch, dev_per) = match &pool {
        Some(p) => p.install(|| train_loop(model, &parts, config))?,
        None => train_loop(model, &parts, config)?,
    };

    Ok(TrainReport {
        mode: config.mode,
        records,
        skipped_infeasible: skipped,
        best_epoch,
        dev_per,
        epochs_run: config.epochs,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

type LoopOutcome = (Vec<EpochRecord>, usize, BTreeMap<String, f64>);

fn train_loop(model: &mut MultiHeadModel, parts: &[Prepared], config: &TrainConfig) -> Result<LoopOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_BATCHES));
    let mut lr = config.learning_rate;
    let mut records = Vec::new();
    let initial = dev_pers(model, parts)?;
    // the starting parameters compete too, so selection never ends worse on dev
    let mut best = (mean_of(&initial), 0, model.clone(), initial);
    let mut stale = 0;
    let mut last_losses: Vec<f64> = Vec::new();

    for epoch in 1..=config.epochs {
        let mut loss_sum = vec![0.0; parts.len()];
        let mut loss_count = vec![0usize; parts.len()];
        for (ci, idx) in epoch_batches(parts, config.batch_size, &mut rng) {
            let batch: Vec<&Utterance> = idx.iter().map(|&i| &parts[ci].train[i]).collect();
            let loss = sgd_step(model, &batch, config.mode, lr, config.grad_clip_norm, config.workers)
                .map_err(|e| match e {
                    Error::Divergence(msg) => Error::Divergence(format!(
                        "epoch {epoch}: {msg}; last finite batch losses {last_losses:?}"
                    )),
                    other => other,
                })?;
            last_losses.push(loss);
            if last_losses.len() > 5 {
                last_losses.remove(0);
            }
            loss_sum[ci] += loss * batch.len() as f64;
            loss_count[ci] += batch.len();
        }

        let mut per = BTreeMap::new();
        for (ci, part) in parts.iter().enumerate() {
            let eval = evaluate(model, &part.language, &part.dev)?;
            let dev_per = eval.per();
            per.insert(part.language.clone(), dev_per);
            records.push(EpochRecord {
                epoch,
                language: part.language.clone(),
                mean_loss: if loss_count[ci] > 0 {
                    loss_sum[ci] / loss_count[ci] as f64
                } else {
                    f64::NAN
                },
                dev_loss: eval.mean_loss,
                dev_per,
            });
        }
        let mean = mean_of(&per);
        if mean < best.0 {
            best = (mean, epoch, model.clone(), per);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                lr *= 0.5;
                stale = 0;
            }
        }
    }

    let (_, epoch, snapshot, per) = best;
    *model = snapshot;
    Ok((records, epoch, per))
}

fn dev_pers(model: &MultiHeadModel, parts: &[Prepared]) -> Result<BTreeMap<String, f64>> {
    parts
        .iter()
        .map(|p| Ok((p.language.clone(), evaluate(model, &p.language, &p.dev)?.per())))
        .collect()
}

fn mean_of(per: &BTreeMap<String, f64>) -> f64 {
    per.values().sum::<f64>() / per.len() as f64
}

/// Continues training every parameter on one language the model already
/// has a head for. Other heads are never touched.
pub fn finetune(model: &mut MultiHeadModel, target: &Corpus, config: &TrainConfig) -> Result<TrainReport> {
    model.head(target.language_id())?;
    let cfg = TrainConfig {
        mode: Mode::Finetune,
        ..config.clone()
    };
    train(model, &[WeightedCorpus::new(target)], &cfg)
}

/// Donor encoder plus one freshly initialized head for the target language.
pub fn port_to_language(donor: &MultiHeadModel, target: &Corpus, seed: u64) -> Result<MultiHeadModel> {
    let lang = target.language_id();
    if donor.has_head(lang) {
        return Err(Error::Config(format!(
            "donor already has a head for {lang:?}; fine-tune it instead"
        )));
    }
    let mut model = donor.clone();
    model.clear_heads();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_HEAD));
    model.add_head(target.inventory.clone(), &mut rng)?;
    Ok(model)
}

fn adapt(
    donor: &MultiHeadModel,
    target: &Corpus,
    fraction: DataFraction,
    config: &TrainConfig,
    mode: Mode,
) -> Result<(MultiHeadModel, TrainReport)> {
    let mut model = port_to_language(donor, target, config.seed)?;
    let cfg = TrainConfig {
        mode,
        target_fraction: fraction,
        ..config.clone()
    };
    let report = train(&mut model, &[WeightedCorpus::new(target)], &cfg)?;
    Ok((model, report))
}

/// Replaces every donor head with one fresh head for the target language
/// and trains only that head; the encoder stays bitwise identical.
pub fn adapt_softmax(
    donor: &MultiHeadModel,
    target: &Corpus,
    fraction: DataFraction,
    config: &TrainConfig,
) -> Result<(MultiHeadModel, TrainReport)> {
    adapt(donor, target, fraction, config, Mode::AdaptSoftmax)
}

/// Like [`adapt_softmax`] but retrains the whole network.
pub fn adapt_full(
    donor: &MultiHeadModel,
    target: &Corpus,
    fraction: DataFraction,
    config: &TrainConfig,
) -> Result<(MultiHeadModel, TrainReport)> {
    adapt(donor, target, fraction, config, Mode::AdaptFull)
}

/// Number of parameters updated when training `model` in `mode`.
pub fn trainable_param_count(model: &MultiHeadModel, mode: Mode) -> usize {
    if mode.trains_encoder() {
        model.param_count()
    } else {
        model.heads().map(|h| h.param_count()).sum()
    }
}

/// Name used for the from-scratch baseline in sweep reports.
pub const BASELINE_DONOR: &str = "scratch";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub donor: String,
    pub mode: Mode,
    pub fraction: f64,
    pub seed: u64,
    pub dev_per: f64,
    pub epochs: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<SweepRow>,
}

impl ExperimentReport {
    /// Dev PER of the from-scratch model trained on all target data.
    pub fn baseline_per(&self) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.donor == BASELINE_DONOR && r.fraction == 1.0)
            .map(|r| r.dev_per)
    }

    /// Smallest fraction at which `donor` matches or beats the baseline.
    pub fn crossover(&self, donor: &str) -> Option<f64> {
        let base = self.baseline_per()?;
        self.rows
            .iter()
            .filter(|r| r.donor == donor && r.dev_per <= base)
            .map(|r| r.fraction)
            .min_by(f64::total_cmp)
    }

    pub fn donors(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if r.donor != BASELINE_DONOR && !out.contains(&r.donor.as_str()) {
                out.push(&r.donor);
            }
        }
        out
    }

    /// `donor,mode,fraction,seed,dev_per,epochs,wall_seconds`. Wall time is
    /// written as `NA` unless `with_wall_time` is set, keeping the file a
    /// pure function of its inputs.
    pub fn to_csv(&self, with_wall_time: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["donor", "mode", "fraction", "seed", "dev_per", "epochs", "wall_seconds"])?;
        for r in &self.rows {
            w.write_record([
                r.donor.clone(),
                r.mode.to_string(),
                r.fraction.to_string(),
                r.seed.to_string(),
                r.dev_per.to_string(),
                r.epochs.to_string(),
                if with_wall_time {
                    format!("{:.3}", r.wall_seconds)
                } else {
                    "NA".to_string()
                },
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Adapts every donor to `target` at every fraction (nested subsets under
/// one selection seed), plus a from-scratch monolingual baseline trained on
/// all of the target's training data.
pub fn run_sweep(
    donors: &[(&str, &MultiHeadModel)],
    target: &Corpus,
    fractions: &[f64],
    mode: Mode,
    config: &TrainConfig,
) -> Result<ExperimentReport> {
    if !matches!(mode, Mode::AdaptSoftmax | Mode::AdaptFull) {
        return Err(Error::Config(format!("sweep mode must be adapt_softmax or adapt_full, got {mode}")));
    }
    if donors.is_empty() {
        return Err(Error::Config("sweep needs at least one donor".into()));
    }
    if fractions.is_empty() || fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("fractions must be non-empty and strictly ascending: {fractions:?}")));
    }
    let selection_seed = derive_seed(config.seed, STREAM_FRACTION);
    let mut rows = Vec::new();
    for &(name, donor) in donors {
        if name == BASELINE_DONOR {
            return Err(Error::Config(format!("donor name {BASELINE_DONOR:?} is reserved")));
        }
        for &f in fractions {
            let fraction = DataFraction::new(f, selection_seed)?;
            let (_, report) = adapt(donor, target, fraction, config, mode)?;
            rows.push(SweepRow {
                donor: name.to_string(),
                mode,
                fraction: f,
                seed: config.seed,
                dev_per: report.mean_dev_per(),
                epochs: report.epochs_run,
                wall_seconds: report.wall_seconds,
            });
        }
    }

    let mut scratch = fresh_model(donors[0].1.encoder.config(), std::slice::from_ref(&target.inventory), config.seed)?;
    let cfg = TrainConfig {
        mode: Mode::Monolingual,
        target_fraction: DataFraction::full(),
        ..config.clone()
    };
    let report = train(&mut scratch, &[WeightedCorpus::new(target)], &cfg)?;
    rows.push(SweepRow {
        donor: BASELINE_DONOR.to_string(),
        mode: Mode::Monolingual,
        fraction: 1.0,
        seed: config.seed,
        dev_per: report.mean_dev_per(),
        epochs: report.epochs_run,
        wall_seconds: report.wall_seconds,
    });
    Ok(ExperimentReport { rows })
}

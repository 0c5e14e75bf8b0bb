//! Corpora, their on-disk layout, and a seeded synthetic multi-language
//! generator.
//!
//! A corpus directory contains:
//!
//! * `inventory.txt`: one phone per line, the first being `∅`
//! * `transcripts.tsv`: `utterance_id<TAB>space separated phones`
//! * `features/<utterance_id>.f64`: `T` and `F` as little-endian `u64`,
//!   then `T·F` little-endian `f64` in row-major order
//! * `corpus.meta`: `key=value` lines; `language_id` is required, the
//!   generator settings are recorded for synthetic corpora

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ctc::LabelSeq;
use crate::error::{Error, Result};
use crate::model::{validate_identifier, PhoneInventory};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub utterance_id: String,
    pub language_id: String,
    /// `T × F`.
    pub features: Matrix,
    pub labels: LabelSeq,
    /// Set when `T` is shorter than the minimum CTC alignment length.
    pub infeasible: bool,
}

impl Utterance {
    pub fn new(utterance_id: String, language_id: String, features: Matrix, labels: LabelSeq) -> Self {
        let infeasible = labels.min_frames() > features.rows();
        Utterance {
            utterance_id,
            language_id,
            features,
            labels,
            infeasible,
        }
    }

    pub fn frames(&self) -> usize {
        self.features.rows()
    }
}

/// Shared prototype pool: one mean vector per pool phone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSpec {
    pub size: usize,
    pub feature_dim: usize,
    pub seed: u64,
}

impl Default for PoolSpec {
    fn default() -> Self {
        PoolSpec {
            size: 20,
            feature_dim: 8,
            seed: 0,
        }
    }
}

impl PoolSpec {
    /// Prototype means, `size × feature_dim`, drawn i.i.d. standard normal.
    pub fn prototypes(&self) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let data = (0..self.size * self.feature_dim).map(|_| normal.sample(&mut rng)).collect();
        Matrix::from_vec(self.size, self.feature_dim, data).expect("sized")
    }
}

/// Name of pool phone `index` as written to inventories and transcripts.
pub fn pool_phone_name(index: usize) -> String {
    format!("p{index:02}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthLanguageSpec {
    pub language_id: String,
    /// Pool indices making up this language's phone set, in inventory order.
    pub pool_indices: Vec<usize>,
    pub utterances: usize,
    /// Inclusive range.
    pub phones_per_utterance: (usize, usize),
    /// Inclusive range.
    pub frames_per_phone: (usize, usize),
    pub noise_std: f64,
    pub seed: u64,
}

impl SynthLanguageSpec {
    /// Toy defaults: 200 utterances of 3–8 phones, 2–5 frames per phone,
    /// noise 0.3.
    pub fn toy(language_id: &str, pool_indices: Vec<usize>, seed: u64) -> Self {
        SynthLanguageSpec {
            language_id: language_id.to_string(),
            pool_indices,
            utterances: 200,
            phones_per_utterance: (3, 8),
            frames_per_phone: (2, 5),
            noise_std: 0.3,
            seed,
        }
    }

    pub fn inventory(&self) -> Result<PhoneInventory> {
        PhoneInventory::with_phones(&self.language_id, self.pool_indices.iter().map(|&i| pool_phone_name(i)))
    }

    pub fn validate(&self, pool: &PoolSpec) -> Result<()> {
        validate_identifier(&self.language_id, "language id").map_err(|e| Error::Config(e.to_string()))?;
        let err = |m: String| Err(Error::Config(format!("language {:?}: {m}", self.language_id)));
        if self.pool_indices.len() < 2 {
            return err("needs at least 2 phones".into());
        }
        for (i, &p) in self.pool_indices.iter().enumerate() {
            if p >= pool.size {
                return err(format!("pool index {p} outside pool of {}", pool.size));
            }
            if self.pool_indices[..i].contains(&p) {
                return err(format!("pool index {p} listed twice"));
            }
        }
        let (a, b) = self.phones_per_utterance;
        if a == 0 || a > b {
            return err(format!("bad phones-per-utterance range {a}-{b}"));
        }
        let (a, b) = self.frames_per_phone;
        if a == 0 || a > b {
            return err(format!("bad frames-per-phone range {a}-{b}"));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return err(format!("bad noise_std {}", self.noise_std));
        }
        Ok(())
    }

    fn to_meta(&self, pool: &PoolSpec) -> BTreeMap<String, String> {
        let idx: Vec<String> = self.pool_indices.iter().map(usize::to_string).collect();
        [
            ("language_id", self.language_id.clone()),
            ("pool_seed", pool.seed.to_string()),
            ("pool_size", pool.size.to_string()),
            ("feature_dim", pool.feature_dim.to_string()),
            ("pool_indices", idx.join(",")),
            ("utterances", self.utterances.to_string()),
            (
                "phones_per_utterance",
                format!("{}-{}", self.phones_per_utterance.0, self.phones_per_utterance.1),
            ),
            (
                "frames_per_phone",
                format!("{}-{}", self.frames_per_phone.0, self.frames_per_phone.1),
            ),
            ("noise_std", self.noise_std.to_string()),
            ("seed", self.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub inventory: PhoneInventory,
    pub utterances: Vec<Utterance>,
    /// Extra `corpus.meta` entries besides `language_id`.
    pub meta: BTreeMap<String, String>,
}

impl Corpus {
    pub fn language_id(&self) -> &str {
        self.inventory.language_id()
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.utterances.first().map(|u| u.features.cols())
    }

    pub fn infeasible_count(&self) -> usize {
        self.utterances.iter().filter(|u| u.infeasible).count()
    }

    fn with_utterances(&self, utterances: Vec<Utterance>) -> Corpus {
        Corpus {
            inventory: self.inventory.clone(),
            utterances,
            meta: self.meta.clone(),
        }
    }

    /// The phones of `labels` by name.
    pub fn phone_names(&self, labels: &LabelSeq) -> Vec<&str> {
        labels
            .as_slice()
            .iter()
            .map(|&l| self.inventory.name(l).unwrap_or("?"))
            .collect()
    }
}

/// Generates a synthetic corpus. Every frame of a phone segment is the
/// phone's pool prototype plus independent Gaussian noise; consecutive
/// phones in a transcript are always distinct.
pub fn gen_synth_corpus(spec: &SynthLanguageSpec, pool: &PoolSpec) -> Result<Corpus> {
    spec.validate(pool)?;
    let prototypes = pool.prototypes();
    let inventory = spec.inventory()?;
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let classes = spec.pool_indices.len();

    let mut utterances = Vec::with_capacity(spec.utterances);
    for n in 0..spec.utterances {
        let phones = rng.gen_range(spec.phones_per_utterance.0..=spec.phones_per_utterance.1);
        let mut labels = Vec::with_capacity(phones);
        let mut rows = Vec::new();
        for _ in 0..phones {
            let label = loop {
                let l = rng.gen_range(1..=classes);
                if labels.last() != Some(&l) {
                    break l;
                }
            };
            labels.push(label);
            let proto = prototypes.row(spec.pool_indices[label - 1]);
            let frames = rng.gen_range(spec.frames_per_phone.0..=spec.frames_per_phone.1);
            for _ in 0..frames {
                rows.push(proto.iter().map(|m| m + noise.sample(&mut rng)).collect::<Vec<f64>>());
            }
        }
        utterances.push(Utterance::new(
            format!("{}_{n:04}", spec.language_id),
            spec.language_id.clone(),
            Matrix::from_rows(&rows)?,
            LabelSeq::new(labels)?,
        ));
    }
    let mut meta = spec.to_meta(pool);
    meta.remove("language_id");
    Ok(Corpus {
        inventory,
        utterances,
        meta,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    let feat_dir = dir.join("features");
    fs::create_dir_all(&feat_dir).map_err(|e| Error::io(format!("creating {}", feat_dir.display()), e))?;
    corpus.inventory.write(&dir.join("inventory.txt"))?;

    let mut meta = format!("language_id={}\n", corpus.language_id());
    for (k, v) in &corpus.meta {
        meta.push_str(&format!("{k}={v}\n"));
    }
    write_file(&dir.join("corpus.meta"), meta.as_bytes())?;

    let mut transcripts = String::new();
    for utt in &corpus.utterances {
        transcripts.push_str(&utt.utterance_id);
        transcripts.push('\t');
        transcripts.push_str(&corpus.phone_names(&utt.labels).join(" "));
        transcripts.push('\n');

        let (t, f) = utt.features.shape();
        let mut bytes = Vec::with_capacity(16 + 8 * t * f);
        bytes.extend_from_slice(&(t as u64).to_le_bytes());
        bytes.extend_from_slice(&(f as u64).to_le_bytes());
        for v in utt.features.as_slice() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        write_file(&feat_dir.join(format!("{}.f64", utt.utterance_id)), &bytes)?;
    }
    write_file(&dir.join("transcripts.tsv"), transcripts.as_bytes())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn read_features(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    if bytes.len() < 16 {
        return Err(Error::parse(path, 0, "feature file shorter than its header"));
    }
    let t = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")) as usize;
    let f = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let expected = t.checked_mul(f).and_then(|n| n.checked_mul(8)).and_then(|n| n.checked_add(16));
    if expected != Some(bytes.len()) {
        return Err(Error::parse(
            path,
            0,
            format!("header declares {t}x{f} but file has {} bytes", bytes.len()),
        ));
    }
    let data = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Matrix::from_vec(t, f, data)
}

fn parse_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut meta = BTreeMap::new();
    for (no, line) in read_text(path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, no + 1, "expected key=value"))?;
        meta.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(meta)
}

/// Loads a corpus directory. Utterances too short for their transcript are
/// kept with `infeasible` set.
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    let meta_path = dir.join("corpus.meta");
    let mut meta = parse_meta(&meta_path)?;
    let language_id = meta
        .remove("language_id")
        .ok_or_else(|| Error::parse(&meta_path, 0, "missing language_id"))?;
    let inventory = PhoneInventory::read(&language_id, &dir.join("inventory.txt"))?;

    let tr_path = dir.join("transcripts.tsv");
    let mut utterances = Vec::new();
    let mut feature_dim: Option<usize> = None;
    for (no, line) in read_text(&tr_path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, phones) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&tr_path, no + 1, "expected utterance_id<TAB>phones"))?;
        if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
            return Err(Error::parse(&tr_path, no + 1, format!("invalid utterance id {id:?}")));
        }
        if utterances.iter().any(|u: &Utterance| u.utterance_id == id) {
            return Err(Error::parse(&tr_path, no + 1, format!("duplicate utterance id {id:?}")));
        }
        let mut labels = Vec::new();
        for name in phones.split_whitespace() {
            match inventory.index_of(name) {
                Some(0) | None => {
                    return Err(Error::parse(
                        &tr_path,
                        no + 1,
                        format!("phone {name:?} is not in the {language_id} inventory"),
                    ))
                }
                Some(i) => labels.push(i),
            }
        }
        let feat_path = dir.join("features").join(format!("{id}.f64"));
        let features = read_features(&feat_path)?;
        if features.rows() == 0 {
            return Err(Error::parse(&feat_path, 0, "utterance has no frames"));
        }
        match feature_dim {
            Some(f) if f != features.cols() => {
                return Err(Error::parse(
                    &feat_path,
                    0,
                    format!("feature dimension {} differs from {f}", features.cols()),
                ))
            }
            _ => feature_dim = Some(features.cols()),
        }
        utterances.push(Utterance::new(
            id.to_string(),
            language_id.clone(),
            features,
            LabelSeq::new(labels)?,
        ));
    }
    Ok(Corpus {
        inventory,
        utterances,
        meta,
    })
}

/// A fraction of a corpus, selected by seeded shuffle then prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataFraction {
    pub fraction: f64,
    pub seed: u64,
}

impl DataFraction {
    pub fn new(fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Config(format!("fraction {fraction} outside (0, 1]")));
        }
        Ok(DataFraction { fraction, seed })
    }

    pub fn full() -> Self {
        DataFraction {
            fraction: 1.0,
            seed: 0,
        }
    }

    /// `⌈f · n⌉`, with a little slack for decimal fractions like `0.1`.
    pub fn count(&self, n: usize) -> usize {
        ((self.fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Deterministic subset of `⌈f · N⌉` utterances. The subset keeps corpus
/// order, and subsets for growing fractions under one seed are nested.
pub fn select_fraction(corpus: &Corpus, f: DataFraction) -> Result<Corpus> {
    let f = DataFraction::new(f.fraction, f.seed)?;
    if f.fraction == 1.0 {
        return Ok(corpus.clone());
    }
    let mut chosen = seeded_permutation(corpus.len(), f.seed);
    chosen.truncate(f.count(corpus.len()));
    chosen.sort_unstable();
    Ok(corpus.with_utterances(chosen.into_iter().map(|i| corpus.utterances[i].clone()).collect()))
}

/// Share of each corpus held out for development.
pub const DEV_SHARE: f64 = 0.1;

/// Splits `corpus` into `(train, dev)`, holding out 10% by seeded shuffle.
/// Both parts keep corpus order.
pub fn split_dev(corpus: &Corpus, seed: u64) -> (Corpus, Corpus) {
    let n = corpus.len();
    let dev_count = if n < 2 {
        0
    } else {
        ((n as f64 * DEV_SHARE).round() as usize).clamp(1, n - 1)
    };
    let perm = seeded_permutation(n, seed);
    let mut is_dev = vec![false; n];
    perm[..dev_count].iter().for_each(|&i| is_dev[i] = true);
    let (dev, train): (Vec<_>, Vec<_>) = corpus
        .utterances
        .iter()
        .cloned()
        .zip(is_dev)
        .partition(|(_, d)| *d);
    (
        corpus.with_utterances(train.into_iter().map(|(u, _)| u).collect()),
        corpus.with_utterances(dev.into_iter().map(|(u, _)| u).collect()),
    )
}

/// Path of a language's corpus directory under an output root.
pub fn corpus_dir(root: &Path, language_id: &str) -> PathBuf {
    root.join(language_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str, idx: Vec<usize>, seed: u64) -> SynthLanguageSpec {
        SynthLanguageSpec {
            utterances: 30,
            ..SynthLanguageSpec::toy(id, idx, seed)
        }
    }

    #[test]
    fn noiseless_single_frames_are_prototypes() {
        let pool = PoolSpec::default();
        let s = SynthLanguageSpec {
            noise_std: 0.0,
            frames_per_phone: (1, 1),
            ..spec("a", vec![3, 7, 11, 2], 5)
        };
        let corpus = gen_synth_corpus(&s, &pool).unwrap();
        let protos = pool.prototypes();
        for utt in &corpus.utterances {
            assert_eq!(utt.frames(), utt.labels.len());
            for (t, &l) in utt.labels.as_slice().iter().enumerate() {
                assert_eq!(utt.features.row(t), protos.row(s.pool_indices[l - 1]));
                // nearest-prototype classification is exact
                let nearest = (0..pool.size)
                    .min_by(|&a, &b| {
                        let da: f64 = protos.row(a).iter().zip(utt.features.row(t)).map(|(x, y)| (x - y).powi(2)).sum();
                        let db: f64 = protos.row(b).iter().zip(utt.features.row(t)).map(|(x, y)| (x - y).powi(2)).sum();
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                assert_eq!(nearest, s.pool_indices[l - 1]);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let pool = PoolSpec::default();
        let s = spec("a", vec![0, 1, 2, 3, 4], 9);
        assert_eq!(gen_synth_corpus(&s, &pool).unwrap(), gen_synth_corpus(&s, &pool).unwrap());
    }

    #[test]
    fn shared_phones_share_prototypes() {
        let pool = PoolSpec {
            seed: 3,
            ..PoolSpec::default()
        };
        let clean = |s: SynthLanguageSpec| SynthLanguageSpec {
            noise_std: 0.0,
            frames_per_phone: (1, 1),
            ..s
        };
        let a = gen_synth_corpus(&clean(spec("a", vec![1, 2, 3, 4], 1)), &pool).unwrap();
        let b = gen_synth_corpus(&clean(spec("b", vec![3, 4, 5, 6], 2)), &pool).unwrap();
        // one frame per phone, so frame t carries label t
        let frames_of = |c: &Corpus, name: &str| -> Vec<Vec<f64>> {
            let label = c.inventory.index_of(name).unwrap();
            c.utterances
                .iter()
                .flat_map(|u| {
                    u.labels
                        .as_slice()
                        .iter()
                        .enumerate()
                        .filter(|(_, &l)| l == label)
                        .map(|(t, _)| u.features.row(t).to_vec())
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        for shared in ["p03", "p04"] {
            let fa = frames_of(&a, shared);
            let fb = frames_of(&b, shared);
            assert!(!fa.is_empty() && !fb.is_empty());
            assert!(fa.iter().chain(&fb).all(|f| f == &fa[0]));
        }
        assert_ne!(frames_of(&a, "p01")[0], frames_of(&b, "p05")[0]);
    }

    #[test]
    fn no_adjacent_repeats_and_ranges_hold() {
        let c = gen_synth_corpus(&spec("a", vec![0, 1], 4), &PoolSpec::default()).unwrap();
        for u in &c.utterances {
            assert!(u.labels.as_slice().windows(2).all(|w| w[0] != w[1]));
            assert!((3..=8).contains(&u.labels.len()));
            assert!(u.frames() >= 2 * u.labels.len() && u.frames() <= 5 * u.labels.len());
            assert!(!u.infeasible);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let pool = PoolSpec::default();
        assert!(gen_synth_corpus(&spec("a", vec![1], 0), &pool).is_err());
        assert!(gen_synth_corpus(&spec("a", vec![1, 1], 0), &pool).is_err());
        assert!(gen_synth_corpus(&spec("a", vec![1, 25], 0), &pool).is_err());
        let mut s = spec("a", vec![1, 2], 0);
        s.frames_per_phone = (3, 2);
        assert!(gen_synth_corpus(&s, &pool).is_err());
    }

    #[test]
    fn fraction_selection() {
        let mut c = gen_synth_corpus(&spec("a", vec![0, 1, 2], 1), &PoolSpec::default()).unwrap();
        c.utterances = (0..100).map(|i| {
            let mut u = c.utterances[i % 30].clone();
            u.utterance_id = format!("u{i}");
            u
        }).collect();
        assert_eq!(select_fraction(&c, DataFraction::full()).unwrap(), c);
        assert_eq!(select_fraction(&c, DataFraction::new(0.25, 3).unwrap()).unwrap().len(), 25);
        assert_eq!(DataFraction::new(0.1, 0).unwrap().count(200), 20);
        assert_eq!(DataFraction::new(0.05, 0).unwrap().count(45), 3);
        assert!(DataFraction::new(0.0, 0).is_err());
        assert!(DataFraction::new(1.5, 0).is_err());

        let ids = |f: f64| -> Vec<String> {
            select_fraction(&c, DataFraction::new(f, 11).unwrap())
                .unwrap()
                .utterances
                .into_iter()
                .map(|u| u.utterance_id)
                .collect()
        };
        let fractions = [0.05, 0.1, 0.25, 0.5, 1.0];
        for w in fractions.windows(2) {
            let small = ids(w[0]);
            let large = ids(w[1]);
            assert!(small.iter().all(|id| large.contains(id)), "{} ⊄ {}", w[0], w[1]);
        }
    }

    #[test]
    fn dev_split_is_ten_percent_and_disjoint() {
        let c = gen_synth_corpus(&SynthLanguageSpec { utterances: 50, ..spec("a", vec![0, 1, 2], 1) }, &PoolSpec::default()).unwrap();
        let (train, dev) = split_dev(&c, 4);
        assert_eq!((train.len(), dev.len()), (45, 5));
        assert!(dev.utterances.iter().all(|d| !train.utterances.iter().any(|t| t.utterance_id == d.utterance_id)));
        assert_eq!(split_dev(&c, 4), (train, dev));
    }

    #[test]
    fn corpus_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = gen_synth_corpus(&spec("tur", vec![0, 4, 9], 2), &PoolSpec::default()).unwrap();
        // too short for its transcript
        c.utterances[0].features = Matrix::filled(1, 8, 0.5);
        c.utterances[0].labels = LabelSeq::new(vec![1, 2]).unwrap();
        c.utterances[0].infeasible = true;
        save_corpus(&c, dir.path()).unwrap();
        let back = load_corpus(dir.path()).unwrap();
        assert_eq!(back, c);
        assert!(back.utterances[0].infeasible);
        assert_eq!(back.infeasible_count(), 1);

        let tsv = dir.path().join("transcripts.tsv");
        let text = fs::read_to_string(&tsv).unwrap();
        let first = text.lines().next().unwrap();
        let broken = text.replacen(first, &format!("{first} zz9"), 1);
        fs::write(&tsv, broken).unwrap();
        let err = load_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("zz9") && err.contains("transcripts.tsv:1"), "{err}");

        fs::remove_file(dir.path().join("inventory.txt")).unwrap();
        assert!(load_corpus(dir.path()).is_err());
    }
}

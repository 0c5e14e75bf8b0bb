//! The shared-encoder multi-lingual model: one BiLSTM encoder feeding a
//! separate affine + softmax head per language.

mod decode;
mod io;
mod metrics;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;

pub use decode::{greedy_decode, prefix_beam_decode, prefix_beam_search};
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use metrics::{edit_distance, ErrorCounts};

use crate::encoder::{encoder_forward, EncoderOutput, EncoderParams};
use crate::error::{Error, Result};
use crate::numerics::{gemv_acc, Matrix};

/// Written as the first inventory entry.
pub const BLANK_SYMBOL: &str = "∅";

/// Ordered phone set of one language; index 0 is the blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneInventory {
    language_id: String,
    phones: Vec<String>,
}

impl PhoneInventory {
    pub fn new(language_id: impl Into<String>, phones: Vec<String>) -> Result<Self> {
        let language_id = language_id.into();
        validate_identifier(&language_id, "language id")?;
        if phones.first().map(String::as_str) != Some(BLANK_SYMBOL) {
            return Err(Error::Inventory(format!(
                "inventory for {language_id:?} must start with {BLANK_SYMBOL:?}"
            )));
        }
        if phones.len() < 2 {
            return Err(Error::Inventory(format!(
                "inventory for {language_id:?} has no phones besides the blank"
            )));
        }
        for (i, p) in phones.iter().enumerate() {
            validate_identifier(p, "phone name")?;
            if phones[..i].contains(p) {
                return Err(Error::Inventory(format!("duplicate phone {p:?} in {language_id:?}")));
            }
        }
        Ok(PhoneInventory { language_id, phones })
    }

    /// Builds an inventory from phone names, prepending the blank.
    pub fn with_phones<S: Into<String>>(language_id: &str, phones: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut all = vec![BLANK_SYMBOL.to_string()];
        all.extend(phones.into_iter().map(Into::into));
        Self::new(language_id, all)
    }

    pub fn language_id(&self) -> &str {
        &self.language_id
    }

    pub fn phones(&self) -> &[String] {
        &self.phones
    }

    /// Number of output classes including the blank.
    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, phone: &str) -> Option<usize> {
        self.phones.iter().position(|p| p == phone)
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.phones.get(index).map(String::as_str)
    }

    /// Reads an inventory file: one phone per line, first line the blank.
    pub fn read(language_id: &str, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let phones: Vec<String> = text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
        if phones.first().map(String::as_str) != Some(BLANK_SYMBOL) {
            return Err(Error::parse(path, 1, format!("first line must be {BLANK_SYMBOL:?}")));
        }
        Self::new(language_id, phones).map_err(|e| Error::parse(path, 0, e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.phones.join("\n");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

pub(crate) fn validate_identifier(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == ',' || c == '=') {
        return Err(Error::Inventory(format!(
            "{what} {s:?} must be non-empty without whitespace, ',' or '='"
        )));
    }
    Ok(())
}

/// Affine projection `W e_t + b` onto one language's phones.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageHead {
    pub inventory: PhoneInventory,
    /// `K × 2·hidden_dim`.
    pub weight: Matrix,
    /// `K`.
    pub bias: Vec<f64>,
}

impl LanguageHead {
    pub fn zeros(inventory: PhoneInventory, input_dim: usize) -> Self {
        let k = inventory.len();
        LanguageHead {
            inventory,
            weight: Matrix::zeros(k, input_dim),
            bias: vec![0.0; k],
        }
    }

    /// Uniform weights in `[−0.05, 0.05]`, zero bias.
    pub fn init<R: Rng>(inventory: PhoneInventory, input_dim: usize, rng: &mut R) -> Self {
        let mut head = Self::zeros(inventory, input_dim);
        for v in head.weight.as_mut_slice() {
            *v = rng.gen_range(-0.05..=0.05);
        }
        head
    }

    pub fn language_id(&self) -> &str {
        self.inventory.language_id()
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn param_count(&self) -> usize {
        self.weight.rows() * self.weight.cols() + self.bias.len()
    }

    /// `logits[t] = W e[t] + b`.
    pub fn project(&self, e: &Matrix) -> Result<Matrix> {
        if e.cols() != self.weight.cols() {
            return Err(Error::ShapeMismatch {
                op: "project_head",
                left: e.shape(),
                right: self.weight.shape(),
            });
        }
        let mut logits = Matrix::zeros(e.rows(), self.num_classes());
        for t in 0..e.rows() {
            let row = logits.row_mut(t);
            row.copy_from_slice(&self.bias);
            gemv_acc(&self.weight, e.row(t), row);
        }
        Ok(logits)
    }
}

/// Shared encoder plus per-language heads, keyed by language id.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHeadModel {
    pub encoder: EncoderParams,
    heads: BTreeMap<String, LanguageHead>,
}

impl MultiHeadModel {
    pub fn new(encoder: EncoderParams) -> Self {
        MultiHeadModel {
            encoder,
            heads: BTreeMap::new(),
        }
    }

    /// Fresh encoder plus a fresh head for every inventory, all drawn from `rng`.
    pub fn init<R: Rng>(
        config: crate::encoder::EncoderConfig,
        inventories: &[PhoneInventory],
        rng: &mut R,
    ) -> Result<Self> {
        let mut model = MultiHeadModel::new(EncoderParams::init(config, rng));
        for inv in inventories {
            model.add_head(inv.clone(), rng)?;
        }
        Ok(model)
    }

    pub fn embedding_dim(&self) -> usize {
        self.encoder.config().output_dim()
    }

    /// Registers a freshly initialized head.
    pub fn add_head<R: Rng>(&mut self, inventory: PhoneInventory, rng: &mut R) -> Result<()> {
        let head = LanguageHead::init(inventory, self.embedding_dim(), rng);
        self.insert_head(head)
    }

    pub fn insert_head(&mut self, head: LanguageHead) -> Result<()> {
        let id = head.language_id().to_string();
        if self.heads.contains_key(&id) {
            return Err(Error::Config(format!("duplicate head for language {id:?}")));
        }
        if head.weight.cols() != self.embedding_dim() || head.weight.rows() != head.bias.len() {
            return Err(Error::ShapeMismatch {
                op: "insert_head",
                left: head.weight.shape(),
                right: (head.bias.len(), self.embedding_dim()),
            });
        }
        if head.inventory.len() != head.bias.len() {
            return Err(Error::Inventory(format!(
                "inventory size {} does not match head size {}",
                head.inventory.len(),
                head.bias.len()
            )));
        }
        self.heads.insert(id, head);
        Ok(())
    }

    /// Drops every head, keeping the encoder.
    pub fn clear_heads(&mut self) {
        self.heads.clear();
    }

    pub fn head(&self, language_id: &str) -> Result<&LanguageHead> {
        self.heads
            .get(language_id)
            .ok_or_else(|| Error::UnknownLanguage(language_id.to_string()))
    }

    pub fn head_mut(&mut self, language_id: &str) -> Result<&mut LanguageHead> {
        self.heads
            .get_mut(language_id)
            .ok_or_else(|| Error::UnknownLanguage(language_id.to_string()))
    }

    pub fn has_head(&self, language_id: &str) -> bool {
        self.heads.contains_key(language_id)
    }

    pub fn heads(&self) -> impl Iterator<Item = &LanguageHead> {
        self.heads.values()
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.heads.keys().map(String::as_str)
    }

    /// Routes the shared embedding through the named language's head.
    pub fn project_head(&self, language_id: &str, e: &Matrix) -> Result<Matrix> {
        self.head(language_id)?.project(e)
    }

    pub fn encode(&self, features: &Matrix) -> Result<EncoderOutput> {
        encoder_forward(&self.encoder, features)
    }

    /// Features to per-frame logits for one language.
    pub fn logits(&self, language_id: &str, features: &Matrix) -> Result<Matrix> {
        let head = self.head(language_id)?;
        let out = self.encode(features)?;
        head.project(&out.e)
    }

    /// Greedy (best-path) transcription.
    pub fn transcribe(&self, language_id: &str, features: &Matrix) -> Result<crate::ctc::LabelSeq> {
        Ok(greedy_decode(&self.logits(language_id, features)?))
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.heads.values().map(LanguageHead::param_count).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::EncoderConfig;
    use crate::numerics::softmax_row;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inv(id: &str, n: usize) -> PhoneInventory {
        PhoneInventory::with_phones(id, (1..=n).map(|i| format!("p{i}"))).unwrap()
    }

    #[test]
    fn inventory_validation() {
        assert!(PhoneInventory::new("x", vec!["a".into(), "∅".into()]).is_err());
        assert!(PhoneInventory::new("x", vec!["∅".into()]).is_err());
        assert!(PhoneInventory::new("x", vec!["∅".into(), "a".into(), "a".into()]).is_err());
        assert!(PhoneInventory::new("bad id", vec!["∅".into(), "a".into()]).is_err());
        let i = inv("kmr", 3);
        assert_eq!(i.len(), 4);
        assert_eq!(i.index_of("p2"), Some(2));
        assert_eq!(i.name(0), Some(BLANK_SYMBOL));
    }

    #[test]
    fn zero_head_is_uniform() {
        let head = LanguageHead::zeros(inv("a", 4), 6);
        let e = Matrix::filled(3, 6, 0.7);
        let logits = head.project(&e).unwrap();
        for r in logits.iter_rows() {
            for p in softmax_row(r).unwrap() {
                assert!((p - 0.2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kurmanji_sized_head_has_about_32k_parameters() {
        let head = LanguageHead::zeros(inv("kmr", 44), EncoderConfig::full_scale(40).output_dim());
        assert_eq!(head.num_classes(), 45);
        assert_eq!(head.param_count(), 720 * 45 + 45);
        assert_eq!(head.param_count(), 32_445);
    }

    #[test]
    fn routing_isolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut model =
            MultiHeadModel::init(EncoderConfig::new(1, 3, 2).unwrap(), &[inv("a", 3), inv("b", 5)], &mut rng).unwrap();
        let e = Matrix::filled(4, 6, 0.3);
        let before = model.project_head("a", &e).unwrap();
        model.head_mut("b").unwrap().weight.as_mut_slice()[0] += 1.0;
        let after = model.project_head("a", &e).unwrap();
        assert_eq!(before, after);
        assert_eq!(model.project_head("b", &e).unwrap().shape(), (4, 6));
        assert!(matches!(
            model.project_head("zz", &e),
            Err(Error::UnknownLanguage(ref l)) if l == "zz"
        ));
    }

    #[test]
    fn duplicate_head_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut model = MultiHeadModel::init(EncoderConfig::new(1, 2, 2).unwrap(), &[inv("a", 2)], &mut rng).unwrap();
        assert!(model.add_head(inv("a", 3), &mut rng).is_err());
        model.clear_heads();
        assert_eq!(model.languages().count(), 0);
    }
}

//! Model file format: a UTF-8 text header terminated by a line `end`,
//! followed by every tensor as little-endian `f64`, in header order.
//!
//! ```text
//! polyglot-ctc-model
//! version 1
//! encoder <num_layers> <hidden_dim> <input_dim>
//! heads <count>
//! head <language_id> <K>
//! phones ∅ <phone> ...
//! tensor <name> <rows> <cols>
//! ...
//! end
//! ```

use std::fs;
use std::path::Path;

use super::{LanguageHead, MultiHeadModel, PhoneInventory};
use crate::encoder::{EncoderConfig, EncoderParams};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const MODEL_MAGIC: &str = "polyglot-ctc-model";
pub const MODEL_VERSION: u32 = 1;

fn head_tensor_names(language_id: &str) -> [String; 2] {
    [format!("head.{language_id}.w"), format!("head.{language_id}.b")]
}

/// Serializes a model to bytes.
pub fn write_model(model: &MultiHeadModel) -> Vec<u8> {
    let cfg = model.encoder.config();
    let mut header = format!(
        "{MODEL_MAGIC}\nversion {MODEL_VERSION}\nencoder {} {} {}\nheads {}\n",
        cfg.num_layers,
        cfg.hidden_dim,
        cfg.input_dim,
        model.heads.len()
    );
    for head in model.heads() {
        header.push_str(&format!("head {} {}\n", head.language_id(), head.num_classes()));
        header.push_str(&format!("phones {}\n", head.inventory.phones().join(" ")));
    }

    let mut payload: Vec<&[f64]> = Vec::new();
    for (name, t) in model.encoder.tensor_names().iter().zip(model.encoder.tensors()) {
        header.push_str(&format!("tensor {name} {} {}\n", t.rows, t.cols));
        payload.push(t.data);
    }
    for head in model.heads() {
        let [w, b] = head_tensor_names(head.language_id());
        header.push_str(&format!("tensor {w} {} {}\n", head.weight.rows(), head.weight.cols()));
        header.push_str(&format!("tensor {b} {} 1\n", head.bias.len()));
        payload.push(head.weight.as_slice());
        payload.push(&head.bias);
    }
    header.push_str("end\n");

    let floats: usize = payload.iter().map(|p| p.len()).sum();
    let mut bytes = Vec::with_capacity(header.len() + 8 * floats);
    bytes.extend_from_slice(header.as_bytes());
    for values in payload {
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

pub fn save_model(model: &MultiHeadModel, path: &Path) -> Result<()> {
    fs::write(path, write_model(model)).map_err(|e| Error::io(format!("writing model {}", path.display()), e))
}

pub fn load_model(path: &Path) -> Result<MultiHeadModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading model {}", path.display()), e))?;
    read_model(&bytes)
}

struct Header<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Header<'a> {
    fn next_fields(&mut self, keyword: &str, arity: usize) -> Result<Vec<&'a str>> {
        let (no, line) = self
            .lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("header ended before {keyword:?}")))?;
        let mut fields = line.split(' ');
        if fields.next() != Some(keyword) {
            return Err(Error::ModelFormat(format!(
                "line {}: expected {keyword:?}, found {line:?}",
                no + 1
            )));
        }
        let rest: Vec<&str> = fields.collect();
        if arity != usize::MAX && rest.len() != arity {
            return Err(Error::ModelFormat(format!(
                "line {}: {keyword:?} takes {arity} fields, found {}",
                no + 1,
                rest.len()
            )));
        }
        Ok(rest)
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::ModelFormat(format!("{what}: not a count: {s:?}")))
}

/// Parses a model from bytes. Nothing is returned unless the whole file,
/// payload included, is consistent.
pub fn read_model(bytes: &[u8]) -> Result<MultiHeadModel> {
    const TERMINATOR: &[u8] = b"\nend\n";
    let end = bytes
        .windows(TERMINATOR.len())
        .position(|w| w == TERMINATOR)
        .ok_or_else(|| Error::ModelFormat("missing header terminator".into()))?;
    let header_text = std::str::from_utf8(&bytes[..end + 1])
        .map_err(|_| Error::ModelFormat("header is not UTF-8".into()))?;
    let payload = &bytes[end + TERMINATOR.len()..];

    let mut header = Header {
        lines: header_text.lines().enumerate(),
    };
    if header.lines.next().map(|(_, l)| l) != Some(MODEL_MAGIC) {
        return Err(Error::ModelFormat(format!("missing magic {MODEL_MAGIC:?}")));
    }
    let version = header.next_fields("version", 1)?;
    if version[0] != MODEL_VERSION.to_string() {
        return Err(Error::ModelFormat(format!(
            "unsupported version {} (expected {MODEL_VERSION})",
            version[0]
        )));
    }
    let enc = header.next_fields("encoder", 3)?;
    let config = EncoderConfig::new(
        parse_count(enc[0], "num_layers")?,
        parse_count(enc[1], "hidden_dim")?,
        parse_count(enc[2], "input_dim")?,
    )?;
    let head_count = parse_count(header.next_fields("heads", 1)?[0], "heads")?;

    let mut model = MultiHeadModel::new(EncoderParams::zeros(config));
    let mut declared = Vec::with_capacity(head_count);
    for _ in 0..head_count {
        let h = header.next_fields("head", 2)?;
        let k = parse_count(h[1], "head size")?;
        let phones: Vec<String> = header
            .next_fields("phones", usize::MAX)?
            .into_iter()
            .map(str::to_string)
            .collect();
        let inventory = PhoneInventory::new(h[0], phones)?;
        if inventory.len() != k {
            return Err(Error::ModelFormat(format!(
                "head {:?} declares {k} classes but lists {} phones",
                h[0],
                inventory.len()
            )));
        }
        declared.push(inventory.language_id().to_string());
        model.insert_head(LanguageHead::zeros(inventory, config.output_dim()))?;
    }
    if model.heads.len() != head_count {
        return Err(Error::ModelFormat("duplicate head".into()));
    }

    let mut expected: Vec<(String, usize, usize)> = model
        .encoder
        .tensor_names()
        .into_iter()
        .zip(model.encoder.tensors())
        .map(|(n, t)| (n, t.rows, t.cols))
        .collect();
    for head in model.heads() {
        let [w, b] = head_tensor_names(head.language_id());
        expected.push((w, head.weight.rows(), head.weight.cols()));
        expected.push((b, head.bias.len(), 1));
    }
    for (name, rows, cols) in &expected {
        let t = header.next_fields("tensor", 3)?;
        let got = (t[0], parse_count(t[1], "rows")?, parse_count(t[2], "cols")?);
        if got != (name.as_str(), *rows, *cols) {
            return Err(Error::ModelFormat(format!(
                "expected tensor {name} {rows}x{cols}, found {} {}x{}",
                got.0, got.1, got.2
            )));
        }
    }
    if let Some((no, line)) = header.lines.next() {
        return Err(Error::ModelFormat(format!("line {}: unexpected {line:?}", no + 1)));
    }

    let floats: usize = expected.iter().map(|(_, r, c)| r * c).sum();
    if payload.len() != 8 * floats {
        return Err(Error::ModelFormat(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            8 * floats
        )));
    }
    let mut values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    for dst in model.encoder.tensors_mut() {
        dst.iter_mut().for_each(|v| *v = values.next().expect("sized payload"));
    }
    for id in model.heads.keys().cloned().collect::<Vec<_>>() {
        let head = model.heads.get_mut(&id).expect("declared head");
        let w: Vec<f64> = values.by_ref().take(head.weight.rows() * head.weight.cols()).collect();
        head.weight = Matrix::from_vec(head.weight.rows(), head.weight.cols(), w)?;
        head.bias.iter_mut().for_each(|v| *v = values.next().expect("sized payload"));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> MultiHeadModel {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let invs = [
            PhoneInventory::with_phones("tur", ["a", "b", "c"]).unwrap(),
            PhoneInventory::with_phones("hat", ["a", "x"]).unwrap(),
        ];
        let mut m = MultiHeadModel::init(EncoderConfig::new(2, 3, 4).unwrap(), &invs, &mut rng).unwrap();
        m.head_mut("hat").unwrap().bias[1] = -0.0;
        m.head_mut("tur").unwrap().bias[0] = 1.0 / 3.0;
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let bytes = write_model(&m);
        let back = read_model(&bytes).unwrap();
        assert_eq!(write_model(&back), bytes);
        assert_eq!(back, m);
        assert!(back.head("hat").unwrap().bias[1].is_sign_negative());
    }

    #[test]
    fn truncated_file_rejected() {
        let bytes = write_model(&model());
        for cut in [bytes.len() - 1, bytes.len() - 8, 40, 5] {
            assert!(read_model(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(read_model(&extra).is_err());
    }

    #[test]
    fn version_and_shape_mismatch_rejected() {
        let bytes = write_model(&model());
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let bumped = text.replacen("version 1", "version 9", 1);
        let err = read_model(bumped.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("version"), "{err}");

        let mut reshaped = bytes.clone();
        let pos = text.find("encoder 2 3 4").unwrap();
        reshaped[pos + "encoder 2 ".len()] = b'5';
        assert!(read_model(&reshaped).is_err());
    }
}

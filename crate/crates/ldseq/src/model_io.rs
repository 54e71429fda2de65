//! The model and embedding container format.
//!
//! A container is a text header followed by a raw binary payload:
//!
//! ```text
//! LDSEQ 1 model            magic, format version, kind (model|embeddings)
//! direction forward        header keys, one per line
//! arch ldrnn
//! ...
//! vocab words 117          vocabulary sizes followed by one item per line
//! <item>
//! ...
//! tensor word_embed 117 200   name, rows, cols; listed in payload order
//! ...
//! payload
//! <row-major little-endian f64 data, tensor after tensor>
//! ```
//!
//! Payloads are little-endian 64-bit floats, byte-exact across platforms;
//! `load(save(m))` is bit-identical. Files are written to a temporary
//! sibling and renamed into place, so a failed save never leaves a partial
//! file, and an unsupported version is refused outright.

use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{VocabSet, Vocabulary};
use crate::decode::Direction;
use crate::embed::EmbeddingTable;
use crate::nets::{Arch, JordanFeedback, ModelParams, NetConfig, VocabDims};
use crate::numkit::{Activation, Rng};
use crate::{Error, Result};

const MAGIC: &str = "LDSEQ";
const VERSION: u32 = 1;

/// A trained model with everything needed to decode raw text: direction,
/// vocabularies, and parameters (which carry their config).
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub direction: Direction,
    pub vocabs: VocabSet,
    pub params: ModelParams,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Arg(format!("not a file path: {}", path.display())))?;
    let tmp_name = format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    std::fs::write(&tmp, bytes)?;
    match std::fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}

fn push_vocab(out: &mut String, name: &str, vocab: &Vocabulary) {
    let _ = writeln!(out, "vocab {name} {}", vocab.len());
    for item in vocab.items() {
        let _ = writeln!(out, "{item}");
    }
}

fn config_header(cfg: &NetConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "arch {}", cfg.arch.name());
    let _ = writeln!(out, "embed_dim {}", cfg.embed_dim);
    let _ = writeln!(out, "hidden {}", cfg.hidden);
    let _ = writeln!(out, "word_window {}", cfg.word_window);
    let _ = writeln!(out, "label_context {}", cfg.label_context);
    let _ = writeln!(out, "char_window {}", cfg.char_window);
    let _ = writeln!(out, "conv_size {}", cfg.conv_size);
    let _ = writeln!(out, "use_classes {}", u8::from(cfg.use_classes));
    let _ = writeln!(out, "use_charconv {}", u8::from(cfg.use_charconv));
    let _ = writeln!(out, "activation {}", cfg.activation.name());
    let _ = writeln!(out, "jordan_feedback {}", cfg.jordan_feedback.name());
    out
}

/// Serializes a model to bytes in the container format.
pub fn model_to_bytes(model: &SavedModel) -> Vec<u8> {
    let mut header = String::new();
    let _ = writeln!(header, "{MAGIC} {VERSION} model");
    let _ = writeln!(header, "direction {}", model.direction.name());
    header.push_str(&config_header(&model.params.config));
    push_vocab(&mut header, "words", &model.vocabs.words);
    push_vocab(&mut header, "classes", &model.vocabs.classes);
    push_vocab(&mut header, "labels", &model.vocabs.labels);
    push_vocab(&mut header, "chars", &model.vocabs.chars);
    let tensors = model.params.tensors();
    for t in &tensors {
        let _ = writeln!(header, "tensor {} {} {}", t.name, t.rows, t.cols);
    }
    let _ = writeln!(header, "payload");
    let mut bytes = header.into_bytes();
    for t in &tensors {
        for x in t.data {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    bytes
}

pub fn save_model(path: &Path, model: &SavedModel) -> Result<()> {
    write_atomic(path, &model_to_bytes(model))
}

/// Reads header lines straight off the byte buffer, tracking the offset so
/// the binary payload starts exactly where the header parsing stopped. This
/// avoids guessing where the header ends, which matters because vocabulary
/// items are arbitrary strings.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("truncated header".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::Format("header is not valid UTF-8".into()))?;
        self.pos += nl + 1;
        Ok(line)
    }

    /// Reads a `key value` line and returns the value.
    fn expect_key(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(Error::Format(format!(
                "expected header key '{key}', found '{line}'"
            ))),
        }
    }
}

fn parse_count(v: &str, what: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Format(format!("bad {what} '{v}'")))
}

fn read_vocab(r: &mut HeaderReader<'_>, name: &str) -> Result<Vocabulary> {
    let v = r.expect_key("vocab")?;
    let (n, count) = v
        .split_once(' ')
        .ok_or_else(|| Error::Format(format!("bad vocab line '{v}'")))?;
    if n != name {
        return Err(Error::Format(format!(
            "expected vocabulary '{name}', found '{n}'"
        )));
    }
    let count = parse_count(count, "vocabulary size")?;
    let mut items = Vec::with_capacity(count);
    for _ in 0..count {
        items.push(r.next_line()?.to_string());
    }
    Vocabulary::from_items(items)
}

fn check_magic(r: &mut HeaderReader<'_>, kind: &str) -> Result<()> {
    let magic_line = r.next_line()?;
    let mut parts = magic_line.split(' ');
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format("not a model container (bad magic)".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format("missing format version".into()))?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported container version {version}, this build reads version {VERSION}"
        )));
    }
    match parts.next() {
        Some(k) if k == kind => Ok(()),
        other => Err(Error::Format(format!(
            "expected a {kind} container, found {other:?}"
        ))),
    }
}

fn read_config(r: &mut HeaderReader<'_>) -> Result<NetConfig> {
    Ok(NetConfig {
        arch: Arch::parse(r.expect_key("arch")?)?,
        embed_dim: parse_count(r.expect_key("embed_dim")?, "embed_dim")?,
        hidden: parse_count(r.expect_key("hidden")?, "hidden")?,
        word_window: parse_count(r.expect_key("word_window")?, "word_window")?,
        label_context: parse_count(r.expect_key("label_context")?, "label_context")?,
        char_window: parse_count(r.expect_key("char_window")?, "char_window")?,
        conv_size: parse_count(r.expect_key("conv_size")?, "conv_size")?,
        use_classes: r.expect_key("use_classes")? == "1",
        use_charconv: r.expect_key("use_charconv")? == "1",
        activation: Activation::parse(r.expect_key("activation")?)?,
        jordan_feedback: JordanFeedback::parse(r.expect_key("jordan_feedback")?)?,
    })
}

/// Loads a model container, validating magic, version, shapes, and payload
/// size, and refusing non-finite parameter values.
pub fn load_model(path: &Path) -> Result<SavedModel> {
    let bytes = std::fs::read(path)?;
    model_from_bytes(&bytes)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<SavedModel> {
    let mut r = HeaderReader { bytes, pos: 0 };
    check_magic(&mut r, "model")?;
    let direction = Direction::parse(r.expect_key("direction")?)?;
    let config = read_config(&mut r)?;
    let vocabs = VocabSet {
        words: read_vocab(&mut r, "words")?,
        classes: read_vocab(&mut r, "classes")?,
        labels: read_vocab(&mut r, "labels")?,
        chars: read_vocab(&mut r, "chars")?,
    };

    // Tensor table until the payload marker.
    let mut table = Vec::new();
    loop {
        let line = r.next_line()?;
        if line == "payload" {
            break;
        }
        let mut parts = line.split(' ');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("tensor"), Some(name), Some(rows), Some(cols)) => {
                table.push((
                    name.to_string(),
                    parse_count(rows, "tensor rows")?,
                    parse_count(cols, "tensor cols")?,
                ));
            }
            _ => return Err(Error::Format(format!("bad tensor line '{line}'"))),
        }
    }

    // Build a model of the right shape, then overwrite every tensor from the
    // payload in canonical order.
    let dims = VocabDims::of(&vocabs);
    let mut params = ModelParams::init(config, dims, &mut Rng::new(0))?;
    let mut offset = r.pos;
    {
        let mut views = params.tensors_mut();
        if views.len() != table.len() {
            return Err(Error::Format(format!(
                "container lists {} tensors, model shape needs {}",
                table.len(),
                views.len()
            )));
        }
        for (view, (name, rows, cols)) in views.iter_mut().zip(&table) {
            if view.name != name || view.rows != *rows || view.cols != *cols {
                return Err(Error::Format(format!(
                    "tensor mismatch: container has {name} {rows}x{cols}, model shape needs {} {}x{}",
                    view.name, view.rows, view.cols
                )));
            }
            let n_bytes = view.data.len() * 8;
            let end = offset + n_bytes;
            if end > bytes.len() {
                return Err(Error::Format("payload truncated".into()));
            }
            for (i, chunk) in bytes[offset..end].chunks_exact(8).enumerate() {
                let x = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                if !x.is_finite() {
                    return Err(Error::Format(format!("non-finite value in tensor {name}")));
                }
                view.data[i] = x;
            }
            offset = end;
        }
    }
    if offset != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the payload",
            bytes.len() - offset
        )));
    }
    Ok(SavedModel {
        direction,
        vocabs,
        params,
    })
}

/// Serializes an embedding table (with its vocabulary) so embeddings can be
/// pretrained once and reused across models.
pub fn embeddings_to_bytes(column: &str, vocab: &Vocabulary, table: &EmbeddingTable) -> Vec<u8> {
    let mut header = String::new();
    let _ = writeln!(header, "{MAGIC} {VERSION} embeddings");
    let _ = writeln!(header, "column {column}");
    let _ = writeln!(header, "dim {}", table.dim());
    push_vocab(&mut header, "items", vocab);
    let _ = writeln!(
        header,
        "tensor embeddings {} {}",
        table.vocab_size(),
        table.dim()
    );
    let _ = writeln!(header, "payload");
    let mut bytes = header.into_bytes();
    for x in table.matrix().data() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    bytes
}

pub fn save_embeddings(
    path: &Path,
    column: &str,
    vocab: &Vocabulary,
    table: &EmbeddingTable,
) -> Result<()> {
    write_atomic(path, &embeddings_to_bytes(column, vocab, table))
}

pub fn load_embeddings(path: &Path) -> Result<(String, Vocabulary, EmbeddingTable)> {
    let bytes = std::fs::read(path)?;
    let mut r = HeaderReader {
        bytes: &bytes,
        pos: 0,
    };
    check_magic(&mut r, "embeddings")?;
    let column = r.expect_key("column")?.to_string();
    let dim = parse_count(r.expect_key("dim")?, "dim")?;
    let vocab = read_vocab(&mut r, "items")?;
    let tensor_line = r.next_line()?;
    let expected = format!("tensor embeddings {} {dim}", vocab.len());
    if tensor_line != expected {
        return Err(Error::Format(format!(
            "bad embeddings tensor line '{tensor_line}', expected '{expected}'"
        )));
    }
    if r.next_line()? != "payload" {
        return Err(Error::Format("missing payload line".into()));
    }
    let payload_start = r.pos;
    let n = vocab.len() * dim;
    if bytes.len() != payload_start + n * 8 {
        return Err(Error::Format("embeddings payload has the wrong size".into()));
    }
    let mut data = Vec::with_capacity(n);
    for chunk in bytes[payload_start..].chunks_exact(8) {
        let x = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !x.is_finite() {
            return Err(Error::Format("non-finite embedding value".into()));
        }
        data.push(x);
    }
    let matrix = crate::numkit::Matrix::from_vec(vocab.len(), dim, data)?;
    Ok((column, vocab, EmbeddingTable::new(matrix)))
}

//! Column-formatted corpus parsing, vocabularies, index encoding, and BIO
//! chunk utilities.
//!
//! Input files are UTF-8 text with one token per line and whitespace-separated
//! columns, a blank line between sentences, and `#`-prefixed lines ignored.
//! One column is a bare word (prediction input), two columns are word+label,
//! three are word+class+label. The column count must be consistent within a
//! file.

use std::collections::HashMap;

use crate::{Error, Result};

/// Reserved vocabulary entries, present in every vocabulary at indices 0..3:
/// unknown item, sentence-begin pad, sentence-end pad, begin-of-labels pad.
pub const UNK: &str = "<unk>";
pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";
pub const BOL: &str = "<bol>";

pub const UNK_IDX: usize = 0;
pub const BOS_IDX: usize = 1;
pub const EOS_IDX: usize = 2;
pub const BOL_IDX: usize = 3;

const RESERVED: [&str; 4] = [UNK, BOS, EOS, BOL];

/// One annotated token: surface word, optional word class, label.
/// The label is empty for bare prediction input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub word: String,
    pub word_class: Option<String>,
    pub label: String,
}

/// One sentence of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceExample {
    pub tokens: Vec<Token>,
}

impl SequenceExample {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.word.as_str()).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.label.as_str()).collect()
    }

    /// Token order reversed; used to derive training data for backward models.
    pub fn reversed(&self) -> SequenceExample {
        SequenceExample {
            tokens: self.tokens.iter().rev().cloned().collect(),
        }
    }
}

/// Parses column-formatted text into sentences.
///
/// Inconsistent column counts within one file are a parse error reported with
/// the offending line number. An empty file parses to an empty list.
pub fn parse_conll(text: &str) -> Result<Vec<SequenceExample>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut file_cols: Option<usize> = None;

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            if !tokens.is_empty() {
                sentences.push(SequenceExample {
                    tokens: std::mem::take(&mut tokens),
                });
            }
            continue;
        }
        let n = cols.len();
        if n > 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected at most 3 columns, got {n}"),
            });
        }
        match file_cols {
            None => file_cols = Some(n),
            Some(expect) if expect != n => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("inconsistent column count: expected {expect}, got {n}"),
                });
            }
            Some(_) => {}
        }
        let token = match n {
            1 => Token {
                word: cols[0].to_string(),
                word_class: None,
                label: String::new(),
            },
            2 => Token {
                word: cols[0].to_string(),
                word_class: None,
                label: cols[1].to_string(),
            },
            _ => Token {
                word: cols[0].to_string(),
                word_class: Some(cols[1].to_string()),
                label: cols[2].to_string(),
            },
        };
        tokens.push(token);
    }
    if !tokens.is_empty() {
        sentences.push(SequenceExample { tokens });
    }
    Ok(sentences)
}

/// Bijective item/index mapping with the four reserved entries at indices 0..3.
/// Index order is deterministic: reserved entries, then first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index_of: HashMap<String, usize>,
    items: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from an item stream, keeping items whose frequency
    /// is at least `min_count`. Dropped items encode to [`UNK_IDX`].
    pub fn build<'a, I>(items: I, min_count: usize) -> Vocabulary
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for item in items {
            let c = counts.entry(item).or_insert(0);
            if *c == 0 {
                order.push(item);
            }
            *c += 1;
        }
        let mut vocab = Vocabulary::reserved_only();
        for item in order {
            if counts[item] >= min_count && !vocab.index_of.contains_key(item) {
                vocab.push(item.to_string());
            }
        }
        vocab
    }

    pub fn reserved_only() -> Vocabulary {
        let mut vocab = Vocabulary {
            index_of: HashMap::new(),
            items: Vec::new(),
        };
        for r in RESERVED {
            vocab.push(r.to_string());
        }
        vocab
    }

    /// Rebuilds a vocabulary from a saved item list.
    pub fn from_items(items: Vec<String>) -> Result<Vocabulary> {
        if items.len() < RESERVED.len()
            || items[..RESERVED.len()] != RESERVED.map(String::from)
        {
            return Err(Error::Format(
                "vocabulary does not start with the reserved entries".into(),
            ));
        }
        let mut index_of = HashMap::new();
        for (i, item) in items.iter().enumerate() {
            if index_of.insert(item.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary item '{item}'")));
            }
        }
        Ok(Vocabulary { index_of, items })
    }

    fn push(&mut self, item: String) {
        self.index_of.insert(item.clone(), self.items.len());
        self.items.push(item);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the reserved entries are always present
    }

    pub fn index_of(&self, item: &str) -> Option<usize> {
        self.index_of.get(item).copied()
    }

    pub fn index_or_unk(&self, item: &str) -> usize {
        self.index_of(item).unwrap_or(UNK_IDX)
    }

    pub fn item(&self, index: usize) -> &str {
        &self.items[index]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

/// The vocabularies of one trained model: words, word classes, labels, and
/// characters (single-character items).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabSet {
    pub words: Vocabulary,
    pub classes: Vocabulary,
    pub labels: Vocabulary,
    pub chars: Vocabulary,
}

impl VocabSet {
    /// Builds all vocabularies from training sentences.
    ///
    /// `min_count` prunes rare words and classes; labels are the output space
    /// and are never pruned. Characters come from the surface words.
    pub fn build(examples: &[SequenceExample], min_count: usize) -> VocabSet {
        let words = Vocabulary::build(
            examples
                .iter()
                .flat_map(|s| s.tokens.iter().map(|t| t.word.as_str())),
            min_count,
        );
        let classes = Vocabulary::build(
            examples.iter().flat_map(|s| {
                s.tokens
                    .iter()
                    .filter_map(|t| t.word_class.as_deref())
            }),
            min_count,
        );
        let labels = Vocabulary::build(
            examples
                .iter()
                .flat_map(|s| s.tokens.iter().map(|t| t.label.as_str())),
            1,
        );
        let mut char_items = Vec::new();
        for s in examples {
            for t in &s.tokens {
                for ch in t.word.chars() {
                    char_items.push(ch.to_string());
                }
            }
        }
        let chars = Vocabulary::build(char_items.iter().map(|s| s.as_str()), 1);
        VocabSet {
            words,
            classes,
            labels,
            chars,
        }
    }

    /// Encodes a training sentence. Unseen words and classes map to UNK; an
    /// unseen label is an error because labels are a closed set.
    pub fn encode_train(&self, example: &SequenceExample) -> Result<EncodedSentence> {
        let mut enc = self.encode_tokens(example);
        let mut labels = Vec::with_capacity(example.len());
        for t in &example.tokens {
            match self.labels.index_of(&t.label) {
                Some(i) => labels.push(i),
                None => {
                    return Err(Error::Data(format!(
                        "label '{}' not in the training label set",
                        t.label
                    )))
                }
            }
        }
        enc.labels = Some(labels);
        Ok(enc)
    }

    /// Encodes words/classes/characters only; gold labels, if any, stay
    /// strings so that evaluation can score labels unseen in training.
    pub fn encode_tokens(&self, example: &SequenceExample) -> EncodedSentence {
        let words = example
            .tokens
            .iter()
            .map(|t| self.words.index_or_unk(&t.word))
            .collect();
        let classes = example
            .tokens
            .iter()
            .map(|t| {
                t.word_class
                    .as_deref()
                    .map_or(UNK_IDX, |c| self.classes.index_or_unk(c))
            })
            .collect();
        let chars = example
            .tokens
            .iter()
            .map(|t| {
                t.word
                    .chars()
                    .map(|ch| self.chars.index_or_unk(&ch.to_string()))
                    .collect()
            })
            .collect();
        EncodedSentence {
            words,
            classes,
            chars,
            labels: None,
        }
    }
}

/// A sentence encoded to vocabulary indices. Character sequences keep their
/// natural left-to-right order even in reversed (backward-model) sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub words: Vec<usize>,
    pub classes: Vec<usize>,
    pub chars: Vec<Vec<usize>>,
    pub labels: Option<Vec<usize>>,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn reversed(&self) -> EncodedSentence {
        EncodedSentence {
            words: self.words.iter().rev().copied().collect(),
            classes: self.classes.iter().rev().copied().collect(),
            chars: self.chars.iter().rev().cloned().collect(),
            labels: self
                .labels
                .as_ref()
                .map(|ls| ls.iter().rev().copied().collect()),
        }
    }
}

/// Training corpus: sentences plus the vocabularies built from them.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub examples: Vec<SequenceExample>,
    pub vocabs: VocabSet,
    pub has_classes: bool,
}

impl Corpus {
    pub fn build(examples: Vec<SequenceExample>, min_count: usize) -> Result<Corpus> {
        if examples.is_empty() {
            return Err(Error::Data("corpus has no sentences".into()));
        }
        let has_classes = examples
            .iter()
            .any(|s| s.tokens.iter().any(|t| t.word_class.is_some()));
        let vocabs = VocabSet::build(&examples, min_count);
        Ok(Corpus {
            examples,
            vocabs,
            has_classes,
        })
    }

    pub fn encode_all(&self) -> Result<Vec<EncodedSentence>> {
        self.examples
            .iter()
            .map(|s| self.vocabs.encode_train(s))
            .collect()
    }

    /// Corpus with every sentence reversed, sharing the same vocabularies.
    pub fn reversed(&self) -> Corpus {
        Corpus {
            examples: self.examples.iter().map(|s| s.reversed()).collect(),
            vocabs: self.vocabs.clone(),
            has_classes: self.has_classes,
        }
    }
}

/// A labeled span: chunk type, start index, exclusive end index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chunk {
    pub kind: String,
    pub start: usize,
    pub end: usize,
}

enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

fn split_tag(label: &str) -> Tag<'_> {
    if label == "O" || label.is_empty() {
        Tag::Outside
    } else if let Some(kind) = label.strip_prefix("B-") {
        Tag::Begin(kind)
    } else if let Some(kind) = label.strip_prefix("I-") {
        Tag::Inside(kind)
    } else {
        // Bare labels behave like an IO scheme: runs of the same type form
        // one chunk.
        Tag::Inside(label)
    }
}

/// Extracts maximal BIO chunks. A stray `I-X` (after `O`, at sentence start,
/// or after a different type) starts a chunk, following the conlleval
/// convention. Spans come out disjoint and sorted by start.
pub fn extract_chunks<S: AsRef<str>>(labels: &[S]) -> Vec<Chunk> {
    let mut chunks = Vec::new();
    let mut open: Option<(String, usize)> = None;
    for (i, label) in labels.iter().enumerate() {
        match split_tag(label.as_ref()) {
            Tag::Outside => {
                if let Some((kind, start)) = open.take() {
                    chunks.push(Chunk {
                        kind,
                        start,
                        end: i,
                    });
                }
            }
            Tag::Begin(kind) => {
                if let Some((k, start)) = open.take() {
                    chunks.push(Chunk {
                        kind: k,
                        start,
                        end: i,
                    });
                }
                open = Some((kind.to_string(), i));
            }
            Tag::Inside(kind) => match &open {
                Some((k, _)) if k == kind => {}
                _ => {
                    if let Some((k, start)) = open.take() {
                        chunks.push(Chunk {
                            kind: k,
                            start,
                            end: i,
                        });
                    }
                    open = Some((kind.to_string(), i));
                }
            },
        }
    }
    if let Some((kind, start)) = open {
        chunks.push(Chunk {
            kind,
            start,
            end: labels.len(),
        });
    }
    chunks
}

/// Rewrites stray `I-X` tags as `B-X` so the sequence is BIO-valid.
pub fn repair_bio<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    let mut out = Vec::with_capacity(labels.len());
    let mut prev_kind: Option<String> = None;
    for label in labels {
        let label = label.as_ref();
        match split_tag(label) {
            Tag::Outside => {
                prev_kind = None;
                out.push(label.to_string());
            }
            Tag::Begin(kind) => {
                prev_kind = Some(kind.to_string());
                out.push(label.to_string());
            }
            Tag::Inside(kind) => {
                let stray = label.starts_with("I-")
                    && prev_kind.as_deref() != Some(kind);
                if stray {
                    out.push(format!("B-{kind}"));
                } else {
                    out.push(label.to_string());
                }
                prev_kind = Some(kind.to_string());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_word_class_label_triple() {
        let got = parse_conll("Boston city fromloc.city-name\n").unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].len(), 1);
        let t = &got[0].tokens[0];
        assert_eq!(t.word, "Boston");
        assert_eq!(t.word_class.as_deref(), Some("city"));
        assert_eq!(t.label, "fromloc.city-name");
    }

    #[test]
    fn blank_line_separates_sentences() {
        let got = parse_conll("a O\nb O\n\nc O\n").unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].len(), 2);
        assert_eq!(got[1].len(), 1);
    }

    #[test]
    fn inconsistent_columns_fail_with_line_number() {
        let err = parse_conll("a O\nb X Y\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_parses_to_nothing() {
        assert!(parse_conll("").unwrap().is_empty());
        assert!(parse_conll("\n\n").unwrap().is_empty());
    }

    #[test]
    fn comment_lines_are_ignored() {
        let got = parse_conll("# header\na O\n# mid\nb O\n").unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].len(), 2);
    }

    #[test]
    fn vocab_keeps_reserved_then_first_occurrence() {
        let v = Vocabulary::build(["a", "a", "b"], 1);
        assert_eq!(v.len(), 6);
        assert_eq!(v.item(UNK_IDX), UNK);
        assert_eq!(v.item(BOS_IDX), BOS);
        assert_eq!(v.item(EOS_IDX), EOS);
        assert_eq!(v.item(BOL_IDX), BOL);
        assert_eq!(v.index_of("a"), Some(4));
        assert_eq!(v.index_of("b"), Some(5));
    }

    #[test]
    fn vocab_min_count_prunes_to_unk() {
        let v = Vocabulary::build(["a", "a", "b"], 2);
        assert_eq!(v.index_of("b"), None);
        assert_eq!(v.index_or_unk("b"), UNK_IDX);
        assert_eq!(v.index_or_unk("a"), 4);
    }

    #[test]
    fn vocab_construction_is_deterministic() {
        let items = ["z", "q", "z", "m", "q", "z"];
        let a = Vocabulary::build(items, 1);
        let b = Vocabulary::build(items, 1);
        assert_eq!(a, b);
    }

    fn sample_corpus() -> Corpus {
        let examples =
            parse_conll("the det O\ncat noun B-AN\nsat verb O\n\ncat noun B-AN\n").unwrap();
        Corpus::build(examples, 1).unwrap()
    }

    #[test]
    fn label_vocab_is_never_pruned() {
        let examples = parse_conll("a rare-label\nb common\nc common\n").unwrap();
        let vocabs = VocabSet::build(&examples, 2);
        // words pruned at min_count 2, labels kept regardless
        assert_eq!(vocabs.words.index_of("a"), None);
        assert!(vocabs.labels.index_of("rare-label").is_some());
    }

    #[test]
    fn encode_looks_up_and_falls_back_to_unk() {
        let corpus = sample_corpus();
        let enc = corpus.vocabs.encode_train(&corpus.examples[0]).unwrap();
        assert_eq!(enc.words[0], corpus.vocabs.words.index_of("the").unwrap());
        let unseen = parse_conll("zzz det O\n").unwrap();
        let enc = corpus.vocabs.encode_train(&unseen[0]).unwrap();
        assert_eq!(enc.words[0], UNK_IDX);
    }

    #[test]
    fn unknown_training_label_is_an_error_naming_it() {
        let corpus = sample_corpus();
        let bad = parse_conll("the det B-NEW\n").unwrap();
        let err = corpus.vocabs.encode_train(&bad[0]).unwrap_err();
        assert!(err.to_string().contains("B-NEW"), "got: {err}");
    }

    #[test]
    fn decode_round_trips_in_vocabulary_tokens() {
        let corpus = sample_corpus();
        for example in &corpus.examples {
            let enc = corpus.vocabs.encode_train(example).unwrap();
            for (t, &wi) in example.tokens.iter().zip(&enc.words) {
                assert_eq!(corpus.vocabs.words.item(wi), t.word);
            }
            for (t, &li) in example.tokens.iter().zip(enc.labels.as_ref().unwrap()) {
                assert_eq!(corpus.vocabs.labels.item(li), t.label);
            }
        }
    }

    fn chunk(kind: &str, start: usize, end: usize) -> Chunk {
        Chunk {
            kind: kind.to_string(),
            start,
            end,
        }
    }

    #[test]
    fn extract_chunks_definition() {
        let got = extract_chunks(&["B-X", "I-X", "O", "B-Y"]);
        assert_eq!(got, vec![chunk("X", 0, 2), chunk("Y", 3, 4)]);
    }

    #[test]
    fn extract_chunks_empty() {
        assert!(extract_chunks(&["O", "O"]).is_empty());
    }

    #[test]
    fn stray_inside_tags_start_a_chunk() {
        // conlleval convention, verified by hand: both tokens belong to one
        // X chunk because the second I-X continues the first.
        let got = extract_chunks(&["I-X", "I-X"]);
        assert_eq!(got, vec![chunk("X", 0, 2)]);
        let got = extract_chunks(&["O", "I-X", "B-X"]);
        assert_eq!(got, vec![chunk("X", 1, 2), chunk("X", 2, 3)]);
    }

    #[test]
    fn bare_labels_form_runs() {
        let got = extract_chunks(&["L1", "L1", "L2", "O", "L1"]);
        assert_eq!(
            got,
            vec![chunk("L1", 0, 2), chunk("L2", 2, 3), chunk("L1", 4, 5)]
        );
    }

    #[test]
    fn repair_bio_fixes_stray_inside() {
        let got = repair_bio(&["I-X", "I-X", "O", "I-Y"]);
        assert_eq!(got, vec!["B-X", "I-X", "O", "B-Y"]);
        let got = repair_bio(&["B-X", "I-Y"]);
        assert_eq!(got, vec!["B-X", "B-Y"]);
    }

    #[test]
    fn reversed_reverses_tokens_and_labels() {
        let corpus = sample_corpus();
        let rev = corpus.examples[0].reversed();
        assert_eq!(rev.words(), vec!["sat", "cat", "the"]);
        assert_eq!(rev.labels(), vec!["O", "B-AN", "O"]);
    }
}

//! Parsing and serialization of the tab-separated corpus format, plus the
//! `text<TAB>label` classification-instance format.
//!
//! Lenient in, strict out: the parser accepts CRLF line endings, trailing
//! whitespace, and runs of blank lines; the serializer emits LF only, with
//! exactly one blank line between sentences and none at EOF.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{
    BioTag, ClassificationInstance, ColumnFormat, CorpusError, LabelRule, Sentence, Token,
};
use crate::corpus::TagSchema;

/// Knobs for [`parse_str`] / [`parse_file`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub format: ColumnFormat,
    pub label_rule: LabelRule,
}

/// Parse one corpus file's content. `origin` names the file in errors and in
/// each sentence's provenance.
pub fn parse_str(
    content: &str,
    schema: &TagSchema,
    opts: ParseOptions,
    origin: &str,
) -> Result<Vec<Sentence>, CorpusError> {
    let expected = opts.format.columns();
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();

    let flush = |tokens: &mut Vec<Token>, sentences: &mut Vec<Sentence>| {
        if !tokens.is_empty() {
            let index = sentences.len();
            sentences.push(Sentence::new(
                std::mem::take(tokens),
                origin,
                index,
                opts.label_rule,
            ));
        }
    };

    for (line_no, raw_line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.trim_end();
        if line.is_empty() {
            flush(&mut tokens, &mut sentences);
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != expected {
            return Err(CorpusError::ColumnCount {
                origin: origin.to_string(),
                line: line_no,
                expected,
                found: cols.len(),
            });
        }

        let text = cols[0];
        if text.is_empty() {
            return Err(CorpusError::EmptyToken {
                origin: origin.to_string(),
                line: line_no,
            });
        }

        let parse_offset = |value: &str| -> Result<u64, CorpusError> {
            value.parse().map_err(|_| CorpusError::BadOffset {
                origin: origin.to_string(),
                line: line_no,
                value: value.to_string(),
            })
        };
        let start_char = parse_offset(cols[2])?;
        let end_char = parse_offset(cols[3])?;
        if end_char <= start_char {
            return Err(CorpusError::OffsetRange {
                origin: origin.to_string(),
                line: line_no,
                start: start_char,
                end: end_char,
            });
        }
        if let Some(prev) = tokens.last() {
            if start_char < prev.start_char {
                return Err(CorpusError::OffsetOrder {
                    origin: origin.to_string(),
                    line: line_no,
                });
            }
        }

        let token = match opts.format {
            ColumnFormat::Four => Token::untagged(
                text,
                cols[1],
                start_char,
                end_char,
                BioTag::Outside,
            ),
            ColumnFormat::Eight => {
                let tag: BioTag = cols[4].parse().map_err(|_| CorpusError::UnknownTag {
                    origin: origin.to_string(),
                    line: line_no,
                    tag: cols[4].to_string(),
                })?;
                if !schema.contains(&tag) {
                    return Err(CorpusError::UnknownTag {
                        origin: origin.to_string(),
                        line: line_no,
                        tag: cols[4].to_string(),
                    });
                }
                Token {
                    text: text.to_string(),
                    source: cols[1].to_string(),
                    start_char,
                    end_char,
                    tag,
                    tag_id: cols[5].to_string(),
                    root_id: cols[6].to_string(),
                    relation: cols[7].to_string(),
                }
            }
        };
        tokens.push(token);
    }
    flush(&mut tokens, &mut sentences);
    Ok(sentences)
}

/// Parse a corpus file from disk.
pub fn parse_file(
    path: &Path,
    schema: &TagSchema,
    opts: ParseOptions,
) -> Result<Vec<Sentence>, CorpusError> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&content, schema, opts, &path.display().to_string())
}

/// Serialize sentences back to the tab-separated format.
///
/// Every token line ends with LF; sentences are separated by exactly one
/// blank line, with no blank line at EOF, so `parse(serialize(s))`
/// round-trips byte-identically for canonical files.
pub fn serialize(sentences: &[Sentence], format: ColumnFormat) -> String {
    let mut out = String::new();
    for (i, sentence) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for tok in &sentence.tokens {
            match format {
                ColumnFormat::Four => {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\n",
                        tok.text, tok.source, tok.start_char, tok.end_char
                    ));
                }
                ColumnFormat::Eight => {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                        tok.text,
                        tok.source,
                        tok.start_char,
                        tok.end_char,
                        tok.tag,
                        tok.tag_id,
                        tok.root_id,
                        tok.relation
                    ));
                }
            }
        }
    }
    out
}

/// Serialize sentences to a file on disk.
pub fn write_file(
    path: &Path,
    sentences: &[Sentence],
    format: ColumnFormat,
) -> Result<(), CorpusError> {
    fs::write(path, serialize(sentences, format)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse several corpus files and concatenate their sentences in
/// lexicographic path order (then file order within each file).
///
/// Files are parsed in parallel; the first error in path order wins.
pub fn concat_folder(
    paths: &[PathBuf],
    schema: &TagSchema,
    opts: ParseOptions,
) -> Result<Vec<Sentence>, CorpusError> {
    let mut sorted: Vec<&PathBuf> = paths.iter().collect();
    sorted.sort();
    let parsed: Vec<Result<Vec<Sentence>, CorpusError>> = sorted
        .par_iter()
        .map(|path| parse_file(path, schema, opts))
        .collect();
    let mut sentences = Vec::new();
    for result in parsed {
        sentences.extend(result?);
    }
    Ok(sentences)
}

/// Convert sentences to subtask-1 instances: space-joined text, label copied.
pub fn to_classification(sentences: &[Sentence]) -> Vec<ClassificationInstance> {
    sentences
        .iter()
        .map(|s| ClassificationInstance::new(s.joined_text(), s.label))
        .collect()
}

/// Parse `text<TAB>label` instance lines.
///
/// The label is the field after the last tab, so instance text containing
/// tabs would be rejected rather than silently truncated.
pub fn parse_instances(content: &str, origin: &str) -> Result<Vec<ClassificationInstance>, CorpusError> {
    let mut instances = Vec::new();
    for (line_no, raw_line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (text, label) = line.rsplit_once('\t').ok_or_else(|| CorpusError::InstanceLine {
            origin: origin.to_string(),
            line: line_no,
            msg: "expected `text<TAB>label`".to_string(),
        })?;
        let label = match label {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(CorpusError::InstanceLine {
                    origin: origin.to_string(),
                    line: line_no,
                    msg: format!("label must be 0 or 1, got `{other}`"),
                })
            }
        };
        instances.push(ClassificationInstance::new(text, label));
    }
    Ok(instances)
}

/// Read a `text<TAB>label` instance file from disk.
pub fn read_instances(path: &Path) -> Result<Vec<ClassificationInstance>, CorpusError> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instances(&content, &path.display().to_string())
}

/// Render instances as `text<TAB>label` lines, LF-terminated.
pub fn serialize_instances(instances: &[ClassificationInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&inst.text);
        out.push('\t');
        out.push_str(if inst.label == 1 { "1" } else { "0" });
        out.push('\n');
    }
    out
}

/// Write instances to a file on disk.
pub fn write_instances(path: &Path, instances: &[ClassificationInstance]) -> Result<(), CorpusError> {
    fs::write(path, serialize_instances(instances)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

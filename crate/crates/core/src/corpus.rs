//! Record model and streaming JSONL ingest/emit.
//!
//! Every stage boundary in the pipeline is a JSONL file of [`SourceFile`]
//! records, one JSON object per line, so intermediate outputs stay
//! inspectable and runs can resume from any stage. Readers and writers are
//! streaming: peak memory does not depend on corpus size.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Java,
    Javascript,
    Other,
}

impl Language {
    pub fn as_str(&self) -> &'static str {
        match self {
            Language::Python => "python",
            Language::Java => "java",
            Language::Javascript => "javascript",
            Language::Other => "other",
        }
    }

    /// Languages are taken from input metadata, never re-inferred; anything
    /// outside the three supported subsets maps to `Other`.
    pub fn from_tag(tag: &str) -> Language {
        match tag.to_ascii_lowercase().as_str() {
            "python" | "py" => Language::Python,
            "java" => Language::Java,
            "javascript" | "js" => Language::Javascript,
            _ => Language::Other,
        }
    }
}

/// One code file record, the per-file unit every stage operates on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub id: String,
    pub repo_name: String,
    pub path: String,
    pub language: Language,
    pub content: String,
    pub stars: Option<u64>,
    pub license: Option<String>,
}

/// Maps the on-disk JSONL field names to the record fields, for corpora that
/// use e.g. `"text"` instead of `"content"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldMap {
    pub id: String,
    pub repo_name: String,
    pub path: String,
    pub language: String,
    pub content: String,
    pub stars: String,
    pub license: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            id: "id".into(),
            repo_name: "repo_name".into(),
            path: "path".into(),
            language: "language".into(),
            content: "content".into(),
            stars: "stars".into(),
            license: "license".into(),
        }
    }
}

/// Why a line was skipped at ingest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Line is not valid UTF-8.
    InvalidUtf8,
    /// Line is not a JSON object.
    InvalidJson,
    /// A required mapped field is absent.
    MissingField,
    /// A field is present but has the wrong JSON type.
    WrongFieldType,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::InvalidUtf8 => "invalid_utf8",
            SkipReason::InvalidJson => "invalid_json",
            SkipReason::MissingField => "missing_field",
            SkipReason::WrongFieldType => "wrong_field_type",
        }
    }
}

/// Per-language slice of a corpus report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageVolume {
    pub n_files: u64,
    pub n_bytes: u64,
}

/// Corpus-level statistics, emitted as a single JSON document per stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub n_files: u64,
    /// Total content bytes (UTF-8 length of `content`).
    pub n_bytes: u64,
    pub per_language: BTreeMap<String, LanguageVolume>,
    /// Drop counts keyed by stage or rule name.
    pub drops: BTreeMap<String, u64>,
}

impl CorpusReport {
    pub fn record(&mut self, file: &SourceFile) {
        self.n_files += 1;
        self.n_bytes += file.content.len() as u64;
        let slot = self
            .per_language
            .entry(file.language.as_str().to_string())
            .or_default();
        slot.n_files += 1;
        slot.n_bytes += file.content.len() as u64;
    }

    pub fn add_drop(&mut self, rule: &str, count: u64) {
        *self.drops.entry(rule.to_string()).or_insert(0) += count;
    }

    /// Merge two reports; used when per-file work is fanned out and partial
    /// reports come back in arbitrary order.
    pub fn merge(&mut self, other: &CorpusReport) {
        self.n_files += other.n_files;
        self.n_bytes += other.n_bytes;
        for (lang, vol) in &other.per_language {
            let slot = self.per_language.entry(lang.clone()).or_default();
            slot.n_files += vol.n_files;
            slot.n_bytes += vol.n_bytes;
        }
        for (rule, count) in &other.drops {
            *self.drops.entry(rule.clone()).or_insert(0) += count;
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("write to {path} failed: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Streaming reader over a JSONL corpus.
///
/// Malformed lines are skipped and counted, never fatal; the tallies are
/// available from [`CorpusReader::skips`] at any point during iteration.
pub struct CorpusReader {
    lines: io::Split<BufReader<File>>,
    fields: FieldMap,
    skips: BTreeMap<SkipReason, u64>,
}

pub fn load_corpus(path: &Path, fields: FieldMap) -> Result<CorpusReader, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Open {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(CorpusReader {
        lines: BufReader::new(file).split(b'\n'),
        fields,
        skips: BTreeMap::new(),
    })
}

impl CorpusReader {
    pub fn skips(&self) -> &BTreeMap<SkipReason, u64> {
        &self.skips
    }

    pub fn total_skipped(&self) -> u64 {
        self.skips.values().sum()
    }

    fn skip(&mut self, reason: SkipReason) {
        *self.skips.entry(reason).or_insert(0) += 1;
    }
}

impl Iterator for CorpusReader {
    type Item = SourceFile;

    fn next(&mut self) -> Option<SourceFile> {
        loop {
            let raw = match self.lines.next()? {
                Ok(bytes) => bytes,
                Err(_) => return None,
            };
            // Tolerate \r\n and blank trailing lines.
            let raw = match raw.last() {
                Some(b'\r') => &raw[..raw.len() - 1],
                _ => &raw[..],
            };
            if raw.is_empty() {
                continue;
            }
            let text = match std::str::from_utf8(raw) {
                Ok(text) => text,
                Err(_) => {
                    self.skip(SkipReason::InvalidUtf8);
                    continue;
                }
            };
            let value: serde_json::Value = match serde_json::from_str(text) {
                Ok(value) => value,
                Err(_) => {
                    self.skip(SkipReason::InvalidJson);
                    continue;
                }
            };
            match record_from_value(&value, &self.fields) {
                Ok(file) => return Some(file),
                Err(reason) => {
                    self.skip(reason);
                    continue;
                }
            }
        }
    }
}

fn record_from_value(
    value: &serde_json::Value,
    fields: &FieldMap,
) -> Result<SourceFile, SkipReason> {
    let obj = value.as_object().ok_or(SkipReason::InvalidJson)?;
    let required_str = |name: &str| -> Result<String, SkipReason> {
        match obj.get(name) {
            None => Err(SkipReason::MissingField),
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(SkipReason::WrongFieldType),
        }
    };
    let language = required_str(&fields.language)?;
    let stars = match obj.get(&fields.stars) {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::Number(n)) => match n.as_u64() {
            Some(v) => Some(v),
            None => return Err(SkipReason::WrongFieldType),
        },
        Some(_) => return Err(SkipReason::WrongFieldType),
    };
    let license = match obj.get(&fields.license) {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(SkipReason::WrongFieldType),
    };
    Ok(SourceFile {
        id: required_str(&fields.id)?,
        repo_name: required_str(&fields.repo_name)?,
        path: required_str(&fields.path)?,
        language: Language::from_tag(&language),
        content: required_str(&fields.content)?,
        stars,
        license,
    })
}

/// Streaming writer producing output round-trippable by [`load_corpus`].
///
/// On a write failure a `<path>.partial` marker file is left next to the
/// output so downstream stages refuse to consume a truncated corpus.
pub struct CorpusWriter {
    out: BufWriter<File>,
    path: PathBuf,
    report: CorpusReport,
}

impl CorpusWriter {
    pub fn create(path: &Path) -> Result<CorpusWriter, CorpusError> {
        let file = File::create(path).map_err(|source| CorpusError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(CorpusWriter {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
            report: CorpusReport::default(),
        })
    }

    pub fn write(&mut self, file: &SourceFile) -> Result<(), CorpusError> {
        let result = serde_json::to_writer(&mut self.out, file)
            .map_err(io::Error::from)
            .and_then(|_| self.out.write_all(b"\n"));
        if let Err(source) = result {
            self.mark_partial();
            return Err(CorpusError::Write {
                path: self.path.clone(),
                source,
            });
        }
        self.report.record(file);
        Ok(())
    }

    pub fn finish(mut self) -> Result<CorpusReport, CorpusError> {
        if let Err(source) = self.out.flush() {
            self.mark_partial();
            return Err(CorpusError::Write {
                path: self.path.clone(),
                source,
            });
        }
        Ok(self.report)
    }

    fn mark_partial(&self) {
        let marker = marker_path(&self.path);
        let _ = File::create(marker);
    }
}

pub fn marker_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    output.with_file_name(name)
}

/// Drains `files` into a JSONL file at `path`.
pub fn write_corpus<I>(files: I, path: &Path) -> Result<CorpusReport, CorpusError>
where
    I: IntoIterator<Item = SourceFile>,
{
    let mut writer = CorpusWriter::create(path)?;
    for file in files {
        writer.write(&file)?;
    }
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, content: &str) -> SourceFile {
        SourceFile {
            id: id.to_string(),
            repo_name: "org/repo".to_string(),
            path: format!("src/{id}.py"),
            language: Language::Python,
            content: content.to_string(),
            stars: Some(7),
            license: Some("mit".to_string()),
        }
    }

    #[test]
    fn three_valid_lines_load_with_no_skips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let files: Vec<SourceFile> = (0..3).map(|i| sample(&format!("f{i}"), "x = 1\n")).collect();
        write_corpus(files.clone(), &path).unwrap();

        let mut reader = load_corpus(&path, FieldMap::default()).unwrap();
        let loaded: Vec<SourceFile> = reader.by_ref().collect();
        assert_eq!(loaded, files);
        assert_eq!(reader.total_skipped(), 0);
    }

    #[test]
    fn malformed_line_is_skipped_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let good = serde_json::to_string(&sample("a", "pass\n")).unwrap();
        let good2 = serde_json::to_string(&sample("b", "pass\n")).unwrap();
        std::fs::write(&path, format!("{good}\n{{not json\n{good2}\n")).unwrap();

        let mut reader = load_corpus(&path, FieldMap::default()).unwrap();
        let loaded: Vec<SourceFile> = reader.by_ref().collect();
        assert_eq!(loaded.len(), 2);
        assert_eq!(reader.skips()[&SkipReason::InvalidJson], 1);
    }

    #[test]
    fn empty_file_yields_empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        let mut reader = load_corpus(&path, FieldMap::default()).unwrap();
        assert!(reader.next().is_none());
        assert_eq!(reader.total_skipped(), 0);
    }

    #[test]
    fn empty_stream_writes_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        let report = write_corpus(Vec::new(), &path).unwrap();
        assert_eq!(report.n_files, 0);
        assert_eq!(std::fs::read(&path).unwrap().len(), 0);
    }

    #[test]
    fn invalid_utf8_line_is_rejected_not_transcoded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let good = serde_json::to_string(&sample("a", "ok")).unwrap();
        let mut bytes = Vec::new();
        bytes.extend_from_slice(good.as_bytes());
        bytes.push(b'\n');
        bytes.extend_from_slice(b"{\"id\": \"\xff\xfe\"}\n");
        std::fs::write(&path, bytes).unwrap();

        let mut reader = load_corpus(&path, FieldMap::default()).unwrap();
        let loaded: Vec<SourceFile> = reader.by_ref().collect();
        assert_eq!(loaded.len(), 1);
        assert_eq!(reader.skips()[&SkipReason::InvalidUtf8], 1);
    }

    #[test]
    fn missing_field_skips_with_reason() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(&path, "{\"id\": \"a\", \"content\": \"x\"}\n").unwrap();
        let mut reader = load_corpus(&path, FieldMap::default()).unwrap();
        assert!(reader.by_ref().next().is_none());
        assert_eq!(reader.skips()[&SkipReason::MissingField], 1);
    }

    #[test]
    fn non_ascii_content_roundtrips_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let file = sample("u", "def f():\n    return \"héllo … 漢字 🚀\"\n");
        let digest_before = file.content.as_bytes().to_vec();
        write_corpus(vec![file], &path).unwrap();
        let loaded: Vec<SourceFile> =
            load_corpus(&path, FieldMap::default()).unwrap().collect();
        assert_eq!(loaded[0].content.as_bytes(), digest_before.as_slice());
    }

    #[test]
    fn field_map_renames_content_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"a\",\"repo_name\":\"r\",\"path\":\"p\",\"language\":\"java\",\"text\":\"class A {}\"}\n",
        )
        .unwrap();
        let fields = FieldMap {
            content: "text".into(),
            ..FieldMap::default()
        };
        let loaded: Vec<SourceFile> = load_corpus(&path, fields).unwrap().collect();
        assert_eq!(loaded[0].content, "class A {}");
        assert_eq!(loaded[0].language, Language::Java);
        assert_eq!(loaded[0].stars, None);
    }

    #[test]
    fn report_merge_is_associative_on_language_volumes() {
        let a = sample("a", "aa");
        let b = SourceFile {
            language: Language::Java,
            ..sample("b", "bbbb")
        };
        let mut left = CorpusReport::default();
        left.record(&a);
        let mut right = CorpusReport::default();
        right.record(&b);
        right.add_drop("stars", 2);

        let mut merged = CorpusReport::default();
        merged.merge(&left);
        merged.merge(&right);
        assert_eq!(merged.n_files, 2);
        assert_eq!(merged.n_bytes, 6);
        assert_eq!(merged.per_language["python"].n_bytes, 2);
        assert_eq!(merged.per_language["java"].n_files, 1);
        assert_eq!(merged.drops["stars"], 2);
    }
}

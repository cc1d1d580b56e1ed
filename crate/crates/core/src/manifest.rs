//! Corpus manifests: ASVspoof-style protocol files and a simple TSV form.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub utterance_id: String,
    pub path: PathBuf,
    pub label: Label,
    pub attack_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestFormat {
    /// `speaker_id utterance_id - attack_id key`, whitespace separated.
    AsvspoofProtocol,
    /// `utterance_id<TAB>path<TAB>label<TAB>attack_id`.
    #[default]
    SimpleTsv,
}

impl std::str::FromStr for ManifestFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asvspoof_protocol" | "protocol" => Ok(ManifestFormat::AsvspoofProtocol),
            "simple_tsv" | "tsv" => Ok(ManifestFormat::SimpleTsv),
            other => Err(Error::InvalidParameter(format!(
                "unknown manifest format {other:?}"
            ))),
        }
    }
}

/// Protocol files carry no paths: try `<root>/<id>.wav`, then `.flac`.
/// When neither exists the `.wav` path is kept and the failure surfaces at read time.
fn resolve_protocol_path(root: &Path, id: &str) -> PathBuf {
    let wav = root.join(format!("{id}.wav"));
    if wav.exists() {
        return wav;
    }
    let flac = root.join(format!("{id}.flac"));
    if flac.exists() {
        flac
    } else {
        wav
    }
}

fn parse_label(path: &Path, line: usize, token: &str) -> Result<Label> {
    token.parse().map_err(|_| Error::UnknownKey {
        path: path.to_path_buf(),
        line,
        token: token.to_string(),
    })
}

/// Loads a manifest. `audio_root` applies to protocol files and defaults to
/// the manifest's directory; relative TSV paths resolve against that directory.
pub fn load_manifest(
    path: impl AsRef<Path>,
    format: ManifestFormat,
    audio_root: Option<&Path>,
) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let root = audio_root
        .map(Path::to_path_buf)
        .unwrap_or_else(|| base.clone());

    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let entry = match format {
            ManifestFormat::AsvspoofProtocol => {
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields.len() != 5 {
                    return Err(malformed(format!(
                        "expected 5 fields, found {}",
                        fields.len()
                    )));
                }
                ManifestEntry {
                    utterance_id: fields[1].to_string(),
                    path: resolve_protocol_path(&root, fields[1]),
                    label: parse_label(path, line, fields[4])?,
                    attack_id: fields[3].to_string(),
                }
            }
            ManifestFormat::SimpleTsv => {
                let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
                if fields.len() != 4 {
                    return Err(malformed(format!(
                        "expected 4 tab-separated fields, found {}",
                        fields.len()
                    )));
                }
                if fields.iter().any(|f| f.trim().is_empty()) {
                    return Err(malformed("empty field".into()));
                }
                let p = PathBuf::from(fields[1]);
                ManifestEntry {
                    utterance_id: fields[0].to_string(),
                    path: if p.is_absolute() { p } else { base.join(p) },
                    label: parse_label(path, line, fields[2])?,
                    attack_id: fields[3].to_string(),
                }
            }
        };
        if let Some(&first) = seen.get(&entry.utterance_id) {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                id: entry.utterance_id,
                first,
                second: line,
            });
        }
        seen.insert(entry.utterance_id.clone(), line);
        entries.push(entry);
    }
    if entries.is_empty() {
        log::warn!("manifest {} has no entries", path.display());
    }
    Ok(entries)
}

/// The `# config_hash <hex>` annotation written by processing runs, if present.
pub fn recorded_config_hash(path: impl AsRef<Path>) -> Result<Option<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| {
            l.trim()
                .strip_prefix("config_hash")
                .map(|h| h.trim().to_string())
        }))
}

/// Writes a simple TSV manifest; paths under the manifest's directory are stored relative.
pub fn write_manifest(entries: &[ManifestEntry], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = String::new();
    for e in entries {
        let p = e.path.strip_prefix(base).unwrap_or(&e.path);
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            e.utterance_id,
            p.display(),
            e.label,
            e.attack_id
        );
    }
    std::fs::write(path, out).map_err(|source| Error::Unwritable {
        path: path.to_path_buf(),
        source,
    })
}

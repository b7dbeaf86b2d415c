//! Sequence readers and the JSON model file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sequence};
use crate::error::{MtdError, Result};
use crate::model::{FullMarkovModel, MtdModel, StochasticMatrix, TransitionModel, Variant};
use crate::reparam::ThetaU;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqFormat {
    /// One sequence per non-blank line.
    Plain,
    /// `>` header lines start records; sequence lines are concatenated.
    Fasta,
}

impl FromStr for SeqFormat {
    type Err = MtdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(SeqFormat::Plain),
            "fasta" => Ok(SeqFormat::Fasta),
            other => Err(MtdError::InvalidParameter(format!("unknown sequence format {other:?}"))),
        }
    }
}

pub fn read_sequences(path: &Path, format: SeqFormat, alphabet: &Alphabet) -> Result<Vec<Sequence>> {
    let text = fs::read_to_string(path).map_err(|e| MtdError::Io(format!("{}: {e}", path.display())))?;
    parse_sequences(&text, format, alphabet)
}

/// Parses sequences from text. Letters are matched case-insensitively;
/// foreign symbols break counting windows.
pub fn parse_sequences(text: &str, format: SeqFormat, alphabet: &Alphabet) -> Result<Vec<Sequence>> {
    let seqs: Vec<Sequence> = match format {
        SeqFormat::Plain => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Sequence::parse(alphabet, l))
            .collect(),
        SeqFormat::Fasta => {
            let mut out = Vec::new();
            let mut name: Option<String> = None;
            let mut body = String::new();
            let flush = |name: &mut Option<String>, body: &mut String, out: &mut Vec<Sequence>| {
                if name.is_some() || !body.trim().is_empty() {
                    let mut s = Sequence::parse(alphabet, body);
                    if let Some(n) = name.take() {
                        s = s.named(n);
                    }
                    out.push(s);
                }
                body.clear();
            };
            for line in text.lines() {
                if let Some(header) = line.strip_prefix('>') {
                    flush(&mut name, &mut body, &mut out);
                    name = Some(header.trim().to_string());
                } else if !line.starts_with(';') {
                    body.push_str(line);
                    body.push('\n');
                }
            }
            flush(&mut name, &mut body, &mut out);
            out
        }
    };
    let has_content = text
        .lines()
        .any(|l| !l.trim().is_empty() && !(format == SeqFormat::Fasta && (l.starts_with('>') || l.starts_with(';'))));
    if has_content && seqs.iter().all(Sequence::is_empty) {
        return Err(MtdError::AlphabetMismatch(format!("no symbol of {alphabet} found in the input")));
    }
    Ok(seqs)
}

/// One sequence per line.
pub fn format_sequences(seqs: &[Sequence]) -> String {
    seqs.iter().map(|s| s.to_text() + "\n").collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mtd,
    FullMarkov,
    ThetaU,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_digest: Option<String>,
}

/// On-disk form of every model kind. Matrices are row-major with rows in
/// word-index order (most recent letter least significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub alphabet: Vec<String>,
    pub model_kind: ModelKind,
    pub m: usize,
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<f64>,
    pub matrices: Vec<Vec<Vec<f64>>>,
    /// Reference letter label of identifiable coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
    #[serde(default)]
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoredModel {
    Mtd(MtdModel),
    Full(FullMarkovModel),
    ThetaU(ThetaU),
}

impl StoredModel {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            StoredModel::Mtd(m) => m.alphabet(),
            StoredModel::Full(m) => m.alphabet(),
            StoredModel::ThetaU(t) => t.alphabet(),
        }
    }
}

impl ModelFile {
    pub fn from_model(model: &StoredModel, provenance: Provenance) -> Self {
        let alphabet = model.alphabet().symbols().to_vec();
        match model {
            StoredModel::Mtd(m) => ModelFile {
                format_version: FORMAT_VERSION,
                alphabet,
                model_kind: ModelKind::Mtd,
                m: m.order(),
                l: m.lag_order(),
                variant: Some(m.variant().to_string()),
                phi: m.phi().to_vec(),
                matrices: m.matrices().iter().map(StochasticMatrix::to_rows).collect(),
                reference: None,
                base: None,
                provenance,
            },
            StoredModel::Full(f) => ModelFile {
                format_version: FORMAT_VERSION,
                alphabet,
                model_kind: ModelKind::FullMarkov,
                m: f.order(),
                l: f.order(),
                variant: None,
                phi: Vec::new(),
                matrices: vec![f.table().to_rows()],
                reference: None,
                base: None,
                provenance,
            },
            StoredModel::ThetaU(t) => ModelFile {
                format_version: FORMAT_VERSION,
                alphabet,
                model_kind: ModelKind::ThetaU,
                m: t.order(),
                l: t.lag_order(),
                variant: None,
                phi: Vec::new(),
                matrices: t.tables().iter().map(StochasticMatrix::to_rows).collect(),
                reference: Some(t.alphabet().label(t.reference()).to_string()),
                base: Some(t.base().to_vec()),
                provenance,
            },
        }
    }

    pub fn to_model(&self) -> Result<StoredModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(MtdError::Format(format!("unsupported format_version {}", self.format_version)));
        }
        let alphabet = Alphabet::new(self.alphabet.iter().cloned())?;
        let matrices = self
            .matrices
            .iter()
            .map(|rows| StochasticMatrix::from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        match self.model_kind {
            ModelKind::Mtd => {
                let variant = match &self.variant {
                    Some(v) => v.parse()?,
                    None => Variant::General,
                };
                Ok(StoredModel::Mtd(MtdModel::new(
                    alphabet,
                    self.m,
                    self.l,
                    variant,
                    self.phi.clone(),
                    matrices,
                )?))
            }
            ModelKind::FullMarkov => {
                let [table]: [StochasticMatrix; 1] = matrices
                    .try_into()
                    .map_err(|_| MtdError::Format("a full_markov model holds exactly one matrix".into()))?;
                Ok(StoredModel::Full(FullMarkovModel::new(alphabet, self.m, table)?))
            }
            ModelKind::ThetaU => {
                let label = self
                    .reference
                    .as_deref()
                    .ok_or_else(|| MtdError::Format("theta_u model without reference".into()))?;
                let reference = alphabet
                    .index_of(label)
                    .ok_or_else(|| MtdError::UnknownLabel(label.to_string()))?;
                let base = self
                    .base
                    .clone()
                    .ok_or_else(|| MtdError::Format("theta_u model without base row".into()))?;
                Ok(StoredModel::ThetaU(ThetaU::new(alphabet, reference, self.m, self.l, matrices, base)?))
            }
        }
    }

    /// Pretty JSON with a trailing newline. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| MtdError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| MtdError::Io(format!("{}: {e}", path.display())))?;
        ModelFile::from_json(&text)
    }
}

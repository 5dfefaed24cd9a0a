//! The state-independent skill schedule: a `horizon x |vocabulary|` array of
//! logits, one categorical distribution per timestep.
//!
//! Updates are reward-signed constant steps on exactly the entries a
//! trajectory executed. Trained schedules are exported as a line-oriented
//! text file and can be imported into any task with the same vocabulary and
//! horizon, regardless of its observation space; `frozen` imports are never
//! updated again.

use crate::pamdp::{Skill, TaskFamily, TaskSpec};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaLogits {
    pub family: TaskFamily,
    pub horizon: usize,
    /// Ordered (left, right) skill-name pairs; the compatibility fingerprint.
    pub vocab: Vec<(String, String)>,
    /// `horizon` rows of `|vocab|` logits.
    pub values: Vec<Vec<f64>>,
    pub frozen: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("timestep {t} outside horizon {horizon}")]
    BadTimestep { t: usize, horizon: usize },
    #[error("joint skill index {index} outside vocabulary of {len}")]
    BadIndex { index: usize, len: usize },
    #[error("schedule is frozen; updates are not allowed")]
    Frozen,
}

#[derive(Debug, thiserror::Error)]
pub enum TransferError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed schema file: {0}")]
    Malformed(String),
    #[error("incompatible schema transfer: {0}")]
    Incompatible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportMode {
    /// The schedule is fixed for the receiving policy; training must never
    /// change it.
    Frozen,
    /// The schedule seeds further training.
    WarmStart,
}

/// Zero-initialize the schedule for a task.
pub fn init_schema(spec: &TaskSpec) -> SchemaLogits {
    SchemaLogits {
        family: spec.family,
        horizon: spec.horizon,
        vocab: spec.vocab_fingerprint(),
        values: vec![vec![0.0; spec.vocab_len()]; spec.horizon],
        frozen: false,
    }
}

impl SchemaLogits {
    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    /// Softmax of row `t`.
    pub fn row_probs(&self, t: usize) -> Vec<f64> {
        let row = &self.values[t];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let probs: Vec<f64> = exps.iter().map(|e| e / sum).collect();
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        probs
    }

    /// Reward-signed update along one executed trajectory: `executed[t]` is
    /// the joint-skill index taken at timestep `t`. Success bumps each
    /// executed entry by `alpha`, failure cuts it by `beta`; steps after an
    /// early termination are untouched.
    pub fn update(
        &mut self,
        executed: &[usize],
        success: bool,
        alpha: f64,
        beta: f64,
    ) -> Result<(), SchemaError> {
        if self.frozen {
            return Err(SchemaError::Frozen);
        }
        if executed.len() > self.horizon {
            return Err(SchemaError::BadTimestep {
                t: executed.len() - 1,
                horizon: self.horizon,
            });
        }
        for (t, &x) in executed.iter().enumerate() {
            if x >= self.vocab_len() {
                return Err(SchemaError::BadIndex {
                    index: x,
                    len: self.vocab_len(),
                });
            }
            if success {
                self.values[t][x] += alpha;
            } else {
                self.values[t][x] -= beta;
            }
        }
        Ok(())
    }

    /// Per-row argmax, ties broken toward the lowest index.
    pub fn argmax(&self) -> Vec<usize> {
        self.values
            .iter()
            .map(|row| {
                let mut best = 0;
                for (i, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    /// The argmax schedule as skill-name pairs.
    pub fn argmax_pairs(&self) -> Vec<(String, String)> {
        self.argmax()
            .into_iter()
            .map(|i| self.vocab[i].clone())
            .collect()
    }

    /// Human-readable argmax line: `left:right|left:right|...`.
    pub fn argmax_display(&self) -> String {
        self.argmax_pairs()
            .iter()
            .map(|(l, r)| format!("{l}:{r}"))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Whether the argmax schedule matches `pairs` on its leading entries.
    pub fn argmax_matches(&self, pairs: &[(Skill, Skill)]) -> bool {
        let got = self.argmax_pairs();
        if pairs.len() > got.len() {
            return false;
        }
        pairs.iter().zip(got.iter()).all(|(want, have)| {
            have.0 == want.0.name() && have.1 == want.1.name()
        })
    }

    /// Serialize to the line-oriented text format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family={}", self.family.name());
        let _ = writeln!(out, "T={}", self.horizon);
        let vocab = self
            .vocab
            .iter()
            .map(|(l, r)| format!("{l}:{r}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "vocab={vocab}");
        let _ = writeln!(out, "argmax={}", self.argmax_display());
        for row in &self.values {
            let line = row
                .iter()
                .map(|v| format!("{v:.17e}"))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn export(&self, path: &Path) -> Result<(), TransferError> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix(key)?.strip_prefix('=')
}

/// Parse a schema file without compatibility checks.
pub fn parse_schema(text: &str) -> Result<SchemaLogits, TransferError> {
    let mut lines = text.lines();
    let family_line = lines
        .next()
        .ok_or_else(|| TransferError::Malformed("empty file".into()))?;
    let family_name = header_value(family_line, "family")
        .ok_or_else(|| TransferError::Malformed("missing family= header".into()))?;
    let family = TaskFamily::from_name(family_name)
        .ok_or_else(|| TransferError::Malformed(format!("unknown family {family_name}")))?;
    let horizon: usize = lines
        .next()
        .and_then(|l| header_value(l, "T"))
        .ok_or_else(|| TransferError::Malformed("missing T= header".into()))?
        .parse()
        .map_err(|_| TransferError::Malformed("bad T= value".into()))?;
    let vocab_line = lines
        .next()
        .and_then(|l| header_value(l, "vocab"))
        .ok_or_else(|| TransferError::Malformed("missing vocab= header".into()))?;
    let vocab: Vec<(String, String)> = vocab_line
        .split(',')
        .map(|pair| {
            pair.split_once(':')
                .map(|(l, r)| (l.to_string(), r.to_string()))
                .ok_or_else(|| TransferError::Malformed(format!("bad vocab entry {pair}")))
        })
        .collect::<Result<_, _>>()?;
    let argmax_line = lines
        .next()
        .ok_or_else(|| TransferError::Malformed("missing argmax line".into()))?;
    if header_value(argmax_line, "argmax").is_none() {
        return Err(TransferError::Malformed("missing argmax= header".into()));
    }
    let mut values = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let line = lines
            .next()
            .ok_or_else(|| TransferError::Malformed(format!("missing logits row {t}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| TransferError::Malformed(format!("bad value {tok} in row {t}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != vocab.len() {
            return Err(TransferError::Malformed(format!(
                "row {t} has {} values, vocabulary has {}",
                row.len(),
                vocab.len()
            )));
        }
        values.push(row);
    }
    Ok(SchemaLogits {
        family,
        horizon,
        vocab,
        values,
        frozen: false,
    })
}

/// Import a schedule for use with `spec`. The file's horizon and vocabulary
/// fingerprint must match exactly; observation encodings are irrelevant.
pub fn import_schema(
    path: &Path,
    spec: &TaskSpec,
    mode: ImportMode,
) -> Result<SchemaLogits, TransferError> {
    let text = std::fs::read_to_string(path)?;
    let mut schema = parse_schema(&text)?;
    if schema.horizon != spec.horizon {
        return Err(TransferError::Incompatible(format!(
            "horizon {} in file, task needs {}",
            schema.horizon, spec.horizon
        )));
    }
    let want = spec.vocab_fingerprint();
    if schema.vocab != want {
        return Err(TransferError::Incompatible(format!(
            "vocabulary mismatch: file has [{}], task {} needs [{}]",
            fingerprint_display(&schema.vocab),
            spec.family,
            fingerprint_display(&want),
        )));
    }
    schema.frozen = mode == ImportMode::Frozen;
    Ok(schema)
}

fn fingerprint_display(vocab: &[(String, String)]) -> String {
    vocab
        .iter()
        .map(|(l, r)| format!("{l}:{r}"))
        .collect::<Vec<_>>()
        .join(",")
}

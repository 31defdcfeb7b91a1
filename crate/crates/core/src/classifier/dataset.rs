//! Labeled descriptions, stratified splitting and fine-tuning export.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{parse_label, ClassifyError};
use crate::prompts::FINETUNE_SEPARATOR;
use crate::taxonomy::ConstraintType;

/// Validation share that turns 574 descriptions into 464 + 110.
pub const DEFAULT_VALIDATION_RATIO: f64 = 110.0 / 574.0;

pub const TRAIN_FILE: &str = "train.jsonl";
pub const VALIDATION_FILE: &str = "validation.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Nl4optDerived,
    Authored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledDescription {
    pub text: String,
    pub label: ConstraintType,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    pub train: Vec<LabeledDescription>,
    pub validation: Vec<LabeledDescription>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinetuneRecord {
    pub prompt: String,
    pub completion: String,
}

impl FinetuneRecord {
    pub fn from_item(item: &LabeledDescription) -> Self {
        FinetuneRecord {
            prompt: format!("{}{FINETUNE_SEPARATOR}", item.text),
            completion: format!(" {}", item.label),
        }
    }

    pub fn to_item(&self, origin: Origin) -> Result<LabeledDescription, ClassifyError> {
        let text = self
            .prompt
            .strip_suffix(FINETUNE_SEPARATOR)
            .ok_or_else(|| ClassifyError::Precondition("prompt lacks the separator".into()))?;
        if !self.completion.starts_with(' ') {
            return Err(ClassifyError::InvalidLabel(self.completion.clone()));
        }
        Ok(LabeledDescription {
            text: text.to_string(),
            label: parse_label(&self.completion)?,
            origin,
        })
    }
}

/// Validation count per class: largest-remainder allocation of
/// `round(n * ratio)`, then every class gets at least one validation item
/// and keeps at least one training item.
fn allocate(counts: &BTreeMap<ConstraintType, usize>, ratio: f64) -> BTreeMap<ConstraintType, usize> {
    let n: usize = counts.values().sum();
    let classes = counts.len();
    let target = ((n as f64 * ratio).round() as usize).clamp(classes, n - classes);
    let ideal: BTreeMap<_, f64> = counts.iter().map(|(c, &k)| (*c, k as f64 * ratio)).collect();
    let mut quota: BTreeMap<_, usize> = ideal.iter().map(|(c, v)| (*c, v.floor() as usize)).collect();
    let mut order: Vec<_> = ideal.iter().map(|(c, v)| (*c, v - v.floor())).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut assigned: usize = quota.values().sum();
    for (c, _) in order.iter().cycle() {
        if assigned >= target {
            break;
        }
        if quota[c] < counts[c] - 1 {
            *quota.get_mut(c).unwrap() += 1;
            assigned += 1;
        }
    }
    for (c, q) in quota.iter_mut() {
        *q = (*q).clamp(1, counts[c] - 1);
    }
    // Rebalance to the target after the clamps, adjusting the class whose
    // quota is furthest from its ideal share.
    loop {
        let total: usize = quota.values().sum();
        let surplus = |c: &ConstraintType, q: usize| q as f64 - ideal[c];
        if total > target {
            let pick = quota
                .iter()
                .filter(|(_, &q)| q > 1)
                .max_by(|a, b| surplus(a.0, *a.1).total_cmp(&surplus(b.0, *b.1)).then(b.0.cmp(a.0)))
                .map(|(c, _)| *c);
            match pick {
                Some(c) => *quota.get_mut(&c).unwrap() -= 1,
                None => break,
            }
        } else if total < target {
            let pick = quota
                .iter()
                .filter(|(c, &q)| q < counts[*c] - 1)
                .min_by(|a, b| surplus(a.0, *a.1).total_cmp(&surplus(b.0, *b.1)).then(a.0.cmp(b.0)))
                .map(|(c, _)| *c);
            match pick {
                Some(c) => *quota.get_mut(&c).unwrap() += 1,
                None => break,
            }
        } else {
            break;
        }
    }
    quota
}

/// Stratified, seeded train/validation split. Every class ends up on both
/// sides; output order follows input order.
pub fn split_dataset(
    data: &[LabeledDescription],
    validation_ratio: f64,
    seed: u64,
) -> Result<SplitDataset, ClassifyError> {
    if !(validation_ratio > 0.0 && validation_ratio < 1.0) {
        return Err(ClassifyError::Precondition("ratio must lie in (0, 1)".into()));
    }
    let mut by_class: BTreeMap<ConstraintType, Vec<usize>> = BTreeMap::new();
    for (i, item) in data.iter().enumerate() {
        by_class.entry(item.label).or_default().push(i);
    }
    if let Some((c, _)) = by_class.iter().find(|(_, v)| v.len() < 2) {
        return Err(ClassifyError::InsufficientClassData(c.code()));
    }
    if by_class.is_empty() {
        return Err(ClassifyError::Precondition("dataset is empty".into()));
    }
    let counts = by_class.iter().map(|(c, v)| (*c, v.len())).collect();
    let quota = allocate(&counts, validation_ratio);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_validation = vec![false; data.len()];
    for (c, indices) in &by_class {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        for &i in &shuffled[..quota[c]] {
            in_validation[i] = true;
        }
    }
    let mut split = SplitDataset {
        train: Vec::new(),
        validation: Vec::new(),
    };
    for (item, v) in data.iter().zip(in_validation) {
        if v {
            split.validation.push(item.clone());
        } else {
            split.train.push(item.clone());
        }
    }
    Ok(split)
}

/// Write one JSON-lines fine-tuning file.
pub fn write_finetune(items: &[LabeledDescription], out: impl Write) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    for item in items {
        serde_json::to_writer(&mut w, &FinetuneRecord::from_item(item))?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Write `train.jsonl` and `validation.jsonl` into `dir`.
pub fn export_finetune(split: &SplitDataset, dir: impl AsRef<Path>) -> Result<(), ClassifyError> {
    if split.validation.is_empty() {
        return Err(ClassifyError::Precondition("validation set is empty".into()));
    }
    let dir = dir.as_ref();
    let io = |e: std::io::Error| ClassifyError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, items) in [(TRAIN_FILE, &split.train), (VALIDATION_FILE, &split.validation)] {
        let file = File::create(dir.join(name)).map_err(io)?;
        write_finetune(items, file).map_err(io)?;
    }
    Ok(())
}

fn read_records(path: &Path, origin: Origin) -> Result<Vec<LabeledDescription>, ClassifyError> {
    let file = File::open(path).map_err(|e| ClassifyError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ClassifyError::Io(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let rec: FinetuneRecord = serde_json::from_str(&line)
            .map_err(|e| ClassifyError::Io(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec.to_item(origin)?);
    }
    Ok(out)
}

/// Read an exported pair of files back. The files do not record origin, so
/// every item gets `origin`.
pub fn import_finetune(dir: impl AsRef<Path>, origin: Origin) -> Result<SplitDataset, ClassifyError> {
    let dir = dir.as_ref();
    Ok(SplitDataset {
        train: read_records(&dir.join(TRAIN_FILE), origin)?,
        validation: read_records(&dir.join(VALIDATION_FILE), origin)?,
    })
}

//! CSV ingestion driven by a small `key = value` schema:
//!
//! ```text
//! target = risk
//! task = classification
//! monotone = priors:+, income:-
//! drop = id, name
//! percentile_filter = 90
//! ```
//!
//! `percentile_filter = p` keeps only rows whose target is below the `p`-th
//! percentile. Lines starting with `#` are comments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Task};
use crate::model::{Direction, MonotoneSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub target: String,
    pub task: Task,
    pub monotone: Vec<(String, Direction)>,
    pub drop: Vec<String>,
    pub percentile_filter: Option<f64>,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse("schema", format!("line {line}: {msg}"));
        let mut target = None;
        let mut task = None;
        let mut monotone = Vec::new();
        let mut drop = Vec::new();
        let mut percentile_filter = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got {content:?}")))?;
            let value = value.trim();
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key.trim() {
                "target" => target = Some(value.to_string()),
                "task" => task = Some(value.parse::<Task>().map_err(|e| err(line, e.to_string()))?),
                "monotone" => {
                    for item in list() {
                        let (name, dir) = item
                            .rsplit_once(':')
                            .ok_or_else(|| err(line, format!("expected `name:+` or `name:-`, got {item:?}")))?;
                        let dir = match dir.trim() {
                            "+" | "+1" | "1" => Direction::Increasing,
                            "-" | "-1" => Direction::Decreasing,
                            other => return Err(err(line, format!("unknown direction {other:?}"))),
                        };
                        monotone.push((name.trim().to_string(), dir));
                    }
                }
                "drop" => drop.extend(list().map(String::from)),
                "percentile_filter" => {
                    let p: f64 = value
                        .parse()
                        .map_err(|_| err(line, format!("not a number: {value:?}")))?;
                    if !(0.0..=100.0).contains(&p) {
                        return Err(err(line, format!("percentile {p} outside [0, 100]")));
                    }
                    percentile_filter = Some(p);
                }
                other => return Err(err(line, format!("unknown key {other:?}"))),
            }
        }
        Ok(Self {
            target: target.ok_or_else(|| Error::parse("schema", "missing `target`"))?,
            task: task.unwrap_or(Task::Regression),
            monotone,
            drop,
            percentile_filter,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Linear-interpolation percentile of `values`, `p` in `[0, 100]`.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Reads raw (unnormalized) features and targets.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema, &path.display().to_string())
}

/// [`load_csv`] on in-memory text; `source` names it in errors.
pub fn parse_csv(text: &str, schema: &Schema, source: &str) -> Result<Dataset> {
    let err = |msg: String| Error::parse(source, msg);
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(err("empty file".into()));
    }
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(format!("missing column {name:?}")))
    };
    let target_col = column(&schema.target)?;
    for name in &schema.drop {
        column(name)?;
    }
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != target_col && !schema.drop.contains(&header[c]))
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&c| header[c].clone()).collect();
    let mut indices = Vec::new();
    let mut directions = Vec::new();
    for (name, dir) in &schema.monotone {
        let pos = feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| err(format!("monotone column {name:?} is not a feature")))?;
        indices.push(pos);
        directions.push(*dir);
    }

    let mut features = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |c: usize| -> Result<f64> {
            let s = record.get(c).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("line {line}, column {:?}: not a number: {s:?}", header[c])))
        };
        if record.len() != header.len() {
            return Err(err(format!(
                "line {line}: {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        features.push(feature_cols.iter().map(|&c| cell(c)).collect::<Result<Vec<_>>>()?);
        targets.push(cell(target_col)?);
    }
    if targets.is_empty() {
        return Err(err("no data rows".into()));
    }
    if let Some(p) = schema.percentile_filter {
        let cut = percentile(&targets, p);
        let keep: Vec<bool> = targets.iter().map(|&t| t < cut).collect();
        let mut k = keep.iter();
        features.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        targets.retain(|_| *k.next().unwrap());
    }
    Dataset::new(
        feature_names,
        features,
        targets,
        schema.task,
        MonotoneSpec::new(indices, directions)?,
    )
}

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Direction, InputBox, MonotoneSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    /// Binary targets in `{0, 1}`; the network output is a logit.
    Classification,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(Error::Config(format!("unknown task {other:?}"))),
        }
    }
}

/// Per-feature affine map to `[0, 1]`. Decreasing features are negated
/// first, so the normalized target is increasing in every monotone feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub negated: Vec<bool>,
}

impl Normalization {
    /// Parameters of the raw `features` of a dataset.
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.normalization.is_some() {
            return Err(Error::Input("dataset is already normalized".into()));
        }
        let d = data.dim();
        let negated: Vec<bool> = (0..d)
            .map(|i| data.monotone.direction_of(i) == Some(Direction::Decreasing))
            .collect();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in &data.features {
            for i in 0..d {
                let v = if negated[i] { -row[i] } else { row[i] };
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        if data.is_empty() {
            min.fill(0.0);
            max.fill(0.0);
        }
        Ok(Self { min, max, negated })
    }

    /// Maps one raw row into the unit cube, clamping values outside the
    /// fitted range.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let v = if self.negated[i] { -v } else { v };
                let span = self.max[i] - self.min[i];
                if span > 0.0 {
                    ((v - self.min[i]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(i, &t)| {
                let v = self.min[i] + t * (self.max[i] - self.min[i]);
                if self.negated[i] {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub task: Task,
    pub monotone: MonotoneSpec,
    /// Present once features have been mapped to the unit cube.
    pub normalization: Option<Normalization>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        targets: Vec<f64>,
        task: Task,
        monotone: MonotoneSpec,
    ) -> Result<Self> {
        let data = Self {
            feature_names,
            features,
            targets,
            task,
            monotone,
            normalization: None,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.targets.len() {
            return Err(Error::Input(format!(
                "{} feature rows but {} targets",
                self.features.len(),
                self.targets.len()
            )));
        }
        if let Some(r) = self.features.iter().position(|row| row.len() != self.dim()) {
            return Err(Error::Input(format!("row {r} has the wrong number of features")));
        }
        if self.features.iter().flatten().chain(&self.targets).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite value in dataset".into()));
        }
        if self.task == Task::Classification && self.targets.iter().any(|&t| t != 0.0 && t != 1.0) {
            return Err(Error::Input("classification targets must be 0 or 1".into()));
        }
        self.monotone.check_dim(self.dim())?;
        if let Some(n) = &self.normalization {
            if n.min.len() != self.dim() {
                return Err(Error::Input("normalization has the wrong dimension".into()));
            }
            if !self.features.iter().flatten().all(|v| (0.0..=1.0).contains(v)) {
                return Err(Error::Input("normalized features must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Applies `norm` to every row.
    pub fn apply_normalization(&self, norm: &Normalization) -> Result<Dataset> {
        if self.normalization.is_some() {
            return Err(Error::Input("dataset is already normalized".into()));
        }
        if norm.min.len() != self.dim() {
            return Err(Error::Input("normalization has the wrong dimension".into()));
        }
        Ok(Dataset {
            features: self.features.iter().map(|r| norm.normalize(r)).collect(),
            normalization: Some(norm.clone()),
            ..self.clone()
        })
    }

    /// Normalizes with parameters fitted on this dataset.
    pub fn normalized(&self) -> Result<Dataset> {
        self.apply_normalization(&Normalization::fit(self)?)
    }

    /// The box the features live in: the unit cube once normalized,
    /// otherwise the observed range.
    pub fn input_box(&self) -> Result<InputBox> {
        if self.normalization.is_some() || self.is_empty() {
            return Ok(InputBox::unit(self.dim()));
        }
        let mut lo = vec![f64::INFINITY; self.dim()];
        let mut hi = vec![f64::NEG_INFINITY; self.dim()];
        for row in &self.features {
            for i in 0..self.dim() {
                lo[i] = lo[i].min(row[i]);
                hi[i] = hi[i].max(row[i]);
            }
        }
        InputBox::new(lo, hi)
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            targets: rows.iter().map(|&r| self.targets[r]).collect(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::parse("dataset", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: Dataset = serde_json::from_str(text).map_err(|e| {
            Error::parse("dataset", format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        data.validate()?;
        Ok(data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
            vec![0.0, 1.0, 1.0],
            Task::Classification,
            MonotoneSpec::new(vec![0], vec![Direction::Decreasing]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn decreasing_column_is_negated_then_scaled() {
        let n = toy().normalized().unwrap();
        let col: Vec<f64> = n.features.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![1.0, 0.5, 0.0]);
        // Constant column maps to zero and back to its value.
        assert!(n.features.iter().all(|r| r[1] == 0.0));
        let norm = n.normalization.as_ref().unwrap();
        assert_eq!(norm.denormalize(&n.features[0]), vec![1.0, 5.0]);
    }

    #[test]
    fn json_round_trip() {
        let d = toy().normalized().unwrap();
        assert_eq!(Dataset::from_json(&d.to_json().unwrap()).unwrap(), d);
        assert!(Dataset::from_json("{\"feature_names\": [").is_err());
    }

    #[test]
    fn invalid_targets_are_rejected() {
        let mut d = toy();
        d.targets[0] = 0.5;
        assert!(d.validate().is_err());
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned input region `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl InputBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Input(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l > u {
                return Err(Error::Input(format!("invalid box interval [{l}, {u}] at {i}")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]^d`, the domain of normalized data.
    pub fn unit(d: usize) -> Self {
        Self {
            lower: vec![0.0; d],
            upper: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if l < u { rng.random_range(l..=u) } else { l })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl From<Direction> for i8 {
    fn from(d: Direction) -> i8 {
        match d {
            Direction::Increasing => 1,
            Direction::Decreasing => -1,
        }
    }
}

impl TryFrom<i8> for Direction {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Direction::Increasing),
            -1 => Ok(Direction::Decreasing),
            other => Err(format!("direction must be 1 or -1, got {other}")),
        }
    }
}

/// The monotone feature set, as 0-based input indices. Decreasing features
/// are negated when data is loaded, so every computation downstream of
/// ingestion treats them as increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneSpec {
    indices: Vec<usize>,
    directions: Vec<Direction>,
}

impl MonotoneSpec {
    pub fn new(indices: Vec<usize>, directions: Vec<Direction>) -> Result<Self> {
        if indices.len() != directions.len() {
            return Err(Error::Input("one direction per monotone index required".into()));
        }
        let mut pairs: Vec<_> = indices.into_iter().zip(directions).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Input("duplicate monotone index".into()));
        }
        let (indices, directions) = pairs.into_iter().unzip();
        Ok(Self {
            indices,
            directions,
        })
    }

    pub fn increasing(indices: Vec<usize>) -> Result<Self> {
        let n = indices.len();
        Self::new(indices, vec![Direction::Increasing; n])
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn direction_of(&self, i: usize) -> Option<Direction> {
        self.indices
            .binary_search(&i)
            .ok()
            .map(|k| self.directions[k])
    }

    /// Indices in `0..d` that are not monotone.
    pub fn complement(&self, d: usize) -> Vec<usize> {
        (0..d).filter(|i| !self.contains(*i)).collect()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i >= d => Err(Error::Structural(format!(
                "monotone index {i} out of range for input dimension {d}"
            ))),
            _ => Ok(()),
        }
    }
}

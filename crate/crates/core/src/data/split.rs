use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, Normalization, Task};
use crate::{Error, Result};

/// Row indices of a `(train, validation)` split. Classification splits are
/// stratified: each class contributes `round(fraction * count)` rows.
pub fn split_indices(data: &Dataset, val_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::Config(format!(
            "validation fraction must lie in (0, 1), got {val_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = match data.task {
        Task::Regression => vec![(0..data.len()).collect()],
        Task::Classification => [0.0, 1.0]
            .iter()
            .map(|&c| (0..data.len()).filter(|&r| data.targets[r] == c).collect())
            .collect(),
    };
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for mut g in groups {
        g.shuffle(&mut rng);
        let k = (val_fraction * g.len() as f64).round() as usize;
        val.extend_from_slice(&g[..k]);
        train.extend_from_slice(&g[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

pub fn split(data: &Dataset, val_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (t, v) = split_indices(data, val_fraction, seed)?;
    Ok((data.subset(&t), data.subset(&v)))
}

/// Splits raw data and normalizes both parts with parameters fitted on the
/// training part alone.
pub fn split_normalized(
    data: &Dataset,
    val_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, Normalization)> {
    let (train, val) = split(data, val_fraction, seed)?;
    let norm = Normalization::fit(&train)?;
    Ok((
        train.apply_normalization(&norm)?,
        val.apply_normalization(&norm)?,
        norm,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MonotoneSpec;

    fn data(n: usize, task: Task) -> Dataset {
        Dataset::new(
            vec!["x".into()],
            (0..n).map(|k| vec![k as f64]).collect(),
            (0..n).map(|k| if k % 3 == 0 { 1.0 } else { 0.0 }).collect(),
            task,
            MonotoneSpec::increasing(vec![0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sizes_and_determinism() {
        let d = data(100, Task::Regression);
        let (t, v) = split_indices(&d, 0.2, 1).unwrap();
        assert_eq!((t.len(), v.len()), (80, 20));
        assert!(t.iter().all(|r| !v.contains(r)));
        assert_eq!(split_indices(&d, 0.2, 1).unwrap(), (t, v));
        assert!(split_indices(&d, 1.0, 1).is_err());
        assert!(split_indices(&d, 0.0, 1).is_err());
    }

    #[test]
    fn stratified_class_ratios() {
        let d = data(1000, Task::Classification);
        let (t, v) = split(&d, 0.2, 9).unwrap();
        let ratio = |s: &Dataset| s.targets.iter().sum::<f64>() / s.len() as f64;
        assert!((ratio(&t) - ratio(&v)).abs() <= 0.02);
    }

    #[test]
    fn validation_uses_training_parameters() {
        let d = data(50, Task::Regression);
        let (t, v, norm) = split_normalized(&d, 0.2, 3).unwrap();
        let max = t.features.iter().map(|r| r[0]).fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        assert_eq!(v.normalization.as_ref(), Some(&norm));
        assert!(v.features.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
    }
}

//! JSON model files. Floats are written with 17 significant digits so a
//! save/load round trip reproduces every weight bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use super::activation::Activation;
use super::domain::{Direction, MonotoneSpec};
use super::matrix::Matrix;
use super::network::{InputProjection, Layer, MlpNetwork};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    input_dim: usize,
    monotone_indices: Vec<usize>,
    directions: Vec<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projection: Option<ProjectionFile>,
    layers: Vec<LayerFile>,
    masking_metadata: MaskingFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    rows: usize,
    cols: usize,
    activation: String,
    #[serde(serialize_with = "exact_floats")]
    weights: Vec<f64>,
    #[serde(serialize_with = "exact_floats")]
    biases: Vec<f64>,
    #[serde(default)]
    frozen: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionFile {
    monotone_inputs: Vec<usize>,
    free_inputs: Vec<usize>,
    layer: LayerFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskingFile {
    half_masking: bool,
    /// Row-major indices of weights pinned to zero, per layer.
    frozen_zero: Vec<Vec<usize>>,
}

fn exact_floats<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw: Vec<Box<RawValue>> = v
        .iter()
        .map(|x| RawValue::from_string(format!("{x:.16e}")).expect("valid number"))
        .collect();
    raw.serialize(s)
}

fn layer_to_file(l: &Layer) -> LayerFile {
    LayerFile {
        rows: l.out_dim(),
        cols: l.in_dim(),
        activation: l.activation.name().to_string(),
        weights: l.weights.data().to_vec(),
        biases: l.biases.clone(),
        frozen: l.frozen,
    }
}

fn layer_from_file(f: LayerFile, what: &str) -> Result<Layer> {
    let weights = Matrix::from_vec(f.rows, f.cols, f.weights)
        .map_err(|e| Error::Structural(format!("{what}: {e}")))?;
    let activation = Activation::from_name(&f.activation)
        .map_err(|e| Error::parse(format!("{what}.activation"), e))?;
    let mut layer = Layer::new(weights, f.biases, activation)
        .map_err(|e| Error::Structural(format!("{what}: {e}")))?;
    layer.frozen = f.frozen;
    Ok(layer)
}

pub fn to_json(net: &MlpNetwork) -> String {
    let file = ModelFile {
        version: FORMAT_VERSION,
        input_dim: net.input_dim,
        monotone_indices: net.monotone.indices().to_vec(),
        directions: net.monotone.directions().to_vec(),
        projection: net.projection.as_ref().map(|p| ProjectionFile {
            monotone_inputs: p.monotone.clone(),
            free_inputs: p.free.clone(),
            layer: layer_to_file(&p.layer),
        }),
        layers: net.layers.iter().map(layer_to_file).collect(),
        masking_metadata: MaskingFile {
            half_masking: net.half_masking,
            frozen_zero: net
                .layers
                .iter()
                .map(|l| match &l.mask {
                    None => Vec::new(),
                    Some(m) => (0..m.len()).filter(|&k| !m[k]).collect(),
                })
                .collect(),
        },
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn from_json(text: &str) -> Result<MlpNetwork> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("model file line {} column {}", e.line(), e.column()), e)
    })?;
    if file.version != FORMAT_VERSION {
        return Err(Error::parse(
            "version",
            format!("unsupported model version {}", file.version),
        ));
    }
    let monotone = MonotoneSpec::new(file.monotone_indices, file.directions)
        .map_err(|e| Error::parse("monotone_indices", e))?;
    if file.masking_metadata.frozen_zero.len() != file.layers.len() {
        return Err(Error::Structural(
            "masking_metadata.frozen_zero needs one entry per layer".into(),
        ));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (k, (lf, zeros)) in file
        .layers
        .into_iter()
        .zip(file.masking_metadata.frozen_zero)
        .enumerate()
    {
        let mut layer = layer_from_file(lf, &format!("layers[{k}]"))?;
        if !zeros.is_empty() {
            let n = layer.weights.data().len();
            let mut mask = vec![true; n];
            for z in zeros {
                if z >= n {
                    return Err(Error::Structural(format!("layers[{k}]: mask index {z} >= {n}")));
                }
                mask[z] = false;
            }
            layer.mask = Some(mask);
        }
        layers.push(layer);
    }
    if layers.len() % 2 == 1 {
        return Err(Error::Structural(format!(
            "model file has {} layers; an even count is required",
            layers.len()
        )));
    }
    let projection = match file.projection {
        None => None,
        Some(p) => Some(InputProjection {
            monotone: p.monotone_inputs,
            free: p.free_inputs,
            layer: layer_from_file(p.layer, "projection.layer")?,
        }),
    };
    let net = MlpNetwork {
        input_dim: file.input_dim,
        monotone,
        projection,
        layers,
        half_masking: file.masking_metadata.half_masking,
    };
    net.validate()?;
    Ok(net)
}

pub fn save(net: &MlpNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<MlpNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_appendix_architecture, ArchitectureOptions, InputBox};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_net(seed: u64) -> MlpNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = MonotoneSpec::new(
            vec![0, 2],
            vec![Direction::Increasing, Direction::Decreasing],
        )
        .unwrap();
        let net = MlpNetwork::random(3, &[6, 4, 4], spec, &mut rng).unwrap();
        apply_appendix_architecture(net, &ArchitectureOptions::default(), &mut rng).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let net = sample_net(9);
        let back = from_json(&to_json(&net)).unwrap();
        assert_eq!(back, net);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let x = InputBox::unit(3).sample(&mut rng);
            assert_eq!(
                back.forward(&x).unwrap().to_bits(),
                net.forward(&x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn awkward_floats_survive() {
        let mut net = sample_net(1);
        let w = net.layers[0].weights.data_mut();
        w[0] = 0.1 + 0.2;
        w[1] = -5e-324;
        w[3] = f64::MAX;
        w[4] = -0.0;
        let back = from_json(&to_json(&net)).unwrap();
        let (a, b) = (net.layers[0].weights.data(), back.layers[0].weights.data());
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = to_json(&sample_net(2));
        let err = from_json(&text[..text.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn mismatched_dims_are_structural_errors() {
        let text = to_json(&sample_net(3));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["layers"][1]["cols"] = serde_json::json!(5);
        let err = from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Structural(_)), "{err}");
    }
}

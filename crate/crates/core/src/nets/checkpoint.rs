//! Parameter checkpoints.
//!
//! Layout: 4-byte magic `R3NP`, little-endian `u32` header length, a JSON
//! shape header, then every parameter as a little-endian `f32` in
//! [`PolicyParams::tensors`] order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::layers::{Activation, Conv2d, Dense};
use super::policy::{InputLayout, PolicyParams};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"R3NP";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LayerShape {
    Conv {
        input: (usize, usize, usize),
        kernel: usize,
        out_channels: usize,
        activation: Activation,
    },
    Dense {
        inputs: usize,
        outputs: usize,
        activation: Activation,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    layout: InputLayout,
    layers: Vec<LayerShape>,
    action_count: usize,
    has_critic: bool,
    entropy_coef: f64,
    param_count: usize,
}

pub fn save<W: Write>(net: &PolicyParams, mut out: W) -> Result<()> {
    let mut layers: Vec<LayerShape> = net
        .convs
        .iter()
        .map(|c| LayerShape::Conv {
            input: (c.in_h, c.in_w, c.in_c),
            kernel: c.kernel,
            out_channels: c.out_c,
            activation: c.activation,
        })
        .collect();
    layers.extend(net.dense.iter().map(|d| LayerShape::Dense {
        inputs: d.inputs,
        outputs: d.outputs,
        activation: d.activation,
    }));
    let header = Header {
        layout: net.layout,
        layers,
        action_count: net.action_count,
        has_critic: net.has_critic,
        entropy_coef: net.entropy_coef,
        param_count: net.param_count(),
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    for tensor in net.tensors() {
        for &v in tensor {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load<R: Read>(mut input: R) -> Result<PolicyParams> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Schema("not a parameter checkpoint".into()));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;

    let mut net = PolicyParams {
        layout: header.layout,
        convs: Vec::new(),
        dense: Vec::new(),
        action_count: header.action_count,
        has_critic: header.has_critic,
        entropy_coef: header.entropy_coef,
    };
    for layer in header.layers {
        match layer {
            LayerShape::Conv {
                input: (h, w, c),
                kernel,
                out_channels,
                activation,
            } => net.convs.push(Conv2d {
                in_h: h,
                in_w: w,
                in_c: c,
                kernel,
                out_c: out_channels,
                weights: vec![0.0; out_channels * kernel * kernel * c],
                bias: vec![0.0; out_channels],
                activation,
            }),
            LayerShape::Dense {
                inputs,
                outputs,
                activation,
            } => net.dense.push(Dense::zeros(inputs, outputs, activation)),
        }
    }
    net.validate()?;
    if net.param_count() != header.param_count {
        return Err(Error::Schema("parameter count disagrees with header".into()));
    }
    let mut buf = [0u8; 4];
    for tensor in net.tensors_mut() {
        for v in tensor.iter_mut() {
            input.read_exact(&mut buf)?;
            *v = f64::from(f32::from_le_bytes(buf));
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::NetConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_within_f32_precision() {
        let layout = InputLayout {
            flat: 4,
            image: Some((5, 5, 3)),
            image_scale: 0.1,
        };
        let net = PolicyParams::new(layout, 5, true, 0.01, &NetConfig::gridworld(), &mut ChaCha8Rng::seed_from_u64(4));
        let mut bytes = Vec::new();
        save(&net, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], MAGIC);
        let back = load(bytes.as_slice()).unwrap();
        assert_eq!(back.param_count(), net.param_count());
        for (a, b) in net.tensors().iter().zip(back.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(*y, f64::from(*x as f32));
            }
        }
        assert_eq!(back.entropy_coef, 0.01);
    }

    #[test]
    fn truncated_stream_fails() {
        let net = PolicyParams::new(InputLayout::flat(4), 2, false, 0.0, &NetConfig::cartpole(), &mut ChaCha8Rng::seed_from_u64(4));
        let mut bytes = Vec::new();
        save(&net, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(load(bytes.as_slice()).is_err());
    }
}

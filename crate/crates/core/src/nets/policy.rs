use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{Activation, Conv2d, Dense};
use crate::envs::{EnvKind, EnvSpec};
use crate::{Error, Result};

/// How an observation vector splits into flat features and an optional
/// HWC image. Flat features come first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputLayout {
    pub flat: usize,
    pub image: Option<(usize, usize, usize)>,
    /// Constant multiplier applied to image values before the first convolution.
    pub image_scale: f64,
}

impl InputLayout {
    pub fn flat(n: usize) -> InputLayout {
        InputLayout {
            flat: n,
            image: None,
            image_scale: 1.0,
        }
    }

    pub fn obs_length(&self) -> usize {
        self.flat + self.image.map_or(0, |(h, w, c)| h * w * c)
    }

    /// Layout of a gridworld observation: direction one-hot then the grid image.
    pub fn for_env(kind: EnvKind, spec: &EnvSpec) -> InputLayout {
        if kind.is_gridworld() {
            let cells = (spec.obs_length - 4) / 3;
            let size = (cells as f64).sqrt().round() as usize;
            InputLayout {
                flat: 4,
                image: Some((size, size, 3)),
                image_scale: 0.1,
            }
        } else {
            InputLayout::flat(spec.obs_length)
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub conv_channels: Vec<usize>,
    pub kernel: usize,
    pub conv_activation: Activation,
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig::cartpole()
    }
}

impl NetConfig {
    pub fn gridworld() -> NetConfig {
        NetConfig {
            conv_channels: vec![8, 16],
            kernel: 2,
            conv_activation: Activation::Relu,
            hidden: vec![64],
            hidden_activation: Activation::Tanh,
        }
    }

    pub fn cartpole() -> NetConfig {
        NetConfig {
            conv_channels: Vec::new(),
            kernel: 2,
            conv_activation: Activation::Relu,
            hidden: vec![64, 64],
            hidden_activation: Activation::Tanh,
        }
    }

    pub fn for_env(kind: EnvKind) -> NetConfig {
        if kind.is_gridworld() {
            NetConfig::gridworld()
        } else {
            NetConfig::cartpole()
        }
    }
}

/// Actor network, optionally with a value output appended to the logits.
///
/// Image features pass through the convolution stack, get flattened and
/// appended to the flat features; the dense stack maps that to
/// `action_count` logits (plus one value when `has_critic`).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub layout: InputLayout,
    pub convs: Vec<Conv2d>,
    pub dense: Vec<Dense>,
    pub action_count: usize,
    pub has_critic: bool,
    pub entropy_coef: f64,
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    conv_io: Vec<Vec<f64>>,
    dense_io: Vec<Vec<f64>>,
}

impl Tape {
    pub fn outputs(&self) -> &[f64] {
        self.dense_io.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub logits: Vec<f64>,
    pub value: Option<f64>,
}

/// Parameter-shaped gradient buffers, in [`PolicyParams::tensors`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            t.iter_mut().for_each(|g| *g *= factor);
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|g| g.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.tensors.iter().flatten().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors.iter().flatten().copied().collect()
    }
}

impl PolicyParams {
    pub fn new<R: Rng>(
        layout: InputLayout,
        action_count: usize,
        has_critic: bool,
        entropy_coef: f64,
        cfg: &NetConfig,
        rng: &mut R,
    ) -> PolicyParams {
        let hidden_gain = 2f64.sqrt();
        let mut convs = Vec::new();
        if let Some(mut shape) = layout.image {
            for &channels in &cfg.conv_channels {
                let conv = Conv2d::init(shape, cfg.kernel, channels, cfg.conv_activation, hidden_gain, rng);
                shape = conv.out_shape();
                convs.push(conv);
            }
        }
        let mut width = layout.flat + convs.last().map_or_else(
            || layout.image.map_or(0, |(h, w, c)| h * w * c),
            Conv2d::output_len,
        );
        let mut dense = Vec::new();
        for &units in &cfg.hidden {
            dense.push(Dense::init(width, units, cfg.hidden_activation, hidden_gain, rng));
            width = units;
        }
        // Near-uniform initial policy; the value row gets unit gain.
        let mut head = Dense::init(width, action_count, Activation::Identity, 0.01, rng);
        if has_critic {
            let value = Dense::init(width, 1, Activation::Identity, 1.0, rng);
            head.weights.extend(value.weights);
            head.bias.push(0.0);
            head.outputs += 1;
        }
        dense.push(head);
        PolicyParams {
            layout,
            convs,
            dense,
            action_count,
            has_critic,
            entropy_coef,
        }
    }

    pub fn output_len(&self) -> usize {
        self.action_count + usize::from(self.has_critic)
    }

    /// Weight/bias tensors in a fixed order: convolutions, then dense layers.
    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        let mut out = Vec::with_capacity(2 * (self.convs.len() + self.dense.len()));
        for c in &self.convs {
            out.push(&c.weights);
            out.push(&c.bias);
        }
        for d in &self.dense {
            out.push(&d.weights);
            out.push(&d.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = Vec::with_capacity(2 * (self.convs.len() + self.dense.len()));
        for c in &mut self.convs {
            out.push(&mut c.weights);
            out.push(&mut c.bias);
        }
        for d in &mut self.dense {
            out.push(&mut d.weights);
            out.push(&mut d.bias);
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            tensors: self.tensors().iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Checks that layer shapes chain from the input layout to the outputs.
    pub fn validate(&self) -> Result<()> {
        let mut shape = self.layout.image;
        for (i, c) in self.convs.iter().enumerate() {
            if shape != Some((c.in_h, c.in_w, c.in_c)) {
                return Err(Error::Shape(format!("conv {i} input {:?} vs {shape:?}", (c.in_h, c.in_w, c.in_c))));
            }
            if c.weights.len() != c.out_c * c.kernel * c.kernel * c.in_c || c.bias.len() != c.out_c {
                return Err(Error::Shape(format!("conv {i} tensor sizes")));
            }
            shape = Some(c.out_shape());
        }
        let mut width = self.layout.flat + shape.map_or(0, |(h, w, c)| h * w * c);
        for (i, d) in self.dense.iter().enumerate() {
            if d.inputs != width || d.weights.len() != d.inputs * d.outputs || d.bias.len() != d.outputs {
                return Err(Error::Shape(format!("dense {i} expects {} inputs, got {width}", d.inputs)));
            }
            width = d.outputs;
        }
        if width != self.output_len() {
            return Err(Error::Shape(format!("output width {width} vs {}", self.output_len())));
        }
        Ok(())
    }

    /// Forward pass recording activations for [`PolicyParams::backward`].
    pub fn forward_tape(&self, obs: &[f64]) -> Result<Tape> {
        if obs.len() != self.layout.obs_length() {
            return Err(Error::Shape(format!(
                "observation length {} vs network input {}",
                obs.len(),
                self.layout.obs_length()
            )));
        }
        let (flat, image) = obs.split_at(self.layout.flat);
        let mut tape = Tape::default();
        let mut features: Vec<f64> = flat.to_vec();
        if self.layout.image.is_some() {
            let scaled: Vec<f64> = image.iter().map(|x| x * self.layout.image_scale).collect();
            tape.conv_io.push(scaled);
            for conv in &self.convs {
                let mut out = Vec::new();
                conv.forward(tape.conv_io.last().unwrap(), &mut out);
                tape.conv_io.push(out);
            }
            features.extend_from_slice(tape.conv_io.last().unwrap());
        }
        tape.dense_io.push(features);
        for layer in &self.dense {
            let mut out = Vec::new();
            layer.forward(tape.dense_io.last().unwrap(), &mut out);
            tape.dense_io.push(out);
        }
        Ok(tape)
    }

    pub fn forward(&self, obs: &[f64]) -> Result<ForwardOutput> {
        let tape = self.forward_tape(obs)?;
        Ok(self.split_outputs(tape.outputs()))
    }

    pub fn split_outputs(&self, outputs: &[f64]) -> ForwardOutput {
        ForwardOutput {
            logits: outputs[..self.action_count].to_vec(),
            value: self.has_critic.then(|| outputs[self.action_count]),
        }
    }

    /// Accumulates into `grads` the gradient of a scalar whose derivative
    /// w.r.t. the raw network outputs (logits, then value) is `d_outputs`.
    pub fn backward(&self, tape: &Tape, d_outputs: &[f64], grads: &mut Gradients) -> Result<()> {
        if d_outputs.len() != self.output_len() {
            return Err(Error::Shape(format!(
                "output gradient length {} vs {}",
                d_outputs.len(),
                self.output_len()
            )));
        }
        if !d_outputs.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("output gradient"));
        }
        let conv_tensors = 2 * self.convs.len();
        let mut delta = d_outputs.to_vec();
        for (i, layer) in self.dense.iter().enumerate().rev() {
            let (w, rest) = grads.tensors[conv_tensors + 2 * i..].split_at_mut(1);
            delta = layer.backward(&tape.dense_io[i], &tape.dense_io[i + 1], &delta, &mut w[0], &mut rest[0]);
        }
        if self.convs.is_empty() {
            return Ok(());
        }
        let mut delta = delta.split_off(self.layout.flat);
        for (i, conv) in self.convs.iter().enumerate().rev() {
            let (w, rest) = grads.tensors[2 * i..].split_at_mut(1);
            delta = conv.backward(&tape.conv_io[i], &tape.conv_io[i + 1], &delta, &mut w[0], &mut rest[0]);
        }
        Ok(())
    }

    /// Deep copy without the value output.
    pub fn actor_only(&self) -> PolicyParams {
        let mut out = self.clone();
        if out.has_critic {
            let head = out.dense.last_mut().expect("network has an output layer");
            head.outputs -= 1;
            head.weights.truncate(head.outputs * head.inputs);
            head.bias.truncate(head.outputs);
            out.has_critic = false;
        }
        out
    }

    pub fn with_entropy_coef(mut self, entropy_coef: f64) -> PolicyParams {
        self.entropy_coef = entropy_coef;
        self
    }

    /// Overwrites the actor part of `self` (everything but the value row)
    /// with `src`'s; layer shapes must agree.
    pub fn copy_actor_from(&mut self, src: &PolicyParams) -> Result<()> {
        let critic = self.has_critic;
        let entropy_coef = self.entropy_coef;
        let mut actor = if src.has_critic { src.actor_only() } else { src.clone() };
        if critic {
            let head = actor.dense.last_mut().expect("output layer");
            let own = self.dense.last().expect("output layer");
            let n = own.inputs;
            head.weights.extend_from_slice(&own.weights[head.outputs * n..]);
            head.bias.push(own.bias[head.outputs]);
            head.outputs += 1;
            actor.has_critic = true;
        }
        actor.entropy_coef = entropy_coef;
        actor.validate()?;
        if actor.layout != self.layout || actor.output_len() != self.output_len() {
            return Err(Error::Shape("actor layouts differ".into()));
        }
        *self = actor;
        Ok(())
    }
}

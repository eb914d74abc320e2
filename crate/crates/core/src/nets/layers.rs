use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activated output `y`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub(crate) fn normal_init<R: Rng>(n: usize, std: f64, rng: &mut R) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; n];
    }
    let dist = Normal::new(0.0, std).expect("positive std");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Dot product with four independent partial sums so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum::<f64>();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Dense {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn init<R: Rng>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        gain: f64,
        rng: &mut R,
    ) -> Dense {
        Dense {
            inputs,
            outputs,
            weights: normal_init(inputs * outputs, gain / (inputs as f64).sqrt(), rng),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.inputs);
        out.clear();
        out.reserve(self.outputs);
        for (row, b) in self.weights.chunks_exact(self.inputs).zip(&self.bias) {
            let z = b + dot(row, input);
            out.push(self.activation.apply(z));
        }
    }

    /// Accumulates parameter gradients and returns the gradient w.r.t. the
    /// layer input. `d_output` is w.r.t. the activated output.
    pub fn backward(
        &self,
        input: &[f64],
        output: &[f64],
        d_output: &[f64],
        d_weights: &mut [f64],
        d_bias: &mut [f64],
    ) -> Vec<f64> {
        let mut d_input = vec![0.0; self.inputs];
        for o in 0..self.outputs {
            let dz = d_output[o] * self.activation.derivative_from_output(output[o]);
            if dz == 0.0 {
                continue;
            }
            d_bias[o] += dz;
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let d_row = &mut d_weights[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                d_row[i] += dz * input[i];
                d_input[i] += dz * row[i];
            }
        }
        d_input
    }
}

/// Valid (unpadded), stride-1 2-D convolution over an HWC image.
/// `weights` is laid out `[out_c][kernel][kernel][in_c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_h: usize,
    pub in_w: usize,
    pub in_c: usize,
    pub kernel: usize,
    pub out_c: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Conv2d {
    pub fn init<R: Rng>(
        (in_h, in_w, in_c): (usize, usize, usize),
        kernel: usize,
        out_c: usize,
        activation: Activation,
        gain: f64,
        rng: &mut R,
    ) -> Conv2d {
        let fan_in = kernel * kernel * in_c;
        Conv2d {
            in_h,
            in_w,
            in_c,
            kernel,
            out_c,
            weights: normal_init(out_c * fan_in, gain / (fan_in as f64).sqrt(), rng),
            bias: vec![0.0; out_c],
            activation,
        }
    }

    pub fn out_h(&self) -> usize {
        self.in_h + 1 - self.kernel
    }

    pub fn out_w(&self) -> usize {
        self.in_w + 1 - self.kernel
    }

    pub fn out_shape(&self) -> (usize, usize, usize) {
        (self.out_h(), self.out_w(), self.out_c)
    }

    pub fn input_len(&self) -> usize {
        self.in_h * self.in_w * self.in_c
    }

    pub fn output_len(&self) -> usize {
        self.out_h() * self.out_w() * self.out_c
    }

    pub fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.input_len());
        let (oh, ow) = (self.out_h(), self.out_w());
        let k = self.kernel;
        let fan_in = k * k * self.in_c;
        let row_stride = self.in_w * self.in_c;
        out.clear();
        out.reserve(self.output_len());
        for i in 0..oh {
            for j in 0..ow {
                for o in 0..self.out_c {
                    let filter = &self.weights[o * fan_in..(o + 1) * fan_in];
                    let mut z = self.bias[o];
                    for di in 0..k {
                        let start = (i + di) * row_stride + j * self.in_c;
                        let patch = &input[start..start + k * self.in_c];
                        let w = &filter[di * k * self.in_c..(di + 1) * k * self.in_c];
                        z += dot(patch, w);
                    }
                    out.push(self.activation.apply(z));
                }
            }
        }
    }

    pub fn backward(
        &self,
        input: &[f64],
        output: &[f64],
        d_output: &[f64],
        d_weights: &mut [f64],
        d_bias: &mut [f64],
    ) -> Vec<f64> {
        let (oh, ow) = (self.out_h(), self.out_w());
        let k = self.kernel;
        let fan_in = k * k * self.in_c;
        let row_stride = self.in_w * self.in_c;
        let span = k * self.in_c;
        let mut d_input = vec![0.0; self.input_len()];
        for i in 0..oh {
            for j in 0..ow {
                for o in 0..self.out_c {
                    let idx = (i * ow + j) * self.out_c + o;
                    let dz = d_output[idx] * self.activation.derivative_from_output(output[idx]);
                    if dz == 0.0 {
                        continue;
                    }
                    d_bias[o] += dz;
                    for di in 0..k {
                        let start = (i + di) * row_stride + j * self.in_c;
                        let w_off = o * fan_in + di * span;
                        for t in 0..span {
                            d_weights[w_off + t] += dz * input[start + t];
                            d_input[start + t] += dz * self.weights[w_off + t];
                        }
                    }
                }
            }
        }
        d_input
    }
}

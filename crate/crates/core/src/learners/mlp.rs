//! Fully connected ReLU network with a sigmoid output, trained with Adam on
//! binary cross-entropy.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{log_loss, sigmoid, Family, LearnerConfig, LearnerError, MlpConfig};
use crate::dataset::TimeIndexedDataset;
use crate::seed::{self, Rng};

/// Number of trainable weights and biases for `n_features` inputs.
pub fn param_count(cfg: &LearnerConfig, n_features: usize) -> Result<usize, LearnerError> {
    let LearnerConfig::Mlp(c) = cfg else {
        return Err(LearnerError::WrongFamily {
            expected: Family::MLP,
            found: cfg.family(),
        });
    };
    let mut fan_in = n_features;
    let mut total = 0;
    for &w in c.hidden.iter().chain(std::iter::once(&1)) {
        total += fan_in * w + w;
        fan_in = w;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `inputs x outputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn w(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.inputs, self.outputs), &self.weights).expect("layer shape")
    }

    fn forward(&self, a: &Array2<f64>) -> Array2<f64> {
        let mut z = a.dot(&self.w());
        z += &ndarray::aview1(&self.bias);
        z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub dropout: Vec<f64>,
    /// Mean training loss per completed epoch.
    pub loss_trace: Vec<f64>,
}

/// Inverted-dropout masks for one batch, one `batch x width` matrix per
/// hidden layer. Entries are 0 or `1 / (1 - rate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    pub masks: Vec<Array2<f64>>,
}

/// Gradient with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub weights: Vec<Array2<f64>>,
    pub bias: Vec<Array1<f64>>,
}

impl MlpGradient {
    /// Flattened in [`Mlp::params`] order.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.bias) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}

impl Mlp {
    /// He-uniform weights, zero biases.
    pub fn init(n_inputs: usize, cfg: &MlpConfig, rng: &mut Rng) -> Self {
        let mut layers = Vec::new();
        let mut fan_in = n_inputs;
        for &w in cfg.hidden.iter().chain(std::iter::once(&1)) {
            let bound = (6.0 / fan_in.max(1) as f64).sqrt();
            let weights = (0..fan_in * w).map(|_| rng.random_range(-bound..bound)).collect();
            layers.push(Layer {
                inputs: fan_in,
                outputs: w,
                weights,
                bias: vec![0.0; w],
            });
            fan_in = w;
        }
        Self {
            layers,
            dropout: cfg.dropout.clone(),
            loss_trace: Vec::new(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend(&l.weights);
            out.extend(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
    }

    pub fn sample_masks(&self, batch: usize, rng: &mut Rng) -> DropoutMasks {
        let hidden = &self.layers[..self.layers.len() - 1];
        let masks = hidden
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let rate = self.dropout.get(k).copied().unwrap_or(0.0);
                let keep = 1.0 - rate;
                Array2::from_shape_fn((batch, l.outputs), |_| {
                    if rate == 0.0 || rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        DropoutMasks { masks }
    }

    fn logits(&self, x: &Array2<f64>, masks: Option<&DropoutMasks>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut acts = Vec::with_capacity(self.layers.len());
        acts.push(x.clone());
        for (k, l) in self.layers.iter().enumerate() {
            let z = l.forward(acts.last().unwrap());
            if k < last {
                let mut a = z.mapv(|v| v.max(0.0));
                if let Some(m) = masks {
                    a *= &m.masks[k];
                }
                acts.push(a);
            }
            pre.push(z);
        }
        (pre, acts)
    }

    /// Mean cross-entropy over the batch and its gradient. With `masks` the
    /// dropout pattern is held fixed, which makes the loss a smooth function
    /// of the parameters away from ReLU kinks.
    pub fn loss_and_gradient(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[u8],
        masks: Option<&DropoutMasks>,
    ) -> (f64, MlpGradient) {
        let x = x.to_owned();
        let n = y.len() as f64;
        let (pre, acts) = self.logits(&x, masks);
        let z_out = pre.last().unwrap().column(0).to_owned();
        let loss = z_out.iter().zip(y).map(|(&z, &t)| log_loss(t, z)).sum::<f64>() / n;

        let mut delta = Array2::from_shape_fn((y.len(), 1), |(i, _)| (sigmoid(z_out[i]) - y[i] as f64) / n);
        let mut gw = vec![Array2::zeros((0, 0)); self.layers.len()];
        let mut gb = vec![Array1::zeros(0); self.layers.len()];
        for k in (0..self.layers.len()).rev() {
            gw[k] = acts[k].t().dot(&delta);
            gb[k] = delta.sum_axis(Axis(0));
            if k == 0 {
                break;
            }
            let mut da = delta.dot(&self.layers[k].w().t());
            if let Some(m) = masks {
                da *= &m.masks[k - 1];
            }
            da.zip_mut_with(&pre[k - 1], |d, &z| {
                if z <= 0.0 {
                    *d = 0.0
                }
            });
            delta = da;
        }
        (loss, MlpGradient { weights: gw, bias: gb })
    }

    pub fn predict(&self, data: &TimeIndexedDataset) -> Vec<f64> {
        let mut out = Vec::with_capacity(data.n_rows());
        let width = data.n_features();
        for chunk in data.features().chunks(4096 * width.max(1)) {
            let rows = if width == 0 { 0 } else { chunk.len() / width };
            let x = ArrayView2::from_shape((rows, width), chunk).unwrap().to_owned();
            let (pre, _) = self.logits(&x, None);
            out.extend(pre.last().unwrap().column(0).iter().map(|&z| sigmoid(z)));
        }
        out
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let x = ArrayView2::from_shape((1, row.len()), row).unwrap().to_owned();
        let (pre, _) = self.logits(&x, None);
        sigmoid(pre.last().unwrap()[[0, 0]])
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &MlpConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grad[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            params[i] -= cfg.step_size * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + cfg.eps);
        }
    }
}

pub(crate) fn fit(train: &TimeIndexedDataset, cfg: &MlpConfig) -> Result<Mlp, LearnerError> {
    let mut rng = seed::rng(cfg.seed);
    let width = train.n_features();
    let mut net = Mlp::init(width, cfg, &mut rng);
    let mut params = net.params();
    let mut adam = Adam {
        m: vec![0.0; params.len()],
        v: vec![0.0; params.len()],
        t: 0,
    };
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let mut x = Array2::zeros((batch.len(), width));
            for (r, &i) in batch.iter().enumerate() {
                x.row_mut(r).assign(&ndarray::aview1(train.row(i)));
            }
            let y: Vec<u8> = batch.iter().map(|&i| train.labels[i]).collect();
            let masks = net.sample_masks(batch.len(), &mut rng);
            let (loss, grad) = net.loss_and_gradient(x.view(), &y, Some(&masks));
            let flat = grad.flat();
            if !loss.is_finite() || flat.iter().any(|g| !g.is_finite()) {
                return Err(LearnerError::Divergence { epoch });
            }
            total += loss * batch.len() as f64;
            adam.step(&mut params, &flat, cfg);
            net.set_params(&params);
        }
        let mean = total / train.n_rows() as f64;
        if !mean.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(LearnerError::Divergence { epoch });
        }
        net.loss_trace.push(mean);
    }
    Ok(net)
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fully connected ReLU network with a linear output layer.
///
/// All parameters live in one flat vector. Layer `l` maps `sizes[l]` inputs
/// to `sizes[l + 1]` outputs and stores its weights row-major
/// (`out x in`) followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Forward activations kept for backpropagation. `acts[0]` is the input and
/// `acts[L]` the Q-vector.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("cache always holds the input")
    }
}

fn n_params(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl QNetwork {
    /// Layer widths `input, hidden..., output`, with all parameters zero.
    pub fn zeros(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidDqn(format!("bad layer sizes {sizes:?}")));
        }
        let params = vec![0.0; n_params(&sizes)];
        Ok(QNetwork { sizes, params })
    }

    /// He-uniform weights, zero biases.
    pub fn he_uniform<R: Rng + ?Sized>(sizes: Vec<usize>, rng: &mut R) -> Result<Self> {
        let mut net = QNetwork::zeros(sizes)?;
        let mut offset = 0;
        for l in 0..net.n_layers() {
            let (fan_in, fan_out) = (net.sizes[l], net.sizes[l + 1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            for w in &mut net.params[offset..offset + fan_in * fan_out] {
                *w = rng.gen_range(-limit..limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// `(weights, biases)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let offset = self.layer_offset(l);
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        (
            &self.params[offset..offset + i * o],
            &self.params[offset + i * o..offset + i * o + o],
        )
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let offset = self.layer_offset(l);
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let (w, rest) = self.params[offset..].split_at_mut(i * o);
        (w, &mut rest[..o])
    }

    fn layer_offset(&self, l: usize) -> usize {
        n_params(&self.sizes[..=l])
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.acts.pop().unwrap())
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.input_dim() {
            return Err(Error::LengthMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.to_vec());
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let input = &acts[l];
            let n_in = input.len();
            let out: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(o, &bias)| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    let z = bias + dot(row, input);
                    if l == last {
                        z
                    } else {
                        z.max(0.0)
                    }
                })
                .collect();
            acts.push(out);
        }
        Ok(ForwardCache { acts })
    }

    /// Adds `d loss / d params` to `grad`, given `d loss / d output` at the
    /// cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        debug_assert_eq!(d_out.len(), self.output_dim());
        let mut delta = d_out.to_vec();
        for l in (0..self.n_layers()).rev() {
            let offset = self.layer_offset(l);
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &cache.acts[l];
            let (gw, gb) = grad[offset..offset + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, x) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                    *g += d * x;
                }
            }
            if l == 0 {
                break;
            }
            let (w, _) = self.layer(l);
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wv) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *p += d * wv;
                }
            }
            // ReLU derivative from the post-activation value.
            for (p, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    pub fn same_architecture(&self, other: &QNetwork) -> bool {
        self.sizes == other.sizes
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn snapshot(&self) -> NetworkSnapshot {
        let layers = (0..self.n_layers())
            .flat_map(|l| {
                let (w, b) = self.layer(l);
                [
                    LayerSnapshot {
                        layer: l,
                        name: "weight".into(),
                        shape: vec![self.sizes[l + 1], self.sizes[l]],
                        values: w.to_vec(),
                    },
                    LayerSnapshot {
                        layer: l,
                        name: "bias".into(),
                        shape: vec![self.sizes[l + 1]],
                        values: b.to_vec(),
                    },
                ]
            })
            .collect();
        NetworkSnapshot {
            sizes: self.sizes.clone(),
            layers,
        }
    }

    pub fn from_snapshot(snap: &NetworkSnapshot) -> Result<Self> {
        let mut net = QNetwork::zeros(snap.sizes.clone())?;
        if snap.layers.len() != 2 * net.n_layers() {
            return Err(Error::ArchitectureMismatch);
        }
        for entry in &snap.layers {
            if entry.layer >= net.n_layers() {
                return Err(Error::ArchitectureMismatch);
            }
            let (w, b) = net.layer_mut(entry.layer);
            let dst = match entry.name.as_str() {
                "weight" => w,
                "bias" => b,
                _ => return Err(Error::ArchitectureMismatch),
            };
            if dst.len() != entry.values.len() {
                return Err(Error::ArchitectureMismatch);
            }
            dst.copy_from_slice(&entry.values);
        }
        Ok(net)
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// JSON weight dump: one entry per tensor, row-major values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub sizes: Vec<usize>,
    pub layers: Vec<LayerSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSnapshot {
    pub layer: usize,
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

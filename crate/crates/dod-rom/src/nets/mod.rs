//! Minimal dense neural-network stack: layers, fixed feature maps, the
//! clamp block, weight initialization, and architecture presets. The
//! reverse-mode machinery lives in [`tape`], the optimizer in [`adam`].

pub mod adam;
pub mod tape;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use tape::{gram_schmidt_diff, NodeId, Tape};

use crate::error::{dim_err, Error, Result};
use crate::linalg::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default negative slope of the leaky rectifier used at internal layers.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.1;

/// Non-learnable input feature maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMap {
    /// `[θ, x₀, y₀] ↦ [cos 4θ, sin 4θ, x₀, y₀]`, period π/2 in θ;
    /// used to enforce four-fold rotational symmetry of the first input.
    RotSym4,
}

impl FeatureMap {
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::RotSym4 => 3,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureMap::RotSym4 => 4,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeatureMap::RotSym4 => feature_rotsym(x),
        }
    }
}

/// `[θ, x₀, y₀] ↦ [cos 4θ, sin 4θ, x₀, y₀]`.
pub fn feature_rotsym(theta_xy: &[f64]) -> Vec<f64> {
    assert_eq!(theta_xy.len(), 3, "feature_rotsym expects a 3-vector");
    let t = 4.0 * theta_xy[0];
    vec![t.cos(), t.sin(), theta_xy[1], theta_xy[2]]
}

/// Leaky rectifier.
#[inline]
pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Clamp block `L(x) = 1 − ρ(2 − ρ(x + 1))` with ρ the plain rectifier:
/// identity on [−1, 1], squashes everything else to ±1, and 1-Lipschitz.
#[inline]
pub fn clamp_unit(x: f64) -> f64 {
    let relu = |v: f64| v.max(0.0);
    1.0 - relu(2.0 - relu(x + 1.0))
}

/// Architecture description, independent of the weights. Serializable,
/// so it doubles as the on-disk layer listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    Dense { input: usize, output: usize },
    LeakyRelu { slope: f64 },
    Clamp,
    Feature { map: FeatureMap },
    Reshape { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetSpec {
    pub fn new(input_dim: usize) -> Self {
        NetSpec {
            input_dim,
            layers: Vec::new(),
        }
    }

    fn current_dim(&self) -> usize {
        let mut dim = self.input_dim;
        for layer in &self.layers {
            dim = match layer {
                LayerSpec::Dense { output, .. } => *output,
                LayerSpec::Feature { map } => map.output_dim(),
                LayerSpec::Reshape { rows, cols } => rows * cols,
                _ => dim,
            };
        }
        dim
    }

    pub fn dense(mut self, output: usize) -> Self {
        let input = self.current_dim();
        self.layers.push(LayerSpec::Dense { input, output });
        self
    }

    pub fn leaky_relu(mut self, slope: f64) -> Self {
        self.layers.push(LayerSpec::LeakyRelu { slope });
        self
    }

    pub fn clamp(mut self) -> Self {
        self.layers.push(LayerSpec::Clamp);
        self
    }

    pub fn feature(mut self, map: FeatureMap) -> Self {
        self.layers.push(LayerSpec::Feature { map });
        self
    }

    pub fn reshape(mut self, rows: usize, cols: usize) -> Self {
        self.layers.push(LayerSpec::Reshape { rows, cols });
        self
    }

    pub fn output_dim(&self) -> usize {
        self.current_dim()
    }

    /// Checks the dimension chain and the reshape consistency.
    pub fn validate(&self) -> Result<()> {
        let mut dim = self.input_dim;
        for (k, layer) in self.layers.iter().enumerate() {
            match layer {
                LayerSpec::Dense { input, output } => {
                    if *input != dim {
                        return Err(dim_err(format!(
                            "layer {k}: dense expects input {input}, chain carries {dim}"
                        )));
                    }
                    dim = *output;
                }
                LayerSpec::Feature { map } => {
                    if map.input_dim() != dim {
                        return Err(dim_err(format!(
                            "layer {k}: feature map expects input {}, chain carries {dim}",
                            map.input_dim()
                        )));
                    }
                    dim = map.output_dim();
                }
                LayerSpec::Reshape { rows, cols } => {
                    if rows * cols != dim {
                        return Err(dim_err(format!(
                            "layer {k}: reshape {rows}x{cols} on a length-{dim} vector"
                        )));
                    }
                }
                LayerSpec::LeakyRelu { .. } | LayerSpec::Clamp => {}
            }
        }
        Ok(())
    }

    /// Instantiates the network with freshly initialized weights.
    pub fn build(&self, rng: &mut ChaCha8Rng) -> Result<DenseNet> {
        self.validate()?;
        let layers = self
            .layers
            .iter()
            .map(|spec| match spec {
                LayerSpec::Dense { input, output } => Layer::Dense(DenseLayer::init(*input, *output, rng)),
                LayerSpec::LeakyRelu { slope } => Layer::LeakyRelu { slope: *slope },
                LayerSpec::Clamp => Layer::Clamp,
                LayerSpec::Feature { map } => Layer::Feature { map: *map },
                LayerSpec::Reshape { rows, cols } => Layer::Reshape {
                    rows: *rows,
                    cols: *cols,
                },
            })
            .collect();
        Ok(DenseNet {
            input_dim: self.input_dim,
            output_dim: self.output_dim(),
            layers,
        })
    }
}

/// Trainable affine layer `x ↦ Wx + b`, weights stored `output × input`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    /// Uniform init in `±√(6/(fan_in + fan_out))`.
    fn init(input: usize, output: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / (input + output) as f64).sqrt();
        let weights = Matrix::from_fn(output, input, |_, _| rng.gen_range(-bound..bound));
        DenseLayer {
            weights,
            biases: vec![0.0; output],
        }
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Dense(DenseLayer),
    LeakyRelu { slope: f64 },
    Clamp,
    Feature { map: FeatureMap },
    Reshape { rows: usize, cols: usize },
}

/// Feed-forward network: an ordered stack of layers with a fixed
/// input/output dimension. Values are immutable during inference and
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct DenseNet {
    input_dim: usize,
    output_dim: usize,
    layers: Vec<Layer>,
}

impl DenseNet {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Recovers the architecture description.
    pub fn spec(&self) -> NetSpec {
        NetSpec {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| match l {
                    Layer::Dense(d) => LayerSpec::Dense {
                        input: d.weights.cols(),
                        output: d.weights.rows(),
                    },
                    Layer::LeakyRelu { slope } => LayerSpec::LeakyRelu { slope: *slope },
                    Layer::Clamp => LayerSpec::Clamp,
                    Layer::Feature { map } => LayerSpec::Feature { map: *map },
                    Layer::Reshape { rows, cols } => LayerSpec::Reshape {
                        rows: *rows,
                        cols: *cols,
                    },
                })
                .collect(),
        }
    }

    /// Sequential forward application.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(dim_err(format!(
                "forward: input length {} vs declared {}",
                x.len(),
                self.input_dim
            )));
        }
        let mut cur = x.to_vec();
        for layer in &self.layers {
            cur = match layer {
                Layer::Dense(d) => {
                    let mut y = d.weights.matvec(&cur);
                    for (yi, bi) in y.iter_mut().zip(&d.biases) {
                        *yi += bi;
                    }
                    y
                }
                Layer::LeakyRelu { slope } => {
                    cur.iter().map(|&v| leaky_relu(v, *slope)).collect()
                }
                Layer::Clamp => cur.iter().map(|&v| clamp_unit(v)).collect(),
                Layer::Feature { map } => map.apply(&cur),
                Layer::Reshape { .. } => cur,
            };
        }
        Ok(cur)
    }

    /// Number of trainable parameters.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => d.weights.rows() * d.weights.cols() + d.biases.len(),
                _ => 0,
            })
            .sum()
    }

    /// Flattens parameters in declared order: per dense layer, weights
    /// column-major then biases. This is also the on-disk blob ordering.
    pub fn get_params(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            if let Layer::Dense(d) = layer {
                out.extend_from_slice(d.weights.data());
                out.extend_from_slice(&d.biases);
            }
        }
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(dim_err(format!(
                "set_params: got {} values, net has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            if let Layer::Dense(d) = layer {
                let wn = d.weights.rows() * d.weights.cols();
                let w = Matrix::from_col_major(
                    d.weights.rows(),
                    d.weights.cols(),
                    params[offset..offset + wn].to_vec(),
                )?;
                d.weights = w;
                offset += wn;
                let nb = d.biases.len();
                d.biases.copy_from_slice(&params[offset..offset + nb]);
                offset += nb;
            }
        }
        Ok(())
    }

    /// Registers this net's parameters on a tape, in flattening order.
    pub fn register_params(&self, tape: &mut Tape) -> Vec<NodeId> {
        let mut nodes = Vec::new();
        for layer in &self.layers {
            if let Layer::Dense(d) = layer {
                nodes.push(tape.param(
                    d.weights.data().to_vec(),
                    d.weights.rows(),
                    d.weights.cols(),
                ));
                nodes.push(tape.param(d.biases.clone(), d.biases.len(), 1));
            }
        }
        nodes
    }

    /// Records the forward pass on a tape. `param_nodes` must come from
    /// [`DenseNet::register_params`] on the same tape.
    pub fn forward_on_tape(
        &self,
        tape: &mut Tape,
        x: NodeId,
        param_nodes: &[NodeId],
    ) -> Result<NodeId> {
        let mut cur = x;
        let mut pi = 0;
        for layer in &self.layers {
            cur = match layer {
                Layer::Dense(_) => {
                    let w = param_nodes[pi];
                    let b = param_nodes[pi + 1];
                    pi += 2;
                    tape.affine(w, b, cur)?
                }
                Layer::LeakyRelu { slope } => tape.leaky_relu(cur, *slope),
                Layer::Clamp => tape.clamp_unit(cur),
                Layer::Feature { map } => tape.feature(cur, *map)?,
                Layer::Reshape { .. } => cur,
            };
        }
        Ok(cur)
    }
}

/// Seed/root architecture pairs for the adaptive-basis network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRootArch {
    pub seed: NetSpec,
    pub root: NetSpec,
}

/// Named presets for seed/root shapes.
///
/// * `eikonal-style`: seed `p ↦ 500 ↦ 50`, roots `50 ↦ 100 ↦ N_A`.
/// * `nstokes-style`: seed `p ↦* 4 ↦ 50` with the rotational-symmetry
///   feature map in front (requires `p = 3`), roots `50 ↦ 50 ↦ N_A`.
///
/// All internal layers use the 0.1-leaky rectifier; the seed keeps a
/// terminal activation, the roots do not.
pub fn dod_arch_preset(name: &str, p: usize, n_a: usize) -> Result<SeedRootArch> {
    match name {
        "eikonal-style" => Ok(SeedRootArch {
            seed: NetSpec::new(p)
                .dense(500)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(50)
                .leaky_relu(DEFAULT_LEAKY_SLOPE),
            root: NetSpec::new(50)
                .dense(100)
                .leaky_relu(DEFAULT_LEAKY_SLOPE)
                .dense(n_a),
        }),
        "nstokes-style" => {
            if p != 3 {
                return Err(Error::InvalidInput(format!(
                    "nstokes-style expects p = 3 (rotation + center), got {p}"
                )));
            }
            Ok(SeedRootArch {
                seed: NetSpec::new(p)
                    .feature(FeatureMap::RotSym4)
                    .dense(50)
                    .leaky_relu(DEFAULT_LEAKY_SLOPE),
                root: NetSpec::new(50)
                    .dense(50)
                    .leaky_relu(DEFAULT_LEAKY_SLOPE)
                    .dense(n_a),
            })
        }
        other => Err(Error::UnknownPreset(other.into())),
    }
}

/// Compact seed/root shapes for desk-scale problems: seed
/// `p ↦ w ↦ l`, roots `l ↦ w ↦ N_A`.
pub fn dod_arch_compact(p: usize, n_a: usize, width: usize, latent: usize) -> SeedRootArch {
    SeedRootArch {
        seed: NetSpec::new(p)
            .dense(width)
            .leaky_relu(DEFAULT_LEAKY_SLOPE)
            .dense(latent)
            .leaky_relu(DEFAULT_LEAKY_SLOPE),
        root: NetSpec::new(latent)
            .dense(width)
            .leaky_relu(DEFAULT_LEAKY_SLOPE)
            .dense(n_a),
    }
}

//! Reverse-mode differentiation over vector- and matrix-valued nodes.
//!
//! A [`Tape`] records one forward computation eagerly (values are
//! available as soon as a node is created) and is consumed by a single
//! backward sweep that visits every recorded operation exactly once in
//! reverse order. Trainable leaves are registered with [`Tape::param`];
//! their gradients come back as one flat vector in registration order,
//! matching the flattening used by `DenseNet::get_params`.

use super::FeatureMap;
use crate::error::{dim_err, Error, Result};
use crate::linalg::dot;

pub type NodeId = usize;

/// Pivot floor for the differentiable orthonormalization: a column
/// whose residual norm falls below this rejects the training step.
pub const GS_PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
struct Shape {
    rows: usize,
    cols: usize,
}

impl Shape {
    fn len(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug)]
enum Op {
    /// Trainable leaf; `slot` indexes the flat gradient layout.
    Param { slot: usize },
    /// Non-trainable data leaf.
    Constant,
    /// `y = Wx + b` with `W` of shape (out × in).
    Affine { w: NodeId, b: NodeId, x: NodeId },
    LeakyRelu { x: NodeId, slope: f64 },
    ClampUnit { x: NodeId },
    Feature { x: NodeId, map: FeatureMap },
    /// Matrix assembled from equal-length column vectors.
    StackCols { cols: Vec<NodeId> },
    /// Scalar `aᵀb`.
    Dot { a: NodeId, b: NodeId },
    /// `a − s·b` with scalar node `s`.
    SubScaled { a: NodeId, b: NodeId, s: NodeId },
    /// Scalar square root.
    Sqrt { x: NodeId },
    /// `x · (1/s)` with scalar node `s`.
    ScaleByInv { x: NodeId, s: NodeId },
    /// `mᵀ x` for a matrix node `m`.
    MatTVec { m: NodeId, x: NodeId },
    /// `m x` for a matrix node `m`.
    MatVec { m: NodeId, x: NodeId },
    /// `a − b`, elementwise.
    SubVec { a: NodeId, b: NodeId },
    /// Scalar `Σ xᵢ²`.
    SquaredNorm { x: NodeId },
    /// Columnwise-summed Hadamard product of two m×n stacks:
    /// `yⱼ = Σₖ a[ j·m + k ] · b[ j·m + k ]`.
    SegDiag { a: NodeId, b: NodeId, m: usize, n: usize },
    /// Scalar mean of scalar nodes.
    MeanScalars { xs: Vec<NodeId> },
    /// `c · x`, elementwise with a fixed constant.
    MulConst { x: NodeId, c: f64 },
}

pub struct Tape {
    ops: Vec<Op>,
    vals: Vec<Vec<f64>>,
    shapes: Vec<Shape>,
    /// Offset of each param slot in the flat gradient vector.
    param_offsets: Vec<usize>,
    param_len: usize,
    consumed: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            ops: Vec::new(),
            vals: Vec::new(),
            shapes: Vec::new(),
            param_offsets: Vec::new(),
            param_len: 0,
            consumed: false,
        }
    }

    fn push(&mut self, op: Op, value: Vec<f64>, shape: Shape) -> NodeId {
        debug_assert_eq!(value.len(), shape.len());
        self.ops.push(op);
        self.vals.push(value);
        self.shapes.push(shape);
        self.ops.len() - 1
    }

    /// Registers a trainable leaf. Gradients are returned in
    /// registration order.
    pub fn param(&mut self, value: Vec<f64>, rows: usize, cols: usize) -> NodeId {
        let slot = self.param_offsets.len();
        self.param_offsets.push(self.param_len);
        self.param_len += value.len();
        self.push(Op::Param { slot }, value, Shape { rows, cols })
    }

    /// Registers a data leaf (no gradient).
    pub fn constant(&mut self, value: Vec<f64>) -> NodeId {
        let rows = value.len();
        self.push(Op::Constant, value, Shape { rows, cols: 1 })
    }

    pub fn value(&self, node: NodeId) -> &[f64] {
        &self.vals[node]
    }

    pub fn scalar(&self, node: NodeId) -> f64 {
        debug_assert_eq!(self.shapes[node].len(), 1);
        self.vals[node][0]
    }

    pub fn affine(&mut self, w: NodeId, b: NodeId, x: NodeId) -> Result<NodeId> {
        let (out, inp) = (self.shapes[w].rows, self.shapes[w].cols);
        if self.shapes[x].len() != inp || self.shapes[b].len() != out {
            return Err(dim_err(format!(
                "affine: W is {out}x{inp}, |x| = {}, |b| = {}",
                self.shapes[x].len(),
                self.shapes[b].len()
            )));
        }
        let mut y = self.vals[b].clone();
        let wv = &self.vals[w];
        let xv = &self.vals[x];
        for (j, &xj) in xv.iter().enumerate() {
            let col = &wv[j * out..(j + 1) * out];
            for i in 0..out {
                y[i] += col[i] * xj;
            }
        }
        Ok(self.push(Op::Affine { w, b, x }, y, Shape { rows: out, cols: 1 }))
    }

    pub fn leaky_relu(&mut self, x: NodeId, slope: f64) -> NodeId {
        let y: Vec<f64> = self.vals[x]
            .iter()
            .map(|&v| super::leaky_relu(v, slope))
            .collect();
        let shape = self.shapes[x];
        self.push(Op::LeakyRelu { x, slope }, y, shape)
    }

    pub fn clamp_unit(&mut self, x: NodeId) -> NodeId {
        let y: Vec<f64> = self.vals[x].iter().map(|&v| super::clamp_unit(v)).collect();
        let shape = self.shapes[x];
        self.push(Op::ClampUnit { x }, y, shape)
    }

    pub fn feature(&mut self, x: NodeId, map: FeatureMap) -> Result<NodeId> {
        if self.shapes[x].len() != map.input_dim() {
            return Err(dim_err(format!(
                "feature map expects input {}, got {}",
                map.input_dim(),
                self.shapes[x].len()
            )));
        }
        let y = map.apply(&self.vals[x]);
        let rows = y.len();
        Ok(self.push(Op::Feature { x, map }, y, Shape { rows, cols: 1 }))
    }

    pub fn stack_cols(&mut self, cols: &[NodeId]) -> Result<NodeId> {
        let rows = self.shapes[cols[0]].len();
        let mut data = Vec::with_capacity(rows * cols.len());
        for &c in cols {
            if self.shapes[c].len() != rows {
                return Err(dim_err("stack_cols: ragged columns"));
            }
            data.extend_from_slice(&self.vals[c]);
        }
        let n = cols.len();
        Ok(self.push(
            Op::StackCols {
                cols: cols.to_vec(),
            },
            data,
            Shape { rows, cols: n },
        ))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = dot(&self.vals[a], &self.vals[b]);
        self.push(Op::Dot { a, b }, vec![v], Shape { rows: 1, cols: 1 })
    }

    pub fn sub_scaled(&mut self, a: NodeId, b: NodeId, s: NodeId) -> NodeId {
        let sv = self.vals[s][0];
        let y: Vec<f64> = self.vals[a]
            .iter()
            .zip(&self.vals[b])
            .map(|(x, z)| x - sv * z)
            .collect();
        let shape = self.shapes[a];
        self.push(Op::SubScaled { a, b, s }, y, shape)
    }

    pub fn sqrt(&mut self, x: NodeId) -> NodeId {
        let v = self.vals[x][0].max(0.0).sqrt();
        self.push(Op::Sqrt { x }, vec![v], Shape { rows: 1, cols: 1 })
    }

    pub fn scale_by_inv(&mut self, x: NodeId, s: NodeId) -> NodeId {
        let inv = 1.0 / self.vals[s][0];
        let y: Vec<f64> = self.vals[x].iter().map(|&v| v * inv).collect();
        let shape = self.shapes[x];
        self.push(Op::ScaleByInv { x, s }, y, shape)
    }

    pub fn mat_tvec(&mut self, m: NodeId, x: NodeId) -> Result<NodeId> {
        let (rows, cols) = (self.shapes[m].rows, self.shapes[m].cols);
        if self.shapes[x].len() != rows {
            return Err(dim_err("mat_tvec: length mismatch"));
        }
        let mv = &self.vals[m];
        let xv = &self.vals[x];
        let y: Vec<f64> = (0..cols)
            .map(|j| dot(&mv[j * rows..(j + 1) * rows], xv))
            .collect();
        Ok(self.push(Op::MatTVec { m, x }, y, Shape { rows: cols, cols: 1 }))
    }

    pub fn mat_vec(&mut self, m: NodeId, x: NodeId) -> Result<NodeId> {
        let (rows, cols) = (self.shapes[m].rows, self.shapes[m].cols);
        if self.shapes[x].len() != cols {
            return Err(dim_err("mat_vec: length mismatch"));
        }
        let mv = &self.vals[m];
        let xv = &self.vals[x];
        let mut y = vec![0.0; rows];
        for (j, &xj) in xv.iter().enumerate() {
            let col = &mv[j * rows..(j + 1) * rows];
            for i in 0..rows {
                y[i] += col[i] * xj;
            }
        }
        Ok(self.push(Op::MatVec { m, x }, y, Shape { rows, cols: 1 }))
    }

    pub fn sub_vec(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.shapes[a].len() != self.shapes[b].len() {
            return Err(dim_err("sub_vec: length mismatch"));
        }
        let y: Vec<f64> = self.vals[a]
            .iter()
            .zip(&self.vals[b])
            .map(|(x, z)| x - z)
            .collect();
        let shape = self.shapes[a];
        Ok(self.push(Op::SubVec { a, b }, y, shape))
    }

    pub fn squared_norm(&mut self, x: NodeId) -> NodeId {
        let v = dot(&self.vals[x], &self.vals[x]);
        self.push(Op::SquaredNorm { x }, vec![v], Shape { rows: 1, cols: 1 })
    }

    /// `yⱼ = Σₖ a[j·m+k]·b[j·m+k]` for two flattened m×n stacks: the
    /// diagonal of the matrix product without materializing it.
    pub fn seg_diag(&mut self, a: NodeId, b: NodeId, m: usize, n: usize) -> Result<NodeId> {
        if self.shapes[a].len() != m * n || self.shapes[b].len() != m * n {
            return Err(dim_err(format!(
                "seg_diag: expected two {}-vectors, got {} and {}",
                m * n,
                self.shapes[a].len(),
                self.shapes[b].len()
            )));
        }
        let av = &self.vals[a];
        let bv = &self.vals[b];
        let y: Vec<f64> = (0..n)
            .map(|j| dot(&av[j * m..(j + 1) * m], &bv[j * m..(j + 1) * m]))
            .collect();
        Ok(self.push(Op::SegDiag { a, b, m, n }, y, Shape { rows: n, cols: 1 }))
    }

    pub fn mean_scalars(&mut self, xs: &[NodeId]) -> NodeId {
        let v = xs.iter().map(|&x| self.vals[x][0]).sum::<f64>() / xs.len() as f64;
        self.push(
            Op::MeanScalars { xs: xs.to_vec() },
            vec![v],
            Shape { rows: 1, cols: 1 },
        )
    }

    pub fn mul_const(&mut self, x: NodeId, c: f64) -> NodeId {
        let y: Vec<f64> = self.vals[x].iter().map(|&v| c * v).collect();
        let shape = self.shapes[x];
        self.push(Op::MulConst { x, c }, y, shape)
    }

    /// Reverse sweep from a scalar root. Returns the gradient with
    /// respect to every registered parameter, flattened in registration
    /// order. The tape is consumed; a second call is an error.
    pub fn backward(&mut self, root: NodeId) -> Result<Vec<f64>> {
        if self.consumed {
            return Err(Error::InvalidInput(
                "tape already consumed by a previous backward pass".into(),
            ));
        }
        self.consumed = true;
        if self.shapes[root].len() != 1 {
            return Err(dim_err("backward root must be a scalar"));
        }
        let mut adj: Vec<Vec<f64>> = self.shapes.iter().map(|s| vec![0.0; s.len()]).collect();
        adj[root][0] = 1.0;
        let mut grads = vec![0.0; self.param_len];

        for id in (0..=root).rev() {
            // Nodes after the root cannot influence it.
            let gbar = std::mem::take(&mut adj[id]);
            if gbar.iter().all(|&v| v == 0.0) {
                adj[id] = gbar;
                continue;
            }
            match &self.ops[id] {
                Op::Param { slot } => {
                    let off = self.param_offsets[*slot];
                    for (k, &v) in gbar.iter().enumerate() {
                        grads[off + k] += v;
                    }
                }
                Op::Constant => {}
                Op::Affine { w, b, x } => {
                    let out = self.shapes[*w].rows;
                    let xv = &self.vals[*x];
                    let wv = &self.vals[*w];
                    // b̄ += ȳ
                    for (bi, &gi) in adj[*b].iter_mut().zip(&gbar) {
                        *bi += gi;
                    }
                    // W̄ += ȳ xᵀ   (column j is ȳ · xⱼ)
                    {
                        let wadj = &mut adj[*w];
                        for (j, &xj) in xv.iter().enumerate() {
                            if xj == 0.0 {
                                continue;
                            }
                            let col = &mut wadj[j * out..(j + 1) * out];
                            for i in 0..out {
                                col[i] += gbar[i] * xj;
                            }
                        }
                    }
                    // x̄ += Wᵀ ȳ
                    {
                        let xadj = &mut adj[*x];
                        for (j, xj) in xadj.iter_mut().enumerate() {
                            *xj += dot(&wv[j * out..(j + 1) * out], &gbar);
                        }
                    }
                }
                Op::LeakyRelu { x, slope } => {
                    let xv = &self.vals[*x];
                    let xadj = &mut adj[*x];
                    for i in 0..gbar.len() {
                        let d = if xv[i] >= 0.0 { 1.0 } else { *slope };
                        xadj[i] += d * gbar[i];
                    }
                }
                Op::ClampUnit { x } => {
                    let xv = &self.vals[*x];
                    let xadj = &mut adj[*x];
                    for i in 0..gbar.len() {
                        // dL/dx = ρ'(2 − ρ(x+1)) · ρ'(x+1): one inside (−1, 1).
                        let a = (xv[i] + 1.0).max(0.0);
                        let d = if xv[i] + 1.0 > 0.0 && 2.0 - a > 0.0 {
                            1.0
                        } else {
                            0.0
                        };
                        xadj[i] += d * gbar[i];
                    }
                }
                Op::Feature { x, map } => match map {
                    FeatureMap::RotSym4 => {
                        let t = 4.0 * self.vals[*x][0];
                        let xadj = &mut adj[*x];
                        xadj[0] += -4.0 * t.sin() * gbar[0] + 4.0 * t.cos() * gbar[1];
                        xadj[1] += gbar[2];
                        xadj[2] += gbar[3];
                    }
                },
                Op::StackCols { cols } => {
                    let rows = self.shapes[id].rows;
                    for (j, &c) in cols.iter().enumerate() {
                        let cadj = &mut adj[c];
                        for i in 0..rows {
                            cadj[i] += gbar[j * rows + i];
                        }
                    }
                }
                Op::Dot { a, b } => {
                    let s = gbar[0];
                    let (av, bv) = (self.vals[*a].clone(), self.vals[*b].clone());
                    for (x, &v) in adj[*a].iter_mut().zip(&bv) {
                        *x += s * v;
                    }
                    for (x, &v) in adj[*b].iter_mut().zip(&av) {
                        *x += s * v;
                    }
                }
                Op::SubScaled { a, b, s } => {
                    let sv = self.vals[*s][0];
                    let bv = self.vals[*b].clone();
                    for (x, &g) in adj[*a].iter_mut().zip(&gbar) {
                        *x += g;
                    }
                    for (x, &g) in adj[*b].iter_mut().zip(&gbar) {
                        // filled below with −s·g; keep slope separated for clarity
                        *x += -sv * g;
                    }
                    adj[*s][0] += -dot(&bv, &gbar);
                }
                Op::Sqrt { x } => {
                    let y = self.vals[id][0];
                    if y > 0.0 {
                        adj[*x][0] += gbar[0] / (2.0 * y);
                    }
                }
                Op::ScaleByInv { x, s } => {
                    let sv = self.vals[*s][0];
                    let inv = 1.0 / sv;
                    let xv = self.vals[*x].clone();
                    for (xa, &g) in adj[*x].iter_mut().zip(&gbar) {
                        *xa += g * inv;
                    }
                    adj[*s][0] += -inv * inv * dot(&xv, &gbar);
                }
                Op::MatTVec { m, x } => {
                    let rows = self.shapes[*m].rows;
                    let xv = self.vals[*x].clone();
                    let mv = self.vals[*m].clone();
                    {
                        let madj = &mut adj[*m];
                        for (j, &gj) in gbar.iter().enumerate() {
                            if gj == 0.0 {
                                continue;
                            }
                            let col = &mut madj[j * rows..(j + 1) * rows];
                            for i in 0..rows {
                                col[i] += gj * xv[i];
                            }
                        }
                    }
                    {
                        let xadj = &mut adj[*x];
                        for (j, &gj) in gbar.iter().enumerate() {
                            if gj == 0.0 {
                                continue;
                            }
                            let col = &mv[j * rows..(j + 1) * rows];
                            for i in 0..rows {
                                xadj[i] += gj * col[i];
                            }
                        }
                    }
                }
                Op::MatVec { m, x } => {
                    let rows = self.shapes[*m].rows;
                    let cols = self.shapes[*m].cols;
                    let xv = self.vals[*x].clone();
                    let mv = self.vals[*m].clone();
                    {
                        let madj = &mut adj[*m];
                        for j in 0..cols {
                            if xv[j] == 0.0 {
                                continue;
                            }
                            let col = &mut madj[j * rows..(j + 1) * rows];
                            for i in 0..rows {
                                col[i] += gbar[i] * xv[j];
                            }
                        }
                    }
                    {
                        let xadj = &mut adj[*x];
                        for (j, xa) in xadj.iter_mut().enumerate() {
                            *xa += dot(&mv[j * rows..(j + 1) * rows], &gbar);
                        }
                    }
                }
                Op::SubVec { a, b } => {
                    for (x, &g) in adj[*a].iter_mut().zip(&gbar) {
                        *x += g;
                    }
                    for (x, &g) in adj[*b].iter_mut().zip(&gbar) {
                        *x -= g;
                    }
                }
                Op::SquaredNorm { x } => {
                    let s = gbar[0];
                    let xv = self.vals[*x].clone();
                    for (xa, &v) in adj[*x].iter_mut().zip(&xv) {
                        *xa += 2.0 * s * v;
                    }
                }
                Op::SegDiag { a, b, m, n } => {
                    let (m, n) = (*m, *n);
                    let av = self.vals[*a].clone();
                    let bv = self.vals[*b].clone();
                    for j in 0..n {
                        let gj = gbar[j];
                        if gj == 0.0 {
                            continue;
                        }
                        {
                            let aadj = &mut adj[*a];
                            for k in 0..m {
                                aadj[j * m + k] += gj * bv[j * m + k];
                            }
                        }
                        {
                            let badj = &mut adj[*b];
                            for k in 0..m {
                                badj[j * m + k] += gj * av[j * m + k];
                            }
                        }
                    }
                }
                Op::MeanScalars { xs } => {
                    let g = gbar[0] / xs.len() as f64;
                    for &x in xs {
                        adj[x][0] += g;
                    }
                }
                Op::MulConst { x, c } => {
                    for (xa, &g) in adj[*x].iter_mut().zip(&gbar) {
                        *xa += c * g;
                    }
                }
            }
            adj[id] = gbar;
        }
        Ok(grads)
    }
}

/// Differentiable modified Gram-Schmidt on tape-resident columns, with
/// one reorthogonalization pass. Mirrors the numeric path used at
/// inference so both produce the same floats for the same input.
///
/// Returns the matrix node of the orthonormalized stack. A pivot norm
/// below [`GS_PIVOT_TOL`] rejects the step with `NearRankDeficient`.
pub fn gram_schmidt_diff(tape: &mut Tape, cols: &[NodeId]) -> Result<NodeId> {
    let mut q: Vec<NodeId> = Vec::with_capacity(cols.len());
    for (j, &c) in cols.iter().enumerate() {
        let mut v = c;
        for _pass in 0..2 {
            for &qk in q.iter().take(j) {
                let r = tape.dot(qk, v);
                v = tape.sub_scaled(v, qk, r);
            }
        }
        let nrm2 = tape.dot(v, v);
        let nrm = tape.sqrt(nrm2);
        let pivot = tape.scalar(nrm);
        if !(pivot > GS_PIVOT_TOL) {
            return Err(Error::NearRankDeficient { col: j, pivot });
        }
        q.push(tape.scale_by_inv(v, nrm));
    }
    tape.stack_cols(&q)
}

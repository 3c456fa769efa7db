//! Define-by-run computation graph with reverse-mode gradients. Supports
//! the node types the stance models need: matrix-vector products, element
//! ops, concatenation, dropout, embedding row gathers, and fused softmax
//! cross-entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Handle to a parameter tensor inside a [`ParamSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamId(pub usize);

/// Named trainable tensors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor) -> ParamId {
        self.names.push(name.into());
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    /// Total number of scalar parameters.
    pub fn total_values(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }

    /// All values in registration order (artifact payload order).
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Restore values from a flat payload; shapes must already match.
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.total_values() {
            return Err(Error::ShapeMismatch(format!(
                "parameter payload has {} values, expected {}",
                flat.len(),
                self.total_values()
            )));
        }
        let mut cursor = 0;
        for tensor in &mut self.tensors {
            let n = tensor.numel();
            tensor.data.copy_from_slice(&flat[cursor..cursor + n]);
            cursor += n;
        }
        Ok(())
    }

    /// Shapes in registration order.
    pub fn shapes(&self) -> Vec<(String, Vec<usize>)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .map(|(n, t)| (n.clone(), t.shape.clone()))
            .collect()
    }
}

/// Gradient buffers aligned with a [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradStore {
    pub grads: Vec<Tensor>,
}

impl GradStore {
    pub fn zeros_of(params: &ParamSet) -> Self {
        GradStore {
            grads: params
                .ids()
                .map(|id| Tensor::zeros(&params.get(id).shape))
                .collect(),
        }
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }

    pub fn zero(&mut self) {
        for g in &mut self.grads {
            g.data.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.grads {
            g.data.iter_mut().for_each(|x| *x *= factor);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(ParamId),
    MatVec { w: NodeId, x: NodeId },
    Add { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Sigmoid { x: NodeId },
    Tanh { x: NodeId },
    Relu { x: NodeId },
    Concat { parts: Vec<NodeId> },
    Dropout { x: NodeId, mask: Vec<f64> },
    Gather { table: NodeId, row: usize },
    Scale { x: NodeId, factor: f64 },
    SoftmaxXent { logits: NodeId, gold: usize, probs: Vec<f64> },
}

struct Node {
    op: Op,
    value: Tensor,
}

/// A recorded forward pass over borrowed parameters.
pub struct Graph<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Graph {
            params,
            nodes: Vec::new(),
        }
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn data(&self, id: NodeId) -> &[f64] {
        match &self.nodes[id.0].op {
            Op::Param(pid) => &self.params.get(*pid).data,
            _ => &self.nodes[id.0].value.data,
        }
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        match &self.nodes[id.0].op {
            Op::Param(pid) => &self.params.get(*pid).shape,
            _ => &self.nodes[id.0].value.shape,
        }
    }

    pub fn input(&mut self, tensor: Tensor) -> NodeId {
        self.push(Op::Input, tensor)
    }

    pub fn param(&mut self, id: ParamId) -> NodeId {
        self.push(Op::Param(id), Tensor::zeros(&[0]))
    }

    /// `w [out, in] * x [in] -> [out]`
    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> NodeId {
        let w_shape = self.shape(w).to_vec();
        assert_eq!(w_shape.len(), 2, "matvec weight must be 2-d");
        let (out_dim, in_dim) = (w_shape[0], w_shape[1]);
        assert_eq!(self.data(x).len(), in_dim, "matvec input dim mismatch");
        let mut out = vec![0.0; out_dim];
        {
            let wd = self.data(w);
            let xd = self.data(x);
            for (i, o) in out.iter_mut().enumerate() {
                let row = &wd[i * in_dim..(i + 1) * in_dim];
                *o = row.iter().zip(xd).map(|(a, b)| a * b).sum();
            }
        }
        self.push(Op::MatVec { w, x }, Tensor::vector(out))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let out: Vec<f64> = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x + y).collect();
        assert_eq!(self.data(a).len(), self.data(b).len(), "add dim mismatch");
        self.push(Op::Add { a, b }, Tensor::vector(out))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_eq!(self.data(a).len(), self.data(b).len(), "mul dim mismatch");
        let out: Vec<f64> = self.data(a).iter().zip(self.data(b)).map(|(x, y)| x * y).collect();
        self.push(Op::Mul { a, b }, Tensor::vector(out))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let out: Vec<f64> = self.data(x).iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect();
        self.push(Op::Sigmoid { x }, Tensor::vector(out))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let out: Vec<f64> = self.data(x).iter().map(|v| v.tanh()).collect();
        self.push(Op::Tanh { x }, Tensor::vector(out))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let out: Vec<f64> = self.data(x).iter().map(|v| v.max(0.0)).collect();
        self.push(Op::Relu { x }, Tensor::vector(out))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(self.data(p));
        }
        self.push(
            Op::Concat {
                parts: parts.to_vec(),
            },
            Tensor::vector(out),
        )
    }

    /// Apply a precomputed dropout mask (entries 0 or 1/(1-rate)).
    pub fn dropout(&mut self, x: NodeId, mask: Vec<f64>) -> NodeId {
        assert_eq!(self.data(x).len(), mask.len(), "dropout mask dim mismatch");
        let out: Vec<f64> = self.data(x).iter().zip(&mask).map(|(v, m)| v * m).collect();
        self.push(Op::Dropout { x, mask }, Tensor::vector(out))
    }

    /// Row lookup into a `[rows, dim]` table node.
    pub fn gather(&mut self, table: NodeId, row: usize) -> NodeId {
        let shape = self.shape(table).to_vec();
        assert_eq!(shape.len(), 2, "gather table must be 2-d");
        let dim = shape[1];
        assert!(row < shape[0], "gather row out of range");
        let out = self.data(table)[row * dim..(row + 1) * dim].to_vec();
        self.push(Op::Gather { table, row }, Tensor::vector(out))
    }

    pub fn scale(&mut self, x: NodeId, factor: f64) -> NodeId {
        let out: Vec<f64> = self.data(x).iter().map(|v| v * factor).collect();
        self.push(Op::Scale { x, factor }, Tensor::vector(out))
    }

    /// Numerically stable softmax cross-entropy against a gold class;
    /// produces a scalar loss node.
    pub fn softmax_xent(&mut self, logits: NodeId, gold: usize) -> NodeId {
        let probs = super::stable_softmax(self.data(logits));
        let loss = -(probs[gold].max(f64::MIN_POSITIVE)).ln();
        self.push(
            Op::SoftmaxXent {
                logits,
                gold,
                probs,
            },
            Tensor::vector(vec![loss]),
        )
    }

    /// Class probabilities recorded by a softmax-xent node.
    pub fn probabilities(&self, node: NodeId) -> Option<&[f64]> {
        match &self.nodes[node.0].op {
            Op::SoftmaxXent { probs, .. } => Some(probs),
            _ => None,
        }
    }

    /// Reverse-mode sweep from a scalar loss node, accumulating parameter
    /// gradients into `grads`.
    pub fn backward(&self, loss: NodeId, grads: &mut GradStore) {
        assert_eq!(self.data(loss).len(), 1, "backward needs a scalar loss");
        let mut node_grads: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, _)| vec![0.0; self.data(NodeId(i)).len()])
            .collect();
        node_grads[loss.0][0] = 1.0;

        for idx in (0..=loss.0).rev() {
            let grad = std::mem::take(&mut node_grads[idx]);
            if grad.iter().all(|&g| g == 0.0) {
                continue;
            }
            match &self.nodes[idx].op {
                Op::Input => {}
                Op::Param(pid) => {
                    for (g, acc) in grad.iter().zip(grads.grads[pid.0].data.iter_mut()) {
                        *acc += g;
                    }
                }
                Op::MatVec { w, x } => {
                    let in_dim = self.shape(*w)[1];
                    let wd = self.data(*w);
                    let xd = self.data(*x);
                    {
                        let gw = &mut node_grads[w.0];
                        for (i, gi) in grad.iter().enumerate() {
                            if *gi == 0.0 {
                                continue;
                            }
                            let row = &mut gw[i * in_dim..(i + 1) * in_dim];
                            for (slot, xv) in row.iter_mut().zip(xd) {
                                *slot += gi * xv;
                            }
                        }
                    }
                    {
                        let gx = &mut node_grads[x.0];
                        for (i, gi) in grad.iter().enumerate() {
                            if *gi == 0.0 {
                                continue;
                            }
                            let row = &wd[i * in_dim..(i + 1) * in_dim];
                            for (slot, wv) in gx.iter_mut().zip(row) {
                                *slot += gi * wv;
                            }
                        }
                    }
                }
                Op::Add { a, b } => {
                    for (slot, g) in node_grads[a.0].iter_mut().zip(&grad) {
                        *slot += g;
                    }
                    for (slot, g) in node_grads[b.0].iter_mut().zip(&grad) {
                        *slot += g;
                    }
                }
                Op::Mul { a, b } => {
                    let bd: Vec<f64> = self.data(*b).to_vec();
                    let ad: Vec<f64> = self.data(*a).to_vec();
                    for ((slot, g), bv) in node_grads[a.0].iter_mut().zip(&grad).zip(&bd) {
                        *slot += g * bv;
                    }
                    for ((slot, g), av) in node_grads[b.0].iter_mut().zip(&grad).zip(&ad) {
                        *slot += g * av;
                    }
                }
                Op::Sigmoid { x } => {
                    let y = &self.nodes[idx].value.data;
                    for ((slot, g), yv) in node_grads[x.0].iter_mut().zip(&grad).zip(y) {
                        *slot += g * yv * (1.0 - yv);
                    }
                }
                Op::Tanh { x } => {
                    let y = &self.nodes[idx].value.data;
                    for ((slot, g), yv) in node_grads[x.0].iter_mut().zip(&grad).zip(y) {
                        *slot += g * (1.0 - yv * yv);
                    }
                }
                Op::Relu { x } => {
                    let y = &self.nodes[idx].value.data;
                    for ((slot, g), yv) in node_grads[x.0].iter_mut().zip(&grad).zip(y) {
                        if *yv > 0.0 {
                            *slot += g;
                        }
                    }
                }
                Op::Concat { parts } => {
                    let mut cursor = 0;
                    for &p in parts {
                        let len = self.data(p).len();
                        for (slot, g) in node_grads[p.0].iter_mut().zip(&grad[cursor..cursor + len])
                        {
                            *slot += g;
                        }
                        cursor += len;
                    }
                }
                Op::Dropout { x, mask } => {
                    for ((slot, g), m) in node_grads[x.0].iter_mut().zip(&grad).zip(mask) {
                        *slot += g * m;
                    }
                }
                Op::Gather { table, row } => {
                    let dim = grad.len();
                    let target = &mut node_grads[table.0][row * dim..(row + 1) * dim];
                    for (slot, g) in target.iter_mut().zip(&grad) {
                        *slot += g;
                    }
                }
                Op::Scale { x, factor } => {
                    for (slot, g) in node_grads[x.0].iter_mut().zip(&grad) {
                        *slot += g * factor;
                    }
                }
                Op::SoftmaxXent {
                    logits,
                    gold,
                    probs,
                } => {
                    let g = grad[0];
                    for (i, (slot, p)) in node_grads[logits.0].iter_mut().zip(probs).enumerate() {
                        let target = if i == *gold { 1.0 } else { 0.0 };
                        *slot += g * (p - target);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_forward_and_backward() {
        let mut params = ParamSet::new();
        let w = params.add("w", Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]));
        let mut g = Graph::new(&params);
        let wn = g.param(w);
        let x = g.input(Tensor::vector(vec![1.0, 1.0]));
        let y = g.matvec(wn, x);
        assert_eq!(g.data(y), &[3.0, 7.0]);

        // loss = sum(y) via matvec with a ones row.
        let ones = g.input(Tensor::from_vec(&[1, 2], vec![1.0, 1.0]));
        let loss = g.matvec(ones, y);
        let mut grads = GradStore::zeros_of(&params);
        g.backward(loss, &mut grads);
        // d(sum Wx)/dW = outer(1, x) = all ones.
        assert_eq!(grads.get(w).data, vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn unused_parameter_gets_zero_gradient() {
        let mut params = ParamSet::new();
        let used = params.add("used", Tensor::from_vec(&[1, 1], vec![2.0]));
        let unused = params.add("unused", Tensor::from_vec(&[1, 1], vec![5.0]));
        let mut g = Graph::new(&params);
        let wn = g.param(used);
        let x = g.input(Tensor::vector(vec![3.0]));
        let loss = g.matvec(wn, x);
        let mut grads = GradStore::zeros_of(&params);
        g.backward(loss, &mut grads);
        assert_eq!(grads.get(used).data, vec![3.0]);
        assert_eq!(grads.get(unused).data, vec![0.0]);
    }

    #[test]
    fn doubling_loss_doubles_gradients() {
        let mut params = ParamSet::new();
        let w = params.add("w", Tensor::from_vec(&[2, 2], vec![0.5, -1.0, 2.0, 0.1]));
        let run = |factor: f64, params: &ParamSet| -> Vec<f64> {
            let mut g = Graph::new(params);
            let wn = g.param(w);
            let x = g.input(Tensor::vector(vec![1.0, -2.0]));
            let y = g.matvec(wn, x);
            let s = g.sigmoid(y);
            let loss = g.softmax_xent(s, 0);
            let scaled = g.scale(loss, factor);
            let mut grads = GradStore::zeros_of(params);
            g.backward(scaled, &mut grads);
            grads.get(w).data.clone()
        };
        let g1 = run(1.0, &params);
        let g2 = run(2.0, &params);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((2.0 * a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn softmax_xent_values() {
        let params = ParamSet::new();
        let mut g = Graph::new(&params);
        let logits = g.input(Tensor::vector(vec![0.0; 4]));
        let loss = g.softmax_xent(logits, 2);
        assert!((g.data(loss)[0] - 4.0f64.ln()).abs() < 1e-12);
        let probs = g.probabilities(loss).unwrap();
        assert!(probs.iter().all(|p| (p - 0.25).abs() < 1e-12));

        // Huge logits must not overflow.
        let mut g = Graph::new(&params);
        let logits = g.input(Tensor::vector(vec![1000.0, 0.0]));
        let loss = g.softmax_xent(logits, 0);
        assert!(g.data(loss)[0].is_finite());
        let probs = g.probabilities(loss).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariance() {
        let params = ParamSet::new();
        let mut g = Graph::new(&params);
        let a = g.input(Tensor::vector(vec![1.0, 2.0, 3.0, 4.0]));
        let la = g.softmax_xent(a, 1);
        let b = g.input(Tensor::vector(vec![101.0, 102.0, 103.0, 104.0]));
        let lb = g.softmax_xent(b, 1);
        let pa = g.probabilities(la).unwrap();
        let pb = g.probabilities(lb).unwrap();
        for (x, y) in pa.iter().zip(pb) {
            assert!((x - y).abs() < 1e-12);
        }
        let sum: f64 = pa.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gather_routes_gradients_to_rows() {
        let mut params = ParamSet::new();
        let table = params.add("emb", Tensor::from_vec(&[3, 2], vec![1., 2., 3., 4., 5., 6.]));
        let mut g = Graph::new(&params);
        let tn = g.param(table);
        let row = g.gather(tn, 1);
        assert_eq!(g.data(row), &[3.0, 4.0]);
        let ones = g.input(Tensor::from_vec(&[1, 2], vec![1.0, 1.0]));
        let loss = g.matvec(ones, row);
        let mut grads = GradStore::zeros_of(&params);
        g.backward(loss, &mut grads);
        assert_eq!(grads.get(table).data, vec![0., 0., 1., 1., 0., 0.]);
    }
}

use std::collections::HashMap;

use super::params::check_param_count;
use super::{GradStore, NumericsError, ParamId, ParameterSet, Tensor};

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op {
    /// Constant or parameter leaf. Parameter leaves receive gradients.
    Leaf { param: Option<ParamId> },
    /// `[W (r x c), x (c)] -> (r)`
    MatVec,
    Add,
    Mul,
    Sigmoid,
    Tanh,
    /// Stable vector softmax (max subtraction).
    Softmax,
    /// n-ary vector concatenation.
    Concat,
    Slice { start: usize, len: usize },
    /// Row select from a matrix: differentiable embedding lookup.
    Row { index: usize },
    /// `[a (n), b (n)] -> (1)`
    Dot,
    /// Sum of all elements -> scalar.
    Sum,
    ScaleConst { factor: f64 },
    /// `[s (1), v (n)] -> (n)`
    ScaleBy,
    /// Cross-entropy against a single class: `-log softmax(logits)[target]`.
    Nll { target: usize },
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    inputs: Vec<NodeId>,
    value: Tensor,
}

/// Wengert tape with eager evaluation.
///
/// Values are computed as nodes are created; creation order is a topological
/// order, so [`Graph::backward`] is a single reverse sweep. Gradients sum
/// across fan-out, which is what parameter sharing requires.
pub struct Graph {
    nodes: Vec<Node>,
    param_nodes: HashMap<ParamId, NodeId>,
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new(), param_nodes: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, inputs: Vec<NodeId>, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, inputs, value });
        NodeId(self.nodes.len() - 1)
    }

    /// Constant leaf; never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf { param: None }, vec![], value)
    }

    /// Parameter leaf. The same id always maps to the same node within one
    /// graph, so every use shares one gradient slot.
    pub fn param(&mut self, params: &ParameterSet, id: ParamId) -> NodeId {
        if let Some(&n) = self.param_nodes.get(&id) {
            return n;
        }
        let value = params.get(id).clone();
        let node = self.push(Op::Leaf { param: Some(id) }, vec![], value);
        self.param_nodes.insert(id, node);
        node
    }

    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> Result<NodeId, NumericsError> {
        let (wt, xt) = (self.value(w), self.value(x));
        if !wt.is_matrix() || !xt.is_vector() || wt.cols() != xt.len() {
            return Err(NumericsError::Shape(format!(
                "matvec {:?} x {:?}",
                wt.shape(),
                xt.shape()
            )));
        }
        let (r, c) = (wt.rows(), wt.cols());
        let mut out = vec![0.0; r];
        let wd = wt.data();
        let xd = xt.data();
        for i in 0..r {
            let row = &wd[i * c..(i + 1) * c];
            let mut acc = 0.0;
            for j in 0..c {
                acc += row[j] * xd[j];
            }
            out[i] = acc;
        }
        Ok(self.push(Op::MatVec, vec![w, x], Tensor::vector(out)))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericsError> {
        let (at, bt) = (self.value(a), self.value(b));
        if at.shape() != bt.shape() {
            return Err(NumericsError::Shape(format!(
                "add {:?} + {:?}",
                at.shape(),
                bt.shape()
            )));
        }
        let data = at.data().iter().zip(bt.data()).map(|(x, y)| x + y).collect();
        let shape = at.shape().to_vec();
        let value = Tensor::from_vec(&shape, data)?;
        Ok(self.push(Op::Add, vec![a, b], value))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericsError> {
        let (at, bt) = (self.value(a), self.value(b));
        if at.shape() != bt.shape() {
            return Err(NumericsError::Shape(format!(
                "mul {:?} * {:?}",
                at.shape(),
                bt.shape()
            )));
        }
        let data = at.data().iter().zip(bt.data()).map(|(x, y)| x * y).collect();
        let shape = at.shape().to_vec();
        let value = Tensor::from_vec(&shape, data)?;
        Ok(self.push(Op::Mul, vec![a, b], value))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let data = self.value(x).data().iter().map(|&v| sigmoid(v)).collect();
        let shape = self.value(x).shape().to_vec();
        self.push(Op::Sigmoid, vec![x], Tensor::from_vec(&shape, data).unwrap())
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let data = self.value(x).data().iter().map(|&v| v.tanh()).collect();
        let shape = self.value(x).shape().to_vec();
        self.push(Op::Tanh, vec![x], Tensor::from_vec(&shape, data).unwrap())
    }

    pub fn softmax(&mut self, x: NodeId) -> Result<NodeId, NumericsError> {
        let xt = self.value(x);
        if xt.is_empty() {
            return Err(NumericsError::Domain("softmax of empty vector".into()));
        }
        let value = Tensor::vector(softmax_values(xt.data()));
        Ok(self.push(Op::Softmax, vec![x], value))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId, NumericsError> {
        if parts.is_empty() {
            return Err(NumericsError::Domain("concat of zero vectors".into()));
        }
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            if !t.is_vector() {
                return Err(NumericsError::Shape(format!(
                    "concat expects vectors, got {:?}",
                    t.shape()
                )));
            }
            data.extend_from_slice(t.data());
        }
        Ok(self.push(Op::Concat, parts.to_vec(), Tensor::vector(data)))
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> Result<NodeId, NumericsError> {
        let xt = self.value(x);
        if !xt.is_vector() || start + len > xt.len() {
            return Err(NumericsError::Shape(format!(
                "slice [{start}..{}] of {:?}",
                start + len,
                xt.shape()
            )));
        }
        let data = xt.data()[start..start + len].to_vec();
        Ok(self.push(Op::Slice { start, len }, vec![x], Tensor::vector(data)))
    }

    /// Differentiable row select; the gradient scatters into the chosen row.
    pub fn row(&mut self, m: NodeId, index: usize) -> Result<NodeId, NumericsError> {
        let mt = self.value(m);
        if !mt.is_matrix() {
            return Err(NumericsError::Shape(format!("row of {:?}", mt.shape())));
        }
        if index >= mt.rows() {
            return Err(NumericsError::Contract(format!(
                "row index {index} out of range for {} rows",
                mt.rows()
            )));
        }
        let c = mt.cols();
        let data = mt.data()[index * c..(index + 1) * c].to_vec();
        Ok(self.push(Op::Row { index }, vec![m], Tensor::vector(data)))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericsError> {
        let (at, bt) = (self.value(a), self.value(b));
        if at.shape() != bt.shape() || !at.is_vector() {
            return Err(NumericsError::Shape(format!(
                "dot {:?} . {:?}",
                at.shape(),
                bt.shape()
            )));
        }
        let v = at.data().iter().zip(bt.data()).map(|(x, y)| x * y).sum();
        Ok(self.push(Op::Dot, vec![a, b], Tensor::scalar(v)))
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).data().iter().sum();
        self.push(Op::Sum, vec![x], Tensor::scalar(v))
    }

    pub fn scale_const(&mut self, x: NodeId, factor: f64) -> NodeId {
        let data = self.value(x).data().iter().map(|v| v * factor).collect();
        let shape = self.value(x).shape().to_vec();
        self.push(
            Op::ScaleConst { factor },
            vec![x],
            Tensor::from_vec(&shape, data).unwrap(),
        )
    }

    /// Scale a vector by a scalar node; both receive gradients.
    pub fn scale_by(&mut self, s: NodeId, v: NodeId) -> Result<NodeId, NumericsError> {
        let st = self.value(s);
        if !st.is_scalar() {
            return Err(NumericsError::Shape(format!(
                "scale_by expects scalar, got {:?}",
                st.shape()
            )));
        }
        let f = st.item();
        let data = self.value(v).data().iter().map(|x| x * f).collect();
        let shape = self.value(v).shape().to_vec();
        Ok(self.push(Op::ScaleBy, vec![s, v], Tensor::from_vec(&shape, data)?))
    }

    /// `-log softmax(logits)[target]`, computed via a stable log-sum-exp.
    pub fn nll(&mut self, logits: NodeId, target: usize) -> Result<NodeId, NumericsError> {
        let lt = self.value(logits);
        if lt.is_empty() {
            return Err(NumericsError::Domain("nll over empty logits".into()));
        }
        if target >= lt.len() {
            return Err(NumericsError::Contract(format!(
                "nll target {target} out of range for {} classes",
                lt.len()
            )));
        }
        let d = lt.data();
        let m = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + d.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let loss = lse - d[target];
        Ok(self.push(Op::Nll { target }, vec![logits], Tensor::scalar(loss)))
    }

    /// Reverse sweep from a scalar loss node. Returns one gradient tensor per
    /// parameter; constants and non-parameter leaves are skipped.
    pub fn backward(
        &self,
        loss: NodeId,
        params: &ParameterSet,
    ) -> Result<GradStore, NumericsError> {
        if !self.value(loss).is_scalar() {
            return Err(NumericsError::Contract(format!(
                "backward requires scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut store = GradStore::zeros_like(params);
        check_param_count(params, &store)?;

        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf { param } => {
                    if let Some(pid) = param {
                        let slot = store.get_mut(*pid).data_mut();
                        for (s, gi) in slot.iter_mut().zip(g.iter()) {
                            *s += gi;
                        }
                    }
                }
                Op::MatVec => {
                    let (w, x) = (node.inputs[0], node.inputs[1]);
                    let wt = self.value(w);
                    let xt = self.value(x);
                    let (r, c) = (wt.rows(), wt.cols());
                    {
                        let gw = grad_buf(&mut grads, w, r * c);
                        for i in 0..r {
                            for j in 0..c {
                                gw[i * c + j] += g[i] * xt.data()[j];
                            }
                        }
                    }
                    let gx = grad_buf(&mut grads, x, c);
                    for i in 0..r {
                        let row = &wt.data()[i * c..(i + 1) * c];
                        for j in 0..c {
                            gx[j] += g[i] * row[j];
                        }
                    }
                }
                Op::Add => {
                    for &inp in &node.inputs {
                        let gi = grad_buf(&mut grads, inp, g.len());
                        for (a, b) in gi.iter_mut().zip(g.iter()) {
                            *a += b;
                        }
                    }
                }
                Op::Mul => {
                    let (a, b) = (node.inputs[0], node.inputs[1]);
                    let (ad, bd) = (self.value(a).data().to_vec(), self.value(b).data().to_vec());
                    {
                        let ga = grad_buf(&mut grads, a, g.len());
                        for i in 0..g.len() {
                            ga[i] += g[i] * bd[i];
                        }
                    }
                    let gb = grad_buf(&mut grads, b, g.len());
                    for i in 0..g.len() {
                        gb[i] += g[i] * ad[i];
                    }
                }
                Op::Sigmoid => {
                    let y = node.value.data();
                    let gx = grad_buf(&mut grads, node.inputs[0], g.len());
                    for i in 0..g.len() {
                        gx[i] += g[i] * y[i] * (1.0 - y[i]);
                    }
                }
                Op::Tanh => {
                    let y = node.value.data();
                    let gx = grad_buf(&mut grads, node.inputs[0], g.len());
                    for i in 0..g.len() {
                        gx[i] += g[i] * (1.0 - y[i] * y[i]);
                    }
                }
                Op::Softmax => {
                    let y = node.value.data();
                    let inner: f64 = g.iter().zip(y.iter()).map(|(gi, yi)| gi * yi).sum();
                    let gx = grad_buf(&mut grads, node.inputs[0], g.len());
                    for i in 0..g.len() {
                        gx[i] += y[i] * (g[i] - inner);
                    }
                }
                Op::Concat => {
                    let mut offset = 0;
                    for &inp in &node.inputs {
                        let n = self.value(inp).len();
                        let gi = grad_buf(&mut grads, inp, n);
                        for k in 0..n {
                            gi[k] += g[offset + k];
                        }
                        offset += n;
                    }
                }
                Op::Slice { start, len } => {
                    let inp = node.inputs[0];
                    let n = self.value(inp).len();
                    let gx = grad_buf(&mut grads, inp, n);
                    for k in 0..*len {
                        gx[start + k] += g[k];
                    }
                }
                Op::Row { index } => {
                    let inp = node.inputs[0];
                    let mt = self.value(inp);
                    let c = mt.cols();
                    let gm = grad_buf(&mut grads, inp, mt.len());
                    for k in 0..c {
                        gm[index * c + k] += g[k];
                    }
                }
                Op::Dot => {
                    let (a, b) = (node.inputs[0], node.inputs[1]);
                    let (ad, bd) = (self.value(a).data().to_vec(), self.value(b).data().to_vec());
                    {
                        let ga = grad_buf(&mut grads, a, ad.len());
                        for i in 0..ad.len() {
                            ga[i] += g[0] * bd[i];
                        }
                    }
                    let gb = grad_buf(&mut grads, b, bd.len());
                    for i in 0..bd.len() {
                        gb[i] += g[0] * ad[i];
                    }
                }
                Op::Sum => {
                    let inp = node.inputs[0];
                    let n = self.value(inp).len();
                    let gx = grad_buf(&mut grads, inp, n);
                    for v in gx.iter_mut() {
                        *v += g[0];
                    }
                }
                Op::ScaleConst { factor } => {
                    let gx = grad_buf(&mut grads, node.inputs[0], g.len());
                    for i in 0..g.len() {
                        gx[i] += g[i] * factor;
                    }
                }
                Op::ScaleBy => {
                    let (s, v) = (node.inputs[0], node.inputs[1]);
                    let sv = self.value(s).item();
                    let vd = self.value(v).data().to_vec();
                    {
                        let gs = grad_buf(&mut grads, s, 1);
                        gs[0] += g.iter().zip(vd.iter()).map(|(gi, vi)| gi * vi).sum::<f64>();
                    }
                    let gv = grad_buf(&mut grads, v, vd.len());
                    for i in 0..vd.len() {
                        gv[i] += g[i] * sv;
                    }
                }
                Op::Nll { target } => {
                    let inp = node.inputs[0];
                    let probs = softmax_values(self.value(inp).data());
                    let gx = grad_buf(&mut grads, inp, probs.len());
                    for i in 0..probs.len() {
                        let indicator = if i == *target { 1.0 } else { 0.0 };
                        gx[i] += g[0] * (probs[i] - indicator);
                    }
                }
            }
        }
        Ok(store)
    }
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

fn grad_buf<'a>(grads: &'a mut [Option<Vec<f64>>], id: NodeId, len: usize) -> &'a mut Vec<f64> {
    grads[id.0].get_or_insert_with(|| vec![0.0; len])
}

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Stable softmax over a slice.
pub fn softmax_values(scores: &[f64]) -> Vec<f64> {
    debug_assert!(!scores.is_empty());
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|e| e / z).collect()
}

/// Standalone softmax with the module's domain checks.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if scores.is_empty() {
        return Err(NumericsError::Domain("softmax of empty vector".into()));
    }
    Ok(softmax_values(scores))
}

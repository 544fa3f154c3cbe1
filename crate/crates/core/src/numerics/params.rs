use super::{NumericsError, Tensor};

/// Index of a named tensor inside a [`ParameterSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// All trainable tensors of a model, addressed by stable ids.
///
/// Sharing (e.g. one embedding matrix serving both the encoder lookup and the
/// context network) is expressed by reusing the same `ParamId`; gradients for
/// every use of the id accumulate into one slot.
#[derive(Clone, Debug)]
pub struct ParameterSet {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParameterSet {
    pub fn new() -> Self {
        ParameterSet { names: Vec::new(), values: Vec::new() }
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> ParamId {
        debug_assert!(
            !self.names.iter().any(|n| n == name),
            "duplicate parameter name {name}"
        );
        self.names.push(name.to_string());
        self.values.push(value);
        ParamId(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn id_by_name(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.names
            .iter()
            .zip(self.values.iter())
            .enumerate()
            .map(|(i, (n, v))| (ParamId(i), n.as_str(), v))
    }

    /// Total number of scalar coordinates across all tensors.
    pub fn num_values(&self) -> usize {
        self.values.iter().map(|t| t.len()).sum()
    }
}

impl Default for ParameterSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradient slots aligned with a [`ParameterSet`].
#[derive(Clone, Debug)]
pub struct GradStore {
    grads: Vec<Tensor>,
}

impl GradStore {
    pub fn zeros_like(params: &ParameterSet) -> Self {
        GradStore { grads: params.values.iter().map(|t| Tensor::zeros(t.shape())).collect() }
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.grads[id.0]
    }

    /// Elementwise `self += other`. Fan-in across sentences of a batch.
    pub fn accumulate(&mut self, other: &GradStore) {
        debug_assert_eq!(self.grads.len(), other.grads.len());
        for (a, b) in self.grads.iter_mut().zip(other.grads.iter()) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data().iter()) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.grads {
            for v in g.data_mut() {
                *v *= factor;
            }
        }
    }

    /// Global L2 norm over every coordinate of every tensor.
    pub fn global_norm(&self) -> f64 {
        self.grads.iter().map(|g| g.sq_norm()).sum::<f64>().sqrt()
    }

    /// Name of the first tensor holding a non-finite value, if any.
    pub fn first_non_finite(&self, params: &ParameterSet) -> Option<String> {
        self.grads
            .iter()
            .position(|g| !g.all_finite())
            .map(|i| params.names[i].clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.grads.iter().enumerate().map(|(i, g)| (ParamId(i), g))
    }
}

/// `theta -= lr * grad` over every parameter.
pub fn apply_gradients(params: &mut ParameterSet, grads: &GradStore, lr: f64) {
    for (p, g) in params.values.iter_mut().zip(grads.grads.iter()) {
        for (x, dx) in p.data_mut().iter_mut().zip(g.data().iter()) {
            *x -= lr * dx;
        }
    }
}

pub(crate) fn check_param_count(
    params: &ParameterSet,
    grads: &GradStore,
) -> Result<(), NumericsError> {
    if params.values.len() != grads.grads.len() {
        return Err(NumericsError::Contract(
            "gradient store does not match parameter set".into(),
        ));
    }
    Ok(())
}

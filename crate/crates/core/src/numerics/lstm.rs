use rand::Rng;

use super::{Graph, NodeId, NumericsError, ParamId, ParameterSet, Tensor};

/// Parameters of one LSTM cell.
///
/// Gate rows are stacked in fixed block order `[input, forget, candidate,
/// output]`, so both matrices have `4 * hidden` rows.
#[derive(Clone, Copy, Debug)]
pub struct LstmWeights {
    /// Input-to-gates matrix `(4h x d_in)`.
    pub w_input: ParamId,
    /// Hidden-to-gates matrix `(4h x h)`.
    pub w_hidden: ParamId,
    /// Gate biases `(4h)`.
    pub bias: ParamId,
    pub input_size: usize,
    pub hidden_size: usize,
}

impl LstmWeights {
    /// Registers freshly initialized weights under `prefix.{w_ih,w_hh,bias}`.
    ///
    /// Weights are uniform on `[-0.1, 0.1]`; the forget-gate bias block is set
    /// to 1.0.
    pub fn init<R: Rng>(
        params: &mut ParameterSet,
        prefix: &str,
        input_size: usize,
        hidden_size: usize,
        rng: &mut R,
    ) -> Self {
        let g = 4 * hidden_size;
        let w_input = params.add(
            &format!("{prefix}.w_ih"),
            Tensor::uniform(&[g, input_size], super::INIT_SCALE, rng),
        );
        let w_hidden = params.add(
            &format!("{prefix}.w_hh"),
            Tensor::uniform(&[g, hidden_size], super::INIT_SCALE, rng),
        );
        let mut bias = Tensor::zeros(&[g]);
        for v in &mut bias.data_mut()[hidden_size..2 * hidden_size] {
            *v = 1.0;
        }
        let bias = params.add(&format!("{prefix}.bias"), bias);
        LstmWeights { w_input, w_hidden, bias, input_size, hidden_size }
    }
}

/// Hidden and cell state handles for one cell invocation.
#[derive(Clone, Copy, Debug)]
pub struct LstmState {
    pub h: NodeId,
    pub c: NodeId,
}

/// One step of the standard (no-peephole) LSTM:
///
/// ```text
/// gates = W_ih x + W_hh h_prev + b
/// i, f, g, o = split(gates)
/// c = sigmoid(f) * c_prev + sigmoid(i) * tanh(g)
/// h = sigmoid(o) * tanh(c)
/// ```
pub fn lstm_cell(
    graph: &mut Graph,
    params: &ParameterSet,
    w: &LstmWeights,
    x: NodeId,
    prev: LstmState,
) -> Result<LstmState, NumericsError> {
    let h = w.hidden_size;
    if graph.value(x).len() != w.input_size {
        return Err(NumericsError::Shape(format!(
            "lstm_cell input length {} does not match weights ({})",
            graph.value(x).len(),
            w.input_size
        )));
    }
    let w_ih = graph.param(params, w.w_input);
    let w_hh = graph.param(params, w.w_hidden);
    let bias = graph.param(params, w.bias);

    let ix = graph.matvec(w_ih, x)?;
    let hh = graph.matvec(w_hh, prev.h)?;
    let pre = graph.add(ix, hh)?;
    let gates = graph.add(pre, bias)?;

    let i_raw = graph.slice(gates, 0, h)?;
    let f_raw = graph.slice(gates, h, h)?;
    let g_raw = graph.slice(gates, 2 * h, h)?;
    let o_raw = graph.slice(gates, 3 * h, h)?;

    let i = graph.sigmoid(i_raw);
    let f = graph.sigmoid(f_raw);
    let g = graph.tanh(g_raw);
    let o = graph.sigmoid(o_raw);

    let fc = graph.mul(f, prev.c)?;
    let ig = graph.mul(i, g)?;
    let c = graph.add(fc, ig)?;
    let c_tanh = graph.tanh(c);
    let h_out = graph.mul(o, c_tanh)?;
    Ok(LstmState { h: h_out, c })
}

/// Zero initial state for a cell of the given hidden size.
pub fn zero_state(graph: &mut Graph, hidden_size: usize) -> LstmState {
    let h = graph.constant(Tensor::zeros(&[hidden_size]));
    let c = graph.constant(Tensor::zeros(&[hidden_size]));
    LstmState { h, c }
}

/// Runs a full-length recurrence over `inputs`, returning the state after
/// each step.
pub fn run_lstm(
    graph: &mut Graph,
    params: &ParameterSet,
    w: &LstmWeights,
    inputs: &[NodeId],
) -> Result<Vec<LstmState>, NumericsError> {
    let mut state = zero_state(graph, w.hidden_size);
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        state = lstm_cell(graph, params, w, x, state)?;
        out.push(state);
    }
    Ok(out)
}

//! Gated recurrent unit without bias terms:
//!
//! ```text
//! z_t = σ(W_z x_t + U_z h_{t-1})
//! r_t = σ(W_r x_t + U_r h_{t-1})
//! h̃_t = tanh(W_h x_t + U_h (r_t ⊙ h_{t-1}))
//! h_t = z_t ⊙ h̃_t + (1 - z_t) ⊙ h_{t-1}
//! ```
//!
//! Note the gate orientation: `z` weights the *candidate*, not the previous
//! state. Several libraries use the opposite convention.

use rand::Rng;

use super::{check_len, sigmoid, Matrix, NeuralError};

/// The six GRU weight matrices. Input maps are stored `d × m` so that
/// `W · x` yields a hidden-sized vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_h: Matrix,
    pub u_z: Matrix,
    pub u_r: Matrix,
    pub u_h: Matrix,
}

impl GruParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let w = || Matrix::zeros(hidden_dim, input_dim);
        let u = || Matrix::zeros(hidden_dim, hidden_dim);
        Self {
            w_z: w(),
            w_r: w(),
            w_h: w(),
            u_z: u(),
            u_r: u(),
            u_h: u(),
        }
    }

    pub fn glorot<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        Self {
            w_z: Matrix::glorot(hidden_dim, input_dim, rng),
            w_r: Matrix::glorot(hidden_dim, input_dim, rng),
            w_h: Matrix::glorot(hidden_dim, input_dim, rng),
            u_z: Matrix::glorot(hidden_dim, hidden_dim, rng),
            u_r: Matrix::glorot(hidden_dim, hidden_dim, rng),
            u_h: Matrix::glorot(hidden_dim, hidden_dim, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.rows()
    }

    /// Checks that all six matrices agree on `m` and `d`.
    pub fn validate(&self) -> Result<(), NeuralError> {
        let (d, m) = self.w_z.shape();
        for w in [&self.w_r, &self.w_h] {
            check_len("GRU input weight rows", d, w.rows())?;
            check_len("GRU input weight cols", m, w.cols())?;
        }
        for u in [&self.u_z, &self.u_r, &self.u_h] {
            check_len("GRU recurrent weight rows", d, u.rows())?;
            check_len("GRU recurrent weight cols", d, u.cols())?;
        }
        Ok(())
    }

    /// The matrices in canonical order `w_z, w_r, w_h, u_z, u_r, u_h`.
    pub fn matrices(&self) -> [&Matrix; 6] {
        [&self.w_z, &self.w_r, &self.w_h, &self.u_z, &self.u_r, &self.u_h]
    }

    pub fn matrices_mut(&mut self) -> [&mut Matrix; 6] {
        [
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
        ]
    }

    pub const MATRIX_NAMES: [&'static str; 6] = ["w_z", "w_r", "w_h", "u_z", "u_r", "u_h"];
}

/// Activations of one step, kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GruStep {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub h_cand: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GruTrace {
    pub steps: Vec<GruStep>,
}

impl GruTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn gru_step(params: &GruParams, x: &[f64], h_prev: &[f64]) -> Result<(Vec<f64>, GruStep), NeuralError> {
    check_len("GRU input", params.input_dim(), x.len())?;
    check_len("GRU hidden state", params.hidden_dim(), h_prev.len())?;
    let step = step_unchecked(params, x, h_prev);
    Ok((step.h.clone(), step))
}

fn step_unchecked(p: &GruParams, x: &[f64], h_prev: &[f64]) -> GruStep {
    let d = p.hidden_dim();
    let mut a_z = vec![0.0; d];
    p.w_z.mul_vec_acc(x, &mut a_z);
    p.u_z.mul_vec_acc(h_prev, &mut a_z);
    let z: Vec<f64> = a_z.into_iter().map(sigmoid).collect();

    let mut a_r = vec![0.0; d];
    p.w_r.mul_vec_acc(x, &mut a_r);
    p.u_r.mul_vec_acc(h_prev, &mut a_r);
    let r: Vec<f64> = a_r.into_iter().map(sigmoid).collect();

    let gated: Vec<f64> = r.iter().zip(h_prev).map(|(r, h)| r * h).collect();
    let mut a_h = vec![0.0; d];
    p.w_h.mul_vec_acc(x, &mut a_h);
    p.u_h.mul_vec_acc(&gated, &mut a_h);
    let h_cand: Vec<f64> = a_h.into_iter().map(f64::tanh).collect();

    let h = (0..d)
        .map(|i| z[i] * h_cand[i] + (1.0 - z[i]) * h_prev[i])
        .collect();
    GruStep {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        h_cand,
        h,
    }
}

/// Folds the GRU over `inputs` from `h0`; returns the last state and the
/// full trace. An empty sequence returns `h0` unchanged.
pub fn gru_encode<'a, I>(
    params: &GruParams,
    inputs: I,
    h0: &[f64],
) -> Result<(Vec<f64>, GruTrace), NeuralError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    check_len("GRU initial state", params.hidden_dim(), h0.len())?;
    let mut h = h0.to_vec();
    let mut trace = GruTrace::default();
    for x in inputs {
        check_len("GRU input", params.input_dim(), x.len())?;
        let step = step_unchecked(params, x, &h);
        h.clone_from(&step.h);
        trace.steps.push(step);
    }
    Ok((h, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruBackward {
    pub grads: GruParams,
    pub grad_h0: Vec<f64>,
    pub grad_inputs: Vec<Vec<f64>>,
}

/// Backpropagation through time for a trace produced by [`gru_encode`].
pub fn gru_backward(
    params: &GruParams,
    trace: &GruTrace,
    grad_h_n: &[f64],
) -> Result<GruBackward, NeuralError> {
    let mut grads = GruParams::zeros(params.input_dim(), params.hidden_dim());
    let mut grad_inputs = Vec::with_capacity(trace.len());
    let grad_h0 = backward_impl(params, trace, grad_h_n, &mut grads, Some(&mut grad_inputs))?;
    grad_inputs.reverse();
    Ok(GruBackward {
        grads,
        grad_h0,
        grad_inputs,
    })
}

/// Like [`gru_backward`] but adds parameter gradients into `grads` and skips
/// the input gradients. Returns the gradient with respect to `h0`.
pub fn gru_backward_into(
    params: &GruParams,
    trace: &GruTrace,
    grad_h_n: &[f64],
    grads: &mut GruParams,
) -> Result<Vec<f64>, NeuralError> {
    backward_impl(params, trace, grad_h_n, grads, None)
}

fn backward_impl(
    p: &GruParams,
    trace: &GruTrace,
    grad_h_n: &[f64],
    g: &mut GruParams,
    mut grad_inputs: Option<&mut Vec<Vec<f64>>>,
) -> Result<Vec<f64>, NeuralError> {
    let (d, m) = (p.hidden_dim(), p.input_dim());
    check_len("GRU output gradient", d, grad_h_n.len())?;
    check_len("GRU gradient container rows", d, g.hidden_dim())?;
    check_len("GRU gradient container cols", m, g.input_dim())?;
    if let Some(first) = trace.steps.first() {
        check_len("trace input", m, first.x.len())?;
        check_len("trace hidden state", d, first.h_prev.len())?;
    }

    let mut dh = grad_h_n.to_vec();
    let mut d_az = vec![0.0; d];
    let mut d_ar = vec![0.0; d];
    let mut d_ah = vec![0.0; d];
    let mut gated = vec![0.0; d];
    for s in trace.steps.iter().rev() {
        let mut dh_prev = vec![0.0; d];
        for i in 0..d {
            let dz = dh[i] * (s.h_cand[i] - s.h_prev[i]);
            d_az[i] = dz * s.z[i] * (1.0 - s.z[i]);
            d_ah[i] = dh[i] * s.z[i] * (1.0 - s.h_cand[i] * s.h_cand[i]);
            dh_prev[i] = dh[i] * (1.0 - s.z[i]);
            gated[i] = s.r[i] * s.h_prev[i];
        }
        // through U_h (r ⊙ h_prev)
        let mut d_gated = vec![0.0; d];
        p.u_h.tmul_vec_acc(&d_ah, &mut d_gated);
        for i in 0..d {
            let dr = d_gated[i] * s.h_prev[i];
            d_ar[i] = dr * s.r[i] * (1.0 - s.r[i]);
            dh_prev[i] += d_gated[i] * s.r[i];
        }
        p.u_z.tmul_vec_acc(&d_az, &mut dh_prev);
        p.u_r.tmul_vec_acc(&d_ar, &mut dh_prev);

        g.w_z.add_outer(&d_az, &s.x);
        g.w_r.add_outer(&d_ar, &s.x);
        g.w_h.add_outer(&d_ah, &s.x);
        g.u_z.add_outer(&d_az, &s.h_prev);
        g.u_r.add_outer(&d_ar, &s.h_prev);
        g.u_h.add_outer(&d_ah, &gated);

        if let Some(out) = grad_inputs.as_deref_mut() {
            let mut dx = vec![0.0; m];
            p.w_z.tmul_vec_acc(&d_az, &mut dx);
            p.w_r.tmul_vec_acc(&d_ar, &mut dx);
            p.w_h.tmul_vec_acc(&d_ah, &mut dx);
            out.push(dx);
        }
        dh = dh_prev;
    }
    Ok(dh)
}

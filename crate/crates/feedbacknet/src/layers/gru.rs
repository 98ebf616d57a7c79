//! Gated recurrent unit: update gate z, reset gate r, candidate state, and
//! the blend `h = z (*) h_prev + (1 - z) (*) candidate`, plus a
//! bidirectional encoder that concatenates the final states of a forward
//! and a backward pass.

use crate::layers::glorot_scale;
use crate::numerics::{random_uniform_init, Activation, Matrix, Rng, Vector};

/// GRU weights. Input projections `w_*` are stored `input_dim x hidden`
/// and recurrent projections `v_*` are `hidden x hidden`; both multiply as
/// `M^T v`, so a stored matrix always maps its row dimension to its column
/// dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParameters {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_c: Matrix,
    pub v_z: Matrix,
    pub v_r: Matrix,
    pub v_c: Matrix,
    pub b_z: Vector,
    pub b_r: Vector,
    pub b_c: Vector,
}

impl GruParameters {
    pub fn new(input_dim: usize, hidden: usize, rng: &mut Rng) -> GruParameters {
        assert!(input_dim >= 1 && hidden >= 1);
        let ws = glorot_scale(input_dim, hidden);
        let vs = glorot_scale(hidden, hidden);
        GruParameters {
            w_z: random_uniform_init(input_dim, hidden, ws, rng),
            w_r: random_uniform_init(input_dim, hidden, ws, rng),
            w_c: random_uniform_init(input_dim, hidden, ws, rng),
            v_z: random_uniform_init(hidden, hidden, vs, rng),
            v_r: random_uniform_init(hidden, hidden, vs, rng),
            v_c: random_uniform_init(hidden, hidden, vs, rng),
            b_z: Vector::zeros(hidden),
            b_r: Vector::zeros(hidden),
            b_c: Vector::zeros(hidden),
        }
    }

    /// All-zero parameters of the same shapes; the gradient container.
    pub fn zeros(input_dim: usize, hidden: usize) -> GruParameters {
        GruParameters {
            w_z: Matrix::zeros(input_dim, hidden),
            w_r: Matrix::zeros(input_dim, hidden),
            w_c: Matrix::zeros(input_dim, hidden),
            v_z: Matrix::zeros(hidden, hidden),
            v_r: Matrix::zeros(hidden, hidden),
            v_c: Matrix::zeros(hidden, hidden),
            b_z: Vector::zeros(hidden),
            b_r: Vector::zeros(hidden),
            b_c: Vector::zeros(hidden),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w_z.cols()
    }

    /// `self += s * other` across all nine tensors.
    pub fn add_scaled(&mut self, other: &GruParameters, s: f64) {
        self.w_z.add_scaled(&other.w_z, s);
        self.w_r.add_scaled(&other.w_r, s);
        self.w_c.add_scaled(&other.w_c, s);
        self.v_z.add_scaled(&other.v_z, s);
        self.v_r.add_scaled(&other.v_r, s);
        self.v_c.add_scaled(&other.v_c, s);
        self.b_z.add_scaled(&other.b_z, s);
        self.b_r.add_scaled(&other.b_r, s);
        self.b_c.add_scaled(&other.b_c, s);
    }

    pub fn scale(&mut self, s: f64) {
        self.w_z.scale(s);
        self.w_r.scale(s);
        self.w_c.scale(s);
        self.v_z.scale(s);
        self.v_r.scale(s);
        self.v_c.scale(s);
        self.b_z.scale(s);
        self.b_r.scale(s);
        self.b_c.scale(s);
    }
}

/// Everything one step needs to replay its backward pass.
#[derive(Debug, Clone)]
pub struct GruStepCache {
    pub x: Vector,
    pub h_prev: Vector,
    pub z: Vector,
    pub r: Vector,
    /// `r (*) h_prev`, the input to the candidate's recurrent projection.
    pub reset_h: Vector,
    pub candidate: Vector,
    pub h: Vector,
}

fn gate(w: &Matrix, v: &Matrix, b: &Vector, x: &Vector, state: &Vector, act: Activation) -> Vector {
    let mut a = w.tmatvec(x);
    a.add_scaled(&v.tmatvec(state), 1.0);
    a.add_scaled(b, 1.0);
    act.apply(&a)
}

/// One recurrence step:
/// z = sigmoid(Wz x + Vz h_prev + bz), r = sigmoid(Wr x + Vr h_prev + br),
/// candidate = tanh(Wc x + Vc (r (*) h_prev) + bc),
/// h = z (*) h_prev + (1 - z) (*) candidate.
pub fn gru_step(params: &GruParameters, x: &Vector, h_prev: &Vector) -> GruStepCache {
    assert_eq!(x.len(), params.input_dim(), "input width");
    assert_eq!(h_prev.len(), params.hidden(), "state width");

    let z = gate(&params.w_z, &params.v_z, &params.b_z, x, h_prev, Activation::Sigmoid);
    let r = gate(&params.w_r, &params.v_r, &params.b_r, x, h_prev, Activation::Sigmoid);
    let reset_h = r.hadamard(h_prev);
    let candidate = gate(&params.w_c, &params.v_c, &params.b_c, x, &reset_h, Activation::Tanh);

    let mut h = Vector::zeros(params.hidden());
    for i in 0..h.len() {
        let zi = z.get(i);
        h.set(i, zi * h_prev.get(i) + (1.0 - zi) * candidate.get(i));
    }
    GruStepCache {
        x: x.clone(),
        h_prev: h_prev.clone(),
        z,
        r,
        reset_h,
        candidate,
        h,
    }
}

/// Backward through one step. `dh` is the loss gradient at this step's
/// output state; parameter gradients accumulate into `grads`. Returns the
/// input gradient and the gradient flowing into the previous state.
pub fn gru_step_backward(
    params: &GruParameters,
    cache: &GruStepCache,
    dh: &Vector,
    grads: &mut GruParameters,
) -> (Vector, Vector) {
    let hd = params.hidden();
    assert_eq!(dh.len(), hd, "state gradient width");

    let mut dz = Vector::zeros(hd);
    let mut dh_prev = Vector::zeros(hd);
    let mut d_cand = Vector::zeros(hd);
    for i in 0..hd {
        let g = dh.get(i);
        dz.set(i, g * (cache.h_prev.get(i) - cache.candidate.get(i)));
        dh_prev.set(i, g * cache.z.get(i));
        d_cand.set(i, g * (1.0 - cache.z.get(i)));
    }

    // candidate = tanh(a_c); tanh' from the activated value.
    let mut da_c = Vector::zeros(hd);
    for i in 0..hd {
        let c = cache.candidate.get(i);
        da_c.set(i, d_cand.get(i) * (1.0 - c * c));
    }
    grads.w_c.add_outer(&cache.x, &da_c);
    grads.v_c.add_outer(&cache.reset_h, &da_c);
    grads.b_c.add_scaled(&da_c, 1.0);
    let mut dx = params.w_c.matvec(&da_c);
    let d_reset_h = params.v_c.matvec(&da_c);

    // reset_h = r (*) h_prev.
    let dr = d_reset_h.hadamard(&cache.h_prev);
    dh_prev.add_scaled(&d_reset_h.hadamard(&cache.r), 1.0);

    // r = sigmoid(a_r); sigma' = r(1-r).
    let mut da_r = Vector::zeros(hd);
    for i in 0..hd {
        let r = cache.r.get(i);
        da_r.set(i, dr.get(i) * r * (1.0 - r));
    }
    grads.w_r.add_outer(&cache.x, &da_r);
    grads.v_r.add_outer(&cache.h_prev, &da_r);
    grads.b_r.add_scaled(&da_r, 1.0);
    dx.add_scaled(&params.w_r.matvec(&da_r), 1.0);
    dh_prev.add_scaled(&params.v_r.matvec(&da_r), 1.0);

    // z = sigmoid(a_z).
    let mut da_z = Vector::zeros(hd);
    for i in 0..hd {
        let z = cache.z.get(i);
        da_z.set(i, dz.get(i) * z * (1.0 - z));
    }
    grads.w_z.add_outer(&cache.x, &da_z);
    grads.v_z.add_outer(&cache.h_prev, &da_z);
    grads.b_z.add_scaled(&da_z, 1.0);
    dx.add_scaled(&params.w_z.matvec(&da_z), 1.0);
    dh_prev.add_scaled(&params.v_z.matvec(&da_z), 1.0);

    (dx, dh_prev)
}

/// Step caches for both directions. Backward-direction steps are stored in
/// processing order, i.e. `backward_steps[j]` consumed input row
/// `T - 1 - j`.
#[derive(Debug, Clone)]
pub struct BigruCache {
    pub forward_steps: Vec<GruStepCache>,
    pub backward_steps: Vec<GruStepCache>,
}

/// Runs a forward GRU over rows 0..T and a backward GRU over rows T..0,
/// both from zero states, and concatenates their final states into a
/// `2 * hidden` vector.
pub fn bigru_encode(
    inputs: &Matrix,
    fwd: &GruParameters,
    bwd: &GruParameters,
) -> (Vector, BigruCache) {
    assert_eq!(inputs.cols(), fwd.input_dim(), "input width");
    assert_eq!(fwd.input_dim(), bwd.input_dim(), "direction input widths");
    assert_eq!(fwd.hidden(), bwd.hidden(), "direction state widths");
    let t_len = inputs.rows();

    let mut forward_steps = Vec::with_capacity(t_len);
    let mut h = Vector::zeros(fwd.hidden());
    for t in 0..t_len {
        let step = gru_step(fwd, &Vector::from_slice(inputs.row(t)), &h);
        h = step.h.clone();
        forward_steps.push(step);
    }

    let mut backward_steps = Vec::with_capacity(t_len);
    let mut hb = Vector::zeros(bwd.hidden());
    for t in (0..t_len).rev() {
        let step = gru_step(bwd, &Vector::from_slice(inputs.row(t)), &hb);
        hb = step.h.clone();
        backward_steps.push(step);
    }

    let out = h.concat(&hb);
    (out, BigruCache { forward_steps, backward_steps })
}

/// Backpropagation through time for both directions. `d_out` is the loss
/// gradient at the concatenated encoding. Returns the gradient for every
/// input row.
pub fn bigru_backward(
    fwd: &GruParameters,
    bwd: &GruParameters,
    cache: &BigruCache,
    d_out: &Vector,
    grads_fwd: &mut GruParameters,
    grads_bwd: &mut GruParameters,
) -> Matrix {
    let hd = fwd.hidden();
    let t_len = cache.forward_steps.len();
    assert_eq!(d_out.len(), 2 * hd, "encoding gradient width");
    let mut d_inputs = Matrix::zeros(t_len, fwd.input_dim());

    // Only each direction's final state sees upstream gradient directly;
    // earlier steps receive it through the recurrent chain.
    let mut dh = Vector::from_slice(&d_out.data()[..hd]);
    for t in (0..t_len).rev() {
        let (dx, dh_prev) = gru_step_backward(fwd, &cache.forward_steps[t], &dh, grads_fwd);
        for (acc, &g) in d_inputs.row_mut(t).iter_mut().zip(dx.data()) {
            *acc += g;
        }
        dh = dh_prev;
    }

    let mut dh = Vector::from_slice(&d_out.data()[hd..]);
    for j in (0..t_len).rev() {
        let t = t_len - 1 - j;
        let (dx, dh_prev) = gru_step_backward(bwd, &cache.backward_steps[j], &dh, grads_bwd);
        for (acc, &g) in d_inputs.row_mut(t).iter_mut().zip(dx.data()) {
            *acc += g;
        }
        dh = dh_prev;
    }
    d_inputs
}

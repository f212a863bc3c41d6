//! A single LSTM direction: gated cell with optional diagonal peephole
//! connections, plus the exact backward pass used by training.
//!
//! The forward recurrence, with `σ` the logistic function and `⊙`
//! elementwise product:
//!
//! ```text
//! i_t = σ(W_xi x_t + W_hi h_{t−1} + w_ci ⊙ c_{t−1} + b_i)
//! f_t = σ(W_xf x_t + W_hf h_{t−1} + w_cf ⊙ c_{t−1} + b_f)
//! c_t = f_t ⊙ c_{t−1} + i_t ⊙ tanh(W_xc x_t + W_hc h_{t−1} + b_c)
//! o_t = σ(W_xo x_t + W_ho h_{t−1} + w_co ⊙ c_t + b_o)
//! h_t = o_t ⊙ tanh(c_t)
//! ```
//!
//! with h₀ = c₀ = 0. The peephole weights are diagonal (one weight per
//! cell unit), so they are stored as vectors; when peepholes are
//! disabled the `w_c·` terms are simply omitted.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Parameters of one LSTM direction. Also reused as the gradient
/// accumulator, since gradients have the same shapes.
#[derive(Debug, Clone)]
pub(crate) struct LstmBlock {
    pub(crate) w_xi: Array2<f64>,
    pub(crate) w_hi: Array2<f64>,
    pub(crate) w_ci: Array1<f64>,
    pub(crate) b_i: Array1<f64>,
    pub(crate) w_xf: Array2<f64>,
    pub(crate) w_hf: Array2<f64>,
    pub(crate) w_cf: Array1<f64>,
    pub(crate) b_f: Array1<f64>,
    pub(crate) w_xc: Array2<f64>,
    pub(crate) w_hc: Array2<f64>,
    pub(crate) b_c: Array1<f64>,
    pub(crate) w_xo: Array2<f64>,
    pub(crate) w_ho: Array2<f64>,
    pub(crate) w_co: Array1<f64>,
    pub(crate) b_o: Array1<f64>,
}

/// Everything the backward pass needs from a forward run.
pub(crate) struct LstmTrace {
    pub(crate) xs: Vec<Array1<f64>>,
    i: Vec<Array1<f64>>,
    f: Vec<Array1<f64>>,
    g: Vec<Array1<f64>>,
    o: Vec<Array1<f64>>,
    c: Vec<Array1<f64>>,
    tanh_c: Vec<Array1<f64>>,
    pub(crate) h: Vec<Array1<f64>>,
}

fn sigmoid(a: &mut Array1<f64>) {
    a.mapv_inplace(|x| 1.0 / (1.0 + (-x).exp()));
}

/// Uniform Glorot sample in [−r, r] with r = √(6 / (rows + cols)).
pub(crate) fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let r = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| (rng.gen::<f64>() * 2.0 - 1.0) * r)
}

fn glorot_vec(len: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let r = (6.0 / (2 * len) as f64).sqrt();
    Array1::from_shape_fn(len, |_| (rng.gen::<f64>() * 2.0 - 1.0) * r)
}

impl LstmBlock {
    pub(crate) fn zeros(d: usize, h: usize) -> LstmBlock {
        LstmBlock {
            w_xi: Array2::zeros((h, d)),
            w_hi: Array2::zeros((h, h)),
            w_ci: Array1::zeros(h),
            b_i: Array1::zeros(h),
            w_xf: Array2::zeros((h, d)),
            w_hf: Array2::zeros((h, h)),
            w_cf: Array1::zeros(h),
            b_f: Array1::zeros(h),
            w_xc: Array2::zeros((h, d)),
            w_hc: Array2::zeros((h, h)),
            b_c: Array1::zeros(h),
            w_xo: Array2::zeros((h, d)),
            w_ho: Array2::zeros((h, h)),
            w_co: Array1::zeros(h),
            b_o: Array1::zeros(h),
        }
    }

    /// Glorot-uniform weights, zero biases except the forget-gate bias,
    /// which starts at 1.0 so early training does not erase the cell
    /// state. Draw order is fixed (input, forget, cell, output gate;
    /// W_x then W_h then the peephole vector) for reproducibility.
    pub(crate) fn init(d: usize, h: usize, peepholes: bool, rng: &mut ChaCha8Rng) -> LstmBlock {
        let mut block = LstmBlock {
            w_xi: glorot(h, d, rng),
            w_hi: glorot(h, h, rng),
            w_ci: glorot_vec(h, rng),
            b_i: Array1::zeros(h),
            w_xf: glorot(h, d, rng),
            w_hf: glorot(h, h, rng),
            w_cf: glorot_vec(h, rng),
            b_f: Array1::from_elem(h, 1.0),
            w_xc: glorot(h, d, rng),
            w_hc: glorot(h, h, rng),
            b_c: Array1::zeros(h),
            w_xo: glorot(h, d, rng),
            w_ho: glorot(h, h, rng),
            w_co: glorot_vec(h, rng),
            b_o: Array1::zeros(h),
        };
        if !peepholes {
            block.w_ci.fill(0.0);
            block.w_cf.fill(0.0);
            block.w_co.fill(0.0);
        }
        block
    }

    pub(crate) fn hidden_dim(&self) -> usize {
        self.b_i.len()
    }

    /// Runs the recurrence over `xs`, keeping intermediate activations.
    pub(crate) fn forward(&self, xs: Vec<Array1<f64>>, peepholes: bool) -> LstmTrace {
        let h_dim = self.hidden_dim();
        let t_len = xs.len();
        let mut trace = LstmTrace {
            xs,
            i: Vec::with_capacity(t_len),
            f: Vec::with_capacity(t_len),
            g: Vec::with_capacity(t_len),
            o: Vec::with_capacity(t_len),
            c: Vec::with_capacity(t_len),
            tanh_c: Vec::with_capacity(t_len),
            h: Vec::with_capacity(t_len),
        };
        let mut h_prev = Array1::zeros(h_dim);
        let mut c_prev = Array1::zeros(h_dim);
        for t in 0..t_len {
            let x = &trace.xs[t];
            let mut i = self.w_xi.dot(x) + self.w_hi.dot(&h_prev) + &self.b_i;
            let mut f = self.w_xf.dot(x) + self.w_hf.dot(&h_prev) + &self.b_f;
            if peepholes {
                i += &(&self.w_ci * &c_prev);
                f += &(&self.w_cf * &c_prev);
            }
            sigmoid(&mut i);
            sigmoid(&mut f);
            let mut g = self.w_xc.dot(x) + self.w_hc.dot(&h_prev) + &self.b_c;
            g.mapv_inplace(f64::tanh);
            let c = &f * &c_prev + &i * &g;
            let mut o = self.w_xo.dot(x) + self.w_ho.dot(&h_prev) + &self.b_o;
            if peepholes {
                o += &(&self.w_co * &c);
            }
            sigmoid(&mut o);
            let tanh_c = c.mapv(f64::tanh);
            let h = &o * &tanh_c;
            h_prev = h.clone();
            c_prev = c.clone();
            trace.i.push(i);
            trace.f.push(f);
            trace.g.push(g);
            trace.o.push(o);
            trace.c.push(c);
            trace.tanh_c.push(tanh_c);
            trace.h.push(h);
        }
        trace
    }

    /// Backpropagates through the whole sequence. `d_h` holds ∂loss/∂h_t
    /// from the layers above; parameter gradients are accumulated into
    /// `grads` (same shapes as the block) and ∂loss/∂x_t is returned.
    pub(crate) fn backward(
        &self,
        trace: &LstmTrace,
        d_h: &[Array1<f64>],
        peepholes: bool,
        grads: &mut LstmBlock,
    ) -> Vec<Array1<f64>> {
        let h_dim = self.hidden_dim();
        let t_len = trace.xs.len();
        debug_assert_eq!(d_h.len(), t_len);
        let zeros = Array1::zeros(h_dim);
        let mut d_xs = vec![Array1::zeros(0); t_len];
        let mut dh_next: Array1<f64> = Array1::zeros(h_dim);
        let mut dc_next: Array1<f64> = Array1::zeros(h_dim);
        for t in (0..t_len).rev() {
            let (i, f, g, o) = (&trace.i[t], &trace.f[t], &trace.g[t], &trace.o[t]);
            let (c, tanh_c) = (&trace.c[t], &trace.tanh_c[t]);
            let c_prev = if t > 0 { &trace.c[t - 1] } else { &zeros };
            let h_prev = if t > 0 { &trace.h[t - 1] } else { &zeros };

            let dh = &d_h[t] + &dh_next;
            // o_t = σ(a_o); ∂h/∂o = tanh(c).
            let da_o = &dh * tanh_c * o * &(1.0 - o);
            // c_t receives gradient from h_t, from c_{t+1}, and (with
            // peepholes) from o_t's pre-activation.
            let mut dc = &dh * o * &(1.0 - tanh_c * tanh_c) + &dc_next;
            if peepholes {
                dc += &(&da_o * &self.w_co);
            }
            let da_i = &dc * g * i * &(1.0 - i);
            let da_f = &dc * c_prev * f * &(1.0 - f);
            let da_g = &dc * i * &(1.0 - g * g);

            outer_add(&mut grads.w_xi, &da_i, &trace.xs[t]);
            outer_add(&mut grads.w_xf, &da_f, &trace.xs[t]);
            outer_add(&mut grads.w_xc, &da_g, &trace.xs[t]);
            outer_add(&mut grads.w_xo, &da_o, &trace.xs[t]);
            outer_add(&mut grads.w_hi, &da_i, h_prev);
            outer_add(&mut grads.w_hf, &da_f, h_prev);
            outer_add(&mut grads.w_hc, &da_g, h_prev);
            outer_add(&mut grads.w_ho, &da_o, h_prev);
            grads.b_i += &da_i;
            grads.b_f += &da_f;
            grads.b_c += &da_g;
            grads.b_o += &da_o;
            if peepholes {
                grads.w_ci += &(&da_i * c_prev);
                grads.w_cf += &(&da_f * c_prev);
                grads.w_co += &(&da_o * c);
            }

            d_xs[t] = self.w_xi.t().dot(&da_i)
                + self.w_xf.t().dot(&da_f)
                + self.w_xc.t().dot(&da_g)
                + self.w_xo.t().dot(&da_o);
            dh_next = self.w_hi.t().dot(&da_i)
                + self.w_hf.t().dot(&da_f)
                + self.w_hc.t().dot(&da_g)
                + self.w_ho.t().dot(&da_o);
            dc_next = &dc * f;
            if peepholes {
                dc_next += &(&da_i * &self.w_ci);
                dc_next += &(&da_f * &self.w_cf);
            }
        }
        d_xs
    }

    /// Visits every parameter in a fixed order (gate order i, f, c, o;
    /// within a gate W_x, W_h, peephole, bias). Must mirror
    /// [`LstmBlock::for_each_mut`].
    pub(crate) fn for_each(&self, f: &mut impl FnMut(f64)) {
        for m in [
            (&self.w_xi, &self.w_hi),
            (&self.w_xf, &self.w_hf),
            (&self.w_xc, &self.w_hc),
            (&self.w_xo, &self.w_ho),
        ] {
            m.0.iter().for_each(|&v| f(v));
            m.1.iter().for_each(|&v| f(v));
        }
        for v in [&self.w_ci, &self.w_cf, &self.w_co, &self.b_i, &self.b_f, &self.b_c, &self.b_o] {
            v.iter().for_each(|&x| f(x));
        }
    }

    pub(crate) fn for_each_mut(&mut self, f: &mut impl FnMut(&mut f64)) {
        for m in [
            (&mut self.w_xi, &mut self.w_hi),
            (&mut self.w_xf, &mut self.w_hf),
            (&mut self.w_xc, &mut self.w_hc),
            (&mut self.w_xo, &mut self.w_ho),
        ] {
            m.0.iter_mut().for_each(&mut *f);
            m.1.iter_mut().for_each(&mut *f);
        }
        for v in
            [&mut self.w_ci, &mut self.w_cf, &mut self.w_co, &mut self.b_i, &mut self.b_f, &mut self.b_c, &mut self.b_o]
        {
            v.iter_mut().for_each(&mut *f);
        }
    }
}

/// `acc += u vᵀ` without allocating the outer product.
fn outer_add(acc: &mut Array2<f64>, u: &Array1<f64>, v: &Array1<f64>) {
    for (r, &uv) in u.iter().enumerate() {
        if uv != 0.0 {
            acc.row_mut(r).scaled_add(uv, v);
        }
    }
}

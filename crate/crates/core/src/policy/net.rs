//! Recurrent actor-critic: one LSTM cell shared by a Gaussian mean head, a
//! state-independent log standard deviation, and a scalar value head.
//!
//! Cell equations, with `xh = [x; h_prev]`:
//!
//! ```text
//! i = sigmoid(W_i xh + b_i)    f = sigmoid(W_f xh + b_f)
//! g = tanh(W_g xh + b_g)       o = sigmoid(W_o xh + b_o)
//! c = f * c_prev + i * g       h = o * tanh(c)
//! mean = W_mu h + b_mu         value = w_v . h + b_v
//! ```
//!
//! All parameters live in one flat vector so the optimizer and the
//! checkpoint format stay trivial.

use super::dist::{TanhNormal, LOG_SD_MAX, LOG_SD_MIN};
use super::PolicyError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Hidden and cell vectors carried between steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl RecurrentState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub action_mean: Vec<f64>,
    /// Already clamped.
    pub action_log_sd: Vec<f64>,
    pub value: f64,
    pub state: RecurrentState,
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden: usize,
    pub w_gates: Range<usize>,
    pub b_gates: Range<usize>,
    pub w_mean: Range<usize>,
    pub b_mean: Range<usize>,
    pub log_sd: Range<usize>,
    pub w_value: Range<usize>,
    pub b_value: Range<usize>,
}

impl Layout {
    pub fn new(obs_dim: usize, act_dim: usize, hidden: usize) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let w_gates = take(4 * hidden * (obs_dim + hidden));
        let b_gates = take(4 * hidden);
        let w_mean = take(act_dim * hidden);
        let b_mean = take(act_dim);
        let log_sd = take(act_dim);
        let w_value = take(hidden);
        let b_value = take(1);
        Self {
            obs_dim,
            act_dim,
            hidden,
            w_gates,
            b_gates,
            w_mean,
            b_mean,
            log_sd,
            w_value,
            b_value,
        }
    }

    pub fn len(&self) -> usize {
        self.b_value.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(name, shape, range)` for every tensor, in storage order.
    pub fn tensors(&self) -> Vec<(&'static str, Vec<usize>, Range<usize>)> {
        let (d, a, h) = (self.obs_dim, self.act_dim, self.hidden);
        vec![
            ("w_gates", vec![4 * h, d + h], self.w_gates.clone()),
            ("b_gates", vec![4 * h], self.b_gates.clone()),
            ("w_mean", vec![a, h], self.w_mean.clone()),
            ("b_mean", vec![a], self.b_mean.clone()),
            ("log_sd", vec![a], self.log_sd.clone()),
            ("w_value", vec![h], self.w_value.clone()),
            ("b_value", vec![1], self.b_value.clone()),
        ]
    }
}

/// Intermediate values of one forward step, kept for backprop.
#[derive(Debug, Clone)]
pub struct StepCache {
    xh: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const INITIAL_LOG_SD: f64 = -0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentPolicy {
    layout: Layout,
    params: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl RecurrentPolicy {
    /// Deterministic initialization from `seed`, with unit action bounds.
    pub fn new(obs_dim: usize, act_dim: usize, hidden: usize, seed: u64) -> Result<Self, PolicyError> {
        if obs_dim == 0 || act_dim == 0 || hidden == 0 {
            return Err(PolicyError::Config(format!(
                "policy dimensions must be positive (obs {obs_dim}, act {act_dim}, hidden {hidden})"
            )));
        }
        let layout = Layout::new(obs_dim, act_dim, hidden);
        let mut params = vec![0.0; layout.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |range: Range<usize>, k: f64, params: &mut [f64]| {
            for p in &mut params[range] {
                *p = rng.random_range(-k..=k);
            }
        };
        fill(
            layout.w_gates.clone(),
            1.0 / ((obs_dim + hidden) as f64).sqrt(),
            &mut params,
        );
        fill(layout.w_mean.clone(), 0.01, &mut params);
        fill(layout.w_value.clone(), 1.0 / (hidden as f64).sqrt(), &mut params);
        // forget gate starts open
        let fb = layout.b_gates.start + hidden;
        params[fb..fb + hidden].fill(1.0);
        params[layout.log_sd.clone()].fill(INITIAL_LOG_SD);
        Ok(Self {
            layout,
            params,
            bounds: vec![(-1.0, 1.0); act_dim],
        })
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self, PolicyError> {
        if bounds.len() != self.layout.act_dim {
            return Err(PolicyError::Config(format!(
                "{} action bounds for {} action dimensions",
                bounds.len(),
                self.layout.act_dim
            )));
        }
        if bounds
            .iter()
            .any(|&(lo, hi)| !(lo < hi && lo.is_finite() && hi.is_finite()))
        {
            return Err(PolicyError::Config("action bounds must satisfy lo < hi".into()));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub(crate) fn from_raw(layout: Layout, params: Vec<f64>, bounds: Vec<(f64, f64)>) -> Self {
        Self { layout, params, bounds }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn obs_dim(&self) -> usize {
        self.layout.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.layout.act_dim
    }

    pub fn hidden(&self) -> usize {
        self.layout.hidden
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn initial_state(&self) -> RecurrentState {
        RecurrentState::zeros(self.layout.hidden)
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn log_sd(&self) -> Vec<f64> {
        self.params[self.layout.log_sd.clone()]
            .iter()
            .map(|v| v.clamp(LOG_SD_MIN, LOG_SD_MAX))
            .collect()
    }

    pub fn distribution<'a>(&'a self, out: &'a PolicyOutput) -> TanhNormal<'a> {
        TanhNormal::new(&out.action_mean, &out.action_log_sd, &self.bounds)
    }

    pub fn forward(&self, x: &[f64], state: &RecurrentState) -> PolicyOutput {
        self.forward_cached(x, state).0
    }

    pub fn forward_cached(&self, x: &[f64], state: &RecurrentState) -> (PolicyOutput, StepCache) {
        let l = &self.layout;
        let (d, hd) = (l.obs_dim, l.hidden);
        assert_eq!(x.len(), d, "observation dimension mismatch");
        assert_eq!(state.h.len(), hd, "recurrent state dimension mismatch");
        let mut xh = Vec::with_capacity(d + hd);
        xh.extend_from_slice(x);
        xh.extend_from_slice(&state.h);

        let w = &self.params[l.w_gates.clone()];
        let b = &self.params[l.b_gates.clone()];
        let cols = d + hd;
        let z: Vec<f64> = (0..4 * hd)
            .map(|r| b[r] + dot(&w[r * cols..(r + 1) * cols], &xh))
            .collect();
        let i: Vec<f64> = z[..hd].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[hd..2 * hd].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * hd..3 * hd].iter().map(|v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * hd..].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..hd).map(|j| f[j] * state.c[j] + i[j] * g[j]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..hd).map(|j| o[j] * tanh_c[j]).collect();

        let wm = &self.params[l.w_mean.clone()];
        let bm = &self.params[l.b_mean.clone()];
        let action_mean = (0..l.act_dim)
            .map(|a| bm[a] + dot(&wm[a * hd..(a + 1) * hd], &h))
            .collect();
        let value = self.params[l.b_value.start] + dot(&self.params[l.w_value.clone()], &h);

        let out = PolicyOutput {
            action_mean,
            action_log_sd: self.log_sd(),
            value,
            state: RecurrentState { h: h.clone(), c },
        };
        let cache = StepCache {
            xh,
            c_prev: state.c.clone(),
            i,
            f,
            g,
            o,
            tanh_c,
            h,
        };
        (out, cache)
    }

    /// Accumulates into `grad` the parameter gradient of a scalar whose
    /// derivatives with respect to this step's outputs are given. Gradients
    /// stop at the incoming recurrent state.
    pub fn backward(&self, cache: &StepCache, d_mean: &[f64], d_log_sd: &[f64], d_value: f64, grad: &mut [f64]) {
        let l = &self.layout;
        let hd = l.hidden;
        let cols = l.obs_dim + hd;
        let wm = &self.params[l.w_mean.clone()];
        let wv = &self.params[l.w_value.clone()];

        let mut dh: Vec<f64> = wv.iter().map(|w| w * d_value).collect();
        for (a, &dm) in d_mean.iter().enumerate() {
            if dm == 0.0 {
                continue;
            }
            let row = &wm[a * hd..(a + 1) * hd];
            for j in 0..hd {
                dh[j] += row[j] * dm;
            }
            let gw = &mut grad[l.w_mean.start + a * hd..l.w_mean.start + (a + 1) * hd];
            for (g, h) in gw.iter_mut().zip(&cache.h) {
                *g += dm * h;
            }
            grad[l.b_mean.start + a] += dm;
        }
        let raw_log_sd = &self.params[l.log_sd.clone()];
        for (a, &ds) in d_log_sd.iter().enumerate() {
            if raw_log_sd[a] > LOG_SD_MIN && raw_log_sd[a] < LOG_SD_MAX {
                grad[l.log_sd.start + a] += ds;
            }
        }
        for j in 0..hd {
            grad[l.w_value.start + j] += d_value * cache.h[j];
        }
        grad[l.b_value.start] += d_value;

        let mut dz = vec![0.0; 4 * hd];
        for j in 0..hd {
            let (i, f, g, o, tc) = (cache.i[j], cache.f[j], cache.g[j], cache.o[j], cache.tanh_c[j]);
            let d_o = dh[j] * tc;
            let dc = dh[j] * o * (1.0 - tc * tc);
            dz[j] = dc * g * i * (1.0 - i);
            dz[hd + j] = dc * cache.c_prev[j] * f * (1.0 - f);
            dz[2 * hd + j] = dc * i * (1.0 - g * g);
            dz[3 * hd + j] = d_o * o * (1.0 - o);
        }
        for (r, &dzr) in dz.iter().enumerate() {
            if dzr == 0.0 {
                continue;
            }
            grad[l.b_gates.start + r] += dzr;
            let gw = &mut grad[l.w_gates.start + r * cols..l.w_gates.start + (r + 1) * cols];
            for (gk, xk) in gw.iter_mut().zip(&cache.xh) {
                *gk += dzr * xk;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_parameters() {
        let a = RecurrentPolicy::new(7, 5, 6, 42).unwrap();
        let b = RecurrentPolicy::new(7, 5, 6, 42).unwrap();
        assert_eq!(a.params(), b.params());
        let c = RecurrentPolicy::new(7, 5, 6, 43).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(matches!(RecurrentPolicy::new(7, 5, 0, 1), Err(PolicyError::Config(_))));
        assert!(RecurrentPolicy::new(0, 5, 4, 1).is_err());
    }

    #[test]
    fn parameter_count_matches_layout() {
        let p = RecurrentPolicy::new(10, 5, 8, 0).unwrap();
        let expected = 4 * 8 * 18 + 4 * 8 + 5 * 8 + 5 + 5 + 8 + 1;
        assert_eq!(p.num_params(), expected);
        let total: usize = p
            .layout()
            .tensors()
            .iter()
            .map(|(_, s, _)| s.iter().product::<usize>())
            .sum();
        assert_eq!(total, expected);
    }

    #[test]
    fn zero_input_gives_finite_output() {
        let p = RecurrentPolicy::new(10, 5, 8, 3).unwrap();
        let out = p.forward(&[0.0; 10], &p.initial_state());
        assert!(out.value.is_finite());
        assert!(out.action_mean.iter().all(|m| m.is_finite()));
        assert!(out.action_log_sd.iter().all(|s| (LOG_SD_MIN..=LOG_SD_MAX).contains(s)));
    }

    #[test]
    fn state_carries_information() {
        let p = RecurrentPolicy::new(4, 2, 6, 9).unwrap();
        let x = [0.3, -0.2, 0.9, 0.1];
        let first = p.forward(&x, &p.initial_state());
        let second = p.forward(&x, &first.state);
        assert_ne!(first.action_mean, second.action_mean);
        let again = p.forward(&x, &p.initial_state());
        assert_eq!(first, again);
    }
}

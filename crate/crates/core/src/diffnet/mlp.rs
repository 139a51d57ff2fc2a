//! Sine-activated multilayer perceptron over a scalar input.
//!
//! Hidden layer `l` computes `h_l = sin(ω_l · (W_l h_{l-1} + b_l))` with
//! `ω_0 = omega0` on the first layer and `omega_hidden` after it; the output
//! layer is affine. Every evaluation also carries the derivative of each
//! activation with respect to the input, and the batched backward pass
//! differentiates through both the values and those derivatives.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::jet::{Real, TimeJet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    /// Uniform Xavier/Glorot on every layer; `omega0` acts only as an input
    /// frequency multiplier.
    Xavier,
    /// The sine-network scheme: first layer `U(±1/fan_in)`, later layers
    /// `U(±sqrt(6/fan_in)/ω)`.
    Siren,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub omega0: f64,
    pub omega_hidden: f64,
    pub init: InitScheme,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            input_dim: 1,
            output_dim: 6,
            hidden_layers: 4,
            hidden_width: 64,
            omega0: 30.0,
            omega_hidden: 1.0,
            init: InitScheme::Xavier,
            seed: 42,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.input_dim != 1 {
            return bad(format!("input_dim must be 1, got {}", self.input_dim));
        }
        if self.output_dim == 0 {
            return bad("output_dim must be at least 1".into());
        }
        if self.hidden_layers == 0 {
            return bad("hidden_layers must be at least 1".into());
        }
        if self.hidden_width == 0 {
            return bad("hidden_width must be at least 1".into());
        }
        if !(self.omega0 > 0.0) || !(self.omega_hidden > 0.0) {
            return bad("frequency scales must be positive".into());
        }
        Ok(())
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let mut out = Vec::with_capacity(self.hidden_layers + 1);
        let mut offset = 0;
        let mut fan_in = self.input_dim;
        for l in 0..=self.hidden_layers {
            let is_output = l == self.hidden_layers;
            let fan_out = if is_output { self.output_dim } else { self.hidden_width };
            let omega = match l {
                _ if is_output => 1.0,
                0 => self.omega0,
                _ => self.omega_hidden,
            };
            out.push(LayerShape { fan_in, fan_out, w_offset: offset, b_offset: offset + fan_in * fan_out, omega, sine: !is_output });
            offset += fan_in * fan_out + fan_out;
            fan_in = fan_out;
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.fan_in * l.fan_out + l.fan_out).sum()
    }
}

/// Where one layer's weights (row-major, `fan_out × fan_in`) and biases live
/// in the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    pub w_offset: usize,
    pub b_offset: usize,
    pub omega: f64,
    pub sine: bool,
}

impl LayerShape {
    fn weights<'a>(&self, p: &'a [f64]) -> ArrayView2<'a, f64> {
        ArrayView2::from_shape((self.fan_out, self.fan_in), &p[self.w_offset..self.b_offset]).expect("layer slice")
    }

    fn bias<'a>(&self, p: &'a [f64]) -> ArrayView1<'a, f64> {
        ArrayView1::from(&p[self.b_offset..self.b_offset + self.fan_out])
    }
}

/// Flat weights and biases plus the layer map they were laid out with.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub data: Vec<f64>,
    pub layers: Vec<LayerShape>,
}

impl ParamVector {
    pub fn zeros(cfg: &MlpConfig) -> Self {
        Self { data: vec![0.0; cfg.param_count()], layers: cfg.layers() }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Deterministic initialization from `cfg.seed`; biases start at zero.
pub fn init_params(cfg: &MlpConfig) -> Result<ParamVector> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ParamVector::zeros(cfg);
    for (l, layer) in params.layers.clone().iter().enumerate() {
        let bound = match cfg.init {
            InitScheme::Xavier => (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt(),
            InitScheme::Siren if l == 0 => 1.0 / layer.fan_in as f64,
            InitScheme::Siren => (6.0 / layer.fan_in as f64).sqrt() / cfg.omega_hidden,
        };
        let dist = Uniform::new_inclusive(-bound, bound);
        for w in &mut params.data[layer.w_offset..layer.b_offset] {
            *w = dist.sample(&mut rng);
        }
    }
    Ok(params)
}

/// Network evaluation generic over the scalar type, so the same code runs
/// on plain floats and on tape variables.
pub fn eval_generic<T: Real>(layers: &[LayerShape], params: &[T], t: TimeJet<T>) -> Vec<TimeJet<T>> {
    let mut h = vec![t];
    for layer in layers {
        let mut next = Vec::with_capacity(layer.fan_out);
        for j in 0..layer.fan_out {
            let row = layer.w_offset + j * layer.fan_in;
            let mut acc = TimeJet::constant(params[layer.b_offset + j]);
            for (i, hi) in h.iter().enumerate() {
                acc = acc + *hi * params[row + i];
            }
            next.push(if layer.sine { acc.scale(layer.omega).sin() } else { acc });
        }
        h = next;
    }
    h
}

pub fn forward(params: &ParamVector, t: f64) -> Vec<f64> {
    forward_with_dt(params, t).into_iter().map(|j| j.value).collect()
}

pub fn forward_with_dt(params: &ParamVector, t: f64) -> Vec<TimeJet> {
    eval_generic(&params.layers, &params.data, TimeJet::variable(t))
}

/// Activations of a batched evaluation kept for the backward pass.
pub struct BatchEval {
    taus: Array1<f64>,
    /// Per hidden layer: activations, their input-derivatives, `cos` of the
    /// pre-activation, and the pre-activation's input-derivative.
    h: Vec<Array2<f64>>,
    dh: Vec<Array2<f64>>,
    cos: Vec<Array2<f64>>,
    dz: Vec<Array2<f64>>,
    /// Outputs (`N × output_dim`) and their input-derivatives.
    pub y: Array2<f64>,
    pub dy: Array2<f64>,
}

impl BatchEval {
    pub fn rows(&self) -> usize {
        self.taus.len()
    }
}

/// Evaluates the network and its input-derivative at every `tau`.
pub fn batch_forward(params: &ParamVector, taus: &[f64]) -> BatchEval {
    let n = taus.len();
    let taus = Array1::from(taus.to_vec());
    let layers = &params.layers;
    let p = &params.data;
    let hidden = layers.len() - 1;
    let mut hs: Vec<Array2<f64>> = Vec::with_capacity(hidden);
    let mut dhs: Vec<Array2<f64>> = Vec::with_capacity(hidden);
    let mut coss: Vec<Array2<f64>> = Vec::with_capacity(hidden);
    let mut dzs: Vec<Array2<f64>> = Vec::with_capacity(hidden);

    for (l, layer) in layers[..hidden].iter().enumerate() {
        let w = layer.weights(p);
        let b = layer.bias(p);
        let om = layer.omega;
        let mut z = Array2::<f64>::zeros((n, layer.fan_out));
        let mut dz = Array2::<f64>::zeros((n, layer.fan_out));
        if l == 0 {
            let w0 = w.column(0);
            Zip::from(z.rows_mut()).and(dz.rows_mut()).and(&taus).for_each(|mut zr, mut dzr, &t| {
                Zip::from(&mut zr).and(&mut dzr).and(&w0).and(&b).for_each(|zv, dzv, &wj, &bj| {
                    *zv = om * (wj * t + bj);
                    *dzv = om * wj;
                });
            });
        } else {
            general_mat_mul(om, &hs[l - 1], &w.t(), 0.0, &mut z);
            general_mat_mul(om, &dhs[l - 1], &w.t(), 0.0, &mut dz);
            let ob = b.mapv(|v| om * v);
            z += &ob;
        }
        let mut h = z;
        let mut cos = Array2::<f64>::zeros((n, layer.fan_out));
        let mut dh = Array2::<f64>::zeros((n, layer.fan_out));
        Zip::from(&mut h).and(&mut cos).and(&mut dh).and(&dz).for_each(|hv, cv, dhv, &dzv| {
            let (s, c) = hv.sin_cos();
            *hv = s;
            *cv = c;
            *dhv = c * dzv;
        });
        hs.push(h);
        dhs.push(dh);
        coss.push(cos);
        dzs.push(dz);
    }

    let out = &layers[hidden];
    let wo = out.weights(p);
    let mut y = Array2::<f64>::zeros((n, out.fan_out));
    let mut dy = Array2::<f64>::zeros((n, out.fan_out));
    general_mat_mul(1.0, &hs[hidden - 1], &wo.t(), 0.0, &mut y);
    general_mat_mul(1.0, &dhs[hidden - 1], &wo.t(), 0.0, &mut dy);
    y += &out.bias(p);

    BatchEval { taus, h: hs, dh: dhs, cos: coss, dz: dzs, y, dy }
}

/// Gradient with respect to every parameter of `Σ_n (gy·y_n + gdy·dy_n)`,
/// i.e. the vector-Jacobian product for cotangents `gy` on the outputs and
/// `gdy` on their input-derivatives.
pub fn batch_backward(params: &ParamVector, eval: &BatchEval, gy: &Array2<f64>, gdy: &Array2<f64>) -> Vec<f64> {
    let layers = &params.layers;
    let p = &params.data;
    let hidden = layers.len() - 1;
    let mut grad = vec![0.0; p.len()];

    let out = &layers[hidden];
    {
        let mut gw = Array2::<f64>::zeros((out.fan_out, out.fan_in));
        general_mat_mul(1.0, &gy.t(), &eval.h[hidden - 1], 0.0, &mut gw);
        general_mat_mul(1.0, &gdy.t(), &eval.dh[hidden - 1], 1.0, &mut gw);
        write_block(&mut grad, out.w_offset, &gw);
        let gb = gy.sum_axis(Axis(0));
        grad[out.b_offset..out.b_offset + out.fan_out].copy_from_slice(gb.as_slice().expect("contiguous"));
    }
    let wo = out.weights(p);
    let mut gh = gy.dot(&wo);
    let mut gdh = gdy.dot(&wo);

    for l in (0..hidden).rev() {
        let layer = &layers[l];
        let om = layer.omega;
        // h = sin z, dh = cos z · dz
        let mut gz = Array2::<f64>::zeros(gh.raw_dim());
        let mut gdz = Array2::<f64>::zeros(gh.raw_dim());
        {
            let gzs = gz.as_slice_mut().expect("contiguous");
            let gdzs = gdz.as_slice_mut().expect("contiguous");
            let ghs = gh.as_slice().expect("contiguous");
            let gdhs = gdh.as_slice().expect("contiguous");
            let sins = eval.h[l].as_slice().expect("contiguous");
            let coss = eval.cos[l].as_slice().expect("contiguous");
            let dzs = eval.dz[l].as_slice().expect("contiguous");
            for i in 0..gzs.len() {
                gzs[i] = ghs[i] * coss[i] - gdhs[i] * sins[i] * dzs[i];
                gdzs[i] = gdhs[i] * coss[i];
            }
        }
        if l == 0 {
            let gzs = &gz;
            let gdzs = &gdz;
            for j in 0..layer.fan_out {
                let mut gw = 0.0;
                let mut gb = 0.0;
                for (n, &t) in eval.taus.iter().enumerate() {
                    let g = gzs[[n, j]];
                    gw += g * t + gdzs[[n, j]];
                    gb += g;
                }
                grad[layer.w_offset + j] = om * gw;
                grad[layer.b_offset + j] = om * gb;
            }
        } else {
            let mut gw = Array2::<f64>::zeros((layer.fan_out, layer.fan_in));
            general_mat_mul(om, &gz.t(), &eval.h[l - 1], 0.0, &mut gw);
            general_mat_mul(om, &gdz.t(), &eval.dh[l - 1], 1.0, &mut gw);
            write_block(&mut grad, layer.w_offset, &gw);
            let gb = gz.sum_axis(Axis(0));
            for (j, v) in gb.iter().enumerate() {
                grad[layer.b_offset + j] = om * v;
            }
            let w = layer.weights(p);
            let mut nh = Array2::<f64>::zeros((gz.nrows(), layer.fan_in));
            let mut ndh = Array2::<f64>::zeros((gz.nrows(), layer.fan_in));
            general_mat_mul(om, &gz, &w, 0.0, &mut nh);
            general_mat_mul(om, &gdz, &w, 0.0, &mut ndh);
            gh = nh;
            gdh = ndh;
        }
    }
    grad
}

fn write_block(grad: &mut [f64], offset: usize, block: &Array2<f64>) {
    for (dst, src) in grad[offset..offset + block.len()].iter_mut().zip(block.iter()) {
        *dst = *src;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffnet::tape::ParamTape;
    use proptest::prelude::*;

    fn tiny(seed: u64) -> MlpConfig {
        MlpConfig { hidden_layers: 2, hidden_width: 3, output_dim: 2, omega0: 3.0, seed, ..MlpConfig::default() }
    }

    #[test]
    fn layout() {
        let cfg = MlpConfig::default();
        // 1·64+64, 3·(64·64+64), 64·6+6
        assert_eq!(cfg.param_count(), 128 + 3 * 4160 + 390);
        let layers = cfg.layers();
        assert_eq!(layers.len(), 5);
        assert_eq!(layers[0].omega, 30.0);
        assert_eq!(layers[1].omega, 1.0);
        assert!(!layers[4].sine);
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = MlpConfig::default();
        let a = init_params(&cfg).unwrap();
        let b = init_params(&cfg).unwrap();
        assert_eq!(a, b);
        let c = init_params(&MlpConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn init_rejects_zero_hidden_layers() {
        assert!(init_params(&MlpConfig { hidden_layers: 0, ..MlpConfig::default() }).is_err());
    }

    #[test]
    fn xavier_variance() {
        let cfg = MlpConfig::default();
        let p = init_params(&cfg).unwrap();
        let l = p.layers[1];
        let w = &p.data[l.w_offset..l.b_offset];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64;
        let bound = (6.0f64 / 128.0).sqrt();
        let expect = bound * bound / 3.0;
        assert!(((var - expect) / expect).abs() < 0.2, "var={var} expect={expect}");
        assert!(w.iter().all(|v| v.abs() <= bound));
        assert!(p.data[l.b_offset..l.b_offset + l.fan_out].iter().all(|b| *b == 0.0));
    }

    #[test]
    fn zero_params_give_zero_output() {
        let p = ParamVector::zeros(&MlpConfig::default());
        for t in [0.0, 0.3, 1.0] {
            assert!(forward(&p, t).iter().all(|v| *v == 0.0));
            assert!(forward_with_dt(&p, t).iter().all(|j| j.value == 0.0 && j.d_dt == 0.0));
        }
    }

    fn sine_unit() -> ParamVector {
        let cfg = MlpConfig { hidden_layers: 1, hidden_width: 1, output_dim: 1, omega0: 1.0, ..MlpConfig::default() };
        let mut p = ParamVector::zeros(&cfg);
        let l0 = p.layers[0];
        let l1 = p.layers[1];
        p.data[l0.w_offset] = 1.0;
        p.data[l1.w_offset] = 1.0;
        p
    }

    #[test]
    fn handcrafted_sine_network() {
        let p = sine_unit();
        for t in [0.0, 0.25, 0.9, 1.0] {
            let j = forward_with_dt(&p, t)[0];
            assert_eq!(j.value, f64::sin(t));
            assert_eq!(j.d_dt, f64::cos(t));
        }
    }

    #[test]
    fn batch_matches_pointwise() {
        let cfg = MlpConfig { hidden_width: 8, hidden_layers: 3, ..MlpConfig::default() };
        let p = init_params(&cfg).unwrap();
        let taus = [0.0, 0.13, 0.5, 0.77, 1.0];
        let eval = batch_forward(&p, &taus);
        for (n, &t) in taus.iter().enumerate() {
            let jets = forward_with_dt(&p, t);
            for k in 0..6 {
                assert!((eval.y[[n, k]] - jets[k].value).abs() < 1e-12);
                assert!((eval.dy[[n, k]] - jets[k].d_dt).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn backward_matches_tape() {
        let cfg = tiny(3);
        let p = init_params(&cfg).unwrap();
        let taus = [0.1, 0.4, 0.95];
        // loss = Σ_n Σ_k (c1_k y_k + c2_k y_k' + y_k y_k')
        let c1 = [0.7, -1.3];
        let c2 = [0.2, 0.5];
        let eval = batch_forward(&p, &taus);
        let mut gy = Array2::zeros((3, 2));
        let mut gdy = Array2::zeros((3, 2));
        for n in 0..3 {
            for k in 0..2 {
                gy[[n, k]] = c1[k] + eval.dy[[n, k]];
                gdy[[n, k]] = c2[k] + eval.y[[n, k]];
            }
        }
        let fast = batch_backward(&p, &eval, &gy, &gdy);

        let tape = ParamTape::new();
        let vars = tape.vars(&p.data);
        let mut loss = tape.var(0.0);
        for &t in &taus {
            let out = eval_generic(&p.layers, &vars, TimeJet::variable(tape.var(t)));
            for k in 0..2 {
                loss = loss + out[k].value.scale(c1[k]) + out[k].d_dt.scale(c2[k]) + out[k].value * out[k].d_dt;
            }
        }
        let slow = tape.backward(&loss).collect(&vars);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn jets_match_central_differences(seed in 0u64..10_000, t in -0.05f64..1.05) {
            let cfg = MlpConfig { hidden_layers: 2, hidden_width: 8, seed, ..MlpConfig::default() };
            let p = init_params(&cfg).unwrap();
            let h = 1e-5;
            let jets = forward_with_dt(&p, t);
            let plus = forward(&p, t + h);
            let minus = forward(&p, t - h);
            for k in 0..6 {
                let fd = (plus[k] - minus[k]) / (2.0 * h);
                let scale = jets[k].d_dt.abs().max(1.0);
                prop_assert!((jets[k].d_dt - fd).abs() <= 1e-4 * scale);
            }
        }

        #[test]
        fn hidden_activations_are_bounded(t in -1.0f64..2.0) {
            let cfg = MlpConfig { hidden_layers: 2, hidden_width: 16, ..MlpConfig::default() };
            let p = init_params(&cfg).unwrap();
            let eval = batch_forward(&p, &[t]);
            for h in &eval.h {
                prop_assert!(h.iter().all(|v| (-1.0..=1.0).contains(v)));
            }
        }
    }
}

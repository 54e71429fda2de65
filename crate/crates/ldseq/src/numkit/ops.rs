//! Activations, stable softmax, initialization, and dropout masks.

use super::matrix::{Matrix, Vector};
use super::rng::Rng;
use crate::{Error, Result};

/// Numerically stable softmax: subtracts the maximum before exponentiating, so
/// large logits cannot overflow. Output sums to 1 and preserves the argmax.
pub fn softmax(v: &[f64]) -> Result<Vector> {
    if v.is_empty() {
        return Err(Error::Arg("softmax of an empty vector".into()));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vector = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for x in &mut out {
        *x /= sum;
    }
    Ok(out)
}

pub fn relu(v: &[f64]) -> Vector {
    v.iter().map(|&x| x.max(0.0)).collect()
}

pub fn sigmoid(v: &[f64]) -> Vector {
    v.iter().map(|&x| sigmoid_scalar(x)).collect()
}

pub fn tanh(v: &[f64]) -> Vector {
    v.iter().map(|&x| x.tanh()).collect()
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Hidden-layer activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, v: &[f64]) -> Vector {
        match self {
            Activation::Relu => relu(v),
            Activation::Sigmoid => sigmoid(v),
            Activation::Tanh => tanh(v),
        }
    }

    /// Derivative expressed in terms of the activation *output* `y`.
    pub fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Arg(format!("unknown activation '{other}'"))),
        }
    }
}

/// Uniform initialization on `[-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))]`,
/// which keeps activation variance roughly constant across layers.
pub fn xavier_init(rows: usize, cols: usize, rng: &mut Rng) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Arg(format!(
            "xavier_init: zero dimension ({rows}x{cols})"
        )));
    }
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for x in m.data_mut() {
        *x = rng.uniform(-bound, bound);
    }
    Ok(m)
}

/// Inverted-dropout mask: entries are 0 with probability `p_drop`, else
/// `1/(1-p_drop)`, so the expected value of `mask .* v` equals `v` and
/// inference needs no rescaling.
pub fn dropout_mask(len: usize, p_drop: f64, rng: &mut Rng) -> Result<Vector> {
    if !(0.0..1.0).contains(&p_drop) {
        return Err(Error::Arg(format!(
            "dropout probability must be in [0, 1), got {p_drop}"
        )));
    }
    if p_drop == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 / (1.0 - p_drop);
    Ok((0..len)
        .map(|_| if rng.next_f64() < p_drop { 0.0 } else { keep })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn softmax_symmetry() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_hand_values() {
        // e^1, e^2, e^3 normalized by hand.
        let y = softmax(&[1.0, 2.0, 3.0]).unwrap();
        assert_close(y[0], 0.09003, 1e-5);
        assert_close(y[1], 0.24473, 1e-5);
        assert_close(y[2], 0.66524, 1e-5);
    }

    #[test]
    fn softmax_stable_for_large_logits() {
        let y = softmax(&[1000.0, 1001.0]).unwrap();
        assert!(y.iter().all(|x| x.is_finite()));
        assert_close(y.iter().sum::<f64>(), 1.0, 1e-12);
    }

    #[test]
    fn softmax_empty_is_an_error() {
        assert!(softmax(&[]).is_err());
    }

    #[test]
    fn activation_definitions() {
        assert_eq!(relu(&[-1.0, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
        assert_eq!(sigmoid(&[0.0]), vec![0.5]);
        assert_eq!(tanh(&[0.0]), vec![0.0]);
    }

    #[test]
    fn activation_ranges() {
        // sigmoid saturates to exactly 1.0 in f64 beyond |x| ~ 37; the open
        // interval holds wherever it is representable.
        for x in [-30.0, -1.0, 0.0, 1.0, 30.0] {
            let s = sigmoid(&[x])[0];
            assert!(s > 0.0 && s < 1.0);
            let t = tanh(&[x])[0];
            assert!((-1.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn xavier_single_entry_within_bound() {
        let m = xavier_init(1, 1, &mut Rng::new(5)).unwrap();
        let bound = 3.0f64.sqrt();
        assert!(m.get(0, 0).abs() <= bound);
    }

    #[test]
    fn xavier_deterministic() {
        let a = xavier_init(8, 8, &mut Rng::new(123)).unwrap();
        let b = xavier_init(8, 8, &mut Rng::new(123)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn xavier_zero_dimension_is_an_error() {
        assert!(xavier_init(0, 3, &mut Rng::new(1)).is_err());
        assert!(xavier_init(3, 0, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn xavier_sample_std_matches_uniform_variance() {
        // Uniform on [-b, b] has standard deviation b/sqrt(3); for a 200x200
        // matrix b = sqrt(6/400), so the sample std should be near 0.0707.
        let m = xavier_init(200, 200, &mut Rng::new(77)).unwrap();
        let n = m.len() as f64;
        let mean: f64 = m.data().iter().sum::<f64>() / n;
        let var: f64 = m.data().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let expected = (6.0f64 / 400.0).sqrt() / 3.0f64.sqrt();
        let std = var.sqrt();
        assert!(
            (std - expected).abs() / expected < 0.2,
            "std {std} vs expected {expected}"
        );
    }

    #[test]
    fn dropout_zero_probability_is_identity() {
        let mask = dropout_mask(16, 0.0, &mut Rng::new(1)).unwrap();
        assert_eq!(mask, vec![1.0; 16]);
    }

    #[test]
    fn dropout_rejects_p_at_least_one() {
        assert!(dropout_mask(4, 1.0, &mut Rng::new(1)).is_err());
        assert!(dropout_mask(4, 1.5, &mut Rng::new(1)).is_err());
        assert!(dropout_mask(4, -0.1, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn dropout_mask_mean_is_one() {
        let mask = dropout_mask(100_000, 0.5, &mut Rng::new(21)).unwrap();
        let mean: f64 = mask.iter().sum::<f64>() / mask.len() as f64;
        assert_close(mean, 1.0, 0.02);
    }

    #[test]
    fn dropout_deterministic() {
        let a = dropout_mask(64, 0.3, &mut Rng::new(8)).unwrap();
        let b = dropout_mask(64, 0.3, &mut Rng::new(8)).unwrap();
        assert_eq!(a, b);
    }
}

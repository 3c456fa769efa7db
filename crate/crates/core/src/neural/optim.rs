//! SGD and Adam parameter updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::graph::{GradStore, ParamSet};
use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OptimAlgo {
    Sgd { lr: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl OptimAlgo {
    /// Adam with the standard defaults at the given learning rate.
    pub fn adam(lr: f64) -> Self {
        OptimAlgo::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub algo: OptimAlgo,
    step_count: u64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl Optimizer {
    pub fn new(algo: OptimAlgo, params: &ParamSet) -> Self {
        let zeros: Vec<Tensor> = params
            .ids()
            .map(|id| Tensor::zeros(&params.get(id).shape))
            .collect();
        Optimizer {
            algo,
            step_count: 0,
            first_moment: zeros.clone(),
            second_moment: zeros,
        }
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &GradStore) -> Result<()> {
        for id in params.ids() {
            let grad = grads.get(id);
            if !grad.is_finite() {
                return Err(Error::NonFinite(format!(
                    "gradient of parameter {}",
                    params.name(id)
                )));
            }
        }
        self.step_count += 1;
        match self.algo {
            OptimAlgo::Sgd { lr } => {
                for id in params.ids() {
                    let grad = grads.get(id).data.clone();
                    let tensor = params.get_mut(id);
                    for (p, g) in tensor.data.iter_mut().zip(&grad) {
                        *p -= lr * g;
                    }
                }
            }
            OptimAlgo::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                let t = self.step_count as f64;
                let bias1 = 1.0 - beta1.powf(t);
                let bias2 = 1.0 - beta2.powf(t);
                for id in params.ids() {
                    let grad = grads.get(id).data.clone();
                    let m = &mut self.first_moment[id.0].data;
                    let v = &mut self.second_moment[id.0].data;
                    let tensor = params.get_mut(id);
                    for i in 0..grad.len() {
                        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                        let m_hat = m[i] / bias1;
                        let v_hat = v[i] / bias2;
                        tensor.data[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_param(value: f64) -> (ParamSet, super::super::graph::ParamId) {
        let mut params = ParamSet::new();
        let id = params.add("p", Tensor::vector(vec![value]));
        (params, id)
    }

    #[test]
    fn sgd_step() {
        let (mut params, id) = one_param(1.0);
        let mut grads = GradStore::zeros_of(&params);
        grads.grads[0].data[0] = 0.5;
        let mut opt = Optimizer::new(OptimAlgo::Sgd { lr: 1.0 }, &params);
        opt.step(&mut params, &grads).unwrap();
        assert_eq!(params.get(id).data[0], 0.5);
    }

    #[test]
    fn zero_gradient_keeps_parameters() {
        let (mut params, id) = one_param(2.0);
        let grads = GradStore::zeros_of(&params);
        let mut opt = Optimizer::new(OptimAlgo::adam(0.01), &params);
        opt.step(&mut params, &grads).unwrap();
        assert_eq!(params.get(id).data[0], 2.0);
    }

    #[test]
    fn adam_first_step_magnitude_is_lr() {
        // With constant gradient, the bias-corrected first step is ~lr
        // regardless of gradient scale.
        for &scale in &[1e-4, 1.0, 1e4] {
            let (mut params, id) = one_param(0.0);
            let mut grads = GradStore::zeros_of(&params);
            grads.grads[0].data[0] = scale;
            let mut opt = Optimizer::new(OptimAlgo::adam(1e-3), &params);
            opt.step(&mut params, &grads).unwrap();
            let step = params.get(id).data[0].abs();
            assert!(
                (step - 1e-3).abs() < 1e-4,
                "scale {scale}: step {step}"
            );
        }
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let (mut params, _) = one_param(1.0);
        let mut grads = GradStore::zeros_of(&params);
        grads.grads[0].data[0] = f64::NAN;
        let mut opt = Optimizer::new(OptimAlgo::Sgd { lr: 0.1 }, &params);
        let err = opt.step(&mut params, &grads).unwrap_err();
        assert!(err.to_string().contains("p"));
    }
}

use serde::{Deserialize, Serialize};

use super::{NumericsError, ParamSet};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam with bias correction. Moment tensors are allocated lazily on the
/// first step so the optimizer can be built before the parameters are known.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    step_count: u64,
    first_moment: ParamSet,
    second_moment: ParamSet,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Adam {
            config,
            step_count: 0,
            first_moment: ParamSet::new(),
            second_moment: ParamSet::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) -> Result<(), NumericsError> {
        if self.step_count == 0 {
            self.first_moment = params.zeros_like();
            self.second_moment = params.zeros_like();
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let c = self.config;
        let bias1 = 1.0 - c.beta1.powi(t);
        let bias2 = 1.0 - c.beta2.powi(t);

        let names: Vec<String> = params.names().map(str::to_string).collect();
        for name in &names {
            let grad = grads.get(name)?;
            let param = params.get_mut(name)?;
            if !param.same_shape(grad) {
                return Err(NumericsError::ShapeMismatch(format!(
                    "adam: parameter '{}' {:?} vs gradient {:?}",
                    name,
                    param.shape(),
                    grad.shape()
                )));
            }
            let m = self.first_moment.get_mut(name)?;
            let v = self.second_moment.get_mut(name)?;
            let pd = param.data_mut();
            let md = m.data_mut();
            let vd = v.data_mut();
            for i in 0..pd.len() {
                let g = grad.data()[i];
                md[i] = c.beta1 * md[i] + (1.0 - c.beta1) * g;
                vd[i] = c.beta2 * vd[i] + (1.0 - c.beta2) * g * g;
                let m_hat = md[i] / bias1;
                let v_hat = vd[i] / bias2;
                pd[i] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
        Ok(())
    }
}

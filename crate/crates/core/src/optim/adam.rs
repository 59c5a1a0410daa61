use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Gradients, ModelParams};

/// ADAM hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be finite and non-negative"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(name, "must lie in [0, 1)"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Step count and per-tensor moment estimates, created lazily at zero the
/// first time a tensor name is seen.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    moments: BTreeMap<String, Moments>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(AdamState {
            config,
            step: 0,
            moments: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// First and second moment of a tensor, if it has been updated.
    pub fn moments(&self, name: &str) -> Option<(&[f64], &[f64])> {
        self.moments.get(name).map(|m| (m.m.as_slice(), m.v.as_slice()))
    }

    /// One bias-corrected ADAM update over named tensors.
    ///
    /// `params` and `grads` must list the same names in the same order with
    /// matching lengths. Everything is validated before any value changes,
    /// so a failed step leaves both the parameters and the state untouched.
    pub fn step(&mut self, params: &mut [(&str, &mut [f64])], grads: &[(&str, &[f64])]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::Shape(format!(
                "{} parameter tensors but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for ((pname, p), (gname, g)) in params.iter().zip(grads) {
            if pname != gname {
                return Err(Error::Shape(format!(
                    "gradient `{gname}` supplied for parameter `{pname}`"
                )));
            }
            if p.len() != g.len() {
                return Err(Error::Shape(format!(
                    "`{pname}` has {} values, gradient has {}",
                    p.len(),
                    g.len()
                )));
            }
            if let Some(m) = self.moments.get(*pname) {
                if m.m.len() != p.len() {
                    return Err(Error::Shape(format!(
                        "`{pname}` changed size from {} to {}",
                        m.m.len(),
                        p.len()
                    )));
                }
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteGradient(pname.to_string()));
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for ((name, p), (_, g)) in params.iter_mut().zip(grads) {
            let mom = self
                .moments
                .entry(name.to_string())
                .or_insert_with(|| Moments {
                    m: vec![0.0; g.len()],
                    v: vec![0.0; g.len()],
                });
            for (((w, &gi), m), v) in p.iter_mut().zip(g.iter()).zip(&mut mom.m).zip(&mut mom.v) {
                *m = b1 * *m + (1.0 - b1) * gi;
                *v = b2 * *v + (1.0 - b2) * gi * gi;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }

    /// [`AdamState::step`] over every tensor of a model.
    pub fn step_model(&mut self, params: &mut ModelParams, grads: &Gradients) -> Result<()> {
        let mut p = params.tensors_mut();
        self.step(&mut p, &grads.tensors())
    }
}

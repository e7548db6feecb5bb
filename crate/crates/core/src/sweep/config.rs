use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::model::{CoherentInput, InterferometerParams, LossParams, RamanGain};

/// Raw run parameters as read from a config file and the command line. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    /// Gain of both Raman processes.
    pub g: f64,
    pub theta1: f64,
    /// `theta1 + pi` (the balanced setting) when unset.
    pub theta2: Option<f64>,
    pub alpha_mag: f64,
    pub theta_alpha: f64,
    pub phi: f64,
    pub t: f64,
    pub gamma_tau: f64,
    /// Starting truncation for the oracle.
    pub cutoff: usize,
}

impl Default for ParamSet {
    fn default() -> Self {
        Self {
            g: 2.0,
            theta1: 0.0,
            theta2: None,
            alpha_mag: 10.0,
            theta_alpha: 0.0,
            phi: 0.0,
            t: 1.0,
            gamma_tau: 0.0,
            cutoff: 16,
        }
    }
}

impl ParamSet {
    pub const KEYS: [&'static str; 9] =
        ["g", "theta1", "theta2", "alpha_mag", "theta_alpha", "phi", "T", "gamma_tau", "cutoff"];

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = || value.parse::<f64>().map_err(|_| format!("`{key}`: `{value}` is not a number"));
        match key {
            "g" => self.g = num()?,
            "theta1" => self.theta1 = num()?,
            "theta2" => self.theta2 = Some(num()?),
            "alpha_mag" => self.alpha_mag = num()?,
            "theta_alpha" => self.theta_alpha = num()?,
            "phi" => self.phi = num()?,
            "T" => self.t = num()?,
            "gamma_tau" => self.gamma_tau = num()?,
            "cutoff" => {
                self.cutoff = value.parse().map_err(|_| format!("`cutoff`: `{value}` is not a non-negative integer"))?
            }
            _ => return Err(format!("unknown key `{key}` (expected one of {})", Self::KEYS.join(", "))),
        }
        Ok(())
    }

    pub fn theta2(&self) -> f64 {
        self.theta2.unwrap_or(self.theta1 + PI)
    }

    pub fn to_params(&self) -> Result<InterferometerParams> {
        InterferometerParams::new(
            RamanGain::new(self.g, self.theta1)?,
            RamanGain::new(self.g, self.theta2())?,
            CoherentInput::new(self.alpha_mag, self.theta_alpha)?,
            self.phi,
            LossParams::new(self.t, self.gamma_tau)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(invalid("cutoff", "must be positive"));
        }
        self.to_params().map(|_| ())
    }
}

/// Read `key = value` lines on top of `base`. Blank lines and `#` comments are skipped;
/// a repeated key keeps its last value.
pub fn parse_config(text: &str, base: ParamSet) -> std::result::Result<ParamSet, String> {
    let mut set = base;
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        set.set(key.trim(), value.trim()).map_err(|e| format!("line {}: {e}", n + 1))?;
    }
    Ok(set)
}

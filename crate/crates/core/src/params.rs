use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Physical parameters of the kicked central-spin model.
///
/// Energies and frequencies are in MHz, times in µs, ħ = 1. The drive
/// period is `T = 2π / omega`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Flip-flop coupling, multiplying `I⁺S⁻ + I⁻S⁺`.
    pub a_xy: f64,
    /// Ising coupling, multiplying `I^z S^z`.
    pub a_z: f64,
    /// Central-spin Zeeman field.
    pub b_z: f64,
    /// Satellite Zeeman field (z only).
    #[serde(default)]
    pub b_nz: f64,
    pub omega: f64,
    /// Pulse error on the central spin (radians).
    pub theta_e: f64,
    /// Pulse error on the satellites (radians).
    pub theta_n: f64,
}

/// Coupling class of the central-satellite interaction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Ising,
    Xx,
    Heisenberg,
    Xxz,
}

impl Interaction {
    pub fn name(self) -> &'static str {
        match self {
            Interaction::Ising => "ising",
            Interaction::Xx => "xx",
            Interaction::Heisenberg => "heisenberg",
            Interaction::Xxz => "xxz",
        }
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a_xy: 0.0,
            a_z: 0.0,
            b_z: 0.0,
            b_nz: 0.0,
            omega: 1.0,
            theta_e: 0.0,
            theta_n: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a_xy", self.a_xy),
            ("a_z", self.a_z),
            ("b_z", self.b_z),
            ("b_nz", self.b_nz),
            ("omega", self.omega),
            ("theta_e", self.theta_e),
            ("theta_n", self.theta_n),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be finite")));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// Sets both pulse errors.
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta_e = theta;
        self.theta_n = theta;
        self
    }

    pub fn interaction(&self) -> Interaction {
        if self.a_xy == 0.0 {
            Interaction::Ising
        } else if self.a_z == 0.0 {
            Interaction::Xx
        } else if self.a_xy == self.a_z {
            Interaction::Heisenberg
        } else {
            Interaction::Xxz
        }
    }

    pub fn ising(a_z: f64, b_z: f64, omega: f64) -> Self {
        Self {
            a_z,
            b_z,
            omega,
            ..Self::default()
        }
    }

    pub fn xx(a_xy: f64, b_z: f64, omega: f64) -> Self {
        Self {
            a_xy,
            b_z,
            omega,
            ..Self::default()
        }
    }

    pub fn heisenberg(a: f64, b_z: f64, omega: f64) -> Self {
        Self {
            a_xy: a,
            a_z: a,
            b_z,
            omega,
            ..Self::default()
        }
    }

    pub fn xxz(a_xy: f64, a_z: f64, b_z: f64, omega: f64) -> Self {
        Self {
            a_xy,
            a_z,
            b_z,
            omega,
            ..Self::default()
        }
    }
}

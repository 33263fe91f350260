//! Physical parameters of the two-generator, one-motor shipboard microgrid.
//!
//! The JSON layout mirrors the configuration file shipped in
//! `crates/core/configs/smg_default.json`; field names keep the usual
//! machine-parameter symbols so the file reads like a data sheet.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

const DEFAULT_CONFIG: &str = include_str!("../../configs/smg_default.json");

/// Synchronous generator (one-axis flux-decay model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgParams {
    /// Inertia constant (s).
    #[serde(rename = "H")]
    pub h: f64,
    /// Damping coefficient (p.u.).
    #[serde(rename = "D")]
    pub d: f64,
    /// d-axis synchronous reactance (p.u.).
    pub x_d: f64,
    /// d-axis transient reactance (p.u.).
    pub x_d_prime: f64,
    /// d-axis transient open-circuit time constant (s).
    #[serde(rename = "T_d0_prime")]
    pub t_d0_prime: f64,
    /// Mechanical power (p.u.); overwritten by the steady-state search.
    #[serde(rename = "P_m", default)]
    pub p_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvrParams {
    #[serde(rename = "K_A")]
    pub k_a: f64,
    #[serde(rename = "V_ref")]
    pub v_ref: f64,
    /// Exciter ceiling (p.u.); the floor is zero.
    #[serde(rename = "E_max")]
    pub e_max: f64,
}

/// Induction motor driving the propeller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImParams {
    #[serde(rename = "H_im")]
    pub h: f64,
    pub k_f_im: f64,
    #[serde(rename = "X_s")]
    pub x_s: f64,
    #[serde(rename = "X_m")]
    pub x_m: f64,
    #[serde(rename = "X_r")]
    pub x_r: f64,
    #[serde(rename = "R_r")]
    pub r_r: f64,
}

impl ImParams {
    /// Open-circuit reactance `X_s + X_m`.
    pub fn x(&self) -> f64 {
        self.x_s + self.x_m
    }

    /// Transient reactance `X_s + X_m X_r / (X_m + X_r)`.
    pub fn x_prime(&self) -> f64 {
        self.x_s + self.x_m * self.x_r / (self.x_m + self.x_r)
    }

    /// Transient open-circuit time constant (s).
    pub fn t0_prime(&self, omega_b: f64) -> f64 {
        (self.x_r + self.x_m) / (omega_b * self.r_r)
    }
}

/// Star network: every machine sits behind its internal reactance and a
/// line reactance to one common switchboard bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkParams {
    /// Line reactances (p.u.) for SG1, SG2 and the motor feeder.
    pub x_line: [f64; 3],
    /// Fraction of the total electrical load carried by each generator
    /// at the steady operating point.
    pub sg_share: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Integration step (s).
    pub dt: f64,
    /// Base angular frequency (rad/s).
    pub omega_b: f64,
    /// Pre-shock propeller load torque (p.u.).
    pub load_level: f64,
    /// Nominal load-torque step applied at shock onset (p.u.).
    pub shock: f64,
    /// Half-width of the uncertainty on the shock (p.u.).
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmgParams {
    pub sg: [SgParams; 2],
    pub avr: [AvrParams; 2],
    pub im: ImParams,
    pub network: NetworkParams,
    pub sim: SimParams,
}

/// Per-generator step constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgConstants {
    /// `Δt ω_b`
    pub c4: f64,
    /// `Δt / 2H`
    pub c5: f64,
    /// `Δt / T_d0'`
    pub c6: f64,
}

/// Discrete-step constants derived from [`SmgParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConstants {
    /// `Δt / T0'`
    pub c1: f64,
    /// `Δt ω_b`
    pub c2: f64,
    /// `Δt / 2H_im`
    pub c3: f64,
    pub sg: [SgConstants; 2],
}

impl SgParams {
    pub fn constants(&self, dt: f64, omega_b: f64) -> SgConstants {
        SgConstants {
            c4: dt * omega_b,
            c5: dt / (2.0 * self.h),
            c6: dt / self.t_d0_prime,
        }
    }
}

impl Default for SmgParams {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("shipped configuration parses")
    }
}

impl SmgParams {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Schema {
            path: "config".into(),
            reason: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn constants(&self) -> StepConstants {
        let dt = self.sim.dt;
        let wb = self.sim.omega_b;
        StepConstants {
            c1: dt / self.im.t0_prime(wb),
            c2: dt * wb,
            c3: dt / (2.0 * self.im.h),
            sg: [
                self.sg[0].constants(dt, wb),
                self.sg[1].constants(dt, wb),
            ],
        }
    }

    /// Checks every physical invariant; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        fn bad(field: String, reason: &str) -> Error {
            Error::InvalidParameter {
                field,
                reason: reason.to_string(),
            }
        }
        fn positive(field: String, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(bad(field, "must be finite and > 0"))
            }
        }
        fn non_negative(field: String, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(bad(field, "must be finite and >= 0"))
            }
        }

        for (i, sg) in self.sg.iter().enumerate() {
            positive(format!("sg[{i}].H"), sg.h)?;
            non_negative(format!("sg[{i}].D"), sg.d)?;
            positive(format!("sg[{i}].x_d_prime"), sg.x_d_prime)?;
            positive(format!("sg[{i}].T_d0_prime"), sg.t_d0_prime)?;
            if !(sg.x_d.is_finite() && sg.x_d > sg.x_d_prime) {
                return Err(bad(format!("sg[{i}].x_d"), "must exceed x_d_prime"));
            }
            if !sg.p_m.is_finite() {
                return Err(bad(format!("sg[{i}].P_m"), "must be finite"));
            }
        }
        for (i, avr) in self.avr.iter().enumerate() {
            positive(format!("avr[{i}].K_A"), avr.k_a)?;
            positive(format!("avr[{i}].E_max"), avr.e_max)?;
            if !avr.v_ref.is_finite() {
                return Err(bad(format!("avr[{i}].V_ref"), "must be finite"));
            }
        }
        positive("im.H_im".into(), self.im.h)?;
        non_negative("im.k_f_im".into(), self.im.k_f_im)?;
        positive("im.X_s".into(), self.im.x_s)?;
        positive("im.X_m".into(), self.im.x_m)?;
        positive("im.X_r".into(), self.im.x_r)?;
        positive("im.R_r".into(), self.im.r_r)?;
        for (i, &x) in self.network.x_line.iter().enumerate() {
            non_negative(format!("network.x_line[{i}]"), x)?;
        }
        for (i, &s) in self.network.sg_share.iter().enumerate() {
            non_negative(format!("network.sg_share[{i}]"), s)?;
        }
        let share: f64 = self.network.sg_share.iter().sum();
        if (share - 1.0).abs() > 1e-12 {
            return Err(bad("network.sg_share".into(), "must sum to 1"));
        }
        positive("sim.dt".into(), self.sim.dt)?;
        positive("sim.omega_b".into(), self.sim.omega_b)?;
        non_negative("sim.load_level".into(), self.sim.load_level)?;
        non_negative("sim.epsilon".into(), self.sim.epsilon)?;
        if !self.sim.shock.is_finite() {
            return Err(bad("sim.shock".into(), "must be finite"));
        }

        let c = self.constants();
        if !(c.c1 > 0.0 && c.c1 < 1.0) {
            return Err(bad("im".into(), "dt / T0' must lie in (0, 1)"));
        }
        for (i, s) in c.sg.iter().enumerate() {
            if !(s.c6 > 0.0 && s.c6 < 1.0) {
                return Err(bad(format!("sg[{i}].T_d0_prime"), "dt / T_d0' must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

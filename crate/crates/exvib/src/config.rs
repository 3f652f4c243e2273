//! Scenario configuration: a flat TOML document with dotted keys.
//!
//! ```toml
//! lattice.n = 4
//! lattice.a_angstrom = 2000.0
//! lattice.boundary = "periodic"
//! atom.omega_a_ev = 1.5
//! atom.mu_e_angstrom = 2.0
//! atom.theta_deg = 90.0
//! atom.mc2_ev = 1e12
//! vib.omega_g_ev = 1e-9
//! vib.omega_e_ev = 1e-9
//! vib.n_max = 1
//! vib.q_max = 1
//! onsite.mode = "direct"
//! onsite.m_g_ev = 0.0
//! onsite.m_e_ev = 0.0
//! ```
//!
//! Every key is optional; missing keys take the defaults above. In polynomial
//! mode the slopes come from `onsite.d_g_coeffs` / `onsite.d_e_coeffs`
//! (coefficients of D^λ(u) in eV, u in Å) instead of `m_g_ev` / `m_e_ev`.

use std::path::Path;

use exvib_core::units::{validate_spec, AtomSpec, Boundary, LatticeSpec, OnSiteSlopeModel, Params, VibrationSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryName {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnsiteMode {
    Direct,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub n: usize,
    pub a_angstrom: f64,
    pub boundary: BoundaryName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomConfig {
    pub omega_a_ev: f64,
    pub mu_e_angstrom: f64,
    pub theta_deg: f64,
    pub mc2_ev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VibConfig {
    pub omega_g_ev: f64,
    pub omega_e_ev: f64,
    pub n_max: usize,
    pub q_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnsiteConfig {
    pub mode: OnsiteMode,
    pub m_g_ev: f64,
    pub m_e_ev: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub d_g_coeffs: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub d_e_coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub lattice: LatticeConfig,
    pub atom: AtomConfig,
    pub vib: VibConfig,
    pub onsite: OnsiteConfig,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            n: 4,
            a_angstrom: 2000.0,
            boundary: BoundaryName::Periodic,
        }
    }
}

impl Default for AtomConfig {
    fn default() -> Self {
        AtomConfig {
            omega_a_ev: 1.5,
            mu_e_angstrom: 2.0,
            theta_deg: 90.0,
            mc2_ev: 1e12,
        }
    }
}

impl Default for VibConfig {
    fn default() -> Self {
        VibConfig {
            omega_g_ev: 1e-9,
            omega_e_ev: 1e-9,
            n_max: 1,
            q_max: 1,
        }
    }
}

impl Default for OnsiteConfig {
    fn default() -> Self {
        OnsiteConfig {
            mode: OnsiteMode::Direct,
            m_g_ev: 0.0,
            m_e_ev: 0.0,
            d_g_coeffs: Vec::new(),
            d_e_coeffs: Vec::new(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(single_line(&e.to_string())))
    }

    /// Reads `path` (or starts from the defaults) and applies `KEY=VALUE`
    /// overrides, each value written as a TOML literal.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(single_line(&e.to_string())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{item}' is not KEY=VALUE")))?;
            let parsed: toml::Table = format!("{} = {}", key.trim(), value.trim())
                .parse()
                .map_err(|e: toml::de::Error| CliError::Config(single_line(&e.to_string())))?;
            merge(&mut table, parsed);
        }
        Config::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Config(single_line(&e.to_string())))
    }

    /// Flat `section.key = value` lines that parse back to the same config.
    pub fn echo(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = String::new();
        if let toml::Value::Table(sections) = value {
            for (section, body) in &sections {
                if let toml::Value::Table(body) = body {
                    for (key, v) in body {
                        out.push_str(&format!("{section}.{key} = {v}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn onsite_model(&self) -> OnSiteSlopeModel {
        match self.onsite.mode {
            OnsiteMode::Direct => OnSiteSlopeModel::Direct {
                ground: self.onsite.m_g_ev,
                excited: self.onsite.m_e_ev,
            },
            OnsiteMode::Polynomial => OnSiteSlopeModel::Polynomial {
                ground: self.onsite.d_g_coeffs.clone(),
                excited: self.onsite.d_e_coeffs.clone(),
            },
        }
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        LatticeSpec {
            sites: self.lattice.n,
            spacing: self.lattice.a_angstrom,
            boundary: match self.lattice.boundary {
                BoundaryName::Open => Boundary::Open,
                BoundaryName::Periodic => Boundary::Periodic,
            },
        }
    }

    pub fn atom_spec(&self) -> AtomSpec {
        AtomSpec {
            transition_energy: self.atom.omega_a_ev,
            dipole: self.atom.mu_e_angstrom,
            angle: self.atom.theta_deg.to_radians(),
            rest_mass_energy: self.atom.mc2_ev,
        }
    }

    pub fn vib_spec(&self) -> VibrationSpec {
        VibrationSpec {
            ground_energy: self.vib.omega_g_ev,
            excited_energy: self.vib.omega_e_ev,
            n_max: self.vib.n_max,
            q_max: self.vib.q_max,
        }
    }

    /// The validated parameter bundle; the angle is checked in degrees first
    /// so that 180° is not rejected by rounding in the conversion.
    pub fn params(&self) -> Result<Params, CliError> {
        let mut atom = self.atom_spec();
        if (0.0..=180.0).contains(&self.atom.theta_deg) {
            atom.angle = atom.angle.min(std::f64::consts::PI);
        }
        Ok(validate_spec(self.lattice_spec(), atom, self.vib_spec(), self.onsite_model())?)
    }
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (key, value) in from {
        match (into.get_mut(&key), value) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(key, v);
            }
        }
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

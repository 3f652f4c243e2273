//! Input parameter types and the fixed eV / Å / e·Å unit system.
//!
//! Frequencies are carried as energies (ħω in eV) everywhere, the atomic mass
//! as its rest-mass energy mc², and angles in radians.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result, Violation};

/// Physical constants of the eV / Å / e·Å unit system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    coulomb: f64,
    hbar_c: f64,
}

impl UnitSystem {
    /// e²/(4πε₀) in eV·Å.
    pub const COULOMB_EV_ANGSTROM: f64 = 14.39964;
    /// ħc in eV·Å.
    pub const HBAR_C_EV_ANGSTROM: f64 = 1973.2698;

    pub const STANDARD: UnitSystem = UnitSystem {
        coulomb: Self::COULOMB_EV_ANGSTROM,
        hbar_c: Self::HBAR_C_EV_ANGSTROM,
    };

    pub fn new(coulomb: f64, hbar_c: f64) -> Result<Self> {
        if !(coulomb > 0.0 && coulomb.is_finite()) {
            return Err(Error::domain("coulomb factor must be positive"));
        }
        if !(hbar_c > 0.0 && hbar_c.is_finite()) {
            return Err(Error::domain("hbar*c must be positive"));
        }
        Ok(UnitSystem { coulomb, hbar_c })
    }

    /// e²/(4πε₀) in eV·Å.
    pub fn coulomb(&self) -> f64 {
        self.coulomb
    }

    /// ħc in eV·Å.
    pub fn hbar_c(&self) -> f64 {
        self.hbar_c
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }
}

impl core::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::domain(format!("unknown boundary '{other}'"))),
        }
    }
}

/// Chain geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub sites: usize,
    /// Lattice constant in Å.
    pub spacing: f64,
    pub boundary: Boundary,
}

impl LatticeSpec {
    /// Nearest-neighbour bonds `(i, i + 1)`; the periodic chain adds the
    /// wrap-around bond, so a periodic two-site chain carries the 0–1 bond twice.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.sites;
        match self.boundary {
            Boundary::Open => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Boundary::Periodic => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        }
    }
}

/// Electronic properties of the two-level atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec {
    /// ħω_a in eV.
    pub transition_energy: f64,
    /// Transition dipole μ in e·Å.
    pub dipole: f64,
    /// Angle between dipole and lattice axis, radians.
    pub angle: f64,
    /// mc² in eV.
    pub rest_mass_energy: f64,
}

/// Trap vibrations for ground (b) and excited (c) state atoms plus Fock truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationSpec {
    /// ħω_v^g in eV.
    pub ground_energy: f64,
    /// ħω_v^e in eV.
    pub excited_energy: f64,
    /// Maximum occupation of every single mode.
    pub n_max: usize,
    /// Maximum total number of vibrational quanta.
    pub q_max: usize,
}

/// How the on-site couplings M^g, M^e are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum OnSiteSlopeModel {
    /// M^g and M^e given directly, in eV.
    Direct { ground: f64, excited: f64 },
    /// Polynomial coefficients `[c0, c1, c2, ...]` of the energy deviation
    /// D^λ(u) in eV, with u in Å. Only the linear coefficient enters M^λ.
    Polynomial { ground: Vec<f64>, excited: Vec<f64> },
}

impl Default for OnSiteSlopeModel {
    fn default() -> Self {
        OnSiteSlopeModel::Direct {
            ground: 0.0,
            excited: 0.0,
        }
    }
}

impl OnSiteSlopeModel {
    pub fn mode(&self) -> &'static str {
        match self {
            OnSiteSlopeModel::Direct { .. } => "direct",
            OnSiteSlopeModel::Polynomial { .. } => "polynomial",
        }
    }
}

/// Oscillator length ā = √(ħ/2mω_v) = ħc/√(2·mc²·ħω_v), in Å.
pub fn oscillator_length(rest_mass_energy: f64, vib_energy: f64, units: &UnitSystem) -> Result<f64> {
    if !(rest_mass_energy > 0.0 && rest_mass_energy.is_finite()) {
        return Err(Error::domain("rest-mass energy must be positive"));
    }
    if !(vib_energy > 0.0 && vib_energy.is_finite()) {
        return Err(Error::domain("vibration energy must be positive"));
    }
    Ok(units.hbar_c() / (2.0 * rest_mass_energy * vib_energy).sqrt())
}

/// A parameter bundle whose invariants have all been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    lattice: LatticeSpec,
    atom: AtomSpec,
    vib: VibrationSpec,
    onsite: OnSiteSlopeModel,
    units: UnitSystem,
}

impl Params {
    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }
    pub fn atom(&self) -> &AtomSpec {
        &self.atom
    }
    pub fn vib(&self) -> &VibrationSpec {
        &self.vib
    }
    pub fn onsite(&self) -> &OnSiteSlopeModel {
        &self.onsite
    }
    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    /// Copy with a different dipole angle, re-validated.
    pub fn with_angle(&self, angle: f64) -> Result<Params> {
        let atom = AtomSpec { angle, ..self.atom };
        validate_spec(self.lattice, atom, self.vib, self.onsite.clone())
    }
}

/// Checks every invariant and returns the bundle, or all violations at once.
pub fn validate_spec(
    lattice: LatticeSpec,
    atom: AtomSpec,
    vib: VibrationSpec,
    onsite: OnSiteSlopeModel,
) -> Result<Params> {
    let mut errs = Vec::new();
    let mut fail = |field: &'static str, message: String| errs.push(Violation { field, message });
    let positive = |x: f64| x > 0.0 && x.is_finite();

    if lattice.sites < 2 {
        fail("site-count", format!("must be >= 2, got {}", lattice.sites));
    }
    if !positive(lattice.spacing) {
        fail("lattice-constant", format!("must be > 0, got {}", lattice.spacing));
    }
    if !positive(atom.transition_energy) {
        fail(
            "transition-frequency",
            format!("must be > 0, got {}", atom.transition_energy),
        );
    }
    if !positive(atom.dipole) {
        fail("dipole", format!("must be > 0, got {}", atom.dipole));
    }
    if !(atom.angle >= 0.0 && atom.angle <= core::f64::consts::PI) {
        fail("dipole-angle", format!("must lie in [0, pi], got {}", atom.angle));
    }
    if !positive(atom.rest_mass_energy) {
        fail(
            "rest-mass-energy",
            format!("must be > 0, got {}", atom.rest_mass_energy),
        );
    }
    if !positive(vib.ground_energy) {
        fail("ground-frequency", format!("must be > 0, got {}", vib.ground_energy));
    }
    if !positive(vib.excited_energy) {
        fail(
            "excited-frequency",
            format!("must be > 0, got {}", vib.excited_energy),
        );
    }
    let modes = 2 * lattice.sites;
    if vib.q_max > modes.saturating_mul(vib.n_max) {
        fail(
            "total-quanta-cap",
            format!(
                "must be <= {} (modes x n_max), got {}",
                modes.saturating_mul(vib.n_max),
                vib.q_max
            ),
        );
    }
    match &onsite {
        OnSiteSlopeModel::Direct { ground, excited } => {
            if !ground.is_finite() || !excited.is_finite() {
                fail("onsite", String::from("direct couplings must be finite"));
            }
        }
        OnSiteSlopeModel::Polynomial { ground, excited } => {
            for (name, coeffs) in [("onsite-ground", ground), ("onsite-excited", excited)] {
                if coeffs.len() < 2 {
                    fail(name, String::from("polynomial degree must be >= 1"));
                } else if coeffs.iter().any(|c| !c.is_finite()) {
                    fail(name, String::from("coefficients must be finite"));
                }
            }
        }
    }

    if errs.is_empty() {
        Ok(Params {
            lattice,
            atom,
            vib,
            onsite,
            units: UnitSystem::STANDARD,
        })
    } else {
        Err(Error::Validation(errs))
    }
}

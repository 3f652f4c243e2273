//! Closed-form coupling constants of the exciton-vibration model.
//!
//! All couplings are energies in eV. The transfer coupling J and the
//! transfer-vibration couplings F^λ share the dipolar angular factor with
//! opposite sign, so both vanish at the magic angle arccos(1/√3).


use crate::units::{oscillator_length, AtomSpec, LatticeSpec, OnSiteSlopeModel, Params, UnitSystem, VibrationSpec};
use crate::{Error, Result};

/// Magic angle arccos(1/√3) in radians.
pub fn magic_angle() -> f64 {
    (1.0 / 3.0f64.sqrt()).acos()
}

/// Nearest-neighbour dipole-dipole transfer ħJ = μ²(1 − 3cos²θ)/(4πε₀a³).
pub fn dipole_transfer(atom: &AtomSpec, lattice: &LatticeSpec, units: &UnitSystem) -> f64 {
    let c = atom.angle.cos();
    units.coulomb() * atom.dipole * atom.dipole * (1.0 - 3.0 * c * c) / lattice.spacing.powi(3)
}

/// Transfer-vibration coupling ħF^λ = ā^λ · 3μ²(3cos²θ − 1)/(4πε₀a⁴) for the
/// vibration quantum `vib_energy` = ħω_v^λ.
pub fn transfer_vibration(
    atom: &AtomSpec,
    lattice: &LatticeSpec,
    vib_energy: f64,
    units: &UnitSystem,
) -> Result<f64> {
    let length = oscillator_length(atom.rest_mass_energy, vib_energy, units)?;
    let c = atom.angle.cos();
    Ok(length * 3.0 * units.coulomb() * atom.dipole * atom.dipole * (3.0 * c * c - 1.0)
        / lattice.spacing.powi(4))
}

/// On-site couplings (ħM^g, ħM^e).
///
/// In polynomial mode M^λ = ā^λ · dD^λ/du at u = 0, i.e. the oscillator length
/// times the linear coefficient.
pub fn onsite_coupling(
    model: &OnSiteSlopeModel,
    vib: &VibrationSpec,
    atom: &AtomSpec,
    units: &UnitSystem,
) -> Result<(f64, f64)> {
    match model {
        OnSiteSlopeModel::Direct { ground, excited } => Ok((*ground, *excited)),
        OnSiteSlopeModel::Polynomial { ground, excited } => {
            let slope = |coeffs: &[f64]| -> Result<f64> {
                match coeffs.get(1) {
                    Some(c1) if c1.is_finite() => Ok(*c1),
                    Some(_) => Err(Error::Model("linear coefficient is not finite".into())),
                    None => Err(Error::Model("polynomial degree must be >= 1".into())),
                }
            };
            let len_g = oscillator_length(atom.rest_mass_energy, vib.ground_energy, units)?;
            let len_e = oscillator_length(atom.rest_mass_energy, vib.excited_energy, units)?;
            Ok((len_g * slope(ground)?, len_e * slope(excited)?))
        }
    }
}

/// Polaron shift Δ and renormalized transition energy ω₀ = ω_a − Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaronShift {
    pub delta: f64,
    pub renormalized: f64,
}

/// Δ = (M^g)²/ω_v^g + (M^e)²/ω_v^e, ω₀ = ω_a − Δ.
pub fn polaron_shift(
    onsite_ground: f64,
    onsite_excited: f64,
    vib_ground: f64,
    vib_excited: f64,
    transition: f64,
) -> PolaronShift {
    let delta = onsite_ground * onsite_ground / vib_ground + onsite_excited * onsite_excited / vib_excited;
    PolaronShift {
        delta,
        renormalized: transition - delta,
    }
}

/// Every coupling constant of the model, in eV (lengths in Å).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    /// ħω_a.
    pub transition: f64,
    /// ħω_v^g.
    pub vib_ground: f64,
    /// ħω_v^e.
    pub vib_excited: f64,
    /// ħJ.
    pub transfer: f64,
    /// ħF^g.
    pub transfer_vib_ground: f64,
    /// ħF^e.
    pub transfer_vib_excited: f64,
    /// ħM^g.
    pub onsite_ground: f64,
    /// ħM^e.
    pub onsite_excited: f64,
    /// ħΔ.
    pub shift: f64,
    /// ħω₀ = ħω_a − ħΔ.
    pub renormalized_transition: f64,
    /// ā^g, when derived from physical parameters.
    pub length_ground: Option<f64>,
    /// ā^e, when derived from physical parameters.
    pub length_excited: Option<f64>,
}

impl CouplingSet {
    /// Evaluates all closed forms for a validated parameter bundle.
    pub fn from_params(params: &Params) -> Result<Self> {
        let (atom, lattice, vib, units) = (params.atom(), params.lattice(), params.vib(), params.units());
        let (m_g, m_e) = onsite_coupling(params.onsite(), vib, atom, units)?;
        let shift = polaron_shift(m_g, m_e, vib.ground_energy, vib.excited_energy, atom.transition_energy);
        Ok(CouplingSet {
            transition: atom.transition_energy,
            vib_ground: vib.ground_energy,
            vib_excited: vib.excited_energy,
            transfer: dipole_transfer(atom, lattice, units),
            transfer_vib_ground: transfer_vibration(atom, lattice, vib.ground_energy, units)?,
            transfer_vib_excited: transfer_vibration(atom, lattice, vib.excited_energy, units)?,
            onsite_ground: m_g,
            onsite_excited: m_e,
            shift: shift.delta,
            renormalized_transition: shift.renormalized,
            length_ground: Some(oscillator_length(atom.rest_mass_energy, vib.ground_energy, units)?),
            length_excited: Some(oscillator_length(atom.rest_mass_energy, vib.excited_energy, units)?),
        })
    }

    /// Uncoupled model: only the transition and the two vibration quanta.
    /// Couplings are added with the `with_*` builders.
    pub fn bare(transition: f64, vib_ground: f64, vib_excited: f64) -> Result<Self> {
        if !(vib_ground > 0.0 && vib_excited > 0.0) || !transition.is_finite() {
            return Err(Error::domain("vibration energies must be positive and the transition finite"));
        }
        Ok(CouplingSet {
            transition,
            vib_ground,
            vib_excited,
            transfer: 0.0,
            transfer_vib_ground: 0.0,
            transfer_vib_excited: 0.0,
            onsite_ground: 0.0,
            onsite_excited: 0.0,
            shift: 0.0,
            renormalized_transition: transition,
            length_ground: None,
            length_excited: None,
        })
    }

    pub fn with_transfer(mut self, transfer: f64) -> Self {
        self.transfer = transfer;
        self
    }

    pub fn with_transfer_vibration(mut self, ground: f64, excited: f64) -> Self {
        self.transfer_vib_ground = ground;
        self.transfer_vib_excited = excited;
        self
    }

    pub fn with_onsite(mut self, ground: f64, excited: f64) -> Self {
        self.onsite_ground = ground;
        self.onsite_excited = excited;
        let s = polaron_shift(ground, excited, self.vib_ground, self.vib_excited, self.transition);
        self.shift = s.delta;
        self.renormalized_transition = s.renormalized;
        self
    }

    /// |F/J|, undefined (NaN) at the magic angle.
    pub fn transfer_ratio(&self) -> f64 {
        (self.transfer_vib_ground / self.transfer).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StrongOnsite,
    TransferDominated,
    Intermediate,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::StrongOnsite => "strong-onsite",
            Regime::TransferDominated => "transfer-dominated",
            Regime::Intermediate => "intermediate",
        }
    }
}

/// Lower and upper bounds on M/F separating the three regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            lower: 0.1,
            upper: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// min(|M^g|, |M^e|) / max(|F^g|, |F^e|); infinite when F vanishes.
    pub ratio: f64,
    pub thresholds: RegimeThresholds,
}

pub fn classify_regime(couplings: &CouplingSet, thresholds: RegimeThresholds) -> Result<RegimeReport> {
    let m = couplings.onsite_ground.abs().min(couplings.onsite_excited.abs());
    let m_any = couplings.onsite_ground.abs().max(couplings.onsite_excited.abs());
    let f = couplings
        .transfer_vib_ground
        .abs()
        .max(couplings.transfer_vib_excited.abs());
    if m_any == 0.0 && f == 0.0 {
        return Err(Error::Degenerate("all on-site and transfer-vibration couplings are zero"));
    }
    let ratio = if f == 0.0 { f64::INFINITY } else { m / f };
    let regime = if ratio > thresholds.upper {
        Regime::StrongOnsite
    } else if ratio < thresholds.lower {
        Regime::TransferDominated
    } else {
        Regime::Intermediate
    };
    Ok(RegimeReport {
        regime,
        ratio,
        thresholds,
    })
}

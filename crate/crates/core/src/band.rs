//! Quasi-momentum grid, exciton band and momentum-space scattering vertices.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::units::{Boundary, LatticeSpec};
use crate::{Error, Result};

/// One Bloch mode: integer label n and k = 2πn/(Na) in Å⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub label: i64,
    pub k: f64,
}

/// The N quasi-momenta of a periodic chain, covering (−π/a, π/a].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    sites: usize,
    spacing: f64,
    modes: Vec<Mode>,
}

impl MomentumGrid {
    pub fn sites(&self) -> usize {
        self.sites
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }
    pub fn len(&self) -> usize {
        self.modes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Index of the mode with label `n` (taken modulo N).
    pub fn index_of_label(&self, n: i64) -> usize {
        let sites = self.sites as i64;
        let first = self.modes[0].label;
        (n - first).rem_euclid(sites) as usize
    }

    /// cos(ka) of mode `index`, reduced by quadrant on the integer label so
    /// that ka = ±π/2 gives exactly zero and ±k give identical values.
    pub fn cos_ka(&self, index: usize) -> f64 {
        let n = self.sites as i64;
        let r = (4 * self.modes[index].label.abs()).rem_euclid(4 * n);
        let theta = FRAC_PI_2 * (r % n) as f64 / n as f64;
        match r / n {
            0 => theta.cos(),
            1 => -theta.sin(),
            2 => -theta.cos(),
            _ => theta.sin(),
        }
    }

    /// Index of −k.
    pub fn partner(&self, index: usize) -> usize {
        self.index_of_label(-self.modes[index].label)
    }
}

/// Labels n ∈ {−N/2+1, …, N/2} (even N) or {−(N−1)/2, …, (N−1)/2} (odd N).
pub fn build_grid(lattice: &LatticeSpec) -> Result<MomentumGrid> {
    if lattice.boundary != Boundary::Periodic {
        return Err(Error::Unsupported("momentum grid requires a periodic lattice"));
    }
    if lattice.sites == 0 {
        return Err(Error::Degenerate("empty lattice"));
    }
    let n = lattice.sites as i64;
    let first = if n % 2 == 0 { -n / 2 + 1 } else { -(n - 1) / 2 };
    let modes = (first..first + n)
        .map(|label| Mode {
            label,
            k: 2.0 * PI * label as f64 / (n as f64 * lattice.spacing),
        })
        .collect();
    Ok(MomentumGrid {
        sites: lattice.sites,
        spacing: lattice.spacing,
        modes,
    })
}

/// Exciton energies ħω(k) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonBand {
    grid: MomentumGrid,
    energies: Vec<f64>,
    transfer: f64,
}

impl ExcitonBand {
    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// The transfer coupling ħJ the band was built from.
    pub fn transfer(&self) -> f64 {
        self.transfer
    }

    /// max − min over the grid. Equals 4|J| whenever the grid contains both
    /// k = 0 and k = π/a (even N).
    pub fn bandwidth(&self) -> f64 {
        self.max_energy() - self.min_energy()
    }

    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the lowest mode (first one on ties).
    pub fn argmin(&self) -> usize {
        let min = self.min_energy();
        self.energies.iter().position(|&e| e == min).unwrap_or(0)
    }

    /// Whether the band is wide enough to emit a quantum `vib_energy`.
    pub fn exceeds(&self, vib_energy: f64) -> bool {
        self.bandwidth() > vib_energy
    }

    /// Level spacing at the band centre of the infinite chain, 4π|J|/N.
    pub fn centre_spacing(&self) -> f64 {
        4.0 * PI * self.transfer.abs() / self.grid.sites as f64
    }

    /// Default broadening: 10% of the band-centre level spacing.
    pub fn default_broadening(&self) -> f64 {
        0.1 * self.centre_spacing()
    }
}

/// ħω(k) = ħω_a + 2ħJ cos(ka).
pub fn exciton_dispersion(grid: &MomentumGrid, transition: f64, transfer: f64) -> ExcitonBand {
    let energies = (0..grid.len())
        .map(|i| transition + 2.0 * transfer * grid.cos_ka(i))
        .collect();
    ExcitonBand {
        grid: grid.clone(),
        energies,
        transfer,
    }
}

/// Momentum-space vertex ħF^λ(k) = (2/√N) ħF^λ cos(ka) for every grid mode.
pub fn vertex(grid: &MomentumGrid, coupling: f64) -> Vec<f64> {
    let norm = 2.0 / (grid.sites as f64).sqrt();
    (0..grid.len()).map(|i| norm * coupling * grid.cos_ka(i)).collect()
}

/// Golden-rule weight 2π|ħF(k)|², exactly as the bare formula reads: without a
/// density of final states its unit is eV², to be read as ħ·rate·eV.
pub fn golden_rule_rate(vertex: f64) -> f64 {
    2.0 * PI * vertex * vertex
}

/// Normalized Gaussian δ_η(x) in eV⁻¹.
pub fn gaussian_delta(x: f64, eta: f64) -> f64 {
    (-(x * x) / (2.0 * eta * eta)).exp() / (eta * (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    /// Ground-state atom vibration (b modes).
    Ground,
    /// Excited-state atom vibration (c modes).
    Excited,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::Ground, Species::Excited];

    pub fn as_str(self) -> &'static str {
        match self {
            Species::Ground => "g",
            Species::Excited => "e",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Species::Ground => 0,
            Species::Excited => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    Emission,
    Absorption,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Emission => "emission",
            ChannelKind::Absorption => "absorption",
        }
    }
}

/// A scattering k → k' with emission or absorption of one quantum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub from: usize,
    pub to: usize,
    pub species: Species,
    pub kind: ChannelKind,
    /// ω(from) − ω(to) − (±ω_v): the energy mismatch absorbed by broadening.
    pub mismatch: f64,
}

/// Vertex entering a k → k' transition of the momentum-space coupling:
/// emission of b uses F^g(k'), emission of c uses F^e(k), absorption of b uses
/// F^g(k) and absorption of c uses F^e(k').
pub fn channel_vertex(
    grid: &MomentumGrid,
    species: Species,
    kind: ChannelKind,
    from: usize,
    to: usize,
    coupling: f64,
) -> f64 {
    let at = match (species, kind) {
        (Species::Ground, ChannelKind::Emission) | (Species::Excited, ChannelKind::Absorption) => to,
        (Species::Excited, ChannelKind::Emission) | (Species::Ground, ChannelKind::Absorption) => from,
    };
    let norm = 2.0 / (grid.sites as f64).sqrt();
    norm * coupling * grid.cos_ka(at)
}

/// All (k, k') pairs conserving energy within `eta`: emission when
/// ω(k) − ω(k') = ω_v^λ, absorption when ω(k') − ω(k) = ω_v^λ.
///
/// A species is only searched when the band can bridge its quantum,
/// `bandwidth + eta >= ω_v^λ`.
pub fn scattering_channels(band: &ExcitonBand, vib_ground: f64, vib_excited: f64, eta: f64) -> Vec<Channel> {
    let mut out = Vec::new();
    let e = band.energies();
    for (species, quantum) in [(Species::Ground, vib_ground), (Species::Excited, vib_excited)] {
        if band.bandwidth() + eta < quantum {
            continue;
        }
        for from in 0..e.len() {
            for to in 0..e.len() {
                let gap = e[from] - e[to];
                if gap > 0.0 && (gap - quantum).abs() <= eta {
                    out.push(Channel {
                        from,
                        to,
                        species,
                        kind: ChannelKind::Emission,
                        mismatch: gap - quantum,
                    });
                } else if gap < 0.0 && (-gap - quantum).abs() <= eta {
                    out.push(Channel {
                        from,
                        to,
                        species,
                        kind: ChannelKind::Absorption,
                        mismatch: gap + quantum,
                    });
                }
            }
        }
    }
    out
}

/// Golden-rule weight summed over final states with the Gaussian density of
/// states, Σ_k' 2π|F|² δ_η(ω(k) − ω(k') ∓ ω_v), for every mode `k`.
/// The result is ħ × rate in eV.
pub fn dos_weighted_rates(
    band: &ExcitonBand,
    species: Species,
    kind: ChannelKind,
    coupling: f64,
    quantum: f64,
    eta: f64,
) -> Vec<f64> {
    let mut rates = alloc::vec![0.0; band.energies().len()];
    let (g, e) = match species {
        Species::Ground => (quantum, f64::INFINITY),
        Species::Excited => (f64::INFINITY, quantum),
    };
    for ch in scattering_channels(band, g, e, eta) {
        if ch.species == species && ch.kind == kind {
            let v = channel_vertex(band.grid(), species, kind, ch.from, ch.to, coupling);
            rates[ch.from] += golden_rule_rate(v) * gaussian_delta(ch.mismatch, eta);
        }
    }
    rates
}

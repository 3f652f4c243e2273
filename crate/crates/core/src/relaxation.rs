//! Master-equation kinetics of an exciton distribution over Bloch modes.
//!
//! Rates are golden-rule weights of the momentum-space vertices with a
//! Gaussian-broadened energy delta. At temperature T > 0 emission carries the
//! Bose factor n̄(ε) + 1 and absorption n̄(ε), with ε the exciton energy
//! exchanged by the transition, so every connected pair satisfies detailed
//! balance with respect to the exciton energies.
//!
//! Populations are propagated by uniformization, which keeps them
//! non-negative and conserves total probability to rounding.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::band::{channel_vertex, gaussian_delta, golden_rule_rate, scattering_channels, ChannelKind, ExcitonBand, Species};
use crate::couplings::CouplingSet;
use crate::{Error, Result};

/// One directed transition with its rate (ħ × rate, eV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub species: Species,
    pub kind: ChannelKind,
    /// Exciton energy released, ω(from) − ω(to), eV.
    pub gap: f64,
    /// Vibration quantum ħω_v^λ of the species, eV.
    pub quantum: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    energies: Vec<f64>,
    transitions: Vec<Transition>,
    eta: f64,
    temperature: f64,
    /// Column-major generator G with G[to + n·from] = rate and zero column sums.
    generator: Vec<f64>,
}

impl RateMatrix {
    /// Builds a rate matrix from explicit transitions; `energies` are the mode
    /// energies the populations live on.
    pub fn from_transitions(energies: Vec<f64>, transitions: Vec<Transition>, eta: f64, temperature: f64) -> Result<Self> {
        let n = energies.len();
        let mut generator = vec![0.0; n * n];
        for t in &transitions {
            if t.from >= n || t.to >= n || t.from == t.to {
                return Err(Error::domain("transition endpoints must be distinct modes"));
            }
            if !(t.rate >= 0.0 && t.rate.is_finite()) {
                return Err(Error::domain("rates must be finite and non-negative"));
            }
            generator[t.to + n * t.from] += t.rate;
        }
        for from in 0..n {
            let out: f64 = (0..n).filter(|&to| to != from).map(|to| generator[to + n * from]).sum();
            generator[from + n * from] = -out;
        }
        Ok(RateMatrix {
            energies,
            transitions,
            eta,
            temperature,
            generator,
        })
    }

    pub fn modes(&self) -> usize {
        self.energies.len()
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Generator element G[to ← from].
    pub fn generator(&self, to: usize, from: usize) -> f64 {
        self.generator[to + self.modes() * from]
    }

    /// Total rate k' ← k summed over species and channels.
    pub fn rate(&self, to: usize, from: usize) -> f64 {
        if to == from {
            0.0
        } else {
            self.generator(to, from)
        }
    }

    /// Largest total outflow from any mode.
    pub fn max_outflow(&self) -> f64 {
        (0..self.modes()).map(|k| -self.generator(k, k)).fold(0.0, f64::max)
    }

    /// Connected components of the transition graph (undirected).
    pub fn components(&self) -> Vec<usize> {
        let n = self.modes();
        let mut label: Vec<usize> = (0..n).collect();
        fn root(label: &mut [usize], mut i: usize) -> usize {
            while label[i] != i {
                label[i] = label[label[i]];
                i = label[i];
            }
            i
        }
        for t in &self.transitions {
            if t.rate > 0.0 {
                let (a, b) = (root(&mut label, t.from), root(&mut label, t.to));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|i| root(&mut label, i)).collect()
    }
}

/// Emission and absorption weights (n̄(ε) + 1, n̄(ε)) for an exchanged energy ε > 0.
fn bose_weights(gap: f64, temperature: f64) -> (f64, f64) {
    if temperature <= 0.0 {
        return (1.0, 0.0);
    }
    let x = gap / temperature;
    let boltz = (-x).exp();
    let denom = -(-x).exp_m1(); // 1 − e^{−x}
    (1.0 / denom, boltz / denom)
}

/// Rate matrix from the band and the transfer-vibration couplings.
///
/// `temperature` is k_B T in eV; zero switches off absorption exactly.
pub fn build_rate_matrix(band: &ExcitonBand, couplings: &CouplingSet, eta: f64, temperature: f64) -> Result<RateMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain("broadening eta must be positive"));
    }
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::domain("temperature must be non-negative"));
    }
    let e = band.energies();
    let mut transitions = Vec::new();
    for ch in scattering_channels(band, couplings.vib_ground, couplings.vib_excited, eta) {
        let (coupling, quantum) = match ch.species {
            Species::Ground => (couplings.transfer_vib_ground, couplings.vib_ground),
            Species::Excited => (couplings.transfer_vib_excited, couplings.vib_excited),
        };
        let gap = e[ch.from] - e[ch.to];
        let (emit, absorb) = bose_weights(gap.abs(), temperature);
        let weight = match ch.kind {
            ChannelKind::Emission => emit,
            ChannelKind::Absorption => absorb,
        };
        if weight == 0.0 {
            continue;
        }
        let v = channel_vertex(band.grid(), ch.species, ch.kind, ch.from, ch.to, coupling);
        let rate = golden_rule_rate(v) * gaussian_delta(ch.mismatch, eta) * weight;
        if rate > 0.0 {
            transitions.push(Transition {
                from: ch.from,
                to: ch.to,
                species: ch.species,
                kind: ch.kind,
                gap,
                quantum,
                rate,
            });
        }
    }
    RateMatrix::from_transitions(e.to_vec(), transitions, eta, temperature)
}

/// Long-time limit of the kinetics started from `p0`: each connected
/// component keeps its initial mass, spread over the kernel of the generator
/// restricted to that component.
pub fn stationary_populations(rates: &RateMatrix, p0: &[f64]) -> Result<Vec<f64>> {
    let n = rates.modes();
    if p0.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: p0.len(),
        });
    }
    let labels = rates.components();
    let mut out = vec![0.0; n];
    for root in 0..n {
        let members: Vec<usize> = (0..n).filter(|&k| labels[k] == root).collect();
        let mass: f64 = members.iter().map(|&k| p0[k]).sum();
        if members.is_empty() || mass == 0.0 {
            continue;
        }
        let m = members.len();
        // G_C π = 0 with the last balance row replaced by Σπ = 1
        let mut a = DMatrix::from_fn(m, m, |r, c| rates.generator(members[r], members[c]));
        a.row_mut(m - 1).fill(1.0);
        let mut rhs = DVector::zeros(m);
        rhs[m - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&rhs)
            .ok_or(Error::Degenerate("singular balance equations"))?;
        for (i, &k) in members.iter().enumerate() {
            out[k] = mass * pi[i].max(0.0);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    /// populations[t][k].
    pub populations: Vec<Vec<f64>>,
    /// Cumulative quanta emitted, indexed `[time][species]`.
    pub emitted: Vec<[f64; 2]>,
    /// Cumulative quanta absorbed, indexed `[time][species]`.
    pub absorbed: Vec<[f64; 2]>,
    /// Cumulative exciton energy released by transitions, eV.
    pub released: Vec<f64>,
}

/// Integrates dP/dt = G·P from `p0` to time `t` (ħ/eV), reporting `steps + 1` points.
pub fn evolve_populations(rates: &RateMatrix, p0: &[f64], t: f64, steps: usize) -> Result<PopulationTrajectory> {
    let n = rates.modes();
    if p0.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: p0.len(),
        });
    }
    let total: f64 = p0.iter().sum();
    if p0.iter().any(|&p| p.is_nan() || p < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain("initial populations must form a probability vector"));
    }
    if steps == 0 || !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("need a non-negative time and at least one step"));
    }

    let lambda = rates.max_outflow();
    let dt = t / steps as f64;
    // substeps with Λh ≤ 2 keep the Poisson series short and well scaled
    let sub = if lambda > 0.0 { ((lambda * dt) / 2.0).ceil().max(1.0) as usize } else { 1 };
    let h = dt / sub as f64;

    let mut traj = PopulationTrajectory {
        times: vec![0.0],
        populations: vec![p0.to_vec()],
        emitted: vec![[0.0; 2]],
        absorbed: vec![[0.0; 2]],
        released: vec![0.0],
    };
    let mut p = p0.to_vec();
    let mut emitted = [0.0; 2];
    let mut absorbed = [0.0; 2];
    let mut released = 0.0;
    for step in 1..=steps {
        for _ in 0..sub {
            let (next, occupancy) = uniformized_step(rates, &p, lambda, h);
            for tr in rates.transitions() {
                let flow = tr.rate * occupancy[tr.from];
                match tr.kind {
                    ChannelKind::Emission => emitted[tr.species.index()] += flow,
                    ChannelKind::Absorption => absorbed[tr.species.index()] += flow,
                }
                released += flow * tr.gap;
            }
            p = next;
        }
        traj.times.push(dt * step as f64);
        traj.populations.push(p.clone());
        traj.emitted.push(emitted);
        traj.absorbed.push(absorbed);
        traj.released.push(released);
    }
    Ok(traj)
}

/// Returns P(h) and ∫₀ʰ P(s) ds via the uniformized series with
/// M = I + G/Λ: P(h) = Σ pois(n) Mⁿ P, ∫P = Λ⁻¹ Σ (1 − cdf(n)) Mⁿ P.
fn uniformized_step(rates: &RateMatrix, p: &[f64], lambda: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = p.len();
    if lambda == 0.0 || h == 0.0 {
        return (p.to_vec(), p.iter().map(|x| x * h).collect());
    }
    let x = lambda * h;
    let mut term = p.to_vec();
    let mut pois = (-x).exp();
    let mut cdf = pois;
    let mut out: Vec<f64> = term.iter().map(|v| v * pois).collect();
    let mut integral: Vec<f64> = term.iter().map(|v| v * (1.0 - cdf) / lambda).collect();
    let mut next = vec![0.0; n];
    let mut k = 0usize;
    while 1.0 - cdf > 1e-18 && k < 200 {
        k += 1;
        for (to, slot) in next.iter_mut().enumerate() {
            let mut acc = term[to];
            for (from, &v) in term.iter().enumerate() {
                acc += rates.generator[to + n * from] * v / lambda;
            }
            *slot = acc;
        }
        core::mem::swap(&mut term, &mut next);
        for v in term.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        pois *= x / k as f64;
        cdf += pois;
        let tail = (1.0 - cdf).max(0.0);
        for i in 0..n {
            out[i] += pois * term[i];
            integral[i] += tail * term[i] / lambda;
        }
    }
    // restore the mass lost to the truncated Poisson tail
    let mass: f64 = out.iter().sum();
    let target: f64 = p.iter().sum();
    if mass > 0.0 {
        out.iter_mut().for_each(|v| *v *= target / mass);
    }
    (out, integral)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatingReport {
    pub times: Vec<f64>,
    /// ⟨ħω⟩(t), eV.
    pub mean_energy: Vec<f64>,
    /// Final cumulative quanta emitted, [g, e].
    pub emitted: [f64; 2],
    /// Final cumulative quanta absorbed, [g, e].
    pub absorbed: [f64; 2],
    /// ⟨ħω⟩(0) − ⟨ħω⟩(t_end), eV.
    pub exciton_energy_lost: f64,
    /// Σ_λ ħω_v^λ (emitted − absorbed), eV.
    pub vibrational_energy: f64,
    /// Expected number of transitions over the run.
    pub transitions: f64,
    /// |exciton_energy_lost − vibrational_energy|, eV.
    pub bookkeeping_residual: f64,
    /// 2η per transition.
    pub bookkeeping_bound: f64,
}

pub fn heating_report(traj: &PopulationTrajectory, band: &ExcitonBand, vib_ground: f64, vib_excited: f64, eta: f64) -> HeatingReport {
    let e = band.energies();
    let mean_energy: Vec<f64> = traj
        .populations
        .iter()
        .map(|p| p.iter().zip(e).map(|(a, b)| a * b).sum())
        .collect();
    let last = traj.times.len() - 1;
    let emitted = traj.emitted[last];
    let absorbed = traj.absorbed[last];
    let lost = mean_energy[0] - mean_energy[last];
    let vibrational = vib_ground * (emitted[0] - absorbed[0]) + vib_excited * (emitted[1] - absorbed[1]);
    let transitions = emitted.iter().chain(absorbed.iter()).sum::<f64>();
    HeatingReport {
        times: traj.times.clone(),
        mean_energy,
        emitted,
        absorbed,
        exciton_energy_lost: lost,
        vibrational_energy: vibrational,
        transitions,
        bookkeeping_residual: (lost - vibrational).abs(),
        bookkeeping_bound: 2.0 * eta * transitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::{build_grid, exciton_dispersion};
    use crate::units::{Boundary, LatticeSpec};
    use approx::assert_relative_eq;

    fn band(n: usize, j: f64) -> ExcitonBand {
        let g = build_grid(&LatticeSpec {
            sites: n,
            spacing: 1.0,
            boundary: Boundary::Periodic,
        })
        .unwrap();
        exciton_dispersion(&g, 1.0, j)
    }

    fn couplings(j: f64, w: f64) -> CouplingSet {
        CouplingSet::bare(1.0, w, 1.3 * w)
            .unwrap()
            .with_transfer(j)
            .with_transfer_vibration(0.01, -0.008)
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(build_rate_matrix(&band(4, 0.1), &couplings(0.1, 0.1), 0.0, 0.0).is_err());
    }

    #[test]
    fn flat_band_has_zero_rates() {
        let r = build_rate_matrix(&band(8, 0.0), &couplings(0.0, 0.05), 0.01, 0.0).unwrap();
        assert!(r.transitions().is_empty());
        assert_eq!(r.max_outflow(), 0.0);
        let p0 = vec![0.125; 8];
        let traj = evolve_populations(&r, &p0, 10.0, 5).unwrap();
        assert!(traj.populations.iter().all(|p| p == &p0));
    }

    #[test]
    fn zero_temperature_only_downhill() {
        let b = band(16, 0.25);
        let r = build_rate_matrix(&b, &couplings(0.25, 0.2), 0.05, 0.0).unwrap();
        assert!(!r.transitions().is_empty());
        for t in r.transitions() {
            assert_eq!(t.kind, ChannelKind::Emission);
            assert!(b.energies()[t.from] > b.energies()[t.to]);
        }
    }

    #[test]
    fn detailed_balance_ratio() {
        let b = band(16, 0.25);
        let temp = 0.07;
        let r = build_rate_matrix(&b, &couplings(0.25, 0.2), 0.05, temp).unwrap();
        let e = b.energies();
        let mut checked = 0;
        for k in 0..16 {
            for kp in 0..16 {
                let fwd = r.rate(kp, k);
                if fwd > 0.0 {
                    let back = r.rate(k, kp);
                    assert_relative_eq!(fwd / back, ((e[k] - e[kp]) / temp).exp(), max_relative = 1e-12);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let r = build_rate_matrix(&band(12, 0.3), &couplings(0.3, 0.2), 0.06, 0.05).unwrap();
        for k in 0..12 {
            let s: f64 = (0..12).map(|kp| r.generator(kp, k)).sum();
            assert!(s.abs() <= 1e-12 * r.max_outflow().max(1.0));
        }
    }

    #[test]
    fn single_one_way_rate_decays_exponentially() {
        let w = 0.7;
        let t = Transition {
            from: 1,
            to: 0,
            species: Species::Ground,
            kind: ChannelKind::Emission,
            gap: 0.5,
            quantum: 0.5,
            rate: w,
        };
        let r = RateMatrix::from_transitions(vec![0.0, 0.5], vec![t], 0.01, 0.0).unwrap();
        let traj = evolve_populations(&r, &[0.0, 1.0], 6.0, 12).unwrap();
        for (time, p) in traj.times.iter().zip(&traj.populations) {
            assert_relative_eq!(p[1], (-w * time).exp(), epsilon = 1e-13);
            assert_relative_eq!(p[0] + p[1], 1.0, epsilon = 1e-14);
        }
        let last = traj.emitted.last().unwrap()[0];
        assert_relative_eq!(last, 1.0 - (-w * 6.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_probability() {
        let r = build_rate_matrix(&band(4, 0.1), &couplings(0.1, 0.1), 0.05, 0.0).unwrap();
        assert!(evolve_populations(&r, &[0.5, 0.6, 0.0, 0.0], 1.0, 1).is_err());
        assert!(evolve_populations(&r, &[1.5, -0.5, 0.0, 0.0], 1.0, 1).is_err());
    }

    #[test]
    fn single_downhill_transition_bookkeeping() {
        let eta = 0.01;
        let t = Transition {
            from: 1,
            to: 0,
            species: Species::Excited,
            kind: ChannelKind::Emission,
            gap: 0.505,
            quantum: 0.5,
            rate: 3.0,
        };
        let r = RateMatrix::from_transitions(vec![0.0, 0.505], vec![t], eta, 0.0).unwrap();
        let traj = evolve_populations(&r, &[0.0, 1.0], 20.0, 10).unwrap();
        let g = build_grid(&LatticeSpec { sites: 2, spacing: 1.0, boundary: Boundary::Periodic }).unwrap();
        let b = exciton_dispersion(&g, 0.2525, -0.12625);
        let rep = heating_report(&traj, &b, 0.3, 0.5, eta);
        assert_relative_eq!(rep.emitted[1], 1.0, epsilon = 1e-12);
        assert!(rep.bookkeeping_residual <= eta);
    }

    #[test]
    fn stationary_limit_matches_long_evolution() {
        let b = band(10, 0.25);
        let r = build_rate_matrix(&b, &couplings(0.25, 0.2), 0.05, 0.1).unwrap();
        let mut p0 = vec![0.0; 10];
        p0[3] = 0.6;
        p0[7] = 0.4;
        let limit = stationary_populations(&r, &p0).unwrap();
        let late = evolve_populations(&r, &p0, 4e4 / r.max_outflow(), 1).unwrap();
        for (a, b) in limit.iter().zip(late.populations.last().unwrap()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-10);
        }
        assert_relative_eq!(limit.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }
}

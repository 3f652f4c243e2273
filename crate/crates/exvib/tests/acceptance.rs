//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use exvib_core::band::{build_grid, exciton_dispersion};
use exvib_core::couplings::{magic_angle, CouplingSet};
use exvib_core::dynamics::{basis_state, evolve, evolve_with, expectation, transition_probability, EvolveOptions};
use exvib_core::fock::{enumerate_basis, FockState, DEFAULT_BASIS_CAP};
use exvib_core::hamiltonian::{assemble_hamiltonian, Process, TermMask};
use exvib_core::polaron::polaron_report;
use exvib_core::relaxation::{build_rate_matrix, evolve_populations, stationary_populations, RateMatrix};
use exvib_core::spectrum::diagonalize;
use exvib_core::units::{oscillator_length, Boundary, LatticeSpec, UnitSystem, VibrationSpec};
use exvib_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

const RUNTIME_LIMIT: Duration = Duration::from_secs(1);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("angle sweep: opposite signs, shared magic-angle zero, constant |F/J|", angle_sweep),
        ("frozen-vibration spectrum equals the exciton dispersion", dispersion_oracle),
        ("polaron shift of the dressed site", polaron_shift),
        ("single transfer vertex connects only its own Fock patterns", process_selectivity),
        ("short-time emission probability grows as |F|^2 t^2", golden_rule),
        ("rate-equation kinetics: conservation, T=0 descent, Boltzmann steady state", kinetics),
        ("time evolution: norm/energy conservation and two-site revival", time_evolution),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(check).unwrap_or_else(|_| Outcome::new(false, "panicked"));
        let status = if out.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{}] {name} — {} ({:.3} s)",
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!out.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn periodic(sites: usize) -> LatticeSpec {
    LatticeSpec {
        sites,
        spacing: 2000.0,
        boundary: Boundary::Periodic,
    }
}

fn open(sites: usize) -> LatticeSpec {
    LatticeSpec {
        sites,
        spacing: 2000.0,
        boundary: Boundary::Open,
    }
}

fn vib(w: f64, n_max: usize, q_max: usize) -> VibrationSpec {
    VibrationSpec {
        ground_energy: w,
        excited_energy: w,
        n_max,
        q_max,
    }
}

/// The typical numbers: μ = 2 e·Å, a = 2000 Å, mc² = 1e12 eV, ħω_v = 1e-9 eV.
fn typical() -> CouplingSet {
    let out = Command::new(env!("CARGO_BIN_EXE_exvib")).arg("couplings").output().unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = &doc["couplings"];
    let f = |k: &str| c[k].as_f64().unwrap();
    CouplingSet::bare(f("transition_ev"), f("vib_ground_ev"), f("vib_excited_ev"))
        .unwrap()
        .with_transfer(f("hJ_ev"))
        .with_transfer_vibration(f("hF_g_ev"), f("hF_e_ev"))
}

fn angle_sweep() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_exvib"))
        .args(["sweep-theta", "--from", "0", "--to", "180", "--steps", "18001"])
        .args(["--set", "atom.mu_e_angstrom=2.0", "--set", "lattice.a_angstrom=2000.0"])
        .args(["--set", "atom.mc2_ev=1e12", "--set", "vib.omega_g_ev=1e-9", "--set", "vib.omega_e_ev=1e-9"])
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Outcome::new(false, String::from_utf8_lossy(&out.stderr));
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(&out.stdout[..]);
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<[f64; 4]> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            [0, 1, 2, 3].map(|i| r[i].parse().unwrap())
        })
        .collect();

    let signs_ok = rows.iter().all(|r| r[1] * r[2] <= 0.0 && r[1] * r[3] <= 0.0)
        && rows.iter().filter(|r| r[1] != 0.0).all(|r| r[1] * r[2] < 0.0);
    let mut zeros_j = Vec::new();
    let mut zeros_f = Vec::new();
    for w in rows.windows(2) {
        for (col, zeros) in [(1, &mut zeros_j), (2, &mut zeros_f)] {
            let (a, b) = (w[0][col], w[1][col]);
            if a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
                zeros.push(w[0][0] + (w[1][0] - w[0][0]) * a / (a - b));
            }
        }
    }
    let magic = magic_angle().to_degrees();
    let zero_ok = zeros_j.len() == 2
        && zeros_f.len() == 2
        && (zeros_j[0] - magic).abs() <= 0.01
        && (zeros_f[0] - magic).abs() <= 0.01
        && (zeros_j[1] - (180.0 - magic)).abs() <= 0.01;

    let expected = 3.0 * oscillator_length(1e12, 1e-9, &UnitSystem::STANDARD).unwrap() / 2000.0;
    let worst = rows
        .iter()
        .filter(|r| r[1] != 0.0)
        .map(|r| ((r[2] / r[1]).abs() - expected).abs() / expected)
        .fold(0.0, f64::max);
    let header_ok = header == ["theta_deg", "hJ_ev", "hF_g_ev", "hF_e_ev"];
    Outcome::new(
        header_ok && signs_ok && zero_ok && worst <= 1e-12 && elapsed < RUNTIME_LIMIT,
        format!(
            "zero at {:.5}° (expected {magic:.5}°), |F/J| = {expected:.6} spread {worst:.1e}, {} rows in {:.3} s",
            zeros_j.first().copied().unwrap_or(f64::NAN),
            rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn dispersion_oracle() -> Outcome {
    let start = Instant::now();
    let c = typical();
    let mut worst: f64 = 0.0;
    for n in 3..=6 {
        let lattice = periodic(n);
        let basis = enumerate_basis(&lattice, &vib(1e-9, 0, 0), DEFAULT_BASIS_CAP).unwrap();
        let h = assemble_hamiltonian(&basis, &lattice, &c, TermMask::ALL).unwrap();
        let eig = diagonalize(&h, n).unwrap().eigenvalues;
        let band = exciton_dispersion(&build_grid(&lattice).unwrap(), c.transition, c.transfer);
        let mut want = band.energies().to_vec();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&want) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-12 && elapsed < RUNTIME_LIMIT,
        format!("N = 3..6, max relative deviation {worst:.1e}"),
    )
}

fn polaron_shift() -> Outcome {
    let start = Instant::now();
    let (w, n_max) = (1e-9, 10);
    // M/ω_v = 0.1 for both species; J = F = 0 isolates the site
    let c = CouplingSet::bare(1.5, w, w).unwrap().with_onsite(0.1 * w, 0.1 * w);
    let delta = 2.0 * 0.01 * w;
    let want = 1.5 - delta;

    // the chain needs two sites; without transfer they decouple exactly
    let lattice = open(2);
    let basis = enumerate_basis(&lattice, &vib(w, n_max, 4 * n_max), DEFAULT_BASIS_CAP).unwrap();
    let h = assemble_hamiltonian(&basis, &lattice, &c, TermMask::ALL).unwrap();
    let ed = diagonalize(&h, 1).unwrap().eigenvalues[0];
    let r = polaron_report(&c, n_max).unwrap();
    let elapsed = start.elapsed();

    let ed_err = (ed - want).abs() / want;
    let module_err = (r.lowest_level - want).abs() / want;
    let frame_err = r.shift_residual / want;
    let spectrum_err = r.spectrum_residual / want;
    Outcome::new(
        (r.delta - delta).abs() <= 1e-15 * delta
            && ed_err <= 1e-8
            && module_err <= 1e-8
            && frame_err <= 1e-10
            && spectrum_err <= 1e-10
            && elapsed < RUNTIME_LIMIT,
        format!(
            "ED {ed_err:.1e}, site {module_err:.1e}, dressed vacuum {frame_err:.1e}, spectrum {spectrum_err:.1e} (relative), basis {}",
            basis.len()
        ),
    )
}

fn process_selectivity() -> Outcome {
    let c = CouplingSet::bare(1.5, 1e-9, 1.3e-9)
        .unwrap()
        .with_transfer(7e-9)
        .with_transfer_vibration(-4e-10, -3e-10)
        .with_onsite(2e-10, 1e-10);
    let lattice = periodic(4);
    let basis = enumerate_basis(&lattice, &vib(1e-9, 2, 3), DEFAULT_BASIS_CAP).unwrap();
    let states = basis.states();
    let n = lattice.sites;
    let mut checked = 0;
    let mut violations = 0;
    let mut matrices = Vec::new();
    for process in Process::ALL {
        let h = assemble_hamiltonian(&basis, &lattice, &c, process.mask()).unwrap();
        for (r, col, v) in h.matrix().entries() {
            checked += 1;
            let (fin, ini) = (&states[r], &states[col]);
            let (i, j) = (fin.excited_site(), ini.excited_site());
            let neighbours = (i + 1) % n == j || (j + 1) % n == i;
            let diff = |a: &[u32], b: &[u32]| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| *x as i64 - *y as i64).collect() };
            let db = diff(fin.ground(), ini.ground());
            let dc = diff(fin.excited(), ini.excited());
            let unit = |site: usize, s: i64| -> Vec<i64> { (0..n).map(|k| if k == site { s } else { 0 }).collect() };
            let zero = vec![0; n];
            let (want_b, want_c, amp) = match process {
                Process::I => (unit(j, 1), zero, c.transfer_vib_ground),
                Process::II => (zero, unit(i, 1), c.transfer_vib_excited),
                Process::III => (unit(i, -1), zero, c.transfer_vib_ground),
                Process::IV => (zero, unit(j, -1), c.transfer_vib_excited),
            };
            let ratio = v / amp;
            let ok = neighbours && db == want_b && dc == want_c && ratio >= 1.0 - 1e-15 && (ratio * ratio).fract().abs() < 1e-12;
            violations += usize::from(!ok);
        }
        matrices.push(h.matrix().to_dense());
    }
    // I and III, II and IV are hermitian partners
    let partners_ok = matrices[0] == matrices[2].transpose() && matrices[1] == matrices[3].transpose();
    let nonempty = matrices.iter().all(|m| m.amax() > 0.0);
    Outcome::new(
        violations == 0 && partners_ok && nonempty,
        format!("{checked} elements checked, {violations} outside their pattern, partners transpose: {partners_ok}"),
    )
}

fn golden_rule() -> Outcome {
    // J switched off so the F^g vertex acts alone; ω_v t ≤ 0.1 over the window
    let c = typical().with_transfer(0.0);
    let f = c.transfer_vib_ground;
    let lattice = open(2);
    let basis = enumerate_basis(&lattice, &vib(1e-9, 1, 2), DEFAULT_BASIS_CAP).unwrap();
    let h = assemble_hamiltonian(&basis, &lattice, &c, TermMask::ALL).unwrap();
    let start = basis_state(&basis, &FockState::vacuum(2, 1)).unwrap();
    let target = FockState::new(0, &[0, 1], &[0, 0]).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        let t = 0.005 * i as f64 / f.abs();
        let psi = evolve(&h, &start, t, 4).unwrap();
        let p = transition_probability(&psi, &basis, &target).unwrap();
        worst = worst.max((p / (f * f * t * t) - 1.0).abs());
    }
    Outcome::new(worst <= 0.05, format!("max |P/(F²t²) − 1| = {worst:.2e} for t ≤ 0.05/F"))
}

/// Slowest positive rate touching the component of `k0`, relative to Λ.
fn slowest_rate(rates: &RateMatrix, k0: usize) -> f64 {
    let comp = rates.components();
    rates
        .transitions()
        .iter()
        .filter(|t| comp[t.from] == comp[k0])
        .map(|t| t.rate / rates.max_outflow())
        .fold(1.0, f64::min)
}

fn kinetics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst_sum, mut worst_rise, mut worst_boltz) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    let mut evolved = 0;
    for _ in 0..40 {
        let n = rng.random_range(4..=16);
        let j = rng.random_range(0.2..1.0);
        let grid = build_grid(&LatticeSpec {
            sites: n,
            spacing: 1.0,
            boundary: Boundary::Periodic,
        })
        .unwrap();
        let band = exciton_dispersion(&grid, 0.0, j);
        let c = CouplingSet::bare(0.0, rng.random_range(0.2..2.0) * j, rng.random_range(0.2..2.0) * j)
            .unwrap()
            .with_transfer(j)
            .with_transfer_vibration(rng.random_range(-0.2..0.2) * j, rng.random_range(-0.2..0.2) * j);
        let eta = rng.random_range(0.05..0.3) * j;
        let k0 = rng.random_range(0..n);
        let mut p0 = vec![0.0; n];
        p0[k0] = 1.0;

        let cold = build_rate_matrix(&band, &c, eta, 0.0).unwrap();
        let lambda = cold.max_outflow().max(1e-12);
        let traj = evolve_populations(&cold, &p0, 20.0 / lambda, 200).unwrap();
        let e = band.energies();
        let mut last = f64::INFINITY;
        for p in &traj.populations {
            worst_sum = worst_sum.max((p.iter().sum::<f64>() - 1.0).abs());
            let mean: f64 = p.iter().zip(e).map(|(a, b)| a * b).sum();
            worst_rise = worst_rise.max(mean - last);
            last = mean;
        }

        let temp = rng.random_range(0.5..3.0) * j;
        let warm = build_rate_matrix(&band, &c, eta, temp).unwrap();
        let limit = stationary_populations(&warm, &p0).unwrap();
        worst_sum = worst_sum.max((limit.iter().sum::<f64>() - 1.0).abs());
        let comp = warm.components();
        let members: Vec<usize> = (0..n).filter(|&k| comp[k] == comp[k0]).collect();
        let z: f64 = members.iter().map(|&k| (-e[k] / temp).exp()).sum();
        let boltzmann: Vec<f64> =
            (0..n).map(|k| if comp[k] == comp[k0] { (-e[k] / temp).exp() / z } else { 0.0 }).collect();
        // the evolved populations must reach the same limit when mixing is fast enough to follow
        let mut candidates = vec![limit];
        if members.len() > 1 && slowest_rate(&warm, k0) >= 1e-3 {
            let horizon = 60.0 / (slowest_rate(&warm, k0) * warm.max_outflow());
            candidates.push(evolve_populations(&warm, &p0, horizon, 1).unwrap().populations[1].clone());
            evolved += 1;
        }
        for p in &candidates {
            for k in 0..n {
                let want = boltzmann[k];
                let err = if want > 0.0 { (p[k] - want).abs() / want } else { p[k].abs() };
                worst_boltz = worst_boltz.max(err);
            }
        }
        cases += 1;
    }
    Outcome::new(
        worst_sum <= 1e-9 && worst_rise <= 1e-15 && worst_boltz <= 1e-6,
        format!("{cases} random bands ({evolved} also evolved to equilibrium): |ΣP − 1| ≤ {worst_sum:.1e}, T=0 max rise {worst_rise:.1e}, Boltzmann deviation {worst_boltz:.1e}"),
    )
}

fn time_evolution() -> Outcome {
    let c = typical().with_onsite(3e-10, -2e-10);
    let lattice = periodic(4);
    let basis = enumerate_basis(&lattice, &vib(1e-9, 1, 2), DEFAULT_BASIS_CAP).unwrap();
    // measured from ω_a so the energy check is not swamped by the constant
    let h = assemble_hamiltonian(&basis, &lattice, &c, TermMask::ALL)
        .unwrap()
        .shifted(-c.transition);
    let psi0 = basis_state(&basis, &FockState::vacuum(4, 0)).unwrap();
    let scale = h.matrix().norm_inf();
    let e0 = expectation(&h, &psi0);
    let steps = 10_000;
    let t = steps as f64 * 0.5 / scale;
    let (mut norm_drift, mut energy_drift) = (0.0f64, 0.0f64);
    let run = evolve_with(&h, &psi0, t, steps, &EvolveOptions::default(), |_, _, psi| {
        let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        norm_drift = norm_drift.max((norm - 1.0).abs());
        energy_drift = energy_drift.max((expectation(&h, psi) - e0).abs() / scale.max(e0.abs()));
    });
    if let Err(e) = run {
        return Outcome::new(false, e.to_string());
    }

    // two-site J-only: ψ₁(t) = −i sin(Jt) changes sign at Jt = π
    let pair = open(2);
    let frozen = enumerate_basis(&pair, &vib(1e-9, 0, 0), DEFAULT_BASIS_CAP).unwrap();
    let hj = assemble_hamiltonian(&frozen, &pair, &c, TermMask::EXCITON).unwrap().shifted(-c.transition);
    let start = basis_state(&frozen, &FockState::vacuum(2, 0)).unwrap();
    let j = c.transfer.abs();
    let amp = |tj: f64| -> f64 {
        let psi: Vec<Complex64> = evolve(&hj, &start, tj / j, 8).unwrap();
        psi[1].im * c.transfer.signum()
    };
    let (mut lo, mut hi) = (0.9 * PI, 1.1 * PI);
    let f_lo = amp(lo);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (amp(mid) < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let revival = 0.5 * (lo + hi);
    let revival_err = (revival - PI).abs() / PI;
    Outcome::new(
        norm_drift <= 1e-9 && energy_drift <= 1e-9 && revival_err <= 1e-6,
        format!(
            "{steps} steps on {} states: norm drift {norm_drift:.1e}, energy drift {energy_drift:.1e}; revival at tJ = π(1 {:+.1e})",
            basis.len(),
            (revival - PI) / PI
        ),
    )
}

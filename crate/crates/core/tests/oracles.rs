use approx::assert_relative_eq;
use exvib_core::band::{build_grid, exciton_dispersion, vertex};
use exvib_core::couplings::{magic_angle, CouplingSet};
use exvib_core::dynamics::{basis_state, evolve, evolve_with, expectation, transition_probability, EvolveOptions};
use exvib_core::fock::{enumerate_basis, FockState, DEFAULT_BASIS_CAP};
use exvib_core::hamiltonian::{assemble_hamiltonian, TermMask};
use exvib_core::polaron::polaron_report;
use exvib_core::spectrum::diagonalize;
use exvib_core::units::{validate_spec, AtomSpec, Boundary, LatticeSpec, OnSiteSlopeModel, Params, VibrationSpec};
use exvib_core::Complex64;

fn typical(sites: usize, boundary: Boundary, n_max: usize, q_max: usize, angle_deg: f64) -> Params {
    validate_spec(
        LatticeSpec {
            sites,
            spacing: 2000.0,
            boundary,
        },
        AtomSpec {
            transition_energy: 1.5,
            dipole: 2.0,
            angle: angle_deg.to_radians(),
            rest_mass_energy: 1e12,
        },
        VibrationSpec {
            ground_energy: 1e-9,
            excited_energy: 1e-9,
            n_max,
            q_max,
        },
        OnSiteSlopeModel::default(),
    )
    .unwrap()
}

#[test]
fn frozen_vibrations_reproduce_dispersion() {
    for n in 3..=6 {
        let p = typical(n, Boundary::Periodic, 0, 0, 90.0);
        let c = CouplingSet::from_params(&p).unwrap();
        let basis = enumerate_basis(p.lattice(), p.vib(), DEFAULT_BASIS_CAP).unwrap();
        let h = assemble_hamiltonian(&basis, p.lattice(), &c, TermMask::ALL).unwrap();
        let eig = diagonalize(&h, n).unwrap().eigenvalues;
        let band = exciton_dispersion(&build_grid(p.lattice()).unwrap(), c.transition, c.transfer);
        let mut want = band.energies().to_vec();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&want) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }
}

#[test]
fn magic_angle_switches_off_transfer() {
    let p = typical(4, Boundary::Periodic, 1, 1, magic_angle().to_degrees());
    let c = CouplingSet::from_params(&p).unwrap();
    assert!(c.transfer.abs() < 1e-22);
    assert!(c.transfer_vib_ground.abs() < 1e-23);
}

#[test]
fn ground_vibration_leakage_matches_momentum_vertices() {
    // variance of H in a Bloch state with vacuum vibrations = Σ_k' |F^g(k')|² = 2 F²
    let p = typical(4, Boundary::Periodic, 1, 1, 90.0);
    let c = CouplingSet::from_params(&p).unwrap().with_transfer_vibration(-4.765e-10, 0.0);
    let basis = enumerate_basis(p.lattice(), p.vib(), DEFAULT_BASIS_CAP).unwrap();
    // measured from ω_a so the variance is not lost to cancellation
    let h = assemble_hamiltonian(&basis, p.lattice(), &c, TermMask::ALL)
        .unwrap()
        .shifted(-c.transition);
    let grid = build_grid(p.lattice()).unwrap();
    for mode in grid.modes() {
        let mut psi = vec![Complex64::new(0.0, 0.0); basis.len()];
        for site in 0..4 {
            let idx = basis.index_of(&FockState::vacuum(4, site)).unwrap();
            psi[idx] = Complex64::from_polar(0.5, mode.k * 2000.0 * site as f64);
        }
        let mean = expectation(&h, &psi);
        let mut hpsi = vec![Complex64::new(0.0, 0.0); basis.len()];
        h.matrix().mul_vec_complex(&psi, &mut hpsi);
        let variance: f64 = hpsi.iter().zip(&psi).map(|(a, b)| (a - b * mean).norm_sqr()).sum();
        let f = c.transfer_vib_ground;
        let from_vertices: f64 = vertex(&grid, f).iter().map(|v| v * v).sum();
        assert_relative_eq!(from_vertices, 2.0 * f * f, max_relative = 1e-12);
        assert_relative_eq!(variance, 2.0 * f * f, max_relative = 1e-6);
    }
}

#[test]
fn short_time_emission_is_quadratic() {
    let p = typical(2, Boundary::Open, 1, 1, 90.0);
    // J off so the vertex acts alone; ω_v t ≤ 0.1 keeps the detuning negligible
    let c = CouplingSet::from_params(&p).unwrap().with_transfer(0.0);
    let f = c.transfer_vib_ground;
    let basis = enumerate_basis(p.lattice(), p.vib(), DEFAULT_BASIS_CAP).unwrap();
    let h = assemble_hamiltonian(&basis, p.lattice(), &c, TermMask::ALL).unwrap();
    let start = basis_state(&basis, &FockState::vacuum(2, 1)).unwrap();
    let target = FockState::new(0, &[0, 1], &[0, 0]).unwrap();
    for frac in [0.01, 0.02, 0.05] {
        let t = frac / f.abs();
        let psi = evolve(&h, &start, t, 10).unwrap();
        let prob = transition_probability(&psi, &basis, &target).unwrap();
        assert_relative_eq!(prob, f * f * t * t, max_relative = 0.05);
    }
}

#[test]
fn two_site_revival() {
    let p = typical(2, Boundary::Open, 0, 0, 90.0);
    let c = CouplingSet::from_params(&p).unwrap();
    let basis = enumerate_basis(p.lattice(), p.vib(), DEFAULT_BASIS_CAP).unwrap();
    let h = assemble_hamiltonian(&basis, p.lattice(), &c, TermMask::EXCITON).unwrap();
    let start = basis_state(&basis, &FockState::vacuum(2, 0)).unwrap();
    let t = std::f64::consts::PI / c.transfer.abs();
    let mut p0 = Vec::new();
    evolve_with(&h, &start, t, 200, &EvolveOptions::default(), |_, _, psi| p0.push(psi[0].norm_sqr())).unwrap();
    assert!((p0[100] - 0.0).abs() < 1e-9, "half period {}", p0[100]);
    assert!((p0[200] - 1.0).abs() < 1e-9, "full period {}", p0[200]);
}

#[test]
fn polaron_ground_level_oracle() {
    let c = CouplingSet::bare(1.5, 1e-9, 1e-9).unwrap().with_onsite(1e-10, 0.0);
    let r = polaron_report(&c, 10).unwrap();
    assert_relative_eq!(r.lowest_level, 1.5 - 1e-11, max_relative = 1e-12);
    assert_relative_eq!(r.omega0, 1.5 - 1e-11, max_relative = 1e-15);
    assert!(r.spectrum_residual < 1e-10 * 1.5);
}

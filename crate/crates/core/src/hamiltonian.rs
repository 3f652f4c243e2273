//! Assembly of the first-order exciton-vibration Hamiltonian on a truncated
//! Fock basis.
//!
//! The pieces are the exciton part (ω_a on site plus nearest-neighbour J),
//! the harmonic vibrations of ground (b) and excited (c) atoms, the on-site
//! coupling `[M^e(c_i + c_i†) − M^g(b_i + b_i†)] B_i†B_i` and the four transfer
//! vertices attached to `B_i†B_j`:
//!
//! | process | operator      | effect                                  |
//! |---------|---------------|-----------------------------------------|
//! | I       | `F^g b_j†`    | emits a ground vibration at the donor j |
//! | II      | `F^e c_i†`    | emits an excited vibration at acceptor i|
//! | III     | `F^g b_i`     | absorbs a ground vibration at acceptor i|
//! | IV      | `F^e c_j`     | absorbs an excited vibration at donor j |
//!
//! Bond sums run over ordered nearest-neighbour pairs, both (i, j) and (j, i).
//! Process I is the hermitian partner of process III (and II of IV), so a
//! single process on its own gives a non-hermitian operator.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{BitOr, BitOrAssign};

use crate::couplings::CouplingSet;
use crate::fock::Basis;
use crate::linalg::SparseMatrix;
use crate::units::LatticeSpec;
use crate::{Error, Result};

/// Largest asymmetry tolerated before a matrix is flagged non-hermitian, eV.
pub const HERMITICITY_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Process {
    I,
    II,
    III,
    IV,
}

impl Process {
    pub const ALL: [Process; 4] = [Process::I, Process::II, Process::III, Process::IV];

    pub fn mask(self) -> TermMask {
        match self {
            Process::I => TermMask::PROCESS_I,
            Process::II => TermMask::PROCESS_II,
            Process::III => TermMask::PROCESS_III,
            Process::IV => TermMask::PROCESS_IV,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Process::I => "I",
            Process::II => "II",
            Process::III => "III",
            Process::IV => "IV",
        }
    }
}

/// Set of Hamiltonian pieces to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TermMask(u8);

impl TermMask {
    pub const EMPTY: TermMask = TermMask(0);
    pub const EXCITON: TermMask = TermMask(1);
    pub const VIBRATION: TermMask = TermMask(1 << 1);
    pub const ONSITE: TermMask = TermMask(1 << 2);
    pub const PROCESS_I: TermMask = TermMask(1 << 3);
    pub const PROCESS_II: TermMask = TermMask(1 << 4);
    pub const PROCESS_III: TermMask = TermMask(1 << 5);
    pub const PROCESS_IV: TermMask = TermMask(1 << 6);
    pub const TRANSFER: TermMask = TermMask(0b111_1000);
    pub const ALL: TermMask = TermMask(0b111_1111);

    pub fn contains(self, other: TermMask) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Parses a comma-separated list of `ex`, `vib`, `onsite`, `transfer`,
    /// `I`, `II`, `III`, `IV`.
    pub fn parse(list: &str) -> Result<TermMask> {
        let mut mask = TermMask::EMPTY;
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            mask |= match item {
                "ex" => TermMask::EXCITON,
                "vib" => TermMask::VIBRATION,
                "onsite" => TermMask::ONSITE,
                "transfer" => TermMask::TRANSFER,
                "I" | "i" => TermMask::PROCESS_I,
                "II" | "ii" => TermMask::PROCESS_II,
                "III" | "iii" => TermMask::PROCESS_III,
                "IV" | "iv" => TermMask::PROCESS_IV,
                "all" => TermMask::ALL,
                other => return Err(Error::domain(alloc::format!("unknown term '{other}'"))),
            };
        }
        Ok(mask)
    }
}

impl BitOr for TermMask {
    type Output = TermMask;
    fn bitor(self, rhs: TermMask) -> TermMask {
        TermMask(self.0 | rhs.0)
    }
}

impl BitOrAssign for TermMask {
    fn bitor_assign(&mut self, rhs: TermMask) {
        self.0 |= rhs.0;
    }
}

impl fmt::Display for TermMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Vec::new();
        if self.contains(TermMask::EXCITON) {
            names.push("ex");
        }
        if self.contains(TermMask::VIBRATION) {
            names.push("vib");
        }
        if self.contains(TermMask::ONSITE) {
            names.push("onsite");
        }
        if self.contains(TermMask::TRANSFER) {
            names.push("transfer");
        } else {
            for p in Process::ALL {
                if self.contains(p.mask()) {
                    names.push(p.name());
                }
            }
        }
        write!(f, "{}", names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    matrix: SparseMatrix,
    hermitian: bool,
    terms: TermMask,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary real matrix, e.g. for tests of the solvers.
    pub fn from_sparse(matrix: SparseMatrix, terms: TermMask) -> Self {
        let hermitian = matrix.asymmetry() <= HERMITICITY_TOLERANCE;
        HamiltonianMatrix {
            matrix,
            hermitian,
            terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }
    pub fn terms(&self) -> TermMask {
        self.terms
    }
    pub fn element(&self, row: usize, col: usize) -> f64 {
        self.matrix.get(row, col)
    }

    /// H + c·I.
    pub fn shifted(&self, shift: f64) -> Self {
        HamiltonianMatrix::from_sparse(self.matrix.shifted(shift), self.terms)
    }
}

/// Builds the Hamiltonian over `basis` on `lattice` with the selected terms.
///
/// Ladder operators that would leave the truncated space are dropped.
pub fn assemble_hamiltonian(
    basis: &Basis,
    lattice: &LatticeSpec,
    couplings: &CouplingSet,
    terms: TermMask,
) -> Result<HamiltonianMatrix> {
    if terms.is_empty() {
        return Err(Error::Degenerate("no Hamiltonian terms selected"));
    }
    if basis.sites() != lattice.sites {
        return Err(Error::Shape {
            expected: lattice.sites,
            found: basis.sites(),
        });
    }
    let values = [
        couplings.transition,
        couplings.vib_ground,
        couplings.vib_excited,
        couplings.transfer,
        couplings.transfer_vib_ground,
        couplings.transfer_vib_excited,
        couplings.onsite_ground,
        couplings.onsite_excited,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("couplings must be finite"));
    }

    let n = lattice.sites;
    let mut pairs = Vec::new();
    for (a, b) in lattice.bonds() {
        pairs.push((a, b));
        pairs.push((b, a));
    }

    let c = couplings;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut occ = Vec::with_capacity(2 * n);
    // Adds the element ⟨target|H|col⟩ when the target is inside the basis.
    let push = |triplets: &mut Vec<(usize, usize, f64)>, col: usize, site: usize, occ: &[u32], v: f64| {
        if let Some(row) = basis.find(site, occ) {
            triplets.push((row, col, v));
        }
    };

    for (col, state) in basis.states().iter().enumerate() {
        let e = state.excited_site();
        let b = state.ground();
        let cc = state.excited();

        let mut diag = 0.0;
        if terms.contains(TermMask::EXCITON) {
            diag += c.transition;
        }
        if terms.contains(TermMask::VIBRATION) {
            diag += c.vib_ground * b.iter().map(|&x| x as f64).sum::<f64>()
                + c.vib_excited * cc.iter().map(|&x| x as f64).sum::<f64>();
        }
        if diag != 0.0 {
            triplets.push((col, col, diag));
        }

        if terms.contains(TermMask::ONSITE) {
            occ.clear();
            occ.extend_from_slice(state.occupations());
            // −M^g (b_e + b_e†)
            ladder(&mut occ, e, -c.onsite_ground, |o, v| push(&mut triplets, col, e, o, v));
            // +M^e (c_e + c_e†)
            ladder(&mut occ, n + e, c.onsite_excited, |o, v| push(&mut triplets, col, e, o, v));
        }

        for &(i, j) in pairs.iter().filter(|&&(_, j)| j == e) {
            if terms.contains(TermMask::EXCITON) && c.transfer != 0.0 {
                push(&mut triplets, col, i, state.occupations(), c.transfer);
            }
            let raise = |mode: usize, amp: f64, triplets: &mut Vec<(usize, usize, f64)>, occ: &mut Vec<u32>| {
                occ.clear();
                occ.extend_from_slice(state.occupations());
                let m = occ[mode];
                occ[mode] = m + 1;
                push(triplets, col, i, occ, amp * ((m + 1) as f64).sqrt());
            };
            let lower = |mode: usize, amp: f64, triplets: &mut Vec<(usize, usize, f64)>, occ: &mut Vec<u32>| {
                occ.clear();
                occ.extend_from_slice(state.occupations());
                let m = occ[mode];
                if m > 0 {
                    occ[mode] = m - 1;
                    push(triplets, col, i, occ, amp * (m as f64).sqrt());
                }
            };
            if terms.contains(TermMask::PROCESS_I) && c.transfer_vib_ground != 0.0 {
                raise(j, c.transfer_vib_ground, &mut triplets, &mut occ);
            }
            if terms.contains(TermMask::PROCESS_II) && c.transfer_vib_excited != 0.0 {
                raise(n + i, c.transfer_vib_excited, &mut triplets, &mut occ);
            }
            if terms.contains(TermMask::PROCESS_III) && c.transfer_vib_ground != 0.0 {
                lower(i, c.transfer_vib_ground, &mut triplets, &mut occ);
            }
            if terms.contains(TermMask::PROCESS_IV) && c.transfer_vib_excited != 0.0 {
                lower(n + j, c.transfer_vib_excited, &mut triplets, &mut occ);
            }
        }
    }

    Ok(HamiltonianMatrix::from_sparse(
        SparseMatrix::from_triplets(basis.len(), triplets),
        terms,
    ))
}

/// Applies `amp (a + a†)` on `mode`, reporting each resulting pattern.
fn ladder(occ: &mut [u32], mode: usize, amp: f64, mut emit: impl FnMut(&[u32], f64)) {
    if amp == 0.0 {
        return;
    }
    let m = occ[mode];
    if m > 0 {
        occ[mode] = m - 1;
        emit(occ, amp * (m as f64).sqrt());
    }
    occ[mode] = m + 1;
    emit(occ, amp * ((m + 1) as f64).sqrt());
    occ[mode] = m;
}

//! Truncated Fock basis of the one-exciton sector.
//!
//! A basis state carries the excited site and the occupations of the 2N
//! vibration modes, stored as `[b_0, …, b_{N−1}, c_0, …, c_{N−1}]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::units::{LatticeSpec, VibrationSpec};
use crate::{Error, Result};

/// Default cap on the number of basis states.
pub const DEFAULT_BASIS_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    excited_site: usize,
    occupations: Vec<u32>,
}

impl FockState {
    /// Excitation on `site` with all vibrations in their ground state.
    pub fn vacuum(sites: usize, site: usize) -> Self {
        FockState {
            excited_site: site,
            occupations: vec![0; 2 * sites],
        }
    }

    pub fn new(excited_site: usize, ground: &[u32], excited: &[u32]) -> Result<Self> {
        if ground.len() != excited.len() {
            return Err(Error::Shape {
                expected: ground.len(),
                found: excited.len(),
            });
        }
        if excited_site >= ground.len() {
            return Err(Error::domain("excited site out of range"));
        }
        let mut occupations = ground.to_vec();
        occupations.extend_from_slice(excited);
        Ok(FockState {
            excited_site,
            occupations,
        })
    }

    pub fn sites(&self) -> usize {
        self.occupations.len() / 2
    }

    pub fn excited_site(&self) -> usize {
        self.excited_site
    }

    /// Ground-state vibration occupations b_i†b_i.
    pub fn ground(&self) -> &[u32] {
        &self.occupations[..self.sites()]
    }

    /// Excited-state vibration occupations c_i†c_i.
    pub fn excited(&self) -> &[u32] {
        &self.occupations[self.sites()..]
    }

    pub fn total_quanta(&self) -> u32 {
        self.occupations.iter().sum()
    }

    pub(crate) fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub(crate) fn with_parts(excited_site: usize, occupations: Vec<u32>) -> Self {
        FockState {
            excited_site,
            occupations,
        }
    }
}

/// Ordered, duplicate-free basis; ordering is lexicographic in
/// (excited site, b occupations, c occupations).
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    sites: usize,
    n_max: usize,
    q_max: usize,
    states: Vec<FockState>,
}

impl Basis {
    pub fn sites(&self) -> usize {
        self.sites
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }
    pub fn q_max(&self) -> usize {
        self.q_max
    }
    pub fn states(&self) -> &[FockState] {
        &self.states
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.states.binary_search(state).ok()
    }

    pub(crate) fn find(&self, excited_site: usize, occupations: &[u32]) -> Option<usize> {
        self.states
            .binary_search_by(|s| {
                s.excited_site
                    .cmp(&excited_site)
                    .then_with(|| s.occupations.as_slice().cmp(occupations))
            })
            .ok()
    }
}

/// Number of occupation patterns of `modes` modes with each ≤ n_max and total ≤ q_max.
pub fn pattern_count(modes: usize, n_max: usize, q_max: usize) -> u128 {
    // ways[q] = patterns with total exactly q
    let mut ways = vec![0u128; q_max + 1];
    ways[0] = 1;
    for _ in 0..modes {
        let mut next = vec![0u128; q_max + 1];
        for (q, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for n in 0..=n_max.min(q_max - q) {
                next[q + n] = next[q + n].saturating_add(w);
            }
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Enumerates the one-exciton basis, refusing anything larger than `cap`.
pub fn enumerate_basis(lattice: &LatticeSpec, vib: &VibrationSpec, cap: usize) -> Result<Basis> {
    let sites = lattice.sites;
    let modes = 2 * sites;
    let size = pattern_count(modes, vib.n_max, vib.q_max).saturating_mul(sites as u128);
    if size > cap as u128 {
        return Err(Error::BasisTooLarge { size, cap });
    }

    let mut patterns = Vec::new();
    let mut current = vec![0u32; modes];
    push_patterns(&mut patterns, &mut current, 0, vib.n_max as u32, vib.q_max as u32);

    let mut states = Vec::with_capacity(size as usize);
    for site in 0..sites {
        for p in &patterns {
            states.push(FockState::with_parts(site, p.clone()));
        }
    }
    Ok(Basis {
        sites,
        n_max: vib.n_max,
        q_max: vib.q_max,
        states,
    })
}

fn push_patterns(out: &mut Vec<Vec<u32>>, current: &mut [u32], mode: usize, n_max: u32, budget: u32) {
    if mode == current.len() {
        out.push(current.to_vec());
        return;
    }
    for n in 0..=n_max.min(budget) {
        current[mode] = n;
        push_patterns(out, current, mode + 1, n_max, budget - n);
    }
    current[mode] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Boundary;

    fn setup(n: usize, n_max: usize, q_max: usize) -> (LatticeSpec, VibrationSpec) {
        (
            LatticeSpec {
                sites: n,
                spacing: 1.0,
                boundary: Boundary::Open,
            },
            VibrationSpec {
                ground_energy: 1.0,
                excited_energy: 1.0,
                n_max,
                q_max,
            },
        )
    }

    #[test]
    fn frozen_vibrations() {
        let (l, v) = setup(2, 0, 0);
        let b = enumerate_basis(&l, &v, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.states()[0], FockState::vacuum(2, 0));
        assert_eq!(b.states()[1], FockState::vacuum(2, 1));
    }

    #[test]
    fn single_quantum_counts() {
        let (l, v) = setup(2, 1, 1);
        assert_eq!(enumerate_basis(&l, &v, DEFAULT_BASIS_CAP).unwrap().len(), 10);
        let (l, v) = setup(3, 1, 1);
        assert_eq!(enumerate_basis(&l, &v, DEFAULT_BASIS_CAP).unwrap().len(), 21);
    }

    #[test]
    fn ordering_sorted_and_unique() {
        let (l, v) = setup(3, 2, 3);
        let b = enumerate_basis(&l, &v, DEFAULT_BASIS_CAP).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
            assert!(s.total_quanta() <= 3);
            assert!(s.occupations().iter().all(|&n| n <= 2));
        }
        assert_eq!(b.len() as u128, 3 * pattern_count(6, 2, 3));
    }

    #[test]
    fn cap_is_enforced() {
        let (l, v) = setup(4, 2, 8);
        let err = enumerate_basis(&l, &v, 1000).unwrap_err();
        match err {
            Error::BasisTooLarge { size, cap } => {
                assert_eq!(cap, 1000);
                assert_eq!(size, 4 * pattern_count(8, 2, 8));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pattern_count_brute_force() {
        for modes in 1..5usize {
            for n_max in 0..3usize {
                for q_max in 0..=modes * n_max {
                    let mut count = 0u128;
                    let total = (n_max + 1).pow(modes as u32);
                    for code in 0..total {
                        let mut c = code;
                        let mut sum = 0;
                        for _ in 0..modes {
                            sum += c % (n_max + 1);
                            c /= n_max + 1;
                        }
                        if sum <= q_max {
                            count += 1;
                        }
                    }
                    assert_eq!(pattern_count(modes, n_max, q_max), count);
                }
            }
        }
    }
}

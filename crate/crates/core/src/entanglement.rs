//! Bipartitions of the chain, reduced density matrices and entropies.
//!
//! States live on the direct sum of all particle-number sectors. Cutting the
//! chain after site `ell` splits every configuration into a left and a right
//! part, `m = m_X + m_Y`, and the reduced state on the left is
//! `rho_1 = M M^T` where `M[X][Y] = psi(X ∪ Y)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config_space::{ChainBasis, Occupation, SpinParams};
use crate::error::{domain, Error, Result};
use crate::operators::FieldSpec;
use crate::spectral::{threshold_energy, ChainSpectrum};

/// Default cap on the dimension `(2J+1)^ell` of a reduced density matrix.
pub const DEFAULT_RDM_CAP: usize = 3_000;

const TRACE_TOL: f64 = 1e-8;

/// Real amplitudes over every configuration of a chain, stored sector by
/// sector in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalState {
    two_j: u32,
    sites: usize,
    sectors: Vec<Vec<f64>>,
}

impl GlobalState {
    pub fn zero(chain: &ChainBasis) -> Self {
        Self {
            two_j: chain.two_j(),
            sites: chain.sites(),
            sectors: chain.sectors().iter().map(|s| vec![0.0; s.len()]).collect(),
        }
    }

    pub fn from_sectors(chain: &ChainBasis, sectors: Vec<Vec<f64>>) -> Result<Self> {
        if sectors.len() != chain.sectors().len()
            || sectors.iter().zip(chain.sectors()).any(|(a, s)| a.len() != s.len())
        {
            return domain("amplitude blocks do not match the sector sizes");
        }
        Ok(Self {
            two_j: chain.two_j(),
            sites: chain.sites(),
            sectors,
        })
    }

    /// A state supported on a single sector.
    pub fn in_sector(chain: &ChainBasis, particles: usize, amplitudes: Vec<f64>) -> Result<Self> {
        let mut state = Self::zero(chain);
        let slot = state
            .sectors
            .get_mut(particles)
            .ok_or_else(|| Error::Domain(format!("no sector with {particles} particles")))?;
        if slot.len() != amplitudes.len() {
            return domain(format!(
                "sector {particles} has {} states, got {} amplitudes",
                slot.len(),
                amplitudes.len()
            ));
        }
        *slot = amplitudes;
        Ok(state)
    }

    /// The normalized basis vector `phi_m`.
    pub fn basis_state(chain: &ChainBasis, m: &Occupation) -> Result<Self> {
        let n = m.particle_number();
        let idx = chain
            .global_index(m)
            .ok_or_else(|| Error::Domain(format!("{m} is not a configuration of this chain")))?;
        let mut state = Self::zero(chain);
        state.sectors[n][idx - chain.offset(n)] = 1.0;
        Ok(state)
    }

    /// From amplitudes listed in chain order (sectors concatenated).
    pub fn from_dense(chain: &ChainBasis, amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() != chain.dim() {
            return domain(format!(
                "expected {} amplitudes, got {}",
                chain.dim(),
                amplitudes.len()
            ));
        }
        let sectors = chain
            .sectors()
            .iter()
            .enumerate()
            .map(|(n, s)| amplitudes[chain.offset(n)..chain.offset(n) + s.len()].to_vec())
            .collect();
        Self::from_sectors(chain, sectors)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        self.sectors.iter().flatten().copied().collect()
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn sectors(&self) -> &[Vec<f64>] {
        &self.sectors
    }

    pub fn norm(&self) -> f64 {
        self.sectors.iter().flatten().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return domain("cannot normalize a zero or non-finite state");
        }
        self.sectors.iter_mut().flatten().for_each(|a| *a /= n);
        Ok(())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// Squared norm carried by each sector.
    pub fn sector_weights(&self) -> Vec<f64> {
        self.sectors
            .iter()
            .map(|s| s.iter().map(|a| a * a).sum())
            .collect()
    }
}

/// The cut of a chain of `sites` sites after site `ell`, with the index
/// bookkeeping needed to reshape states into left × right matrices.
#[derive(Clone, Debug)]
pub struct Bipartition {
    two_j: u32,
    sites: usize,
    ell: usize,
    left: ChainBasis,
    right: ChainBasis,
    /// `split[N][i] = (left index, right index)` of state `i` of sector `N`.
    split: Vec<Vec<(usize, usize)>>,
}

impl Bipartition {
    pub fn new(two_j: u32, sites: usize, ell: usize) -> Result<Self> {
        if ell <= 1 || ell >= sites {
            return domain(format!("cut {ell} must satisfy 1 < ell < {sites}"));
        }
        let chain = ChainBasis::new(two_j, sites)?;
        let left = ChainBasis::new(two_j, ell)?;
        let right = ChainBasis::new(two_j, sites - ell)?;
        let split = chain
            .sectors()
            .iter()
            .map(|s| {
                s.states()
                    .iter()
                    .map(|m| {
                        let (l, r) = m.split_at(ell).expect("cut is interior");
                        (
                            left.global_index(&l).expect("left part is a configuration"),
                            right.global_index(&r).expect("right part is a configuration"),
                        )
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            two_j,
            sites,
            ell,
            left,
            right,
            split,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn left(&self) -> &ChainBasis {
        &self.left
    }

    pub fn right(&self) -> &ChainBasis {
        &self.right
    }

    fn check(&self, psi: &GlobalState) -> Result<()> {
        if psi.two_j != self.two_j || psi.sites != self.sites {
            return domain("state and bipartition belong to different chains");
        }
        Ok(())
    }

    /// `M[X][Y] = psi(X ∪ Y)` over the left and right chain bases.
    pub fn coefficient_matrix(&self, psi: &GlobalState) -> Result<DMatrix<f64>> {
        self.check(psi)?;
        let mut m = DMatrix::zeros(self.left.dim(), self.right.dim());
        for (amps, pairs) in psi.sectors.iter().zip(&self.split) {
            for (&a, &(l, r)) in amps.iter().zip(pairs) {
                m[(l, r)] = a;
            }
        }
        Ok(m)
    }

    pub fn reduce(&self, psi: &GlobalState) -> Result<ReducedDensityMatrix> {
        if self.left.dim() > DEFAULT_RDM_CAP {
            return Err(Error::Resource(format!(
                "reduced density matrix of dimension {} exceeds the cap of {DEFAULT_RDM_CAP}",
                self.left.dim()
            )));
        }
        let m = self.coefficient_matrix(psi)?;
        Ok(ReducedDensityMatrix {
            matrix: &m * m.transpose(),
        })
    }

    /// `||P_{A_X} psi||^2 = sum_{Y != ∅} |psi(X ∪ Y)|^2` for every left
    /// configuration `X`, in left chain order.
    pub fn tail_weights(&self, psi: &GlobalState) -> Result<Vec<f64>> {
        self.check(psi)?;
        let mut w = vec![0.0; self.left.dim()];
        for (amps, pairs) in psi.sectors.iter().zip(&self.split) {
            for (&a, &(l, r)) in amps.iter().zip(pairs) {
                // right index 0 is the empty configuration
                if r != 0 {
                    w[l] += a * a;
                }
            }
        }
        Ok(w)
    }
}

/// `rho_1 = Tr_{right} |psi><psi|` on the left chain basis.
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    pub matrix: DMatrix<f64>,
}

impl ReducedDensityMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return domain("density matrix must be square");
        }
        Ok(Self { matrix })
    }

    /// `rho = sum_k p_k |e_k><e_k|` in the standard basis.
    pub fn diagonal(probabilities: &[f64]) -> Self {
        Self {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(probabilities)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Ascending eigenvalues, unclipped.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn checked_spectrum(&self) -> Result<Vec<f64>> {
        let t = self.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return domain(format!("density matrix has trace {t}, expected 1"));
        }
        Ok(self.eigenvalues())
    }
}

/// `psi -> rho_1` for the cut after site `ell`.
pub fn reduce_state(psi: &GlobalState, ell: usize) -> Result<ReducedDensityMatrix> {
    Bipartition::new(psi.two_j(), psi.sites(), ell)?.reduce(psi)
}

/// `-sum p log p` with eigenvalues clipped at zero.
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&p| p.max(0.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// `sum p^alpha` with eigenvalues clipped at zero.
pub fn trace_power_from_spectrum(eigenvalues: &[f64], alpha: f64) -> f64 {
    eigenvalues
        .iter()
        .map(|&p| p.max(0.0))
        .filter(|&p| p > 0.0)
        .map(|p| p.powf(alpha))
        .sum()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    Ok(())
}

/// `log(sum p^alpha) / (1 - alpha)`.
pub fn renyi_from_spectrum(eigenvalues: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((trace_power_from_spectrum(eigenvalues, alpha).ln() / (1.0 - alpha)).max(0.0))
}

/// Von Neumann entropy, natural logarithm.
pub fn von_neumann_entropy(rho: &ReducedDensityMatrix) -> Result<f64> {
    Ok(entropy_from_spectrum(&rho.checked_spectrum()?))
}

pub fn renyi_entropy(rho: &ReducedDensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    renyi_from_spectrum(&rho.checked_spectrum()?, alpha)
}

/// `Tr[rho^alpha]`.
pub fn trace_power(rho: &ReducedDensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(trace_power_from_spectrum(&rho.checked_spectrum()?, alpha))
}

/// Rényi data at one `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenyiValue {
    pub alpha: f64,
    pub trace_power: f64,
    pub entropy: f64,
}

/// Entropies of one state at one cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub state_id: String,
    pub energy: f64,
    /// `(N, weight)` for every sector carrying weight above `1e-14`.
    pub weight_profile: Vec<(usize, f64)>,
    pub von_neumann: f64,
    pub renyi: Vec<RenyiValue>,
    /// Smallest eigenvalue of `rho_1` before clipping.
    pub min_eigenvalue: f64,
}

/// Scores one state at the given cut.
pub fn measure_state(
    bipartition: &Bipartition,
    state_id: String,
    energy: f64,
    psi: &GlobalState,
    alphas: &[f64],
) -> Result<EntropyRecord> {
    let rho = bipartition.reduce(psi)?;
    let spectrum = rho.checked_spectrum()?;
    let renyi = alphas
        .iter()
        .map(|&alpha| {
            Ok(RenyiValue {
                alpha,
                trace_power: trace_power_from_spectrum(&spectrum, alpha),
                entropy: renyi_from_spectrum(&spectrum, alpha)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyRecord {
        state_id,
        energy,
        weight_profile: psi
            .sector_weights()
            .into_iter()
            .enumerate()
            .filter(|(_, w)| *w > 1e-14)
            .collect(),
        von_neumann: entropy_from_spectrum(&spectrum),
        renyi,
        min_eigenvalue: spectrum.first().copied().unwrap_or(0.0),
    })
}

/// Entropies of every eigenstate with energy `<= E_{K,delta}` and of
/// `random_states` seeded random normalized states in the same spectral
/// subspace, at the cut after site `ell`.
#[allow(clippy::too_many_arguments)]
pub fn measure_eigenstate_entropies(
    params: &SpinParams,
    field: &FieldSpec,
    budget: u32,
    delta: f64,
    ell: usize,
    alphas: &[f64],
    random_states: usize,
    seed: u64,
) -> Result<Vec<EntropyRecord>> {
    let spectrum = ChainSpectrum::new(params, field)?;
    measure_spectrum_entropies(&spectrum, budget, delta, ell, alphas, random_states, seed)
}

/// As [`measure_eigenstate_entropies`] on precomputed sector decompositions.
pub fn measure_spectrum_entropies(
    spectrum: &ChainSpectrum,
    budget: u32,
    delta: f64,
    ell: usize,
    alphas: &[f64],
    random_states: usize,
    seed: u64,
) -> Result<Vec<EntropyRecord>> {
    let params = spectrum.params();
    let cutoff = threshold_energy(budget, delta, params)?;
    let bip = Bipartition::new(params.two_j(), params.sites(), ell)?;
    spectrum
        .eigenstates_below(cutoff)
        .into_iter()
        .chain(spectrum.random_states_below(cutoff, random_states, seed))
        .map(|(id, energy, psi)| measure_state(&bip, id.to_string(), energy, &psi, alphas))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occ(two_j: u32, v: &[u32]) -> Occupation {
        Occupation::new(two_j, v.to_vec()).unwrap()
    }

    #[test]
    fn product_state_is_pure() {
        let chain = ChainBasis::new(2, 4).unwrap();
        let psi = GlobalState::basis_state(&chain, &occ(2, &[1, 2, 0, 1])).unwrap();
        let rho = reduce_state(&psi, 2).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        let bip = Bipartition::new(2, 4, 2).unwrap();
        let x = bip.left().global_index(&occ(2, &[1, 2])).unwrap();
        assert_eq!(rho.matrix[(x, x)], 1.0);
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-12);
        assert!(renyi_entropy(&rho, 0.4).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_pair() {
        let chain = ChainBasis::new(1, 4).unwrap();
        let a = chain.global_index(&occ(1, &[1, 0, 0, 1])).unwrap();
        let b = chain.global_index(&occ(1, &[0, 1, 1, 0])).unwrap();
        let mut amps = vec![0.0; chain.dim()];
        amps[a] = 1.0;
        amps[b] = 1.0;
        let mut psi = GlobalState::from_dense(&chain, &amps).unwrap();
        psi.normalize().unwrap();
        let rho = reduce_state(&psi, 2).unwrap();
        let ev = rho.eigenvalues();
        let top: Vec<f64> = ev.iter().rev().take(2).copied().collect();
        assert!(top.iter().all(|p| (p - 0.5).abs() < 1e-12));
        assert!((von_neumann_entropy(&rho).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((renyi_entropy(&rho, 0.3).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn spectrum_helpers() {
        let quarter = ReducedDensityMatrix::diagonal(&[0.25; 4]);
        assert!((von_neumann_entropy(&quarter).unwrap() - 4f64.ln()).abs() < 1e-14);
        let bad = ReducedDensityMatrix::diagonal(&[0.5, 0.3]);
        assert!(von_neumann_entropy(&bad).is_err());
        assert!(renyi_entropy(&quarter, 1.0).is_err());
        assert!(renyi_entropy(&quarter, 0.0).is_err());
        assert_eq!(entropy_from_spectrum(&[1.0, 0.0, -1e-17]), 0.0);
    }

    #[test]
    fn cut_range() {
        let chain = ChainBasis::new(1, 4).unwrap();
        let psi = GlobalState::basis_state(&chain, &occ(1, &[0; 4])).unwrap();
        assert!(reduce_state(&psi, 1).is_err());
        assert!(reduce_state(&psi, 4).is_err());
        assert!(reduce_state(&psi, 3).is_ok());
    }

    #[test]
    fn tail_weights_skip_empty_right() {
        let chain = ChainBasis::new(1, 4).unwrap();
        let psi = GlobalState::basis_state(&chain, &occ(1, &[1, 1, 0, 0])).unwrap();
        let bip = Bipartition::new(1, 4, 2).unwrap();
        assert!(bip.tail_weights(&psi).unwrap().iter().all(|&w| w == 0.0));
        let psi = GlobalState::basis_state(&chain, &occ(1, &[1, 1, 0, 1])).unwrap();
        let w = bip.tail_weights(&psi).unwrap();
        let x = bip.left().global_index(&occ(1, &[1, 1])).unwrap();
        assert_eq!(w[x], 1.0);
        assert_eq!(w.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn vacuum_has_no_entropy() {
        let p = SpinParams::new(1, 4, 2.5).unwrap();
        let recs = measure_eigenstate_entropies(&p, &FieldSpec::zeros(4), 1, 0.5, 2, &[0.5], 2, 1).unwrap();
        let vac = recs.iter().find(|r| r.state_id == "eig-N0-0").unwrap();
        assert_eq!(vac.von_neumann, 0.0);
        assert_eq!(vac.energy, 0.0);
        let e = threshold_energy(1, 0.5, &p).unwrap();
        for r in &recs {
            assert!(r.energy <= e + 1e-9);
            assert!(r.von_neumann <= r.renyi[0].entropy + 1e-9);
        }
        assert_eq!(recs.iter().filter(|r| r.state_id.starts_with("rand")).count(), 2);
    }
}

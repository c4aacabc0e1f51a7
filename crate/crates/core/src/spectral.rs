//! Dense eigensolvers, spectral projections and Combes–Thomas measurements.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{ct_decay_rate, ct_prefactor, resolvent_decay_rate};
use crate::config_space::{
    distance_to_set, graph_distance, low_energy_set, occupation_to_tuple, potential, ChainBasis,
    ConfigTuple, SectorBasis, SpinParams,
};
use crate::entanglement::GlobalState;
use crate::error::{domain, Error, Result};
use crate::operators::{
    assemble_potential, sector_hamiltonian, FieldSpec, SparseSymmetricOperator,
};

/// Padding added to energy cutoffs so that eigenvalues sitting on the cutoff
/// land inside deterministically.
pub const CUTOFF_PAD: f64 = 1e-9;

/// Relative symmetry defect tolerated by [`eigh_dense`].
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_k ||H v_k - lambda_k v_k|| / (1 + |lambda_k|)`.
    pub fn max_relative_residual(&self, h: &DMatrix<f64>) -> f64 {
        let hv = h * &self.eigenvectors;
        (0..self.dim())
            .map(|k| {
                let lam = self.eigenvalues[k];
                (hv.column(k) - self.eigenvectors.column(k) * lam).norm() / (1.0 + lam.abs())
            })
            .fold(0.0, f64::max)
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        (g - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        &self.eigenvectors * lam * self.eigenvectors.transpose()
    }

    /// Number of eigenvalues `<= cutoff + CUTOFF_PAD`.
    pub fn count_below(&self, cutoff: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l <= cutoff + CUTOFF_PAD)
    }

    /// Eigenvectors with eigenvalue `<= cutoff + CUTOFF_PAD`, as columns.
    pub fn low_eigenvectors(&self, cutoff: f64) -> DMatrix<f64> {
        let r = self.count_below(cutoff);
        self.eigenvectors.columns(0, r).into_owned()
    }
}

pub fn eigh(op: &SparseSymmetricOperator) -> Result<SpectralDecomposition> {
    eigh_dense(op.to_dense())
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
    }
    let scale = 1.0 + m.amax();
    let defect = (m - m.transpose()).amax();
    if defect > SYMMETRY_TOL * scale {
        return domain(format!("matrix is not symmetric (defect {defect:.3e})"));
    }
    Ok(())
}

/// Full symmetric eigendecomposition with ascending eigenvalues. Each
/// eigenvector's largest-magnitude component is made positive.
pub fn eigh_dense(m: DMatrix<f64>) -> Result<SpectralDecomposition> {
    check_symmetric(&m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col.iamax();
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(k, &(col * sign));
    }
    Ok(SpectralDecomposition {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: vectors,
    })
}

/// Ascending eigenvalues only; much cheaper than [`eigh_dense`] for large
/// matrices.
pub fn eigenvalues_dense(m: DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(&m)?;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `E_{K,delta} = (1 - 2J/Delta)(K + 1 - delta)`.
pub fn threshold_energy(budget: u32, delta: f64, params: &SpinParams) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0,1), got {delta}"));
    }
    Ok(params.gap_factor() * (budget as f64 + 1.0 - delta))
}

/// Dense orthogonal projection together with its rank.
#[derive(Clone, Debug)]
pub struct ProjectionMatrix {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

impl ProjectionMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max(|P^2 - P|, |P - P^T|)`.
    pub fn idempotence_defect(&self) -> f64 {
        let p = &self.matrix;
        (p * p - p).amax().max((p - p.transpose()).amax())
    }
}

/// Spectral projection onto eigenvalues `<= cutoff` (padded by
/// [`CUTOFF_PAD`]).
pub fn spectral_projection(decomp: &SpectralDecomposition, cutoff: f64) -> ProjectionMatrix {
    let v = decomp.low_eigenvectors(cutoff);
    ProjectionMatrix {
        rank: v.ncols(),
        matrix: &v * v.transpose(),
    }
}

fn check_indices(indices: &[usize], dim: usize) -> Result<()> {
    if indices.is_empty() {
        return domain("the index set must be non-empty");
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= dim) {
        return domain(format!("index {i} outside dimension {dim}"));
    }
    Ok(())
}

fn rows_of(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

fn spectral_norm(m: DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `||P_A Q||`: the largest singular value of the rows of `Q` indexed by `A`.
pub fn projection_block_norm(q: &ProjectionMatrix, subset: &[usize]) -> Result<f64> {
    check_indices(subset, q.dim())?;
    Ok(spectral_norm(rows_of(&q.matrix, subset)))
}

/// `||P_A Q||` computed from the low eigenvectors `U` of `Q = U U^T`, which
/// equals the norm of the rows of `U` indexed by `A`.
pub fn projected_rows_norm(low_vectors: &DMatrix<f64>, subset: &[usize]) -> Result<f64> {
    check_indices(subset, low_vectors.nrows())?;
    if low_vectors.ncols() == 0 {
        return Ok(0.0);
    }
    if let [x] = subset {
        return Ok(low_vectors.row(*x).norm());
    }
    Ok(spectral_norm(rows_of(low_vectors, subset)))
}

/// One configuration's entry in a decay profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub index: usize,
    pub distance: u64,
    pub norm: f64,
    pub bound: f64,
}

impl DecayRow {
    pub fn margin(&self) -> f64 {
        self.bound - self.norm
    }
}

/// `||P_{X} Q_{K,delta}^N||` against `C_{N,K} e^{-mu_K d}` for every
/// configuration `X` of a sector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayProfile {
    pub particles: usize,
    pub budget: u32,
    pub delta: f64,
    pub prefactor: f64,
    pub rate: f64,
    pub rank: usize,
    pub rows: Vec<DecayRow>,
}

impl DecayProfile {
    /// `(d, max norm at d, bound at d)`, ascending in `d`.
    pub fn by_distance(&self) -> Vec<(u64, f64, f64)> {
        let mut out: Vec<(u64, f64, f64)> = Vec::new();
        let mut rows: Vec<&DecayRow> = self.rows.iter().collect();
        rows.sort_by_key(|r| r.distance);
        for r in rows {
            match out.last_mut() {
                Some(last) if last.0 == r.distance => last.1 = last.1.max(r.norm),
                _ => out.push((r.distance, r.norm, r.bound)),
            }
        }
        out
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(DecayRow::margin).fold(f64::INFINITY, f64::min)
    }
}

/// Smallest value of `V` on the sector, `V_{N,0}`.
pub fn sector_min_potential(basis: &SectorBasis) -> f64 {
    basis
        .states()
        .iter()
        .map(potential)
        .min()
        .map_or(0.0, |v| v.value())
}

/// Decay profile of one sector, diagonalizing `H_N + W_N` on the spot.
pub fn ct_decay_profile(
    params: &SpinParams,
    particles: usize,
    budget: u32,
    delta: f64,
    field: &FieldSpec,
) -> Result<DecayProfile> {
    let basis = SectorBasis::for_params(params, particles)?;
    let decomp = eigh(&sector_hamiltonian(params, &basis, field)?)?;
    ct_decay_profile_from(params, &basis, &decomp, budget, delta)
}

/// Decay profile from an existing decomposition of `H_N + W_N`.
pub fn ct_decay_profile_from(
    params: &SpinParams,
    basis: &SectorBasis,
    decomp: &SpectralDecomposition,
    budget: u32,
    delta: f64,
) -> Result<DecayProfile> {
    if decomp.dim() != basis.len() {
        return domain("decomposition and basis sizes differ");
    }
    let low = low_energy_set(params, basis.particles(), budget)?;
    if low.is_empty() {
        return domain(format!(
            "no configuration with V <= {budget} among {} particles",
            basis.particles()
        ));
    }
    let cutoff = threshold_energy(budget, delta, params)?;
    let prefactor = ct_prefactor(budget, delta, sector_min_potential(basis))?;
    let rate = ct_decay_rate(params, budget, delta)?;
    let u = decomp.low_eigenvectors(cutoff);
    let rows = basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let d = distance_to_set(&occupation_to_tuple(m), &low)?;
            Ok(DecayRow {
                index: i,
                distance: d,
                norm: if u.ncols() == 0 { 0.0 } else { u.row(i).norm() },
                bound: prefactor * (-rate * d as f64).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayProfile {
        particles: basis.particles(),
        budget,
        delta,
        prefactor,
        rate,
        rank: u.ncols(),
        rows,
    })
}

/// Outcome of a resolvent decay check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventCheck {
    /// `||P_A (H + W - z)^{-1} P_B||`.
    pub lhs: f64,
    /// `2 / (V_{N,0} kappa) e^{-eta d(A,B)}`.
    pub rhs: f64,
    /// `||V^{1/2} (H + W - z)^{-1} V^{1/2}||`, which must be `<= 1/kappa`.
    pub weighted_norm: f64,
    pub kappa: f64,
    pub eta: f64,
    pub distance: u64,
}

impl ResolventCheck {
    pub fn hypothesis_holds(&self) -> bool {
        self.weighted_norm <= (1.0 + 1e-12) / self.kappa
    }
}

/// Checks the weighted resolvent decay estimate on one sector for the
/// multiplication operator `W` given by `field`.
#[allow(clippy::too_many_arguments)]
pub fn ct_resolvent_check(
    params: &SpinParams,
    particles: usize,
    field: &FieldSpec,
    z: Complex<f64>,
    kappa: Option<f64>,
    set_a: &[usize],
    set_b: &[usize],
) -> Result<ResolventCheck> {
    let basis = SectorBasis::for_params(params, particles)?;
    let h = sector_hamiltonian(params, &basis, field)?.to_dense();
    resolvent_check_dense(params, &basis, h, z, kappa, set_a, set_b)
}

/// As [`ct_resolvent_check`] for an arbitrary symmetric `H_N + Y_N` given
/// densely on the sector basis. With `kappa = None` the largest admissible
/// value `1 / ||V^{1/2} R V^{1/2}||` is used.
pub fn resolvent_check_dense(
    params: &SpinParams,
    basis: &SectorBasis,
    h: DMatrix<f64>,
    z: Complex<f64>,
    kappa: Option<f64>,
    set_a: &[usize],
    set_b: &[usize],
) -> Result<ResolventCheck> {
    if basis.particles() == 0 {
        return domain("the resolvent estimate needs at least one particle");
    }
    let n = basis.len();
    check_indices(set_a, n)?;
    check_indices(set_b, n)?;
    let decomp = eigh_dense(h)?;
    if let Some(lam) = decomp
        .eigenvalues
        .iter()
        .find(|&&l| (Complex::new(l, 0.0) - z).norm() < 1e-8)
    {
        return domain(format!("z = {z} lies within 1e-8 of the eigenvalue {lam}"));
    }
    let v = &decomp.eigenvectors;
    let resolvent = DMatrix::<Complex<f64>>::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| Complex::new(v[(r, k)] * v[(c, k)], 0.0) / (Complex::new(decomp.eigenvalues[k], 0.0) - z))
            .sum()
    });
    let sqrt_v: Vec<f64> = assemble_potential(basis)
        .diagonal_values()
        .iter()
        .map(|x| x.sqrt())
        .collect();
    let weighted = DMatrix::from_fn(n, n, |r, c| resolvent[(r, c)] * (sqrt_v[r] * sqrt_v[c]));
    let weighted_norm = weighted.singular_values().max();
    let kappa = kappa.unwrap_or(1.0 / weighted_norm);
    if !(kappa > 0.0 && kappa.is_finite()) {
        return domain(format!("kappa must be positive and finite, got {kappa}"));
    }
    let block = DMatrix::from_fn(set_a.len(), set_b.len(), |r, c| resolvent[(set_a[r], set_b[c])]);
    let lhs = block.singular_values().max();

    let tuples: Vec<ConfigTuple> = basis.tuples();
    let mut distance = u64::MAX;
    for &a in set_a {
        for &b in set_b {
            distance = distance.min(graph_distance(&tuples[a], &tuples[b])?);
        }
    }
    let eta = resolvent_decay_rate(params, kappa)?;
    let v0 = sector_min_potential(basis);
    Ok(ResolventCheck {
        lhs,
        rhs: 2.0 / (v0 * kappa) * (-eta * distance as f64).exp(),
        weighted_norm,
        kappa,
        eta,
        distance,
    })
}

/// `min sigma(H_N + W_N + gamma P_S)` with `gamma = (1 - 2J/Delta) K` and
/// `S` the configurations with `V <= K`, next to the bound
/// `(1 - 2J/Delta)(K + 1)` it must respect.
pub fn shifted_gap(
    params: &SpinParams,
    particles: usize,
    budget: u32,
    field: &FieldSpec,
) -> Result<(f64, f64)> {
    let basis = SectorBasis::for_params(params, particles)?;
    let h = sector_hamiltonian(params, &basis, field)?;
    let gamma = params.gap_factor() * budget as f64;
    let limit = crate::config_space::HalfInteger::from_integer(budget as i64);
    let shift: Vec<f64> = basis
        .states()
        .iter()
        .map(|m| if potential(m) <= limit { gamma } else { 0.0 })
        .collect();
    let shifted = h.combine(1.0, &SparseSymmetricOperator::diagonal(&shift), 1.0)?;
    let ev = eigenvalues_dense(shifted.to_dense())?;
    Ok((ev[0], params.gap_factor() * (budget as f64 + 1.0)))
}

/// Label of a state in a [`ChainSpectrum`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateId {
    /// Eigenvector `index` (ascending energy) of sector `particles`.
    Eigen { particles: usize, index: usize },
    /// Seeded random combination of low eigenvectors.
    Random { seed: u64, draw: usize },
}

impl std::fmt::Display for StateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateId::Eigen { particles, index } => write!(f, "eig-N{particles}-{index}"),
            StateId::Random { seed, draw } => write!(f, "rand-{seed}-{draw}"),
        }
    }
}

/// Decompositions of `H_N + W_N` for every sector of one chain.
#[derive(Clone, Debug)]
pub struct ChainSpectrum {
    params: SpinParams,
    chain: ChainBasis,
    sectors: Vec<SpectralDecomposition>,
}

impl ChainSpectrum {
    pub fn new(params: &SpinParams, field: &FieldSpec) -> Result<Self> {
        let chain = ChainBasis::new(params.two_j(), params.sites())?;
        let sectors = chain
            .sectors()
            .iter()
            .map(|b| eigh(&sector_hamiltonian(params, b, field)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            chain,
            sectors,
        })
    }

    /// Reassembles from previously computed sector decompositions.
    pub fn from_parts(params: &SpinParams, sectors: Vec<SpectralDecomposition>) -> Result<Self> {
        let chain = ChainBasis::new(params.two_j(), params.sites())?;
        if sectors.len() != chain.sectors().len()
            || sectors.iter().zip(chain.sectors()).any(|(d, b)| d.dim() != b.len())
        {
            return Err(Error::Structural(
                "sector decompositions do not match the chain basis".into(),
            ));
        }
        Ok(Self {
            params: *params,
            chain,
            sectors,
        })
    }

    pub fn params(&self) -> &SpinParams {
        &self.params
    }

    pub fn chain(&self) -> &ChainBasis {
        &self.chain
    }

    pub fn sector(&self, particles: usize) -> &SpectralDecomposition {
        &self.sectors[particles]
    }

    pub fn sectors(&self) -> &[SpectralDecomposition] {
        &self.sectors
    }

    /// Every eigenvalue of the chain, ascending.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.sectors.iter().flat_map(|d| d.eigenvalues.iter().copied()).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigenstates with energy `<= cutoff`, sector by sector.
    pub fn eigenstates_below(&self, cutoff: f64) -> Vec<(StateId, f64, GlobalState)> {
        let mut out = Vec::new();
        for (n, d) in self.sectors.iter().enumerate() {
            for k in 0..d.count_below(cutoff) {
                let state = GlobalState::in_sector(&self.chain, n, d.eigenvectors.column(k).iter().copied().collect())
                    .expect("eigenvector matches its sector");
                out.push((StateId::Eigen { particles: n, index: k }, d.eigenvalues[k], state));
            }
        }
        out
    }

    /// Normalized random states in the range of the spectral projection onto
    /// `[0, cutoff]`: standard normal coefficients on all low eigenvectors.
    /// Returns each state with its mean energy.
    pub fn random_states_below(&self, cutoff: f64, count: usize, seed: u64) -> Vec<(StateId, f64, GlobalState)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let ranks: Vec<usize> = self.sectors.iter().map(|d| d.count_below(cutoff)).collect();
        if ranks.iter().all(|&r| r == 0) {
            return out;
        }
        for draw in 0..count {
            let mut amps = Vec::with_capacity(self.sectors.len());
            let mut energy = 0.0;
            let mut norm2 = 0.0;
            for (d, &r) in self.sectors.iter().zip(&ranks) {
                let mut v = DVector::zeros(d.dim());
                for k in 0..r {
                    let c: f64 = StandardNormal.sample(&mut rng);
                    v += d.eigenvectors.column(k) * c;
                    energy += c * c * d.eigenvalues[k];
                    norm2 += c * c;
                }
                amps.push(v.iter().copied().collect::<Vec<f64>>());
            }
            let mut state = GlobalState::from_sectors(&self.chain, amps).expect("sector sizes match");
            state.normalize().expect("at least one low eigenvector was drawn");
            out.push((StateId::Random { seed, draw }, energy / norm2, state));
        }
        out
    }
}

//! Sector operators in the configuration basis and the tensor-product
//! Hamiltonian they are equivalent to.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config_space::{hop_neighbors, potential, ChainBasis, SectorBasis, SpinParams};
use crate::error::{domain, Error, Result};

/// Default cap on `(2J+1)^L` for the full tensor build.
pub const DEFAULT_TENSOR_CAP: usize = 20_000;

/// Real symmetric operator in coordinate form.
///
/// Only entries with `row <= col` are stored, sorted row-major. Lower
/// entries are implied.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetricOperator {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymmetricOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i, i, v))
            .collect();
        Self {
            dim: values.len(),
            entries,
        }
    }

    /// Builds from upper-triangle triplets. Repeated positions are summed and
    /// exact zeros dropped.
    pub fn from_upper_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r > c {
                return domain(format!("triplet ({r},{c}) lies below the diagonal"));
            }
            if c >= dim {
                return domain(format!("triplet ({r},{c}) outside dimension {dim}"));
            }
            if !v.is_finite() {
                return domain(format!("non-finite value at ({r},{c})"));
            }
            *acc.entry((r, c)).or_insert(0.0) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Ok(Self { dim, entries })
    }

    /// Builds from a full triplet list that must contain both `(r,c)` and
    /// `(c,r)` with identical values.
    pub fn from_full_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut lower: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in triplets {
            let slot = if r <= c {
                upper.entry((r, c))
            } else {
                lower.entry((c, r))
            };
            *slot.or_insert(0.0) += v;
        }
        for (&(r, c), &v) in &lower {
            let u = upper.get(&(r, c)).copied().unwrap_or(0.0);
            if (u - v).abs() > 1e-12 * (1.0 + u.abs()) {
                return domain(format!("asymmetric entries at ({r},{c}): {u} vs {v}"));
            }
        }
        for (&(r, c), &u) in &upper {
            if r != c && !lower.contains_key(&(r, c)) && u != 0.0 {
                return domain(format!("entry ({r},{c}) has no transpose partner"));
            }
        }
        Self::from_upper_triplets(dim, upper.into_iter().map(|((r, c), v)| (r, c, v)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored (upper-triangle) entries.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let key = (row.min(col), row.max(col));
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&key))
            .map_or(0.0, |i| self.entries[i].2)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim {
            return domain(format!(
                "vector of length {} against operator of dimension {}",
                x.len(),
                self.dim
            ));
        }
        let mut y = DVector::zeros(self.dim);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        Ok(y)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            ));
        }
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, a * v))
            .chain(other.entries.iter().map(|&(r, c, v)| (r, c, b * v)));
        Self::from_upper_triplets(self.dim, triplets)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, factor * v))
                .filter(|e| e.2 != 0.0)
                .collect(),
        }
    }

    /// `P self P^T` for a permutation sending old index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim {
            return domain("permutation length differs from dimension");
        }
        let triplets = self.entries.iter().map(|&(r, c, v)| {
            let (a, b) = (perm[r], perm[c]);
            (a.min(b), a.max(b), v)
        });
        Self::from_upper_triplets(self.dim, triplets)
    }

    /// Restriction to the listed indices, in the given order.
    pub fn restricted(&self, indices: &[usize]) -> Result<Self> {
        let mut position = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            if i >= self.dim {
                return domain(format!("index {i} outside dimension {}", self.dim));
            }
            position[i] = k;
        }
        let triplets = self.entries.iter().filter_map(|&(r, c, v)| {
            let (a, b) = (position[r], position[c]);
            (a != usize::MAX && b != usize::MAX).then(|| (a.min(b), a.max(b), v))
        });
        Self::from_upper_triplets(indices.len(), triplets)
    }

    /// Coordinate dump: `dim nnz`, then one `row col value` line per stored
    /// entry with 17 significant digits.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.entries.len() + 1));
        let _ = writeln!(out, "{} {}", self.dim, self.entries.len());
        for &(r, c, v) in &self.entries {
            let _ = writeln!(out, "{r} {c} {v:.16e}");
        }
        out
    }

    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_coordinate_text().as_bytes())
    }

    pub fn read_coordinate(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let parse_err = |line: usize, msg: &str| Error::Parse(format!("line {}: {msg}", line + 1));
        let (n0, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty operator dump".into()))?;
        let header = header.map_err(|e| parse_err(n0, &e.to_string()))?;
        let mut it = header.split_whitespace();
        let (dim, nnz) = match (it.next(), it.next(), it.next()) {
            (Some(d), Some(n), None) => (
                d.parse::<usize>().map_err(|_| parse_err(n0, "bad dim"))?,
                n.parse::<usize>().map_err(|_| parse_err(n0, "bad nnz"))?,
            ),
            _ => return Err(parse_err(n0, "header must be `dim nnz`")),
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (n, line) in lines {
            let line = line.map_err(|e| parse_err(n, &e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(n, "expected `row col value`"));
            }
            let r = f[0].parse().map_err(|_| parse_err(n, "bad row"))?;
            let c = f[1].parse().map_err(|_| parse_err(n, "bad col"))?;
            let v: f64 = f[2].parse().map_err(|_| parse_err(n, "bad value"))?;
            triplets.push((r, c, v));
        }
        if triplets.len() != nnz {
            return Err(Error::Parse(format!(
                "header announces {nnz} entries, found {}",
                triplets.len()
            )));
        }
        Self::from_upper_triplets(dim, triplets)
    }
}

/// Site field `nu(j) >= 0`, a background potential `W(X) = sum_i nu(x_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    nu: Vec<f64>,
}

impl FieldSpec {
    pub fn new(nu: Vec<f64>) -> Result<Self> {
        if let Some((j, v)) = nu.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return domain(format!("field at site {} is {v}; must be finite and >= 0", j + 1));
        }
        Ok(Self { nu })
    }

    pub fn zeros(sites: usize) -> Self {
        Self {
            nu: vec![0.0; sites],
        }
    }

    /// i.i.d. uniform on `[0, nu_max]`.
    pub fn uniform(sites: usize, nu_max: f64, seed: u64) -> Result<Self> {
        if !(nu_max >= 0.0 && nu_max.is_finite()) {
            return domain(format!("nu_max must be finite and >= 0, got {nu_max}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nu = (0..sites).map(|_| nu_max * rng.random::<f64>()).collect();
        Ok(Self { nu })
    }

    pub fn values(&self) -> &[f64] {
        &self.nu
    }

    pub fn sites(&self) -> usize {
        self.nu.len()
    }

    pub fn is_zero(&self) -> bool {
        self.nu.iter().all(|&v| v == 0.0)
    }

    /// Restriction to sites `1..=len`.
    pub fn truncated(&self, len: usize) -> Self {
        Self {
            nu: self.nu[..len.min(self.nu.len())].to_vec(),
        }
    }
}

/// `A_N`: hopping weights between adjacent configurations.
pub fn assemble_adjacency(basis: &SectorBasis) -> SparseSymmetricOperator {
    let mut triplets = Vec::new();
    for (i, m) in basis.states().iter().enumerate() {
        for (n, w) in hop_neighbors(m) {
            let k = basis.index_of(&n).expect("hop stays inside the sector");
            if i < k {
                triplets.push((i, k, w));
            }
        }
    }
    SparseSymmetricOperator::from_upper_triplets(basis.len(), triplets)
        .expect("adjacency triplets are well formed")
}

/// `V_N` as a diagonal operator.
pub fn assemble_potential(basis: &SectorBasis) -> SparseSymmetricOperator {
    let d: Vec<f64> = basis.states().iter().map(|m| potential(m).value()).collect();
    SparseSymmetricOperator::diagonal(&d)
}

/// `W_N(X) = sum_i nu(x_i)`.
pub fn assemble_field(basis: &SectorBasis, field: &FieldSpec) -> Result<SparseSymmetricOperator> {
    if field.sites() != basis.sites() {
        return domain(format!(
            "field has {} sites, basis {}",
            field.sites(),
            basis.sites()
        ));
    }
    let nu = field.values();
    let d: Vec<f64> = basis
        .states()
        .iter()
        .map(|m| {
            m.values()
                .iter()
                .zip(nu)
                .map(|(&c, &v)| c as f64 * v)
                .sum()
        })
        .collect();
    Ok(SparseSymmetricOperator::diagonal(&d))
}

/// `H = -(2 Delta)^{-1} A + V + W`.
pub fn assemble_hamiltonian(
    adjacency: &SparseSymmetricOperator,
    potential: &SparseSymmetricOperator,
    field: &SparseSymmetricOperator,
    anisotropy: f64,
) -> Result<SparseSymmetricOperator> {
    if !(anisotropy > 0.0 && anisotropy.is_finite()) {
        return domain(format!("anisotropy must be positive, got {anisotropy}"));
    }
    adjacency
        .combine(-0.5 / anisotropy, potential, 1.0)?
        .combine(1.0, field, 1.0)
}

/// `H_N + W_N` on one sector, straight from the model parameters.
pub fn sector_hamiltonian(
    params: &SpinParams,
    basis: &SectorBasis,
    field: &FieldSpec,
) -> Result<SparseSymmetricOperator> {
    assemble_hamiltonian(
        &assemble_adjacency(basis),
        &assemble_potential(basis),
        &assemble_field(basis, field)?,
        params.anisotropy(),
    )
}

/// Spin-J matrices in the basis `e_k`, `k = 0..=2J`, with `S^3 e_k = (J-k) e_k`.
///
/// `S^2` is purely imaginary, so it is stored through its imaginary part:
/// `S^2 = i * s2_imag`.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub two_j: u32,
    pub s1: DMatrix<f64>,
    pub s2_imag: DMatrix<f64>,
    pub s3: DMatrix<f64>,
    pub splus: DMatrix<f64>,
    pub sminus: DMatrix<f64>,
}

impl SpinMatrices {
    pub fn local_dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// `J - S^3`, the local particle number.
    pub fn local_number(&self) -> DMatrix<f64> {
        let j = self.two_j as f64 / 2.0;
        DMatrix::identity(self.local_dim(), self.local_dim()) * j - &self.s3
    }
}

pub fn spin_matrices(two_j: u32) -> Result<SpinMatrices> {
    if two_j == 0 {
        return domain("2J must be at least 1");
    }
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let mut s3 = DMatrix::zeros(d, d);
    let mut splus = DMatrix::zeros(d, d);
    for k in 0..d {
        let m = j - k as f64;
        s3[(k, k)] = m;
        if k > 0 {
            splus[(k - 1, k)] = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        }
    }
    let sminus = splus.transpose();
    let s1 = (&splus + &sminus) * 0.5;
    let s2_imag = (&sminus - &splus) * 0.5;
    Ok(SpinMatrices {
        two_j,
        s1,
        s2_imag,
        s3,
        splus,
        sminus,
    })
}

/// Tensor index `sum_j m(j) (2J+1)^{L-j}`; site 1 is the most significant digit.
pub fn tensor_index(values: &[u32], two_j: u32) -> usize {
    let base = two_j as usize + 1;
    values.iter().fold(0, |acc, &v| acc * base + v as usize)
}

fn tensor_digits(mut index: usize, base: usize, sites: usize, out: &mut [usize]) {
    for slot in out[..sites].iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
}

/// The full Hamiltonian on `(C^{2J+1})^{⊗L}`, assembled from the two-site
/// interaction `J^2 - S^3⊗S^3 - Delta^{-1}(S^1⊗S^1 + S^2⊗S^2)`, the boundary
/// term `J(2J - S^3_1 - S^3_L)` and the field `sum_j nu(j) N^loc_j`.
pub fn assemble_full_tensor_hamiltonian(
    params: &SpinParams,
    field: &FieldSpec,
    dim_cap: usize,
) -> Result<SparseSymmetricOperator> {
    let sites = params.sites();
    if field.sites() != sites {
        return domain(format!("field has {} sites, chain {sites}", field.sites()));
    }
    let base = params.two_j() as usize + 1;
    let dim = base
        .checked_pow(sites as u32)
        .filter(|&d| d <= dim_cap)
        .ok_or_else(|| {
            Error::Resource(format!(
                "tensor dimension {base}^{sites} exceeds the cap of {dim_cap}"
            ))
        })?;
    let spin = spin_matrices(params.two_j())?;
    let j = params.spin();
    let id = DMatrix::<f64>::identity(base, base);

    // S^2⊗S^2 = (i T)⊗(i T) = -T⊗T
    let xy = spin.s1.kronecker(&spin.s1) - spin.s2_imag.kronecker(&spin.s2_imag);
    let bond = id.kronecker(&id) * (j * j) - spin.s3.kronecker(&spin.s3) - xy / params.anisotropy();
    let number = spin.local_number();
    // J(2J - S^3_1 - S^3_L) = J (J - S^3_1) + J (J - S^3_L)
    let boundary = &number * j;

    let bond_nz = nonzeros(&bond);
    let mut triplets = Vec::new();
    let mut digits = vec![0usize; sites];
    let mut stride = vec![0usize; sites];
    for (s, st) in stride.iter_mut().enumerate() {
        *st = base.pow((sites - 1 - s) as u32);
    }
    for col in 0..dim {
        tensor_digits(col, base, sites, &mut digits);
        let mut diag = 0.0;
        diag += boundary[(digits[0], digits[0])] + boundary[(digits[sites - 1], digits[sites - 1])];
        for (s, &nu) in field.values().iter().enumerate() {
            diag += nu * number[(digits[s], digits[s])];
        }
        triplets.push((col, col, diag));
        for s in 0..sites - 1 {
            let pair_col = digits[s] * base + digits[s + 1];
            for &(pr, pc, v) in &bond_nz {
                if pc != pair_col {
                    continue;
                }
                let (a, b) = (pr / base, pr % base);
                let row = col + a * stride[s] + b * stride[s + 1]
                    - digits[s] * stride[s]
                    - digits[s + 1] * stride[s + 1];
                triplets.push((row, col, v));
            }
        }
    }
    SparseSymmetricOperator::from_full_triplets(dim, triplets)
}

fn nonzeros(m: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v.abs() > 1e-15 {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Total particle number `N_L = sum_j (J - S^3_j)` on the tensor space, as a
/// diagonal.
pub fn particle_number_diagonal(two_j: u32, sites: usize) -> Vec<f64> {
    let base = two_j as usize + 1;
    let dim = base.pow(sites as u32);
    let mut digits = vec![0usize; sites];
    (0..dim)
        .map(|i| {
            tensor_digits(i, base, sites, &mut digits);
            digits.iter().sum::<usize>() as f64
        })
        .collect()
}

/// For each configuration-basis state of the sector, its tensor-basis index.
pub fn sector_embedding(params: &SpinParams, particles: usize) -> Result<Vec<usize>> {
    let basis = SectorBasis::for_params(params, particles)?;
    Ok(basis
        .states()
        .iter()
        .map(|m| tensor_index(m.values(), params.two_j()))
        .collect())
}

/// Tensor index of every state of the chain basis, in chain order.
pub fn chain_embedding(chain: &ChainBasis) -> Vec<usize> {
    chain
        .sectors()
        .iter()
        .flat_map(|s| s.states().iter().map(|m| tensor_index(m.values(), chain.two_j())))
        .collect()
}

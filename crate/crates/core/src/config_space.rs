//! Particle configurations of the spin-J chain.
//!
//! A configuration is described either by its occupation function
//! ([`Occupation`], `m(j)` particles at site `j`, at most `2J` per site) or by
//! the sorted multiset of particle positions ([`ConfigTuple`]). Both views are
//! in bijection and every routine here works with whichever one is natural.
//!
//! Spin is always carried as the integer `two_j = 2J`, and potentials as the
//! exact integer `2V` ([`HalfInteger`]), so no combinatorial decision ever
//! depends on a floating point comparison.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest supported `2J`. Occupations are small integers; this only guards
/// against nonsense input.
pub const MAX_TWO_J: u32 = 64;

/// Model parameters of the chain: spin, length and anisotropy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinParams {
    two_j: u32,
    sites: usize,
    anisotropy: f64,
}

impl SpinParams {
    /// Requires `2J >= 1`, `L >= 2` and `Delta > 2J`.
    pub fn new(two_j: u32, sites: usize, anisotropy: f64) -> Result<Self> {
        check_two_j(two_j)?;
        if sites < 2 {
            return domain(format!("chain length must be at least 2, got {sites}"));
        }
        if !anisotropy.is_finite() || anisotropy <= two_j as f64 {
            return domain(format!(
                "anisotropy must exceed 2J = {two_j}, got {anisotropy}"
            ));
        }
        Ok(Self {
            two_j,
            sites,
            anisotropy,
        })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }

    /// The spin `J` as a float.
    pub fn spin(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn max_particles(&self) -> usize {
        self.two_j as usize * self.sites
    }

    /// `1 - 2J/Delta`, the coercivity constant of `H_N` relative to `V_N`.
    pub fn gap_factor(&self) -> f64 {
        1.0 - self.two_j as f64 / self.anisotropy
    }

    /// Same spin and anisotropy on a chain of a different length.
    pub fn with_sites(&self, sites: usize) -> Result<Self> {
        Self::new(self.two_j, sites, self.anisotropy)
    }
}

fn check_two_j(two_j: u32) -> Result<()> {
    if two_j == 0 || two_j > MAX_TWO_J {
        return domain(format!("2J must lie in [1, {MAX_TWO_J}], got {two_j}"));
    }
    Ok(())
}

/// An exact half-integer, stored as twice its value.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct HalfInteger(i64);

impl HalfInteger {
    pub const ZERO: Self = Self(0);

    pub fn from_doubled(doubled: i64) -> Self {
        Self(doubled)
    }

    pub fn from_integer(value: i64) -> Self {
        Self(2 * value)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Occupation function `m: {1..L} -> {0..2J}`.
///
/// Ordering is lexicographic on the value sequence, which is the canonical
/// basis order of every sector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occupation {
    values: Vec<u32>,
    two_j: u32,
}

impl Occupation {
    pub fn new(two_j: u32, values: Vec<u32>) -> Result<Self> {
        check_two_j(two_j)?;
        if values.is_empty() {
            return domain("an occupation function needs at least one site");
        }
        if let Some((site, &v)) = values.iter().enumerate().find(|(_, &v)| v > two_j) {
            return domain(format!(
                "site {} holds {v} particles, more than 2J = {two_j}",
                site + 1
            ));
        }
        Ok(Self { values, two_j })
    }

    pub fn zeros(two_j: u32, sites: usize) -> Result<Self> {
        Self::new(two_j, vec![0; sites])
    }

    /// All sites filled to `2J`.
    pub fn full(two_j: u32, sites: usize) -> Result<Self> {
        Self::new(two_j, vec![two_j; sites])
    }

    pub(crate) fn from_raw(two_j: u32, values: Vec<u32>) -> Self {
        debug_assert!(values.iter().all(|&v| v <= two_j));
        Self { values, two_j }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn sites(&self) -> usize {
        self.values.len()
    }

    /// Occupation at the 1-based site `j`.
    pub fn at(&self, site: usize) -> u32 {
        self.values[site - 1]
    }

    pub fn particle_number(&self) -> usize {
        self.values.iter().map(|&v| v as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn to_tuple(&self) -> ConfigTuple {
        occupation_to_tuple(self)
    }

    /// Splits into the restriction to sites `1..=cut` and to `cut+1..=L`.
    pub fn split_at(&self, cut: usize) -> Result<(Occupation, Occupation)> {
        if cut == 0 || cut >= self.sites() {
            return domain(format!(
                "cut {cut} must lie strictly inside 1..{}",
                self.sites()
            ));
        }
        Ok((
            Self::from_raw(self.two_j, self.values[..cut].to_vec()),
            Self::from_raw(self.two_j, self.values[cut..].to_vec()),
        ))
    }

    /// Concatenation `m_X + m_Y` of a left and a right piece.
    pub fn concat(&self, right: &Occupation) -> Result<Occupation> {
        if self.two_j != right.two_j {
            return domain("cannot join occupations with different 2J");
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&right.values);
        Ok(Self::from_raw(self.two_j, values))
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Ordered multiset `x_1 <= ... <= x_N` of 1-based particle positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConfigTuple {
    positions: Vec<usize>,
    two_j: u32,
}

impl ConfigTuple {
    /// Validates ordering, positivity and the capacity rule `x_{k+2J} > x_k`.
    pub fn new(two_j: u32, positions: Vec<usize>) -> Result<Self> {
        check_two_j(two_j)?;
        if positions.first() == Some(&0) {
            return domain("positions are 1-based");
        }
        if positions.windows(2).any(|w| w[0] > w[1]) {
            return domain("positions must be non-decreasing");
        }
        let cap = two_j as usize;
        if positions.len() > cap
            && positions
                .iter()
                .zip(&positions[cap..])
                .any(|(a, b)| b <= a)
        {
            return domain(format!("more than 2J = {two_j} particles share a site"));
        }
        Ok(Self { positions, two_j })
    }

    pub fn empty(two_j: u32) -> Self {
        Self {
            positions: Vec::new(),
            two_j,
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn to_occupation(&self, sites: usize) -> Result<Occupation> {
        tuple_to_occupation(self, sites)
    }
}

/// Kind of a [`BuildingBlock`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// One site holding `height` particles, `1 <= height <= 2J`.
    Column { height: u32 },
    /// A run of sites each holding exactly `2J` particles.
    Rectangle,
}

/// Atomic piece of a configuration: a single column or a fully packed run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildingBlock {
    pub kind: BlockKind,
    /// First supported site (1-based).
    pub start: usize,
    /// Last supported site (1-based, inclusive).
    pub end: usize,
}

impl BuildingBlock {
    pub fn column(site: usize, height: u32, two_j: u32) -> Result<Self> {
        if site == 0 || height == 0 || height > two_j {
            return domain(format!(
                "column needs a 1-based site and height in [1, {two_j}]"
            ));
        }
        Ok(Self {
            kind: BlockKind::Column { height },
            start: site,
            end: site,
        })
    }

    pub fn rectangle(start: usize, end: usize) -> Result<Self> {
        if start == 0 || end < start {
            return domain("rectangle needs 1 <= start <= end");
        }
        Ok(Self {
            kind: BlockKind::Rectangle,
            start,
            end,
        })
    }

    /// Recognizes an occupation function that is itself a building block.
    pub fn from_occupation(m: &Occupation) -> Result<Self> {
        let support: Vec<usize> = (1..=m.sites()).filter(|&j| m.at(j) > 0).collect();
        match support.as_slice() {
            [] => domain("the empty configuration is not a building block"),
            [site] => Self::column(*site, m.at(*site), m.two_j()),
            [first, .., last] => {
                let contiguous = support.len() == last - first + 1;
                if contiguous && support.iter().all(|&j| m.at(j) == m.two_j()) {
                    Self::rectangle(*first, *last)
                } else {
                    domain(format!("{m} is neither a column nor a packed rectangle"))
                }
            }
        }
    }

    pub fn particles(&self, two_j: u32) -> usize {
        match self.kind {
            BlockKind::Column { height } => height as usize,
            BlockKind::Rectangle => two_j as usize * (self.end - self.start + 1),
        }
    }

    pub fn to_occupation(&self, two_j: u32, sites: usize) -> Result<Occupation> {
        if self.end > sites {
            return domain(format!("block ends at {} beyond chain of {sites}", self.end));
        }
        let mut values = vec![0; sites];
        match self.kind {
            BlockKind::Column { height } => values[self.start - 1] = height,
            BlockKind::Rectangle => values[self.start - 1..self.end].fill(two_j),
        }
        Occupation::new(two_j, values)
    }
}

/// Every occupation function on `sites` sites with `particles` particles,
/// ascending lexicographically.
pub fn enumerate_occupations(two_j: u32, sites: usize, particles: usize) -> Result<Vec<Occupation>> {
    check_two_j(two_j)?;
    if sites == 0 {
        return domain("need at least one site");
    }
    if particles > two_j as usize * sites {
        return domain(format!(
            "{particles} particles do not fit on {sites} sites with 2J = {two_j}"
        ));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(sites);
    fill_lexicographic(two_j as usize, sites, particles, &mut prefix, &mut out);
    Ok(out
        .into_iter()
        .map(|values| Occupation::from_raw(two_j, values))
        .collect())
}

fn fill_lexicographic(
    cap: usize,
    sites: usize,
    remaining: usize,
    prefix: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    let left = sites - prefix.len();
    if left == 0 {
        out.push(prefix.clone());
        return;
    }
    let lo = remaining.saturating_sub(cap * (left - 1));
    let hi = remaining.min(cap);
    for v in lo..=hi {
        prefix.push(v as u32);
        fill_lexicographic(cap, sites, remaining - v, prefix, out);
        prefix.pop();
    }
}

/// The sector `M_L^N` in canonical order.
pub fn enumerate_sector(params: &SpinParams, particles: usize) -> Result<Vec<Occupation>> {
    enumerate_occupations(params.two_j(), params.sites(), particles)
}

/// Canonically ordered basis of one particle-number sector with index lookup
/// in both directions.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    two_j: u32,
    sites: usize,
    particles: usize,
    states: Vec<Occupation>,
}

impl SectorBasis {
    pub fn new(two_j: u32, sites: usize, particles: usize) -> Result<Self> {
        let states = enumerate_occupations(two_j, sites, particles)?;
        Ok(Self {
            two_j,
            sites,
            particles,
            states,
        })
    }

    pub fn for_params(params: &SpinParams, particles: usize) -> Result<Self> {
        Self::new(params.two_j(), params.sites(), particles)
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &Occupation {
        &self.states[index]
    }

    pub fn index_of(&self, m: &Occupation) -> Option<usize> {
        self.index_of_values(m.values())
    }

    pub fn index_of_values(&self, values: &[u32]) -> Option<usize> {
        self.states
            .binary_search_by(|s| s.values().cmp(values))
            .ok()
    }

    pub fn tuples(&self) -> Vec<ConfigTuple> {
        self.states.iter().map(occupation_to_tuple).collect()
    }
}

/// All sectors `N = 0..=2J*L` of a chain, concatenated in order of `N`.
///
/// This is the basis of `l^2(S_L)`; its dimension is `(2J+1)^L`.
#[derive(Clone, Debug)]
pub struct ChainBasis {
    two_j: u32,
    sites: usize,
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
}

impl ChainBasis {
    pub fn new(two_j: u32, sites: usize) -> Result<Self> {
        let max = two_j as usize * sites;
        let sectors = (0..=max)
            .map(|n| SectorBasis::new(two_j, sites, n))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(sectors.len() + 1);
        let mut acc = 0;
        for s in &sectors {
            offsets.push(acc);
            acc += s.len();
        }
        offsets.push(acc);
        Ok(Self {
            two_j,
            sites,
            sectors,
            offsets,
        })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn sectors(&self) -> &[SectorBasis] {
        &self.sectors
    }

    pub fn sector(&self, particles: usize) -> &SectorBasis {
        &self.sectors[particles]
    }

    pub fn offset(&self, particles: usize) -> usize {
        self.offsets[particles]
    }

    pub fn global_index(&self, m: &Occupation) -> Option<usize> {
        let n = m.particle_number();
        if m.sites() != self.sites || n >= self.sectors.len() {
            return None;
        }
        self.sectors[n].index_of(m).map(|i| self.offsets[n] + i)
    }

    /// Inverse of [`ChainBasis::global_index`].
    pub fn state(&self, global: usize) -> &Occupation {
        let n = self.offsets.partition_point(|&o| o <= global) - 1;
        self.sectors[n].state(global - self.offsets[n])
    }
}

/// `X_m`: the multiset listing site `j` exactly `m(j)` times.
pub fn occupation_to_tuple(m: &Occupation) -> ConfigTuple {
    let positions = m
        .values()
        .iter()
        .enumerate()
        .flat_map(|(j, &count)| std::iter::repeat_n(j + 1, count as usize))
        .collect();
    ConfigTuple {
        positions,
        two_j: m.two_j(),
    }
}

/// `m_X(j) = |{k : x_k = j}|`.
pub fn tuple_to_occupation(x: &ConfigTuple, sites: usize) -> Result<Occupation> {
    if sites == 0 {
        return domain("need at least one site");
    }
    let mut values = vec![0u32; sites];
    for &p in x.positions() {
        if p == 0 || p > sites {
            return domain(format!("position {p} outside 1..={sites}"));
        }
        values[p - 1] += 1;
    }
    Occupation::new(x.two_j(), values)
}

fn check_compatible(m: &Occupation, n: &Occupation) -> Result<()> {
    if m.sites() != n.sites() || m.two_j() != n.two_j() {
        return domain(format!(
            "configurations live on different spaces: (L={}, 2J={}) vs (L={}, 2J={})",
            m.sites(),
            m.two_j(),
            n.sites(),
            n.two_j()
        ));
    }
    Ok(())
}

/// True iff `n` arises from `m` by moving one particle to a neighbouring site.
pub fn adjacent(m: &Occupation, n: &Occupation) -> Result<bool> {
    check_compatible(m, n)?;
    let diffs: Vec<(usize, i64)> = m
        .values()
        .iter()
        .zip(n.values())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(j, (&a, &b))| (j, a as i64 - b as i64))
        .collect();
    Ok(match diffs.as_slice() {
        [(j0, d0), (j1, d1)] => *j1 == j0 + 1 && d0.abs() == 1 && d0 + d1 == 0,
        _ => false,
    })
}

/// Hopping amplitude `w(m, n)` between adjacent configurations.
pub fn hop_weight(m: &Occupation, n: &Occupation) -> Result<f64> {
    if !adjacent(m, n)? {
        return domain(format!("{m} and {n} are not adjacent"));
    }
    let half = m.two_j() as f64 / 2.0;
    Ok(m.values()
        .iter()
        .zip(n.values())
        .filter(|(a, b)| a != b)
        .map(|(&a, &b)| {
            let (a, b) = (a as f64, b as f64);
            (half * (a + b + 1.0) - a * b).sqrt()
        })
        .product())
}

/// All configurations adjacent to `m`, each paired with its hop weight.
pub fn hop_neighbors(m: &Occupation) -> Vec<(Occupation, f64)> {
    let cap = m.two_j();
    let half = cap as f64 / 2.0;
    let factor = |a: u32, b: u32| {
        let (a, b) = (a as f64, b as f64);
        (half * (a + b + 1.0) - a * b).sqrt()
    };
    let vals = m.values();
    let mut out = Vec::new();
    for j in 0..vals.len().saturating_sub(1) {
        let (a, b) = (vals[j], vals[j + 1]);
        if a > 0 && b < cap {
            let mut next = vals.to_vec();
            next[j] -= 1;
            next[j + 1] += 1;
            let w = factor(a, a - 1) * factor(b, b + 1);
            out.push((Occupation::from_raw(cap, next), w));
        }
        if b > 0 && a < cap {
            let mut next = vals.to_vec();
            next[j] += 1;
            next[j + 1] -= 1;
            let w = factor(a, a + 1) * factor(b, b - 1);
            out.push((Occupation::from_raw(cap, next), w));
        }
    }
    out
}

/// `V(m) = sum_j v(m(j), m(j+1)) + J (m(1) + m(L))` with
/// `v(a, b) = J(a + b) - ab`.
pub fn potential(m: &Occupation) -> HalfInteger {
    let t = m.two_j() as i64;
    let v = m.values();
    let bulk: i64 = v
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0] as i64, w[1] as i64);
            t * (a + b) - 2 * a * b
        })
        .sum();
    let boundary = t * (v[0] as i64 + v[v.len() - 1] as i64);
    HalfInteger::from_doubled(bulk + boundary)
}

/// `V(m) = 2JN - sum_j m(j) m(j+1)`, algebraically identical to [`potential`].
pub fn potential_simplified(m: &Occupation) -> HalfInteger {
    let t = m.two_j() as i64;
    let n = m.particle_number() as i64;
    let cross: i64 = m
        .values()
        .windows(2)
        .map(|w| w[0] as i64 * w[1] as i64)
        .sum();
    HalfInteger::from_doubled(2 * (t * n - cross))
}

/// `d^N(X, Y) = sum_i |x_i - y_i|`.
pub fn graph_distance(x: &ConfigTuple, y: &ConfigTuple) -> Result<u64> {
    if x.len() != y.len() || x.two_j() != y.two_j() {
        return domain(format!(
            "distance needs equal particle numbers and spin, got {} and {}",
            x.len(),
            y.len()
        ));
    }
    Ok(x.positions()
        .iter()
        .zip(y.positions())
        .map(|(&a, &b)| a.abs_diff(b) as u64)
        .sum())
}

/// Breadth-first hop distances from `source` to every state of the sector.
pub fn bfs_distances(basis: &SectorBasis, source: usize) -> Vec<Option<u64>> {
    let mut dist = vec![None; basis.len()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(i) = queue.pop_front() {
        let d = dist[i].unwrap();
        for (next, _) in hop_neighbors(basis.state(i)) {
            let k = basis
                .index_of(&next)
                .expect("hop stays inside the sector");
            if dist[k].is_none() {
                dist[k] = Some(d + 1);
                queue.push_back(k);
            }
        }
    }
    dist
}

/// Shortest path length in the configuration graph, by explicit search.
pub fn graph_distance_bfs(x: &ConfigTuple, y: &ConfigTuple, params: &SpinParams) -> Result<u64> {
    if x.len() != y.len() {
        return domain("tuples belong to different sectors");
    }
    let basis = SectorBasis::for_params(params, x.len())?;
    let mx = tuple_to_occupation(x, params.sites())?;
    let my = tuple_to_occupation(y, params.sites())?;
    let (src, dst) = match (basis.index_of(&mx), basis.index_of(&my)) {
        (Some(s), Some(d)) => (s, d),
        _ => return domain("tuple not in the sector"),
    };
    bfs_distances(&basis, src)[dst].ok_or_else(|| {
        Error::Structural(format!("{mx} cannot reach {my} inside its sector"))
    })
}

fn check_minimizer_range(two_j: u32, sites: usize, particles: usize) -> Result<()> {
    let t = two_j as usize;
    if particles < 2 * t {
        return domain(format!(
            "minimizers are classified for N >= 4J = {}, got {particles}",
            2 * t
        ));
    }
    if particles > t * sites {
        return domain(format!(
            "{particles} particles do not fit on {sites} sites"
        ));
    }
    Ok(())
}

fn translates(two_j: u32, sites: usize, shapes: BTreeSet<Vec<u32>>) -> Vec<Occupation> {
    let mut out = BTreeSet::new();
    for mut shape in shapes {
        while shape.first() == Some(&0) {
            shape.remove(0);
        }
        while shape.last() == Some(&0) {
            shape.pop();
        }
        if shape.len() > sites {
            continue;
        }
        for offset in 0..=sites - shape.len() {
            let mut values = vec![0; sites];
            values[offset..offset + shape.len()].copy_from_slice(&shape);
            out.insert(values);
        }
    }
    out.into_iter()
        .map(|v| Occupation::from_raw(two_j, v))
        .collect()
}

/// Every minimizer of `V` in `M_L^N` for `N >= 4J`, ascending.
///
/// The minimizers are exactly the translates of `(a, 2J, ..., 2J, b)` with at
/// least one packed column, `0 <= a, b <= 2J` and `a + b` absorbing the
/// remaining particles; all of them have `V = 4J^2`.
pub fn minimizer_set(params: &SpinParams, particles: usize) -> Result<Vec<Occupation>> {
    minimizers_on(params.two_j(), params.sites(), particles)
}

/// [`minimizer_set`] on an arbitrary number of sites.
pub fn minimizers_on(two_j: u32, sites: usize, particles: usize) -> Result<Vec<Occupation>> {
    check_minimizer_range(two_j, sites, particles)?;
    let f = two_j as usize;
    let mut shapes = BTreeSet::new();
    for packed in 1..=particles / f {
        let rest = particles - packed * f;
        if rest > 2 * f {
            continue;
        }
        for a in rest.saturating_sub(f)..=rest.min(f) {
            let mut shape = vec![a as u32];
            shape.extend(std::iter::repeat_n(two_j, packed));
            shape.push((rest - a) as u32);
            shapes.insert(shape);
        }
    }
    Ok(translates(two_j, sites, shapes))
}

/// Translates of the two closed-form families `(j, 2J, ..., 2J, 2J - j)` for
/// `N = 2Jr` (`j < 2J`) and `(j, 2J, ..., 2J, N mod 2J - j)` with
/// `floor(N/2J)` packed columns otherwise (`j < N mod 2J`).
///
/// This is a strict subset of [`minimizer_set`] in general: it misses e.g.
/// the mirror image `(1,2,2)` for `2J = 2, N = 5` and `(2,3,2)` for
/// `2J = 3, N = 7`.
pub fn canonical_form_minimizers(
    two_j: u32,
    sites: usize,
    particles: usize,
) -> Result<Vec<Occupation>> {
    check_minimizer_range(two_j, sites, particles)?;
    let f = two_j as usize;
    let (q, s) = (particles / f, particles % f);
    let mut shapes = BTreeSet::new();
    if s == 0 {
        for j in 0..f {
            let mut shape = vec![j as u32];
            shape.extend(std::iter::repeat_n(two_j, q - 1));
            shape.push((f - j) as u32);
            shapes.insert(shape);
        }
    } else {
        for j in 0..s {
            let mut shape = vec![j as u32];
            shape.extend(std::iter::repeat_n(two_j, q));
            shape.push((s - j) as u32);
            shapes.insert(shape);
        }
    }
    Ok(translates(two_j, sites, shapes))
}

/// `S_{L,K}^N = { X : V(X) <= K }` in canonical order.
pub fn low_energy_set(params: &SpinParams, particles: usize, budget: u32) -> Result<Vec<ConfigTuple>> {
    low_energy_on(params.two_j(), params.sites(), particles, budget)
}

/// [`low_energy_set`] on an arbitrary number of sites.
pub fn low_energy_on(
    two_j: u32,
    sites: usize,
    particles: usize,
    budget: u32,
) -> Result<Vec<ConfigTuple>> {
    let limit = HalfInteger::from_integer(budget as i64);
    Ok(enumerate_occupations(two_j, sites, particles)?
        .iter()
        .filter(|m| potential(m) <= limit)
        .map(occupation_to_tuple)
        .collect())
}

/// `min_{Y in set} d(X, Y)`.
pub fn distance_to_set(x: &ConfigTuple, set: &[ConfigTuple]) -> Result<u64> {
    let mut best: Option<u64> = None;
    for y in set {
        let d = graph_distance(x, y)?;
        best = Some(best.map_or(d, |b| b.min(d)));
        if d == 0 {
            break;
        }
    }
    best.ok_or_else(|| Error::Domain("distance to an empty set".into()))
}

/// `B(m)`: edges not joining two empty or two packed sites, counting the two
/// virtual boundary edges when the end sites are occupied.
pub fn block_count(m: &Occupation) -> u32 {
    let full = 2 * m.two_j();
    let v = m.values();
    let interior = v
        .windows(2)
        .filter(|w| {
            let s = w[0] + w[1];
            s != 0 && s != full
        })
        .count() as u32;
    interior + u32::from(v[0] != 0) + u32::from(v[v.len() - 1] != 0)
}

/// Left-to-right segmentation into building blocks: maximal runs of at least
/// two packed sites become rectangles, every other occupied site a column.
pub fn decompose_blocks(m: &Occupation) -> Vec<BuildingBlock> {
    let t = m.two_j();
    let v = m.values();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < v.len() {
        if v[i] == 0 {
            i += 1;
            continue;
        }
        let mut end = i;
        if v[i] == t {
            while end + 1 < v.len() && v[end + 1] == t {
                end += 1;
            }
        }
        if end > i {
            blocks.push(BuildingBlock {
                kind: BlockKind::Rectangle,
                start: i + 1,
                end: end + 1,
            });
        } else {
            blocks.push(BuildingBlock {
                kind: BlockKind::Column { height: v[i] },
                start: i + 1,
                end: i + 1,
            });
        }
        i = end + 1;
    }
    blocks
}

/// Sum of blocks back into an occupation function.
pub fn assemble_blocks(blocks: &[BuildingBlock], two_j: u32, sites: usize) -> Result<Occupation> {
    let mut values = vec![0u32; sites];
    for b in blocks {
        let piece = b.to_occupation(two_j, sites)?;
        for (acc, &p) in values.iter_mut().zip(piece.values()) {
            if *acc > 0 && p > 0 {
                return domain("building blocks overlap");
            }
            *acc += p;
        }
    }
    Occupation::new(two_j, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occ(two_j: u32, v: &[u32]) -> Occupation {
        Occupation::new(two_j, v.to_vec()).unwrap()
    }

    // Configurations from the two-row hopping illustration (J = 2, L = 8).
    fn figure_pair() -> (Occupation, Occupation) {
        (
            occ(4, &[1, 4, 1, 0, 1, 0, 2, 2]),
            occ(4, &[1, 3, 2, 0, 1, 0, 2, 2]),
        )
    }

    fn packed_example() -> Occupation {
        occ(9, &[4, 0, 2, 9, 9, 9, 4, 0])
    }

    #[test]
    fn params_validation() {
        assert!(SpinParams::new(1, 4, 1.5).is_ok());
        assert!(SpinParams::new(1, 4, 1.0).is_err());
        assert!(SpinParams::new(0, 4, 3.0).is_err());
        assert!(SpinParams::new(2, 1, 3.0).is_err());
    }

    #[test]
    fn small_sectors() {
        let p = SpinParams::new(1, 2, 2.0).unwrap();
        let s = enumerate_sector(&p, 1).unwrap();
        assert_eq!(s, vec![occ(1, &[0, 1]), occ(1, &[1, 0])]);

        let p = SpinParams::new(2, 2, 3.0).unwrap();
        let s = enumerate_sector(&p, 2).unwrap();
        assert_eq!(s, vec![occ(2, &[0, 2]), occ(2, &[1, 1]), occ(2, &[2, 0])]);

        let p = SpinParams::new(1, 4, 2.0).unwrap();
        assert_eq!(enumerate_sector(&p, 2).unwrap().len(), 6);
        assert_eq!(enumerate_sector(&p, 0).unwrap(), vec![occ(1, &[0; 4])]);
        assert!(enumerate_sector(&p, 5).is_err());
    }

    #[test]
    fn sector_matches_filtered_product() {
        // brute force over all (2J+1)^L value sequences
        let (t, l) = (2u32, 4usize);
        for n in 0..=8 {
            let mut brute = Vec::new();
            for code in 0..3usize.pow(l as u32) {
                let mut c = code;
                let mut v = vec![0u32; l];
                for slot in v.iter_mut().rev() {
                    *slot = (c % 3) as u32;
                    c /= 3;
                }
                if v.iter().sum::<u32>() as usize == n {
                    brute.push(v);
                }
            }
            let got: Vec<Vec<u32>> = enumerate_occupations(t, l, n)
                .unwrap()
                .into_iter()
                .map(|m| m.values().to_vec())
                .collect();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn figure_tuple() {
        let (_, n) = figure_pair();
        assert_eq!(
            n.to_tuple().positions(),
            &[1, 2, 2, 2, 3, 3, 5, 7, 7, 8, 8]
        );
        assert!(occ(2, &[0, 0, 0]).to_tuple().is_empty());
    }

    #[test]
    fn tuple_validation() {
        assert!(ConfigTuple::new(1, vec![1, 1]).is_err());
        assert!(ConfigTuple::new(2, vec![1, 1]).is_ok());
        assert!(ConfigTuple::new(2, vec![1, 1, 1]).is_err());
        assert!(ConfigTuple::new(2, vec![2, 1]).is_err());
        assert!(ConfigTuple::new(2, vec![0, 1]).is_err());
        let x = ConfigTuple::new(1, vec![1, 5]).unwrap();
        assert!(tuple_to_occupation(&x, 4).is_err());
    }

    #[test]
    fn adjacency_cases() {
        let (m, n) = figure_pair();
        assert!(adjacent(&m, &n).unwrap());
        assert!(!adjacent(&m, &m).unwrap());
        assert!(!adjacent(&occ(1, &[1, 0, 0, 1]), &occ(1, &[0, 1, 1, 0])).unwrap());
        // same pattern on non-neighbouring sites
        assert!(!adjacent(&occ(1, &[1, 0, 0]), &occ(1, &[0, 0, 1])).unwrap());
        assert!(adjacent(&occ(1, &[1, 0]), &occ(1, &[1, 0, 0])).is_err());
        assert!(adjacent(&occ(1, &[1, 0]), &occ(2, &[1, 0])).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(hop_weight(&occ(1, &[1, 0]), &occ(1, &[0, 1])).unwrap(), 1.0);
        let w = hop_weight(&occ(2, &[2, 0]), &occ(2, &[1, 1])).unwrap();
        assert!((w - 2.0).abs() < 1e-15);
        let (m, n) = figure_pair();
        assert_eq!(hop_weight(&m, &n).unwrap(), hop_weight(&n, &m).unwrap());
        assert!(hop_weight(&m, &m).is_err());
    }

    #[test]
    fn neighbors_agree_with_weight_formula() {
        for m in enumerate_occupations(3, 4, 6).unwrap() {
            for (n, w) in hop_neighbors(&m) {
                assert!(adjacent(&m, &n).unwrap());
                assert!((hop_weight(&m, &n).unwrap() - w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn potential_values() {
        assert_eq!(potential(&occ(3, &[0; 5])), HalfInteger::ZERO);
        for t in 1..=4u32 {
            let full = Occupation::full(t, 5).unwrap();
            assert_eq!(potential(&full).doubled(), 2 * (t as i64 * t as i64));
            assert_eq!(potential(&full).value(), (t * t) as f64);
        }
        let m = packed_example();
        assert_eq!(m.particle_number(), 37);
        assert_eq!(potential(&m).doubled(), 234);
        assert_eq!(potential_simplified(&m).doubled(), 234);
        assert_eq!(potential_simplified(&occ(2, &[0; 3])), HalfInteger::ZERO);
        assert_eq!(potential(&m).to_string(), "117");
        assert_eq!(HalfInteger::from_doubled(3).to_string(), "3/2");
    }

    #[test]
    fn distances() {
        let (m, n) = figure_pair();
        let (x, y) = (m.to_tuple(), n.to_tuple());
        assert_eq!(graph_distance(&x, &x).unwrap(), 0);
        assert_eq!(graph_distance(&x, &y).unwrap(), 1);
        let p = SpinParams::new(4, 8, 5.0).unwrap();
        assert_eq!(graph_distance_bfs(&x, &y, &p).unwrap(), 1);
        assert_eq!(graph_distance_bfs(&x, &x, &p).unwrap(), 0);
        let short = ConfigTuple::new(4, vec![1]).unwrap();
        assert!(graph_distance(&x, &short).is_err());
    }

    #[test]
    fn minimizers_small_case() {
        let p = SpinParams::new(2, 4, 3.0).unwrap();
        let got = minimizer_set(&p, 4).unwrap();
        let mut want = vec![
            occ(2, &[2, 2, 0, 0]),
            occ(2, &[0, 2, 2, 0]),
            occ(2, &[0, 0, 2, 2]),
            occ(2, &[1, 2, 1, 0]),
            occ(2, &[0, 1, 2, 1]),
        ];
        want.sort();
        assert_eq!(got, want);
        for m in &got {
            assert_eq!(potential(m).value(), 4.0);
        }
        assert!(minimizer_set(&p, 3).is_err());
        assert_eq!(minimizer_set(&p, 8).unwrap(), vec![occ(2, &[2; 4])]);
    }

    #[test]
    fn canonical_forms_are_minimizers_but_incomplete() {
        let all = minimizers_on(3, 4, 7).unwrap();
        let forms = canonical_form_minimizers(3, 4, 7).unwrap();
        assert!(forms.iter().all(|m| all.contains(m)));
        assert!(all.contains(&occ(3, &[2, 3, 2, 0])));
        assert!(!forms.contains(&occ(3, &[2, 3, 2, 0])));
    }

    #[test]
    fn low_energy_pairs() {
        let p = SpinParams::new(1, 4, 2.0).unwrap();
        let set = low_energy_set(&p, 2, 1).unwrap();
        let pos: Vec<Vec<usize>> = set.iter().map(|x| x.positions().to_vec()).collect();
        assert_eq!(pos, vec![vec![3, 4], vec![2, 3], vec![1, 2]]);
        let x = ConfigTuple::new(1, vec![1, 3]).unwrap();
        assert_eq!(distance_to_set(&x, &set).unwrap(), 1);
        assert!(distance_to_set(&x, &[]).is_err());
        let p = SpinParams::new(2, 4, 3.0).unwrap();
        assert!(low_energy_set(&p, 4, 3).unwrap().is_empty());
    }

    #[test]
    fn blocks_of_packed_example() {
        let m = packed_example();
        assert_eq!(block_count(&m), 6);
        let blocks = decompose_blocks(&m);
        assert_eq!(
            blocks,
            vec![
                BuildingBlock::column(1, 4, 9).unwrap(),
                BuildingBlock::column(3, 2, 9).unwrap(),
                BuildingBlock::rectangle(4, 6).unwrap(),
                BuildingBlock::column(7, 4, 9).unwrap(),
            ]
        );
        assert_eq!(assemble_blocks(&blocks, 9, 8).unwrap(), m);
        assert_eq!(block_count(&occ(2, &[0; 4])), 0);
        assert!(decompose_blocks(&occ(2, &[0; 4])).is_empty());
        assert_eq!(block_count(&Occupation::full(2, 4).unwrap()), 2);
    }

    #[test]
    fn block_recognition() {
        assert!(BuildingBlock::from_occupation(&occ(2, &[0, 2, 2, 0])).is_ok());
        assert!(BuildingBlock::from_occupation(&occ(2, &[0, 1, 0])).is_ok());
        assert!(BuildingBlock::from_occupation(&occ(2, &[1, 1, 0])).is_err());
        assert!(BuildingBlock::from_occupation(&occ(2, &[2, 0, 2])).is_err());
        assert!(BuildingBlock::from_occupation(&occ(2, &[0, 0])).is_err());
    }

    #[test]
    fn chain_basis_indexing() {
        let chain = ChainBasis::new(2, 3).unwrap();
        assert_eq!(chain.dim(), 27);
        for g in 0..chain.dim() {
            assert_eq!(chain.global_index(chain.state(g)), Some(g));
        }
    }
}

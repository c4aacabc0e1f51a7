//! Analytic constants and right-hand sides of the decay and entropy
//! estimates, plus exhaustive finite sums to compare them with.
//!
//! Several right-hand sides overflow `f64` long before they become
//! interesting (`L_gamma` raised to powers in the hundreds), so they are
//! computed as natural logarithms; the `_ln` suffix marks those.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config_space::{
    block_count, distance_to_set, enumerate_occupations, graph_distance, low_energy_on,
    occupation_to_tuple, potential, BuildingBlock, ConfigTuple, Occupation, SpinParams,
};
use crate::entanglement::{Bipartition, GlobalState};
use crate::error::{domain, Error, Result};

/// Tolerance used by [`script_l`] when none is given.
pub const DEFAULT_SCRIPT_L_TOL: f64 = 1e-12;

/// Largest configuration count enumerated by the exact sums.
pub const EXACT_SUM_CAP: usize = 2_000_000;

const PASS_TOL: f64 = -1e-9;
const MAX_PRODUCT_TERMS: usize = 50_000_000;

/// One tested inequality `lhs <= rhs`.
///
/// With `log_scale` set, `lhs` and `rhs` are natural logarithms of the
/// compared quantities and `margin` is their difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub seed: Option<u64>,
    pub log_scale: bool,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, params: BTreeMap<String, f64>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            params,
            lhs,
            rhs,
            margin,
            pass: margin >= PASS_TOL,
            seed: None,
            log_scale: false,
        }
    }

    /// Compares `exp(ln_lhs) <= exp(ln_rhs)` without leaving log space.
    pub fn from_logs(
        name: impl Into<String>,
        params: BTreeMap<String, f64>,
        ln_lhs: f64,
        ln_rhs: f64,
    ) -> Self {
        Self {
            log_scale: true,
            ..Self::new(name, params, ln_lhs, ln_rhs)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Parameters shared by the entropy estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub two_j: u32,
    pub anisotropy: f64,
    /// Energy budget `K`.
    pub budget: u32,
    pub delta: f64,
    pub alpha: f64,
    pub ell: usize,
    pub sites: usize,
}

impl BoundParams {
    pub fn new(
        two_j: u32,
        anisotropy: f64,
        budget: u32,
        delta: f64,
        alpha: f64,
        ell: usize,
        sites: usize,
    ) -> Result<Self> {
        let p = Self {
            two_j,
            anisotropy,
            budget,
            delta,
            alpha,
            ell,
            sites,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_j == 0 {
            return domain("2J must be at least 1");
        }
        if !(self.anisotropy > self.two_j as f64 && self.anisotropy.is_finite()) {
            return domain(format!(
                "anisotropy must exceed 2J = {}, got {}",
                self.two_j, self.anisotropy
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return domain(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if self.ell == 0 {
            return domain("ell must be positive");
        }
        Ok(())
    }

    pub fn spin(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// `floor(K/J) = floor(2K / 2J)`.
    pub fn k_tilde(&self) -> u32 {
        2 * self.budget / self.two_j
    }

    pub fn mu(&self) -> f64 {
        mu_k(self.two_j, self.anisotropy, self.budget, self.delta)
    }

    /// `2 alpha mu_K`, the rate at which the trace sums decay.
    pub fn gamma(&self) -> f64 {
        2.0 * self.alpha * self.mu()
    }

    pub fn c_prime(&self) -> f64 {
        ct_prefactor_uniform(self.two_j, self.budget, self.delta)
    }

    /// `K >= 4J^2 = (2J)^2`.
    pub fn check_budget(&self) -> Result<()> {
        let min = self.two_j * self.two_j;
        if self.budget < min {
            return domain(format!("K = {} is below 4J^2 = {min}", self.budget));
        }
        Ok(())
    }

    /// `ell >= 4J`.
    pub fn check_cut(&self) -> Result<()> {
        if self.ell < 2 * self.two_j as usize {
            return domain(format!("ell = {} is below 4J = {}", self.ell, 2 * self.two_j));
        }
        Ok(())
    }

    pub fn snapshot(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("two_j".to_string(), self.two_j as f64),
            ("delta_anisotropy".to_string(), self.anisotropy),
            ("k".to_string(), self.budget as f64),
            ("delta".to_string(), self.delta),
            ("alpha".to_string(), self.alpha),
            ("ell".to_string(), self.ell as f64),
            ("length".to_string(), self.sites as f64),
        ])
    }
}

/// `mu_K = log(1 + delta (Delta - 2J) / (16 J (K + 1)))`, evaluated for any
/// `delta > 0`.
pub fn mu_k(two_j: u32, anisotropy: f64, budget: u32, delta: f64) -> f64 {
    let j = two_j as f64 / 2.0;
    (delta * (anisotropy - two_j as f64) / (16.0 * j * (budget as f64 + 1.0))).ln_1p()
}

/// `mu_K` for a chain, with `delta` restricted to `(0,1)`.
pub fn ct_decay_rate(params: &SpinParams, budget: u32, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0,1), got {delta}"));
    }
    Ok(mu_k(params.two_j(), params.anisotropy(), budget, delta))
}

/// `C_{N,K} = max{1, 8K(K+1) / (V_{N,0} delta^2)}`.
pub fn ct_prefactor(budget: u32, delta: f64, min_potential: f64) -> Result<f64> {
    if !(min_potential > 0.0) {
        return domain(format!(
            "the minimal potential must be positive, got {min_potential}"
        ));
    }
    let k = budget as f64;
    Ok((8.0 * k * (k + 1.0) / (min_potential * delta * delta)).max(1.0))
}

/// `C'_K = max{1, 2K(K+1) / (J^2 delta^2)}`, the value of `C_{N,K}` once
/// `V_{N,0} = 4J^2`.
pub fn ct_prefactor_uniform(two_j: u32, budget: u32, delta: f64) -> f64 {
    let j = two_j as f64 / 2.0;
    let k = budget as f64;
    (2.0 * k * (k + 1.0) / (j * j * delta * delta)).max(1.0)
}

/// `V_{N,0}`, the least potential among `N`-particle configurations, by
/// enumeration.
pub fn min_potential_on(two_j: u32, sites: usize, particles: usize) -> Result<f64> {
    enumerate_occupations(two_j, sites, particles)?
        .iter()
        .map(potential)
        .min()
        .map(|v| v.value())
        .ok_or_else(|| Error::Domain("empty sector".into()))
}

/// `C_{N,K}` on an actual chain.
pub fn c_nk(p: &BoundParams, particles: usize) -> Result<f64> {
    ct_prefactor(p.budget, p.delta, min_potential_on(p.two_j, p.sites, particles)?)
}

/// `eta = log(1 + Delta kappa / (4J))`.
pub fn resolvent_decay_rate(params: &SpinParams, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return domain(format!("kappa must be positive, got {kappa}"));
    }
    Ok((params.anisotropy() * kappa / (2.0 * params.two_j() as f64)).ln_1p())
}

/// `log(sum_i exp(x_i))`, stable for large arguments.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `log L_gamma`, an upper bound certified by a geometric tail estimate.
///
/// `L_gamma = (1 - e^{-gamma})^{-1} (prod_{k>=1} (1 - e^{-k gamma})^{-1})^2`.
/// The product is cut at the first `k*` with `e^{-k* gamma} < tol (1 - e^{-gamma})`
/// and the remaining factors are bounded through
/// `-log(1-x) <= x/(1-x)`.
pub fn script_l_ln(gamma: f64, tol: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain(format!("gamma must be positive and finite, got {gamma}"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return domain(format!("tolerance must lie in (0,1), got {tol}"));
    }
    let one_minus_q = -(-gamma).exp_m1();
    let stop = tol * one_minus_q;
    let mut partial = 0.0;
    let mut k = 0usize;
    loop {
        k += 1;
        if k > MAX_PRODUCT_TERMS {
            return Err(Error::Resource(format!(
                "gamma = {gamma} needs more than {MAX_PRODUCT_TERMS} product terms"
            )));
        }
        let qk = (-(k as f64) * gamma).exp();
        partial -= (-(k as f64) * gamma).exp_m1().neg_ln();
        if qk < stop {
            break;
        }
    }
    let q_next = (-((k + 1) as f64) * gamma).exp();
    let tail = q_next / (one_minus_q * -(-((k + 1) as f64) * gamma).exp_m1());
    Ok(-one_minus_q.ln() + 2.0 * (partial + tail))
}

trait NegLn {
    fn neg_ln(self) -> f64;
}

impl NegLn for f64 {
    /// `ln(-x)` for `x = expm1(..) < 0`.
    fn neg_ln(self) -> f64 {
        (-self).ln()
    }
}

/// `L_gamma` itself; may be `inf` for small `gamma`, see [`script_l_ln`].
pub fn script_l(gamma: f64, tol: f64) -> Result<f64> {
    script_l_ln(gamma, tol).map(f64::exp)
}

fn for_each_increasing(lo: i64, hi: i64, n: usize, f: &mut impl FnMut(&[i64])) {
    fn rec(lo: i64, hi: i64, n: usize, buf: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
        if buf.len() == n {
            f(buf);
            return;
        }
        let remaining = (n - buf.len()) as i64;
        let start = buf.last().map_or(lo, |&x| x + 1);
        for x in start..=hi - remaining + 1 {
            buf.push(x);
            rec(lo, hi, n, buf, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(n);
    rec(lo, hi, n, &mut buf, f);
}

/// `sum_X e^{-gamma d(X, C)}` over strictly increasing `n`-particle
/// configurations `X` inside `[-W, n - 1 + W]`, where `C = (0, 1, ..., n-1)`.
pub fn window_sum_1d(n: usize, gamma: f64, window: i64) -> Result<f64> {
    if window < 0 {
        return domain(format!("window radius must be >= 0, got {window}"));
    }
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    let mut total = 0.0;
    for_each_increasing(-window, n as i64 - 1 + window, n, &mut |x| {
        let d: i64 = x.iter().enumerate().map(|(i, &xi)| (xi - i as i64).abs()).sum();
        total += (-gamma * d as f64).exp();
    });
    Ok(total)
}

/// `sum_{X in S_L^N} e^{-gamma d(X, C)}` for a building block `C` placed on
/// its chain, `N = |C|`.
pub fn block_sum(block: &Occupation, gamma: f64) -> Result<f64> {
    BuildingBlock::from_occupation(block)?;
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    let c = occupation_to_tuple(block);
    let mut total = 0.0;
    for m in enumerate_occupations(block.two_j(), block.sites(), block.particle_number())? {
        total += (-gamma * graph_distance(&occupation_to_tuple(&m), &c)? as f64).exp();
    }
    Ok(total)
}

/// Number of `j`-particle configurations on `ell` sites with `B(m) <= K~`.
pub fn count_block_configs(ell: usize, k_tilde: u32, particles: usize, two_j: u32) -> Result<u64> {
    if k_tilde < 2 {
        return domain(format!("K~ must be at least 2, got {k_tilde}"));
    }
    Ok(enumerate_occupations(two_j, ell, particles)?
        .iter()
        .filter(|m| block_count(m) <= k_tilde)
        .count() as u64)
}

/// `C(n, k)` as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The two successive upper bounds on [`count_block_configs`]:
/// `C(j + K~ - 2, K~ - 2) ell^{K~-1}` and `(4Je)^{K~-2} ell^{2K~-3}`.
pub fn block_count_bounds(ell: usize, k_tilde: u32, particles: usize, two_j: u32) -> Result<(f64, f64)> {
    if k_tilde < 2 {
        return domain(format!("K~ must be at least 2, got {k_tilde}"));
    }
    let kt = k_tilde as i32;
    let l = ell as f64;
    let binom = binomial((particles as u64) + k_tilde as u64 - 2, k_tilde as u64 - 2) * l.powi(kt - 1);
    let closed = (2.0 * two_j as f64 * std::f64::consts::E).powi(kt - 2) * l.powi(2 * kt - 3);
    Ok((binom, closed))
}

/// `sum_{X in S^j_ell} e^{-gamma d(X, S^j_{ell,K})}`, exhaustively.
pub fn exact_series_sum(two_j: u32, ell: usize, particles: usize, budget: u32, gamma: f64) -> Result<f64> {
    let all = enumerate_occupations(two_j, ell, particles)?;
    if all.len() > EXACT_SUM_CAP {
        return Err(Error::Resource(format!(
            "{} configurations exceed the exact-sum cap of {EXACT_SUM_CAP}",
            all.len()
        )));
    }
    let low = low_energy_on(two_j, ell, particles, budget)?;
    if low.is_empty() {
        return domain(format!("no {particles}-particle configuration on {ell} sites has V <= {budget}"));
    }
    let mut total = 0.0;
    for m in &all {
        total += (-gamma * distance_to_set(&occupation_to_tuple(m), &low)? as f64).exp();
    }
    Ok(total)
}

/// `log[(4Je)^{K~-2} L_gamma^{2J(K~-1)} ell^{2K~-3}]`.
pub fn lemma_series_rhs_ln(p: &BoundParams, gamma: f64) -> Result<f64> {
    p.check_budget()?;
    let kt = p.k_tilde() as f64;
    let four_j = 2.0 * p.two_j as f64;
    Ok((kt - 2.0) * (four_j * std::f64::consts::E).ln()
        + p.two_j as f64 * (kt - 1.0) * script_l_ln(gamma, DEFAULT_SCRIPT_L_TOL)?
        + (2.0 * kt - 3.0) * (p.ell as f64).ln())
}

pub fn lemma_series_rhs(p: &BoundParams, gamma: f64) -> Result<f64> {
    lemma_series_rhs_ln(p, gamma).map(f64::exp)
}

/// How the inner sums of the trace bound are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceMode {
    /// Exhaustive sums over the configurations of the left block.
    Exact,
    /// Each inner sum replaced by the closed-form series estimate.
    Lemma,
}

fn trace_head_ln(p: &BoundParams) -> [f64; 2] {
    let ln2 = std::f64::consts::LN_2;
    [ln2, ln2 + 2.0 * p.two_j as f64 * (1.0 - p.alpha) * (p.ell as f64).ln()]
}

/// `log[2 + 2 ell^{4J(1-alpha)} + 2 C'^{2 alpha} sum_{j=4J}^{2J ell} S_j]`
/// where `S_j` is the exponentially weighted distance sum at rate
/// `2 alpha mu_K`, exact or estimated according to `mode`.
pub fn trace_bound_rhs_ln(p: &BoundParams, mode: TraceMode) -> Result<f64> {
    p.validate()?;
    p.check_budget()?;
    p.check_cut()?;
    let gamma = p.gamma();
    let first = 2 * p.two_j as usize;
    let last = p.two_j as usize * p.ell;
    let prefactor_ln = std::f64::consts::LN_2 + 2.0 * p.alpha * p.c_prime().ln();
    let sum_ln = match mode {
        TraceMode::Exact => {
            let mut s = 0.0;
            for j in first..=last {
                s += exact_series_sum(p.two_j, p.ell, j, p.budget, gamma)?;
            }
            s.ln()
        }
        TraceMode::Lemma => ((last - first + 1) as f64).ln() + lemma_series_rhs_ln(p, gamma)?,
    };
    let [a, b] = trace_head_ln(p);
    Ok(log_sum_exp(&[a, b, prefactor_ln + sum_ln]))
}

pub fn trace_bound_rhs(p: &BoundParams, mode: TraceMode) -> Result<f64> {
    trace_bound_rhs_ln(p, mode).map(f64::exp)
}

/// `2 + 2 ell^{4J(1-alpha)} + 2 sum_{|X| >= 4J} ||P_{A_X} psi||^{2 alpha}`,
/// the state-dependent trace bound, from exact amplitudes.
pub fn projected_weight_rhs(bipartition: &Bipartition, psi: &GlobalState, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    let two_j = psi.two_j();
    let ell = bipartition.ell();
    if ell < 2 * two_j as usize {
        return domain(format!("ell = {ell} is below 4J = {}", 2 * two_j));
    }
    let tails = bipartition.tail_weights(psi)?;
    let left = bipartition.left();
    let start = left.offset(2 * two_j as usize);
    let sum: f64 = tails[start..].iter().map(|w| w.max(0.0).powf(alpha)).sum();
    Ok(2.0 + 2.0 * (ell as f64).powf(2.0 * two_j as f64 * (1.0 - alpha)) + 2.0 * sum)
}

/// `(1-alpha)^{-1} log(2 + 2 ell^{4J(1-alpha)}
///  + (4Je)^{K~-1} C'^{2 alpha} L_{2 alpha mu}^{2J(K~-1)} ell^{2K~-2})`.
pub fn entropy_bound_rhs(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    p.check_budget()?;
    let kt = p.k_tilde() as f64;
    let four_j = 2.0 * p.two_j as f64;
    let main = (kt - 1.0) * (four_j * std::f64::consts::E).ln()
        + 2.0 * p.alpha * p.c_prime().ln()
        + p.two_j as f64 * (kt - 1.0) * script_l_ln(p.gamma(), DEFAULT_SCRIPT_L_TOL)?
        + (2.0 * kt - 2.0) * (p.ell as f64).ln();
    let [a, b] = trace_head_ln(p);
    Ok(log_sum_exp(&[a, b, main]) / (1.0 - p.alpha))
}

/// `(rhs(2 ell) - rhs(ell)) / log 2`, whose limit is `(2K~ - 2)/(1 - alpha)`.
pub fn entropy_bound_slope(p: &BoundParams) -> Result<f64> {
    let doubled = BoundParams {
        ell: 2 * p.ell,
        ..*p
    };
    Ok((entropy_bound_rhs(&doubled)? - entropy_bound_rhs(p)?) / std::f64::consts::LN_2)
}

/// Checks `d^j(X, S^j_{ell,K}) <= d^{j+k}(X ∪ Y, S^{j+k}_{L,K})` for every
/// `X` on the first `ell` sites with `j >= 4J` and every non-empty `Y` on the
/// remaining sites.
pub fn check_distance_monotonicity(params: &SpinParams, budget: u32, ell: usize) -> Result<Vec<BoundReport>> {
    let two_j = params.two_j();
    let sites = params.sites();
    if budget < two_j * two_j {
        return domain(format!("K = {budget} is below 4J^2 = {}", two_j * two_j));
    }
    if ell < 1 || ell >= sites {
        return domain(format!("cut {ell} must lie in 1..{sites}"));
    }
    let t = two_j as usize;
    let right_sites = sites - ell;
    let mut right: Vec<(usize, Vec<u32>)> = Vec::new();
    for k in 1..=t * right_sites {
        for m in enumerate_occupations(two_j, right_sites, k)? {
            right.push((k, m.values().to_vec()));
        }
    }
    let mut full_low: BTreeMap<usize, Vec<ConfigTuple>> = BTreeMap::new();
    let mut reports = Vec::new();
    for j in 2 * t..=t * ell {
        let local_low = low_energy_on(two_j, ell, j, budget)?;
        for x in enumerate_occupations(two_j, ell, j)? {
            let lhs = distance_to_set(&occupation_to_tuple(&x), &local_low)?;
            for (k, y) in &right {
                let n = j + k;
                if let std::collections::btree_map::Entry::Vacant(e) = full_low.entry(n) {
                    e.insert(low_energy_on(two_j, sites, n, budget)?);
                }
                let mut values = x.values().to_vec();
                values.extend_from_slice(y);
                let xy = Occupation::new(two_j, values)?;
                let rhs = distance_to_set(&occupation_to_tuple(&xy), &full_low[&n])?;
                let snapshot = BTreeMap::from([
                    ("two_j".to_string(), two_j as f64),
                    ("length".to_string(), sites as f64),
                    ("ell".to_string(), ell as f64),
                    ("k".to_string(), budget as f64),
                    ("j".to_string(), j as f64),
                    ("k_right".to_string(), *k as f64),
                ]);
                reports.push(BoundReport::new(
                    format!("distance_monotonicity {x}|{}", Occupation::new(two_j, y.clone())?),
                    snapshot,
                    lhs as f64,
                    rhs as f64,
                ));
            }
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_example() {
        let mu = mu_k(1, 2.0, 1, 1.0);
        assert!((mu - (17.0f64 / 16.0).ln()).abs() < 1e-15);
        assert!(mu_k(1, 2.0, 1, 1e-12) < 1e-12);
        assert!(mu_k(1, 3.0, 1, 0.5) > mu_k(1, 2.0, 1, 0.5));
        assert!(mu_k(1, 3.0, 2, 0.5) < mu_k(1, 3.0, 1, 0.5));
    }

    #[test]
    fn prefactor_examples() {
        assert_eq!(ct_prefactor_uniform(1, 1, 0.5), 64.0);
        assert!((ct_prefactor_uniform(2, 1, 1.0 - 1e-15) - 4.0).abs() < 1e-12);
        assert_eq!(ct_prefactor_uniform(2, 0, 0.5), 1.0);
        // C_{N,K} coincides with C'_K once V_{N,0} = 4J^2
        for t in 1..=3u32 {
            let a = ct_prefactor(7, 0.3, (t * t) as f64).unwrap();
            assert!((a - ct_prefactor_uniform(t, 7, 0.3)).abs() < 1e-9 * a);
        }
        assert!(ct_prefactor(1, 0.5, 0.0).is_err());
    }

    #[test]
    fn eta_example() {
        let p = SpinParams::new(1, 4, 2.0).unwrap();
        assert!((resolvent_decay_rate(&p, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn script_l_behaviour() {
        assert!(script_l(0.0, 1e-12).is_err());
        assert!(script_l(-1.0, 1e-12).is_err());
        let big = script_l(40.0, 1e-12).unwrap();
        assert!(big >= 1.0 && big < 1.0 + 1e-15 * 100.0);
        let a = script_l(0.5, 1e-12).unwrap();
        let b = script_l(0.6, 1e-12).unwrap();
        assert!(a > b);
    }

    #[test]
    fn window_sums() {
        assert_eq!(window_sum_1d(1, 1.0, 0).unwrap(), 1.0);
        let limit = (1.0 + (-1.0f64).exp()) / (1.0 - (-1.0f64).exp());
        assert!((window_sum_1d(1, 1.0, 60).unwrap() - limit).abs() < 1e-12);
        assert!(window_sum_1d(2, 1.0, -1).is_err());
        assert_eq!(window_sum_1d(0, 1.0, 3).unwrap(), 1.0);
    }

    #[test]
    fn block_sums() {
        let col = Occupation::new(1, {
            let mut v = vec![0; 81];
            v[40] = 1;
            v
        })
        .unwrap();
        let limit = (1.0 + (-1.0f64).exp()) / (1.0 - (-1.0f64).exp());
        assert!((block_sum(&col, 1.0).unwrap() - limit).abs() < 1e-12);
        let rect = Occupation::new(2, vec![0, 2, 2, 0]).unwrap();
        assert!((block_sum(&rect, 60.0).unwrap() - 1.0).abs() < 1e-20);
        let not_block = Occupation::new(2, vec![1, 1, 0]).unwrap();
        assert!(block_sum(&not_block, 1.0).is_err());
    }

    #[test]
    fn block_config_counts() {
        assert_eq!(count_block_configs(3, 2, 1, 1).unwrap(), 3);
        assert_eq!(count_block_configs(3, 2, 0, 1).unwrap(), 1);
        let (b, c) = block_count_bounds(3, 2, 1, 1).unwrap();
        assert_eq!((b, c), (3.0, 3.0));
        assert!(count_block_configs(3, 1, 1, 1).is_err());
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 5), 0.0);
    }

    #[test]
    fn log_sum_exp_cases() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[1000.0, 0.0]) - 1000.0).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn entropy_prefactor_spin_half() {
        // J = 1/2, K = 1: K~ = 2, slope 2K~ - 2 = 2 = 4K - 2
        let p = BoundParams::new(1, 2.5, 1, 0.5, 0.5, 4, 8).unwrap();
        assert_eq!(p.k_tilde(), 2);
        assert_eq!(2 * p.k_tilde() - 2, 4 * p.budget - 2);
    }

    #[test]
    fn params_validation() {
        assert!(BoundParams::new(1, 1.0, 1, 0.5, 0.5, 4, 8).is_err());
        assert!(BoundParams::new(1, 2.5, 1, 1.0, 0.5, 4, 8).is_err());
        assert!(BoundParams::new(1, 2.5, 1, 0.5, 1.0, 4, 8).is_err());
        let p = BoundParams::new(2, 5.0, 3, 0.5, 0.5, 4, 8).unwrap();
        assert!(p.check_budget().is_err());
        assert!(entropy_bound_rhs(&p).is_err());
    }

    #[test]
    fn monotonicity_small() {
        let p = SpinParams::new(1, 5, 2.5).unwrap();
        let reports = check_distance_monotonicity(&p, 1, 3).unwrap();
        assert!(!reports.is_empty());
        assert!(reports.iter().all(|r| r.pass));
    }
}

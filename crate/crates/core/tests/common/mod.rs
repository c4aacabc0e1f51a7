//! Reference implementations that share no code with the library paths they
//! are compared against.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Every value sequence in `{0..=two_j}^sites`, by base-(2J+1) counting.
pub fn all_sequences(two_j: u32, sites: usize) -> Vec<Vec<u32>> {
    let base = two_j as usize + 1;
    let total = base.pow(sites as u32);
    (0..total)
        .map(|mut code| {
            let mut v = vec![0u32; sites];
            for slot in v.iter_mut().rev() {
                *slot = (code % base) as u32;
                code /= base;
            }
            v
        })
        .collect()
}

/// `2V` straight from the bond and boundary terms.
pub fn doubled_potential(two_j: u32, m: &[u32]) -> i64 {
    let t = two_j as i64;
    let mut twice = 0i64;
    for w in m.windows(2) {
        let (a, b) = (w[0] as i64, w[1] as i64);
        twice += t * (a + b) - 2 * a * b;
    }
    twice + t * (m[0] as i64 + *m.last().unwrap() as i64)
}

/// Sequences grouped by particle number.
pub fn sequences_by_particles(two_j: u32, sites: usize) -> BTreeMap<usize, Vec<Vec<u32>>> {
    let mut out: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
    for v in all_sequences(two_j, sites) {
        out.entry(v.iter().sum::<u32>() as usize).or_default().push(v);
    }
    out
}

/// Brute-force argmin of `V` among `N`-particle configurations.
pub fn brute_minimizers(two_j: u32, sites: usize, particles: usize) -> (i64, Vec<Vec<u32>>) {
    let by_n = sequences_by_particles(two_j, sites);
    let sector = &by_n[&particles];
    let min = sector.iter().map(|m| doubled_potential(two_j, m)).min().unwrap();
    let mut argmin: Vec<Vec<u32>> = sector
        .iter()
        .filter(|m| doubled_potential(two_j, m) == min)
        .cloned()
        .collect();
    argmin.sort();
    (min, argmin)
}

/// `prod_{k>=1} (1 - q^k)` through the pentagonal number series, which
/// converges like `q^{k^2}`.
pub fn euler_function(q: f64) -> f64 {
    let mut total = 1.0;
    for k in 1..200i64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let a = q.powf((k * (3 * k - 1) / 2) as f64);
        let b = q.powf((k * (3 * k + 1) / 2) as f64);
        total += sign * (a + b);
        if a == 0.0 {
            break;
        }
    }
    total
}

/// `prod (1 - e^{-gamma k})`. For small `gamma` the pentagonal series
/// cancels badly, so the eta modular transform
/// `P(e^{-g}) = sqrt(2 pi / g) e^{g/24 - pi^2/(6g)} P(e^{-4 pi^2 / g})` is used.
pub fn euler_product_at(gamma: f64) -> f64 {
    use std::f64::consts::PI;
    if gamma >= 1.0 {
        euler_function((-gamma).exp())
    } else {
        let dual = euler_function((-4.0 * PI * PI / gamma).exp());
        (2.0 * PI / gamma).sqrt() * (gamma / 24.0 - PI * PI / (6.0 * gamma)).exp() * dual
    }
}

/// `L_gamma = (1 - e^{-gamma})^{-1} prod (1 - e^{-gamma k})^{-2}`.
pub fn script_l_reference(gamma: f64) -> f64 {
    let e = euler_product_at(gamma);
    1.0 / ((1.0 - (-gamma).exp()) * e * e)
}

/// Partial trace over sites `ell+1..L` of `|psi><psi|`, done on the tensor
/// space: reshape to `(2J+1)^ell x (2J+1)^{L-ell}`, multiply by the
/// transpose, then read off the rows of the left configurations in the
/// given order.
pub fn tensor_partial_trace(
    two_j: u32,
    sites: usize,
    ell: usize,
    amplitudes: &[(Vec<u32>, f64)],
    left_order: &[Vec<u32>],
) -> DMatrix<f64> {
    let base = two_j as usize + 1;
    let dim_right = base.pow((sites - ell) as u32);
    let dim_left = base.pow(ell as u32);
    let index = |v: &[u32]| v.iter().fold(0usize, |acc, &d| acc * base + d as usize);
    let mut m = DMatrix::zeros(dim_left, dim_right);
    for (v, a) in amplitudes {
        let full = index(v);
        m[(full / dim_right, full % dim_right)] = *a;
    }
    let rho = &m * m.transpose();
    let idx: Vec<usize> = left_order.iter().map(|v| index(v)).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| rho[(idx[r], idx[c])])
}

/// Seeded standard normal vector.
pub fn gaussian_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Seeded random symmetric matrix with standard normal entries.
pub fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_vector(n * n, seed);
    let a = DMatrix::from_vec(n, n, g);
    (&a + a.transpose()) * 0.5
}

/// `B(m)` from its definition.
pub fn block_count_reference(two_j: u32, m: &[u32]) -> u32 {
    let full = 2 * two_j;
    let mut b = 0;
    for w in m.windows(2) {
        let s = w[0] + w[1];
        if s != 0 && s != full {
            b += 1;
        }
    }
    b + u32::from(m[0] != 0) + u32::from(*m.last().unwrap() != 0)
}

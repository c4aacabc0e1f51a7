//! Browser demo: three small computations on a random-field XXZ chain,
//! exported through wasm-bindgen as JSON strings.
//!
//! The plain functions below do the work and are what the native tests
//! call; the `*_json` exports only serialize.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use xxz_core::bounds::{entropy_bound_rhs, BoundParams};
use xxz_core::config_space::{SectorBasis, SpinParams};
use xxz_core::entanglement::{measure_state, Bipartition};
use xxz_core::operators::{sector_hamiltonian, FieldSpec};
use xxz_core::spectral::{ct_decay_profile_from, eigh, sector_min_potential, threshold_energy, ChainSpectrum};
use xxz_core::{Error, Result};

/// Largest matrix the page will diagonalize; keeps a click under a second.
pub const MAX_DIM: usize = 1500;

#[derive(Clone, Debug, Serialize)]
pub struct SectorSpectrum {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    /// `V_{N,0}`.
    pub min_potential: f64,
    /// `1 - 2J/Delta`.
    pub gap_factor: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub ell: usize,
    pub bound: f64,
    /// Largest Rényi entropy over low eigenstates; absent past the chain.
    pub measured: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayPoint {
    pub d: u64,
    pub norm: f64,
    pub bound: f64,
}

fn field(sites: usize, nu_max: f64, seed: u64) -> Result<FieldSpec> {
    if nu_max == 0.0 {
        Ok(FieldSpec::zeros(sites))
    } else {
        FieldSpec::uniform(sites, nu_max, seed)
    }
}

fn capped(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::Resource(format!("dimension {dim} exceeds the demo limit {MAX_DIM}")));
    }
    Ok(())
}

pub fn sector_spectrum(
    two_j: u32,
    sites: usize,
    particles: usize,
    anisotropy: f64,
    nu_max: f64,
    seed: u64,
) -> Result<SectorSpectrum> {
    let params = SpinParams::new(two_j, sites, anisotropy)?;
    let basis = SectorBasis::for_params(&params, particles)?;
    capped(basis.len())?;
    let d = eigh(&sector_hamiltonian(&params, &basis, &field(sites, nu_max, seed)?)?)?;
    Ok(SectorSpectrum {
        dim: basis.len(),
        eigenvalues: d.eigenvalues,
        min_potential: sector_min_potential(&basis),
        gap_factor: params.gap_factor(),
    })
}

/// Entropy bound for `4J <= ell <= ell_max`, with the measured maximum over
/// eigenstates below `E_{K,delta}` wherever `ell < sites`.
#[allow(clippy::too_many_arguments)]
pub fn entropy_curve(
    two_j: u32,
    sites: usize,
    anisotropy: f64,
    budget: u32,
    delta: f64,
    alpha: f64,
    ell_max: usize,
    nu_max: f64,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let params = SpinParams::new(two_j, sites, anisotropy)?;
    let dim = (two_j as usize + 1).pow(sites as u32);
    capped(dim)?;
    let spectrum = ChainSpectrum::new(&params, &field(sites, nu_max, seed)?)?;
    let states = spectrum.eigenstates_below(threshold_energy(budget, delta, &params)?);
    let first = (2 * two_j as usize).max(1);
    (first..=ell_max.max(first))
        .map(|ell| {
            let bound = entropy_bound_rhs(&BoundParams::new(two_j, anisotropy, budget, delta, alpha, ell, sites)?)?;
            let measured = if ell < sites {
                let bip = Bipartition::new(two_j, sites, ell)?;
                let mut best: Option<f64> = None;
                for (id, e, psi) in &states {
                    let r = measure_state(&bip, id.to_string(), *e, psi, &[alpha])?;
                    let s = r.renyi[0].entropy;
                    best = Some(best.map_or(s, |b| b.max(s)));
                }
                best
            } else {
                None
            };
            Ok(CurvePoint { ell, bound, measured })
        })
        .collect()
}

/// `max ||P_X Q||` per graph distance against the exponential bound.
#[allow(clippy::too_many_arguments)]
pub fn decay_profile(
    two_j: u32,
    sites: usize,
    particles: usize,
    anisotropy: f64,
    budget: u32,
    delta: f64,
    nu_max: f64,
    seed: u64,
) -> Result<Vec<DecayPoint>> {
    let params = SpinParams::new(two_j, sites, anisotropy)?;
    let basis = SectorBasis::for_params(&params, particles)?;
    capped(basis.len())?;
    let d = eigh(&sector_hamiltonian(&params, &basis, &field(sites, nu_max, seed)?)?)?;
    let profile = ct_decay_profile_from(&params, &basis, &d, budget, delta)?;
    Ok(profile
        .by_distance()
        .into_iter()
        .map(|(d, norm, bound)| DecayPoint { d, norm, bound })
        .collect())
}

fn to_json<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = sectorSpectrum)]
pub fn sector_spectrum_json(
    two_j: u32,
    sites: usize,
    particles: usize,
    anisotropy: f64,
    nu_max: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_json(sector_spectrum(two_j, sites, particles, anisotropy, nu_max, seed.into()))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = entropyCurve)]
pub fn entropy_curve_json(
    two_j: u32,
    sites: usize,
    anisotropy: f64,
    budget: u32,
    delta: f64,
    alpha: f64,
    ell_max: usize,
    nu_max: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_json(entropy_curve(two_j, sites, anisotropy, budget, delta, alpha, ell_max, nu_max, seed.into()))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = decayProfile)]
pub fn decay_profile_json(
    two_j: u32,
    sites: usize,
    particles: usize,
    anisotropy: f64,
    budget: u32,
    delta: f64,
    nu_max: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_json(decay_profile(two_j, sites, particles, anisotropy, budget, delta, nu_max, seed.into()))
}

//! Expansion of a configuration into independent jobs, and their execution.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use xxz_core::bounds::{
    block_count_bounds, block_sum, check_distance_monotonicity, count_block_configs, entropy_bound_rhs, mu_k,
    projected_weight_rhs, script_l, trace_bound_rhs_ln, window_sum_1d, BoundParams, BoundReport, TraceMode,
    DEFAULT_SCRIPT_L_TOL,
};
use xxz_core::config_space::{
    block_count, decompose_blocks, enumerate_occupations, minimizer_set, potential, BuildingBlock, ChainBasis,
    SectorBasis, SpinParams,
};
use xxz_core::entanglement::{measure_state, Bipartition};
use xxz_core::operators::{assemble_full_tensor_hamiltonian, sector_embedding, sector_hamiltonian, FieldSpec};
use xxz_core::spectral::{ct_decay_profile_from, eigenvalues_dense, threshold_energy, ChainSpectrum};
use xxz_core::Error;

use crate::cache::DecompositionCache;
use crate::config::{ExperimentConfig, Kind};

/// Tolerances of the exact-equality checks.
const SPECTRAL_TOL: f64 = 1e-9;
const ENTRY_TOL: f64 = 1e-12;
/// Window radius used for the one-dimensional geometric sums.
const WINDOW: i64 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub kind: Kind,
    /// Position of the disorder seed in the ensemble.
    pub seed_index: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Skipped,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub particles: usize,
    pub budget: u32,
    pub delta: f64,
    pub seed: u64,
    pub distance: u64,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub two_j: u32,
    pub sites: usize,
    pub ell: usize,
    pub anisotropy: f64,
    pub budget: u32,
    pub delta: f64,
    pub seed: u64,
    pub state_id: String,
    pub weight_profile: Vec<(usize, f64)>,
    pub energy: f64,
    pub von_neumann: f64,
    pub alpha: f64,
    pub renyi: f64,
}

#[derive(Clone, Debug)]
pub struct JobOutput {
    pub status: Status,
    pub detail: String,
    pub reports: Vec<BoundReport>,
    pub decay: Vec<DecayRow>,
    pub entropy: Vec<EntropyRow>,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub seconds: f64,
}

impl JobOutput {
    pub(crate) fn empty() -> Self {
        Self {
            status: Status::Passed,
            detail: String::new(),
            reports: Vec::new(),
            decay: Vec::new(),
            entropy: Vec::new(),
            cache_hits: 0,
            cache_misses: 0,
            seconds: 0.0,
        }
    }

    fn skipped(detail: impl Into<String>) -> Self {
        Self {
            status: Status::Skipped,
            detail: detail.into(),
            ..Self::empty()
        }
    }
}

/// Fixed 64-bit mixer (SplitMix64 finalizer).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of ensemble member `index`; depends on nothing but the base seed and
/// the index, so growing the ensemble leaves earlier members untouched.
pub fn cell_seed(base: u64, index: u32) -> u64 {
    splitmix64(base ^ splitmix64(u64::from(index)))
}

pub fn plan(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for kind in cfg.kinds() {
        match kind {
            Kind::Equivalence | Kind::Combinatorics => jobs.push(Job {
                id: kind.as_str().to_string(),
                kind,
                seed_index: None,
                seed: None,
            }),
            Kind::CtDecay | Kind::EntropyBounds => {
                for i in 0..cfg.disorder.seeds {
                    jobs.push(Job {
                        id: format!("{}/seed-{i}", kind.as_str()),
                        kind,
                        seed_index: Some(i),
                        seed: Some(cell_seed(cfg.disorder.base_seed, i)),
                    });
                }
            }
            Kind::All => unreachable!("expanded by ExperimentConfig::kinds"),
        }
    }
    jobs
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    params: SpinParams,
    cache: &'a DecompositionCache,
    out: JobOutput,
}

impl Ctx<'_> {
    fn base_params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("two_j".to_string(), f64::from(self.params.two_j())),
            ("length".to_string(), self.params.sites() as f64),
            ("delta_anisotropy".to_string(), self.params.anisotropy()),
        ])
    }

    fn params_with(&self, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
        let mut p = self.base_params();
        for (k, v) in extra {
            p.insert((*k).to_string(), *v);
        }
        p
    }

    fn decompose(&mut self, op: &xxz_core::operators::SparseSymmetricOperator) -> xxz_core::Result<xxz_core::spectral::SpectralDecomposition> {
        let (d, hit) = self.cache.decompose(op)?;
        if hit {
            self.out.cache_hits += 1;
        } else {
            self.out.cache_misses += 1;
        }
        Ok(d)
    }

    fn field(&self, seed: u64) -> xxz_core::Result<FieldSpec> {
        FieldSpec::uniform(self.params.sites(), self.cfg.disorder.nu_max, seed)
    }

    fn check_sector_sizes(&self, from: usize) -> Result<(), String> {
        let chain = ChainBasis::new(self.params.two_j(), self.params.sites()).map_err(|e| e.to_string())?;
        let cap = self.cfg.limits.dense_dim_cap;
        match chain.sectors()[from..].iter().find(|s| s.len() > cap) {
            Some(s) => Err(format!(
                "sector N = {} has dimension {} above dense_dim_cap = {cap}",
                s.particles(),
                s.len()
            )),
            None => Ok(()),
        }
    }
}

/// Runs one job. `started` is the start of the whole run, against which the
/// time budget is measured.
pub fn execute(cfg: &ExperimentConfig, job: &Job, cache: &DecompositionCache, started: Instant) -> JobOutput {
    let clock = Instant::now();
    if started.elapsed().as_secs_f64() > cfg.limits.time_budget_secs {
        let mut out = JobOutput::skipped("time budget exhausted before start");
        out.seconds = clock.elapsed().as_secs_f64();
        return out;
    }
    let mut ctx = Ctx {
        cfg,
        params: cfg.spin_params(),
        cache,
        out: JobOutput::empty(),
    };
    let result = match job.kind {
        Kind::Equivalence => equivalence(&mut ctx),
        Kind::CtDecay => ct_decay(&mut ctx, job.seed.expect("seeded job")),
        Kind::EntropyBounds => entropy_bounds(&mut ctx, job.seed.expect("seeded job")),
        Kind::Combinatorics => combinatorics(&mut ctx),
        Kind::All => unreachable!(),
    };
    let mut out = ctx.out;
    match result {
        Ok(Some(reason)) => {
            out = JobOutput {
                cache_hits: out.cache_hits,
                cache_misses: out.cache_misses,
                ..JobOutput::skipped(reason)
            }
        }
        Ok(None) => {
            let failed = out.reports.iter().filter(|r| !r.pass).count();
            out.status = if failed == 0 { Status::Passed } else { Status::Failed };
            out.detail = format!("{} reports, {failed} failed", out.reports.len());
        }
        Err(Error::Resource(msg)) => {
            out = JobOutput {
                cache_hits: out.cache_hits,
                cache_misses: out.cache_misses,
                ..JobOutput::skipped(msg)
            }
        }
        Err(e) => {
            out.status = Status::Error;
            out.detail = e.to_string();
        }
    }
    out.seconds = clock.elapsed().as_secs_f64();
    out
}

/// `Ok(Some(reason))` marks the job as skipped.
type JobResult = xxz_core::Result<Option<String>>;

fn equivalence(ctx: &mut Ctx) -> JobResult {
    let p = ctx.params;
    let cap = ctx.cfg.limits.dense_dim_cap;
    let zero = FieldSpec::zeros(p.sites());
    let full = assemble_full_tensor_hamiltonian(&p, &zero, cap)?;
    let mut sectors = Vec::new();
    for n in 0..=p.max_particles() {
        let basis = SectorBasis::for_params(&p, n)?;
        sectors.extend(ctx.decompose(&sector_hamiltonian(&p, &basis, &zero)?)?.eigenvalues);
    }
    sectors.sort_by(f64::total_cmp);
    let spectrum = eigenvalues_dense(full.to_dense())?;
    let spec_err = if spectrum.len() == sectors.len() {
        spectrum.iter().zip(&sectors).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    ctx.out
        .reports
        .push(BoundReport::new("spectral_match", ctx.base_params(), spec_err, SPECTRAL_TOL));

    let seed = cell_seed(ctx.cfg.disorder.base_seed, 0);
    let field = ctx.field(seed)?;
    let with_field = assemble_full_tensor_hamiltonian(&p, &field, cap)?;
    let mut entry_err: f64 = 0.0;
    for n in 0..=p.max_particles() {
        let basis = SectorBasis::for_params(&p, n)?;
        let h = sector_hamiltonian(&p, &basis, &field)?;
        let emb = sector_embedding(&p, n)?;
        for r in 0..emb.len() {
            for c in r..emb.len() {
                entry_err = entry_err.max((with_field.get(emb[r], emb[c]) - h.get(r, c)).abs());
            }
        }
    }
    ctx.out.reports.push(
        BoundReport::new(
            "embedding_match",
            ctx.params_with(&[("nu_max", ctx.cfg.disorder.nu_max)]),
            entry_err,
            ENTRY_TOL,
        )
        .with_seed(seed),
    );
    Ok(None)
}

fn ct_decay(ctx: &mut Ctx, seed: u64) -> JobResult {
    let p = ctx.params;
    let first = 2 * p.two_j() as usize;
    if let Err(reason) = ctx.check_sector_sizes(first) {
        return Ok(Some(reason));
    }
    let field = ctx.field(seed)?;
    for n in first..=p.max_particles() {
        let basis = SectorBasis::for_params(&p, n)?;
        let decomp = ctx.decompose(&sector_hamiltonian(&p, &basis, &field)?)?;
        for &k in &ctx.cfg.bounds.budgets {
            for &delta in &ctx.cfg.bounds.deltas {
                let profile = ct_decay_profile_from(&p, &basis, &decomp, k, delta)?;
                for (d, norm, bound) in profile.by_distance() {
                    ctx.out.decay.push(DecayRow {
                        particles: n,
                        budget: k,
                        delta,
                        seed,
                        distance: d,
                        norm,
                        bound,
                    });
                }
                let worst = profile
                    .rows
                    .iter()
                    .min_by(|a, b| a.margin().total_cmp(&b.margin()))
                    .expect("sectors are non-empty");
                let params = ctx.params_with(&[
                    ("n", n as f64),
                    ("k", f64::from(k)),
                    ("delta", delta),
                    ("nu_max", ctx.cfg.disorder.nu_max),
                    ("distance", worst.distance as f64),
                ]);
                ctx.out
                    .reports
                    .push(BoundReport::new("ct_decay", params, worst.norm, worst.bound).with_seed(seed));
            }
        }
    }
    Ok(None)
}

/// Smallest-margin report among `candidates`, or none if empty.
fn worst(candidates: Vec<BoundReport>) -> Option<BoundReport> {
    candidates.into_iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
}

fn entropy_bounds(ctx: &mut Ctx, seed: u64) -> JobResult {
    let p = ctx.params;
    if let Err(reason) = ctx.check_sector_sizes(0) {
        return Ok(Some(reason));
    }
    let field = ctx.field(seed)?;
    let chain = ChainBasis::new(p.two_j(), p.sites())?;
    let mut decomps = Vec::new();
    for basis in chain.sectors() {
        decomps.push(ctx.decompose(&sector_hamiltonian(&p, basis, &field)?)?);
    }
    let spectrum = ChainSpectrum::from_parts(&p, decomps)?;
    let alphas = ctx.cfg.bounds.alphas.clone();
    for &k in &ctx.cfg.bounds.budgets {
        for &delta in &ctx.cfg.bounds.deltas {
            let cutoff = threshold_energy(k, delta, &p)?;
            let mut states = spectrum.eigenstates_below(cutoff);
            states.extend(spectrum.random_states_below(cutoff, ctx.cfg.disorder.random_states, seed));
            for &ell in &ctx.cfg.bounds.cuts {
                let bip = Bipartition::new(p.two_j(), p.sites(), ell)?;
                let mut records = Vec::with_capacity(states.len());
                for (id, energy, psi) in &states {
                    let rec = measure_state(&bip, id.to_string(), *energy, psi, &alphas)?;
                    let weights = alphas
                        .iter()
                        .map(|&a| projected_weight_rhs(&bip, psi, a))
                        .collect::<xxz_core::Result<Vec<f64>>>()?;
                    records.push((rec, weights));
                }
                for (ai, &alpha) in alphas.iter().enumerate() {
                    let bp = BoundParams::new(p.two_j(), p.anisotropy(), k, delta, alpha, ell, p.sites())?;
                    let exact = trace_bound_rhs_ln(&bp, TraceMode::Exact)?;
                    let lemma = trace_bound_rhs_ln(&bp, TraceMode::Lemma)?;
                    let entropy_rhs = entropy_bound_rhs(&bp)?;
                    let mut params = ctx.base_params();
                    params.extend(bp.snapshot());
                    params.insert("nu_max".into(), ctx.cfg.disorder.nu_max);

                    let mut weight = Vec::new();
                    let mut trace = Vec::new();
                    let mut vn = Vec::new();
                    let mut renyi = Vec::new();
                    for (rec, weights) in &records {
                        let r = &rec.renyi[ai];
                        weight.push(BoundReport::new("projected_weight", params.clone(), r.trace_power, weights[ai]));
                        trace.push(BoundReport::from_logs("trace_exact_sum", params.clone(), r.trace_power.ln(), exact));
                        vn.push(BoundReport::new("von_neumann_le_renyi", params.clone(), rec.von_neumann, r.entropy));
                        renyi.push(BoundReport::new("renyi_entropy_bound", params.clone(), r.entropy, entropy_rhs));
                        ctx.out.entropy.push(EntropyRow {
                            two_j: p.two_j(),
                            sites: p.sites(),
                            ell,
                            anisotropy: p.anisotropy(),
                            budget: k,
                            delta,
                            seed,
                            state_id: rec.state_id.clone(),
                            weight_profile: rec.weight_profile.clone(),
                            energy: rec.energy,
                            von_neumann: rec.von_neumann,
                            alpha,
                            renyi: r.entropy,
                        });
                    }
                    let mut cell: Vec<BoundReport> = [weight, trace, vn, renyi].into_iter().filter_map(worst).collect();
                    cell.push(BoundReport::from_logs("exact_le_lemma", params.clone(), exact, lemma));
                    ctx.out.reports.extend(cell.into_iter().map(|r| r.with_seed(seed)));
                }
            }
        }
    }
    Ok(None)
}

fn combinatorics(ctx: &mut Ctx) -> JobResult {
    let p = ctx.params;
    let two_j = p.two_j();
    let t = i64::from(two_j);
    let cap = ctx.cfg.limits.dense_dim_cap;
    let chain = ChainBasis::new(two_j, p.sites())?;

    for n in 2 * two_j as usize..=p.max_particles() {
        let basis = chain.sector(n);
        if basis.len() > cap {
            continue;
        }
        let min = basis.states().iter().map(potential).min().expect("non-empty sector");
        let argmin: Vec<_> = basis.states().iter().filter(|m| potential(m) == min).cloned().collect();
        let family = minimizer_set(&p, n)?;
        let differ = argmin.iter().filter(|m| !family.contains(m)).count()
            + family.iter().filter(|m| !argmin.contains(m)).count();
        let params = ctx.params_with(&[("n", n as f64)]);
        ctx.out.reports.push(BoundReport::new(
            "minimum_potential",
            params.clone(),
            (min.doubled() - 2 * t * t).abs() as f64,
            0.0,
        ));
        ctx.out
            .reports
            .push(BoundReport::new("minimizer_family", params, differ as f64, 0.0));
    }

    // B(m) <= V(m)/J, and V <= K => at most K~ - 1 building blocks
    let mut ratio = i64::MIN;
    let mut excess: BTreeMap<u32, i64> = ctx.cfg.bounds.budgets.iter().map(|&k| (k, i64::MIN)).collect();
    for basis in chain.sectors() {
        for m in basis.states() {
            let v2 = potential(m).doubled();
            ratio = ratio.max(i64::from(block_count(m)) * t - v2);
            let blocks = decompose_blocks(m).len() as i64;
            for (&k, e) in excess.iter_mut() {
                if v2 <= 2 * i64::from(k) {
                    let k_tilde = 2 * i64::from(k) / t;
                    *e = (*e).max(blocks - (k_tilde - 1));
                }
            }
        }
    }
    ctx.out
        .reports
        .push(BoundReport::new("block_count_le_potential", ctx.base_params(), ratio as f64 / 2.0, 0.0));
    for (&k, &e) in &excess {
        ctx.out.reports.push(BoundReport::new(
            "blocks_le_k_tilde_minus_one",
            ctx.params_with(&[("k", f64::from(k))]),
            e as f64,
            0.0,
        ));
    }

    for &ell in &ctx.cfg.bounds.cuts {
        for &k in &ctx.cfg.bounds.budgets {
            let params = ctx.params_with(&[("ell", ell as f64), ("k", f64::from(k))]);
            if let Some(mut r) = worst(check_distance_monotonicity(&p, k, ell)?) {
                r.params.extend(params.clone());
                ctx.out.reports.push(r);
            }
            let k_tilde = 2 * k / two_j;
            let mut binom_reports = Vec::new();
            let mut closed_reports = Vec::new();
            for j in 2 * two_j as usize..=two_j as usize * ell {
                let exact = count_block_configs(ell, k_tilde, j, two_j)? as f64;
                let (binom, closed) = block_count_bounds(ell, k_tilde, j, two_j)?;
                let mut pj = params.clone();
                pj.insert("j".into(), j as f64);
                binom_reports.push(BoundReport::new("block_configs_le_binomial", pj.clone(), exact, binom));
                closed_reports.push(BoundReport::new("binomial_le_closed_form", pj, binom, closed));
            }
            ctx.out.reports.extend(worst(binom_reports));
            ctx.out.reports.extend(worst(closed_reports));
        }
    }

    let mut gammas = Vec::new();
    for &k in &ctx.cfg.bounds.budgets {
        for &delta in &ctx.cfg.bounds.deltas {
            for &alpha in &ctx.cfg.bounds.alphas {
                let gamma = 2.0 * alpha * mu_k(two_j, p.anisotropy(), k, delta);
                gammas.push((k, delta, alpha, gamma));
            }
        }
    }
    for (k, delta, alpha, gamma) in gammas {
        let l = script_l(gamma, DEFAULT_SCRIPT_L_TOL)?;
        let params = ctx.params_with(&[("k", f64::from(k)), ("delta", delta), ("alpha", alpha), ("gamma", gamma)]);
        let mut windows = Vec::new();
        for n in 1..=4 {
            let mut pn = params.clone();
            pn.insert("n".into(), n as f64);
            pn.insert("window".into(), WINDOW as f64);
            windows.push(BoundReport::new("window_sum_le_script_l", pn, window_sum_1d(n, gamma, WINDOW)?, l));
        }
        ctx.out.reports.extend(worst(windows));
        let mut blocks = Vec::new();
        let cap_2j = l.powi(two_j as i32);
        for site in 1..=p.sites() {
            let mut candidates = Vec::new();
            for h in 1..=two_j {
                candidates.push(BuildingBlock::column(site, h, two_j)?);
            }
            for end in site + 1..=p.sites() {
                candidates.push(BuildingBlock::rectangle(site, end)?);
            }
            for b in candidates {
                let occ = b.to_occupation(two_j, p.sites())?;
                if enumerate_occupations(two_j, p.sites(), occ.particle_number())?.len() > cap {
                    continue;
                }
                blocks.push(BoundReport::new("block_sum_le_script_l_power", params.clone(), block_sum(&occ, gamma)?, cap_2j));
            }
        }
        ctx.out.reports.extend(worst(blocks));
    }
    Ok(None)
}

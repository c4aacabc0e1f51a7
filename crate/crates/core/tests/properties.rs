mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use xxz_core::bounds::{block_sum, script_l, window_sum_1d, DEFAULT_SCRIPT_L_TOL};
use xxz_core::config_space::{
    adjacent, assemble_blocks, block_count, decompose_blocks, graph_distance, hop_neighbors, hop_weight,
    low_energy_on, occupation_to_tuple, potential, potential_simplified, tuple_to_occupation, BlockKind,
    BuildingBlock, Occupation, SectorBasis, SpinParams,
};
use xxz_core::entanglement::{entropy_from_spectrum, renyi_from_spectrum};
use xxz_core::operators::{
    assemble_adjacency, assemble_field, assemble_potential, sector_hamiltonian, FieldSpec, SparseSymmetricOperator,
};
use xxz_core::spectral::{eigenvalues_dense, eigh_dense, projection_block_norm, spectral_projection};

fn occupation() -> impl Strategy<Value = Occupation> {
    (1u32..=4, 1usize..=9)
        .prop_flat_map(|(two_j, sites)| proptest::collection::vec(0..=two_j, sites).prop_map(move |v| (two_j, v)))
        .prop_map(|(two_j, v)| Occupation::new(two_j, v).unwrap())
}

/// Two configurations of the same sector.
fn occupation_pair() -> impl Strategy<Value = (Occupation, Occupation)> {
    (1u32..=3, 2usize..=6)
        .prop_flat_map(|(two_j, sites)| {
            let n = (two_j as usize * sites) / 2;
            let count = SectorBasis::new(two_j, sites, n.max(1)).unwrap().len();
            (Just((two_j, sites, n.max(1))), 0..count, 0..count)
        })
        .prop_map(|((two_j, sites, n), i, k)| {
            let basis = SectorBasis::new(two_j, sites, n).unwrap();
            (basis.state(i).clone(), basis.state(k).clone())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tuple_round_trip(m in occupation()) {
        let x = occupation_to_tuple(&m);
        prop_assert_eq!(x.len(), m.particle_number());
        prop_assert!(x.positions().windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(tuple_to_occupation(&x, m.sites()).unwrap(), m);
    }

    #[test]
    fn potential_forms_agree(m in occupation()) {
        prop_assert_eq!(potential(&m), potential_simplified(&m));
        prop_assert_eq!(potential(&m).doubled(), common::doubled_potential(m.two_j(), m.values()));
    }

    #[test]
    fn blocks_bounded_by_potential(m in occupation()) {
        let b = block_count(&m);
        prop_assert_eq!(b, common::block_count_reference(m.two_j(), m.values()));
        // B <= V / J, i.e. 2J B <= 2V
        prop_assert!(i64::from(b) * i64::from(m.two_j()) <= potential(&m).doubled());
    }

    #[test]
    fn blocks_reassemble(m in occupation()) {
        let blocks = decompose_blocks(&m);
        let back = assemble_blocks(&blocks, m.two_j(), m.sites()).unwrap();
        prop_assert_eq!(&back, &m);
        for w in blocks.windows(2) {
            prop_assert!(w[0].end < w[1].start);
        }
        for b in &blocks {
            let piece = b.to_occupation(m.two_j(), m.sites()).unwrap();
            prop_assert_eq!(BuildingBlock::from_occupation(&piece).unwrap(), *b);
            if let BlockKind::Column { height } = b.kind {
                prop_assert!(height >= 1 && height <= m.two_j());
            } else {
                prop_assert!(b.end > b.start);
            }
        }
        // consecutive blocks are separated by a counted edge
        if !m.is_empty() {
            prop_assert!(blocks.len() as u32 + 1 <= block_count(&m));
        }
    }

    #[test]
    fn neighbors_are_at_distance_one(m in occupation()) {
        let x = occupation_to_tuple(&m);
        for (n, w) in hop_neighbors(&m) {
            prop_assert!(adjacent(&m, &n).unwrap());
            prop_assert_eq!(graph_distance(&x, &occupation_to_tuple(&n)).unwrap(), 1);
            prop_assert!((hop_weight(&n, &m).unwrap() - w).abs() < 1e-12);
            prop_assert_eq!(n.particle_number(), m.particle_number());
        }
    }

    #[test]
    fn adjacency_iff_unit_distance((m, n) in occupation_pair()) {
        let d = graph_distance(&occupation_to_tuple(&m), &occupation_to_tuple(&n)).unwrap();
        prop_assert_eq!(adjacent(&m, &n).unwrap(), d == 1);
        prop_assert_eq!(d == 0, m == n);
    }

    #[test]
    fn distance_is_a_metric((a, b) in occupation_pair(), k in 0usize..1000) {
        let basis = SectorBasis::new(a.two_j(), a.sites(), a.particle_number()).unwrap();
        let c = basis.state(k % basis.len()).clone();
        let (x, y, z) = (occupation_to_tuple(&a), occupation_to_tuple(&b), occupation_to_tuple(&c));
        let dxy = graph_distance(&x, &y).unwrap();
        prop_assert_eq!(dxy, graph_distance(&y, &x).unwrap());
        prop_assert!(dxy <= graph_distance(&x, &z).unwrap() + graph_distance(&z, &y).unwrap());
    }

    #[test]
    fn low_energy_sets_grow_with_budget(two_j in 1u32..=2, sites in 3usize..=6, k in 1u32..8) {
        let n = two_j as usize * sites / 2;
        let small = low_energy_on(two_j, sites, n, k).unwrap();
        let large = low_energy_on(two_j, sites, n, k + 1).unwrap();
        prop_assert!(small.iter().all(|x| large.contains(x)));
    }

    #[test]
    fn relative_bound_holds(two_j in 1u32..=3, sites in 2usize..=5, pick in 0usize..100) {
        let n = 1 + pick % (two_j as usize * sites);
        let basis = SectorBasis::new(two_j, sites, n).unwrap();
        let a = assemble_adjacency(&basis).to_dense();
        let v = assemble_potential(&basis).to_dense() * (2.0 * f64::from(two_j));
        for sign in [1.0, -1.0] {
            let ev = eigenvalues_dense(&v + &a * sign).unwrap();
            prop_assert!(ev[0] >= -1e-10, "lambda_min = {}", ev[0]);
        }
    }

    #[test]
    fn ground_energy_floor(two_j in 1u32..=2, sites in 2usize..=6, scale in 1.05f64..4.0, pick in 0usize..100) {
        let n = 2 * two_j as usize;
        prop_assume!(n <= two_j as usize * sites);
        let _ = pick;
        let params = SpinParams::new(two_j, sites, scale * f64::from(two_j)).unwrap();
        let basis = SectorBasis::for_params(&params, n).unwrap();
        let h = sector_hamiltonian(&params, &basis, &FieldSpec::zeros(sites)).unwrap();
        let e0 = eigenvalues_dense(h.to_dense()).unwrap()[0];
        let j2x4 = f64::from(two_j * two_j);
        prop_assert!(e0 >= params.gap_factor() * j2x4 - 1e-10);
    }

    #[test]
    fn field_is_a_direct_sum(two_j in 1u32..=3, sites in 2usize..=6, seed in any::<u64>(), pick in 0usize..100) {
        let n = pick % (two_j as usize * sites + 1);
        let basis = SectorBasis::new(two_j, sites, n).unwrap();
        let field = FieldSpec::uniform(sites, 1.0, seed).unwrap();
        let w = assemble_field(&basis, &field).unwrap();
        for (i, m) in basis.states().iter().enumerate() {
            let expect: f64 = m.values().iter().zip(field.values()).map(|(&k, nu)| f64::from(k) * nu).sum();
            prop_assert!((w.get(i, i) - expect).abs() < 1e-12);
        }
        prop_assert_eq!(w.nnz(), w.diagonal_values().iter().filter(|x| **x != 0.0).count());
    }

    #[test]
    fn eigh_reconstructs(n in 1usize..30, seed in any::<u64>()) {
        let m = common::random_symmetric(n, seed);
        let d = eigh_dense(m.clone()).unwrap();
        prop_assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(d.orthonormality_defect() < 1e-10);
        prop_assert!((d.reconstruct() - &m).amax() < 1e-10 * m.norm().max(1.0));
    }

    #[test]
    fn projections_are_idempotent(n in 2usize..25, seed in any::<u64>(), cut in 0.0f64..1.0, k in 1usize..25) {
        let m = common::random_symmetric(n, seed);
        let d = eigh_dense(m).unwrap();
        let lo = d.eigenvalues[0];
        let hi = d.eigenvalues[n - 1];
        let p = spectral_projection(&d, lo + cut * (hi - lo));
        prop_assert!(p.idempotence_defect() < 1e-10);
        let subset: Vec<usize> = (0..n).filter(|i| i % k == 0).collect();
        let via = projection_block_norm(&p, &subset).unwrap();
        let pa = DMatrix::from_fn(n, n, |r, c| if r == c && subset.contains(&r) { 1.0 } else { 0.0 });
        let left = (&pa * &p.matrix).singular_values().max();
        let right = (&p.matrix * &pa).singular_values().max();
        prop_assert!((left - right).abs() < 1e-10);
        prop_assert!((via - left).abs() < 1e-10);
    }

    #[test]
    fn coordinate_dump_round_trips(n in 1usize..12, seed in any::<u64>()) {
        let m = common::random_symmetric(n, seed);
        let mut trip = Vec::new();
        for r in 0..n {
            for c in r..n {
                trip.push((r, c, m[(r, c)]));
            }
        }
        let op = SparseSymmetricOperator::from_upper_triplets(n, trip).unwrap();
        let text = op.to_coordinate_text();
        let back = SparseSymmetricOperator::read_coordinate(text.as_bytes()).unwrap();
        prop_assert_eq!(back, op);
    }

    #[test]
    fn renyi_dominates_von_neumann(raw in proptest::collection::vec(0.0f64..1.0, 1..20), a in 0.05f64..0.95, b in 0.05f64..0.95) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let vn = entropy_from_spectrum(&p);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let s_lo = renyi_from_spectrum(&p, lo).unwrap();
        let s_hi = renyi_from_spectrum(&p, hi).unwrap();
        prop_assert!(vn <= s_hi + 1e-10);
        prop_assert!(s_hi <= s_lo + 1e-10);
        prop_assert!(s_lo <= (p.len() as f64).ln() + 1e-10);
    }

    #[test]
    fn script_l_decreases(g in 0.05f64..3.0, dg in 0.01f64..1.0) {
        let a = script_l(g, DEFAULT_SCRIPT_L_TOL).unwrap();
        let b = script_l(g + dg, DEFAULT_SCRIPT_L_TOL).unwrap();
        prop_assert!(b < a);
        prop_assert!(b > 1.0);
        prop_assert!((a / common::script_l_reference(g) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn window_sums_below_script_l(n in 1usize..=4, g in 0.2f64..2.0, w in 0i64..12) {
        let l = script_l(g, DEFAULT_SCRIPT_L_TOL).unwrap();
        let s = window_sum_1d(n, g, w).unwrap();
        let s_next = window_sum_1d(n, g, w + 1).unwrap();
        prop_assert!(s <= s_next + 1e-12);
        prop_assert!(s_next <= l * (1.0 + 1e-12));
    }

    #[test]
    fn block_sums_below_script_l_power(
        (two_j, v) in (1u32..=3, 1usize..=7).prop_flat_map(|(t, l)| (Just(t), proptest::collection::vec(0..=t, l))),
        g in 0.3f64..1.5,
    ) {
        let m = Occupation::new(two_j, v).unwrap();
        for b in decompose_blocks(&m) {
            let block = b.to_occupation(m.two_j(), m.sites()).unwrap();
            let s = block_sum(&block, g).unwrap();
            let cap = script_l(g, DEFAULT_SCRIPT_L_TOL).unwrap().powi(m.two_j() as i32);
            prop_assert!(s <= cap * (1.0 + 1e-12), "{} > {}", s, cap);
        }
    }
}

use xxz_core::config_space::{potential, SectorBasis};
use xxz_core::Error;
use xxz_web::{decay_profile, entropy_curve, sector_spectrum};

#[test]
fn spectrum_trace_matches_potential_sum() {
    let s = sector_spectrum(1, 7, 3, 3.0, 0.0, 0).unwrap();
    assert_eq!(s.dim, 35);
    assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    // the hopping part has zero diagonal, so the trace is the sum of V
    let basis = SectorBasis::new(1, 7, 3).unwrap();
    let trace: f64 = basis.states().iter().map(|m| potential(m).value()).sum();
    let sum: f64 = s.eigenvalues.iter().sum();
    assert!((sum - trace).abs() < 1e-9, "{sum} vs {trace}");
    assert!(s.eigenvalues[0] >= s.gap_factor * s.min_potential - 1e-9);
}

#[test]
fn field_shifts_spectrum_reproducibly() {
    let a = sector_spectrum(2, 5, 4, 6.0, 1.0, 9).unwrap();
    let b = sector_spectrum(2, 5, 4, 6.0, 1.0, 9).unwrap();
    let c = sector_spectrum(2, 5, 4, 6.0, 0.0, 9).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_ne!(a.eigenvalues, c.eigenvalues);
    // a nonnegative field only raises energies
    assert!(a.eigenvalues[0] >= c.eigenvalues[0] - 1e-12);
}

#[test]
fn entropy_curve_stays_under_bound() {
    let pts = entropy_curve(1, 8, 2.5, 2, 0.5, 0.5, 12, 0.5, 3).unwrap();
    assert_eq!(pts.first().unwrap().ell, 2);
    assert_eq!(pts.last().unwrap().ell, 12);
    for p in &pts {
        match p.measured {
            Some(s) => {
                assert!(p.ell < 8);
                assert!(s <= p.bound, "ell {}: {s} > {}", p.ell, p.bound);
            }
            None => assert!(p.ell >= 8),
        }
    }
    assert!(pts.windows(2).all(|w| w[0].bound <= w[1].bound));
}

#[test]
fn decay_profile_stays_under_bound() {
    let pts = decay_profile(1, 9, 3, 2.5, 2, 0.5, 0.8, 5).unwrap();
    assert_eq!(pts[0].d, 0);
    assert!(pts.windows(2).all(|w| w[0].d < w[1].d));
    for p in &pts {
        assert!(p.norm <= p.bound, "d {}: {} > {}", p.d, p.norm, p.bound);
    }
}

#[test]
fn oversized_requests_are_refused() {
    assert!(matches!(sector_spectrum(3, 8, 12, 7.0, 0.0, 0), Err(Error::Resource(_))));
    assert!(matches!(entropy_curve(1, 12, 2.5, 1, 0.5, 0.5, 12, 0.0, 0), Err(Error::Resource(_))));
}

#[test]
fn bad_parameters_are_domain_errors() {
    assert!(matches!(sector_spectrum(1, 6, 3, 0.5, 0.0, 0), Err(Error::Domain(_))));
    assert!(entropy_curve(1, 6, 2.5, 2, 1.5, 0.5, 6, 0.0, 0).is_err());
}

//! Cross-module pipeline: build a basis, persist it, sample an ensemble,
//! push it through the flow, and run the invariance statistics, checking
//! that every hand-off preserves state exactly.

use gibbsdisc_core::invariance::{default_observables, invariance_test, push_ensemble};
use gibbsdisc_core::{Basis64, Ensemble64, FlowConfig64, Integrator, NonlinearityKind, Spec64};

fn spec() -> Spec64 {
    Spec64 { kind: NonlinearityKind::PurePower, alpha: 1.0, sign: 1.0, normalize_at_zero: true }
}

#[test]
fn basis_roundtrips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.bin");
    let basis = Basis64::build(12, 48).unwrap();
    basis.save(&path).unwrap();
    let loaded = Basis64::load(&path).unwrap();
    assert_eq!(basis.content_hash(), loaded.content_hash());
    assert_eq!(basis.zeros(), loaded.zeros());
    let (diag, off) = loaded.gram_errors();
    assert!(diag.max(off) < 1e-12);
}

#[test]
fn ensemble_roundtrips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ensemble.bin");
    let basis = Basis64::build(8, 32).unwrap();
    let ensemble = Ensemble64::generate(&basis, 0.3, &spec(), 1.0, 200, 17);
    ensemble.save(&path, &basis).unwrap();

    let (loaded, header) = Ensemble64::load(&path).unwrap();
    assert_eq!(header.basis_hash, basis.content_hash());
    assert_eq!(header.seed, 17);
    assert_eq!(loaded.len(), 200);
    assert_eq!(loaded.log_weights, ensemble.log_weights);
    for (a, b) in loaded.states.iter().zip(&ensemble.states) {
        assert_eq!(a.coeffs, b.coeffs);
    }
}

#[test]
fn sample_push_test_chain_runs_clean() {
    let basis = Basis64::build(8, 32).unwrap();
    let spec = spec();
    let s = 0.3;
    let ensemble = Ensemble64::generate(&basis, s, &spec, 1.0, 400, 23);
    assert!(ensemble.acceptance_fraction() > 0.5);
    assert!(ensemble.ess() > 100.0);

    let config = FlowConfig64 {
        t_final: 0.5,
        dt: 1e-3,
        integrator: Integrator::StrangRk4,
        conservation_tol_h: 1e-4,
        ..Default::default()
    };
    let pushed = push_ensemble(&ensemble, &spec, &basis, &config).unwrap();
    assert_eq!(pushed.states.len(), ensemble.len());
    assert_eq!(pushed.n_excluded, 0, "conservation flags on a well-resolved push");

    let reports = invariance_test(&ensemble, &pushed, &basis, &default_observables(s));
    assert!(!reports.is_empty());
    for r in &reports {
        assert!(r.z_score.is_finite(), "{}: z not finite", r.observable_id);
    }
}

#[test]
fn regeneration_is_bitwise_deterministic() {
    let basis = Basis64::build(8, 32).unwrap();
    let a = Ensemble64::generate(&basis, 0.3, &spec(), 1.0, 100, 99);
    let b = Ensemble64::generate(&basis, 0.3, &spec(), 1.0, 100, 99);
    for (x, y) in a.states.iter().zip(&b.states) {
        assert_eq!(x.coeffs, y.coeffs);
    }
    assert_eq!(a.log_weights, b.log_weights);
}

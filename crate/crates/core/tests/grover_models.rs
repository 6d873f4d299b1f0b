use std::f64::consts::{FRAC_PI_2, PI};

use fourier_grover::analysis::estimate_nm;
use fourier_grover::grover::{
    full_iterate, optimal_iterations, phase_matching_scan, reduced_iterate, success_probability,
    FullGroverState, GroverReducedState,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn reduced_matches_full(
        n in 2usize..300,
        frac in 0.0f64..1.0,
        po in -PI..PI,
        pd in -PI..PI,
        k in 0usize..20,
    ) {
        let m = 1 + ((n - 1) as f64 * frac) as usize;
        let marked: Vec<usize> = (0..m).map(|i| (i * 7919) % n).collect();
        let mut marked_unique = marked.clone();
        marked_unique.sort_unstable();
        marked_unique.dedup();
        let m = marked_unique.len();
        let mut full = FullGroverState::uniform(n, &marked_unique).unwrap();
        let mut reduced = GroverReducedState::uniform(n as f64, m as f64).unwrap();
        for _ in 0..k {
            full = full_iterate(&full, po, pd);
            reduced = reduced_iterate(&reduced, po, pd);
        }
        prop_assert!((full.success_probability() - reduced.success_probability()).abs() < 1e-10);
        prop_assert!((full.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!((reduced.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn estimate_inverts_optimum(nm in 1.0f64..500.0, phase in 0.05f64..FRAC_PI_2) {
        let k = optimal_iterations(nm, 1.0, phase).unwrap();
        prop_assert!((estimate_nm(k, phase) / nm - 1.0).abs() < 1e-12);
        prop_assert!((estimate_nm(k, -phase) / nm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_grows_with_database(nm in 1.0f64..500.0, d in 0.01f64..100.0, phase in 0.05f64..FRAC_PI_2) {
        let a = optimal_iterations(nm, 1.0, phase).unwrap();
        let b = optimal_iterations(nm + d, 1.0, phase).unwrap();
        prop_assert!(b > a);
        // smaller phases take longer
        let c = optimal_iterations(nm, 1.0, 0.9 * phase).unwrap();
        prop_assert!(c > a);
    }

    #[test]
    fn ideal_phases_follow_closed_form(n in 1usize..2048, k in 0usize..40) {
        let s0 = FullGroverState::uniform(n.max(2), &[0]).unwrap();
        let n = s0.n_items();
        let mut s = s0;
        for _ in 0..k {
            s = full_iterate(&s, PI, PI);
        }
        let expected = success_probability(k as f64, n as f64, 1.0);
        prop_assert!((s.success_probability() - expected).abs() < 1e-10);
    }
}

#[test]
fn phase_corrected_optimum() {
    assert!((optimal_iterations(32.0, 1.0, 1.1).unwrap() - 4.99).abs() <= 0.02);
    assert!((optimal_iterations(32.0, 1.0, FRAC_PI_2).unwrap() - 4.44).abs() <= 0.01);
    assert!(optimal_iterations(32.0, 1.0, 0.0).is_err());
    assert!(optimal_iterations(32.0, 0.0, 1.0).is_err());
}

#[test]
fn mismatched_phases_lose_the_item() {
    let scan = phase_matching_scan(32.0, 1.0, -1.1, 0.05, 20).unwrap();
    let (best_pd, best) =
        scan.iter()
            .cloned()
            .fold((f64::NAN, -1.0), |acc, p| if p.1 > acc.1 { p } else { acc });
    assert!((best_pd + 1.1).abs() <= 0.05 + 1e-12, "{best_pd}");
    assert!(best > 0.95);
    assert!(scan[0].1 < best && scan[scan.len() - 1].1 < best);
}

use fourier_grover_web::{
    phase_matching, phase_view, pulse_train, search, search_view, train_view,
};

#[test]
fn search_view_matches_paper_preset() {
    let v = search_view(42.0, -1.1, 25.0, 12).unwrap();
    assert_eq!(v.profiles.len(), 12);
    assert!(v.profiles.iter().all(|p| p.intensity.len() == v.x_um.len()));
    assert!(v.x_um.first().unwrap() >= &-800.0 && v.x_um.last().unwrap() <= &800.0);
    let k = v.first_maximum.unwrap();
    assert!((4.5..=5.5).contains(&k), "{k}");
    assert!((28.0..=36.0).contains(&v.estimate_nm.unwrap()));
    assert!((v.peak_center_um.unwrap() - 150.0).abs() <= 2.0);
}

#[test]
fn wider_line_peaks_earlier() {
    let narrow = search_view(42.0, -1.1, 25.0, 12)
        .unwrap()
        .first_maximum
        .unwrap();
    let wide = search_view(126.0, -1.1, 25.0, 12)
        .unwrap()
        .first_maximum
        .unwrap();
    assert!(wide < narrow);
}

#[test]
fn short_runs_report_no_maximum() {
    let v = search_view(42.0, -1.1, 25.0, 3).unwrap();
    assert!(v.first_maximum.is_none() && v.estimate_nm.is_none());
}

#[test]
fn pulse_trains_with_and_without_plates() {
    let off = train_view(42.0, false, 55.0).unwrap();
    for w in off.slit_energy.windows(2) {
        assert!((w[1] / w[0] - 0.75).abs() < 1e-9);
    }
    let on = train_view(42.0, true, 55.0).unwrap();
    assert!(on.slit_energy[1..4].iter().all(|e| *e > on.slit_energy[0]));
}

#[test]
fn phase_view_peaks_at_match() {
    let v = phase_view(32.0, -1.1).unwrap();
    let i = (0..v.best_success.len()).fold(0, |a, i| {
        if v.best_success[i] > v.best_success[a] {
            i
        } else {
            a
        }
    });
    assert!((v.phase_diffusion[i] + 1.1).abs() <= 0.05 + 1e-12);
    // the discrete phase is two plate passes
    let expected = std::f64::consts::PI / (4.0 * 0.55f64.sin()) * 32f64.sqrt();
    assert!((v.optimal_iterations - expected).abs() < 1e-12);
    assert_eq!(
        v.matched_trace.len(),
        1 + (3.0 * v.optimal_iterations).ceil() as usize
    );
}

#[test]
fn exports_return_json_or_messages() {
    let text = search(84.0, -1.1, 25.0, 8).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["x_um"].is_array());
    assert!(
        serde_json::from_str::<serde_json::Value>(&pulse_train(84.0, true, 55.0).unwrap()).is_ok()
    );
    assert!(
        serde_json::from_str::<serde_json::Value>(&phase_matching(16.0, -1.1).unwrap()).is_ok()
    );

    let err = search(-5.0, -1.1, 25.0, 8).unwrap_err();
    assert!(err.contains("flat_width_um"), "{err}");
    assert!(phase_matching(0.0, -1.1).is_err());
    assert!(pulse_train(42.0, true, 0.0).is_err());
}

//! Tracking against the analytic reference: estimated-vs-true convergence,
//! Euler order checks, and the covariance ODE in closed-form cases.

use fieldtrack_core::field::{DomainBox, EstimatorConfig};
use fieldtrack_core::kernel;
use fieldtrack_core::sim::{sample_observations, FieldKind, SyntheticScenario};
use fieldtrack_core::tracker::{
    select_bandwidth_mise, track_curve, track_reference, AnalyticField, TrackConfig, Trajectory,
};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

fn circular_scenario(n: usize, noise: f64, seed: u64) -> SyntheticScenario {
    SyntheticScenario {
        field: FieldKind::Circular,
        domain: DomainBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap(),
        n,
        noise_scale: noise,
        seed,
    }
}

fn cfg(h: f64, t: f64, delta: f64, n: usize) -> TrackConfig {
    TrackConfig {
        x0: DVector::from_vec(vec![1.0, 0.0]),
        t_horizon: t,
        delta,
        speed_floor: 0.05,
        sample_size_n: n,
        bandwidth: EstimatorConfig::new(h, h, 0.0).unwrap(),
    }
}

#[test]
fn noiseless_dense_tracking_approaches_reference() {
    // Max pointwise gap to the reference run shrinks over n = 500, 2000,
    // 8000 with h = (beta/n)^{1/5}, and is < 0.05 at n = 8000, h = 0.12.
    let field = circular_scenario(10, 0.0, 0).analytic_field().unwrap();
    let max_gap = |n: usize, h: f64| -> f64 {
        let sc = circular_scenario(n, 0.0, 31);
        let obs = sample_observations(&sc).unwrap();
        let c = cfg(h, std::f64::consts::PI, 0.02, n);
        let est = track_curve(&obs, &c).unwrap();
        let reference = track_reference(&field, &c).unwrap();
        est.states
            .iter()
            .zip(&reference.states)
            .map(|(a, b)| (&a.x_hat - &b.x_hat).norm())
            .fold(0.0, f64::max)
    };
    let beta = 8000.0 * 0.12f64.powi(5);
    let gaps: Vec<f64> = [500usize, 2000, 8000]
        .iter()
        .map(|&n| max_gap(n, (beta / n as f64).powf(0.2)))
        .collect();
    assert!(
        gaps[0] > gaps[2],
        "gap did not shrink across n: {gaps:?}"
    );
    assert!(gaps[2] < 0.05, "gap at n=8000: {}", gaps[2]);
}

fn deviation_at_common_times(a: &Trajectory, b: &Trajectory) -> f64 {
    // b must refine a: compare states at the coarser run's times.
    let ratio = (a.delta / b.delta).round() as usize;
    a.states
        .iter()
        .zip(b.states.iter().step_by(ratio))
        .map(|(s, t)| (&s.x_hat - &t.x_hat).norm())
        .fold(0.0, f64::max)
}

#[test]
fn reference_tracking_is_first_order_in_delta() {
    let field = circular_scenario(10, 0.0, 0).analytic_field().unwrap();
    let run = |delta: f64| track_reference(&field, &cfg(0.3, 3.0, delta, 100)).unwrap();
    let coarse = run(0.04);
    let mid = run(0.02);
    let fine = run(0.01);
    let d1 = deviation_at_common_times(&coarse, &mid);
    let d2 = deviation_at_common_times(&mid, &fine);
    let ratio = d2 / d1;
    assert!(
        (0.3..=0.7).contains(&ratio),
        "first-order ratio out of band: {d1} vs {d2} (ratio {ratio})"
    );
}

#[test]
fn halving_delta_halves_deviation_from_fine_reference() {
    let field = circular_scenario(10, 0.0, 0).analytic_field().unwrap();
    let run = |delta: f64| track_reference(&field, &cfg(0.3, 3.0, delta, 100)).unwrap();
    let fine = run(0.004);
    let coarse_err = deviation_at_common_times(&run(0.04), &fine);
    let half_err = deviation_at_common_times(&run(0.02), &fine);
    let ratio = coarse_err / half_err;
    assert!(
        (1.6..=2.4).contains(&ratio),
        "expected ~2x error reduction, got {ratio}"
    );
}

#[test]
fn constant_field_covariance_matches_closed_form_to_euler_order() {
    // v = e1, Sigma = I, unit-measure domain: C(t) = t psi(e1) (I + e1 e1*).
    let domain = DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let v = DVector::from_vec(vec![1.0, 0.0]);
    let vv = v.clone();
    let field = AnalyticField {
        dim: 2,
        v: Arc::new(move |_| vv.clone()),
        v_prime: Arc::new(|_| DMatrix::zeros(2, 2)),
        v_second: Arc::new(|_| vec![DMatrix::zeros(2, 2); 2]),
        sigma: DMatrix::identity(2, 2),
        domain,
    };
    let delta = 0.001;
    let mut c = cfg(0.05, 0.5, delta, 100);
    c.x0 = DVector::from_vec(vec![0.2, 0.5]);
    let traj = track_reference(&field, &c).unwrap();
    let psi = kernel::psi_factor(&[1.0, 0.0]).unwrap();
    let last = traj.last();
    let expect = (DMatrix::identity(2, 2) + &v * v.transpose()) * (psi * last.t);
    // Forward Euler of a linear-in-t integrand is exact here, so the gap is
    // rounding only; keep an O(delta) envelope anyway.
    assert!(
        (&last.c_hat - &expect).norm() < 10.0 * delta,
        "C mismatch: {:?}",
        &last.c_hat - &expect
    );
}

#[test]
fn dense_noiseless_constant_design_tracks_exactly() {
    // Grid design, noiseless constant field: the smoothed field equals e1 up
    // to quadrature and edge-tail error, so Euler reproduces (k delta) e1.
    let domain = DomainBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    let m = 200;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for i in 0..m {
        for j in 0..m {
            points.push(-2.0 + 4.0 * (i as f64 + 0.5) / m as f64);
            points.push(-2.0 + 4.0 * (j as f64 + 0.5) / m as f64);
            values.push(1.0);
            values.push(0.0);
        }
    }
    let obs = fieldtrack_core::field::ObservationSet::from_flat(domain, points, values).unwrap();
    let cfg = TrackConfig {
        x0: DVector::from_vec(vec![0.0, 0.0]),
        t_horizon: 1.0,
        delta: 0.1,
        speed_floor: 0.05,
        sample_size_n: m * m,
        bandwidth: EstimatorConfig::new(0.15, 0.15, 0.0).unwrap(),
    };
    let traj = track_curve(&obs, &cfg).unwrap();
    for s in &traj.states {
        assert!(
            (s.x_hat[0] - s.k as f64 * 0.1).abs() < 1e-6,
            "state {}: {:?}",
            s.k,
            s.x_hat
        );
        assert!(s.x_hat[1].abs() < 1e-6);
    }
}

#[test]
fn psd_violation_is_flagged_not_repaired() {
    // A strongly contracting direction with a coarse step: the expanded
    // Euler update scales the contracted component by (1 - 2 delta s) < 0,
    // so C dips below PSD. The trajectory must carry the warning rather
    // than silently clip eigenvalues.
    let domain = DomainBox::new(vec![-50.0, -50.0], vec![50.0, 50.0]).unwrap();
    let s = 20.0;
    let field = AnalyticField {
        dim: 2,
        v: Arc::new(move |x: &[f64]| DVector::from_vec(vec![-s * (x[0] - 10.0), 1.0])),
        v_prime: Arc::new(move |_| DMatrix::from_row_slice(2, 2, &[-s, 0.0, 0.0, 0.0])),
        v_second: Arc::new(|_| vec![DMatrix::zeros(2, 2); 2]),
        sigma: DMatrix::identity(2, 2),
        domain,
    };
    let cfg = TrackConfig {
        x0: DVector::from_vec(vec![10.0, -40.0]),
        t_horizon: 2.0,
        delta: 0.2,
        speed_floor: 1e-9,
        sample_size_n: 10,
        bandwidth: EstimatorConfig::new(0.1, 0.1, 0.0).unwrap(),
    };
    let traj = track_reference(&field, &cfg).unwrap();
    let (step, min_eig) = traj.psd_warning.expect("expected a PSD warning");
    assert!(min_eig < 0.0);
    assert!(step > 0);
    // The stored matrices keep the negative eigenvalue (no silent clipping).
    let worst = traj
        .states
        .iter()
        .map(|s| fieldtrack_core::linalg::min_eigenvalue(&s.c_hat))
        .fold(f64::INFINITY, f64::min);
    assert!(worst < -1e-6, "expected an uncorrected violation, got {worst}");
}

#[test]
fn local_mise_variant_behaves_like_the_global_one() {
    let field = circular_scenario(10, 0.5, 0).analytic_field().unwrap();
    let c = cfg(0.3, 3.0, 0.01, 322);
    let reference = track_reference(&field, &c).unwrap();
    let a = DVector::from_vec(vec![0.0, 2.0]);
    let sel = fieldtrack_core::tracker::select_bandwidth_mise_local(&reference, &a, 322).unwrap();
    assert!(sel.beta_bar > 0.0 && sel.beta_bar.is_finite());
    // Same stationarity identity as the global selector.
    let direct = 1.0 * sel.a / (4.0 * sel.b);
    assert!((sel.beta_bar - direct).abs() < 1e-12);
    // Zero-bias reference (linear field) has B1 = 0: no finite minimizer.
    let lin = AnalyticField {
        dim: 2,
        v: Arc::new(|x: &[f64]| DVector::from_vec(x.to_vec())),
        v_prime: Arc::new(|_| DMatrix::identity(2, 2)),
        v_second: Arc::new(|_| vec![DMatrix::zeros(2, 2); 2]),
        sigma: DMatrix::identity(2, 2),
        domain: DomainBox::new(vec![-4.0, -4.0], vec![4.0, 4.0]).unwrap(),
    };
    let mut c2 = cfg(0.3, 1.0, 0.01, 100);
    c2.x0 = DVector::from_vec(vec![0.5, 0.5]);
    let ref2 = track_reference(&lin, &c2).unwrap();
    assert!(matches!(
        fieldtrack_core::tracker::select_bandwidth_mise_local(&ref2, &a, 100),
        Err(fieldtrack_core::Error::UnboundedBandwidth)
    ));
}

#[test]
fn mise_selection_from_reference_run_is_usable() {
    let field = circular_scenario(10, 0.5, 0).analytic_field().unwrap();
    let c = cfg(0.3, 3.0, 0.01, 322);
    let reference = track_reference(&field, &c).unwrap();
    let sel = select_bandwidth_mise(&reference, 322).unwrap();
    assert!(sel.beta_bar > 0.0 && sel.beta_bar.is_finite());
    assert!(sel.h_bar > 0.0 && sel.h_bar < 2.0);
    // The objective at beta_bar is no worse than at perturbed betas.
    let obj = |b: f64| {
        fieldtrack_core::tracker::mise_objective(sel.a, sel.b, 2, b)
    };
    assert!(obj(sel.beta_bar) <= obj(sel.beta_bar * 1.1) + 1e-12);
    assert!(obj(sel.beta_bar) <= obj(sel.beta_bar * 0.9) + 1e-12);
}

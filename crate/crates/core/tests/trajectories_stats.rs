//! Statistical invariants of the jump unraveling: unbiasedness against the
//! master solution with the expected 1/√N scaling, exponential waiting times,
//! telegraph pinning of the populations, and strict determinism.
//!
//! Everything here is seeded, so the assertions are reproducible; the
//! statistical margins are set several standard errors wide.

use qme_core::bases::{self, bloch_map, transform_state, Direction};
use qme_core::master;
use qme_core::models::{build_two_level, build_v_model, BathSpec, Model};
use qme_core::numkit::ComplexMatrix;
use qme_core::trajectories::{ensemble_average, observables_of, sample_trajectory};

fn bath() -> BathSpec {
    BathSpec::ohmic(0.02, 1.0).unwrap()
}

fn linear_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Max-over-grid worst-observable deviation between an ensemble mean and the
/// master solution.
fn ensemble_deviation(
    model: &Model,
    basis: Option<&bases::BasisTransform>,
    grid: &[f64],
    count: usize,
    seed: u64,
) -> f64 {
    let liou = master::assemble(model, basis).unwrap();
    let rho0 = liou.ground_state();
    let reference = master::evolve(&liou, &rho0, grid).unwrap();
    let ens = ensemble_average(model, basis, &model.ground_state(), grid, count, seed, 0).unwrap();
    let mut worst = 0.0_f64;
    for (mean, exact) in ens.mean_states.iter().zip(&reference) {
        for (a, b) in observables_of(mean).iter().zip(observables_of(exact)) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

#[test]
fn ensemble_error_scales_as_inverse_sqrt_n() {
    let grid: Vec<f64> = (1..=20).map(|i| 2.5 * i as f64).collect();
    let two = build_two_level(0.001, bath()).unwrap();
    let (dec, _) = bases::decoherence_basis(&two).unwrap();
    let v = build_v_model(1.0, 0.001, bath()).unwrap();
    let pm = bases::v_model_pm_basis();

    for (label, model, basis) in [
        ("two_level/decoherence", &two, Some(&dec)),
        ("v_model/pm", &v, Some(&pm)),
    ] {
        let mut points = Vec::new();
        for (i, &n) in [100usize, 500, 2000].iter().enumerate() {
            let err = ensemble_deviation(model, basis, &grid, n, 9000 + i as u64);
            points.push(((n as f64).ln(), err.ln()));
        }
        let slope = linear_slope(&points);
        assert!(
            (slope + 0.5).abs() <= 0.15,
            "{label}: log-log slope {slope:.3}, want −0.5 ± 0.15 (errors: {points:?})"
        );
    }
}

#[test]
fn waiting_times_are_exponential_with_rate_gamma() {
    // stationary-drift start: ground state in the decoherence basis; jumps
    // arrive at rate γ independent of the state
    let m = build_two_level(0.001, bath()).unwrap();
    let (dec, _) = bases::decoherence_basis(&m).unwrap();
    let gamma = m.params.gamma;

    // Keep only the first six gaps of each trajectory: the window holds
    // twenty mean waits, so the chance that the sixth jump misses it is
    // ~7e-5 and the truncation bias is far below the KS resolution. Using
    // every gap in the window would bias the sample short (the final,
    // censored gap preferentially swallows long waits).
    let mut waits: Vec<f64> = Vec::with_capacity(10_200);
    let mut stream = 0u64;
    while waits.len() < 10_000 {
        let rec =
            sample_trajectory(&m, Some(&dec), &m.ground_state(), &[1000.0], 314, stream).unwrap();
        let mut last = 0.0;
        for &(t, _) in rec.jumps.iter().take(6) {
            waits.push(t - last);
            last = t;
        }
        stream += 1;
    }

    // Kolmogorov–Smirnov against Exp(γ)
    waits.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = waits.len() as f64;
    let mut d = 0.0_f64;
    for (i, &w) in waits.iter().enumerate() {
        let cdf = 1.0 - (-gamma * w).exp();
        let hi = (i as f64 + 1.0) / n;
        let lo = i as f64 / n;
        d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    let lambda = n.sqrt() * d;
    let p: f64 = 2.0
        * (1..=100)
            .map(|k| {
                let k = k as f64;
                (-1.0_f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum::<f64>();
    assert!(p > 0.01, "KS p-value {p:.4} (D = {d:.5}, n = {n})");
}

#[test]
fn populations_stay_pinned_at_short_lags_and_decorrelate_at_tau1() {
    // trajectory-averaged autocorrelation of s_z in the decoherence basis:
    // ≥ 0.9 at lag τ₂, ≤ e⁻¹ + 0.1 at lag τ₁
    let m = build_two_level(0.001, bath()).unwrap();
    let (dec, _) = bases::decoherence_basis(&m).unwrap();
    let tau1 = 4.0 * m.params.gamma / (m.params.delta * m.params.delta);
    let tau2 = 1.0 / (2.0 * m.params.gamma);

    let up = transform_state(&ComplexMatrix::ketbra(2, 0, 0), &dec, Direction::Backward)
        .unwrap()
        .hermitize();
    let down = transform_state(&ComplexMatrix::ketbra(2, 1, 1), &dec, Direction::Backward)
        .unwrap()
        .hermitize();

    let count = 600;
    let grid = [tau2, tau1];
    let mut corr = [0.0_f64; 2];
    let results: Vec<[f64; 2]> = {
        use rayon::prelude::*;
        (0..count)
            .into_par_iter()
            .map(|i| {
                let (z0, rho0) = if i % 2 == 0 {
                    (1.0, &up)
                } else {
                    (-1.0, &down)
                };
                let rec = sample_trajectory(&m, Some(&dec), rho0, &grid, 2718, i as u64).unwrap();
                let s1 = bloch_map(&rec.states[0]).sz;
                let s2 = bloch_map(&rec.states[1]).sz;
                [z0 * s1, z0 * s2]
            })
            .collect()
    };
    for r in &results {
        corr[0] += r[0];
        corr[1] += r[1];
    }
    corr[0] /= count as f64;
    corr[1] /= count as f64;

    assert!(
        corr[0] >= 0.9,
        "C(τ₂) = {:.4}, populations must be pinned",
        corr[0]
    );
    let bound = (-1.0_f64).exp() + 0.1;
    assert!(
        corr[1] <= bound,
        "C(τ₁) = {:.4}, must have decayed below {bound:.4}",
        corr[1]
    );
    // and it should still be positive, well above pure noise
    assert!(
        corr[1] > 0.2,
        "C(τ₁) = {:.4} fell too far for e⁻¹ decay",
        corr[1]
    );
}

#[test]
fn jump_logs_are_bit_identical_across_runs_and_worker_counts() {
    let m = build_v_model(1.0, 0.001, bath()).unwrap();
    let pm = bases::v_model_pm_basis();
    let grid = [50.0, 150.0];

    let collect = |workers: usize| -> Vec<Vec<(f64, usize)>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        pool.install(|| {
            use rayon::prelude::*;
            (0..16u64)
                .into_par_iter()
                .map(|stream| {
                    sample_trajectory(&m, Some(&pm), &m.ground_state(), &grid, 77, stream)
                        .unwrap()
                        .jumps
                })
                .collect()
        })
    };

    let a = collect(1);
    let b = collect(2);
    let c = collect(1);
    assert_eq!(a, b, "jump logs must not depend on the worker count");
    assert_eq!(a, c, "jump logs must be reproducible across runs");
}

#[test]
fn v_model_minus_state_fills_only_through_rabi_flow() {
    // between jumps, population reaches |−⟩ only via the coherent tunnelling
    // out of |+⟩: right after a down-jump the conditioned state is exactly
    // |1⟩⟨1| with no |−⟩ weight
    let m = build_v_model(1.0, 0.001, bath()).unwrap();
    let pm = bases::v_model_pm_basis();
    let grid: Vec<f64> = (1..=400).map(|i| 0.5 * i as f64).collect();
    let rec = sample_trajectory(&m, Some(&pm), &m.ground_state(), &grid, 11, 2).unwrap();
    assert!(
        !rec.jumps.is_empty(),
        "expected jumps on a 200-time-unit window"
    );

    let mut max_mm: f64 = 0.0;
    for rho in &rec.states {
        max_mm = max_mm.max(rho[(2, 2)].re);
    }
    // ρ−− stays tiny on a single trajectory at these parameters: Rabi flow is
    // interrupted by jumps long before a period completes
    assert!(
        max_mm < 0.05,
        "ρ−− grew to {max_mm:.4} on a single trajectory"
    );
    assert!(max_mm > 0.0, "some population must leak into |−⟩");
}

#[test]
fn reported_standard_errors_scale_as_inverse_sqrt_n() {
    let m = build_two_level(0.001, bath()).unwrap();
    let (dec, _) = bases::decoherence_basis(&m).unwrap();
    let grid: Vec<f64> = (1..=10).map(|i| 10.0 * i as f64).collect();
    let small = ensemble_average(&m, Some(&dec), &m.ground_state(), &grid, 128, 551, 0).unwrap();
    let large = ensemble_average(&m, Some(&dec), &m.ground_state(), &grid, 512, 552, 0).unwrap();

    // median SE ratio over grid points and observables, where both are resolved
    let mut ratios: Vec<f64> = Vec::new();
    for g in 0..grid.len() {
        for o in 0..small.observable_names.len() {
            let (s, l) = (small.std_error[g][o], large.std_error[g][o]);
            if s > 1e-6 && l > 1e-6 {
                ratios.push(s / l);
            }
        }
    }
    assert!(ratios.len() > 10, "not enough resolved observables");
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = ratios[ratios.len() / 2];
    // quadrupling the count should halve the standard error
    assert!(
        (median - 2.0).abs() < 0.5,
        "median SE ratio for 128 vs 512 trajectories: {median:.3}, want ≈ 2"
    );
}

mod common;

use rand_distr::{Distribution, StandardNormal};
use sighedge_core::hedger::pnl_of_positions;
use sighedge_core::market::{
    bs_put_price, delta_hedge_positions, norm_cdf, payoffs, simulate_gbm_streams,
};
use sighedge_core::{bs_delta, bs_price, delta_hedge_pnl, simulate_gbm, GbmSpec, PayoffSpec};

const TAU: f64 = 30.0 / 365.0;

#[test]
fn driftless_gbm_is_a_martingale() {
    let spec = GbmSpec {
        seed: 7,
        steps: 4,
        ..GbmSpec::default()
    };
    let paths = simulate_gbm(&spec, 10_000).unwrap();
    let terminal: Vec<f64> = paths.iter().map(|p| p.value(p.steps(), 0)).collect();
    let n = terminal.len() as f64;
    let mean = terminal.iter().sum::<f64>() / n;
    let var = terminal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 1.0).abs() <= 3.0 * (var / n).sqrt());
    assert!(paths.iter().all(|p| p.values().iter().all(|v| *v > 0.0)));
}

#[test]
fn streams_are_independent_of_batching() {
    let spec = GbmSpec::default();
    let all = simulate_gbm(&spec, 8).unwrap();
    let tail = simulate_gbm_streams(&spec, 5, 3).unwrap();
    assert_eq!(&all[5..], &tail[..]);
    assert_ne!(all[0], all[1]);
}

#[test]
fn call_price_matches_monte_carlo() {
    let (s, k, sigma) = (1.0, 1.0, 0.2);
    let closed = bs_price(s, k, sigma, TAU).unwrap();
    let mut rng = common::rng(2024);
    let n = 1_000_000;
    let vol = sigma * TAU.sqrt();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let st = s * (-0.5 * vol * vol + vol * z).exp();
        let pay = (st - k).max(0.0);
        sum += pay;
        sum_sq += pay * pay;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
    assert!((mean - closed).abs() <= 3.0 * (var / n as f64).sqrt());
}

#[test]
fn delta_matches_finite_difference() {
    let h = 1e-4;
    for &(s, k, sigma, tau) in &[
        (1.0, 1.0, 0.2, TAU),
        (1.1, 1.0, 0.3, 0.5),
        (0.8, 1.0, 0.25, 1.0),
        (1.0, 0.9, 0.2, 0.01),
    ] {
        let fd = (bs_price(s + h, k, sigma, tau).unwrap() - bs_price(s - h, k, sigma, tau).unwrap()) / (2.0 * h);
        assert!((fd - bs_delta(s, k, sigma, tau).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn price_is_convex_and_nondecreasing_in_spot() {
    let spots: Vec<f64> = (1..200).map(|i| 0.5 + i as f64 * 0.005).collect();
    let prices: Vec<f64> = spots.iter().map(|s| bs_price(*s, 1.0, 0.2, TAU).unwrap()).collect();
    for w in prices.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for w in prices.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-15);
    }
}

#[test]
fn closed_form_limits() {
    assert!((bs_price(1.2, 1.0, 0.2, 0.0).unwrap() - 0.2).abs() < 1e-15);
    assert!((bs_price(1.2, 1.0, 1e-12, 1.0).unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(bs_delta(1.2, 1.0, 0.0, 1.0).unwrap(), 1.0);
    assert_eq!(bs_delta(0.8, 1.0, 0.0, 1.0).unwrap(), 0.0);
    assert_eq!(bs_delta(1.0, 1.0, 0.2, 0.0).unwrap(), 0.5);
    let call = bs_price(1.05, 1.0, 0.2, 0.3).unwrap();
    let put = bs_put_price(1.05, 1.0, 0.2, 0.3).unwrap();
    assert!((call - put - 0.05).abs() < 1e-15);
    assert!((norm_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-12);
}

#[test]
fn delta_hedge_mean_is_near_zero() {
    let spec = GbmSpec {
        seed: 3,
        ..GbmSpec::default()
    };
    let paths = simulate_gbm(&spec, 500).unwrap();
    let report = delta_hedge_pnl(&PayoffSpec::call(1.0), &paths, 0.2).unwrap();
    assert!(report.mean.abs() <= 3.0 * report.std / (report.len() as f64).sqrt());
    let puts = delta_hedge_pnl(&PayoffSpec::put(1.0), &paths, 0.2).unwrap();
    assert!(puts.mean.abs() <= 3.0 * puts.std / (puts.len() as f64).sqrt());
}

#[test]
fn riskless_market_hedges_exactly() {
    let spec = GbmSpec {
        sigma: 0.0,
        ..GbmSpec::default()
    };
    let paths = simulate_gbm(&spec, 3).unwrap();
    let report = delta_hedge_pnl(&PayoffSpec::call(1.0), &paths, 0.0).unwrap();
    assert!(report.pnls().iter().all(|v| *v == 0.0));
}

#[test]
fn discrete_hedging_error_scales_with_rebalancing() {
    let coarse = GbmSpec {
        seed: 11,
        ..GbmSpec::default()
    };
    let fine = GbmSpec {
        steps: 2000,
        ..coarse.clone()
    };
    let call = PayoffSpec::call(1.0);
    let std_coarse = delta_hedge_pnl(&call, &simulate_gbm(&coarse, 200).unwrap(), 0.2).unwrap().std;
    let std_fine = delta_hedge_pnl(&call, &simulate_gbm(&fine, 200).unwrap(), 0.2).unwrap().std;
    let expected = (2000.0f64 / 120.0).sqrt();
    let ratio = std_coarse / std_fine;
    assert!(ratio > expected / 1.5 && ratio < expected * 1.5, "ratio {ratio}");
}

#[test]
fn injected_delta_positions_reproduce_direct_formula() {
    let spec = GbmSpec::default();
    let p = &simulate_gbm(&spec, 1).unwrap()[0];
    let call = PayoffSpec::call(1.0);
    let traj = delta_hedge_positions(&call, p, 0.2).unwrap();
    let pay = payoffs(&call, std::slice::from_ref(p)).unwrap()[0];
    let pi0 = bs_price(1.0, 1.0, 0.2, TAU).unwrap();
    let mut direct = pay - pi0;
    for i in 0..p.steps() {
        let tau = TAU - p.times()[i];
        direct -= bs_delta(p.value(i, 0), 1.0, 0.2, tau).unwrap() * (p.value(i + 1, 0) - p.value(i, 0));
    }
    let got = pnl_of_positions(&traj, p, pay, pi0).unwrap();
    assert!(got.is_finite());
    assert!((got - direct).abs() < 1e-15);
}

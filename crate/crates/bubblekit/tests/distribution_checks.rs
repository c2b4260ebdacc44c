//! Distributional cross-checks between the samplers, the closed-form
//! densities and the stationary law.

mod common;

use bubblekit::analytics::cir_transition_pdf;
use bubblekit::model::{PriceContext, YieldParams};
use bubblekit::quad::integrate_positive_density;
use bubblekit::sde::{simulate_ensemble, Scheme, SimSpec, YieldModel};
use rand::SeedableRng;
use rand_distr::Distribution;

fn fig_params(psi: f64) -> YieldParams {
    YieldParams::from_mean_reversion(0.005, 0.01, psi).unwrap()
}

#[test]
fn exact_and_euler_samplers_agree_in_distribution() {
    // two-sample KS on the horizon-T marginals, dt = 1/2520
    let params = fig_params(0.003);
    let t: f64 = 1.0;
    let dt = 1.0 / 2520.0;
    let spec_euler = SimSpec {
        model: YieldModel::cir(&params),
        x0: 0.05,
        n_steps: (t / dt).round() as usize,
        dt,
        seed: 11,
        scheme: Scheme::EulerFullTruncation,
    };
    let spec_exact = SimSpec {
        scheme: Scheme::ExactCir,
        seed: 12,
        ..spec_euler.clone()
    };
    let n = 10_000;
    let euler: Vec<f64> = simulate_ensemble(&spec_euler, n)
        .unwrap()
        .iter()
        .map(|p| p.last())
        .collect();
    let exact: Vec<f64> = simulate_ensemble(&spec_exact, n)
        .unwrap()
        .iter()
        .map(|p| p.last())
        .collect();
    let d = common::ks_two_sample(&euler, &exact);
    let crit = common::ks_critical(0.01, n, n);
    assert!(
        d < crit,
        "KS statistic {d} exceeds the 1% critical value {crit}"
    );
}

#[test]
fn exact_sampler_matches_closed_form_density() {
    // histogram CDF of one-step exact transitions vs the integral of the
    // closed-form transition density (one-sample KS against the analytic CDF
    // evaluated by quadrature)
    let params = fig_params(0.004);
    let g0 = 0.03;
    let t = 2.0;
    let spec = SimSpec {
        model: YieldModel::cir(&params),
        x0: g0,
        n_steps: 1,
        dt: t,
        seed: 5,
        scheme: Scheme::ExactCir,
    };
    let n = 10_000;
    let mut draws: Vec<f64> = simulate_ensemble(&spec, n)
        .unwrap()
        .iter()
        .map(|p| p.last())
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // analytic CDF at the empirical quantiles via quadrature of the density
    let cdf = |g: f64| -> f64 {
        integrate_positive_density(
            |y| {
                if y <= g {
                    cir_transition_pdf(y, t, g0, &params).unwrap()
                } else {
                    0.0
                }
            },
            g0.min(g),
            1e-8,
        )
    };
    // one-sample KS on a grid of quantiles (full scan would be wasteful)
    let mut d_max: f64 = 0.0;
    for k in 1..40 {
        let idx = k * n / 40;
        let x = draws[idx];
        let empirical = idx as f64 / n as f64;
        let analytic = cdf(x);
        d_max = d_max.max((empirical - analytic).abs());
    }
    // one-sample KS 1% critical value ~ 1.63 / sqrt(n)
    let crit = 1.63 / (n as f64).sqrt();
    assert!(d_max < crit, "KS {d_max} vs critical {crit}");
}

#[test]
fn euler_weak_convergence_halving_dt() {
    // halving dt moves the horizon-T mean by less than the MC error
    let params = fig_params(0.004);
    let t: f64 = 2.0;
    let n_paths = 100_000;
    let mut means = Vec::new();
    let mut ses = Vec::new();
    for dt in [1.0 / 126.0, 1.0 / 252.0] {
        let spec = SimSpec {
            model: YieldModel::cir(&params),
            x0: 0.05,
            n_steps: (t / dt).round() as usize,
            dt,
            seed: 77,
            scheme: Scheme::EulerFullTruncation,
        };
        let finals: Vec<f64> = simulate_ensemble(&spec, n_paths)
            .unwrap()
            .iter()
            .map(|p| p.last())
            .collect();
        means.push(common::mean(&finals));
        ses.push(common::standard_error(&finals));
    }
    let gap = (means[0] - means[1]).abs();
    let budget = 3.0 * (ses[0] * ses[0] + ses[1] * ses[1]).sqrt();
    assert!(
        gap < budget,
        "dt-halving moved the mean by {gap}, budget {budget}"
    );
}

#[test]
fn stationary_tail_exponent_recovered_by_hill() {
    // 1e6 draws from the inverse-gamma stationary law; the Hill estimator on
    // the top 1% recovers mu* within 5%
    let params = fig_params(0.009);
    let ctx = PriceContext::from_initial_price(0.1, 2.0).unwrap();
    let mu_star = ctx.mu_star(&params);
    let h = ctx.h_threshold(&params);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
    let gamma = rand_distr::Gamma::new(mu_star, 1.0 / h).unwrap();
    let samples: Vec<f64> = (0..1_000_000)
        .map(|_| 1.0 / gamma.sample(&mut rng))
        .collect();
    let hill = common::hill_tail_exponent(&samples, 10_000);
    assert!(
        (hill / mu_star - 1.0).abs() < 0.05,
        "Hill estimate {hill} vs mu* {mu_star}"
    );
}

#[test]
fn monte_carlo_mean_tracks_price_anchor() {
    // price paths derived from simulated yields average near E/gamma at the
    // horizon (sanity link between sde and the duality)
    let params = fig_params(0.001);
    let spec = SimSpec {
        model: YieldModel::cir(&params),
        x0: 0.05,
        n_steps: 100,
        dt: 1.0,
        seed: 3,
        scheme: Scheme::ExactCir,
    };
    let paths = simulate_ensemble(&spec, 20_000).unwrap();
    let prices: Vec<f64> = paths
        .iter()
        .map(|p| bubblekit::sde::price_path(p, 0.1).unwrap().series.last())
        .collect();
    let mean_price = common::mean(&prices);
    // at mu* = 100 the price concentrates; mean within a few percent of
    // E / E(gamma_t)
    let mean_yield = 0.01 + (0.05 - 0.01) * (-0.005_f64 * 100.0).exp();
    let anchor = 0.1 / mean_yield;
    assert!(
        (mean_price / anchor - 1.0).abs() < 0.05,
        "mean price {mean_price} vs anchor {anchor}"
    );
}

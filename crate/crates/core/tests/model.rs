mod common;

use approx::assert_abs_diff_eq;
use balance_core::distributions::{
    draw_probability, match_outcome_probs, pair_points_joint_pmf, skellam_pmf, solve_lambda0,
};
use balance_core::indices::{gbi_from_counts, gbi_index, lrt_statistic, mle_lambda};
use balance_core::league::{aggregate, point_shares, standings};
use balance_core::montecarlo::{factorial, null_statistics, permutation_rank, simulate_season};
use balance_core::specfun::multinomial_gof;
use balance_core::{GoalRates, MatchRecord, RngState, SeasonData, TeamId};
use common::bessel_series;
use proptest::prelude::*;

#[test]
fn draw_probability_matches_series() {
    for lambda in [0.05f64, 0.5, 0.88, 1.0, 1.42, 2.5, 6.0] {
        let want = (-2.0 * lambda).exp() * bessel_series(0, 2.0 * lambda, 120);
        assert_abs_diff_eq!(draw_probability(lambda).unwrap(), want, epsilon = 1e-14);
        assert_abs_diff_eq!(skellam_pmf(0, lambda).unwrap(), want, epsilon = 1e-14);
    }
    assert_abs_diff_eq!(draw_probability(1.0).unwrap(), 0.308_508_3, epsilon = 1e-7);
}

#[test]
fn draw_curve_direct_sum() {
    // P(X = Y) summed over the Poisson pmf directly.
    for lambda in [0.3f64, 1.21, 1.59, 3.0] {
        let mut p = (-lambda).exp();
        let mut sum = 0.0;
        for k in 0..200 {
            sum += p * p;
            p *= lambda / f64::from(k + 1);
        }
        assert_abs_diff_eq!(draw_probability(lambda).unwrap(), sum, epsilon = 1e-14);
    }
}

#[test]
fn outcome_probs_at_lambda0_are_thirds() {
    let l0 = solve_lambda0();
    let o = match_outcome_probs(l0, l0).unwrap();
    for p in [o.home_win, o.draw, o.away_win] {
        assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-9);
    }
    let pp = pair_points_joint_pmf(l0).unwrap();
    assert_abs_diff_eq!(pp.probability(6, 0), 1.0 / 9.0, epsilon = 1e-9);
    assert_abs_diff_eq!(pp.probability(4, 1), 2.0 / 9.0, epsilon = 1e-9);
    assert_abs_diff_eq!(pp.probability(3, 3), 2.0 / 9.0, epsilon = 1e-9);
    assert_abs_diff_eq!(pp.probability(2, 2), 1.0 / 9.0, epsilon = 1e-9);
}

#[test]
fn team_season_goals_are_poisson() {
    // A team's season total over 2(n-1) matches is Poisson(2λ(n-1)).
    let (n, lambda, seasons) = (6usize, 0.88, 4000);
    let rate = 2.0 * lambda * (n - 1) as f64;
    let cap = 22usize;
    let mut counts = vec![0u64; cap + 1];
    for s in 0..seasons {
        let season = simulate_season(n, &GoalRates::Constant(lambda), &mut RngState::new(11, s)).unwrap();
        for a in aggregate(&season) {
            counts[(a.goals_scored as usize).min(cap)] += 1;
        }
    }
    let mut probs = Vec::new();
    let mut p = (-rate).exp();
    for k in 0..cap {
        probs.push(p);
        p *= rate / (k + 1) as f64;
    }
    probs.push(1.0 - probs.iter().sum::<f64>());
    // pool the sparse lower tail into its neighbour
    probs[2] += probs[0] + probs[1];
    counts[2] += counts[0] + counts[1];
    let gof = multinomial_gof(&counts[2..], &probs[2..]).unwrap();
    assert!(gof.p_value > 1e-3, "{gof:?}");
}

#[test]
fn goalless_standings_are_uniform_permutations() {
    let n = 4;
    let teams = (0..n).map(|i| format!("T{i}")).collect();
    let matches = (0..n)
        .flat_map(|h| (0..n).filter(move |&a| a != h).map(move |a| (h, a)))
        .map(|(h, a)| MatchRecord::new(TeamId(h), TeamId(a), 0, 0).unwrap())
        .collect();
    let season = SeasonData::new(teams, matches).unwrap();
    let cells = factorial(n);
    let mut counts = vec![0u64; cells];
    let mut rng = RngState::new(5, 0);
    for _ in 0..10_000 {
        let order: Vec<usize> = standings(&season, &mut rng).order().into_iter().map(|t| t.0).collect();
        counts[permutation_rank(&order)] += 1;
    }
    let gof = multinomial_gof(&counts, &vec![1.0 / cells as f64; cells]).unwrap();
    assert!(gof.p_value > 1e-3, "{gof:?}");
}

#[test]
fn season_mean_goals_within_band() {
    let season = simulate_season(20, &GoalRates::Constant(1.42), &mut RngState::new(2021, 0)).unwrap();
    let band = 3.0 * (1.42f64 / 760.0).sqrt();
    assert!((mle_lambda(&season) - 1.42).abs() < band);
}

#[test]
fn mean_gbi_near_one_under_null() {
    let draws = null_statistics(20, solve_lambda0(), 1000, 17).unwrap();
    let gbi: Vec<f64> = draws.iter().map(|d| d.gbi_statistic / 759.0).collect();
    let mean = gbi.iter().sum::<f64>() / gbi.len() as f64;
    let var = gbi.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gbi.len() - 1) as f64;
    let se = (var / gbi.len() as f64).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

/// `E[2(X ln(X/λ) - (X - λ))]` for `X ~ Poisson(λ)`, by direct summation.
fn expected_unit_deviance(lambda: f64) -> f64 {
    let mut p = (-lambda).exp();
    let mut e = 2.0 * lambda * p;
    for x in 1..400 {
        p *= lambda / f64::from(x);
        let x = f64::from(x);
        e += p * 2.0 * (x * (x / lambda).ln() - (x - lambda));
    }
    e
}

#[test]
fn lrt_calibration_under_null() {
    // The likelihood ratio exceeds the quadratic form at low scoring rates;
    // its mean per observation is the expected Poisson unit deviance.
    for (lambda, seed) in [(0.88, 3), (1.42, 4), (12.0, 5)] {
        let draws = null_statistics(20, lambda, 400, seed).unwrap();
        let per_obs: Vec<f64> = draws.iter().map(|d| d.lrt_statistic / 760.0).collect();
        let m = per_obs.len() as f64;
        let mean = per_obs.iter().sum::<f64>() / m;
        let sd = (per_obs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let want = expected_unit_deviance(lambda);
        assert!((mean - want).abs() < 3.0 * sd / m.sqrt() + 0.002, "λ={lambda}: {mean} vs {want}");
        let gap: f64 = draws.iter().map(|d| (d.lrt_statistic - d.gbi_statistic) / 759.0).sum::<f64>() / m;
        if lambda > 10.0 {
            assert!(gap.abs() < 0.05, "λ={lambda}: gap {gap}");
        } else {
            assert!(gap > 0.05, "λ={lambda}: gap {gap}");
        }
    }
}

fn arb_season() -> impl Strategy<Value = SeasonData> {
    (2usize..7).prop_flat_map(|n| {
        prop::collection::vec((0u32..4, 0u32..4), n * (n - 1)).prop_map(move |goals| {
            let teams = (0..n).map(|i| format!("T{i}")).collect();
            let pairs = (0..n).flat_map(|h| (0..n).filter(move |&a| a != h).map(move |a| (h, a)));
            let matches = pairs
                .zip(goals)
                .map(|((h, a), (hg, ag))| MatchRecord::new(TeamId(h), TeamId(a), hg, ag).unwrap())
                .collect();
            SeasonData::new(teams, matches).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn standings_are_a_consistent_total_order(season in arb_season(), seed in any::<u64>()) {
        let table = standings(&season, &mut RngState::new(seed, 0));
        let mut order: Vec<usize> = table.order().into_iter().map(|t| t.0).collect();
        for w in table.entries.windows(2) {
            let (a, b) = (&w[0].aggregate, &w[1].aggregate);
            prop_assert!((a.points, a.goal_difference, a.goals_scored) >= (b.points, b.goal_difference, b.goals_scored));
        }
        prop_assert_eq!(table.tie_resolution_log.len(), season.team_count() - 1);
        order.sort();
        prop_assert_eq!(order, (0..season.team_count()).collect::<Vec<_>>());
    }

    #[test]
    fn standings_ignore_fixture_order(season in arb_season(), seed in any::<u64>()) {
        let mut reversed = season.matches().to_vec();
        reversed.reverse();
        let rebuilt = SeasonData::new(season.teams().to_vec(), reversed).unwrap();
        prop_assert_eq!(
            standings(&season, &mut RngState::new(seed, 0)),
            standings(&rebuilt, &mut RngState::new(seed, 0))
        );
    }

    #[test]
    fn point_shares_sum_to_one(season in arb_season()) {
        let shares = point_shares(&aggregate(&season)).unwrap();
        prop_assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gbi_scales_linearly(season in arb_season(), c in 1u32..6) {
        if let Ok(g) = gbi_index(&season) {
            let scaled = gbi_from_counts(season.goal_counts().map(|x| f64::from(c * x))).unwrap();
            prop_assert!((scaled - f64::from(c) * g).abs() <= 1e-12 * scaled.abs().max(1.0));
            prop_assert!(lrt_statistic(&season).unwrap() >= -1e-12);
        }
    }
}

mod common;

use approx::assert_relative_eq;
use balance_core::specfun::{
    bessel_i, chi_squared_sf, multinomial_gof, poisson_sample, scaled_bessel_i, scaled_bessel_i0, RngState,
};
use common::{bessel_series, chi_squared_sf_quadrature};
use proptest::prelude::*;

#[test]
fn bessel_matches_series_oracle() {
    for order in 0..6 {
        for x in [0.01, 0.5, 1.0, 2.0, 2.84, 5.0, 10.0, 25.0] {
            let want = bessel_series(order, x, 120);
            assert_relative_eq!(bessel_i(order, x).unwrap(), want, max_relative = 1e-14);
        }
    }
    // x = 50 needs more terms than the oracle default
    assert_relative_eq!(bessel_i(0, 50.0).unwrap(), bessel_series(0, 50.0, 200), max_relative = 1e-14);
}

#[test]
fn bessel_frozen_values() {
    assert_relative_eq!(bessel_i(0, 2.0).unwrap(), 2.279_585_302_336_067, max_relative = 1e-14);
    assert_relative_eq!(scaled_bessel_i0(2.0).unwrap(), 0.308_508_322_553_671, max_relative = 1e-14);
    assert_relative_eq!(bessel_i(0, 1.0).unwrap(), 1.266_065_877_752_008_4, max_relative = 1e-14);
    assert_relative_eq!(bessel_i(1, 1.0).unwrap(), 0.565_159_103_992_485, max_relative = 1e-14);
}

#[test]
fn chi_squared_matches_quadrature_oracle() {
    let cases: &[(f64, u32)] = &[
        (2.0, 3),
        (10.0, 1),
        (3.0, 1),
        (0.5, 2),
        (1.0, 5),
        (50.0, 30),
        (759.0, 759),
        (700.0, 759),
        (800.0, 759),
        (1900.0, 2000),
        (2000.0, 2000),
        (2100.0, 2000),
        (0.1, 80),
    ];
    for &(x, k) in cases {
        let got = chi_squared_sf(x, k).unwrap();
        let want = chi_squared_sf_quadrature(x, k);
        assert!((got - want).abs() < 1e-12, "sf({x}, {k}): {got} vs oracle {want}");
    }
}

#[test]
fn chi_squared_frozen_values() {
    // closed forms: df 1 is erfc(√(x/2)), df 2 is e^{-x/2}
    assert!((chi_squared_sf(2.0, 3).unwrap() - 0.572_406_704_470_879_8).abs() < 1e-12);
    assert!((chi_squared_sf(10.0, 1).unwrap() - 0.001_565_402_258_002_548_8).abs() < 1e-12);
    assert!((chi_squared_sf(0.5, 2).unwrap() - (-0.25f64).exp()).abs() < 1e-15);
    assert_eq!(chi_squared_sf(0.0, 5).unwrap(), 1.0);
    let median = chi_squared_sf(759.0, 759).unwrap();
    assert!(median > 0.45 && median < 0.55);
}

#[test]
fn poisson_sampler_goodness_of_fit() {
    for (i, lambda) in [0.5, 0.88, 1.42, 3.0].into_iter().enumerate() {
        let mut rng = RngState::new(99, i as u64);
        let draws = 200_000;
        let cap = (lambda + 6.0 * f64::sqrt(lambda)).ceil() as usize;
        let mut counts = vec![0u64; cap + 1];
        for _ in 0..draws {
            let x = poisson_sample(&mut rng, lambda).unwrap() as usize;
            counts[x.min(cap)] += 1;
        }
        let mut probs = Vec::with_capacity(cap + 1);
        let mut p = (-lambda).exp();
        for k in 0..cap {
            probs.push(p);
            p *= lambda / (k + 1) as f64;
        }
        probs.push(1.0 - probs.iter().sum::<f64>());
        // merge sparse upper cells
        while probs.last().unwrap() * (draws as f64) < 5.0 {
            let p = probs.pop().unwrap();
            *probs.last_mut().unwrap() += p;
            let c = counts.pop().unwrap();
            *counts.last_mut().unwrap() += c;
        }
        let gof = multinomial_gof(&counts, &probs).unwrap();
        assert!(gof.p_value > 1e-3, "λ={lambda}: {gof:?}");
    }
}

proptest! {
    #[test]
    fn sf_is_monotone_in_x(df in 1u32..2000, a in 0.0f64..4000.0, b in 0.0f64..4000.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = chi_squared_sf(lo, df).unwrap();
        let s_hi = chi_squared_sf(hi, df).unwrap();
        prop_assert!(s_hi <= s_lo + 1e-15);
        prop_assert!((0.0..=1.0).contains(&s_lo));
    }

    #[test]
    fn scaled_bessel_consistent(order in 0u32..8, x in 0.0f64..50.0) {
        let direct = bessel_i(order, x).unwrap() * (-x).exp();
        let scaled = scaled_bessel_i(order, x).unwrap();
        prop_assert!((direct - scaled).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-300,
            "{} vs {}", direct, scaled);
        if order == 0 {
            prop_assert!((scaled_bessel_i0(x).unwrap() - direct).abs() < 1e-12);
        }
    }
}

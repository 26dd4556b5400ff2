//! Reference computations shared by the integration tests. Each one is
//! written without calling into the library so it can serve as an oracle.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `I_ν(x)` summed term by term for a fixed number of terms.
pub fn bessel_series(order: u32, x: f64, terms: usize) -> f64 {
    let half = x / 2.0;
    let mut term = (1..=order).fold(1.0, |acc, k| acc * half / f64::from(k));
    let mut sum = 0.0;
    for k in 0..terms {
        sum += term;
        let k = k as f64;
        term *= half * half / ((k + 1.0) * (k + 1.0 + f64::from(order)));
    }
    sum
}

fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

/// `P(χ²_k > x)` by composite Simpson quadrature. After `t = u²` the density
/// is proportional to `u^{k-1} e^{-u²/2}`; the tail integral is divided by
/// the full integral, so no normalizing constant is needed. The exponent is
/// taken relative to its value at the mode to keep it small.
pub fn chi_squared_sf_quadrature(x: f64, k: u32) -> f64 {
    let km1 = f64::from(k) - 1.0;
    let u0 = km1.sqrt().max(1.0);
    let f = |u: f64| {
        if u == 0.0 {
            if k == 1 { (0.5 * u0 * u0).exp() } else { 0.0 }
        } else {
            (km1 * (u / u0).ln() - 0.5 * (u * u - u0 * u0)).exp()
        }
    };
    let hi = x.sqrt().max(u0) + 16.0;
    let tail = simpson(f, x.sqrt(), hi, 40_000);
    let total = simpson(f, 0.0, hi, 80_000);
    tail / total
}

/// Simple 64-bit LCG for generating deterministic test designs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64().max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// Least squares via the normal equations and Gauss–Jordan elimination with
/// partial pivoting. Returns the coefficient vector.
pub fn normal_equations_ols(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != c {
                let factor = a[r][c];
                if factor != 0.0 {
                    for j in 0..=p {
                        a[r][j] -= factor * a[c][j];
                    }
                }
            }
        }
    }
    a.iter().map(|r| r[p]).collect()
}

/// Dummy-variable regression `R ~ league dummies + t + cb`, no global
/// intercept. Returns `(β, γ, α_1..α_L)`.
pub fn dummy_ols(leagues: &[usize], t: &[f64], cb: &[f64], y: &[f64], league_count: usize) -> (f64, f64, Vec<f64>) {
    let x: Vec<Vec<f64>> = leagues
        .iter()
        .zip(t.iter().zip(cb))
        .map(|(&l, (&ti, &ci))| {
            let mut row = vec![0.0; league_count + 2];
            row[l] = 1.0;
            row[league_count] = ti;
            row[league_count + 1] = ci;
            row
        })
        .collect();
    let b = normal_equations_ols(&x, y);
    (b[league_count], b[league_count + 1], b[..league_count].to_vec())
}

/// Parameters of a synthetic revenue panel
/// `R = α_l + β t + γ cb + ε`, `α_l = α₀ + σ_α z_l`, `ε ~ N(0, σ²)`.
#[derive(Clone, Copy, Debug)]
pub struct PanelDesign {
    pub leagues: usize,
    pub periods: usize,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub sigma_alpha: f64,
    /// Correlation-inducing loading of `cb` on the league effect; 0 makes
    /// the random-effects model true.
    pub cb_on_alpha: f64,
}

impl PanelDesign {
    pub const CALIBRATION: Self = Self {
        leagues: 5,
        periods: 10,
        beta: 0.2,
        gamma: -1.5,
        sigma: 0.4,
        sigma_alpha: 1.0,
        cb_on_alpha: 0.0,
    };

    pub fn draw(&self, rng: &mut Lcg) -> balance_core::PanelDataset {
        let mut rows = Vec::with_capacity(self.leagues * self.periods);
        for l in 0..self.leagues {
            let z = rng.normal();
            let alpha = 2.0 + self.sigma_alpha * z;
            for t in 1..=self.periods {
                let cb = 1.0 + 0.3 * rng.normal() + self.cb_on_alpha * z;
                rows.push(balance_core::PanelRow {
                    league: format!("L{l}"),
                    season: format!("{}-{:02}", 1999 + t, t % 100),
                    t,
                    revenue: alpha + self.beta * t as f64 + self.gamma * cb + self.sigma * rng.normal(),
                    cb,
                });
            }
        }
        balance_core::PanelDataset::new(rows).unwrap()
    }
}

/// Dummy-OLS fit of a dataset through [`dummy_ols`].
pub fn dummy_ols_fit(data: &balance_core::PanelDataset) -> (f64, f64, Vec<f64>) {
    let leagues = data.leagues();
    let idx: Vec<usize> = data
        .rows()
        .iter()
        .map(|r| leagues.iter().position(|l| *l == r.league).unwrap())
        .collect();
    let t: Vec<f64> = data.rows().iter().map(|r| r.t as f64).collect();
    let cb: Vec<f64> = data.rows().iter().map(|r| r.cb).collect();
    let y: Vec<f64> = data.rows().iter().map(|r| r.revenue).collect();
    dummy_ols(&idx, &t, &cb, &y, leagues.len())
}

/// Mean and standard error of a sample.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

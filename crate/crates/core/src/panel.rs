//! Revenue panels: `R_lt = α_l + β t + γ CB_lt + ε_lt`.
//!
//! Fixed effects are estimated by the within transformation and reported in
//! dummy-coded form (one intercept per league). Random effects use the
//! Swamy–Arora variance components and quasi-demeaning. The Hausman test
//! contrasts the two slope vectors `(β, γ)`.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{DefaultHasher, Hash, Hasher};

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::chi_squared_sf;

const COLLINEARITY_TOL: f64 = 1e-10;
const HAUSMAN_DF: u32 = 2;
/// Eigenvalues of `V_FE - V_RE` below this fraction of the largest are
/// treated as zero.
const HAUSMAN_RANK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanelRow {
    pub league: String,
    /// Season label, e.g. `2009-10`.
    pub season: String,
    /// Trend value, `1..=T`.
    pub t: usize,
    pub revenue: f64,
    pub cb: f64,
}

/// A balanced panel, rows ordered by league then period.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanelDataset {
    leagues: Vec<String>,
    periods: Vec<usize>,
    rows: Vec<PanelRow>,
}

impl PanelDataset {
    pub fn new(mut rows: Vec<PanelRow>) -> Result<Self> {
        let leagues: Vec<String> = rows
            .iter()
            .map(|r| r.league.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let periods: Vec<usize> = rows.iter().map(|r| r.t).collect::<BTreeSet<_>>().into_iter().collect();
        if leagues.len() < 2 {
            return Err(Error::InvalidPanel(format!("need at least two leagues, got {}", leagues.len())));
        }
        if periods.len() < 3 {
            return Err(Error::InvalidPanel(format!("need at least three periods, got {}", periods.len())));
        }
        if let Some(r) = rows.iter().find(|r| !r.revenue.is_finite() || !r.cb.is_finite()) {
            return Err(Error::InvalidPanel(format!("non-finite value at ({}, {})", r.league, r.season)));
        }
        let mut cells: BTreeMap<(&str, usize), usize> = BTreeMap::new();
        for r in &rows {
            *cells.entry((r.league.as_str(), r.t)).or_default() += 1;
        }
        if let Some(((l, t), _)) = cells.iter().find(|(_, &c)| c > 1) {
            return Err(Error::InvalidPanel(format!("duplicate cell ({l}, t = {t})")));
        }
        let mut missing = Vec::new();
        for l in &leagues {
            for &t in &periods {
                if !cells.contains_key(&(l.as_str(), t)) {
                    missing.push((l.clone(), format!("t = {t}")));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::UnbalancedPanel { missing });
        }
        rows.sort_by(|a, b| (&a.league, a.t).cmp(&(&b.league, b.t)));
        Ok(Self { leagues, periods, rows })
    }

    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn leagues(&self) -> &[String] {
        &self.leagues
    }

    pub fn league_count(&self) -> usize {
        self.leagues.len()
    }

    pub fn period_count(&self) -> usize {
        self.periods.len()
    }

    pub fn observation_count(&self) -> usize {
        self.rows.len()
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for r in &self.rows {
            r.league.hash(&mut h);
            r.t.hash(&mut h);
            r.revenue.to_bits().hash(&mut h);
            r.cb.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Rows of league `l` (index into `leagues()`).
    fn league_rows(&self, l: usize) -> &[PanelRow] {
        let t = self.period_count();
        &self.rows[l * t..(l + 1) * t]
    }

    /// Per-league means of (revenue, t, cb).
    fn league_means(&self) -> Vec<[f64; 3]> {
        let t = self.period_count() as f64;
        (0..self.league_count())
            .map(|l| {
                let rows = self.league_rows(l);
                [
                    rows.iter().map(|r| r.revenue).sum::<f64>() / t,
                    rows.iter().map(|r| r.t as f64).sum::<f64>() / t,
                    rows.iter().map(|r| r.cb).sum::<f64>() / t,
                ]
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    #[serde(rename = "FE")]
    FixedEffects,
    #[serde(rename = "RE")]
    RandomEffects,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coefficient {
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PanelFit {
    pub model_kind: ModelKind,
    pub trend: Coefficient,
    pub cb: Coefficient,
    /// FE only, in league order.
    pub league_intercepts: Vec<(String, Coefficient)>,
    /// RE only.
    pub intercept: Option<Coefficient>,
    pub adjusted_r_squared: f64,
    /// Idiosyncratic standard deviation.
    pub sigma: f64,
    /// RE only.
    pub sigma_alpha: Option<f64>,
    /// RE only: σ̂_α² came out negative and was set to zero.
    pub sigma_alpha_truncated: bool,
    /// RE only.
    pub theta: Option<f64>,
    /// Covariance of `(β̂, γ̂)`.
    pub slope_covariance: [[f64; 2]; 2],
    pub df_residual: usize,
    #[serde(skip)]
    dataset_fingerprint: u64,
}

impl PanelFit {
    pub fn slopes(&self) -> [f64; 2] {
        [self.trend.estimate, self.cb.estimate]
    }
}

struct Ols {
    coef: DVector<f64>,
    xtx_inv: DMatrix<f64>,
    ssr: f64,
}

/// Least squares by QR; fails naming the first column that lies in the
/// span of the preceding ones.
fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[&str]) -> Result<Ols> {
    debug_assert_eq!(x.ncols(), names.len());
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..x.ncols() {
        let norm = x.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= COLLINEARITY_TOL * norm {
            let earlier = if j == 0 { "zero".to_owned() } else { names[..j].join(", ") };
            return Err(Error::Singular(format!(
                "regressor {} is collinear with [{earlier}]",
                names[j]
            )));
        }
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("R is not invertible".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let resid = y - x * &coef;
    Ok(Ols {
        coef,
        xtx_inv,
        ssr: resid.norm_squared(),
    })
}

fn coefficient(estimate: f64, variance: f64) -> Coefficient {
    Coefficient {
        estimate,
        std_error: variance.max(0.0).sqrt(),
    }
}

fn slope_block(v: &DMatrix<f64>, offset: usize) -> [[f64; 2]; 2] {
    [
        [v[(offset, offset)], v[(offset, offset + 1)]],
        [v[(offset + 1, offset)], v[(offset + 1, offset + 1)]],
    ]
}

fn centered_ss(y: &DVector<f64>) -> f64 {
    let mean = y.mean();
    y.iter().map(|v| (v - mean) * (v - mean)).sum()
}

struct Within {
    ols: Ols,
    df: usize,
    sigma2: f64,
    tss: f64,
}

fn within(data: &PanelDataset) -> Result<Within> {
    let means = data.league_means();
    let t = data.period_count();
    let nobs = data.observation_count();
    let mut x = DMatrix::zeros(nobs, 2);
    let mut y = DVector::zeros(nobs);
    for (i, r) in data.rows().iter().enumerate() {
        let m = &means[i / t];
        y[i] = r.revenue - m[0];
        x[(i, 0)] = r.t as f64 - m[1];
        x[(i, 1)] = r.cb - m[2];
    }
    let ols = ols(&x, &y, &["trend", "cb"]).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("{msg} after removing league means")),
        other => other,
    })?;
    let df = nobs
        .checked_sub(data.league_count() + 2)
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::InvalidPanel("no residual degrees of freedom".into()))?;
    let sigma2 = ols.ssr / df as f64;
    Ok(Within {
        tss: y.norm_squared(),
        ols,
        df,
        sigma2,
    })
}

/// Fixed-effects fit, reported with one intercept per league.
pub fn fit_fixed_effects(data: &PanelDataset) -> Result<PanelFit> {
    let w = within(data)?;
    let v = &w.ols.xtx_inv * w.sigma2;
    let b = Vector2::new(w.ols.coef[0], w.ols.coef[1]);
    let vb = Matrix2::new(v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]);
    let t = data.period_count() as f64;
    let league_intercepts = data
        .leagues()
        .iter()
        .zip(data.league_means())
        .map(|(name, m)| {
            let xbar = Vector2::new(m[1], m[2]);
            let est = m[0] - b.dot(&xbar);
            let var = w.sigma2 / t + (xbar.transpose() * vb * xbar)[(0, 0)];
            (name.clone(), coefficient(est, var))
        })
        .collect();
    let nobs = data.observation_count() as f64;
    let r2 = 1.0 - w.ols.ssr / w.tss;
    Ok(PanelFit {
        model_kind: ModelKind::FixedEffects,
        trend: coefficient(b[0], v[(0, 0)]),
        cb: coefficient(b[1], v[(1, 1)]),
        league_intercepts,
        intercept: None,
        adjusted_r_squared: 1.0 - (1.0 - r2) * nobs / w.df as f64,
        sigma: w.sigma2.sqrt(),
        sigma_alpha: None,
        sigma_alpha_truncated: false,
        theta: None,
        slope_covariance: slope_block(&v, 0),
        df_residual: w.df,
        dataset_fingerprint: data.fingerprint(),
    })
}

struct Transformed {
    ols: Ols,
    has_intercept: bool,
    tss: f64,
}

fn quasi_demeaned(data: &PanelDataset, theta: f64) -> Result<Transformed> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidPanel(format!("theta must lie in [0, 1], got {theta}")));
    }
    let means = data.league_means();
    let t = data.period_count();
    let nobs = data.observation_count();
    let has_intercept = 1.0 - theta > COLLINEARITY_TOL;
    let offset = usize::from(has_intercept);
    let mut x = DMatrix::zeros(nobs, 2 + offset);
    let mut y = DVector::zeros(nobs);
    for (i, r) in data.rows().iter().enumerate() {
        let m = &means[i / t];
        y[i] = r.revenue - theta * m[0];
        if has_intercept {
            x[(i, 0)] = 1.0 - theta;
        }
        x[(i, offset)] = r.t as f64 - theta * m[1];
        x[(i, offset + 1)] = r.cb - theta * m[2];
    }
    let names: &[&str] = if has_intercept {
        &["intercept", "trend", "cb"]
    } else {
        &["trend", "cb"]
    };
    Ok(Transformed {
        ols: ols(&x, &y, names)?,
        has_intercept,
        tss: centered_ss(&y),
    })
}

/// `(β̂, γ̂)` from least squares on `y - θ ȳ_l` and `x - θ x̄_l`.
/// `θ = 0` is pooled OLS, `θ = 1` the within estimator.
pub fn quasi_demeaned_slopes(data: &PanelDataset, theta: f64) -> Result<[f64; 2]> {
    let fit = quasi_demeaned(data, theta)?;
    let o = usize::from(fit.has_intercept);
    Ok([fit.ols.coef[o], fit.ols.coef[o + 1]])
}

/// Swamy–Arora variance components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceComponents {
    pub sigma2: f64,
    pub sigma2_alpha: f64,
    pub truncated: bool,
    pub theta: f64,
}

pub fn swamy_arora(data: &PanelDataset) -> Result<VarianceComponents> {
    let w = within(data)?;
    let means = data.league_means();
    let l = data.league_count();
    let t = data.period_count() as f64;

    // Between regression of ȳ_l on an intercept and the league-varying x̄
    // columns; with a balanced panel the trend mean is the same everywhere.
    let mut cols: Vec<(&str, Vec<f64>)> = vec![("intercept", vec![1.0; l])];
    for (name, k) in [("trend", 1usize), ("cb", 2)] {
        let v: Vec<f64> = means.iter().map(|m| m[k]).collect();
        let mean = v.iter().sum::<f64>() / l as f64;
        let spread = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
        if spread > COLLINEARITY_TOL * mean.abs().max(1.0) {
            cols.push((name, v));
        }
    }
    let kb = cols.len();
    if l <= kb {
        return Err(Error::InvalidPanel(format!(
            "between regression needs more than {kb} leagues, got {l}"
        )));
    }
    let xb = DMatrix::from_fn(l, kb, |i, j| cols[j].1[i]);
    let yb = DVector::from_iterator(l, means.iter().map(|m| m[0]));
    let names: Vec<&str> = cols.iter().map(|c| c.0).collect();
    let between = ols(&xb, &yb, &names)?;
    let sigma2_between = between.ssr / (l - kb) as f64;

    let sigma2 = w.sigma2;
    if sigma2 <= 0.0 {
        return Err(Error::InvalidPanel("zero idiosyncratic variance".into()));
    }
    let raw = sigma2_between - sigma2 / t;
    let sigma2_alpha = raw.max(0.0);
    let theta = 1.0 - (sigma2 / (sigma2 + t * sigma2_alpha)).sqrt();
    Ok(VarianceComponents {
        sigma2,
        sigma2_alpha,
        truncated: raw < 0.0,
        theta,
    })
}

/// Random-effects GLS fit with Swamy–Arora weights.
pub fn fit_random_effects(data: &PanelDataset) -> Result<PanelFit> {
    let vc = swamy_arora(data)?;
    let fit = quasi_demeaned(data, vc.theta)?;
    if !fit.has_intercept {
        return Err(Error::InvalidPanel("quasi-demeaning weight reached 1".into()));
    }
    let v = &fit.ols.xtx_inv * vc.sigma2;
    let nobs = data.observation_count();
    let df = nobs - 3;
    let r2 = 1.0 - fit.ols.ssr / fit.tss;
    Ok(PanelFit {
        model_kind: ModelKind::RandomEffects,
        trend: coefficient(fit.ols.coef[1], v[(1, 1)]),
        cb: coefficient(fit.ols.coef[2], v[(2, 2)]),
        league_intercepts: Vec::new(),
        intercept: Some(coefficient(fit.ols.coef[0], v[(0, 0)])),
        adjusted_r_squared: 1.0 - (1.0 - r2) * (nobs - 1) as f64 / df as f64,
        sigma: vc.sigma2.sqrt(),
        sigma_alpha: Some(vc.sigma2_alpha.sqrt()),
        sigma_alpha_truncated: vc.truncated,
        theta: Some(vc.theta),
        slope_covariance: slope_block(&v, 1),
        df_residual: df,
        dataset_fingerprint: data.fingerprint(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HausmanTest {
    pub statistic: f64,
    /// Rank of `V_FE - V_RE`: 2, or 1 when the trend carries no between-league
    /// information (the usual case for a balanced panel).
    pub df: u32,
    pub p_value: f64,
    /// `V_FE - V_RE` was not positive definite; its positive part was inverted.
    pub used_pseudo_inverse: bool,
}

pub fn hausman_test(fe: &PanelFit, re: &PanelFit) -> Result<HausmanTest> {
    if fe.dataset_fingerprint != re.dataset_fingerprint
        || fe.model_kind != ModelKind::FixedEffects
        || re.model_kind != ModelKind::RandomEffects
    {
        return Err(Error::MismatchedFits);
    }
    let [bf, gf] = fe.slopes();
    let [br, gr] = re.slopes();
    let q = Vector2::new(bf - br, gf - gr);
    let vf = fe.slope_covariance;
    let vr = re.slope_covariance;
    let m = Matrix2::new(
        vf[0][0] - vr[0][0],
        vf[0][1] - vr[0][1],
        vf[1][0] - vr[1][0],
        vf[1][1] - vr[1][1],
    );
    let m = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut statistic = 0.0;
    let mut rank = 0u32;
    for i in 0..2 {
        let ev = eig.eigenvalues[i];
        if ev > HAUSMAN_RANK_TOL * scale {
            let proj = eig.eigenvectors.column(i).dot(&q);
            statistic += proj * proj / ev;
            rank += 1;
        }
    }
    if rank == 0 {
        return Err(Error::Singular("V_FE - V_RE has no positive eigenvalue".into()));
    }
    Ok(HausmanTest {
        statistic,
        df: rank,
        p_value: chi_squared_sf(statistic, rank)?,
        used_pseudo_inverse: rank < HAUSMAN_DF,
    })
}

/// Pearson correlation of two equal-length series.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidPanel("correlation needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(alphas: &[f64], t: usize, beta: f64, gamma: f64, noise: impl Fn(usize, usize) -> f64) -> PanelDataset {
        let mut rows = Vec::new();
        for (l, &a) in alphas.iter().enumerate() {
            for s in 1..=t {
                let cb = 1.0 + 0.1 * ((l * 7 + s * 3) % 11) as f64 + 0.013 * (s * s) as f64;
                rows.push(PanelRow {
                    league: format!("L{l}"),
                    season: format!("{}", 2000 + s),
                    t: s,
                    revenue: a + beta * s as f64 + gamma * cb + noise(l, s),
                    cb,
                });
            }
        }
        PanelDataset::new(rows).unwrap()
    }

    #[test]
    fn noiseless_recovery() {
        let d = synthetic(&[2.0, 4.0, 3.0, 1.5, 2.5], 10, 0.2, -1.5, |_, _| 0.0);
        let fe = fit_fixed_effects(&d).unwrap();
        assert_abs_diff_eq!(fe.trend.estimate, 0.2, epsilon = 1e-8);
        assert_abs_diff_eq!(fe.cb.estimate, -1.5, epsilon = 1e-8);
        for ((_, c), a) in fe.league_intercepts.iter().zip([2.0, 4.0, 3.0, 1.5, 2.5]) {
            assert_abs_diff_eq!(c.estimate, a, epsilon = 1e-8);
        }
    }

    #[test]
    fn unbalanced_and_tiny_panels_rejected() {
        let d = synthetic(&[1.0, 2.0], 4, 0.1, 1.0, |_, _| 0.0);
        let mut rows = d.rows().to_vec();
        rows.remove(3);
        match PanelDataset::new(rows.clone()) {
            Err(Error::UnbalancedPanel { missing }) => assert_eq!(missing, vec![("L0".to_string(), "t = 4".to_string())]),
            other => panic!("{other:?}"),
        }
        rows.truncate(2);
        assert!(PanelDataset::new(rows).is_err());
    }

    #[test]
    fn collinear_regressor_reported() {
        // cb equal to a league constant plus the trend is collinear after demeaning
        let mut rows = Vec::new();
        for l in 0..3 {
            for s in 1..=5 {
                rows.push(PanelRow {
                    league: format!("L{l}"),
                    season: s.to_string(),
                    t: s,
                    revenue: l as f64 + 0.3 * s as f64 + ((l + s) % 3) as f64,
                    cb: 2.0 * s as f64 + l as f64,
                });
            }
        }
        let d = PanelDataset::new(rows).unwrap();
        match fit_fixed_effects(&d) {
            Err(Error::Singular(msg)) => assert!(msg.contains("cb"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fe_invariant_to_league_shift() {
        let noise = |l: usize, s: usize| 0.05 * (((l * 31 + s * 17) % 13) as f64 - 6.0);
        let d = synthetic(&[2.0, 4.0, 3.0], 8, 0.2, -1.5, noise);
        let mut shifted = d.rows().to_vec();
        for r in shifted.iter_mut().filter(|r| r.league == "L1") {
            r.revenue += 17.0;
        }
        let a = fit_fixed_effects(&d).unwrap();
        let b = fit_fixed_effects(&PanelDataset::new(shifted).unwrap()).unwrap();
        assert_abs_diff_eq!(a.trend.estimate, b.trend.estimate, epsilon = 1e-9);
        assert_abs_diff_eq!(a.cb.estimate, b.cb.estimate, epsilon = 1e-9);
    }

    #[test]
    fn theta_limits() {
        let noise = |l: usize, s: usize| 0.05 * (((l * 31 + s * 17) % 13) as f64 - 6.0);
        let d = synthetic(&[2.0, 4.0, 3.0, 1.0], 8, 0.2, -1.5, noise);
        let fe = fit_fixed_effects(&d).unwrap();
        let at_one = quasi_demeaned_slopes(&d, 1.0).unwrap();
        assert_abs_diff_eq!(at_one[0], fe.trend.estimate, epsilon = 1e-10);
        assert_abs_diff_eq!(at_one[1], fe.cb.estimate, epsilon = 1e-10);
        let near_one = quasi_demeaned_slopes(&d, 1.0 - 1e-7).unwrap();
        assert_abs_diff_eq!(near_one[1], fe.cb.estimate, epsilon = 1e-5);
        assert!(quasi_demeaned_slopes(&d, 1.5).is_err());
    }

    #[test]
    fn hausman_identical_fits() {
        let noise = |l: usize, s: usize| 0.05 * (((l * 31 + s * 17) % 13) as f64 - 6.0);
        let d = synthetic(&[2.0, 4.0, 3.0, 1.0], 8, 0.2, -1.5, noise);
        let fe = fit_fixed_effects(&d).unwrap();
        let mut re = fit_random_effects(&d).unwrap();
        re.trend.estimate = fe.trend.estimate;
        re.cb.estimate = fe.cb.estimate;
        let h = hausman_test(&fe, &re).unwrap();
        assert_eq!(h.statistic, 0.0);
        assert_eq!(h.p_value, 1.0);
        assert!(hausman_test(&re, &fe).is_err());
        let other = synthetic(&[2.0, 4.0, 3.0, 1.0], 8, 0.3, -1.5, noise);
        assert!(matches!(
            hausman_test(&fe, &fit_random_effects(&other).unwrap()),
            Err(Error::MismatchedFits)
        ));
    }

    #[test]
    fn correlation_basics() {
        assert_abs_diff_eq!(correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0, epsilon = 1e-15);
        assert!(correlation(&[1.0], &[1.0]).is_err());
    }
}

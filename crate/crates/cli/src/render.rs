//! Text and JSON rendering.

use std::io::Write;

use anyhow::Result;
use balance_core::indices::SCHEMA_VERSION;
use balance_core::panel::Coefficient;
use balance_core::{BalanceReport, HausmanTest, Measure, PanelDataset, PanelFit};
use serde::Serialize;

pub fn report_table(r: &BalanceReport, out: &mut dyn Write) -> Result<()> {
    let c6 = r.c6.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"));
    let rows: [(&str, String); 13] = [
        ("teams", r.n.to_string()),
        ("matches", r.match_count.to_string()),
        ("lambda_hat", format!("{:.4}", r.lambda_hat)),
        ("d_lambda_hat", format!("{:.4}", r.draw_prob_theoretical)),
        ("d_observed", format!("{:.4}", r.draw_prob_observed)),
        ("C6", c6),
        ("HICB", format!("{:.4}", r.hicb)),
        ("GBI", format!("{:.4}", r.gbi)),
        ("statistic", format!("{:.4}", r.statistic)),
        ("df", r.df.to_string()),
        ("p_value", format!("{:.4}", r.p_value)),
        ("LRT statistic", format!("{:.4} (p {:.4})", r.lrt_statistic, r.lrt_p_value)),
        (
            "verdict",
            if r.balanced_at_5pct {
                "consistent with perfect balance at 5%".to_owned()
            } else {
                "perfect balance rejected at 5%".to_owned()
            },
        ),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<14} {v}")?;
    }
    Ok(())
}

fn cell(c: &Coefficient) -> (String, String) {
    (format!("{:.2}", c.estimate), format!("({:.2})", c.std_error))
}

pub fn panel_table(
    measure: Measure,
    data: &PanelDataset,
    fe: Option<&PanelFit>,
    re: Option<&PanelFit>,
    hausman: Option<&HausmanTest>,
    out: &mut dyn Write,
) -> Result<()> {
    let fits: Vec<(&str, &PanelFit)> = [("FE", fe), ("RE", re)]
        .into_iter()
        .filter_map(|(k, f)| f.map(|f| (k, f)))
        .collect();
    let label = measure.label();
    let mut lines: Vec<(String, Vec<String>)> = Vec::new();
    let blank = || vec![String::new(); fits.len()];
    let mut pair = |name: &str, pick: &dyn Fn(&PanelFit) -> Option<Coefficient>| {
        let (mut est, mut se) = (blank(), blank());
        for (i, (_, f)) in fits.iter().enumerate() {
            if let Some(c) = pick(f) {
                (est[i], se[i]) = cell(&c);
            }
        }
        lines.push((name.to_owned(), est));
        lines.push((String::new(), se));
    };
    pair("(Intercept)", &|f| f.intercept);
    pair("trend", &|f| Some(f.trend));
    pair(label, &|f| Some(f.cb));
    for league in data.leagues() {
        pair(league, &|f| {
            f.league_intercepts.iter().find(|(l, _)| l == league).map(|(_, c)| *c)
        });
    }
    let stat = |pick: &dyn Fn(&PanelFit) -> Option<f64>| -> Vec<String> {
        fits.iter().map(|(_, f)| pick(f).map_or_else(String::new, |v| format!("{v:.2}"))).collect()
    };
    lines.push(("Adjusted R^2".into(), stat(&|f| Some(f.adjusted_r_squared))));
    lines.push(("sigma".into(), stat(&|f| (f.sigma_alpha.is_some()).then_some(f.sigma))));
    lines.push(("sigma_alpha".into(), stat(&|f| f.sigma_alpha)));
    lines.push(("theta".into(), stat(&|f| f.theta)));
    if let Some(h) = hausman {
        let mut row = blank();
        *row.last_mut().unwrap() = format!("{:.2}", h.p_value);
        lines.push(("Hausman test p-value".into(), row));
    }

    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(12);
    write!(out, "{:width$}", "")?;
    for (kind, _) in &fits {
        write!(out, " {:>12}", format!("{kind}({label})"))?;
    }
    writeln!(out)?;
    for (name, cells) in &lines {
        write!(out, "{name:width$}")?;
        for c in cells {
            write!(out, " {c:>12}")?;
        }
        writeln!(out)?;
    }
    writeln!(
        out,
        "{} leagues x {} seasons; standard errors in parentheses",
        data.league_count(),
        data.period_count()
    )?;
    if re.is_some_and(|r| r.sigma_alpha_truncated) {
        writeln!(out, "warning: negative sigma_alpha^2 estimate truncated to 0; RE reduces to pooled OLS")?;
    }
    if let Some(h) = hausman {
        if h.used_pseudo_inverse {
            writeln!(out, "Hausman: V_FE - V_RE has rank {}; generalized inverse used", h.df)?;
        }
        if h.p_value >= 0.05 {
            writeln!(out, "Hausman p >= 0.05: no evidence against the random-effects specification")?;
        } else {
            writeln!(out, "Hausman p < 0.05: random effects rejected in favour of fixed effects")?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PanelOutput<'a> {
    measure: &'a str,
    fixed_effects: Option<&'a PanelFit>,
    random_effects: Option<&'a PanelFit>,
    hausman: Option<&'a HausmanTest>,
    schema_version: u32,
}

pub fn panel_json(
    measure: Measure,
    fe: Option<&PanelFit>,
    re: Option<&PanelFit>,
    hausman: Option<&HausmanTest>,
    out: &mut dyn Write,
) -> Result<()> {
    let payload = PanelOutput {
        measure: measure.label(),
        fixed_effects: fe,
        random_effects: re,
        hausman,
        schema_version: SCHEMA_VERSION,
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&payload)?)?;
    Ok(())
}

//! Plain-text tables. Every number goes through [`num`] so output is stable
//! at a given precision.

use std::fmt::Write as _;

use pathlens::{CoordinatePath, FrontReport, LinearModel, Result, SufficientStats};

pub fn num(x: f64, precision: usize) -> String {
    let s = format!("{x:.precision$}");
    // avoid printing "-0.0000"
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Right-aligned columns separated by two spaces.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:>w$}", w = widths[c]))
            .collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    out
}

/// One row per model on the path. Feature columns show a coefficient where
/// it changes, `|` where a nonzero value carries over and `-` where it is
/// zero.
pub fn path_table(stats: &SufficientStats, path: &CoordinatePath, p: usize) -> Result<String> {
    let names = stats.feature_names();
    let mut header = vec![
        "step".to_string(),
        "feature".into(),
        "value".into(),
        "MSE".into(),
    ];
    header.extend(names.iter().cloned());
    let base = path.base();
    let mut first = vec![
        "0".to_string(),
        "(base)".into(),
        String::new(),
        num(stats.cost(base)?, p),
    ];
    first.extend(
        base.coefficients()
            .iter()
            .map(|&b| if b == 0.0 { "-".into() } else { num(b, p) }),
    );
    let mut rows = vec![header, first];
    let models: Vec<LinearModel> = path.materialize();
    let costs = path.cost_sequence(stats)?;
    for (k, (step, model)) in path.steps().iter().zip(&models).enumerate() {
        let mut row = vec![
            (k + 1).to_string(),
            names[step.index].clone(),
            num(step.value, p),
            num(costs.values()[k], p),
        ];
        row.extend(model.coefficients().iter().enumerate().map(|(j, &b)| {
            if j == step.index {
                num(b, p)
            } else if b == 0.0 {
                "-".into()
            } else {
                "|".into()
            }
        }));
        rows.push(row);
    }
    Ok(table(&rows))
}

pub fn stats(stats: &SufficientStats, base: &LinearModel, p: usize) -> Result<String> {
    let ols = stats.ols();
    let mut out = String::new();
    writeln!(out, "features: {}", stats.d()).unwrap();
    writeln!(
        out,
        "target second moment: {}",
        num(stats.target_second_moment(), p)
    )
    .unwrap();
    writeln!(out, "base MSE: {}", num(stats.cost(base)?, p)).unwrap();
    writeln!(out, "least-squares MSE: {}", num(stats.cost(&ols)?, p)).unwrap();
    let mut rows = vec![vec![
        "feature".to_string(),
        "cross".into(),
        "gram diag".into(),
        "least squares".into(),
    ]];
    for (j, name) in stats.feature_names().iter().enumerate() {
        rows.push(vec![
            name.clone(),
            num(stats.cross()[j], p),
            num(stats.gram()[(j, j)], p),
            num(ols.coefficients()[j], p),
        ]);
    }
    out += &table(&rows);
    Ok(out)
}

pub fn front(report: &FrontReport, p: usize) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{} front points from {} lambda values",
        report.points.len(),
        report.lambdas.len()
    )
    .unwrap();
    let hist: Vec<String> = report
        .step_histogram()
        .iter()
        .map(|(k, n)| format!("K={k}: {n}"))
        .collect();
    writeln!(out, "path lengths: {}", hist.join(", ")).unwrap();
    let mut rows = vec![vec![
        "interp_loss".to_string(),
        "cost".into(),
        "K".into(),
        "lambda".into(),
    ]];
    for pt in &report.points {
        rows.push(vec![
            num(pt.interp_loss, p),
            num(pt.cost, p),
            pt.steps.to_string(),
            format!("{:.p$e}", pt.lambda),
        ]);
    }
    out += &table(&rows);
    out
}

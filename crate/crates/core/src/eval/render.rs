//! Text and CSV renderings of evaluation results. None of these include
//! wall-clock times, so equal inputs give equal bytes; timings have their
//! own table.

use std::fmt::Write as _;

use super::benchmark::{BenchmarkOutput, Comparison, GridCell};
use super::report::EvalReport;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn opt_fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

/// Left-aligns the first column and any text column; numeric columns
/// (numbers, `n/a`, blanks) are right-aligned.
pub fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let numeric = |c: &str| c.is_empty() || c == "n/a" || c.parse::<f64>().is_ok();
    let left: Vec<bool> = (0..widths.len())
        .map(|i| i == 0 || rows.iter().any(|r| r.get(i).is_some_and(|c| !numeric(c))))
        .collect();
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else if left[i] {
                let _ = write!(out, "  {cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.trim_end().to_string()
    };
    let mut out = line(&mut header.iter().copied());
    out.push('\n');
    let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

fn mask_names(report: &EvalReport, names: &[String]) -> String {
    report
        .mask
        .indices()
        .iter()
        .map(|&k| names[k].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn reports_table(reports: &[EvalReport], feature_names: &[String]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.method.display_name().to_string(),
                format!("{:.4}", r.train_mse),
                format!("{:.4}", r.train_mse_linear),
                format!("{:.4}", r.test_mse),
                opt_fixed(r.rho_hat),
                format!("{:.4}", r.r2_adj),
                r.mask.j_count().to_string(),
                mask_names(r, feature_names),
            ]
        })
        .collect();
    aligned(
        &["Method", "Train MSE", "Train MSE (no IMR)", "Test MSE", "rho", "Adj R2", "J", "Features"],
        &rows,
    )
}

pub fn reports_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("method,train_mse,train_mse_linear,test_mse,rho_hat,r2_adj,j,mask,accepted,seed\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.train_mse,
            r.train_mse_linear,
            r.test_mse,
            opt(r.rho_hat),
            r.r2_adj,
            r.mask.j_count(),
            r.mask.bit_string(),
            r.accepted_count.map_or_else(String::new, |c| c.to_string()),
            r.seed
        );
    }
    out
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut out = String::from("c,T,B,test_mse,rho_hat,error\n");
    for c in cells {
        let err = c.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.init_c,
            c.epochs,
            c.samples,
            opt(c.test_mse),
            opt(c.rho_hat),
            err
        );
    }
    out
}

/// Rows by `row_key`, columns by `col_key`, cells showing `value`.
pub fn grid_table(
    cells: &[GridCell],
    row_label: &str,
    row_key: impl Fn(&GridCell) -> String,
    col_label: &str,
    col_key: impl Fn(&GridCell) -> String,
    value: impl Fn(&GridCell) -> String,
) -> String {
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    for c in cells {
        let (r, k) = (row_key(c), col_key(c));
        if !rows.contains(&r) {
            rows.push(r);
        }
        if !cols.contains(&k) {
            cols.push(k);
        }
    }
    let header: Vec<String> = std::iter::once(format!("{row_label} \\ {col_label}"))
        .chain(cols.iter().map(|k| format!("{col_label}={k}")))
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            std::iter::once(format!("{row_label}={r}"))
                .chain(cols.iter().map(|k| {
                    cells
                        .iter()
                        .find(|c| &row_key(c) == r && &col_key(c) == k)
                        .map_or_else(String::new, &value)
                }))
                .collect()
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    aligned(&header, &body)
}

pub fn comparisons_table(comparisons: &[Comparison]) -> String {
    let rows: Vec<Vec<String>> = comparisons
        .iter()
        .map(|c| match &c.result {
            Ok(r) => vec![
                format!("Heckman-FA vs {}", c.baseline.display_name()),
                format!("{:.4} ± {:.4}", r.mean_diff, r.std_diff),
                format!("{:.4}", r.t_statistic),
                format!("{:.4}", r.p_value),
                c.pairs.to_string(),
            ],
            Err(e) => vec![
                format!("Heckman-FA vs {}", c.baseline.display_name()),
                e.clone(),
                "n/a".into(),
                "n/a".into(),
                c.pairs.to_string(),
            ],
        })
        .collect();
    aligned(&["Comparison", "Mean diff ± std", "t", "p-value", "Pairs"], &rows)
}

pub fn comparisons_csv(comparisons: &[Comparison]) -> String {
    let mut out = String::from("baseline,pairs,mean_diff,std_diff,t_statistic,p_value,error\n");
    for c in comparisons {
        let _ = match &c.result {
            Ok(r) => writeln!(
                out,
                "{},{},{},{},{},{},",
                c.baseline, c.pairs, r.mean_diff, r.std_diff, r.t_statistic, r.p_value
            ),
            Err(e) => writeln!(out, "{},{},,,,,{}", c.baseline, c.pairs, e.replace([',', '\n'], ";")),
        };
    }
    out
}

/// Every table of a benchmark except timings.
pub fn benchmark_text(output: &BenchmarkOutput, feature_names: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&reports_table(&output.reports, feature_names));
    for (method, reason) in &output.failures {
        let _ = writeln!(out, "{}: no result ({reason})", method.display_name());
    }
    if !output.comparisons.is_empty() {
        out.push('\n');
        out.push_str(&comparisons_table(&output.comparisons));
    }
    let mse = |c: &GridCell| opt_fixed(c.test_mse);
    if !output.sensitivity.is_empty() {
        out.push_str("\nTest MSE of Heckman-FA over (T, c)\n");
        out.push_str(&grid_table(
            &output.sensitivity,
            "T",
            |c| c.epochs.to_string(),
            "c",
            |c| c.init_c.to_string(),
            mse,
        ));
    }
    if !output.runtime_grid.is_empty() {
        out.push_str("\nTest MSE of Heckman-FA over (T, B)\n");
        out.push_str(&grid_table(
            &output.runtime_grid,
            "T",
            |c| c.epochs.to_string(),
            "B",
            |c| c.samples.to_string(),
            mse,
        ));
    }
    out
}

/// Wall-clock seconds for every report and grid cell.
pub fn timing_csv(output: &BenchmarkOutput) -> String {
    let mut out = String::from("kind,method,c,T,B,seconds\n");
    for r in &output.reports {
        let _ = writeln!(out, "report,{},,,,{}", r.method, r.runtime_seconds);
    }
    for (kind, cells) in [("sensitivity", &output.sensitivity), ("runtime", &output.runtime_grid)] {
        for c in cells {
            let _ = writeln!(out, "{kind},FA,{},{},{},{}", c.init_c, c.epochs, c.samples, c.runtime_seconds);
        }
    }
    out
}

pub fn timing_table(output: &BenchmarkOutput) -> String {
    if output.runtime_grid.is_empty() {
        return String::new();
    }
    let mut out = String::from("Execution time of Heckman-FA in seconds over (T, B)\n");
    out.push_str(&grid_table(
        &output.runtime_grid,
        "T",
        |c| c.epochs.to_string(),
        "B",
        |c| c.samples.to_string(),
        |c| format!("{:.3}", c.runtime_seconds),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alignment() {
        let t = aligned(&["a", "bbb"], &[vec!["xx".into(), "1".into()], vec!["y".into(), "22".into()]]);
        assert_eq!(t, "a   bbb\n-------\nxx    1\ny    22\n");
        let t = aligned(&["n", "names"], &[vec!["1".into(), "x1 x2".into()], vec!["22".into(), "x3".into()]]);
        assert_eq!(t, "n   names\n---------\n1   x1 x2\n22  x3\n");
    }

    #[test]
    fn grid_layout() {
        let cell = |c: f64, t: usize| GridCell {
            init_c: c,
            epochs: t,
            samples: 10,
            test_mse: Some(c * t as f64),
            rho_hat: None,
            error: None,
            runtime_seconds: 0.0,
        };
        let cells: Vec<GridCell> = [0.25, 0.5]
            .iter()
            .flat_map(|&c| [100, 500].map(move |t| cell(c, t)))
            .collect();
        let t = grid_table(&cells, "T", |c| c.epochs.to_string(), "c", |c| c.init_c.to_string(), |c| {
            format!("{}", c.test_mse.unwrap())
        });
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("T=100") && lines[2].ends_with("50"));
        assert!(lines[3].ends_with("250"));
        assert_eq!(grid_csv(&cells).lines().count(), 5);
    }
}

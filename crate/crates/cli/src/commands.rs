use std::fmt::Write as _;

use log::info;

use heckfa::assignment::TrainTrace;
use heckfa::eval::{self, render, BenchmarkConfig, MethodRun, Scenario};
use heckfa::extraction::Method;
use heckfa::pipeline::{
    inject_bias, load_csv, synthesize, synthesize_population, write_csv_to, SplitSpec, SyntheticSpec,
};
use heckfa::rng::{derive_seed, Stream};
use heckfa::{AuxColumn, Dataset, Error};

use crate::config::{parse_method, ExperimentFile, SynthSection};
use crate::error::{config_error, CliError, CliResult};
use crate::output::Artifacts;

/// What a command produced: files plus a summary for the terminal.
pub struct Produced {
    pub artifacts: Artifacts,
    pub summary: String,
}

fn csv_bytes(data: &Dataset, outcome: &str) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv_to(data, outcome, &mut buf)?;
    Ok(buf)
}

pub fn synth(file: &ExperimentFile) -> CliResult<Produced> {
    let section = file
        .synth
        .as_ref()
        .ok_or_else(|| config_error("missing section [synth]"))?;
    let spec = section.spec()?;
    let seed = section
        .seed
        .ok_or_else(|| config_error("missing field `seed` in [synth] (or pass --seed)"))?;
    let (data, truth) = synthesize(&spec, seed)?;
    let name = section.name();

    let csv = if section.observe_all.unwrap_or(false) {
        // same per-row streams, so these are the same rows with every y kept
        let full = synthesize_population(&spec, seed)?;
        let s = AuxColumn {
            name: "s".into(),
            values: truth.selected.iter().map(|&b| f64::from(u8::from(b))).collect(),
        };
        let with_s = Dataset::from_rows(
            full.x_sel().clone(),
            &full.y_observed().iter().map(|&y| Some(y)).collect::<Vec<_>>(),
            full.feature_names().to_vec(),
            vec![s],
        )?;
        csv_bytes(&with_s, "y")?
    } else {
        csv_bytes(&data, "y")?
    };

    let mut truth_json = serde_json::to_string_pretty(&truth).map_err(|e| Error::Serialization(e.to_string()))?;
    truth_json.push('\n');

    let mut artifacts = Artifacts::default();
    artifacts.add(format!("{name}.csv"), csv);
    artifacts.add(format!("{name}.truth.json"), truth_json);
    let summary = format!(
        "n = {}, m = {} after selection, selected fraction {:.4}; true mask {}\n",
        data.n(),
        data.m(),
        data.m() as f64 / data.n() as f64,
        spec.true_mask.bit_string()
    );
    Ok(Produced { artifacts, summary })
}

fn synthetic_scenario(section: &SynthSection, seed: u64) -> CliResult<Scenario> {
    let spec = section.spec()?;
    let seed = section.seed.unwrap_or(seed);
    let (train, _) = synthesize(&spec, seed)?;
    let test_spec = SyntheticSpec {
        n: section.test_n.unwrap_or((spec.n * 3 / 7).max(1)),
        ..spec
    };
    let test = synthesize_population(&test_spec, derive_seed(seed, Stream::Synthesize, 0))?;
    Ok(Scenario::new(train, test, section.standardize.unwrap_or(true))?)
}

/// Builds the train/test scenario from `[data]`, or from `[synth]` when no
/// data file is configured.
pub fn scenario(file: &ExperimentFile, seed: u64) -> CliResult<(Scenario, String)> {
    if let Some(d) = &file.data {
        let schema = d.schema();
        let rule = d.bias_rule()?;
        let standardize = d.standardize.unwrap_or(true);
        let loaded = load_csv(&d.path, &schema)?;
        info!("loaded {} rows ({} with outcomes) from {}", loaded.n(), loaded.m(), d.path.display());
        let scenario = match &d.test_path {
            Some(test_path) => {
                let test = load_csv(test_path, &schema)?;
                let (train, sealed) = match &rule {
                    Some(rule) => inject_bias(&loaded, rule)?,
                    None => (loaded, Default::default()),
                };
                let mut s = Scenario::new(train, test, standardize)?;
                s.sealed = sealed;
                s
            }
            None => {
                let split = SplitSpec {
                    train_fraction: d.train_fraction.unwrap_or(0.7),
                    seed: d.split_seed.unwrap_or(seed),
                };
                Scenario::from_population(&loaded, &split, rule.as_ref(), standardize)?
            }
        };
        return Ok((scenario, d.outcome.clone()));
    }
    if let Some(s) = &file.synth {
        return Ok((synthetic_scenario(s, seed)?, "y".into()));
    }
    Err(config_error("need a [data] or [synth] section as the data source"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn report_csv(run: &MethodRun, names: &[String]) -> String {
    let r = &run.report;
    let mut out = String::from("field,value\n");
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    row("method", r.method.to_string());
    row("seed", r.seed.to_string());
    row("train_mse", r.train_mse.to_string());
    if r.method != Method::Naive {
        row("train_mse_linear", r.train_mse_linear.to_string());
    }
    row("test_mse", r.test_mse.to_string());
    if r.method != Method::Naive {
        row("rho_hat", fmt_opt(r.rho_hat));
        row("accepted_candidates", r.accepted_count.map_or_else(String::new, |c| c.to_string()));
    }
    row("r2_adj", r.r2_adj.to_string());
    row("j", r.mask.j_count().to_string());
    row("mask", r.mask.bit_string());
    let features: Vec<&str> = r.mask.indices().iter().map(|&k| names[k].as_str()).collect();
    row("features", features.join(" "));
    out
}

fn mask_csv(run: &MethodRun, names: &[String]) -> String {
    let mut out = String::from("feature,assigned\n");
    for (k, name) in names.iter().enumerate() {
        let _ = writeln!(out, "{name},{}", u8::from(run.report.mask.is_assigned(k)));
    }
    out
}

fn pi_csv(run: &MethodRun, names: &[String]) -> Option<String> {
    let pi = run.pi.as_ref()?;
    let mut out = String::from("feature,pi_not_assigned,pi_assigned\n");
    for (k, name) in names.iter().enumerate() {
        let _ = writeln!(out, "{name},{},{}", pi.not_assigned(k), pi.assigned(k));
    }
    Some(out)
}

fn trace_csv(trace: &TrainTrace, names: &[String]) -> String {
    let mut out = String::from("epoch,loss,redraws,mask");
    for n in names {
        let _ = write!(out, ",pi_{n}");
    }
    out.push('\n');
    for e in &trace.epochs {
        let _ = write!(
            out,
            "{},{},{},{}",
            e.epoch,
            fmt_opt(e.loss),
            e.redraws,
            e.mask.as_ref().map_or_else(String::new, |m| m.bit_string())
        );
        if let Some(row) = &e.pi_assigned {
            for p in row {
                let _ = write!(out, ",{p}");
            }
        }
        out.push('\n');
    }
    out
}

fn report_text(run: &MethodRun, names: &[String]) -> String {
    let mut out = render::reports_table(std::slice::from_ref(&run.report), names);
    if let Some(x) = &run.extraction {
        let _ = writeln!(out, "\nAccepted candidates: {}", x.accepted_count);
        let _ = writeln!(out, "Candidate rho: {}", x.summary);
    }
    if let Some(trace) = &run.trace {
        let skipped = trace.skipped_epochs();
        if skipped > 0 {
            let _ = writeln!(out, "Epochs skipped (all-zero draws): {skipped}");
        }
    }
    out
}

pub fn run(file: &ExperimentFile, method_flag: Option<&str>) -> CliResult<Produced> {
    let section = file.run_section()?;
    let config = section.run_config()?;
    let method_name = method_flag
        .or(section.method.as_deref())
        .ok_or_else(|| config_error("missing field `method` in [run] (or pass --method)"))?;
    let method = parse_method(method_name)?;
    let (scenario, _) = scenario(file, config.seed)?;
    let names = scenario.train.feature_names().to_vec();
    info!("running {} on m = {} of n = {} training rows", method.display_name(), scenario.train.m(), scenario.train.n());
    let run = eval::run_methods(&scenario, &[method], &config)?
        .pop()
        .expect("one method requested");

    let mut artifacts = Artifacts::default();
    let text = report_text(&run, &names);
    artifacts.add("report.csv", report_csv(&run, &names));
    artifacts.add("report.txt", text.clone());
    artifacts.add("mask.csv", mask_csv(&run, &names));
    if let Some(pi) = pi_csv(&run, &names) {
        artifacts.add("pi.csv", pi);
    }
    if let Some(trace) = &run.trace {
        artifacts.add("trace.csv", trace_csv(trace, &names));
    }
    if let Some(st) = &scenario.standardizer {
        let mut out = String::from("feature,location,scale\n");
        for (k, n) in st.feature_names.iter().enumerate() {
            let _ = writeln!(out, "{n},{},{}", st.location[k], st.scale[k]);
        }
        artifacts.add("standardizer.csv", out);
    }
    artifacts.add_timing(
        "timing.csv",
        format!("method,seconds\n{},{}\n", run.report.method, run.report.runtime_seconds),
    );
    Ok(Produced {
        artifacts,
        summary: text,
    })
}

pub fn benchmark(file: &ExperimentFile) -> CliResult<Produced> {
    let section = file
        .benchmark
        .as_ref()
        .ok_or_else(|| config_error("missing section [benchmark]"))?;
    if section.methods.is_empty() {
        return Err(CliError::Usage(
            "[benchmark] methods is empty; list at least one of NAIVE, FA, FA_STAR, HECKMAN_C".into(),
        ));
    }
    let methods = section
        .methods
        .iter()
        .map(|m| parse_method(m))
        .collect::<CliResult<Vec<_>>>()?;
    let run = file.run_section()?.run_config()?;
    let config = BenchmarkConfig {
        run,
        methods,
        repeats: section.repeats,
        grid_c: section.grid_c.clone(),
        grid_t: section.grid_t.clone(),
        grid_b: section.grid_b.clone(),
    };
    config.validate()?;
    let (scenario, _) = scenario(file, config.run.seed)?;
    let names = scenario.train.feature_names().to_vec();
    let output = eval::benchmark(&scenario, &config)?;

    let text = render::benchmark_text(&output, &names);
    let mut artifacts = Artifacts::default();
    artifacts.add("benchmark.txt", text.clone());
    artifacts.add("reports.csv", render::reports_csv(&output.reports));
    if !output.comparisons.is_empty() {
        artifacts.add("comparisons.csv", render::comparisons_csv(&output.comparisons));
    }
    if config.repeats > 0 {
        let mut out = String::from("method,repeat,test_mse\n");
        for (m, values) in &output.repeat_test_mse {
            for (r, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{m},{r},{}", fmt_opt(*v));
            }
        }
        artifacts.add("repeats.csv", out);
    }
    if !output.sensitivity.is_empty() {
        artifacts.add("sensitivity.csv", render::grid_csv(&output.sensitivity));
    }
    if !output.runtime_grid.is_empty() {
        artifacts.add("runtime_grid.csv", render::grid_csv(&output.runtime_grid));
    }
    let timing_text = render::timing_table(&output);
    artifacts.add_timing("timing.csv", render::timing_csv(&output));
    if !timing_text.is_empty() {
        artifacts.add_timing("timing.txt", timing_text.clone());
    }
    let summary = if timing_text.is_empty() {
        text
    } else {
        format!("{text}\n{timing_text}")
    };
    Ok(Produced { artifacts, summary })
}

/// Reads one numeric column (by name, or the first) from a headed CSV file.
pub fn read_column(path: &std::path::Path, column: Option<&str>) -> CliResult<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(file);
    let display = path.display().to_string();
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: display.clone(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = match column {
        Some(name) => headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in {display}")))?,
        None => 0,
    };
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let raw = record.get(col).unwrap_or("").trim();
        let v: f64 = raw.parse().map_err(|_| Error::Parse {
            path: display.clone(),
            line,
            message: format!("`{raw}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                column: headers.get(col).unwrap_or("").to_string(),
                line,
            }
            .into());
        }
        values.push(v);
    }
    Ok(values)
}

pub fn ttest(a: &std::path::Path, b: &std::path::Path, column: Option<&str>) -> CliResult<Produced> {
    let xs = read_column(a, column)?;
    let ys = read_column(b, column)?;
    let r = eval::paired_t_test(&xs, &ys)?;
    let csv = format!(
        "pairs,mean_diff,std_diff,t_statistic,p_value\n{},{},{},{},{}\n",
        r.pairs, r.mean_diff, r.std_diff, r.t_statistic, r.p_value
    );
    let summary = format!(
        "pairs {}: mean difference {:.6} ± {:.6}, t = {:.4}, two-sided p = {:.6}\n",
        r.pairs, r.mean_diff, r.std_diff, r.t_statistic, r.p_value
    );
    let mut artifacts = Artifacts::default();
    artifacts.add("ttest.csv", csv);
    Ok(Produced { artifacts, summary })
}

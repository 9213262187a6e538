use std::io::{Read, Write};
use std::process::ExitCode;

use genfpp::dist::{self, GenIIParams, GenIParams};
use genfpp::estimate::{self, GammaSign};
use genfpp::mcstudy::{self, StudyConfig};
use genfpp::process::{self, Model, Stop};
use genfpp::validation::{self, Suite};
use genfpp::RngStream;
use serde::Serialize;
use serde_json::json;

use crate::output::{model_fields, sink, Format, OutputRecord};
use crate::{
    CliError, EstimateArgs, EvalArgs, EvalKind, ModelArgs, ModelKind, SignArg, SimulateArgs, StudyArgs, SuiteArg,
    ValidateArgs,
};

type CmdResult = Result<ExitCode, CliError>;

fn build_model(a: &ModelArgs) -> Result<Model, CliError> {
    Ok(match a.model {
        ModelKind::Gen1 => {
            if a.gamma.is_some() {
                return Err(CliError::Validation("--gamma applies only to gen2".into()));
            }
            Model::Gen1(GenIParams::new(a.nu, a.delta.unwrap_or(1.0), a.lambda)?)
        }
        ModelKind::Gen2 => {
            if a.delta.is_some() {
                return Err(CliError::Validation("--delta applies only to gen1".into()));
            }
            let g = a
                .gamma
                .ok_or_else(|| CliError::Validation("gen2 needs --gamma".into()))?;
            Model::Gen2(GenIIParams::new(a.nu, g, a.lambda)?)
        }
    })
}

#[derive(Serialize)]
struct Row {
    input: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
}

fn kind_name(k: EvalKind) -> &'static str {
    match k {
        EvalKind::Pdf => "pdf",
        EvalKind::Cdf => "cdf",
        EvalKind::Pmf => "pmf",
        EvalKind::Mean => "mean",
        EvalKind::Lt => "lt",
        EvalKind::Moment => "moment",
    }
}

fn empirical(p: &GenIIParams, t: f64, a: &EvalArgs) -> Result<process::StatePmf, CliError> {
    let rng = RngStream::new(a.seed.seed, a.seed.stream);
    Ok(process::empirical_pmf(p, t, a.paths, &rng)?)
}

fn pmf_rows(model: &Model, t: f64, a: &EvalArgs, rows: &mut Vec<Row>) -> Result<(), CliError> {
    let pmf = match model {
        Model::Gen1(p) => process::state_pmf(p, t, a.kmax)?,
        Model::Gen2(p) => empirical(p, t, a)?,
    };
    let n = a.kmax.map_or(pmf.probs.len(), |k| k + 1);
    for k in 0..n {
        rows.push(Row {
            input: t,
            k: Some(k),
            value: pmf.probs.get(k).copied().unwrap_or(0.0),
            std_error: pmf.std_errors.as_ref().map(|s| s.get(k).copied().unwrap_or(0.0)),
        });
    }
    Ok(())
}

fn ssml_lt_any(p: &GenIIParams, s: f64) -> genfpp::Result<f64> {
    match dist::ssml_lt_series(p, s) {
        Err(genfpp::Error::Domain(_)) if s > 0.0 => dist::ssml_lt(p, s),
        r => r,
    }
}

pub fn eval(argv: &[String], a: EvalArgs) -> CmdResult {
    let model = build_model(&a.model)?;
    let (inputs, flag) = match a.kind {
        EvalKind::Pdf | EvalKind::Cdf | EvalKind::Pmf | EvalKind::Mean => (&a.t, "--t"),
        EvalKind::Lt => (&a.s, "--s"),
        EvalKind::Moment => (&a.q, "--q"),
    };
    if inputs.is_empty() {
        return Err(CliError::Validation(format!("eval {} needs {flag}", kind_name(a.kind))));
    }
    let mut rows = Vec::new();
    for &x in inputs {
        let single = |v: f64| Row { input: x, k: None, value: v, std_error: None };
        match (a.kind, &model) {
            (EvalKind::Pmf, _) => pmf_rows(&model, x, &a, &mut rows)?,
            (EvalKind::Pdf, Model::Gen1(p)) => rows.push(single(dist::genml_pdf(p, x)?)),
            (EvalKind::Pdf, Model::Gen2(p)) => rows.push(single(dist::ssml_pdf(p, x)?)),
            (EvalKind::Cdf, Model::Gen1(p)) => rows.push(single(dist::genml_cdf(p, x)?)),
            (EvalKind::Cdf, Model::Gen2(p)) => rows.push(single(dist::ssml_cdf(p, x)?)),
            (EvalKind::Mean, Model::Gen1(p)) => rows.push(single(process::mean_count(p, x)?)),
            (EvalKind::Mean, Model::Gen2(p)) => {
                let pmf = empirical(p, x, &a)?;
                let ks: Vec<f64> = (0..pmf.probs.len()).map(|k| k as f64).collect();
                let mean = pmf.mean();
                let var: f64 = pmf.probs.iter().zip(&ks).map(|(p, k)| p * (k - mean).powi(2)).sum();
                rows.push(Row { input: x, k: None, value: mean, std_error: Some((var / a.paths as f64).sqrt()) });
            }
            (EvalKind::Lt, Model::Gen1(p)) => rows.push(single(dist::genml_lt(p, x)?)),
            (EvalKind::Lt, Model::Gen2(p)) => rows.push(single(ssml_lt_any(p, x)?)),
            (EvalKind::Moment, Model::Gen1(p)) => rows.push(single(dist::genml_fractional_moment(p, x)?)),
            (EvalKind::Moment, Model::Gen2(p)) => rows.push(single(dist::ssml_fractional_moment(p, x)?)),
        }
    }
    let simulated = matches!(model, Model::Gen2(_)) && matches!(a.kind, EvalKind::Pmf | EvalKind::Mean);
    let mut out = sink(None)?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["model", "nu", "delta_or_gamma", "lambda", "kind", "input", "k", "value"])?;
            let m = model_fields(&model);
            for r in &rows {
                let (input, k, v) = (r.input.to_string(), r.k.map(|k| k.to_string()).unwrap_or_default(), r.value.to_string());
                w.write_record([m[0].as_str(), &m[1], &m[2], &m[3], kind_name(a.kind), &input, &k, &v])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut rec = OutputRecord::new(argv, json!({ "kind": kind_name(a.kind), "rows": rows })).params(&model);
            if simulated {
                rec = rec.rng(a.seed.seed, a.seed.stream).paths(a.paths);
            }
            writeln!(out, "{}", rec.to_string_pretty())?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn simulate(argv: &[String], a: SimulateArgs) -> CmdResult {
    let model = build_model(&a.model)?;
    let stop = match (a.horizon, a.events) {
        (Some(h), None) => Stop::Horizon(h),
        (None, Some(n)) => Stop::Events(n),
        _ => return Err(CliError::Validation("give exactly one of --horizon and --events".into())),
    };
    let rng = RngStream::new(a.seed.seed, a.seed.stream);
    let paths = process::simulate_paths(&model, stop, a.paths, &rng)?;
    let mut out = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["path_id", "event_index", "event_time", "waiting_time"])?;
            for (i, p) in paths.iter().enumerate() {
                for (j, (t, dt)) in p.event_times.iter().zip(&p.waits).enumerate() {
                    w.write_record([i.to_string(), (j + 1).to_string(), t.to_string(), dt.to_string()])?;
                }
            }
            w.flush()?;
        }
        Format::Json => {
            let payload: Vec<_> = paths
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    json!({ "path_id": i, "count": p.event_times.len(), "event_times": p.event_times, "waiting_times": p.waits })
                })
                .collect();
            let rec = OutputRecord::new(argv, json!({ "stop": stop, "paths": payload }))
                .params(&model)
                .rng(a.seed.seed, a.seed.stream);
            writeln!(out, "{}", rec.to_string_pretty())?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Waiting times from the `waiting_time` column, else from differences of
/// `event_time` within each `path_id`, else from the first column.
pub fn read_waiting_times(text: &str) -> Result<Vec<f64>, CliError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = r.records().collect::<Result<_, _>>()?;
    let Some(first) = records.first() else {
        return Err(CliError::Validation("input contains no waiting times".into()));
    };
    let has_header = first.get(0).is_some_and(|f| f.parse::<f64>().is_err());
    let col = |name: &str| has_header.then(|| first.iter().position(|f| f == name)).flatten();
    let body = &records[has_header as usize..];
    let parse = |row: usize, field: Option<&str>| -> Result<f64, CliError> {
        let f = field.unwrap_or("");
        f.parse::<f64>()
            .map_err(|_| CliError::Validation(format!("row {row}: cannot parse '{f}' as a number")))
    };
    let line = |i: usize| i + 1 + has_header as usize;
    let mut out = Vec::with_capacity(body.len());
    if let Some(c) = col("waiting_time") {
        for (i, rec) in body.iter().enumerate() {
            out.push((line(i), parse(line(i), rec.get(c))?));
        }
    } else if let (Some(pc), Some(tc)) = (col("path_id"), col("event_time")) {
        let mut last: Option<(String, f64)> = None;
        for (i, rec) in body.iter().enumerate() {
            let id = rec.get(pc).unwrap_or("").to_string();
            let t = parse(line(i), rec.get(tc))?;
            let prev = match &last {
                Some((p, t0)) if *p == id => *t0,
                _ => 0.0,
            };
            out.push((line(i), t - prev));
            last = Some((id, t));
        }
    } else {
        for (i, rec) in body.iter().enumerate() {
            out.push((line(i), parse(line(i), rec.get(0))?));
        }
    }
    out.into_iter()
        .map(|(row, w)| {
            if w > 0.0 && w.is_finite() {
                Ok(w)
            } else {
                Err(CliError::Validation(format!("row {row}: waiting time must be positive and finite, got {w}")))
            }
        })
        .collect()
}

pub fn estimate(argv: &[String], a: EstimateArgs) -> CmdResult {
    let text = match a.input.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let waits = read_waiting_times(&text)?;
    let summary = estimate::log_moment_summary(&waits)?;
    let fit = match a.model {
        ModelKind::Gen1 => estimate::estimate_gen1(&summary)?,
        ModelKind::Gen2 => estimate::estimate_gen2_with(
            &summary,
            match a.gamma_sign {
                SignArg::SignRule => GammaSign::SignRule,
                SignArg::Positive => GammaSign::Positive,
            },
        )?,
    };
    let names = match a.model {
        ModelKind::Gen1 => ["nu", "delta", "lambda"],
        ModelKind::Gen2 => ["nu", "gamma", "lambda"],
    };
    let est = fit.triple();
    let raw = fit.unconstrained.map(|u| [u.nu, u.shape, u.lambda]);
    let mut out = sink(None)?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["param", "estimate", "unconstrained"])?;
            for j in 0..3 {
                let u = raw.map(|r| r[j].to_string()).unwrap_or_default();
                w.write_record([names[j], &est[j].to_string(), &u])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let payload = json!({
                "n": summary.n,
                "summary": summary,
                "estimate": { names[0]: est[0], names[1]: est[1], names[2]: est[2] },
                "unconstrained": raw.map(|r| json!({ names[0]: r[0], names[1]: r[1], names[2]: r[2] })),
                "residuals": fit.residuals,
                "residual_norm": fit.residual_norm,
                "diagnostics": fit.diagnostics,
            });
            let rec = OutputRecord::new(argv, payload).params(&fit.params);
            writeln!(out, "{}", rec.to_string_pretty())?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn validate(argv: &[String], a: ValidateArgs) -> CmdResult {
    let suite = match a.suite {
        SuiteArg::Specfun => Suite::Specfun,
        SuiteArg::Dist => Suite::Dist,
        SuiteArg::Process => Suite::Process,
        SuiteArg::All => Suite::All,
    };
    let checks = validation::run(suite, a.seed.seed);
    let all = checks.iter().all(|c| c.passed);
    let mut out = sink(None)?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["suite", "check", "points", "max_error", "tolerance", "passed"])?;
            for c in &checks {
                w.write_record([
                    c.suite.clone(),
                    c.name.clone(),
                    c.points.to_string(),
                    c.max_error.to_string(),
                    c.tolerance.to_string(),
                    c.passed.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rec = OutputRecord::new(argv, json!({ "passed": all, "checks": checks })).rng(a.seed.seed, 0);
            writeln!(out, "{}", rec.to_string_pretty())?;
            out.flush()?;
        }
    }
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}: {} (max error {:e}, tolerance {:e})", c.suite, c.name, c.max_error, c.tolerance);
        if let Some(f) = &c.failure {
            eprintln!("     {f}");
        }
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

pub fn study(argv: &[String], a: StudyArgs) -> CmdResult {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = StudyConfig::parse(&text)?;
    let threads = a
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = mcstudy::run_study_threads(&cfg, threads)?;
    std::fs::create_dir_all(&a.out)?;
    let stem = a.config.file_stem().and_then(|s| s.to_str()).unwrap_or("study");
    let csv_path = a.out.join(format!("{stem}.csv"));
    let json_path = a.out.join(format!("{stem}.json"));
    std::fs::write(&csv_path, result.to_csv())?;
    std::fs::write(&json_path, result.to_json())?;
    let failures: usize = result.cells.iter().filter(|c| c.param == "nu").map(|c| c.failures).sum();
    let rec = OutputRecord::new(
        argv,
        json!({
            "csv": csv_path,
            "json": json_path,
            "cells": result.cells.len(),
            "failed_replications": failures,
        }),
    )
    .rng(cfg.seed, 0);
    let mut out = sink(None)?;
    writeln!(out, "{}", rec.to_string_pretty())?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

use crate::config::{DatasetSource, Format, RunConfig};
use crate::error::CliError;
use crate::output::{FileDigest, OutDir};
use crate::{Command, Outcome};
use coinn::analysis::{build_feature_table, correlation_matrix, point_feature, FeatureError, Method};
use coinn::ann::{mre, train_multistart, Batch, ModelFile, TrainedModel};
use coinn::correlations::{evaluate_correlation, CorrelationBreakdown, CorrelationChoice, CorrelationKind, FlowRegime};
use coinn::datamodel::{bin_by_quality, load_dataset, make_split, read_dataset, write_dataset, Dataset, COLUMNS};
use coinn::experiment::{assemble_inputs, evaluate_model, run_sweep};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Preprocess { input, n_bins } => {
            let mut cfg = cfg.clone();
            if let Some(p) = input {
                let columns = cfg.dataset.take().map(|d| d.columns).unwrap_or_default();
                cfg.dataset = Some(DatasetSource { path: Some(p.clone()), columns, synthetic: None });
            }
            if let Some(n) = n_bins {
                cfg.preprocess.n_bins = *n;
            }
            cmd_preprocess(&cfg)
        }
        Command::Predict(args) => cmd_predict(cfg, args),
        Command::Train => cmd_train(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Evaluate { model } => cmd_evaluate(cfg, model.as_deref()),
        Command::Analyze => cmd_analyze(cfg),
    }
}

/// The configured points plus digests of the files they came from.
fn load(cfg: &RunConfig) -> Result<(Dataset, Vec<FileDigest>), CliError> {
    let src = cfg.dataset.as_ref().ok_or_else(|| CliError::Config("`dataset` is required".into()))?;
    let (ds, inputs) = match (&src.path, &src.synthetic) {
        (Some(p), _) => {
            let digest = FileDigest::of(p)?;
            (load_dataset(p, &src.columns)?, vec![digest])
        }
        (None, Some(task)) => (task.generate()?, Vec::new()),
        (None, None) => return Err(CliError::Config("dataset: one of `path` or `synthetic` is required".into())),
    };
    eprintln!("loaded {} points from {} experiments", ds.len(), ds.experiments().len());
    Ok((ds, inputs))
}

pub fn load_model(path: &Path) -> Result<TrainedModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read model file {}: {e}", path.display())))?;
    ModelFile::from_json(&text)
        .and_then(ModelFile::into_model)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn dataset_csv(ds: &Dataset) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_dataset(ds, &mut buf)?;
    Ok(buf)
}

pub fn cmd_preprocess(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate(true)?;
    let (ds, inputs) = load(cfg)?;
    let binned = bin_by_quality(&ds, cfg.preprocess.n_bins)?;
    let mut out = OutDir::create(&cfg.output_dir)?;
    let path = out.write("preprocessed.csv", &dataset_csv(&binned)?)?;
    let details = json!({
        "n_bins": cfg.preprocess.n_bins,
        "points_in": ds.len(),
        "points_out": binned.len(),
        "bins": binned.bin_stats().unwrap_or_default(),
    });
    let manifest = out.finish("preprocess", cfg, &inputs, details)?;
    Ok(Outcome {
        json: json!({ "points_in": ds.len(), "points_out": binned.len(), "output": path, "manifest": manifest }),
        text: format!("{} points -> {} binned points in {}", ds.len(), binned.len(), path.display()),
    })
}

#[derive(Debug, clap::Args)]
pub struct PredictArgs {
    /// Saved model; defaults to the configured `model_path`.
    #[arg(long, value_name = "PATH", conflicts_with = "correlation")]
    pub model: Option<PathBuf>,
    /// Correlation instead of a model: sun_mishima, awad_muzychka or cicchitti.
    #[arg(long, value_name = "KIND")]
    pub correlation: Option<CorrelationKind>,
    /// CSV of points to predict, instead of the configured dataset.
    #[arg(long, value_name = "PATH", conflicts_with = "point")]
    pub input: Option<PathBuf>,
    /// One point as CSV column values, e.g. `x=0.3,G_kg_sm2=200,...`.
    #[arg(long, value_name = "NAME=VALUE", value_delimiter = ',')]
    pub point: Vec<String>,
    /// Include the correlation's intermediate quantities.
    #[arg(long)]
    pub breakdown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub experiment_id: String,
    pub x: f64,
    pub dpdz_pred: Option<f64>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<CorrelationBreakdown>,
}

/// A single point given as `name=value` pairs in the CSV schema. The id and
/// measured gradient are optional; the latter only has to pass validation.
fn point_dataset(pairs: &[String]) -> Result<Dataset, CliError> {
    let mut header = Vec::new();
    let mut row = Vec::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--point expects NAME=VALUE, got `{pair}`")))?;
        header.push(k.trim().to_string());
        row.push(v.trim().to_string());
    }
    for (name, default) in [("experiment_id", "point"), ("dpdz_Pa_m", "1")] {
        if !header.iter().any(|h| h == name) {
            header.push(name.into());
            row.push(default.into());
        }
    }
    if let Some(missing) = COLUMNS.iter().find(|c| !header.iter().any(|h| h == *c)) {
        return Err(CliError::Config(format!("--point is missing `{missing}`")));
    }
    let text = format!("{}\n{}\n", header.join(","), row.join(","));
    Ok(read_dataset(text.as_bytes(), &Default::default())?)
}

enum Predictor {
    Correlation(CorrelationChoice),
    Model(TrainedModel),
}

pub fn cmd_predict(cfg: &RunConfig, args: &PredictArgs) -> Result<Outcome, CliError> {
    cfg.validate(args.input.is_none() && args.point.is_empty())?;
    let mut choice = cfg.correlation.choice();
    let predictor = match (&args.model, args.correlation) {
        (Some(p), _) => Predictor::Model(load_model(p)?),
        (None, Some(kind)) => {
            choice.kind = kind;
            Predictor::Correlation(choice)
        }
        (None, None) => match &cfg.model_path {
            Some(p) => Predictor::Model(load_model(p)?),
            None => Predictor::Correlation(choice),
        },
    };
    let (ds, inputs) = if !args.point.is_empty() {
        (point_dataset(&args.point)?, Vec::new())
    } else if let Some(p) = &args.input {
        let columns = cfg.dataset.as_ref().map(|d| d.columns.clone()).unwrap_or_default();
        (load_dataset(p, &columns)?, vec![FileDigest::of(p)?])
    } else {
        load(cfg)?
    };

    let mut rows = Vec::with_capacity(ds.len());
    for p in ds.points() {
        let value = match &predictor {
            Predictor::Correlation(c) => evaluate_correlation(c, p).map(|r| r.0.dpdz()).map_err(|e| e.to_string()),
            Predictor::Model(m) => {
                let features: Result<Vec<f64>, FeatureError> = m
                    .feature_names
                    .iter()
                    .map(|n| point_feature(p, n, ds.composition_names(), &choice.options))
                    .collect();
                match features {
                    Ok(f) => Ok(m.predict(&[f])[0]),
                    Err(FeatureError::Unknown(n)) => {
                        return Err(CliError::Config(format!("model input `{n}` is not available for these points")))
                    }
                    Err(e) => Err(e.to_string()),
                }
            }
        };
        let breakdown = args.breakdown.then(|| evaluate_correlation(&choice, p).ok().map(|r| r.1)).flatten();
        let (dpdz_pred, error) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e)),
        };
        rows.push(PredictionRow { experiment_id: p.experiment_id.clone(), x: p.fluid.x, dpdz_pred, error, breakdown });
    }

    if !args.point.is_empty() {
        let row = rows.pop().expect("one point");
        let value = row.dpdz_pred.ok_or_else(|| CliError::Data(row.error.clone().unwrap_or_default()))?;
        let mut text = format!("{value}");
        if let Some(bd) = &row.breakdown {
            for (name, v) in bd.fields() {
                if let Some(v) = v {
                    text.push_str(&format!("\n{name} = {v}"));
                }
            }
            if let Some(g) = bd.regime {
                text.push_str(&format!("\nregime = {}", regime_name(g)));
            }
        }
        return Ok(Outcome { json: json!({ "dpdz": value, "breakdown": row.breakdown }), text });
    }

    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let mut out = OutDir::create(&cfg.output_dir)?;
    if cfg.wants(Format::Csv) {
        out.write("predictions.csv", &predictions_csv(&rows, args.breakdown)?)?;
    }
    if cfg.wants(Format::Json) {
        out.write_json("predictions.json", &rows)?;
    }
    let source = match &predictor {
        Predictor::Correlation(c) => c.kind.name().to_string(),
        Predictor::Model(m) => format!("model({})", m.feature_names.join(",")),
    };
    let manifest = out.finish("predict", cfg, &inputs, json!({ "predictor": source, "rows": rows.len(), "failed": failed }))?;
    if failed > 0 {
        eprintln!("{failed} of {} rows could not be evaluated", rows.len());
    }
    Ok(Outcome {
        json: json!({ "rows": rows.len(), "failed": failed, "predictor": source, "manifest": manifest }),
        text: format!("{} predictions ({failed} failed) with {source} in {}", rows.len(), cfg.output_dir.display()),
    })
}

fn regime_name(g: FlowRegime) -> String {
    serde_json::to_value(g).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

pub fn predictions_csv(rows: &[PredictionRow], breakdown: bool) -> Result<Vec<u8>, CliError> {
    let names: Vec<&str> = CorrelationBreakdown::default().fields().iter().map(|f| f.0).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment_id", "x", "dpdz_pred", "error"];
    if breakdown {
        header.extend(&names);
        header.push("regime");
    }
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    w.write_record(&header).map_err(|e| CliError::Data(e.to_string()))?;
    for r in rows {
        let mut rec = vec![r.experiment_id.clone(), r.x.to_string(), opt(r.dpdz_pred), r.error.clone().unwrap_or_default()];
        if breakdown {
            let bd = r.breakdown.clone().unwrap_or_default();
            rec.extend(bd.fields().iter().map(|f| opt(f.1)));
            rec.push(bd.regime.map(regime_name).unwrap_or_default());
        }
        w.write_record(&rec).map_err(|e| CliError::Data(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub input_set: String,
    pub features: Vec<String>,
    pub n_hidden: usize,
    pub n_restarts: usize,
    pub seed: u64,
    pub chosen_restart: usize,
    pub diverged_restarts: usize,
    pub train_mre: Option<f64>,
    pub validation_mre: Option<f64>,
    pub test_mre: Option<f64>,
    pub holdout_mre: Option<f64>,
}

fn subset_mre(model: &TrainedModel, all: &Batch, idx: &[usize]) -> Result<Option<f64>, CliError> {
    if idx.is_empty() {
        return Ok(None);
    }
    let b = all.select(idx);
    Ok(Some(mre(&b.targets, &model.predict(&b.inputs))?))
}

pub fn cmd_train(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate(true)?;
    let spec = cfg.train_spec()?;
    let (ds, inputs) = load(cfg)?;
    let all = assemble_inputs(spec, &ds, &cfg.correlation.options())?;
    let split = make_split(&ds, &cfg.holdouts(), cfg.fractions, cfg.seed)?;
    let tcfg = cfg.train_config();
    eprintln!("training `{}` with {} hidden neurons, {} restarts", spec.name, cfg.n_hidden, tcfg.n_restarts);
    let model = train_multistart(&all.select(&split.train), &all.select(&split.validation), &tcfg, cfg.n_hidden)?;

    let report = TrainReport {
        input_set: spec.name.clone(),
        features: model.feature_names.clone(),
        n_hidden: cfg.n_hidden,
        n_restarts: tcfg.n_restarts,
        seed: cfg.seed,
        chosen_restart: model.chosen_restart,
        diverged_restarts: model.history.iter().filter(|r| r.diverged()).count(),
        train_mre: subset_mre(&model, &all, &split.train)?,
        validation_mre: subset_mre(&model, &all, &split.validation)?,
        test_mre: subset_mre(&model, &all, &split.test)?,
        holdout_mre: subset_mre(&model, &all, &split.holdout)?,
    };
    let mut out = OutDir::create(&cfg.output_dir)?;
    let model_path = out.write("model.json", ModelFile::from_model(&model).to_json().as_bytes())?;
    out.write_json("split.json", &split)?;
    if cfg.wants(Format::Csv) {
        let mut csv = String::from("restart,train_mse,selection_mre,iterations,stop\n");
        for r in &model.history {
            let stop = serde_json::to_value(r.stop).expect("stop reason");
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.restart,
                r.train_mse,
                r.selection_mre,
                r.iterations,
                stop.as_str().unwrap_or_default()
            ));
        }
        out.write("restarts.csv", csv.as_bytes())?;
    }
    if cfg.wants(Format::Json) {
        out.write_json("restarts.json", &model.history)?;
        out.write_json("train_report.json", &report)?;
    }
    let manifest = out.finish("train", cfg, &inputs, serde_json::to_value(&report).expect("report"))?;
    let pct = |v: Option<f64>| v.map(|v| format!("{v:.3}%")).unwrap_or_else(|| "n/a".into());
    Ok(Outcome {
        text: format!(
            "model written to {} (restart {}); mre train {} validation {} test {} holdout {}",
            model_path.display(),
            report.chosen_restart,
            pct(report.train_mre),
            pct(report.validation_mre),
            pct(report.test_mre),
            pct(report.holdout_mre)
        ),
        json: json!({ "model": model_path, "manifest": manifest, "report": report }),
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate(true)?;
    let (ds, inputs) = load(cfg)?;
    let hidden = cfg.hidden_sizes();
    eprintln!("sweeping {} input sets x {} hidden sizes", cfg.input_sets.len(), hidden.len());
    let report = run_sweep(
        &ds,
        &cfg.input_sets,
        &hidden,
        &cfg.train_config(),
        &cfg.holdouts(),
        cfg.fractions,
        &cfg.correlation.options(),
    )?;
    let mut out = OutDir::create(&cfg.output_dir)?;
    if cfg.wants(Format::Csv) {
        out.write("sweep.csv", report.to_csv().as_bytes())?;
    }
    if cfg.wants(Format::Json) {
        out.write_json("sweep.json", &report)?;
    }
    let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
    let manifest = out.finish("sweep", cfg, &inputs, json!({ "cells": report.cells.len(), "failed": failed, "best": report.best }))?;
    let best: Vec<String> = report.best.iter().map(|(s, h)| format!("{s}: {h}")).collect();
    Ok(Outcome {
        text: format!("{} cells ({failed} failed); best hidden size per set: {}", report.cells.len(), best.join(", ")),
        json: json!({ "cells": report.cells.len(), "failed": failed, "best": report.best, "manifest": manifest }),
    })
}

pub fn cmd_evaluate(cfg: &RunConfig, model: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate(true)?;
    let path = match (model, &cfg.model_path) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => cfg.output_dir.join("model.json"),
    };
    let trained = load_model(&path)?;
    let (ds, mut inputs) = load(cfg)?;
    inputs.push(FileDigest::of(&path)?);
    let report = evaluate_model(&trained, &ds, &cfg.correlation.choice(), &cfg.holdouts())?;
    let mut out = OutDir::create(&cfg.output_dir)?;
    if cfg.wants(Format::Csv) {
        out.write("evaluation.csv", report.to_csv().as_bytes())?;
    }
    if cfg.wants(Format::Json) {
        out.write_json("evaluation.json", &report)?;
    }
    let summary = json!({
        "model_mre_avg": report.model_mre_avg,
        "correlation_mre_avg": report.correlation_mre_avg,
        "holdout_model_mre_avg": report.holdout_model_mre_avg,
        "holdout_correlation_mre_avg": report.holdout_correlation_mre_avg,
    });
    let manifest = out.finish("evaluate", cfg, &inputs, summary.clone())?;
    Ok(Outcome {
        text: format!(
            "average mre over {} experiments: model {:.3}%, {} {:.3}%",
            report.experiments.len(),
            report.model_mre_avg,
            report.reference.kind.name(),
            report.correlation_mre_avg
        ),
        json: json!({ "summary": summary, "manifest": manifest }),
    })
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate(true)?;
    let (ds, inputs) = load(cfg)?;
    let table = build_feature_table(&ds, &cfg.correlation.options(), cfg.analysis_columns.as_deref())?;
    let mut out = OutDir::create(&cfg.output_dir)?;
    let mut undefined = 0;
    for (method, stem) in [(Method::Pearson, "pearson"), (Method::Spearman, "spearman")] {
        let m = correlation_matrix(&table, method);
        undefined += m.values.iter().flatten().filter(|v| v.is_none()).count();
        if cfg.wants(Format::Csv) {
            out.write(&format!("{stem}.csv"), m.to_csv().as_bytes())?;
        }
        if cfg.wants(Format::Json) {
            out.write_json(&format!("{stem}.json"), &m)?;
        }
    }
    if undefined > 0 {
        eprintln!("{undefined} coefficients are undefined (constant columns)");
    }
    let manifest = out.finish("analyze", cfg, &inputs, json!({ "features": table.names, "points": table.len() }))?;
    Ok(Outcome {
        text: format!("{} features over {} points analysed into {}", table.names.len(), table.len(), cfg.output_dir.display()),
        json: json!({ "features": table.names, "points": table.len(), "manifest": manifest }),
    })
}

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fmt_effort::baselines::{fit_mlr, fit_treeboost, TreeboostConfig, UcpRatioModel};
use fmt_effort::compare::{compare, CompareConfig};
use fmt_effort::data::{
    generate_piecewise_benchmark, generate_synthetic, parse_dataset, Dataset, SourceProfile,
};
use fmt_effort::eval::{evaluate, EvalReport};
use fmt_effort::fcm::FcmConfig;
use fmt_effort::fuzzy_tree::train_fmt;
use fmt_effort::mtree::TreeConfig;
use fmt_effort::stats::{mean, sample_sd, skewness};
use fmt_effort::svg::boxplot_svg;
use fmt_effort::ucp::{classical_effort, compute_ucp, UseCaseModel};
use log::info;

use crate::saved::{ModelKind, SavedModel};
use crate::{Command, Tuning};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            profile,
            n,
            seed,
            out,
        } => synth(&profile, n, seed, out.as_deref()),
        Command::Bench { n, seed, out } => {
            let ds = generate_piecewise_benchmark(n, seed)?;
            emit(out.as_deref(), &ds.to_csv())
        }
        Command::Ucp { model, ratio } => ucp(&model, ratio),
        Command::Train {
            data,
            model,
            tuning,
            out,
        } => train(&data, model, &tuning, &out),
        Command::Predict { model, data, out } => predict(&model, &data, out.as_deref()),
        Command::Evaluate {
            predictions,
            data,
            out,
        } => evaluate_cmd(&predictions, &data, out.as_deref()),
        Command::Compare {
            data,
            train_count,
            tuning,
            out,
        } => compare_cmd(&data, train_count, &tuning, &out),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write(p, contents),
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn synth(profile: &str, n: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let Some((p, label)) = SourceProfile::by_name(profile) else {
        bail!("unknown profile `{profile}` (expected ind1, ind2 or edu)");
    };
    let ds = generate_synthetic(&p, n, seed)?.with_source(label);
    emit(out, &ds.to_csv())?;
    let efforts = ds.efforts();
    let summary = format!(
        "{label}: n={} mean={:.1} sd={:.1} skewness={:.3} (targets mean={:.1} sd={:.1} skewness={:.3})\n",
        efforts.len(),
        mean(&efforts),
        sample_sd(&efforts),
        skewness(&efforts),
        p.mean_effort,
        p.sd_effort,
        p.skewness,
    );
    // Keep stdout clean when it carries the CSV.
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn ucp(path: &Path, ratio: f64) -> Result<()> {
    let model = UseCaseModel::from_json(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let b = compute_ucp(&model)?;
    let effort = classical_effort(b.ucp, ratio)?;
    println!("UWA   {:.4}", b.uwa);
    println!("UUC   {:.4}", b.uuc);
    println!("UUCP  {:.4}", b.uucp);
    println!("TCF   {:.4}", b.tcf);
    println!("EF    {:.4}", b.ef);
    println!("UCP   {:.4}", b.ucp);
    println!("effort {:.2} PH at {ratio} PH/UCP", effort);
    Ok(())
}

fn fcm_config(t: &Tuning) -> Result<FcmConfig> {
    let mut c = FcmConfig {
        seed: t.seed,
        ..FcmConfig::default()
    };
    if let Some(k) = t.clusters {
        c.clusters = k;
    }
    if let Some(m) = t.fuzzifier {
        c.fuzzifier = m;
    }
    c.validate()?;
    Ok(c)
}

fn treeboost_config(t: &Tuning) -> Result<TreeboostConfig> {
    let mut c = TreeboostConfig {
        seed: t.seed,
        ..TreeboostConfig::default()
    };
    if let Some(n) = t.trees {
        c.n_trees = n;
    }
    if let Some(v) = t.shrinkage {
        c.shrinkage = v;
    }
    c.validate()?;
    Ok(c)
}

fn ratio_model(t: &Tuning) -> Result<UcpRatioModel> {
    let m = t
        .ratio
        .map_or_else(UcpRatioModel::default, |ratio| UcpRatioModel { ratio });
    if !(m.ratio.is_finite() && m.ratio > 0.0) {
        bail!("ratio must be positive, got {}", m.ratio);
    }
    Ok(m)
}

fn train(data: &Path, kind: ModelKind, tuning: &Tuning, out: &Path) -> Result<()> {
    // Validate every override up front, whichever model is trained.
    let fcm = fcm_config(tuning)?;
    let boost = treeboost_config(tuning)?;
    let ratio = ratio_model(tuning)?;
    let ds = load_dataset(data)?;
    info!("training {kind:?} on {} projects", ds.len());
    let saved = match kind {
        ModelKind::Fmt => SavedModel::Fmt(train_fmt(&ds, &fcm, &TreeConfig::default())?),
        ModelKind::Treeboost => SavedModel::Treeboost(fit_treeboost(&ds, &boost)?),
        ModelKind::Mlr => SavedModel::Mlr(fit_mlr(&ds)?),
        ModelKind::Ucp => SavedModel::Ucp(ratio),
    };
    write(out, &(serde_json::to_string_pretty(&saved)? + "\n"))
}

fn predict(model_path: &Path, data: &Path, out: Option<&Path>) -> Result<()> {
    let saved: SavedModel = serde_json::from_str(&read(model_path)?)
        .with_context(|| format!("parsing model {}", model_path.display()))?;
    saved.check_features()?;
    let ds = load_dataset(data)?;
    info!(
        "predicting {} projects with a {} model",
        ds.len(),
        saved.kind()
    );
    let mut csv = String::from("id,predicted\n");
    for p in ds.projects() {
        let value = saved
            .predict(p)
            .with_context(|| format!("project `{}`", p.id))?;
        csv.push_str(&format!("{},{}\n", p.id, value));
    }
    emit(out, &csv)
}

/// Reads an `id,predicted` file.
fn load_predictions(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = read(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().context("predictions file is empty")?;
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols != ["id", "predicted"] {
        bail!("predictions header must be `id,predicted`, got `{header}`");
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let (id, value) = line
                .split_once(',')
                .with_context(|| format!("predictions row {}: expected two fields", i + 1))?;
            let value: f64 = value.trim().parse().with_context(|| {
                format!("predictions row {}: bad number `{}`", i + 1, value.trim())
            })?;
            Ok((id.trim().to_string(), value))
        })
        .collect()
}

fn evaluate_cmd(predictions: &Path, data: &Path, out: Option<&Path>) -> Result<()> {
    let preds = load_predictions(predictions)?;
    let ds = load_dataset(data)?;
    let by_id: HashMap<&str, f64> = preds.iter().map(|(id, v)| (id.as_str(), *v)).collect();
    if by_id.len() != preds.len() {
        bail!("predictions file contains duplicate ids");
    }
    let missing: Vec<&str> = ds
        .projects()
        .iter()
        .map(|p| p.id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let known: HashMap<&str, ()> = ds.projects().iter().map(|p| (p.id.as_str(), ())).collect();
    let unknown: Vec<&str> = preds
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !known.contains_key(id))
        .collect();
    if !missing.is_empty() || !unknown.is_empty() {
        bail!(
            "id sets differ; missing predictions for [{}]; no actuals for [{}]",
            missing.join(", "),
            unknown.join(", ")
        );
    }
    let actual = ds.efforts();
    let predicted: Vec<f64> = ds.projects().iter().map(|p| by_id[p.id.as_str()]).collect();
    let report = evaluate(&actual, &predicted)?;
    print!("{}", report_text(&report));
    if let Some(path) = out {
        write(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(())
}

fn report_text(r: &EvalReport) -> String {
    let b = &r.boxplot;
    format!(
        "MMRE        {:.1}\nMdMRE       {:.1}\nPred(0.25)  {:.1}\nPred(0.5)   {:.1}\n\
         |residual|  min {:.1}  q1 {:.1}  median {:.1}  q3 {:.1}  max {:.1}  outliers {}\n",
        100.0 * r.mmre,
        100.0 * r.mdmre,
        r.pred25,
        r.pred50,
        b.min,
        b.q1,
        b.median,
        b.q3,
        b.max,
        b.outliers.len()
    )
}

fn compare_cmd(data: &Path, train_count: usize, tuning: &Tuning, out: &Path) -> Result<()> {
    let config = CompareConfig {
        seed: tuning.seed,
        train_count,
        fcm: fcm_config(tuning)?,
        tree: TreeConfig::default(),
        treeboost: treeboost_config(tuning)?,
        ucp_ratio: ratio_model(tuning)?.ratio,
        ..CompareConfig::default()
    };
    let ds = load_dataset(data)?;
    let report = compare(&ds, &config).context("comparing models")?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let metrics = report.metrics_table();
    let wtl = report.wtl.to_string();
    write(&out.join("metrics.txt"), &metrics)?;
    write(&out.join("wtl.txt"), &wtl)?;
    write(&out.join("report.json"), &(report.to_json() + "\n"))?;
    write(&out.join("wtl.json"), &(report.wtl.to_json() + "\n"))?;
    let boxes: Vec<_> = report
        .models
        .iter()
        .map(|m| (m.name.clone(), m.report.boxplot.clone()))
        .collect();
    write(
        &out.join("residuals.svg"),
        &boxplot_svg("Absolute residuals (PH)", &boxes),
    )?;
    print!("{metrics}\n{wtl}");
    Ok(())
}

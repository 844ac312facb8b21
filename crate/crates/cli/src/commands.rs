//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use comfort_core::baselines::{BaselineKind, BaselineParams};
use comfort_core::dataset::{
    enrich_climate, load_dataset, summarize_dataset, write_canonical_csv, CityZoneTable, ClimateZone, ColumnMapping,
    ComfortRecord, Domain, DomainDataset, FeatureSet, FeatureSetTag, Standardizer,
};
use comfort_core::evaluation::{
    generate_synthetic_scenario, run_cv_with_pool, run_feature_ablation, run_hidden_layer_sweep,
    run_transfer_benefit, summary_csv, Algorithm, BenefitConfig, CvConfig, SyntheticSpec,
};
use comfort_core::neural::{load_model, save_model, EarlyStopping, TrainConfig};
use comfort_core::pmv::{compute_pmv, pmv_class, PmvInput};
use comfort_core::resampling::Resampler;
use comfort_core::transfer::{assemble_source_pool, train_source as fit_source, transfer_fine_tune, SourcePool, TransferPlan};

use crate::manifest::RunManifest;
use crate::TrainFlags;

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `builtin:NAME` (ashrae-rp884, scales, medium-us-office, canonical) or a mapping file.
    #[arg(long, default_value = "builtin:canonical")]
    pub mapping: String,
    #[arg(long, default_value = "dataset")]
    pub dataset_id: String,
    /// Extra city → zone table merged over the bundled one.
    #[arg(long)]
    pub zones: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "builtin:canonical")]
    pub mapping: String,
}

#[derive(Args, Debug)]
pub struct PmvArgs {
    /// Air temperature, °C.
    #[arg(long, allow_negative_numbers = true)]
    pub ta: f64,
    /// Mean radiant temperature, °C.
    #[arg(long, allow_negative_numbers = true)]
    pub tr: f64,
    /// Air velocity, m/s.
    #[arg(long)]
    pub vel: f64,
    /// Relative humidity, %.
    #[arg(long)]
    pub rh: f64,
    #[arg(long)]
    pub met: f64,
    #[arg(long)]
    pub clo: f64,
}

/// Source datasets and how to read them.
#[derive(Args, Debug, Clone)]
pub struct SourceFlags {
    /// ASHRAE-style source CSV.
    #[arg(long)]
    pub source_a: Option<PathBuf>,
    #[arg(long, default_value = "builtin:ashrae-rp884")]
    pub source_a_mapping: String,
    /// Scales-style source CSV.
    #[arg(long)]
    pub source_s: Option<PathBuf>,
    #[arg(long, default_value = "builtin:scales")]
    pub source_s_mapping: String,
    #[arg(long)]
    pub zones: Option<PathBuf>,
    /// Epochs for source training.
    #[arg(long, default_value_t = 500)]
    pub source_epochs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct TargetFlags {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, default_value = "builtin:medium-us-office")]
    pub target_mapping: String,
    /// xa | xb | xc
    #[arg(long, default_value = "xc")]
    pub feature_set: String,
}

#[derive(Args, Debug)]
pub struct TrainSourceArgs {
    #[command(flatten)]
    pub source: SourceFlags,
    /// `all` or `zone:<A-E>`.
    #[arg(long, default_value = "all")]
    pub pool: String,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    #[arg(long)]
    pub source_model: PathBuf,
    #[command(flatten)]
    pub target: TargetFlags,
    /// Also copy and freeze the source output layer.
    #[arg(long)]
    pub retain_output: bool,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Args, Debug, Clone)]
pub struct CvFlags {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub stratified: bool,
    /// Neighbours for knn.
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub retain_output: bool,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// pmv | random | knn | nb | tree | forest | mlp | tl-mlp | tl-mlp-c
    #[arg(long)]
    pub model: String,
    /// Climate zone of the target, used by tl-mlp-c.
    #[arg(long, default_value = "C")]
    pub zone: String,
    /// Pre-trained source model; skips source training.
    #[arg(long)]
    pub source_model: Option<PathBuf>,
    #[command(flatten)]
    pub target: TargetFlags,
    #[command(flatten)]
    pub source: SourceFlags,
    #[command(flatten)]
    pub cv: CvFlags,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Args, Debug)]
pub struct AblationArgs {
    #[arg(long, default_value = "knn,nb,tree,forest,mlp", value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long, default_value = "C")]
    pub zone: String,
    #[command(flatten)]
    pub target: TargetFlags,
    #[command(flatten)]
    pub source: SourceFlags,
    #[command(flatten)]
    pub cv: CvFlags,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value = "1,2,3,4", value_delimiter = ',')]
    pub depths: Vec<usize>,
    #[arg(long, default_value = "zone:C")]
    pub pool: String,
    #[command(flatten)]
    pub target: TargetFlags,
    #[command(flatten)]
    pub source: SourceFlags,
    #[command(flatten)]
    pub cv: CvFlags,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub source_rows: usize,
    #[arg(long, default_value_t = 300)]
    pub target_train: usize,
    #[arg(long, default_value_t = 1000)]
    pub target_test: usize,
    /// Also compare TL-MLP-C*, TL-MLP and scratch MLP over `--seeds` scenarios.
    #[arg(long)]
    pub benefit: bool,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 500)]
    pub source_epochs: usize,
}

fn zone_table(extra: Option<&Path>, m: &mut RunManifest) -> Result<CityZoneTable> {
    let mut table = CityZoneTable::bundled();
    if let Some(p) = extra {
        m.fingerprint(p)?;
        table.extend(&CityZoneTable::from_path(p)?);
    }
    Ok(table)
}

fn load(path: &Path, mapping: &str, id: &str, table: &CityZoneTable, m: &mut RunManifest) -> Result<Vec<ComfortRecord>> {
    let mapping = ColumnMapping::resolve(mapping)?;
    let loaded = load_dataset(path, &mapping, id)?;
    m.fingerprint(path)?;
    let mut records = loaded.records;
    let report = enrich_climate(&mut records, table);
    m.pool_sizes.insert(format!("{id}_rows"), records.len());
    if loaded.report.dropped_count() > 0 {
        m.notes
            .push(format!("{id}: dropped {} of {} rows", loaded.report.dropped_count(), loaded.report.rows_read));
    }
    if report.unknown > 0 {
        m.notes.push(format!("{id}: {} rows without a climate zone", report.unknown));
    }
    Ok(records)
}

fn load_sources(s: &SourceFlags, m: &mut RunManifest) -> Result<(Vec<ComfortRecord>, Vec<ComfortRecord>)> {
    if s.source_a.is_none() && s.source_s.is_none() {
        bail!("no source dataset given (use --source-a and/or --source-s)");
    }
    let table = zone_table(s.zones.as_deref(), m)?;
    let a = match &s.source_a {
        Some(p) => load(p, &s.source_a_mapping, "source_a", &table, m)?,
        None => Vec::new(),
    };
    let b = match &s.source_s {
        Some(p) => load(p, &s.source_s_mapping, "source_s", &table, m)?,
        None => Vec::new(),
    };
    m.flag("source_epochs", s.source_epochs);
    Ok((a, b))
}

fn load_target(t: &TargetFlags, m: &mut RunManifest) -> Result<Vec<ComfortRecord>> {
    m.flag("target_mapping", &t.target_mapping);
    m.flag("feature_set", &t.feature_set);
    let table = CityZoneTable::bundled();
    load(&t.target, &t.target_mapping, "target", &table, m)
}

fn feature_set(name: &str) -> Result<FeatureSet> {
    Ok(FeatureSet::from_tag(name.parse::<FeatureSetTag>()?))
}

fn train_config(f: &TrainFlags, early: bool) -> TrainConfig {
    TrainConfig {
        learning_rate: f.lr,
        batch_size: f.batch,
        max_epochs: f.epochs,
        seed: f.seed,
        early_stopping: early.then(EarlyStopping::default),
        ..Default::default()
    }
}

fn record_train(m: &mut RunManifest, f: &TrainFlags) {
    m.seed = Some(f.seed);
    m.flag("seed", f.seed);
    m.flag("lr", f.lr);
    m.flag("batch", f.batch);
    m.flag("epochs", f.epochs);
    m.flag("hidden", format!("{:?}", f.hidden));
    m.flag("resampler", &f.resampler);
}

fn cv_config(t: &TargetFlags, cv: &CvFlags, f: &TrainFlags, m: &mut RunManifest) -> Result<CvConfig> {
    m.flag("k", cv.k);
    m.flag("stratified", cv.stratified);
    m.flag("knn_k", cv.knn_k);
    m.flag("n_trees", cv.n_trees);
    m.flag("max_depth", cv.max_depth.map_or("none".into(), |d| d.to_string()));
    m.flag("retain_output", cv.retain_output);
    Ok(CvConfig {
        k: cv.k,
        seed: f.seed,
        stratified: cv.stratified,
        feature_set: feature_set(&t.feature_set)?,
        resampler: Resampler::parse(&f.resampler)?,
        hidden: f.hidden.clone(),
        train: train_config(f, true),
        baseline: BaselineParams {
            k: cv.knn_k,
            n_trees: cv.n_trees,
            max_depth: cv.max_depth,
            seed: f.seed,
        },
        retain_output: cv.retain_output,
    })
}

fn source_plan(pool: SourcePool, s: &SourceFlags, f: &TrainFlags) -> Result<TransferPlan> {
    Ok(TransferPlan {
        source_pool: pool,
        hidden: f.hidden.clone(),
        source_train: train_config(f, false).with_epochs(s.source_epochs),
        fine_tune: train_config(f, true),
        resampler: Resampler::parse(&f.resampler)?,
        ..Default::default()
    }
    .with_seed(f.seed))
}

/// Build the algorithm named on the command line, training a source model
/// when a transfer variant is asked for.
fn algorithm(
    name: &str,
    zone: &str,
    source_model: Option<&Path>,
    s: &SourceFlags,
    f: &TrainFlags,
    m: &mut RunManifest,
) -> Result<(Algorithm, Option<String>)> {
    let name = name.trim().to_ascii_lowercase();
    let pool = match name.as_str() {
        "pmv" => return Ok((Algorithm::Pmv, None)),
        "mlp" => return Ok((Algorithm::Mlp, None)),
        "tl-mlp" => SourcePool::AllHvac,
        "tl-mlp-c" | "tl-mlp-c*" => SourcePool::SameClimateZone(zone.parse::<ClimateZone>()?),
        other => return Ok((Algorithm::Baseline(other.parse::<BaselineKind>()?), None)),
    };
    let model = match source_model {
        Some(p) => {
            m.fingerprint(p)?;
            load_model(p)?
        }
        None => {
            let (a, b) = load_sources(s, m)?;
            let plan = source_plan(pool, s, f)?;
            let pooled = assemble_source_pool(&a, &b, &plan)?;
            m.pool_sizes.insert(format!("pool {pool}"), pooled.len());
            fit_source(&pooled, &plan)?.model
        }
    };
    Ok((
        Algorithm::Transfer {
            label: name,
            source: Arc::new(model),
        },
        Some(pool.to_string()),
    ))
}

fn write(out: &Path, name: &str, text: &str, m: &mut RunManifest) -> Result<()> {
    fs::write(out.join(name), text).with_context(|| format!("writing {name}"))?;
    m.outputs.push(name.into());
    Ok(())
}

pub fn ingest(a: &IngestArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("ingest");
    m.flag("mapping", &a.mapping);
    m.flag("dataset_id", &a.dataset_id);
    let table = zone_table(a.zones.as_deref(), &mut m)?;
    let mapping = ColumnMapping::resolve(&a.mapping)?;
    let loaded = load_dataset(&a.input, &mapping, &a.dataset_id)?;
    m.fingerprint(&a.input)?;
    let mut records = loaded.records;
    enrich_climate(&mut records, &table);
    let mut buf = Vec::new();
    write_canonical_csv(&records, &mut buf)?;
    write(out, &format!("{}.canonical.csv", a.dataset_id), &String::from_utf8(buf)?, &mut m)?;
    let mut drops = String::from("row,reason\n");
    for d in &loaded.report.dropped {
        drops.push_str(&format!("{},\"{}\"\n", d.row, d.reason));
    }
    write(out, &format!("{}.dropped.csv", a.dataset_id), &drops, &mut m)?;
    m.pool_sizes.insert("rows_read".into(), loaded.report.rows_read);
    m.pool_sizes.insert("rows_kept".into(), records.len());
    println!(
        "{}: kept {} of {} rows",
        a.dataset_id,
        records.len(),
        loaded.report.rows_read
    );
    m.write(out, t0.elapsed())
}

pub fn summarize(a: &SummarizeArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("summarize");
    m.flag("mapping", &a.mapping);
    let table = CityZoneTable::bundled();
    let records = load(&a.input, &a.mapping, "input", &table, &mut m)?;
    let summary = summarize_dataset(&records)?;
    let csv = summary.to_csv()?;
    print!("{csv}");
    write(out, "summary.csv", &csv, &mut m)?;
    m.write(out, t0.elapsed())
}

pub fn pmv(a: &PmvArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("pmv");
    let input = PmvInput {
        ta: a.ta,
        tr: a.tr,
        vel: a.vel,
        rh: a.rh,
        met: a.met,
        clo: a.clo,
    };
    for (k, v) in [("ta", a.ta), ("tr", a.tr), ("vel", a.vel), ("rh", a.rh), ("met", a.met), ("clo", a.clo)] {
        m.flag(k, v);
    }
    let score = compute_pmv(&input)?;
    let class = pmv_class(score);
    let line = format!("pmv={:.4} class={class}", score.value());
    println!("{line}");
    write(out, "pmv.txt", &format!("{line}\n"), &mut m)?;
    m.write(out, t0.elapsed())
}

pub fn train_source(a: &TrainSourceArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("train-source");
    record_train(&mut m, &a.train);
    m.flag("pool", &a.pool);
    let pool: SourcePool = a.pool.parse()?;
    let (ra, rs) = load_sources(&a.source, &mut m)?;
    let plan = source_plan(pool, &a.source, &a.train)?;
    let pooled = assemble_source_pool(&ra, &rs, &plan)?;
    m.pool_sizes.insert(format!("pool {pool}"), pooled.len());
    let trained = fit_source(&pooled, &plan)?;
    save_model(&trained.model, &out.join("source.model"))?;
    m.outputs.push("source.model".into());
    write(out, "source_standardizer.toml", &toml::to_string(&trained.standardizer)?, &mut m)?;
    write(out, "source_loss.csv", &loss_csv(&trained.history.loss), &mut m)?;
    let last = trained.history.loss.last().copied().unwrap_or(f64::NAN);
    m.notes.push(format!("epochs run: {}, final loss {last:.6}", trained.history.epochs()));
    println!("source model on {} rows, final loss {last:.6}", pooled.len());
    m.write(out, t0.elapsed())
}

fn loss_csv(loss: &[f64]) -> String {
    let mut s = String::from("epoch,loss\n");
    for (i, l) in loss.iter().enumerate() {
        s.push_str(&format!("{},{l:.8}\n", i + 1));
    }
    s
}

pub fn transfer(a: &TransferArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("transfer");
    record_train(&mut m, &a.train);
    m.flag("retain_output", a.retain_output);
    m.fingerprint(&a.source_model)?;
    let source = load_model(&a.source_model)?;
    let records = load_target(&a.target, &mut m)?;
    let data = DomainDataset::from_records(&records, &feature_set(&a.target.feature_set)?, Domain::Target)?;
    let standardizer = Standardizer::fit(&data)?;
    let scaled = standardizer.transform(&data)?;
    let resampler = Resampler::parse(&a.train.resampler)?;
    let (balanced, _) =
        comfort_core::resampling::resample_dataset(&scaled, &resampler, comfort_core::rng::derive(a.train.seed, "resample"))?;
    let plan = TransferPlan {
        hidden: source.hidden_widths(),
        fine_tune: train_config(&a.train, true),
        retain_output: a.retain_output,
        resampler,
        ..Default::default()
    };
    let tuned = transfer_fine_tune(&source, &balanced, &plan)?;
    if !tuned.lower_layers_adapted {
        m.notes.push("no lower layers adapted".into());
    }
    save_model(&tuned.model, &out.join("transfer.model"))?;
    m.outputs.push("transfer.model".into());
    write(out, "target_standardizer.toml", &toml::to_string(&standardizer)?, &mut m)?;
    write(out, "fine_tune_loss.csv", &loss_csv(&tuned.history.loss), &mut m)?;
    println!(
        "fine-tuned on {} rows in {} epochs",
        balanced.len(),
        tuned.history.epochs()
    );
    m.write(out, t0.elapsed())
}

pub fn evaluate(a: &EvaluateArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("evaluate");
    record_train(&mut m, &a.train);
    m.flag("model", &a.model);
    m.flag("zone", &a.zone);
    let records = load_target(&a.target, &mut m)?;
    let cfg = cv_config(&a.target, &a.cv, &a.train, &mut m)?;
    let (alg, pool) = algorithm(&a.model, &a.zone, a.source_model.as_deref(), &a.source, &a.train, &mut m)?;
    let report = run_cv_with_pool(&alg, &records, &cfg, pool)?;
    report.check_no_leak()?;
    write(out, "report.csv", &report.to_csv(), &mut m)?;
    write(out, "confusion.csv", &report.confusion.to_csv(), &mut m)?;
    write(out, "confusion_long.csv", &report.confusion.to_long_csv(), &mut m)?;
    write(out, "report_manifest.toml", &toml::to_string(&report.manifest)?, &mut m)?;
    m.notes.extend(report.notes.iter().cloned());
    let (am, asd) = report.accuracy();
    let (fm, fsd) = report.weighted_f1();
    println!("{}: accuracy {am:.2} ({asd:.2}), weighted F1 {fm:.2} ({fsd:.2})", alg.name());
    m.write(out, t0.elapsed())
}

pub fn ablation(a: &AblationArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("ablation");
    record_train(&mut m, &a.train);
    m.flag("models", a.models.join(","));
    let records = load_target(&a.target, &mut m)?;
    let cfg = cv_config(&a.target, &a.cv, &a.train, &mut m)?;
    let algs = a
        .models
        .iter()
        .map(|n| algorithm(n, &a.zone, None, &a.source, &a.train, &mut m).map(|(alg, _)| alg))
        .collect::<Result<Vec<_>>>()?;
    let rows = run_feature_ablation(&records, &algs, &cfg)?;
    let csv = summary_csv("feature_set", &rows);
    print!("{csv}");
    write(out, "ablation.csv", &csv, &mut m)?;
    m.write(out, t0.elapsed())
}

pub fn sweep(a: &SweepArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("sweep");
    record_train(&mut m, &a.train);
    m.flag("depths", format!("{:?}", a.depths));
    m.flag("pool", &a.pool);
    if a.depths.iter().any(|&d| d == 0) {
        bail!("depths must be >= 1");
    }
    let pool: SourcePool = a.pool.parse()?;
    let records = load_target(&a.target, &mut m)?;
    let cfg = cv_config(&a.target, &a.cv, &a.train, &mut m)?;
    let (ra, rs) = load_sources(&a.source, &mut m)?;
    let source_train = train_config(&a.train, false).with_epochs(a.source.source_epochs);
    let source_train = TrainConfig {
        seed: comfort_core::rng::derive(a.train.seed, "source-train"),
        ..source_train
    };
    let rows = run_hidden_layer_sweep(&records, &ra, &rs, &a.depths, pool, source_train, &cfg)?;
    let csv = summary_csv("hidden_layers", &rows);
    print!("{csv}");
    write(out, "sweep.csv", &csv, &mut m)?;
    m.write(out, t0.elapsed())
}

pub fn synth(a: &SynthArgs, out: &Path) -> Result<()> {
    let t0 = Instant::now();
    let mut m = RunManifest::new("synth");
    m.seed = Some(a.seed);
    m.flag("seed", a.seed);
    m.flag("source_rows", a.source_rows);
    m.flag("target_train", a.target_train);
    m.flag("target_test", a.target_test);
    let spec = SyntheticSpec {
        source_rows: a.source_rows,
        target_train: a.target_train,
        target_test: a.target_test,
        ..Default::default()
    };
    let s = generate_synthetic_scenario(&spec, a.seed)?;
    for (name, rows) in [
        ("synthetic_source.csv", &s.source),
        ("synthetic_target.csv", &s.target_train),
        ("synthetic_target_test.csv", &s.target_test),
    ] {
        let mut buf = Vec::new();
        write_canonical_csv(rows, &mut buf)?;
        write(out, name, &String::from_utf8(buf)?, &mut m)?;
    }
    if a.benefit {
        m.flag("seeds", a.seeds);
        m.flag("source_epochs", a.source_epochs);
        let cfg = BenefitConfig {
            spec,
            seeds: (0..a.seeds).collect(),
            source_epochs: a.source_epochs,
            cv: CvConfig::default(),
        };
        let summary = run_transfer_benefit(&cfg)?;
        let csv = summary.to_csv();
        print!("{csv}");
        write(out, "benefit.csv", &csv, &mut m)?;
    }
    m.write(out, t0.elapsed())
}

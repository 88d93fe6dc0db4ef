use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::graph::{generate_synthetic, load_graph, make_splits, ratio_histogram, Graph, SplitMasks, RATIO_BINS};
use crate::metrics::{distance_based_bias, evaluate, probe_sensitive_leakage, relative_reduction, FairnessReport, ProbeReport};
use crate::model::{extract_embeddings, forward, save_checkpoint, train, TrainConfig, TrainOutcome};
use crate::sampling::SamplerMode;
use crate::theory::{run_all, TheoryCheck};

/// Written next to every set of outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub code_version: String,
    pub config: ExperimentConfig,
}

pub fn write_manifest(cfg: &ExperimentConfig, command: &str) -> Result<Manifest> {
    let manifest = Manifest {
        command: command.to_string(),
        config_hash: cfg.hash(),
        seeds: cfg.trainer.seeds.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write(&cfg.outputs.dir.join("manifest.json"), text + "\n")?;
    Ok(manifest)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| serde_json::to_string(x).expect("record serialises") + "\n")
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<(Graph, SplitMasks)> {
    let g = match (&cfg.dataset.edges, &cfg.dataset.nodes, &cfg.dataset.synthetic) {
        (Some(e), Some(n), _) => load_graph(e, n)?,
        (None, None, Some(spec)) => generate_synthetic(spec)?,
        _ => return Err(Error::validation("dataset needs either both files or a synthetic spec")),
    };
    let split = make_splits(&g, cfg.dataset.split, cfg.dataset.split_seed)?;
    Ok((g, split))
}

/// Test-set metrics of one trained model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub mode: SamplerMode,
    pub seed: u64,
    pub best_epoch: usize,
    pub test: FairnessReport,
}

fn test_report(g: &Graph, split: &SplitMasks, out: &TrainOutcome) -> Result<FairnessReport> {
    let logits = forward(&out.params, &out.eval_graph, g.features())?.hidden.pop().expect("logits");
    let mut report = evaluate(&logits, g, &split.test)?;
    let emb = extract_embeddings(&out.params, &out.eval_graph, g.features(), 1)?;
    report.distance_bias = distance_based_bias(emb.view(), g.sensitive(), &split.test).ok();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; zero for a single value. `None` if no
    /// value is defined.
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Option<MeanStd> {
        let xs: Vec<f64> = values.into_iter().flatten().collect();
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MeanStd { mean, std })
    }
}

/// One line of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub mode: SamplerMode,
    pub runs: usize,
    pub acc: Option<MeanStd>,
    pub auc: Option<MeanStd>,
    pub delta_sp: Option<MeanStd>,
    pub delta_eo: Option<MeanStd>,
}

const SUMMARY_HEADER: &str = "mode,runs,acc_mean,acc_std,auc_mean,auc_std,delta_sp_mean,delta_sp_std,delta_eo_mean,delta_eo_std";

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let ms = |m: Option<MeanStd>| format!("{},{}", cell(m.map(|m| m.mean)), cell(m.map(|m| m.std)));
        writeln!(s, "{},{},{},{},{},{}", r.mode, r.runs, ms(r.acc), ms(r.auc), ms(r.delta_sp), ms(r.delta_eo)).unwrap();
    }
    s
}

/// Parses a `summary.csv` written by [`run_experiment`].
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SUMMARY_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: name,
                line: 1,
                msg: "unexpected summary header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let bad = |msg: &str| Error::Parse {
            path: name.clone(),
            line: i + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad("expected 10 columns"));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad("bad number"))
            }
        };
        let pair = |a: &str, b: &str| -> Result<Option<MeanStd>> {
            Ok(match (num(a)?, num(b)?) {
                (Some(mean), Some(std)) => Some(MeanStd { mean, std }),
                _ => None,
            })
        };
        rows.push(SummaryRow {
            mode: f[0].parse().map_err(|_| bad("unknown sampler mode"))?,
            runs: f[1].parse().map_err(|_| bad("bad run count"))?,
            acc: pair(f[2], f[3])?,
            auc: pair(f[4], f[5])?,
            delta_sp: pair(f[6], f[7])?,
            delta_eo: pair(f[8], f[9])?,
        });
    }
    Ok(rows)
}

/// Trains every (mode, seed) pair and writes
/// `summary.csv`, `runs.csv`, `logs/<mode>_seed<seed>.jsonl`,
/// `checkpoints/<mode>_seed<seed>.ckpt` and `manifest.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<SummaryRow>, Vec<RunRecord>)> {
    cfg.validate()?;
    let (g, split) = load_dataset(cfg)?;
    let dir = &cfg.outputs.dir;
    write_manifest(cfg, "train")?;

    let mut records = Vec::new();
    let mut summary = Vec::new();
    for &mode in &cfg.sampler.modes {
        let tc = cfg.train_config(mode);
        let mut reports = Vec::new();
        for &seed in &cfg.trainer.seeds {
            log::info!("training {mode} seed {seed}");
            let out = train(&g, &split, &tc, seed, cfg.exec)?;
            let stem = format!("{mode}_seed{seed}");
            write(&dir.join("logs").join(format!("{stem}.jsonl")), jsonl(&out.log))?;
            save_checkpoint_in(&dir.join("checkpoints"), &stem, &out)?;
            let test = test_report(&g, &split, &out)?;
            reports.push(test.clone());
            records.push(RunRecord {
                mode,
                seed,
                best_epoch: out.best_epoch,
                test,
            });
        }
        summary.push(SummaryRow {
            mode,
            runs: reports.len(),
            acc: MeanStd::of(reports.iter().map(|r| Some(r.acc))),
            auc: MeanStd::of(reports.iter().map(|r| r.auc)),
            delta_sp: MeanStd::of(reports.iter().map(|r| r.delta_sp)),
            delta_eo: MeanStd::of(reports.iter().map(|r| r.delta_eo)),
        });
    }

    let mut runs = String::from("mode,seed,best_epoch,acc,auc,delta_sp,delta_eo,distance_bias\n");
    for r in &records {
        let t = &r.test;
        writeln!(
            runs,
            "{},{},{},{},{},{},{},{}",
            r.mode,
            r.seed,
            r.best_epoch,
            cell(Some(t.acc)),
            cell(t.auc),
            cell(t.delta_sp),
            cell(t.delta_eo),
            cell(t.distance_bias)
        )
        .unwrap();
    }
    write(&dir.join("runs.csv"), runs)?;
    write(&dir.join("summary.csv"), summary_csv(&summary))?;
    Ok((summary, records))
}

fn save_checkpoint_in(dir: &Path, stem: &str, out: &TrainOutcome) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_checkpoint(&dir.join(format!("{stem}.ckpt")), &out.params)
}

/// Probe reports per seed for the MLP and the GCN, plus the histogram of
/// majority-neighbor ratios over all nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub mlp: Vec<ProbeReport>,
    pub gcn: Vec<ProbeReport>,
    pub histogram: [usize; RATIO_BINS],
}

impl ProbeOutcome {
    /// Seed-averaged mean bin accuracy over bins lying below `upper`.
    pub fn mean_below(reports: &[ProbeReport], upper: f64) -> Option<f64> {
        let xs: Vec<f64> = reports.iter().filter_map(|r| r.mean_accuracy_below(upper)).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Trains an MLP and a vanilla GCN per seed, freezes their first layer
/// and probes it for the sensitive attribute. Writes `probe.csv`,
/// `probe.jsonl`, `histogram.csv` and `manifest.json`.
pub fn run_probe(cfg: &ExperimentConfig) -> Result<ProbeOutcome> {
    cfg.validate()?;
    let (g, split) = load_dataset(cfg)?;
    let dir = &cfg.outputs.dir;
    write_manifest(cfg, "probe")?;

    let probe_one = |mlp: bool, seed: u64| -> Result<ProbeReport> {
        let tc = TrainConfig {
            mlp,
            ..cfg.train_config(SamplerMode::None)
        };
        let out = train(&g, &split, &tc, seed, cfg.exec)?;
        let emb = extract_embeddings(&out.params, &out.eval_graph, g.features(), 1)?;
        probe_sensitive_leakage(emb.view(), &g, &split, &cfg.probe)
    };
    let mut outcome = ProbeOutcome {
        mlp: Vec::new(),
        gcn: Vec::new(),
        histogram: ratio_histogram(&g),
    };
    let mut csv = String::from("model,seed,bin_lower,bin_upper,count,accuracy\n");
    let mut lines = String::new();
    for &seed in &cfg.trainer.seeds {
        for (name, mlp) in [("mlp", true), ("gcn", false)] {
            let report = probe_one(mlp, seed)?;
            for b in &report.bins {
                writeln!(csv, "{name},{seed},{:.1},{:.1},{},{}", b.lower, b.upper, b.count, cell(b.accuracy)).unwrap();
            }
            let rec = serde_json::json!({ "model": name, "seed": seed, "report": &report });
            lines.push_str(&(rec.to_string() + "\n"));
            if mlp {
                outcome.mlp.push(report);
            } else {
                outcome.gcn.push(report);
            }
        }
    }
    let mut hist = String::from("bin_lower,bin_upper,count\n");
    let width = 1.0 / RATIO_BINS as f64;
    for (b, c) in outcome.histogram.iter().enumerate() {
        writeln!(hist, "{:.1},{:.1},{c}", b as f64 * width, (b + 1) as f64 * width).unwrap();
    }
    write(&dir.join("probe.csv"), csv)?;
    write(&dir.join("probe.jsonl"), lines)?;
    write(&dir.join("histogram.csv"), hist)?;
    Ok(outcome)
}

/// Runs every theory check with the first configured seed. Writes
/// `theory.jsonl`, `theory.csv` and `manifest.json`.
pub fn run_theory(cfg: &ExperimentConfig) -> Result<Vec<TheoryCheck>> {
    let seed = *cfg
        .trainer
        .seeds
        .first()
        .ok_or_else(|| Error::validation("trainer.seeds is empty"))?;
    let checks = run_all(&cfg.theory, seed, cfg.exec)?;
    for c in checks.iter().filter(|c| c.warning.is_some()) {
        log::warn!("{}: {}", c.claim, c.warning.as_deref().unwrap_or_default());
    }
    let dir = &cfg.outputs.dir;
    write_manifest(cfg, "theory")?;
    write(&dir.join("theory.jsonl"), jsonl(&checks))?;
    let mut csv = String::from("claim,predicted,empirical,tolerance,passed,warning\n");
    for c in &checks {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            c.claim,
            c.predicted,
            c.empirical,
            c.tolerance,
            c.passed,
            c.warning.as_deref().unwrap_or_default()
        )
        .unwrap();
    }
    write(&dir.join("theory.csv"), csv)?;
    Ok(checks)
}

/// Relative reduction of ΔSP and ΔEO with respect to the `none` row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionRow {
    pub mode: SamplerMode,
    pub acc_change: Option<f64>,
    pub delta_sp_reduction: Option<f64>,
    pub delta_eo_reduction: Option<f64>,
}

/// Reads `summary.csv` from the output directory and writes
/// `reductions.csv`.
pub fn run_report(cfg: &ExperimentConfig) -> Result<Vec<ReductionRow>> {
    let dir = &cfg.outputs.dir;
    let rows = read_summary(&dir.join("summary.csv"))?;
    let base = rows
        .iter()
        .find(|r| r.mode == SamplerMode::None)
        .ok_or_else(|| Error::validation("summary has no `none` row to compare against"))?
        .clone();
    let reduce = |m: Option<MeanStd>, v: Option<MeanStd>| match (m, v) {
        (Some(m), Some(v)) => relative_reduction(m.mean, v.mean).ok(),
        _ => None,
    };
    let out: Vec<ReductionRow> = rows
        .iter()
        .filter(|r| r.mode != SamplerMode::None)
        .map(|r| ReductionRow {
            mode: r.mode,
            acc_change: match (r.acc, base.acc) {
                (Some(a), Some(b)) => Some((a.mean - b.mean) * 100.0),
                _ => None,
            },
            delta_sp_reduction: reduce(r.delta_sp, base.delta_sp),
            delta_eo_reduction: reduce(r.delta_eo, base.delta_eo),
        })
        .collect();
    let mut csv = String::from("mode,acc_change_points,delta_sp_reduction_pct,delta_eo_reduction_pct\n");
    for r in &out {
        let c = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        writeln!(csv, "{},{},{},{}", r.mode, c(r.acc_change), c(r.delta_sp_reduction), c(r.delta_eo_reduction)).unwrap();
    }
    write(&dir.join("reductions.csv"), csv)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_skips_undefined() {
        let m = MeanStd::of([Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(m.mean, 2.0);
        assert!((m.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(MeanStd::of([Some(4.0)]).unwrap().std, 0.0);
        assert!(MeanStd::of([None]).is_none());
    }

    #[test]
    fn summary_round_trip() {
        let rows = vec![SummaryRow {
            mode: SamplerMode::Bemap,
            runs: 2,
            acc: Some(MeanStd { mean: 0.75, std: 0.01 }),
            auc: None,
            delta_sp: Some(MeanStd { mean: 0.125, std: 0.0 }),
            delta_eo: Some(MeanStd { mean: 0.5, std: 0.25 }),
        }];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("summary.csv");
        fs::write(&p, summary_csv(&rows)).unwrap();
        assert_eq!(read_summary(&p).unwrap(), rows);
    }
}

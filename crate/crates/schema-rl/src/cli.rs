//! Command-line front end: configure and run experiments, sweep seeds,
//! export and inspect learned schedules, and reproduce the headline
//! comparisons (sample-efficiency orderings and schedule transfer).
//!
//! Experiment configs are flat `key = value` text files; every key has a
//! default except `family` and `mode`. Outputs are per-seed CSV logs,
//! checkpoints, schedule files, an aggregate CSV, and an SVG learning
//! curve. Runs are deterministic: the same config produces byte-identical
//! artifacts.

use crate::chart::{line_chart, Series};
use crate::envs::{Encoding, Tolerances};
use crate::nn::checkpoint::{Checkpoint, CheckpointError};
use crate::pamdp::{build_task_spec, TaskFamily, TaskSpec};
use crate::policy::Policy;
use crate::schema::{import_schema, ImportMode, SchemaLogits, TransferError};
use crate::trainer::{train, Mode, TrainOutput, TrainerConfig};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const OUT_ENV_VAR: &str = "SCHEMA_RL_OUT";
pub const FIG4_BUDGET: usize = 50_000;
pub const FIG5_BUDGET: usize = 100_000;
pub const DEFAULT_SEEDS: u64 = 5;
/// Scratch schedule learning on raster inputs counts as failed when it
/// needs at least this many times the transfer run's episodes.
pub const SCRATCH_FACTOR: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Train(#[from] crate::trainer::TrainError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

/// A fully resolved experiment: one task, one mode, a list of seeds.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: TaskFamily,
    pub mode: Mode,
    pub encoding: Encoding,
    pub schema_path: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub trainer: TrainerConfig,
}

fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Parse a flat `key = value` config. Unknown keys and malformed values
/// fail with the offending line number.
pub fn parse_config(text: &str, path_label: &str) -> Result<ExperimentConfig, CliError> {
    let mut family = None;
    let mut mode = None;
    let mut encoding = Encoding::LowDim;
    let mut schema_path = None;
    let mut seeds: Vec<u64> = (0..DEFAULT_SEEDS).collect();
    let mut out_dir = None;
    let mut trainer_overrides: Vec<(String, String, usize)> = Vec::new();

    let err = |line: usize, msg: String| CliError::Config {
        path: path_label.to_string(),
        line,
        msg,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line_no, format!("expected key = value, got {line:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "family" => {
                family = Some(
                    TaskFamily::from_name(value)
                        .ok_or_else(|| err(line_no, format!("unknown family {value:?}")))?,
                )
            }
            "mode" => {
                mode = Some(
                    Mode::from_name(value)
                        .ok_or_else(|| err(line_no, format!("unknown mode {value:?}")))?,
                )
            }
            "encoding" => {
                encoding = Encoding::from_name(value)
                    .ok_or_else(|| err(line_no, format!("unknown encoding {value:?}")))?
            }
            "schema" => schema_path = Some(PathBuf::from(value)),
            "out" => out_dir = Some(PathBuf::from(value)),
            "seeds" => {
                seeds = value
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<u64>()
                            .map_err(|_| err(line_no, format!("bad seed {tok:?}")))
                    })
                    .collect::<Result<_, _>>()?;
                if seeds.is_empty() {
                    return Err(err(line_no, "seed list is empty".into()));
                }
            }
            "budget" | "workers" | "steps_per_worker" | "minibatches" | "epochs"
            | "learning_rate" | "clip" | "entropy_coef" | "value_coef" | "grad_clip"
            | "alpha" | "beta" | "gamma" | "parallel_workers" => {
                trainer_overrides.push((key.to_string(), value.to_string(), line_no));
            }
            _ => return Err(err(line_no, format!("unknown key {key:?}"))),
        }
    }

    let family = family.ok_or_else(|| err(0, "missing required key: family".into()))?;
    let mode = mode.ok_or_else(|| err(0, "missing required key: mode".into()))?;
    if mode == Mode::Transfer && schema_path.is_none() {
        return Err(err(0, "transfer mode requires schema = <path>".into()));
    }

    let mut trainer = TrainerConfig::for_family(family);
    for (key, value, line_no) in trainer_overrides {
        let bad = |what: &str| err(line_no, format!("bad {what} value {value:?}"));
        match key.as_str() {
            "budget" => trainer.episode_budget = value.parse().map_err(|_| bad("budget"))?,
            "workers" => trainer.workers = value.parse().map_err(|_| bad("workers"))?,
            "steps_per_worker" => {
                trainer.steps_per_worker = value.parse().map_err(|_| bad("steps_per_worker"))?
            }
            "minibatches" => trainer.minibatches = value.parse().map_err(|_| bad("minibatches"))?,
            "epochs" => trainer.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "learning_rate" => {
                trainer.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
            }
            "clip" => trainer.clip = value.parse().map_err(|_| bad("clip"))?,
            "entropy_coef" => {
                trainer.entropy_coef = value.parse().map_err(|_| bad("entropy_coef"))?
            }
            "value_coef" => trainer.value_coef = value.parse().map_err(|_| bad("value_coef"))?,
            "grad_clip" => trainer.grad_clip = value.parse().map_err(|_| bad("grad_clip"))?,
            "alpha" => trainer.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "beta" => trainer.beta = value.parse().map_err(|_| bad("beta"))?,
            "gamma" => trainer.gamma = value.parse().map_err(|_| bad("gamma"))?,
            "parallel_workers" => {
                trainer.parallel_workers = value.parse().map_err(|_| bad("parallel_workers"))?
            }
            _ => unreachable!(),
        }
    }

    Ok(ExperimentConfig {
        family,
        mode,
        encoding,
        schema_path,
        seeds,
        out_dir: out_dir.unwrap_or_else(default_out_root),
        trainer,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

/// Save a trained policy (and its schedule, when present) as a checkpoint.
pub fn write_checkpoint(
    path: &Path,
    policy: &Policy,
    spec: &TaskSpec,
    mode: Mode,
    encoding: Encoding,
) -> Result<(), CliError> {
    let mut ck = Checkpoint::default();
    ck.meta.push(("family".into(), spec.family.name().into()));
    ck.meta.push(("mode".into(), mode.name().into()));
    ck.meta.push(("encoding".into(), encoding.name().into()));
    ck.meta.push(("horizon".into(), spec.horizon.to_string()));
    ck.push_network("net", &policy.net);
    if let Some(schedule) = policy.schedule() {
        ck.meta.push((
            "vocab".into(),
            schedule
                .vocab
                .iter()
                .map(|(l, r)| format!("{l}:{r}"))
                .collect::<Vec<_>>()
                .join(","),
        ));
        ck.tensors.push(crate::nn::checkpoint::NamedTensor {
            name: "schedule.logits".into(),
            dims: vec![schedule.horizon, schedule.vocab_len()],
            data: schedule.values.iter().flatten().cloned().collect(),
        });
    }
    ck.save(path)?;
    Ok(())
}

/// Rebuild the schedule stored in a checkpoint.
pub fn schema_from_checkpoint(path: &Path) -> Result<SchemaLogits, CliError> {
    let ck = Checkpoint::load(path)?;
    let family = ck
        .meta_value("family")
        .and_then(TaskFamily::from_name)
        .ok_or_else(|| CheckpointError::Malformed("missing or bad family metadata".into()))?;
    let vocab: Vec<(String, String)> = ck
        .meta_value("vocab")
        .ok_or_else(|| CheckpointError::Malformed("checkpoint has no schedule".into()))?
        .split(',')
        .filter_map(|pair| pair.split_once(':'))
        .map(|(l, r)| (l.to_string(), r.to_string()))
        .collect();
    let tensor = ck
        .tensor("schedule.logits")
        .ok_or_else(|| CheckpointError::MissingTensor("schedule.logits".into()))?;
    if tensor.dims.len() != 2 || tensor.dims[1] != vocab.len() {
        return Err(CheckpointError::Malformed("schedule tensor shape mismatch".into()).into());
    }
    let horizon = tensor.dims[0];
    let values = tensor
        .data
        .chunks(vocab.len())
        .map(|row| row.to_vec())
        .collect();
    Ok(SchemaLogits {
        family,
        horizon,
        vocab,
        values,
        frozen: false,
    })
}

/// Artifacts produced for one seed of an experiment.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub episodes: usize,
    pub episodes_to_threshold: Option<usize>,
    pub csv_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub schema_path: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub runs: Vec<SeedRun>,
    pub aggregate_path: PathBuf,
    pub chart_path: PathBuf,
}

fn run_stem(cfg: &ExperimentConfig, seed: u64) -> String {
    format!(
        "{}_{}_{}_s{}",
        cfg.family.name(),
        cfg.mode.name(),
        cfg.encoding.name(),
        seed
    )
}

/// Train every seed of an experiment (in parallel) and write its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    let spec = build_task_spec(cfg.family);
    let tol = Tolerances::default();

    // Transfer compatibility is checked once, up front, so a bad file fails
    // fast with the transfer error verbatim.
    let imported = match (cfg.mode, &cfg.schema_path) {
        (Mode::Transfer, Some(path)) => Some(import_schema(path, &spec, ImportMode::Frozen)?),
        (Mode::Transfer, None) => return Err(crate::trainer::TrainError::MissingSchema.into()),
        _ => None,
    };

    let outputs: Vec<(u64, Result<TrainOutput, crate::trainer::TrainError>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut tc = cfg.trainer.clone();
            tc.seed = seed;
            (
                seed,
                train(&spec, cfg.mode, cfg.encoding, &tc, imported.clone(), &tol),
            )
        })
        .collect();

    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut runs = Vec::new();
    let mut curves = Vec::new();
    let mut all_rounds = Vec::new();
    for (seed, result) in outputs {
        let out = result?;
        let stem = run_stem(cfg, seed);
        let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, out.csv())?;
        let checkpoint_path = cfg.out_dir.join(format!("{stem}.ckpt"));
        write_checkpoint(&checkpoint_path, &out.policy, &spec, cfg.mode, cfg.encoding)?;
        let schema_path = if let Some(schedule) = out.schema() {
            let p = cfg.out_dir.join(format!("{stem}.schema"));
            schedule.export(&p)?;
            Some(p)
        } else {
            None
        };
        curves.push(Series {
            label: format!("seed {seed}"),
            points: out
                .rounds
                .iter()
                .map(|r| (r.episodes as f64, r.trailing_success_rate))
                .collect(),
        });
        all_rounds.push(out.rounds.clone());
        runs.push(SeedRun {
            seed,
            episodes: out.episodes,
            episodes_to_threshold: out.episodes_to_threshold,
            csv_path,
            checkpoint_path,
            schema_path,
        });
    }

    let aggregate_path = cfg.out_dir.join(format!(
        "{}_{}_{}_aggregate.csv",
        cfg.family.name(),
        cfg.mode.name(),
        cfg.encoding.name()
    ));
    std::fs::write(&aggregate_path, aggregate_csv(&all_rounds))?;

    let chart_path = cfg.out_dir.join(format!(
        "{}_{}_{}.svg",
        cfg.family.name(),
        cfg.mode.name(),
        cfg.encoding.name()
    ));
    let title = format!(
        "{} / {} / {}",
        cfg.family.name(),
        cfg.mode.name(),
        cfg.encoding.name()
    );
    std::fs::write(
        &chart_path,
        line_chart(&title, "episodes", "trailing success rate", &curves),
    )?;

    Ok(ExperimentOutcome {
        runs,
        aggregate_path,
        chart_path,
    })
}

/// Per-round median and min/max of the trailing success rate across seeds.
/// Recomputable from the per-seed CSVs.
pub fn aggregate_csv(per_seed_rounds: &[Vec<crate::trainer::RoundLog>]) -> String {
    let mut out = String::from("round,n_seeds,episodes_median,trailing_median,trailing_min,trailing_max\n");
    let max_rounds = per_seed_rounds.iter().map(|r| r.len()).max().unwrap_or(0);
    for round in 0..max_rounds {
        let mut eps: Vec<usize> = Vec::new();
        let mut rates: Vec<f64> = Vec::new();
        for rounds in per_seed_rounds {
            if let Some(r) = rounds.get(round) {
                eps.push(r.episodes);
                rates.push(r.trailing_success_rate);
            }
        }
        eps.sort_unstable();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4}",
            round,
            rates.len(),
            eps[eps.len() / 2],
            rates[rates.len() / 2],
            rates.first().unwrap(),
            rates.last().unwrap(),
        );
    }
    out
}

fn median(mut values: Vec<usize>) -> usize {
    values.sort_unstable();
    values[values.len() / 2]
}

/// Episodes to threshold, counting runs that never got there as the full
/// budget.
fn capped(out: &TrainOutput, budget: usize) -> usize {
    out.episodes_to_threshold.unwrap_or(budget)
}

/// Sample-efficiency comparison across the three policy architectures on
/// low-dimensional observations.
#[derive(Debug, Clone)]
pub struct Fig4Row {
    pub family: TaskFamily,
    pub oracle_median: usize,
    pub schema_median: usize,
    pub baseline_median: usize,
    pub baseline_capped: usize,
    pub oracle_le_schema: bool,
    pub schema_le_half_baseline: bool,
}

#[derive(Debug, Clone)]
pub struct Fig4Report {
    pub rows: Vec<Fig4Row>,
    pub verdict_csv: String,
}

pub fn reproduce_fig4(out_root: &Path, n_seeds: u64, budget: usize) -> Result<Fig4Report, CliError> {
    let dir = out_root.join("fig4");
    std::fs::create_dir_all(&dir)?;
    let modes = [Mode::Oracle, Mode::Schema, Mode::Baseline];
    let mut rows = Vec::new();

    for family in TaskFamily::ALL {
        let spec = build_task_spec(family);
        let tol = Tolerances::default();
        let jobs: Vec<(Mode, u64)> = modes
            .iter()
            .flat_map(|&m| (0..n_seeds).map(move |s| (m, s)))
            .collect();
        let outputs: Vec<(Mode, u64, TrainOutput)> = jobs
            .par_iter()
            .map(|&(mode, seed)| {
                let mut tc = TrainerConfig::for_family(family);
                tc.seed = seed;
                tc.episode_budget = budget;
                let out = train(&spec, mode, Encoding::LowDim, &tc, None, &tol)
                    .expect("fig4 training runs");
                (mode, seed, out)
            })
            .collect();

        let mut medians = std::collections::HashMap::new();
        let mut series = Vec::new();
        let mut baseline_capped = 0usize;
        for &mode in &modes {
            let outs: Vec<&TrainOutput> = outputs
                .iter()
                .filter(|(m, _, _)| *m == mode)
                .map(|(_, _, o)| o)
                .collect();
            let med = median(outs.iter().map(|o| capped(o, budget)).collect());
            medians.insert(mode.name(), med);
            if mode == Mode::Baseline {
                baseline_capped = outs
                    .iter()
                    .filter(|o| o.episodes_to_threshold.is_none())
                    .count();
            }
            // Chart the seed whose episodes-to-threshold is the median.
            let mut ranked: Vec<&TrainOutput> = outs.clone();
            ranked.sort_by_key(|o| capped(o, budget));
            let mid = ranked[ranked.len() / 2];
            series.push(Series {
                label: mode.name().to_string(),
                points: mid
                    .rounds
                    .iter()
                    .map(|r| (r.episodes as f64, r.trailing_success_rate))
                    .collect(),
            });
            for (m, seed, out) in outputs.iter().filter(|(m, _, _)| *m == mode) {
                let path = dir.join(format!("{}_{}_s{}.csv", family.name(), m.name(), seed));
                std::fs::write(path, out.csv())?;
            }
        }
        let chart = line_chart(
            &format!("{} sample efficiency", family.name()),
            "episodes",
            "trailing success rate",
            &series,
        );
        std::fs::write(dir.join(format!("{}.svg", family.name())), chart)?;

        let (om, sm, bm) = (
            medians["oracle"],
            medians["schema"],
            medians["baseline"],
        );
        rows.push(Fig4Row {
            family,
            oracle_median: om,
            schema_median: sm,
            baseline_median: bm,
            baseline_capped,
            oracle_le_schema: om <= sm,
            schema_le_half_baseline: 2 * sm <= bm,
        });
    }

    let mut verdict = String::from(
        "family,oracle_median,schema_median,baseline_median,baseline_capped_runs,oracle_le_schema,schema_le_half_baseline\n",
    );
    for r in &rows {
        let _ = writeln!(
            verdict,
            "{},{},{},{},{},{},{}",
            r.family.name(),
            r.oracle_median,
            r.schema_median,
            r.baseline_median,
            r.baseline_capped,
            r.oracle_le_schema,
            r.schema_le_half_baseline
        );
    }
    std::fs::write(dir.join("verdict.csv"), &verdict)?;
    Ok(Fig4Report {
        rows,
        verdict_csv: verdict,
    })
}

/// Transfer comparison on raster observations: a frozen schedule imported
/// from low-dimensional training versus learning the schedule from scratch.
#[derive(Debug, Clone)]
pub struct Fig5Seed {
    pub seed: u64,
    pub transfer_episodes: Option<usize>,
    pub scratch_episodes: Option<usize>,
    pub scratch_budget: usize,
    pub satisfied: bool,
}

#[derive(Debug, Clone)]
pub struct Fig5Row {
    pub family: TaskFamily,
    pub seeds: Vec<Fig5Seed>,
    pub transfer_all_converged: bool,
    pub satisfied_seeds: usize,
}

#[derive(Debug, Clone)]
pub struct Fig5Report {
    pub rows: Vec<Fig5Row>,
    pub verdict_csv: String,
}

pub fn reproduce_fig5(out_root: &Path, n_seeds: u64, budget: usize) -> Result<Fig5Report, CliError> {
    let dir = out_root.join("fig5");
    std::fs::create_dir_all(&dir)?;
    let mut rows = Vec::new();

    for family in TaskFamily::ALL {
        let spec = build_task_spec(family);
        let tol = Tolerances::default();
        let per_seed: Vec<(Fig5Seed, TrainOutput, TrainOutput)> = (0..n_seeds)
            .into_par_iter()
            .map(|seed| {
                // Learn the schedule on low-dimensional observations.
                let mut low = TrainerConfig::for_family(family);
                low.seed = seed;
                low.episode_budget = FIG4_BUDGET;
                let lowdim = train(&spec, Mode::Schema, Encoding::LowDim, &low, None, &tol)
                    .expect("fig5 low-dim training runs");
                let mut schedule = lowdim.schema().expect("schema mode").clone();
                schedule.frozen = true;

                // Frozen transfer onto raster observations.
                let mut tr = TrainerConfig::for_family(family);
                tr.seed = seed + 1000;
                tr.episode_budget = budget;
                let transfer = train(
                    &spec,
                    Mode::Transfer,
                    Encoding::Raster,
                    &tr,
                    Some(schedule),
                    &tol,
                )
                .expect("fig5 transfer training runs");

                // Scratch schedule learning on raster observations. Once it
                // has spent SCRATCH_FACTOR times the transfer episodes the
                // comparison is already decided, so stop there.
                let scratch_budget = transfer
                    .episodes_to_threshold
                    .map(|e| (SCRATCH_FACTOR * e).min(budget))
                    .unwrap_or(budget);
                let mut sc = TrainerConfig::for_family(family);
                sc.seed = seed + 2000;
                sc.episode_budget = scratch_budget;
                let scratch = train(&spec, Mode::Schema, Encoding::Raster, &sc, None, &tol)
                    .expect("fig5 scratch training runs");

                let satisfied = match (transfer.episodes_to_threshold, scratch.episodes_to_threshold)
                {
                    (Some(t), Some(s)) => s >= SCRATCH_FACTOR * t,
                    (Some(_), None) => true, // scratch failed within its cap
                    (None, _) => false,      // transfer itself failed
                };
                (
                    Fig5Seed {
                        seed,
                        transfer_episodes: transfer.episodes_to_threshold,
                        scratch_episodes: scratch.episodes_to_threshold,
                        scratch_budget,
                        satisfied,
                    },
                    transfer,
                    scratch,
                )
            })
            .collect();

        let mut seeds = Vec::new();
        let mut series = Vec::new();
        for (info, transfer, scratch) in &per_seed {
            std::fs::write(
                dir.join(format!("{}_transfer_s{}.csv", family.name(), info.seed)),
                transfer.csv(),
            )?;
            std::fs::write(
                dir.join(format!("{}_scratch_s{}.csv", family.name(), info.seed)),
                scratch.csv(),
            )?;
            if info.seed == 0 {
                series.push(Series {
                    label: "transfer (frozen schedule)".into(),
                    points: transfer
                        .rounds
                        .iter()
                        .map(|r| (r.episodes as f64, r.trailing_success_rate))
                        .collect(),
                });
                series.push(Series {
                    label: "scratch schedule".into(),
                    points: scratch
                        .rounds
                        .iter()
                        .map(|r| (r.episodes as f64, r.trailing_success_rate))
                        .collect(),
                });
            }
            seeds.push(info.clone());
        }
        std::fs::write(
            dir.join(format!("{}.svg", family.name())),
            line_chart(
                &format!("{} raster transfer", family.name()),
                "episodes",
                "trailing success rate",
                &series,
            ),
        )?;

        rows.push(Fig5Row {
            family,
            transfer_all_converged: seeds.iter().all(|s| s.transfer_episodes.is_some()),
            satisfied_seeds: seeds.iter().filter(|s| s.satisfied).count(),
            seeds,
        });
    }

    let mut verdict = String::from(
        "family,seed,transfer_episodes,scratch_episodes,scratch_budget,satisfied\n",
    );
    for row in &rows {
        for s in &row.seeds {
            let _ = writeln!(
                verdict,
                "{},{},{},{},{},{}",
                row.family.name(),
                s.seed,
                s.transfer_episodes.map_or("capped".into(), |e| e.to_string()),
                s.scratch_episodes.map_or("capped".into(), |e| e.to_string()),
                s.scratch_budget,
                s.satisfied
            );
        }
    }
    std::fs::write(dir.join("verdict.csv"), &verdict)?;
    Ok(Fig5Report {
        rows,
        verdict_csv: verdict,
    })
}

/// Extract the schedule from a checkpoint into a schedule text file.
pub fn export_schema_cmd(ckpt: &Path, out: &Path) -> Result<(), CliError> {
    let schedule = schema_from_checkpoint(ckpt)?;
    schedule.export(out)?;
    Ok(())
}

/// Human-readable view of a schedule file.
pub fn inspect_schema_cmd(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path)?;
    let schedule = crate::schema::parse_schema(&text)?;
    let mut out = String::new();
    let _ = writeln!(out, "family:  {}", schedule.family.name());
    let _ = writeln!(out, "horizon: {}", schedule.horizon);
    let _ = writeln!(out, "vocab:   {} joint skills", schedule.vocab_len());
    let _ = writeln!(out, "schedule (argmax per step):");
    for (t, (l, r)) in schedule.argmax_pairs().iter().enumerate() {
        let _ = writeln!(out, "  {t}: left {l}, right {r}");
    }
    Ok(out)
}

const USAGE: &str = "usage:
  schema-rl run <config-file>
  schema-rl reproduce <fig4|fig5> [--out DIR] [--seeds N] [--budget N]
  schema-rl export-schema <checkpoint> <out-file>
  schema-rl inspect-schema <schedule-file>

experiment configs are flat `key = value` files; see README.";

/// Entry point for the binary. Returns the process exit code.
pub fn dispatch(args: &[String]) -> i32 {
    match dispatch_inner(args) {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) | CliError::Config { .. } => 2,
                CliError::Transfer(_) => 3,
                _ => 1,
            }
        }
    }
}

fn arg_value(args: &[String], flag: &str) -> Option<String> {
    args.iter()
        .position(|a| a == flag)
        .and_then(|i| args.get(i + 1).cloned())
}

fn dispatch_inner(args: &[String]) -> Result<String, CliError> {
    let cmd = args.first().map(String::as_str).unwrap_or("");
    match cmd {
        "run" => {
            let path = args
                .get(1)
                .ok_or_else(|| CliError::Usage(USAGE.into()))?;
            let mut cfg = load_config(Path::new(path))?;
            if let Some(out) = arg_value(args, "--out") {
                cfg.out_dir = PathBuf::from(out);
            }
            if let Some(budget) = arg_value(args, "--budget") {
                cfg.trainer.episode_budget = budget
                    .parse()
                    .map_err(|_| CliError::Usage("bad --budget value".into()))?;
            }
            if let Some(workers) = arg_value(args, "--workers") {
                cfg.trainer.workers = workers
                    .parse()
                    .map_err(|_| CliError::Usage("bad --workers value".into()))?;
            }
            if let Some(seed) = arg_value(args, "--seed") {
                cfg.seeds = vec![seed
                    .parse()
                    .map_err(|_| CliError::Usage("bad --seed value".into()))?];
            }
            let outcome = run_experiment(&cfg)?;
            let mut out = String::new();
            for run in &outcome.runs {
                let _ = writeln!(
                    out,
                    "seed {}: {} episodes, threshold {}",
                    run.seed,
                    run.episodes,
                    run.episodes_to_threshold
                        .map_or("not reached".into(), |e| format!("at {e}")),
                );
            }
            let _ = writeln!(out, "aggregate: {}", outcome.aggregate_path.display());
            let _ = writeln!(out, "chart:     {}", outcome.chart_path.display());
            Ok(out)
        }
        "reproduce" => {
            let which = args
                .get(1)
                .ok_or_else(|| CliError::Usage(USAGE.into()))?;
            let out_root = arg_value(args, "--out")
                .map(PathBuf::from)
                .unwrap_or_else(default_out_root);
            let seeds: u64 = arg_value(args, "--seeds")
                .map(|s| s.parse())
                .transpose()
                .map_err(|_| CliError::Usage("bad --seeds value".into()))?
                .unwrap_or(DEFAULT_SEEDS);
            match which.as_str() {
                "fig4" => {
                    let budget: usize = arg_value(args, "--budget")
                        .map(|s| s.parse())
                        .transpose()
                        .map_err(|_| CliError::Usage("bad --budget value".into()))?
                        .unwrap_or(FIG4_BUDGET);
                    let report = reproduce_fig4(&out_root, seeds, budget)?;
                    Ok(report.verdict_csv)
                }
                "fig5" => {
                    let budget: usize = arg_value(args, "--budget")
                        .map(|s| s.parse())
                        .transpose()
                        .map_err(|_| CliError::Usage("bad --budget value".into()))?
                        .unwrap_or(FIG5_BUDGET);
                    let report = reproduce_fig5(&out_root, seeds, budget)?;
                    Ok(report.verdict_csv)
                }
                other => Err(CliError::Usage(format!(
                    "unknown figure {other:?}; expected fig4 or fig5"
                ))),
            }
        }
        "export-schema" => {
            let ckpt = args.get(1).ok_or_else(|| CliError::Usage(USAGE.into()))?;
            let out = args.get(2).ok_or_else(|| CliError::Usage(USAGE.into()))?;
            export_schema_cmd(Path::new(ckpt), Path::new(out))?;
            Ok(format!("wrote {out}\n"))
        }
        "inspect-schema" => {
            let path = args.get(1).ok_or_else(|| CliError::Usage(USAGE.into()))?;
            inspect_schema_cmd(Path::new(path))
        }
        _ => Err(CliError::Usage(USAGE.into())),
    }
}

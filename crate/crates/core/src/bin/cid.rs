//! `cid` command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use cid_core::abstraction::MergeMode;
use cid_core::geometry::{cid_p_indices, SpatialIndex};
use cid_core::io::{read_point_cloud, to_json, write_hulls, write_json, write_point_cloud, SceneFormat};
use cid_core::pipeline::{abstract_scene, propose_seeds, seed_sweep, segment, working_set, SceneReport};
use cid_core::synth::{synth_scene, SceneKind};
use cid_core::{CidError, RunConfig};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "cid", version, about = "Concavity-induced distance toolkit for point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CID between two points of a scene, by index.
    Cid {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        disc: Option<usize>,
        /// First point index.
        #[arg(long)]
        a: usize,
        /// Second point index.
        #[arg(long)]
        b: usize,
    },
    /// Propose seeds by CID farthest point sampling.
    Fps {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Ground-truth seeded label propagation with an AP report.
    Segment {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Merge groups and export one convex hull per part.
    Abstract {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Segmentation and abstraction metrics in one report.
    Eval {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// AP over seed counts 10, 20, .., 100, several runs each.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
    /// Write a synthetic labelled scene.
    Synth {
        /// l_shape, four_arcs, two_planes or box_room.
        #[arg(long)]
        scene: String,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Scene file (.ply or whitespace text).
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// Use a generated scene instead of a file.
    #[arg(long)]
    synth: Option<String>,
    #[arg(long, requires = "synth")]
    density: Option<f64>,
    #[arg(long)]
    format: Option<String>,
    /// Sidecar with `semantic instance` per line.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    disc: Option<usize>,
    #[arg(long)]
    group_cap: Option<usize>,
    #[arg(long, conflicts_with = "merge_thresh")]
    merge_iters: Option<usize>,
    #[arg(long)]
    merge_thresh: Option<f64>,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            subsample_size: self.subsample.unwrap_or(d.subsample_size),
            k_seeds: self.seeds.unwrap_or(d.k_seeds),
            m_discretization: self.disc.unwrap_or(d.m_discretization),
            group_cap: self.group_cap.unwrap_or(d.group_cap),
            merge: match (self.merge_iters, self.merge_thresh) {
                (Some(t), _) => Some(MergeMode::FixedIterations(t)),
                (None, Some(tau)) => Some(MergeMode::Threshold(tau)),
                (None, None) => None,
            },
            rng_seed: self.rng_seed,
            iou_thresholds: d.iou_thresholds,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(CidError),
}

impl From<CidError> for Failure {
    fn from(e: CidError) -> Self {
        match e {
            CidError::Io { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

fn load(input: &InputArgs, rng_seed: u64) -> Result<(String, cid_core::geometry::PointCloud), Failure> {
    let format = input
        .format
        .as_deref()
        .map(str::parse::<SceneFormat>)
        .transpose()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    match (&input.input, &input.synth) {
        (Some(path), _) => {
            if !path.exists() {
                return Err(Failure::Usage(format!("input file {} does not exist", path.display())));
            }
            if let Some(side) = &input.labels {
                if !side.exists() {
                    return Err(Failure::Usage(format!("label file {} does not exist", side.display())));
                }
            }
            let cloud = read_point_cloud(path, format, input.labels.as_deref())?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, cloud))
        }
        (None, Some(scene)) => {
            let kind: SceneKind = scene.parse().map_err(|e: CidError| Failure::Usage(e.to_string()))?;
            Ok((kind.name().to_string(), synth_scene(kind, input.density, rng_seed)?))
        }
        (None, None) => Err(Failure::Usage("one of --input or --synth is required".into())),
    }
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Serialize)]
struct FpsReport<'a> {
    scene: String,
    seed_indices: Vec<usize>,
    coverage: &'a [f64],
    config: &'a RunConfig,
    rng_seed: u64,
}

#[derive(Serialize)]
struct SweepEntry {
    k: usize,
    rng_seed: u64,
    ap50: Option<f64>,
}

#[derive(Serialize)]
struct SweepSummary {
    k: usize,
    mean_ap50: f64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Cid { input, disc, a, b } => {
            let (_, cloud) = load(&input, 0)?;
            let index = SpatialIndex::build(&cloud);
            let cfg = RunConfig {
                m_discretization: disc.unwrap_or(RunConfig::default().m_discretization),
                ..RunConfig::default()
            };
            let value = cid_p_indices(a, b, &index, cfg.discretization()?)?;
            print!(
                "{}",
                to_json(&json!({ "a": a, "b": b, "m": cfg.m_discretization, "cid": value }))?
            );
        }
        Command::Fps { input, run } => {
            let cfg = run.config();
            cfg.validate()?;
            let (scene, cloud) = load(&input, cfg.rng_seed)?;
            let working = working_set(&cloud, &cfg)?;
            let proposal = propose_seeds(&working, &cfg)?;
            prepare_out(&run.out_dir)?;
            let report = FpsReport {
                scene,
                // report seeds as indices into the input cloud
                seed_indices: proposal.seed_indices.iter().map(|&s| working.indices[s]).collect(),
                coverage: &proposal.coverage,
                config: &cfg,
                rng_seed: cfg.rng_seed,
            };
            write_json(&report, &run.out_dir.join("seeds.json"))?;
        }
        Command::Segment { input, run } => {
            let cfg = run.config();
            cfg.validate()?;
            let (scene, cloud) = load(&input, cfg.rng_seed)?;
            let result = segment(&cloud, &cfg)?;
            prepare_out(&run.out_dir)?;
            write_json(
                &SceneReport::new(scene, &cfg).with_ap(&result.ap),
                &run.out_dir.join("report.json"),
            )?;
            let labelled = cloud.clone().with_labels(
                Some(result.full_labels.iter().map(|l| l.semantic).collect()),
                Some(result.full_labels.iter().map(|l| l.instance).collect()),
            )?;
            write_point_cloud(&labelled, &run.out_dir.join("labels.ply"), SceneFormat::PlyBinaryLe)?;
        }
        Command::Abstract { input, run } => {
            let cfg = run.config();
            if cfg.merge.is_none() {
                return Err(Failure::Usage("abstract needs --merge-iters or --merge-thresh".into()));
            }
            cfg.validate()?;
            let (scene, cloud) = load(&input, cfg.rng_seed)?;
            let result = abstract_scene(&cloud, &cfg)?;
            prepare_out(&run.out_dir)?;
            write_hulls(&result.parts, &cloud, &run.out_dir)?;
            let report = SceneReport::new(scene, &cfg).with_abstraction(result.report.as_ref(), &result.schedule);
            write_json(&report, &run.out_dir.join("report.json"))?;
        }
        Command::Eval { input, run } => {
            let cfg = run.config();
            cfg.validate()?;
            let (scene, cloud) = load(&input, cfg.rng_seed)?;
            let seg = segment(&cloud, &cfg)?;
            let mut report = SceneReport::new(scene, &cfg).with_ap(&seg.ap);
            if cfg.merge.is_some() {
                let abs = abstract_scene(&cloud, &cfg)?;
                report = report.with_abstraction(abs.report.as_ref(), &abs.schedule);
            }
            prepare_out(&run.out_dir)?;
            write_json(&report, &run.out_dir.join("report.json"))?;
        }
        Command::Sweep { input, run, runs } => {
            if runs == 0 {
                return Err(Failure::Usage("--runs must be positive".into()));
            }
            let base = run.config();
            base.validate()?;
            let (scene, cloud) = load(&input, base.rng_seed)?;
            let ks: Vec<usize> = (10..=100).step_by(10).collect();
            let mut entries = Vec::new();
            let mut totals = vec![0.0; ks.len()];
            for r in 0..runs as u64 {
                let cfg = RunConfig {
                    rng_seed: base.rng_seed.wrapping_add(r),
                    ..base.clone()
                };
                for (slot, (k, ap)) in seed_sweep(&cloud, &cfg, &ks)?.into_iter().enumerate() {
                    let ap50 = ap.mean.map(|m| m.ap50);
                    totals[slot] += ap50.unwrap_or(0.0);
                    entries.push(SweepEntry {
                        k,
                        rng_seed: cfg.rng_seed,
                        ap50,
                    });
                }
            }
            entries.sort_by_key(|e| (e.k, e.rng_seed));
            let summary: Vec<SweepSummary> = ks
                .iter()
                .zip(&totals)
                .map(|(&k, &t)| SweepSummary {
                    k,
                    mean_ap50: t / runs as f64,
                })
                .collect();
            prepare_out(&run.out_dir)?;
            let report = json!({
                "scene": scene,
                "runs": runs,
                "summary": summary,
                "entries": entries,
                "config": base,
                "rng_seed": base.rng_seed,
            });
            write_json(&report, &run.out_dir.join("sweep.json"))?;
        }
        Command::Synth {
            scene,
            density,
            rng_seed,
            output,
            format,
        } => {
            let kind: SceneKind = scene.parse().map_err(|e: CidError| Failure::Usage(e.to_string()))?;
            let format = match format {
                Some(f) => f.parse().map_err(|e: CidError| Failure::Usage(e.to_string()))?,
                None => SceneFormat::from_path(&output),
            };
            let cloud = synth_scene(kind, density, rng_seed)?;
            write_point_cloud(&cloud, &output, format)?;
        }
    }
    Ok(())
}

fn report_error(kind: &str, message: &str) {
    let body = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(threads) = std::env::var("CID_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // an already-initialised pool just keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            report_error("usage", &msg);
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(e)) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

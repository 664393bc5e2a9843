//! `ladcf` binary: track a sequence, evaluate a dataset, render synthetic
//! fixtures, or run the embedded numerical self-checks.

mod config;
mod outputs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ladcf::bench::{self, FailureNote, Sequence, SyntheticKind};
use ladcf::features::ColorNamesTable;

#[derive(Parser)]
#[command(
    name = "ladcf",
    version,
    about = "Correlation-filter tracker with group-sparse spatial feature selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one OTB-layout sequence and write its trajectory
    Track {
        /// Sequence directory (img/ plus groundtruth_rect.txt)
        sequence: PathBuf,
        /// Flat key=value config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long, default_value = "ladcf-out")]
        out: PathBuf,
        /// Also write per-frame overlay images with the predicted box
        #[arg(long)]
        overlay: bool,
    },
    /// One-pass evaluation over a dataset directory
    Eval {
        /// Dataset root (one sequence per subdirectory) or a single sequence
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "ladcf-out")]
        out: PathBuf,
        /// Parallel sequence workers; 1 keeps fps measurements honest
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render a seeded synthetic sequence in OTB layout
    Synth {
        /// Motion program: static, linear, or scale-ramp
        kind: String,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        /// Background noise amplitude, 0-255
        #[arg(long, default_value_t = 30)]
        noise: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "ladcf-out/synthetic")]
        out: PathBuf,
        /// linear only: pixels per frame as "vx,vy"
        #[arg(long)]
        velocity: Option<String>,
        /// scale-ramp only: per-frame size growth factor
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Run the embedded numerical cross-checks
    Selftest,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    install_cn_override()?;
    match Cli::parse().command {
        Command::Track { sequence, config, out, overlay } => {
            cmd_track(&sequence, config.as_deref(), &out, overlay)
        }
        Command::Eval { dataset, config, out, jobs } => {
            cmd_eval(&dataset, config.as_deref(), &out, jobs)
        }
        Command::Synth { kind, frames, noise, seed, out, velocity, rate } => {
            cmd_synth(&kind, frames, noise, seed, &out, velocity.as_deref(), rate)
        }
        Command::Selftest => Ok(cmd_selftest()),
    }
}

/// `LADCF_CN_TABLE` points at a replacement color-names table (binary or
/// CSV); install it before any tracker exists.
fn install_cn_override() -> anyhow::Result<()> {
    if let Some(path) = std::env::var_os("LADCF_CN_TABLE") {
        let path = PathBuf::from(path);
        let table = ColorNamesTable::load(&path)
            .with_context(|| format!("loading color-names table {}", path.display()))?;
        ColorNamesTable::install_override(table)?;
    }
    Ok(())
}

fn load_frames(seq: &Sequence) -> anyhow::Result<Vec<image::RgbImage>> {
    seq.frames
        .iter()
        .map(|p| {
            Ok(image::open(p)
                .with_context(|| format!("decoding {}", p.display()))?
                .to_rgb8())
        })
        .collect()
}

fn cmd_track(
    sequence: &Path,
    config: Option<&Path>,
    out: &Path,
    overlay: bool,
) -> anyhow::Result<ExitCode> {
    let cfg = config::load(config)?;
    let seq = bench::load_sequence(sequence)?;
    let frames = load_frames(&seq)?;
    let init = seq
        .ground_truth
        .first()
        .copied()
        .flatten()
        .context("first frame has no usable ground truth to initialize from")?;

    let started = std::time::Instant::now();
    let traj = bench::track_sequence(&frames, init, &cfg)?;
    let fps = frames.len() as f64 / started.elapsed().as_secs_f64().max(1e-9);

    std::fs::create_dir_all(out)?;
    let traj_path = out.join("trajectory.txt");
    std::fs::write(&traj_path, outputs::trajectory_text(&traj.boxes))?;
    if overlay {
        let overlay_dir = out.join("overlay");
        std::fs::create_dir_all(&overlay_dir)?;
        for (k, (frame, b)) in frames.iter().zip(&traj.boxes).enumerate() {
            let mut painted = frame.clone();
            outputs::draw_box_outline(&mut painted, b);
            painted.save(overlay_dir.join(format!("{:04}.png", k + 1)))?;
        }
    }

    let report = bench::score(&traj, &seq)?;
    println!(
        "{}: {} frames, AUC {:.3}, OP {:.3}, DP {:.3}, {:.1} fps -> {}",
        seq.name,
        frames.len(),
        report.auc,
        report.op,
        report.dp,
        fps,
        traj_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// A dataset root is either a single sequence or a directory of them.
/// Unloadable sequences become failure notes, not fatal errors.
fn discover_sequences(dataset: &Path) -> anyhow::Result<(Vec<Sequence>, Vec<FailureNote>)> {
    let mut dirs = Vec::new();
    if dataset.join("groundtruth_rect.txt").is_file() {
        dirs.push(dataset.to_path_buf());
    } else {
        for entry in std::fs::read_dir(dataset)
            .with_context(|| format!("reading dataset {}", dataset.display()))?
        {
            let path = entry?.path();
            if path.is_dir() && path.join("groundtruth_rect.txt").is_file() {
                dirs.push(path);
            }
        }
        dirs.sort();
    }
    if dirs.is_empty() {
        bail!("no sequences found under {}", dataset.display());
    }
    let mut sequences = Vec::new();
    let mut failures = Vec::new();
    for dir in dirs {
        match bench::load_sequence(&dir) {
            Ok(seq) => sequences.push(seq),
            Err(e) => failures.push(FailureNote {
                sequence: dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                detail: e.to_string(),
            }),
        }
    }
    Ok((sequences, failures))
}

fn cmd_eval(
    dataset: &Path,
    config: Option<&Path>,
    out: &Path,
    jobs: usize,
) -> anyhow::Result<ExitCode> {
    let cfg = config::load(config)?;
    let (sequences, discovery_failures) = discover_sequences(dataset)?;

    let entries = Mutex::new(Vec::new());
    let failures = Mutex::new(discovery_failures);
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(sequences.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(seq) = sequences.get(i) else { break };
                match bench::evaluate_sequence(seq, &cfg) {
                    Ok(report) => entries.lock().expect("worker panicked").push(report),
                    Err(e) => failures.lock().expect("worker panicked").push(FailureNote {
                        sequence: seq.name.clone(),
                        detail: e.to_string(),
                    }),
                }
            });
        }
    });
    let report = bench::assemble_report(
        entries.into_inner().expect("worker panicked"),
        failures.into_inner().expect("worker panicked"),
    );

    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    std::fs::write(out.join("precision.csv"), outputs::precision_csv(&report))?;
    std::fs::write(out.join("success.csv"), outputs::success_csv(&report))?;
    let mut success_series =
        vec![(format!("mean [AUC {:.3}]", report.mean_auc), report.mean_success.clone())];
    let mut precision_series =
        vec![(format!("mean [DP {:.3}]", report.mean_dp), report.mean_precision.clone())];
    for s in &report.sequences {
        success_series.push((format!("{} [{:.3}]", s.name, s.auc), s.success.clone()));
        precision_series.push((format!("{} [{:.3}]", s.name, s.dp), s.precision.clone()));
    }
    std::fs::write(
        out.join("success.svg"),
        outputs::curve_svg("Success plot", "Overlap threshold", "Success rate", 1.0, &success_series),
    )?;
    std::fs::write(
        out.join("precision.svg"),
        outputs::curve_svg(
            "Precision plot",
            "Location error threshold (px)",
            "Precision",
            50.0,
            &precision_series,
        ),
    )?;

    println!(
        "evaluated {} sequences ({} failed): mean AUC {:.3}, OP {:.3}, DP {:.3}, {:.1} fps -> {}",
        report.sequences.len(),
        report.failures.len(),
        report.mean_auc,
        report.mean_op,
        report.mean_dp,
        report.mean_fps,
        out.display()
    );
    for f in &report.failures {
        eprintln!("failed {}: {}", f.sequence, f.detail);
    }
    Ok(if report.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_synth(
    kind_str: &str,
    frames: usize,
    noise: u8,
    seed: u64,
    out: &Path,
    velocity: Option<&str>,
    rate: Option<f64>,
) -> anyhow::Result<ExitCode> {
    let mut kind: SyntheticKind = kind_str.parse()?;
    if let Some(v) = velocity {
        let SyntheticKind::Linear { .. } = kind else {
            bail!("--velocity applies to the 'linear' kind only");
        };
        let (vx, vy) = v.split_once(',').context("velocity must be 'vx,vy'")?;
        kind = SyntheticKind::Linear {
            velocity: (
                vx.trim().parse().context("velocity x")?,
                vy.trim().parse().context("velocity y")?,
            ),
        };
    }
    if let Some(r) = rate {
        let SyntheticKind::ScaleRamp { .. } = kind else {
            bail!("--rate applies to the 'scale-ramp' kind only");
        };
        kind = SyntheticKind::ScaleRamp { rate: r };
    }
    let synthetic = bench::make_synthetic(kind, frames, noise, seed)?;
    let seq = synthetic.materialize(out)?;
    println!("{}: {} frames in {}", seq.name, seq.frames.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest() -> ExitCode {
    let results = ladcf::selftest::run_all();
    let mut all_passed = true;
    for r in &results {
        println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        all_passed &= r.passed;
    }
    if all_passed {
        println!("{} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

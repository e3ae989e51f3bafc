//! Command-line front end. [`run`] parses arguments, dispatches and maps
//! errors to exit codes: 0 success, 2 usage (bad flag, invalid override,
//! missing input), 1 runtime failure.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{analyze, condition_gaze_map, ReportOptions, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::experiment::{read_log, replay_records, synth_dataset, write_log, ArchiveScorer, Condition, Dataset, TrialRecord};
use crate::imaging::{
    canny_edges, equalize_luma, load_gray, load_rgb, resize_rgb, rgb_to_yuv, save_gray, save_rgb, yuv_to_rgb,
    EdgeParams,
};
use crate::maskstore::{compose_gcss, load_archive, save_archive, synth_scene, GazePoint, SceneSpec, SelectionPolicy};
use crate::service::{serve, SessionManager};
use crate::simulator::{render_frame, sample_layout, ElectrodeLayout, SimParams};

#[derive(Debug, Parser)]
#[command(name = "phosphene", version, about = "Phosphene vision simulation and object-search experiment tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

// Parsed once per process, so variant size is irrelevant.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resize to a square and equalize the luma channel.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1024)]
        size: u32,
    },
    /// Canny edge map of an image.
    Edges {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        edges: EdgeArgs,
    },
    /// Synthetic scene with its PMSK archive, or with --dataset a complete
    /// synthetic dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1024)]
        size: u32,
        /// Number of objects in a single scene.
        #[arg(long, default_value_t = 5)]
        objects: usize,
        #[arg(long)]
        image_id: Option<String>,
        /// Write a full dataset (images, masks, sidecar, dataset.json).
        #[arg(long)]
        dataset: bool,
    },
    /// Renders one phosphene frame for a gaze position.
    Simulate {
        /// Stimulus image; with --archive it is the scene image for GCSS.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Gaze in stimulus pixels; defaults to the centre.
        #[arg(long)]
        gaze_x: Option<f64>,
        #[arg(long)]
        gaze_y: Option<f64>,
        /// Electrode layout seed (required unless --layout is given).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "seed")]
        layout: Option<PathBuf>,
        #[arg(long)]
        save_layout: Option<PathBuf>,
        /// Mask archive for the scene; switches to GCSS composition.
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long, default_value_t = crate::maskstore::DEFAULT_EDGE_GAIN)]
        edge_gain: f64,
        #[arg(long, default_value = "union")]
        selection_policy: SelectionPolicy,
        #[command(flatten)]
        edges: EdgeArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Starts the session server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Reports and gaze heatmaps from trial logs.
    Analyze {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1024)]
        frame_width: u32,
        #[arg(long, default_value_t = 1024)]
        frame_height: u32,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid_size: usize,
        /// KDE bandwidth in grid cells; Scott's rule when omitted.
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Pixels per grid cell in heatmap PNGs.
        #[arg(long, default_value_t = 16)]
        heatmap_scale: u32,
    },
    /// Re-scores a trial log through the session state machine.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = crate::experiment::DEFAULT_TOLERANCE_PX)]
        tolerance_px: u32,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EdgeArgs {
    #[arg(long, default_value_t = 25.0)]
    pub low_threshold: f64,
    #[arg(long, default_value_t = 50.0)]
    pub high_threshold: f64,
    #[arg(long, default_value_t = 5.0)]
    pub gaussian_sigma: f64,
}

impl EdgeArgs {
    pub fn params(&self) -> EdgeParams {
        EdgeParams { low_threshold: self.low_threshold, high_threshold: self.high_threshold, gaussian_sigma: self.gaussian_sigma }
    }
}

/// Overrides of [`SimParams`]; unset flags keep the defaults.
#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub n_electrodes: Option<usize>,
    #[arg(long)]
    pub field_radius_deg: Option<f64>,
    #[arg(long)]
    pub pulse_freq_hz: Option<f64>,
    #[arg(long)]
    pub current_ua: Option<f64>,
    #[arg(long)]
    pub thresholding: bool,
    #[arg(long)]
    pub threshold_ua: Option<f64>,
    #[arg(long)]
    pub magnification_a_deg: Option<f64>,
    #[arg(long)]
    pub magnification_k_mm: Option<f64>,
    #[arg(long)]
    pub excitability_ua_mm2: Option<f64>,
    #[arg(long)]
    pub output_size: Option<u32>,
}

impl SimArgs {
    pub fn params(&self) -> SimParams {
        let d = SimParams::default();
        SimParams {
            n_electrodes: self.n_electrodes.unwrap_or(d.n_electrodes),
            field_radius_deg: self.field_radius_deg.unwrap_or(d.field_radius_deg),
            pulse_freq_hz: self.pulse_freq_hz.unwrap_or(d.pulse_freq_hz),
            current_ua: self.current_ua.unwrap_or(d.current_ua),
            thresholding: self.thresholding || d.thresholding,
            threshold_ua: self.threshold_ua.unwrap_or(d.threshold_ua),
            magnification_a_deg: self.magnification_a_deg.unwrap_or(d.magnification_a_deg),
            magnification_k_mm: self.magnification_k_mm.unwrap_or(d.magnification_k_mm),
            excitability_ua_mm2: self.excitability_ua_mm2.unwrap_or(d.excitability_ua_mm2),
            output_size: self.output_size.unwrap_or(d.output_size),
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn require_file(p: &Path) -> std::result::Result<(), Failure> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("input file {} does not exist", p.display())))
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Preprocess { input, output, size } => {
            require_file(&input)?;
            if size == 0 {
                return Err(Failure::Usage("size must be positive".into()));
            }
            let img = resize_rgb(&load_rgb(&input)?, size, size)?;
            save_rgb(&yuv_to_rgb(&equalize_luma(&rgb_to_yuv(&img))), &output)?;
        }
        Command::Edges { input, output, edges } => {
            let p = edges.params();
            p.validate().map_err(usage)?;
            require_file(&input)?;
            save_gray(&canny_edges(&load_gray(&input)?, &p)?, &output)?;
        }
        Command::Synth { out, seed, size, objects, image_id, dataset } => {
            if size < 16 {
                return Err(Failure::Usage("size must be at least 16".into()));
            }
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            if dataset {
                let ds = synth_dataset(&out, size, seed)?;
                println!("{} scenes written to {}", ds.scenes.len(), out.display());
            } else {
                let mut spec = SceneSpec::random(size, size, objects, true);
                spec.image_id = image_id;
                let (img, archive) = synth_scene(&spec, seed)?;
                save_rgb(&img, out.join(format!("{}.png", archive.image_id)))?;
                save_archive(&archive, out.join(format!("{}.pmsk", archive.image_id)))?;
                println!("{} ({} masks)", archive.image_id, archive.masks().len());
            }
        }
        Command::Simulate {
            input,
            output,
            gaze_x,
            gaze_y,
            seed,
            layout,
            save_layout,
            archive,
            edge_gain,
            selection_policy,
            edges,
            sim,
        } => {
            let p = sim.params();
            p.validate().map_err(usage)?;
            let ep = edges.params();
            ep.validate().map_err(usage)?;
            if !(0.0..=1.0).contains(&edge_gain) {
                return Err(Failure::Usage(format!("edge_gain {edge_gain} outside [0, 1]")));
            }
            require_file(&input)?;
            let layout = match (layout, seed) {
                (Some(path), _) => {
                    require_file(&path)?;
                    ElectrodeLayout::load(&path)?
                }
                (None, Some(seed)) => sample_layout(&p, seed)?,
                (None, None) => return Err(Failure::Usage("simulate needs --seed or --layout".into())),
            };
            if let Some(path) = save_layout {
                layout.save(path)?;
            }
            let stimulus = match archive {
                Some(path) => {
                    require_file(&path)?;
                    let a = load_archive(&path)?;
                    let rgb = resize_rgb(&load_rgb(&input)?, a.width(), a.height())?;
                    let e = canny_edges(&rgb.to_gray(), &ep)?;
                    let g = gaze_point(gaze_x, gaze_y, a.width(), a.height());
                    (compose_gcss(&a, &g, &e, edge_gain, selection_policy)?, g)
                }
                None => {
                    let s = load_gray(&input)?;
                    let g = gaze_point(gaze_x, gaze_y, s.width(), s.height());
                    (s, g)
                }
            };
            save_gray(&render_frame(&stimulus.0, &stimulus.1, &layout, &p)?, &output)?;
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
            rt.block_on(serve(addr, Arc::new(SessionManager::new())))?;
        }
        Command::Analyze { logs, out, frame_width, frame_height, grid_size, bandwidth, heatmap_scale } => {
            if frame_width == 0 || frame_height == 0 || grid_size == 0 || heatmap_scale == 0 {
                return Err(Failure::Usage("frame size, grid size and heatmap scale must be positive".into()));
            }
            if let Some(b) = bandwidth {
                if !(b > 0.0 && b.is_finite()) {
                    return Err(Failure::Usage(format!("bandwidth must be positive, got {b}")));
                }
            }
            for l in &logs {
                require_file(l)?;
            }
            let parsed: Vec<Vec<TrialRecord>> = logs
                .par_iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    read_log(&text)
                })
                .collect::<Result<_>>()?;
            let records: Vec<TrialRecord> = parsed.into_iter().flatten().collect();
            let opts = ReportOptions { frame_width, frame_height, grid_size };
            let report = analyze(&records, &opts)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_file(&out.join("report.json"), report.to_json()?.as_bytes())?;
            write_file(&out.join("report.csv"), report.to_csv().as_bytes())?;
            let maps: Vec<(Condition, Option<Vec<u8>>)> = Condition::ALL
                .par_iter()
                .map(|&c| {
                    let png = condition_gaze_map(&records, c, &opts, bandwidth)?.map(|m| m.to_png(heatmap_scale)).transpose()?;
                    Ok((c, png))
                })
                .collect::<Result<_>>()?;
            for (c, png) in maps {
                if let Some(png) = png {
                    write_file(&out.join(format!("gaze_{}.png", c.as_str().to_ascii_lowercase())), &png)?;
                }
            }
        }
        Command::Replay { log, dataset, output, tolerance_px } => {
            require_file(&log)?;
            require_file(&dataset)?;
            let text = std::fs::read_to_string(&log).map_err(|e| Error::io(&log, e))?;
            let records = read_log(&text)?;
            let scorer = ArchiveScorer::new(Dataset::load(&dataset)?, tolerance_px);
            let replayed = replay_records(&records, &scorer)?;
            let changed = records.iter().zip(&replayed).filter(|(a, b)| a.outcome != b.outcome).count();
            write_file(&output, write_log(&replayed)?.as_bytes())?;
            if changed > 0 {
                eprintln!("{changed} of {} outcomes changed on re-scoring", records.len());
            }
        }
    }
    Ok(())
}

fn gaze_point(x: Option<f64>, y: Option<f64>, w: u32, h: u32) -> GazePoint {
    GazePoint::new(x.unwrap_or(f64::from(w) / 2.0), y.unwrap_or(f64::from(h) / 2.0))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

//! `obbkit` — command-line pipeline for oriented-box detection data:
//! tile annotations, merge and deduplicate per-tile detections, filter
//! with rotated NMS, evaluate rotated mAP, inspect assignment
//! statistics, plan class-balanced resampling, dump aligned sampling
//! grids, and render SVG overlays.
//!
//! Outputs are deterministic: identical inputs and flags produce
//! byte-identical files regardless of `--threads`.

mod commands;
mod svg;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "obbkit", version, about = "Oriented bounding-box detection toolkit")]
struct Cli {
    /// Worker threads (0 = one per core). Outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

/// Class-table selection shared by most subcommands.
#[derive(Args, Clone)]
struct ClassArgs {
    /// Class table file (one name per line); defaults to the built-in
    /// 37-class FAIR1M table.
    #[arg(long)]
    classes: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Split per-image annotations into overlapping patch tiles.
    Tile {
        /// Directory of DOTA-style annotation files (one per image).
        #[arg(long)]
        ann_dir: PathBuf,
        /// Output directory for per-tile annotation files.
        #[arg(long)]
        out_dir: PathBuf,
        /// Patch side in pixels.
        #[arg(long)]
        patch: Option<u32>,
        /// Overlap between adjacent patches in pixels.
        #[arg(long)]
        gap: Option<u32>,
        /// Minimum visible area fraction for a clipped box to survive.
        #[arg(long)]
        keep_visibility: Option<f64>,
        /// Uniform image width when --sizes is not given.
        #[arg(long)]
        image_w: Option<u32>,
        /// Uniform image height when --sizes is not given.
        #[arg(long)]
        image_h: Option<u32>,
        /// Per-image sizes file: lines `image_id width height`.
        #[arg(long)]
        sizes: Option<PathBuf>,
        /// Write a tile manifest (tile id and window per line).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Drop annotations with unknown categories instead of failing.
        #[arg(long)]
        skip_unknown: bool,
        /// Pipeline config supplying defaults for omitted flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Merge per-tile detections back to image coordinates with global NMS.
    Merge {
        /// Directory of Task1_<class>.txt files keyed by tile ids.
        #[arg(long)]
        dets_dir: PathBuf,
        /// Output directory for image-frame Task1 files.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        iou_thr: Option<f64>,
        /// class-aware or class-agnostic.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Confidence-filter and NMS a detection set.
    Nms {
        #[arg(long)]
        dets_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        iou_thr: Option<f64>,
        #[arg(long)]
        conf_thr: Option<f64>,
        /// class-aware or class-agnostic.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Evaluate detections against ground truth (rotated mAP).
    Eval {
        #[arg(long)]
        dets_dir: PathBuf,
        #[arg(long)]
        ann_dir: PathBuf,
        #[arg(long)]
        iou_thr: Option<f64>,
        /// all-point or eleven-point.
        #[arg(long)]
        mode: Option<String>,
        /// Score difficult ground truths instead of ignoring them.
        #[arg(long)]
        include_difficult: bool,
        /// Write the machine-readable report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        skip_unknown: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Anchor-assignment statistics over a threshold list.
    AssignStats {
        /// Annotation file providing the ground-truth scene.
        #[arg(long)]
        ann: PathBuf,
        #[arg(long)]
        image_w: u32,
        #[arg(long)]
        image_h: u32,
        #[arg(long, default_value_t = 8.0)]
        stride: f64,
        #[arg(long, default_value_t = 8.0)]
        base_size: f64,
        #[arg(long, default_value_t = 0.0)]
        base_theta: f64,
        /// Comma-separated positive thresholds, e.g. 0.4,0.5.
        #[arg(long)]
        pos: String,
        /// Comma-separated negative thresholds, paired with --pos.
        #[arg(long)]
        neg: String,
        /// Disable forcing each ground truth's best anchor positive.
        #[arg(long)]
        no_low_quality: bool,
        #[arg(long)]
        skip_unknown: bool,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Class-balanced repeat-factor plan for a dataset.
    BalancePlan {
        #[arg(long)]
        ann_dir: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        target_ratio: f64,
        /// Write the human-readable plan table here.
        #[arg(long)]
        out_plan: Option<PathBuf>,
        /// Write machine-readable `image_id factor` lines here.
        #[arg(long)]
        out_factors: Option<PathBuf>,
        #[arg(long)]
        skip_unknown: bool,
        #[command(flatten)]
        classes: ClassArgs,
    },
    /// Dump an aligned-convolution sampling grid as CSV.
    AlignGrid {
        /// Box as cx,cy,w,h,theta.
        #[arg(long, value_name = "CX,CY,W,H,THETA")]
        bbox: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 8.0)]
        stride: f64,
        /// Feature cell as i,j.
        #[arg(long, default_value = "0,0")]
        cell: String,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render annotations (and optional detections) as a static SVG.
    Viz {
        #[arg(long)]
        ann: PathBuf,
        /// Optional detections to overlay, keyed by --image-id.
        #[arg(long)]
        dets_dir: Option<PathBuf>,
        /// Image id selecting detections from --dets-dir.
        #[arg(long)]
        image_id: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        image_w: Option<u32>,
        #[arg(long)]
        image_h: Option<u32>,
        #[arg(long)]
        skip_unknown: bool,
        #[command(flatten)]
        classes: ClassArgs,
    },
}

fn main() {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: building thread pool: {e}");
            std::process::exit(1);
        }
    };
    let result = pool.install(|| run(cli.command));
    if let Err(e) = result {
        // Single-line, machine-parseable failure.
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Tile {
            ann_dir,
            out_dir,
            patch,
            gap,
            keep_visibility,
            image_w,
            image_h,
            sizes,
            manifest,
            skip_unknown,
            config,
            classes,
        } => commands::tile(commands::TileArgs {
            ann_dir,
            out_dir,
            patch,
            gap,
            keep_visibility,
            image_w,
            image_h,
            sizes,
            manifest,
            skip_unknown,
            config,
            classes: classes.classes,
        }),
        Command::Merge { dets_dir, out_dir, iou_thr, mode, config, classes } => {
            commands::merge(dets_dir, out_dir, iou_thr, mode, config, classes.classes)
        }
        Command::Nms { dets_dir, out_dir, iou_thr, conf_thr, mode, config, classes } => {
            commands::nms(dets_dir, out_dir, iou_thr, conf_thr, mode, config, classes.classes)
        }
        Command::Eval {
            dets_dir,
            ann_dir,
            iou_thr,
            mode,
            include_difficult,
            json,
            skip_unknown,
            config,
            classes,
        } => commands::eval(
            dets_dir,
            ann_dir,
            iou_thr,
            mode,
            include_difficult,
            json,
            skip_unknown,
            config,
            classes.classes,
        ),
        Command::AssignStats {
            ann,
            image_w,
            image_h,
            stride,
            base_size,
            base_theta,
            pos,
            neg,
            no_low_quality,
            skip_unknown,
            classes,
        } => commands::assign_stats(
            ann,
            image_w,
            image_h,
            stride,
            base_size,
            base_theta,
            &pos,
            &neg,
            !no_low_quality,
            skip_unknown,
            classes.classes,
        ),
        Command::BalancePlan { ann_dir, target_ratio, out_plan, out_factors, skip_unknown, classes } => {
            commands::balance_plan(ann_dir, target_ratio, out_plan, out_factors, skip_unknown, classes.classes)
        }
        Command::AlignGrid { bbox, k, stride, cell, out } => {
            commands::align_grid(&bbox, k, stride, &cell, out)
        }
        Command::Viz { ann, dets_dir, image_id, out, image_w, image_h, skip_unknown, classes } => {
            commands::viz(ann, dets_dir, image_id, out, image_w, image_h, skip_unknown, classes.classes)
        }
    }
}

//! Subcommand implementations: thin compositions of obbkit operations
//! with deterministic, atomic file output.

use anyhow::{bail, Context, Result};
use obbkit::annotations::AnnotationSet;
use obbkit::assign::{generate_anchors, max_iou_assign, AnchorGrid};
use obbkit::augment::balance_plan as plan_balance;
use obbkit::classes::ClassTable;
use obbkit::config::PipelineConfig;
use obbkit::eval::{evaluate, ApMode, DetectionSet, EvalConfig};
use obbkit::formats::{
    self, annotation_lines, group_by_image, parse_annotations, parse_detections, parse_tile_id,
    tile_id, write_atomic, write_detections, DetectionRecord, UnknownPolicy,
};
use obbkit::geometry::RotatedBox;
use obbkit::nms::{rotated_nms, score_filter, NmsMode};
use obbkit::tiling::{clip_annotations, merge_detections, plan_tiles};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn load_classes(path: Option<PathBuf>) -> Result<ClassTable> {
    match path {
        Some(p) => ClassTable::from_file(&p).with_context(|| format!("reading {}", p.display())),
        None => Ok(ClassTable::fair1m()),
    }
}

fn load_config(path: Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => {
            PipelineConfig::from_file(&p).with_context(|| format!("reading {}", p.display()))
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn policy(skip_unknown: bool) -> UnknownPolicy {
    if skip_unknown {
        UnknownPolicy::Skip
    } else {
        UnknownPolicy::Reject
    }
}

fn parse_mode(mode: Option<String>, fallback: NmsMode) -> Result<NmsMode> {
    match mode {
        Some(s) => s.parse::<NmsMode>().map_err(|e| anyhow::anyhow!(e)),
        None => Ok(fallback),
    }
}

fn annotation_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().map_or(false, |e| e == "txt")
                && !p
                    .file_name()
                    .map_or(false, |n| n.to_string_lossy().starts_with("Task1_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no annotation files (*.txt) in {}", dir.display());
    }
    Ok(paths)
}

pub struct TileArgs {
    pub ann_dir: PathBuf,
    pub out_dir: PathBuf,
    pub patch: Option<u32>,
    pub gap: Option<u32>,
    pub keep_visibility: Option<f64>,
    pub image_w: Option<u32>,
    pub image_h: Option<u32>,
    pub sizes: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub skip_unknown: bool,
    pub config: Option<PathBuf>,
    pub classes: Option<PathBuf>,
}

fn read_sizes(path: &Path) -> Result<BTreeMap<String, (u32, u32)>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            bail!("{}:{}: expected `image_id width height`", path.display(), lineno + 1);
        }
        let w: u32 = tokens[1]
            .parse()
            .with_context(|| format!("{}:{}: bad width", path.display(), lineno + 1))?;
        let h: u32 = tokens[2]
            .parse()
            .with_context(|| format!("{}:{}: bad height", path.display(), lineno + 1))?;
        map.insert(tokens[0].to_string(), (w, h));
    }
    Ok(map)
}

pub fn tile(args: TileArgs) -> Result<()> {
    let cfg = load_config(args.config)?;
    let table = load_classes(args.classes)?;
    let patch = args.patch.unwrap_or(cfg.patch);
    let gap = args.gap.unwrap_or(cfg.gap);
    let keep_visibility = args.keep_visibility.unwrap_or(cfg.keep_visibility);
    let sizes = args.sizes.as_deref().map(read_sizes).transpose()?;

    let paths = annotation_paths(&args.ann_dir)?;
    std::fs::create_dir_all(&args.out_dir)?;

    let results: Vec<(String, Vec<(String, String, (u32, u32))>)> = paths
        .par_iter()
        .map(|path| -> Result<_> {
            let image_id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (w, h) = match (&sizes, args.image_w, args.image_h) {
                (Some(map), _, _) => *map.get(&image_id).with_context(|| {
                    format!("image '{image_id}' missing from the sizes file")
                })?,
                (None, Some(w), Some(h)) => (w, h),
                _ => bail!("supply --sizes or both --image-w and --image-h"),
            };
            let set = parse_annotations(path, w as f64, h as f64, &table, policy(args.skip_unknown))?;
            let plan = plan_tiles(w, h, patch, gap)?;
            let tiles = clip_annotations(&set, &plan, keep_visibility)?;
            let mut files = Vec::with_capacity(tiles.len());
            for t in &tiles {
                let id = tile_id(&image_id, t.origin.0, t.origin.1);
                let mut tile_set = AnnotationSet::new(id.clone(), patch as f64, patch as f64);
                for obj in &t.objects {
                    tile_set.objects.push(obbkit::annotations::Object {
                        bbox: obj.bbox,
                        class_id: obj.class_id,
                        difficult: obj.difficult,
                    });
                }
                files.push((id, annotation_lines(&tile_set, &table)?, t.origin));
            }
            Ok((image_id, files))
        })
        .collect::<Result<_>>()?;

    let mut manifest_lines = String::new();
    let mut tile_count = 0usize;
    for (_, files) in &results {
        for (id, content, origin) in files {
            write_atomic(args.out_dir.join(format!("{id}.txt")), content)?;
            manifest_lines.push_str(&format!("{id} {} {} {patch}\n", origin.0, origin.1));
            tile_count += 1;
        }
    }
    if let Some(manifest) = args.manifest {
        write_atomic(manifest, &manifest_lines)?;
    }
    println!("tiled {} images into {} patches of {}px (gap {}px)", results.len(), tile_count, patch, gap);
    Ok(())
}

pub fn merge(
    dets_dir: PathBuf,
    out_dir: PathBuf,
    iou_thr: Option<f64>,
    mode: Option<String>,
    config: Option<PathBuf>,
    classes: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let table = load_classes(classes)?;
    let iou_thr = iou_thr.unwrap_or(cfg.nms_thr);
    let mode = parse_mode(mode, cfg.nms_mode)?;

    let records = parse_detections(&dets_dir, &table)?;
    // Group tiles by their base image.
    let mut by_image: BTreeMap<String, Vec<((u32, u32), Vec<obbkit::nms::Detection>)>> =
        BTreeMap::new();
    for (tile, dets) in group_by_image(records) {
        let (image_id, x0, y0) = parse_tile_id(&tile)
            .with_context(|| format!("'{tile}' is not a <image>__<x0>__<y0> tile id"))?;
        by_image.entry(image_id).or_default().push(((x0, y0), dets));
    }

    let images: Vec<(String, Vec<((u32, u32), Vec<obbkit::nms::Detection>)>)> =
        by_image.into_iter().collect();
    let merged: Vec<(String, Vec<obbkit::nms::Detection>)> = images
        .into_par_iter()
        .map(|(image_id, tiles)| {
            let dets = merge_detections(&tiles, iou_thr, mode);
            (image_id, dets)
        })
        .collect();

    let mut out = Vec::new();
    for (image_id, dets) in &merged {
        for d in dets {
            out.push(DetectionRecord { image_id: image_id.clone(), detection: d.clone() });
        }
    }
    std::fs::create_dir_all(&out_dir)?;
    write_detections(&out, &out_dir, &table)?;
    println!(
        "merged {} detections across {} images (iou_thr {iou_thr}, {mode})",
        out.len(),
        merged.len()
    );
    Ok(())
}

pub fn nms(
    dets_dir: PathBuf,
    out_dir: PathBuf,
    iou_thr: Option<f64>,
    conf_thr: Option<f64>,
    mode: Option<String>,
    config: Option<PathBuf>,
    classes: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let table = load_classes(classes)?;
    let iou_thr = iou_thr.unwrap_or(cfg.nms_thr);
    let conf_thr = conf_thr.unwrap_or(cfg.conf_thr);
    let mode = parse_mode(mode, cfg.nms_mode)?;
    if !(0.0..=1.0).contains(&conf_thr) || !(0.0..=1.0).contains(&iou_thr) {
        bail!("thresholds must be within [0, 1]");
    }

    let records = parse_detections(&dets_dir, &table)?;
    let images: Vec<(String, Vec<obbkit::nms::Detection>)> = group_by_image(records);
    let filtered: Vec<(String, Vec<obbkit::nms::Detection>)> = images
        .into_par_iter()
        .map(|(image_id, dets)| {
            let confident = score_filter(&dets, conf_thr);
            let kept = rotated_nms(&confident, iou_thr, mode)
                .into_iter()
                .map(|i| confident[i].clone())
                .collect();
            (image_id, kept)
        })
        .collect();

    let mut out = Vec::new();
    for (image_id, dets) in &filtered {
        for d in dets {
            out.push(DetectionRecord { image_id: image_id.clone(), detection: d.clone() });
        }
    }
    std::fs::create_dir_all(&out_dir)?;
    write_detections(&out, &out_dir, &table)?;
    println!(
        "kept {} detections over {} images (conf_thr {conf_thr}, iou_thr {iou_thr}, {mode})",
        out.len(),
        filtered.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    dets_dir: PathBuf,
    ann_dir: PathBuf,
    iou_thr: Option<f64>,
    mode: Option<String>,
    include_difficult: bool,
    json: Option<PathBuf>,
    skip_unknown: bool,
    config: Option<PathBuf>,
    classes: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let table = load_classes(classes)?;
    let iou_thr = iou_thr.unwrap_or(cfg.eval_iou_thr);
    let mode = match mode {
        Some(s) => s.parse::<ApMode>().map_err(|e| anyhow::anyhow!(e))?,
        None => cfg.eval_mode,
    };

    let gts: Vec<AnnotationSet> = annotation_paths(&ann_dir)?
        .par_iter()
        .map(|p| parse_annotations(p, 0.0, 0.0, &table, policy(skip_unknown)))
        .collect::<std::result::Result<_, _>>()?;
    let records = parse_detections(&dets_dir, &table)?;
    let dets: Vec<DetectionSet> = group_by_image(records)
        .into_iter()
        .map(|(image_id, detections)| DetectionSet { image_id, detections })
        .collect();

    let report = evaluate(
        &dets,
        &gts,
        &table,
        &EvalConfig { iou_thr, mode, ignore_difficult: !include_difficult },
    )?;
    print!("{}", report.to_table());
    if let Some(path) = json {
        let body = serde_json::to_string_pretty(&report)?;
        write_atomic(path, &body)?;
    }
    Ok(())
}

fn parse_threshold_list(s: &str, flag: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad {flag} threshold '{tok}'"))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn assign_stats(
    ann: PathBuf,
    image_w: u32,
    image_h: u32,
    stride: f64,
    base_size: f64,
    base_theta: f64,
    pos: &str,
    neg: &str,
    low_quality: bool,
    skip_unknown: bool,
    classes: Option<PathBuf>,
) -> Result<()> {
    let table = load_classes(classes)?;
    let set = parse_annotations(&ann, image_w as f64, image_h as f64, &table, policy(skip_unknown))?;
    if set.objects.is_empty() {
        bail!("{} has no objects", ann.display());
    }
    let pos = parse_threshold_list(pos, "--pos")?;
    let neg = parse_threshold_list(neg, "--neg")?;
    if pos.len() != neg.len() {
        bail!("--pos and --neg need the same number of thresholds");
    }

    let grid = AnchorGrid {
        stride,
        base_size,
        grid_w: ((image_w as f64) / stride).ceil() as usize,
        grid_h: ((image_h as f64) / stride).ceil() as usize,
        base_theta,
    };
    let anchors = generate_anchors(&grid)?;
    let gts: Vec<RotatedBox> = set.objects.iter().map(|o| o.bbox).collect();

    println!(
        "# {} anchors ({}x{} grid, stride {stride}, base {base_size}), {} ground truths, low-quality match {}",
        anchors.len(),
        grid.grid_w,
        grid.grid_h,
        gts.len(),
        if low_quality { "on" } else { "off" }
    );
    println!(
        "{:>7} {:>7} {:>10} {:>10} {:>9} {:>10} {:>13}",
        "pos", "neg", "positives", "negatives", "ignored", "gt_recall", "mean_pos_iou"
    );
    for (&p, &n) in pos.iter().zip(&neg) {
        let result = max_iou_assign(&anchors, &gts, p, n, low_quality)?;
        let stats = result.stats();
        println!(
            "{:>7.2} {:>7.2} {:>10} {:>10} {:>9} {:>10.4} {:>13.4}",
            p, n, stats.positives, stats.negatives, stats.ignored, stats.gt_recall, stats.mean_pos_iou
        );
    }
    Ok(())
}

pub fn balance_plan(
    ann_dir: PathBuf,
    target_ratio: f64,
    out_plan: Option<PathBuf>,
    out_factors: Option<PathBuf>,
    skip_unknown: bool,
    classes: Option<PathBuf>,
) -> Result<()> {
    let table = load_classes(classes)?;
    let sets: Vec<AnnotationSet> = annotation_paths(&ann_dir)?
        .par_iter()
        .map(|p| parse_annotations(p, 0.0, 0.0, &table, policy(skip_unknown)))
        .collect::<std::result::Result<_, _>>()?;
    let plan = plan_balance(&sets, table.len(), target_ratio)?;

    let mut text = String::new();
    text.push_str(&table.header_line());
    text.push('\n');
    text.push_str(&format!(
        "# target_ratio {target_ratio}, images {} -> {:.0}, inflation {:.3}x\n",
        sets.len(),
        plan.image_inflation() * sets.len() as f64,
        plan.image_inflation()
    ));
    text.push_str(&format!(
        "# min/max class ratio {:.4} -> {:.4}\n",
        plan.ratio_before(),
        plan.ratio_after()
    ));
    text.push_str(&format!(
        "{:<22} {:>9} {:>7} {:>9}\n",
        "class", "before", "repeat", "after"
    ));
    for class_id in 0..table.len() {
        if !plan.present[class_id] {
            continue;
        }
        text.push_str(&format!(
            "{:<22} {:>9} {:>7} {:>9}\n",
            table.name(class_id)?,
            plan.counts_before[class_id],
            plan.class_repeats[class_id],
            plan.counts_after[class_id]
        ));
    }
    print!("{text}");
    if let Some(path) = out_plan {
        write_atomic(path, &text)?;
    }
    if let Some(path) = out_factors {
        let mut body = String::new();
        body.push_str(&table.header_line());
        body.push('\n');
        for (set, factor) in sets.iter().zip(&plan.repeat_factors) {
            body.push_str(&format!("{} {}\n", set.image_id, factor));
        }
        write_atomic(path, &body)?;
    }
    Ok(())
}

fn parse_csv_numbers(s: &str, expect: usize, flag: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad {flag} component '{tok}'"))
        })
        .collect::<Result<_>>()?;
    if values.len() != expect {
        bail!("{flag} needs {expect} comma-separated values");
    }
    Ok(values)
}

pub fn align_grid(
    bbox: &str,
    k: usize,
    stride: f64,
    cell: &str,
    out: Option<PathBuf>,
) -> Result<()> {
    let b = parse_csv_numbers(bbox, 5, "--bbox")?;
    let c = parse_csv_numbers(cell, 2, "--cell")?;
    if c[0] < 0.0 || c[1] < 0.0 || c[0].fract() != 0.0 || c[1].fract() != 0.0 {
        bail!("--cell needs non-negative integers");
    }
    let bbox = RotatedBox::new(b[0], b[1], b[2], b[3], b[4])?;
    let grid = obbkit::align::align_sampling_grid(&bbox, k, stride, (c[0] as usize, c[1] as usize))?;
    let mut body = String::from("u,v,x,y,offset_x,offset_y\n");
    let half = (k as i64 - 1) / 2;
    for (idx, (p, off)) in grid.points.iter().zip(&grid.offsets).enumerate() {
        let u = idx as i64 % k as i64 - half;
        let v = idx as i64 / k as i64 - half;
        body.push_str(&format!("{u},{v},{:.6},{:.6},{:.6},{:.6}\n", p.x, p.y, off.x, off.y));
    }
    match out {
        Some(path) => write_atomic(path, &body)?,
        None => print!("{body}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn viz(
    ann: PathBuf,
    dets_dir: Option<PathBuf>,
    image_id: Option<String>,
    out: PathBuf,
    image_w: Option<u32>,
    image_h: Option<u32>,
    skip_unknown: bool,
    classes: Option<PathBuf>,
) -> Result<()> {
    let table = load_classes(classes)?;
    let set = parse_annotations(
        &ann,
        image_w.unwrap_or(0) as f64,
        image_h.unwrap_or(0) as f64,
        &table,
        policy(skip_unknown),
    )?;
    let dets = match (&dets_dir, &image_id) {
        (Some(dir), Some(id)) => {
            let records = parse_detections(dir, &table)?;
            records
                .into_iter()
                .filter(|r| &r.image_id == id)
                .map(|r| r.detection)
                .collect()
        }
        (None, None) => Vec::new(),
        _ => bail!("--dets-dir and --image-id go together"),
    };
    let svg = svg::render(&set, &dets, &table, image_w, image_h)?;
    formats::write_atomic(&out, &svg)?;
    println!(
        "wrote {} ({} annotations, {} detections)",
        out.display(),
        set.objects.len(),
        dets.len()
    );
    Ok(())
}

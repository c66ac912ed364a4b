//! Stage artifacts on disk and the inputs the pipeline accepts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{extract, infer, patterns, segment_instance, Analysis};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::eval::SegmentationMask;
use crate::geometry::io::{read_depth_png, read_pcd, read_ply, Intrinsics};
use crate::geometry::{PlanePrimitive, PointCloud};
use crate::labeling::{build_qip, objective_value, LabelAssignment, QipInstance};
use crate::patterns::PatternGraph;
use crate::support::export::{affinity_csv, to_dot};
use crate::support::SceneHierarchyGraph;
use crate::synth::dataset::{manifest_scenes, MANIFEST};
use crate::synth::Camera;

pub const PRIMITIVES: &str = "primitives.json";
pub const PATTERNS: &str = "patterns.json";
pub const ASSIGNMENT: &str = "assignment.json";
pub const HIERARCHY: &str = "hierarchy.json";
pub const HIERARCHY_DOT: &str = "hierarchy.dot";
pub const AFFINITY: &str = "affinity.csv";
pub const PATTERNS_DOT: &str = "patterns.dot";
pub const MASK: &str = "mask.png";
pub const QIP_DUMP: &str = "qip_instance.json";

/// A JSON document tagged with the hash of the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub config_hash: String,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitivesDoc {
    pub primitives: Vec<PlanePrimitive>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveLabel {
    pub primitive: usize,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentDoc {
    pub objective: f64,
    pub labels: Vec<PrimitiveLabel>,
}

impl AssignmentDoc {
    fn new(inst: &QipInstance, x: &LabelAssignment) -> Result<Self> {
        Ok(Self {
            objective: objective_value(inst, x)?,
            labels: x
                .by_primitive(inst)
                .into_iter()
                .map(|(primitive, label)| PrimitiveLabel { primitive, label })
                .collect(),
        })
    }

    fn assignment(&self, inst: &QipInstance) -> Result<LabelAssignment> {
        inst.ids
            .iter()
            .map(|id| {
                self.labels
                    .iter()
                    .find(|l| l.primitive == *id)
                    .map(|l| l.label)
                    .ok_or_else(|| Error::Shape(format!("assignment lacks primitive {id}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(|labels| LabelAssignment { labels })
    }
}

fn write_stamped<T: Serialize>(path: &Path, cfg_hash: &str, body: T) -> Result<()> {
    let doc = Stamped {
        config_hash: cfg_hash.to_string(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_stamped<T: DeserializeOwned>(path: &Path, cfg_hash: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let doc: Stamped<T> = serde_json::from_str(&text)?;
    if doc.config_hash != cfg_hash {
        log::warn!("{} was written with config {}", path.display(), doc.config_hash);
    }
    Ok(doc.body)
}

/// Where a label image comes from: a known camera, or the pixel grid of a
/// depth image.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskSource {
    Camera(Camera),
    Pixels { width: u32, height: u32 },
}

impl MaskSource {
    pub fn render(&self, cloud: &PointCloud, labels: &[u32]) -> Result<SegmentationMask> {
        match self {
            MaskSource::Camera(cam) => Ok(cam.render_labels(&cloud.points, labels)),
            MaskSource::Pixels { width, height } => {
                let pixels = cloud
                    .pixels
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("cloud has no pixel coordinates".into()))?;
                let mut mask = SegmentationMask::new(*width, *height);
                for (&[r, c], &l) in pixels.iter().zip(labels) {
                    mask.set(r, c, l);
                }
                Ok(mask)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Input {
    pub cloud: PointCloud,
    pub mask: Option<MaskSource>,
}

/// Loads a scene directory (`cloud.ply` or `cloud.pcd`), an ASCII PLY file
/// (with an optional `camera.json` beside it), a PCD file (organized clouds
/// render masks on their own grid) or a 16-bit depth PNG with `<stem>.json`
/// or `intrinsics.json` beside it.
pub fn load_input(path: &Path) -> Result<Input> {
    if path.is_dir() {
        let pcd = path.join("cloud.pcd");
        let ply = path.join("cloud.ply");
        return load_input(if !ply.exists() && pcd.exists() { &pcd } else { &ply });
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let input = match ext.as_deref() {
        Some("ply") => {
            let cloud = read_ply(path).map_err(|e| with_path(e, path))?;
            let cam_path = dir.join("camera.json");
            let mask = if cam_path.exists() {
                Some(MaskSource::Camera(serde_json::from_str(&fs::read_to_string(
                    &cam_path,
                )?)?))
            } else {
                None
            };
            Input { cloud, mask }
        }
        Some("pcd") => {
            let pcd = read_pcd(path).map_err(|e| with_path(e, path))?;
            let mask = pcd.organized().then_some(MaskSource::Pixels {
                width: pcd.width,
                height: pcd.height,
            });
            Input { cloud: pcd.cloud, mask }
        }
        Some("png") => {
            let stem = path.with_extension("json");
            let intr_path = if stem.exists() {
                stem
            } else {
                dir.join("intrinsics.json")
            };
            let intr = Intrinsics::read(&intr_path).map_err(|e| with_path(e, &intr_path))?;
            let cloud = read_depth_png(path, &intr)?;
            let (width, height) = image::image_dimensions(path)?;
            Input {
                cloud,
                mask: Some(MaskSource::Pixels { width, height }),
            }
        }
        _ => {
            return Err(Error::Parse(format!(
                "{}: expected a .ply, a .pcd, a depth .png or a scene directory",
                path.display()
            )))
        }
    };
    if input.cloud.is_empty() {
        return Err(Error::EmptyInput("point cloud has no points"));
    }
    Ok(input)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutputOptions {
    /// Nest primitives in `hierarchy.dot` and write `patterns.dot`.
    pub dot: bool,
}

pub fn write_primitives(out: &Path, prims: &[PlanePrimitive], cfg: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(out)?;
    write_stamped(
        &out.join(PRIMITIVES),
        &cfg.hash(),
        PrimitivesDoc {
            primitives: prims.to_vec(),
        },
    )
}

pub fn write_patterns(out: &Path, graph: &PatternGraph, cfg: &PipelineConfig, opts: OutputOptions) -> Result<()> {
    write_stamped(&out.join(PATTERNS), &cfg.hash(), graph)?;
    if opts.dot {
        fs::write(out.join(PATTERNS_DOT), crate::patterns::export::to_dot(graph))?;
    }
    Ok(())
}

pub fn write_assignment(out: &Path, inst: &QipInstance, x: &LabelAssignment, cfg: &PipelineConfig) -> Result<()> {
    write_stamped(&out.join(ASSIGNMENT), &cfg.hash(), AssignmentDoc::new(inst, x)?)
}

pub fn write_hierarchy(
    out: &Path,
    graph: &SceneHierarchyGraph,
    cfg: &PipelineConfig,
    opts: OutputOptions,
) -> Result<()> {
    write_stamped(&out.join(HIERARCHY), &cfg.hash(), graph)?;
    fs::write(out.join(HIERARCHY_DOT), to_dot(graph, opts.dot))?;
    fs::write(out.join(AFFINITY), affinity_csv(graph))?;
    Ok(())
}

pub fn read_primitives(out: &Path, cfg: &PipelineConfig) -> Result<Vec<PlanePrimitive>> {
    Ok(read_stamped::<PrimitivesDoc>(&out.join(PRIMITIVES), &cfg.hash())?.primitives)
}

pub fn read_patterns(out: &Path, cfg: &PipelineConfig) -> Result<PatternGraph> {
    read_stamped(&out.join(PATTERNS), &cfg.hash())
}

pub fn read_hierarchy(dir: &Path) -> Result<SceneHierarchyGraph> {
    let path = dir.join(HIERARCHY);
    let text = fs::read_to_string(&path).map_err(|e| with_path(Error::Io(e), &path))?;
    crate::support::export::from_json(&text)
}

/// Object id + 1 per point from primitive inliers and object membership.
pub fn point_labels(n_points: usize, prims: &[PlanePrimitive], graph: &SceneHierarchyGraph) -> Vec<u32> {
    let mut object_of = std::collections::HashMap::new();
    for o in &graph.objects {
        for &p in &o.primitive_ids {
            object_of.insert(p, o.id as u32 + 1);
        }
    }
    let mut labels = vec![0; n_points];
    for p in prims {
        if let Some(&l) = object_of.get(&p.id) {
            for &i in &p.inliers {
                labels[i] = l;
            }
        }
    }
    labels
}

fn write_mask(out: &Path, input: &Input, prims: &[PlanePrimitive], graph: &SceneHierarchyGraph) -> Result<()> {
    if let Some(src) = &input.mask {
        let labels = point_labels(input.cloud.len(), prims, graph);
        src.render(&input.cloud, &labels)?.write_png(&out.join(MASK))?;
    }
    Ok(())
}

/// Extraction stage: input cloud to `primitives.json`.
pub fn stage_extract(input: &Path, out: &Path, cfg: &PipelineConfig) -> Result<Vec<PlanePrimitive>> {
    let input = load_input(input)?;
    let t = Instant::now();
    let prims = extract(&input.cloud, cfg)?;
    log::info!("extract: {} primitives in {:.2?}", prims.len(), t.elapsed());
    write_primitives(out, &prims, cfg)?;
    Ok(prims)
}

/// Pattern stage: `primitives.json` to `patterns.json`.
pub fn stage_patterns(out: &Path, cfg: &PipelineConfig, opts: OutputOptions) -> Result<PatternGraph> {
    let prims = read_primitives(out, cfg)?;
    let t = Instant::now();
    let graph = patterns(&prims, cfg)?;
    log::info!("patterns: {} edges in {:.2?}", graph.edges.len(), t.elapsed());
    write_patterns(out, &graph, cfg, opts)?;
    Ok(graph)
}

/// Labeling stage: `patterns.json` to `assignment.json`. A solver failure
/// leaves the instance in `qip_instance.json`.
pub fn stage_segment(out: &Path, cfg: &PipelineConfig) -> Result<LabelAssignment> {
    let graph = read_patterns(out, cfg)?;
    let inst = build_qip(&graph, &cfg.qip())?;
    let t = Instant::now();
    let x = solve_or_dump(out, &inst, cfg)?;
    log::info!("segment: {} labels in {:.2?}", x.labels.len(), t.elapsed());
    write_assignment(out, &inst, &x, cfg)?;
    Ok(x)
}

fn solve_or_dump(out: &Path, inst: &QipInstance, cfg: &PipelineConfig) -> Result<LabelAssignment> {
    segment_instance(inst, cfg).inspect_err(|e| {
        log::error!(
            "solver failed: {e}; instance written to {}",
            out.join(QIP_DUMP).display()
        );
        if let Ok(text) = inst.to_json() {
            let _ = fs::write(out.join(QIP_DUMP), text);
        }
    })
}

/// Inference stage: the three earlier artifacts to `hierarchy.json`,
/// `hierarchy.dot` and `affinity.csv`, plus `mask.png` when `input` can be
/// rendered.
pub fn stage_infer(
    out: &Path,
    cfg: &PipelineConfig,
    input: Option<&Path>,
    opts: OutputOptions,
) -> Result<SceneHierarchyGraph> {
    let prims = read_primitives(out, cfg)?;
    let graph = read_patterns(out, cfg)?;
    let inst = build_qip(&graph, &cfg.qip())?;
    let x = read_stamped::<AssignmentDoc>(&out.join(ASSIGNMENT), &cfg.hash())?.assignment(&inst)?;
    let t = Instant::now();
    let h = infer(&prims, &graph, &inst, &x, cfg)?;
    log::info!("infer: {} objects in {:.2?}", h.objects.len(), t.elapsed());
    write_hierarchy(out, &h, cfg, opts)?;
    if let Some(path) = input {
        write_mask(out, &load_input(path)?, &prims, &h)?;
    }
    Ok(h)
}

/// Writes every artifact of an in-memory analysis.
pub fn write_analysis(
    out: &Path,
    a: &Analysis,
    input: &Input,
    cfg: &PipelineConfig,
    opts: OutputOptions,
) -> Result<()> {
    write_primitives(out, &a.primitives, cfg)?;
    write_patterns(out, &a.patterns, cfg, opts)?;
    write_assignment(out, &a.qip, &a.assignment, cfg)?;
    write_hierarchy(out, &a.hierarchy, cfg, opts)?;
    write_mask(out, input, &a.primitives, &a.hierarchy)
}

/// Whether `path` names a dataset manifest or a directory holding one.
pub fn is_manifest(path: &Path) -> bool {
    if path.is_dir() {
        path.join(MANIFEST).is_file()
    } else {
        path.extension().is_some_and(|e| e == "json")
    }
}

/// Runs all stages on one scene, or on every scene of a manifest in
/// parallel (outputs in `out/<scene name>`). Returns the output
/// directories.
pub fn run_pipeline(input: &Path, cfg: &PipelineConfig, out: &Path, opts: OutputOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    if is_manifest(input) {
        let scenes = manifest_scenes(input)?;
        log::info!("{} scenes in {}", scenes.len(), input.display());
        return scenes
            .par_iter()
            .map(|(name, dir)| {
                let dest = out.join(name);
                run_one(dir, cfg, &dest, opts).map(|_| dest)
            })
            .collect();
    }
    run_one(input, cfg, out, opts)?;
    Ok(vec![out.to_path_buf()])
}

fn run_one(input: &Path, cfg: &PipelineConfig, out: &Path, opts: OutputOptions) -> Result<()> {
    let data = load_input(input)?;
    fs::create_dir_all(out)?;
    let t = Instant::now();
    let primitives = extract(&data.cloud, cfg)?;
    log::info!("extract: {} primitives in {:.2?}", primitives.len(), t.elapsed());
    let t = Instant::now();
    let graph = patterns(&primitives, cfg)?;
    log::info!("patterns: {} edges in {:.2?}", graph.edges.len(), t.elapsed());
    let qip = build_qip(&graph, &cfg.qip())?;
    let t = Instant::now();
    let assignment = solve_or_dump(out, &qip, cfg)?;
    log::info!("segment: {:.2?}", t.elapsed());
    let t = Instant::now();
    let hierarchy = infer(&primitives, &graph, &qip, &assignment, cfg)?;
    log::info!("infer: {} objects in {:.2?}", hierarchy.objects.len(), t.elapsed());
    let a = Analysis {
        primitives,
        patterns: graph,
        qip,
        assignment,
        hierarchy,
    };
    write_analysis(out, &a, &data, cfg, opts)
}

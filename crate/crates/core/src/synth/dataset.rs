//! On-disk synthetic datasets: one directory per scene plus a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::{generate_scene, SceneSpec, SynthScene};
use crate::error::{Error, Result};
use crate::geometry::io::write_ply;
use crate::support::export::{affinity_csv, to_json};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Scene directory, relative to the manifest.
    pub name: String,
    pub seed: u64,
    pub spec: SceneSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenes: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

pub fn scene_name(seed: u64) -> String {
    format!("scene_{seed:04}")
}

/// Writes `cloud.ply`, `camera.json`, `gt.json` (per-point truth),
/// `hierarchy.json`, `affinity.csv` and the label image `mask.png`.
pub fn write_scene(dir: &Path, scene: &SynthScene) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_ply(&dir.join("cloud.ply"), &scene.cloud)?;
    fs::write(dir.join("camera.json"), serde_json::to_string_pretty(&scene.camera)?)?;
    fs::write(dir.join("gt.json"), serde_json::to_string(&scene.gt)?)?;
    fs::write(dir.join("layout.json"), serde_json::to_string_pretty(&scene.layout)?)?;
    fs::write(dir.join("hierarchy.json"), to_json(&scene.gt.hierarchy)?)?;
    fs::write(dir.join("affinity.csv"), affinity_csv(&scene.gt.hierarchy))?;
    scene.gt_mask().write_png(&dir.join("mask.png"))
}

/// Generates one scene per seed from `base` (with the object count drawn
/// cyclically from `objects`) and writes them under `out` with a manifest.
pub fn write_dataset(out: &Path, base: &SceneSpec, seeds: &[u64], objects: [usize; 2]) -> Result<Manifest> {
    if objects[0] > objects[1] {
        return Err(Error::Config(format!(
            "object range {}..={} is empty",
            objects[0], objects[1]
        )));
    }
    let span = (objects[1] - objects[0] + 1) as u64;
    let entries: Vec<ManifestEntry> = seeds
        .iter()
        .map(|&seed| ManifestEntry {
            name: scene_name(seed),
            seed,
            spec: SceneSpec {
                seed,
                object_count: objects[0] + (seed % span) as usize,
                ..base.clone()
            },
        })
        .collect();
    fs::create_dir_all(out)?;
    entries.par_iter().try_for_each(|e| -> Result<()> {
        let scene = generate_scene(&e.spec)?;
        log::info!(
            "{}: {} points, {} objects",
            e.name,
            scene.cloud.len(),
            scene.gt.hierarchy.objects.len()
        );
        write_scene(&out.join(&e.name), &scene)
    })?;
    let manifest = Manifest { scenes: entries };
    fs::write(out.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Scene directories listed by the manifest at `path` (a manifest file or a
/// directory holding one).
pub fn manifest_scenes(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let file = if path.is_dir() {
        path.join(MANIFEST)
    } else {
        path.to_path_buf()
    };
    let root = file.parent().unwrap_or(Path::new("."));
    Ok(Manifest::read(&file)?
        .scenes
        .into_iter()
        .map(|e| {
            let dir = root.join(&e.name);
            (e.name, dir)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::SegmentationMask;
    use crate::geometry::io::read_ply;
    use crate::synth::GroundTruth;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let base = SceneSpec::default();
        let m = write_dataset(dir.path(), &base, &[3, 4], [2, 3]).unwrap();
        assert_eq!(
            m.scenes.iter().map(|e| e.spec.object_count).collect::<Vec<_>>(),
            vec![3, 2]
        );
        let scenes = manifest_scenes(dir.path()).unwrap();
        assert_eq!(scenes[0].0, "scene_0003");

        let s = generate_scene(&m.scenes[0].spec).unwrap();
        let d = &scenes[0].1;
        assert_eq!(read_ply(&d.join("cloud.ply")).unwrap(), s.cloud);
        let gt: GroundTruth = serde_json::from_str(&fs::read_to_string(d.join("gt.json")).unwrap()).unwrap();
        assert_eq!(gt, s.gt);
        let h = crate::support::export::from_json(&fs::read_to_string(d.join("hierarchy.json")).unwrap()).unwrap();
        assert_eq!(h, s.gt.hierarchy);
        assert_eq!(SegmentationMask::read_png(&d.join("mask.png")).unwrap(), s.gt_mask());
    }
}

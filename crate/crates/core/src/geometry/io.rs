//! Point-cloud readers and writers: ASCII PLY, PCD and 16-bit depth PNG.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use crate::error::{Error, Result};

/// Reads an ASCII PLY file with a `vertex` element carrying `x y z` and
/// optionally `red green blue`. Other vertex properties are skipped.
pub fn read_ply(path: &Path) -> Result<PointCloud> {
    parse_ply(BufReader::new(fs::File::open(path)?))
}

pub fn parse_ply<R: Read>(reader: R) -> Result<PointCloud> {
    let mut lines = BufReader::new(reader).lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of PLY".into()))?
            .map_err(Error::from)
    };
    if next()?.trim() != "ply" {
        return Err(Error::Parse("missing PLY magic".into()));
    }

    let mut vertex_count = None;
    let mut in_vertex = false;
    let mut props: Vec<String> = Vec::new();
    // counts of elements declared before the vertex element (lines to skip)
    let mut leading_rows = 0usize;
    loop {
        let line = next()?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::Parse(format!("unsupported PLY format {fmt}")))
            }
            ["element", name, n] => {
                let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad element count {n}")))?;
                in_vertex = *name == "vertex";
                if in_vertex {
                    vertex_count = Some(n);
                } else if vertex_count.is_none() {
                    leading_rows += n;
                }
            }
            ["property", "list", ..] if in_vertex => {
                return Err(Error::Parse("list properties on vertices are unsupported".into()))
            }
            ["property", _, name] if in_vertex => props.push(name.to_string()),
            ["end_header"] => break,
            _ => {}
        }
    }
    let count = vertex_count.ok_or_else(|| Error::Parse("no vertex element".into()))?;
    let col = |name: &str| props.iter().position(|p| p == name);
    let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
        return Err(Error::Parse("vertex element lacks x/y/z".into()));
    };
    let rgb = match (col("red"), col("green"), col("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };

    for _ in 0..leading_rows {
        next()?;
    }
    let mut points = Vec::with_capacity(count);
    let mut colors = rgb.map(|_| Vec::with_capacity(count));
    for row in 0..count {
        let line = next()?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("vertex {row}: {e}")))?;
        if vals.len() < props.len() {
            return Err(Error::Parse(format!("vertex {row}: too few values")));
        }
        points.push(Point3::new(vals[ix], vals[iy], vals[iz]));
        if let (Some(c), Some([r, g, b])) = (colors.as_mut(), rgb) {
            c.push([vals[r] as u8, vals[g] as u8, vals[b] as u8]);
        }
    }
    let cloud = PointCloud {
        points,
        pixels: None,
        colors,
    };
    cloud.validate()?;
    Ok(cloud)
}

pub fn ply_string(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ply\nformat ascii 1.0\nelement vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.colors.is_some() {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    out.push_str("end_header\n");
    for (i, p) in cloud.points.iter().enumerate() {
        let _ = write!(out, "{} {} {}", p.x, p.y, p.z);
        if let Some(c) = &cloud.colors {
            let _ = write!(out, " {} {} {}", c[i][0], c[i][1], c[i][2]);
        }
        out.push('\n');
    }
    out
}

pub fn write_ply(path: &Path, cloud: &PointCloud) -> Result<()> {
    fs::write(path, ply_string(cloud))?;
    Ok(())
}

/// Pinhole intrinsics. Raw depth values are multiplied by `depth_scale` to
/// obtain meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub depth_scale: f64,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self {
            fx: 525.0,
            fy: 525.0,
            cx: 319.5,
            cy: 239.5,
            depth_scale: 0.001,
        }
    }
}

impl Intrinsics {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn back_project(&self, row: u32, col: u32, depth_m: f64) -> Point3<f64> {
        Point3::new(
            (col as f64 - self.cx) * depth_m / self.fx,
            (row as f64 - self.cy) * depth_m / self.fy,
            depth_m,
        )
    }

    /// `(row, col)` of the pixel containing the projection of `p`, if in
    /// front of the camera.
    pub fn project(&self, p: &Point3<f64>) -> Option<(f64, f64)> {
        (p.z > 0.0).then(|| (self.fy * p.y / p.z + self.cy, self.fx * p.x / p.z + self.cx))
    }
}

/// Back-projects a row-major depth image; zero pixels are dropped.
pub fn depth_to_cloud(depth: &[u16], width: u32, height: u32, intr: &Intrinsics) -> Result<PointCloud> {
    if depth.len() != (width as usize) * (height as usize) {
        return Err(Error::Shape(format!(
            "{} depth values for a {width}x{height} image",
            depth.len()
        )));
    }
    let mut points = Vec::new();
    let mut pixels = Vec::new();
    for r in 0..height {
        for c in 0..width {
            let raw = depth[(r * width + c) as usize];
            if raw == 0 {
                continue;
            }
            points.push(intr.back_project(r, c, raw as f64 * intr.depth_scale));
            pixels.push([r, c]);
        }
    }
    PointCloud::new(points).with_pixels(pixels)
}

pub fn read_depth_png(path: &Path, intr: &Intrinsics) -> Result<PointCloud> {
    let img = image::open(path)?.into_luma16();
    let (w, h) = img.dimensions();
    depth_to_cloud(img.as_raw(), w, h, intr)
}

/// A parsed PCD cloud. Organized clouds (`HEIGHT > 1`) keep each valid
/// point's `(row, col)`; NaN points are dropped.
#[derive(Debug, Clone)]
pub struct PcdCloud {
    pub cloud: PointCloud,
    pub width: u32,
    pub height: u32,
}

impl PcdCloud {
    pub fn organized(&self) -> bool {
        self.height > 1
    }
}

pub fn read_pcd(path: &Path) -> Result<PcdCloud> {
    parse_pcd(&fs::read(path)?)
}

/// Parses `DATA ascii` and `DATA binary` PCD (v0.7). Compressed data is
/// rejected. Only the `x y z` fields are read.
pub fn parse_pcd(bytes: &[u8]) -> Result<PcdCloud> {
    let bad = |m: String| Error::Parse(format!("PCD: {m}"));
    let mut fields: Vec<String> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut types: Vec<u8> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let (mut width, mut height, mut n_points) = (None, 1u32, None);
    let mut pos = 0;
    let data = loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .ok_or_else(|| bad("header ends before DATA".into()))?;
        let line = std::str::from_utf8(&bytes[pos..end]).map_err(|_| bad("header is not text".into()))?;
        pos = end + 1;
        let tok: Vec<&str> = line.split_whitespace().collect();
        let Some((key, rest)) = tok.split_first() else { continue };
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad(format!("bad number {t}")));
        match key.to_ascii_uppercase().as_str() {
            k if k.starts_with('#') => {}
            "FIELDS" => fields = rest.iter().map(|s| s.to_string()).collect(),
            "SIZE" => sizes = rest.iter().map(|t| num(t)).collect::<Result<_>>()?,
            "TYPE" => types = rest.iter().map(|t| t.as_bytes()[0].to_ascii_uppercase()).collect(),
            "COUNT" => counts = rest.iter().map(|t| num(t)).collect::<Result<_>>()?,
            "WIDTH" => width = Some(num(rest.first().copied().unwrap_or(""))? as u32),
            "HEIGHT" => height = num(rest.first().copied().unwrap_or(""))? as u32,
            "POINTS" => n_points = Some(num(rest.first().copied().unwrap_or(""))?),
            "DATA" => break rest.first().copied().unwrap_or("").to_ascii_lowercase(),
            _ => {}
        }
    };
    let width = width.ok_or_else(|| bad("missing WIDTH".into()))?;
    let n = n_points.unwrap_or(width as usize * height as usize);
    if n != width as usize * height as usize {
        return Err(bad(format!("{n} points for {width}x{height}")));
    }
    if counts.is_empty() {
        counts = vec![1; fields.len()];
    }
    if sizes.len() != fields.len() || types.len() != fields.len() || counts.len() != fields.len() {
        return Err(bad("FIELDS, SIZE, TYPE and COUNT disagree".into()));
    }
    let col = |name: &str| fields.iter().position(|f| f == name);
    let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
        return Err(bad("no x/y/z fields".into()));
    };

    // each point as one value per field (first element of multi-count fields)
    let mut rows: Vec<[f64; 3]> = Vec::with_capacity(n);
    match data.as_str() {
        "ascii" => {
            let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| bad("data is not text".into()))?;
            let mut offsets = Vec::with_capacity(fields.len());
            let mut o = 0;
            for c in &counts {
                offsets.push(o);
                o += c;
            }
            for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).take(n).enumerate() {
                let vals: Vec<&str> = line.split_whitespace().collect();
                if vals.len() < o {
                    return Err(bad(format!("point {i}: too few values")));
                }
                let get = |f: usize| -> Result<f64> {
                    let t = vals[offsets[f]];
                    t.parse::<f64>().map_err(|_| bad(format!("point {i}: bad value {t}")))
                };
                rows.push([get(ix)?, get(iy)?, get(iz)?]);
            }
        }
        "binary" => {
            let mut offsets = Vec::with_capacity(fields.len());
            let mut stride = 0;
            for f in 0..fields.len() {
                offsets.push(stride);
                stride += sizes[f] * counts[f];
            }
            let body = &bytes[pos..];
            if body.len() < stride * n {
                return Err(bad(format!("{} data bytes for {n} points of {stride}", body.len())));
            }
            let read = |rec: &[u8], f: usize| -> Result<f64> {
                let b = &rec[offsets[f]..offsets[f] + sizes[f]];
                Ok(match (types[f], sizes[f]) {
                    (b'F', 4) => f32::from_le_bytes(b.try_into().unwrap()) as f64,
                    (b'F', 8) => f64::from_le_bytes(b.try_into().unwrap()),
                    (b'I', 1) => b[0] as i8 as f64,
                    (b'I', 2) => i16::from_le_bytes(b.try_into().unwrap()) as f64,
                    (b'I', 4) => i32::from_le_bytes(b.try_into().unwrap()) as f64,
                    (b'U', 1) => b[0] as f64,
                    (b'U', 2) => u16::from_le_bytes(b.try_into().unwrap()) as f64,
                    (b'U', 4) => u32::from_le_bytes(b.try_into().unwrap()) as f64,
                    (t, s) => return Err(bad(format!("unsupported field type {}{s}", t as char))),
                })
            };
            for rec in body.chunks_exact(stride).take(n) {
                rows.push([read(rec, ix)?, read(rec, iy)?, read(rec, iz)?]);
            }
        }
        other => return Err(bad(format!("unsupported DATA {other}"))),
    }
    if rows.len() != n {
        return Err(bad(format!("expected {n} points, found {}", rows.len())));
    }

    let mut points = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n);
    for (i, [x, y, z]) in rows.into_iter().enumerate() {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            points.push(Point3::new(x, y, z));
            pixels.push([i as u32 / width, i as u32 % width]);
        }
    }
    let cloud = PointCloud::new(points);
    let cloud = if height > 1 { cloud.with_pixels(pixels)? } else { cloud };
    Ok(PcdCloud { cloud, width, height })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ply_round_trip_with_colors() {
        let cloud = PointCloud {
            points: vec![Point3::new(0.1, -2.5, 3.0), Point3::new(1e-3, 0.0, 7.25)],
            pixels: None,
            colors: Some(vec![[255, 0, 12], [1, 2, 3]]),
        };
        let back = parse_ply(ply_string(&cloud).as_bytes()).unwrap();
        assert_eq!(back, cloud);
    }

    #[test]
    fn ply_with_extra_properties_and_elements() {
        let text = "ply\nformat ascii 1.0\ncomment hi\nelement camera 1\nproperty float f\n\
                    element vertex 2\nproperty float x\nproperty float nx\nproperty float y\n\
                    property float z\nend_header\n9\n1 0 2 3\n4 0 5 6\n";
        let cloud = parse_ply(text.as_bytes()).unwrap();
        assert_eq!(
            cloud.points,
            vec![Point3::new(1.0, 2.0, 3.0), Point3::new(4.0, 5.0, 6.0)]
        );
        assert!(cloud.colors.is_none());
    }

    #[test]
    fn binary_ply_rejected() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse_ply(text.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn depth_back_projection_drops_zeros() {
        let intr = Intrinsics {
            fx: 2.0,
            fy: 2.0,
            cx: 0.5,
            cy: 0.5,
            depth_scale: 0.001,
        };
        let cloud = depth_to_cloud(&[1000, 0, 0, 2000], 2, 2, &intr).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.pixels.as_ref().unwrap(), &vec![[0, 0], [1, 1]]);
        let p = cloud.points[1];
        assert!((p - Point3::new(0.5, 0.5, 2.0)).norm() < 1e-12);
        let (r, c) = intr.project(&p).unwrap();
        assert!((r - 1.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
    }

    fn pcd_header(data: &str, w: u32, h: u32) -> String {
        format!(
            "# .PCD v0.7\nVERSION 0.7\nFIELDS x y z rgb\nSIZE 4 4 4 4\nTYPE F F F U\nCOUNT 1 1 1 1\nWIDTH {w}\nHEIGHT {h}\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {}\nDATA {data}\n",
            w * h
        )
    }

    #[test]
    fn ascii_pcd_keeps_pixels_and_drops_nan() {
        let text = pcd_header("ascii", 2, 2) + "0 0 1 0\nnan nan nan 0\n1 0 1 0\n1 1 1.5 7\n";
        let p = parse_pcd(text.as_bytes()).unwrap();
        assert!(p.organized());
        assert_eq!(p.cloud.len(), 3);
        assert_eq!(p.cloud.pixels.as_ref().unwrap(), &vec![[0, 0], [1, 0], [1, 1]]);
        assert_eq!(p.cloud.points[2], Point3::new(1.0, 1.0, 1.5));
    }

    #[test]
    fn binary_pcd_matches_ascii() {
        let pts = [[0.5f32, -0.25, 1.0], [f32::NAN, 0.0, 0.0], [2.0, 3.0, 4.0]];
        let mut bytes = pcd_header("binary", 3, 1).into_bytes();
        for p in pts {
            for v in p {
                bytes.extend(v.to_le_bytes());
            }
            bytes.extend(0xff00ffu32.to_le_bytes());
        }
        let p = parse_pcd(&bytes).unwrap();
        assert!(!p.organized());
        assert!(p.cloud.pixels.is_none());
        assert_eq!(
            p.cloud.points,
            vec![Point3::new(0.5, -0.25, 1.0), Point3::new(2.0, 3.0, 4.0)]
        );
    }

    #[test]
    fn malformed_pcd_rejected() {
        let short = pcd_header("binary", 4, 1) + "abc";
        assert!(matches!(parse_pcd(short.as_bytes()), Err(Error::Parse(_))));
        let compressed = pcd_header("binary_compressed", 1, 1);
        assert!(matches!(parse_pcd(compressed.as_bytes()), Err(Error::Parse(_))));
        assert!(parse_pcd(b"VERSION 0.7\n").is_err());
    }
}

use std::path::Path;

use image::{ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-pixel object ids, row-major; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationMask {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
}

impl SegmentationMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width as usize * height as usize],
        }
    }

    pub fn from_labels(width: u32, height: u32, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::Shape(format!(
                "{} labels for a {width}x{height} mask",
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    pub fn get(&self, row: u32, col: u32) -> u32 {
        self.labels[(row * self.width + col) as usize]
    }

    pub fn set(&mut self, row: u32, col: u32, v: u32) {
        self.labels[(row * self.width + col) as usize] = v;
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Pixel count per label, indexed by label.
    pub fn areas(&self) -> Vec<u64> {
        let mut a = vec![0u64; self.max_label() as usize + 1];
        for &l in &self.labels {
            a[l as usize] += 1;
        }
        a
    }

    /// Renumbers nonzero labels to `1..=k` in order of first appearance.
    pub fn compact(&self) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if l == 0 {
                    return 0;
                }
                let next = map.len() as u32 + 1;
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self {
            width: self.width,
            height: self.height,
            labels,
        }
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        if self.max_label() > u32::from(u16::MAX) {
            return Err(Error::Shape("mask label exceeds 16 bits".into()));
        }
        let data: Vec<u16> = self.labels.iter().map(|&l| l as u16).collect();
        let img: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(self.width, self.height, data)
            .ok_or_else(|| Error::Shape("mask buffer size".into()))?;
        img.save(path)?;
        Ok(())
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_luma16();
        let (w, h) = img.dimensions();
        Self::from_labels(w, h, img.into_raw().into_iter().map(u32::from).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let m = SegmentationMask::from_labels(3, 2, vec![0, 1, 2, 300, 0, 1]).unwrap();
        m.write_png(&path).unwrap();
        assert_eq!(SegmentationMask::read_png(&path).unwrap(), m);
    }

    #[test]
    fn compact_and_areas() {
        let m = SegmentationMask::from_labels(2, 2, vec![7, 0, 3, 7]).unwrap();
        let c = m.compact();
        assert_eq!(c.labels, vec![1, 0, 2, 1]);
        assert_eq!(c.areas(), vec![1, 2, 1]);
        assert!(SegmentationMask::from_labels(2, 2, vec![0]).is_err());
    }
}

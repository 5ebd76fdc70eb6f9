//! Deterministic artifact emission.
//!
//! Every run writes its outputs through an [`ArtifactSet`], which records the
//! byte length and SHA-256 digest of each file and finishes by writing a
//! `manifest.json` listing them sorted by path. Nothing here depends on the
//! clock, the environment, or iteration order of hashed containers, so a
//! repeated run produces byte-identical files.

use frontier_core::{FrontCurve, Vec2};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::io;
use std::path::{Path, PathBuf};

/// Render a float for CSV: shortest round-trip decimal, `nan` for undefined
/// cells.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Collects written files and finishes with a digest manifest.
pub struct ArtifactSet {
    dir: PathBuf,
    files: Vec<(String, usize, String)>,
}

impl ArtifactSet {
    pub fn create(dir: &Path) -> io::Result<ArtifactSet> {
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactSet { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> io::Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.files.push((rel.to_string(), bytes.len(), hex));
        Ok(())
    }

    pub fn write_str(&mut self, rel: &str, text: &str) -> io::Result<()> {
        self.write_bytes(rel, text.as_bytes())
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn write_json(&mut self, rel: &str, value: &serde_json::Value) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
        text.push('\n');
        self.write_str(rel, &text)
    }

    /// Write `manifest.json` and list the files on stdout unless quieted.
    pub fn finish(mut self, quiet: bool) -> io::Result<()> {
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let entries: Vec<serde_json::Value> = self
            .files
            .iter()
            .map(|(path, bytes, sha)| json!({"path": path, "bytes": bytes, "sha256": sha}))
            .collect();
        let manifest = json!({"schema_version": 1, "files": entries});
        let mut text = serde_json::to_string_pretty(&manifest).expect("JSON serialization");
        text.push('\n');
        std::fs::write(self.dir.join("manifest.json"), text.as_bytes())?;
        if !quiet {
            for (path, _, _) in &self.files {
                println!("wrote {}", self.dir.join(path).display());
            }
            println!("wrote {}", self.dir.join("manifest.json").display());
        }
        Ok(())
    }
}

/// Fixed drawing window: bounding box of the given outline, padded by 20% of
/// its extent on every side. Returned as `(min_x, min_y, width, height)` in
/// model coordinates (y up).
pub fn view_window(pts: &[Vec2]) -> (f64, f64, f64, f64) {
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in pts {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    if !min_x.is_finite() {
        return (-1.0, -1.0, 2.0, 2.0);
    }
    let w = (max_x - min_x).max(1e-9);
    let h = (max_y - min_y).max(1e-9);
    (min_x - 0.2 * w, min_y - 0.2 * h, 1.4 * w, 1.4 * h)
}

/// A single frame: the region outline filled on a plain background, in a
/// fixed viewport so successive frames animate cleanly. Empty curves render
/// as background only.
pub fn svg_frame(curve: &FrontCurve, window: (f64, f64, f64, f64), caption: &str) -> String {
    let (x0, y0, w, h) = window;
    // SVG y grows downward; flip by mapping y -> -y, so the viewBox vertical
    // origin is the negated top edge.
    let vb = format!("{:.6} {:.6} {:.6} {:.6}", x0, -(y0 + h), w, h);
    let stroke = 0.008 * w.max(h);
    let mut out = String::with_capacity(4096 + 16 * curve.pts.len());
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vb}\">\n\
         <rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"#f6f9fc\"/>\n",
        x0,
        -(y0 + h),
        w,
        h
    ));
    if !curve.pts.is_empty() {
        let mut points = String::with_capacity(16 * curve.pts.len());
        for (i, p) in curve.pts.iter().enumerate() {
            if i > 0 {
                points.push(' ');
            }
            points.push_str(&format!("{:.6},{:.6}", p.x, -p.y));
        }
        out.push_str(&format!(
            "<polygon points=\"{points}\" fill=\"#cfe3f2\" stroke=\"#1f5d8a\" \
             stroke-width=\"{stroke:.6}\"/>\n"
        ));
    }
    if !caption.is_empty() {
        let fs = 0.06 * w.max(h);
        out.push_str(&format!(
            "<text x=\"{:.6}\" y=\"{:.6}\" font-family=\"monospace\" font-size=\"{fs:.6}\" \
             fill=\"#33424f\">{caption}</text>\n",
            x0 + 0.03 * w,
            -(y0 + h) + 0.08 * h,
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Indices of at most `max_frames` evenly spaced samples of `0..n`, always
/// including the first and last.
pub fn frame_indices(n: usize, max_frames: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let m = max_frames.max(1).min(n);
    if m == 1 {
        return vec![n - 1];
    }
    let mut out: Vec<usize> = (0..m)
        .map(|k| ((k as f64) * ((n - 1) as f64) / ((m - 1) as f64)).round() as usize)
        .collect();
    out.dedup();
    out
}

//! CSV and 16-bit PGM export of grids, and the diagnostics CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::grid::{DensityGrid, Dim};
use crate::reconstruct::FrequencyDiagnostic;

use super::num;

/// `x,z,value` or `x,y,z,value` rows, x fastest.
pub fn write_csv<W: Write>(mut w: W, grid: &DensityGrid) -> Result<()> {
    match grid.dim {
        Dim::Two => writeln!(w, "x,z,value")?,
        Dim::Three => writeln!(w, "x,y,z,value")?,
    }
    for (i, v) in grid.values.iter().enumerate() {
        let p = grid.cell_point(i);
        match grid.dim {
            Dim::Two => writeln!(w, "{},{},{}", num(p[0]), num(p[2]), num(*v))?,
            Dim::Three => writeln!(w, "{},{},{},{}", num(p[0]), num(p[1]), num(p[2]), num(*v))?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Linear grey-level mapping shared by all slices of one export.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmMeta {
    pub min: f64,
    pub max: f64,
    pub width: usize,
    pub height: usize,
    pub files: Vec<PathBuf>,
}

impl PgmMeta {
    pub fn level(&self, v: f64) -> u16 {
        if self.max > self.min {
            ((v - self.min) / (self.max - self.min) * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        }
    }

    fn text(&self) -> String {
        let mut s = format!(
            "min {}\nmax {}\nwidth {}\nheight {}\nslices {}\n",
            num(self.min),
            num(self.max),
            self.width,
            self.height,
            self.files.len()
        );
        for f in &self.files {
            s.push_str(&format!("file {}\n", f.display()));
        }
        s
    }
}

fn pgm_bytes(meta: &PgmMeta, rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", meta.width, meta.height).into_bytes();
    for row in rows {
        for v in row {
            out.extend_from_slice(&meta.level(v).to_be_bytes());
        }
    }
    out
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes P5 images and a `.meta` sidecar with the value range.
///
/// 2-D grids give one image at `out` (rows from top z down, columns in
/// x). 3-D grids give one x-y image per z-slice at `<out>_<k>.pgm`,
/// with `out`'s `.pgm` extension stripped and `k` zero-padded.
pub fn write_pgm(grid: &DensityGrid, out: &Path) -> Result<PgmMeta> {
    let (min, max) = grid
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (min, max) = if grid.values.is_empty() { (0.0, 0.0) } else { (min, max) };
    let nx = grid.x_axis().count;
    let nz = grid.z_axis().count;
    let slice = grid.slice_len();
    let mut meta = PgmMeta {
        min,
        max,
        width: nx,
        height: 0,
        files: Vec::new(),
    };
    let meta_path;
    match grid.dim {
        Dim::Two => {
            meta.height = nz;
            let rows = (0..nz).rev().map(|iz| grid.values[iz * nx..(iz + 1) * nx].to_vec());
            std::fs::write(out, pgm_bytes(&meta, rows))?;
            meta.files.push(out.to_path_buf());
            meta_path = with_suffix(out, ".meta");
        }
        Dim::Three => {
            let ny = slice / nx;
            meta.height = ny;
            let stem = match out.extension() {
                Some(e) if e == "pgm" => out.with_extension(""),
                _ => out.to_path_buf(),
            };
            let digits = nz.saturating_sub(1).to_string().len().max(3);
            for iz in 0..nz {
                let plane = &grid.values[iz * slice..(iz + 1) * slice];
                let rows = (0..ny).rev().map(|iy| plane[iy * nx..(iy + 1) * nx].to_vec());
                let path = with_suffix(&stem, &format!("_{iz:0digits$}.pgm"));
                std::fs::write(&path, pgm_bytes(&meta, rows))?;
                meta.files.push(path);
            }
            meta_path = with_suffix(&stem, ".meta");
        }
    }
    std::fs::write(meta_path, meta.text())?;
    Ok(meta)
}

/// `omega,retained,normalizer_min,residual`; `omega` is `ω₁` in 2-D and
/// `|ω|` in 3-D.
pub fn write_diagnostics<W: Write>(mut w: W, diags: &[FrequencyDiagnostic], dim: Dim) -> Result<()> {
    writeln!(w, "omega,retained,normalizer_min,residual")?;
    for d in diags {
        let omega = match dim {
            Dim::Two => d.omega.0,
            Dim::Three => d.omega_abs(),
        };
        writeln!(
            w,
            "{},{},{},{}",
            num(omega),
            u8::from(d.retained),
            num(d.normalizer_min),
            num(d.residual)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

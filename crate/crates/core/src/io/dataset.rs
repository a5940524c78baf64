//! CSTK1 container: magic line, `key value` header, a `DATA` line, then
//! little-endian f64 values in row-major order with x (or x₀) fastest.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::Result;
use crate::grid::{Axis, DensityGrid, Dim, Sinogram2D, Sinogram3D};

use super::{format_err, num};

pub const MAGIC: &str = "CSTK1";

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Grid(DensityGrid),
    Sinogram2D(Sinogram2D),
    Sinogram3D(Sinogram3D),
}

impl Dataset {
    pub fn kind(&self) -> &'static str {
        match self {
            Dataset::Grid(_) => "grid",
            _ => "sinogram",
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Dataset::Grid(g) => g.dim,
            Dataset::Sinogram2D(_) => Dim::Two,
            Dataset::Sinogram3D(_) => Dim::Three,
        }
    }

    fn axes(&self) -> Vec<(&'static str, Axis)> {
        match self {
            Dataset::Grid(g) => {
                let names: &[&'static str] = match g.dim {
                    Dim::Two => &["x", "z"],
                    Dim::Three => &["x", "y", "z"],
                };
                names.iter().copied().zip(g.axes.iter().copied()).collect()
            }
            Dataset::Sinogram2D(s) => vec![("x0", s.x0), ("r", s.r)],
            Dataset::Sinogram3D(s) => vec![("x0", s.x0), ("y0", s.y0), ("r", s.r)],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Dataset::Grid(g) => &g.values,
            Dataset::Sinogram2D(s) => &s.values,
            Dataset::Sinogram3D(s) => &s.values,
        }
    }

    fn scan(&self) -> (f64, f64) {
        match self {
            Dataset::Grid(g) => (g.r_m, g.delta),
            Dataset::Sinogram2D(s) => (s.r_m, s.delta),
            Dataset::Sinogram3D(s) => (s.r_m, s.delta),
        }
    }
}

pub fn write_dataset<W: Write>(mut w: W, data: &Dataset) -> Result<()> {
    let (r_m, delta) = data.scan();
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind {}", data.kind())?;
    writeln!(w, "dim {}", data.dim().count())?;
    for (name, a) in data.axes() {
        writeln!(w, "{name}.count {}", a.count)?;
        writeln!(w, "{name}.origin {}", num(a.origin))?;
        writeln!(w, "{name}.spacing {}", num(a.spacing))?;
    }
    writeln!(w, "r_m {}", num(r_m))?;
    writeln!(w, "delta {}", num(delta))?;
    writeln!(w, "DATA")?;
    let mut buf = Vec::with_capacity(8 * data.values().len());
    for v in data.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

struct Header {
    fields: HashMap<String, String>,
}

impl Header {
    fn text(&self, key: &str) -> Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| format_err(format!("missing header key `{key}`")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        let t = self.text(key)?;
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format_err(format!("header key `{key}`: `{t}` is not a finite number")))
    }

    fn count(&self, key: &str) -> Result<usize> {
        let t = self.text(key)?;
        t.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format_err(format!("header key `{key}`: `{t}` is not a positive integer")))
    }

    fn axis(&self, name: &str) -> Result<Axis> {
        let spacing_key = format!("{name}.spacing");
        let spacing = self.float(&spacing_key)?;
        if spacing == 0.0 {
            return Err(format_err(format!("header key `{spacing_key}`: spacing must be nonzero")));
        }
        Ok(Axis::new(
            self.count(&format!("{name}.count"))?,
            self.float(&format!("{name}.origin"))?,
            spacing,
        ))
    }
}

pub fn read_dataset<R: Read>(r: R) -> Result<Dataset> {
    let mut bytes = Vec::new();
    BufReader::new(r).read_to_end(&mut bytes)?;
    let mut pos = 0;
    let next_line = |pos: &mut usize| -> Result<String> {
        let start = *pos;
        let end = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| start + i)
            .ok_or_else(|| format_err(format!("unterminated header line at byte offset {start}")))?;
        *pos = end + 1;
        String::from_utf8(bytes[start..end].to_vec())
            .map_err(|_| format_err(format!("non-UTF-8 header line at byte offset {start}")))
    };
    let magic = next_line(&mut pos)?;
    if magic.trim_end() != MAGIC {
        return Err(format_err(format!("bad magic `{}` at byte offset 0, expected {MAGIC}", magic.trim_end())));
    }
    let mut fields = HashMap::new();
    loop {
        let at = pos;
        let line = next_line(&mut pos)?;
        let line = line.trim_end();
        if line == "DATA" {
            break;
        }
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| format_err(format!("header line `{line}` at byte offset {at} is not `key value`")))?;
        if fields.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(format_err(format!("duplicate header key `{k}`")));
        }
    }
    let header = Header { fields };
    let dim = match header.text("dim")? {
        "2" => Dim::Two,
        "3" => Dim::Three,
        other => return Err(format_err(format!("header key `dim`: `{other}` is not 2 or 3"))),
    };
    let kind = header.text("kind")?;
    let names: &[&str] = match (kind, dim) {
        ("grid", Dim::Two) => &["x", "z"],
        ("grid", Dim::Three) => &["x", "y", "z"],
        ("sinogram", Dim::Two) => &["x0", "r"],
        ("sinogram", Dim::Three) => &["x0", "y0", "r"],
        _ => return Err(format_err(format!("header key `kind`: `{kind}` is not grid or sinogram"))),
    };
    let axes = names.iter().map(|n| header.axis(n)).collect::<Result<Vec<_>>>()?;
    let (r_m, delta) = (header.float("r_m")?, header.float("delta")?);
    let n: usize = axes.iter().map(|a| a.count).product();
    let payload = &bytes[pos..];
    if payload.len() != 8 * n {
        return Err(format_err(format!(
            "payload at byte offset {pos} holds {} bytes, header describes {} values ({} bytes)",
            payload.len(),
            n,
            8 * n
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(format_err(format!("non-finite value at byte offset {}", pos + 8 * i)));
    }
    Ok(match (kind, dim) {
        ("grid", _) => Dataset::Grid(DensityGrid::new(dim, axes, values, r_m, delta)?),
        (_, Dim::Two) => Dataset::Sinogram2D(Sinogram2D::new(axes[0], axes[1], values, r_m, delta)?),
        (_, Dim::Three) => Dataset::Sinogram3D(Sinogram3D::new(axes[0], axes[1], axes[2], values, r_m, delta)?),
    })
}

pub fn save(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    write_dataset(BufWriter::new(File::create(path)?), data)
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> DensityGrid {
        let axes = vec![Axis::new(3, -1.0, 0.7), Axis::new(2, 0.1, 0.3)];
        DensityGrid::new(Dim::Two, axes, vec![0.1, -2.5, 1e-300, 3.0, 0.0, std::f64::consts::PI], 2.0, 0.1).unwrap()
    }

    fn bytes(d: &Dataset) -> Vec<u8> {
        let mut out = Vec::new();
        write_dataset(&mut out, d).unwrap();
        out
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let d = Dataset::Grid(grid());
        assert_eq!(read_dataset(&bytes(&d)[..]).unwrap(), d);
        let s = Sinogram3D::new(
            Axis::new(2, -0.5, 1.0),
            Axis::new(1, 0.0, 1.0),
            Axis::new(2, 1.0 + 1e-6, 0.999_999),
            vec![1.0 / 3.0, 2.0, -0.0, 4.5],
            2.0,
            0.1,
        )
        .unwrap();
        let d = Dataset::Sinogram3D(s);
        assert_eq!(read_dataset(&bytes(&d)[..]).unwrap(), d);
    }

    #[test]
    fn malformed_inputs_name_the_problem() {
        let good = bytes(&Dataset::Grid(grid()));
        let text = String::from_utf8_lossy(&good).to_string();

        let err = read_dataset(&b"CSTK2\n"[..]).unwrap_err().to_string();
        assert!(err.contains("magic"), "{err}");

        let mut short = good.clone();
        short.pop();
        let err = read_dataset(&short[..]).unwrap_err().to_string();
        assert!(err.contains("byte offset"), "{err}");

        let bad = text.replacen("x.count 3", "x.count three", 1);
        let raw = bad.into_bytes();
        let err = read_dataset(&raw[..]).unwrap_err().to_string();
        assert!(err.contains("x.count"), "{err}");

        let header_end = good.windows(5).position(|w| w == b"DATA\n").unwrap();
        let mut no_delta = Vec::new();
        for line in good[..header_end].split(|&b| b == b'\n') {
            if !line.starts_with(b"delta") && !line.is_empty() {
                no_delta.extend_from_slice(line);
                no_delta.push(b'\n');
            }
        }
        no_delta.extend_from_slice(&good[header_end..]);
        let err = read_dataset(&no_delta[..]).unwrap_err().to_string();
        assert!(err.contains("`delta`"), "{err}");
    }
}

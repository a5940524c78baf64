//! Phantom descriptions, one primitive per line.
//!
//! ```text
//! dim 2
//! support -3 3 0 1            # x range then z range (3-D: x, y, z)
//! gaussian 0 0.3 0.15 1       # centre (x z), sigma, amplitude
//! ball 0.5 0.4 0.1 2          # centre, radius, amplitude
//! box -0.5 0.5 0.4,0.2 1      # centre, comma-separated widths, amplitude
//! ```

use std::fs;
use std::path::Path;

use crate::error::{validation, Result};
use crate::grid::Dim;
use crate::phantom::{Bounds, Phantom, Primitive};

use super::content_lines;

fn floats(line: usize, items: &[&str]) -> Result<Vec<f64>> {
    items
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| validation(format!("phantom line {line}: `{t}` is not a finite number")))
        })
        .collect()
}

/// Embeds planar `(x, z)` coordinates at `y = 0`.
fn point(dim: Dim, c: &[f64]) -> [f64; 3] {
    match dim {
        Dim::Two => [c[0], 0.0, c[1]],
        Dim::Three => [c[0], c[1], c[2]],
    }
}

pub fn parse_phantom(text: &str) -> Result<Phantom> {
    let mut lines = content_lines(text);
    let (line, first) = lines
        .next()
        .ok_or_else(|| validation("phantom file is empty; expected `dim 2` or `dim 3`"))?;
    let dim = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["dim", "2"] => Dim::Two,
        ["dim", "3"] => Dim::Three,
        _ => return Err(validation(format!("phantom line {line}: expected `dim 2` or `dim 3`"))),
    };
    let nc = dim.count();
    let mut phantom = Phantom::new(dim);
    for (line, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        let (kind, rest) = (t[0], &t[1..]);
        if kind == "support" {
            let v = floats(line, rest)?;
            if v.len() != 2 * nc {
                return Err(validation(format!(
                    "phantom line {line}: support needs {} numbers",
                    2 * nc
                )));
            }
            let lo: Vec<f64> = v.iter().step_by(2).copied().collect();
            let hi: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
            if lo.iter().zip(&hi).any(|(a, b)| a > b) {
                return Err(validation(format!("phantom line {line}: support range is reversed")));
            }
            let b = match dim {
                Dim::Two => Bounds::planar((lo[0], hi[0]), (lo[1], hi[1])),
                Dim::Three => Bounds::new(point(dim, &lo), point(dim, &hi)),
            };
            phantom = phantom.with_support(b);
            continue;
        }
        if rest.len() != nc + 2 {
            return Err(validation(format!(
                "phantom line {line}: `{kind}` needs {nc} centre coordinates, a size and an amplitude"
            )));
        }
        let c = point(dim, &floats(line, &rest[..nc])?);
        let amp = floats(line, &rest[nc + 1..])?[0];
        let size_text = rest[nc];
        let p = match kind {
            "gaussian" | "ball" => {
                let s = floats(line, &[size_text])?[0];
                if !(s > 0.0) {
                    return Err(validation(format!("phantom line {line}: size must be positive")));
                }
                if kind == "gaussian" {
                    Primitive::gaussian(c, s, amp)
                } else {
                    Primitive::ball(c, s, amp)
                }
            }
            "box" => {
                let w = floats(line, &size_text.split(',').collect::<Vec<_>>())?;
                if w.len() != nc || w.iter().any(|v| !(*v > 0.0)) {
                    return Err(validation(format!(
                        "phantom line {line}: box needs {nc} positive comma-separated widths"
                    )));
                }
                let widths = match dim {
                    Dim::Two => [w[0], 1.0, w[1]],
                    Dim::Three => [w[0], w[1], w[2]],
                };
                Primitive::cuboid(c, widths, amp)
            }
            _ => return Err(validation(format!("phantom line {line}: unknown primitive `{kind}`"))),
        };
        phantom.push(p);
    }
    Ok(phantom)
}

pub fn read_phantom(path: impl AsRef<Path>) -> Result<Phantom> {
    parse_phantom(&fs::read_to_string(path)?)
}

//! Scan configuration as `key value` lines.

use std::fs;
use std::path::Path;

use crate::error::{validation, Result};
use crate::geometry::ScanConfig;

use super::{content_lines, num};

fn float(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| validation(format!("config key `{key}`: `{v}` is not a finite number")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| validation(format!("config key `{key}`: `{v}` is not a non-negative integer")))
}

/// Starts from [`ScanConfig::default`] and overrides the keys present.
pub fn parse_config(text: &str) -> Result<ScanConfig> {
    let mut c = ScanConfig::default();
    for (line, l) in content_lines(text) {
        let mut parts = l.split_whitespace();
        let key = parts.next().expect("non-empty line");
        let v = parts
            .next()
            .ok_or_else(|| validation(format!("config line {line}: key `{key}` has no value")))?;
        if parts.next().is_some() {
            return Err(validation(format!("config line {line}: key `{key}` has more than one value")));
        }
        match key {
            "r_m" => c.r_m = float(key, v)?,
            "delta" => c.delta = float(key, v)?,
            "nx" => c.nx = count(key, v)?,
            "x_min" => c.x_range.0 = float(key, v)?,
            "x_max" => c.x_range.1 = float(key, v)?,
            "ny" => c.ny = count(key, v)?,
            "y_min" => c.y_range.0 = float(key, v)?,
            "y_max" => c.y_range.1 = float(key, v)?,
            "nr" => c.nr = count(key, v)?,
            "nz" => c.nz = count(key, v)?,
            "n_s" => c.ns = Some(count(key, v)?),
            "n_alpha" => c.quadrature.n_alpha = count(key, v)?,
            "n_phi" => c.quadrature.n_phi = count(key, v)?,
            "adaptive" => {
                c.quadrature.adaptive = match v {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(validation(format!("config key `adaptive`: `{v}` is not true/false"))),
                }
            }
            "taper" => c.taper = float(key, v)?,
            "eps_norm" => c.eps_norm = float(key, v)?,
            "pad" => c.pad_factor = count(key, v)?,
            "eps_r" => c.eps_r = float(key, v)?,
            _ => return Err(validation(format!("config line {line}: unknown key `{key}`"))),
        }
    }
    Ok(c)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ScanConfig> {
    parse_config(&fs::read_to_string(path)?)
}

pub fn format_config(c: &ScanConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push(' ');
        out.push_str(&v);
        out.push('\n');
    };
    put("r_m", num(c.r_m));
    put("delta", num(c.delta));
    put("nx", c.nx.to_string());
    put("x_min", num(c.x_range.0));
    put("x_max", num(c.x_range.1));
    put("ny", c.ny.to_string());
    put("y_min", num(c.y_range.0));
    put("y_max", num(c.y_range.1));
    put("nr", c.nr.to_string());
    put("nz", c.nz.to_string());
    if let Some(ns) = c.ns {
        put("n_s", ns.to_string());
    }
    put("n_alpha", c.quadrature.n_alpha.to_string());
    put("n_phi", c.quadrature.n_phi.to_string());
    put("adaptive", c.quadrature.adaptive.to_string());
    put("taper", num(c.taper));
    put("eps_norm", num(c.eps_norm));
    put("pad", c.pad_factor.to_string());
    put("eps_r", num(c.eps_r));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_overrides() {
        let c = ScanConfig {
            r_m: 1.75,
            ns: Some(300),
            x_range: (-4.5, 4.25),
            ..ScanConfig::default()
        };
        assert_eq!(parse_config(&format_config(&c)).unwrap(), c);
        let c = parse_config("# comment\nnx 64   # trailing\n\nadaptive 1\n").unwrap();
        assert_eq!(c.nx, 64);
        assert!(c.quadrature.adaptive);
        assert_eq!(c.nr, ScanConfig::default().nr);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config("nx sixty").unwrap_err().to_string();
        assert!(e.contains("`nx`"), "{e}");
        let e = parse_config("radius 2").unwrap_err().to_string();
        assert!(e.contains("`radius`"), "{e}");
        assert!(parse_config("taper").is_err());
    }
}

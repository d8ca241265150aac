use std::path::Path;

use jointsparse::linalg::io::read_csv;
use jointsparse::{Error, GenSpec, Mat, MmvProblem};
use serde_json::Value;

use crate::report::Failure;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::from(Error::Io(e)))
}

/// A problem file, or a `gen` report carrying one under `outputs.problem`.
pub fn load_problem(path: &Path) -> Result<(MmvProblem, Vec<u8>), Failure> {
    let bytes = read_bytes(path)?;
    let value: Value = serde_json::from_slice(&bytes).map_err(Error::from)?;
    let value = match value.pointer("/outputs/problem") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let prob = serde_json::from_value(value).map_err(Error::from)?;
    Ok((prob, bytes))
}

/// `A` from a problem file, a JSON array of rows or a headerless CSV, with
/// the problem's `k` when there is one.
pub fn load_matrix(path: &Path) -> Result<(Mat, Option<usize>, Vec<u8>), Failure> {
    let bytes = read_bytes(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok((read_csv(bytes.as_slice())?, None, bytes));
    }
    let value: Value = serde_json::from_slice(&bytes).map_err(Error::from)?;
    if value.is_array() {
        let a = serde_json::from_value(value).map_err(Error::from)?;
        return Ok((a, None, bytes));
    }
    let (prob, bytes) = load_problem(path)?;
    Ok((prob.a, prob.k, bytes))
}

/// Inline JSON (starting with `{`) or a path to a JSON file.
pub fn load_spec(text: &str) -> Result<(GenSpec, Vec<u8>), Failure> {
    let bytes = if text.trim_start().starts_with('{') {
        text.as_bytes().to_vec()
    } else {
        read_bytes(Path::new(text))?
    };
    let spec = serde_json::from_slice(&bytes).map_err(Error::from)?;
    Ok((spec, bytes))
}

/// Parses `a:b:step` (inclusive) or `v1,v2,...`. Every value must lie in
/// `[lo, 1]`, and in `(0, 1]` unless `allow_zero`.
pub fn parse_grid(text: &str, allow_zero: bool) -> Result<Vec<f64>, Failure> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Failure::usage(format!("grid value {s:?}: {e}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !(b >= a) {
                return Err(Failure::usage(format!("grid {text:?}: need a <= b and step > 0")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            // rounding keeps 0.1 steps printing as 0.3, not 0.30000000000000004
            (0..count)
                .map(|i| ((a + step * i as f64) * 1e12).round() / 1e12)
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(Failure::usage(format!("grid {text:?}: expected a:b:step or a list"))),
    };
    for &p in &grid {
        let ok = if allow_zero { (0.0..=1.0).contains(&p) } else { p > 0.0 && p <= 1.0 };
        if !ok {
            let range = if allow_zero { "[0, 1]" } else { "(0, 1]" };
            return Err(Failure::usage(format!("grid value {p} outside {range}")));
        }
    }
    if grid.is_empty() {
        return Err(Failure::usage("empty grid"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1:0.5:0.1", false).unwrap(), vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(parse_grid("0.3,0.5,0.8175", false).unwrap(), vec![0.3, 0.5, 0.8175]);
        assert_eq!(parse_grid("0:1:0.25", true).unwrap().len(), 5);
        assert!(parse_grid("0:1:0.25", false).is_err());
        assert!(parse_grid("0.5,1.5", false).is_err());
        assert!(parse_grid("1:0:0.1", true).is_err());
        assert!(parse_grid("a", true).is_err());
    }
}

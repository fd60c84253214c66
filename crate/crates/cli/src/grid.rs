//! Numeric grids from the command line.

use std::str::FromStr;

use serde::Serialize;

/// Evenly spaced points or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_strictly_ascending(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    /// Values that must be nonnegative whole numbers.
    pub fn counts(&self, what: &str) -> Result<Vec<usize>, String> {
        self.0
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as usize)
                } else {
                    Err(format!("{what} must be whole numbers, got {v}"))
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    /// `a:b:k` gives k evenly spaced points from a to b inclusive; otherwise a
    /// comma-separated list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [a, b, k] => {
                let (a, b) = (num(a)?, num(b)?);
                let k: usize = k.trim().parse().map_err(|_| format!("`{k}` is not a point count"))?;
                match k {
                    0 => return Err("a grid needs at least one point".into()),
                    1 => vec![a],
                    _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
                }
            }
            [_] => s.split(',').map(num).collect::<Result<_, _>>()?,
            _ => return Err(format!("`{s}` is neither a:b:steps nor a comma list")),
        };
        if values.iter().any(|v: &f64| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(Grid(values))
    }
}

//! Sampled real signals on a uniform grid, with the trapezoid-weighted inner
//! product that stands in for the L² integral.
//!
//! Every identity checked elsewhere in the crate holds exactly in this
//! discrete space, whatever the quadrature error against the continuum.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform sampling of `[t_min, t_max]` with `n_points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    #[serde(serialize_with = "num17::real")]
    t_min: f64,
    #[serde(serialize_with = "num17::real")]
    t_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if t_min >= t_max {
            return Err(Error::InvalidGrid(format!(
                "t_min ({t_min}) must be below t_max ({t_max})"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Grid {
            t_min,
            t_max,
            n_points,
        })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    /// Abscissa of sample `k`, always `t_min + k·h`.
    pub fn abscissa(&self, k: usize) -> f64 {
        self.t_min + k as f64 * self.step()
    }

    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.n_points).map(move |k| self.t_min + k as f64 * h)
    }

    /// Trapezoid weight of sample `k`.
    pub fn weight(&self, k: usize) -> f64 {
        let h = self.step();
        if k == 0 || k + 1 == self.n_points {
            0.5 * h
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.weight(k)).collect()
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.t_min, self.t_max, self.n_points)
    }
}

/// Real-valued samples on a [`Grid`]. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: Grid,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Signal { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Signal {
            grid,
            values: vec![0.0; grid.n_points],
        }
    }

    /// Samples `f` at every abscissa of `grid`.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Signal::new(grid, grid.abscissae().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// `self += alpha · x` in place.
    pub fn add_scaled(&mut self, alpha: f64, x: &Signal) -> Result<()> {
        self.grid.check_same(&x.grid)?;
        for (y, xv) in self.values.iter_mut().zip(&x.values) {
            *y += alpha * xv;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        axpy(-1.0, other, self)
    }

    /// Writes the signal as a two-column `t,value` CSV.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::with_capacity(48 * self.len() + 8);
        out.push_str("t,value\n");
        for (t, v) in self.grid.abscissae().zip(&self.values) {
            out.push_str(&num17::format(t));
            out.push(',');
            out.push_str(&num17::format(*v));
            out.push('\n');
        }
        write_file(path, out.as_bytes())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Signal> {
        let path = path.as_ref();
        let table = read_table(path)?;
        if table.columns.len() != 1 {
            return Err(Error::Parse {
                path: path.into(),
                line: 1,
                msg: format!(
                    "expected 2 columns (t,value), found {}",
                    table.columns.len() + 1
                ),
            });
        }
        let values = table.columns.into_iter().next().unwrap_or_default();
        Signal::new(table.grid, values)
    }
}

/// Weighted inner product `Σ w_k a_k b_k`, summed in ascending `k`.
pub fn inner(a: &Signal, b: &Signal) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    Ok(weighted_dot(&a.grid, &a.values, &b.values))
}

pub fn norm_sq(a: &Signal) -> f64 {
    weighted_dot(&a.grid, &a.values, &a.values)
}

pub fn norm(a: &Signal) -> f64 {
    norm_sq(a).sqrt()
}

/// `alpha · x + y`.
pub fn axpy(alpha: f64, x: &Signal, y: &Signal) -> Result<Signal> {
    let mut out = y.clone();
    out.add_scaled(alpha, x)?;
    Ok(out)
}

fn weighted_dot(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let h = grid.step();
    let mut acc = 0.0;
    for k in 0..n {
        // a*b first so that swapping the arguments is bit-identical
        let w = if k == 0 || k + 1 == n { 0.5 * h } else { h };
        acc += w * (a[k] * b[k]);
    }
    acc
}

/// A CSV table whose first column is a uniform abscissa.
pub(crate) struct Table {
    pub grid: Grid,
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

pub(crate) fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let header: Vec<String> = header_line
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err(parse_err(1, "need a t column and at least one data column".into()));
    }
    let width = header.len();
    let mut ts = Vec::new();
    let mut columns = vec![Vec::new(); width - 1];
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(parse_err(
                idx + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(idx + 1, format!("non-finite value {field:?}")));
            }
            if col == 0 {
                ts.push(v);
            } else {
                columns[col - 1].push(v);
            }
        }
    }
    if ts.len() < 2 {
        return Err(parse_err(2, "need at least two sample rows".into()));
    }
    let grid = Grid::new(ts[0], ts[ts.len() - 1], ts.len())
        .map_err(|e| Error::GridMismatch(format!("{}: {e}", path.display())))?;
    let h = grid.step();
    for (k, &t) in ts.iter().enumerate() {
        if (t - grid.abscissa(k)).abs() > 1e-9 * h {
            return Err(Error::GridMismatch(format!(
                "{}: t column is not uniform at row {} (t = {t})",
                path.display(),
                k + 2
            )));
        }
    }
    Ok(Table {
        grid,
        header,
        columns,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Fixed 17-significant-digit rendering of reals, shared by every output format.
pub mod num17 {
    use serde::ser::Error as _;
    use serde::{Serialize, Serializer};
    use serde_json::value::RawValue;

    /// Scientific notation with 17 significant digits; parses back bit-exactly.
    pub fn format(x: f64) -> String {
        format!("{x:.16e}")
    }

    pub fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format(*x)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }

    pub fn reals<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Box<RawValue>> = xs
            .iter()
            .map(|x| RawValue::from_string(format(*x)))
            .collect::<Result<_, _>>()
            .map_err(S::Error::custom)?;
        raw.serialize(s)
    }

    pub fn opt_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => real(v, s),
            None => s.serialize_none(),
        }
    }
}

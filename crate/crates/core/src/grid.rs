//! Uniform tensor grids, sampled functions and masks, and their text format.
//!
//! Nodes sit at `lo + j * h` along every axis, axis 0 varying fastest. The
//! text format is
//!
//! ```text
//! # box: x0 x1 y0 y1 [z0 z1]
//! # res: nx ny [nz]
//! v v v ...      (one line per row of constant y and z, nx values)
//! ```
//!
//! Values may be written as `inf`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numfmt::fmt17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let dim = shape.len();
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(dim));
        }
        if lo.len() != dim || hi.len() != dim {
            return invalid("box and resolution dimensions differ");
        }
        for k in 0..dim {
            if shape[k] < 2 || !(hi[k] > lo[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return invalid(format!("bad extent on axis {k}"));
            }
        }
        Ok(Grid { lo, hi, shape })
    }

    /// `[-half, half]^dim` with `n` nodes per axis.
    pub fn cube(dim: usize, half: f64, n: usize) -> Result<Self> {
        Self::new(vec![-half; dim], vec![half; dim], vec![n; dim])
    }

    /// Box with given per-axis half widths centered at the origin.
    pub fn centered(half: &[f64], n: usize) -> Result<Self> {
        Self::new(half.iter().map(|h| -h).collect(), half.to_vec(), vec![n; half.len()])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, k: usize) -> f64 {
        (self.hi[k] - self.lo[k]) / (self.shape[k] - 1) as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.spacing(k)).collect()
    }

    /// Largest spacing over the axes.
    pub fn h(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    pub fn box_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn stride(&self, k: usize) -> usize {
        self.shape[..k].iter().product()
    }

    pub fn coord(&self, k: usize, j: usize) -> f64 {
        if j + 1 == self.shape[k] {
            self.hi[k]
        } else {
            self.lo[k] + j as f64 * self.spacing(k)
        }
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        (0..self.shape[k]).map(|j| self.coord(k, j)).collect()
    }

    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for &n in &self.shape {
            out.push(idx % n);
            idx /= n;
        }
        out
    }

    pub fn ravel(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for k in (0..self.dim()).rev() {
            idx = idx * self.shape[k] + multi[k];
        }
        idx
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let m = self.unravel(idx);
        (0..self.dim()).map(|k| self.coord(k, m[k])).collect()
    }

    /// All node coordinates, flattened `len * dim`.
    pub fn nodes_flat(&self) -> Vec<f64> {
        let d = self.dim();
        let axes: Vec<Vec<f64>> = (0..d).map(|k| self.axis(k)).collect();
        let mut out = Vec::with_capacity(self.len() * d);
        for idx in 0..self.len() {
            let m = self.unravel(idx);
            for k in 0..d {
                out.push(axes[k][m[k]]);
            }
        }
        out
    }

    /// Whether the node touches the rim of the box.
    pub fn on_rim(&self, idx: usize, width: usize) -> bool {
        let m = self.unravel(idx);
        (0..self.dim()).any(|k| m[k] < width || m[k] + width >= self.shape[k])
    }

    /// Every other node along every axis, if the node counts allow it.
    pub fn coarsen(&self) -> Option<Grid> {
        if self.shape.iter().any(|&n| (n - 1) % 2 != 0 || n < 5) {
            return None;
        }
        Some(Grid {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            shape: self.shape.iter().map(|n| (n - 1) / 2 + 1).collect(),
        })
    }

    /// Multilinear interpolation. Points outside the box are a range error;
    /// an infinite corner value makes the result infinite.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> Result<f64> {
        let d = self.dim();
        let mut base = vec![0usize; d];
        let mut frac = vec![0f64; d];
        for k in 0..d {
            let h = self.spacing(k);
            let tol = 1e-9 * h;
            if x[k] < self.lo[k] - tol || x[k] > self.hi[k] + tol || !x[k].is_finite() {
                return Err(Error::Range(format!(
                    "coordinate {} on axis {k} outside [{}, {}]",
                    x[k], self.lo[k], self.hi[k]
                )));
            }
            let s = ((x[k] - self.lo[k]) / h).clamp(0.0, (self.shape[k] - 1) as f64);
            let j = (s.floor() as usize).min(self.shape[k] - 2);
            base[k] = j;
            frac[k] = s - j as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0;
            for k in 0..d {
                let bit = corner >> k & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                idx += (base[k] + bit) * self.stride(k);
            }
            if w == 0.0 {
                continue;
            }
            let v = values[idx];
            if v == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Grid with the same node lattice extended to cover `[lo, hi]`.
    pub fn extended_to(&self, lo: &[f64], hi: &[f64]) -> (Grid, Vec<usize>) {
        let d = self.dim();
        let mut new_lo = self.lo.clone();
        let mut new_hi = self.hi.clone();
        let mut shape = self.shape.clone();
        let mut offset = vec![0usize; d];
        for k in 0..d {
            let h = self.spacing(k);
            if lo[k] < self.lo[k] {
                let add = ((self.lo[k] - lo[k]) / h).ceil() as usize;
                offset[k] = add;
                new_lo[k] = self.lo[k] - add as f64 * h;
                shape[k] += add;
            }
            if hi[k] > self.hi[k] {
                let add = ((hi[k] - self.hi[k]) / h).ceil() as usize;
                new_hi[k] = self.hi[k] + add as f64 * h;
                shape[k] += add;
            }
        }
        (Grid { lo: new_lo, hi: new_hi, shape }, offset)
    }
}

/// Scalar function sampled on a grid, with its essential infimum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub essinf: f64,
}

/// Cells a support must keep from the rim of the box.
pub const SUPPORT_MARGIN: usize = 3;

impl GridFunction {
    /// Wrap sampled values; the essential infimum is the most frequent value
    /// on the rim of the box.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for {} nodes", values.len(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("grid function values must be finite");
        }
        let essinf = rim_mode(&grid, &values);
        Ok(GridFunction { grid, values, essinf })
    }

    /// Sample a closure at the nodes.
    pub fn sample(grid: Grid, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let values = sample_nodes(&grid, f);
        Self::new(grid, values)
    }

    /// Nodes with `u > essinf` stay at least `SUPPORT_MARGIN` cells from
    /// the rim.
    pub fn check_support(&self) -> Result<()> {
        let tol = 1e-12 * (1.0 + self.essinf.abs());
        for (i, &v) in self.values.iter().enumerate() {
            if (v - self.essinf).abs() > tol && self.grid.on_rim(i, SUPPORT_MARGIN) {
                return Err(Error::Range(format!(
                    "support reaches within {SUPPORT_MARGIN} cells of the box boundary"
                )));
            }
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Every other node along every axis.
    pub fn coarsen(&self) -> Option<GridFunction> {
        let g = self.grid.coarsen()?;
        let values = (0..g.len())
            .map(|i| {
                let m: Vec<usize> = g.unravel(i).iter().map(|j| 2 * j).collect();
                self.values[self.grid.ravel(&m)]
            })
            .collect();
        Some(GridFunction { grid: g, values, essinf: self.essinf })
    }

    pub fn to_text(&self) -> String {
        grid_to_text(&self.grid, &self.values)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (grid, values) = grid_from_text(text)?;
        Self::new(grid, values)
    }
}

/// Boolean set on a grid; every marked node stands for its cell.
#[derive(Clone, Debug)]
pub struct GridMask {
    pub grid: Grid,
    pub mask: Vec<bool>,
}

impl GridMask {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.grid.node(i))
            .collect()
    }

    pub fn barycenter(&self) -> Option<Vec<f64>> {
        let d = self.grid.dim();
        let mut acc = vec![0.0; d];
        let mut n = 0usize;
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                let p = self.grid.node(i);
                for k in 0..d {
                    acc[k] += p[k];
                }
                n += 1;
            }
        }
        (n > 0).then(|| acc.into_iter().map(|a| a / n as f64).collect())
    }

    pub fn touches_rim(&self) -> bool {
        self.mask.iter().enumerate().any(|(i, &m)| m && self.grid.on_rim(i, 1))
    }
}

pub(crate) fn sample_nodes(grid: &Grid, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    use rayon::prelude::*;
    let d = grid.dim();
    let axes: Vec<Vec<f64>> = (0..d).map(|k| grid.axis(k)).collect();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let m = grid.unravel(i);
            let x: Vec<f64> = (0..d).map(|k| axes[k][m[k]]).collect();
            f(&x)
        })
        .collect()
}

fn rim_mode(grid: &Grid, values: &[f64]) -> f64 {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for (i, &v) in values.iter().enumerate() {
        if grid.on_rim(i, 1) {
            *counts.entry(v.to_bits()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(f64::from_bits(b.0).total_cmp(&f64::from_bits(a.0))))
        .map(|(bits, _)| f64::from_bits(bits))
        .unwrap_or(0.0)
}

pub fn grid_to_text(grid: &Grid, values: &[f64]) -> String {
    let mut s = String::new();
    let bx: Vec<String> = (0..grid.dim())
        .flat_map(|k| [fmt17(grid.lo[k]), fmt17(grid.hi[k])])
        .collect();
    let _ = writeln!(s, "# box: {}", bx.join(" "));
    let res: Vec<String> = grid.shape.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "# res: {}", res.join(" "));
    let nx = grid.shape[0];
    for row in values.chunks(nx) {
        let line: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

pub fn grid_from_text(text: &str) -> Result<(Grid, Vec<f64>)> {
    let mut bx: Option<Vec<f64>> = None;
    let mut res: Option<Vec<usize>> = None;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(b) = rest.strip_prefix("box:") {
                bx = Some(crate::geometry::parse_floats(b)?);
            } else if let Some(r) = rest.strip_prefix("res:") {
                let v: std::result::Result<Vec<usize>, _> =
                    r.split_whitespace().map(|t| t.parse::<usize>()).collect();
                res = Some(v.map_err(|_| Error::Parse(format!("bad res line: {line}")))?);
            }
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            values.push(parse_ext(tok)?);
        }
    }
    let bx = bx.ok_or_else(|| Error::Parse("missing '# box:' header".into()))?;
    let res = res.ok_or_else(|| Error::Parse("missing '# res:' header".into()))?;
    if bx.len() != 2 * res.len() {
        return Err(Error::Parse("box and res headers disagree".into()));
    }
    let lo = (0..res.len()).map(|k| bx[2 * k]).collect();
    let hi = (0..res.len()).map(|k| bx[2 * k + 1]).collect();
    let grid = Grid::new(lo, hi, res)?;
    if values.len() != grid.len() {
        return Err(Error::Parse(format!("{} values for {} nodes", values.len(), grid.len())));
    }
    Ok((grid, values))
}

fn parse_ext(tok: &str) -> Result<f64> {
    match tok {
        "inf" | "+inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        _ => tok.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {tok}"))),
    }
}

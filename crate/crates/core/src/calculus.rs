//! Finite differences, Dirichlet-type functionals, coarea band integrals and
//! truncation on grid functions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{Grid, GridFunction};
use crate::linalg::tree_sum;
use crate::rearrange::{distribution, symmetral};
use crate::young::YoungND;

/// Gradients with `|grad u|` below this are left out of band integrals.
pub const MIN_GRADIENT: f64 = 1e-8;

/// Central differences inside, one-sided at the rim; flattened `len * dim`.
pub fn gradient_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let d = grid.dim();
    let mut out = vec![0.0; grid.len() * d];
    for k in 0..d {
        let st = grid.stride(k);
        let n = grid.shape()[k];
        let h = grid.spacing(k);
        for i in 0..grid.len() {
            let j = (i / st) % n;
            let g = if j == 0 {
                (values[i + st] - values[i]) / h
            } else if j + 1 == n {
                (values[i] - values[i - st]) / h
            } else {
                (values[i + st] - values[i - st]) / (2.0 * h)
            };
            out[i * d + k] = g;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct GradientField {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl GradientField {
    pub fn at(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.at(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.len()).map(|i| self.norm(i)).fold(0.0, f64::max)
    }

    /// Largest `|d_k u|` per axis.
    pub fn max_abs(&self) -> Vec<f64> {
        let mut m = vec![0.0f64; self.dim];
        for i in 0..self.len() {
            for k in 0..self.dim {
                m[k] = m[k].max(self.data[i * self.dim + k].abs());
            }
        }
        m
    }
}

pub fn gradient(u: &GridFunction) -> GradientField {
    GradientField { dim: u.grid.dim(), data: gradient_values(&u.grid, &u.values) }
}

/// `sum phi(grad u) * cell volume`. Sampled functions reject gradients
/// outside their box; an infinite value makes the functional infinite.
pub fn dirichlet_functional(u: &GridFunction, phi: &YoungND) -> Result<f64> {
    if u.grid.dim() != phi.dim() {
        return invalid("grid and Young function dimensions differ");
    }
    let g = gradient(u);
    let mut terms = Vec::with_capacity(u.grid.len());
    for i in 0..u.grid.len() {
        let xi = g.at(i);
        let v = match phi {
            YoungND::Sampled(s) => s.grid.interpolate(&s.values, xi)?,
            _ => phi.eval(xi),
        };
        if v == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        terms.push(v);
    }
    Ok(tree_sum(&terms) * u.grid.cell_volume())
}

/// `max(2 h max|grad u|, (max u - essinf) / 256)`.
pub fn default_dt(u: &GridFunction, grad: &GradientField) -> f64 {
    let range = u.max() - u.essinf;
    (2.0 * u.grid.h() * grad.max_norm()).max(range / 256.0)
}

/// Coarea band approximation of `integral_{u = t} f / |grad u| dH`:
/// `sum f(x) k_dt(u(x) - t) dx` with the hat kernel `k_dt` of half width
/// `dt` and unit mass.
pub fn level_integral(u: &GridFunction, grad: &GradientField, f: &[f64], t: f64, dt: f64) -> f64 {
    let vol = u.grid.cell_volume();
    let terms: Vec<f64> = (0..u.grid.len())
        .map(|i| {
            let z = (u.values[i] - t).abs() / dt;
            if z >= 1.0 || grad.norm(i) < MIN_GRADIENT {
                0.0
            } else {
                f[i] * (1.0 - z) / dt
            }
        })
        .collect();
    tree_sum(&terms) * vol
}

/// `T_{t1,t2}(u) = min(max(u, t1), t2)`.
pub fn truncate(u: &GridFunction, t1: f64, t2: f64) -> Result<GridFunction> {
    if !(t1 < t2) {
        return Err(Error::Invalid(format!("truncation needs t1 < t2, got {t1} >= {t2}")));
    }
    let values = u.values.iter().map(|v| v.clamp(t1, t2)).collect();
    Ok(GridFunction { grid: u.grid.clone(), values, essinf: u.essinf.clamp(t1, t2) })
}

/// Splits `u = T(u) + v` with `T(u) = max(u, t)` and `v = u - T(u)`.
pub fn truncation_split(u: &GridFunction, t: f64) -> (GridFunction, GridFunction) {
    let tu: Vec<f64> = u.values.iter().map(|v| v.max(t)).collect();
    let rest: Vec<f64> = u.values.iter().zip(&tu).map(|(a, b)| a - b).collect();
    (
        GridFunction { grid: u.grid.clone(), values: tu, essinf: u.essinf.max(t) },
        GridFunction { grid: u.grid.clone(), values: rest, essinf: (u.essinf - u.essinf.max(t)) },
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuPrimeRecord {
    pub t: f64,
    /// `integral_{u = t} 1 / |grad u|`.
    pub first: f64,
    /// `integral_{u^K = t} 1 / |grad u^K|`.
    pub second: f64,
    /// `-mu'(t)` by centered differences of the distribution function.
    pub third: f64,
}

/// The three level quantities compared in the distribution-derivative
/// estimate, at each requested level.
pub fn mu_prime_chain(u: &GridFunction, body: &ConvexBody, levels: &[f64]) -> Result<Vec<MuPrimeRecord>> {
    let uk = symmetral(u, body)?;
    let gu = gradient(u);
    let gk = gradient(&uk);
    let dt = default_dt(u, &gu).max(default_dt(&uk, &gk));
    let mu = distribution(u);
    let ones_u = vec![1.0; u.grid.len()];
    let ones_k = vec![1.0; uk.grid.len()];
    Ok(levels
        .iter()
        .map(|&t| MuPrimeRecord {
            t,
            first: level_integral(u, &gu, &ones_u, t, dt),
            second: level_integral(&uk, &gk, &ones_k, t, dt),
            third: (-mu.derivative(t, dt)).max(0.0),
        })
        .collect())
}

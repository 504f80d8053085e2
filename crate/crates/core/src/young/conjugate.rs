//! Discrete Legendre-Fenchel transforms on tensor grids.
//!
//! `conjugate_oracle` is the direct `max` over all input nodes. The fast
//! path factorizes the transform into one-dimensional passes, each a scan
//! along the lower convex hull of the slice.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Sampled;
use crate::grid::Grid;
use crate::linalg::dot;

/// `out[j] = max_i (s[j] x[i] - f[i])` over finite `f[i]`; `x` and `s`
/// ascending. With no finite entry the result is `-inf`.
pub fn llt_1d(x: &[f64], f: &[f64], s: &[f64], out: &mut [f64]) {
    let mut hx: Vec<f64> = Vec::with_capacity(x.len());
    let mut hf: Vec<f64> = Vec::with_capacity(x.len());
    for (&a, &b) in x.iter().zip(f) {
        if b == f64::INFINITY {
            continue;
        }
        while hx.len() >= 2 {
            let k = hx.len();
            // drop the middle point when it lies on or above the chord
            let lhs = (hf[k - 1] - hf[k - 2]) * (a - hx[k - 2]);
            let rhs = (b - hf[k - 2]) * (hx[k - 1] - hx[k - 2]);
            if lhs >= rhs {
                hx.pop();
                hf.pop();
            } else {
                break;
            }
        }
        hx.push(a);
        hf.push(b);
    }
    if hx.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::NEG_INFINITY);
        return;
    }
    let mut k = 0;
    for (o, &sj) in out.iter_mut().zip(s) {
        while k + 1 < hx.len() && sj * hx[k + 1] - hf[k + 1] >= sj * hx[k] - hf[k] {
            k += 1;
        }
        // near-ties after rounding: look back once
        let mut best = sj * hx[k] - hf[k];
        if k > 0 {
            best = best.max(sj * hx[k - 1] - hf[k - 1]);
        }
        *o = best;
    }
}

/// Brute-force conjugate `max_eta (<xi, eta> - phi(eta))` at every output node.
pub fn conjugate_oracle(phi: &Sampled, out: &Grid) -> Sampled {
    let g = &phi.grid;
    let d = g.dim();
    let nodes = g.nodes_flat();
    let finite: Vec<usize> = (0..g.len()).filter(|&i| phi.values[i].is_finite()).collect();
    let pts: Vec<f64> = finite.iter().flat_map(|&i| nodes[i * d..(i + 1) * d].iter().copied()).collect();
    let vals: Vec<f64> = finite.iter().map(|&i| phi.values[i]).collect();
    let out_nodes = out.nodes_flat();
    let values: Vec<f64> = (0..out.len())
        .into_par_iter()
        .map(|j| {
            let xi = &out_nodes[j * d..(j + 1) * d];
            let mut best = f64::NEG_INFINITY;
            for (p, v) in pts.chunks_exact(d).zip(&vals) {
                let c = dot(xi, p) - v;
                if c > best {
                    best = c;
                }
            }
            best
        })
        .collect();
    Sampled { grid: out.clone(), values }
}

/// Conjugate at one point by direct maximization over the samples.
pub fn conjugate_at(phi: &Sampled, xi: &[f64]) -> f64 {
    let g = &phi.grid;
    let mut best = f64::NEG_INFINITY;
    for i in 0..g.len() {
        let v = phi.values[i];
        if v.is_finite() {
            let c = dot(xi, &g.node(i)) - v;
            if c > best {
                best = c;
            }
        }
    }
    best
}

/// Separable conjugate: transform axis 0, negate, transform axis 1, ...
pub fn conjugate_fast(phi: &Sampled, out: &Grid) -> Sampled {
    let g = &phi.grid;
    let d = g.dim();
    assert_eq!(d, out.dim(), "input and output grid dimensions differ");
    let mut shape: Vec<usize> = g.shape().to_vec();
    let mut data = phi.values.clone();
    for k in 0..d {
        let x = g.axis(k);
        let s = out.axis(k);
        let n_in = shape[k];
        let n_out = s.len();
        let inner: usize = shape[..k].iter().product();
        let outer: usize = shape[k + 1..].iter().product();
        let mut next_shape = shape.clone();
        next_shape[k] = n_out;
        let mut next = vec![0.0; inner * n_out * outer];
        next.par_chunks_mut(inner * n_out).enumerate().for_each(|(o, block)| {
            let mut f = vec![0.0; n_in];
            let mut res = vec![0.0; n_out];
            for i in 0..inner {
                for j in 0..n_in {
                    f[j] = data[i + inner * (j + n_in * o)];
                }
                llt_1d(&x, &f, &s, &mut res);
                for j in 0..n_out {
                    block[i + inner * j] = res[j];
                }
            }
        });
        if k + 1 < d {
            for v in next.iter_mut() {
                *v = -*v;
            }
        }
        data = next;
        shape = next_shape;
    }
    Sampled { grid: out.clone(), values: data }
}

/// Output box covering the slopes of `phi` over the inner part of its box
/// (fraction `inner` of the half widths), with a floor at half the input
/// box. Same node counts as the input.
pub fn default_dual_grid(phi: &Sampled, inner: f64) -> Grid {
    let g = &phi.grid;
    let d = g.dim();
    let center: Vec<f64> = (0..d).map(|k| 0.5 * (g.lo()[k] + g.hi()[k])).collect();
    let half: Vec<f64> = (0..d).map(|k| 0.5 * (g.hi()[k] - g.lo()[k])).collect();
    let mut slope = vec![0.0f64; d];
    for i in 0..g.len() {
        let p = g.node(i);
        if (0..d).any(|k| (p[k] - center[k]).abs() > inner * half[k] + 1e-12) {
            continue;
        }
        let m = g.unravel(i);
        for k in 0..d {
            let st = g.stride(k);
            if m[k] + 1 < g.shape()[k] {
                let (a, b) = (phi.values[i], phi.values[i + st]);
                if a.is_finite() && b.is_finite() {
                    slope[k] = slope[k].max(((b - a) / g.spacing(k)).abs());
                }
            }
        }
    }
    let half_out: Vec<f64> = (0..d).map(|k| (1.25 * slope[k]).max(0.5 * half[k])).collect();
    Grid::new(
        half_out.iter().map(|h| -h).collect(),
        half_out.clone(),
        g.shape().to_vec(),
    )
    .expect("dual grid")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvolutionReport {
    /// `max |phi** - phi|` over finite nodes of the inner half box.
    pub deviation: f64,
    pub nodes_compared: usize,
    pub dual_grid: Grid,
}

/// Double conjugate through `dual` and back, compared on the inner half box.
pub fn involution_check(phi: &Sampled, dual: &Grid) -> InvolutionReport {
    let star = conjugate_fast(phi, dual);
    let back = conjugate_fast(&star, &phi.grid);
    let g = &phi.grid;
    let d = g.dim();
    let mut deviation: f64 = 0.0;
    let mut nodes_compared = 0;
    for i in 0..g.len() {
        let p = g.node(i);
        let inner = (0..d).all(|k| {
            let c = 0.5 * (g.lo()[k] + g.hi()[k]);
            let h = 0.5 * (g.hi()[k] - g.lo()[k]);
            (p[k] - c).abs() <= 0.5 * h + 1e-12
        });
        if inner && phi.values[i].is_finite() {
            deviation = deviation.max((back.values[i] - phi.values[i]).abs());
            nodes_compared += 1;
        }
    }
    InvolutionReport { deviation, nodes_compared, dual_grid: dual.clone() }
}

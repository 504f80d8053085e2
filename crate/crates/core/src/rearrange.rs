//! Distribution functions, decreasing rearrangements, anisotropic symmetrals
//! of grid functions and of Young functions.

use serde::{Deserialize, Serialize};

use crate::calculus::gradient_values;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{sample_nodes, Grid, GridFunction, SUPPORT_MARGIN};
use crate::profile::{Continuity, Monotone, Profile};
use crate::young::{conjugate_fast, Catalog, Sampled, Young1D, YoungND};

/// Levels in tabulated distribution and volume profiles.
pub const PROFILE_LEVELS: usize = 512;

/// Fraction of each node's cell where the local linear model exceeds `t`.
/// `width[i]` is the spread of the model over the cell.
pub(crate) fn cell_fraction(value: f64, width: f64, t: f64) -> f64 {
    if width <= 0.0 {
        return if value > t { 1.0 } else { 0.0 };
    }
    (0.5 + (value - t) / width).clamp(0.0, 1.0)
}

/// Spread of the linear model over each cell, matched in variance to the
/// sum of the per-axis uniform spreads.
pub(crate) fn cell_widths(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let d = grid.dim();
    let g = gradient_values(grid, values);
    let h = grid.spacings();
    (0..grid.len())
        .map(|i| {
            let s: f64 = (0..d).map(|k| (g[i * d + k] * h[k]).powi(2)).sum();
            if s.is_finite() {
                s.sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

/// `mu(t) = |{u > t}|` on `PROFILE_LEVELS` uniform levels from the
/// essential infimum to the maximum, with sub-cell volume fractions.
pub fn distribution(u: &GridFunction) -> Profile {
    let lo = u.essinf;
    let hi = u.max().max(lo);
    let widths = cell_widths(&u.grid, &u.values);
    let vol = u.grid.cell_volume();
    let levels: Vec<f64> = (0..PROFILE_LEVELS)
        .map(|i| lo + (hi - lo) * i as f64 / (PROFILE_LEVELS - 1) as f64)
        .collect();
    let mut mu: Vec<f64> = levels
        .iter()
        .map(|&t| {
            let terms: Vec<f64> = u
                .values
                .iter()
                .zip(&widths)
                .map(|(&v, &w)| cell_fraction(v, w, t))
                .collect();
            crate::linalg::tree_sum(&terms) * vol
        })
        .collect();
    for i in 1..mu.len() {
        mu[i] = mu[i].min(mu[i - 1]);
    }
    if hi == lo {
        mu.iter_mut().for_each(|m| *m = 0.0);
    }
    Profile { x: levels, y: mu, direction: Monotone::Nonincreasing, continuity: Continuity::Right }
}

/// Sharp cell count `|{u > t}|`.
pub fn superlevel_volume(u: &GridFunction, t: f64) -> f64 {
    u.values.iter().filter(|&&v| v > t).count() as f64 * u.grid.cell_volume()
}

/// `|{phi <= s}|` with sub-cell fractions.
pub fn sublevel_volume(phi: &Sampled, s: f64) -> f64 {
    let widths = cell_widths(&phi.grid, &phi.values);
    let terms: Vec<f64> = phi
        .values
        .iter()
        .zip(&widths)
        .map(|(&v, &w)| if v.is_finite() { 1.0 - cell_fraction(v, w, s) } else { 0.0 })
        .collect();
    crate::linalg::tree_sum(&terms) * phi.grid.cell_volume()
}

/// `u*(s) = inf { t : mu(t) <= s }`, tabulated at the breakpoints of `mu`.
pub fn decreasing_rearrangement(mu: &Profile) -> Profile {
    let x: Vec<f64> = mu.y.iter().rev().copied().collect();
    let y: Vec<f64> = mu.x.iter().rev().copied().collect();
    Profile { x, y, direction: Monotone::Nonincreasing, continuity: Continuity::Right }
}

/// Whether `u` is already a nonincreasing function of `gauge_K`.
fn is_symmetric(u: &GridFunction, body: &ConvexBody) -> bool {
    let g = sample_nodes(&u.grid, |x| body.gauge_unchecked(x));
    let mut idx: Vec<usize> = (0..g.len()).collect();
    idx.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
    let scale = 1e-12 * (1.0 + u.max().abs().max(u.essinf.abs()));
    let mut i = 0;
    let mut prev_min = f64::INFINITY;
    while i < idx.len() {
        let mut j = i;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        while j < idx.len() && (g[idx[j]] - g[idx[i]]).abs() <= 1e-12 * (1.0 + g[idx[i]]) {
            let v = u.values[idx[j]];
            lo = lo.min(v);
            hi = hi.max(v);
            j += 1;
        }
        if hi - lo > scale || hi > prev_min + scale {
            return false;
        }
        prev_min = lo;
        i = j;
    }
    true
}

/// Anisotropic symmetral `u^K(x) = u*(|K| gauge_K(x)^n)`. The output keeps
/// the node lattice of `u`, extended when the symmetral's support would
/// not fit.
pub fn symmetral(u: &GridFunction, body: &ConvexBody) -> Result<GridFunction> {
    if !body.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    if body.dim() != u.grid.dim() {
        return Err(Error::Invalid("body and grid dimensions differ".into()));
    }
    let d = u.grid.dim();
    let kappa = body.volume();
    let mu = distribution(u);
    let support = mu.y[0];
    let c = (support / kappa).powf(1.0 / d as f64);
    let pad = (SUPPORT_MARGIN + 1) as f64;
    let lo: Vec<f64> = (0..d)
        .map(|k| c * body.vertices().iter().map(|v| v[k]).fold(f64::INFINITY, f64::min) - pad * u.grid.spacing(k))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|k| c * body.vertices().iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max) + pad * u.grid.spacing(k))
        .collect();
    let (grid, offset) = u.grid.extended_to(&lo, &hi);
    if is_symmetric(u, body) {
        let mut values = vec![u.essinf; grid.len()];
        for i in 0..u.grid.len() {
            let m: Vec<usize> = u.grid.unravel(i).iter().zip(&offset).map(|(a, b)| a + b).collect();
            values[grid.ravel(&m)] = u.values[i];
        }
        return Ok(GridFunction { grid, values, essinf: u.essinf });
    }
    let n = d as i32;
    let values = sample_nodes(&grid, |x| {
        let s = kappa * body.gauge_unchecked(x).powi(n);
        if s >= support {
            u.essinf
        } else {
            mu.inverse_nonincreasing(s)
        }
    });
    Ok(GridFunction { grid, values, essinf: u.essinf })
}

/// `V(s) = |{phi <= s}|` on `PROFILE_LEVELS` uniform levels in `[0, s_max]`
/// with sub-cell fractions; `s_max` stays below the smallest value on the
/// rim so no tabulated set is cut by the box.
pub fn volume_profile(phi: &Sampled) -> Profile {
    volume_profile_capped(phi, f64::INFINITY)
}

/// `volume_profile` with the top level further limited to `cap`.
pub fn volume_profile_capped(phi: &Sampled, cap: f64) -> Profile {
    let g = &phi.grid;
    let rim_min = (0..g.len())
        .filter(|&i| g.on_rim(i, 1))
        .map(|i| phi.values[i])
        .fold(f64::INFINITY, f64::min);
    let s_max = if rim_min.is_finite() { rim_min } else { phi.max_finite() }.min(cap);
    let widths = cell_widths(g, &phi.values);
    let vol = g.cell_volume();
    let levels: Vec<f64> = (0..PROFILE_LEVELS)
        .map(|i| s_max * i as f64 / (PROFILE_LEVELS - 1) as f64)
        .collect();
    let mut v: Vec<f64> = levels
        .iter()
        .map(|&s| {
            let terms: Vec<f64> = phi
                .values
                .iter()
                .zip(&widths)
                .map(|(&val, &w)| {
                    if val.is_finite() {
                        1.0 - cell_fraction(val, w, s)
                    } else {
                        0.0
                    }
                })
                .collect();
            crate::linalg::tree_sum(&terms) * vol
        })
        .collect();
    for i in 1..v.len() {
        v[i] = v[i].max(v[i - 1]);
    }
    Profile { x: levels, y: v, direction: Monotone::Nondecreasing, continuity: Continuity::Right }
}

/// A Young function whose sub-level sets are dilates `{phi <= s} = -r(s) K`,
/// stored as `B(gauge_{-K})` with `B` tabulated, together with its conjugate
/// `B_*(h_{-K})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugeSymmetric {
    pub b: Young1D,
    pub b_conj: Young1D,
    /// `-K`.
    pub body: ConvexBody,
    pub r_max: f64,
    pub s_max: f64,
    pub warnings: Vec<String>,
}

impl GaugeSymmetric {
    /// `phi_K(xi) = B(gauge_{-K}(xi))`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.b.eval(self.body.gauge_unchecked(xi))
    }

    /// Conjugate `B_*(h_{-K}(zeta))`.
    pub fn eval_conj(&self, zeta: &[f64]) -> f64 {
        self.b_conj.eval(self.body.support(zeta).max(0.0))
    }

    /// `r(s)` with `{phi_K <= s} = r(s) (-K)`.
    pub fn radius(&self, s: f64) -> f64 {
        self.b.inverse(s)
    }

    /// `h_{phi_K <= s}(zeta)`.
    pub fn level_support(&self, s: f64, zeta: &[f64]) -> f64 {
        self.radius(s) * self.body.support(zeta)
    }

    /// Largest `h_{-K}(zeta)` whose conjugate maximizer lies inside the
    /// tabulated range.
    pub fn reliable_slope(&self) -> f64 {
        match &self.b {
            Young1D::Tabulated { t, v } => {
                let n = t.len();
                if n < 2 {
                    return 0.0;
                }
                (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2])
            }
            _ => f64::INFINITY,
        }
    }

    pub fn as_young(&self) -> YoungND {
        YoungND::Catalog {
            dim: self.body.dim(),
            kind: Catalog::GaugeRadial { a: self.b.clone(), body: self.body.clone() },
        }
    }

    pub fn conj_as_young(&self) -> YoungND {
        YoungND::Catalog {
            dim: self.body.dim(),
            kind: Catalog::SupportRadial { a: self.b_conj.clone(), body: self.body.clone() },
        }
    }
}

/// `phi_K(xi) = phi_rs(|K| gauge_K(-xi)^n)` where `phi_rs` is the increasing
/// rearrangement of the sampled function: sub-level sets become
/// `{phi_K <= s} = -r(s) K` with `|r(s) K| = |{phi <= s}|`.
pub fn integrand_symmetral(phi: &Sampled, body: &ConvexBody) -> Result<GaugeSymmetric> {
    integrand_symmetral_capped(phi, body, f64::INFINITY)
}

/// `integrand_symmetral` using only the levels `s <= cap`.
pub fn integrand_symmetral_capped(phi: &Sampled, body: &ConvexBody, cap: f64) -> Result<GaugeSymmetric> {
    if !body.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let d = phi.grid.dim();
    if body.dim() != d {
        return Err(Error::Invalid("body and grid dimensions differ".into()));
    }
    let mut warnings = Vec::new();
    if !body.is_origin_symmetric(1e-9) {
        let w = "K is not origin-symmetric: sub-level sets of the symmetral are dilates of -K".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }
    let kappa = body.volume();
    let vp = volume_profile_capped(phi, cap);
    let mut t = vec![0.0];
    let mut v = vec![0.0];
    for (&s, &vol) in vp.x.iter().zip(&vp.y) {
        let r = (vol / kappa).powf(1.0 / d as f64);
        let last = *t.last().unwrap();
        if r > last * (1.0 + 1e-12) + 1e-300 {
            t.push(r);
            v.push(s);
        } else if r >= last && t.len() == 1 {
            // a flat bottom: B vanishes up to the first radius
            v[0] = 0.0;
        }
    }
    if t.len() < 2 {
        return Err(Error::Degenerate("sub-level sets have no volume in the sampled box".into()));
    }
    let r_max = *t.last().unwrap();
    let s_max = *v.last().unwrap();
    let b = Young1D::Tabulated { t, v };
    let b_conj = b.conjugate().expect("tabulated conjugate");
    Ok(GaugeSymmetric { b, b_conj, body: body.reflect(), r_max, s_max, warnings })
}

/// `phi_{*K*} = ((phi_*)_K)_*` through sampled grids: conjugate onto `dual`,
/// symmetrize, sample on `dual`, conjugate back onto `primal`. Also returns
/// the symmetrized conjugate in closed form.
pub fn triple_symmetral(phi: &YoungND, body: &ConvexBody, primal: &Grid, dual: &Grid) -> Result<(Sampled, GaugeSymmetric)> {
    let s = phi.sample(primal)?;
    let star = conjugate_fast(&s, dual);
    let sym = integrand_symmetral(&star, body)?;
    let sym_sampled = sym.as_young().sample(dual)?;
    Ok((conjugate_fast(&sym_sampled, primal), sym))
}

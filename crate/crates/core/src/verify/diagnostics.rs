//! Per-level chain of the coarea argument and residuals of the equality
//! conditions.

use serde::{Deserialize, Serialize};

use super::{Evaluation, VerifyConfig};
use crate::calculus::{default_dt, MIN_GRADIENT};
use crate::error::Result;
use crate::geometry::{superlevel_perimeter, ConvexBody};
use crate::grid::{Grid, GridMask};
use crate::linalg::{directions, dot, solve, tree_sum};
use crate::rearrange::{distribution, integrand_symmetral, integrand_symmetral_capped, sublevel_volume};
use crate::young::{conjugate_fast, default_dual_grid, Young1D, YoungND};

/// Directions used for normalized support comparisons.
const SUPPORT_DIRECTIONS: usize = 128;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Residuals {
    /// `1` when `{Phi_* <= s_t}` has empty interior on the grid.
    pub a: f64,
    /// Normalized support mismatch between `{u >= t}` and `-{Phi_* <= s_t}`.
    pub b: f64,
    /// Relative Fenchel defect of `grad u` against `{Phi_* <= s_t}`.
    pub c: f64,
    /// Relative Fenchel defect of `grad u^K` against `{Phi_{*K} <= s_t}`.
    pub d: f64,
    /// Relative gap between the two `1 / |grad|` level integrals.
    pub e: f64,
    pub tol_b: f64,
}

impl Residuals {
    pub fn within(&self, tol: f64) -> bool {
        self.a < 0.5 && self.b <= self.tol_b && self.c <= tol && self.d <= tol && self.e <= tol
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelRecord {
    pub t: f64,
    pub s_t: f64,
    pub a_t: f64,
    pub x_t: Vec<f64>,
    /// Level densities `T1 .. T8`:
    /// `Phi(grad u)`, `h_S(grad u) - s`, `P_{-S}({u >= t}) - s I`,
    /// the isoperimetric bound, the same for `u^K`, `P` of `u^K`,
    /// `r(s) h_{-K}(grad u^K) - s`, `Phi_{*K*}(grad u^K)`.
    pub chain: Vec<f64>,
    pub chain_ok: bool,
    pub band_tol: f64,
    pub residuals: Residuals,
    /// Lattice nodes of `{u >= t}` over lattice nodes of its convex hull.
    pub quasi_convexity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub levels: Vec<LevelRecord>,
    /// Share of levels whose residuals are all within tolerance.
    pub equality_fraction: f64,
    pub chain_fraction: f64,
    pub min_quasi_convexity: f64,
}

/// Boundary nodes of a mask: marked nodes with an unmarked axis neighbor or
/// on the rim.
fn boundary_points(m: &GridMask) -> Vec<Vec<f64>> {
    let g = &m.grid;
    let d = g.dim();
    (0..g.len())
        .filter(|&i| {
            if !m.mask[i] {
                return false;
            }
            let idx = g.unravel(i);
            (0..d).any(|k| {
                let st = g.stride(k);
                idx[k] == 0 || idx[k] + 1 == g.shape()[k] || !m.mask[i - st] || !m.mask[i + st]
            })
        })
        .map(|i| g.node(i))
        .collect()
}

fn hull_of(m: &GridMask) -> Option<ConvexBody> {
    let pts = boundary_points(m);
    if pts.len() <= m.grid.dim() {
        return None;
    }
    ConvexBody::new(m.grid.dim(), &pts).ok()
}

/// `max_theta (h(theta) - <theta, b>) / |E|^{1/n}` per direction.
fn normalized_support(hull: &ConvexBody, bary: &[f64], volume: f64, dirs: &[Vec<f64>]) -> Vec<f64> {
    let n = hull.dim() as f64;
    let scale = volume.powf(1.0 / n);
    dirs.iter().map(|t| (hull.support(t) - dot(t, bary)) / scale).collect()
}

/// Largest normalized support difference between the super-level sets of
/// `u` at `t1` and `t2`; zero exactly when they are homothetic.
pub fn homothety_mismatch(u: &crate::grid::GridFunction, t1: f64, t2: f64) -> Option<f64> {
    let d = u.grid.dim();
    let dirs = directions(d, SUPPORT_DIRECTIONS);
    let sets: Vec<(ConvexBody, Vec<f64>, f64)> = [t1, t2]
        .iter()
        .map(|&t| {
            let m = GridMask { grid: u.grid.clone(), mask: u.values.iter().map(|&v| v >= t).collect() };
            Some((hull_of(&m)?, m.barycenter()?, m.volume()))
        })
        .collect::<Option<_>>()?;
    let a = normalized_support(&sets[0].0, &sets[0].1, sets[0].2, &dirs);
    let b = normalized_support(&sets[1].0, &sets[1].1, sets[1].2, &dirs);
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Nodes in the set over lattice nodes in its convex hull; `1` for a
/// digitally convex set.
pub fn quasi_convexity_score(m: &GridMask) -> f64 {
    let count = m.count();
    if count == 0 {
        return 1.0;
    }
    let Some(hull) = hull_of(m) else {
        return 1.0;
    };
    let g = &m.grid;
    let tol = 1e-9 * g.h();
    let d = g.dim();
    let mut lo = vec![usize::MAX; d];
    let mut hi = vec![0usize; d];
    for i in 0..g.len() {
        if m.mask[i] {
            let idx = g.unravel(i);
            for k in 0..d {
                lo[k] = lo[k].min(idx[k]);
                hi[k] = hi[k].max(idx[k]);
            }
        }
    }
    let mut inside = 0usize;
    for i in 0..g.len() {
        let idx = g.unravel(i);
        if (0..d).any(|k| idx[k] < lo[k] || idx[k] > hi[k]) {
            continue;
        }
        if m.mask[i] || hull.contains(&g.node(i), tol) {
            inside += 1;
        }
    }
    count as f64 / inside.max(1) as f64
}

/// Maximizer of `r sigma - B(r)` over the table of `B`, refined by a local
/// quadratic fit. Returns `(r, s)`.
fn optimal_level(b: &Young1D, sigma: f64) -> (f64, f64) {
    let Young1D::Tabulated { t, v } = b else {
        return (0.0, 0.0);
    };
    let mut best = 0;
    for i in 1..t.len() {
        if t[i] * sigma - v[i] > t[best] * sigma - v[best] {
            best = i;
        }
    }
    let w = 8;
    let lo = best.saturating_sub(w);
    let hi = (best + w).min(t.len() - 1);
    if hi - lo < 4 || best == 0 || best == t.len() - 1 {
        return (t[best], v[best]);
    }
    // least squares s = c0 + c1 r + c2 r^2 on the window
    let mut ata = [0.0; 9];
    let mut atb = [0.0; 3];
    for j in lo..=hi {
        let row = [1.0, t[j], t[j] * t[j]];
        for a in 0..3 {
            atb[a] += row[a] * v[j];
            for c in 0..3 {
                ata[a * 3 + c] += row[a] * row[c];
            }
        }
    }
    match solve(&ata, &atb) {
        Some(c) if c[2] > 0.0 => {
            let r = ((sigma - c[1]) / (2.0 * c[2])).clamp(t[lo], t[hi]);
            (r, c[0] + c[1] * r + c[2] * r * r)
        }
        _ => (t[best], v[best]),
    }
}

struct Band {
    weights: Vec<f64>,
}

impl Band {
    fn new(values: &[f64], norms: &[f64], t: f64, dt: f64) -> Band {
        let weights = values
            .iter()
            .zip(norms)
            .map(|(&v, &n)| {
                let z = (v - t).abs() / dt;
                if z >= 1.0 || n < MIN_GRADIENT {
                    0.0
                } else {
                    (1.0 - z) / dt
                }
            })
            .collect();
        Band { weights }
    }

    fn integral(&self, f: impl Fn(usize) -> f64, vol: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| if w > 0.0 { w * f(i) } else { 0.0 })
            .collect();
        tree_sum(&terms) * vol
    }
}

/// Chain and residuals at interior levels of `u`.
pub fn extremality_diagnostics(ev: &Evaluation, phi: &YoungND, cfg: &VerifyConfig) -> Result<Diagnostics> {
    let u = &ev.u;
    let uk = &ev.uk;
    let d = u.grid.dim();
    let n = d as f64;
    let kappa = ev.sym.body.volume();
    let body_k = ev.sym.body.reflect();
    let dt = default_dt(u, &ev.grad_u).max(default_dt(uk, &ev.grad_uk));
    let mu = distribution(u);
    let mu_k = distribution(uk);
    let norms_u: Vec<f64> = (0..u.grid.len()).map(|i| ev.grad_u.norm(i)).collect();
    let norms_k: Vec<f64> = (0..uk.grid.len()).map(|i| ev.grad_uk.norm(i)).collect();
    let phi_u: Vec<f64> = (0..u.grid.len()).map(|i| phi.eval(ev.grad_u.at(i))).collect();
    let sigma: Vec<f64> = (0..uk.grid.len()).map(|i| ev.sym.body.support(ev.grad_uk.at(i)).max(0.0)).collect();
    let conj_k: Vec<f64> = sigma.iter().map(|&s| ev.sym.b_conj.eval(s)).collect();
    let vol_u = u.grid.cell_volume();
    let vol_k = uk.grid.cell_volume();
    let h_dual = ev.phi_star.grid.h();
    let dirs = directions(d, SUPPORT_DIRECTIONS);

    let range = u.max() - u.essinf;
    // bands must not reach the plateau at the infimum or the top
    let trim = (cfg.level_trim * range).max(1.5 * dt);
    let lo = u.essinf + trim;
    let hi = u.max() - trim;
    let count = cfg.levels.max(1);
    let mut records = Vec::with_capacity(count);
    for j in 0..count {
        let t = if count == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * j as f64 / (count - 1) as f64 };
        let bu = Band::new(&u.values, &norms_u, t, dt);
        let bk = Band::new(&uk.values, &norms_k, t, dt);
        let i_u = bu.integral(|_| 1.0, vol_u);
        let i_k = bk.integral(|_| 1.0, vol_k);
        if i_k <= 0.0 {
            continue;
        }
        let sigma_t = bk.integral(|i| sigma[i], vol_k) / i_k;
        let (r, s_t) = optimal_level(&ev.sym.b, sigma_t);

        let s_mask = GridMask {
            grid: ev.phi_star.grid.clone(),
            mask: ev.phi_star.values.iter().map(|&v| v <= s_t).collect(),
        };
        let s_hull = hull_of(&s_mask);
        let s_vol = sublevel_volume(&ev.phi_star, s_t);
        let u_mask = GridMask { grid: u.grid.clone(), mask: u.values.iter().map(|&v| v >= t).collect() };
        let mu_t = mu.eval(t);
        let mu_kt = mu_k.eval(t);

        let t1 = bu.integral(|i| phi_u[i], vol_u);
        let (t2, t3, res_a) = match &s_hull {
            Some(hull) => {
                let t2 = bu.integral(|i| hull.support(ev.grad_u.at(i)), vol_u) - s_t * i_u;
                let t3 = superlevel_perimeter(u, t, &hull.reflect())? - s_t * i_u;
                (t2, t3, 0.0)
            }
            None => (f64::NAN, f64::NAN, 1.0),
        };
        let t4 = n * mu_t.powf((n - 1.0) / n) * s_vol.powf(1.0 / n) - s_t * i_k;
        let t5 = n * mu_kt.powf((n - 1.0) / n) * kappa.powf(1.0 / n) * r - s_t * i_k;
        let t6 = r * superlevel_perimeter(uk, t, &body_k)? - s_t * i_k;
        let t7 = bk.integral(|i| r * sigma[i], vol_k) - s_t * i_k;
        let t8 = bk.integral(|i| conj_k[i], vol_k);
        let chain = vec![t1, t2, t3, t4, t5, t6, t7, t8];

        // every term is a positive quantity minus s I, errors scale with both
        let band_tol = 0.05 * (t1.abs().max(t8.abs()) + s_t * i_u.max(i_k)) + 1e-12;
        let chain_ok = t1 >= t2 - band_tol
            && (t2 - t3).abs() <= band_tol
            && t3 >= t4 - band_tol
            && (t4 - t5).abs() <= band_tol
            && (t5 - t6).abs() <= band_tol
            && (t6 - t7).abs() <= band_tol
            && (t7 - t8).abs() <= band_tol;

        let a_t = if s_vol > 0.0 { (mu_t / s_vol).powf(1.0 / n) } else { f64::NAN };
        let bary_u = u_mask.barycenter();
        let bary_s = s_mask.barycenter();
        let x_t = match (&bary_u, &bary_s) {
            (Some(bu), Some(bs)) => (0..d).map(|k| bu[k] + a_t * bs[k]).collect(),
            _ => vec![f64::NAN; d],
        };
        let (res_b, tol_b) = match (&s_hull, hull_of(&u_mask), &bary_u, &bary_s) {
            (Some(sh), Some(uh), Some(bu), Some(bs)) => {
                let hu = normalized_support(&uh, bu, u_mask.volume(), &dirs);
                let neg: Vec<Vec<f64>> = dirs.iter().map(|t| t.iter().map(|x| -x).collect()).collect();
                let hs = normalized_support(sh, bs, s_mask.volume(), &neg);
                let mismatch = hu.iter().zip(&hs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let tol = 2.0 * n.sqrt() * (u.grid.h() / mu_t.powf(1.0 / n) + h_dual / s_vol.powf(1.0 / n));
                (mismatch, tol)
            }
            _ => (f64::INFINITY, 0.0),
        };
        let res_c = if res_a == 0.0 { ((t1 - t2) / (t1 + s_t * i_u).max(1e-300)).max(0.0) } else { f64::INFINITY };
        let res_d = ((t8 - t7) / (t8 + s_t * i_k).max(1e-300)).max(0.0);
        let res_e = (i_u - i_k).abs() / i_u.max(i_k);

        records.push(LevelRecord {
            t,
            s_t,
            a_t,
            x_t,
            chain,
            chain_ok,
            band_tol,
            residuals: Residuals { a: res_a, b: res_b, c: res_c, d: res_d, e: res_e, tol_b },
            quasi_convexity: quasi_convexity_score(&u_mask),
        });
    }
    let total = records.len().max(1) as f64;
    let equality_fraction = records.iter().filter(|r| r.residuals.within(cfg.equality_tol)).count() as f64 / total;
    let chain_fraction = records.iter().filter(|r| r.chain_ok).count() as f64 / total;
    let min_quasi_convexity = records.iter().map(|r| r.quasi_convexity).fold(1.0, f64::min);
    Ok(Diagnostics { levels: records, equality_fraction, chain_fraction, min_quasi_convexity })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `Phi_K(c1 xi) <= Phi_{*K*}(xi)` at 99% of the compared nodes.
    pub c1: f64,
    /// `Phi_{*K*}(xi) <= Phi_K(c2 xi)` at 99% of the compared nodes.
    pub c2: f64,
    pub nodes: usize,
    /// Extremes of the per-node constant before taking percentiles.
    pub min: f64,
    pub max: f64,
}

/// Constants with `Phi_K(c1 xi) <= Phi_{*K*}(xi) <= Phi_K(c2 xi)` on the
/// inner half of `primal`, from per-node constants `B_K^{-1}(F(xi)) / gauge`.
pub fn sandwich_constants(phi: &YoungND, body: &ConvexBody, primal: &Grid) -> Result<SandwichReport> {
    let s = phi.sample(primal)?;
    let phi_k = integrand_symmetral(&s, body)?;
    let dual = default_dual_grid(&s, 1.0);
    let star = conjugate_fast(&s, &dual);
    let cap = super::trusted_level(&star, primal);
    let triple = integrand_symmetral_capped(&star, body, cap)?;
    let d = primal.dim();
    let half: Vec<f64> = (0..d).map(|k| 0.5 * (primal.hi()[k] - primal.lo()[k])).collect();
    let mut ratios = Vec::new();
    for i in 0..primal.len() {
        let xi = primal.node(i);
        if (0..d).any(|k| xi[k].abs() > 0.5 * half[k] + 1e-12) {
            continue;
        }
        let g = phi_k.body.gauge_unchecked(&xi);
        if g < 1e-12 || triple.body.support(&xi) > triple.reliable_slope() {
            continue;
        }
        let f = triple.eval_conj(&xi);
        if !(f > 0.0 && f.is_finite() && f < phi_k.s_max) {
            continue;
        }
        ratios.push(phi_k.b.inverse(f) / g);
    }
    if ratios.is_empty() {
        return Err(crate::Error::Degenerate("no nodes where both sides are finite and positive".into()));
    }
    ratios.sort_by(f64::total_cmp);
    let pct = |p: f64| ratios[((p * (ratios.len() - 1) as f64).round() as usize).min(ratios.len() - 1)];
    Ok(SandwichReport {
        c1: pct(0.01),
        c2: pct(0.99),
        nodes: ratios.len(),
        min: ratios[0],
        max: *ratios.last().unwrap(),
    })
}

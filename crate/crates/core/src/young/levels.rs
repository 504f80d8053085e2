//! Sub-level sets of Young functions and the level-set form of the
//! conjugate, `phi_*(xi) = sup_s (h_{phi <= s}(xi) - s)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{conjugate_at, Catalog, Sampled, Young1D, YoungND};
use crate::error::{invalid, Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{Grid, GridMask};
use crate::linalg::{directions, dot, norm};

/// Geometric levels used when tabulating a profile in `s`.
pub const LEVEL_COUNT: usize = 200;
pub const LEVEL_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct SublevelSet {
    pub mask: GridMask,
    pub volume: f64,
    /// The set reaches the rim of the box, so part of it may be cut off.
    pub truncated: bool,
}

pub fn sublevel_set(phi: &Sampled, s: f64) -> SublevelSet {
    let mask = GridMask { grid: phi.grid.clone(), mask: phi.values.iter().map(|&v| v <= s).collect() };
    let volume = mask.volume();
    let truncated = mask.touches_rim();
    SublevelSet { mask, volume, truncated }
}

/// `0` followed by `LEVEL_COUNT` geometric levels from `LEVEL_FLOOR * max`
/// to `max`.
pub fn level_grid(max: f64) -> Vec<f64> {
    let lo = LEVEL_FLOOR * max;
    let mut out = vec![0.0];
    for i in 0..LEVEL_COUNT {
        let t = i as f64 / (LEVEL_COUNT - 1) as f64;
        out.push(lo * (max / lo).powf(t));
    }
    out
}

/// Nodes sorted by value, for support functions of every sub-level set in
/// one sweep.
pub struct LevelSupport {
    dim: usize,
    values: Vec<f64>,
    points: Vec<f64>,
}

impl LevelSupport {
    pub fn new(phi: &Sampled) -> Self {
        let g = &phi.grid;
        let d = g.dim();
        let mut idx: Vec<usize> = (0..g.len()).filter(|&i| phi.values[i].is_finite()).collect();
        idx.sort_by(|&a, &b| phi.values[a].total_cmp(&phi.values[b]).then(a.cmp(&b)));
        let nodes = g.nodes_flat();
        let values = idx.iter().map(|&i| phi.values[i]).collect();
        let points = idx.iter().flat_map(|&i| nodes[i * d..(i + 1) * d].iter().copied()).collect();
        LevelSupport { dim: d, values, points }
    }

    /// `h_{phi <= s}(xi)` at every level (ascending); `-inf` for empty sets.
    pub fn support_at_levels(&self, xi: &[f64], levels: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(levels.len());
        let mut best = f64::NEG_INFINITY;
        let mut k = 0;
        for &s in levels {
            while k < self.values.len() && self.values[k] <= s {
                let c = dot(xi, &self.points[k * self.dim..(k + 1) * self.dim]);
                if c > best {
                    best = c;
                }
                k += 1;
            }
            out.push(best);
        }
        out
    }
}

/// `max_i (h_{phi <= s_i}(xi) - s_i)` over the given levels.
pub fn conjugate_via_levelsets(support: &LevelSupport, xi: &[f64], levels: &[f64]) -> f64 {
    support
        .support_at_levels(xi, levels)
        .iter()
        .zip(levels)
        .map(|(h, s)| h - s)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `phi = A(h_L)` with its conjugate `A_*(gauge_L)` and the support
/// functions of sub-level sets of both.
#[derive(Clone, Debug)]
pub struct RadialFactorization {
    pub a: Young1D,
    pub a_conj: Young1D,
    pub body: ConvexBody,
    pub phi: YoungND,
    pub conj: YoungND,
}

pub fn radial_factorization(a: &Young1D, body: &ConvexBody) -> Result<RadialFactorization> {
    if !body.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let a_conj = a
        .conjugate()
        .ok_or_else(|| Error::Invalid("A has no closed-form conjugate".into()))?;
    let dim = body.dim();
    let phi = YoungND::catalog(dim, Catalog::SupportRadial { a: a.clone(), body: body.clone() })?;
    let conj = YoungND::catalog(dim, Catalog::GaugeRadial { a: a_conj.clone(), body: body.clone() })?;
    Ok(RadialFactorization { a: a.clone(), a_conj, body: body.clone(), phi, conj })
}

impl RadialFactorization {
    /// `h_{phi <= s}(xi) = A^{-1}(s) gauge_L(xi)`.
    pub fn sublevel_support(&self, s: f64, xi: &[f64]) -> f64 {
        self.a.inverse(s) * self.body.gauge_unchecked(xi)
    }

    /// `h_{phi_* <= s}(xi) = A_*^{-1}(s) h_L(xi)`.
    pub fn conj_sublevel_support(&self, s: f64, xi: &[f64]) -> f64 {
        self.a_conj.inverse(s) * self.body.support(xi)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `(r, max_theta phi_*(r theta) / r)` on shrinking shells.
    pub small: Vec<(f64, f64)>,
    /// The same on growing shells.
    pub large: Vec<(f64, f64)>,
    pub small_vanishes: bool,
    pub large_diverges: bool,
    /// The function is positive away from the origin (sampled check).
    pub positive_off_origin: bool,
    /// The function is finite on the whole box.
    pub finite_valued: bool,
}

/// Growth of the conjugate near `0` and near infinity. Uses the closed-form
/// conjugate when available and the direct maximum over samples on `grid`
/// otherwise; shells reach out to `r_max`.
pub fn growth_limits(phi: &YoungND, grid: &Grid, r_max: f64) -> Result<GrowthReport> {
    let d = phi.dim();
    if grid.dim() != d {
        return invalid("grid dimension differs from the Young function dimension");
    }
    let closed = phi.conjugate_closed_form();
    let sampled = phi.sample(grid)?;
    let conj = |x: &[f64]| match &closed {
        Some(c) => c.eval(x),
        None => conjugate_at(&sampled, x),
    };
    let dirs = directions(d, 64);
    let ratio = |r: f64| {
        dirs.iter()
            .map(|u| conj(&u.iter().map(|x| x * r).collect::<Vec<_>>()) / r)
            .fold(0.0, f64::max)
    };
    let small: Vec<(f64, f64)> = (1..=10).map(|k| r_max * 0.5f64.powi(k)).map(|r| (r, ratio(r))).collect();
    let large: Vec<(f64, f64)> = (1..=8).map(|k| r_max * k as f64 / 8.0).map(|r| (r, ratio(r))).collect();
    let small_vanishes = small.last().map(|l| l.1).unwrap_or(0.0) <= 0.1 * small[0].1.max(1e-300)
        && small.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    let large_diverges = large.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9))
        && large.last().map(|l| l.1).unwrap_or(0.0) >= 2.0 * large[0].1;
    let positive_off_origin = sampled
        .values
        .iter()
        .enumerate()
        .all(|(i, &v)| v > 0.0 || norm(&grid.node(i)) < 1e-12);
    let finite_valued = sampled.values.iter().all(|v| v.is_finite());
    Ok(GrowthReport { small, large, small_vanishes, large_diverges, positive_off_origin, finite_valued })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximizerProfile {
    pub levels: Vec<f64>,
    /// `h_{phi <= s}(xi) - s` at each level.
    pub profile: Vec<f64>,
    pub s_star: f64,
    pub value: f64,
    /// The maximum sits at `s = 0`: the function is an indicator near the
    /// origin in this direction.
    pub at_zero: bool,
    /// Largest midpoint concavity defect over sampled level pairs.
    pub concavity_defect: f64,
}

/// Support of the sub-level sets in direction `xi`, from closed forms where
/// the catalog gives the sets as dilates.
fn catalog_level_support(kind: &Catalog, xi: &[f64], s: f64) -> Option<f64> {
    match kind {
        Catalog::Quad => Some((2.0 * s).sqrt() * norm(xi)),
        Catalog::Radial { a } => Some(a.inverse(s) * norm(xi)),
        Catalog::GaugeRadial { a, body } => Some(a.inverse(s) * body.support(xi)),
        Catalog::SupportRadial { a, body } => Some(a.inverse(s) * body.gauge_unchecked(xi)),
        Catalog::Indicator { body } => Some(body.support(xi)),
        _ => None,
    }
}

/// Maximize `s -> h_{phi <= s}(xi) - s` over a level grid. `grid` is used to
/// sample catalog entries without closed-form sub-level sets.
pub fn maximizer_profile(phi: &YoungND, xi: &[f64], grid: Option<&Grid>) -> Result<MaximizerProfile> {
    let eval_levels = |levels: &[f64]| -> Result<Vec<f64>> {
        match phi {
            YoungND::Catalog { kind, .. } if catalog_level_support(kind, xi, 1.0).is_some() => Ok(levels
                .iter()
                .map(|&s| catalog_level_support(kind, xi, s).unwrap() - s)
                .collect()),
            YoungND::Sampled(sm) => Ok(profile_from_sample(sm, xi, levels)),
            _ => {
                let g = grid.ok_or_else(|| Error::Invalid("sampling grid needed for this Young function".into()))?;
                Ok(profile_from_sample(&phi.sample(g)?, xi, levels))
            }
        }
    };
    let mut max = match phi {
        YoungND::Sampled(sm) => sm.max_finite(),
        _ => 1.0,
    };
    let (levels, profile) = loop {
        let levels = level_grid(max);
        let profile = eval_levels(&levels)?;
        let n = profile.len();
        let still_rising = profile[n - 1] >= profile[n - 2] && profile[n - 1] > f64::NEG_INFINITY;
        if !still_rising {
            break (levels, profile);
        }
        if matches!(phi, YoungND::Sampled(_)) || max > 1e12 {
            return Err(Error::LevelGridTooShort(format!(
                "profile still increasing at the last level s = {max}"
            )));
        }
        max *= 4.0;
    };
    let mut best = 0;
    for i in 1..profile.len() {
        if profile[i] > profile[best] {
            best = i;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let finite: Vec<usize> = (0..profile.len()).filter(|&i| profile[i].is_finite()).collect();
    let mut concavity_defect: f64 = 0.0;
    if finite.len() >= 2 {
        for _ in 0..100 {
            let i = finite[rng.gen_range(0..finite.len())];
            let j = finite[rng.gen_range(0..finite.len())];
            let mid = 0.5 * (levels[i] + levels[j]);
            let pm = interp(&levels, &profile, mid);
            concavity_defect = concavity_defect.max(0.5 * (profile[i] + profile[j]) - pm);
        }
    }
    Ok(MaximizerProfile {
        s_star: levels[best],
        value: profile[best],
        at_zero: best == 0,
        levels,
        profile,
        concavity_defect,
    })
}

fn profile_from_sample(sm: &Sampled, xi: &[f64], levels: &[f64]) -> Vec<f64> {
    LevelSupport::new(sm)
        .support_at_levels(xi, levels)
        .iter()
        .zip(levels)
        .map(|(h, s)| h - s)
        .collect()
}

fn interp(x: &[f64], y: &[f64], t: f64) -> f64 {
    let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1);
    let (x0, x1) = (x[i - 1], x[i]);
    if x1 == x0 {
        return y[i];
    }
    y[i - 1] + (t - x0) / (x1 - x0) * (y[i] - y[i - 1])
}

//! Constructions of equality cases.

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{Grid, GridFunction, GridMask, SUPPORT_MARGIN};
use crate::linalg::directions;
use crate::profile::Profile;
use crate::young::{conjugate_fast, default_dual_grid, Catalog, Sampled, Young1D, YoungND};

#[derive(Clone, Debug)]
pub struct Prop51 {
    pub u: GridFunction,
    pub phi: YoungND,
}

/// Box centered at `x0` with half widths `1.15 e` plus a margin of
/// `SUPPORT_MARGIN + 2` cells, `res` cells per axis.
fn box_around(x0: &[f64], e: &[f64], res: usize) -> Result<Grid> {
    let half: Vec<f64> = e
        .iter()
        .map(|x| {
            let h = 1.15 * x;
            h + (SUPPORT_MARGIN + 2) as f64 * 2.0 * h / res as f64
        })
        .collect();
    let lo = x0.iter().zip(&half).map(|(c, h)| c - h).collect();
    let hi = x0.iter().zip(&half).map(|(c, h)| c + h).collect();
    Grid::new(lo, hi, vec![res + 1; x0.len()])
}

/// `Phi(xi) = A(h_L(-xi))` and `u(x) = b^{-1}(gauge_L(x - x0))`, so that
/// `{Phi <= s} = -A^{-1}(s) L°` and `{u >= t} = b(t) L + x0`.
pub fn generate_prop51(body: &ConvexBody, a: &Young1D, b: &Profile, x0: &[f64], res: usize) -> Result<Prop51> {
    let d = body.dim();
    if x0.len() != d {
        return Err(Error::Invalid("x0 has the wrong dimension".into()));
    }
    if !body.contains_origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let decreasing = b.direction == crate::profile::Monotone::Nonincreasing && b.is_monotone(0.0);
    if b.y.len() < 2 || !decreasing || b.y[0] <= b.y[b.y.len() - 1] {
        return Err(Error::Degenerate("b must be nonincreasing and non-constant".into()));
    }
    let t0 = b.x[0];
    let b0 = b.y[0];
    if !(b0 > 0.0) {
        return Err(Error::Degenerate("b must be positive at its first level".into()));
    }
    let phi = YoungND::catalog(d, Catalog::SupportRadial { a: a.clone(), body: body.reflect() })?;
    let e: Vec<f64> = body.extent().iter().map(|x| x * b0).collect();
    let grid = box_around(x0, &e, res)?;
    let u = GridFunction::sample(grid, |x| {
        let y: Vec<f64> = x.iter().zip(x0).map(|(p, c)| p - c).collect();
        let g = body.gauge_unchecked(&y);
        if g >= b0 {
            t0
        } else {
            b.inverse_nonincreasing(g)
        }
    })?;
    u.check_support()?;
    Ok(Prop51 { u, phi })
}

/// `min_theta phi(r theta) / r` grows by a factor of two or more over
/// shells `r = 1 .. 1024` and never decreases.
pub fn is_superlinear(phi: &YoungND) -> bool {
    let dirs = directions(phi.dim(), 64);
    let ratio = |r: f64| {
        dirs.iter()
            .map(|t| phi.eval(&t.iter().map(|x| x * r).collect::<Vec<_>>()) / r)
            .fold(f64::INFINITY, f64::min)
    };
    let rs: Vec<f64> = (0..=10).map(|k| ratio(2f64.powi(k))).collect();
    rs.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)) && rs[10] >= 2.0 * rs[0] && rs[0] > 0.0
}

#[derive(Clone, Debug)]
pub struct Prop52 {
    pub u: GridFunction,
    /// `(x0 - x) / a` evaluation of `Phi_*`: closed form or sampled.
    pub closed_form: bool,
}

/// `u(x) = T_{t1,t2}(t3 - a Phi_*((x0 - x) / a))` on a box around its
/// support with `res` cells per axis.
#[allow(clippy::too_many_arguments)]
pub fn generate_prop52(phi: &YoungND, a: f64, t1: f64, t2: f64, t3: f64, x0: &[f64], res: usize) -> Result<Prop52> {
    let d = phi.dim();
    if x0.len() != d {
        return Err(Error::Invalid("x0 has the wrong dimension".into()));
    }
    if !(a > 0.0) || !(t1 <= t2) || !(t2 <= t3) {
        return Err(Error::Invalid("need a > 0 and t1 <= t2 <= t3".into()));
    }
    if t1 == t2 {
        let grid = box_around(x0, &vec![1.0; d], res)?;
        let u = GridFunction::sample(grid, |_| t1)?;
        return Ok(Prop52 { u, closed_form: true });
    }
    if !is_superlinear(phi) {
        return Err(Error::Invalid(
            "precondition failed: Phi(xi) / |xi| must tend to infinity for the truncated conjugate profile".into(),
        ));
    }
    let level = (t3 - t1) / a;
    let closed = phi.conjugate_closed_form();
    let conj: Box<dyn Fn(&[f64]) -> f64 + Sync> = match closed {
        Some(c) => Box::new(move |z: &[f64]| c.eval(z)),
        None => Box::new(numeric_conjugate(phi, level)?),
    };
    let closed_form = phi.conjugate_closed_form().is_some();

    // bounding box of {Phi_* <= level}
    let mut r = 1.0;
    let ext = loop {
        let g = Grid::cube(d, r, 129)?;
        let s = Sampled { values: crate::grid::sample_nodes(&g, |z| conj(z)), grid: g };
        let m = GridMask { grid: s.grid.clone(), mask: s.values.iter().map(|&v| v <= level).collect() };
        if !m.touches_rim() {
            let h = s.grid.h();
            let mut e = vec![0.0f64; d];
            for p in m.points() {
                for k in 0..d {
                    e[k] = e[k].max(p[k].abs() + h);
                }
            }
            break e;
        }
        if r > 1e6 {
            return Err(Error::Degenerate("sub-level set of the conjugate is unbounded".into()));
        }
        r *= 2.0;
    };
    let e: Vec<f64> = ext.iter().map(|x| a * x).collect();
    let grid = box_around(x0, &e, res)?;
    let u = GridFunction::sample(grid, |x| {
        let z: Vec<f64> = x.iter().zip(x0).map(|(p, c)| (c - p) / a).collect();
        (t3 - a * conj(&z)).clamp(t1, t2)
    })?;
    let u = GridFunction { essinf: t1, ..u };
    u.check_support()?;
    Ok(Prop52 { u, closed_form })
}

/// `Phi_*` from a sampled conjugate, with the primal box enlarged until the
/// conjugate is trusted up to `level`.
fn numeric_conjugate(phi: &YoungND, level: f64) -> Result<impl Fn(&[f64]) -> f64 + Sync> {
    let d = phi.dim();
    let mut half = 2.0;
    loop {
        let primal = Grid::cube(d, half, 257)?;
        let s = phi.sample(&primal)?;
        let dual = default_dual_grid(&s, 1.0);
        let star = conjugate_fast(&s, &dual);
        let rim_min = (0..dual.len())
            .filter(|&i| dual.on_rim(i, 1))
            .map(|i| star.values[i])
            .fold(f64::INFINITY, f64::min);
        if super::trusted_level(&star, &primal).min(rim_min) > 1.05 * level {
            return Ok(move |z: &[f64]| star.eval(z));
        }
        if half > 1e4 {
            return Err(Error::LevelGridTooShort("conjugate not resolved up to the requested level".into()));
        }
        half *= 2.0;
    }
}

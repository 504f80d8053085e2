//! Verification of `integral Phi_{*K*}(grad u^K) <= integral Phi(grad u)`
//! with the per-level chain and the equality diagnostics.

mod diagnostics;
mod generate;

use serde::{Deserialize, Serialize};

use crate::calculus::{dirichlet_functional, gradient, GradientField, MIN_GRADIENT};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{Grid, GridFunction};
use crate::linalg::tree_sum;
use crate::numfmt::ext_real;
use crate::rearrange::{integrand_symmetral_capped, symmetral, GaugeSymmetric};
use crate::young::{conjugate_fast, Sampled, YoungND};

pub use diagnostics::{
    extremality_diagnostics, homothety_mismatch, quasi_convexity_score, sandwich_constants, Diagnostics,
    LevelRecord, Residuals, SandwichReport,
};
pub use generate::{generate_prop51, generate_prop52, is_superlinear, Prop51, Prop52};

pub const SCHEMA_VERSION: u32 = 1;

/// Constants of the discretization error model
/// `err(h) = C1 h Lip |supp grad u| + C2 ds |supp grad u^K|`.
pub const ERR_C1: f64 = 0.5;
pub const ERR_C2: f64 = 0.5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Interior levels in the per-level chain.
    pub levels: usize,
    /// Node count per axis of the gradient-space grids; by default twice
    /// the cell count of `u` plus one.
    pub dual_res: Option<usize>,
    /// Also evaluate on the grid coarsened by two.
    pub refine: bool,
    /// Relative gap accepted as equality by callers checking equality cases.
    pub equality_tol: f64,
    /// Fraction of levels trimmed at each end of the range.
    pub level_trim: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { levels: 48, dual_res: None, refine: true, equality_tol: 0.03, level_trim: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    InequalityHolds,
    EqualityWithinTol,
    Violation,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefinementStep {
    pub h: f64,
    #[serde(with = "ext_real")]
    pub lhs: f64,
    #[serde(with = "ext_real")]
    pub rhs: f64,
    #[serde(with = "ext_real")]
    pub excess: f64,
    pub err: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(with = "ext_real")]
    pub lhs: f64,
    #[serde(with = "ext_real")]
    pub rhs: f64,
    /// `(lhs - rhs) / rhs`.
    #[serde(with = "ext_real")]
    pub relative_gap: f64,
    pub err: f64,
    pub verdict: Verdict,
    pub per_level: Vec<LevelRecord>,
    /// Finest grid last.
    pub refinement: Vec<RefinementStep>,
    pub warnings: Vec<String>,
    pub config: VerifyConfig,
}

/// Everything computed once per grid and shared by the functionals, the
/// chain and the diagnostics.
pub struct Evaluation {
    pub u: GridFunction,
    pub uk: GridFunction,
    pub grad_u: GradientField,
    pub grad_uk: GradientField,
    /// `Phi` sampled on the gradient-space grid.
    pub phi_sampled: Sampled,
    /// `Phi_*` on the dual grid.
    pub phi_star: Sampled,
    /// `(Phi_*)_K` and its conjugate `Phi_{*K*}`.
    pub sym: GaugeSymmetric,
    pub lhs: f64,
    pub rhs: f64,
    pub err: f64,
    pub warnings: Vec<String>,
}

fn max_gradient(g: &GradientField) -> f64 {
    g.max_abs().iter().copied().fold(0.0, f64::max)
}

/// Compute `u^K`, `Phi_*`, `Phi_{*K*}` and both functionals on the grid of `u`.
pub fn evaluate(u: &GridFunction, phi: &YoungND, body: &ConvexBody, cfg: &VerifyConfig) -> Result<Evaluation> {
    let d = u.grid.dim();
    if phi.dim() != d || body.dim() != d {
        return Err(Error::Invalid("dimensions of u, Phi and K differ".into()));
    }
    u.check_support()?;
    let uk = symmetral(u, body)?;
    let grad_u = gradient(u);
    let grad_uk = gradient(&uk);
    let rhs = dirichlet_functional(u, phi)?;
    let g_max = max_gradient(&grad_u).max(max_gradient(&grad_uk)).max(1e-6);
    let mut warnings = Vec::new();

    let cells = u.grid.shape().iter().copied().max().unwrap_or(2) - 1;
    let dual_res = cfg.dual_res.unwrap_or(2 * cells + 1).max(33);
    let mut scale = 2.0;
    let (phi_sampled, phi_star, sym) = loop {
        let primal = match phi {
            YoungND::Sampled(s) => s.grid.clone(),
            _ => Grid::cube(d, scale * g_max, dual_res)?,
        };
        let phi_sampled = phi.sample(&primal)?;
        let dual = crate::young::default_dual_grid(&phi_sampled, 0.5);
        let phi_star = conjugate_fast(&phi_sampled, &dual);
        let cap = trusted_level(&phi_star, &primal);
        let sym = integrand_symmetral_capped(&phi_star, body, cap)?;
        let sigma_max = (0..uk.grid.len())
            .map(|i| sym.body.support(grad_uk.at(i)))
            .fold(0.0, f64::max);
        if sigma_max <= sym.reliable_slope() {
            break (phi_sampled, phi_star, sym);
        }
        if matches!(phi, YoungND::Sampled(_)) || scale > 16.0 {
            return Err(Error::LevelGridTooShort(format!(
                "conjugate maximizer leaves the tabulated range (slope {sigma_max} > {})",
                sym.reliable_slope()
            )));
        }
        scale *= 2.0;
    };
    warnings.extend(sym.warnings.iter().cloned());

    let vol = uk.grid.cell_volume();
    let terms: Vec<f64> = (0..uk.grid.len()).map(|i| sym.eval_conj(grad_uk.at(i))).collect();
    let lhs = tree_sum(&terms) * vol;

    let err = error_model(u, &grad_u, &uk, &grad_uk, phi, &phi_sampled, &sym, g_max);
    Ok(Evaluation { u: u.clone(), uk, grad_u, grad_uk, phi_sampled, phi_star, sym, lhs, rhs, err, warnings })
}

/// Largest level below which `Phi_*` on the dual grid is exact up to the
/// discretization: its discrete slopes stay inside the primal box.
fn trusted_level(phi_star: &Sampled, primal: &Grid) -> f64 {
    let g = &phi_star.grid;
    let d = g.dim();
    let grads = crate::calculus::gradient_values(g, &phi_star.values);
    let mut cap = f64::INFINITY;
    for i in 0..g.len() {
        let v = phi_star.values[i];
        if !v.is_finite() {
            continue;
        }
        let out = (0..d).any(|k| {
            let s = grads[i * d + k];
            let lo = primal.lo()[k];
            let hi = primal.hi()[k];
            let margin = 0.02 * (hi - lo);
            s.is_finite() && (s < lo + margin || s > hi - margin)
        });
        if out {
            cap = cap.min(v);
        }
    }
    cap
}

#[allow(clippy::too_many_arguments)]
fn error_model(
    u: &GridFunction,
    gu: &GradientField,
    uk: &GridFunction,
    gk: &GradientField,
    phi: &YoungND,
    phi_sampled: &Sampled,
    sym: &GaugeSymmetric,
    g_max: f64,
) -> f64 {
    let supp_u = (0..u.grid.len()).filter(|&i| gu.norm(i) > MIN_GRADIENT).count() as f64 * u.grid.cell_volume();
    let supp_k = (0..uk.grid.len()).filter(|&i| gk.norm(i) > MIN_GRADIENT).count() as f64 * uk.grid.cell_volume();
    let lip = lipschitz_on(phi, phi_sampled, g_max);
    let ds = sym.s_max / crate::rearrange::PROFILE_LEVELS as f64;
    ERR_C1 * u.grid.h() * lip * supp_u + ERR_C2 * ds * supp_k
}

/// Largest discrete slope of `Phi` over `[-r, r]^n`.
fn lipschitz_on(_phi: &YoungND, s: &Sampled, r: f64) -> f64 {
    let g = &s.grid;
    let d = g.dim();
    let mut lip: f64 = 0.0;
    for i in 0..g.len() {
        let p = g.node(i);
        if p.iter().any(|x| x.abs() > r * (1.0 + 1e-9)) {
            continue;
        }
        let m = g.unravel(i);
        for k in 0..d {
            if m[k] + 1 < g.shape()[k] {
                let (a, b) = (s.values[i], s.values[i + g.stride(k)]);
                if a.is_finite() && b.is_finite() {
                    lip = lip.max((b - a).abs() / g.spacing(k));
                }
            }
        }
    }
    lip
}

fn verdict_for(steps: &[RefinementStep]) -> Verdict {
    let fine = steps.last().expect("at least one grid");
    if fine.lhs.is_nan() || fine.rhs.is_nan() || (fine.lhs.is_infinite() && fine.rhs.is_infinite()) {
        return Verdict::Indeterminate;
    }
    if fine.rhs == f64::INFINITY {
        return Verdict::InequalityHolds;
    }
    let gap = fine.excess;
    if gap > fine.err {
        if steps.len() < 2 {
            return Verdict::Indeterminate;
        }
        let coarse = &steps[steps.len() - 2];
        return if gap > coarse.excess { Verdict::Violation } else { Verdict::EqualityWithinTol };
    }
    if gap >= -fine.err {
        Verdict::EqualityWithinTol
    } else {
        Verdict::InequalityHolds
    }
}

/// Full verification: functionals on the given grid (and on the grid
/// coarsened by two), the per-level chain and the verdict.
pub fn verify_inequality(u: &GridFunction, phi: &YoungND, body: &ConvexBody, cfg: &VerifyConfig) -> Result<Report> {
    let ev = evaluate(u, phi, body, cfg)?;
    let mut refinement = Vec::new();
    if cfg.refine {
        if let Some(uc) = u.coarsen() {
            if let Ok(c) = evaluate(&uc, phi, body, cfg) {
                refinement.push(step(&c));
            }
        }
    }
    refinement.push(step(&ev));
    let diag = extremality_diagnostics(&ev, phi, cfg)?;
    let verdict = verdict_for(&refinement);
    let relative_gap = if ev.rhs != 0.0 { (ev.lhs - ev.rhs) / ev.rhs.abs() } else { ev.lhs - ev.rhs };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        lhs: ev.lhs,
        rhs: ev.rhs,
        relative_gap,
        err: ev.err,
        verdict,
        per_level: diag.levels,
        refinement,
        warnings: ev.warnings,
        config: cfg.clone(),
    })
}

fn step(ev: &Evaluation) -> RefinementStep {
    RefinementStep { h: ev.u.grid.h(), lhs: ev.lhs, rhs: ev.rhs, excess: ev.lhs - ev.rhs, err: ev.err }
}

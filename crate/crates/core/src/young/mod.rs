//! n-dimensional Young functions: closed-form catalog entries and sampled
//! tables with `+inf` entries.

pub mod conjugate;
pub mod levels;
mod young1d;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{grid_from_text, grid_to_text, sample_nodes, Grid};
use crate::linalg::{dot, inverse, mat_vec, norm, transpose};

pub use conjugate::{
    conjugate_at, conjugate_fast, conjugate_oracle, default_dual_grid, involution_check, llt_1d,
    InvolutionReport,
};
pub use levels::{
    conjugate_via_levelsets, growth_limits, level_grid, maximizer_profile, radial_factorization,
    sublevel_set, GrowthReport, LevelSupport, MaximizerProfile, RadialFactorization, SublevelSet,
};
pub use young1d::Young1D;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Catalog {
    /// `|xi|^2 / 2`.
    Quad,
    /// `sum_i |xi_i|^{p_i}`.
    PNorm { p: Vec<f64> },
    /// `sum_k A_k(|(M xi)_k|)` with `M` row-major `k x n`.
    Matrix { a: Vec<Young1D>, m: Vec<f64>, label: String },
    /// `A(|xi|)`.
    Radial { a: Young1D },
    /// `A(h_L(xi))`.
    SupportRadial { a: Young1D, body: ConvexBody },
    /// `A(gauge_L(xi))`.
    GaugeRadial { a: Young1D, body: ConvexBody },
    /// `0` on `L`, `+inf` outside.
    Indicator { body: ConvexBody },
}

/// Young function sampled on a grid. Values outside the box count as `+inf`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sampled {
    pub grid: Grid,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum YoungND {
    Catalog { dim: usize, kind: Catalog },
    Sampled(Sampled),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub value_at_zero: f64,
    pub convexity_violations: usize,
    pub triples_checked: usize,
    pub finite_near_zero: bool,
    pub min_on_boundary: f64,
    pub ok: bool,
}

impl Sampled {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for {} nodes", values.len(), grid.len()));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return invalid("sampled Young function has NaN or -inf entries");
        }
        Ok(Sampled { grid, values })
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.grid.interpolate(&self.values, xi).unwrap_or(f64::INFINITY)
    }

    pub fn finite_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_finite()).collect()
    }

    pub fn max_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        grid_to_text(&self.grid, &self.values)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (grid, values) = grid_from_text(text)?;
        Sampled::new(grid, values)
    }

    /// Lower convex envelope through the double conjugate; returns the
    /// envelope and the largest pointwise change at finite nodes.
    pub fn convexify(&self) -> (Sampled, f64) {
        let dual = default_dual_grid(self, 1.0);
        let star = conjugate_fast(self, &dual);
        let back = conjugate_fast(&star, &self.grid);
        let mut dev: f64 = 0.0;
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&back.values)
            .map(|(&a, &b)| {
                if a.is_finite() {
                    dev = dev.max((a - b).abs());
                    b.min(a)
                } else {
                    a
                }
            })
            .collect();
        (Sampled { grid: self.grid.clone(), values }, dev)
    }
}

impl YoungND {
    pub fn catalog(dim: usize, kind: Catalog) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(dim));
        }
        match &kind {
            Catalog::PNorm { p } => {
                if p.len() != dim || p.iter().any(|&q| !(q >= 1.0)) {
                    return invalid("pnorm needs one exponent >= 1 per axis");
                }
            }
            Catalog::Matrix { a, m, .. } => {
                if m.len() != a.len() * dim {
                    return invalid("matrix shape does not match the A-list and dimension");
                }
            }
            Catalog::SupportRadial { body, .. } | Catalog::GaugeRadial { body, .. } | Catalog::Indicator { body } => {
                if body.dim() != dim {
                    return invalid("body dimension differs from the Young function dimension");
                }
                if !body.contains_origin_interior() {
                    return Err(Error::OriginNotInterior);
                }
            }
            _ => {}
        }
        Ok(YoungND::Catalog { dim, kind })
    }

    pub fn quad(dim: usize) -> Self {
        YoungND::Catalog { dim, kind: Catalog::Quad }
    }

    pub fn dim(&self) -> usize {
        match self {
            YoungND::Catalog { dim, .. } => *dim,
            YoungND::Sampled(s) => s.grid.dim(),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            YoungND::Sampled(s) => s.eval(xi),
            YoungND::Catalog { kind, .. } => match kind {
                Catalog::Quad => 0.5 * dot(xi, xi),
                Catalog::PNorm { p } => xi.iter().zip(p).map(|(x, q)| x.abs().powf(*q)).sum(),
                Catalog::Matrix { a, m, .. } => {
                    let y = mat_vec(m, xi);
                    y.iter().zip(a).map(|(v, ak)| ak.eval(*v)).sum()
                }
                Catalog::Radial { a } => a.eval(norm(xi)),
                Catalog::SupportRadial { a, body } => a.eval(body.support(xi).max(0.0)),
                Catalog::GaugeRadial { a, body } => a.eval(body.gauge_unchecked(xi)),
                Catalog::Indicator { body } => {
                    if body.gauge_unchecked(xi) <= 1.0 + 1e-12 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
            },
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Sampled> {
        if grid.dim() != self.dim() {
            return invalid("grid dimension differs from the Young function dimension");
        }
        Sampled::new(grid.clone(), sample_nodes(grid, |x| self.eval(x)))
    }

    /// Closed-form conjugate, where the catalog provides one.
    pub fn conjugate_closed_form(&self) -> Option<YoungND> {
        let YoungND::Catalog { dim, kind } = self else {
            return None;
        };
        let dim = *dim;
        let kind = match kind {
            Catalog::Quad => Catalog::Quad,
            Catalog::PNorm { p } => {
                let a: Option<Vec<Young1D>> = p.iter().map(|&q| Young1D::Power { c: 1.0, p: q }.conjugate()).collect();
                let mut m = vec![0.0; dim * dim];
                for k in 0..dim {
                    m[k * dim + k] = 1.0;
                }
                Catalog::Matrix { a: a?, m, label: "pnorm-conjugate".into() }
            }
            Catalog::Matrix { a, m, label } => {
                if a.len() != dim {
                    return None;
                }
                let conj: Option<Vec<Young1D>> = a.iter().map(|x| x.conjugate()).collect();
                let minv_t = transpose(&inverse(m, dim)?, dim);
                Catalog::Matrix { a: conj?, m: minv_t, label: format!("{label}-conjugate") }
            }
            Catalog::Radial { a } => Catalog::Radial { a: a.conjugate()? },
            Catalog::SupportRadial { a, body } => Catalog::GaugeRadial { a: a.conjugate()?, body: body.clone() },
            Catalog::GaugeRadial { a, body } => Catalog::SupportRadial { a: a.conjugate()?, body: body.clone() },
            Catalog::Indicator { body } => {
                Catalog::SupportRadial { a: Young1D::Power { c: 1.0, p: 1.0 }, body: body.clone() }
            }
        };
        Some(YoungND::Catalog { dim, kind })
    }

    /// Numerical checks of the Young function axioms on `[-half, half]^n`.
    pub fn validate(&self, half: f64, seed: u64) -> ValidationReport {
        let d = self.dim();
        let value_at_zero = self.eval(&vec![0.0; d]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = 1000;
        let mut violations = 0;
        for _ in 0..triples {
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-half..half)).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.gen_range(-half..half)).collect();
            let lam: f64 = rng.gen_range(0.0..1.0);
            let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
            let (fa, fb, fc) = (self.eval(&a), self.eval(&b), self.eval(&c));
            if !(fa.is_finite() && fb.is_finite()) {
                continue;
            }
            let rhs = lam * fa + (1.0 - lam) * fb;
            if fc > rhs + 1e-9 * (1.0 + rhs.abs()) + self.tolerance_slack(half) {
                violations += 1;
            }
        }
        let eps = 1e-3 * half;
        let finite_near_zero = crate::linalg::directions(d, 16)
            .iter()
            .all(|u| self.eval(&u.iter().map(|x| x * eps).collect::<Vec<_>>()).is_finite());
        let min_on_boundary = crate::linalg::directions(d, 64)
            .iter()
            .map(|u| {
                let m = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                self.eval(&u.iter().map(|x| x * half / m).collect::<Vec<_>>())
            })
            .fold(f64::INFINITY, f64::min);
        let ok = value_at_zero.abs() <= 1e-9 && violations == 0 && finite_near_zero && min_on_boundary > 0.0;
        ValidationReport {
            value_at_zero,
            convexity_violations: violations,
            triples_checked: triples,
            finite_near_zero,
            min_on_boundary,
            ok,
        }
    }

    /// Interpolation error allowance for sampled functions.
    fn tolerance_slack(&self, _half: f64) -> f64 {
        match self {
            YoungND::Sampled(s) => {
                let h = s.grid.h();
                let m = s.max_finite();
                m * h * h
            }
            _ => 0.0,
        }
    }

    /// Parse the catalog grammar in dimension `dim`:
    /// `quad`, `pnorm:p1,p2[,p3]`, `powerlog:p,q,c`, `exp:alpha`,
    /// `norm:<A>`, `radial:<A>:<body>`, `gauge:<A>:<body>`,
    /// `matrix:<A>;<A>..:<row>;<row>..`, `sep:<A>;<A>..`,
    /// `trud:p,q,alpha,c`, `trud1:p,beta`, `indicator:<body>`, or a path to a
    /// sampled table (`*.csv`, `*.txt`).
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let spec = spec.trim();
        if spec.ends_with(".csv") || spec.ends_with(".txt") {
            let text = std::fs::read_to_string(spec)?;
            return Ok(YoungND::Sampled(Sampled::from_text(&text)?));
        }
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let floats = |s: &str| crate::geometry::parse_floats(s);
        let list = |s: &str| -> Result<Vec<Young1D>> { s.split(';').map(Young1D::parse).collect() };
        let kind = match name {
            "quad" => Catalog::Quad,
            "pnorm" => {
                let p = floats(rest)?;
                return YoungND::catalog(p.len(), Catalog::PNorm { p });
            }
            "powerlog" => match floats(rest)?.as_slice() {
                [p, q, c] => Catalog::Radial { a: Young1D::PowerLog { p: *p, q: *q, c: *c } },
                _ => return Err(Error::Parse(format!("powerlog needs p,q,c: {spec}"))),
            },
            "exp" => match floats(rest)?.as_slice() {
                [a] => Catalog::Radial { a: Young1D::Exp { alpha: *a } },
                _ => return Err(Error::Parse(format!("exp needs alpha: {spec}"))),
            },
            "norm" => Catalog::Radial { a: Young1D::parse(rest)? },
            "radial" | "gauge" => {
                let (a, b) = split_last_colon_group(rest)?;
                let a = Young1D::parse(a)?;
                let body = ConvexBody::parse(b)?;
                if name == "radial" {
                    Catalog::SupportRadial { a, body }
                } else {
                    Catalog::GaugeRadial { a, body }
                }
            }
            "matrix" => {
                let (a, m) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| Error::Parse(format!("matrix needs <A-list>:<rows>: {spec}")))?;
                let a = list(a)?;
                let rows: Vec<Vec<f64>> = m.split(';').map(floats).collect::<Result<_>>()?;
                if rows.len() != a.len() || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Parse(format!("matrix rows do not match: {spec}")));
                }
                Catalog::Matrix { a, m: rows.concat(), label: "matrix".into() }
            }
            "sep" => {
                let a = list(rest)?;
                if a.len() != dim {
                    return Err(Error::Parse(format!("sep needs one A per axis: {spec}")));
                }
                let mut m = vec![0.0; dim * dim];
                for k in 0..dim {
                    m[k * dim + k] = 1.0;
                }
                Catalog::Matrix { a, m, label: "sep".into() }
            }
            "trud" => match floats(rest)?.as_slice() {
                [p, q, alpha, c] => return trud(*p, *q, *alpha, *c),
                _ => return Err(Error::Parse(format!("trud needs p,q,alpha,c: {spec}"))),
            },
            "trud1" => match floats(rest)?.as_slice() {
                [p, beta] => return trud1(*p, *beta),
                _ => return Err(Error::Parse(format!("trud1 needs p,beta: {spec}"))),
            },
            "indicator" => Catalog::Indicator { body: ConvexBody::parse(rest)? },
            _ => return Err(Error::Parse(format!("unknown Young function {spec}"))),
        };
        YoungND::catalog(dim, kind)
    }
}

/// `A(...)` may contain commas and parentheses; the body follows the last
/// colon outside parentheses.
fn split_last_colon_group(s: &str) -> Result<(&str, &str)> {
    let mut depth = 0i32;
    let mut split = None;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ':' if depth == 0 => {
                split = Some(i);
                break;
            }
            _ => {}
        }
    }
    let i = split.ok_or_else(|| Error::Parse(format!("expected <A>:<body>, got {s}")))?;
    Ok((&s[..i], &s[i + 1..]))
}

/// `|xi_1 - xi_2|^p + |xi_1|^q log(c + |xi_1|)^alpha` in the plane.
pub fn trud(p: f64, q: f64, alpha: f64, c: f64) -> Result<YoungND> {
    YoungND::catalog(
        2,
        Catalog::Matrix {
            a: vec![Young1D::power(1.0, p)?, Young1D::PowerLog { p: q, q: alpha, c }],
            m: vec![1.0, -1.0, 1.0, 0.0],
            label: "trud".into(),
        },
    )
}

/// `|xi_1 + 3 xi_2|^p + exp(|2 xi_1 - xi_2|^beta) - 1` in the plane.
pub fn trud1(p: f64, beta: f64) -> Result<YoungND> {
    YoungND::catalog(
        2,
        Catalog::Matrix {
            a: vec![Young1D::power(1.0, p)?, Young1D::Exp { alpha: beta }],
            m: vec![1.0, 3.0, 2.0, -1.0],
            label: "trud1".into(),
        },
    )
}

//! Young functions of one variable: convex, left-continuous, `A(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Young1D {
    /// `c t^p`, `p >= 1`.
    Power { c: f64, p: f64 },
    /// `t^p log(c + t)^q`.
    PowerLog { p: f64, q: f64, c: f64 },
    /// `exp(t^alpha) - 1`.
    Exp { alpha: f64 },
    /// `0` on `[0, a]`, `+inf` beyond.
    Indicator { a: f64 },
    /// Piecewise linear through `(t[i], v[i])`, `t[0] = 0`, `+inf` beyond
    /// `t[last]`.
    Tabulated { t: Vec<f64>, v: Vec<f64> },
    /// `max(0, max_i (slope[i] s - icpt[i]))`, the conjugate of a table.
    MaxAffine { slope: Vec<f64>, icpt: Vec<f64> },
}

const NUMERIC_NODES: usize = 8192;

impl Young1D {
    pub fn power(c: f64, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !(c > 0.0) {
            return invalid(format!("power needs p >= 1 and c > 0, got p={p}, c={c}"));
        }
        Ok(Young1D::Power { c, p })
    }

    /// `max(0, max_i (t[i] s - v[i]))`, reduced to the lower hull of the
    /// points so evaluation is a binary search.
    pub fn max_affine(t: &[f64], v: &[f64]) -> Self {
        let (slope, icpt) = lower_hull_1d(t, v);
        Young1D::MaxAffine { slope, icpt }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            Young1D::Power { c, p } => c * t.powf(*p),
            Young1D::PowerLog { p, q, c } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*p) * (c + t).ln().powf(*q)
                }
            }
            Young1D::Exp { alpha } => t.powf(*alpha).exp_m1(),
            Young1D::Indicator { a } => {
                if t <= *a {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Young1D::Tabulated { t: ts, v } => {
                let n = ts.len();
                if t > ts[n - 1] {
                    return f64::INFINITY;
                }
                let i = ts.partition_point(|&x| x < t);
                if i == 0 {
                    return v[0];
                }
                let (t0, t1) = (ts[i - 1], ts[i]);
                if t1 == t0 {
                    return v[i - 1];
                }
                v[i - 1] + (t - t0) / (t1 - t0) * (v[i] - v[i - 1])
            }
            Young1D::MaxAffine { slope, icpt } => max_affine(slope, icpt, t),
        }
    }

    /// Right-continuous generalized inverse `sup { t >= 0 : A(t) <= s }`.
    pub fn inverse(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            Young1D::Power { c, p } => (s / c).powf(1.0 / p),
            Young1D::Exp { alpha } => s.ln_1p().powf(1.0 / alpha),
            Young1D::Indicator { a } => *a,
            Young1D::Tabulated { t, v } => {
                // last node with v <= s, then interpolate into the next one
                let n = t.len();
                let i = v.partition_point(|&x| x <= s);
                if i >= n {
                    return t[n - 1];
                }
                if i == 0 {
                    return 0.0;
                }
                let (v0, v1) = (v[i - 1], v[i]);
                if v1 == v0 {
                    return t[i];
                }
                t[i - 1] + (s - v0) / (v1 - v0) * (t[i] - t[i - 1])
            }
            _ => {
                let mut hi = 1.0;
                while self.eval(hi) <= s && hi < 1e300 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid) <= s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// Closed-form conjugate where one exists.
    pub fn conjugate(&self) -> Option<Young1D> {
        match self {
            Young1D::Power { c, p } => {
                if *p == 1.0 {
                    Some(Young1D::Indicator { a: *c })
                } else {
                    let q = p / (p - 1.0);
                    Some(Young1D::Power { c: (p - 1.0) * c * (c * p).powf(-q), p: q })
                }
            }
            Young1D::Indicator { a } => Some(Young1D::Power { c: *a, p: 1.0 }),
            Young1D::Tabulated { t, v } => Some(Young1D::max_affine(t, v)),
            Young1D::MaxAffine { slope, icpt } => {
                let (t, v) = lower_hull_1d(slope, icpt);
                Some(Young1D::Tabulated { t, v })
            }
            Young1D::PowerLog { .. } | Young1D::Exp { .. } => None,
        }
    }

    /// Conjugate valid for slopes up to `s_max`, numerically when no closed
    /// form exists (exact conjugate of the piecewise linear interpolant on a
    /// dense table).
    pub fn conjugate_up_to(&self, s_max: f64) -> Young1D {
        if let Some(c) = self.conjugate() {
            return c;
        }
        let mut t_max = 1.0;
        while self.slope(t_max) < s_max && t_max < 1e6 {
            t_max *= 2.0;
        }
        let t: Vec<f64> = (0..=NUMERIC_NODES)
            .map(|i| t_max * i as f64 / NUMERIC_NODES as f64)
            .collect();
        let v: Vec<f64> = t.iter().map(|&x| self.eval(x)).collect();
        Young1D::max_affine(&t, &v)
    }

    /// Right derivative by a forward difference.
    pub fn slope(&self, t: f64) -> f64 {
        let d = 1e-6 * (1.0 + t);
        (self.eval(t + d) - self.eval(t)) / d
    }

    /// Parse `pow(p[,c])`, `powerlog(p,q,c)`, `exp(alpha)`, `ind(a)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("missing ')' in {spec}")))?;
                (n, crate::geometry::parse_floats(inner)?)
            }
            None => (spec, Vec::new()),
        };
        let bad = || Error::Parse(format!("bad arguments in {spec}"));
        match name {
            "pow" => match args.as_slice() {
                [p] => Young1D::power(1.0, *p),
                [p, c] => Young1D::power(*c, *p),
                _ => Err(bad()),
            },
            "powerlog" => match args.as_slice() {
                [p, q, c] if *p >= 1.0 && *c >= 1.0 && *q >= 0.0 => {
                    Ok(Young1D::PowerLog { p: *p, q: *q, c: *c })
                }
                _ => Err(bad()),
            },
            "exp" => match args.as_slice() {
                [a] if *a >= 1.0 => Ok(Young1D::Exp { alpha: *a }),
                _ => Err(bad()),
            },
            "ind" => match args.as_slice() {
                [a] if *a > 0.0 => Ok(Young1D::Indicator { a: *a }),
                _ => Err(bad()),
            },
            _ => Err(Error::Parse(format!("unknown one-dimensional Young function {spec}"))),
        }
    }
}

fn max_affine(x: &[f64], y: &[f64], s: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    // hull edge slopes increase; the maximizer is the first vertex whose
    // outgoing edge is at least as steep as `s`
    let edges = x.len() - 1;
    let j = partition_by(edges, |j| (y[j + 1] - y[j]) < s * (x[j + 1] - x[j]));
    (x[j] * s - y[j]).max(0.0)
}

fn partition_by(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Lower convex hull of `(x[i], y[i])`, `x` ascending.
pub(crate) fn lower_hull_1d(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hx: Vec<f64> = Vec::with_capacity(x.len());
    let mut hy: Vec<f64> = Vec::with_capacity(x.len());
    for (&a, &b) in x.iter().zip(y) {
        if !b.is_finite() {
            continue;
        }
        while hx.len() >= 2 {
            let k = hx.len();
            let cross = (hx[k - 1] - hx[k - 2]) * (b - hy[k - 2]) - (hy[k - 1] - hy[k - 2]) * (a - hx[k - 2]);
            if cross <= 0.0 {
                hx.pop();
                hy.pop();
            } else {
                break;
            }
        }
        hx.push(a);
        hy.push(b);
    }
    (hx, hy)
}

//! Closed-form test functions `u` and their sampling on automatic boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::grid::{Grid, GridFunction, SUPPORT_MARGIN};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    /// Row-major inverse shape matrix: the bump is supported where
    /// `|A (x - c)| <= 1`.
    pub shape: Vec<f64>,
    pub height: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Field {
    /// `max(0, 1 - gauge_L(x))`.
    Tent(ConvexBody),
    /// `max(0, 1 - gauge_L(x)^2)^2`.
    Bump(ConvexBody),
    /// `min(max(1 - |x|^2 / 2, 0), 1)`.
    Cap { dim: usize },
    /// Sum of smooth elliptic bumps `h max(0, 1 - |A(x - c)|^2)^2`.
    Bumps(Vec<Bump>),
}

impl Field {
    pub fn dim(&self) -> usize {
        match self {
            Field::Tent(b) | Field::Bump(b) => b.dim(),
            Field::Cap { dim } => *dim,
            Field::Bumps(v) => v[0].center.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Field::Tent(b) => (1.0 - b.gauge_unchecked(x)).max(0.0),
            Field::Bump(b) => {
                let g = b.gauge_unchecked(x);
                (1.0 - g * g).max(0.0).powi(2)
            }
            Field::Cap { .. } => (1.0 - 0.5 * x.iter().map(|v| v * v).sum::<f64>()).clamp(0.0, 1.0),
            Field::Bumps(v) => v
                .iter()
                .map(|b| {
                    let d = x.len();
                    let y: Vec<f64> = (0..d).map(|k| x[k] - b.center[k]).collect();
                    let r2: f64 = (0..d)
                        .map(|i| (0..d).map(|j| b.shape[i * d + j] * y[j]).sum::<f64>().powi(2))
                        .sum();
                    b.height * (1.0 - r2).max(0.0).powi(2)
                })
                .sum(),
        }
    }

    /// Half widths of a box containing the support.
    pub fn extent(&self) -> Vec<f64> {
        match self {
            Field::Tent(b) | Field::Bump(b) => b.extent(),
            Field::Cap { dim } => vec![2f64.sqrt(); *dim],
            Field::Bumps(v) => {
                let d = v[0].center.len();
                let mut e = vec![0.0f64; d];
                for b in v {
                    // support is c + A^{-1} B, bounded by row norms of A^{-1}
                    let inv = crate::linalg::inverse(&b.shape, d).expect("invertible bump shape");
                    for k in 0..d {
                        let r: f64 = (0..d).map(|j| inv[k * d + j].powi(2)).sum::<f64>().sqrt();
                        e[k] = e[k].max(b.center[k].abs() + r);
                    }
                }
                e
            }
        }
    }

    /// Sample on a box around the support with `res` cells per axis and a
    /// rim of at least `SUPPORT_MARGIN` cells plus 15%.
    pub fn sample(&self, res: usize) -> Result<GridFunction> {
        let e = self.extent();
        let half: Vec<f64> = e
            .iter()
            .map(|x| {
                let h = 1.15 * x;
                h + (SUPPORT_MARGIN + 2) as f64 * 2.0 * h / res as f64
            })
            .collect();
        let grid = Grid::centered(&half, res + 1)?;
        self.sample_on(grid)
    }

    pub fn sample_on(&self, grid: Grid) -> Result<GridFunction> {
        let u = GridFunction::sample(grid, |x| self.eval(x))?;
        u.check_support()?;
        Ok(u)
    }

    /// `count` bumps with random centers, shapes and heights.
    pub fn random(dim: usize, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(1..=3);
        let bumps = (0..count)
            .map(|_| {
                let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.4..0.4)).collect();
                let mut shape = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        shape[i * dim + j] = if i == j {
                            rng.gen_range(1.2..2.5)
                        } else {
                            rng.gen_range(-0.5..0.5)
                        };
                    }
                }
                Bump { center, shape, height: rng.gen_range(0.5..1.5) }
            })
            .collect();
        Field::Bumps(bumps)
    }

    /// Two disjoint bumps: super-level sets are not convex.
    pub fn two_bump() -> Field {
        let s = vec![2.0, 0.0, 0.0, 2.0];
        Field::Bumps(vec![
            Bump { center: vec![-0.7, 0.0], shape: s.clone(), height: 1.0 },
            Bump { center: vec![0.7, 0.0], shape: s, height: 0.8 },
        ])
    }

    /// A bump over an off-center, asymmetric ellipse.
    pub fn asymmetric() -> Field {
        Field::Bumps(vec![
            Bump { center: vec![0.2, -0.1], shape: vec![1.6, 0.6, 0.0, 1.1], height: 1.0 },
            Bump { center: vec![-0.25, 0.2], shape: vec![2.2, 0.0, -0.4, 2.6], height: 0.6 },
        ])
    }

    /// `tent:<body>`, `bump:<body>`, `cap[:dim]`, `twobump`, `asym`,
    /// `random:<seed>`.
    pub fn parse(spec: &str) -> Result<Field> {
        let (name, arg) = spec.trim().split_once(':').unwrap_or((spec.trim(), ""));
        match name {
            "tent" => Ok(Field::Tent(ConvexBody::parse(arg)?)),
            "bump" => Ok(Field::Bump(ConvexBody::parse(arg)?)),
            "cap" => Ok(Field::Cap { dim: if arg.is_empty() { 2 } else { arg.parse().map_err(|_| Error::Parse(spec.into()))? } }),
            "twobump" => Ok(Field::two_bump()),
            "asym" => Ok(Field::asymmetric()),
            "random" => Ok(Field::random(2, arg.parse().map_err(|_| Error::Parse(format!("bad seed in {spec}")))?)),
            _ => Err(Error::Parse(format!("unknown field {spec}"))),
        }
    }
}

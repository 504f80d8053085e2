//! Convex bodies given by vertices: support function, gauge, polar, volume.

mod hull;
pub mod perimeter;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cross3, directions, dot, sub};

pub use hull::{hull2, hull3};
pub use perimeter::{anisotropic_perimeter, superlevel_perimeter, PerimeterMode};

/// Vertex count used for the polygonal disc when none is given.
pub const DEFAULT_DISC_VERTICES: usize = 256;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Facet {
    /// Outward unit normal.
    pub normal: Vec<f64>,
    /// Support value in the normal direction.
    pub offset: f64,
}

/// Compact convex body with nonempty interior, stored as hull vertices
/// together with its facet inequalities `normal . x <= offset`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    /// Outward triangles, only in dimension 3.
    triangles: Vec<[usize; 3]>,
    origin_interior: bool,
}

impl ConvexBody {
    /// Convex hull of the given points. Interior points are discarded.
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(dim));
        }
        if points.is_empty() {
            return invalid("empty vertex list");
        }
        if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
            return invalid("vertex with wrong length or non-finite coordinate");
        }
        let (vertices, facets, triangles) = if dim == 2 {
            let v = hull2(points)?;
            let m = v.len();
            let facets = (0..m)
                .map(|i| {
                    let (a, b) = (&v[i], &v[(i + 1) % m]);
                    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                    let len = dx.hypot(dy);
                    let normal = vec![dy / len, -dx / len];
                    let offset = dot(&normal, a);
                    Facet { normal, offset }
                })
                .collect::<Vec<_>>();
            (v, facets, Vec::new())
        } else {
            let (v, tri) = hull3(points)?;
            let facets = tri
                .iter()
                .map(|t| {
                    let nr = cross3(&sub(&v[t[1]], &v[t[0]]), &sub(&v[t[2]], &v[t[0]]));
                    let len = dot(&nr, &nr).sqrt();
                    let normal: Vec<f64> = nr.iter().map(|x| x / len).collect();
                    let offset = dot(&normal, &v[t[0]]);
                    Facet { normal, offset }
                })
                .collect::<Vec<_>>();
            (v, facets, tri)
        };
        let scale = vertices
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        let origin_interior = facets.iter().all(|f| f.offset > 1e-12 * scale);
        let body = ConvexBody { dim, vertices, facets, triangles, origin_interior };
        if body.volume() <= 1e-14 * scale.powi(dim as i32) {
            return Err(Error::Degenerate("zero volume".into()));
        }
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn contains_origin_interior(&self) -> bool {
        self.origin_interior
    }

    /// `h_L(xi) = max <xi, v>` over vertices.
    pub fn support(&self, xi: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, xi))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minkowski functional `min { l >= 0 : x in l L }`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        if !self.origin_interior {
            return Err(Error::OriginNotInterior);
        }
        Ok(self.gauge_unchecked(x))
    }

    /// Gauge without the interior check; callers have validated the body.
    pub(crate) fn gauge_unchecked(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| dot(&f.normal, x) / f.offset)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset + tol)
    }

    /// Polar body `{ x : <x, y> <= 1 for all y in L }`, built from facet
    /// duality: every facet `(nu, h)` becomes the vertex `nu / h`.
    pub fn polar(&self) -> Result<ConvexBody> {
        if !self.origin_interior {
            return Err(Error::OriginNotInterior);
        }
        let pts: Vec<Vec<f64>> = self
            .facets
            .iter()
            .map(|f| f.normal.iter().map(|v| v / f.offset).collect())
            .collect();
        ConvexBody::new(self.dim, &dedup_points(pts, 1e-12))
    }

    pub fn volume(&self) -> f64 {
        if self.dim == 2 {
            let v = &self.vertices;
            let m = v.len();
            0.5 * (0..m)
                .map(|i| {
                    let (a, b) = (&v[i], &v[(i + 1) % m]);
                    a[0] * b[1] - a[1] * b[0]
                })
                .sum::<f64>()
        } else {
            self.triangles
                .iter()
                .map(|t| {
                    let c = cross3(&self.vertices[t[1]], &self.vertices[t[2]]);
                    dot(&self.vertices[t[0]], &c) / 6.0
                })
                .sum()
        }
    }

    /// Euclidean perimeter (dimension 2) or surface area (dimension 3).
    pub fn surface_area(&self) -> f64 {
        if self.dim == 2 {
            let v = &self.vertices;
            let m = v.len();
            (0..m)
                .map(|i| {
                    let (a, b) = (&v[i], &v[(i + 1) % m]);
                    (b[0] - a[0]).hypot(b[1] - a[1])
                })
                .sum()
        } else {
            self.triangles
                .iter()
                .map(|t| {
                    let c = cross3(
                        &sub(&self.vertices[t[1]], &self.vertices[t[0]]),
                        &sub(&self.vertices[t[2]], &self.vertices[t[0]]),
                    );
                    0.5 * dot(&c, &c).sqrt()
                })
                .sum()
        }
    }

    /// `scale * L + shift`; a negative scale is the point reflection.
    pub fn dilate_translate(&self, scale: f64, shift: &[f64]) -> Result<ConvexBody> {
        if scale == 0.0 || !scale.is_finite() {
            return invalid("scale must be finite and nonzero");
        }
        if shift.len() != self.dim {
            return invalid("shift has wrong dimension");
        }
        let pts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(shift).map(|(x, s)| scale * x + s).collect())
            .collect();
        ConvexBody::new(self.dim, &pts)
    }

    pub fn reflect(&self) -> ConvexBody {
        self.dilate_translate(-1.0, &vec![0.0; self.dim])
            .expect("reflection of a valid body")
    }

    /// Largest coordinate magnitude over the vertices.
    pub fn extent(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.vertices.iter().fold(0.0f64, |m, v| m.max(v[k].abs())))
            .collect()
    }

    /// Whether `L = -L`, testing that every reflected vertex lies in `L`.
    pub fn is_origin_symmetric(&self, tol: f64) -> bool {
        self.vertices.iter().all(|v| {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            self.contains(&neg, tol)
        })
    }

    pub fn square() -> Self {
        Self::rect(2.0, 2.0)
    }

    /// Axis-parallel box `[-w/2, w/2] x [-h/2, h/2]`.
    pub fn rect(w: f64, h: f64) -> Self {
        let (a, b) = (w / 2.0, h / 2.0);
        Self::new(2, &[vec![-a, -b], vec![a, -b], vec![a, b], vec![-a, b]]).expect("rectangle")
    }

    /// The unit ball of the 1-norm.
    pub fn cross() -> Self {
        Self::new(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]])
            .expect("cross")
    }

    /// Regular `n`-gon inscribed in the unit circle.
    pub fn disc(n: usize) -> Result<Self> {
        if n < 3 {
            return invalid("disc needs at least 3 vertices");
        }
        Self::new(2, &directions(2, n))
    }

    /// Regular hexagon with unit inradius and a vertex on the positive x-axis.
    pub fn hexagon() -> Self {
        let r = 2.0 / 3f64.sqrt();
        let pts: Vec<Vec<f64>> = directions(2, 6).iter().map(|d| vec![r * d[0], r * d[1]]).collect();
        Self::new(2, &pts).expect("hexagon")
    }

    /// Triangle with centroid at the origin: `{ x_i >= -1, x_1 + x_2 <= 1 }`.
    pub fn simplex() -> Self {
        Self::new(2, &[vec![-1.0, -1.0], vec![2.0, -1.0], vec![-1.0, 2.0]]).expect("simplex")
    }

    pub fn cube() -> Self {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push((0..3).map(|k| if i >> k & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
        Self::new(3, &pts).expect("cube")
    }

    pub fn octahedron() -> Self {
        let mut pts = Vec::new();
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = vec![0.0; 3];
                p[k] = s;
                pts.push(p);
            }
        }
        Self::new(3, &pts).expect("octahedron")
    }

    /// Polytope inscribed in the unit sphere with `n` Fibonacci vertices.
    pub fn ball(n: usize) -> Result<Self> {
        if n < 4 {
            return invalid("ball needs at least 4 vertices");
        }
        Self::new(3, &directions(3, n))
    }

    pub fn simplex3() -> Self {
        Self::new(
            3,
            &[
                vec![-1.0, -1.0, -1.0],
                vec![3.0, -1.0, -1.0],
                vec![-1.0, 3.0, -1.0],
                vec![-1.0, -1.0, 3.0],
            ],
        )
        .expect("simplex3")
    }

    /// Parse a body name: `square`, `disc[:n]`, `cross`, `hexagon`, `simplex`,
    /// `rect:w,h`, `cube`, `octahedron`, `ball[:n]`, `simplex3`,
    /// `polygon:<csv path>`, `scale*<name>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some((s, rest)) = spec.split_once('*') {
            let s: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad scale in {spec}")))?;
            let b = Self::parse(rest)?;
            return b.dilate_translate(s, &vec![0.0; b.dim]);
        }
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let count = |a: Option<&str>, d: usize| -> Result<usize> {
            match a {
                None => Ok(d),
                Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad vertex count in {spec}"))),
            }
        };
        match name {
            "square" => Ok(Self::square()),
            "cross" => Ok(Self::cross()),
            "hexagon" => Ok(Self::hexagon()),
            "simplex" => Ok(Self::simplex()),
            "disc" => Self::disc(count(arg, DEFAULT_DISC_VERTICES)?),
            "rect" => {
                let v = parse_floats(arg.unwrap_or(""))?;
                if v.len() != 2 || v[0] <= 0.0 || v[1] <= 0.0 {
                    return Err(Error::Parse(format!("rect needs two positive sides: {spec}")));
                }
                Ok(Self::rect(v[0], v[1]))
            }
            "cube" => Ok(Self::cube()),
            "octahedron" => Ok(Self::octahedron()),
            "ball" => Self::ball(count(arg, 1024)?),
            "simplex3" => Ok(Self::simplex3()),
            "polygon" => {
                let path = arg.ok_or_else(|| Error::Parse("polygon needs a csv path".into()))?;
                let text = std::fs::read_to_string(path)?;
                Self::from_csv(&text)
            }
            _ => Err(Error::Parse(format!("unknown body {spec}"))),
        }
    }

    /// One vertex per line, comma separated coordinates, `#` comments.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match parse_floats(line) {
                Ok(p) => pts.push(p),
                Err(e) if pts.is_empty() => {
                    // a header row of column names
                    if line.chars().any(|c| c.is_ascii_alphabetic()) {
                        continue;
                    }
                    return Err(e);
                }
                Err(e) => return Err(e),
            }
        }
        let dim = pts.first().map(|p| p.len()).unwrap_or(0);
        Self::new(dim, &pts)
    }
}

pub(crate) fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {t}"))))
        .collect()
}

fn dedup_points(pts: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| sub(&p, q).iter().all(|d| d.abs() <= tol * (1.0 + p[0].abs()))) {
            out.push(p);
        }
    }
    out
}

/// A norm `H = h_K` together with its dual `H_0 = gauge_K`.
#[derive(Clone, Debug)]
pub struct NormPair {
    body: ConvexBody,
}

impl NormPair {
    pub fn new(body: ConvexBody) -> Result<Self> {
        if !body.contains_origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        Ok(NormPair { body })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn h(&self, xi: &[f64]) -> f64 {
        self.body.support(xi)
    }

    pub fn h0(&self, x: &[f64]) -> f64 {
        self.body.gauge_unchecked(x)
    }
}

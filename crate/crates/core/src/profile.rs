//! Tabulated monotone functions of one variable and their generalized
//! inverses.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numfmt::fmt17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotone {
    Nondecreasing,
    Nonincreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Continuity {
    Left,
    Right,
}

/// Piecewise linear function through `(x[i], y[i])`, `x` ascending,
/// held constant outside `[x[0], x[last]]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Profile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub direction: Monotone,
    pub continuity: Continuity,
}

impl Profile {
    pub fn new(x: Vec<f64>, y: Vec<f64>, direction: Monotone, continuity: Continuity) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return invalid("profile needs matching nonempty columns");
        }
        if x.windows(2).any(|w| w[1] < w[0]) {
            return invalid("profile breakpoints must be ascending");
        }
        let p = Profile { x, y, direction, continuity };
        if !p.is_monotone(0.0) {
            return invalid("profile values are not monotone in the declared direction");
        }
        Ok(p)
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.y.windows(2).all(|w| match self.direction {
            Monotone::Nondecreasing => w[1] >= w[0] - tol,
            Monotone::Nonincreasing => w[1] <= w[0] + tol,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let (y0, y1) = (self.y[i - 1], self.y[i]);
        if x1 == x0 {
            return match self.continuity {
                Continuity::Right => y1,
                Continuity::Left => y0,
            };
        }
        y0 + (t - x0) / (x1 - x0) * (y1 - y0)
    }

    /// `inf { x : f(x) <= s }` for a nonincreasing profile; `x[last]` when
    /// the set is empty.
    pub fn inverse_nonincreasing(&self, s: f64) -> f64 {
        let n = self.x.len();
        if self.y[0] <= s {
            return self.x[0];
        }
        // first index whose value is <= s
        let i = self.y.partition_point(|&v| v > s);
        if i >= n {
            return self.x[n - 1];
        }
        let (y0, y1) = (self.y[i - 1], self.y[i]);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        if y0 == y1 {
            return x1;
        }
        x0 + (y0 - s) / (y0 - y1) * (x1 - x0)
    }

    /// `inf { x : f(x) >= s }` for a nondecreasing profile; `x[last]` when
    /// the set is empty.
    pub fn inverse_nondecreasing(&self, s: f64) -> f64 {
        let n = self.x.len();
        if self.y[0] >= s {
            return self.x[0];
        }
        let i = self.y.partition_point(|&v| v < s);
        if i >= n {
            return self.x[n - 1];
        }
        let (y0, y1) = (self.y[i - 1], self.y[i]);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        if y0 == y1 {
            return x1;
        }
        x0 + (s - y0) / (y1 - y0) * (x1 - x0)
    }

    /// Centered difference quotient with step `delta`.
    pub fn derivative(&self, t: f64, delta: f64) -> f64 {
        (self.eval(t + delta) - self.eval(t - delta)) / (2.0 * delta)
    }

    pub fn to_csv(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# profile: {name} direction={:?} continuity={:?}",
            self.direction, self.continuity
        );
        let _ = writeln!(s, "x,y");
        for (x, y) in self.x.iter().zip(&self.y) {
            let _ = writeln!(s, "{},{}", fmt17(*x), fmt17(*y));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut direction = Monotone::Nonincreasing;
        let mut continuity = Continuity::Right;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line == "x,y" {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if h.contains("direction=Nondecreasing") {
                    direction = Monotone::Nondecreasing;
                }
                if h.contains("continuity=Left") {
                    continuity = Continuity::Left;
                }
                continue;
            }
            let v = crate::geometry::parse_floats(line)?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("profile row needs two columns: {line}")));
            }
            x.push(v[0]);
            y.push(v[1]);
        }
        Profile::new(x, y, direction, continuity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_inverses() {
        let p = Profile::new(vec![0.0, 1.0, 2.0], vec![4.0, 2.0, 2.0], Monotone::Nonincreasing, Continuity::Right)
            .unwrap();
        assert_eq!(p.inverse_nonincreasing(3.0), 0.5);
        assert_eq!(p.inverse_nonincreasing(2.0), 1.0);
        assert_eq!(p.inverse_nonincreasing(5.0), 0.0);
        assert_eq!(p.inverse_nonincreasing(1.0), 2.0);
        let back = Profile::from_csv(&p.to_csv("b")).unwrap();
        assert_eq!(back.y, p.y);
        assert!(Profile::new(vec![0.0, 1.0], vec![0.0, 1.0], Monotone::Nonincreasing, Continuity::Right).is_err());
    }
}

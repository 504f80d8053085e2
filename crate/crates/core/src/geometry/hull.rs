//! Convex hulls in the plane and in space.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{cross3, dot, sub};

/// Counter-clockwise hull vertices (collinear points dropped).
pub fn hull2(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!("{} points", points.len())));
    }
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let scale = pts
        .iter()
        .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale * scale;
    let turn = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::Degenerate("points are collinear".into()));
    }
    Ok(lower.into_iter().map(|p| p.to_vec()).collect())
}

/// Hull in space: returns the distinct vertices and outward oriented
/// triangles indexing into them.
pub fn hull3(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<[usize; 3]>)> {
    let n = points.len();
    if n < 4 {
        return Err(Error::Degenerate(format!("{n} points")));
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let eps = 1e-10 * scale;

    let i0 = (0..n).min_by(|&a, &b| points[a][0].total_cmp(&points[b][0])).unwrap();
    let dist = |a: usize, b: usize| {
        let d = sub(&points[a], &points[b]);
        dot(&d, &d)
    };
    let i1 = (0..n).max_by(|&a, &b| dist(a, i0).total_cmp(&dist(b, i0))).unwrap();
    let e01 = sub(&points[i1], &points[i0]);
    let line_dist = |a: usize| {
        let c = cross3(&e01, &sub(&points[a], &points[i0]));
        dot(&c, &c)
    };
    let i2 = (0..n).max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b))).unwrap();
    let nrm = cross3(&e01, &sub(&points[i2], &points[i0]));
    let plane_dist = |a: usize| dot(&nrm, &sub(&points[a], &points[i0]));
    let i3 = (0..n)
        .max_by(|&a, &b| plane_dist(a).abs().total_cmp(&plane_dist(b).abs()))
        .unwrap();
    let nn = dot(&nrm, &nrm).sqrt();
    if dist(i1, i0).sqrt() <= eps || nn <= eps * scale || plane_dist(i3).abs() / nn <= eps {
        return Err(Error::Degenerate("points are coplanar".into()));
    }

    let interior: Vec<f64> = (0..3)
        .map(|k| (points[i0][k] + points[i1][k] + points[i2][k] + points[i3][k]) / 4.0)
        .collect();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let orient = |f: [usize; 3]| -> [usize; 3] {
        let nr = cross3(&sub(&points[f[1]], &points[f[0]]), &sub(&points[f[2]], &points[f[0]]));
        if dot(&nr, &sub(&interior, &points[f[0]])) > 0.0 {
            [f[0], f[2], f[1]]
        } else {
            f
        }
    };
    for f in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        faces.push(orient(f));
    }
    let plane = |f: &[usize; 3]| {
        let nr = cross3(&sub(&points[f[1]], &points[f[0]]), &sub(&points[f[2]], &points[f[0]]));
        let len = dot(&nr, &nr).sqrt();
        let u: Vec<f64> = nr.iter().map(|v| v / len).collect();
        let d = dot(&u, &points[f[0]]);
        (u, d)
    };
    let mut planes: Vec<(Vec<f64>, f64)> = faces.iter().map(plane).collect();

    for p in 0..n {
        if [i0, i1, i2, i3].contains(&p) {
            continue;
        }
        let visible: Vec<bool> = planes
            .iter()
            .map(|(u, d)| dot(u, &points[p]) - d > eps)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                edges.insert((f[k], f[(k + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| !edges.contains(&(b, a)))
            .collect();
        horizon.sort_unstable();
        let mut kept_faces = Vec::with_capacity(faces.len());
        let mut kept_planes = Vec::with_capacity(faces.len());
        for ((f, pl), v) in faces.into_iter().zip(planes).zip(visible) {
            if !v {
                kept_faces.push(f);
                kept_planes.push(pl);
            }
        }
        faces = kept_faces;
        planes = kept_planes;
        for (a, b) in horizon {
            let f = [a, b, p];
            planes.push(plane(&f));
            faces.push(f);
        }
    }

    let mut used: Vec<usize> = faces.iter().flat_map(|f| f.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let mut remap = vec![usize::MAX; n];
    for (k, &i) in used.iter().enumerate() {
        remap[i] = k;
    }
    let verts = used.iter().map(|&i| points[i].clone()).collect();
    let faces = faces
        .iter()
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    Ok((verts, faces))
}

//! Named fixtures shared by the tests, the acceptance suite and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::Field;
use crate::geometry::ConvexBody;
use crate::young::{trud, trud1, Catalog, Young1D, YoungND};

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub phi: YoungND,
    /// Half width of the sampling box.
    pub half: f64,
}

/// The eight catalog Young functions in the plane with sampling boxes on
/// which their values stay moderate.
pub fn catalog_phis() -> Vec<CatalogEntry> {
    let entry = |name, phi, half| CatalogEntry { name, phi, half };
    vec![
        entry(
            "sep",
            YoungND::catalog(
                2,
                Catalog::Matrix {
                    a: vec![Young1D::Power { c: 1.0, p: 2.0 }, Young1D::PowerLog { p: 2.0, q: 1.0, c: 2.0 }],
                    m: vec![1.0, 0.0, 0.0, 1.0],
                    label: "sep".into(),
                },
            )
            .unwrap(),
            2.0,
        ),
        entry("pnorm", YoungND::catalog(2, Catalog::PNorm { p: vec![2.0, 4.0] }).unwrap(), 2.0),
        entry(
            "matrix",
            YoungND::catalog(
                2,
                Catalog::Matrix {
                    a: vec![
                        Young1D::Power { c: 1.0, p: 2.0 },
                        Young1D::Power { c: 0.5, p: 3.0 },
                        Young1D::Power { c: 1.0, p: 1.5 },
                    ],
                    m: vec![1.0, 0.5, -0.3, 1.0, 0.7, 0.7],
                    label: "matrix".into(),
                },
            )
            .unwrap(),
            2.0,
        ),
        entry("trud", trud(2.0, 2.0, 1.0, 2.0).unwrap(), 2.0),
        entry("trud1", trud1(2.0, 2.0).unwrap(), 0.6),
        entry("radial", YoungND::catalog(2, Catalog::Radial { a: Young1D::Power { c: 1.0, p: 3.0 } }).unwrap(), 2.0),
        entry(
            "support-radial",
            YoungND::catalog(
                2,
                Catalog::SupportRadial { a: Young1D::Power { c: 1.0, p: 2.0 }, body: ConvexBody::hexagon() },
            )
            .unwrap(),
            2.0,
        ),
        entry("indicator", YoungND::catalog(2, Catalog::Indicator { body: ConvexBody::square() }).unwrap(), 2.0),
    ]
}

pub fn catalog_bodies() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("square", ConvexBody::square()),
        ("disc", ConvexBody::disc(crate::geometry::DEFAULT_DISC_VERTICES).unwrap()),
        ("cross", ConvexBody::cross()),
        ("hexagon", ConvexBody::hexagon()),
    ]
}

#[derive(Clone, Debug)]
pub struct Triple {
    pub seed: u64,
    pub u: Field,
    pub phi: YoungND,
    pub phi_name: &'static str,
    pub body: ConvexBody,
    pub body_name: &'static str,
}

/// A random `(u, Phi, K)` in the plane. `Phi` is drawn from the finite,
/// superlinear part of the catalog.
pub fn random_triple(seed: u64) -> Triple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let phis: Vec<CatalogEntry> = catalog_phis()
        .into_iter()
        .filter(|e| !matches!(e.name, "indicator" | "trud1"))
        .collect();
    let bodies = catalog_bodies();
    let p = &phis[rng.gen_range(0..phis.len())];
    let (body_name, body) = bodies[rng.gen_range(0..bodies.len())].clone();
    Triple { seed, u: Field::random(2, seed), phi: p.phi.clone(), phi_name: p.name, body, body_name }
}

pub fn random_triples(count: usize, seed: u64) -> Vec<Triple> {
    (0..count as u64).map(|i| random_triple(seed.wrapping_mul(1000).wrapping_add(i))).collect()
}

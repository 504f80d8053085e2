use aniso_core::geometry::ConvexBody;
use aniso_core::grid::Grid;
use aniso_core::linalg::{directions, dot, norm};
use aniso_core::young::{
    conjugate_at, conjugate_fast, conjugate_oracle, conjugate_via_levelsets, default_dual_grid, growth_limits,
    involution_check, level_grid, llt_1d, maximizer_profile, radial_factorization, sublevel_set, trud, trud1,
    Catalog, LevelSupport, Sampled, Young1D, YoungND,
};
use proptest::prelude::*;

fn inner_nodes(g: &Grid, frac: f64) -> Vec<Vec<f64>> {
    (0..g.len())
        .map(|i| g.node(i))
        .filter(|p| p.iter().zip(g.hi()).all(|(x, h)| x.abs() <= frac * h + 1e-12))
        .collect()
}

#[test]
fn quad_is_self_conjugate() {
    let g = Grid::cube(2, 2.0, 129).unwrap();
    let phi = YoungND::quad(2).sample(&g).unwrap();
    let star = conjugate_fast(&phi, &g);
    for p in inner_nodes(&g, 0.5) {
        let v = star.eval(&p);
        assert!((v - 0.5 * dot(&p, &p)).abs() < 1e-3, "{p:?}: {v}");
    }
}

#[test]
fn indicator_of_the_disc_conjugates_to_the_norm() {
    let g = Grid::cube(2, 2.0, 129).unwrap();
    let phi = YoungND::catalog(2, Catalog::Indicator { body: ConvexBody::disc(256).unwrap() })
        .unwrap()
        .sample(&g)
        .unwrap();
    for d in directions(2, 32) {
        let xi: Vec<f64> = d.iter().map(|x| 3.0 * x).collect();
        let v = conjugate_at(&phi, &xi);
        assert!(v <= 3.0 + 1e-9 && v >= 3.0 * (1.0 - 2.0 * g.h()), "{v}");
    }
}

#[test]
fn cubic_radial_pair() {
    // A(t) = t^3 has A_*(s) = 2 (s / 3)^{3/2}
    let a = Young1D::power(1.0, 3.0).unwrap();
    let c = a.conjugate().unwrap();
    for s in [0.1, 0.5, 1.0, 3.0, 7.5] {
        assert!((c.eval(s) - 2.0 * (s / 3.0f64).powf(1.5)).abs() < 1e-12 * (1.0 + s * s));
    }
    let phi = YoungND::catalog(2, Catalog::Radial { a }).unwrap();
    let conj = phi.conjugate_closed_form().unwrap();
    let g = Grid::cube(2, 1.5, 257).unwrap();
    let sampled = phi.sample(&g).unwrap();
    for d in directions(2, 12) {
        let xi: Vec<f64> = d.iter().map(|x| 2.0 * x).collect();
        let exact = conj.eval(&xi);
        assert!((conjugate_at(&sampled, &xi) - exact).abs() < 1e-3 * exact.max(1.0));
    }
}

#[test]
fn one_dimensional_conjugates() {
    let q = Young1D::power(1.0, 2.0).unwrap().conjugate().unwrap();
    assert!((q.eval(3.0) - 2.25).abs() < 1e-12);
    let ind = Young1D::Indicator { a: 2.0 }.conjugate().unwrap();
    assert!((ind.eval(1.5) - 3.0).abs() < 1e-12);
    let p = Young1D::parse("pow(3,2)").unwrap();
    assert!((p.eval(2.0) - 16.0).abs() < 1e-12);
    assert!((p.inverse(16.0) - 2.0).abs() < 1e-9);
    assert!(Young1D::parse("pow(0.5)").is_err());
    assert!(Young1D::parse("pow(2").is_err());
    assert!(Young1D::parse("wobble(1)").is_err());
}

#[test]
fn llt_matches_brute_force() {
    let x: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
    let f: Vec<f64> = x.iter().map(|t| t.abs().powf(1.5)).collect();
    let s: Vec<f64> = (0..31).map(|i| -1.5 + 0.1 * i as f64).collect();
    let mut out = vec![0.0; s.len()];
    llt_1d(&x, &f, &s, &mut out);
    for (j, sj) in s.iter().enumerate() {
        let brute = x.iter().zip(&f).map(|(xi, fi)| sj * xi - fi).fold(f64::NEG_INFINITY, f64::max);
        assert!((out[j] - brute).abs() < 1e-12, "{sj}: {} vs {brute}", out[j]);
    }
}

#[test]
fn sublevel_volume_of_quad() {
    let g = Grid::cube(2, 2.0, 257).unwrap();
    let phi = YoungND::quad(2).sample(&g).unwrap();
    let set = sublevel_set(&phi, 0.5);
    assert!((set.volume / std::f64::consts::PI - 1.0).abs() < 0.01, "{}", set.volume);
    assert!(!set.truncated);
    assert!(sublevel_set(&phi, 10.0).truncated);
}

#[test]
fn level_set_conjugates() {
    let g = Grid::cube(2, 2.0, 129).unwrap();
    let quad = YoungND::quad(2).sample(&g).unwrap();
    let levels = level_grid(quad.max_finite());
    let v = conjugate_via_levelsets(&LevelSupport::new(&quad), &[1.0, 0.0], &levels);
    assert!((v - 0.5).abs() < 1e-2, "{v}");

    let ind = YoungND::catalog(2, Catalog::Indicator { body: ConvexBody::square() }).unwrap().sample(&g).unwrap();
    let v = conjugate_via_levelsets(&LevelSupport::new(&ind), &[1.0, 1.0], &level_grid(1.0));
    assert!((v - 2.0).abs() < 1e-12, "{v}");
}

#[test]
fn radial_factorization_of_the_square() {
    let rf = radial_factorization(&Young1D::power(1.0, 2.0).unwrap(), &ConvexBody::square()).unwrap();
    // {h_L^2 <= s} is sqrt(s) times the polar, whose support is the gauge of L
    assert!((rf.sublevel_support(4.0, &[0.5, 0.25]) - 1.0).abs() < 1e-9);
    // A_*(s) = s^2 / 4, so {phi_* <= s} is 2 sqrt(s) L
    assert!((rf.conj_sublevel_support(1.0, &[1.0, 1.0]) - 4.0).abs() < 1e-9);
    let g = Grid::cube(2, 2.0, 129).unwrap();
    let sampled = rf.phi.sample(&g).unwrap();
    for d in directions(2, 8) {
        let exact = rf.conj.eval(&d);
        assert!((conjugate_at(&sampled, &d) - exact).abs() < 1e-3, "{d:?}");
    }
    let off = ConvexBody::square().dilate_translate(1.0, &[2.0, 0.0]).unwrap();
    assert!(radial_factorization(&Young1D::power(1.0, 2.0).unwrap(), &off).is_err());
}

#[test]
fn growth_of_conjugates() {
    let g = Grid::cube(2, 2.0, 65).unwrap();
    let r = growth_limits(&YoungND::quad(2), &g, 2.0).unwrap();
    assert!(r.small_vanishes && r.large_diverges && r.positive_off_origin && r.finite_valued);
    let ind = YoungND::catalog(2, Catalog::Indicator { body: ConvexBody::square() }).unwrap();
    let r = growth_limits(&ind, &g, 2.0).unwrap();
    assert!(!r.small_vanishes && !r.large_diverges && !r.finite_valued);
}

#[test]
fn maximizer_of_the_quad_profile() {
    let m = maximizer_profile(&YoungND::quad(2), &[1.0, 0.0], None).unwrap();
    assert!((m.s_star - 0.5).abs() < 0.03, "{}", m.s_star);
    assert!((m.value - 0.5).abs() < 1e-3);
    assert!(!m.at_zero);
    assert!(m.concavity_defect < 1e-3);
    let ind = YoungND::catalog(2, Catalog::Indicator { body: ConvexBody::square() }).unwrap();
    let m = maximizer_profile(&ind, &[1.0, 0.0], None).unwrap();
    assert!(m.at_zero && (m.value - 1.0).abs() < 1e-12);
}

#[test]
fn parse_catalog() {
    for spec in [
        "quad",
        "pnorm:2,4",
        "powerlog:2,1,2",
        "exp:1",
        "norm:pow(3)",
        "radial:pow(2):hexagon",
        "gauge:pow(2):square",
        "sep:pow(2);pow(3)",
        "trud:2,2,1,2",
        "trud1:2,2",
        "indicator:disc",
    ] {
        YoungND::parse(spec, 2).unwrap_or_else(|e| panic!("{spec}: {e}"));
    }
    assert!(YoungND::parse("pnorm:2", 2).is_err());
    assert!(YoungND::parse("pnorm:0.5,2", 2).is_err());
    assert!(YoungND::parse("bogus", 2).is_err());
    assert!(YoungND::parse("quad", 4).is_err());
    assert!(trud(2.0, 2.0, 1.0, 2.0).is_ok());
    assert!(trud1(2.0, 2.0).is_ok());
}

#[test]
fn validation_flags_non_convex_tables() {
    assert!(YoungND::quad(2).validate(2.0, 1).ok);
    assert!(YoungND::parse("pnorm:2,4", 2).unwrap().validate(2.0, 1).ok);
    let g = Grid::cube(2, 2.0, 65).unwrap();
    let concave = Sampled::new(g.clone(), (0..g.len()).map(|i| norm(&g.node(i)).sqrt()).collect()).unwrap();
    let r = YoungND::Sampled(concave).validate(2.0, 1);
    assert!(!r.ok && r.convexity_violations > 0);
}

#[test]
fn sampled_text_roundtrip() {
    let g = Grid::cube(2, 1.0, 9).unwrap();
    let phi = YoungND::catalog(2, Catalog::Indicator { body: ConvexBody::cross() }).unwrap().sample(&g).unwrap();
    let back = Sampled::from_text(&phi.to_text()).unwrap();
    assert_eq!(back.grid, phi.grid);
    assert_eq!(back.values, phi.values);
}

#[test]
fn involution_of_pnorm() {
    let g = Grid::cube(2, 2.0, 129).unwrap();
    let phi = YoungND::parse("pnorm:2,4", 2).unwrap().sample(&g).unwrap();
    let r = involution_check(&phi, &default_dual_grid(&phi, 1.0));
    // coarse dual spacing near the steep x2^4 rim dominates
    assert!(r.deviation < 2e-3 * phi.max_finite() && r.nodes_compared > 1000, "{}", r.deviation);
}

fn sampled_pnorm(p1: f64, p2: f64, n: usize) -> Sampled {
    let g = Grid::cube(2, 1.5, n).unwrap();
    YoungND::catalog(2, Catalog::PNorm { p: vec![p1, p2] }).unwrap().sample(&g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_conjugate_equals_the_oracle(p1 in 1.0f64..4.0, p2 in 1.0f64..4.0, n in 9usize..24) {
        let phi = sampled_pnorm(p1, p2, n);
        let out = default_dual_grid(&phi, 0.75);
        let fast = conjugate_fast(&phi, &out);
        let slow = conjugate_oracle(&phi, &out);
        for (a, b) in fast.values.iter().zip(&slow.values) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn conjugation_reverses_order(p1 in 1.2f64..4.0, p2 in 1.2f64..4.0, c in 1.0f64..5.0) {
        let phi = sampled_pnorm(p1, p2, 17);
        let bigger = Sampled::new(phi.grid.clone(), phi.values.iter().map(|v| c * v).collect()).unwrap();
        let out = default_dual_grid(&phi, 1.0);
        let a = conjugate_fast(&phi, &out);
        let b = conjugate_fast(&bigger, &out);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(y <= &(x + 1e-12));
        }
    }

    #[test]
    fn fenchel_young_inequality(p1 in 1.2f64..4.0, p2 in 1.2f64..4.0, i in 0usize..289, j in 0usize..289) {
        let phi = sampled_pnorm(p1, p2, 17);
        let out = default_dual_grid(&phi, 1.0);
        let star = conjugate_fast(&phi, &out);
        let x = phi.grid.node(i);
        let xi = out.node(j);
        prop_assert!(phi.values[i] + star.values[j] >= dot(&x, &xi) - 1e-12);
    }
}

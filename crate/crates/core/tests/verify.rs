use aniso_core::fields::Field;
use aniso_core::geometry::ConvexBody;
use aniso_core::grid::{Grid, GridMask};
use aniso_core::numfmt::to_json;
use aniso_core::profile::{Continuity, Monotone, Profile};
use aniso_core::verify::{
    generate_prop51, generate_prop52, homothety_mismatch, is_superlinear, quasi_convexity_score, sandwich_constants,
    verify_inequality, Report, Verdict, VerifyConfig,
};
use aniso_core::young::{Young1D, YoungND};
use aniso_core::Error;
use proptest::prelude::*;

fn b_linear() -> Profile {
    Profile::new(vec![0.0, 1.0], vec![1.0, 0.0], Monotone::Nonincreasing, Continuity::Right).unwrap()
}

#[test]
fn two_bumps_give_a_strict_inequality() {
    let u = Field::two_bump().sample(128).unwrap();
    let r = verify_inequality(&u, &YoungND::quad(2), &ConvexBody::square(), &VerifyConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::InequalityHolds);
    assert!(r.relative_gap < -0.1, "{}", r.relative_gap);
    assert_eq!(r.refinement.len(), 2);
    assert_eq!(r.per_level.len(), 48);
}

#[test]
fn generated_gauge_pair_is_an_equality_case() {
    let g = generate_prop51(&ConvexBody::hexagon(), &Young1D::power(1.0, 2.0).unwrap(), &b_linear(), &[0.2, -0.1], 128)
        .unwrap();
    let r = verify_inequality(&g.u, &g.phi, &ConvexBody::square(), &VerifyConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::EqualityWithinTol, "{}", r.relative_gap);
}

#[test]
fn generator_preconditions() {
    let pnorm1 = YoungND::parse("pnorm:1,1", 2).unwrap();
    assert!(!is_superlinear(&pnorm1));
    assert!(is_superlinear(&YoungND::quad(2)));
    assert!(matches!(generate_prop52(&pnorm1, 1.0, 0.0, 1.0, 1.0, &[0.0, 0.0], 64), Err(Error::Invalid(_))));
    let q = YoungND::quad(2);
    assert!(generate_prop52(&q, 0.0, 0.0, 1.0, 1.0, &[0.0, 0.0], 64).is_err());
    assert!(generate_prop52(&q, 1.0, 1.0, 0.5, 2.0, &[0.0, 0.0], 64).is_err());
    assert!(generate_prop52(&q, 1.0, 0.0, 1.0, 1.0, &[0.0], 64).is_err());

    let flat = Profile::new(vec![0.0, 1.0], vec![1.0, 1.0], Monotone::Nonincreasing, Continuity::Right).unwrap();
    let a = Young1D::power(1.0, 2.0).unwrap();
    assert!(matches!(generate_prop51(&ConvexBody::square(), &a, &flat, &[0.0, 0.0], 64), Err(Error::Degenerate(_))));
    let off = ConvexBody::square().dilate_translate(1.0, &[5.0, 0.0]).unwrap();
    assert!(matches!(generate_prop51(&off, &a, &b_linear(), &[0.0, 0.0], 64), Err(Error::OriginNotInterior)));
}

#[test]
fn equal_truncation_levels_give_a_constant() {
    let g = generate_prop52(&YoungND::quad(2), 1.0, 0.4, 0.4, 1.0, &[0.0, 0.0], 64).unwrap();
    assert!(g.u.values.iter().all(|&v| v == 0.4));
}

#[test]
fn truncated_conjugate_profile_has_homothetic_levels() {
    let g = generate_prop52(&YoungND::quad(2), 1.0, 0.0, 1.0, 1.0, &[0.3, 0.0], 128).unwrap();
    assert!(g.closed_form);
    // super-level sets are discs around x0
    assert!(homothety_mismatch(&g.u, 0.2, 0.7).unwrap() < 0.03);
    let two = Field::two_bump().sample(128).unwrap();
    assert!(homothety_mismatch(&two, 0.1, 0.85).unwrap() > 0.1);
}

#[test]
fn quasi_convexity_of_annulus_and_disc() {
    let g = Grid::cube(2, 1.5, 97).unwrap();
    let disc = GridMask { grid: g.clone(), mask: (0..g.len()).map(|i| g.node(i).iter().map(|v| v * v).sum::<f64>() <= 1.0).collect() };
    assert!((quasi_convexity_score(&disc) - 1.0).abs() < 1e-12);
    let ring = GridMask {
        grid: g.clone(),
        mask: (0..g.len())
            .map(|i| {
                let r2: f64 = g.node(i).iter().map(|v| v * v).sum();
                (0.25..=1.0).contains(&r2)
            })
            .collect(),
    };
    let q = quasi_convexity_score(&ring);
    assert!((q - 0.75).abs() < 0.03, "{q}");
}

#[test]
fn sandwich_constants_for_radial_and_product_integrands() {
    let g = Grid::cube(2, 2.0, 129).unwrap();
    let r = sandwich_constants(&YoungND::quad(2), &ConvexBody::disc(256).unwrap(), &g).unwrap();
    assert!((r.c1 - 1.0).abs() < 0.02 && (r.c2 - 1.0).abs() < 0.02, "{r:?}");
    let r = sandwich_constants(&YoungND::parse("pnorm:2,4", 2).unwrap(), &ConvexBody::square(), &g).unwrap();
    assert!(r.c1 > 0.0 && r.c1 <= r.c2 && r.min <= r.c1 && r.c2 <= r.max, "{r:?}");
}

#[test]
fn reports_roundtrip_through_json() {
    let u = Field::parse("tent:disc").unwrap().sample(64).unwrap();
    let cfg = VerifyConfig { refine: false, ..VerifyConfig::default() };
    let r = verify_inequality(&u, &YoungND::quad(2), &ConvexBody::square(), &cfg).unwrap();
    let text = to_json(&r);
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json(&back), text);
    assert_eq!(back.refinement.len(), 1);
    assert_eq!(back.verdict, r.verdict);
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let u = Field::parse("tent:disc").unwrap().sample(64).unwrap();
    let cfg = VerifyConfig::default();
    assert!(verify_inequality(&u, &YoungND::quad(3), &ConvexBody::square(), &cfg).is_err());
    assert!(verify_inequality(&u, &YoungND::quad(2), &ConvexBody::cube(), &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rectangles_are_digitally_convex(w in 0.2f64..1.2, h in 0.2f64..1.2, cx in -0.2f64..0.2, cy in -0.2f64..0.2) {
        let g = Grid::cube(2, 1.5, 65).unwrap();
        let m = GridMask {
            grid: g.clone(),
            mask: (0..g.len()).map(|i| {
                let x = g.node(i);
                (x[0] - cx).abs() <= w && (x[1] - cy).abs() <= h
            }).collect(),
        };
        prop_assert!((quasi_convexity_score(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_fields_never_violate(seed in 0u64..500) {
        let u = Field::random(2, seed).sample(64).unwrap();
        let cfg = VerifyConfig { refine: false, ..VerifyConfig::default() };
        let r = verify_inequality(&u, &YoungND::quad(2), &ConvexBody::hexagon(), &cfg).unwrap();
        prop_assert!(r.verdict != Verdict::Violation);
        prop_assert!(r.lhs <= r.rhs + r.err);
    }
}

//! Invariants of the oracles and reductions, as property tests over seeded
//! inputs.

use orc_core::bodies::{
    brute_force_lp, exact_support, random, BodySpec, ExactBody, ExactFunction, FuncSpec, HPolytope,
};
use orc_core::cutting_plane::{optimize_linear, OptimizerConfig};
use orc_core::height::HeightOracle;
use orc_core::oracle::{wrap_with_ledger, NoisyMembership, OracleKind, QueryLedger};
use orc_core::reductions::{
    epigraph_geometry, eval_support_from_val, grad_conjugate_from_opt, opt_from_mem, ChainOptions,
    EpigraphBody, SupportFunction, ValFromOpt,
};
use orc_core::separation::{SepFromMem, SeparatorConfig};
use orc_core::subgrad::{
    separate_convex_func, EstimatorParams, FnFunction, NoiseModel, NoisyFunction, ScalarFunction,
};
use orc_core::*;
use proptest::prelude::*;
use rand::Rng;
use std::sync::atomic::{AtomicUsize, Ordering};

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn d(x: f64) -> Precision {
    Precision::new(x).unwrap()
}

fn random_unit(n: usize, stream: &RandomStream) -> Vector {
    random::unit_vector(n, &mut stream.rng()).into_vector()
}

/// A point uniform in the Euclidean ball `B(0, radius)`.
fn in_ball(n: usize, radius: f64, stream: &RandomStream) -> Vector {
    let u: f64 = stream.child(1).rng().random_range(0.0..1.0);
    random_unit(n, &stream.child(0)).scaled(radius * u.powf(1.0 / n as f64))
}

fn coords(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n))
}

/// The reference bodies with the origin as certified center.
fn centered_bodies(n: usize, seed: u64) -> Vec<BodySpec> {
    vec![
        BodySpec::unit_ball(n),
        BodySpec::cube(Vector::zeros(n), 0.7).unwrap(),
        BodySpec::HPolytope(random::polytope(n, 2, &RandomStream::new(seed)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn segment_endpoints_bound_the_box_line(
        center in coords(1..=5),
        radius in 0.01f64..2.0,
        t in prop::collection::vec(-1.0f64..1.0, 5),
        i in 0usize..5,
    ) {
        let n = center.len();
        let i = i % n;
        let b = LinfBox::new(v(&center), radius).unwrap();
        let z = Vector::new((0..n).map(|j| center[j] + radius * t[j]).collect()).unwrap();
        let (lo, hi) = b.coordinate_segment(&z, i).unwrap();
        prop_assert!(b.contains(&lo).unwrap() && b.contains(&hi).unwrap());
        for j in (0..n).filter(|&j| j != i) {
            prop_assert_eq!(lo[j], z[j]);
            prop_assert_eq!(hi[j], z[j]);
        }
        prop_assert!(lo[i] <= z[i] && z[i] <= hi[i]);
        // Stepping past either end leaves the box.
        let step = 1e-6 * radius;
        prop_assert!(!b.contains(&lo.with_coord(i, lo[i] - step)).unwrap());
        prop_assert!(!b.contains(&hi.with_coord(i, hi[i] + step)).unwrap());
    }

    #[test]
    fn halfspace_membership_is_monotone_in_slack(
        normal in coords(2..=4),
        p in prop::collection::vec(-3.0f64..3.0, 4),
        s1 in 0.0f64..1.0,
        extra in 0.0f64..1.0,
    ) {
        let n = normal.len();
        prop_assume!(v(&normal).norm2() > 1e-3);
        let unit = UnitVector::normalize(&v(&normal)).unwrap();
        let h1 = HalfSpace::new(unit, Vector::zeros(n), s1).unwrap();
        let h2 = h1.with_slack(s1 + extra).unwrap();
        let p = v(&p[..n]);
        prop_assert!(!h1.contains(&p).unwrap() || h2.contains(&p).unwrap());
    }

    #[test]
    fn reference_membership_near_the_boundary(
        y in coords(2..=4),
        scale in 0.0f64..2.0,
        delta in 1e-4f64..0.1,
    ) {
        let n = y.len();
        let y = v(&y).scaled(scale);
        let delta = d(delta);
        let ball = ExactBody::new(BodySpec::unit_ball(n));
        let dist = y.norm2() - 1.0;
        let answer = ball.membership(&y, delta).unwrap();
        if dist > delta.value() {
            prop_assert_eq!(answer, MembershipAnswer::OutsideEroded);
        }
        if dist < -delta.value() {
            prop_assert_eq!(answer, MembershipAnswer::InsideDilated);
        }

        // ℓ∞ box of radius 0.8: depth is the smallest gap to a facet.
        let cube = ExactBody::new(BodySpec::cube(Vector::zeros(n), 0.8).unwrap());
        let gap = 0.8 - y.norm_inf();
        let answer = cube.membership(&y, delta).unwrap();
        if gap < -delta.value() {
            prop_assert_eq!(answer, MembershipAnswer::OutsideEroded);
        }
        if gap > delta.value() {
            prop_assert_eq!(answer, MembershipAnswer::InsideDilated);
        }
    }

    #[test]
    fn membership_agrees_with_support(
        seed in 0u64..1000,
        n in 2usize..=4,
        scale in 0.0f64..1.5,
    ) {
        let stream = RandomStream::new(seed);
        let delta = d(1e-3);
        for spec in centered_bodies(n, seed) {
            let y = random_unit(n, &stream.child(0)).scaled(scale);
            let answer = ExactBody::new(spec.clone()).membership(&y, delta).unwrap();
            for k in 0..20 {
                let c = random::unit_vector(n, &mut stream.child(1 + k).rng());
                let (support, _) = exact_support(&spec, &c).unwrap();
                if c.dot(&y) > support + delta.value() {
                    prop_assert_eq!(answer, MembershipAnswer::OutsideEroded);
                }
            }
        }
    }

    #[test]
    fn exact_support_matches_brute_force(seed in 0u64..10_000, n in 2usize..=4, cuts in 0usize..=3) {
        let p = random::polytope(n, cuts, &RandomStream::new(seed)).unwrap();
        let spec = BodySpec::HPolytope(p.clone());
        for k in 0..8 {
            let c = random::unit_vector(n, &mut RandomStream::new(seed).child(k).rng());
            let (exact, _) = exact_support(&spec, &c).unwrap();
            let (brute, _) = brute_force_lp(&p, c.as_vector()).unwrap();
            prop_assert!((exact - brute).abs() <= 1e-9, "{} vs {}", exact, brute);
        }
    }

    #[test]
    fn exact_gradients_are_subgradients(seed in 0u64..10_000, n in 1usize..=5) {
        let s = RandomStream::new(seed);
        let pieces: Vec<(Vector, f64)> =
            (0..4).map(|k| (in_ball(n, 1.0, &s.child(10 + k)), 0.1 * k as f64)).collect();
        let functions = [
            FuncSpec::norm_squared(n),
            FuncSpec::norm(n),
            random::quadratic(n, 0.0, 1.0, &s.child(0)).unwrap(),
            FuncSpec::max_of_linear(pieces).unwrap(),
            FuncSpec::BallDistance { center: in_ball(n, 0.3, &s.child(1)), radius: 0.2 },
        ];
        for f in &functions {
            for k in 0..10 {
                let y = in_ball(n, 1.0, &s.child(100 + 2 * k));
                let q = in_ball(n, 1.0, &s.child(101 + 2 * k));
                let (fy, g) = f.exact_grad(&y).unwrap();
                let fq = f.exact_eval(&q).unwrap();
                prop_assert!(fq >= fy + g.dot(&(&q - &y)) - 1e-12, "{}", f.name());
            }
        }
    }

    #[test]
    fn separators_from_membership_are_deterministic(seed in 0u64..1000, n in 2usize..=4) {
        let body = BodySpec::unit_ball(n);
        let g = ProblemGeometry::centered(n, 1.0, 2.0).unwrap();
        let x = random_unit(n, &RandomStream::new(seed)).scaled(1.3);
        let run = || {
            let ledger = QueryLedger::new();
            let noisy = NoisyMembership::new(ExactBody::new(body.clone()), 0.01, RandomStream::new(seed))
                .unwrap();
            let sep = SepFromMem::practical(wrap_with_ledger(noisy, ledger.clone()), &g, RandomStream::new(seed + 1));
            let answers: Vec<_> = (0..3).map(|_| sep.separate(&x, d(1e-3)).ok()).collect();
            (answers, ledger.snapshot())
        };
        let (a1, l1) = run();
        let (a2, l2) = run();
        prop_assert_eq!(a1, a2);
        prop_assert_eq!(l1, l2);
    }

    #[test]
    fn separation_is_complete_inside(seed in 0u64..1000, n in 2usize..=6, depth in 0.0f64..1.0) {
        let stream = RandomStream::new(seed);
        for spec in centered_bodies(n, seed) {
            let g = spec.geometry();
            let sep = SepFromMem::practical(ExactBody::new(spec.clone()), &g, stream.clone());
            // t·b for a boundary point b lies (1 − t)·r deep; the separator
            // works at ε·R in these units.
            let c = random::unit_vector(n, &mut stream.rng());
            let (_, boundary) = exact_support(&spec, &c).unwrap();
            let t = depth * (1.0 - 2.0 * SeparatorConfig::PRACTICAL_EPS * g.kappa());
            let a = sep.separate(&boundary.scaled(t), d(1e-3)).unwrap();
            prop_assert_eq!(a, SeparationAnswer::InsideDilated);
        }
    }

    #[test]
    fn estimator_noise_moves_each_coordinate_by_at_most_eps_over_r2(
        seed in 0u64..10_000,
        n in 1usize..=6,
        eps in 1e-6f64..1e-2,
    ) {
        let f = FuncSpec::norm_squared(n);
        let params = EstimatorParams::new(Vector::zeros(n), 0.1, eps, 1.0).unwrap();
        let s = RandomStream::new(seed);
        let noisy = NoisyFunction::new(&f, eps, NoiseModel::Uniform, s.child(7));
        let exact = separate_convex_func(&f, &params, &s).unwrap().gradient;
        let rough = separate_convex_func(&noisy, &params, &s).unwrap().gradient;
        let bound = eps / params.r2 * (1.0 + 1e-9);
        prop_assert!((&rough - &exact).norm_inf() <= bound);
    }

    #[test]
    fn estimator_uses_two_evaluations_per_coordinate(seed in 0u64..10_000, n in 1usize..=8) {
        let calls = AtomicUsize::new(0);
        let f = FnFunction::new(n, |y: &Vector| {
            calls.fetch_add(1, Ordering::Relaxed);
            Ok(y.norm2())
        });
        let params = EstimatorParams::new(Vector::zeros(n), 0.1, 1e-4, 1.0).unwrap();
        separate_convex_func(&f, &params, &RandomStream::new(seed)).unwrap();
        prop_assert_eq!(calls.load(Ordering::Relaxed), 2 * n);
        prop_assert_eq!(f.dim(), n);
    }
}

mod height {
    use super::*;

    /// Height oracle for the centered body, with `x` outside it.
    fn with_height<R>(
        spec: &BodySpec,
        x: &Vector,
        f: impl FnOnce(&HeightOracle<'_, ExactBody>) -> R,
    ) -> R {
        let k = ExactBody::new(spec.clone());
        let g = spec.geometry();
        let h = HeightOracle::new(&k, x.clone(), g.outer_radius, d(1e-9), 1e-7).unwrap();
        f(&h)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn convex_on_the_inner_ball(seed in 0u64..10_000, n in 2usize..=4, lambda in 0.0f64..1.0) {
            let s = RandomStream::new(seed);
            for spec in centered_bodies(n, seed) {
                let r = spec.geometry().inner_radius;
                let x = random_unit(n, &s.child(0)).scaled(1.5 * spec.geometry().outer_radius);
                let d1 = in_ball(n, r / 2.0, &s.child(1));
                let d2 = in_ball(n, r / 2.0, &s.child(2));
                let mid = d1.scaled(lambda).add_scaled(1.0 - lambda, &d2);
                with_height(&spec, &x, |h| -> Result<(), TestCaseError> {
                    let err = h.evaluation_error();
                    let (h1, h2, hm) = (h.h_x(&d1).unwrap(), h.h_x(&d2).unwrap(), h.h_x(&mid).unwrap());
                    prop_assert!(hm <= lambda * h1 + (1.0 - lambda) * h2 + 3.0 * err, "{}", spec.name());
                    Ok(())
                })?;
            }
        }

        #[test]
        fn lipschitz_on_the_inner_ball(seed in 0u64..10_000, n in 2usize..=4) {
            let s = RandomStream::new(seed);
            for spec in centered_bodies(n, seed) {
                let g = spec.geometry();
                let delta0 = g.inner_radius / 2.0;
                let x = random_unit(n, &s.child(0)).scaled(0.5 + g.outer_radius);
                let d1 = in_ball(n, delta0, &s.child(1));
                let d2 = in_ball(n, delta0, &s.child(2));
                let lip = (g.outer_radius + delta0) / (g.inner_radius - delta0);
                with_height(&spec, &x, |h| -> Result<(), TestCaseError> {
                    let diff = (h.h_x(&d1).unwrap() - h.h_x(&d2).unwrap()).abs();
                    prop_assert!(diff <= lip * d1.dist2(&d2) + 2.0 * h.evaluation_error());
                    Ok(())
                })?;
            }
        }

        #[test]
        fn one_membership_call_per_bisection_step(seed in 0u64..10_000, n in 2usize..=5) {
            let s = RandomStream::new(seed);
            let ledger = QueryLedger::new();
            let k = wrap_with_ledger(ExactBody::new(BodySpec::unit_ball(n)), ledger.clone());
            let x = random_unit(n, &s.child(0)).scaled(s.child(3).rng().random_range(0.2..2.2));
            let h = HeightOracle::new(&k, x.clone(), 1.0, d(1e-6), 1e-6).unwrap();
            let dd = in_ball(n, 0.5, &s.child(1));
            h.alpha_x(&dd).unwrap();
            let expected = ((1.0 + dd.norm2() + 1e-6) / (x.norm2() * 1e-6)).log2().ceil() as u64;
            prop_assert_eq!(h.iterations(&dd) as u64, expected);
            // The final check at d happens only when no step landed inside.
            let calls = ledger.total(OracleKind::Mem);
            prop_assert!(calls == expected || calls == expected + 1, "{} vs {}", calls, expected);
        }
    }
}

#[test]
fn subgradient_lower_bound_holds_in_most_trials() {
    for n in [2usize, 5, 10] {
        let s = RandomStream::new(n as u64);
        let f = random::quadratic(n, 0.1, 1.0, &s.child(0)).unwrap();
        let x = in_ball(n, 0.3, &s.child(1));
        let (r1, eps) = (0.05, 1e-6);
        let lipschitz = f.linf_lipschitz_on_box(&x, 2.0 * r1).unwrap();
        let params = EstimatorParams::new(x.clone(), r1, eps, lipschitz).unwrap();
        let noisy = NoisyFunction::new(&f, eps, NoiseModel::Uniform, s.child(2));
        let zeta_bar = 10.0 * params.zeta_mean_bound();
        let fx = f.exact_eval(&x).unwrap();
        let box_ = LinfBox::new(x.clone(), r1).unwrap();
        let trials = 1000;
        let bad = (0..trials)
            .filter(|&t| {
                let g = separate_convex_func(&noisy, &params, &s.child(10 + t))
                    .unwrap()
                    .gradient;
                let q = s.child(5000 + t).uniform_in_box(&box_);
                let gap = &q - &x;
                let lower = fx + g.dot(&gap) - zeta_bar * gap.norm_inf() - params.additive_term();
                f.exact_eval(&q).unwrap() < lower
            })
            .count();
        assert!(
            bad as f64 <= 0.15 * trials as f64,
            "n = {n}: {bad}/{trials}"
        );
    }
}

#[test]
fn optimizer_output_is_nearly_feasible() {
    let eps = 1e-3;
    for n in [2usize, 3, 5] {
        for seed in 0..10u64 {
            let s = RandomStream::new(seed);
            let c = random_unit(n, &s.child(9));
            let bodies = [
                BodySpec::unit_ball(n),
                BodySpec::cube(Vector::zeros(n), 0.6).unwrap(),
                BodySpec::HPolytope(random::polytope(n, 1, &s).unwrap()),
            ];
            for spec in bodies {
                let g = spec.geometry();
                let cfg = OptimizerConfig::new(eps).unwrap();
                let y = match optimize_linear(&cfg, &ExactBody::new(spec.clone()), &g, &c).unwrap()
                {
                    OptimizationAnswer::Maximizer(y) => y,
                    other => panic!("{other:?}"),
                };
                // Distances: exact for ball and box, the worst facet
                // violation (a lower bound) for polytopes.
                let dist = match &spec {
                    BodySpec::Ball { radius, .. } => y.norm2() - radius,
                    BodySpec::Box { radius, .. } => y
                        .iter()
                        .map(|t| (t.abs() - radius).max(0.0).powi(2))
                        .sum::<f64>()
                        .sqrt(),
                    BodySpec::HPolytope(p) => p.max_violation(&y).1,
                    _ => unreachable!(),
                };
                assert!(
                    dist <= eps * g.outer_radius,
                    "{} n={n} seed={seed}: {dist}",
                    spec.name()
                );
            }
        }
    }
}

/// 50 polytopes with at most 10 facets in dimensions 2 to 4.
fn lp_instances() -> Vec<(HPolytope, Vector)> {
    (0..50u64)
        .map(|i| {
            let n = 2 + (i % 3) as usize;
            let s = RandomStream::new(1000 + i);
            let cuts = (10 - 2 * n).min(3);
            (
                random::polytope(n, cuts, &s).unwrap(),
                random_unit(n, &s.child(1)),
            )
        })
        .collect()
}

fn within_tolerance<O: OptimizationOracle>(opt: &O, p: &HPolytope, c: &Vector, eps: f64) -> bool {
    let (best, _) = brute_force_lp(p, c).unwrap();
    let tol = eps * c.norm2() * (1.0 + p.geometry().kappa());
    match opt.optimize(c, d(eps)) {
        Ok(OptimizationAnswer::Maximizer(y)) => (c.dot(&y) - best).abs() <= tol,
        _ => false,
    }
}

#[test]
fn optimizer_matches_brute_force_with_exact_separation() {
    let eps = 1e-3;
    let hits = lp_instances()
        .iter()
        .filter(|(p, c)| {
            let cfg = OptimizerConfig::new(eps).unwrap();
            let (best, _) = brute_force_lp(p, c).unwrap();
            let tol = eps * c.norm2() * (1.0 + p.geometry().kappa());
            match optimize_linear(
                &cfg,
                &ExactBody::new(BodySpec::HPolytope(p.clone())),
                p.geometry(),
                c,
            ) {
                Ok(OptimizationAnswer::Maximizer(y)) => (c.dot(&y) - best).abs() <= tol,
                _ => false,
            }
        })
        .count();
    assert!(hits >= 48, "{hits}/50");
}

#[test]
fn optimizer_matches_brute_force_with_separation_from_membership() {
    let eps = 1e-3;
    let hits = lp_instances()
        .iter()
        .enumerate()
        .filter(|(i, (p, c))| {
            let body = ExactBody::new(BodySpec::HPolytope(p.clone()));
            let opt = opt_from_mem(
                body,
                p.geometry(),
                &ChainOptions::new(RandomStream::new(*i as u64)),
            )
            .unwrap();
            within_tolerance(&opt, p, c, eps)
        })
        .count();
    assert!(hits >= 45, "{hits}/50");
}

#[test]
fn epigraph_body_is_sandwiched() {
    let n = 2;
    let s = RandomStream::new(3);
    let g = epigraph_geometry(n);
    let functions = [
        FuncSpec::norm(n),
        FuncSpec::norm_squared(n),
        FuncSpec::linear(v(&[0.3, -0.2]), 0.5),
        random::quadratic(n, 0.0, 0.5, &s).unwrap(),
    ];
    let delta = d(1e-3);
    for f in functions {
        let name = f.name();
        let epi = EpigraphBody::new(ExactFunction::new(f)).unwrap();
        for k in 0..1000u64 {
            let inside = g.center.add_scaled(
                1.0,
                &in_ball(n + 1, g.inner_radius - delta.value(), &s.child(2 * k)),
            );
            assert!(
                epi.membership(&inside, delta).unwrap().is_inside(),
                "{name} {inside:?}"
            );
            let dir = random_unit(n + 1, &s.child(2 * k + 1));
            let outside = dir.scaled(1.0 + delta.value() + 0.5 * (k as f64 / 1000.0));
            assert!(
                !epi.membership(&outside, delta).unwrap().is_inside(),
                "{name} {outside:?}"
            );
        }
    }
}

#[test]
fn recovered_support_values_are_bracketed() {
    let delta = d(1e-3);
    for n in [2usize, 3, 4] {
        for (i, spec) in centered_bodies(n, 40 + n as u64).into_iter().enumerate() {
            let g = spec.geometry();
            let body = ExactBody::new(spec.clone());
            let from_opt = SupportFunction::new(body.clone(), g.kappa()).unwrap();
            for k in 0..50u64 {
                let s = RandomStream::new(100 * i as u64 + k);
                let c = in_ball(n, 1.0, &s);
                let norm = c.norm2();
                let lo = g.inner_radius * norm - delta.value();
                let hi = g.outer_radius * norm + delta.value();
                let a = from_opt.evaluate(&c, delta).unwrap();
                assert!(
                    lo <= a && a <= hi,
                    "{} opt: {lo} <= {a} <= {hi}",
                    spec.name()
                );
                // Validity bisection needs the support inside [−1, 1].
                if g.outer_radius <= 1.0 {
                    let b = eval_support_from_val(&body, g.kappa(), &c, delta).unwrap();
                    assert!(
                        lo <= b && b <= hi,
                        "{} val: {lo} <= {b} <= {hi}",
                        spec.name()
                    );
                }
            }
        }
    }
}

#[test]
fn fenchel_young_on_the_ball() {
    let ball = ExactBody::new(BodySpec::unit_ball(3));
    let kappa = 1.0;
    for delta in [1e-2, 1e-3] {
        let delta = d(delta);
        for k in 0..200u64 {
            let c = in_ball(3, 1.0, &RandomStream::new(k));
            let a = grad_conjugate_from_opt(&ball, kappa, &c, delta).unwrap();
            assert!(c.dot(&a.subgrad) >= c.norm2() - (3.0 + kappa) * delta.value());
            assert!(a.subgrad.norm2() <= 1.0 + delta.value());
        }
    }
}

#[test]
fn validity_survives_the_membership_round_trip() {
    let n = 2;
    let ball = ExactBody::new(BodySpec::unit_ball(n));
    let g = ball.spec().geometry();
    let mut correct = 0;
    let trials = 60u64;
    for t in 0..trials {
        let s = RandomStream::new(t);
        let opt = opt_from_mem(ball.clone(), &g, &ChainOptions::new(s.child(0))).unwrap();
        let val = ValFromOpt(opt);
        let c = random_unit(n, &s.child(1));
        // Alternate thresholds below and above the support value 1.
        let gamma = if t % 2 == 0 {
            0.85 - 0.01 * (t % 10) as f64
        } else {
            1.15 + 0.01 * (t % 10) as f64
        };
        let expected = if gamma < 1.0 {
            ValidityAnswer::SomeAbove
        } else {
            ValidityAnswer::AllBelow
        };
        correct += (val.validity(&c, gamma, d(0.01)).unwrap() == expected) as usize;
    }
    assert!(correct as f64 >= 0.95 * trials as f64, "{correct}/{trials}");
}

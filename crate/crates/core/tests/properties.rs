use fixpoint_core::geometry::{norm_distance, BoxSpec, NormKind, Point, SLACK};
use fixpoint_core::l1::{solve_l1_contraction, solve_l1_nonexp, L1Machine};
use fixpoint_core::linf::{
    compute_restriction_box, decompose_solve, solve_linf_top, DaggerProblem, LinfPlan,
};
use fixpoint_core::oracles::{generate_instance, truncate_map, MapFamily, MapSpec};
use fixpoint_core::session::{Machine, Oracle, Session, SessionStatus, Transcript};
use fixpoint_core::verify::check_transcript_consistency;
use proptest::prelude::*;

fn residual(f: &dyn Oracle, x: &Point, norm: NormKind) -> f64 {
    norm_distance(&f.evaluate(x).unwrap(), x, norm).unwrap()
}

fn unit_point(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, k)
}

fn norm() -> impl Strategy<Value = NormKind> {
    prop_oneof![Just(NormKind::L1), Just(NormKind::LInf)]
}

/// Radial map with the given centre and contraction factor.
fn radial(center: Vec<f64>, factor: f64) -> MapSpec {
    MapSpec::Radial {
        center: Point::new(center),
        factor,
    }
}

/// 1-Lipschitz ℓ∞ map from outer coordinates to inner ones: each output is
/// a clamped affine form whose coefficients have absolute sum at most one.
fn inner_response(weights: &[Vec<f64>], offset: &[f64], q: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(offset)
        .map(|(w, c)| {
            let s: f64 = w.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            let dot: f64 = w.iter().zip(q).map(|(w, q)| w / s * q).sum();
            (c + dot).clamp(0.0, 1.0)
        })
        .collect()
}

/// Walk an ℓ1 session by hand, checking every level of the recursion on
/// every step.
fn walk_l1(oracle: &dyn Oracle, k: usize, eps: f64, gamma: f64) -> Result<usize, TestCaseError> {
    let mut session = Session::start(Box::new(L1Machine::new(k, eps, gamma).unwrap())).unwrap();
    let mut steps = 0;
    loop {
        let q = match session.status() {
            SessionStatus::PendingQuery(q) => q.clone(),
            SessionStatus::Done(_) => return Ok(steps),
            SessionStatus::Failed(r) => return Err(TestCaseError::fail(r.clone())),
        };
        prop_assert!(session.machine().query_box().contains(&q, SLACK));
        let mut level = session.machine();
        while let Some(child) = level.child() {
            let c = child.machine();
            prop_assert_eq!(c.eps(), level.eps() * level.gamma() / 4.0);
            prop_assert_eq!(c.gamma(), level.gamma());
            level = c;
        }
        session.step(oracle.evaluate(&q).unwrap()).unwrap();
        steps += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_distance_is_a_metric(
        (x, y, z) in (1usize..=6).prop_flat_map(|k| (unit_point(k), unit_point(k), unit_point(k))),
        norm in norm(),
    ) {
        let d = |a: &[f64], b: &[f64]| norm_distance(a, b, norm).unwrap();
        prop_assert!(d(&x, &y) >= 0.0);
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= SLACK);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + SLACK);
    }

    #[test]
    fn radial_center_is_fixed(center in (1usize..=6).prop_flat_map(unit_point), factor in 0.0..1.0f64) {
        let f = radial(center.clone(), factor);
        let c = Point::new(center);
        prop_assert!(f.evaluate_map(&c).unwrap().same_bits(&c));
    }

    #[test]
    fn truncation_is_idempotent(
        (center, lo, hi, x) in (1usize..=4).prop_flat_map(|k| {
            (unit_point(k), unit_point(k), unit_point(k), unit_point(k))
        }),
        factor in 0.0..1.0f64,
    ) {
        let (lo, hi): (Vec<f64>, Vec<f64>) =
            lo.iter().zip(&hi).map(|(a, b)| (a.min(*b), a.max(*b))).unzip();
        let clamp = BoxSpec::new(lo.into(), hi.into()).unwrap();
        let once = truncate_map(radial(center, factor), clamp.clone()).unwrap();
        let twice = truncate_map(once.clone(), clamp).unwrap();
        let x = Point::new(x);
        prop_assert!(once.evaluate_map(&x).unwrap().same_bits(&twice.evaluate_map(&x).unwrap()));
    }

    #[test]
    fn restriction_box_is_ordered_and_holds_consistent_solutions(
        (a, b) in (1usize..=3, 1usize..=3),
        seed in any::<u64>(),
        rounds in 1usize..8,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<Vec<f64>> =
            (0..a).map(|_| (0..b).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let offset: Vec<f64> = (0..a).map(|_| rng.gen_range(0.0..1.0)).collect();
        let outer = BoxSpec::unit(a);

        let mut transcript = Transcript::new();
        for _ in 0..rounds {
            let q: Vec<f64> = (0..b).map(|_| rng.gen_range(0.0..1.0)).collect();
            let rb = compute_restriction_box(&transcript, &q, &outer).unwrap();
            for i in 0..a {
                prop_assert!(outer.lower()[i] <= rb.p_min[i]);
                prop_assert!(rb.p_min[i] <= rb.p_max[i]);
                prop_assert!(rb.p_max[i] <= outer.upper()[i]);
            }
            let y = inner_response(&weights, &offset, &q);
            prop_assert!(rb.to_box().contains(&y, SLACK));
            let v: Vec<f64> = (0..b).map(|_| rng.gen_range(0.0..1.0)).collect();
            transcript.push_with_side(q.into(), v.into(), y.into());
        }
    }

    #[test]
    fn restriction_box_matches_ball_intersection(
        ys in prop::collection::vec(unit_point(2), 1..4),
        qs in prop::collection::vec(unit_point(1), 4),
    ) {
        let outer = BoxSpec::unit(2);
        let mut transcript = Transcript::new();
        for (y, q) in ys.iter().zip(&qs) {
            transcript.push_with_side(q.clone().into(), q.clone().into(), y.clone().into());
        }
        let q = &qs[ys.len()];
        let Ok(rb) = compute_restriction_box(&transcript, q, &outer) else {
            return Ok(());
        };
        // Brute force on a lattice: membership in every ball and in the outer box.
        let n = 200;
        for i in 0..=n {
            for j in 0..=n {
                let p = [i as f64 / n as f64, j as f64 / n as f64];
                let in_balls = ys.iter().zip(&qs).all(|(y, qr)| {
                    let r = (q[0] - qr[0]).abs();
                    (p[0] - y[0]).abs() <= r + SLACK && (p[1] - y[1]).abs() <= r + SLACK
                });
                prop_assert_eq!(in_balls, rb.to_box().contains(&p, SLACK), "lattice point {:?}", p);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linf_residual_contract(
        seed in any::<u64>(),
        k in 1usize..=4,
        family in prop_oneof![Just(MapFamily::Radial), Just(MapFamily::Affine), Just(MapFamily::Shapley)],
        eps in prop_oneof![Just(1e-2), Just(1e-3)],
    ) {
        let inst = generate_instance(seed, family, k, eps, Some(0.1), NormKind::LInf).unwrap();
        let out = solve_linf_top(&inst.map, eps).unwrap();
        prop_assert!(residual(&inst.map, &out.solution.point, NormKind::LInf) <= eps + SLACK);
        prop_assert_eq!(out.solution.stats.queries, out.solution.transcript.len());
        prop_assert!(out.solution.stats.queries >= out.solution.stats.rounds);
    }

    #[test]
    fn decomposition_transcripts_are_consistent(
        seed in any::<u64>(),
        (a, b) in (1usize..=2, 1usize..=2),
        eps in prop_oneof![Just(1e-2), Just(1e-3)],
    ) {
        let k = a + b;
        let inst = generate_instance(seed, MapFamily::Affine, k, eps, None, NormKind::LInf).unwrap();
        let inner = LinfPlan::for_dimension(a).unwrap();
        let outer = LinfPlan::for_dimension(b).unwrap();
        let problem = DaggerProblem::new(BoxSpec::unit(k), eps).unwrap();
        let (sol, audit) = decompose_solve(&inst.map, &problem, &inner, &outer).unwrap();
        prop_assert!(residual(&inst.map, &sol.point, NormKind::LInf) <= eps + SLACK);
        prop_assert!(check_transcript_consistency(&audit.transcript).is_none());
        prop_assert_eq!(audit.total_queries, sol.stats.queries);
        prop_assert!(sol.stats.queries <= audit.max_inner_queries() * audit.outer_queries());
        for y in audit.transcript.side() {
            prop_assert!(BoxSpec::unit(a).contains(y, SLACK));
        }
    }

    #[test]
    fn l1_windows_keep_the_fixed_point(
        center in prop_oneof![Just(2usize), Just(4usize)].prop_flat_map(unit_point),
        gamma in prop_oneof![Just(0.5), Just(0.1)],
        eps in prop_oneof![Just(1e-2), Just(1e-3)],
    ) {
        let f = radial(center.clone(), 1.0 - gamma);
        let out = solve_l1_contraction(&f, eps, gamma).unwrap();
        prop_assert!(residual(&f, &out.solution.point, NormKind::L1) <= eps + SLACK);
        for w in &out.windows {
            prop_assert!(w.contains(&center, SLACK), "window {:?} misses {:?}", w, center);
        }
    }

    #[test]
    fn l1_recursion_precision_and_query_box(
        (center, k) in prop_oneof![Just(2usize), Just(4usize), Just(6usize)]
            .prop_flat_map(|k| (unit_point(k), Just(k))),
        gamma in prop_oneof![Just(0.5), Just(0.25)],
    ) {
        let eps = 1e-2;
        let f = radial(center, 1.0 - gamma);
        let steps = walk_l1(&f, k, eps, gamma)?;
        prop_assert!(steps >= 1);
    }

    #[test]
    fn l1_nonexpansive_residual_contract(
        seed in any::<u64>(),
        k in 1usize..=4,
        eps in prop_oneof![Just(1e-2), Just(1e-3)],
    ) {
        let inst = generate_instance(seed, MapFamily::Affine, k, eps, None, NormKind::L1).unwrap();
        let out = solve_l1_nonexp(&inst.map, eps).unwrap();
        prop_assert!(residual(&inst.map, &out.solution.point, NormKind::L1) <= eps + SLACK);
    }
}

//! Acceptance gate. Runs every check at its stated tolerance, prints one
//! PASS/FAIL line per check, and exits non-zero if any check fails.

use std::process::ExitCode;
use std::time::Instant;

use fixpoint_core::geometry::{norm_distance, BoxSpec, NormKind, Point, ProblemSpec, SLACK};
use fixpoint_core::harness::{
    run_benchmark, run_solver, BenchmarkConfig, DecompositionTriple, ExponentFit, SolverKind,
};
use fixpoint_core::l1::{nonexp_supported, shrink_bound, solve_l1_contraction, solve_l1_nonexp};
use fixpoint_core::linf::{solve_linf_top, solve_planar_dagger, DaggerProblem, TruncationCase};
use fixpoint_core::oracles::{generate_instance, InstanceFile, MapFamily, MapSpec};
use fixpoint_core::verify::{
    check_nonexpansive_pairs, check_transcript_consistency, grid_search_fixed_point,
};
use fixpoint_core::{Error, FnOracle, Oracle};

const SEEDS: u64 = 200;

fn residual(f: &dyn Oracle, x: &Point, norm: NormKind) -> f64 {
    let fx = f.evaluate(x).expect("fresh evaluation");
    norm_distance(&fx, x, norm).expect("same dimension")
}

/// Tallies for one sweep.
#[derive(Default)]
struct Tally {
    runs: usize,
    passed: usize,
    breaches: usize,
    other_errors: usize,
    first_problem: Option<String>,
}

impl Tally {
    fn record(&mut self, label: impl FnOnce() -> String, outcome: Result<bool, Error>) {
        self.runs += 1;
        match outcome {
            Ok(true) => self.passed += 1,
            Ok(false) => self.note(|| format!("{}: residual above eps", label())),
            Err(e) => {
                if e.is_invariant_failure() {
                    self.breaches += 1;
                } else {
                    self.other_errors += 1;
                }
                self.note(|| format!("{}: {e}", label()));
            }
        }
    }

    fn note(&mut self, msg: impl FnOnce() -> String) {
        if self.first_problem.is_none() {
            self.first_problem = Some(msg());
        }
    }

    fn ok(&self) -> bool {
        self.runs > 0 && self.passed == self.runs
    }

    fn describe(&self) -> String {
        let mut s = format!("{}/{} passed", self.passed, self.runs);
        if let Some(p) = &self.first_problem {
            s.push_str(&format!("; first problem: {p}"));
        }
        s
    }
}

struct Gate {
    lines: Vec<(bool, String)>,
}

impl Gate {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        let line = format!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((ok, line));
    }
}

/// Breach counts shared between the correctness sweeps and the invariant check.
#[derive(Default)]
struct Breaches {
    certified_runs: usize,
    breaches: usize,
}

fn l1_correctness(gate: &mut Gate, breaches: &mut Breaches) {
    let mut contraction = Tally::default();
    let mut nonexp = Tally::default();
    let mut window_rounds = 0usize;
    let mut window_violations = 0usize;
    let mut shrink_violations = 0usize;
    let mut first_window: Option<String> = None;
    let mut skipped = 0usize;

    for k in [2usize, 3, 4, 5, 6] {
        for family in [MapFamily::Radial, MapFamily::Affine] {
            for gamma in [0.5, 0.1] {
                for eps in [1e-2, 1e-3] {
                    for seed in 0..SEEDS {
                        let inst =
                            generate_instance(seed, family, k, eps, Some(gamma), NormKind::L1)
                                .expect("generator");
                        let label = || format!("{} eps={eps}", inst.id());
                        let out = solve_l1_contraction(&inst.map, eps, gamma);
                        if let Ok(out) = &out {
                            if let Some(center) = &inst.known_fixed_point {
                                for w in &out.windows {
                                    window_rounds += 1;
                                    if !w.contains(center, SLACK) {
                                        window_violations += 1;
                                        first_window.get_or_insert_with(|| {
                                            format!("{}: window {w:?} misses {center:?}", label())
                                        });
                                    }
                                }
                            }
                            let cap = shrink_bound(eps, gamma);
                            if out.shrinks.iter().any(|&s| s > cap) {
                                shrink_violations += 1;
                            }
                        }
                        contraction.record(
                            label,
                            out.map(|o| {
                                residual(&inst.map, &o.solution.point, NormKind::L1) <= eps + SLACK
                            }),
                        );

                        if nonexp_supported(k, eps) {
                            let out = solve_l1_nonexp(&inst.map, eps);
                            nonexp.record(
                                label,
                                out.map(|o| {
                                    residual(&inst.map, &o.solution.point, NormKind::L1)
                                        <= eps + SLACK
                                }),
                            );
                        } else {
                            skipped += 1;
                        }
                    }
                }
            }
        }
    }
    breaches.certified_runs += contraction.runs + nonexp.runs;
    breaches.breaches += contraction.breaches + nonexp.breaches;
    gate.check(
        "l1 correctness (recursive contraction solver)",
        contraction.ok(),
        format!(
            "k in 2..=6, radial+affine, gamma 0.5/0.1, eps 1e-2/1e-3: {}",
            contraction.describe()
        ),
    );
    gate.check(
        "l1 correctness (nonexpansive reduction)",
        nonexp.ok(),
        format!(
            "{}; {skipped} runs below the precision floor not attempted",
            nonexp.describe()
        ),
    );
    gate.check(
        "l1 window safety",
        window_rounds > 0 && window_violations == 0 && shrink_violations == 0,
        format!(
            "{window_rounds} radial windows checked, {window_violations} miss the fixed point; \
             {shrink_violations} solves exceed the per-coordinate shrink bound{}",
            first_window.map(|s| format!("; {s}")).unwrap_or_default()
        ),
    );
}

fn linf_correctness(
    gate: &mut Gate,
    breaches: &mut Breaches,
    triples: &mut Vec<DecompositionTriple>,
) {
    let mut tally = Tally::default();
    let mut consistency_violations = 0usize;
    for k in [1usize, 2, 3, 4, 5, 6] {
        for (family, gamma) in [
            (MapFamily::Radial, Some(0.5)),
            (MapFamily::Radial, Some(0.1)),
            (MapFamily::Affine, Some(0.1)),
            (MapFamily::Affine, None),
        ] {
            for eps in [1e-2, 1e-3] {
                for seed in 0..SEEDS {
                    let inst = generate_instance(seed, family, k, eps, gamma, NormKind::LInf)
                        .expect("generator");
                    let out = solve_linf_top(&inst.map, eps);
                    if let Ok(out) = &out {
                        if let Some(audit) = &out.audit {
                            triples.push(DecompositionTriple::from_audit(inst.id(), eps, audit));
                            if check_transcript_consistency(&audit.transcript).is_some() {
                                consistency_violations += 1;
                            }
                        }
                    }
                    tally.record(
                        || format!("{} eps={eps}", inst.id()),
                        out.map(|o| {
                            residual(&inst.map, &o.solution.point, NormKind::LInf) <= eps + SLACK
                        }),
                    );
                }
            }
        }
    }
    breaches.certified_runs += tally.runs;
    breaches.breaches += tally.breaches + consistency_violations;
    gate.check(
        "linf correctness (decomposition solver)",
        tally.ok() && consistency_violations == 0,
        format!(
            "k in 1..=6, radial+affine, contraction and nonexpansive, eps 1e-2/1e-3: {}; \
             {consistency_violations} inconsistent outer transcripts",
            tally.describe()
        ),
    );

    let unit = |eps| DaggerProblem::new(BoxSpec::unit(2), eps).unwrap();
    let corner = FnOracle::new(2, |_: &[f64]| vec![1.04, 1.04]);
    let c1 = solve_planar_dagger(&corner, &unit(0.05));
    let c1_ok = matches!(&c1, Ok(o) if o.case == TruncationCase::BothTruncated
        && o.solution.point.coords() == [1.0, 1.0]
        && residual(&corner, &o.solution.point, NormKind::LInf) <= 0.05 + SLACK);

    let flat = FnOracle::new(2, |_: &[f64]| vec![0.5, 1.03]);
    let c2y = solve_planar_dagger(&flat, &unit(0.05));
    let c2y_ok = matches!(&c2y, Ok(o) if o.case == TruncationCase::OneTruncated { coordinate: 1 }
        && o.candidates_tried == 1
        && residual(&flat, &o.solution.point, NormKind::LInf) <= 0.05 + SLACK);

    let tilted = FnOracle::new(2, |x: &[f64]| vec![(x[1] - 0.41975).max(0.0), 1.03]);
    let c2p = solve_planar_dagger(&tilted, &unit(0.05));
    let c2p_ok = matches!(&c2p, Ok(o) if o.case == TruncationCase::OneTruncated { coordinate: 1 }
        && o.candidates_tried == 2
        && residual(&tilted, &o.solution.point, NormKind::LInf) <= 0.05 + SLACK);

    let show = |r: &Result<fixpoint_core::linf::PlanarOutcome, Error>| match r {
        Ok(o) => format!(
            "{:?} via {:?} after {} candidate(s)",
            o.solution.point, o.case, o.candidates_tried
        ),
        Err(e) => format!("error {e}"),
    };
    gate.check(
        "linf truncation repair",
        c1_ok && c2y_ok && c2p_ok,
        format!(
            "corner case {}; one-truncated case (y) {}; one-truncated case (y') {}",
            show(&c1),
            show(&c2y),
            show(&c2p)
        ),
    );
}

fn product_bound(gate: &mut Gate, triples: &[DecompositionTriple]) {
    let violations: Vec<_> = triples.iter().filter(|t| !t.pass).collect();
    let worst = triples
        .iter()
        .map(|t| t.q_ab as f64 / (t.q_a * t.q_b).max(1) as f64)
        .fold(0.0, f64::max);
    // Cross-dimension check at a fixed eps: the largest four-dimensional run
    // against the square of the largest two-dimensional one.
    let max_q = |dim: usize, eps: f64| {
        triples
            .iter()
            .filter(|t| t.inner_dim + t.outer_dim == dim && t.eps == eps)
            .map(|t| t.q_ab)
            .max()
            .unwrap_or(0)
    };
    let mut cross = Vec::new();
    let mut cross_ok = true;
    for eps in [1e-2, 1e-3] {
        let (q2, q4) = (max_q(2, eps), max_q(4, eps));
        cross_ok &= q2 > 0 && q4 > 0 && q4 <= q2 * q2;
        cross.push(format!(
            "eps={eps}: max q(4)={q4} vs max q(2)^2={}",
            q2 * q2
        ));
    }
    gate.check(
        "decomposition product bound",
        !triples.is_empty() && violations.is_empty() && cross_ok,
        format!(
            "{} runs, {} violations, worst q_ab/(q_a*q_b) = {worst:.3}; {}",
            triples.len(),
            violations.len(),
            cross.join("; ")
        ),
    );
}

fn invariants(gate: &mut Gate, breaches: &Breaches) {
    // A discontinuous first coordinate has no eps-fixed point reachable by
    // bisection; the interval solver's bracket check must fire.
    let jump = FnOracle::new(4, |x: &[f64]| {
        let first = if x[0] < 0.4 {
            (x[0] + 0.3).min(1.0)
        } else {
            (x[0] - 0.3).max(0.0)
        };
        vec![first, 0.5, 0.25, 0.75]
    });
    let solver_fault = solve_linf_top(&jump, 1e-3);
    let solver_caught = matches!(&solver_fault, Err(e) if e.is_invariant_failure());

    let expansive = MapSpec::Radial {
        center: [0.5, 0.5].into(),
        factor: 1.5,
    };
    let sampled = check_nonexpansive_pairs(&expansive, 1000, NormKind::LInf, 1.0, 0)
        .expect("pair check runs");

    gate.check(
        "runtime invariants",
        breaches.breaches == 0 && solver_caught && sampled.is_some(),
        format!(
            "{} breaches over {} certified solves; injected discontinuity -> {}; \
             expansive map -> {}",
            breaches.breaches,
            breaches.certified_runs,
            match &solver_fault {
                Ok(_) => "not detected".to_string(),
                Err(e) => e.to_string(),
            },
            sampled.map_or("no report".to_string(), |r| r.to_string())
        ),
    );
}

fn fit_for(fits: &[ExponentFit], solver: SolverKind, k: usize) -> Option<f64> {
    fits.iter()
        .find(|f| f.solver == solver && f.k == k)
        .map(|f| f.exponent)
}

fn scaling(gate: &mut Gate) {
    let eps: Vec<f64> = (6..=16).map(|e| 2f64.powi(-e)).collect();
    let base = BenchmarkConfig {
        families: vec![MapFamily::Affine],
        ks: vec![2, 4],
        eps: eps.clone(),
        gammas: vec![Some(0.5)],
        norm: NormKind::L1,
        seeds: (0..20).collect(),
        solvers: vec![SolverKind::L1Recursive],
        out: "unused.csv".into(),
        max_rows: 100_000,
    };
    let l1 = run_benchmark(&base).expect("l1 benchmark");
    let linf = run_benchmark(&BenchmarkConfig {
        ks: vec![2],
        gammas: vec![None],
        norm: NormKind::LInf,
        solvers: vec![SolverKind::LinfDecomp],
        ..base
    })
    .expect("linf benchmark");

    let mean_queries = |rows: &[fixpoint_core::harness::ResultRow], k: usize, e: f64| {
        let qs: Vec<f64> = rows
            .iter()
            .filter(|r| r.k == k && r.eps == e)
            .map(|r| r.queries as f64)
            .collect();
        qs.iter().sum::<f64>() / qs.len().max(1) as f64
    };
    let checks = [
        ("l1-recursive k=2", &l1, SolverKind::L1Recursive, 2, 1.3),
        ("l1-recursive k=4", &l1, SolverKind::L1Recursive, 4, 2.3),
        ("linf-decomp k=2", &linf, SolverKind::LinfDecomp, 2, 2.3),
    ];
    for (name, report, solver, k, limit) in checks {
        let exponent = fit_for(&report.summary.fits, solver, k);
        gate.check(
            &format!("scaling exponent {name}"),
            report.all_passed() && exponent.is_some_and(|e| e <= limit),
            format!(
                "fitted {} (limit {limit}) over eps 2^-6..2^-16, 20 affine seeds; \
                 mean queries {:.1} at 2^-6, {:.1} at 2^-16; all rows pass: {}",
                exponent.map_or("none".to_string(), |e| format!("{e:.3}")),
                mean_queries(&report.rows, k, eps[0]),
                mean_queries(&report.rows, k, eps[eps.len() - 1]),
                report.all_passed()
            ),
        );
    }
}

fn baseline_separation(gate: &mut Gate) {
    let (eps, gamma) = (1e-3, 1e-3);
    let inst = InstanceFile {
        problem: ProblemSpec::new(2, eps, Some(gamma), NormKind::L1).unwrap(),
        map: MapSpec::Radial {
            center: [0.9, 0.9].into(),
            factor: 1.0 - gamma,
        },
        known_fixed_point: Some([0.9, 0.9].into()),
        seed: 0,
    };
    let fast = run_solver(&inst, SolverKind::L1Recursive, eps);
    let slow = run_solver(&inst, SolverKind::Banach, eps);
    let (ok, detail) = match (&fast, &slow) {
        (Ok(f), Ok(s)) => {
            let ratio = s.row.queries as f64 / f.row.queries as f64;
            (
                f.row.pass && s.row.pass && ratio >= 10.0,
                format!(
                    "banach {} queries vs recursive {} queries, ratio {ratio:.1} (need >= 10)",
                    s.row.queries, f.row.queries
                ),
            )
        }
        _ => (
            false,
            format!("solver error: {:?} / {:?}", fast.err(), slow.err()),
        ),
    };
    gate.check("baseline separation", ok, detail);
}

fn oracle_equivalence(gate: &mut Gate) {
    let mut tally = Tally::default();
    let families = [MapFamily::Radial, MapFamily::Affine, MapFamily::Shapley];
    let eps_list = [2f64.powi(-4), 2f64.powi(-6), 2f64.powi(-8)];
    for norm in [NormKind::LInf, NormKind::L1] {
        for seed in 0..50u64 {
            let i = seed as usize;
            let (family, k, eps) = (families[i % 3], 1 + i % 2, eps_list[(i / 2) % 3]);
            let inst =
                generate_instance(seed, family, k, eps, Some(0.25), norm).expect("generator");
            let label = || format!("{} eps={eps}", inst.id());
            let grid = grid_search_fixed_point(&inst.map, eps, norm);
            tally.record(
                label,
                grid.map(|g| residual(&inst.map, &g.point, norm) <= eps + SLACK),
            );
            match norm {
                NormKind::LInf => {
                    let out = run_solver(&inst, SolverKind::LinfDecomp, eps);
                    tally.record(label, out.map(|o| o.row.pass));
                }
                NormKind::L1 => {
                    let out = run_solver(&inst, SolverKind::L1Recursive, eps);
                    tally.record(label, out.map(|o| o.row.pass));
                    let out = solve_l1_nonexp(&inst.map, eps);
                    tally.record(
                        label,
                        out.map(|o| residual(&inst.map, &o.solution.point, norm) <= eps + SLACK),
                    );
                }
            }
        }
    }
    gate.check(
        "grid oracle agreement",
        tally.ok(),
        format!(
            "k <= 2, eps >= 2^-8, 50 instances per norm: {}",
            tally.describe()
        ),
    );
}

fn reduction_soundness(gate: &mut Gate) {
    let mut tally = Tally::default();
    for seed in 0..100u64 {
        let i = seed as usize;
        let k = [2, 3, 4][i % 3];
        let eps = [1e-2, 1e-3][(i / 3) % 2];
        let inst = generate_instance(seed, MapFamily::Affine, k, eps, None, NormKind::L1)
            .expect("generator");
        let out = solve_l1_nonexp(&inst.map, eps);
        tally.record(
            || format!("{} eps={eps}", inst.id()),
            out.map(|o| residual(&inst.map, &o.solution.point, NormKind::L1) <= eps + SLACK),
        );
    }
    gate.check(
        "nonexpansive reduction soundness",
        tally.ok(),
        format!(
            "100 affine nonexpansive l1 instances, k in 2..=4: {}",
            tally.describe()
        ),
    );
}

fn main() -> ExitCode {
    let clock = Instant::now();
    let mut gate = Gate { lines: Vec::new() };
    let mut breaches = Breaches::default();
    let mut triples = Vec::new();

    l1_correctness(&mut gate, &mut breaches);
    linf_correctness(&mut gate, &mut breaches, &mut triples);
    product_bound(&mut gate, &triples);
    invariants(&mut gate, &breaches);
    scaling(&mut gate);
    baseline_separation(&mut gate);
    oracle_equivalence(&mut gate);
    reduction_soundness(&mut gate);

    let failed = gate.lines.iter().filter(|(ok, _)| !ok).count();
    println!(
        "acceptance: {} checks, {failed} failed, {:.1}s",
        gate.lines.len(),
        clock.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

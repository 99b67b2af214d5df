use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{distance, NormKind, Point, SLACK};
use crate::session::{Oracle, Transcript};

use super::report::{ViolationKind, ViolationReport, Witness};

/// Near-face coordinate values used by the structured pairs.
const EDGE_VALUES: [f64; 6] = [0.0, 1e-9, 1e-3, 1.0 - 1e-3, 1.0 - 1e-9, 1.0];

/// Falsify `‖f(x) − f(y)‖ ≤ L·‖x − y‖` on `n_pairs` random pairs plus
/// axis-aligned and near-boundary pairs. Returns the worst violation found.
pub fn check_nonexpansive_pairs(
    oracle: &dyn Oracle,
    n_pairs: usize,
    norm: NormKind,
    required_l: f64,
    seed: u64,
) -> Result<Option<ViolationReport>> {
    if n_pairs == 0 {
        return Err(Error::contract("need at least one pair"));
    }
    let k = oracle.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<ViolationReport> = None;
    let mut check = |x: Vec<f64>, y: Vec<f64>| -> Result<()> {
        let (x, y) = (Point::new(x), Point::new(y));
        let measured = distance(&oracle.evaluate(&x)?, &oracle.evaluate(&y)?, norm);
        let required = required_l * distance(&x, &y, norm);
        let excess = measured - required;
        if excess > SLACK
            && worst
                .as_ref()
                .is_none_or(|w| excess > w.measured - w.required)
        {
            worst = Some(ViolationReport {
                kind: ViolationKind::Lipschitz,
                witness: Witness::Pair { x, y },
                measured,
                required,
                detail: format!("{norm} Lipschitz bound {required_l}"),
            });
        }
        Ok(())
    };

    let random_point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..k).map(|_| rng.gen()).collect() };
    for _ in 0..n_pairs {
        let x = random_point(&mut rng);
        let y = random_point(&mut rng);
        check(x, y)?;
    }
    // Close pairs, where a discontinuity shows up as an unbounded ratio.
    for _ in 0..n_pairs.div_ceil(4) {
        let x = random_point(&mut rng);
        let scale = 10f64.powi(-rng.gen_range(2..7));
        let y = x
            .iter()
            .map(|&c| (c + scale * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0))
            .collect();
        check(x, y)?;
    }
    for i in 0..k {
        for _ in 0..n_pairs.div_ceil(4 * k).max(1) {
            let x = random_point(&mut rng);
            let mut y = x.clone();
            y[i] = rng.gen();
            check(x, y)?;
        }
    }
    for _ in 0..n_pairs.div_ceil(4) {
        let edge = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..k)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        EDGE_VALUES[rng.gen_range(0..EDGE_VALUES.len())]
                    } else {
                        rng.gen()
                    }
                })
                .collect()
        };
        let x = edge(&mut rng);
        let y = edge(&mut rng);
        check(x, y)?;
    }
    Ok(worst)
}

/// For every pair of rounds `r < t`, `‖v^r − v^t‖∞ ≤ ‖q^r − q^t‖∞`, where
/// `q` are the queries and `v` the answers of the transcript.
pub fn check_transcript_consistency(transcript: &Transcript) -> Option<ViolationReport> {
    let recs = transcript.records();
    let mut worst: Option<ViolationReport> = None;
    for (t, b) in recs.iter().enumerate() {
        for a in &recs[..t] {
            let measured = distance(&a.answer, &b.answer, NormKind::LInf);
            let required = distance(&a.query, &b.query, NormKind::LInf);
            let excess = measured - required;
            if excess > SLACK
                && worst
                    .as_ref()
                    .is_none_or(|w| excess > w.measured - w.required)
            {
                worst = Some(ViolationReport {
                    kind: ViolationKind::TranscriptConsistency,
                    witness: Witness::Rounds {
                        r: a.round,
                        t: b.round,
                    },
                    measured,
                    required,
                    detail: "answers farther apart than their queries".into(),
                });
            }
        }
    }
    worst
}

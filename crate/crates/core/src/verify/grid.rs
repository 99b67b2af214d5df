use crate::error::{Error, Result};
use crate::geometry::{distance, NormKind, Point};
use crate::session::Oracle;

/// Largest dimension the exhaustive scan accepts.
pub const GRID_MAX_DIM: usize = 3;
/// Smallest eps the exhaustive scan accepts.
pub const GRID_MIN_EPS: f64 = 1.0 / 4096.0;
/// Largest number of grid points per scan.
pub const GRID_MAX_POINTS: usize = 1 << 28;

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub point: Point,
    pub residual: f64,
    pub evaluations: usize,
}

/// Grid spacing `δ` and points per axis. With `δ = eps/4` in ℓ∞ (`eps/(4k)`
/// in ℓ1) the grid point nearest a true fixed point `x*` is within `eps/8`
/// of it, so its residual is at most `2·‖x̂ − x*‖ ≤ eps/4`.
pub fn grid_resolution(k: usize, eps: f64, norm: NormKind) -> (f64, usize) {
    let spacing = match norm {
        NormKind::LInf => eps / 4.0,
        NormKind::L1 => eps / (4.0 * k as f64),
    };
    let per_axis = (1.0 / spacing).ceil() as usize + 1;
    (spacing, per_axis)
}

/// Exhaustive residual minimisation over a uniform grid of `[0,1]^k`.
/// Evaluations here are not solver queries and are reported separately.
pub fn grid_search_fixed_point(
    oracle: &dyn Oracle,
    eps: f64,
    norm: NormKind,
) -> Result<GridResult> {
    let k = oracle.dim();
    if k == 0 || k > GRID_MAX_DIM {
        return Err(Error::ScaleGuard(format!(
            "grid search needs 1 ≤ k ≤ {GRID_MAX_DIM}, got {k}"
        )));
    }
    if eps.is_nan() || eps < GRID_MIN_EPS {
        return Err(Error::ScaleGuard(format!(
            "grid search needs eps ≥ 2^-12, got {eps}"
        )));
    }
    let (_, n) = grid_resolution(k, eps, norm);
    let total = n
        .checked_pow(k as u32)
        .filter(|&t| t <= GRID_MAX_POINTS)
        .ok_or_else(|| {
            Error::ScaleGuard(format!("{n}^{k} grid points exceed {GRID_MAX_POINTS}"))
        })?;
    let step = 1.0 / (n - 1) as f64;

    let mut index = vec![0usize; k];
    let mut x = vec![0.0; k];
    let mut best: Option<(f64, Point)> = None;
    for _ in 0..total {
        for (c, &i) in x.iter_mut().zip(&index) {
            *c = if i + 1 == n { 1.0 } else { i as f64 * step };
        }
        let p = Point::new(x.clone());
        let residual = distance(&oracle.evaluate(&p)?, &p, norm);
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, p));
        }
        for i in index.iter_mut() {
            *i += 1;
            if *i < n {
                break;
            }
            *i = 0;
        }
    }
    let (residual, point) = best.expect("grid is non-empty");
    Ok(GridResult {
        point,
        residual,
        evaluations: total,
    })
}

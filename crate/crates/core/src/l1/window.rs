use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, SLACK};

/// Which way `f` pushes a coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Up,
    Down,
}

/// Search window over the first two coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneWindow {
    pub p_min: Point,
    pub p_max: Point,
}

impl PlaneWindow {
    pub fn unit() -> Self {
        PlaneWindow {
            p_min: Point::from([0.0, 0.0]),
            p_max: Point::from([1.0, 1.0]),
        }
    }

    pub fn mid(&self) -> [f64; 2] {
        [
            0.5 * (self.p_min[0] + self.p_max[0]),
            0.5 * (self.p_min[1] + self.p_max[1]),
        ]
    }

    pub fn width(&self, i: usize) -> f64 {
        self.p_max[i] - self.p_min[i]
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        (0..2).all(|i| self.p_min[i] - tol <= x[i] && x[i] <= self.p_max[i] + tol)
    }

    /// Move one side of coordinate `i` past `x_i` by `step`. An overlap
    /// within [`SLACK`] collapses to a point; anything larger is a breach.
    pub fn shrink(&mut self, i: usize, dir: Direction, x_i: f64, step: f64) -> Result<()> {
        let (mut lo, mut hi) = (self.p_min[i], self.p_max[i]);
        match dir {
            Direction::Up => lo = x_i + step,
            Direction::Down => hi = x_i - step,
        }
        if lo > hi + SLACK {
            return Err(Error::breach(format!(
                "window empty on coordinate {i}: [{lo}, {hi}]; map is not a contraction"
            )));
        }
        if lo > hi {
            let m = 0.5 * (lo + hi);
            (lo, hi) = (m, m);
        }
        let mut p_min = self.p_min.clone().into_vec();
        let mut p_max = self.p_max.clone().into_vec();
        p_min[i] = lo;
        p_max[i] = hi;
        self.p_min = Point::new(p_min);
        self.p_max = Point::new(p_max);
        Ok(())
    }
}

/// The first coordinate among the first two with the largest displacement
/// `|f(x)_i − x_i|`, and its sign. Displacements within [`SLACK`] of each
/// other count as a tie.
pub fn select_dominating_coordinate(x: &[f64], fx: &[f64]) -> Result<(usize, Direction)> {
    if x.len() < 2 || fx.len() < 2 {
        return Err(Error::contract(
            "dominating coordinate needs dimension at least 2",
        ));
    }
    let d = [fx[0] - x[0], fx[1] - x[1]];
    let mut i = if d[1].abs() > d[0].abs() + SLACK {
        1
    } else {
        0
    };
    if d[i] == 0.0 {
        i = 1 - i;
    }
    if d[i] == 0.0 {
        return Err(Error::breach(
            "no displacement on the window coordinates although the residual exceeds eps",
        ));
    }
    let dir = if d[i] > 0.0 {
        Direction::Up
    } else {
        Direction::Down
    };
    Ok((i, dir))
}

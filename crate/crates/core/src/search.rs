//! One-dimensional minimization over a positive scalar (the `ρ` of unit
//! vector control): log-spaced grid scan followed by golden-section
//! refinement in `log ρ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSearchOptions {
    pub grid_points: usize,
    /// Refinement stops once the bracket satisfies `|Δρ|/ρ ≤ rel_tol`.
    pub rel_tol: f64,
}

impl Default for LineSearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 40,
            rel_tol: 1e-3,
        }
    }
}

/// `value = None` marks an infeasible point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GridPoint<T: Real> {
    pub rho: T,
    pub value: Option<T>,
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome<T: Real, V> {
    pub rho: T,
    pub value: T,
    pub payload: V,
    pub grid: Vec<GridPoint<T>>,
    /// Golden-section evaluations, in evaluation order.
    pub refinement: Vec<GridPoint<T>>,
    /// The refinement found nothing better than the grid and the grid
    /// point was kept.
    pub fell_back: bool,
}

/// `count` points spaced evenly in `log ρ` from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if !(lo > T::zero() && lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::invalid(format!("bad search range [{lo}, {hi}]")));
    }
    if count == 0 {
        return Err(Error::invalid("grid needs at least one point"));
    }
    if count == 1 || lo == hi {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::lit((count - 1) as f64);
    Ok((0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                (a + step * T::lit(k as f64)).exp()
            }
        })
        .collect())
}

/// Signs of successive differences, treating infeasible points as `+∞` and
/// differences below `rel_tol · max|v|` as flat (flat steps are dropped).
fn slope_signs<T: Real>(values: &[Option<T>], rel_tol: T) -> Vec<i8> {
    let scale = values.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = rel_tol * scale;
    values
        .windows(2)
        .filter_map(|w| match (w[0], w[1]) {
            (None, Some(_)) => Some(-1),
            (Some(_), None) => Some(1),
            (Some(a), Some(b)) if b - a > tol => Some(1),
            (Some(a), Some(b)) if a - b > tol => Some(-1),
            _ => None,
        })
        .collect()
}

/// Number of valleys (descent followed by ascent) in a sequence.
pub fn count_valleys<T: Real>(values: &[Option<T>], rel_tol: T) -> usize {
    slope_signs(values, rel_tol)
        .windows(2)
        .filter(|w| w[0] < 0 && w[1] > 0)
        .count()
}

/// The sequence only descends and then only ascends; infeasible points are
/// allowed only at the two ends.
pub fn is_unimodal<T: Real>(values: &[Option<T>], rel_tol: T) -> bool {
    !slope_signs(values, rel_tol).windows(2).any(|w| w[0] > 0 && w[1] < 0)
}

/// Minimizes `f` over `[lo, hi]`. `f(ρ)` returns `Ok(None)` when the inner
/// problem is infeasible; grid points that fail numerically are logged and
/// skipped, and the first such error is returned only if nothing on the
/// grid succeeded. Returns `Ok(None)` when every grid point is infeasible.
pub fn grid_then_golden<T, V, F>(
    lo: T,
    hi: T,
    opts: &LineSearchOptions,
    f: F,
) -> Result<Option<LineSearchOutcome<T, V>>>
where
    T: Real,
    V: Send,
    F: Fn(T) -> Result<Option<(T, V)>> + Sync,
{
    let rhos = log_grid(lo, hi, opts.grid_points)?;
    let evals: Vec<Result<Option<(T, V)>>> = rhos.par_iter().map(|&r| f(r)).collect();

    let mut grid = Vec::with_capacity(rhos.len());
    let mut best: Option<(usize, T, V)> = None;
    let mut first_err = None;
    let mut any_ok = false;
    for (k, (rho, e)) in rhos.iter().copied().zip(evals).enumerate() {
        match e {
            Ok(Some((v, payload))) => {
                any_ok = true;
                grid.push(GridPoint { rho, value: Some(v) });
                if best.as_ref().is_none_or(|b| v < b.1) {
                    best = Some((k, v, payload));
                }
            }
            Ok(None) => {
                any_ok = true;
                grid.push(GridPoint { rho, value: None });
            }
            Err(err) => {
                log::warn!("line search: evaluation at rho = {rho} failed: {err}");
                grid.push(GridPoint { rho, value: None });
                first_err.get_or_insert(err);
            }
        }
    }
    let Some((k, grid_value, grid_payload)) = best else {
        return match (any_ok, first_err) {
            (false, Some(err)) => Err(err),
            _ => Ok(None),
        };
    };
    let values: Vec<Option<T>> = grid.iter().map(|g| g.value).collect();
    if count_valleys(&values, T::lit(1e-6)) > 1 {
        log::warn!("line search: grid profile has several valleys; refinement may be local");
    }

    let mut outcome = LineSearchOutcome {
        rho: rhos[k],
        value: grid_value,
        payload: grid_payload,
        grid,
        refinement: Vec::new(),
        fell_back: false,
    };
    if rhos.len() < 2 {
        return Ok(Some(outcome));
    }

    let mut a = rhos[k.saturating_sub(1)].ln();
    let mut b = rhos[(k + 1).min(rhos.len() - 1)].ln();
    let tol = T::lit((1.0 + opts.rel_tol).ln());
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);

    let mut best_refined: Option<(T, T, V)> = None;
    let mut eval = |x: T, out: &mut LineSearchOutcome<T, V>| -> T {
        let rho = x.exp();
        match f(rho) {
            Ok(Some((v, payload))) => {
                out.refinement.push(GridPoint { rho, value: Some(v) });
                if best_refined.as_ref().is_none_or(|bst| v < bst.1) {
                    best_refined = Some((rho, v, payload));
                }
                v
            }
            Ok(None) => {
                out.refinement.push(GridPoint { rho, value: None });
                T::infinity()
            }
            Err(err) => {
                log::warn!("line search: refinement at rho = {rho} failed: {err}");
                out.refinement.push(GridPoint { rho, value: None });
                T::infinity()
            }
        }
    };

    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, &mut outcome);
    let mut fd = eval(d, &mut outcome);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, &mut outcome);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, &mut outcome);
        }
    }

    match best_refined {
        Some((rho, v, payload)) if v <= outcome.value => {
            outcome.rho = rho;
            outcome.value = v;
            outcome.payload = payload;
        }
        _ => {
            log::info!(
                "line search: refinement did not improve on the grid; keeping rho = {}",
                outcome.rho
            );
            outcome.fell_back = true;
        }
    }
    Ok(Some(outcome))
}

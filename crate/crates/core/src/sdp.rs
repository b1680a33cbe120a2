//! Small dense semidefinite programs in linear-matrix-inequality form.
//!
//! A [`LinearMatrixProgram`] minimizes `cᵀx` over a handful of scalar
//! decision variables subject to affine symmetric blocks
//! `F_j(x) = C_j + Σ_i x_i A_ij ⪰ 0`. [`solve`] is a log-barrier
//! path-following method with a phase-I margin maximization for the start
//! point; the problems it sees have at most a few dozen variables and
//! blocks of order ten, so every Newton system is formed densely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_floor, min_eig, Matrix, SymMatrix};
use crate::scalar::Real;

/// Relative strictness used to turn an open LMI into a closed one:
/// `F(x) ≻ 0` becomes `F(x) ⪰ ε I` with `ε = STRICTNESS · (1 + ‖C‖₂)`.
pub const STRICTNESS: f64 = 1e-6;

/// Lower bound applied to scalar multipliers that must stay positive.
pub const POSITIVITY_FLOOR: f64 = 1e-9;

/// One affine symmetric block `constant + Σ x_i coefficients[i] ⪰ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LmiBlock<T: Real> {
    pub name: String,
    pub constant: SymMatrix<T>,
    pub coefficients: Vec<SymMatrix<T>>,
}

impl<T: Real> LmiBlock<T> {
    /// Zero block of the given order over `var_count` variables.
    pub fn zeros(name: impl Into<String>, order: usize, var_count: usize) -> Self {
        Self {
            name: name.into(),
            constant: SymMatrix::zeros(order),
            coefficients: vec![SymMatrix::zeros(order); var_count],
        }
    }

    pub fn order(&self) -> usize {
        self.constant.order()
    }

    /// Adds `v` at `(i, j)` and its mirror of the constant (`var = None`) or
    /// of the coefficient of variable `var`.
    pub fn add_entry(&mut self, var: Option<usize>, i: usize, j: usize, v: T) {
        let target = match var {
            None => &mut self.constant,
            Some(k) => &mut self.coefficients[k],
        };
        let cur = target[(i, j)];
        target.set_sym(i, j, cur + v);
    }

    /// Adds the sub-block `m` with top-left corner `(r0, c0)`.
    ///
    /// On the diagonal (`r0 == c0`) `m` must itself be symmetric; off the
    /// diagonal the mirrored entries are written as well.
    pub fn add_submatrix(&mut self, var: Option<usize>, r0: usize, c0: usize, m: &Matrix<T>) {
        let target = match var {
            None => &mut self.constant,
            Some(k) => &mut self.coefficients[k],
        };
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let (r, c) = (r0 + i, c0 + j);
                let v = target[(r, c)] + m[(i, j)];
                if r0 == c0 {
                    let sym = target[(c, r)] + m[(j, i)];
                    debug_assert!((v - sym).abs() <= T::epsilon() * (T::one() + v.abs()) * T::lit(8.0));
                    if i <= j {
                        target.set_sym(r, c, v);
                    }
                } else {
                    target.set_sym(r, c, v);
                }
            }
        }
    }

    /// `C + Σ x_i A_i`.
    pub fn evaluate(&self, x: &[T]) -> SymMatrix<T> {
        let mut f = self.constant.clone();
        for (a, &xi) in self.coefficients.iter().zip(x) {
            if xi != T::zero() && !a.is_zero() {
                f.add_scaled(xi, a);
            }
        }
        f
    }

    /// Replaces the block by its negation, i.e. `F(x) ⪯ 0` becomes `-F(x) ⪰ 0`.
    pub fn negated(mut self) -> Self {
        self.constant = self.constant.scale(-T::one());
        for a in &mut self.coefficients {
            *a = a.scale(-T::one());
        }
        self
    }

    /// Shifts the constant by `-ε I` with `ε = STRICTNESS · (1 + ‖C‖₂)`.
    pub fn with_strictness(mut self) -> Self {
        let eps = strictness_margin(&self.constant);
        for i in 0..self.order() {
            let c = self.constant[(i, i)];
            self.constant.set_sym(i, i, c - eps);
        }
        self
    }

    fn validate(&self, var_count: usize) -> Result<()> {
        let n = self.order();
        if self.coefficients.len() != var_count {
            return Err(Error::dims(format!(
                "block '{}' has {} coefficients for {var_count} variables",
                self.name,
                self.coefficients.len()
            )));
        }
        if self.coefficients.iter().any(|a| a.order() != n) {
            return Err(Error::dims(format!("block '{}' mixes orders", self.name)));
        }
        if !self.constant.is_finite() || self.coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("block '{}' has non-finite data", self.name)));
        }
        Ok(())
    }
}

/// `STRICTNESS · (1 + ‖C‖₂)` for a symmetric constant term.
pub fn strictness_margin<T: Real>(constant: &SymMatrix<T>) -> T {
    let norm = crate::linalg::sym_eig(constant)
        .map(|e| e.values.iter().fold(T::zero(), |m, v| m.max(v.abs())))
        .unwrap_or_else(|_| constant.frobenius_norm());
    T::lit(STRICTNESS) * (T::one() + norm)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LinearMatrixProgram<T: Real> {
    pub var_names: Vec<String>,
    pub objective: Vec<T>,
    pub blocks: Vec<LmiBlock<T>>,
    /// Scalar lower bounds; folded into 1×1 blocks by the solver.
    pub var_lower_bounds: Vec<Option<T>>,
}

impl<T: Real> LinearMatrixProgram<T> {
    pub fn new(var_names: Vec<String>, objective: Vec<T>) -> Result<Self> {
        if var_names.len() != objective.len() {
            return Err(Error::dims("objective length differs from variable count"));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("objective must be finite"));
        }
        let n = var_names.len();
        Ok(Self {
            var_names,
            objective,
            blocks: Vec::new(),
            var_lower_bounds: vec![None; n],
        })
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn new_block(&self, name: impl Into<String>, order: usize) -> LmiBlock<T> {
        LmiBlock::zeros(name, order, self.var_count())
    }

    pub fn push_block(&mut self, block: LmiBlock<T>) -> Result<()> {
        block.validate(self.var_count())?;
        self.blocks.push(block);
        Ok(())
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: T) {
        self.var_lower_bounds[var] = Some(bound);
    }

    pub fn block_orders(&self) -> Vec<usize> {
        self.blocks.iter().map(LmiBlock::order).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::invalid("program has no blocks"));
        }
        if self.var_lower_bounds.len() != self.var_count() {
            return Err(Error::dims("lower-bound list length differs from variable count"));
        }
        self.blocks.iter().try_for_each(|b| b.validate(self.var_count()))
    }

    /// Largest absolute entry over all blocks, used to scale tolerances.
    pub fn block_scale(&self) -> T {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::once(&b.constant).chain(&b.coefficients))
            .fold(T::one(), |m, a| m.max(a.max_abs()))
    }

    /// Every coefficient and constant is exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::once(&b.constant).chain(&b.coefficients))
            .all(|a| {
                let n = a.order();
                (0..n).all(|i| (0..n).all(|j| a[(i, j)] == a[(j, i)]))
            })
    }
}

/// Minimum eigenvalue over every block (and every lower bound) at `x`.
pub fn feasibility_margin<T: Real>(prob: &LinearMatrixProgram<T>, x: &[T]) -> Result<T> {
    if x.len() != prob.var_count() {
        return Err(Error::dims(format!(
            "point has {} entries, program has {} variables",
            x.len(),
            prob.var_count()
        )));
    }
    let mut margin = T::infinity();
    for b in &prob.blocks {
        margin = margin.min(min_eig(&b.evaluate(x))?);
    }
    for (lb, &xi) in prob.var_lower_bounds.iter().zip(x) {
        if let Some(lb) = lb {
            margin = margin.min(xi - *lb);
        }
    }
    Ok(margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct SolverOptions<T: Real> {
    /// Relative duality-gap target; defaults to `1e-7` in double precision.
    pub tolerance: T,
    /// Cap on the total number of Newton steps (phase I and II).
    pub max_iterations: usize,
    /// Every variable is confined to `|x_i| ≤ box_radius`, which keeps the
    /// barrier subproblems bounded.
    pub box_radius: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            // Single precision cannot resolve gaps near 1e-7.
            tolerance: T::lit(1e-7).max(T::epsilon() * T::lit(1e3)),
            max_iterations: 2000,
            box_radius: T::lit(1e6),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SdpSolution<T: Real> {
    pub x: Vec<T>,
    pub objective_value: T,
    pub status: SdpStatus,
    pub min_block_margin: T,
    /// Barrier duality gap divided by `max(1, |objective|)`.
    pub relative_gap: T,
    /// Scaled dual-feasibility residual at the last centered point.
    pub dual_residual: T,
    /// Upper bound on the best achievable margin when infeasible.
    pub infeasibility_bound: Option<T>,
    pub iterations: usize,
}

impl<T: Real> SdpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

/// Internal block form: constant plus sparse list of nonzero coefficients.
struct Barrier<T: Real> {
    constant: SymMatrix<T>,
    terms: Vec<(usize, SymMatrix<T>)>,
}

impl<T: Real> Barrier<T> {
    fn order(&self) -> usize {
        self.constant.order()
    }

    fn eval(&self, x: &[T]) -> SymMatrix<T> {
        let mut f = self.constant.clone();
        for (i, a) in &self.terms {
            if x[*i] != T::zero() {
                f.add_scaled(x[*i], a);
            }
        }
        f
    }
}

struct Workspace<T: Real> {
    blocks: Vec<Barrier<T>>,
    cost: Vec<T>,
    barrier_order: usize,
}

enum Centering {
    Done,
    Stalled,
    OutOfIterations,
}

impl<T: Real> Workspace<T> {
    fn dim(&self) -> usize {
        self.cost.len()
    }

    fn cost_at(&self, x: &[T]) -> T {
        self.cost.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }

    /// `t cᵀx − Σ log det F_j(x)`, or `None` outside the domain.
    fn potential(&self, t: T, x: &[T]) -> Option<T> {
        let mut phi = t * self.cost_at(x);
        for b in &self.blocks {
            let chol = cholesky_with_floor(&b.eval(x), T::zero())?;
            phi -= chol.log_det();
        }
        phi.is_finite().then_some(phi)
    }

    fn gradient_hessian(&self, t: T, x: &[T]) -> Option<(Vec<T>, Matrix<T>)> {
        let p = self.dim();
        let mut g: Vec<T> = self.cost.iter().map(|&c| t * c).collect();
        let mut h = Matrix::zeros(p, p);
        for b in &self.blocks {
            let chol = cholesky_with_floor(&b.eval(x), T::zero())?;
            let finv = chol.inverse();
            let n = b.order();
            let prods: Vec<(usize, Matrix<T>)> = b.terms.iter().map(|(i, a)| (*i, finv.matmul(a))).collect();
            for (k, (i, gi)) in prods.iter().enumerate() {
                g[*i] -= gi.diag().into_iter().sum::<T>();
                for (j, gj) in prods.iter().take(k + 1) {
                    // tr(G_i G_j)
                    let mut s = T::zero();
                    for r in 0..n {
                        for c in 0..n {
                            s += gi[(r, c)] * gj[(c, r)];
                        }
                    }
                    h[(*i, *j)] += s;
                    if *i != *j {
                        h[(*j, *i)] += s;
                    }
                }
            }
        }
        Some((g, h))
    }

    /// Damped Newton minimization of the barrier potential at fixed `t`.
    fn center(&self, t: T, x: &mut Vec<T>, budget: &mut usize, stop: &dyn Fn(&[T]) -> bool) -> Centering {
        let p = self.dim();
        loop {
            if stop(x) {
                return Centering::Done;
            }
            if *budget == 0 {
                return Centering::OutOfIterations;
            }
            *budget -= 1;
            let Some((g, h)) = self.gradient_hessian(t, x) else {
                return Centering::Stalled;
            };
            let Some(dx) = newton_direction(&g, &h) else {
                return Centering::Stalled;
            };
            let slope: T = g.iter().zip(&dx).map(|(&a, &b)| a * b).sum();
            let decrement = -slope;
            let Some(phi0) = self.potential(t, x) else {
                return Centering::Stalled;
            };
            // Below the rounding level of the potential no step can be
            // verified as a decrease.
            let floor = T::lit(1e-11).max(T::epsilon() * T::lit(16.0) * (T::one() + phi0.abs()));
            if !(decrement > T::zero()) || decrement * T::lit(0.5) <= floor {
                return Centering::Done;
            }
            let mut step = T::one();
            let mut accepted = false;
            for _ in 0..80 {
                let trial: Vec<T> = (0..p).map(|i| x[i] + step * dx[i]).collect();
                if let Some(phi) = self.potential(t, &trial) {
                    if phi < phi0 && phi <= phi0 + T::lit(0.01) * step * slope {
                        *x = trial;
                        accepted = true;
                        break;
                    }
                }
                step *= T::lit(0.5);
            }
            if !accepted {
                return Centering::Stalled;
            }
        }
    }
}

fn newton_direction<T: Real>(g: &[T], h: &Matrix<T>) -> Option<Vec<T>> {
    let p = g.len();
    // Jacobi scaling before factoring.
    let d: Vec<T> = (0..p)
        .map(|i| {
            let hii = h[(i, i)];
            if hii > T::zero() {
                T::one() / hii.sqrt()
            } else {
                T::one()
            }
        })
        .collect();
    let mut hs = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            hs[(i, j)] = d[i] * h[(i, j)] * d[j];
        }
    }
    let mut ridge = T::zero();
    for _ in 0..8 {
        let mut reg = hs.clone();
        for i in 0..p {
            reg[(i, i)] += ridge;
        }
        let reg = SymMatrix::from_matrix(reg).ok()?;
        if let Some(chol) = cholesky_with_floor(&reg, T::zero()) {
            let rhs: Vec<T> = (0..p).map(|i| -g[i] * d[i]).collect();
            let ys = chol.solve(&rhs);
            let dx: Vec<T> = (0..p).map(|i| ys[i] * d[i]).collect();
            return dx.iter().all(|v| v.is_finite()).then_some(dx);
        }
        ridge = if ridge == T::zero() {
            T::epsilon() * T::lit(p as f64)
        } else {
            ridge * T::lit(100.0)
        };
    }
    None
}

const BARRIER_GROWTH: f64 = 10.0;

/// Solves the program; the status is data, only malformed input is an error.
pub fn solve<T: Real>(prob: &LinearMatrixProgram<T>, opts: &SolverOptions<T>) -> Result<SdpSolution<T>> {
    prob.validate()?;
    if !(opts.tolerance > T::zero()) || !(opts.box_radius > T::zero()) {
        return Err(Error::invalid("solver tolerance and box radius must be positive"));
    }
    let p = prob.var_count();
    let radius = opts.box_radius;

    // Blocks that take part in the phase-I margin: user blocks and bounds.
    let mut constrained: Vec<Barrier<T>> = prob
        .blocks
        .iter()
        .map(|b| Barrier {
            constant: b.constant.clone(),
            terms: b
                .coefficients
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(i, a)| (i, a.clone()))
                .collect(),
        })
        .collect();
    for (i, lb) in prob.var_lower_bounds.iter().enumerate() {
        if let Some(lb) = lb {
            constrained.push(Barrier {
                constant: SymMatrix::from_diag(&[-*lb]),
                terms: vec![(i, SymMatrix::identity(1))],
            });
        }
    }
    let box_blocks = |dim: usize| -> Vec<Barrier<T>> {
        (0..dim)
            .flat_map(|i| {
                [T::one(), -T::one()].into_iter().map(move |sgn| Barrier {
                    constant: SymMatrix::from_diag(&[radius]),
                    terms: vec![(i, SymMatrix::from_diag(&[-sgn]))],
                })
            })
            .collect()
    };

    let mut budget = opts.max_iterations;
    let mut x = vec![T::zero(); p];
    let start_margin = constrained
        .iter()
        .map(|b| min_eig(&b.eval(&x)))
        .try_fold(T::infinity(), |m, v| v.map(|v| m.min(v)))?;

    if !(start_margin > T::zero()) {
        match phase_one(&constrained, &box_blocks(p), p, start_margin, opts, &mut budget) {
            PhaseOne::Feasible(x1) => x = x1,
            PhaseOne::Infeasible(bound) => {
                return Ok(finish(
                    prob,
                    x,
                    SdpStatus::Infeasible,
                    T::infinity(),
                    T::zero(),
                    Some(bound),
                    opts,
                    budget,
                ));
            }
            PhaseOne::Failed(best) => {
                return Ok(finish(
                    prob,
                    best,
                    SdpStatus::NumericalFailure,
                    T::infinity(),
                    T::zero(),
                    None,
                    opts,
                    budget,
                ));
            }
        }
    }

    // Phase II.
    let mut blocks = constrained;
    blocks.extend(box_blocks(p));
    let ws = Workspace {
        barrier_order: blocks.iter().map(Barrier::order).sum(),
        blocks,
        cost: prob.objective.clone(),
    };
    let m = T::lit(ws.barrier_order as f64);
    let mut t = T::one();
    let never = |_: &[T]| false;
    loop {
        let outcome = ws.center(t, &mut x, &mut budget, &never);
        let obj = ws.cost_at(&x);
        let gap = m / t / obj.abs().max(T::one());
        let residual = dual_residual(&ws, t, &x);
        match outcome {
            Centering::Done if gap <= opts.tolerance => {
                return Ok(finish(prob, x, SdpStatus::Optimal, gap, residual, None, opts, budget));
            }
            Centering::Done => t *= T::lit(BARRIER_GROWTH),
            Centering::Stalled => {
                // Numerical floor reached; accept if the gap is already small.
                let status = if gap <= opts.tolerance * T::lit(100.0) {
                    SdpStatus::Optimal
                } else {
                    SdpStatus::NumericalFailure
                };
                log::debug!("barrier stalled at t = {t}, gap {gap}");
                return Ok(finish(prob, x, status, gap, residual, None, opts, budget));
            }
            Centering::OutOfIterations => {
                return Ok(finish(
                    prob,
                    x,
                    SdpStatus::NumericalFailure,
                    gap,
                    residual,
                    None,
                    opts,
                    budget,
                ));
            }
        }
    }
}

fn dual_residual<T: Real>(ws: &Workspace<T>, t: T, x: &[T]) -> T {
    let cnorm = ws.cost.iter().fold(T::one(), |m, c| m.max(c.abs()));
    match ws.gradient_hessian(t, x) {
        Some((g, _)) => g.iter().fold(T::zero(), |m, v| m.max(v.abs())) / t / cnorm,
        None => T::infinity(),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    prob: &LinearMatrixProgram<T>,
    x: Vec<T>,
    status: SdpStatus,
    relative_gap: T,
    dual_residual: T,
    infeasibility_bound: Option<T>,
    opts: &SolverOptions<T>,
    budget: usize,
) -> SdpSolution<T> {
    let objective_value = prob.objective.iter().zip(&x).map(|(&c, &v)| c * v).sum();
    let min_block_margin = feasibility_margin(prob, &x).unwrap_or(T::nan());
    SdpSolution {
        x,
        objective_value,
        status,
        min_block_margin,
        relative_gap,
        dual_residual,
        infeasibility_bound,
        iterations: opts.max_iterations - budget,
    }
}

enum PhaseOne<T> {
    Feasible(Vec<T>),
    Infeasible(T),
    Failed(Vec<T>),
}

/// Maximizes a common margin `s` with `F_j(x) ⪰ s I` until `s > 0`, or
/// until the duality bound proves the best margin is not positive.
fn phase_one<T: Real>(
    constrained: &[Barrier<T>],
    boxes: &[Barrier<T>],
    p: usize,
    start_margin: T,
    opts: &SolverOptions<T>,
    budget: &mut usize,
) -> PhaseOne<T> {
    let s_idx = p;
    let mut blocks: Vec<Barrier<T>> = constrained
        .iter()
        .map(|b| {
            let mut terms = b.terms.clone();
            terms.push((s_idx, SymMatrix::identity(b.order()).scale(-T::one())));
            Barrier {
                constant: b.constant.clone(),
                terms,
            }
        })
        .collect();
    blocks.extend(boxes.iter().map(|b| Barrier {
        constant: b.constant.clone(),
        terms: b.terms.clone(),
    }));
    let mut cost = vec![T::zero(); p + 1];
    cost[s_idx] = -T::one();
    let ws = Workspace {
        barrier_order: blocks.iter().map(Barrier::order).sum(),
        blocks,
        cost,
    };
    let m = T::lit(ws.barrier_order as f64);
    let mut x = vec![T::zero(); p + 1];
    x[s_idx] = start_margin - T::one();

    // A positive margin with some slack to spare gives phase II a usable start.
    let stop = |z: &[T]| z[s_idx] > T::zero();
    let mut t = T::one();
    loop {
        let outcome = ws.center(t, &mut x, budget, &stop);
        if x[s_idx] > T::zero() {
            x.truncate(p);
            return PhaseOne::Feasible(x);
        }
        let bound = x[s_idx] + m / t;
        match outcome {
            Centering::Done if bound < T::zero() => return PhaseOne::Infeasible(bound),
            Centering::Done if m / t <= opts.tolerance => return PhaseOne::Infeasible(bound.max(x[s_idx])),
            Centering::Done => t *= T::lit(BARRIER_GROWTH),
            Centering::Stalled if m / t <= opts.tolerance.sqrt() => {
                return PhaseOne::Infeasible(x[s_idx]);
            }
            Centering::Stalled | Centering::OutOfIterations => {
                x.truncate(p);
                return PhaseOne::Failed(x);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_var(name: &str) -> LinearMatrixProgram<f64> {
        LinearMatrixProgram::new(vec![name.to_string()], vec![1.0]).unwrap()
    }

    #[test]
    fn two_by_two_psd_boundary() {
        // minimize x s.t. [[x, 1], [1, x]] ⪰ 0  → x* = 1
        let mut prob = one_var("x");
        let mut b = prob.new_block("psd", 2);
        b.add_entry(Some(0), 0, 0, 1.0);
        b.add_entry(Some(0), 1, 1, 1.0);
        b.add_entry(None, 0, 1, 1.0);
        prob.push_block(b).unwrap();
        let sol = solve(&prob, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal(), "{sol:?}");
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.objective_value, 1.0, epsilon = 1e-6);
        assert!(sol.min_block_margin >= -1e-8);
    }

    #[test]
    fn feasibility_only_with_lower_bound() {
        let mut prob = LinearMatrixProgram::new(vec!["x".into()], vec![0.0]).unwrap();
        let mut b = prob.new_block("diag", 1);
        b.add_entry(Some(0), 0, 0, 1.0);
        prob.push_block(b).unwrap();
        prob.set_lower_bound(0, 5.0);
        let sol = solve(&prob, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.x[0] >= 5.0);
    }

    #[test]
    fn detects_infeasibility() {
        // x ≥ 1 and -x ≥ 0 cannot both hold.
        let mut prob = one_var("x");
        let mut a = prob.new_block("a", 1);
        a.add_entry(Some(0), 0, 0, 1.0);
        a.add_entry(None, 0, 0, -1.0);
        prob.push_block(a).unwrap();
        let mut b = prob.new_block("b", 1);
        b.add_entry(Some(0), 0, 0, -1.0);
        prob.push_block(b).unwrap();
        let sol = solve(&prob, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert!(sol.infeasibility_bound.unwrap() < 0.0);
    }

    #[test]
    fn feasibility_margin_examples() {
        let mut prob = LinearMatrixProgram::<f64>::new(vec![], vec![]).unwrap();
        let mut b = prob.new_block("id", 3);
        for i in 0..3 {
            b.add_entry(None, i, i, 1.0);
        }
        prob.push_block(b).unwrap();
        assert_eq!(feasibility_margin(&prob, &[]).unwrap(), 1.0);

        let mut prob = one_var("x");
        let mut b = prob.new_block("diag", 1);
        b.add_entry(Some(0), 0, 0, 1.0);
        prob.push_block(b).unwrap();
        assert_eq!(feasibility_margin(&prob, &[-2.0]).unwrap(), -2.0);
        assert!(matches!(
            feasibility_margin(&prob, &[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rejects_malformed_programs() {
        let prob = one_var("x");
        assert!(matches!(
            solve(&prob, &SolverOptions::default()),
            Err(Error::InvalidInput(_))
        ));
        let mut prob = one_var("x");
        let mut b = LmiBlock::zeros("bad", 2, 2);
        b.add_entry(None, 0, 0, 1.0);
        assert!(prob.push_block(b).is_err());
    }

    #[test]
    fn iteration_cap_reports_numerical_failure() {
        let mut prob = one_var("x");
        let mut b = prob.new_block("psd", 2);
        b.add_entry(Some(0), 0, 0, 1.0);
        b.add_entry(Some(0), 1, 1, 1.0);
        b.add_entry(None, 0, 1, 1.0);
        prob.push_block(b).unwrap();
        let opts = SolverOptions {
            max_iterations: 3,
            ..SolverOptions::default()
        };
        let sol = solve(&prob, &opts).unwrap();
        assert_eq!(sol.status, SdpStatus::NumericalFailure);
        assert_eq!(sol.x.len(), 1);
    }

    #[test]
    fn strictness_shift_uses_constant_norm() {
        let b = LmiBlock::<f64> {
            name: "c".into(),
            constant: SymMatrix::from_diag(&[0.0, -1.0]),
            coefficients: vec![],
        }
        .with_strictness();
        assert_abs_diff_eq!(b.constant[(0, 0)], -2e-6, epsilon = 1e-18);
        assert_abs_diff_eq!(b.constant[(1, 1)], -1.0 - 2e-6, epsilon = 1e-15);
    }
}

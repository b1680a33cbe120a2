//! Unit vector control `u = K σ/‖σ‖`: minimum reaching-time synthesis with
//! a quadratic Lyapunov function `v(σ) = σᵀ P σ`, and bound analysis for a
//! given gain.
//!
//! For fixed `ρ > 0` the synthesis problem in `Z = P⁻¹`, `Y = K Z`, `μ`, `θ`
//! is convex:
//!
//! ```text
//! [ B_i Y + Yᵀ B_iᵀ + ρ Z + μ I   Z     δ Z  ]
//! [ Z                            −ρ I  0    ]  ≺ 0     (every vertex B_i)
//! [ δ Z                          0     −μ I ]
//!
//! [ θ   σ0ᵀ ]
//! [ σ0  Z   ]  ≻ 0,   T_r ≤ √θ
//! ```
//!
//! and `ρ` is found by a line search. When `δ = 0` the third block row and
//! column are dropped. An optional budget `α_u` adds `Yᵀ Y ≺ α_u² Z`, which
//! caps `‖u‖` by `α_u √λ_max(P)`.

use serde::{Deserialize, Serialize};

use crate::design::{
    audit_weights, check_alpha, check_gain, check_sigma0, require_optimal, sym_part, unit, DesignOptions,
    RobustnessAudit, SolveInfo,
};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_pd, inverse, max_eig, Matrix, SymMatrix};
use crate::model::{ControlKind, Controller, PolytopicPlant};
use crate::scalar::Real;
use crate::sdp::{feasibility_margin, solve, LinearMatrixProgram, SdpStatus, SolverOptions, POSITIVITY_FLOOR};
use crate::search::{grid_then_golden, GridPoint, LineSearchOptions};

/// Index of entry `(a, b)` of a symmetric `n×n` matrix stored as its upper
/// triangle row by row.
pub fn sym_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + b
}

/// Coefficient matrix of the upper-triangle variable `(a, b)`.
fn sym_unit<T: Real>(n: usize, a: usize, b: usize) -> Matrix<T> {
    let mut e = Matrix::zeros(n, n);
    e[(a, b)] = T::one();
    e[(b, a)] = T::one();
    e
}

fn sym_from_upper<T: Real>(n: usize, x: &[T]) -> SymMatrix<T> {
    let mut s = SymMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            s.set_sym(a, b, x[sym_index(n, a, b)]);
        }
    }
    s
}

/// Decision-vector layout `(Z upper triangle, Y row-major, μ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UvcLayout {
    pub n: usize,
    pub m: usize,
}

impl UvcLayout {
    pub fn z(&self, a: usize, b: usize) -> usize {
        sym_index(self.n, a, b)
    }

    fn z_count(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn y(&self, r: usize, c: usize) -> usize {
        self.z_count() + r * self.n + c
    }

    pub fn mu(&self) -> usize {
        self.z_count() + self.m * self.n
    }

    pub fn theta(&self) -> usize {
        self.mu() + 1
    }

    pub fn var_count(&self) -> usize {
        self.theta() + 1
    }

    fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.var_count());
        for a in 0..self.n {
            for b in a..self.n {
                names.push(format!("z[{a},{b}]"));
            }
        }
        for r in 0..self.m {
            for c in 0..self.n {
                names.push(format!("y[{r},{c}]"));
            }
        }
        names.push("mu".into());
        names.push("theta".into());
        names
    }
}

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if !(rho > T::zero() && rho.is_finite()) {
        return Err(Error::invalid(format!("rho = {rho} must be positive")));
    }
    Ok(())
}

/// Assembles the inner (fixed `ρ`) synthesis program; its objective is `θ`.
pub fn build_uvc_inner<T: Real>(
    plant: &PolytopicPlant<T>,
    sigma0: &[T],
    rho: T,
    alpha_u: Option<T>,
) -> Result<LinearMatrixProgram<T>> {
    check_sigma0(plant, sigma0)?;
    check_alpha(alpha_u)?;
    check_rho(rho)?;
    let (n, m) = (plant.n(), plant.m());
    let l = UvcLayout { n, m };
    let mut objective = vec![T::zero(); l.var_count()];
    objective[l.theta()] = T::one();
    let mut prog = LinearMatrixProgram::new(l.names(), objective)?;

    let delta = plant.delta();
    let full = delta > T::zero();
    let order = if full { 3 * n } else { 2 * n };
    for (i, b) in plant.vertices().iter().enumerate() {
        let mut blk = prog.new_block(format!("decrease at vertex {i}"), order);
        for r in 0..m {
            for c in 0..n {
                blk.add_submatrix(Some(l.y(r, c)), 0, 0, &sym_part(&b.matmul(&unit(m, n, r, c))));
            }
        }
        for a in 0..n {
            for c in a..n {
                let e = sym_unit::<T>(n, a, c);
                let v = Some(l.z(a, c));
                blk.add_submatrix(v, 0, 0, &e.scale(rho));
                blk.add_submatrix(v, 0, n, &e);
                if full {
                    blk.add_submatrix(v, 0, 2 * n, &e.scale(delta));
                }
            }
        }
        for j in 0..n {
            blk.add_entry(Some(l.mu()), j, j, T::one());
            blk.add_entry(None, n + j, n + j, -rho);
            if full {
                blk.add_entry(Some(l.mu()), 2 * n + j, 2 * n + j, -T::one());
            }
        }
        prog.push_block(blk.negated().with_strictness())?;
    }

    let mut reach = prog.new_block("reaching time", n + 1);
    reach.add_entry(Some(l.theta()), 0, 0, T::one());
    for a in 0..n {
        reach.add_entry(None, 0, 1 + a, sigma0[a]);
        for c in a..n {
            reach.add_submatrix(Some(l.z(a, c)), 1, 1, &sym_unit(n, a, c));
        }
    }
    prog.push_block(reach.with_strictness())?;

    if let Some(alpha) = alpha_u {
        // [[I, Y/α], [Yᵀ/α, Z]] ≻ 0, a congruence of [[α² I, Y], [Yᵀ, Z]].
        let mut budget = prog.new_block("control budget", m + n);
        for r in 0..m {
            budget.add_entry(None, r, r, T::one());
            for c in 0..n {
                budget.add_entry(Some(l.y(r, c)), r, m + c, T::one() / alpha);
            }
        }
        for a in 0..n {
            for c in a..n {
                budget.add_submatrix(Some(l.z(a, c)), m, m, &sym_unit(n, a, c));
            }
        }
        prog.push_block(budget.with_strictness())?;
    }

    let floor = T::lit(POSITIVITY_FLOOR);
    prog.set_lower_bound(l.mu(), floor);
    prog.set_lower_bound(l.theta(), floor);
    Ok(prog)
}

/// Optimum of the inner problem at one `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UvcInnerSolution<T: Real> {
    pub rho: T,
    pub theta: T,
    pub z: SymMatrix<T>,
    pub y: Matrix<T>,
    pub mu: T,
    pub solve: SolveInfo<T>,
}

impl<T: Real> UvcInnerSolution<T> {
    pub fn decision_vector(&self) -> Vec<T> {
        let (m, n) = self.y.shape();
        let l = UvcLayout { n, m };
        let mut x = vec![T::zero(); l.var_count()];
        for a in 0..n {
            for c in a..n {
                x[l.z(a, c)] = self.z[(a, c)];
            }
            for r in 0..m {
                x[l.y(r, a)] = self.y[(r, a)];
            }
        }
        x[l.mu()] = self.mu;
        x[l.theta()] = self.theta;
        x
    }
}

/// Solves the inner problem; `Ok(None)` when it is infeasible at this `ρ`.
pub fn solve_uvc_inner<T: Real>(
    plant: &PolytopicPlant<T>,
    sigma0: &[T],
    rho: T,
    alpha_u: Option<T>,
    solver: &SolverOptions<T>,
) -> Result<Option<UvcInnerSolution<T>>> {
    let prog = build_uvc_inner(plant, sigma0, rho, alpha_u)?;
    let sol = solve(&prog, solver)?;
    if sol.status == SdpStatus::Infeasible {
        return Ok(None);
    }
    require_optimal(&sol, || unreachable!("infeasible handled above"))?;
    let (n, m) = (plant.n(), plant.m());
    let l = UvcLayout { n, m };
    let mut y = Matrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            y[(r, c)] = sol.x[l.y(r, c)];
        }
    }
    Ok(Some(UvcInnerSolution {
        rho,
        theta: sol.x[l.theta()],
        z: sym_from_upper(n, &sol.x),
        y,
        mu: sol.x[l.mu()],
        solve: SolveInfo::from(&sol),
    }))
}

/// `Kᵀ Bᵀ P + P B K + (δ²/μ) I + μ P² + ρ P + ρ⁻¹ I`; negative definite
/// exactly when the synthesis vertex block is (for `B` in place of `B_i`).
pub fn uvc_decrease_matrix<T: Real>(
    b: &Matrix<T>,
    gain: &Matrix<T>,
    p: &SymMatrix<T>,
    mu: T,
    rho: T,
    delta: T,
) -> SymMatrix<T> {
    let pm = p.as_matrix();
    let mut a = sym_part(&pm.matmul(&b.matmul(gain)));
    a = &a + &pm.matmul(pm).scale(mu);
    a = &a + &pm.scale(rho);
    let shift = delta * delta / mu + T::one() / rho;
    for j in 0..a.rows() {
        a[(j, j)] += shift;
    }
    SymMatrix::from_matrix(a).expect("square by construction")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UvcCertificate<T: Real> {
    pub z: SymMatrix<T>,
    pub y: Matrix<T>,
    pub mu: T,
    pub rho: T,
    pub theta: T,
    pub gain: Matrix<T>,
    /// `√θ`.
    pub t_bound: T,
    pub alpha_u: Option<T>,
    pub delta: T,
    pub sigma0: Vec<T>,
    pub z_condition: T,
    pub conditioning_warning: bool,
    pub recheck_margin: T,
    pub robustness: RobustnessAudit<T>,
    pub solve: SolveInfo<T>,
    /// Line-search grid with infeasible points marked.
    pub rho_grid: Vec<GridPoint<T>>,
}

impl<T: Real> UvcCertificate<T> {
    /// `P = Z⁻¹`.
    pub fn p(&self) -> Result<SymMatrix<T>> {
        let chol = cholesky_pd(&self.z)?.ok_or_else(|| Error::NumericalFailure("Z is not positive definite".into()))?;
        Ok(chol.inverse())
    }

    pub fn lyapunov(&self, sigma: &[T]) -> Result<T> {
        let p = self.p()?;
        let ps = p.mul_vec(sigma);
        Ok(sigma.iter().zip(&ps).map(|(&a, &b)| a * b).sum())
    }

    /// `α_u √λ_max(P)`, when a budget was imposed.
    pub fn control_ceiling(&self) -> Result<Option<T>> {
        match self.alpha_u {
            None => Ok(None),
            Some(a) => Ok(Some(a * max_eig(&self.p()?)?.sqrt())),
        }
    }

    pub fn controller(&self) -> Controller<T> {
        Controller {
            kind: ControlKind::Uvc,
            gain: self.gain.clone(),
        }
    }

    fn inner(&self) -> UvcInnerSolution<T> {
        UvcInnerSolution {
            rho: self.rho,
            theta: self.theta,
            z: self.z.clone(),
            y: self.y.clone(),
            mu: self.mu,
            solve: self.solve.clone(),
        }
    }

    pub fn decision_vector(&self) -> Vec<T> {
        self.inner().decision_vector()
    }

    /// Rebuilds the inner program at the stored `ρ` and returns the smallest
    /// block margin at the stored decision vector.
    pub fn recheck(&self, plant: &PolytopicPlant<T>) -> Result<T> {
        if plant.delta() != self.delta {
            return Err(Error::invalid(format!(
                "certificate was issued for delta = {}, plant has {}",
                self.delta,
                plant.delta()
            )));
        }
        if self.y.shape() != (plant.m(), plant.n()) || self.z.order() != plant.n() {
            return Err(Error::invalid("certificate dimensions do not match the plant"));
        }
        let prog = build_uvc_inner(plant, &self.sigma0, self.rho, self.alpha_u)?;
        feasibility_margin(&prog, &self.decision_vector())
    }
}

fn check_range<T: Real>(rho_range: (T, T)) -> Result<()> {
    let (lo, hi) = rho_range;
    if !(lo > T::zero() && lo <= hi && hi.is_finite()) {
        return Err(Error::invalid(format!(
            "rho range [{lo}, {hi}] must satisfy 0 < lo <= hi"
        )));
    }
    Ok(())
}

/// Line search over `ρ ∈ rho_range` followed by gain recovery
/// `K = Y Z⁻¹`, a block-by-block recheck, and the robustness audit.
pub fn synthesize_uvc<T: Real>(
    plant: &PolytopicPlant<T>,
    sigma0: &[T],
    rho_range: (T, T),
    alpha_u: Option<T>,
    opts: &DesignOptions<T>,
) -> Result<UvcCertificate<T>> {
    check_sigma0(plant, sigma0)?;
    check_range(rho_range)?;
    let outcome = grid_then_golden(rho_range.0, rho_range.1, &opts.line_search, |rho| {
        Ok(solve_uvc_inner(plant, sigma0, rho, alpha_u, &opts.solver)?.map(|s| (s.theta, s)))
    })?
    .ok_or_else(|| {
        Error::NoCertificate(format!(
            "UVC synthesis infeasible for every rho in [{}, {}] (control budget {alpha_u:?})",
            rho_range.0, rho_range.1
        ))
    })?;
    let inner = outcome.payload;
    let n = plant.n();

    let z_inv = inverse(inner.z.as_matrix())?;
    let z_condition = z_inv.condition;
    let conditioning_warning = z_inv.ill_conditioned();
    if conditioning_warning {
        log::warn!("UVC synthesis: Z is ill-conditioned (condition {z_condition})");
    }
    let gain = inner.y.matmul(&z_inv.matrix);
    let p = SymMatrix::from_matrix(z_inv.matrix)?;

    let prog = build_uvc_inner(plant, sigma0, inner.rho, alpha_u)?;
    let recheck_margin = feasibility_margin(&prog, &inner.decision_vector())?;
    if recheck_margin < -opts.recheck_tolerance {
        return Err(Error::NumericalFailure(format!(
            "UVC certificate fails its own recheck (margin {recheck_margin})"
        )));
    }

    let mut worst = T::neg_infinity();
    for w in audit_weights::<T>(opts.seed, opts.audit_samples, plant.vertex_count()) {
        let b = plant.combine(&w)?;
        let a = uvc_decrease_matrix(&b, &gain, &p, inner.mu, inner.rho, plant.delta());
        worst = worst.max(max_eig(&a)?);
    }
    let robustness = RobustnessAudit {
        samples: opts.audit_samples,
        worst_max_eig: worst,
    };
    if opts.audit_samples > 0 && !robustness.passed() {
        return Err(Error::NumericalFailure(format!(
            "UVC gain fails the robustness audit (largest eigenvalue {worst})"
        )));
    }
    debug_assert_eq!(p.order(), n);

    Ok(UvcCertificate {
        t_bound: inner.theta.sqrt(),
        z: inner.z,
        y: inner.y,
        mu: inner.mu,
        rho: inner.rho,
        theta: inner.theta,
        gain,
        alpha_u,
        delta: plant.delta(),
        sigma0: sigma0.to_vec(),
        z_condition,
        conditioning_warning,
        recheck_margin,
        robustness,
        solve: inner.solve,
        rho_grid: outcome.grid,
    })
}

/// `θ(ρ)` over a grid, with infeasible points kept as data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RhoSweep<T: Real> {
    pub points: Vec<GridPoint<T>>,
}

impl<T: Real> RhoSweep<T> {
    /// Header `rho,theta,feasible`; infeasible rows leave `theta` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,theta,feasible\n");
        for p in &self.points {
            let rho = format_sig(p.rho.to_f64_lossy());
            match p.value {
                Some(v) => out.push_str(&format!("{rho},{},true\n", format_sig(v.to_f64_lossy()))),
                None => out.push_str(&format!("{rho},,false\n")),
            }
        }
        out
    }

    pub fn values(&self) -> Vec<Option<T>> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Feasible point with the smallest `θ`.
    pub fn best(&self) -> Option<GridPoint<T>> {
        self.points
            .iter()
            .filter(|p| p.value.is_some())
            .copied()
            .min_by(|a, b| a.value.partial_cmp(&b.value).expect("finite"))
    }
}

/// 12 significant digits in scientific notation.
pub fn format_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Solves the inner problem at every grid point (in parallel).
pub fn rho_sweep<T: Real>(
    plant: &PolytopicPlant<T>,
    sigma0: &[T],
    rho_grid: &[T],
    alpha_u: Option<T>,
    solver: &SolverOptions<T>,
) -> Result<RhoSweep<T>> {
    use rayon::prelude::*;
    if rho_grid.is_empty() {
        return Err(Error::invalid("rho grid is empty"));
    }
    if rho_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("rho grid must be strictly increasing"));
    }
    rho_grid.iter().try_for_each(|&r| check_rho(r))?;
    let points = rho_grid
        .par_iter()
        .map(|&rho| {
            let value = match solve_uvc_inner(plant, sigma0, rho, alpha_u, solver) {
                Ok(s) => s.map(|s| s.theta),
                Err(Error::NumericalFailure(msg)) => {
                    log::warn!("rho sweep: solver failed at rho = {rho}: {msg}");
                    None
                }
                Err(e) => return Err(e),
            };
            Ok(GridPoint { rho, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RhoSweep { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UvcAnalysisResult<T: Real> {
    pub p: SymMatrix<T>,
    /// `ν = 1/μ`; absent when `δ = 0`.
    pub nu: Option<T>,
    pub rho: T,
    /// `√(σ0ᵀ P σ0)`.
    pub t_bound: T,
    pub solve: SolveInfo<T>,
}

/// Analysis program for a fixed gain and `ρ` over `(P upper triangle, ν)`:
///
/// ```text
/// [ Kᵀ B_iᵀ P + P B_i K + ν δ² I + ρ P + ρ⁻¹ I   P    ]
/// [ P                                          −ν I ]  ≺ 0,   P ≻ 0
/// ```
///
/// minimizing `σ0ᵀ P σ0`. With `δ = 0` the decrease condition reduces to
/// `Kᵀ B_iᵀ P + P B_i K + ρ P + ρ⁻¹ I ≺ 0`.
pub fn build_uvc_analysis<T: Real>(
    plant: &PolytopicPlant<T>,
    gain: &Matrix<T>,
    sigma0: &[T],
    rho: T,
) -> Result<LinearMatrixProgram<T>> {
    check_sigma0(plant, sigma0)?;
    check_gain(plant, gain)?;
    check_rho(rho)?;
    let n = plant.n();
    let delta = plant.delta();
    let full = delta > T::zero();
    let mut names = Vec::new();
    let mut objective = Vec::new();
    for a in 0..n {
        for c in a..n {
            names.push(format!("p[{a},{c}]"));
            let w = if a == c { T::one() } else { T::lit(2.0) };
            objective.push(w * sigma0[a] * sigma0[c]);
        }
    }
    let nu = names.len();
    if full {
        names.push("nu".into());
        objective.push(T::zero());
    }
    let mut prog = LinearMatrixProgram::new(names, objective)?;
    let order = if full { 2 * n } else { n };
    for (i, b) in plant.vertices().iter().enumerate() {
        let bk = b.matmul(gain);
        let mut blk = prog.new_block(format!("decrease at vertex {i}"), order);
        for a in 0..n {
            for c in a..n {
                let e = sym_unit::<T>(n, a, c);
                let v = Some(sym_index(n, a, c));
                let coef = &sym_part(&e.matmul(&bk)) + &e.scale(rho);
                blk.add_submatrix(v, 0, 0, &coef);
                if full {
                    blk.add_submatrix(v, 0, n, &e);
                }
            }
        }
        for j in 0..n {
            blk.add_entry(None, j, j, T::one() / rho);
            if full {
                blk.add_entry(Some(nu), j, j, delta * delta);
                blk.add_entry(Some(nu), n + j, n + j, -T::one());
            }
        }
        prog.push_block(blk.negated().with_strictness())?;
    }
    let mut pos = prog.new_block("P positive definite", n);
    for a in 0..n {
        for c in a..n {
            pos.add_submatrix(Some(sym_index(n, a, c)), 0, 0, &sym_unit(n, a, c));
        }
    }
    prog.push_block(pos.with_strictness())?;
    if full {
        prog.set_lower_bound(nu, T::lit(POSITIVITY_FLOOR));
    }
    Ok(prog)
}

fn analyze_uvc_at<T: Real>(
    plant: &PolytopicPlant<T>,
    gain: &Matrix<T>,
    sigma0: &[T],
    rho: T,
    solver: &SolverOptions<T>,
) -> Result<Option<UvcAnalysisResult<T>>> {
    let prog = build_uvc_analysis(plant, gain, sigma0, rho)?;
    let sol = solve(&prog, solver)?;
    if sol.status == SdpStatus::Infeasible {
        return Ok(None);
    }
    require_optimal(&sol, || unreachable!("infeasible handled above"))?;
    let n = plant.n();
    let p = sym_from_upper(n, &sol.x);
    Ok(Some(UvcAnalysisResult {
        t_bound: sol.objective_value.max(T::zero()).sqrt(),
        nu: (plant.delta() > T::zero()).then(|| sol.x[n * (n + 1) / 2]),
        p,
        rho,
        solve: SolveInfo::from(&sol),
    }))
}

/// Best quadratic reaching-time bound certifiable for the given gain, with
/// the same `ρ` line search as synthesis.
pub fn analyze_uvc<T: Real>(
    plant: &PolytopicPlant<T>,
    gain: &Matrix<T>,
    sigma0: &[T],
    rho_range: (T, T),
    solver: &SolverOptions<T>,
    line_search: &LineSearchOptions,
) -> Result<UvcAnalysisResult<T>> {
    check_range(rho_range)?;
    check_gain(plant, gain)?;
    let outcome = grid_then_golden(rho_range.0, rho_range.1, line_search, |rho| {
        Ok(analyze_uvc_at(plant, gain, sigma0, rho, solver)?.map(|r| (r.t_bound, r)))
    })?
    .ok_or_else(|| Error::GainNotCertified("no quadratic Lyapunov function certifies this UVC gain".into()))?;
    Ok(outcome.payload)
}

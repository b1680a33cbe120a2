//! Variable structure control `u = K sign(σ)`: minimum reaching-time gain
//! synthesis with a diagonal (Persidskii) Lyapunov function
//! `v(σ) = Σ p_j |σ_j|`, and bound analysis for a given gain.
//!
//! Synthesis works in the variables `Z_d = P_d⁻¹` (diagonal), `Y = K Z_d`,
//! `β` and `θ`:
//!
//! ```text
//! [ B_i Y + Yᵀ B_iᵀ + β I   Z_d   δ Z_d ]
//! [ Z_d                    −I    0     ]  ≺ 0     (every vertex B_i)
//! [ δ Z_d                  0     −β I  ]
//!
//! [ θ  ζᵀ  ]
//! [ ζ  Z_d ]  ≻ 0,   ζ_j = √|σ0_j|,   T_r ≤ 2θ
//! ```
//!
//! When `δ = 0` the third block row and column are dropped. An optional
//! budget `α_u` adds `Yᵀ Y ≺ α_u² Z_d`, which caps `‖u‖` by `α_u √tr P_d`.

use serde::{Deserialize, Serialize};

use crate::design::{
    audit_weights, check_alpha, check_gain, check_sigma0, require_optimal, sym_part, unit, DesignOptions,
    RobustnessAudit, SolveInfo,
};
use crate::error::{Error, Result};
use crate::linalg::{max_eig, Matrix, SymMatrix, ILL_CONDITIONED};
use crate::model::{ControlKind, Controller, PolytopicPlant};
use crate::scalar::Real;
use crate::sdp::{feasibility_margin, solve, LinearMatrixProgram, SolverOptions, POSITIVITY_FLOOR};

/// Decision-vector layout `(z_1..z_n, Y row-major, β, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VscLayout {
    pub n: usize,
    pub m: usize,
}

impl VscLayout {
    pub fn z(&self, j: usize) -> usize {
        j
    }

    pub fn y(&self, r: usize, c: usize) -> usize {
        self.n + r * self.n + c
    }

    pub fn beta(&self) -> usize {
        self.n + self.m * self.n
    }

    pub fn theta(&self) -> usize {
        self.beta() + 1
    }

    pub fn var_count(&self) -> usize {
        self.theta() + 1
    }

    fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.n).map(|j| format!("z[{j}]")).collect();
        for r in 0..self.m {
            for c in 0..self.n {
                names.push(format!("y[{r},{c}]"));
            }
        }
        names.push("beta".into());
        names.push("theta".into());
        names
    }
}

/// Assembles the synthesis program; its objective is `θ`.
pub fn build_vsc_synthesis<T: Real>(
    plant: &PolytopicPlant<T>,
    sigma0: &[T],
    alpha_u: Option<T>,
) -> Result<LinearMatrixProgram<T>> {
    check_sigma0(plant, sigma0)?;
    check_alpha(alpha_u)?;
    let (n, m) = (plant.n(), plant.m());
    let l = VscLayout { n, m };
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
        for j in 0..n {
            blk.add_entry(Some(l.beta()), j, j, T::one());
            blk.add_entry(Some(l.z(j)), j, n + j, T::one());
            blk.add_entry(None, n + j, n + j, -T::one());
            if full {
                blk.add_entry(Some(l.z(j)), j, 2 * n + j, delta);
                blk.add_entry(Some(l.beta()), 2 * n + j, 2 * n + j, -T::one());
            }
        }
        prog.push_block(blk.negated().with_strictness())?;
    }

    let mut reach = prog.new_block("reaching time", n + 1);
    reach.add_entry(Some(l.theta()), 0, 0, T::one());
    for j in 0..n {
        reach.add_entry(None, 0, 1 + j, sigma0[j].abs().sqrt());
        reach.add_entry(Some(l.z(j)), 1 + j, 1 + j, T::one());
    }
    prog.push_block(reach.with_strictness())?;

    if let Some(alpha) = alpha_u {
        // [[I, Y/α], [Yᵀ/α, Z_d]] ≻ 0, a congruence of [[α² I, Y], [Yᵀ, Z_d]].
        let mut budget = prog.new_block("control budget", m + n);
        for r in 0..m {
            budget.add_entry(None, r, r, T::one());
            for c in 0..n {
                budget.add_entry(Some(l.y(r, c)), r, m + c, T::one() / alpha);
            }
        }
        for j in 0..n {
            budget.add_entry(Some(l.z(j)), m + j, m + j, T::one());
        }
        prog.push_block(budget.with_strictness())?;
    }

    let floor = T::lit(POSITIVITY_FLOOR);
    for j in 0..n {
        prog.set_lower_bound(l.z(j), floor);
    }
    prog.set_lower_bound(l.beta(), floor);
    prog.set_lower_bound(l.theta(), floor);
    Ok(prog)
}

/// `Kᵀ Bᵀ P + P B K + (1 + δ²/β) I + β P²`; negative definite exactly when
/// the synthesis vertex block is (for `B` in place of `B_i`).
pub fn vsc_decrease_matrix<T: Real>(b: &Matrix<T>, gain: &Matrix<T>, pd: &[T], beta: T, delta: T) -> SymMatrix<T> {
    let p = Matrix::from_diag(pd);
    let pbk = p.matmul(&b.matmul(gain));
    let mut a = sym_part(&pbk);
    let shift = T::one() + delta * delta / beta;
    for j in 0..pd.len() {
        a[(j, j)] += shift + beta * pd[j] * pd[j];
    }
    SymMatrix::from_matrix(a).expect("square by construction")
}

/// `v(σ) = Σ p_j |σ_j|`.
pub fn vsc_lyapunov_value<T: Real>(pd: &[T], sigma: &[T]) -> T {
    pd.iter().zip(sigma).map(|(&p, &s)| p * s.abs()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VscCertificate<T: Real> {
    /// Diagonal of `Z_d`.
    pub zd: Vec<T>,
    pub y: Matrix<T>,
    pub beta: T,
    pub theta: T,
    pub gain: Matrix<T>,
    /// `2θ`.
    pub t_bound: T,
    pub alpha_u: Option<T>,
    pub delta: T,
    pub sigma0: Vec<T>,
    /// `max z_j / min z_j`.
    pub zd_condition: T,
    pub conditioning_warning: bool,
    pub recheck_margin: T,
    pub robustness: RobustnessAudit<T>,
    pub solve: SolveInfo<T>,
}

impl<T: Real> VscCertificate<T> {
    /// Diagonal of `P_d = Z_d⁻¹`.
    pub fn pd(&self) -> Vec<T> {
        self.zd.iter().map(|&z| T::one() / z).collect()
    }

    pub fn lyapunov(&self, sigma: &[T]) -> T {
        vsc_lyapunov_value(&self.pd(), sigma)
    }

    /// `α_u √tr P_d`, when a budget was imposed.
    pub fn control_ceiling(&self) -> Option<T> {
        let trace: T = self.pd().into_iter().sum();
        self.alpha_u.map(|a| a * trace.sqrt())
    }

    pub fn controller(&self) -> Controller<T> {
        Controller {
            kind: ControlKind::Vsc,
            gain: self.gain.clone(),
        }
    }

    pub fn decision_vector(&self) -> Vec<T> {
        let (m, n) = self.y.shape();
        let l = VscLayout { n, m };
        let mut x = vec![T::zero(); l.var_count()];
        for j in 0..n {
            x[l.z(j)] = self.zd[j];
            for r in 0..m {
                x[l.y(r, j)] = self.y[(r, j)];
            }
        }
        x[l.beta()] = self.beta;
        x[l.theta()] = self.theta;
        x
    }

    /// Rebuilds the program from `plant` and the stored data and returns the
    /// smallest block margin at the stored decision vector.
    pub fn recheck(&self, plant: &PolytopicPlant<T>) -> Result<T> {
        if plant.delta() != self.delta {
            return Err(Error::invalid(format!(
                "certificate was issued for delta = {}, plant has {}",
                self.delta,
                plant.delta()
            )));
        }
        if self.y.shape() != (plant.m(), plant.n()) || self.zd.len() != plant.n() {
            return Err(Error::invalid("certificate dimensions do not match the plant"));
        }
        let prog = build_vsc_synthesis(plant, &self.sigma0, self.alpha_u)?;
        feasibility_margin(&prog, &self.decision_vector())
    }
}

/// Minimizes the reaching-time bound `2θ` and recovers `K = Y Z_d⁻¹`.
///
/// The returned certificate has been re-verified block by block and the
/// unscaled decrease condition has been re-checked at
/// `opts.audit_samples` random members of the polytope.
pub fn synthesize_vsc<T: Real>(
    plant: &PolytopicPlant<T>,
    sigma0: &[T],
    alpha_u: Option<T>,
    opts: &DesignOptions<T>,
) -> Result<VscCertificate<T>> {
    let prog = build_vsc_synthesis(plant, sigma0, alpha_u)?;
    let sol = solve(&prog, &opts.solver)?;
    require_optimal(&sol, || {
        Error::NoCertificate(format!(
            "VSC synthesis infeasible (control budget {alpha_u:?}, delta {})",
            plant.delta()
        ))
    })?;
    let (n, m) = (plant.n(), plant.m());
    let l = VscLayout { n, m };
    let x = &sol.x;

    let zd: Vec<T> = (0..n).map(|j| x[l.z(j)]).collect();
    let mut y = Matrix::zeros(m, n);
    let mut gain = Matrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            y[(r, c)] = x[l.y(r, c)];
            gain[(r, c)] = x[l.y(r, c)] / zd[c];
        }
    }
    let zmax = zd.iter().copied().fold(T::zero(), T::max);
    let zmin = zd.iter().copied().fold(T::infinity(), T::min);
    let zd_condition = zmax / zmin;
    let conditioning_warning = !(zd_condition <= T::lit(ILL_CONDITIONED));
    if conditioning_warning {
        log::warn!("VSC synthesis: Z_d is ill-conditioned (ratio {zd_condition})");
    }

    let recheck_margin = feasibility_margin(&prog, x)?;
    if recheck_margin < -opts.recheck_tolerance {
        return Err(Error::NumericalFailure(format!(
            "VSC certificate fails its own recheck (margin {recheck_margin})"
        )));
    }

    let beta = x[l.beta()];
    let pd: Vec<T> = zd.iter().map(|&z| T::one() / z).collect();
    let mut worst = T::neg_infinity();
    for w in audit_weights::<T>(opts.seed, opts.audit_samples, plant.vertex_count()) {
        let b = plant.combine(&w)?;
        worst = worst.max(max_eig(&vsc_decrease_matrix(&b, &gain, &pd, beta, plant.delta()))?);
    }
    let robustness = RobustnessAudit {
        samples: opts.audit_samples,
        worst_max_eig: worst,
    };
    if opts.audit_samples > 0 && !robustness.passed() {
        return Err(Error::NumericalFailure(format!(
            "VSC gain fails the robustness audit (largest eigenvalue {worst})"
        )));
    }

    let theta = x[l.theta()];
    Ok(VscCertificate {
        zd,
        y,
        beta,
        theta,
        gain,
        t_bound: T::lit(2.0) * theta,
        alpha_u,
        delta: plant.delta(),
        sigma0: sigma0.to_vec(),
        zd_condition,
        conditioning_warning,
        recheck_margin,
        robustness,
        solve: SolveInfo::from(&sol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VscAnalysisResult<T: Real> {
    /// Diagonal of `P_d`.
    pub pd: Vec<T>,
    /// `ν = 1/β`; absent when `δ = 0` (the reduced condition has no `ν`).
    pub nu: Option<T>,
    /// `2 Σ p_j |σ0_j|`.
    pub t_bound: T,
    pub solve: SolveInfo<T>,
}

/// Analysis program for a fixed gain over `(p_1..p_n, ν)`:
///
/// ```text
/// [ Kᵀ B_iᵀ P_d + P_d B_i K + (1 + δ² ν) I   P_d  ]
/// [ P_d                                      −ν I ]  ≺ 0
/// ```
///
/// minimizing `2 Σ p_j |σ0_j|`. With `δ = 0` the condition reduces to
/// `Kᵀ B_iᵀ P_d + P_d B_i K + I ≺ 0` and `ν` is not a variable.
pub fn build_vsc_analysis<T: Real>(
    plant: &PolytopicPlant<T>,
    gain: &Matrix<T>,
    sigma0: &[T],
) -> Result<LinearMatrixProgram<T>> {
    check_sigma0(plant, sigma0)?;
    check_gain(plant, gain)?;
    let n = plant.n();
    let delta = plant.delta();
    let full = delta > T::zero();
    let mut names: Vec<String> = (0..n).map(|j| format!("p[{j}]")).collect();
    let mut objective: Vec<T> = sigma0.iter().map(|s| T::lit(2.0) * s.abs()).collect();
    if full {
        names.push("nu".into());
        objective.push(T::zero());
    }
    let nu = n;
    let mut prog = LinearMatrixProgram::new(names, objective)?;
    let order = if full { 2 * n } else { n };
    for (i, b) in plant.vertices().iter().enumerate() {
        let bk = b.matmul(gain);
        let mut blk = prog.new_block(format!("decrease at vertex {i}"), order);
        for j in 0..n {
            blk.add_submatrix(Some(j), 0, 0, &sym_part(&unit(n, n, j, j).matmul(&bk)));
            blk.add_entry(None, j, j, T::one());
            if full {
                blk.add_entry(Some(nu), j, j, delta * delta);
                blk.add_entry(Some(j), j, n + j, T::one());
                blk.add_entry(Some(nu), n + j, n + j, -T::one());
            }
        }
        prog.push_block(blk.negated().with_strictness())?;
    }
    let floor = T::lit(POSITIVITY_FLOOR);
    for j in 0..n {
        prog.set_lower_bound(j, floor);
    }
    if full {
        prog.set_lower_bound(nu, floor);
    }
    Ok(prog)
}

/// Best Persidskii reaching-time bound certifiable for the given gain.
pub fn analyze_vsc<T: Real>(
    plant: &PolytopicPlant<T>,
    gain: &Matrix<T>,
    sigma0: &[T],
    solver: &SolverOptions<T>,
) -> Result<VscAnalysisResult<T>> {
    let prog = build_vsc_analysis(plant, gain, sigma0)?;
    let sol = solve(&prog, solver)?;
    require_optimal(&sol, || {
        Error::GainNotCertified("no diagonal Lyapunov function certifies this VSC gain".into())
    })?;
    let n = plant.n();
    let pd = sol.x[..n].to_vec();
    Ok(VscAnalysisResult {
        t_bound: vsc_lyapunov_value(&pd, sigma0) * T::lit(2.0),
        nu: (plant.delta() > T::zero()).then(|| sol.x[n]),
        pd,
        solve: SolveInfo::from(&sol),
    })
}

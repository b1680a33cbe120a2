//! Fixed-step explicit Euler simulation of the discontinuous closed loop
//! `σ̇ = B K φ(σ) + f(t)`, reaching-time detection, and certificate audits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_eig, SymMatrix};
use crate::model::{Controller, DisturbanceSpec, PlantSelection, PolytopicPlant};
use crate::scalar::Real;
use crate::uvc::{format_sig, UvcCertificate};
use crate::vsc::{vsc_lyapunov_value, VscCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct SimConfig<T: Real> {
    pub dt: T,
    pub horizon: T,
    /// Reached means `‖σ‖` stays below `reach_fraction · ‖σ(0)‖` (widened to
    /// cover Euler chattering, see [`detect_reaching_time`]) ...
    pub reach_fraction: T,
    /// ... for this many consecutive steps.
    pub hold_steps: usize,
    /// Abort once `‖σ‖` exceeds this multiple of `‖σ(0)‖`.
    pub divergence_factor: T,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(1e-4),
            horizon: T::lit(2.0),
            reach_fraction: T::lit(1e-3),
            hold_steps: 100,
            divergence_factor: T::lit(1e6),
        }
    }
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::invalid(format!("step {} must be positive", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::invalid(format!(
                "horizon {} must be finite and at least one step",
                self.horizon
            )));
        }
        if !(self.reach_fraction > T::zero() && self.reach_fraction < T::one()) {
            return Err(Error::invalid("reach fraction must lie in (0, 1)"));
        }
        if self.hold_steps == 0 {
            return Err(Error::invalid("hold window must be at least one step"));
        }
        if !(self.divergence_factor > T::one()) {
            return Err(Error::invalid("divergence factor must exceed 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// Samples on the uniform grid `t_k = k dt`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Trajectory<T: Real> {
    pub n: usize,
    pub m: usize,
    pub dt: T,
    pub times: Vec<T>,
    /// Row-major `len × n`.
    pub states: Vec<T>,
    /// Row-major `len × m`.
    pub controls: Vec<T>,
    pub control_norms: Vec<T>,
    pub lyapunov: Option<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[T] {
        &self.states[k * self.n..(k + 1) * self.n]
    }

    pub fn control(&self, k: usize) -> &[T] {
        &self.controls[k * self.m..(k + 1) * self.m]
    }

    pub fn state_norm(&self, k: usize) -> T {
        norm(self.state(k))
    }

    pub fn max_control_norm(&self) -> T {
        self.control_norms.iter().copied().fold(T::zero(), T::max)
    }

    /// Attaches `v(σ_k)` for every sample.
    pub fn with_lyapunov(mut self, v: &LyapunovFunction<T>) -> Self {
        self.lyapunov = Some((0..self.len()).map(|k| v.value(self.state(k))).collect());
        self
    }

    /// Columns `t, sigma_1..sigma_n, u_1..u_m, u_norm, v` with 12
    /// significant digits; `v` is empty when no Lyapunov values are attached.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.n {
            let _ = write!(out, ",sigma_{i}");
        }
        for i in 1..=self.m {
            let _ = write!(out, ",u_{i}");
        }
        out.push_str(",u_norm,v\n");
        for k in 0..self.len() {
            out.push_str(&format_sig(self.times[k].to_f64_lossy()));
            for &s in self.state(k).iter().chain(self.control(k)) {
                out.push(',');
                out.push_str(&format_sig(s.to_f64_lossy()));
            }
            out.push(',');
            out.push_str(&format_sig(self.control_norms[k].to_f64_lossy()));
            out.push(',');
            if let Some(v) = &self.lyapunov {
                out.push_str(&format_sig(v[k].to_f64_lossy()));
            }
            out.push('\n');
        }
        out
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Explicit Euler: `σ_{k+1} = σ_k + dt (B u_k + f(t_k))`, `u_k = K φ(σ_k)`.
pub fn simulate<T: Real>(
    plant: &PolytopicPlant<T>,
    selection: &PlantSelection<T>,
    controller: &Controller<T>,
    disturbance: &DisturbanceSpec<T>,
    sigma0: &[T],
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    controller.check_plant(plant)?;
    disturbance.validate()?;
    let (n, m) = (plant.n(), plant.m());
    if sigma0.len() != n || sigma0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("initial state must be {n} finite numbers")));
    }
    if disturbance.dim() != n {
        return Err(Error::invalid(format!(
            "disturbance has {} channels, plant has n = {n}",
            disturbance.dim()
        )));
    }
    if disturbance.bound > plant.delta() * (T::one() + T::lit(1e-12)) {
        return Err(Error::invalid(format!(
            "disturbance bound {} exceeds the plant's delta {}",
            disturbance.bound,
            plant.delta()
        )));
    }
    let b = plant.select(selection)?;
    let steps = cfg.steps();
    let limit = cfg.divergence_factor * {
        let r0 = norm(sigma0);
        if r0 > T::zero() {
            r0
        } else {
            T::one()
        }
    };

    let mut traj = Trajectory {
        n,
        m,
        dt: cfg.dt,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity((steps + 1) * n),
        controls: Vec::with_capacity((steps + 1) * m),
        control_norms: Vec::with_capacity(steps + 1),
        lyapunov: None,
    };
    let mut sigma = sigma0.to_vec();
    for k in 0..=steps {
        let t = T::lit(k as f64) * cfg.dt;
        let u = controller.control(&sigma);
        traj.times.push(t);
        traj.states.extend_from_slice(&sigma);
        traj.control_norms.push(norm(&u));
        traj.controls.extend_from_slice(&u);
        if k == steps {
            break;
        }
        let bu = b.mul_vec(&u);
        let f = disturbance.eval(t);
        for i in 0..n {
            sigma[i] += cfg.dt * (bu[i] + f[i]);
        }
        let r = norm(&sigma);
        if !(r <= limit) {
            return Err(Error::Divergence {
                time: (t + cfg.dt).to_f64_lossy(),
                norm: r.to_f64_lossy(),
            });
        }
    }
    Ok(traj)
}

/// Earliest time at which the state reaches the origin.
///
/// The sample index `k` is the first one from which `‖σ‖` stays below the
/// reach threshold for `hold_steps` further steps. The threshold is
/// `reach_fraction · ‖σ(0)‖`, widened to twice the longest Euler step so
/// that chattering about the origin cannot defeat the hold test. Since the
/// threshold is crossed before the origin is reached, the estimate is then
/// refined on the piecewise-linear Euler path: starting one step before
/// `k`, it is the point closest to the origin on the first segment along
/// which the distance to the origin stops decreasing.
pub fn detect_reaching_time<T: Real>(traj: &Trajectory<T>, reach_fraction: T, hold_steps: usize) -> Option<T> {
    if traj.is_empty() {
        return None;
    }
    let len = traj.len();
    let norms: Vec<T> = (0..len).map(|k| traj.state_norm(k)).collect();
    let longest_step = (1..len)
        .map(|k| {
            let (a, b) = (traj.state(k - 1), traj.state(k));
            norm(&a.iter().zip(b).map(|(&x, &y)| y - x).collect::<Vec<_>>())
        })
        .fold(T::zero(), T::max);
    let threshold = (reach_fraction * norms[0]).max(T::lit(2.0) * longest_step);
    let mut run = 0usize;
    let mut first = None;
    for k in (0..len).rev() {
        run = if norms[k] <= threshold { run + 1 } else { 0 };
        if run > hold_steps {
            first = Some(k);
        }
    }
    let k = first?;
    for j in k.saturating_sub(1)..len - 1 {
        let (a, b) = (traj.state(j), traj.state(j + 1));
        let d: Vec<T> = b.iter().zip(a).map(|(&x, &y)| x - y).collect();
        let dd: T = d.iter().map(|&v| v * v).sum();
        if dd == T::zero() {
            return Some(traj.times[j]);
        }
        let s = -a.iter().zip(&d).map(|(&x, &y)| x * y).sum::<T>() / dd;
        if s < T::one() {
            return Some(traj.times[j] + s.max(T::zero()) * traj.dt);
        }
    }
    Some(traj.times[k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum LyapunovFunction<T: Real> {
    /// `Σ p_j |σ_j|`.
    Persidskii { pd: Vec<T> },
    /// `σᵀ P σ`.
    Quadratic { p: SymMatrix<T> },
}

impl<T: Real> LyapunovFunction<T> {
    pub fn value(&self, sigma: &[T]) -> T {
        match self {
            LyapunovFunction::Persidskii { pd } => vsc_lyapunov_value(pd, sigma),
            LyapunovFunction::Quadratic { p } => {
                let ps = p.mul_vec(sigma);
                sigma.iter().zip(&ps).map(|(&a, &b)| a * b).sum()
            }
        }
    }

    /// Bound on `‖∇v‖` over the ball of radius `radius`.
    fn gradient_scale(&self, radius: T) -> Result<T> {
        match self {
            LyapunovFunction::Persidskii { pd } => Ok(norm(pd)),
            LyapunovFunction::Quadratic { p } => Ok(T::lit(2.0) * max_eig(p)? * radius),
        }
    }
}

/// What a simulation audit needs to know about a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CertificateClaims<T: Real> {
    pub lyapunov: LyapunovFunction<T>,
    pub t_bound: T,
    pub control_ceiling: Option<T>,
}

impl<T: Real> From<&VscCertificate<T>> for CertificateClaims<T> {
    fn from(c: &VscCertificate<T>) -> Self {
        Self {
            lyapunov: LyapunovFunction::Persidskii { pd: c.pd() },
            t_bound: c.t_bound,
            control_ceiling: c.control_ceiling(),
        }
    }
}

impl<T: Real> TryFrom<&UvcCertificate<T>> for CertificateClaims<T> {
    type Error = Error;
    fn try_from(c: &UvcCertificate<T>) -> Result<Self> {
        Ok(Self {
            lyapunov: LyapunovFunction::Quadratic { p: c.p()? },
            t_bound: c.t_bound,
            control_ceiling: c.control_ceiling()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AuditReport<T: Real> {
    pub reaching_time: Option<T>,
    pub t_bound: T,
    /// Reached no later than `t_bound + 2 dt`.
    pub reach_ok: bool,
    /// Largest one-step increase of `v` before reaching.
    pub max_lyapunov_increase: T,
    pub lyapunov_tolerance: T,
    pub lyapunov_ok: bool,
    pub max_control_norm: T,
    pub control_ceiling: Option<T>,
    pub control_ok: bool,
}

impl<T: Real> AuditReport<T> {
    pub fn passed(&self) -> bool {
        self.reach_ok && self.lyapunov_ok && self.control_ok
    }
}

/// Checks a simulated trajectory against what the certificate promises.
pub fn audit_certificate<T: Real>(
    traj: &Trajectory<T>,
    claims: &CertificateClaims<T>,
    cfg: &SimConfig<T>,
) -> Result<AuditReport<T>> {
    if traj.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    let reaching_time = detect_reaching_time(traj, cfg.reach_fraction, cfg.hold_steps);
    let slack = T::lit(2.0) * traj.dt;
    let reach_ok = reaching_time.is_some_and(|t| t <= claims.t_bound + slack);

    let stop = match reaching_time {
        Some(t) => ((t / traj.dt).floor().to_usize().unwrap_or(0)).min(traj.len() - 1),
        None => traj.len() - 1,
    };
    let values: Vec<T> = (0..=stop).map(|k| claims.lyapunov.value(traj.state(k))).collect();
    let radius = (0..traj.len()).map(|k| traj.state_norm(k)).fold(T::zero(), T::max);
    let max_rate = (1..traj.len())
        .map(|k| {
            let d: Vec<T> = traj
                .state(k)
                .iter()
                .zip(traj.state(k - 1))
                .map(|(&a, &b)| a - b)
                .collect();
            norm(&d) / traj.dt
        })
        .fold(T::zero(), T::max);
    let lyapunov_tolerance = T::lit(10.0) * max_rate * claims.lyapunov.gradient_scale(radius)? * traj.dt;
    let max_lyapunov_increase = values.windows(2).map(|w| w[1] - w[0]).fold(T::neg_infinity(), T::max);
    let lyapunov_ok = !(max_lyapunov_increase > lyapunov_tolerance);

    let max_control_norm = traj.max_control_norm();
    let control_ok = claims
        .control_ceiling
        .is_none_or(|c| max_control_norm <= c + T::lit(1e-9));

    Ok(AuditReport {
        reaching_time,
        t_bound: claims.t_bound,
        reach_ok,
        max_lyapunov_increase,
        lyapunov_tolerance,
        lyapunov_ok,
        max_control_norm,
        control_ceiling: claims.control_ceiling,
        control_ok,
    })
}

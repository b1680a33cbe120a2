//! Uncertain plant `σ̇ = B u + f(t)` with `B` in a matrix polytope, the two
//! discontinuous control laws, disturbance signals, and the two example
//! plants (planar visual servoing and an over-actuated ROV).

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Polytope `co{B_1, …, B_N}` of `n×m` input matrices plus the disturbance
/// bound `‖f(t)‖ ≤ δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PolytopicPlant<T: Real> {
    vertices: Vec<Matrix<T>>,
    delta: T,
}

impl<T: Real> PolytopicPlant<T> {
    pub fn new(vertices: Vec<Matrix<T>>, delta: T) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::invalid("plant needs at least one vertex"))?;
        let (n, m) = first.shape();
        if n > m {
            return Err(Error::invalid(format!(
                "state dimension {n} exceeds input dimension {m}"
            )));
        }
        if let Some(i) = vertices.iter().position(|b| b.shape() != (n, m)) {
            return Err(Error::dims(format!(
                "vertex {i} is {:?}, expected {n}x{m}",
                vertices[i].shape()
            )));
        }
        if vertices.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("vertex entries must be finite"));
        }
        if !delta.is_finite() || delta < T::zero() {
            return Err(Error::invalid("disturbance bound must be finite and nonnegative"));
        }
        Ok(Self { vertices, delta })
    }

    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.vertices[0].rows()
    }

    /// Input dimension `m`.
    pub fn m(&self) -> usize {
        self.vertices[0].cols()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Matrix<T>] {
        &self.vertices
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn with_delta(mut self, delta: T) -> Result<Self> {
        if !delta.is_finite() || delta < T::zero() {
            return Err(Error::invalid("disturbance bound must be finite and nonnegative"));
        }
        self.delta = delta;
        Ok(self)
    }

    /// `B = Σ λ_i B_i`.
    pub fn combine(&self, w: &SimplexWeight<T>) -> Result<Matrix<T>> {
        if w.len() != self.vertex_count() {
            return Err(Error::dims(format!(
                "weight has {} components, plant has {} vertices",
                w.len(),
                self.vertex_count()
            )));
        }
        let mut b = Matrix::zeros(self.n(), self.m());
        for (bi, &l) in self.vertices.iter().zip(w.as_slice()) {
            b = &b + &bi.scale(l);
        }
        Ok(b)
    }

    pub fn select(&self, sel: &PlantSelection<T>) -> Result<Matrix<T>> {
        match sel {
            PlantSelection::Vertex(i) => self
                .vertices
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("vertex {i} out of range"))),
            PlantSelection::Weight(w) => self.combine(w),
            PlantSelection::Matrix(b) => {
                if b.shape() != (self.n(), self.m()) {
                    return Err(Error::dims("explicit input matrix has the wrong shape"));
                }
                Ok(b.clone())
            }
        }
    }
}

/// Which member of the polytope a simulation uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum PlantSelection<T: Real> {
    Vertex(usize),
    Weight(SimplexWeight<T>),
    /// An explicit member of the polytope (e.g. a physical plant instance).
    Matrix(Matrix<T>),
}

/// Point of the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real")]
pub struct SimplexWeight<T: Real>(Vec<T>);

impl<T: Real> SimplexWeight<T> {
    pub fn new(lambda: Vec<T>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::invalid("simplex weight must be nonempty"));
        }
        if lambda.iter().any(|&l| !l.is_finite() || l < T::zero()) {
            return Err(Error::invalid("simplex weight components must be nonnegative"));
        }
        let sum: T = lambda.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
            return Err(Error::invalid(format!("simplex weight sums to {sum}, not 1")));
        }
        Ok(Self(lambda))
    }

    /// Unit vector `e_i` of length `n`.
    pub fn vertex(i: usize, n: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::invalid(format!("vertex {i} out of range for {n}")));
        }
        let mut v = vec![T::zero(); n];
        v[i] = T::one();
        Ok(Self(v))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![T::one() / T::lit(n as f64); n])
    }

    /// Uniform sample on the simplex: normalized i.i.d. exponential draws.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        let mut v: Vec<T> = draws.iter().map(|d| T::lit(d / total)).collect();
        // Push rounding residue into the largest component.
        let sum: T = v.iter().copied().sum();
        let imax = (0..n)
            .max_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite"))
            .expect("n >= 1");
        v[imax] = v[imax] + (T::one() - sum);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

impl<T: Real> TryFrom<Vec<T>> for SimplexWeight<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T: Real> From<SimplexWeight<T>> for Vec<T> {
    fn from(w: SimplexWeight<T>) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    /// `φ(σ) = sign(σ)` componentwise, with `sign(0) = 0`.
    Vsc,
    /// `φ(σ) = σ / ‖σ‖`, zero at the origin.
    Uvc,
}

impl ControlKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlKind::Vsc => "vsc",
            ControlKind::Uvc => "uvc",
        }
    }
}

impl std::fmt::Display for ControlKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ControlKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vsc" => Ok(ControlKind::Vsc),
            "uvc" => Ok(ControlKind::Uvc),
            other => Err(Error::invalid(format!("unknown control kind '{other}'"))),
        }
    }
}

pub fn phi<T: Real>(kind: ControlKind, sigma: &[T]) -> Vec<T> {
    match kind {
        ControlKind::Vsc => sigma
            .iter()
            .map(|&s| {
                if s > T::zero() {
                    T::one()
                } else if s < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                }
            })
            .collect(),
        ControlKind::Uvc => {
            let norm = sigma.iter().map(|&s| s * s).sum::<T>().sqrt();
            if norm == T::zero() {
                vec![T::zero(); sigma.len()]
            } else {
                sigma.iter().map(|&s| s / norm).collect()
            }
        }
    }
}

/// `u = K φ(σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Controller<T: Real> {
    pub kind: ControlKind,
    pub gain: Matrix<T>,
}

impl<T: Real> Controller<T> {
    pub fn new(kind: ControlKind, gain: Matrix<T>) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::invalid("gain must be finite"));
        }
        Ok(Self { kind, gain })
    }

    pub fn check_plant(&self, plant: &PolytopicPlant<T>) -> Result<()> {
        if self.gain.shape() != (plant.m(), plant.n()) {
            return Err(Error::dims(format!(
                "gain is {:?}, plant needs {}x{}",
                self.gain.shape(),
                plant.m(),
                plant.n()
            )));
        }
        Ok(())
    }

    pub fn control(&self, sigma: &[T]) -> Vec<T> {
        self.gain.mul_vec(&phi(self.kind, sigma))
    }
}

/// `a · sin(ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sinusoid<T: Real> {
    pub amplitude: T,
    pub frequency: T,
    #[serde(default)]
    pub phase: T,
}

/// Per-channel sums of sinusoids plus a constant offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DisturbanceSpec<T: Real> {
    pub channels: Vec<Vec<Sinusoid<T>>>,
    pub offset: Vec<T>,
    /// Declared bound `δ` on `‖f(t)‖`.
    pub bound: T,
}

impl<T: Real> DisturbanceSpec<T> {
    pub fn zero(n: usize) -> Self {
        Self {
            channels: vec![Vec::new(); n],
            offset: vec![T::zero(); n],
            bound: T::zero(),
        }
    }

    pub fn constant(offset: Vec<T>) -> Self {
        let bound = offset.iter().map(|&v| v * v).sum::<T>().sqrt();
        Self {
            channels: vec![Vec::new(); offset.len()],
            offset,
            bound,
        }
    }

    /// `f(t) = √2 [sin 5t, sin 2t]ᵀ`, bounded by `δ = 2`.
    pub fn servoing() -> Self {
        let a = T::lit(std::f64::consts::SQRT_2);
        let tone = |w: f64| Sinusoid {
            amplitude: a,
            frequency: T::lit(w),
            phase: T::zero(),
        };
        Self {
            channels: vec![vec![tone(5.0)], vec![tone(2.0)]],
            offset: vec![T::zero(); 2],
            bound: T::lit(2.0),
        }
    }

    /// Random signal with `‖f(t)‖ ≤ δ` for all `t`: either a constant of norm
    /// `δ` or one tone per channel with amplitudes on the `δ`-sphere.
    pub fn random_admissible<R: Rng + ?Sized>(rng: &mut R, n: usize, delta: T) -> Self {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let d = delta.to_f64_lossy();
        if rng.random_bool(0.5) {
            let mut spec = Self::constant(g.iter().map(|v| T::lit(d * v / norm)).collect());
            spec.bound = delta;
            spec
        } else {
            let channels = g
                .iter()
                .map(|v| {
                    vec![Sinusoid {
                        amplitude: T::lit(d * v.abs() / norm),
                        frequency: T::lit(rng.random_range(0.5..10.0)),
                        phase: T::lit(rng.random_range(0.0..std::f64::consts::TAU)),
                    }]
                })
                .collect();
            Self {
                channels,
                offset: vec![T::zero(); n],
                bound: delta,
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        self.channels
            .iter()
            .zip(&self.offset)
            .map(|(tones, &c)| {
                tones
                    .iter()
                    .fold(c, |acc, s| acc + s.amplitude * (s.frequency * t + s.phase).sin())
            })
            .collect()
    }

    /// `max ‖f(t)‖` over `t = 0, step, …, t_end`.
    pub fn sampled_sup_norm(&self, t_end: T, step: T) -> T {
        let count = (t_end / step).round().to_usize().unwrap_or(0);
        (0..=count)
            .map(|k| {
                let f = self.eval(T::lit(k as f64) * step);
                f.iter().map(|&v| v * v).sum::<T>().sqrt()
            })
            .fold(T::zero(), T::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != self.offset.len() {
            return Err(Error::dims("disturbance channels and offset differ in length"));
        }
        if !self.bound.is_finite() || self.bound < T::zero() {
            return Err(Error::invalid("disturbance bound must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Planar rotation `[[cos φ, sin φ], [-sin φ, cos φ]]`.
pub fn rotation<T: Real>(angle: T) -> Matrix<T> {
    let (s, c) = angle.sin_cos();
    Matrix::from_rows(vec![vec![c, s], vec![-s, c]]).expect("2x2")
}

/// Visual-servoing plant: `B(φ) = R(Δφ) B(φ̄)` with `|Δφ| ≤ Δ̄`, where the
/// pair `(cos Δφ, sin Δφ)` is enclosed by the four corners
/// `(cos Δ̄, sin Δ̄)`, `(1, sin Δ̄)`, `(cos Δ̄, −sin Δ̄)`, `(1, −sin Δ̄)`
/// (vertices are returned in that order).
pub fn make_servoing_plant<T: Real>(phi_bar: T, delta_bar: T, delta: T) -> Result<PolytopicPlant<T>> {
    let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
    if !(delta_bar >= T::zero() && delta_bar <= half_pi) {
        return Err(Error::invalid(format!(
            "angle uncertainty {delta_bar} must lie in [0, pi/2]"
        )));
    }
    if !phi_bar.is_finite() {
        return Err(Error::invalid("nominal angle must be finite"));
    }
    let nominal = rotation(phi_bar);
    let (s, c) = delta_bar.sin_cos();
    let corners = [(c, s), (T::one(), s), (c, -s), (T::one(), -s)];
    let vertices = corners
        .iter()
        .map(|&(ci, si)| {
            let r = Matrix::from_rows(vec![vec![ci, si], vec![-si, ci]]).expect("2x2");
            r.matmul(&nominal)
        })
        .collect();
    PolytopicPlant::new(vertices, delta)
}

/// Physical constants of the over-actuated ROV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct RovParams<T: Real> {
    /// Mass [kg].
    pub m0: T,
    /// Yaw inertia [kg m²].
    pub iz: T,
    pub psi1: T,
    /// Lever arm [m].
    pub psi2: T,
    pub g_lo: T,
    pub g_hi: T,
}

impl<T: Real> Default for RovParams<T> {
    fn default() -> Self {
        Self {
            m0: T::lit(290.0),
            iz: T::lit(23.0),
            psi1: T::lit(std::f64::consts::FRAC_1_SQRT_2),
            psi2: T::lit(0.35),
            g_lo: T::lit(0.5),
            g_hi: T::one(),
        }
    }
}

/// ROV plant `B(g) = M⁻¹ Ψ Π(g)` with `Π(g) = diag(g₁, 1, g₃, 1)`; the four
/// vertices are `(g₁, g₃)` in lexicographic order over `{g_lo, g_hi}²`.
pub fn make_rov_plant<T: Real>(params: &RovParams<T>, delta: T) -> Result<PolytopicPlant<T>> {
    let RovParams {
        m0,
        iz,
        psi1,
        psi2,
        g_lo,
        g_hi,
    } = *params;
    if !(m0 > T::zero() && iz > T::zero()) {
        return Err(Error::invalid("mass and inertia must be positive"));
    }
    if !(g_lo > T::zero() && g_lo <= g_hi) {
        return Err(Error::invalid("actuator gains need 0 < g_lo <= g_hi"));
    }
    let psi = Matrix::from_rows(vec![
        vec![psi1, psi1, psi1, psi1],
        vec![psi1, -psi1, -psi1, psi1],
        vec![-psi2, psi2, -psi2, psi2],
    ])?;
    let m_inv = Matrix::from_diag(&[T::one() / m0, T::one() / m0, T::one() / iz]);
    let base = m_inv.matmul(&psi);
    let mut vertices = Vec::with_capacity(4);
    for g1 in [g_lo, g_hi] {
        for g3 in [g_lo, g_hi] {
            vertices.push(base.matmul(&Matrix::from_diag(&[g1, T::one(), g3, T::one()])));
        }
    }
    PolytopicPlant::new(vertices, delta)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RankReport<T: Real> {
    pub points_checked: usize,
    pub min_singular_value: T,
    /// Simplex weight at which the smallest singular value occurred.
    pub worst_weight: Vec<T>,
}

/// Checks `rank B = n` at every vertex and at `sample_count` random points
/// of the simplex.
pub fn validate_rank<T: Real, R: Rng + ?Sized>(
    plant: &PolytopicPlant<T>,
    sample_count: usize,
    rng: &mut R,
) -> Result<RankReport<T>> {
    let n = plant.n();
    let nv = plant.vertex_count();
    let weights = (0..nv)
        .map(|i| SimplexWeight::vertex(i, nv))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .chain((0..sample_count).map(|_| SimplexWeight::sample(rng, nv)));

    let mut report = RankReport {
        points_checked: 0,
        min_singular_value: T::infinity(),
        worst_weight: Vec::new(),
    };
    let rel_tol = T::epsilon() * T::lit(1e3);
    for w in weights {
        let b = plant.combine(&w)?;
        let sv = b.singular_values()?;
        let smallest = sv[0];
        let largest = *sv.last().expect("n >= 1");
        report.points_checked += 1;
        if smallest < report.min_singular_value {
            report.min_singular_value = smallest;
            report.worst_weight = w.as_slice().to_vec();
        }
        if b.rank(rel_tol)? < n || !(largest > T::zero()) {
            return Err(Error::AssumptionViolated(format!(
                "input matrix loses rank at weight {:?} (smallest singular value {smallest})",
                w.as_slice()
            )));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    #[test]
    fn phi_examples() {
        assert_eq!(phi(ControlKind::Vsc, &[-2.0, 0.0, 3.0]), vec![-1.0, 0.0, 1.0]);
        let u = phi(ControlKind::Uvc, &[3.0, 4.0]);
        assert_abs_diff_eq!(u[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(u[1], 0.8, epsilon = 1e-15);
        assert_eq!(phi(ControlKind::Vsc, &[-5.0]), vec![-1.0]);
        assert_eq!(phi(ControlKind::Uvc, &[-5.0]), vec![-1.0]);
        assert_eq!(phi(ControlKind::Uvc, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn combine_examples() {
        let plant = make_servoing_plant(FRAC_PI_6, FRAC_PI_4, 0.0).unwrap();
        let b = plant.combine(&SimplexWeight::vertex(0, 4).unwrap()).unwrap();
        assert_eq!(&b, &plant.vertices()[0]);

        let v = Matrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let twin = PolytopicPlant::new(vec![v.clone(), v.clone()], 0.0).unwrap();
        let w = SimplexWeight::new(vec![0.3, 0.7]).unwrap();
        assert!((&twin.combine(&w).unwrap() - &v).max_abs() < 1e-15);

        assert!(plant.combine(&SimplexWeight::uniform(3)).is_err());
        assert!(SimplexWeight::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeight::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn servoing_vertices() {
        let flat = make_servoing_plant(FRAC_PI_6, 0.0, 0.0).unwrap();
        for v in flat.vertices() {
            assert!((v - &rotation(FRAC_PI_6)).max_abs() < 1e-15);
        }
        let plant = make_servoing_plant(FRAC_PI_6, FRAC_PI_4, 0.0).unwrap();
        assert_eq!(plant.vertex_count(), 4);
        // First corner is the rotation by φ̄ + Δ̄.
        assert!((&plant.vertices()[0] - &rotation(FRAC_PI_6 + FRAC_PI_4)).max_abs() < 1e-14);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert!((&plant.vertices()[i] - &plant.vertices()[j]).max_abs() > 1e-3);
            }
            assert_eq!(plant.vertices()[i].rank(1e-12).unwrap(), 2);
        }
        assert!(make_servoing_plant(0.0, PI, 0.0).is_err());
        assert!(make_servoing_plant(0.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn rov_vertices() {
        let plant = make_rov_plant(&RovParams::default(), 0.0).unwrap();
        assert_eq!(plant.vertex_count(), 4);
        assert_eq!((plant.n(), plant.m()), (3, 4));
        let top = &plant.vertices()[3];
        for j in 0..4 {
            assert_abs_diff_eq!(top[(0, j)], 0.0024383, epsilon = 5e-8);
        }
        for v in plant.vertices() {
            assert_eq!(v.rank(1e-12).unwrap(), 3);
        }
        let bad = RovParams {
            m0: -1.0,
            ..RovParams::default()
        };
        assert!(make_rov_plant(&bad, 0.0).is_err());
        let bad = RovParams {
            g_lo: 2.0,
            ..RovParams::default()
        };
        assert!(make_rov_plant(&bad, 0.0).is_err());
    }

    #[test]
    fn rank_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plant = make_servoing_plant(FRAC_PI_6, FRAC_PI_4, 0.0).unwrap();
        let rep = validate_rank(&plant, 200, &mut rng).unwrap();
        assert_eq!(rep.points_checked, 204);
        assert!(rep.min_singular_value > 0.1);

        let rov = make_rov_plant(&RovParams::default(), 0.0).unwrap();
        assert!(validate_rank(&rov, 1000, &mut rng).unwrap().min_singular_value > 0.0);

        let zero = PolytopicPlant::new(vec![Matrix::identity(2), Matrix::zeros(2, 2)], 0.0).unwrap();
        assert!(matches!(
            validate_rank(&zero, 0, &mut rng),
            Err(Error::AssumptionViolated(_))
        ));
    }

    #[test]
    fn plant_rejects_bad_shapes() {
        assert!(PolytopicPlant::<f64>::new(vec![], 0.0).is_err());
        assert!(PolytopicPlant::new(vec![Matrix::<f64>::zeros(3, 2)], 0.0).is_err());
        assert!(PolytopicPlant::new(vec![Matrix::<f64>::identity(2), Matrix::zeros(2, 3)], 0.0).is_err());
        assert!(PolytopicPlant::new(vec![Matrix::<f64>::identity(2)], -1.0).is_err());
    }

    #[test]
    fn servoing_disturbance_within_bound() {
        let f = DisturbanceSpec::<f64>::servoing();
        assert!(f.sampled_sup_norm(10.0, 1e-4) <= 2.0 + 1e-9);
        let f1 = f.eval(0.3);
        assert_abs_diff_eq!(f1[0], 2f64.sqrt() * 1.5f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn random_disturbances_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let f = DisturbanceSpec::random_admissible(&mut rng, 3, 2.0);
            assert!(f.sampled_sup_norm(3.0, 1e-3) <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn simplex_samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let w = SimplexWeight::<f64>::sample(&mut rng, 4);
            assert!(SimplexWeight::new(w.as_slice().to_vec()).is_ok());
        }
    }
}

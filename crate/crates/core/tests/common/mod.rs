//! Reference computations shared by the integration tests. They are
//! deliberately naive and share no code with the library.

#![allow(dead_code)]

/// Polynomial coefficients, lowest degree first.
pub type Poly = Vec<f64>;

fn poly_add(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = vec![0.0];
    for (c, entry) in m[0].iter().enumerate() {
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        let term = poly_mul(entry, &poly_det(&minor));
        acc = poly_add(&acc, &term.iter().map(|v| sign * v).collect::<Vec<_>>());
    }
    acc
}

/// `det(A - λI)` by cofactor expansion along the first row.
pub fn char_poly(a: &[Vec<f64>]) -> Poly {
    let n = a.len();
    let m: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { vec![a[i][j], -1.0] } else { vec![a[i][j]] })
                .collect()
        })
        .collect();
    poly_det(&m)
}

/// Plain determinant by cofactor expansion.
pub fn det(a: &[Vec<f64>]) -> f64 {
    let m: Vec<Vec<Poly>> = a.iter().map(|r| r.iter().map(|&v| vec![v]).collect()).collect();
    poly_det(&m)[0]
}

pub fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

/// Roots of a polynomial known to have only real roots, ascending.
///
/// Consecutive roots are separated by roots of the derivative, so each
/// interval between critical points holds exactly one root; it is located
/// by bisection.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let radius = 1.0 + p[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut marks = vec![-radius];
    marks.extend(real_roots(&derivative(p)));
    marks.push(radius);
    let mut roots = Vec::with_capacity(deg);
    for w in marks.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (poly_eval(p, lo), poly_eval(p, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            // Double root sitting on a critical point, up to rounding.
            roots.push(if flo.abs() < fhi.abs() { lo } else { hi });
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if poly_eval(p, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.truncate(deg);
    roots
}

/// Eigenvalues of a symmetric matrix through its characteristic polynomial.
pub fn eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    real_roots(&char_poly(a))
}

/// Positive semidefiniteness of a symmetric matrix by checking that every
/// principal minor is nonnegative.
pub fn is_psd(a: &[Vec<f64>], tol: f64) -> bool {
    let n = a.len();
    if n == 3 {
        return psd3([a[0][0], a[1][1], a[2][2], a[0][1], a[0][2], a[1][2]], tol);
    }
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| a[i][j]).collect()).collect();
        if det(&sub) < -tol {
            return false;
        }
    }
    true
}

/// Same test for a 3×3 matrix given as `[a00, a11, a22, a01, a02, a12]`.
pub fn psd3(e: [f64; 6], tol: f64) -> bool {
    let [a, b, c, d, f, g] = e;
    a >= -tol
        && b >= -tol
        && c >= -tol
        && a * b - d * d >= -tol
        && a * c - f * f >= -tol
        && b * c - g * g >= -tol
        && a * (b * c - g * g) - d * (d * c - g * f) + f * (d * g - b * f) >= -tol
}

/// A two-variable program `min cᵀx` subject to
/// `C + x₁A₁ + x₂A₂ ⪰ 0` and `|x_i| ≤ box_half_width`.
#[derive(Clone, Debug)]
pub struct TwoVarProgram {
    pub c: [f64; 2],
    pub constant: Vec<Vec<f64>>,
    pub a1: Vec<Vec<f64>>,
    pub a2: Vec<Vec<f64>>,
    pub box_half_width: f64,
}

impl TwoVarProgram {
    pub fn block_at(&self, x: [f64; 2]) -> Vec<Vec<f64>> {
        let n = self.constant.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.constant[i][j] + x[0] * self.a1[i][j] + x[1] * self.a2[i][j])
                    .collect()
            })
            .collect()
    }

    /// Best objective over a uniform grid with the given step. Only the
    /// 3×3 case is supported.
    pub fn grid_minimum(&self, step: f64) -> Option<f64> {
        let r = self.box_half_width;
        let count = (2.0 * r / step).round() as i64;
        let mut best: Option<f64> = None;
        for i in 0..=count {
            let x1 = -r + i as f64 * step;
            for j in 0..=count {
                let x2 = -r + j as f64 * step;
                let val = self.c[0] * x1 + self.c[1] * x2;
                if best.is_some_and(|b| val >= b) {
                    continue;
                }
                let entry = |i: usize, j: usize| self.constant[i][j] + x1 * self.a1[i][j] + x2 * self.a2[i][j];
                let packed = [
                    entry(0, 0),
                    entry(1, 1),
                    entry(2, 2),
                    entry(0, 1),
                    entry(0, 2),
                    entry(1, 2),
                ];
                if psd3(packed, 0.0) {
                    best = Some(val);
                }
            }
        }
        best
    }
}

/// Small deterministic generator so oracle instances do not depend on the
/// library's random plumbing.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    pub fn signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    pub fn symmetric(&mut self, n: usize) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.signed();
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        a
    }

    pub fn two_var_program(&mut self) -> TwoVarProgram {
        let mut identity = vec![vec![0.0; 3]; 3];
        for (i, row) in identity.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let angle = std::f64::consts::TAU * self.next_f64();
        TwoVarProgram {
            c: [angle.cos(), angle.sin()],
            constant: identity,
            a1: self.symmetric(3),
            a2: self.symmetric(3),
            box_half_width: 2.0,
        }
    }
}

/// First time the scalar path `σ0 - κ t + δ sin t` hits zero (κ > δ ≥ 0, σ0 > 0).
pub fn sine_disturbed_reach(sigma0: f64, kappa: f64, delta: f64) -> f64 {
    let g = |t: f64| sigma0 - kappa * t + delta * t.sin();
    // g is strictly decreasing, so bisection on a bracket is exact.
    let (mut lo, mut hi) = (0.0, (sigma0 + delta) / (kappa - delta) + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

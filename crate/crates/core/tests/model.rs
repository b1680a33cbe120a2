use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use proptest::prelude::*;
use reachtime::linalg::Matrix;
use reachtime::model::{make_servoing_plant, phi, rotation, ControlKind, SimplexWeight};

/// Nonnegative least squares by enumerating supports: the best feasible
/// point is the unconstrained least-squares solution on some support.
/// Returns the smallest residual over supports whose solution is
/// nonnegative.
fn nnls_residual(columns: &[Vec<f64>], target: &[f64]) -> f64 {
    let k = columns.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let p = idx.len();
        // Normal equations, solved by Gaussian elimination.
        let mut a = vec![vec![0.0; p + 1]; p];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r][c] = columns[i].iter().zip(&columns[j]).map(|(x, y)| x * y).sum();
            }
            a[r][p] = columns[i].iter().zip(target).map(|(x, y)| x * y).sum();
        }
        let mut ok = true;
        for c in 0..p {
            let piv = (c..p).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            if a[piv][c].abs() < 1e-13 {
                ok = false;
                break;
            }
            a.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for cc in c..=p {
                        a[r][cc] -= f * a[c][cc];
                    }
                }
            }
        }
        if !ok {
            continue;
        }
        let w: Vec<f64> = (0..p).map(|r| a[r][p] / a[r][r]).collect();
        if w.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut res = target.to_vec();
        for (r, &i) in idx.iter().enumerate() {
            for (t, x) in res.iter_mut().zip(&columns[i]) {
                *t -= w[r] * x;
            }
        }
        best = best.min(res.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    best
}

fn corners(delta_bar: f64) -> Vec<Vec<f64>> {
    let (s, c) = delta_bar.sin_cos();
    // (c, s, 1): the last coordinate enforces weights summing to one.
    vec![vec![c, s, 1.0], vec![1.0, s, 1.0], vec![c, -s, 1.0], vec![1.0, -s, 1.0]]
}

#[test]
fn rotation_pairs_lie_in_the_corner_hull() {
    let cols = corners(FRAC_PI_4);
    for k in 0..=1000 {
        let d = -FRAC_PI_4 + (k as f64) * (2.0 * FRAC_PI_4 / 1000.0);
        let r = nnls_residual(&cols, &[d.cos(), d.sin(), 1.0]);
        assert!(r <= 1e-9, "angle {d}: residual {r}");
    }
    // A point outside the hull is rejected by the oracle.
    assert!(nnls_residual(&cols, &[0.5, 0.0, 1.0]) > 1e-3);
}

#[test]
fn uniform_combination_is_a_hull_member() {
    let plant = make_servoing_plant(FRAC_PI_6, FRAC_PI_4, 0.0).unwrap();
    let b = plant.combine(&SimplexWeight::uniform(4)).unwrap();
    // B = R(c, s) B(φ̄)  ⇒  R(c, s) = B B(φ̄)ᵀ.
    let r = b.matmul(&rotation(FRAC_PI_6).transpose());
    let (c, s) = (r[(0, 0)], r[(0, 1)]);
    assert!((r[(1, 1)] - c).abs() < 1e-14 && (r[(1, 0)] + s).abs() < 1e-14);
    assert!(nnls_residual(&corners(FRAC_PI_4), &[c, s, 1.0]) <= 1e-9);
}

proptest! {
    #[test]
    fn combinations_stay_in_the_hull(raw in prop::collection::vec(0.0f64..1.0, 4)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let drift = 1.0 - w.iter().sum::<f64>();
        w[0] += drift;
        prop_assume!(w[0] >= 0.0);
        let plant = make_servoing_plant(FRAC_PI_6, FRAC_PI_4, 0.0).unwrap();
        let b = plant.combine(&SimplexWeight::new(w).unwrap()).unwrap();
        let r = b.matmul(&rotation(FRAC_PI_6).transpose());
        prop_assert!(nnls_residual(&corners(FRAC_PI_4), &[r[(0, 0)], r[(0, 1)], 1.0]) <= 1e-9);
        prop_assert_eq!(b.rank(1e-12).unwrap(), 2);
    }

    #[test]
    fn phi_is_bounded_and_odd(sigma in prop::collection::vec(-10.0f64..10.0, 1..5)) {
        for kind in [ControlKind::Vsc, ControlKind::Uvc] {
            let p = phi(kind, &sigma);
            let neg: Vec<f64> = sigma.iter().map(|v| -v).collect();
            let q = phi(kind, &neg);
            for (a, b) in p.iter().zip(&q) {
                prop_assert_eq!(*a, -*b);
            }
            // σᵀ φ(σ) ≥ 0 and ‖φ‖ ≤ √n.
            let dot: f64 = sigma.iter().zip(&p).map(|(s, v)| s * v).sum();
            prop_assert!(dot >= 0.0);
            let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(norm <= (sigma.len() as f64).sqrt() + 1e-12);
        }
    }
}

#[test]
fn two_identical_vertices() {
    let v = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap();
    let plant = reachtime::model::PolytopicPlant::new(vec![v.clone(), v.clone()], 0.0).unwrap();
    for w in [0.0, 0.25, 1.0] {
        let b = plant.combine(&SimplexWeight::new(vec![w, 1.0 - w]).unwrap()).unwrap();
        assert!((&b - &v).max_abs() < 1e-15);
    }
}

//! Reference implementations that share no code with the library solvers.

#![allow(dead_code)]

use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Independent Hamiltonian: entries written straight from the model
/// definition, `H_ml = e^{u(1-|m-l|)}` off the diagonal (nearest neighbour
/// only when `aa`) and `V cos(2 pi zeta m + phi)` on it, sites `m = 1..N`.
pub fn reference_hamiltonian(n: usize, u: f64, v: f64, phi: f64, aa: bool) -> Vec<Vec<f64>> {
    let zeta = (5f64.sqrt() - 1.0) / 2.0;
    let mut h = vec![vec![0.0; n]; n];
    for m in 0..n {
        for l in 0..n {
            let d = m.abs_diff(l);
            h[m][l] = if d == 0 {
                v * (2.0 * std::f64::consts::PI * zeta * (m + 1) as f64 + phi).cos()
            } else if aa {
                if d == 1 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (u * (1.0 - d as f64)).exp()
            };
        }
    }
    h
}

/// Number of eigenvalues of the symmetric matrix `a` below `x`, from the
/// signs of the pivots of `a - x I` (Sylvester's law of inertia).
fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut negative = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot < 0.0 {
            negative += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / pivot;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negative
}

/// Ascending eigenvalues of a small symmetric matrix by bisection on the
/// inertia count.
pub fn bisection_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let radius = a
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

type CMat = Vec<Vec<C64>>;

fn identity(n: usize) -> CMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                .collect()
        })
        .collect()
}

fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut c = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// `exp(-i H tau)` by Taylor series with scaling and squaring.
pub fn expm_propagator(h: &[Vec<f64>], tau: f64) -> CMat {
    let n = h.len();
    let norm = h
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * tau.abs();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scale = tau / 2f64.powi(squarings as i32);
    let a: CMat = h
        .iter()
        .map(|row| row.iter().map(|&x| C64::new(0.0, -x * scale)).collect())
        .collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

pub fn apply(u: &CMat, psi: &[C64]) -> Vec<C64> {
    u.iter()
        .map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A normalized complex state with a deterministic, non-trivial pattern.
pub fn pattern_state(n: usize, seed: f64) -> Vec<C64> {
    let raw: Vec<C64> = (0..n)
        .map(|m| {
            let x = (m as f64 + 1.0) * (seed + 0.37);
            C64::new(x.sin() + 0.3, (1.7 * x).cos())
        })
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z / norm).collect()
}

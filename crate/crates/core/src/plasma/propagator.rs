//! Exact per-wavenumber propagation of the Maxwell-Ohm block and the
//! exponential-integrator coefficients built on it.
//!
//! For `k != 0`, write `E = e k_perp/|k| + e_par k/|k|` and `p = i b`. Then
//!
//! ```text
//! d/dt (e, p) = [[-s c^2, -c|k|], [c|k|, 0]] (e, p),   d/dt e_par = -s c^2 e_par
//! ```
//!
//! so every mode reduces to one real 2x2 block plus a scalar damping.

use num_complex::Complex64;

pub(crate) type M2 = [f64; 4];

const TAYLOR_RADIUS: f64 = 2.0;
const TAYLOR_TERMS: usize = 48;
const CONTOUR_POINTS: usize = 32;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `phi_k(z)` for `k = 0..=3`, where `phi_0 = exp` and
/// `phi_{k+1}(z) = (phi_k(z) - 1/k!) / z`.
pub fn phi(z: Complex64) -> [Complex64; 4] {
    if z.norm() < TAYLOR_RADIUS {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in (0..TAYLOR_TERMS).rev() {
                acc = acc * z + 1.0 / factorial(n + k);
            }
            *o = acc;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [e, p1, p2, p3]
    }
}

/// Divided differences `f[z1, z2]` of the four phi functions.
fn divided(z1: Complex64, z2: Complex64) -> [Complex64; 4] {
    let d = z1 - z2;
    if d.norm() > 0.5 {
        let (a, b) = (phi(z1), phi(z2));
        return [0, 1, 2, 3].map(|k| (a[k] - b[k]) / d);
    }
    // Cauchy integral on a unit circle around the pair
    let m = 0.5 * (z1 + z2);
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for j in 0..CONTOUR_POINTS {
        let th = std::f64::consts::TAU * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let w = Complex64::from_polar(1.0, th);
        let z = m + w;
        let f = phi(z);
        let den = (z - z1) * (z - z2);
        for k in 0..4 {
            acc[k] += f[k] * w / den;
        }
    }
    acc.map(|a| a / CONTOUR_POINTS as f64)
}

/// Eigenvalues of a real 2x2 matrix, ordered so the first has the larger
/// modulus.
fn eigenvalues(a: &M2) -> (Complex64, Complex64) {
    let tr = a[0] + a[3];
    let det = a[0] * a[3] - a[1] * a[2];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let big = half + half.signum() * disc.sqrt();
        let big = if half == 0.0 { disc.sqrt() } else { big };
        let small = if big == 0.0 { 0.0 } else { det / big };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    } else {
        let im = (-disc).sqrt();
        (Complex64::new(half, im), Complex64::new(half, -im))
    }
}

/// `[phi_0(A), phi_1(A), phi_2(A), phi_3(A)]` for a real 2x2 matrix `A`
/// (row-major), via the Newton form `f(A) = f(l1) I + f[l1, l2] (A - l1 I)`.
pub fn phi_matrix(a: &M2) -> [M2; 4] {
    let (l1, l2) = eigenvalues(a);
    let f1 = phi(l1);
    let dd = divided(l1, l2);
    [0, 1, 2, 3].map(|k| {
        let c0 = f1[k] - dd[k] * l1;
        let c1 = dd[k];
        [
            (c0 + c1 * a[0]).re,
            (c1 * a[1]).re,
            (c1 * a[2]).re,
            (c0 + c1 * a[3]).re,
        ]
    })
}

pub(crate) fn block(sigma: f64, c: f64, kk: f64) -> M2 {
    [-sigma * c * c, -c * kk, c * kk, 0.0]
}

/// Exact propagator of the per-mode linear system in the original
/// variables `(E1, E2, b)`, for wavevector `(k1, k2)` over time `t`.
pub fn mode_propagator(sigma: f64, c: f64, k1: f64, k2: f64, t: f64) -> [[Complex64; 3]; 3] {
    let kk = k1.hypot(k2);
    let m = block(sigma, c, kk).map(|x| x * t);
    let f = phi_matrix(&m)[0];
    let damp = (-sigma * c * c * t).exp();
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    if kk == 0.0 {
        return [[one * damp, z, z], [z, one * damp, z], [z, z, one]];
    }
    let (n1, n2) = (k1 / kk, k2 / kk);
    // (e, e_par, p) = T (E1, E2, b)
    let tm = [[-n2 * one, n1 * one, z], [n1 * one, n2 * one, z], [z, z, i]];
    // inverse of T
    let ti = [
        [-n2 * one, n1 * one, z],
        [n1 * one, n2 * one, z],
        [z, z, -i],
    ];
    let g = [
        [f[0] * one, z, f[1] * one],
        [z, damp * one, z],
        [f[2] * one, z, f[3] * one],
    ];
    let mul = |a: &[[Complex64; 3]; 3], b: &[[Complex64; 3]; 3]| {
        let mut o = [[z; 3]; 3];
        for r in 0..3 {
            for col in 0..3 {
                o[r][col] = (0..3).map(|q| a[r][q] * b[q][col]).sum();
            }
        }
        o
    };
    mul(&ti, &mul(&g, &tm))
}

/// Exponential-integrator weights for one step `h` of `y' = A y + N`:
/// `e2 = exp(hA/2)`, `q = (h/2) phi_1(hA/2)`, `e = exp(hA)` and the three
/// fourth-order weights.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EtdCoef {
    pub e2: M2,
    pub q: M2,
    pub e: M2,
    pub f1: M2,
    pub f2: M2,
    pub f3: M2,
}

impl EtdCoef {
    pub(crate) fn new(a: &M2, h: f64) -> Self {
        let half = phi_matrix(&a.map(|x| 0.5 * h * x));
        let full = phi_matrix(&a.map(|x| h * x));
        let comb = |w: [f64; 4]| -> M2 {
            let mut o = [0.0; 4];
            for (k, wk) in w.iter().enumerate() {
                for i in 0..4 {
                    o[i] += h * wk * full[k][i];
                }
            }
            o
        };
        EtdCoef {
            e2: half[0],
            q: half[1].map(|x| 0.5 * h * x),
            e: full[0],
            f1: comb([0.0, 1.0, -3.0, 4.0]),
            f2: comb([0.0, 0.0, 1.0, -2.0]),
            f3: comb([0.0, 0.0, -1.0, 4.0]),
        }
    }

    /// Scalar version for `y' = lambda y + N`, stored on the diagonal.
    pub(crate) fn scalar(lambda: f64, h: f64) -> Self {
        Self::new(&[lambda, 0.0, 0.0, 0.0], h)
    }
}

#[inline]
pub(crate) fn apply(m: &M2, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    (x * m[0] + y * m[1], x * m[2] + y * m[3])
}

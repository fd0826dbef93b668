//! Dense complex linear algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `ab - ba`
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Frobenius norm of `a†a - 1`.
pub fn unitarity_error(a: &CMatrix) -> f64 {
    let n = a.ncols();
    frobenius(&(a.adjoint() * a - CMatrix::identity(n, n)))
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues ascend. Each eigenvector is rescaled so that its
/// largest-magnitude component is real and positive (ties go to the lowest index).
pub fn hermitian_eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize so round-off in the input cannot leak into the solver
    let h = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let mut best = 0;
        let mut best_abs = -1.0;
        for r in 0..n {
            let a = v[r].norm();
            if a > best_abs + 1e-12 {
                best_abs = a;
                best = r;
            }
        }
        let phase = if best_abs > 0.0 { v[best].conj() / best_abs } else { ONE };
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase;
        }
    }
    (values, vectors)
}

/// `min_φ ‖a − e^{iφ} b‖_F`, attained at `φ = arg tr(b†a)`.
pub fn phase_min_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    frobenius(&(a - b * phase))
}

/// Unitary factor of the polar decomposition `a = W P`.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    u * v_t
}

/// `exp(-i h dt)` for a 2×2 Hermitian `h`, via the Pauli decomposition.
pub fn expm_2x2_hermitian(h: &[[C64; 2]; 2], dt: f64) -> [[C64; 2]; 2] {
    let h0 = 0.5 * (h[0][0].re + h[1][1].re);
    let hz = 0.5 * (h[0][0].re - h[1][1].re);
    let hx = 0.5 * (h[0][1].re + h[1][0].re);
    let hy = 0.5 * (h[1][0].im - h[0][1].im);
    let r = (hx * hx + hy * hy + hz * hz).sqrt();
    let theta = r * dt;
    let (s, co) = theta.sin_cos();
    // sin(r dt)/r, continuous at r = 0
    let k = if r > 0.0 { s / r } else { dt };
    let global = C64::from_polar(1.0, -h0 * dt);
    let m00 = c(co, -k * hz);
    let m11 = c(co, k * hz);
    let m01 = c(-k * hy, -k * hx);
    let m10 = c(k * hy, -k * hx);
    [[global * m00, global * m01], [global * m10, global * m11]]
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

pub fn real_matrix(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| c(x, 0.0))
}

pub fn to_vector(v: &[C64]) -> CVector {
    DVector::from_column_slice(v)
}

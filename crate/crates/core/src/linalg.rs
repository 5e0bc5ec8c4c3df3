//! Small dense Hermitian kernels on row-major `Complex64` buffers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::system::ChannelSample;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// In-place Cholesky factorization `A = L L^H` of a Hermitian positive
/// definite matrix. Only the lower triangle is read; on success it holds `L`.
/// Returns `false` if a non-positive pivot is met.
pub fn cholesky_in_place(a: &mut [Complex64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut diag = a[j * n + j].re;
        for k in 0..j {
            diag -= a[j * n + k].norm_sqr();
        }
        if diag.is_nan() || diag <= 0.0 {
            return false;
        }
        let ljj = diag.sqrt();
        a[j * n + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / ljj;
        }
    }
    true
}

/// Natural log-determinant of a Hermitian positive definite matrix.
pub fn hermitian_logdet(a: &[Complex64], n: usize) -> Option<f64> {
    let mut l = a.to_vec();
    if !cholesky_in_place(&mut l, n) {
        return None;
    }
    Some(cholesky_logdet(&l, n))
}

/// `ln det A` from its Cholesky factor.
pub fn cholesky_logdet(l: &[Complex64], n: usize) -> f64 {
    2.0 * (0..n).map(|i| l[i * n + i].re.ln()).sum::<f64>()
}

/// `g^H A^{-1} g` given the Cholesky factor of `A`.
pub fn cholesky_quad_form(l: &[Complex64], n: usize, g: &[Complex64]) -> f64 {
    // forward substitution L y = g; then g^H A^{-1} g = |y|^2
    let mut y = g.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    y.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Effective signal matrix of a diagonal precoder, in the smaller dimension:
/// `scale * H D H^H` when `n_r <= n_t`, else `scale * D^{1/2} H^H H D^{1/2}`.
/// Both have the same nonzero spectrum.
pub fn signal_matrix(h: &ChannelSample, powers: &[f64], scale: f64) -> (Vec<Complex64>, usize) {
    let (n_r, n_t) = (h.n_r(), h.n_t());
    let e = h.entries();
    if n_r <= n_t {
        let mut m = vec![ZERO; n_r * n_r];
        for i in 0..n_r {
            for j in 0..=i {
                let mut s = ZERO;
                for (k, &p) in powers.iter().enumerate() {
                    if p != 0.0 {
                        s += e[i * n_t + k] * e[j * n_t + k].conj() * p;
                    }
                }
                s *= scale;
                m[i * n_r + j] = s;
                m[j * n_r + i] = s.conj();
            }
        }
        (m, n_r)
    } else {
        let roots: Vec<f64> = powers.iter().map(|p| p.sqrt()).collect();
        let mut m = vec![ZERO; n_t * n_t];
        for i in 0..n_t {
            for j in 0..=i {
                let w = roots[i] * roots[j];
                if w == 0.0 {
                    continue;
                }
                let mut s = ZERO;
                for k in 0..n_r {
                    s += e[k * n_t + i].conj() * e[k * n_t + j];
                }
                s *= scale * w;
                m[i * n_t + j] = s;
                m[j * n_t + i] = s.conj();
            }
        }
        (m, n_t)
    }
}

/// Adds the identity in place.
pub fn add_identity(m: &mut [Complex64], n: usize) {
    for i in 0..n {
        m[i * n + i] += 1.0;
    }
}

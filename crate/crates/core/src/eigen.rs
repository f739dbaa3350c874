//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use crate::error::{DpaError, Result};
use crate::fock::{ComplexMatrix, C64, HERMITIAN_TOL, ZERO};

pub const MAX_JACOBI_SIZE: usize = 8;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with matching eigenvector columns (`M = V diag(w) V†`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let diag: Vec<C64> = self.values.iter().map(|&w| C64::new(w, 0.0)).collect();
        let vd = &self.vectors * &ComplexMatrix::diagonal(&diag);
        let out = &vd * &self.vectors.adjoint();
        debug_assert_eq!(out.rows(), n);
        out
    }
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() || m.rows() == 0 || m.rows() > MAX_JACOBI_SIZE {
        return Err(DpaError::InvalidDimension(format!(
            "Jacobi solver takes square matrices of size 1..={MAX_JACOBI_SIZE}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(DpaError::NotHermitian { deviation });
    }

    let n = m.rows();
    // symmetrize so the diagonal is exactly real
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// One unitary rotation annihilating `a[p][q]`: `a <- U† a U`, `v <- v U`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let h = a[(p, q)];
    let g = h.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // phase that makes the (p, q) entry real, then a real Jacobi rotation
    let phase = h / g;
    let zeta = (aqq - app) / (2.0 * g);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s e^{-i th}, c e^{-i th}]]
    let e = phase.conj();
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -e * s;
    let u_qq = e * c;

    let n = a.rows();
    // columns: a <- a U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    // rows: a <- U† a
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let w = hermitian_eigenvalues(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(w, vec![1.0; 4]);
    }

    #[test]
    fn rejects_non_hermitian_and_oversized() {
        let mut m = ComplexMatrix::identity(3);
        m[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(DpaError::NotHermitian { .. })
        ));
        assert!(matches!(
            hermitian_eigenvalues(&ComplexMatrix::identity(9)),
            Err(DpaError::InvalidDimension(_))
        ));
    }

    #[test]
    fn squeezed_witness_spectrum() {
        let phi: f64 = 0.7;
        let half = c(0.5, 0.0);
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 3)] = C64::from_polar(0.5, phi);
        m[(3, 0)] = C64::from_polar(0.5, -phi);
        m[(1, 1)] = half;
        m[(2, 2)] = half;
        let w = hermitian_eigenvalues(&m).unwrap();
        for (got, want) in w.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn thermal_witness_negative_eigenvalue() {
        // A = 4, Gamma = 4 gives -(sqrt(80) - 4) / 24
        let (a, g) = (4.0, 4.0);
        let norm = 2.0 * a + g;
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 3)] = C64::from_polar(a / norm, 1.1);
        m[(3, 0)] = m[(0, 3)].conj();
        m[(1, 1)] = c(a / norm, 0.0);
        m[(2, 2)] = c(a / norm, 0.0);
        m[(3, 3)] = c(g / norm, 0.0);
        let w = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(w[0], -(80f64.sqrt() - 4.0) / 24.0, epsilon = 1e-14);
    }

    fn hermitian_strategy() -> impl Strategy<Value = ComplexMatrix> {
        (1usize..=8).prop_flat_map(|n| {
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n * n).prop_map(move |v| {
                let raw = ComplexMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1));
                &raw + &raw.adjoint()
            })
        })
    }

    proptest! {
        #[test]
        fn reconstruction_and_trace(m in hermitian_strategy()) {
            let eig = hermitian_eigen(&m).unwrap();
            let rec = eig.reconstruct();
            prop_assert!((&rec - &m).frobenius_norm() < 1e-10);
            let sum: f64 = eig.values.iter().sum();
            prop_assert!((sum - m.trace().re).abs() < 1e-12 * (1.0 + m.frobenius_norm()));
            prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            let vv = &eig.vectors.adjoint() * &eig.vectors;
            prop_assert!(vv.max_abs_diff(&ComplexMatrix::identity(m.rows())) < 1e-12);
        }
    }

    #[test]
    fn deterministic_results() {
        let m = ComplexMatrix::from_fn(5, 5, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            if i == j {
                c(x.sin(), 0.0)
            } else if i < j {
                c(x.cos(), (x * 0.3).sin())
            } else {
                c(((j * 7 + i * 3) as f64).cos(), -(((j * 7 + i * 3) as f64) * 0.3).sin())
            }
        });
        let a = hermitian_eigenvalues(&m).unwrap();
        let b = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }
}

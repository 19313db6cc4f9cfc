//! Gray-mapped 4-QAM and LMMSE equalization.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::afdm::{self, AfdmConfig};
use crate::channel::ResolvedPath;
use crate::{Error, Result};

/// Gray 4-QAM: per symbol, bit 0 selects the real sign and bit 1 the
/// imaginary sign, `00 -> (1+j)/sqrt(2)`. Unit average energy.
pub fn qam_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "bit count {} not divisible by 2",
            bits.len()
        )));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Ok(bits
        .chunks_exact(2)
        .map(|b| {
            let re = if b[0] == 0 { a } else { -a };
            let im = if b[1] == 0 { a } else { -a };
            Complex64::new(re, im)
        })
        .collect())
}

/// Nearest-point hard decision, inverse of [`qam_map`].
pub fn qam_demap(symbols: &[Complex64]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        bits.push(u8::from(s.re < 0.0));
        bits.push(u8::from(s.im < 0.0));
    }
    bits
}

/// LMMSE equalizer `x = (H^H H + noise_var I)^{-1} H^H y`.
///
/// With `noise_var = 0` and a rank-deficient `H` the normal equations are
/// singular; the Moore-Penrose pseudo-inverse of `H` is used instead.
pub fn lmmse_equalize(
    y: &[Complex64],
    h_eff: &DMatrix<Complex64>,
    noise_var: f64,
) -> Result<Vec<Complex64>> {
    let n = h_eff.nrows();
    if h_eff.ncols() != n || y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if noise_var < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be nonnegative, got {noise_var}"
        )));
    }
    let yv = DVector::from_column_slice(y);
    let rhs = h_eff.adjoint() * &yv;
    let mut gram = h_eff.adjoint() * h_eff;
    for i in 0..n {
        gram[(i, i)] += Complex64::new(noise_var, 0.0);
    }
    if let Some(chol) = Cholesky::new(gram.clone()) {
        return Ok(chol.solve(&rhs).as_slice().to_vec());
    }
    if let Some(solved) = gram.clone().lu().solve(&rhs) {
        return Ok(solved.as_slice().to_vec());
    }
    // noise_var = 0 with rank-deficient H: minimum-norm least squares.
    let pinv = h_eff
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::InvalidConfig(format!("pseudo-inverse failed: {e}")))?;
    Ok((pinv * yv).as_slice().to_vec())
}

/// LMMSE equalization straight from the received time-domain body when the
/// channel is given as paths rather than a dense matrix.
///
/// With `H_eff = A S A^H` (A the unitary DAFT, S the sparse body-domain
/// channel operator), the LMMSE solution reduces to
/// `x = A (S^H S + noise_var I)^{-1} S^H r_body`, solved by conjugate
/// gradients on the Hermitian positive (semi)definite normal operator; each
/// iteration costs O(PN). Agrees with [`lmmse_equalize`] applied to the
/// dense effective channel.
pub fn lmmse_equalize_paths(
    body: &[Complex64],
    paths: &[ResolvedPath],
    cfg: &AfdmConfig,
    noise_var: f64,
) -> Result<Vec<Complex64>> {
    if body.len() != cfg.n {
        return Err(Error::LengthMismatch {
            expected: cfg.n,
            got: body.len(),
        });
    }
    if noise_var < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be nonnegative, got {noise_var}"
        )));
    }
    let op = afdm::BodyChannelOp::new(paths, cfg);
    let rhs = op.apply_adjoint(body);
    let normal_op = |v: &[Complex64]| -> Vec<Complex64> {
        let mut out = op.apply_adjoint(&op.apply(v));
        for (o, x) in out.iter_mut().zip(v) {
            *o += noise_var * x;
        }
        out
    };
    let w = conjugate_gradient(&normal_op, &rhs, 1e-12, 20 * cfg.n);
    afdm::daft(&w, cfg)
}

fn conjugate_gradient<F: Fn(&[Complex64]) -> Vec<Complex64>>(
    op: &F,
    b: &[Complex64],
    rel_tol: f64,
    max_iter: usize,
) -> Vec<Complex64> {
    let n = b.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let norm_sq = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let b_norm = norm_sq(b);
    if b_norm == 0.0 {
        return x;
    }
    let mut rs_old = b_norm;
    let tol = rel_tol * rel_tol * b_norm;
    for _ in 0..max_iter {
        let ap = op(&p);
        let p_ap: Complex64 = p.iter().zip(&ap).map(|(a, c)| a.conj() * c).sum();
        if p_ap.norm() == 0.0 {
            break;
        }
        let alpha = rs_old / p_ap.re;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = norm_sq(&r);
        if rs_new < tol {
            break;
        }
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    x
}

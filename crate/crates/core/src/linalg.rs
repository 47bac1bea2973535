//! Dense symmetric linear algebra used by the operator and heat modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// columns with their first significant component positive.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Eigensolver("matrix is not square".into()));
    }
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let scale = v.amax();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(col, &v);
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue of a symmetric matrix, skipping the eigenvectors.
pub fn smallest_symmetric_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Eigensolver("matrix is empty or not square".into()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("matrix has non-finite entries".into()));
    }
    Ok(m.symmetric_eigenvalues().min())
}

/// Solve `a x = b` for symmetric positive definite `a`, checking the residual.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinearSolve("matrix is not positive definite".into()))?;
    let x = chol.solve(b);
    check_residual(a, &x, b)?;
    Ok(x)
}

/// Solve a general square system by LU with partial pivoting, checking the residual.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::LinearSolve("matrix is singular".into()))?;
    check_residual(a, &x, b)?;
    Ok(x)
}

fn check_residual(a: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    let residual = (a * x - b).amax();
    let scale = a.amax() * x.amax() + b.amax();
    if !(residual <= 1e-10 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::LinearSolve(format!(
            "residual {residual:e} exceeds tolerance at scale {scale:e}"
        )));
    }
    Ok(())
}

/// `exp(a)` by scaling and squaring of a truncated Taylor series.
#[derive(Clone, Debug)]
pub struct SeriesExp {
    pub value: DMatrix<f64>,
    /// Number of squarings.
    pub squarings: u32,
    /// Taylor order used on the scaled matrix.
    pub order: usize,
    /// Bound on the 1-norm of the Taylor remainder for the scaled matrix.
    pub remainder_bound: f64,
}

/// Matrix exponential through its power series. The matrix is scaled by
/// `2^-s` so that its 1-norm is at most 1/2, the series is truncated once the
/// remainder bound `|B|^(K+1)/(K+1)! / (1 - |B|/(K+2))` drops below `1e-18`,
/// and the result is squared `s` times.
pub fn expm_series(a: &DMatrix<f64>) -> SeriesExp {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let b = a / 2f64.powi(squarings as i32);
    let nb = norm / 2f64.powi(squarings as i32);

    let mut value = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    let mut order = 0;
    let mut coeff = 1.0; // |B|^k / k!
    let mut remainder_bound = f64::INFINITY;
    for k in 1..=40 {
        term = &term * &b / k as f64;
        value += &term;
        order = k;
        coeff *= nb / k as f64;
        remainder_bound = coeff * nb / (k + 1) as f64 / (1.0 - nb / (k + 2) as f64);
        if remainder_bound < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        value = &value * &value;
    }
    SeriesExp {
        value,
        squarings,
        order,
        remainder_bound,
    }
}

pub fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

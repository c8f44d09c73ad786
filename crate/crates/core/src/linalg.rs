//! Small dense eigenproblems.
//!
//! Eigenvalues of real matrices come from balancing, reduction to upper
//! Hessenberg form and the Francis double-shift QR iteration. Eigenvectors
//! are recovered as null spaces of `A - mu I` through a complex SVD, which
//! also handles repeated eigenvalues. The commuting-pair test decides whether
//! a Jacobian and an inner coupling matrix can be diagonalized by one basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Largest dimension accepted by [`eigendecompose`].
pub const MAX_DECOMPOSE_DIM: usize = 64;
/// Eigenvector bases worse conditioned than this count as defective.
pub const DIAGONALIZABLE_COND_LIMIT: f64 = 1e8;
/// Relative tolerance on `||DF H - H DF||`.
pub const COMMUTATOR_TOL: f64 = 1e-9;

const QR_MAX_SWEEPS: usize = 60;
const OFF_DIAGONAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} exceeds the dense limit of {MAX_DECOMPOSE_DIM}")]
    TooLarge(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("QR iteration failed to converge ({found} of {dim} eigenvalues found)")]
    NoConvergence { found: usize, dim: usize },
    #[error("eigenvector residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
}

/// Full eigen-decomposition `A P = P diag(eigenvalues)`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm eigenvectors stored as columns, aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
    /// 2-norm condition number of `eigenvectors`; infinite when `A` is
    /// treated as non-diagonalizable.
    pub condition_number: f64,
}

impl EigenDecomposition {
    pub fn is_diagonalizable(&self) -> bool {
        self.condition_number.is_finite()
    }

    /// `||A P - P diag(lambda)||_inf`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let ac = to_complex(a);
        let ap = &ac * &self.eigenvectors;
        let mut worst = 0.0_f64;
        for i in 0..ap.nrows() {
            let mut row = 0.0;
            for j in 0..ap.ncols() {
                row += (ap[(i, j)] - self.eigenvectors[(i, j)] * self.eigenvalues[j]).norm();
            }
            worst = worst.max(row);
        }
        worst
    }
}

/// Eigenvalues shared by `DF` and `H` under one diagonalizing basis `Q`.
#[derive(Debug, Clone)]
pub struct CommutingPair {
    pub mu_df: Vec<Complex64>,
    pub mu_h: Vec<Complex64>,
    pub basis: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotCommutingReason {
    Commutator,
    JacobianDefective,
    CouplingDefective,
    NoSharedBasis,
}

#[derive(Debug, Clone)]
pub enum Commutation {
    Commuting(CommutingPair),
    NotCommuting(NotCommutingReason),
}

pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn inf_norm_c(a: &DMatrix<Complex64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Descending real part, ties broken by descending imaginary part.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| spectral_order(*a, *b));
}

fn spectral_order(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

fn check_square(a: &DMatrix<f64>) -> Result<usize, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(a.nrows())
}

/// All eigenvalues of a real square matrix, sorted by [`sort_spectrum`].
///
/// No size limit applies here; this is also used for the collocation
/// matrices of the spectral root finder.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>, LinalgError> {
    let n = check_square(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based working copy keeps the QR sweep close to its textbook form.
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a[(i, j)];
        }
    }
    balance(&mut h, n);
    hessenberg(&mut h, n);
    let mut values = hqr(&mut h, n)?;
    sort_spectrum(&mut values);
    Ok(values)
}

// Index loops mirror the textbook algorithm on a 1-based array.
#[allow(clippy::needless_range_loop)]
fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for j in 1..=n {
                        a[j][i] *= f;
                    }
                }
            }
        }
    }
}

// Gaussian elimination with pivoting to upper Hessenberg form.
// Index loops mirror the textbook algorithm on a 1-based array.
#[allow(clippy::needless_range_loop)]
fn hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0_f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

// Francis double-shift QR on an upper Hessenberg matrix (1-based).
// Index loops mirror the textbook algorithm on a 1-based array.
#[allow(clippy::needless_range_loop)]
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            y = a[nn - 1][nn - 1];
            w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if its == QR_MAX_SWEEPS {
                return Err(LinalgError::NoConvergence {
                    found: n - nn,
                    dim: n,
                });
            }
            if its % 10 == 0 && its > 0 {
                // Exceptional shift.
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            loop {
                z = a[m][m];
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - r - s;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k != nn - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a[i][k] + y * a[i][k + 1];
                        if k != nn - 1 {
                            p += z * a[i][k + 2];
                            a[i][k + 2] -= p * r;
                        }
                        a[i][k + 1] -= p * q;
                        a[i][k] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Eigenvalues plus a unit-norm eigenvector basis.
///
/// Eigenvalues closer than `1e-6 * max(1, ||A||)` are grouped and their
/// common null space is extracted at once, so repeated eigenvalues of
/// diagonalizable matrices get a full basis. A group whose null space is too
/// small (a Jordan block) leaves the decomposition marked non-diagonalizable.
pub fn eigendecompose(a: &DMatrix<f64>) -> Result<EigenDecomposition, LinalgError> {
    let n = check_square(a)?;
    if n > MAX_DECOMPOSE_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    let values = eigenvalues(a)?;
    let scale = inf_norm(a).max(1.0);
    let ac = to_complex(a);

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    let mut defective = false;
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let group: Vec<usize> = (i..n)
            .filter(|&j| !used[j] && (values[j] - values[i]).norm() <= 1e-6 * scale)
            .collect();
        for &j in &group {
            used[j] = true;
        }
        let center = group.iter().map(|&j| values[j]).sum::<Complex64>() / group.len() as f64;
        let mut shifted = ac.clone();
        for d in 0..n {
            shifted[(d, d)] -= center;
        }
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let k = group.len();
        for (slot, &j) in group.iter().enumerate() {
            let row = n - k + slot;
            let v = v_t.row(row).adjoint();
            // Rayleigh quotient keeps distinct-but-clustered eigenvalues apart.
            let mu = if k == 1 {
                values[j]
            } else {
                (v.adjoint() * &ac * &v)[(0, 0)]
            };
            let res = (&ac * &v - &v * mu).norm();
            if res > 1e-8 * scale {
                defective = true;
            }
            eigenvalues.push(if k == 1 { values[j] } else { mu });
            vectors.push(v);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| spectral_order(eigenvalues[x], eigenvalues[y]));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        p.set_column(col, &vectors[i]);
    }

    let condition_number = if defective {
        f64::INFINITY
    } else {
        let sv = p.clone().singular_values();
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let cond = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if cond < DIAGONALIZABLE_COND_LIMIT {
            cond
        } else {
            f64::INFINITY
        }
    };
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: p,
        condition_number,
    })
}

/// Tests whether `DF` and `H` commute and are both diagonalizable; if so,
/// returns index-aligned eigenvalues under a shared eigenvector basis.
///
/// The shared basis is taken from a generic combination `DF + t H`: on each
/// joint eigenspace of a commuting diagonalizable pair its eigenvalues are
/// distinct for all but finitely many `t`, so its eigenvectors diagonalize
/// both matrices, including on repeated eigenspaces of either one.
pub fn try_commuting_pair(df: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Commutation, LinalgError> {
    let m = check_square(df)?;
    let mh = check_square(h)?;
    if m != mh {
        return Err(LinalgError::DimensionMismatch(m, mh));
    }
    let ndf = inf_norm(df);
    let nh = inf_norm(h);
    let commutator = inf_norm(&(df * h - h * df));
    if commutator > COMMUTATOR_TOL * ndf * nh {
        return Ok(Commutation::NotCommuting(NotCommutingReason::Commutator));
    }
    if !eigendecompose(df)?.is_diagonalizable() {
        return Ok(Commutation::NotCommuting(
            NotCommutingReason::JacobianDefective,
        ));
    }
    if !eigendecompose(h)?.is_diagonalizable() {
        return Ok(Commutation::NotCommuting(
            NotCommutingReason::CouplingDefective,
        ));
    }

    let ratio = if nh > 0.0 { ndf.max(1.0) / nh } else { 0.0 };
    let dfc = to_complex(df);
    let hc = to_complex(h);
    for t in [
        0.618_033_988_749_894_9,
        std::f64::consts::SQRT_2,
        0.271_828_182_845_904_5,
    ] {
        let combo = df + h * (t * ratio);
        let dec = eigendecompose(&combo)?;
        if !dec.is_diagonalizable() {
            continue;
        }
        let q = dec.eigenvectors;
        let Some(q_inv) = q.clone().try_inverse() else {
            continue;
        };
        let mdf = &q_inv * &dfc * &q;
        let mh = &q_inv * &hc * &q;
        if off_diagonal_max(&mdf) > OFF_DIAGONAL_TOL * ndf.max(1.0)
            || off_diagonal_max(&mh) > OFF_DIAGONAL_TOL * nh.max(1.0)
        {
            continue;
        }
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| {
            spectral_order(mdf[(a, a)], mdf[(b, b)]).then(spectral_order(mh[(a, a)], mh[(b, b)]))
        });
        let mut basis = DMatrix::<Complex64>::zeros(m, m);
        for (col, &i) in idx.iter().enumerate() {
            basis.set_column(col, &q.column(i));
        }
        return Ok(Commutation::Commuting(CommutingPair {
            mu_df: idx.iter().map(|&i| mdf[(i, i)]).collect(),
            mu_h: idx.iter().map(|&i| mh[(i, i)]).collect(),
            basis,
        }));
    }
    Ok(Commutation::NotCommuting(NotCommutingReason::NoSharedBasis))
}

fn off_diagonal_max(a: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j {
                worst = worst.max(a[(i, j)].norm());
            }
        }
    }
    worst
}

/// Reconstruction error `||P diag(lambda) P^-1 - A||_inf / ||A||_inf`.
pub fn reconstruction_error(a: &DMatrix<f64>, dec: &EigenDecomposition) -> Option<f64> {
    let p = &dec.eigenvectors;
    let p_inv = p.clone().try_inverse()?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dec.eigenvalues.clone()));
    let rec = p * d * p_inv;
    let diff = rec - to_complex(a);
    Some(inf_norm_c(&diff) / inf_norm(a).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let dec = eigendecompose(&DMatrix::identity(3, 3)).unwrap();
        for v in &dec.eigenvalues {
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(dec.is_diagonalizable());
        assert!(dec.residual(&DMatrix::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn rotation_generator() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = eigenvalues(&a).unwrap();
        assert!((ev[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((ev[1] - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_is_not_diagonalizable() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let dec = eigendecompose(&a).unwrap();
        assert!(!dec.is_diagonalizable());
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let a = DMatrix::from_row_slice(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ev = eigenvalues(&a).unwrap();
        for (got, want) in ev.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ordering_breaks_ties_on_imaginary_part() {
        let mut v = vec![c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0)];
        sort_spectrum(&mut v);
        assert_eq!(v, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]);
    }

    #[test]
    fn identity_coupling_commutes() {
        let df =
            DMatrix::from_row_slice(3, 3, &[0.0, -1.0, -1.0, 1.0, 0.15, 0.0, 0.02, 0.0, -9.997]);
        match try_commuting_pair(&df, &DMatrix::identity(3, 3)).unwrap() {
            Commutation::Commuting(pair) => {
                for mh in &pair.mu_h {
                    assert!((mh - c(1.0, 0.0)).norm() < 1e-10);
                }
            }
            other => panic!("expected commuting pair, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_commutator_detected() {
        let df = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            try_commuting_pair(&df, &h).unwrap(),
            Commutation::NotCommuting(NotCommutingReason::Commutator)
        ));
    }

    #[test]
    fn polynomial_coupling_doubles_eigenvalues() {
        let df = DMatrix::from_row_slice(
            3,
            3,
            &[-10.0, 10.0, 0.0, 1.0, -1.0, -8.485, 8.485, 8.485, -2.667],
        );
        let h = &df * 2.0;
        let Commutation::Commuting(pair) = try_commuting_pair(&df, &h).unwrap() else {
            panic!("expected commuting pair");
        };
        for (a, b) in pair.mu_df.iter().zip(&pair.mu_h) {
            assert!((b - a * 2.0).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn repeated_jacobian_eigenvalue_splits_on_coupling() {
        let df = DMatrix::identity(2, 2);
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let Commutation::Commuting(pair) = try_commuting_pair(&df, &h).unwrap() else {
            panic!("expected commuting pair");
        };
        let mut mh: Vec<f64> = pair.mu_h.iter().map(|x| x.re).collect();
        mh.sort_by(f64::total_cmp);
        assert!((mh[0] - 0.0).abs() < 1e-12 && (mh[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let err = try_commuting_pair(&DMatrix::identity(2, 2), &DMatrix::identity(3, 3));
        assert!(matches!(err, Err(LinalgError::DimensionMismatch(2, 3))));
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            eigendecompose(&DMatrix::identity(65, 65)),
            Err(LinalgError::TooLarge(65))
        ));
        assert_eq!(eigenvalues(&DMatrix::identity(65, 65)).unwrap().len(), 65);
    }
}

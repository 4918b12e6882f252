//! Dense matrix kernels the rest of the crate is built on.
//!
//! Everything operates on dynamically sized `f64` matrices. Zero-dimension
//! matrices are legal operands throughout the crate (empty input/output
//! channels are modeled that way) and every kernel here must handle them.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_traits::Float;

use crate::Error;

/// Dense real matrix used across the crate.
pub type Matrix = DMatrix<f64>;

/// Largest absolute entry; 0 for empty matrices.
pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(Float::abs(x)))
}

/// True when every entry is finite. Empty matrices are finite.
pub fn all_finite(a: &Matrix) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Induced 1-norm (maximum absolute column sum); 0 for empty matrices.
pub fn one_norm(a: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let mut s = 0.0;
        for i in 0..a.nrows() {
            s += Float::abs(a[(i, j)]);
        }
        worst = worst.max(s);
    }
    worst
}

/// Powers-of-two diagonal scales d balancing a state-space realization:
/// the similarity x = diag(d) x̃ (A -> D⁻¹AD, B -> D⁻¹B, C -> CD)
/// equalizes per-state row and column magnitudes, counting the input and
/// output maps. Transfer behavior is unchanged; canonical-form
/// realizations otherwise force certificate matrices into dynamic ranges
/// that starve the solvers of accuracy.
pub fn balance_scales(a: &Matrix, b: &Matrix, c: &Matrix) -> Vec<f64> {
    let n = a.nrows();
    let mut d = Vec::new();
    d.resize(n, 1.0f64);
    if n == 0 {
        return d;
    }
    let mut a_w = a.clone();
    let mut b_w = b.clone();
    let mut c_w = c.clone();
    for _ in 0..32 {
        let mut changed = false;
        for i in 0..n {
            let mut row = 0.0f64;
            let mut col = 0.0f64;
            for j in 0..n {
                if j != i {
                    row += Float::abs(a_w[(i, j)]);
                    col += Float::abs(a_w[(j, i)]);
                }
            }
            for k in 0..b_w.ncols() {
                row += Float::abs(b_w[(i, k)]);
            }
            for k in 0..c_w.nrows() {
                col += Float::abs(c_w[(k, i)]);
            }
            if !(row > 0.0) || !(col > 0.0) {
                continue;
            }
            let mut f = 1.0f64;
            let mut rr = row;
            let mut cc = col;
            while cc < rr / 2.0 {
                cc *= 2.0;
                rr /= 2.0;
                f *= 2.0;
            }
            while cc >= rr * 2.0 {
                cc /= 2.0;
                rr *= 2.0;
                f /= 2.0;
            }
            if f != 1.0 && cc + rr < 0.95 * (col + row) {
                changed = true;
                d[i] *= f;
                for j in 0..n {
                    a_w[(j, i)] *= f;
                }
                for j in 0..n {
                    a_w[(i, j)] /= f;
                }
                for k in 0..b_w.ncols() {
                    b_w[(i, k)] /= f;
                }
                for k in 0..c_w.nrows() {
                    c_w[(k, i)] *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// In-place similarity x = diag(d) x̃ on a realization, paired with
/// [`balance_scales`]. The feedthrough is untouched.
pub fn rescale_realization(a: &mut Matrix, b: &mut Matrix, c: &mut Matrix, d: &[f64]) {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            a[(i, j)] *= d[j] / d[i];
        }
    }
    for i in 0..b.nrows() {
        for k in 0..b.ncols() {
            b[(i, k)] /= d[i];
        }
    }
    for k in 0..c.nrows() {
        for i in 0..c.ncols() {
            c[(k, i)] *= d[i];
        }
    }
}

/// Symmetric part (A + A')/2.
pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// True when ‖A - A'‖_max ≤ tol.
pub fn is_symmetric_within(a: &Matrix, tol: f64) -> bool {
    a.nrows() == a.ncols() && max_abs(&(a - a.transpose())) <= tol
}

/// Assemble a block matrix from a grid of blocks.
///
/// Row heights and column widths are taken from the blocks themselves and
/// must be consistent across the grid; zero-dimension blocks are allowed
/// and contribute nothing. Panics on a ragged grid.
pub fn block(rows: &[&[&Matrix]]) -> Matrix {
    assert!(!rows.is_empty(), "block: empty grid");
    let ncols_blocks = rows[0].len();
    assert!(
        rows.iter().all(|r| r.len() == ncols_blocks),
        "block: ragged grid"
    );
    let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
    let widths: Vec<usize> = (0..ncols_blocks).map(|j| rows[0][j].ncols()).collect();
    for (i, r) in rows.iter().enumerate() {
        for (j, b) in r.iter().enumerate() {
            assert!(
                b.nrows() == heights[i] && b.ncols() == widths[j],
                "block: block ({i},{j}) is {}x{}, grid wants {}x{}",
                b.nrows(),
                b.ncols(),
                heights[i],
                widths[j]
            );
        }
    }
    let total_r: usize = heights.iter().sum();
    let total_c: usize = widths.iter().sum();
    let mut out = Matrix::zeros(total_r, total_c);
    let mut r0 = 0;
    for (i, r) in rows.iter().enumerate() {
        let mut c0 = 0;
        for (j, b) in r.iter().enumerate() {
            out.view_mut((r0, c0), (heights[i], widths[j])).copy_from(*b);
            c0 += widths[j];
        }
        r0 += heights[i];
    }
    out
}

/// Solve A X = B for square A. `None` when A is singular.
pub fn solve(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    assert_eq!(a.nrows(), a.ncols(), "solve: A must be square");
    assert_eq!(a.ncols(), b.nrows(), "solve: dimension mismatch");
    if a.nrows() == 0 {
        return Some(Matrix::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// Inverse of a square matrix. `None` when singular.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    assert_eq!(a.nrows(), a.ncols(), "inverse: A must be square");
    if a.nrows() == 0 {
        return Some(Matrix::zeros(0, 0));
    }
    a.clone().lu().try_inverse()
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(a: &Matrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = symmetrize(a)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalue NaN"));
    ev
}

/// Minimum eigenvalue of the symmetric part; +inf for an empty matrix
/// (an empty quadratic form is vacuously positive definite).
pub fn sym_eig_min(a: &Matrix) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(f64::INFINITY)
}

/// Largest singular value; 0 for a matrix with no rows or columns.
pub fn max_singular_value(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |m, &s| m.max(s))
}

/// Smallest singular value; +inf for a matrix with no rows or columns.
pub fn min_singular_value(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return f64::INFINITY;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s))
}

/// Spectral (2-norm) condition number; 1 for empty matrices, +inf when
/// rank deficient.
pub fn condition_number(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 1.0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let hi = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    let lo = sv.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Spectral radius (largest eigenvalue modulus); 0 for an empty matrix.
pub fn spectral_radius(a: &Matrix) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "spectral_radius: A must be square");
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .complex_eigenvalues()
        .iter()
        .fold(0.0f64, |m, c| m.max(Float::sqrt(c.re * c.re + c.im * c.im)))
}

// Degree-13 Padé numerator coefficients for the matrix exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Padé order 13 is accurate to unit roundoff up to this 1-norm.
const PADE13_THETA: f64 = 5.371920351148152;

/// Matrix exponential by degree-13 Padé approximation with
/// scaling-and-squaring. Exact to near unit roundoff for well-scaled
/// inputs; the argument must be square and finite.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm: A must be square");
    assert!(all_finite(a), "expm: A must be finite");
    if n == 0 {
        return Matrix::zeros(0, 0);
    }

    let norm = one_norm(a);
    let squarings = if norm > PADE13_THETA {
        Float::ceil(Float::log2(norm / PADE13_THETA)) as i32
    } else {
        0
    };
    let a1 = a * Float::exp2(-f64::from(squarings));

    let b = &PADE13;
    let eye = Matrix::identity(n, n);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &eye * b[1];
    let u = &a1 * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &eye * b[0];

    let mut f = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("expm: Padé denominator singular");
    for _ in 0..squarings {
        f = &f * &f;
    }
    f
}

/// Rank-revealing factor L of a positive semidefinite matrix, S ≈ L·L'.
///
/// S must be symmetric to within the tolerance. Eigenvalues in [-tol, 0)
/// are clipped to zero; eigenvalues with magnitude at most tol are treated
/// as zero rank and dropped, so L has one column per significantly
/// positive eigenvalue (columns ordered by decreasing eigenvalue). An
/// eigenvalue below -tol is an error. The tolerance defaults to 1e-8 and
/// is applied relative to max(1, ‖S‖_max).
pub fn psd_factor(s: &Matrix, tol: Option<f64>) -> Result<Matrix, Error> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::Dimension {
            context: "psd_factor",
            expected: (n, n),
            got: (s.nrows(), s.ncols()),
        });
    }
    if !all_finite(s) {
        return Err(Error::NonFinite {
            context: "psd_factor",
        });
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let scale = max_abs(s).max(1.0);
    let tol_abs = tol.unwrap_or(1e-8) * scale;
    if !is_symmetric_within(s, tol_abs) {
        return Err(Error::NotSymmetric {
            context: "psd_factor",
        });
    }

    let eig = symmetrize(s).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalue NaN")
    });
    if let Some(&worst) = order.last() {
        let min_ev = eig.eigenvalues[worst];
        if min_ev < -tol_abs {
            return Err(Error::EigenvalueBelowTolerance {
                value: min_ev,
                tol: tol_abs,
            });
        }
    }
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > tol_abs)
        .collect();
    let mut l = Matrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let scale_i = Float::sqrt(eig.eigenvalues[i]);
        for r in 0..n {
            l[(r, col)] = eig.eigenvectors[(r, i)] * scale_i;
        }
    }
    Ok(l)
}

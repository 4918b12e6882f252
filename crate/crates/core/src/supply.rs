//! Quadratic supply rates for flow and jump channels.
//!
//! The flow supply is s_c(w, z) = w'Q_c w + 2 w'S_c z + z'R_c z. The jump
//! supply has the same shape, but its quadratic output weight is stored in
//! factored form R_d = -E_d' Π_d⁻¹ E_d with Π_d ≻ 0, which is what the
//! analysis and synthesis conditions consume directly; E_d may have zero
//! rows when R_d = 0.

use nalgebra::Cholesky;

use crate::numerics::{
    block, is_symmetric_within, max_abs, psd_factor, solve, sym_eig_min, symmetrize, Matrix,
};
use crate::Error;

#[derive(Debug, Clone)]
pub struct QuadraticSupply {
    pub q_c: Matrix,
    pub s_c: Matrix,
    pub r_c: Matrix,
    pub q_d: Matrix,
    pub s_d: Matrix,
    pub e_d: Matrix,
    pub pi_d: Matrix,
}

impl QuadraticSupply {
    pub fn n_wc(&self) -> usize {
        self.s_c.nrows()
    }
    pub fn n_zc(&self) -> usize {
        self.s_c.ncols()
    }
    pub fn n_wd(&self) -> usize {
        self.s_d.nrows()
    }
    pub fn n_zd(&self) -> usize {
        self.s_d.ncols()
    }
    pub fn m_e(&self) -> usize {
        self.e_d.nrows()
    }

    /// The assembled jump output weight -E_d' Π_d⁻¹ E_d.
    pub fn r_d(&self) -> Matrix {
        let n_zd = self.n_zd();
        if self.m_e() == 0 {
            return Matrix::zeros(n_zd, n_zd);
        }
        let pie = solve(&self.pi_d, &self.e_d).expect("pi_d is positive definite");
        symmetrize(&(-self.e_d.transpose() * pie))
    }

    pub fn validate(&self) -> Result<(), Error> {
        let shapes = [
            (&self.q_c, self.n_wc(), self.n_wc(), "supply q_c"),
            (&self.s_c, self.n_wc(), self.n_zc(), "supply s_c"),
            (&self.r_c, self.n_zc(), self.n_zc(), "supply r_c"),
            (&self.q_d, self.n_wd(), self.n_wd(), "supply q_d"),
            (&self.s_d, self.n_wd(), self.n_zd(), "supply s_d"),
            (&self.e_d, self.m_e(), self.n_zd(), "supply e_d"),
            (&self.pi_d, self.m_e(), self.m_e(), "supply pi_d"),
        ];
        for (m, r, c, ctx) in shapes {
            if m.nrows() != r || m.ncols() != c {
                return Err(Error::Dimension {
                    context: ctx,
                    expected: (r, c),
                    got: (m.nrows(), m.ncols()),
                });
            }
            if !crate::numerics::all_finite(m) {
                return Err(Error::NonFinite { context: ctx });
            }
        }
        for (m, ctx) in [
            (&self.q_c, "supply q_c"),
            (&self.r_c, "supply r_c"),
            (&self.q_d, "supply q_d"),
            (&self.pi_d, "supply pi_d"),
        ] {
            if !is_symmetric_within(m, 1e-9 * max_abs(m).max(1.0)) {
                return Err(Error::NotSymmetric { context: ctx });
            }
        }
        if self.m_e() > 0 {
            let min_eig = sym_eig_min(&self.pi_d);
            if !(min_eig > 0.0) || Cholesky::new(symmetrize(&self.pi_d)).is_none() {
                return Err(Error::EigenvalueBelowTolerance {
                    value: min_eig,
                    tol: 0.0,
                });
            }
        }
        Ok(())
    }

    /// Flow supply rate at one (w_c, z_c) pair.
    pub fn flow_value(&self, w: &Matrix, z: &Matrix) -> f64 {
        let q = (w.transpose() * &self.q_c * w)
            + (w.transpose() * &self.s_c * z) * 2.0
            + (z.transpose() * &self.r_c * z);
        q[(0, 0)]
    }

    /// Jump supply rate at one (w_d, z_d) pair.
    pub fn jump_value(&self, w: &Matrix, z: &Matrix) -> f64 {
        let q = (w.transpose() * &self.q_d * w)
            + (w.transpose() * &self.s_d * z) * 2.0
            + (z.transpose() * self.r_d() * z);
        q[(0, 0)]
    }

    /// Build a supply from an explicit jump output weight R_d ⪯ 0 by
    /// factoring it as -E_d'E_d (Π_d = I). Fails when R_d has a positive
    /// eigenvalue beyond tolerance or the factorization does not
    /// reproduce R_d.
    pub fn from_jump_r_d(
        q_c: Matrix,
        s_c: Matrix,
        r_c: Matrix,
        q_d: Matrix,
        s_d: Matrix,
        r_d: &Matrix,
    ) -> Result<Self, Error> {
        let l = psd_factor(&(-r_d), None)?;
        let e_d = l.transpose();
        let m_e = e_d.nrows();
        let supply = QuadraticSupply {
            q_c,
            s_c,
            r_c,
            q_d,
            s_d,
            e_d,
            pi_d: Matrix::identity(m_e, m_e),
        };
        let err = max_abs(&(supply.r_d() - r_d));
        if err > 1e-10 * max_abs(r_d).max(1.0) {
            return Err(Error::SolverFailure {
                reason: alloc::string::String::from("jump weight factorization did not reproduce r_d"),
            });
        }
        Ok(supply)
    }
}

/// H-infinity supply: s(w, z) = γ|w|² - γ⁻¹|z|² on both channels, so
/// dissipativity is an induced-gain bound by γ.
pub fn supply_hinf(gamma: f64, n_wc: usize, n_zc: usize, n_wd: usize, n_zd: usize) -> QuadraticSupply {
    assert!(gamma > 0.0, "gamma must be positive");
    QuadraticSupply {
        q_c: Matrix::identity(n_wc, n_wc) * gamma,
        s_c: Matrix::zeros(n_wc, n_zc),
        r_c: Matrix::identity(n_zc, n_zc) * (-1.0 / gamma),
        q_d: Matrix::identity(n_wd, n_wd) * gamma,
        s_d: Matrix::zeros(n_wd, n_zd),
        e_d: Matrix::identity(n_zd, n_zd),
        pi_d: Matrix::identity(n_zd, n_zd) * gamma,
    }
}

/// Passivity supply: s(w, z) = 2 w'z on both channels (square channels
/// required). The jump output weight is exactly zero, expressed by a
/// zero-row E_d.
pub fn supply_passivity(n_wc: usize, n_wd: usize) -> QuadraticSupply {
    QuadraticSupply {
        q_c: Matrix::zeros(n_wc, n_wc),
        s_c: Matrix::identity(n_wc, n_wc),
        r_c: Matrix::zeros(n_wc, n_wc),
        q_d: Matrix::zeros(n_wd, n_wd),
        s_d: Matrix::identity(n_wd, n_wd),
        e_d: Matrix::zeros(0, n_wd),
        pi_d: Matrix::zeros(0, 0),
    }
}

/// The full flow weight [[Q_c, S_c], [S_c', R_c]]; used by quadrature and
/// tests.
pub fn flow_weight(supply: &QuadraticSupply) -> Matrix {
    let st = supply.s_c.transpose();
    block(&[
        &[&supply.q_c, &supply.s_c],
        &[&st, &supply.r_c],
    ])
}

/// The full jump weight [[Q_d, S_d], [S_d', R_d]] with R_d assembled.
pub fn jump_weight(supply: &QuadraticSupply) -> Matrix {
    let st = supply.s_d.transpose();
    let r_d = supply.r_d();
    block(&[
        &[&supply.q_d, &supply.s_d],
        &[&st, &r_d],
    ])
}

/// Difference of two supplies as stacked weights, used to check that one
/// supply dominates another (e.g. gain bounds are monotone in γ).
pub fn weight_difference(a: &QuadraticSupply, b: &QuadraticSupply) -> (Matrix, Matrix) {
    (
        flow_weight(a) - flow_weight(b),
        jump_weight(a) - jump_weight(b),
    )
}

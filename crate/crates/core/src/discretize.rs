//! Classical discretization baselines and frequency-domain evaluation.
//!
//! These are the comparison methods the synthesis results are measured
//! against: zero-order hold, first-order hold, and the bilinear transform
//! with or without prewarping. Frequency responses are computed through a
//! real block solve, so no complex linear algebra is required.

use alloc::vec::Vec;

use crate::numerics::{all_finite, balance_scales, block, expm, rescale_realization, solve, Matrix};
use crate::system::DiscreteController;
use crate::Error;
use num_traits::Float;

/// Continuous-time state-space system.
#[derive(Debug, Clone, PartialEq)]
pub struct CtSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

/// Discrete-time state-space system with its sampling period.
#[derive(Debug, Clone, PartialEq)]
pub struct DtSystem {
    pub h: f64,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl CtSystem {
    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_u(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<(), Error> {
        validate_ss(&self.a, &self.b, &self.c, &self.d)
    }

    /// Same transfer behavior on a rescaled state basis. Canonical-form
    /// realizations carry their coefficient spread into every certificate
    /// computed on an interconnection containing them; balancing removes
    /// that spread without moving a single pole or zero.
    pub fn balanced(mut self) -> CtSystem {
        let scales = balance_scales(&self.a, &self.b, &self.c);
        rescale_realization(&mut self.a, &mut self.b, &mut self.c, &scales);
        self
    }
}

impl DtSystem {
    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_u(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument {
                context: "sampling period must be positive",
            });
        }
        validate_ss(&self.a, &self.b, &self.c, &self.d)
    }

    /// Same transfer behavior on a rescaled state basis; see
    /// [`CtSystem::balanced`].
    pub fn balanced(mut self) -> DtSystem {
        let scales = balance_scales(&self.a, &self.b, &self.c);
        rescale_realization(&mut self.a, &mut self.b, &mut self.c, &scales);
        self
    }

    /// Reinterpret as a feedback controller block.
    pub fn into_controller(self) -> DiscreteController {
        DiscreteController {
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
        }
    }
}

fn validate_ss(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<(), Error> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            context: "state matrix must be square",
            expected: (n, n),
            got: (a.nrows(), a.ncols()),
        });
    }
    if b.nrows() != n {
        return Err(Error::Dimension {
            context: "input matrix rows",
            expected: (n, b.ncols()),
            got: (b.nrows(), b.ncols()),
        });
    }
    if c.ncols() != n {
        return Err(Error::Dimension {
            context: "output matrix cols",
            expected: (c.nrows(), n),
            got: (c.nrows(), c.ncols()),
        });
    }
    if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
        return Err(Error::Dimension {
            context: "feedthrough shape",
            expected: (c.nrows(), b.ncols()),
            got: (d.nrows(), d.ncols()),
        });
    }
    for (m, context) in [(a, "A"), (b, "B"), (c, "C"), (d, "D")] {
        if !all_finite(m) {
            return Err(Error::NonFinite { context });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C2dMethod {
    Zoh,
    Foh,
    Tustin,
    /// Bilinear transform with the gain warped so the response at the
    /// given frequency is preserved exactly.
    TustinPrewarp(f64),
}

/// Discretize a continuous-time system at period h.
pub fn c2d(sys: &CtSystem, h: f64, method: C2dMethod) -> Result<DtSystem, Error> {
    sys.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument {
            context: "sampling period must be positive",
        });
    }
    let n = sys.n_x();
    let m = sys.n_u();
    match method {
        C2dMethod::Zoh => {
            let aug = block(&[
                &[&sys.a, &sys.b],
                &[&Matrix::zeros(m, n), &Matrix::zeros(m, m)],
            ]);
            let e = expm(&(aug * h));
            Ok(DtSystem {
                h,
                a: e.view((0, 0), (n, n)).into_owned(),
                b: e.view((0, n), (n, m)).into_owned(),
                c: sys.c.clone(),
                d: sys.d.clone(),
            })
        }
        C2dMethod::Foh => {
            // Ramp-invariant equivalent. With gamma1 = ∫ e^{A(h-s)}B ds and
            // gamma2 = ∫ e^{A(h-s)}B (s/h) ds, the causal realization is
            // x+ = Phi x + (Phi gamma2 + gamma1 - gamma2) u, y = Cx + (D + C gamma2) u.
            let scaled = Matrix::identity(m, m) / h;
            let aug = block(&[
                &[&sys.a, &sys.b, &Matrix::zeros(n, m)],
                &[&Matrix::zeros(m, n), &Matrix::zeros(m, m), &scaled],
                &[&Matrix::zeros(m, n), &Matrix::zeros(m, m), &Matrix::zeros(m, m)],
            ]);
            let e = expm(&(aug * h));
            let phi = e.view((0, 0), (n, n)).into_owned();
            let gamma1 = e.view((0, n), (n, m)).into_owned();
            let gamma2 = e.view((0, n + m), (n, m)).into_owned();
            Ok(DtSystem {
                h,
                a: phi.clone(),
                b: &phi * &gamma2 + &gamma1 - &gamma2,
                c: sys.c.clone(),
                d: &sys.d + &sys.c * &gamma2,
            })
        }
        C2dMethod::Tustin => bilinear(sys, h, 2.0 / h),
        C2dMethod::TustinPrewarp(omega0) => {
            let half = omega0 * h / 2.0;
            let t = Float::tan(half);
            if !(omega0 > 0.0) || !t.is_finite() || t <= 0.0 {
                return Err(Error::InvalidArgument {
                    context: "prewarp frequency must lie in (0, pi/h)",
                });
            }
            bilinear(sys, h, omega0 / t)
        }
    }
}

/// Bilinear transform s = kappa (z-1)/(z+1).
fn bilinear(sys: &CtSystem, h: f64, kappa: f64) -> Result<DtSystem, Error> {
    let n = sys.n_x();
    let m = solve(
        &(Matrix::identity(n, n) - &sys.a / kappa),
        &Matrix::identity(n, n),
    )
    .ok_or(Error::Singular {
        context: "bilinear transform has a pole at kappa",
    })?;
    let a_d = &m * (Matrix::identity(n, n) + &sys.a / kappa);
    let b_d = &m * &sys.b * (2.0 / kappa);
    let c_d = &sys.c * &m;
    let d_d = &sys.d + &sys.c * &m * &sys.b / kappa;
    Ok(DtSystem {
        h,
        a: a_d,
        b: b_d,
        c: c_d,
        d: d_d,
    })
}

/// One frequency-response sample: H = re + i·im at the stored frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPoint {
    pub omega: f64,
    pub re: Matrix,
    pub im: Matrix,
}

impl FreqPoint {
    /// Entrywise modulus.
    pub fn magnitude(&self) -> Matrix {
        Matrix::from_fn(self.re.nrows(), self.re.ncols(), |i, j| {
            Float::sqrt(self.re[(i, j)] * self.re[(i, j)] + self.im[(i, j)] * self.im[(i, j)])
        })
    }
}

/// C (p I - A)^{-1} B + D at complex p, via one real block solve.
fn response_at(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    p_re: f64,
    p_im: f64,
) -> Option<(Matrix, Matrix)> {
    let n = a.nrows();
    let m = b.ncols();
    if n == 0 {
        return Some((d.clone(), Matrix::zeros(d.nrows(), d.ncols())));
    }
    let real = Matrix::identity(n, n) * p_re - a;
    let imag = Matrix::identity(n, n) * p_im;
    let lhs = block(&[&[&real, &(-&imag)], &[&imag, &real]]);
    let rhs = block(&[&[b], &[&Matrix::zeros(n, m)]]);
    let x = solve(&lhs, &rhs)?;
    let x_re = x.view((0, 0), (n, m)).into_owned();
    let x_im = x.view((n, 0), (n, m)).into_owned();
    Some((c * x_re + d, c * x_im))
}

/// H(jω) per frequency; None marks evaluation at a pole.
pub fn freq_response_ct(sys: &CtSystem, omegas: &[f64]) -> Vec<Option<FreqPoint>> {
    omegas
        .iter()
        .map(|&omega| {
            response_at(&sys.a, &sys.b, &sys.c, &sys.d, 0.0, omega).map(|(re, im)| FreqPoint {
                omega,
                re,
                im,
            })
        })
        .collect()
}

/// H(e^{jωh}) per frequency; None marks evaluation at a pole.
pub fn freq_response_dt(sys: &DtSystem, omegas: &[f64]) -> Vec<Option<FreqPoint>> {
    omegas
        .iter()
        .map(|&omega| {
            let (p_re, p_im) = (Float::cos(omega * sys.h), Float::sin(omega * sys.h));
            response_at(&sys.a, &sys.b, &sys.c, &sys.d, p_re, p_im).map(|(re, im)| FreqPoint {
                omega,
                re,
                im,
            })
        })
        .collect()
}

/// Entrywise |H_c(jω) - H_d(e^{jωh})| per frequency; None where either
/// response hits a pole.
pub fn matching_error_profile(
    ct: &CtSystem,
    dt: &DtSystem,
    omegas: &[f64],
) -> Vec<(f64, Option<Matrix>)> {
    let hc = freq_response_ct(ct, omegas);
    let hd = freq_response_dt(dt, omegas);
    omegas
        .iter()
        .zip(hc.into_iter().zip(hd))
        .map(|(&omega, (c, d))| {
            let err = match (c, d) {
                (Some(c), Some(d)) => {
                    let re = &c.re - &d.re;
                    let im = &c.im - &d.im;
                    Some(Matrix::from_fn(re.nrows(), re.ncols(), |i, j| {
                        Float::sqrt(re[(i, j)] * re[(i, j)] + im[(i, j)] * im[(i, j)])
                    }))
                }
                _ => None,
            };
            (omega, err)
        })
        .collect()
}

/// Logarithmically spaced grid of n points over [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (Float::ln(lo), Float::ln(hi));
    (0..n)
        .map(|i| Float::exp(llo + (lhi - llo) * i as f64 / (n - 1) as f64))
        .collect()
}

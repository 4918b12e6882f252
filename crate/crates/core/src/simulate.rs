//! Time-domain simulation of jump-flow systems.
//!
//! Each period starts with the jump at t_k = k·h, then the state flows over
//! (t_k, t_{k+1}]. Flow inputs are piecewise constant on an intra-period
//! grid, and each subinterval is propagated with the exact augmented matrix
//! exponential, so the only discretization in the output is the choice of
//! sample points.

use alloc::vec::Vec;

use crate::numerics::{all_finite, block, expm, Matrix};
use crate::system::LpjfSystem;
use crate::Error;

/// Simulation record. The dense grid lists intra_grid points per period at
/// t = k·h + j·δ for j = 1..=intra_grid, preceded by the post-jump sample at
/// t = k·h; the flow output at a grid point uses the input that was active
/// on the subinterval ending there.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Matrix>,
    pub z_c: Vec<Matrix>,
    pub pre_jump: Vec<Matrix>,
    pub post_jump: Vec<Matrix>,
    pub z_d: Vec<Matrix>,
}

impl Trajectory {
    /// Largest state magnitude over the whole run, jumps included.
    pub fn peak_state(&self) -> f64 {
        self.states
            .iter()
            .chain(self.pre_jump.iter())
            .chain(self.post_jump.iter())
            .map(crate::numerics::max_abs)
            .fold(0.0, f64::max)
    }
}

/// Run `periods` jump-flow cycles from x0.
///
/// wd holds one column per period (the jump input at t_k); wc holds one
/// column per subinterval, indexed k·intra_grid + j. Either slice may be
/// empty, which stands for zero input; a present channel must supply enough
/// columns.
pub fn simulate_lpjf(
    sys: &LpjfSystem,
    x0: &Matrix,
    wd: &[Matrix],
    wc: &[Matrix],
    periods: usize,
    intra_grid: usize,
) -> Result<Trajectory, Error> {
    sys.validate()?;
    let (n, n_wc, n_wd) = (sys.n(), sys.n_wc(), sys.n_wd());
    if periods == 0 || intra_grid == 0 {
        return Err(Error::InvalidArgument {
            context: "periods and intra_grid must be at least 1",
        });
    }
    if x0.nrows() != n || x0.ncols() != 1 {
        return Err(Error::Dimension {
            context: "initial state",
            expected: (n, 1),
            got: (x0.nrows(), x0.ncols()),
        });
    }
    if !all_finite(x0) {
        return Err(Error::NonFinite { context: "initial state" });
    }
    if !wd.is_empty() && wd.len() < periods {
        return Err(Error::InvalidArgument {
            context: "discrete input needs one column per period",
        });
    }
    if !wc.is_empty() && wc.len() < periods * intra_grid {
        return Err(Error::InvalidArgument {
            context: "flow input needs one column per subinterval",
        });
    }
    let wd_zero = Matrix::zeros(n_wd, 1);
    let wc_zero = Matrix::zeros(n_wc, 1);
    for v in wd {
        if v.nrows() != n_wd || v.ncols() != 1 {
            return Err(Error::Dimension {
                context: "discrete input column",
                expected: (n_wd, 1),
                got: (v.nrows(), v.ncols()),
            });
        }
    }
    for v in wc {
        if v.nrows() != n_wc || v.ncols() != 1 {
            return Err(Error::Dimension {
                context: "flow input column",
                expected: (n_wc, 1),
                got: (v.nrows(), v.ncols()),
            });
        }
    }

    // One exact subinterval propagator shared by every step.
    let delta = sys.h / intra_grid as f64;
    let aug = block(&[
        &[&sys.a_c, &sys.b_c],
        &[&Matrix::zeros(n_wc, n), &Matrix::zeros(n_wc, n_wc)],
    ]);
    let e = expm(&(aug * delta));
    let phi = e.view((0, 0), (n, n)).into_owned();
    let gamma = e.view((0, n), (n, n_wc)).into_owned();

    let total = periods * (intra_grid + 1);
    let mut out = Trajectory {
        times: Vec::with_capacity(total),
        states: Vec::with_capacity(total),
        z_c: Vec::with_capacity(total),
        pre_jump: Vec::with_capacity(periods),
        post_jump: Vec::with_capacity(periods),
        z_d: Vec::with_capacity(periods),
    };

    let mut x = x0.clone();
    for k in 0..periods {
        let t_k = k as f64 * sys.h;
        let w = wd.get(k).unwrap_or(&wd_zero);
        // The jump output reads the state just before the reset.
        out.pre_jump.push(x.clone());
        out.z_d.push(&sys.c_d * &x + &sys.d_d * w);
        x = &sys.a_d * &x + &sys.b_d * w;
        out.post_jump.push(x.clone());

        let first_wc = wc.get(k * intra_grid).unwrap_or(&wc_zero);
        out.times.push(t_k);
        out.states.push(x.clone());
        out.z_c.push(&sys.c_c * &x + &sys.d_c * first_wc);

        for j in 0..intra_grid {
            let w = wc.get(k * intra_grid + j).unwrap_or(&wc_zero);
            x = &phi * &x + &gamma * w;
            out.times.push(t_k + (j + 1) as f64 * delta);
            out.states.push(x.clone());
            out.z_c.push(&sys.c_c * &x + &sys.d_c * w);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{max_abs, spectral_radius};
    use crate::system::monodromy;
    use alloc::vec;

    fn scalar_decay() -> LpjfSystem {
        LpjfSystem {
            h: 0.5,
            a_c: Matrix::from_row_slice(1, 1, &[-1.0]),
            b_c: Matrix::zeros(1, 0),
            c_c: Matrix::identity(1, 1),
            d_c: Matrix::zeros(1, 0),
            a_d: Matrix::identity(1, 1),
            b_d: Matrix::zeros(1, 0),
            c_d: Matrix::zeros(0, 1),
            d_d: Matrix::zeros(0, 0),
        }
    }

    #[test]
    fn accumulator_counts_periods() {
        // Pure jump integrator: x+ = x + w_d, no flow dynamics.
        let sys = LpjfSystem {
            h: 1.0,
            a_c: Matrix::zeros(1, 1),
            b_c: Matrix::zeros(1, 0),
            c_c: Matrix::identity(1, 1),
            d_c: Matrix::zeros(1, 0),
            a_d: Matrix::identity(1, 1),
            b_d: Matrix::identity(1, 1),
            c_d: Matrix::identity(1, 1),
            d_d: Matrix::zeros(1, 1),
        };
        let ones = vec![Matrix::from_row_slice(1, 1, &[1.0]); 5];
        let traj = simulate_lpjf(&sys, &Matrix::zeros(1, 1), &ones, &[], 5, 4).unwrap();
        for k in 0..5 {
            assert!((traj.pre_jump[k][(0, 0)] - k as f64).abs() < 1e-14);
            assert!((traj.post_jump[k][(0, 0)] - (k + 1) as f64).abs() < 1e-14);
        }
        // z_d reads the pre-jump state.
        assert!((traj.z_d[3][(0, 0)] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_flow_decays_exponentially() {
        let sys = scalar_decay();
        let periods = 8;
        let traj = simulate_lpjf(
            &sys,
            &Matrix::from_row_slice(1, 1, &[1.0]),
            &[],
            &[],
            periods,
            16,
        )
        .unwrap();
        let x_end = traj.states.last().unwrap()[(0, 0)];
        let expect = (-(periods as f64) * sys.h).exp();
        assert!((x_end - expect).abs() < 1e-10);
    }

    #[test]
    fn grid_refinement_leaves_samples_fixed() {
        // Exact propagation: halving the subinterval must not move shared
        // sample points.
        let sys = LpjfSystem {
            h: 0.7,
            a_c: Matrix::from_row_slice(2, 2, &[-0.3, 1.2, -1.2, -0.3]),
            b_c: Matrix::from_row_slice(2, 1, &[1.0, 0.5]),
            c_c: Matrix::from_row_slice(1, 2, &[1.0, -1.0]),
            d_c: Matrix::from_row_slice(1, 1, &[0.1]),
            a_d: Matrix::from_row_slice(2, 2, &[0.9, 0.0, 0.1, 0.8]),
            b_d: Matrix::zeros(2, 0),
            c_d: Matrix::zeros(0, 2),
            d_d: Matrix::zeros(0, 0),
        };
        let x0 = Matrix::from_row_slice(2, 1, &[1.0, -0.5]);
        let periods = 3;
        let coarse_n = 8;
        let wc_coarse: Vec<Matrix> = (0..periods * coarse_n)
            .map(|i| Matrix::from_row_slice(1, 1, &[(i as f64 * 0.37).sin()]))
            .collect();
        // Same piecewise-constant signal on the doubled grid.
        let wc_fine: Vec<Matrix> = (0..periods * coarse_n * 2)
            .map(|i| wc_coarse[i / 2].clone())
            .collect();
        let coarse = simulate_lpjf(&sys, &x0, &[], &wc_coarse, periods, coarse_n).unwrap();
        let fine = simulate_lpjf(&sys, &x0, &[], &wc_fine, periods, coarse_n * 2).unwrap();
        for (i, zc) in coarse.z_c.iter().enumerate() {
            let k = i / (coarse_n + 1);
            let j = i % (coarse_n + 1);
            let fine_idx = k * (2 * coarse_n + 1) + if j == 0 { 0 } else { 2 * j };
            assert!(
                (coarse.times[i] - fine.times[fine_idx]).abs() < 1e-12,
                "grid alignment at {i}"
            );
            assert!(max_abs(&(zc - &fine.z_c[fine_idx])) < 1e-9);
        }
    }

    #[test]
    fn decay_rate_follows_monodromy() {
        let sys = scalar_decay();
        let rho = spectral_radius(&monodromy(&sys));
        assert!(rho < 1.0);
        let traj = simulate_lpjf(
            &sys,
            &Matrix::from_row_slice(1, 1, &[1.0]),
            &[],
            &[],
            10,
            4,
        )
        .unwrap();
        for k in 1..10 {
            let ratio = traj.pre_jump[k][(0, 0)] / traj.pre_jump[k - 1][(0, 0)];
            assert!((ratio - rho).abs() < 1e-10);
        }
    }

    #[test]
    fn input_length_is_checked() {
        let sys = scalar_decay();
        let x0 = Matrix::zeros(1, 1);
        assert!(matches!(
            simulate_lpjf(&sys, &x0, &[], &[], 0, 4),
            Err(Error::InvalidArgument { .. })
        ));
        let short = vec![Matrix::zeros(0, 1); 2];
        assert!(matches!(
            simulate_lpjf(&sys, &x0, &short, &[], 5, 4),
            Err(Error::InvalidArgument { .. })
        ));
    }
}

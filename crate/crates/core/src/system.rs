//! Data model for sampled-data plants, hold devices, discrete controllers,
//! and the closed jump-flow loops they form.
//!
//! The timing convention everywhere: at each sampling instant t_k = k·h the
//! state jumps first, then flows over the half-open interval (t_k, t_{k+1}].
//! Discrete signals (w_d, z_d, y, the controller update) act at the jump;
//! continuous signals (w_c, z_c, u) act along the flow.
//!
//! Channel widths are carried by the matrix shapes themselves; an absent
//! channel is a zero-width matrix, and all block formulas below remain
//! valid for it.

use crate::numerics::{all_finite, block, expm, spectral_radius, Matrix};
use crate::Error;

fn expect_shape(
    m: &Matrix,
    rows: usize,
    cols: usize,
    context: &'static str,
) -> Result<(), Error> {
    if m.shape() != (rows, cols) {
        return Err(Error::Dimension {
            context,
            expected: (rows, cols),
            got: m.shape(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}

/// Continuous-time plant sampled with period h.
///
/// Flow on (t_k, t_{k+1}]:  x' = a_c x + b_c w_c + b_cu u,
///                          z_c = c_c x + d_cc w_c + d_cu u.
/// Jump at t_k:             x+ = a_d x + b_d w_d + b_du u_hat,
///                          z_d = c_d x + d_dd w_d + d_du u_hat,
///                          y  = c_y x + d_yd w_d.
///
/// The sampled output y has no direct feedthrough from u_hat; that is
/// structural and keeps loop closure well posed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDataPlant {
    pub h: f64,
    pub a_c: Matrix,
    pub b_c: Matrix,
    pub b_cu: Matrix,
    pub a_d: Matrix,
    pub b_d: Matrix,
    pub b_du: Matrix,
    pub c_c: Matrix,
    pub d_cc: Matrix,
    pub d_cu: Matrix,
    pub c_d: Matrix,
    pub d_dd: Matrix,
    pub d_du: Matrix,
    pub c_y: Matrix,
    pub d_yd: Matrix,
}

impl SampledDataPlant {
    pub fn n_x(&self) -> usize {
        self.a_c.nrows()
    }
    pub fn n_wc(&self) -> usize {
        self.b_c.ncols()
    }
    pub fn n_wd(&self) -> usize {
        self.b_d.ncols()
    }
    pub fn n_u(&self) -> usize {
        self.b_cu.ncols()
    }
    pub fn n_zc(&self) -> usize {
        self.c_c.nrows()
    }
    pub fn n_zd(&self) -> usize {
        self.c_d.nrows()
    }
    pub fn n_y(&self) -> usize {
        self.c_y.nrows()
    }

    /// Check cross-dimension consistency, finiteness, and h > 0.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidArgument {
                context: "plant sampling period must be positive and finite",
            });
        }
        let (n, n_wc, n_wd, n_u) = (self.n_x(), self.n_wc(), self.n_wd(), self.n_u());
        let (n_zc, n_zd, n_y) = (self.n_zc(), self.n_zd(), self.n_y());
        expect_shape(&self.a_c, n, n, "plant a_c")?;
        expect_shape(&self.b_c, n, n_wc, "plant b_c")?;
        expect_shape(&self.b_cu, n, n_u, "plant b_cu")?;
        expect_shape(&self.a_d, n, n, "plant a_d")?;
        expect_shape(&self.b_d, n, n_wd, "plant b_d")?;
        expect_shape(&self.b_du, n, n_u, "plant b_du")?;
        expect_shape(&self.c_c, n_zc, n, "plant c_c")?;
        expect_shape(&self.d_cc, n_zc, n_wc, "plant d_cc")?;
        expect_shape(&self.d_cu, n_zc, n_u, "plant d_cu")?;
        expect_shape(&self.c_d, n_zd, n, "plant c_d")?;
        expect_shape(&self.d_dd, n_zd, n_wd, "plant d_dd")?;
        expect_shape(&self.d_du, n_zd, n_u, "plant d_du")?;
        expect_shape(&self.c_y, n_y, n, "plant c_y")?;
        expect_shape(&self.d_yd, n_y, n_wd, "plant d_yd")?;
        Ok(())
    }
}

/// Generalized hold turning the controller output sequence u_hat[k] into
/// the continuous control signal u(t).
///
/// Jump at t_k:  x_h+ = a_d x_h + b u_hat[k];
/// flow:         x_h' = a_c x_h,  u = c x_h.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldDevice {
    pub a_c: Matrix,
    pub a_d: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl HoldDevice {
    pub fn n_h(&self) -> usize {
        self.a_c.nrows()
    }
    pub fn n_u(&self) -> usize {
        self.b.ncols()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let (n_h, n_u) = (self.n_h(), self.n_u());
        expect_shape(&self.a_c, n_h, n_h, "hold a_c")?;
        expect_shape(&self.a_d, n_h, n_h, "hold a_d")?;
        expect_shape(&self.b, n_h, n_u, "hold b")?;
        expect_shape(&self.c, n_u, n_h, "hold c")?;
        Ok(())
    }
}

/// Zero-order hold on n_u channels: u(t) holds the latest u_hat[k].
pub fn zoh_hold(n_u: usize) -> HoldDevice {
    HoldDevice {
        a_c: Matrix::zeros(n_u, n_u),
        a_d: Matrix::zeros(n_u, n_u),
        b: Matrix::identity(n_u, n_u),
        c: Matrix::identity(n_u, n_u),
    }
}

/// First-order hold on n_u channels: over (t_k, t_{k+1}], u(t) ramps
/// linearly from u_hat[k-1] to u_hat[k], reaching it at the interval end.
///
/// Three stacked states per channel: the freshly loaded sample, the ramp
/// output, and the previous sample the ramp starts from.
pub fn foh_hold(n_u: usize, h: f64) -> HoldDevice {
    assert!(h > 0.0 && h.is_finite(), "foh_hold: h must be positive");
    let i = Matrix::identity(n_u, n_u);
    let z = Matrix::zeros(n_u, n_u);
    let i_h = &i / h;
    let neg_i_h = -&i_h;
    HoldDevice {
        a_c: block(&[&[&z, &z, &z], &[&i_h, &z, &neg_i_h], &[&z, &z, &z]]),
        a_d: block(&[&[&z, &z, &z], &[&i, &z, &z], &[&i, &z, &z]]),
        b: block(&[&[&i], &[&z], &[&z]]),
        c: block(&[&[&z, &i, &z]]),
    }
}

/// Discrete controller updated at the jumps: the controller state is held
/// constant along the flow and refreshed from the sampled output.
///
/// x_c+ = a x_c + b y[k],  u_hat[k] = c x_c + d y[k].
///
/// A zero-state controller (n_c = 0) is a static output feedback gain.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteController {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl DiscreteController {
    pub fn n_c(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_y(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_u(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let (n_c, n_y, n_u) = (self.n_c(), self.n_y(), self.n_u());
        expect_shape(&self.a, n_c, n_c, "controller a")?;
        expect_shape(&self.b, n_c, n_y, "controller b")?;
        expect_shape(&self.c, n_u, n_c, "controller c")?;
        expect_shape(&self.d, n_u, n_y, "controller d")?;
        Ok(())
    }

    /// Static gain u_hat = d·y.
    pub fn static_gain(d: Matrix) -> Self {
        let n_u = d.nrows();
        let n_y = d.ncols();
        DiscreteController {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, n_y),
            c: Matrix::zeros(n_u, 0),
            d,
        }
    }
}

/// Plant and hold stacked into one sampled-data system seen by the
/// discrete controller. State is [x; x_h].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPlant {
    pub h: f64,
    pub a_c: Matrix,
    pub b_c: Matrix,
    pub a_d: Matrix,
    pub b_d: Matrix,
    /// Jump injection of the controller output u_hat into [x; x_h].
    pub b_j: Matrix,
    pub c_c: Matrix,
    pub d_cc: Matrix,
    pub c_d: Matrix,
    pub d_dd: Matrix,
    /// Feedthrough of u_hat into z_d.
    pub d_dj: Matrix,
    /// Sampled output map y = c_j [x; x_h] + d_jd w_d.
    pub c_j: Matrix,
    pub d_jd: Matrix,
}

impl GeneralizedPlant {
    pub fn n_p(&self) -> usize {
        self.a_c.nrows()
    }
    pub fn n_wc(&self) -> usize {
        self.b_c.ncols()
    }
    pub fn n_wd(&self) -> usize {
        self.b_d.ncols()
    }
    pub fn n_u(&self) -> usize {
        self.b_j.ncols()
    }
    pub fn n_zc(&self) -> usize {
        self.c_c.nrows()
    }
    pub fn n_zd(&self) -> usize {
        self.c_d.nrows()
    }
    pub fn n_y(&self) -> usize {
        self.c_j.nrows()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidArgument {
                context: "generalized plant sampling period must be positive and finite",
            });
        }
        let (n, n_wc, n_wd, n_u) = (self.n_p(), self.n_wc(), self.n_wd(), self.n_u());
        let (n_zc, n_zd, n_y) = (self.n_zc(), self.n_zd(), self.n_y());
        expect_shape(&self.a_c, n, n, "gp a_c")?;
        expect_shape(&self.b_c, n, n_wc, "gp b_c")?;
        expect_shape(&self.a_d, n, n, "gp a_d")?;
        expect_shape(&self.b_d, n, n_wd, "gp b_d")?;
        expect_shape(&self.b_j, n, n_u, "gp b_j")?;
        expect_shape(&self.c_c, n_zc, n, "gp c_c")?;
        expect_shape(&self.d_cc, n_zc, n_wc, "gp d_cc")?;
        expect_shape(&self.c_d, n_zd, n, "gp c_d")?;
        expect_shape(&self.d_dd, n_zd, n_wd, "gp d_dd")?;
        expect_shape(&self.d_dj, n_zd, n_u, "gp d_dj")?;
        expect_shape(&self.c_j, n_y, n, "gp c_j")?;
        expect_shape(&self.d_jd, n_y, n_wd, "gp d_jd")?;
        Ok(())
    }
}

/// Stack plant and hold: state [x; x_h], the hold output driving the
/// plant's continuous control input, u_hat entering through the hold's
/// loading matrix and the plant's direct jump input.
pub fn compose_plant_hold(
    plant: &SampledDataPlant,
    hold: &HoldDevice,
) -> Result<GeneralizedPlant, Error> {
    plant.validate()?;
    hold.validate()?;
    if hold.n_u() != plant.n_u() {
        return Err(Error::Dimension {
            context: "compose_plant_hold: hold width vs plant control input",
            expected: (plant.n_u(), plant.n_u()),
            got: (hold.n_u(), hold.n_u()),
        });
    }
    let n = plant.n_x();
    let n_h = hold.n_h();
    let z_nh_n = Matrix::zeros(n_h, n);
    let z_n_nh = Matrix::zeros(n, n_h);
    let z_nh_wc = Matrix::zeros(n_h, plant.n_wc());
    let z_nh_wd = Matrix::zeros(n_h, plant.n_wd());
    let b_cu_ch = &plant.b_cu * &hold.c;
    let d_cu_ch = &plant.d_cu * &hold.c;
    let gp = GeneralizedPlant {
        h: plant.h,
        a_c: block(&[&[&plant.a_c, &b_cu_ch], &[&z_nh_n, &hold.a_c]]),
        b_c: block(&[&[&plant.b_c], &[&z_nh_wc]]),
        a_d: block(&[&[&plant.a_d, &z_n_nh], &[&z_nh_n, &hold.a_d]]),
        b_d: block(&[&[&plant.b_d], &[&z_nh_wd]]),
        b_j: block(&[&[&plant.b_du], &[&hold.b]]),
        c_c: block(&[&[&plant.c_c, &d_cu_ch]]),
        d_cc: plant.d_cc.clone(),
        c_d: block(&[&[&plant.c_d, &Matrix::zeros(plant.n_zd(), n_h)]]),
        d_dd: plant.d_dd.clone(),
        d_dj: plant.d_du.clone(),
        c_j: block(&[&[&plant.c_y, &Matrix::zeros(plant.n_y(), n_h)]]),
        d_jd: plant.d_yd.clone(),
    };
    debug_assert!(gp.validate().is_ok());
    Ok(gp)
}

/// Autonomous-input jump-flow system: the closed loop, or any system to be
/// analyzed directly.
///
/// Jump at t_k:  xi+ = a_d xi + b_d w_d[k],  z_d[k] = c_d xi + d_d w_d[k]
/// (jump outputs read the pre-jump state); flow on (t_k, t_{k+1}]:
/// xi' = a_c xi + b_c w_c,  z_c = c_c xi + d_c w_c.
#[derive(Debug, Clone, PartialEq)]
pub struct LpjfSystem {
    pub h: f64,
    pub a_c: Matrix,
    pub b_c: Matrix,
    pub c_c: Matrix,
    pub d_c: Matrix,
    pub a_d: Matrix,
    pub b_d: Matrix,
    pub c_d: Matrix,
    pub d_d: Matrix,
}

impl LpjfSystem {
    pub fn n(&self) -> usize {
        self.a_c.nrows()
    }
    pub fn n_wc(&self) -> usize {
        self.b_c.ncols()
    }
    pub fn n_zc(&self) -> usize {
        self.c_c.nrows()
    }
    pub fn n_wd(&self) -> usize {
        self.b_d.ncols()
    }
    pub fn n_zd(&self) -> usize {
        self.c_d.nrows()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidArgument {
                context: "jump-flow sampling period must be positive and finite",
            });
        }
        let (n, n_wc, n_zc, n_wd, n_zd) =
            (self.n(), self.n_wc(), self.n_zc(), self.n_wd(), self.n_zd());
        expect_shape(&self.a_c, n, n, "system a_c")?;
        expect_shape(&self.b_c, n, n_wc, "system b_c")?;
        expect_shape(&self.c_c, n_zc, n, "system c_c")?;
        expect_shape(&self.d_c, n_zc, n_wc, "system d_c")?;
        expect_shape(&self.a_d, n, n, "system a_d")?;
        expect_shape(&self.b_d, n, n_wd, "system b_d")?;
        expect_shape(&self.c_d, n_zd, n, "system c_d")?;
        expect_shape(&self.d_d, n_zd, n_wd, "system d_d")?;
        Ok(())
    }
}

/// Close the loop around a generalized plant with a discrete controller.
///
/// The controller state is appended: xi = [x; x_h; x_c]. Flow matrices get
/// zero blocks on the controller state (it does not flow); the jump
/// matrices are affine in the controller parameter block [a b; c d].
pub fn close_loop(
    gp: &GeneralizedPlant,
    k: &DiscreteController,
) -> Result<LpjfSystem, Error> {
    gp.validate()?;
    k.validate()?;
    if k.n_y() != gp.n_y() || k.n_u() != gp.n_u() {
        return Err(Error::Dimension {
            context: "close_loop: controller io vs plant io",
            expected: (gp.n_u(), gp.n_y()),
            got: (k.n_u(), k.n_y()),
        });
    }
    let n_p = gp.n_p();
    let n_c = k.n_c();
    let (n_wd, n_zd, n_zc, n_wc) = (gp.n_wd(), gp.n_zd(), gp.n_zc(), gp.n_wc());

    // Jump part: base + injection * controller * extraction, then slice.
    let base = block(&[
        &[&gp.a_d, &Matrix::zeros(n_p, n_c), &gp.b_d],
        &[
            &Matrix::zeros(n_c, n_p),
            &Matrix::zeros(n_c, n_c),
            &Matrix::zeros(n_c, n_wd),
        ],
        &[&gp.c_d, &Matrix::zeros(n_zd, n_c), &gp.d_dd],
    ]);
    let inject = block(&[
        &[&Matrix::zeros(n_p, n_c), &gp.b_j],
        &[&Matrix::identity(n_c, n_c), &Matrix::zeros(n_c, gp.n_u())],
        &[&Matrix::zeros(n_zd, n_c), &gp.d_dj],
    ]);
    let params = block(&[&[&k.a, &k.b], &[&k.c, &k.d]]);
    let extract = block(&[
        &[
            &Matrix::zeros(n_c, n_p),
            &Matrix::identity(n_c, n_c),
            &Matrix::zeros(n_c, n_wd),
        ],
        &[&gp.c_j, &Matrix::zeros(gp.n_y(), n_c), &gp.d_jd],
    ]);
    let jump = base + inject * params * extract;

    let n = n_p + n_c;
    let sys = LpjfSystem {
        h: gp.h,
        a_c: block(&[
            &[&gp.a_c, &Matrix::zeros(n_p, n_c)],
            &[&Matrix::zeros(n_c, n_p), &Matrix::zeros(n_c, n_c)],
        ]),
        b_c: block(&[&[&gp.b_c], &[&Matrix::zeros(n_c, n_wc)]]),
        c_c: block(&[&[&gp.c_c, &Matrix::zeros(n_zc, n_c)]]),
        d_c: gp.d_cc.clone(),
        a_d: jump.view((0, 0), (n, n)).into_owned(),
        b_d: jump.view((0, n), (n, n_wd)).into_owned(),
        c_d: jump.view((n, 0), (n_zd, n)).into_owned(),
        d_d: jump.view((n, n), (n_zd, n_wd)).into_owned(),
    };
    debug_assert!(sys.validate().is_ok());
    Ok(sys)
}

/// One-period state transition map: jump first, then flow for h.
pub fn monodromy(sys: &LpjfSystem) -> Matrix {
    expm(&(&sys.a_c * sys.h)) * &sys.a_d
}

/// Global exponential stability of the unforced system: the monodromy
/// spectral radius must be below 1 by at least tol (default 1e-9).
pub fn is_ges(sys: &LpjfSystem, tol: Option<f64>) -> bool {
    spectral_radius(&monodromy(sys)) < 1.0 - tol.unwrap_or(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_plant(a: f64, b_cu: f64, h: f64) -> SampledDataPlant {
        SampledDataPlant {
            h,
            a_c: Matrix::from_row_slice(1, 1, &[a]),
            b_c: Matrix::from_row_slice(1, 1, &[1.0]),
            b_cu: Matrix::from_row_slice(1, 1, &[b_cu]),
            a_d: Matrix::identity(1, 1),
            b_d: Matrix::zeros(1, 0),
            b_du: Matrix::from_row_slice(1, 1, &[0.25]),
            c_c: Matrix::from_row_slice(1, 1, &[2.0]),
            d_cc: Matrix::from_row_slice(1, 1, &[0.5]),
            d_cu: Matrix::from_row_slice(1, 1, &[3.0]),
            c_d: Matrix::zeros(0, 1),
            d_dd: Matrix::zeros(0, 0),
            d_du: Matrix::zeros(0, 1),
            c_y: Matrix::from_row_slice(1, 1, &[1.0]),
            d_yd: Matrix::zeros(1, 0),
        }
    }

    #[test]
    fn zoh_holds_last_sample() {
        let hold = zoh_hold(2);
        assert_eq!(hold.n_h(), 2);
        // Load a sample and flow: output constant.
        let u_hat = Matrix::from_row_slice(2, 1, &[1.0, -3.0]);
        let x_post = &hold.a_d * Matrix::zeros(2, 1) + &hold.b * &u_hat;
        let x_mid = expm(&(&hold.a_c * 0.05)) * &x_post;
        assert!((&hold.c * &x_mid - &u_hat).amax() < 1e-14);
    }

    #[test]
    fn foh_matches_expected_blocks() {
        let hold = foh_hold(1, 0.1);
        assert_eq!(hold.n_h(), 3);
        let expected_ac =
            Matrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 10.0, 0.0, -10.0, 0.0, 0.0, 0.0]);
        assert_eq!(hold.a_c, expected_ac);
        let expected_ad =
            Matrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(hold.a_d, expected_ad);
        assert_eq!(hold.b, Matrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]));
        assert_eq!(hold.c, Matrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]));
    }

    // Oracle: first-order hold output ramps between consecutive samples.
    #[test]
    fn foh_interpolates_linearly() {
        let h = 0.1;
        let hold = foh_hold(1, h);
        let samples = [0.7f64, -0.4, 1.3];
        let mut x = Matrix::zeros(3, 1);
        let mut prev = 0.0;
        for &u_hat in &samples {
            x = &hold.a_d * &x + &hold.b * Matrix::from_row_slice(1, 1, &[u_hat]);
            for frac in [0.25, 0.5, 1.0] {
                let xt = expm(&(&hold.a_c * (frac * h))) * &x;
                let u = (&hold.c * &xt)[(0, 0)];
                let expected = prev + frac * (u_hat - prev);
                assert!(
                    (u - expected).abs() < 1e-12,
                    "frac={frac} u={u} expected={expected}"
                );
            }
            prev = u_hat;
        }
    }

    #[test]
    fn compose_scalar_blocks() {
        let plant = scalar_plant(-1.5, 4.0, 0.2);
        let gp = compose_plant_hold(&plant, &zoh_hold(1)).unwrap();
        assert_eq!(
            gp.a_c,
            Matrix::from_row_slice(2, 2, &[-1.5, 4.0, 0.0, 0.0])
        );
        assert_eq!(gp.b_c, Matrix::from_row_slice(2, 1, &[1.0, 0.0]));
        assert_eq!(gp.b_j, Matrix::from_row_slice(2, 1, &[0.25, 1.0]));
        assert_eq!(gp.c_c, Matrix::from_row_slice(1, 2, &[2.0, 3.0]));
        assert_eq!(gp.d_cc, Matrix::from_row_slice(1, 1, &[0.5]));
        assert_eq!(gp.c_j, Matrix::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(gp.a_d, Matrix::identity(2, 2).map_with_location(|i, j, v| {
            if i == 1 && j == 1 { 0.0 } else { v }
        }));
    }

    #[test]
    fn compose_rejects_width_mismatch() {
        let plant = scalar_plant(-1.0, 1.0, 0.1);
        assert!(matches!(
            compose_plant_hold(&plant, &zoh_hold(2)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn close_loop_static_gain() {
        let plant = scalar_plant(-1.0, 1.0, 0.5);
        let gp = compose_plant_hold(&plant, &zoh_hold(1)).unwrap();
        let k = DiscreteController::static_gain(Matrix::from_row_slice(1, 1, &[-2.0]));
        let sys = close_loop(&gp, &k).unwrap();
        assert_eq!(sys.n(), 2);
        // a_d = gp.a_d + b_j * d * c_j
        let expected = &gp.a_d + &gp.b_j * Matrix::from_row_slice(1, 1, &[-2.0]) * &gp.c_j;
        assert!((sys.a_d.clone() - expected).amax() < 1e-15);
        // Controller does not flow.
        assert_eq!(sys.a_c, gp.a_c);
    }

    #[test]
    fn monodromy_jump_precedes_flow() {
        // Non-commuting flow and jump pin the ordering.
        let sys = LpjfSystem {
            h: 1.0,
            a_c: Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            b_c: Matrix::zeros(2, 0),
            c_c: Matrix::zeros(0, 2),
            d_c: Matrix::zeros(0, 0),
            a_d: Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            b_d: Matrix::zeros(2, 0),
            c_d: Matrix::zeros(0, 2),
            d_d: Matrix::zeros(0, 0),
        };
        let m = monodromy(&sys);
        // exp([[0,1],[0,0]]) * diag(1,0) = [[1,1],[0,1]]*diag(1,0) = [[1,0],[0,0]]
        assert!((m - Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-14);
    }

    fn scalar_autonomous(flow: f64, jump: f64, h: f64) -> LpjfSystem {
        LpjfSystem {
            h,
            a_c: Matrix::from_row_slice(1, 1, &[flow]),
            b_c: Matrix::zeros(1, 0),
            c_c: Matrix::zeros(0, 1),
            d_c: Matrix::zeros(0, 0),
            a_d: Matrix::from_row_slice(1, 1, &[jump]),
            b_d: Matrix::zeros(1, 0),
            c_d: Matrix::zeros(0, 1),
            d_d: Matrix::zeros(0, 0),
        }
    }

    #[test]
    fn ges_scalar_examples() {
        let half = scalar_autonomous(-(2.0f64.ln()), 1.0, 1.0);
        assert!((spectral_radius(&monodromy(&half)) - 0.5).abs() < 1e-12);
        assert!(is_ges(&half, None));

        // Jump gain 2 exactly cancels the flow decay: on the unit circle.
        let marginal = scalar_autonomous(-(2.0f64.ln()), 2.0, 1.0);
        assert!((spectral_radius(&monodromy(&marginal)) - 1.0).abs() < 1e-12);
        assert!(!is_ges(&marginal, None));

        // Within tol of the unit circle counts as not GES.
        let boundary = scalar_autonomous(0.0, 1.0 - 5e-10, 1.0);
        assert!(!is_ges(&boundary, None));
        assert!(is_ges(&boundary, Some(1e-12)));
    }

    #[test]
    fn zero_state_controller_is_legal() {
        let k = DiscreteController::static_gain(Matrix::zeros(2, 3));
        assert_eq!(k.n_c(), 0);
        assert!(k.validate().is_ok());
    }

    #[test]
    fn validation_rejects_bad_dims() {
        let mut plant = scalar_plant(-1.0, 1.0, 0.1);
        plant.c_y = Matrix::zeros(1, 2);
        assert!(matches!(plant.validate(), Err(Error::Dimension { .. })));
        let mut plant = scalar_plant(-1.0, 1.0, 0.1);
        plant.h = 0.0;
        assert!(plant.validate().is_err());
        let mut plant = scalar_plant(-1.0, 1.0, 0.1);
        plant.a_c[(0, 0)] = f64::NAN;
        assert!(matches!(plant.validate(), Err(Error::NonFinite { .. })));
    }

    fn random_controller(rng: &mut ChaCha8Rng, n_c: usize, n_y: usize, n_u: usize) -> DiscreteController {
        DiscreteController {
            a: Matrix::from_fn(n_c, n_c, |_, _| rng.gen_range(-1.0..1.0)),
            b: Matrix::from_fn(n_c, n_y, |_, _| rng.gen_range(-1.0..1.0)),
            c: Matrix::from_fn(n_u, n_c, |_, _| rng.gen_range(-1.0..1.0)),
            d: Matrix::from_fn(n_u, n_y, |_, _| rng.gen_range(-1.0..1.0)),
        }
    }

    proptest! {
        // The closed-loop jump matrices are affine in the controller
        // parameters: close(k1 + k2) - close(k1) - close(k2) + close(0) = 0.
        #[test]
        fn closed_loop_affine_in_controller(seed in 0u64..200, n_c in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plant = scalar_plant(-1.0, 2.0, 0.3);
            let gp = compose_plant_hold(&plant, &zoh_hold(1)).unwrap();
            let k1 = random_controller(&mut rng, n_c, 1, 1);
            let k2 = random_controller(&mut rng, n_c, 1, 1);
            let k_sum = DiscreteController {
                a: &k1.a + &k2.a,
                b: &k1.b + &k2.b,
                c: &k1.c + &k2.c,
                d: &k1.d + &k2.d,
            };
            let k_zero = DiscreteController {
                a: Matrix::zeros(n_c, n_c),
                b: Matrix::zeros(n_c, 1),
                c: Matrix::zeros(1, n_c),
                d: Matrix::zeros(1, 1),
            };
            let s_sum = close_loop(&gp, &k_sum).unwrap();
            let s1 = close_loop(&gp, &k1).unwrap();
            let s2 = close_loop(&gp, &k2).unwrap();
            let s0 = close_loop(&gp, &k_zero).unwrap();
            let resid = |f: fn(&LpjfSystem) -> &Matrix| {
                (f(&s_sum).clone() - f(&s1) - f(&s2) + f(&s0)).amax()
            };
            prop_assert!(resid(|s| &s.a_d) < 1e-12);
            prop_assert!(resid(|s| &s.b_d) < 1e-12);
            prop_assert!(resid(|s| &s.c_d) < 1e-12);
            prop_assert!(resid(|s| &s.d_d) < 1e-12);
            // Flow side does not depend on the controller at all.
            prop_assert!((s_sum.a_c.clone() - &s1.a_c).amax() == 0.0);
        }
    }
}

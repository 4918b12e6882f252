//! Ready-made sampled-data plant constructions for three design problems:
//! passivity-based teleoperation, matching a discrete filter to a continuous
//! reference filter, and redesigning a continuous controller as a discrete
//! one that keeps the physical loop stable.

use crate::discretize::{CtSystem, DtSystem};
use crate::numerics::{
    balance_scales, block, expm, inverse, max_abs, one_norm, rescale_realization,
    spectral_radius, Matrix,
};
use crate::system::{DiscreteController, SampledDataPlant};
use crate::Error;

/// Two-mass teleoperation rig: a master and a slave device, each a
/// spring-damper-mass driven by an external force and a motor force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleopParams {
    pub m_m: f64,
    pub m_s: f64,
    pub b_m: f64,
    pub b_s: f64,
    pub k_m: f64,
    pub k_s: f64,
    /// Scales the force fed back to the operator.
    pub alpha: f64,
    /// Regularizes the velocity-mismatch output so the flow coupling
    /// stays positive definite.
    pub epsilon: f64,
    pub h: f64,
}

impl Default for TeleopParams {
    fn default() -> Self {
        TeleopParams {
            m_m: 1.0,
            m_s: 10.0,
            b_m: 1e-3,
            b_s: 1e-2,
            k_m: 10.0,
            k_s: 1e3,
            alpha: 50.0,
            epsilon: 1e-2,
            h: 1e-3,
        }
    }
}

/// Plant for passivity-based teleoperation control. The controller reads
/// both positions and actuates both motors; the passivity pairing puts
/// forces on the input side and (scaled) velocities on the output side, so
/// the supply has power units.
pub fn build_teleop(p: &TeleopParams) -> Result<SampledDataPlant, Error> {
    for v in [p.m_m, p.m_s, p.b_m, p.b_s, p.k_m, p.k_s, p.alpha, p.epsilon, p.h] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument {
                context: "teleoperation parameters must be positive and finite",
            });
        }
    }
    let a_c = Matrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            -p.k_m / p.m_m, -p.b_m / p.m_m, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -p.k_s / p.m_s, -p.b_s / p.m_s,
        ],
    );
    let b_c = Matrix::from_row_slice(
        4,
        2,
        &[
            0.0, 0.0, //
            1.0 / p.m_m, 0.0, //
            0.0, 0.0, //
            0.0, 1.0 / p.m_s,
        ],
    );
    let plant = SampledDataPlant {
        h: p.h,
        a_c,
        b_c: b_c.clone(),
        b_cu: -b_c,
        a_d: Matrix::identity(4, 4),
        b_d: Matrix::zeros(4, 0),
        b_du: Matrix::zeros(4, 2),
        c_c: Matrix::from_row_slice(
            2,
            4,
            &[
                p.alpha * p.k_m, p.alpha * p.b_m, -p.k_s, -p.b_s, //
                0.0, 1.0, 0.0, -1.0,
            ],
        ),
        d_cc: Matrix::from_row_slice(2, 2, &[p.alpha, -1.0, -p.epsilon, p.epsilon]),
        d_cu: Matrix::from_row_slice(2, 2, &[p.alpha, -1.0, 0.0, 0.0]),
        c_d: Matrix::zeros(0, 4),
        d_dd: Matrix::zeros(0, 0),
        d_du: Matrix::zeros(0, 2),
        c_y: Matrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        d_yd: Matrix::zeros(2, 0),
    };
    plant.validate()?;
    Ok(plant)
}

/// All eigenvalues strictly in the open left half plane. Checked through
/// the exponential so only a spectral radius is needed; the time scale is
/// normalized to keep the exponential well conditioned.
fn is_hurwitz(a: &Matrix) -> bool {
    if a.nrows() == 0 {
        return true;
    }
    let t = 1.0 / (1.0 + one_norm(a));
    spectral_radius(&expm(&(a * t))) < 1.0 - 1e-12
}

/// Plant whose controller slot is a discrete filter that should mimic the
/// continuous filter `w` from a sampled input. The design error is the held
/// input minus the inverse-filtered control signal, so a perfect match drives
/// it to zero across all frequencies; the measurement is the raw sample.
///
/// Requires `w` to be stable, square, and minimum phase with an invertible
/// feedthrough. A filter that violates this has no stable causal inverse;
/// build the plant from a stable approximate inverse instead.
pub fn build_filter_matching(w: &CtSystem, h: f64) -> Result<SampledDataPlant, Error> {
    w.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument {
            context: "sampling period must be positive",
        });
    }
    if w.n_u() != w.n_y() {
        return Err(Error::Dimension {
            context: "reference filter must be square",
            expected: (w.n_u(), w.n_u()),
            got: (w.n_y(), w.n_u()),
        });
    }
    if !is_hurwitz(&w.a) {
        return Err(Error::InvalidArgument {
            context: "reference filter must be stable",
        });
    }
    let d_inv = inverse(&w.d).ok_or(Error::Singular {
        context: "filter feedthrough is singular: no causal inverse, supply an approximate inverse with invertible feedthrough",
    })?;
    let mut a_inv = &w.a - &w.b * &d_inv * &w.c;
    if !is_hurwitz(&a_inv) {
        return Err(Error::InvalidArgument {
            context: "filter inverse is unstable: supply a stable approximate inverse",
        });
    }
    // Balance the inverse realization before embedding. Filters arrive in
    // canonical forms whose coefficient spread would otherwise be inherited
    // by every storage certificate downstream.
    let mut b_inv = &w.b * &d_inv;
    let mut c_inv = &d_inv * &w.c;
    let scales = balance_scales(&a_inv, &b_inv, &c_inv);
    rescale_realization(&mut a_inv, &mut b_inv, &mut c_inv, &scales);
    let n_w = w.n_x();
    let m = w.n_u();
    let n = n_w + m;
    // States: inverse-filter state, then the held reference sample.
    let plant = SampledDataPlant {
        h,
        a_c: block(&[
            &[&a_inv, &Matrix::zeros(n_w, m)],
            &[&Matrix::zeros(m, n_w), &Matrix::zeros(m, m)],
        ]),
        b_c: Matrix::zeros(n, 0),
        b_cu: block(&[&[&b_inv], &[&Matrix::zeros(m, m)]]),
        a_d: block(&[
            &[&Matrix::identity(n_w, n_w), &Matrix::zeros(n_w, m)],
            &[&Matrix::zeros(m, n_w), &Matrix::zeros(m, m)],
        ]),
        b_d: block(&[&[&Matrix::zeros(n_w, m)], &[&Matrix::identity(m, m)]]),
        b_du: Matrix::zeros(n, m),
        c_c: block(&[&[&c_inv, &Matrix::identity(m, m)]]),
        d_cc: Matrix::zeros(m, 0),
        d_cu: -&d_inv,
        c_d: Matrix::zeros(0, n),
        d_dd: Matrix::zeros(0, m),
        d_du: Matrix::zeros(0, m),
        c_y: Matrix::zeros(m, n),
        d_yd: Matrix::identity(m, m),
    };
    plant.validate()?;
    Ok(plant)
}

/// Plant whose controller slot is a discrete controller that should mimic
/// the continuous controller `kc` in closed loop with the strictly proper
/// model `g`. The design error is the continuous controller's output minus
/// the held discrete control signal; the measurement is the sampled tracking
/// error, so the synthesized controller drops into the physical loop.
pub fn build_controller_matching(
    g: &CtSystem,
    kc: &CtSystem,
    h: f64,
) -> Result<SampledDataPlant, Error> {
    g.validate()?;
    kc.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument {
            context: "sampling period must be positive",
        });
    }
    if max_abs(&g.d) != 0.0 {
        return Err(Error::InvalidArgument {
            context: "model must be strictly proper",
        });
    }
    if kc.n_u() != g.n_y() || kc.n_y() != g.n_u() {
        return Err(Error::Dimension {
            context: "controller and model inputs and outputs must pair up",
            expected: (g.n_y(), g.n_u()),
            got: (kc.n_u(), kc.n_y()),
        });
    }
    let n_g = g.n_x();
    let m_r = g.n_y();
    let n_k = kc.n_x();
    let m_u = g.n_u();
    let n = n_g + m_r + n_k;
    let z_gr = Matrix::zeros(n_g, m_r);
    let z_gk = Matrix::zeros(n_g, n_k);
    let z_rk = Matrix::zeros(m_r, n_k);
    // Balance the controller realization before embedding; high-gain
    // designs otherwise push their coefficient spread into the storage
    // certificates downstream.
    let mut k_a = kc.a.clone();
    let mut k_b = kc.b.clone();
    let mut k_c = kc.c.clone();
    let scales = balance_scales(&k_a, &k_b, &k_c);
    rescale_realization(&mut k_a, &mut k_b, &mut k_c, &scales);
    // States: model, held reference sample, continuous controller. The
    // continuous controller is driven by the held reference minus the model
    // output, mirroring the loop it was designed for.
    let plant = SampledDataPlant {
        h,
        a_c: block(&[
            &[&g.a, &z_gr, &z_gk],
            &[&Matrix::zeros(m_r, n_g), &Matrix::zeros(m_r, m_r), &z_rk],
            &[&(-&k_b * &g.c), &k_b, &k_a],
        ]),
        b_c: Matrix::zeros(n, 0),
        b_cu: block(&[
            &[&g.b],
            &[&Matrix::zeros(m_r, m_u)],
            &[&Matrix::zeros(n_k, m_u)],
        ]),
        a_d: block(&[
            &[&Matrix::identity(n_g, n_g), &z_gr, &z_gk],
            &[&Matrix::zeros(m_r, n_g), &Matrix::zeros(m_r, m_r), &z_rk],
            &[&Matrix::zeros(n_k, n_g), &Matrix::zeros(n_k, m_r), &Matrix::identity(n_k, n_k)],
        ]),
        b_d: block(&[
            &[&Matrix::zeros(n_g, m_r)],
            &[&Matrix::identity(m_r, m_r)],
            &[&Matrix::zeros(n_k, m_r)],
        ]),
        b_du: Matrix::zeros(n, m_u),
        c_c: block(&[&[&(-&kc.d * &g.c), &kc.d, &k_c]]),
        d_cc: Matrix::zeros(m_u, 0),
        d_cu: -Matrix::identity(m_u, m_u),
        c_d: Matrix::zeros(0, n),
        d_dd: Matrix::zeros(0, m_r),
        d_du: Matrix::zeros(0, m_u),
        c_y: block(&[&[&(-&g.c), &Matrix::zeros(m_r, m_r), &Matrix::zeros(m_r, n_k)]]),
        d_yd: Matrix::identity(m_r, m_r),
    };
    plant.validate()?;
    Ok(plant)
}

/// Measurement loop for a discrete controller driving the strictly proper
/// model `g` directly: the controller sees the sampled tracking error, the
/// discrete input is the reference, and the flow output is the model output.
pub fn step_response_loop(g: &CtSystem, h: f64) -> Result<SampledDataPlant, Error> {
    g.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument {
            context: "sampling period must be positive",
        });
    }
    if max_abs(&g.d) != 0.0 {
        return Err(Error::InvalidArgument {
            context: "model must be strictly proper",
        });
    }
    let n_g = g.n_x();
    let m_r = g.n_y();
    let m_u = g.n_u();
    let plant = SampledDataPlant {
        h,
        a_c: g.a.clone(),
        b_c: Matrix::zeros(n_g, 0),
        b_cu: g.b.clone(),
        a_d: Matrix::identity(n_g, n_g),
        b_d: Matrix::zeros(n_g, m_r),
        b_du: Matrix::zeros(n_g, m_u),
        c_c: g.c.clone(),
        d_cc: Matrix::zeros(m_r, 0),
        d_cu: Matrix::zeros(m_r, m_u),
        c_d: Matrix::zeros(0, n_g),
        d_dd: Matrix::zeros(0, m_r),
        d_du: Matrix::zeros(0, m_u),
        c_y: -&g.c,
        d_yd: Matrix::identity(m_r, m_r),
    };
    plant.validate()?;
    Ok(plant)
}

/// Continuous positive-real rate controller for the default teleoperation
/// rig, designed directly in continuous time. Discretizing it destroys the
/// passivity the design relied on; it exists as the cautionary baseline.
pub fn pr_rate_controller() -> CtSystem {
    CtSystem {
        a: Matrix::from_row_slice(
            4,
            4,
            &[
                -2.89, 0.983, -16.4, 3.45e-3, //
                4.12e4, -401.0, -8.25e4, 61.4, //
                2.18, -8.55e-3, -42.8, 1.0, //
                2.06e5, -2e3, -4.09e5, 307.0,
            ],
        ),
        b: Matrix::from_row_slice(
            4,
            2,
            &[
                -5.16, -11.8, //
                -310.0, 600.0, //
                2.01, -42.4, //
                -1925.0, 5962.0,
            ],
        ),
        c: Matrix::from_row_slice(
            2,
            4,
            &[
                4.12e4, -402.0, -8.30e4, 61.4, //
                2.06e6, -2.01e4, -4.15e6, 3071.0,
            ],
        ),
        d: Matrix::from_row_slice(2, 2, &[-352.0, 213.0, -1.76e4, 1.06e4]),
    }
}

/// Known-good discrete teleoperation controller at h = 1e-3 (balanced
/// realization), kept as a regression reference for the passivity design.
pub fn teleop_discrete_baseline() -> DiscreteController {
    DiscreteController {
        a: Matrix::from_row_slice(
            4,
            4,
            &[
                0.979, -0.12, 1.15e-4, 6.65e-4, //
                0.12, 0.16, 0.068, -0.032, //
                -1.74e-3, 0.023, 0.995, 4.9e-3, //
                1.9e-4, -0.019, -2.04e-3, 0.02,
            ],
        ),
        b: Matrix::from_row_slice(
            4,
            2,
            &[
                -1.34, -6.95, //
                -0.3, 20.65, //
                1.22, -0.74, //
                0.56, 0.073,
            ],
        ),
        c: Matrix::from_row_slice(
            2,
            4,
            &[
                0.146, 0.41, -7.56e-3, 0.018, //
                7.1, 20.65, -0.47, 0.11,
            ],
        ),
        d: Matrix::from_row_slice(2, 2, &[-1.13, 59.9, -50.66, 2936.0]),
    }
}

/// Double-notch reference filter
/// (s^4 + 0.00289 s^3 + 43.03 s^2 + 0.1 s + 140.3) /
/// (s^4 + 3.454 s^3 + 44.8 s^2 + 113.9 s + 140.3)
/// in controllable canonical form. Unit feedthrough, notches near 1.885 and
/// 6.283 rad/s, both lightly damped.
pub fn notch_weight() -> CtSystem {
    CtSystem {
        a: Matrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -140.3, -113.9, -44.8, -3.454,
            ],
        ),
        b: Matrix::from_row_slice(4, 1, &[0.0, 0.0, 0.0, 1.0]),
        // Numerator minus denominator coefficients: the filter is D = 1
        // plus a strictly proper part.
        c: Matrix::from_row_slice(
            1,
            4,
            &[140.3 - 140.3, 0.1 - 113.9, 43.03 - 44.8, 0.00289 - 3.454],
        ),
        d: Matrix::from_row_slice(1, 1, &[1.0]),
    }
}

/// Known-good matched discrete filter for the double-notch weight at
/// h = 0.2 (balanced realization), kept as a regression reference.
pub fn notch_filter_baseline() -> DtSystem {
    DtSystem {
        h: 0.2,
        a: Matrix::from_row_slice(
            4,
            4,
            &[
                0.236, -0.307, 0.474, -0.177, //
                0.307, 0.924, 0.120, -0.0403, //
                -0.474, 0.120, 0.343, -0.773, //
                -0.177, 0.0403, 0.773, 0.536,
            ],
        ),
        b: Matrix::from_row_slice(4, 1, &[-0.567, -0.138, 0.0913, 0.160]),
        c: Matrix::from_row_slice(1, 4, &[0.567, -0.138, 0.0913, -0.160]),
        d: Matrix::from_row_slice(1, 1, &[0.727]),
    }
}

/// Unstable first-order model 0.1/(s - 0.1) used by the controller
/// redesign example.
pub fn unstable_plant() -> CtSystem {
    CtSystem {
        a: Matrix::from_row_slice(1, 1, &[0.1]),
        b: Matrix::from_row_slice(1, 1, &[1.0]),
        c: Matrix::from_row_slice(1, 1, &[0.1]),
        d: Matrix::zeros(1, 1),
    }
}

/// Continuous controller 1.747e5/(s + 268.5) that stabilizes the unstable
/// first-order model with good margins.
pub fn stabilizing_ct_controller() -> CtSystem {
    CtSystem {
        a: Matrix::from_row_slice(1, 1, &[-268.5]),
        b: Matrix::from_row_slice(1, 1, &[1.0]),
        c: Matrix::from_row_slice(1, 1, &[1.747e5]),
        d: Matrix::zeros(1, 1),
    }
}

/// Known-good matched discrete controller (431 z - 37.33)/(z - 0.09988)
/// for the unstable model at h = 0.03, kept as a regression reference.
pub fn matched_discrete_baseline() -> DiscreteController {
    let pole = 0.09988;
    let gain = 431.0;
    DiscreteController {
        a: Matrix::from_row_slice(1, 1, &[pole]),
        b: Matrix::from_row_slice(1, 1, &[1.0]),
        // Residue of the strictly proper part after peeling off the direct
        // gain: (431 z - 37.33)/(z - p) = 431 + (431 p - 37.33)/(z - p).
        c: Matrix::from_row_slice(1, 1, &[gain * pole - 37.33]),
        d: Matrix::from_row_slice(1, 1, &[gain]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipativity::AnalysisOptions;
    use crate::discretize::{freq_response_ct, freq_response_dt, log_grid};
    use crate::numerics::sym_eig_min;
    use crate::synthesis::{synthesize_hinf_optimal, SynthesisOptions};
    use crate::system::{compose_plant_hold, foh_hold, zoh_hold};

    #[test]
    fn teleop_matches_known_parameter_values() {
        let p = build_teleop(&TeleopParams::default()).unwrap();
        let a_c = Matrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                -10.0, -1e-3, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, -100.0, -1e-3,
            ],
        );
        assert_eq!(p.a_c, a_c);
        assert_eq!(p.b_cu, -&p.b_c);
        assert_eq!(p.b_c[(1, 0)], 1.0);
        assert_eq!(p.b_c[(3, 1)], 0.1);
        let c_c = Matrix::from_row_slice(
            2,
            4,
            &[500.0, 0.05, -1000.0, -0.01, 0.0, 1.0, 0.0, -1.0],
        );
        assert_eq!(p.c_c, c_c);
        assert_eq!(
            p.d_cc,
            Matrix::from_row_slice(2, 2, &[50.0, -1.0, -0.01, 0.01])
        );
        assert_eq!(
            p.d_cu,
            Matrix::from_row_slice(2, 2, &[50.0, -1.0, 0.0, 0.0])
        );
        assert_eq!(p.n_wd(), 0);
        assert_eq!(p.n_zd(), 0);
    }

    #[test]
    fn teleop_flow_coupling_is_positive_definite() {
        // The passivity coupling block is D_cc + D_cc', which epsilon and
        // alpha were chosen to keep positive definite.
        let p = build_teleop(&TeleopParams::default()).unwrap();
        let m2 = &p.d_cc + p.d_cc.transpose();
        assert_eq!(
            m2,
            Matrix::from_row_slice(2, 2, &[100.0, -1.01, -1.01, 0.02])
        );
        assert!(sym_eig_min(&m2) > 0.0);

        let gp_zoh = compose_plant_hold(&p, &zoh_hold(2)).unwrap();
        assert_eq!(gp_zoh.n_p(), 6);
        let gp_foh = compose_plant_hold(&p, &foh_hold(2, p.h)).unwrap();
        assert_eq!(gp_foh.n_p(), 10);
    }

    #[test]
    fn teleop_rejects_nonpositive_parameters() {
        let mut p = TeleopParams::default();
        p.m_s = 0.0;
        assert!(matches!(
            build_teleop(&p),
            Err(Error::InvalidArgument { .. })
        ));
    }

    /// The matching plant embeds the inverse filter; cascading that block
    /// with the original filter must give the identity operator.
    #[test]
    fn filter_plant_embeds_a_true_inverse() {
        // W = (s+1)/(s+2).
        let w = CtSystem {
            a: Matrix::from_row_slice(1, 1, &[-2.0]),
            b: Matrix::from_row_slice(1, 1, &[1.0]),
            c: Matrix::from_row_slice(1, 1, &[-1.0]),
            d: Matrix::from_row_slice(1, 1, &[1.0]),
        };
        let p = build_filter_matching(&w, 0.1).unwrap();
        let n_w = w.n_x();
        let inv = CtSystem {
            a: p.a_c.view((0, 0), (n_w, n_w)).into_owned(),
            b: p.b_cu.view((0, 0), (n_w, 1)).into_owned(),
            c: -p.c_c.view((0, 0), (1, n_w)).into_owned(),
            d: -p.d_cu.clone(),
        };
        // Series interconnection inv(W) after W.
        let cascade = CtSystem {
            a: block(&[
                &[&w.a, &Matrix::zeros(n_w, n_w)],
                &[&(&inv.b * &w.c), &inv.a],
            ]),
            b: block(&[&[&w.b], &[&(&inv.b * &w.d)]]),
            c: block(&[&[&(&inv.d * &w.c), &inv.c]]),
            d: &inv.d * &w.d,
        };
        for point in freq_response_ct(&cascade, &log_grid(1e-2, 1e3, 40)) {
            let point = point.unwrap();
            assert!((point.re[(0, 0)] - 1.0).abs() < 1e-10);
            assert!(point.im[(0, 0)].abs() < 1e-10);
        }
    }

    #[test]
    fn filter_plant_shape_for_the_notch_weight() {
        let p = build_filter_matching(&notch_weight(), 0.2).unwrap();
        assert_eq!(p.n_x(), 5);
        assert_eq!(p.n_wd(), 1);
        assert_eq!(p.n_zd(), 0);
        assert_eq!(p.n_wc(), 0);
        assert_eq!(p.c_y, Matrix::zeros(1, 5));
        assert_eq!(p.d_yd, Matrix::identity(1, 1));
        // Filter state persists over jumps, the held sample is replaced.
        assert_eq!(p.a_d[(3, 3)], 1.0);
        assert_eq!(p.a_d[(4, 4)], 0.0);
        assert_eq!(p.b_d[(4, 0)], 1.0);
    }

    #[test]
    fn filter_rejects_missing_or_unstable_inverse() {
        let strictly_proper = CtSystem {
            a: Matrix::from_row_slice(1, 1, &[-1.0]),
            b: Matrix::from_row_slice(1, 1, &[1.0]),
            c: Matrix::from_row_slice(1, 1, &[1.0]),
            d: Matrix::zeros(1, 1),
        };
        assert!(matches!(
            build_filter_matching(&strictly_proper, 0.1),
            Err(Error::Singular { .. })
        ));

        // W = (s-1)/(s+2) is stable but not minimum phase.
        let nonminimum_phase = CtSystem {
            a: Matrix::from_row_slice(1, 1, &[-2.0]),
            b: Matrix::from_row_slice(1, 1, &[1.0]),
            c: Matrix::from_row_slice(1, 1, &[-3.0]),
            d: Matrix::from_row_slice(1, 1, &[1.0]),
        };
        assert!(matches!(
            build_filter_matching(&nonminimum_phase, 0.1),
            Err(Error::InvalidArgument { .. })
        ));

        let unstable = CtSystem {
            a: Matrix::from_row_slice(1, 1, &[0.5]),
            b: Matrix::from_row_slice(1, 1, &[1.0]),
            c: Matrix::from_row_slice(1, 1, &[1.0]),
            d: Matrix::from_row_slice(1, 1, &[1.0]),
        };
        assert!(matches!(
            build_filter_matching(&unstable, 0.1),
            Err(Error::InvalidArgument { .. })
        ));
    }

    /// A unit filter can be matched exactly (pass the sample through), so
    /// the optimal level is pinned near zero.
    #[test]
    fn identity_weight_matches_to_tiny_gamma() {
        let w = CtSystem {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, 1),
            c: Matrix::zeros(1, 0),
            d: Matrix::identity(1, 1),
        };
        let plant = build_filter_matching(&w, 0.2).unwrap();
        let gp = compose_plant_hold(&plant, &zoh_hold(1)).unwrap();
        let (gamma, result) =
            synthesize_hinf_optimal(&gp, &SynthesisOptions::default()).unwrap();
        assert!(gamma < 0.05, "gamma = {gamma}");
        assert!(result.analysis.margin > 0.0);
    }

    #[test]
    fn controller_matching_reproduces_the_reference_loop() {
        let g = unstable_plant();
        let kc = stabilizing_ct_controller();
        let p = build_controller_matching(&g, &kc, 0.03).unwrap();
        assert_eq!(p.n_x(), 3);
        assert_eq!(p.n_wc(), 0);
        assert_eq!(p.d_cu, -Matrix::identity(1, 1));
        assert_eq!(p.c_y, Matrix::from_row_slice(1, 3, &[-0.1, 0.0, 0.0]));

        // The continuous design loop: G with kc in error feedback. Its DC
        // gain from reference to model output is G K/(1 + G K) at s = 0.
        let a_cl = block(&[
            &[&(&g.a - &g.b * &kc.d * &g.c), &(&g.b * &kc.c)],
            &[&(-&kc.b * &g.c), &kc.a],
        ]);
        assert!(is_hurwitz(&a_cl));
        let b_cl = block(&[&[&(&g.b * &kc.d)], &[&kc.b]]);
        let x = crate::numerics::solve(&a_cl, &(-&b_cl)).unwrap();
        let dc = (&g.c * x.view((0, 0), (1, 1)).into_owned())[(0, 0)];
        assert!((dc - 1.0015393).abs() < 1e-6, "dc = {dc}");
    }

    #[test]
    fn controller_matching_rejects_proper_models() {
        let g = CtSystem {
            a: Matrix::from_row_slice(1, 1, &[-1.0]),
            b: Matrix::from_row_slice(1, 1, &[1.0]),
            c: Matrix::from_row_slice(1, 1, &[1.0]),
            d: Matrix::from_row_slice(1, 1, &[0.3]),
        };
        assert!(matches!(
            build_controller_matching(&g, &stabilizing_ct_controller(), 0.03),
            Err(Error::InvalidArgument { .. })
        ));
    }

    /// Matching a zero controller is trivially exact: the synthesized
    /// controller only has to stay silent.
    #[test]
    fn zero_controller_matches_to_tiny_gamma() {
        let g = CtSystem {
            a: Matrix::from_row_slice(1, 1, &[-1.0]),
            b: Matrix::from_row_slice(1, 1, &[1.0]),
            c: Matrix::from_row_slice(1, 1, &[1.0]),
            d: Matrix::zeros(1, 1),
        };
        let kc = CtSystem {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, 1),
            c: Matrix::zeros(1, 0),
            d: Matrix::zeros(1, 1),
        };
        let plant = build_controller_matching(&g, &kc, 0.1).unwrap();
        let gp = compose_plant_hold(&plant, &zoh_hold(1)).unwrap();
        let (gamma, _) = synthesize_hinf_optimal(
            &gp,
            &SynthesisOptions {
                analysis: AnalysisOptions::default(),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(gamma < 0.05, "gamma = {gamma}");
    }

    #[test]
    fn notch_weight_dips_at_both_notches() {
        let w = notch_weight();
        for omega in [1.885, 6.2832] {
            let h = freq_response_ct(&w, &[omega])[0].clone().unwrap();
            assert!(h.magnitude()[(0, 0)] < 0.01, "no dip at {omega}");
        }
        let hf = freq_response_ct(&w, &[1e3])[0].clone().unwrap();
        assert!((hf.magnitude()[(0, 0)] - 1.0).abs() < 0.1);
    }

    #[test]
    fn matched_baseline_has_the_documented_transfer() {
        let k = matched_discrete_baseline();
        let sys = DtSystem {
            h: 0.03,
            a: k.a.clone(),
            b: k.b.clone(),
            c: k.c.clone(),
            d: k.d.clone(),
        };
        // At z = 1: (431 - 37.33)/(1 - 0.09988).
        let dc = freq_response_dt(&sys, &[0.0])[0].clone().unwrap();
        let expect = (431.0 - 37.33) / (1.0 - 0.09988);
        assert!((dc.re[(0, 0)] - expect).abs() < 1e-9);
        assert!(dc.im[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn step_loop_shape() {
        let p = step_response_loop(&unstable_plant(), 0.03).unwrap();
        assert_eq!(p.n_x(), 1);
        assert_eq!(p.n_wd(), 1);
        assert_eq!(p.c_y, Matrix::from_row_slice(1, 1, &[-0.1]));
        assert_eq!(p.d_yd, Matrix::identity(1, 1));
        assert_eq!(p.c_c, Matrix::from_row_slice(1, 1, &[0.1]));
    }
}

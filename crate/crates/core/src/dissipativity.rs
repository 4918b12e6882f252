//! Dissipativity analysis of jump-flow systems against quadratic supplies.
//!
//! The flow inequality over one period is eliminated exactly: the
//! timer-dependent storage is propagated through the Hamiltonian flow of
//! the flow-channel Riccati equation, which turns the differential matrix
//! inequality into algebraic data (a_hat, b_hat, c_hat) entering a single
//! finite-dimensional LMI in the end-of-period storage matrix P(h). A
//! feasible P(h) is then expanded back to the full storage P(τ) and can be
//! re-verified directly: Riccati residuals on a τ-grid, the jump
//! inequality at the period boundary, positivity of P, and a Monte Carlo
//! dissipation-inequality check along simulated trajectories.

use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::numerics::{
    all_finite, block, expm, max_abs, min_singular_value, psd_factor, solve, spectral_radius,
    sym_eig_min, sym_eigenvalues, symmetrize, Matrix,
};
use crate::sdp::{solve_feasibility, SdpBuilder, SdpOptions, SdpStatus};
use crate::supply::QuadraticSupply;
use crate::system::{is_ges, monodromy, LpjfSystem};
use crate::Error;

/// Flow-channel supply expressed in state/input coordinates:
/// s_c = xi'M1 xi + 2 xi'M3 w + w'M2 w along z_c = C xi + D w.
#[derive(Debug, Clone)]
pub struct MBlocks {
    pub m1: Matrix,
    pub m2: Matrix,
    pub m3: Matrix,
}

/// Tolerances and solver options for analysis.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub sdp: SdpOptions,
    /// Minimum acceptable invertibility certificate for the Hamiltonian
    /// flow's upper-left block.
    pub tol_inv: f64,
    /// Grid size for the invertibility certificate sweep.
    pub cert_grid: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            sdp: SdpOptions::default(),
            tol_inv: 1e-9,
            cert_grid: 64,
        }
    }
}

fn check_channels(sys: &LpjfSystem, supply: &QuadraticSupply) -> Result<(), Error> {
    sys.validate()?;
    supply.validate()?;
    let pairs = [
        (sys.n_wc(), supply.n_wc(), "supply flow input width"),
        (sys.n_zc(), supply.n_zc(), "supply flow output width"),
        (sys.n_wd(), supply.n_wd(), "supply jump input width"),
        (sys.n_zd(), supply.n_zd(), "supply jump output width"),
    ];
    for (got, expected, context) in pairs {
        if got != expected {
            return Err(Error::Dimension {
                context,
                expected: (expected, expected),
                got: (got, got),
            });
        }
    }
    Ok(())
}

/// Substitute z_c = C xi + D w into the flow supply. Fails when the
/// input-quadratic term M2 is not positive definite (the flow inequality
/// could not be eliminated pointwise).
pub fn m_blocks(sys: &LpjfSystem, supply: &QuadraticSupply) -> Result<MBlocks, Error> {
    check_channels(sys, supply)?;
    let c = &sys.c_c;
    let d = &sys.d_c;
    let m1 = symmetrize(&(c.transpose() * &supply.r_c * c));
    let m3 = c.transpose() * supply.s_c.transpose() + c.transpose() * &supply.r_c * d;
    let m2 = symmetrize(
        &(&supply.q_c
            + &supply.s_c * d
            + d.transpose() * supply.s_c.transpose()
            + d.transpose() * &supply.r_c * d),
    );
    if sys.n_wc() > 0 {
        let min_eig = sym_eig_min(&m2);
        if !(min_eig > 1e-12 * max_abs(&m2).max(1.0)) {
            return Err(Error::M2NotPositiveDefinite { min_eig });
        }
    }
    Ok(MBlocks { m1, m2, m3 })
}

/// Hamiltonian of the flow-channel Riccati equation
/// dP/dτ = -(A'P + PA - M1 + (PB - M3) M2⁻¹ (B'P - M3')).
pub fn hamiltonian(sys: &LpjfSystem, supply: &QuadraticSupply) -> Result<Matrix, Error> {
    let mb = m_blocks(sys, supply)?;
    hamiltonian_from_blocks(&sys.a_c, &sys.b_c, &mb)
}

pub(crate) fn hamiltonian_from_blocks(
    a: &Matrix,
    b: &Matrix,
    mb: &MBlocks,
) -> Result<Matrix, Error> {
    let m2_inv_m3t = solve(&mb.m2, &mb.m3.transpose()).ok_or(Error::Singular {
        context: "flow supply input weight",
    })?;
    let m2_inv_bt = solve(&mb.m2, &b.transpose()).ok_or(Error::Singular {
        context: "flow supply input weight",
    })?;
    let a_tilde = a - b * &m2_inv_m3t;
    let h11 = a_tilde.clone();
    let h12 = b * m2_inv_bt;
    let h21 = &mb.m1 - &mb.m3 * m2_inv_m3t;
    let h22 = -a_tilde.transpose();
    let h21s = symmetrize(&h21);
    let h12s = symmetrize(&h12);
    Ok(block(&[&[&h11, &h12s], &[&h21s, &h22]]))
}

/// Blocks of exp(-H s), partitioned n|n.
fn flow_transition(h_mat: &Matrix, s: f64, n: usize) -> (Matrix, Matrix, Matrix, Matrix) {
    let f = expm(&(h_mat * (-s)));
    (
        f.view((0, 0), (n, n)).into_owned(),
        f.view((0, n), (n, n)).into_owned(),
        f.view((n, 0), (n, n)).into_owned(),
        f.view((n, n), (n, n)).into_owned(),
    )
}

/// Linear-fractional action of a transition on a storage matrix:
/// P -> (F21 + F22 P)(F11 + F12 P)⁻¹.
fn mobius_step(
    f: &(Matrix, Matrix, Matrix, Matrix),
    p: &Matrix,
) -> Result<Matrix, Error> {
    let (f11, f12, f21, f22) = f;
    let x = f11 + f12 * p;
    let y = f21 + f22 * p;
    let xi = crate::numerics::inverse(&x).ok_or(Error::Singular {
        context: "storage propagation lost well-posedness",
    })?;
    Ok(symmetrize(&(y * xi)))
}

/// Substep count keeping each transition's exponent norm moderate. The
/// evaluation error of a single long-range transition grows with the
/// internal dynamic range exp(|H| s), which destroys the certificate in
/// cancellation when |H| s is large.
fn step_count(h_mat: &Matrix, s: f64) -> usize {
    let work = crate::numerics::one_norm(h_mat) * Float::abs(s);
    let steps = Float::ceil(work / 8.0);
    if steps.is_finite() && steps >= 1.0 {
        (steps as usize).min(4096)
    } else {
        1
    }
}

/// Period-lifted flow data: P(h) relates to P(0+) through
/// exp(-H h) = [[F11, F12], [F21, F22]], summarized by
/// a_hat = F11⁻¹, b_hat b_hat' = -F11⁻¹ F12, c_hat' c_hat = F21 F11⁻¹.
#[derive(Debug, Clone)]
pub struct LiftedData {
    pub h: f64,
    pub n: usize,
    pub hamiltonian: Matrix,
    pub a_hat: Matrix,
    pub b_hat: Matrix,
    pub c_hat: Matrix,
    /// min over a τ-grid of the smallest singular value of F11(τ).
    pub invertibility_certificate: f64,
    pub m: MBlocks,
}

pub fn lifted_data(
    sys: &LpjfSystem,
    supply: &QuadraticSupply,
    opts: &AnalysisOptions,
) -> Result<LiftedData, Error> {
    let mb = m_blocks(sys, supply)?;
    let h_mat = hamiltonian_from_blocks(&sys.a_c, &sys.b_c, &mb)?;
    let n = sys.n();

    let mut certificate = f64::INFINITY;
    for j in 0..=opts.cert_grid {
        let s = sys.h * j as f64 / opts.cert_grid as f64;
        let (f11, _, _, _) = flow_transition(&h_mat, s, n);
        certificate = certificate.min(min_singular_value(&f11));
    }
    if !(certificate > opts.tol_inv) {
        return Err(Error::F11NearSingular {
            certificate,
            tol: opts.tol_inv,
        });
    }

    let (f11, f12, f21, _) = flow_transition(&h_mat, sys.h, n);
    let a_hat = crate::numerics::inverse(&f11).ok_or(Error::F11NearSingular {
        certificate,
        tol: opts.tol_inv,
    })?;
    let bbt = symmetrize(&(-(&a_hat * f12)));
    let b_hat = psd_factor(&bbt, None)?;
    let ctc = symmetrize(&(f21 * &a_hat));
    let c_hat = psd_factor(&ctc, None)?.transpose();

    if !(all_finite(&a_hat) && all_finite(&b_hat) && all_finite(&c_hat)) {
        return Err(Error::NonFinite {
            context: "lifted flow data",
        });
    }

    Ok(LiftedData {
        h: sys.h,
        n,
        hamiltonian: h_mat,
        a_hat,
        b_hat,
        c_hat,
        invertibility_certificate: certificate,
        m: mb,
    })
}

/// The analysis LMI in the unknown P = P(h): a single symmetric block
/// that is required to be strictly positive definite. Returns the builder
/// and the variable handle so callers can unpack the solution.
pub fn analysis_problem(
    sys: &LpjfSystem,
    supply: &QuadraticSupply,
    lifted: &LiftedData,
) -> (SdpBuilder, crate::sdp::VarRef) {
    let n = sys.n();
    let n_wd = sys.n_wd();
    let m_e = supply.m_e();
    let m_c = lifted.c_hat.nrows();
    let m_b = lifted.b_hat.ncols();

    let sd_cd = &supply.s_d * &sys.c_d;
    let q_row = symmetrize(
        &(&supply.q_d + &supply.s_d * &sys.d_d + sys.d_d.transpose() * supply.s_d.transpose()),
    );
    let ed_cd = &supply.e_d * &sys.c_d;
    let ed_dd = &supply.e_d * &sys.d_d;
    let pi_d = supply.pi_d.clone();
    let c_ad = &lifted.c_hat * &sys.a_d;
    let c_bd = &lifted.c_hat * &sys.b_d;
    let a_ad = &lifted.a_hat * &sys.a_d;
    let a_bd = &lifted.a_hat * &sys.b_d;
    let b_hat = lifted.b_hat.clone();

    let i_mc = Matrix::identity(m_c, m_c);
    let i_mb = Matrix::identity(m_b, m_b);

    let mut builder = SdpBuilder::new();
    let p_var = builder.sym_var(n);
    builder.add_block(move |a| {
        let p = a.get(p_var);
        let p_aad = &p * &a_ad;
        let p_abd = &p * &a_bd;
        let p_bhat = &p * &b_hat;
        let z16 = Matrix::zeros(n, m_b);
        let z26 = Matrix::zeros(n_wd, m_b);
        let z34 = Matrix::zeros(m_e, m_c);
        let z35 = Matrix::zeros(m_e, n);
        let z36 = Matrix::zeros(m_e, m_b);
        let z45 = Matrix::zeros(m_c, n);
        let z46 = Matrix::zeros(m_c, m_b);
        let r1c2 = sd_cd.transpose();
        let r1c3 = ed_cd.transpose();
        let r1c4 = c_ad.transpose();
        let r1c5 = p_aad.transpose();
        let r2c3 = ed_dd.transpose();
        let r2c4 = c_bd.transpose();
        let r2c5 = p_abd.transpose();
        let r5c6 = p_bhat.clone();
        let r6c5 = p_bhat.transpose();
        block(&[
            &[&p, &r1c2, &r1c3, &r1c4, &r1c5, &z16],
            &[&sd_cd, &q_row, &r2c3, &r2c4, &r2c5, &z26],
            &[&ed_cd, &ed_dd, &pi_d, &z34, &z35, &z36],
            &[&c_ad, &c_bd, &z34.transpose(), &i_mc, &z45, &z46],
            &[&p_aad, &p_abd, &z35.transpose(), &z45.transpose(), &p, &r5c6],
            &[&z16.transpose(), &z26.transpose(), &z36.transpose(), &z46.transpose(), &r6c5, &i_mb],
        ])
    });
    (builder, p_var)
}

/// A feasible analysis outcome: the end-of-period storage matrix and the
/// strictness margins behind it.
#[derive(Debug, Clone)]
pub struct AnalysisCertificate {
    pub p_h: Matrix,
    pub margin: f64,
    pub invertibility_certificate: f64,
}

/// Decide dissipativity of the system against the supply. Infeasibility
/// is an error carrying the achieved margin; structural failures (M2 not
/// positive definite, near-singular flow lifting) are distinct errors.
pub fn check_dissipative(
    sys: &LpjfSystem,
    supply: &QuadraticSupply,
    opts: &AnalysisOptions,
) -> Result<AnalysisCertificate, Error> {
    let lifted = lifted_data(sys, supply, opts)?;
    let (builder, p_var) = analysis_problem(sys, supply, &lifted);
    let problem = builder.build();
    let sol = solve_feasibility(&problem, &opts.sdp);
    match sol.status {
        SdpStatus::Feasible => Ok(AnalysisCertificate {
            p_h: symmetrize(&builder.value(&sol.x, p_var)),
            margin: sol.margin,
            invertibility_certificate: lifted.invertibility_certificate,
        }),
        SdpStatus::Marginal | SdpStatus::Infeasible => Err(Error::Infeasible {
            margin: sol.margin,
        }),
        SdpStatus::SolverFailure => Err(Error::SolverFailure {
            reason: String::from("analysis LMI solve did not converge"),
        }),
    }
}

/// Evaluate the analysis LMI at a given end-of-period storage candidate:
/// returns the minimum eigenvalue across blocks and the magnitude of the
/// assembled blocks. A candidate certifies the system when the margin is
/// nonnegative up to roundoff relative to the scale; unlike a fresh
/// solve, the evaluation works even for nearly singular certificates
/// that an interior-point method cannot re-discover.
pub fn evaluate_certificate(
    sys: &LpjfSystem,
    supply: &QuadraticSupply,
    p_h: &Matrix,
    opts: &AnalysisOptions,
) -> Result<(f64, f64), Error> {
    let lifted = lifted_data(sys, supply, opts)?;
    if p_h.nrows() != lifted.n || p_h.ncols() != lifted.n {
        return Err(Error::Dimension {
            context: "storage candidate",
            expected: (lifted.n, lifted.n),
            got: (p_h.nrows(), p_h.ncols()),
        });
    }
    let (builder, p_var) = analysis_problem(sys, supply, &lifted);
    let problem = builder.build();
    let mut x = alloc::vec![0.0; problem.n_vars];
    for i in 0..lifted.n {
        for j in i..lifted.n {
            x[p_var.scalar_index(i, j)] = p_h[(i, j)];
        }
    }
    let margin = crate::sdp::problem_margin(&problem, &x);
    let scale = problem
        .blocks
        .iter()
        .map(|b| max_abs(&b.at(&x)))
        .fold(1.0f64, f64::max);
    Ok((margin, scale))
}

/// Storage matrix at timer value τ ∈ [0, h], expanded from P(h) through
/// the Hamiltonian flow: P(τ) = (F21(s) + F22(s) P_h)(F11(s) + F12(s) P_h)⁻¹
/// at s = h - τ. τ = 0 gives the post-jump limit P(0+). Evaluated by
/// composing short-range transitions, which is the same map with a far
/// smaller internal dynamic range.
pub fn p_of_tau(lifted: &LiftedData, p_h: &Matrix, tau: f64) -> Result<Matrix, Error> {
    let s = lifted.h - tau;
    let steps = step_count(&lifted.hamiltonian, s);
    let f = flow_transition(&lifted.hamiltonian, s / steps as f64, lifted.n);
    let mut p = p_h.clone();
    for _ in 0..steps {
        p = mobius_step(&f, &p)?;
    }
    Ok(p)
}

/// Independent re-verification of a storage certificate on a τ-grid.
#[derive(Debug, Clone)]
pub struct DlmiReport {
    /// max over the grid of the Riccati residual, relative to the local
    /// magnitude of the equation's terms.
    pub max_flow_residual: f64,
    /// Largest eigenvalue violation of the jump inequality (0 when it
    /// holds).
    pub jump_violation: f64,
    /// min over the grid of the smallest eigenvalue of P(τ).
    pub min_p_eigenvalue: f64,
    pub grid: usize,
}

pub fn verify_dlmi(
    sys: &LpjfSystem,
    supply: &QuadraticSupply,
    p_h: &Matrix,
    grid: usize,
) -> Result<DlmiReport, Error> {
    let opts = AnalysisOptions::default();
    let lifted = lifted_data(sys, supply, &opts)?;
    let mb = &lifted.m;
    let h = sys.h;
    let a = &sys.a_c;
    let b = &sys.b_c;
    let n = lifted.n;
    let h_mat = &lifted.hamiltonian;
    let grid = grid.max(1);

    // Claimed storage at the grid points: one downward sweep of
    // short-range transitions from P(h), so each value carries only the
    // local dynamic range instead of exp(|H| h).
    let delta = h / grid as f64;
    let sub = step_count(h_mat, delta);
    let f_sub = flow_transition(h_mat, delta / sub as f64, n);
    let mut claimed: Vec<Matrix> = (0..=grid).map(|_| p_h.clone()).collect();
    let mut p_sweep = p_h.clone();
    for j in (0..grid).rev() {
        for _ in 0..sub {
            p_sweep = mobius_step(&f_sub, &p_sweep)?;
        }
        claimed[j] = p_sweep.clone();
    }

    // Derivative stencils lean on the group property
    // P(τ + d) = transition(-d) acting on P(τ), so every evaluation is a
    // single short step off an already-computed grid value.
    let d1 = h / 1024.0;
    let stencil = |d: f64| -> (
        (Matrix, Matrix, Matrix, Matrix),
        (Matrix, Matrix, Matrix, Matrix),
    ) {
        (flow_transition(h_mat, -d, n), flow_transition(h_mat, d, n))
    };
    let diff = |fwd_bwd: &(
        (Matrix, Matrix, Matrix, Matrix),
        (Matrix, Matrix, Matrix, Matrix),
    ),
                p_c: &Matrix,
                d: f64|
     -> Result<Matrix, Error> {
        let pp = mobius_step(&fwd_bwd.0, p_c)?;
        let pm = mobius_step(&fwd_bwd.1, p_c)?;
        Ok((pp - pm) / (2.0 * d))
    };
    let s1 = stencil(d1);
    let s2 = stencil(d1 / 2.0);

    let mut max_residual = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for j in 0..=grid {
        let tau = h * j as f64 / grid as f64;
        let p = &claimed[j];
        min_eig = min_eig.min(sym_eig_min(p));

        // Keep the stencil inside [0, h]; only the endpoints shift.
        let tau_c = tau.max(d1).min(h - d1);
        let p_c = if tau_c == tau {
            p.clone()
        } else {
            mobius_step(&flow_transition(h_mat, tau - tau_c, n), p)?
        };

        let pb_m3 = &p_c * b - &mb.m3;
        let m2_term = solve(&mb.m2, &pb_m3.transpose()).ok_or(Error::Singular {
            context: "flow supply input weight",
        })?;
        let drift = a.transpose() * &p_c + &p_c * a;
        let quad = &pb_m3 * m2_term;
        let scale = max_abs(&drift)
            .max(max_abs(&mb.m1))
            .max(max_abs(&quad))
            .max(max_abs(&p_c))
            .max(1.0);

        // Richardson-extrapolated central difference. The first pair uses
        // the shared stencils; certificates with fast boundary layers get
        // further halving until the extrapolation pair agrees to well
        // under the reporting tolerance (or stops improving, once
        // roundoff dominates and the best pair wins).
        let goal = 3e-7 * scale;
        let mut coarse = diff(&s1, &p_c, d1)?;
        let mut fine = diff(&s2, &p_c, d1 / 2.0)?;
        let mut agreement = max_abs(&(&fine - &coarse));
        let mut best = (
            (fine.clone() * 4.0 - &coarse) / 3.0,
            agreement,
        );
        let mut d = d1 / 2.0;
        for _ in 0..40 {
            if agreement <= goal {
                break;
            }
            d /= 2.0;
            coarse = fine;
            fine = diff(&stencil(d), &p_c, d)?;
            agreement = max_abs(&(&fine - &coarse));
            if agreement < best.1 {
                best = ((fine.clone() * 4.0 - &coarse) / 3.0, agreement);
            } else if agreement > 4.0 * best.1 {
                break;
            }
        }
        let p_dot = best.0;

        let residual = &p_dot + &drift - &mb.m1 + &quad;
        max_residual = max_residual.max(max_abs(&residual) / scale);
    }

    // Jump inequality at the period boundary, using the post-jump storage.
    let p0 = claimed[0].clone();
    let n = sys.n();
    let n_wd = sys.n_wd();
    let adbd = block(&[&[&sys.a_d, &sys.b_d]]);
    let lhs_gain = adbd.transpose() * &p0 * &adbd;
    let mut lhs = lhs_gain;
    for i in 0..n {
        for k in 0..n {
            lhs[(i, k)] -= p_h[(i, k)];
        }
    }
    let sel = block(&[
        &[&Matrix::zeros(n_wd, n), &Matrix::identity(n_wd, n_wd)],
        &[&sys.c_d, &sys.d_d],
    ]);
    let w_d = crate::supply::jump_weight(supply);
    let rhs = sel.transpose() * w_d * sel;
    let jump_scale = max_abs(&rhs).max(max_abs(p_h)).max(1.0);
    let gap = symmetrize(&(lhs - rhs));
    let eigs = sym_eigenvalues(&gap);
    let jump_violation = eigs.last().copied().unwrap_or(0.0).max(0.0) / jump_scale;

    Ok(DlmiReport {
        max_flow_residual: max_residual,
        jump_violation,
        min_p_eigenvalue: min_eig,
        grid,
    })
}

/// Result of the gain bisection: the bound and the certificate at it.
#[derive(Debug, Clone)]
pub struct HinfResult {
    pub gamma: f64,
    pub certificate: AnalysisCertificate,
}

fn hinf_feasible(
    sys: &LpjfSystem,
    gamma: f64,
    opts: &AnalysisOptions,
) -> Result<Option<AnalysisCertificate>, Error> {
    let supply = crate::supply::supply_hinf(gamma, sys.n_wc(), sys.n_zc(), sys.n_wd(), sys.n_zd());
    match check_dissipative(sys, &supply, opts) {
        Ok(cert) => Ok(Some(cert)),
        Err(Error::Infeasible { .. })
        | Err(Error::M2NotPositiveDefinite { .. })
        | Err(Error::F11NearSingular { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Smallest γ (to 0.1% relative accuracy) making the system dissipative
/// for the gain supply: the induced L2/l2 gain bound. Requires the
/// autonomous loop to be exponentially stable.
pub fn hinf_norm(sys: &LpjfSystem, opts: &AnalysisOptions) -> Result<HinfResult, Error> {
    sys.validate()?;
    let rho = spectral_radius(&monodromy(sys));
    if !is_ges(sys, None) {
        return Err(Error::NotGes {
            gamma_max: 0.0,
            spectral_radius: rho,
        });
    }

    let gamma_max = 1e6;
    let mut lo = crate::numerics::max_singular_value(&sys.d_c)
        .max(crate::numerics::max_singular_value(&sys.d_d));
    let mut hi = (2.0 * lo).max(1.0);
    let mut best = loop {
        if let Some(cert) = hinf_feasible(sys, hi, opts)? {
            break cert;
        }
        lo = lo.max(hi);
        hi *= 4.0;
        if hi > gamma_max {
            return Err(Error::NotGes {
                gamma_max,
                spectral_radius: rho,
            });
        }
    };

    while hi - lo > 1e-3 * hi + 1e-12 {
        let mid = 0.5 * (hi + lo);
        match hinf_feasible(sys, mid, opts)? {
            Some(cert) => {
                best = cert;
                hi = mid;
            }
            None => lo = mid,
        }
    }

    // Coherence: the bound must stay feasible with twice the budget.
    if hinf_feasible(sys, 2.0 * hi, opts)?.is_none() {
        return Err(Error::SolverFailure {
            reason: String::from("gain bound failed the doubled-budget recheck"),
        });
    }

    Ok(HinfResult {
        gamma: hi,
        certificate: best,
    })
}

/// Dissipation check along simulated trajectories.
#[derive(Debug, Clone)]
pub struct TrajectoryReport {
    /// min over ordered evaluation-point pairs (i before j) of
    /// (V_i - C_i) - (V_j - C_j), normalized; nonnegative (up to
    /// tolerance) when the dissipation inequality holds.
    pub worst_slack: f64,
    pub n_points: usize,
}

/// Deterministic xorshift generator for excitation signals.
struct Prng(u64);

impl Prng {
    fn new(seed: u64) -> Self {
        Prng(seed.max(1))
    }
    fn next_unit(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        let v = self.0.wrapping_mul(0x2545F4914F6CDD1D);
        ((v >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
    }
    fn vector(&mut self, n: usize) -> Matrix {
        Matrix::from_fn(n, 1, |_, _| self.next_unit())
    }
}

/// Simulate the jump-flow system under piecewise-constant random
/// excitation and check V(t_j) - V(t_i) ≤ ∫ s_c + Σ s_d over every
/// ordered pair of evaluation points. The flow integral is computed in
/// closed form per subinterval, so the check is exact up to storage
/// reconstruction and floating point.
pub fn trajectory_check(
    sys: &LpjfSystem,
    supply: &QuadraticSupply,
    p_h: &Matrix,
    periods: usize,
    subdiv: usize,
    seed: u64,
) -> Result<TrajectoryReport, Error> {
    check_channels(sys, supply)?;
    let opts = AnalysisOptions::default();
    let lifted = lifted_data(sys, supply, &opts)?;
    let n = sys.n();
    let n_wc = sys.n_wc();
    let n_wd = sys.n_wd();
    let delta = sys.h / subdiv as f64;

    // Storage matrices at the subgrid points (shared across periods).
    let mut p_grid = Vec::with_capacity(subdiv + 1);
    for j in 0..=subdiv {
        p_grid.push(p_of_tau(&lifted, p_h, delta * j as f64)?);
    }

    // One-subinterval state transition [Phi, Gamma] under constant w_c.
    let aug = block(&[
        &[&sys.a_c, &sys.b_c],
        &[&Matrix::zeros(n_wc, n), &Matrix::zeros(n_wc, n_wc)],
    ]);
    let e_aug = expm(&(&aug * delta));
    let phi = e_aug.view((0, 0), (n, n)).into_owned();
    let gamma = e_aug.view((0, n), (n, n_wc)).into_owned();

    // Exact flow-supply integral over one subinterval: a quadratic form
    // W in (xi0, w), via the standard block-exponential quadrature.
    let m_tilde = block(&[
        &[&lifted.m.m1, &lifted.m.m3],
        &[&lifted.m.m3.transpose(), &lifted.m.m2],
    ]);
    let na = n + n_wc;
    let quad = block(&[
        &[&(-aug.transpose()), &m_tilde],
        &[&Matrix::zeros(na, na), &aug],
    ]);
    let e_quad = expm(&(quad * delta));
    let f12q = e_quad.view((0, na), (na, na)).into_owned();
    let f22q = e_quad.view((na, na), (na, na)).into_owned();
    let w_quad = symmetrize(&(f22q.transpose() * f12q));

    let mut rng = Prng::new(seed);
    let mut xi = rng.vector(n);
    let mut cumulative = 0.0f64;
    let mut g_values: Vec<f64> = Vec::new();
    let mut v_scale = 1.0f64;

    let push_point = |v: f64, c: f64, g: &mut Vec<f64>, scale: &mut f64| {
        g.push(v - c);
        *scale = scale.max(Float::abs(v));
    };

    for _ in 0..periods {
        // Pre-jump point (timer at h).
        let v_pre = (xi.transpose() * p_h * &xi)[(0, 0)];
        push_point(v_pre, cumulative, &mut g_values, &mut v_scale);

        // Jump: output reads the pre-jump state.
        let w_d = rng.vector(n_wd);
        let z_d = &sys.c_d * &xi + &sys.d_d * &w_d;
        cumulative += supply.jump_value(&w_d, &z_d);
        xi = &sys.a_d * &xi + &sys.b_d * &w_d;
        let v_post = (xi.transpose() * &p_grid[0] * &xi)[(0, 0)];
        push_point(v_post, cumulative, &mut g_values, &mut v_scale);

        // Flow subintervals with constant w_c.
        for j in 0..subdiv {
            let w_c = rng.vector(n_wc);
            let chi = block(&[&[&xi], &[&w_c]]);
            cumulative += (chi.transpose() * &w_quad * &chi)[(0, 0)];
            xi = &phi * &xi + &gamma * &w_c;
            let v = (xi.transpose() * &p_grid[j + 1] * &xi)[(0, 0)];
            push_point(v, cumulative, &mut g_values, &mut v_scale);
        }
    }

    // worst over pairs i < j of g_i - g_j, via a suffix maximum.
    let mut worst = f64::INFINITY;
    let mut suffix_max = f64::NEG_INFINITY;
    for i in (0..g_values.len()).rev() {
        if suffix_max > f64::NEG_INFINITY {
            worst = worst.min(g_values[i] - suffix_max);
        }
        suffix_max = suffix_max.max(g_values[i]);
    }
    let worst_slack = if g_values.len() < 2 {
        0.0
    } else {
        worst / v_scale
    };

    Ok(TrajectoryReport {
        worst_slack,
        n_points: g_values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supply::{supply_hinf, supply_passivity};
    use approx::assert_abs_diff_eq;

    /// Scalar flow x' = -x + w, z = x, identity jump, no jump channels.
    fn scalar_system() -> LpjfSystem {
        LpjfSystem {
            h: 1.0,
            a_c: Matrix::from_row_slice(1, 1, &[-1.0]),
            b_c: Matrix::from_row_slice(1, 1, &[1.0]),
            c_c: Matrix::from_row_slice(1, 1, &[1.0]),
            d_c: Matrix::from_row_slice(1, 1, &[0.0]),
            a_d: Matrix::identity(1, 1),
            b_d: Matrix::zeros(1, 0),
            c_d: Matrix::zeros(0, 1),
            d_d: Matrix::zeros(0, 0),
        }
    }

    /// Two-state oscillatory flow with mixed channels on both to exercise
    /// every block of the analysis LMI.
    fn two_state_system() -> LpjfSystem {
        LpjfSystem {
            h: 0.7,
            a_c: Matrix::from_row_slice(2, 2, &[-0.2, 1.0, -1.0, -0.2]),
            b_c: Matrix::from_row_slice(2, 1, &[1.0, 0.3]),
            c_c: Matrix::from_row_slice(1, 2, &[1.0, 0.2]),
            d_c: Matrix::from_row_slice(1, 1, &[0.1]),
            a_d: Matrix::from_row_slice(2, 2, &[0.9, 0.05, 0.0, 0.8]),
            b_d: Matrix::from_row_slice(2, 1, &[0.1, 0.2]),
            c_d: Matrix::from_row_slice(1, 2, &[0.3, -0.1]),
            d_d: Matrix::from_row_slice(1, 1, &[0.05]),
        }
    }

    /// Pure discrete gain: no flow channels, jump output 0.5 w_d.
    fn discrete_gain_system() -> LpjfSystem {
        LpjfSystem {
            h: 1.0,
            a_c: Matrix::zeros(1, 1),
            b_c: Matrix::zeros(1, 0),
            c_c: Matrix::zeros(0, 1),
            d_c: Matrix::zeros(0, 0),
            a_d: Matrix::zeros(1, 1),
            b_d: Matrix::from_row_slice(1, 1, &[1.0]),
            c_d: Matrix::zeros(1, 1),
            d_d: Matrix::from_row_slice(1, 1, &[0.5]),
        }
    }

    #[test]
    fn scalar_hamiltonian_matches_hand_computation() {
        let sys = scalar_system();
        let supply = supply_hinf(2.0, 1, 1, 0, 0);
        let h = hamiltonian(&sys, &supply).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.5, 1.0]);
        assert!(max_abs(&(h - expected)) < 1e-14);
    }

    #[test]
    fn scalar_gain_is_one() {
        let sys = scalar_system();
        let result = hinf_norm(&sys, &AnalysisOptions::default()).unwrap();
        assert_abs_diff_eq!(result.gamma, 1.0, epsilon = 1e-3);
        assert!(result.certificate.margin > 0.0);
    }

    #[test]
    fn discrete_gain_is_half() {
        let sys = discrete_gain_system();
        let result = hinf_norm(&sys, &AnalysisOptions::default()).unwrap();
        assert_abs_diff_eq!(result.gamma, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn below_gain_is_infeasible() {
        let sys = scalar_system();
        let supply = supply_hinf(0.9, 1, 1, 0, 0);
        let err = check_dissipative(&sys, &supply, &AnalysisOptions::default());
        assert!(matches!(err, Err(Error::Infeasible { .. })));
    }

    #[test]
    fn unstable_loop_is_rejected() {
        let mut sys = scalar_system();
        sys.a_c[(0, 0)] = 0.1;
        let err = hinf_norm(&sys, &AnalysisOptions::default());
        assert!(matches!(err, Err(Error::NotGes { .. })));
    }

    /// First-order lag with small feedthrough is passive; removing the
    /// feedthrough makes the flow supply degenerate, which must surface
    /// as the structured M2 error rather than a wrong verdict.
    #[test]
    fn lag_with_feedthrough_is_passive() {
        let mut sys = scalar_system();
        sys.d_c[(0, 0)] = 0.01;
        let supply = supply_passivity(1, 0);
        let cert = check_dissipative(&sys, &supply, &AnalysisOptions::default()).unwrap();
        assert!(cert.margin > 0.0);

        let mut degenerate = scalar_system();
        degenerate.d_c[(0, 0)] = 0.0;
        let err = check_dissipative(&degenerate, &supply, &AnalysisOptions::default());
        assert!(matches!(err, Err(Error::M2NotPositiveDefinite { .. })));
    }

    #[test]
    fn feasibility_monotone_in_gamma() {
        let sys = two_state_system();
        let result = hinf_norm(&sys, &AnalysisOptions::default()).unwrap();
        let supply = supply_hinf(2.0 * result.gamma, 1, 1, 1, 1);
        check_dissipative(&sys, &supply, &AnalysisOptions::default()).unwrap();
        let tight = supply_hinf(0.5 * result.gamma, 1, 1, 1, 1);
        assert!(check_dissipative(&sys, &tight, &AnalysisOptions::default()).is_err());
    }

    /// Integrate the flow Riccati equation with Runge-Kutta from the
    /// post-jump storage forward in τ; it must land on P(h) and agree
    /// along the way with the Hamiltonian-flow reconstruction.
    #[test]
    fn storage_propagation_matches_runge_kutta() {
        for (sys, gamma) in [(scalar_system(), 2.0), (two_state_system(), 3.0)] {
            let supply = supply_hinf(gamma, sys.n_wc(), sys.n_zc(), sys.n_wd(), sys.n_zd());
            let opts = AnalysisOptions::default();
            let cert = check_dissipative(&sys, &supply, &opts).unwrap();
            let lifted = lifted_data(&sys, &supply, &opts).unwrap();
            let mb = &lifted.m;

            let rhs = |p: &Matrix| -> Matrix {
                let pb_m3 = p * &sys.b_c - &mb.m3;
                let m2s = solve(&mb.m2, &pb_m3.transpose()).unwrap();
                -(sys.a_c.transpose() * p + p * &sys.a_c - &mb.m1 + &pb_m3 * m2s)
            };

            let steps = 2000;
            let dt = sys.h / steps as f64;
            let mut p = p_of_tau(&lifted, &cert.p_h, 0.0).unwrap();
            let mut max_err = 0.0f64;
            for k in 0..steps {
                let k1 = rhs(&p);
                let k2 = rhs(&(&p + &k1 * (dt / 2.0)));
                let k3 = rhs(&(&p + &k2 * (dt / 2.0)));
                let k4 = rhs(&(&p + &k3 * dt));
                p = &p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
                let tau = dt * (k + 1) as f64;
                let p_ref = p_of_tau(&lifted, &cert.p_h, tau).unwrap();
                max_err = max_err.max(max_abs(&(&p - p_ref)));
            }
            let scale = max_abs(&cert.p_h).max(1.0);
            assert!(
                max_err <= 1e-7 * scale,
                "rk4 deviation {max_err:.3e} (scale {scale:.3e})"
            );
            assert!(max_abs(&(&p - &cert.p_h)) <= 1e-7 * scale);
        }
    }

    #[test]
    fn certificates_verify_on_grid() {
        for (sys, gamma) in [(scalar_system(), 1.5), (two_state_system(), 3.0)] {
            let supply = supply_hinf(gamma, sys.n_wc(), sys.n_zc(), sys.n_wd(), sys.n_zd());
            let opts = AnalysisOptions::default();
            let cert = check_dissipative(&sys, &supply, &opts).unwrap();
            let report = verify_dlmi(&sys, &supply, &cert.p_h, 64).unwrap();
            assert!(
                report.max_flow_residual <= 1e-6,
                "flow residual {:.3e}",
                report.max_flow_residual
            );
            assert!(
                report.jump_violation <= 1e-8,
                "jump violation {:.3e}",
                report.jump_violation
            );
            assert!(report.min_p_eigenvalue > 0.0);
        }
    }

    #[test]
    fn trajectories_respect_dissipation() {
        for (sys, gamma) in [(scalar_system(), 1.5), (two_state_system(), 3.0)] {
            let supply = supply_hinf(gamma, sys.n_wc(), sys.n_zc(), sys.n_wd(), sys.n_zd());
            let opts = AnalysisOptions::default();
            let cert = check_dissipative(&sys, &supply, &opts).unwrap();
            let report =
                trajectory_check(&sys, &supply, &cert.p_h, 20, 8, 0x5EED).unwrap();
            assert!(
                report.worst_slack >= -1e-8,
                "slack {:.3e}",
                report.worst_slack
            );
            assert!(report.n_points > 20 * 9);
        }
    }

    /// Reconstruction identities of the lifted flow data against the raw
    /// matrix exponential blocks.
    #[test]
    fn lifting_identities_hold() {
        for (sys, gamma) in [
            (scalar_system(), 2.0),
            (two_state_system(), 3.0),
            (discrete_gain_system(), 1.0),
        ] {
            let supply = supply_hinf(gamma, sys.n_wc(), sys.n_zc(), sys.n_wd(), sys.n_zd());
            let opts = AnalysisOptions::default();
            let lifted = lifted_data(&sys, &supply, &opts).unwrap();
            let (f11, f12, f21, _) =
                flow_transition(&lifted.hamiltonian, sys.h, sys.n());
            let scale = max_abs(&f11).max(max_abs(&f12)).max(max_abs(&f21)).max(1.0);
            let id_err = max_abs(&(&f11 * &lifted.a_hat - Matrix::identity(sys.n(), sys.n())));
            let b_err = max_abs(&(&f11 * (&lifted.b_hat * lifted.b_hat.transpose()) + &f12));
            let c_err =
                max_abs(&((lifted.c_hat.transpose() * &lifted.c_hat) * &f11 - &f21));
            assert!(id_err <= 1e-8 * scale, "a_hat identity {id_err:.3e}");
            assert!(b_err <= 1e-8 * scale, "b_hat identity {b_err:.3e}");
            assert!(c_err <= 1e-8 * scale, "c_hat identity {c_err:.3e}");
        }
    }

    #[test]
    fn channel_mismatch_is_reported() {
        let sys = scalar_system();
        let supply = supply_hinf(2.0, 2, 1, 0, 0);
        assert!(matches!(
            check_dissipative(&sys, &supply, &AnalysisOptions::default()),
            Err(Error::Dimension { .. })
        ));
    }
}

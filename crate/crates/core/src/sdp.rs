//! Small dense semidefinite programming layer.
//!
//! Problems are lists of affine matrix blocks F0 + Σ x_i F_i that must be
//! positive semidefinite. Feasibility is decided by maximizing a uniform
//! slack t over all blocks (every block must dominate t·I), which always
//! admits a strictly feasible starting point and therefore needs no
//! separate phase-1; a linear objective can be minimized once a strictly
//! feasible point is known. The solver is a plain log-det barrier
//! path-following method with damped Newton centering: the problems this
//! crate produces are small (at most a few hundred scalar variables and
//! block dimensions below one hundred), dense, and must solve
//! deterministically, which rules nothing out and keeps behavior
//! reproducible bit for bit.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;
use nalgebra::Cholesky;
use num_traits::Float;

use crate::numerics::{max_abs, symmetrize, Matrix};
use crate::Error;

/// One affine constraint block F0 + Σ x_i F_i ⪰ 0.
///
/// Coefficients are stored sparsely as (variable index, matrix) pairs;
/// variables with an identically zero coefficient are omitted.
#[derive(Debug, Clone)]
pub struct AffineBlock {
    pub f0: Matrix,
    pub coeffs: Vec<(usize, Matrix)>,
}

impl AffineBlock {
    pub fn dim(&self) -> usize {
        self.f0.nrows()
    }

    /// Evaluate the block at x.
    pub fn at(&self, x: &[f64]) -> Matrix {
        let mut g = self.f0.clone();
        for (i, f) in &self.coeffs {
            g += f * x[*i];
        }
        g
    }
}

/// A feasibility or minimization problem over scalarized variables.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub n_vars: usize,
    pub blocks: Vec<AffineBlock>,
}

/// Verdict of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// A point with margin strictly above the requested strictness exists
    /// and is returned.
    Feasible,
    /// The optimum margin is positive but cannot be separated from the
    /// strictness threshold; treated as infeasible by callers that need
    /// strict certificates.
    Marginal,
    Infeasible,
    SolverFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<f64>,
    /// Minimum eigenvalue over all blocks at x (+inf when every block is
    /// empty): the largest t with every block ⪰ t·I.
    pub margin: f64,
    pub objective_value: Option<f64>,
    pub newton_iterations: usize,
}

/// Solver knobs. The defaults suit every problem built in this crate.
#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Required strictness: feasible means margin > strict_margin. When
    /// `None`, 1e-7 scaled by the largest constant-block entry is used.
    pub strict_margin: Option<f64>,
    /// Cap on the slack variable during feasibility solves; keeps the
    /// margin maximization bounded on homogeneous problems.
    pub slack_cap: f64,
    /// Box |x_i| ≤ radius keeping barrier subproblems compact.
    pub box_radius: f64,
    /// Barrier parameter growth per stage.
    pub mu: f64,
    /// Hard cap on Newton iterations across all stages.
    pub max_newton: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            strict_margin: None,
            slack_cap: 1e3,
            box_radius: 1e9,
            mu: 10.0,
            max_newton: 20000,
        }
    }
}

/// Newton iterations allowed per centering stage. Hitting the cap leaves
/// the stage inexactly centered, which the next stage absorbs; verdicts
/// never rely on centering quality because margins are recomputed.
const STAGE_NEWTON_CAP: usize = 600;

fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            s += a[(r, c)] * b[(c, r)];
        }
    }
    s
}

/// Internal barrier state over an extended variable vector.
struct Barrier<'a> {
    blocks: &'a [AffineBlock],
    n: usize,
    /// Total barrier degree (sum of block dimensions).
    nu: f64,
}

impl<'a> Barrier<'a> {
    fn new(blocks: &'a [AffineBlock], n: usize) -> Self {
        let nu = blocks.iter().map(|b| b.dim()).sum::<usize>() as f64;
        Barrier {
            blocks,
            n,
            nu: nu.max(1.0),
        }
    }

    /// -Σ log det G_b(w); None outside the interior.
    fn value(&self, w: &[f64]) -> Option<f64> {
        let mut phi = 0.0;
        for b in self.blocks {
            if b.dim() == 0 {
                continue;
            }
            let g = symmetrize(&b.at(w));
            let chol = Cholesky::new(g)?;
            for i in 0..b.dim() {
                let d = chol.l_dirty()[(i, i)];
                if !(d > 0.0) {
                    return None;
                }
                phi -= 2.0 * Float::ln(d);
            }
        }
        Some(phi)
    }

    /// Gradient and Hessian of the barrier at an interior point.
    fn derivatives(&self, w: &[f64]) -> Option<(Vec<f64>, Matrix)> {
        let mut grad = vec![0.0; self.n];
        let mut hess = Matrix::zeros(self.n, self.n);
        for b in self.blocks {
            let d = b.dim();
            if d == 0 {
                continue;
            }
            let g = symmetrize(&b.at(w));
            let ginv = Cholesky::new(g)?.inverse();
            let s: Vec<(usize, Matrix)> = b
                .coeffs
                .iter()
                .map(|(i, f)| (*i, &ginv * f))
                .collect();
            for (i, si) in &s {
                grad[*i] -= si.trace();
            }
            for a in 0..s.len() {
                for bb in a..s.len() {
                    let (i, si) = &s[a];
                    let (j, sj) = &s[bb];
                    let v = trace_product(si, sj);
                    hess[(*i, *j)] += v;
                    if i != j {
                        hess[(*j, *i)] += v;
                    }
                }
            }
        }
        Some((grad, hess))
    }
}

/// Damped-Newton centering of eta·c'w + barrier, in place.
/// Returns Newton iterations spent or an error string.
fn center(
    barrier: &Barrier,
    c: &[f64],
    eta: f64,
    w: &mut [f64],
    iter_budget: usize,
) -> Result<usize, String> {
    let mut spent = 0;
    let mut no_progress = 0usize;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    loop {
        if spent >= iter_budget {
            // Inexact centering: the next stage recenters, and every
            // verdict is classified on the recomputed margin.
            return Ok(spent);
        }
        let (gphi, hess) = barrier
            .derivatives(w)
            .ok_or_else(|| String::from("iterate left the interior"))?;
        let grad: Vec<f64> = gphi.iter().zip(c).map(|(g, ci)| g + eta * ci).collect();
        // Newton solve with adaptive ridge.
        let mut ridge = 0.0;
        let diag_scale = (0..barrier.n)
            .map(|i| Float::abs(hess[(i, i)]))
            .fold(0.0f64, f64::max)
            .max(1.0);
        let step = loop {
            let mut h = hess.clone();
            for i in 0..barrier.n {
                h[(i, i)] += ridge;
            }
            if let Some(chol) = Cholesky::new(h) {
                let rhs =
                    Matrix::from_fn(barrier.n, 1, |i, _| -grad[i]);
                let sol = chol.solve(&rhs);
                break (0..barrier.n).map(|i| sol[(i, 0)]).collect::<Vec<f64>>();
            }
            ridge = if ridge == 0.0 {
                1e-14 * diag_scale
            } else {
                ridge * 100.0
            };
            if ridge > 1e12 * diag_scale {
                return Err(String::from("newton system not positive definite"));
            }
        };
        spent += 1;

        let dec2 = -dot(&step, &grad);
        #[cfg(test)]
        if std::env::var_os("SDP_TRACE").is_some() && spent % 400 == 0 {
            let stepnorm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            std::eprintln!(
                "    [center] spent {spent} eta {eta:.1e} dec2 {dec2:.3e} ridge {ridge:.2e} |step| {stepnorm:.3e}"
            );
        }
        if dec2 <= 1e-11 * (1.0 + Float::abs(eta)) {
            return Ok(spent);
        }

        // Backtracking line search: stay interior, then Armijo.
        let f0 = eta * dot(c, w) + barrier.value(w).ok_or("left interior")?;
        let slope = dot(&grad, &step);
        let mut alpha = 1.0;
        let mut achieved = None;
        for _ in 0..80 {
            let trial: Vec<f64> = w
                .iter()
                .zip(&step)
                .map(|(wi, si)| wi + alpha * si)
                .collect();
            if let Some(phi) = barrier.value(&trial) {
                let f1 = eta * dot(c, &trial) + phi;
                if f1 <= f0 + 0.25 * alpha * slope {
                    w.copy_from_slice(&trial);
                    achieved = Some(f0 - f1);
                    break;
                }
            }
            alpha *= 0.5;
        }
        match achieved {
            // No descent left at floating-point resolution: centered.
            None => return Ok(spent),
            Some(delta) => {
                // Accepted decreases at rounding level are jitter, not
                // progress; three in a row means the iterate is as
                // centered as f64 allows.
                if delta <= 1e-12 * (1.0 + Float::abs(f0)) {
                    no_progress += 1;
                    if no_progress >= 3 {
                        return Ok(spent);
                    }
                } else {
                    no_progress = 0;
                }
            }
        }
    }
}

fn default_strict_margin(problem: &SdpProblem, opts: &SdpOptions) -> f64 {
    opts.strict_margin.unwrap_or_else(|| {
        let scale = problem
            .blocks
            .iter()
            .map(|b| max_abs(&b.f0))
            .fold(0.0f64, f64::max)
            .max(1.0);
        1e-7 * scale
    })
}

/// Minimum eigenvalue over all blocks at x; +inf when all blocks empty.
pub fn problem_margin(problem: &SdpProblem, x: &[f64]) -> f64 {
    problem
        .blocks
        .iter()
        .map(|b| crate::numerics::sym_eig_min(&b.at(x)))
        .fold(f64::INFINITY, f64::min)
}

/// Extended blocks shared by both solve modes: the caller's blocks plus a
/// box |x_i| ≤ radius, and optionally a slack variable t (index m) with
/// every caller block shifted by -t·I and t capped.
fn extended_blocks(
    problem: &SdpProblem,
    opts: &SdpOptions,
    with_slack: bool,
) -> Vec<AffineBlock> {
    let m = problem.n_vars;
    let mut blocks = Vec::new();
    for b in &problem.blocks {
        let mut coeffs = b.coeffs.clone();
        if with_slack && b.dim() > 0 {
            coeffs.push((m, -Matrix::identity(b.dim(), b.dim())));
        }
        blocks.push(AffineBlock {
            f0: b.f0.clone(),
            coeffs,
        });
    }
    if with_slack {
        blocks.push(AffineBlock {
            f0: Matrix::from_row_slice(1, 1, &[opts.slack_cap]),
            coeffs: vec![(m, Matrix::from_row_slice(1, 1, &[-1.0]))],
        });
    }
    for i in 0..m {
        blocks.push(AffineBlock {
            f0: Matrix::from_row_slice(1, 1, &[opts.box_radius]),
            coeffs: vec![(i, Matrix::from_row_slice(1, 1, &[-1.0]))],
        });
        blocks.push(AffineBlock {
            f0: Matrix::from_row_slice(1, 1, &[opts.box_radius]),
            coeffs: vec![(i, Matrix::from_row_slice(1, 1, &[1.0]))],
        });
    }
    blocks
}

/// Decide strict feasibility of all blocks by maximizing the uniform
/// slack. Deterministic; marginal optima are reported as `Marginal` and
/// treated as infeasible by strictness-sensitive callers.
pub fn solve_feasibility(problem: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let m = problem.n_vars;
    let strict = default_strict_margin(problem, opts);

    if m == 0 {
        let margin = problem_margin(problem, &[]);
        return SdpSolution {
            status: classify(margin, strict),
            x: Vec::new(),
            margin,
            objective_value: None,
            newton_iterations: 0,
        };
    }

    let blocks = extended_blocks(problem, opts, true);
    let barrier = Barrier::new(&blocks, m + 1);

    // Strictly feasible start: x = 0, t well below every block's minimum
    // eigenvalue at zero.
    let lam0 = problem_margin(problem, &vec![0.0; m]);
    let lam0 = if lam0.is_finite() { lam0 } else { 0.0 };
    let t0 = lam0.min(opts.slack_cap) - 1.0 - 0.1 * Float::abs(lam0);
    let mut w = vec![0.0; m + 1];
    w[m] = t0;

    let mut c = vec![0.0; m + 1];
    c[m] = -1.0;

    // The margin only has to be resolved against the strictness threshold.
    let gap_req = (strict * 0.1).max(1e-13);
    let feas_target = (10.0 * strict).max(1e-4);

    let mut eta = 1.0;
    let mut spent = 0;
    loop {
        let stage_budget = STAGE_NEWTON_CAP.min(opts.max_newton.saturating_sub(spent));
        if stage_budget == 0 {
            return SdpSolution {
                status: SdpStatus::SolverFailure,
                x: w[..m].to_vec(),
                margin: problem_margin(problem, &w[..m]),
                objective_value: None,
                newton_iterations: spent,
            }
            .with_failure_reason(String::from("newton budget exhausted"));
        }
        match center(&barrier, &c, eta, &mut w, stage_budget) {
            Ok(k) => spent += k,
            Err(reason) => {
                return SdpSolution {
                    status: SdpStatus::SolverFailure,
                    x: w[..m].to_vec(),
                    margin: problem_margin(problem, &w[..m]),
                    objective_value: None,
                    newton_iterations: spent,
                }
                .with_failure_reason(reason);
            }
        }
        let gap = barrier.nu / eta;
        let margin = problem_margin(problem, &w[..m]);
        #[cfg(test)]
        if std::env::var_os("SDP_TRACE").is_some() {
            std::eprintln!(
                "  [sdp] eta {eta:.1e} spent {spent} slack {:.6e} gap {gap:.2e} margin {margin:.6e}",
                w[m]
            );
        }
        if margin > feas_target {
            return SdpSolution {
                status: SdpStatus::Feasible,
                x: w[..m].to_vec(),
                margin,
                objective_value: None,
                newton_iterations: spent,
            };
        }
        // w[m] is a certified lower bound for the optimum slack; the gap
        // bounds the distance to it from above.
        if w[m] + gap <= strict || gap <= gap_req {
            return SdpSolution {
                status: classify(margin, strict),
                x: w[..m].to_vec(),
                margin,
                objective_value: None,
                newton_iterations: spent,
            };
        }
        eta *= opts.mu;
        if eta > 1e18 {
            return SdpSolution {
                status: classify(margin, strict),
                x: w[..m].to_vec(),
                margin,
                objective_value: None,
                newton_iterations: spent,
            };
        }
    }
}

impl SdpSolution {
    fn with_failure_reason(mut self, _reason: String) -> Self {
        #[cfg(test)]
        if std::env::var_os("SDP_TRACE").is_some() {
            std::eprintln!("  [sdp] center failed: {_reason}");
        }
        self.status = SdpStatus::SolverFailure;
        self
    }
}

fn classify(margin: f64, strict: f64) -> SdpStatus {
    if margin > strict {
        SdpStatus::Feasible
    } else if margin > 0.0 {
        SdpStatus::Marginal
    } else {
        SdpStatus::Infeasible
    }
}

/// Minimize c'x over the blocks. Runs the feasibility solve first for a
/// strictly interior start; infeasibility verdicts pass through.
pub fn solve_min(problem: &SdpProblem, objective: &[f64], opts: &SdpOptions) -> SdpSolution {
    assert_eq!(
        objective.len(),
        problem.n_vars,
        "solve_min: objective length"
    );
    let phase1 = solve_feasibility(problem, opts);
    if phase1.status != SdpStatus::Feasible {
        return phase1;
    }
    let m = problem.n_vars;
    let mut w = phase1.x.clone();
    let mut spent = phase1.newton_iterations;

    let blocks = extended_blocks(problem, opts, false);
    let barrier = Barrier::new(&blocks, m);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut eta = 1.0;
    loop {
        let stage_budget = STAGE_NEWTON_CAP.min(opts.max_newton.saturating_sub(spent));
        if stage_budget == 0 {
            return SdpSolution {
                status: SdpStatus::SolverFailure,
                x: w.clone(),
                margin: problem_margin(problem, &w),
                objective_value: Some(dot(objective, &w)),
                newton_iterations: spent,
            }
            .with_failure_reason(String::from("newton budget exhausted"));
        }
        match center(&barrier, objective, eta, &mut w, stage_budget) {
            Ok(k) => spent += k,
            Err(reason) => {
                return SdpSolution {
                    status: SdpStatus::SolverFailure,
                    x: w.clone(),
                    margin: problem_margin(problem, &w),
                    objective_value: Some(dot(objective, &w)),
                    newton_iterations: spent,
                }
                .with_failure_reason(reason);
            }
        }
        // The gap bounds suboptimality; require it small relative to the
        // current objective value (which only shrinks along the path).
        let gap = barrier.nu / eta;
        if gap <= 1e-8 * dot(objective, &w).abs().max(1.0) {
            break;
        }
        // A minimizer running into the box means the problem is unbounded
        // (or scaled beyond the trust region): refuse rather than guess.
        if w.iter().any(|v| Float::abs(*v) > 0.9 * opts.box_radius) {
            return SdpSolution {
                status: SdpStatus::SolverFailure,
                x: w.clone(),
                margin: problem_margin(problem, &w),
                objective_value: Some(dot(objective, &w)),
                newton_iterations: spent,
            };
        }
        eta *= opts.mu;
        if eta > 1e18 {
            break;
        }
    }
    SdpSolution {
        status: SdpStatus::Feasible,
        x: w.clone(),
        margin: problem_margin(problem, &w),
        objective_value: Some(dot(objective, &w)),
        newton_iterations: spent,
    }
}

/// Handle to a declared matrix variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef {
    offset: usize,
    rows: usize,
    cols: usize,
    symmetric: bool,
}

impl VarRef {
    pub fn n_scalars(&self) -> usize {
        if self.symmetric {
            self.rows * (self.rows + 1) / 2
        } else {
            self.rows * self.cols
        }
    }

    /// Position of entry (r, c) in the scalarization. Symmetric variables
    /// store the upper triangle row-major, so r <= c is required there.
    pub fn scalar_index(&self, r: usize, c: usize) -> usize {
        assert!(r < self.rows && c < self.cols);
        if self.symmetric {
            assert!(r <= c, "symmetric variables store the upper triangle");
            self.offset + r * self.cols - r * (r + 1) / 2 + c
        } else {
            self.offset + r * self.cols + c
        }
    }
}

/// Values of all declared variables at a given scalarization.
pub struct Assignment<'a> {
    x: &'a [f64],
}

impl<'a> Assignment<'a> {
    /// Unpack one variable into its matrix value.
    pub fn get(&self, v: VarRef) -> Matrix {
        let mut m = Matrix::zeros(v.rows, v.cols);
        if v.symmetric {
            let mut k = v.offset;
            for i in 0..v.rows {
                for j in i..v.cols {
                    m[(i, j)] = self.x[k];
                    m[(j, i)] = self.x[k];
                    k += 1;
                }
            }
        } else {
            let mut k = v.offset;
            for i in 0..v.rows {
                for j in 0..v.cols {
                    m[(i, j)] = self.x[k];
                    k += 1;
                }
            }
        }
        m
    }
}

/// Incremental construction of an `SdpProblem` from matrix variables and
/// affine block formulas.
///
/// Declare all variables first, then add blocks; each block formula is
/// probed at basis points to extract exact coefficients (the formula must
/// be affine in the variables, which is verified on a probe vector).
pub struct SdpBuilder {
    n_scalars: usize,
    blocks: Vec<AffineBlock>,
}

impl Default for SdpBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl SdpBuilder {
    pub fn new() -> Self {
        SdpBuilder {
            n_scalars: 0,
            blocks: Vec::new(),
        }
    }

    /// Symmetric n×n unknown, scalarized as its upper triangle by rows.
    pub fn sym_var(&mut self, n: usize) -> VarRef {
        assert!(
            self.blocks.is_empty(),
            "declare all variables before adding blocks"
        );
        let v = VarRef {
            offset: self.n_scalars,
            rows: n,
            cols: n,
            symmetric: true,
        };
        self.n_scalars += v.n_scalars();
        v
    }

    /// General rows×cols unknown, scalarized row-major.
    pub fn full_var(&mut self, rows: usize, cols: usize) -> VarRef {
        assert!(
            self.blocks.is_empty(),
            "declare all variables before adding blocks"
        );
        let v = VarRef {
            offset: self.n_scalars,
            rows,
            cols,
            symmetric: false,
        };
        self.n_scalars += v.n_scalars();
        v
    }

    pub fn n_vars(&self) -> usize {
        self.n_scalars
    }

    /// Add the constraint f(vars) ⪰ 0. The formula must produce a square
    /// matrix of fixed size and be affine in the variables.
    pub fn add_block<F: Fn(&Assignment) -> Matrix>(&mut self, f: F) {
        let n = self.n_scalars;
        let zero = vec![0.0; n];
        let f0 = f(&Assignment { x: &zero });
        assert_eq!(f0.nrows(), f0.ncols(), "LMI block must be square");
        let mut coeffs = Vec::new();
        let mut basis = vec![0.0; n];
        for i in 0..n {
            basis[i] = 1.0;
            let fi = f(&Assignment { x: &basis }) - &f0;
            basis[i] = 0.0;
            if max_abs(&fi) > 0.0 {
                coeffs.push((i, fi));
            }
        }
        // Affinity probe: a pseudo-random point must reproduce through the
        // extracted coefficients.
        let probe: Vec<f64> = (0..n)
            .map(|i| {
                let h = (i as u64).wrapping_mul(0x9E3779B97F4A7C15);
                ((h >> 32) as f64 / u32::MAX as f64) - 0.5
            })
            .collect();
        let direct = f(&Assignment { x: &probe });
        let block = AffineBlock { f0, coeffs };
        let reconstructed = block.at(&probe);
        let scale = max_abs(&direct).max(1.0);
        assert!(
            max_abs(&(direct - reconstructed)) <= 1e-8 * scale,
            "LMI block formula is not affine in the variables"
        );
        self.blocks.push(block);
    }

    pub fn build(&self) -> SdpProblem {
        SdpProblem {
            n_vars: self.n_scalars,
            blocks: self.blocks.clone(),
        }
    }

    /// Unpack a variable from a solution vector.
    pub fn value(&self, x: &[f64], v: VarRef) -> Matrix {
        Assignment { x }.get(v)
    }
}

/// Serialize in the sparse SDPA text dialect (minimize c'x subject to
/// Σ x_i F_i - F0 ⪰ 0 blockwise), for offline cross-checks with external
/// solvers.
pub fn dump_sdpa(problem: &SdpProblem, objective: Option<&[f64]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", problem.n_vars);
    let _ = writeln!(out, "{}", problem.blocks.len());
    let dims: Vec<String> = problem
        .blocks
        .iter()
        .map(|b| format!("{}", b.dim()))
        .collect();
    let _ = writeln!(out, "{}", dims.join(" "));
    let cvec: Vec<String> = (0..problem.n_vars)
        .map(|i| format!("{}", objective.map_or(0.0, |c| c[i])))
        .collect();
    let _ = writeln!(out, "{}", cvec.join(" "));
    for (bno, b) in problem.blocks.iter().enumerate() {
        for i in 0..b.dim() {
            for j in i..b.dim() {
                let v = b.f0[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "0 {} {} {} {}", bno + 1, i + 1, j + 1, -v);
                }
            }
        }
        for (var, f) in &b.coeffs {
            for i in 0..f.nrows() {
                for j in i..f.ncols() {
                    let v = f[(i, j)];
                    if v != 0.0 {
                        let _ = writeln!(out, "{} {} {} {} {}", var + 1, bno + 1, i + 1, j + 1, v);
                    }
                }
            }
        }
    }
    out
}

/// Convenience: report infeasibility as an error carrying the margin.
pub fn require_feasible(solution: &SdpSolution) -> Result<(), Error> {
    match solution.status {
        SdpStatus::Feasible => Ok(()),
        SdpStatus::Marginal | SdpStatus::Infeasible => Err(Error::Infeasible {
            margin: solution.margin,
        }),
        SdpStatus::SolverFailure => Err(Error::SolverFailure {
            reason: String::from("interior point method did not converge"),
        }),
    }
}

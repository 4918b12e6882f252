//! Subcommand implementations. Each returns the process exit code:
//! 0 when the verdict is feasible, 1 when the verdict is infeasible, and
//! errors bubble up to exit 2.

use std::path::{Path, PathBuf};

use jumpflow::applications::{build_controller_matching, build_filter_matching, step_response_loop};
use jumpflow::discretize::{
    c2d, freq_response_ct, freq_response_dt, log_grid, C2dMethod, CtSystem, DtSystem, FreqPoint,
};
use jumpflow::dissipativity::{
    check_dissipative, hinf_norm, verify_dlmi, AnalysisCertificate, AnalysisOptions,
};
use jumpflow::numerics::{block, expm, spectral_radius};
use jumpflow::simulate::simulate_lpjf;
use jumpflow::supply::{supply_hinf, supply_passivity, QuadraticSupply};
use jumpflow::synthesis::{
    synthesize_hinf, synthesize_hinf_optimal, synthesize_passive, SynthesisOptions,
    SynthesisResult,
};
use jumpflow::system::{
    close_loop, compose_plant_hold, is_ges, monodromy, zoh_hold, DiscreteController,
    GeneralizedPlant, LpjfSystem,
};
use jumpflow::{Error, Matrix};

use crate::io::{
    controller_from_block, controller_to_block, fail, read_json, write_csv, write_json, CliError,
    ControllerFile, CtSystemFile, Report, SystemFile,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SupplyKind {
    Hinf,
    Passivity,
}

pub fn analysis_options(tol: Option<f64>) -> AnalysisOptions {
    let mut opts = AnalysisOptions::default();
    opts.sdp.strict_margin = tol;
    opts
}

fn synthesis_options(tol: Option<f64>) -> SynthesisOptions {
    SynthesisOptions {
        analysis: analysis_options(tol),
        ..Default::default()
    }
}

/// Errors that are verdicts, not tool failures: the loop is infeasible for
/// this supply, or structurally cannot be certified.
fn infeasible_reason(e: &Error) -> Option<String> {
    match e {
        Error::Infeasible { margin } => {
            Some(format!("analysis LMI infeasible (margin {margin:.3e})"))
        }
        Error::NotGes {
            spectral_radius, ..
        } => Some(format!(
            "closed loop is not exponentially stable (spectral radius {spectral_radius:.6})"
        )),
        Error::M2NotPositiveDefinite { min_eig } => Some(format!(
            "flow coupling block is not positive definite (min eigenvalue {min_eig:.3e})"
        )),
        Error::F11NearSingular { certificate, tol } => Some(format!(
            "flow lifting loses invertibility (certificate {certificate:.3e} < {tol:.1e})"
        )),
        _ => None,
    }
}

/// Synthesis additionally reports failures of the later stages (the LMI
/// solve and the controller reconstruction) as verdicts with a diagnostic.
fn synthesis_reason(e: &Error) -> Option<String> {
    infeasible_reason(e).or(match e {
        Error::SolverFailure { reason } => Some(format!("synthesis failed: {reason}")),
        Error::IllConditioned { context, cond } => Some(format!(
            "controller reconstruction is ill conditioned ({context}, condition {cond:.3e})"
        )),
        _ => None,
    })
}

fn write_report(path: &Option<PathBuf>, report: &Report) -> Result<(), CliError> {
    if let Some(path) = path {
        write_json(path, report)?;
        println!("report: {}", path.display());
    }
    Ok(())
}

struct LoadedSystem {
    gp: GeneralizedPlant,
    controller: Option<DiscreteController>,
}

fn load_system(path: &Path, controller: &Option<PathBuf>) -> Result<LoadedSystem, CliError> {
    let file: SystemFile = read_json(path)?;
    let plant = file.plant()?;
    let hold = file.hold()?;
    let gp = compose_plant_hold(&plant, &hold)?;
    let controller = match controller {
        Some(kpath) => {
            let kfile: ControllerFile = read_json(kpath)?;
            Some(controller_from_block(
                &kfile.matrices,
                file.dims.n_y,
                file.dims.n_u,
            )?)
        }
        None => file.controller()?,
    };
    Ok(LoadedSystem { gp, controller })
}

fn supply_for(kind: SupplyKind, gamma: f64, sys: &LpjfSystem) -> QuadraticSupply {
    match kind {
        SupplyKind::Hinf => supply_hinf(gamma, sys.n_wc(), sys.n_zc(), sys.n_wd(), sys.n_zd()),
        SupplyKind::Passivity => supply_passivity(sys.n_wc(), sys.n_wd()),
    }
}

pub struct AnalyzeArgs {
    pub system: PathBuf,
    pub controller: Option<PathBuf>,
    pub supply: SupplyKind,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub report: Option<PathBuf>,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<i32, CliError> {
    let loaded = load_system(&args.system, &args.controller)?;
    let Some(k) = loaded.controller else {
        return fail("analyze needs a controller: embed one in the system file or pass --controller");
    };
    let closed = close_loop(&loaded.gp, &k)?;
    let rho = spectral_radius(&monodromy(&closed));
    let opts = analysis_options(args.tol);

    let outcome: Result<(Option<f64>, AnalysisCertificate), Error> =
        match (args.supply, args.gamma) {
            (SupplyKind::Passivity, Some(_)) => {
                return fail("--gamma only applies to --supply hinf")
            }
            (SupplyKind::Passivity, None) => {
                let supply = supply_passivity(closed.n_wc(), closed.n_wd());
                check_dissipative(&closed, &supply, &opts).map(|c| (None, c))
            }
            (SupplyKind::Hinf, Some(gamma)) => {
                let supply = supply_for(SupplyKind::Hinf, gamma, &closed);
                check_dissipative(&closed, &supply, &opts).map(|c| (Some(gamma), c))
            }
            (SupplyKind::Hinf, None) => {
                hinf_norm(&closed, &opts).map(|r| (Some(r.gamma), r.certificate))
            }
        };

    let mut report = Report {
        rho_monodromy: Some(rho),
        ..Report::default()
    };
    match outcome {
        Ok((gamma, cert)) => {
            let supply = match gamma {
                Some(g) => supply_for(SupplyKind::Hinf, g, &closed),
                None => supply_for(SupplyKind::Passivity, 1.0, &closed),
            };
            let dlmi = verify_dlmi(&closed, &supply, &cert.p_h, 100)?;
            report.feasible = true;
            report.gamma = gamma;
            report.margin = Some(cert.margin);
            report.dlmi_residual = Some(dlmi.max_flow_residual);
            println!("feasible: true");
            if let Some(g) = gamma {
                println!("gamma: {g:.6}");
            }
            println!("margin: {:.6e}", cert.margin);
            println!("rho_monodromy: {rho:.6}");
            println!("dlmi_residual: {:.3e}", dlmi.max_flow_residual);
            write_report(&args.report, &report)?;
            Ok(0)
        }
        Err(e) => match infeasible_reason(&e) {
            Some(reason) => {
                if let Error::Infeasible { margin } = e {
                    report.margin = Some(margin);
                }
                report.feasible = false;
                report.reason = Some(reason.clone());
                println!("feasible: false");
                println!("rho_monodromy: {rho:.6}");
                println!("reason: {reason}");
                write_report(&args.report, &report)?;
                Ok(1)
            }
            None => Err(e.into()),
        },
    }
}

pub struct SynthesizeArgs {
    pub system: PathBuf,
    pub objective: SupplyKind,
    pub gamma: Option<f64>,
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub report: Option<PathBuf>,
}

pub fn synthesize(args: &SynthesizeArgs) -> Result<i32, CliError> {
    let loaded = load_system(&args.system, &None)?;
    let gp = loaded.gp;
    let opts = synthesis_options(args.tol);

    let outcome: Result<(Option<f64>, SynthesisResult), Error> = match (args.objective, args.gamma)
    {
        (SupplyKind::Passivity, Some(_)) => return fail("--gamma only applies to --objective hinf"),
        (SupplyKind::Passivity, None) => synthesize_passive(&gp, &opts).map(|r| (None, r)),
        (SupplyKind::Hinf, Some(gamma)) => {
            synthesize_hinf(&gp, gamma, &opts).map(|r| (Some(gamma), r))
        }
        (SupplyKind::Hinf, None) => {
            synthesize_hinf_optimal(&gp, &opts).map(|(g, r)| (Some(g), r))
        }
    };

    match outcome {
        Ok((gamma, result)) => {
            let rho = spectral_radius(&monodromy(&result.closed));
            let supply = match gamma {
                Some(g) => supply_for(SupplyKind::Hinf, g, &result.closed),
                None => supply_for(SupplyKind::Passivity, 1.0, &result.closed),
            };
            // The synthesized storage certificate must also verify on the
            // time-domain grid before anything is written.
            let dlmi = verify_dlmi(&result.closed, &supply, &result.analysis.p_h, 100)?;
            write_json(
                &args.out,
                &ControllerFile {
                    h: Some(gp.h),
                    matrices: controller_to_block(&result.controller),
                },
            )?;
            println!("controller: {}", args.out.display());
            let report = Report {
                feasible: true,
                gamma,
                margin: Some(result.analysis.margin),
                rho_monodromy: Some(rho),
                dlmi_residual: Some(dlmi.max_flow_residual),
                controller: Some(controller_to_block(&result.controller)),
                ..Report::default()
            };
            if let Some(g) = gamma {
                println!("gamma: {g:.6}");
            }
            println!("margin: {:.6e}", result.analysis.margin);
            println!("rho_monodromy: {rho:.6}");
            println!("dlmi_residual: {:.3e}", dlmi.max_flow_residual);
            write_report(&args.report, &report)?;
            Ok(0)
        }
        Err(e) => match synthesis_reason(&e) {
            Some(reason) => {
                let report = Report {
                    feasible: false,
                    reason: Some(reason.clone()),
                    ..Report::default()
                };
                println!("feasible: false");
                println!("reason: {reason}");
                write_report(&args.report, &report)?;
                Ok(1)
            }
            None => Err(e.into()),
        },
    }
}

fn parse_methods(spec: &str, prewarp_omega: f64) -> Result<Vec<(String, C2dMethod)>, CliError> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|name| match name.trim() {
            "zoh" => Ok(("zoh".into(), C2dMethod::Zoh)),
            "foh" => Ok(("foh".into(), C2dMethod::Foh)),
            "tustin" => Ok(("tustin".into(), C2dMethod::Tustin)),
            "prewarp" => Ok((
                "prewarp".into(),
                C2dMethod::TustinPrewarp(prewarp_omega),
            )),
            other => fail(format!(
                "unknown method {other:?}: expected zoh, foh, tustin, or prewarp"
            )),
        })
        .collect()
}

struct Candidate {
    name: String,
    controller: Option<DiscreteController>,
    note: Option<String>,
    /// Spectral radius in the matching loop.
    rho: f64,
    /// Certified level in the matching loop; None when unstable or failed.
    gamma: Option<f64>,
}

fn measure_one(
    gp: &GeneralizedPlant,
    ct: &CtSystem,
    h: f64,
    name: &str,
    method: C2dMethod,
    opts: &AnalysisOptions,
) -> Candidate {
    let dt = match c2d(ct, h, method) {
        Ok(dt) => dt,
        Err(e) => {
            return Candidate {
                name: name.to_string(),
                controller: None,
                note: Some(e.to_string()),
                rho: f64::NAN,
                gamma: None,
            }
        }
    };
    let k = dt.into_controller();
    let closed = match close_loop(gp, &k) {
        Ok(c) => c,
        Err(e) => {
            return Candidate {
                name: name.to_string(),
                controller: Some(k),
                note: Some(e.to_string()),
                rho: f64::NAN,
                gamma: None,
            }
        }
    };
    let rho = spectral_radius(&monodromy(&closed));
    let (gamma, note) = if is_ges(&closed, None) {
        match hinf_norm(&closed, opts) {
            Ok(r) => (Some(r.gamma), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("matching loop is unstable".into()))
    };
    Candidate {
        name: name.to_string(),
        controller: Some(k),
        note,
        rho,
        gamma,
    }
}

/// Close the matching loop around each discretization and measure its
/// certified level. Measurements are independent, so --jobs fans them out.
fn measure_candidates(
    gp: &GeneralizedPlant,
    ct: &CtSystem,
    h: f64,
    methods: &[(String, C2dMethod)],
    opts: &AnalysisOptions,
    jobs: usize,
) -> Vec<Candidate> {
    if jobs <= 1 {
        methods
            .iter()
            .map(|(name, method)| measure_one(gp, ct, h, name, *method, opts))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = methods
                .iter()
                .map(|(name, method)| {
                    scope.spawn(move || measure_one(gp, ct, h, name, *method, opts))
                })
                .collect();
            handles.into_iter().map(|j| j.join().unwrap()).collect()
        })
    }
}

/// Largest entrywise response error |target(jw) - candidate(e^{jwh})| per
/// frequency; NaN where either response hits a pole.
fn response_error(ct: &CtSystem, dt: &DtSystem, omegas: &[f64]) -> Vec<f64> {
    jumpflow::discretize::matching_error_profile(ct, dt, omegas)
        .into_iter()
        .map(|(_, err)| err.map_or(f64::NAN, |m| m.max()))
        .collect()
}

fn as_dt(h: f64, k: &DiscreteController) -> DtSystem {
    DtSystem {
        h,
        a: k.a.clone(),
        b: k.b.clone(),
        c: k.c.clone(),
        d: k.d.clone(),
    }
}

pub struct MatchFilterArgs {
    pub ct: PathBuf,
    pub h: f64,
    pub out: PathBuf,
    pub compare: String,
    pub prewarp_omega: Option<f64>,
    pub csv: Option<PathBuf>,
    pub points: usize,
    pub jobs: usize,
    pub tol: Option<f64>,
    pub report: Option<PathBuf>,
}

pub fn match_filter(args: &MatchFilterArgs) -> Result<i32, CliError> {
    let w = read_json::<CtSystemFile>(&args.ct)?.ct()?;
    let h = args.h;
    if !(h > 0.0) || !h.is_finite() {
        return fail("--h must be a positive sampling period");
    }
    // Default prewarp anchor: halfway to the Nyquist frequency.
    let prewarp_omega = args
        .prewarp_omega
        .unwrap_or(std::f64::consts::PI / (2.0 * h));
    let plant = build_filter_matching(&w, h)?;
    let gp = compose_plant_hold(&plant, &zoh_hold(w.n_u()))?;
    let opts = synthesis_options(args.tol);

    let (gamma, result) = synthesize_hinf_optimal(&gp, &opts)?;
    let supply = supply_for(SupplyKind::Hinf, gamma, &result.closed);
    let dlmi = verify_dlmi(&result.closed, &supply, &result.analysis.p_h, 100)?;
    let rho = spectral_radius(&monodromy(&result.closed));

    let methods = parse_methods(&args.compare, prewarp_omega)?;
    let candidates = measure_candidates(&gp, &w, h, &methods, &opts.analysis, args.jobs);

    write_json(
        &args.out,
        &ControllerFile {
            h: Some(h),
            matrices: controller_to_block(&result.controller),
        },
    )?;
    println!("filter: {}", args.out.display());
    println!("gamma synthesized: {gamma:.6}");
    let mut gamma_table = vec![("synthesized".to_string(), Some(gamma))];
    let mut stability = vec![("synthesized".to_string(), rho)];
    for c in &candidates {
        match c.gamma {
            Some(g) => println!("gamma {}: {g:.6}", c.name),
            None => println!(
                "gamma {}: unavailable ({})",
                c.name,
                c.note.as_deref().unwrap_or("unknown")
            ),
        }
        gamma_table.push((c.name.clone(), c.gamma));
        stability.push((c.name.clone(), c.rho));
    }

    let mut csv_paths = Vec::new();
    if let Some(csv) = &args.csv {
        // Pointwise response errors against the reference filter for the
        // synthesized result and every candidate.
        let omegas = log_grid(1e-1, std::f64::consts::PI / h, args.points);
        let mut header = vec!["omega".to_string(), "err_synthesized".to_string()];
        let mut columns = vec![response_error(&w, &as_dt(h, &result.controller), &omegas)];
        for c in &candidates {
            header.push(format!("err_{}", c.name));
            columns.push(match &c.controller {
                Some(k) => response_error(&w, &as_dt(h, k), &omegas),
                None => vec![f64::NAN; omegas.len()],
            });
        }
        let records: Vec<Vec<f64>> = omegas
            .iter()
            .enumerate()
            .map(|(i, &omega)| {
                let mut rec = vec![omega];
                rec.extend(columns.iter().map(|col| col[i]));
                rec
            })
            .collect();
        write_csv(csv, &header, &records)?;
        println!("csv: {}", csv.display());
        csv_paths.push(csv.display().to_string());
    }

    let report = Report {
        feasible: true,
        gamma: Some(gamma),
        margin: Some(result.analysis.margin),
        rho_monodromy: Some(rho),
        dlmi_residual: Some(dlmi.max_flow_residual),
        controller: Some(controller_to_block(&result.controller)),
        gamma_table: Some(gamma_table),
        stability: Some(stability),
        csv: csv_paths,
        ..Report::default()
    };
    write_report(&args.report, &report)?;
    Ok(0)
}

pub struct MatchControllerArgs {
    pub plant: PathBuf,
    pub ct_controller: PathBuf,
    pub h: f64,
    pub out: PathBuf,
    pub compare: String,
    pub csv: Option<PathBuf>,
    pub periods: usize,
    pub intra: usize,
    pub jobs: usize,
    pub tol: Option<f64>,
    pub report: Option<PathBuf>,
}

/// Reference trajectory: the continuous loop of model and controller under
/// a unit step reference, sampled on a dense grid with spacing `delta`.
fn ct_step_response(g: &CtSystem, kc: &CtSystem, delta: f64, samples: usize) -> Vec<f64> {
    let bd = &g.b * &kc.d;
    let a_cl = block(&[
        &[&(&g.a - &bd * &g.c), &(&g.b * &kc.c)],
        &[&(-(&kc.b * &g.c)), &kc.a],
    ]);
    let b_cl = block(&[&[&bd], &[&kc.b]]);
    let n = a_cl.nrows();
    let zero_row = Matrix::zeros(1, n);
    let zero_corner = Matrix::zeros(1, 1);
    let aug = block(&[&[&a_cl, &b_cl], &[&zero_row, &zero_corner]]);
    let e = expm(&(aug * delta));
    let phi = e.view((0, 0), (n, n)).into_owned();
    let gam = e.view((0, n), (n, 1)).into_owned();
    let mut x = Matrix::zeros(n, 1);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let y = (&g.c * x.view((0, 0), (g.n_x(), 1)).into_owned())[(0, 0)];
        out.push(y);
        x = &phi * &x + &gam;
    }
    out
}

pub fn match_controller(args: &MatchControllerArgs) -> Result<i32, CliError> {
    let g = read_json::<CtSystemFile>(&args.plant)?.ct()?;
    let kc = read_json::<CtSystemFile>(&args.ct_controller)?.ct()?;
    let h = args.h;
    if !(h > 0.0) || !h.is_finite() {
        return fail("--h must be a positive sampling period");
    }
    if args.intra == 0 {
        return fail("--intra must be at least 1");
    }
    let plant = build_controller_matching(&g, &kc, h)?;
    let gp = compose_plant_hold(&plant, &zoh_hold(g.n_u()))?;
    let opts = synthesis_options(args.tol);

    let (gamma, result) = synthesize_hinf_optimal(&gp, &opts)?;
    let supply = supply_for(SupplyKind::Hinf, gamma, &result.closed);
    let dlmi = verify_dlmi(&result.closed, &supply, &result.analysis.p_h, 100)?;
    let rho_match = spectral_radius(&monodromy(&result.closed));

    let methods = parse_methods(&args.compare, std::f64::consts::PI / (2.0 * h))?;
    let candidates = measure_candidates(&gp, &kc, h, &methods, &opts.analysis, args.jobs);

    write_json(
        &args.out,
        &ControllerFile {
            h: Some(h),
            matrices: controller_to_block(&result.controller),
        },
    )?;
    println!("controller: {}", args.out.display());
    println!("gamma synthesized: {gamma:.6}");

    // Stability verdicts come from the physical loop, not the matching
    // loop: the model driven by each discrete controller through the hold.
    let phys = step_response_loop(&g, h)?;
    let phys_gp = compose_plant_hold(&phys, &zoh_hold(g.n_u()))?;
    let mut loops: Vec<(String, Option<LpjfSystem>)> = Vec::new();
    loops.push((
        "synthesized".to_string(),
        Some(close_loop(&phys_gp, &result.controller)?),
    ));
    for c in &candidates {
        let closed = match &c.controller {
            Some(k) => Some(close_loop(&phys_gp, k)?),
            None => None,
        };
        loops.push((c.name.clone(), closed));
    }

    let mut gamma_table = vec![("synthesized".to_string(), Some(gamma))];
    for c in &candidates {
        match c.gamma {
            Some(g) => println!("gamma {}: {g:.6}", c.name),
            None => println!(
                "gamma {}: unavailable ({})",
                c.name,
                c.note.as_deref().unwrap_or("unknown")
            ),
        }
        gamma_table.push((c.name.clone(), c.gamma));
    }
    let mut stability = Vec::new();
    for (name, closed) in &loops {
        let rho = closed
            .as_ref()
            .map_or(f64::NAN, |sys| spectral_radius(&monodromy(sys)));
        println!("rho {name}: {rho:.6}");
        stability.push((name.clone(), rho));
    }

    let mut csv_paths = Vec::new();
    if let Some(csv) = &args.csv {
        // Step responses of every physical loop next to the continuous
        // reference loop, on a shared dense grid.
        let delta = h / args.intra as f64;
        let samples = args.periods * (args.intra + 1);
        let y_ct_dense = ct_step_response(&g, &kc, delta, args.periods * args.intra + 1);
        let step = vec![Matrix::from_element(1, 1, 1.0); args.periods];
        let mut header = vec!["time".to_string(), "y_ct".to_string()];
        let mut trajs = Vec::new();
        for (name, closed) in &loops {
            header.push(format!("y_{name}"));
            trajs.push(closed.as_ref().map(|sys| {
                simulate_lpjf(
                    sys,
                    &Matrix::zeros(sys.n(), 1),
                    &step,
                    &[],
                    args.periods,
                    args.intra,
                )
            }));
        }
        let mut records = Vec::with_capacity(samples);
        for i in 0..samples {
            let k = i / (args.intra + 1);
            let j = i % (args.intra + 1);
            let time = (k * args.intra + j) as f64 * delta;
            let mut rec = vec![time, y_ct_dense[k * args.intra + j]];
            for t in &trajs {
                rec.push(match t {
                    Some(Ok(t)) => t.z_c[i][(0, 0)],
                    _ => f64::NAN,
                });
            }
            records.push(rec);
        }
        write_csv(csv, &header, &records)?;
        println!("csv: {}", csv.display());
        csv_paths.push(csv.display().to_string());
    }

    let report = Report {
        feasible: true,
        gamma: Some(gamma),
        margin: Some(result.analysis.margin),
        rho_monodromy: Some(rho_match),
        dlmi_residual: Some(dlmi.max_flow_residual),
        controller: Some(controller_to_block(&result.controller)),
        gamma_table: Some(gamma_table),
        stability: Some(stability),
        csv: csv_paths,
        ..Report::default()
    };
    write_report(&args.report, &report)?;
    Ok(0)
}

pub struct SimulateArgs {
    pub system: PathBuf,
    pub controller: Option<PathBuf>,
    pub periods: usize,
    pub intra: usize,
    pub step: f64,
    pub csv: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let loaded = load_system(&args.system, &args.controller)?;
    let Some(k) = loaded.controller else {
        return fail("simulate needs a controller: embed one in the system file or pass --controller");
    };
    if args.intra == 0 {
        return fail("--intra must be at least 1");
    }
    let closed = close_loop(&loaded.gp, &k)?;
    let wd = if closed.n_wd() > 0 {
        vec![Matrix::from_element(closed.n_wd(), 1, args.step); args.periods]
    } else {
        Vec::new()
    };
    let traj = simulate_lpjf(
        &closed,
        &Matrix::zeros(closed.n(), 1),
        &wd,
        &[],
        args.periods,
        args.intra,
    )?;
    let mut header = vec!["time".to_string()];
    header.extend((0..closed.n()).map(|i| format!("x_{i}")));
    header.extend((0..closed.n_zc()).map(|i| format!("zc_{i}")));
    let records: Vec<Vec<f64>> = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut rec = vec![t];
            rec.extend(traj.states[i].iter().copied());
            rec.extend(traj.z_c[i].iter().copied());
            rec
        })
        .collect();
    write_csv(&args.csv, &header, &records)?;
    println!("csv: {}", args.csv.display());
    println!("peak_state: {:.6e}", traj.peak_state());
    Ok(0)
}

pub struct FreqrespArgs {
    pub ct: Option<PathBuf>,
    pub dt: Option<PathBuf>,
    pub min: f64,
    pub max: Option<f64>,
    pub points: usize,
    pub csv: PathBuf,
}

pub fn freqresp(args: &FreqrespArgs) -> Result<i32, CliError> {
    if !(args.min > 0.0) {
        return fail("--min must be positive (log-spaced grid)");
    }
    if args.points < 2 {
        return fail("--points must be at least 2");
    }
    let (omegas, points, n_y, n_u): (Vec<f64>, Vec<Option<FreqPoint>>, usize, usize) =
        match (&args.ct, &args.dt) {
            (Some(path), None) => {
                let sys = read_json::<CtSystemFile>(path)?.ct()?;
                let max = args.max.unwrap_or(1e3);
                let omegas = log_grid(args.min, max, args.points);
                let pts = freq_response_ct(&sys, &omegas);
                (omegas, pts, sys.n_y(), sys.n_u())
            }
            (None, Some(path)) => {
                let sys = read_json::<CtSystemFile>(path)?.dt()?;
                // Default sweep stops at the Nyquist frequency.
                let max = args.max.unwrap_or(std::f64::consts::PI / sys.h);
                let omegas = log_grid(args.min, max, args.points);
                let pts = freq_response_dt(&sys, &omegas);
                (omegas, pts, sys.n_y(), sys.n_u())
            }
            _ => return fail("pass exactly one of --ct or --dt"),
        };
    let mut header = vec!["omega".to_string()];
    for i in 0..n_y {
        for j in 0..n_u {
            header.push(format!("mag_{i}_{j}"));
            header.push(format!("arg_{i}_{j}"));
        }
    }
    // Rows at a pole keep the frequency and report NaN entries.
    let records: Vec<Vec<f64>> = omegas
        .iter()
        .zip(points.iter())
        .map(|(&omega, p)| {
            let mut rec = vec![omega];
            match p {
                Some(p) => {
                    for i in 0..n_y {
                        for j in 0..n_u {
                            let (re, im) = (p.re[(i, j)], p.im[(i, j)]);
                            rec.push((re * re + im * im).sqrt());
                            rec.push(im.atan2(re));
                        }
                    }
                }
                None => rec.extend(std::iter::repeat(f64::NAN).take(2 * n_y * n_u)),
            }
            rec
        })
        .collect();
    write_csv(&args.csv, &header, &records)?;
    println!("csv: {}", args.csv.display());
    Ok(0)
}

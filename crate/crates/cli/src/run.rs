//! The subcommands. Each returns the report it wrote together with the
//! error that ended the run, if any, so that failed runs still leave a
//! diagnostic report behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reachtime::cases::{reference_case, ReferenceCase, Scenario, SERVOING_DELTA_BAR, SERVOING_PHI_BAR};
use reachtime::certificate::Certificate;
use reachtime::model::{rotation, ControlKind, PlantSelection, RovParams, SimplexWeight};
use reachtime::search::{is_unimodal, log_grid};
use reachtime::sim::{audit_certificate, detect_reaching_time, simulate, CertificateClaims};
use reachtime::uvc::{build_uvc_inner, rho_sweep, synthesize_uvc};
use reachtime::vsc::{build_vsc_synthesis, synthesize_vsc};
use reachtime::{Controller, PolytopicPlant};

use crate::config::{PlantSpec, ScenarioConfig, SimulationPlan};
use crate::error::CliError;
use crate::report::{Comparison, Diagnostics, RunReport, SimulationRecord, SweepSummary, Timings};

/// Smallest block margin accepted when re-verifying a certificate.
pub const RECHECK_TOLERANCE: f64 = 1e-6;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out: PathBuf,
    pub fixed_clock: bool,
}

impl RunContext {
    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(|source| CliError::Output {
            path: self.out.display().to_string(),
            source,
        })?;
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })
    }

    fn nested(&self, dir: &str) -> Self {
        Self {
            out: self.out.join(dir),
            fixed_clock: self.fixed_clock,
        }
    }

    /// Writes `report.json` and passes the outcome through.
    fn finish(&self, mut report: RunReport, outcome: Result<(), CliError>) -> (RunReport, Result<(), CliError>) {
        if let Err(e) = &outcome {
            report.fail(e);
        }
        if self.fixed_clock {
            report.timings = None;
        }
        match self.write("report.json", &report.to_json()) {
            Ok(()) => (report, outcome),
            Err(e) => (report, outcome.and(Err(e))),
        }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Synthesizes a certificate for the configured kind and re-verifies it
/// after a JSON round trip.
fn certify(cfg: &ScenarioConfig, plant: &PolytopicPlant) -> Result<(Certificate<f64>, f64), CliError> {
    let opts = cfg.design_options();
    let cert = match cfg.kind {
        ControlKind::Vsc => Certificate::Vsc(synthesize_vsc(plant, &cfg.sigma0, cfg.alpha_u, &opts)?),
        ControlKind::Uvc => Certificate::Uvc(synthesize_uvc(plant, &cfg.sigma0, cfg.rho_range, cfg.alpha_u, &opts)?),
    };
    let margin = recheck_serialized(&cert, plant)?;
    log::info!(
        "{} certificate: bound {:.6}, recheck margin {margin:.3e}",
        cfg.kind,
        cert.t_bound()
    );
    Ok((cert, margin))
}

/// Re-verifies a certificate from its JSON form alone.
pub fn recheck_serialized(cert: &Certificate<f64>, plant: &PolytopicPlant) -> Result<f64, CliError> {
    let json = serde_json::to_string(cert).expect("certificate serializes");
    let back: Certificate<f64> = serde_json::from_str(&json)
        .map_err(|e| reachtime::Error::NumericalFailure(format!("certificate round trip: {e}")))?;
    let margin = back.recheck(plant)?;
    if margin < -RECHECK_TOLERANCE {
        return Err(reachtime::Error::NumericalFailure(format!(
            "certificate fails re-verification (margin {margin:e})"
        ))
        .into());
    }
    Ok(margin)
}

pub fn cmd_synth(cfg: ScenarioConfig, ctx: &RunContext) -> (RunReport, Result<(), CliError>) {
    let mut report = RunReport::new("synth");
    report.input = Some(cfg.clone());
    let outcome = synth_into(&cfg, ctx, &mut report);
    ctx.finish(report, outcome)
}

fn synth_into(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut RunReport) -> Result<(), CliError> {
    let plant = cfg.validate()?;
    let start = Instant::now();
    let (cert, margin) = certify(cfg, &plant)?;
    report.timings = Some(Timings {
        synthesis_ms: ms(start),
        simulation_ms: 0.0,
        total_ms: ms(start),
    });
    if let Certificate::Uvc(u) = &cert {
        let sweep = reachtime::RhoSweep {
            points: u.rho_grid.clone(),
        };
        ctx.write("rho_grid.csv", &sweep.to_csv())?;
    }
    report.diagnostics = Some(Diagnostics::of(&cert));
    report.recheck_margin = Some(margin);
    report.certificate = Some(cert);
    Ok(())
}

/// Where `simulate` takes its gain from.
#[derive(Debug, Clone)]
pub enum GainSource {
    /// `certificate` of a report written by `synth`.
    Report(PathBuf),
    /// `gain` of the configuration, or a fresh synthesis when absent.
    Config,
}

pub fn cmd_simulate(cfg: ScenarioConfig, source: GainSource, ctx: &RunContext) -> (RunReport, Result<(), CliError>) {
    let mut report = RunReport::new("simulate");
    report.input = Some(cfg.clone());
    let outcome = simulate_into(&cfg, &source, ctx, &mut report);
    ctx.finish(report, outcome)
}

fn simulate_into(
    cfg: &ScenarioConfig,
    source: &GainSource,
    ctx: &RunContext,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let plant = cfg.validate()?;
    let start = Instant::now();
    let cert = match (source, &cfg.gain) {
        (GainSource::Report(path), _) => {
            let saved = RunReport::load(path)?;
            let cert = saved
                .certificate
                .ok_or_else(|| CliError::Config(format!("{} holds no certificate", path.display())))?;
            if cert.kind() != cfg.kind {
                return Err(CliError::Config(format!(
                    "certificate is for {}, configuration asks for {}",
                    cert.kind(),
                    cfg.kind
                )));
            }
            report.recheck_margin = Some(recheck_serialized(&cert, &plant)?);
            Some(cert)
        }
        (GainSource::Config, Some(_)) => None,
        (GainSource::Config, None) => {
            let (cert, margin) = certify(cfg, &plant)?;
            report.recheck_margin = Some(margin);
            Some(cert)
        }
    };
    let synthesis_ms = ms(start);
    let controller = match (&cert, &cfg.gain) {
        (Some(c), _) => c.controller(),
        (None, Some(k)) => Controller::new(cfg.kind, k.clone())?,
        (None, None) => unreachable!("a gain source was resolved above"),
    };
    if let Some(c) = &cert {
        report.diagnostics = Some(Diagnostics::of(c));
    }
    let selections = plan_selections(&cfg.simulate, &plant, cfg.seed);
    let sim_start = Instant::now();
    let claims = cert.as_ref().map(Certificate::claims).transpose()?;
    let result = run_simulations(cfg, &plant, &controller, claims.as_ref(), &selections, ctx, report);
    report.certificate = cert;
    report.timings = Some(Timings {
        synthesis_ms,
        simulation_ms: ms(sim_start),
        total_ms: ms(start),
    });
    result
}

fn plan_selections(plan: &SimulationPlan, plant: &PolytopicPlant, seed: u64) -> Vec<(String, PlantSelection<f64>)> {
    let mut out = Vec::new();
    if plan.vertices {
        out.extend((0..plant.vertex_count()).map(|v| (format!("vertex_{v}"), PlantSelection::Vertex(v))));
    }
    out.extend(
        plan.members
            .iter()
            .enumerate()
            .map(|(k, s)| (format!("member_{k}"), s.clone())),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..plan.random_weights).map(|k| {
        (
            format!("random_{k}"),
            PlantSelection::Weight(SimplexWeight::sample(&mut rng, plant.vertex_count())),
        )
    }));
    out
}

/// Runs every selection, writes one CSV each, and returns the first
/// divergence (if any) after all runs are recorded.
fn run_simulations(
    cfg: &ScenarioConfig,
    plant: &PolytopicPlant,
    controller: &Controller,
    claims: Option<&CertificateClaims<f64>>,
    selections: &[(String, PlantSelection<f64>)],
    ctx: &RunContext,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let disturbance = cfg.disturbance();
    let mut first_err = None;
    for (label, sel) in selections {
        let mut rec = SimulationRecord {
            label: label.clone(),
            selection: sel.clone(),
            disturbance: disturbance.clone(),
            reaching_time: None,
            max_control_norm: None,
            audit: None,
            csv: None,
            error: None,
        };
        match simulate(plant, sel, controller, &disturbance, &cfg.sigma0, &cfg.sim) {
            Ok(mut traj) => {
                rec.reaching_time = detect_reaching_time(&traj, cfg.sim.reach_fraction, cfg.sim.hold_steps);
                rec.max_control_norm = Some(traj.max_control_norm());
                if let Some(c) = claims {
                    traj = traj.with_lyapunov(&c.lyapunov);
                    let audit = audit_certificate(&traj, c, &cfg.sim)?;
                    if !audit.passed() {
                        log::warn!("{label}: simulation audit failed: {audit:?}");
                    }
                    rec.audit = Some(audit);
                }
                let name = format!("{label}.csv");
                ctx.write(&name, &traj.to_csv())?;
                rec.csv = Some(name);
                log::info!("{label}: reaching time {:?}", rec.reaching_time);
            }
            Err(e @ reachtime::Error::Divergence { .. }) => {
                log::error!("{label}: {e}");
                rec.error = Some(e.to_string());
                first_err.get_or_insert(CliError::from(e));
            }
            Err(e) => return Err(e.into()),
        }
        report.simulations.push(rec);
    }
    first_err.map_or(Ok(()), Err)
}

pub fn cmd_sweep_rho(cfg: ScenarioConfig, ctx: &RunContext) -> (RunReport, Result<(), CliError>) {
    let mut report = RunReport::new("sweep-rho");
    report.input = Some(cfg.clone());
    let outcome = sweep_into(&cfg, ctx, &mut report);
    ctx.finish(report, outcome)
}

fn sweep_into(cfg: &ScenarioConfig, ctx: &RunContext, report: &mut RunReport) -> Result<(), CliError> {
    if cfg.kind != ControlKind::Uvc {
        return Err(CliError::Config("sweep-rho needs kind \"uvc\"".into()));
    }
    let plant = cfg.validate()?;
    let start = Instant::now();
    let grid = log_grid(cfg.rho_range.0, cfg.rho_range.1, cfg.sweep_points)?;
    let sweep = rho_sweep(&plant, &cfg.sigma0, &grid, cfg.alpha_u, &cfg.solver)?;
    ctx.write("rho_sweep.csv", &sweep.to_csv())?;
    let values = sweep.values();
    let best = sweep.best();
    report.sweep = Some(SweepSummary {
        csv: "rho_sweep.csv".into(),
        points: values.len(),
        feasible: values.iter().flatten().count(),
        best_rho: best.map(|p| p.rho),
        best_theta: best.and_then(|p| p.value),
        unimodal: is_unimodal(&values, 1e-9),
    });
    report.timings = Some(Timings {
        synthesis_ms: ms(start),
        simulation_ms: 0.0,
        total_ms: ms(start),
    });
    Ok(())
}

/// Writes the synthesis program (VSC, or UVC at `rho`) as JSON.
pub fn cmd_dump_program(cfg: &ScenarioConfig, rho: Option<f64>, ctx: &RunContext) -> Result<PathBuf, CliError> {
    let plant = cfg.validate()?;
    let prog = match cfg.kind {
        ControlKind::Vsc => build_vsc_synthesis(&plant, &cfg.sigma0, cfg.alpha_u)?,
        ControlKind::Uvc => {
            let rho = rho.ok_or_else(|| CliError::Config("UVC programs need --rho".into()))?;
            build_uvc_inner(&plant, &cfg.sigma0, rho, cfg.alpha_u)?
        }
    };
    let mut json = serde_json::to_string_pretty(&prog).expect("program serializes");
    json.push('\n');
    ctx.write("program.json", &json)?;
    Ok(ctx.out.join("program.json"))
}

/// Re-verifies the certificate of a saved report against the plant
/// rebuilt from the report's own input echo.
pub fn cmd_verify(path: &Path) -> Result<f64, CliError> {
    let report = RunReport::load(path)?;
    let input = report
        .input
        .ok_or_else(|| CliError::Config(format!("{} has no input section", path.display())))?;
    let cert = report
        .certificate
        .ok_or_else(|| CliError::Config(format!("{} holds no certificate", path.display())))?;
    let plant = input.plant()?;
    let margin = cert.recheck(&plant)?;
    if margin < -RECHECK_TOLERANCE {
        return Err(reachtime::Error::NoCertificate(format!(
            "stored certificate fails re-verification (margin {margin:e})"
        ))
        .into());
    }
    Ok(margin)
}

/// The configuration a reference case corresponds to.
pub fn case_config(case: &ReferenceCase) -> ScenarioConfig {
    let plant = match case.scenario {
        Scenario::Servoing => PlantSpec::Servoing {
            phi_bar: SERVOING_PHI_BAR,
            delta_bar: SERVOING_DELTA_BAR,
        },
        Scenario::Rov => PlantSpec::Rov {
            params: RovParams::default(),
        },
    };
    let mut members = Vec::new();
    if case.scenario == Scenario::Servoing {
        // Nominal camera rotation and the two extreme ones.
        for angle in [
            SERVOING_PHI_BAR,
            SERVOING_PHI_BAR + SERVOING_DELTA_BAR,
            SERVOING_PHI_BAR - SERVOING_DELTA_BAR,
        ] {
            members.push(PlantSelection::Matrix(rotation(angle)));
        }
    }
    let sim = reachtime::SimConfig {
        // Long enough to pass the bound and fill the hold window.
        horizon: ((case.reference_bound * 1.2 + 0.05) * 100.0).ceil() / 100.0,
        ..Default::default()
    };
    ScenarioConfig {
        plant,
        sigma0: case.sigma0.clone(),
        delta: case.delta,
        alpha_u: Some(case.alpha_u),
        kind: case.kind,
        rho_range: case.rho_range,
        sweep_points: 40,
        solver: Default::default(),
        line_search: Default::default(),
        audit_samples: 50,
        sim,
        disturbance: Some(case.disturbance()),
        simulate: SimulationPlan {
            vertices: true,
            members,
            random_weights: 0,
        },
        gain: None,
        seed: 0,
        out_dir: None,
    }
}

/// Synthesis plus simulation for one reference case, with the reference
/// figures alongside.
pub fn cmd_reproduce(
    id: &str,
    overrides: &crate::config::Overrides,
    ctx: &RunContext,
) -> (RunReport, Result<(), CliError>) {
    let mut report = RunReport::new("reproduce");
    report.case = Some(id.to_string());
    let case = match reference_case(id) {
        Ok(c) => c,
        Err(e) => {
            let err = CliError::Config(e.to_string());
            report.fail(&err);
            return (report, Err(err));
        }
    };
    let mut cfg = case_config(&case);
    cfg.apply(overrides);
    report.input = Some(cfg.clone());
    let outcome = simulate_into(&cfg, &GainSource::Config, ctx, &mut report).map(|()| {
        let cert = report.certificate.as_ref().expect("synthesized above");
        report.comparison = Some(Comparison {
            reference_bound: case.reference_bound,
            computed_bound: cert.t_bound(),
            relative_error: (cert.t_bound() - case.reference_bound) / case.reference_bound,
            reference_rho: case.reference_rho,
            computed_rho: cert.rho(),
            reference_reach: case.reference_reach,
            simulated_reach: report
                .simulations
                .iter()
                .filter_map(|s| s.reaching_time)
                .reduce(f64::max),
        });
    });
    ctx.finish(report, outcome)
}

/// Plain-text table of reproduced cases.
pub fn comparison_table(reports: &[RunReport]) -> String {
    let mut out = format!(
        "{:<16} {:>9} {:>9} {:>8} {:>6} {:>7} {:>7} {:>9}  {}\n",
        "case", "reference", "computed", "rel.err", "rho", "rho*", "reach", "simulated", "status"
    );
    let opt = |v: Option<f64>, w: usize, p: usize| v.map_or(format!("{:>w$}", "-"), |x| format!("{x:>w$.p$}"));
    for r in reports {
        let id = r.case.as_deref().unwrap_or("?");
        match &r.comparison {
            Some(c) => {
                let _ = writeln!(
                    out,
                    "{id:<16} {:>9.4} {:>9.4} {:>7.2}% {} {} {} {}  {}",
                    c.reference_bound,
                    c.computed_bound,
                    100.0 * c.relative_error,
                    opt(c.reference_rho, 6, 2),
                    opt(c.computed_rho, 7, 3),
                    opt(c.reference_reach, 7, 2),
                    opt(c.simulated_reach, 9, 4),
                    r.status
                );
            }
            None => {
                let _ = writeln!(out, "{id:<16} {:>71}  {}", "", r.status);
            }
        }
    }
    out
}

/// CSV form of [`comparison_table`].
pub fn comparison_csv(reports: &[RunReport]) -> String {
    let mut out = String::from("case,reference_bound,computed_bound,relative_error,reference_rho,computed_rho,reference_reach,simulated_reach,status\n");
    let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in reports {
        let c = r.comparison.as_ref();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.case.as_deref().unwrap_or(""),
            cell(c.map(|c| c.reference_bound)),
            cell(c.map(|c| c.computed_bound)),
            cell(c.map(|c| c.relative_error)),
            cell(c.and_then(|c| c.reference_rho)),
            cell(c.and_then(|c| c.computed_rho)),
            cell(c.and_then(|c| c.reference_reach)),
            cell(c.and_then(|c| c.simulated_reach)),
            r.status
        );
    }
    out
}

/// Runs `reproduce` for one id or for `all`, writing each case under its
/// own directory plus `comparison.csv` at the top.
pub fn reproduce_many(
    ids: &[String],
    overrides: &crate::config::Overrides,
    ctx: &RunContext,
) -> (Vec<RunReport>, Result<(), CliError>) {
    let mut reports = Vec::new();
    let mut first_err = None;
    for id in ids {
        let (report, outcome) = cmd_reproduce(id, overrides, &ctx.nested(id));
        if let Err(e) = outcome {
            log::error!("{id}: {e}");
            first_err.get_or_insert(e);
        }
        reports.push(report);
    }
    if let Err(e) = ctx.write("comparison.csv", &comparison_csv(&reports)) {
        first_err.get_or_insert(e);
    }
    (reports, first_err.map_or(Ok(()), Err))
}

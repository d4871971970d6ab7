use std::path::PathBuf;

use serde::Serialize;

use entanglab::approximation::{entanglement_entropy, mutual_information};
use entanglab::audit::{failures, AuditReport};
use entanglab::bounds::{decoupling_verify, DecouplingTable};
use entanglab::decorrelation::{
    grid_resolution, influence_kernel, phase_deficit, phase_deficit_grid, KernelMode, KernelOptions, MAX_GRID_SITES,
};
use entanglab::ising::{build_hamiltonian, ground_state, GroundStateResult, IsingSpec, SolverOptions};
use entanglab::lattice::{buffer, Region, Tripartition, Window};
use entanglab::registry::{AuditInput, Registry};
use entanglab::states::{amplitude_decompose, pinch, qpsv, reconstruct, reduce, trace_distance, PureState};

use crate::config::{config_error, field_error, resolve_region, BlockFamily, ExperimentConfig};
use crate::error::CliError;
use crate::output::{sha256_hex, Sink};

/// Largest window for the full audit suite.
pub const MAX_AUDIT_SITES: usize = 14;
/// Grid steps per phase variable in the oracle.
pub const ORACLE_GRID_STEPS: usize = 64;

pub struct Context {
    pub config: ExperimentConfig,
    pub base: PathBuf,
    pub seed: u64,
    pub sink: Sink,
}

pub fn solve(spec: &IsingSpec, allow_degenerate: bool) -> Result<GroundStateResult, CliError> {
    let h = build_hamiltonian(spec).map_err(|e| field_error("model", e))?;
    let opts = SolverOptions { accept_degenerate: allow_degenerate, ..SolverOptions::default() };
    let result = ground_state(&h, &opts)?;
    result.require_unique(allow_degenerate)?;
    Ok(result)
}

fn state(ctx: &Context) -> Result<PureState, CliError> {
    ctx.config.model.build(&ctx.base, ctx.seed)
}

fn tripartition(ctx: &Context, w: &Window) -> Result<Tripartition, CliError> {
    let r = &ctx.config.regions;
    let a = resolve_region(w, &r.a, "regions.a")?;
    match (&r.b, r.width) {
        (Some(_), Some(_)) => Err(config_error("regions.width", "give either `b` or `width`, not both")),
        (Some(spec), None) => {
            let b = spec.resolve(w).map_err(|e| field_error("regions.b", e))?;
            Tripartition::from_core_and_buffer(a, b).map_err(|e| field_error("regions.b", e))
        }
        (None, width) => buffer(&a, width.unwrap_or(1)).map_err(|e| field_error("regions.width", e)),
    }
}

fn sites(r: &Region) -> String {
    r.sites().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct GroundSummary {
    dims: Vec<usize>,
    b: f64,
    hz: f64,
    energy: f64,
    gap: Option<f64>,
    degenerate: bool,
    iterations: usize,
    residual: f64,
    state_file: String,
    state_sha256: String,
}

pub fn ground(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let (spec, allow) =
        ctx.config.model.ising_spec().ok_or_else(|| config_error("model.kind", "`ground` needs an `ising` model"))?;
    let result = solve(&spec, allow)?;
    let bytes = qpsv::encode(&result.state);
    let state_path = ctx.sink.bytes("qpsv", &bytes)?;
    let summary = GroundSummary {
        dims: spec.dims.clone(),
        b: spec.b,
        hz: spec.hz,
        energy: result.energy,
        gap: result.gap,
        degenerate: result.degenerate,
        iterations: result.iterations,
        residual: result.residual,
        state_file: state_path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        state_sha256: sha256_hex(&bytes),
    };
    Ok(vec![state_path, ctx.sink.json(&summary)?])
}

pub fn entropy_scan(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let psi = state(ctx)?;
    let w = psi.window().clone();
    let n = w.site_count();
    let blocks: Vec<Region> = match &ctx.config.regions.blocks {
        None => return Err(config_error("regions.blocks", "required for this subcommand")),
        Some(BlockFamily::Named(name)) if name == "end" => {
            (1..n).map(|k| w.region(0..k)).collect::<Result<_, _>>().map_err(|e| field_error("regions.blocks", e))?
        }
        Some(BlockFamily::Named(name)) => {
            return Err(config_error("regions.blocks", format!("unknown block family `{name}` (known: end)")))
        }
        Some(BlockFamily::List(list)) => list
            .iter()
            .enumerate()
            .map(|(i, spec)| resolve_region(&w, &Some(spec.clone()), &format!("regions.blocks[{i}]")))
            .collect::<Result<_, _>>()?,
    };
    let mut csv = String::from("index,size,entropy,sites\n");
    for (i, a) in blocks.iter().enumerate() {
        let s = entanglement_entropy(&psi, a)?;
        csv.push_str(&format!("{i},{},{s:e},{}\n", a.len(), sites(a)));
    }
    Ok(vec![ctx.sink.csv(&csv)?])
}

#[derive(Serialize)]
struct BufferScan<'a> {
    a: Vec<usize>,
    table: &'a DecouplingTable,
}

pub fn buffer_scan(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let psi = state(ctx)?;
    let w = psi.window().clone();
    let a = resolve_region(&w, &ctx.config.regions.a, "regions.a")?;
    if ctx.config.widths.is_empty() {
        return Err(config_error("widths", "required for this subcommand"));
    }
    let table = decoupling_verify(&psi, &a, &ctx.config.widths, &ctx.config.settings.phase)
        .map_err(|e| field_error("widths", e))?;
    let json = ctx.sink.json(&BufferScan { a: a.sites().to_vec(), table: &table })?;
    Ok(vec![ctx.sink.csv(&table.to_csv())?, json])
}

pub fn mutual_info(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let psi = state(ctx)?;
    let w = psi.window().clone();
    let r = &ctx.config.regions;
    let a1 = resolve_region(&w, &r.a1, "regions.a1")?;
    let a2 = resolve_region(&w, &r.a2, "regions.a2")?;
    if r.offsets.is_empty() {
        return Err(config_error("regions.offsets", "required for this subcommand"));
    }
    let mut csv = String::from("offset,distance,mutual_information,a2_sites\n");
    for (i, off) in r.offsets.iter().enumerate() {
        let field = format!("regions.offsets[{i}]");
        let moved: Option<Vec<usize>> = a2.sites().iter().map(|&s| w.translate(s, off)).collect();
        let moved = moved.ok_or_else(|| config_error(&field, "shifted A₂ leaves the window"))?;
        let target = w.region(moved).map_err(|e| field_error(&field, e))?;
        let i_val = mutual_information(&psi, &a1, &target).map_err(|e| field_error(&field, e))?;
        let d = a1.distance_to(&target).unwrap_or(0);
        csv.push_str(&format!("{i},{d},{i_val:e},{}\n", sites(&target)));
    }
    Ok(vec![ctx.sink.csv(&csv)?])
}

#[derive(Serialize)]
struct AuditOutput {
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<usize>,
    pass: bool,
    failures: usize,
    reports: Vec<AuditReport>,
}

fn check_sites(w: &Window, what: &'static str, limit: usize) -> Result<(), CliError> {
    if w.site_count() > limit {
        return Err(entanglab::Error::Capacity { what, got: w.site_count(), limit }.into());
    }
    Ok(())
}

fn finish(ctx: &Context, tri: &Tripartition, reports: Vec<AuditReport>) -> Result<Vec<PathBuf>, CliError> {
    let failed = failures(&reports).len();
    let out = AuditOutput {
        a: tri.a.sites().to_vec(),
        b: tri.b.sites().to_vec(),
        c: tri.c.sites().to_vec(),
        pass: failed == 0,
        failures: failed,
        reports,
    };
    let path = ctx.sink.json(&out)?;
    if failed > 0 {
        eprintln!("wrote {}", path.display());
        return Err(CliError::AuditFailed(failed));
    }
    Ok(vec![path])
}

pub fn audit(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let w = ctx.config.model.window(&ctx.base)?;
    check_sites(&w, "audit window sites", MAX_AUDIT_SITES)?;
    let registry = Registry::standard();
    for (i, name) in ctx.config.audits.iter().enumerate() {
        if registry.get(name).is_none() {
            return Err(config_error(
                &format!("audits[{i}]"),
                format!("unknown audit `{name}` (known: {})", registry.names().join(", ")),
            ));
        }
    }
    let tri = tripartition(ctx, &w)?;
    if tri.c.is_empty() {
        return Err(config_error("regions", "the buffer leaves no outer region C"));
    }
    let psi = state(ctx)?;
    let input = AuditInput::from_state(psi, tri.clone(), ctx.config.settings.clone())?;
    let reports = registry.run(&ctx.config.audits, &input)?;
    finish(ctx, &tri, reports)
}

/// Brute-force cross-checks on small windows: alternating phase optimizer
/// against the exhaustive grid, restricted against exact influence kernels,
/// pinching invariance of `ϱ_A`, and the amplitude/phase round trip.
pub fn oracle(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let w = ctx.config.model.window(&ctx.base)?;
    check_sites(&w, "oracle window sites", MAX_GRID_SITES)?;
    let tri = tripartition(ctx, &w)?;
    let psi = state(ctx)?;
    let slack = ctx.config.settings.slack;
    let mut reports = Vec::new();

    let split = phase_deficit(&psi, &tri, &ctx.config.settings.phase)?;
    let grid = phase_deficit_grid(&psi, &tri, ORACLE_GRID_STEPS)?;
    let resolution = grid_resolution(ORACLE_GRID_STEPS);
    reports.push(AuditReport::leq("phase_vs_grid", (split.objective - grid).abs(), resolution, slack));
    reports.push(AuditReport::eq("phase_tables", split.evaluate(&psi), split.objective, 1e-9));

    let p = psi.probabilities();
    let opts = KernelOptions::default();
    for &u in tri.a.sites() {
        for &v in tri.c.sites() {
            let exact = influence_kernel(&p, &tri.b, u, v, KernelMode::Exact, &opts)?;
            let restricted = influence_kernel(&p, &tri.b, u, v, KernelMode::Restricted, &opts)?;
            reports.push(
                AuditReport::leq("kernel_restricted_vs_exact", restricted.value, exact.value, slack)
                    .with_case(format!("u={u} v={v}")),
            );
        }
    }

    let rho = reduce(&psi, &tri.a)?;
    let pinched = pinch(&psi, &tri.b)?.reduced_mixture(&tri.a)?;
    reports.push(AuditReport::eq("pinching_invariance", trace_distance(&rho, &pinched)?, 0.0, slack));

    let (probs, theta) = amplitude_decompose(&psi);
    let rebuilt = reconstruct(&probs, &theta)?;
    reports.push(AuditReport::eq("phase_round_trip", psi.inner(&rebuilt).norm(), 1.0, slack));

    finish(ctx, &tri, reports)
}

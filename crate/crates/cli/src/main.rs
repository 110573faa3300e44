//! `crf`: validate triangulations, query curvature, volume and Hessians, and
//! run the extended Ricci flow.

mod metric;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crf_core::complex::{build_complex, GluingSpec, PolyhedralMetric, TriangulatedComplex};
use crf_core::flow::{convergence_report, h_hessian, run_flow, FlowConfig, FlowResult, FlowStatus, StepMode};
use crf_core::tet::{
    classify_degeneration, covolume_hessian, decoration_directions, is_realizable, phi, tet_volume, EdgeLengths6,
    TetShape,
};
use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::{json, Value};

use metric::MetricSource;

/// Eigenvalues at or below this count as zero.
const KERNEL_THRESHOLD: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "crf", version, about = "Decorated hyperbolic metrics and the extended Ricci flow on triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a triangulation file and report edge classes and valences.
    Validate { file: PathBuf },
    /// Curvature of every edge class.
    Curvature {
        file: PathBuf,
        #[arg(long)]
        metric: String,
        /// Use the extended angles (defined for every metric).
        #[arg(long)]
        extended: bool,
    },
    /// Run the flow and report where it ends.
    Flow {
        file: PathBuf,
        #[arg(long)]
        metric: String,
        /// Initial (adaptive) or constant (with --fixed) step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Use constant steps of size --dt.
        #[arg(long)]
        fixed: bool,
        /// Stop when the curvature sup-norm drops to this.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_time: Option<f64>,
        /// Report divergence once some length reaches this in absolute value.
        #[arg(long)]
        bound: Option<f64>,
        /// Keep the per-cusp length sums fixed.
        #[arg(long)]
        normalize: bool,
        /// Write every n-th accepted state to the CSV.
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Volume of every tetrahedron and of the whole complex.
    Volume {
        file: PathBuf,
        #[arg(long)]
        metric: String,
    },
    /// Spectra of the per-tetrahedron Hessians and of the Hessian of H.
    /// With --shape, probes a single tetrahedron given six lengths.
    Hessian {
        #[arg(required_unless_present = "shape")]
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        shape: Option<TetShape>,
        #[arg(long)]
        metric: String,
    },
    /// Degeneration class of every tetrahedron. With --shape, a single one.
    Classify {
        #[arg(required_unless_present = "shape")]
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        shape: Option<TetShape>,
        #[arg(long)]
        metric: String,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn print_json(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = serde_json::to_writer_pretty(&mut out, v);
    let _ = writeln!(out);
}

fn load(path: &Path) -> Result<TriangulatedComplex, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    Ok(build_complex(GluingSpec::from_json(&text)?)?)
}

fn load_with_metric(path: &Path, metric: &str) -> Result<(TriangulatedComplex, PolyhedralMetric), Failure> {
    let c = load(path)?;
    let m = MetricSource::parse(metric)?.for_complex(&c)?;
    Ok((c, m))
}

fn six(shape: TetShape, metric: &str) -> Result<EdgeLengths6, Failure> {
    let hyper: Vec<bool> = (0..6).map(|e| shape.is_truncated_edge(e)).collect();
    let v = MetricSource::parse(metric)?.values(6, &hyper)?;
    Ok(EdgeLengths6([v[0], v[1], v[2], v[3], v[4], v[5]]))
}

fn validate(file: &Path) -> CmdResult {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return Err(Failure(format!("cannot read {}: {e}", file.display()))),
    };
    let built = GluingSpec::from_json(&text).and_then(build_complex);
    match built {
        Ok(c) => {
            let v = c.edge_valences();
            print_json(&json!({
                "schema": 1,
                "valid": true,
                "tets": c.tet_count(),
                "edges": c.edge_count(),
                "vertices": c.vertex_count(),
                "vertex_kinds": c.vertex_kinds(),
                "shapes": (0..c.tet_count()).map(|t| c.tet_shape(t).to_string()).collect::<Vec<_>>(),
                "valences": v.valences,
                "min_valence": v.min,
                "all_valences_at_least_ten": v.all_at_least_ten,
                "errors": [],
            }));
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            print_json(&json!({ "schema": 1, "valid": false, "errors": [e.to_string()] }));
            eprintln!("error: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn curvature(file: &Path, metric: &str, extended: bool) -> CmdResult {
    let (c, m) = load_with_metric(file, metric)?;
    let k = if extended { c.extended_curvature(&m)? } else { c.curvature(&m)? };
    print_json(&json!({
        "schema": 1,
        "extended": extended,
        "metric": m.0,
        "curvature": k.0,
        "max_abs": k.max_abs(),
        "valences": c.edge_valences().valences,
    }));
    Ok(ExitCode::SUCCESS)
}

fn write_csv(path: &Path, r: &FlowResult) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    let m = r.final_state.l.0.len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("l_{i}")));
    header.extend((1..=m).map(|i| format!("K_{i}")));
    header.push("h_delta".into());
    w.write_record(&header)?;
    for s in &r.trajectory {
        let mut row = vec![s.t.to_string()];
        row.extend(s.l.0.iter().map(f64::to_string));
        row.extend(s.k_tilde.0.iter().map(f64::to_string));
        row.push(s.h_delta.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn flow(cmd: &Command) -> CmdResult {
    let Command::Flow { file, metric, dt, fixed, tol, max_time, bound, normalize, stride, out_csv, out_json } = cmd
    else {
        unreachable!()
    };
    let (c, m) = load_with_metric(file, metric)?;
    let mut cfg = FlowConfig::default();
    if *fixed {
        cfg.step_mode = StepMode::Fixed;
        cfg.initial_step = 1e-3;
    }
    if let Some(x) = dt {
        cfg.initial_step = *x;
    }
    if let Some(x) = tol {
        cfg.tolerance_curvature = *x;
    }
    if let Some(x) = max_time {
        cfg.max_time = *x;
    }
    if let Some(x) = bound {
        cfg.divergence_bound = *x;
    }
    if let Some(x) = stride {
        cfg.sample_stride = *x;
    }
    cfg.normalize_decorations = *normalize;

    let r = run_flow(&c, &m, &cfg).map_err(|e| match e.last_good {
        Some(s) => Failure(format!("{} (last accepted state: t = {}, l = {:?})", e.error, s.t, s.l.0)),
        None => Failure(e.error.to_string()),
    })?;
    let report = convergence_report(&c, &r)?;
    let summary = json!({
        "schema": 1,
        "initial_metric": m.0,
        "config": cfg,
        "report": report,
    });
    if let Some(p) = out_csv {
        write_csv(p, &r)?;
    }
    if let Some(p) = out_json {
        fs::write(p, serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    print_json(&summary);
    Ok(ExitCode::from(match r.status {
        FlowStatus::Converged => 0,
        FlowStatus::MaxTimeReached => 2,
        FlowStatus::DivergenceSuspected => 3,
    }))
}

fn volume(file: &Path, metric: &str) -> CmdResult {
    let (c, m) = load_with_metric(file, metric)?;
    let mut vols = Vec::new();
    for t in 0..c.tet_count() {
        let a = c.tet_angles(t, &m)?;
        vols.push(tet_volume(c.tet_shape(t), &a)?);
    }
    print_json(&json!({
        "schema": 1,
        "metric": m.0,
        "tet_volumes": vols,
        "total_volume": vols.iter().sum::<f64>(),
    }));
    Ok(ExitCode::SUCCESS)
}

fn tet_hessian_json(shape: TetShape, l: &EdgeLengths6) -> Result<Value, Failure> {
    let h = covolume_hessian(shape, l)?;
    let ideal = 4 - shape.hyperideal_count();
    let kernel: Vec<f64> = decoration_directions(shape).iter().map(|v| h.apply_norm(v)).collect();
    Ok(json!({
        "shape": shape.to_string(),
        "lengths": l.0,
        "eigenvalues": h.eigenvalues(),
        "rank": h.rank(KERNEL_THRESHOLD),
        "expected_rank": 6 - ideal,
        "asymmetry": h.asymmetry(),
        "decoration_kernel_residuals": kernel,
        "conditioning_warning": h.conditioning_warning,
    }))
}

fn matrix_rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    a.clone().svd(false, false).rank(1e-10)
}

fn hessian(file: Option<&Path>, shape: Option<TetShape>, metric: &str) -> CmdResult {
    if let Some(shape) = shape {
        let l = six(shape, metric)?;
        let mut v = tet_hessian_json(shape, &l)?;
        v["schema"] = json!(1);
        print_json(&v);
        return Ok(ExitCode::SUCCESS);
    }
    let (c, m) = load_with_metric(file.expect("clap requires file or shape"), metric)?;
    let mut tets = Vec::new();
    for t in 0..c.tet_count() {
        c.tet_angles(t, &m)?;
        let mut v = tet_hessian_json(c.tet_shape(t), &c.tet_lengths(t, &m))?;
        v["tet"] = json!(t);
        tets.push(v);
    }
    let hm = h_hessian(&c, &m)?;
    let sym = 0.5 * (&hm + hm.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let kernel = ev.iter().filter(|x| x.abs() <= KERNEL_THRESHOLD).count();
    let ideal = c.ideal_vertices();
    let full = c.incidence_matrix();
    let a = DMatrix::from_fn(c.edge_count(), ideal.len(), |e, j| full[(e, ideal[j])]);
    let decoration_dim = matrix_rank(&a);
    let rows: Vec<Vec<f64>> = (0..hm.nrows()).map(|i| hm.row(i).iter().copied().collect()).collect();
    print_json(&json!({
        "schema": 1,
        "metric": m.0,
        "tets": tets,
        "h_hessian": rows,
        "eigenvalues": ev,
        "min_eigenvalue": ev.first(),
        "positive_semidefinite": ev.first().is_none_or(|&x| x >= -KERNEL_THRESHOLD),
        "kernel_dimension": kernel,
        "ideal_vertex_classes": ideal.len(),
        "decoration_dimension": decoration_dim,
        "kernel_matches_decorations": kernel == decoration_dim,
        "kernel_threshold": KERNEL_THRESHOLD,
    }));
    Ok(ExitCode::SUCCESS)
}

fn classify_json(shape: TetShape, l: &EdgeLengths6) -> Result<Value, Failure> {
    Ok(json!({
        "shape": shape.to_string(),
        "lengths": l.0,
        "phi": phi(shape, l)?,
        "class": classify_degeneration(shape, l)?,
        "realizable": is_realizable(shape, l),
    }))
}

fn classify(file: Option<&Path>, shape: Option<TetShape>, metric: &str) -> CmdResult {
    if let Some(shape) = shape {
        let mut v = classify_json(shape, &six(shape, metric)?)?;
        v["schema"] = json!(1);
        print_json(&v);
        return Ok(ExitCode::SUCCESS);
    }
    let (c, m) = load_with_metric(file.expect("clap requires file or shape"), metric)?;
    let mut tets = Vec::new();
    for t in 0..c.tet_count() {
        let mut v = classify_json(c.tet_shape(t), &c.tet_lengths(t, &m))?;
        v["tet"] = json!(t);
        tets.push(v);
    }
    print_json(&json!({ "schema": 1, "metric": m.0, "decorated": c.is_decorated(&m), "tets": tets }));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { file } => validate(file),
        Command::Curvature { file, metric, extended } => curvature(file, metric, *extended),
        cmd @ Command::Flow { .. } => flow(cmd),
        Command::Volume { file, metric } => volume(file, metric),
        Command::Hessian { file, shape, metric } => hessian(file.as_deref(), *shape, metric),
        Command::Classify { file, shape, metric } => classify(file.as_deref(), *shape, metric),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! `bessm`: verification, evaluation, transforms, synthesis and calculus for
//! PSD-pencil realizations.
//!
//! Exit codes: 0 pass, 1 verdict fail, 2 usage or input error, 3 numerical refusal.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bessmertnyi::calculus::{
    calc_pencil, calc_series, make_tuple, pencil_scale, pencil_series, positivity_report, SeriesOptions, TupleClass, TupleRecipe,
};
use bessmertnyi::cayley::CayleyView;
use bessmertnyi::colligation::{agler_identity_residual, colligate, spectrum_condition, synthesis_grid_size};
use bessmertnyi::hunt::{black_box, hunt, to_ndjson, HuntConfig};
use bessmertnyi::io::{self, PencilJson};
use bessmertnyi::kernel::{pencil_from_kernel_samples, sample_kernels};
use bessmertnyi::matrix::{fro, operator_norm};
use bessmertnyi::netlist::{network_pencil, parse_netlist};
use bessmertnyi::real::AntiUnitary;
use bessmertnyi::sampling::{halton_disk_grid, halton_halfplane_grid};
use bessmertnyi::verify::{verify_pencil, VerifyOptions};
use bessmertnyi::{CMatrix, Error, Pencil, RealizedFunction, Tolerances};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bessm", version, about = "Realizations of homogeneous positive-real functions by PSD linear pencils")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Residual tolerance for identity checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the property battery on a pencil and report residuals.
    Verify {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long, default_value_t = 25)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON `{"U": J_U, "H": J_H}` with `H` optional when p = 0.
        #[arg(long)]
        iota: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the Schur complement at points of Π^N.
    Eval {
        #[arg(long)]
        pencil: PathBuf,
        /// One point as JSON, e.g. `[1, [0.5, 2]]`. Repeatable.
        #[arg(long)]
        at: Vec<String>,
        /// JSON file with a list of points.
        #[arg(long)]
        points: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate F(w) = f(z(w)) and the double Cayley transform at disk points.
    Cayley {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        at: Vec<String>,
        #[arg(long)]
        points: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample and factor the kernels of a pencil, or rebuild a pencil from samples.
    Kernels {
        #[arg(long, conflicts_with = "samples")]
        pencil: Option<PathBuf>,
        /// Kernel sample JSON to rebuild a pencil from.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value_t = 25)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Synthesize a selfadjoint unitary colligation, or check a given one.
    Colligate {
        #[arg(long, conflicts_with = "colligation")]
        pencil: Option<PathBuf>,
        #[arg(long)]
        colligation: Option<PathBuf>,
        /// Grid size; defaults to the synthesis rule for the pencil shape.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a pencil on a commuting tuple and test positivity of the real part.
    Calculus {
        #[arg(long)]
        pencil: PathBuf,
        /// JSON list of commuting matrices.
        #[arg(long)]
        tuple: PathBuf,
        /// Read the tuple as strict contractions T and use R = (I + T)(I - T)⁻¹.
        #[arg(long)]
        contraction: bool,
        /// Also evaluate the Herglotz series on T and report its distance to the closed form.
        #[arg(long, requires = "contraction")]
        series: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Convert a conductance netlist to pencil JSON.
    Netlist {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized search for a positivity violation; writes line-delimited JSON.
    Hunt {
        #[arg(long = "vars", default_value_t = 3)]
        num_vars: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
        /// Built-in black-box candidate; repeatable.
        #[arg(long = "black-box")]
        black_boxes: Vec<String>,
        /// Skip the random pencil controls.
        #[arg(long)]
        no_pencils: bool,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Library(e.into())
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(())
        }
    }
}

fn tolerances(common: &Common) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Some(t) = common.tol {
        tol.residual_tol = t;
    }
    tol.validate()?;
    Ok(tol)
}

fn load_pencil(path: &Path) -> Result<Pencil, Failure> {
    Ok(io::pencil_from_json(&read(path)?)?)
}

fn load_realized(path: &Path, tol: Tolerances) -> Result<RealizedFunction, Failure> {
    Ok(serde_json::from_str::<PencilJson>(&read(path)?)?.to_realized(tol)?)
}

fn load_points(at: &[String], file: Option<&Path>) -> Result<Vec<Vec<num_complex::Complex64>>, Failure> {
    let mut points = Vec::new();
    for a in at {
        let parsed = io::points_from_json(a)?;
        if parsed.len() != 1 {
            return Err(Failure::Usage(format!("--at takes a single point, got `{a}`")));
        }
        points.extend(parsed);
    }
    if let Some(f) = file {
        points.extend(io::points_from_json(&read(f)?)?);
    }
    if points.is_empty() {
        return Err(Failure::Usage("no evaluation points given (use --at or --points)".into()));
    }
    Ok(points)
}

fn load_iota(path: &Path, tol: &Tolerances) -> Result<(AntiUnitary, Option<AntiUnitary>), Failure> {
    let v: Value = serde_json::from_str(&read(path)?)?;
    let part = |key: &str| -> Result<Option<AntiUnitary>, Failure> {
        match v.get(key) {
            Some(m) => Ok(Some(AntiUnitary::new(io::matrix_from_value(m.clone())?, tol)?)),
            None => Ok(None),
        }
    };
    let u = part("U")?.ok_or_else(|| Failure::Usage("involution file needs a `U` matrix".into()))?;
    Ok((u, part("H")?))
}

fn matrix_list(values: &[CMatrix]) -> Value {
    Value::Array(values.iter().map(io::matrix_to_value).collect())
}

fn cmd_verify(pencil: &Path, grid: usize, seed: u64, iota: Option<&Path>, common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    let p = load_pencil(pencil)?;
    let iota = iota.map(|f| load_iota(f, &tol)).transpose()?;
    let opts = VerifyOptions {
        grid_size: grid,
        seed,
        tol,
        iota,
        ..Default::default()
    };
    let report = verify_pencil(&p, &opts)?;
    emit(common, &report.to_json())?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
    }
    Ok(report.verdict)
}

fn cmd_eval(pencil: &Path, at: &[String], points: Option<&Path>, common: &Common) -> Outcome {
    let f = load_realized(pencil, tolerances(common)?)?;
    let mut lines = Vec::new();
    for z in load_points(at, points)? {
        lines.push(io::matrix_to_json(&f.eval_schur(&z)?));
    }
    emit(common, &lines.join("\n"))?;
    Ok(true)
}

fn cmd_cayley(pencil: &Path, at: &[String], points: Option<&Path>, common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    let f = load_realized(pencil, tol)?;
    let view = CayleyView::herglotz(&f, tol);
    let mut lines = Vec::new();
    for w in load_points(at, points)? {
        let record = json!({
            "w": serde_json::from_str::<Value>(&io::points_to_json(std::slice::from_ref(&w)))?[0],
            "herglotz": io::matrix_to_value(&view.eval_herglotz(&w)?),
            "schur": io::matrix_to_value(&view.eval_double_cayley(&w)?),
        });
        lines.push(record.to_string());
    }
    emit(common, &lines.join("\n"))?;
    Ok(true)
}

fn cmd_kernels(pencil: Option<&Path>, samples: Option<&Path>, grid: usize, seed: u64, common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    match (pencil, samples) {
        (Some(p), None) => {
            let f = load_realized(p, tol)?;
            let ks = sample_kernels(&f, &halton_halfplane_grid(f.num_vars(), grid, seed))?;
            eprintln!("seed {seed}, {} grid points, identity residual {:.3e}", ks.grid.len(), ks.identity_residual());
            emit(common, &io::kernels_to_json(&ks))?;
            Ok(true)
        }
        (None, Some(s)) => {
            let ks = io::kernels_from_json(&read(s)?)?;
            let rec = pencil_from_kernel_samples(&ks, &tol)?;
            eprintln!(
                "p = {}, interpolation residual {:.3e}, orthogonality residual {:.3e}",
                rec.function.dim_h(),
                rec.interpolation_residual,
                rec.orthogonality_residual
            );
            emit(common, &io::pencil_to_json(rec.function.pencil()))?;
            Ok(rec.interpolation_residual <= tol.residual_tol)
        }
        _ => Err(Failure::Usage("give exactly one of --pencil or --samples".into())),
    }
}

fn cmd_colligate(pencil: Option<&Path>, colligation: Option<&Path>, grid: Option<usize>, seed: u64, common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    match (pencil, colligation) {
        (Some(p), None) => {
            let f = load_realized(p, tol)?;
            let size = grid.unwrap_or_else(|| synthesis_grid_size(&f));
            let g = halton_disk_grid(f.num_vars(), size, 0.7, seed, true);
            let syn = colligate(&f, &g)?;
            eprintln!("seed {seed}, {} grid points, reflected rank {}", g.len(), syn.reflected_rank);
            eprintln!("unitarity residual {:.3e}", syn.unitarity_residual);
            eprintln!("selfadjointness residual {:.3e}", syn.selfadjoint_residual);
            eprintln!("interpolation residual {:.3e}", syn.interpolation_residual);
            emit(common, &io::colligation_to_json(&syn.colligation))?;
            Ok(syn.unitarity_residual <= tol.residual_tol
                && syn.selfadjoint_residual <= tol.residual_tol
                && syn.interpolation_residual <= tol.residual_tol)
        }
        (None, Some(c)) => {
            let col = io::colligation_from_json(&read(c)?, &tol)?;
            let g = halton_disk_grid(col.num_vars(), grid.unwrap_or(5), 0.7, seed, true);
            let (plus, minus) = agler_identity_residual(&col, &g)?;
            let spectrum = spectrum_condition(&col, &tol)?;
            let report = json!({
                "unitarity_residual": col.unitarity_residual(),
                "selfadjoint_residual": col.selfadjoint_residual(),
                "agler_plus": plus,
                "agler_minus": minus,
                "spectrum_distance": spectrum.distance,
                "spectrum_condition": spectrum.holds,
                "seed": seed,
            });
            emit(common, &io::to_json_layout(&report))?;
            Ok(plus.max(minus) <= tol.residual_tol && spectrum.holds)
        }
        _ => Err(Failure::Usage("give exactly one of --pencil or --colligation".into())),
    }
}

fn cmd_calculus(pencil: &Path, tuple: &Path, contraction: bool, series: bool, seed: u64, common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    let f = load_realized(pencil, tol)?;
    let ops: Vec<CMatrix> = match serde_json::from_str::<Value>(&read(tuple)?)? {
        Value::Array(items) => items.into_iter().map(io::matrix_from_value).collect::<Result<_, _>>()?,
        _ => return Err(Failure::Usage("tuple file must be a JSON list of matrices".into())),
    };
    let class = if contraction { TupleClass::Contraction } else { TupleClass::Accretive };
    let t = make_tuple(TupleRecipe::Explicit(ops), Some(class), &tol)?;
    let r = if contraction { t.to_accretive(&tol)? } else { t.clone() };
    let value = calc_pencil(f.pencil(), r.ops(), &tol)?;
    let rep = positivity_report(&value, pencil_scale(f.pencil(), r.ops()), &tol)?;
    let mut report = json!({
        "value": io::matrix_to_value(&value),
        "min_eigenvalue": rep.min_eigenvalue,
        "floor": rep.floor,
        "psd": rep.psd,
        "commutator": r.commutator(),
        "accretivity": r.accretivity(),
    });
    if contraction {
        report["accretive_tuple"] = matrix_list(r.ops());
    }
    if series {
        let ps = pencil_series(&f, seed)?;
        let sv = calc_series(&ps.herglotz, &t, &SeriesOptions::default())?;
        let diff = operator_norm(&(&value - &sv.value));
        report["series"] = json!({
            "seed": seed,
            "degree": sv.degree,
            "tail": sv.tail,
            "difference": diff,
            "relative_difference": diff / (1.0 + fro(&value)),
        });
    }
    emit(common, &io::to_json_layout(&report))?;
    Ok(rep.psd)
}

fn cmd_netlist(file: &Path, common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    let net = parse_netlist(&read(file)?)?;
    let f = network_pencil(&net, tol)?;
    // The uncompressed Laplacian pencil keeps every internal node.
    let raw = Pencil::new(net.num_ports, net.num_internal(), {
        let mut coeffs = vec![CMatrix::zeros(net.nodes.len(), net.nodes.len()); net.num_vars];
        for (k, term) in net.branch_terms() {
            coeffs[k] += term;
        }
        coeffs
    })?;
    eprintln!("{} ports, {} internal nodes, {} variables, realized H dimension {}", net.num_ports, net.num_internal(), net.num_vars, f.dim_h());
    emit(common, &io::pencil_to_json(&raw))?;
    Ok(true)
}

fn cmd_hunt(config: HuntConfig, names: &[String], common: &Common) -> Outcome {
    let tol = tolerances(common)?;
    let boxes = names.iter().map(|n| black_box(n, config.num_vars)).collect::<Result<Vec<_>, _>>()?;
    let records = hunt(&config, &boxes, &tol)?;
    let violations = records.iter().filter(|r| r.violation).count();
    eprintln!("seed {}, {} trials, {} records, {} violations", config.seed, config.trials, records.len(), violations);
    emit(common, &to_ndjson(&records))?;
    Ok(violations == 0)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Verify { pencil, grid, seed, iota, common } => cmd_verify(&pencil, grid, seed, iota.as_deref(), &common),
        Command::Eval { pencil, at, points, common } => cmd_eval(&pencil, &at, points.as_deref(), &common),
        Command::Cayley { pencil, at, points, common } => cmd_cayley(&pencil, &at, points.as_deref(), &common),
        Command::Kernels {
            pencil,
            samples,
            grid,
            seed,
            common,
        } => cmd_kernels(pencil.as_deref(), samples.as_deref(), grid, seed, &common),
        Command::Colligate {
            pencil,
            colligation,
            grid,
            seed,
            common,
        } => cmd_colligate(pencil.as_deref(), colligation.as_deref(), grid, seed, &common),
        Command::Calculus {
            pencil,
            tuple,
            contraction,
            series,
            seed,
            common,
        } => cmd_calculus(&pencil, &tuple, contraction, series, seed, &common),
        Command::Netlist { file, common } => cmd_netlist(&file, &common),
        Command::Hunt {
            num_vars,
            trials,
            seed,
            max_dim,
            black_boxes,
            no_pencils,
            common,
        } => {
            let config = HuntConfig {
                num_vars,
                trials,
                seed,
                max_dim,
                pencils: !no_pencils,
                ..Default::default()
            };
            cmd_hunt(config, &black_boxes, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

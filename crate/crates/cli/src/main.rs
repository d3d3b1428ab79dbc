//! Batch command-line front end for the harmonic Beltrami signature
//! pipeline. Subcommands mirror the experiment workflow: `compute` a
//! signature, `distance` between signatures, `reconstruct` a shape,
//! `classify` a labeled contour directory, and `bench` for the synthetic
//! invariance/robustness suites.

use clap::{Args, Parser, Subcommand};
use hbs_core::classify::{
    confusion_and_accuracy, k_medoids, mds_embed, DistanceMatrix, ShapeClass,
};
use hbs_core::contour::Contour;
use hbs_core::hbs::{
    compute_pipeline, hbs_distance, welding_distance, HbsConfig, HbsField, PipelineOutput,
};
use hbs_core::io;
use hbs_core::reconstruct::{align_similarity, reconstruct_shape, shape_distance};
use hbs_core::{C64, DiskGrid64};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_PARSE: u8 = 2;
const EXIT_GRID: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_PROTOCOL: u8 = 5;

#[derive(Parser)]
#[command(name = "hbs", about = "Harmonic Beltrami signature toolkit")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

/// Run configuration; flags override `--config` file entries.
#[derive(Args, Clone)]
struct RunArgs {
    /// boundary sample count
    #[arg(long, global = true)]
    n: Option<usize>,
    /// disk grid resolution M
    #[arg(long, global = true)]
    grid_m: Option<usize>,
    /// centering tolerance
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// reconstruction boundary count N
    #[arg(long, global = true)]
    recon_n: Option<usize>,
    /// seed for all harness randomness
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads (0 = logical cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// `key = value` config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct RunConfig {
    n: usize,
    grid_m: usize,
    eps: f64,
    recon_n: usize,
    seed: u64,
    jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 200,
            grid_m: 100,
            eps: 1e-5,
            recon_n: 1000,
            seed: 1,
            jobs: 0,
        }
    }
}

impl RunConfig {
    fn resolve(args: &RunArgs) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or(format!("config line {}: expected key = value", lineno + 1))?;
                let key = key.trim();
                let value = value.trim();
                let bad = |e: String| format!("config line {}: {e}", lineno + 1);
                match key {
                    "n" => cfg.n = value.parse().map_err(|e| bad(format!("{e}")))?,
                    "grid_m" => cfg.grid_m = value.parse().map_err(|e| bad(format!("{e}")))?,
                    "eps" => cfg.eps = value.parse().map_err(|e| bad(format!("{e}")))?,
                    "recon_n" => cfg.recon_n = value.parse().map_err(|e| bad(format!("{e}")))?,
                    "seed" => cfg.seed = value.parse().map_err(|e| bad(format!("{e}")))?,
                    "jobs" => cfg.jobs = value.parse().map_err(|e| bad(format!("{e}")))?,
                    other => {
                        return Err(format!("config line {}: unknown key {other:?}", lineno + 1))
                    }
                }
            }
        }
        if let Some(v) = args.n {
            cfg.n = v;
        }
        if let Some(v) = args.grid_m {
            cfg.grid_m = v;
        }
        if let Some(v) = args.eps {
            cfg.eps = v;
        }
        if let Some(v) = args.recon_n {
            cfg.recon_n = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.jobs {
            cfg.jobs = v;
        }
        if cfg.n < 3 || cfg.grid_m < 2 || !(cfg.eps > 0.0) || cfg.recon_n < 100 {
            return Err(format!(
                "invalid configuration: n = {} (need ≥3), grid_m = {} (≥2), eps = {} (>0), recon_n = {} (≥100)",
                cfg.n, cfg.grid_m, cfg.eps, cfg.recon_n
            ));
        }
        Ok(cfg)
    }

    fn hbs(&self) -> HbsConfig {
        HbsConfig {
            samples: self.n,
            grid_m: self.grid_m,
            eps: self.eps,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the signature of a contour (.txt) or mask (.pgm/.pbm) file
    Compute {
        input: PathBuf,
        /// output signature path
        out: PathBuf,
    },
    /// Distance between two signature files
    Distance { a: PathBuf, b: PathBuf },
    /// Reconstruct a shape from a signature file
    Reconstruct {
        signature: PathBuf,
        /// output contour path
        out: PathBuf,
        /// also write an SVG polyline next to the contour
        #[arg(long)]
        svg: bool,
    },
    /// Classify a directory laid out as class-name/shape.txt
    Classify {
        dir: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = ["hbs", "welding"], default_value = "hbs")]
        metric: String,
        /// output directory for the CSV reports
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic invariance and robustness benchmarks
    Bench {
        /// write the 7-class synthetic data set to this directory and exit
        #[arg(long)]
        emit_dataset: Option<PathBuf>,
        /// shapes per class when emitting the data set
        #[arg(long, default_value_t = 8)]
        per_class: usize,
        /// include the (slower) reconstruction round trip
        #[arg(long)]
        full: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(&cli.run) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return ExitCode::from(EXIT_PROTOCOL);
        }
    };
    pool.install(|| run(cli.command, cfg))
}

fn run(cmd: Command, cfg: RunConfig) -> ExitCode {
    match cmd {
        Command::Compute { input, out } => cmd_compute(&input, &out, &cfg),
        Command::Distance { a, b } => cmd_distance(&a, &b),
        Command::Reconstruct {
            signature,
            out,
            svg,
        } => cmd_reconstruct(&signature, &out, svg, &cfg),
        Command::Classify {
            dir,
            k,
            metric,
            out,
        } => cmd_classify(&dir, k, &metric, out.as_deref(), &cfg),
        Command::Bench {
            emit_dataset,
            per_class,
            full,
        } => cmd_bench(emit_dataset.as_deref(), per_class, full, &cfg),
    }
}

fn load_contour(path: &Path) -> Result<Contour<f64>, (u8, String)> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if ext == "pgm" || ext == "pbm" || ext == "pnm" {
        let bytes = std::fs::read(path)
            .map_err(|e| (EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
        let mask = io::parse_pgm(&bytes).map_err(|e| (EXIT_PARSE, e))?;
        hbs_core::contour::trace_boundary(&mask).map_err(|e| (EXIT_PARSE, e.to_string()))
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| (EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
        io::parse_contour(&text).map_err(|e| (EXIT_PARSE, e.to_string()))
    }
}

fn write_file(path: &Path, data: &str) -> Result<(), (u8, String)> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| (EXIT_PARSE, format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, data)
        .map_err(|e| (EXIT_PARSE, format!("cannot write {}: {e}", path.display())))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn cmd_compute(input: &Path, out: &Path, cfg: &RunConfig) -> ExitCode {
    let contour = match load_contour(input) {
        Ok(c) => c,
        Err((code, msg)) => return fail(code, msg),
    };
    let grid = match DiskGrid64::build(cfg.grid_m) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    let output = match compute_pipeline(&contour, &cfg.hbs(), &grid) {
        Ok(o) => o,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    if let Err((code, msg)) = write_file(out, &io::write_signature(&output.hbs)) {
        return fail(code, msg);
    }
    println!(
        "sup-norm {}\ncertificate: arg-integral residual {} tau1 {}",
        output.hbs.sup_norm(),
        output.hbs.tau0_residual,
        output.hbs.tau1
    );
    ExitCode::SUCCESS
}

fn cmd_distance(a: &Path, b: &Path) -> ExitCode {
    let load = |p: &Path| -> Result<HbsField<f64>, (u8, String)> {
        let text = std::fs::read_to_string(p)
            .map_err(|e| (EXIT_PARSE, format!("cannot read {}: {e}", p.display())))?;
        io::parse_signature(&text).map_err(|e| (EXIT_PARSE, e))
    };
    let sa = match load(a) {
        Ok(s) => s,
        Err((c, m)) => return fail(c, m),
    };
    let sb = match load(b) {
        Ok(s) => s,
        Err((c, m)) => return fail(c, m),
    };
    match hbs_distance(&sa, &sb) {
        Ok(d) => {
            println!("{d}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_GRID, e),
    }
}

fn cmd_reconstruct(signature: &Path, out: &Path, svg: bool, cfg: &RunConfig) -> ExitCode {
    let text = match std::fs::read_to_string(signature) {
        Ok(t) => t,
        Err(e) => {
            return fail(
                EXIT_PARSE,
                format!("cannot read {}: {e}", signature.display()),
            )
        }
    };
    let sig: HbsField<f64> = match io::parse_signature(&text) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let rec = match reconstruct_shape(&sig, cfg.recon_n) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    if let Err((c, m)) = write_file(out, &io::write_contour(&rec.boundary)) {
        return fail(c, m);
    }
    if svg {
        let svg_path = out.with_extension("svg");
        if let Err((c, m)) = write_file(&svg_path, &io::contour_svg(&rec.boundary)) {
            return fail(c, m);
        }
    }
    println!(
        "mu residual {}\npins |F(0)| {} |F(1)-1| {}",
        rec.mu_residual, rec.pin_residuals.0, rec.pin_residuals.1
    );
    ExitCode::SUCCESS
}

struct LabeledShape {
    label: String,
    class: String,
    contour: Contour<f64>,
}

fn load_directory(dir: &Path) -> Result<Vec<LabeledShape>, (u8, String)> {
    let mut shapes = Vec::new();
    let mut classes: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| (EXIT_PARSE, format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    for class_dir in classes {
        let class = class_dir
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .to_string();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&class_dir)
            .map_err(|e| {
                (
                    EXIT_PARSE,
                    format!("cannot read {}: {e}", class_dir.display()),
                )
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for f in files {
            let contour = load_contour(&f)?;
            let stem = f.file_stem().unwrap_or_default().to_string_lossy();
            shapes.push(LabeledShape {
                label: format!("{class}/{stem}"),
                class: class.clone(),
                contour,
            });
        }
    }
    Ok(shapes)
}

fn cmd_classify(
    dir: &Path,
    k: usize,
    metric: &str,
    out: Option<&Path>,
    cfg: &RunConfig,
) -> ExitCode {
    let shapes = match load_directory(dir) {
        Ok(s) => s,
        Err((c, m)) => return fail(c, m),
    };
    if shapes.is_empty() {
        return fail(EXIT_PROTOCOL, "no shapes found");
    }
    let mut class_names: Vec<String> = shapes.iter().map(|s| s.class.clone()).collect();
    class_names.sort();
    class_names.dedup();
    if class_names.len() < k || shapes.len() < k {
        return fail(
            EXIT_PROTOCOL,
            format!(
                "k = {k} exceeds the {} classes / {} shapes available",
                class_names.len(),
                shapes.len()
            ),
        );
    }
    let grid = match DiskGrid64::build(cfg.grid_m) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    let pipelines: Result<Vec<PipelineOutput<f64>>, _> = shapes
        .par_iter()
        .map(|s| compute_pipeline(&s.contour, &cfg.hbs(), &grid))
        .collect();
    let pipelines = match pipelines {
        Ok(p) => p,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    let labels: Vec<String> = shapes.iter().map(|s| s.label.clone()).collect();
    let n = shapes.len();
    let matrix = match metric {
        "hbs" => DistanceMatrix::from_pairwise(labels.clone(), n, |i, j| {
            hbs_distance(&pipelines[i].hbs, &pipelines[j].hbs).expect("uniform grid")
        }),
        _ => DistanceMatrix::from_pairwise(labels.clone(), n, |i, j| {
            welding_distance(
                &pipelines[i].welding_baseline,
                &pipelines[j].welding_baseline,
            )
            .expect("baseline weldings are normalized")
        }),
    };
    let coords = mds_embed(&matrix, 2);
    let predicted = match k_medoids(&coords, k, cfg.seed) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_PROTOCOL, e),
    };
    let truth: Vec<usize> = shapes
        .iter()
        .map(|s| class_names.iter().position(|c| *c == s.class).unwrap())
        .collect();
    let (confusion, accuracy) = match confusion_and_accuracy(&predicted, &truth) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_PROTOCOL, e),
    };
    if let Some(out) = out {
        let w = write_file(&out.join("distances.csv"), &io::distance_matrix_csv(&matrix))
            .and_then(|()| {
                write_file(&out.join("embedding.csv"), &io::embedding_csv(&labels, &coords))
            })
            .and_then(|()| write_file(&out.join("confusion.csv"), &io::confusion_csv(&confusion)))
            .and_then(|()| {
                let mut lines = String::new();
                for (l, p) in labels.iter().zip(&predicted) {
                    lines.push_str(&format!("{l},{p}\n"));
                }
                write_file(&out.join("labels.csv"), &lines)
            });
        if let Err((c, m)) = w {
            return fail(c, m);
        }
    }
    println!("{accuracy}");
    ExitCode::SUCCESS
}

fn cmd_bench(
    emit_dataset: Option<&Path>,
    per_class: usize,
    full: bool,
    cfg: &RunConfig,
) -> ExitCode {
    if let Some(dir) = emit_dataset {
        let data = hbs_core::classify::synth_dataset::<f64>(&ShapeClass::ALL, per_class, cfg.seed);
        let mut counters = std::collections::HashMap::new();
        for (class, shape) in &data {
            let idx = counters.entry(class.name()).or_insert(0usize);
            *idx += 1;
            let path = dir.join(class.name()).join(format!("{:02}.txt", idx));
            if let Err((c, m)) = write_file(&path, &io::write_contour(shape)) {
                return fail(c, m);
            }
        }
        println!("wrote {} shapes under {}", data.len(), dir.display());
        return ExitCode::SUCCESS;
    }

    let grid = match DiskGrid64::build(cfg.grid_m) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    let shapes = hbs_core::classify::synth_dataset::<f64>(&ShapeClass::ALL[..5], 1, cfg.seed);

    // invariance sweep over the seven similarity transforms
    let transforms: [(f64, f64, C64); 7] = [
        (1.5, 0.0, C64::new(0.0, 0.0)),
        (0.5, 0.0, C64::new(0.0, 0.0)),
        (3.0, 0.0, C64::new(0.0, 0.0)),
        (1.0, 0.2 * std::f64::consts::PI, C64::new(0.0, 0.0)),
        (1.0, -0.85 * std::f64::consts::PI, C64::new(0.0, 0.0)),
        (1.0, 0.0, C64::new(100.0, 20.0)),
        (1.0, 0.0, C64::new(350.0, 600.0)),
    ];
    let mut worst: f64 = 0.0;
    for (class, shape) in &shapes {
        let base = match compute_pipeline(shape, &cfg.hbs(), &grid) {
            Ok(o) => o.hbs,
            Err(e) => return fail(EXIT_SOLVER, e),
        };
        let results: Result<Vec<f64>, _> = transforms
            .par_iter()
            .map(|&(scale, rot, shift)| {
                let moved = shape.transform(scale, rot, shift);
                compute_pipeline(&moved, &cfg.hbs(), &grid)
                    .map(|o| hbs_distance(&base, &o.hbs).expect("same grid"))
            })
            .collect();
        match results {
            Ok(ds) => {
                let m = ds.iter().cloned().fold(0.0f64, f64::max);
                println!("invariance {}: max distance {m:e}", class.name());
                worst = worst.max(m);
            }
            Err(e) => return fail(EXIT_SOLVER, e),
        }
    }
    println!("invariance: worst {worst:e}");

    // robustness ordering: three nested boundary edits of growing extent
    let base = bump_shape(0.0);
    let base_sig = match compute_pipeline(&base, &cfg.hbs(), &grid) {
        Ok(o) => o.hbs,
        Err(e) => return fail(EXIT_SOLVER, e),
    };
    let mut last = 0.0;
    for amp in [0.08, 0.16, 0.3] {
        let edited = bump_shape(amp);
        let sig = match compute_pipeline(&edited, &cfg.hbs(), &grid) {
            Ok(o) => o.hbs,
            Err(e) => return fail(EXIT_SOLVER, e),
        };
        let d = hbs_distance(&base_sig, &sig).expect("same grid");
        println!("robustness edit {amp}: distance {d}");
        if d <= last {
            println!("robustness ordering violated");
        }
        last = d;
    }

    if full {
        let (_, shape) = &shapes[0];
        let sig = match compute_pipeline(shape, &cfg.hbs(), &grid) {
            Ok(o) => o.hbs,
            Err(e) => return fail(EXIT_SOLVER, e),
        };
        let rec = match reconstruct_shape(&sig, cfg.recon_n) {
            Ok(r) => r,
            Err(e) => return fail(EXIT_SOLVER, e),
        };
        let aligned = align_similarity(shape, &rec.boundary);
        let d = shape_distance(shape, &aligned);
        println!(
            "roundtrip: d_Omega {} ({}% of diameter)",
            d,
            100.0 * d / shape.diameter()
        );
    }
    ExitCode::SUCCESS
}

/// Blob with a boundary bump whose extent grows with `amp`; `amp = 0` is
/// the unedited shape.
fn bump_shape(amp: f64) -> Contour<f64> {
    let n = 512;
    let pts: Vec<C64> = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            let mut r = 1.0 + 0.15 * (2.0 * t).cos();
            let d = (t - 1.1).abs();
            let width = 0.35;
            if amp > 0.0 && d < width {
                let s = (1.0 - (d / width).powi(2)).powi(2);
                r += amp * s;
            }
            C64::from_polar(r, -t)
        })
        .collect();
    Contour::new(pts).expect("bump shape is simple")
}

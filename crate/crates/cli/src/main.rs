use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use octa::angles::{classify_general, deformation_path, placement_test, GeneralClass, SolidAngle, Tag};
use octa::inscriber::{certify, continue_to_surface, SolveConfig};
use octa::io::{read_polytope, with_schema};
use octa::octahedron::OctahedronPose;
use octa::sphere::SphTriangle;
use octa::Error;

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_FAILED: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "octa",
    version,
    about = "Regular octahedra inscribed in solid angles and convex polytopes"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress warnings on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a solid angle given as JSON, or a vertex of a polytope file.
    Classify {
        input: PathBuf,
        /// Take the angle at this vertex of a polytope file.
        #[arg(long)]
        vertex: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Find and certify an octahedron inscribed in a polytope file.
    Inscribe {
        input: PathBuf,
        /// Certification tolerance relative to the diameter.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Initial smoothing radius (default: a fifth of the inradius).
        #[arg(long)]
        eps0: Option<f64>,
        /// Rotations per multistart center.
        #[arg(long)]
        seeds: Option<usize>,
        /// Write the final pose as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the final octahedron as OBJ.
        #[arg(long)]
        obj: Option<PathBuf>,
        /// Write the continuation trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Deform a non-special triangle until a side exceeds pi/3.
    Path {
        #[arg(num_args = 3, allow_negative_numbers = true)]
        sides: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Check a pose JSON against a polytope file.
    Certify {
        input: PathBuf,
        pose: PathBuf,
        /// Tolerance relative to the diameter.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InscriptionFailed(_) => EXIT_FAILED,
            Error::Io(_)
            | Error::Json(_)
            | Error::Parse(_)
            | Error::InvalidPoint(_)
            | Error::DegenerateTriangle(_)
            | Error::InvalidPolygon(_)
            | Error::OutOfRange { .. }
            | Error::InvalidSolidAngle(_)
            | Error::NotTrihedral(_)
            | Error::Degenerate(_)
            | Error::EpsilonOutOfRange { .. } => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("{}: {e}", path.display()),
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

struct Output {
    report: Value,
    code: u8,
    warnings: Vec<String>,
}

fn classify(input: &Path, vertex: Option<usize>, tol: f64) -> Result<Output, Failure> {
    let angle = match vertex {
        Some(v) => {
            let poly = read_polytope(input).map_err(|e| usage(format!("{}: {e}", input.display())))?;
            if v >= poly.vertices().len() {
                return Err(usage(format!(
                    "vertex {v} out of range ({} vertices)",
                    poly.vertices().len()
                )));
            }
            poly.solid_angle_at(v)?
        }
        None => serde_json::from_str::<SolidAngle>(&read(input)?)
            .map_err(|e| usage(format!("{}: {e}", input.display())))?,
    };
    let class = classify_general(&angle, tol)?;
    let mut report = json!({ "facet_angles": angle.facet_angles() });
    let code = match &class {
        GeneralClass::Trihedral(c) => {
            report["tag"] = c.tag.to_string().into();
            report["margin"] = c.margin.into();
            if let Some(cert) = &c.certificate {
                report["certificate"] = serde_json::to_value(cert).expect("plain data");
            }
            match c.tag {
                Tag::Special => 0,
                Tag::NonSpecial => EXIT_NEGATIVE,
                Tag::Indeterminate => EXIT_INDETERMINATE,
            }
        }
        GeneralClass::InA0 { margin }
        | GeneralClass::NotInA0 { margin }
        | GeneralClass::Indeterminate { margin } => {
            report["tag"] = class.label().into();
            report["margin"] = (*margin).into();
            if let Some(note) = class.note() {
                report["note"] = note.into();
            }
            match class {
                GeneralClass::NotInA0 { .. } => 0,
                GeneralClass::InA0 { .. } => EXIT_NEGATIVE,
                _ => EXIT_INDETERMINATE,
            }
        }
    };
    Ok(Output {
        report,
        code,
        warnings: vec![],
    })
}

struct InscribeArgs<'a> {
    input: &'a Path,
    tol: f64,
    eps0: Option<f64>,
    seeds: Option<usize>,
    seed: u64,
    json: Option<&'a Path>,
    obj: Option<&'a Path>,
    trace: Option<&'a Path>,
}

fn inscribe(a: InscribeArgs) -> Result<Output, Failure> {
    let poly = read_polytope(a.input).map_err(|e| usage(format!("{}: {e}", a.input.display())))?;
    let mut cfg = SolveConfig {
        eps0: a.eps0,
        certify_tol_rel: a.tol,
        seed: a.seed,
        ..SolveConfig::default()
    };
    if let Some(s) = a.seeds {
        cfg.rotations = s;
    }
    let ins = continue_to_surface(&poly, &cfg)?;
    let pose = ins.report.pose;
    if let Some(p) = a.json {
        write(
            p,
            &pretty(&with_schema(serde_json::to_value(pose).expect("plain data"))),
        )?;
    }
    if let Some(p) = a.obj {
        write(p, &pose.to_obj())?;
    }
    if let Some(p) = a.trace {
        write(
            p,
            &pretty(&with_schema(
                serde_json::to_value(&ins.trace).expect("plain data"),
            )),
        )?;
    }
    let report = json!({
        "certified": ins.certification.certified,
        "tolerance": ins.certification.tolerance,
        "max_distance": ins.certification.max_distance,
        "diameter": poly.diameter(),
        "pose": pose,
        "vertices": pose.vertices().iter().map(|v| [v.x, v.y, v.z]).collect::<Vec<_>>(),
        "certification": ins.certification,
        "solve": ins.report,
        "continuation_steps": ins.trace.steps.len(),
        "collapses": ins.collapses,
        "warnings": ins.warnings,
    });
    Ok(Output {
        report,
        code: if ins.certification.certified {
            0
        } else {
            EXIT_NEGATIVE
        },
        warnings: ins.warnings,
    })
}

fn path(sides: &[f64], steps: usize, tol: f64) -> Result<Output, Failure> {
    let tri = SphTriangle::from_sides(sides[0], sides[1], sides[2])?;
    let path = match deformation_path(&tri, steps, tol) {
        Ok(p) => p,
        Err(Error::NotNonSpecial(tag)) => {
            let code = if tag == Tag::Special.to_string() {
                EXIT_NEGATIVE
            } else {
                EXIT_INDETERMINATE
            };
            return Err(Failure {
                code,
                message: format!("triangle classifies {tag}; a path needs a NON_SPECIAL start"),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let steps: Vec<Value> = path
        .iter()
        .map(|t| {
            let c = placement_test(t, tol);
            json!({ "sides": t.side_lengths(), "tag": c.tag.to_string(), "margin": c.margin })
        })
        .collect();
    let last = path.last().expect("paths are nonempty");
    Ok(Output {
        report: json!({ "steps": steps, "final_max_side": last.max_side() }),
        code: 0,
        warnings: vec![],
    })
}

fn certify_cmd(input: &Path, pose: &Path, tol: f64) -> Result<Output, Failure> {
    let poly = read_polytope(input).map_err(|e| usage(format!("{}: {e}", input.display())))?;
    let pose: OctahedronPose =
        serde_json::from_str(&read(pose)?).map_err(|e| usage(format!("{}: {e}", pose.display())))?;
    let cert = certify(&poly, &pose, tol * poly.diameter());
    let code = if cert.certified { 0 } else { EXIT_NEGATIVE };
    Ok(Output {
        report: serde_json::to_value(cert).expect("plain data"),
        code,
        warnings: vec![],
    })
}

fn run(cli: Cli) -> Result<Output, Failure> {
    match &cli.cmd {
        Cmd::Classify { input, vertex, tol } => classify(input, *vertex, *tol),
        Cmd::Inscribe {
            input,
            tol,
            eps0,
            seeds,
            json,
            obj,
            trace,
        } => inscribe(InscribeArgs {
            input,
            tol: *tol,
            eps0: *eps0,
            seeds: *seeds,
            seed: cli.seed,
            json: json.as_deref(),
            obj: obj.as_deref(),
            trace: trace.as_deref(),
        }),
        Cmd::Path { sides, steps, tol } => path(sides, *steps, *tol),
        Cmd::Certify { input, pose, tol } => certify_cmd(input, pose, *tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let quiet = cli.quiet;
    let out = cli.out.clone();
    match run(cli) {
        Ok(o) => {
            if !quiet {
                for w in &o.warnings {
                    eprintln!("warning: {w}");
                }
            }
            let text = pretty(&with_schema(o.report));
            match out {
                Some(p) => {
                    if let Err(f) = write(&p, &text) {
                        eprintln!("octa: {}", f.message);
                        return ExitCode::from(f.code);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("octa: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

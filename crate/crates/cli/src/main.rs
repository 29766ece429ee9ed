//! `cbricks` command-line tool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cbricks::bundled;
use cbricks::certify::{certify, FlowEvidence};
use cbricks::complex::CellComplex;
use cbricks::fintop::CellSet;
use cbricks::formats::{parse_complex, ComplexFile, MorseGraphFile, MvfFile, ReportFile, SectionFile};
use cbricks::mvf::{morse_decomposition, MorseDecomposition, MultivectorField};
use cbricks::pipeline::{build_mvf, check::perturb_mesh, check_mesh, CheckConfig, FlowModel, PipelineError, TriMesh, VectorField};
use cbricks::render::{render_svg, RenderOptions};
use cbricks::section::{build_section, propose_section, toplex_coarsening};

#[derive(Parser)]
#[command(name = "cbricks", version, about = "Certify periodic orbits of planar flows from transverse triangulations")]
struct Cli {
    /// Worker threads for the transversality checks (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check transversality of every mesh edge and vertex.
    Validate(Common),
    /// Write the induced multivector field (and optionally its complex).
    Mvf {
        #[command(flatten)]
        common: Common,
        /// Also write the simplicial complex of the mesh here.
        #[arg(long)]
        complex_out: Option<PathBuf>,
    },
    /// Morse decomposition with Conley indices.
    InvariantSets {
        #[command(flatten)]
        common: Common,
        /// Also write the Morse graph in Graphviz format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build a combinatorial Poincaré section and its shifts.
    Section {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
    },
    /// Check every hypothesis of the periodic orbit criterion.
    Certify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
    },
    /// Draw the mesh, crossing ticks and invariant sets as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        /// Shade these Morse sets (all when omitted).
        #[arg(long, value_delimiter = ',')]
        sets: Option<Vec<usize>>,
        #[arg(long)]
        no_mesh: bool,
        #[arg(long)]
        no_ticks: bool,
        #[arg(long, default_value_t = 800.0)]
        width: f64,
    },
    /// Jitter interior vertices until every check is determined.
    Perturb {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        /// Jitter radius as a fraction of the shortest incident edge.
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Mesh JSON.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Vector field file with lines `xdot = ...` and `ydot = ...`.
    #[arg(long, conflicts_with = "field_expr")]
    field: Option<PathBuf>,
    /// Inline vector field, e.g. "-y; x".
    #[arg(long)]
    field_expr: Option<String>,
    /// Complex JSON (combinatorial input).
    #[arg(long, conflicts_with = "mesh")]
    complex: Option<PathBuf>,
    /// Multivector field JSON over `--complex`.
    #[arg(long, requires = "complex")]
    mvf: Option<PathBuf>,
    /// Bundled dataset: circles, vdp, clorenz or circle3.
    #[arg(long, conflicts_with_all = ["mesh", "complex"])]
    example: Option<String>,
    /// Maximal bisection depth.
    #[arg(long, env = "CB_DEPTH", default_value_t = 8)]
    depth: u32,
    /// Required margin of a determining enclosure from zero.
    #[arg(long, env = "CB_EPS", default_value_t = 0.0)]
    eps: f64,
    #[arg(long, env = "CB_SEED", default_value_t = 1)]
    seed: u64,
    /// Output file (standard output when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Target {
    /// Morse set number from `invariant-sets`.
    #[arg(long, conflicts_with = "cells")]
    set: Option<usize>,
    /// Explicit invariant set as comma separated cell ids.
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<String>>,
    /// Section cells; proposed automatically when omitted.
    #[arg(long, value_delimiter = ',')]
    section: Option<Vec<String>>,
}

/// Failures that map to exit code 2 rather than 1.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

/// At most a screenful of ids.
fn brief(ids: &[String]) -> String {
    const SHOWN: usize = 20;
    if ids.len() <= SHOWN {
        ids.join(", ")
    } else {
        format!("{} and {} more", ids[..SHOWN].join(", "), ids.len() - SHOWN)
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable") + "\n"
}

struct Flow {
    mesh: TriMesh,
    field: VectorField,
}

enum Input {
    Flow(Box<Flow>),
    Combinatorial(Box<(CellComplex, MultivectorField)>),
}

impl Common {
    fn config(&self) -> CheckConfig {
        CheckConfig { depth: self.depth, eps: self.eps }
    }

    fn load(&self) -> Result<Input> {
        if let Some(name) = &self.example {
            return Ok(match name.as_str() {
                "circles" | "vdp" => {
                    let ex = if name == "circles" { bundled::circles() } else { bundled::vdp() };
                    Input::Flow(Box::new(Flow { mesh: ex.mesh, field: ex.field }))
                }
                "clorenz" => Input::Combinatorial(Box::new(bundled::clorenz())),
                "circle3" => Input::Combinatorial(Box::new(bundled::circle3())),
                _ => bail!("unknown example {name}; expected circles, vdp, clorenz or circle3"),
            });
        }
        if let Some(cp) = &self.complex {
            let c = parse_complex(&read(cp)?).with_context(|| format!("invalid complex {}", cp.display()))?;
            let mp = self.mvf.as_ref().ok_or_else(|| anyhow!("--complex needs --mvf"))?;
            let v = MvfFile::parse(&read(mp)?).and_then(|f| f.build(&c)).with_context(|| format!("invalid field {}", mp.display()))?;
            return Ok(Input::Combinatorial(Box::new((c, v))));
        }
        let mp = self.mesh.as_ref().ok_or_else(|| anyhow!("give --mesh with --field, --complex with --mvf, or --example"))?;
        let mesh = TriMesh::parse(&read(mp)?).with_context(|| format!("invalid mesh {}", mp.display()))?;
        let text = match (&self.field, &self.field_expr) {
            (Some(p), _) => read(p)?,
            (None, Some(e)) => e.clone(),
            (None, None) => bail!("--mesh needs --field or --field-expr"),
        };
        let field = VectorField::parse(&text).map_err(|e| anyhow!("invalid vector field: {e}"))?;
        Ok(Input::Flow(Box::new(Flow { mesh, field })))
    }

    fn load_flow(&self) -> Result<Flow> {
        match self.load()? {
            Input::Flow(f) => Ok(*f),
            Input::Combinatorial(_) => bail!("this command needs a mesh and a vector field"),
        }
    }
}

/// The complex, field and dynamics domain of either kind of input.
struct Analysis {
    c: CellComplex,
    v: MultivectorField,
    domain: CellSet,
    flow: Option<(Flow, FlowModel)>,
}

fn analysis(common: &Common) -> Result<Analysis> {
    match common.load()? {
        Input::Combinatorial(cv) => {
            let (c, v) = *cv;
            let domain = c.poset().full_set();
            Ok(Analysis { c, v, domain, flow: None })
        }
        Input::Flow(flow) => {
            let rep = check_mesh(&flow.mesh, &flow.field, &common.config());
            let model = match build_mvf(&flow.mesh, &rep) {
                Ok(m) => m,
                Err(PipelineError::Undetermined(ids)) => return Err(Rejected(format!("undetermined cells: {}", brief(&ids))).into()),
                Err(e) => return Err(e.into()),
            };
            let c = flow.mesh.complex.clone();
            let domain = model.domain(&c);
            Ok(Analysis { v: model.mvf.clone(), c, domain, flow: Some((*flow, model)) })
        }
    }
}

fn target_set(a: &Analysis, md: &MorseDecomposition, t: &Target) -> Result<CellSet> {
    match (&t.set, &t.cells) {
        (Some(k), _) => md.sets.get(*k).map(|s| s.cells.clone()).ok_or_else(|| anyhow!("no Morse set {k}; there are {}", md.sets.len())),
        (None, Some(ids)) => a.c.set_of_ids(ids).map_err(|e| anyhow!("{e}")),
        (None, None) => bail!("give --set or --cells"),
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().context("thread pool")?;
    }
    match cli.command {
        Command::Validate(common) => {
            let flow = common.load_flow()?;
            let rep = check_mesh(&flow.mesh, &flow.field, &common.config());
            let file = ReportFile::describe(&flow.mesh, &rep);
            emit(&common.out, &json(&file))?;
            eprintln!(
                "{} edges, {} vertices, {} undetermined, {} triangles not proven zero-free",
                rep.edges.len(),
                rep.vertices.len(),
                rep.score(),
                file.unverified_triangles.len()
            );
            if !file.determined {
                return Err(Rejected(format!("undetermined cells: {}", brief(&file.undetermined))).into());
            }
        }
        Command::Mvf { common, complex_out } => {
            let a = analysis(&common)?;
            emit(&common.out, &json(&MvfFile::describe(&a.c, &a.v)))?;
            if let Some(p) = complex_out {
                emit(&Some(p), &json(&ComplexFile::describe(&a.c)))?;
            }
        }
        Command::InvariantSets { common, dot } => {
            let a = analysis(&common)?;
            let md = morse_decomposition(&a.c, &a.v, &a.domain);
            let file = MorseGraphFile::describe(&a.c, &md);
            emit(&common.out, &json(&file))?;
            if let Some(p) = dot {
                emit(&Some(p), &file.to_dot())?;
            }
            for s in &file.sets {
                let b = s.betti.as_ref().map_or("undefined".to_string(), |b| b.to_string());
                eprintln!("set {}: {} cells, {} toplexes, index {b}, isolated {}", s.id, s.cells.len(), s.toplexes, s.isolated);
            }
        }
        Command::Section { common, target } => {
            let a = analysis(&common)?;
            let md = morse_decomposition(&a.c, &a.v, &a.domain);
            let set = target_set(&a, &md, &target)?;
            let (sd, co) = match &target.section {
                Some(ids) => {
                    let p = a.c.set_of_ids(ids).map_err(|e| anyhow!("{e}"))?;
                    let sd = build_section(&a.c, &a.v, &set, &p).map_err(|e| Rejected(e.to_string()))?;
                    let co = toplex_coarsening(&a.c, &sd).map_err(|e| Rejected(e.to_string()))?;
                    (sd, co)
                }
                None => {
                    let ps = propose_section(&a.c, &a.v, &set).map_err(|e| Rejected(e.to_string()))?;
                    (ps.data, ps.coarsening)
                }
            };
            emit(&common.out, &json(&SectionFile::describe(&a.c, &sd, &co)))?;
            eprintln!("section accepted: kmax {}, nbar {}", sd.kmax, sd.nbar);
        }
        Command::Certify { common, target } => {
            let a = analysis(&common)?;
            let md = morse_decomposition(&a.c, &a.v, &a.domain);
            let set = target_set(&a, &md, &target)?;
            let p = match &target.section {
                Some(ids) => Some(a.c.set_of_ids(ids).map_err(|e| anyhow!("{e}"))?),
                None => None,
            };
            let ev = a.flow.as_ref().map(|(f, m)| FlowEvidence { field_text: &f.field.text, outflow: &m.outflow, unverified: &m.unverified });
            let cert = certify(&a.c, &a.v, &set, p.as_ref(), ev.as_ref());
            emit(&common.out, &json(&cert))?;
            eprintln!("{}", cert.conclusion);
            if !cert.certified {
                let failed: Vec<&str> = cert.failed().map(|e| e.hypothesis.as_str()).collect();
                return Err(Rejected(format!("rejected: {}", failed.join("; "))).into());
            }
        }
        Command::Render { common, sets, no_mesh, no_ticks, width } => {
            let a = analysis(&common)?;
            let (flow, model) = a.flow.as_ref().ok_or_else(|| anyhow!("render needs a mesh and a vector field"))?;
            let md = morse_decomposition(&a.c, &a.v, &a.domain);
            let chosen: Vec<CellSet> = match sets {
                Some(ks) => {
                    ks.iter().map(|&k| md.sets.get(k).map(|s| s.cells.clone()).ok_or_else(|| anyhow!("no Morse set {k}"))).collect::<Result<_>>()?
                }
                None => md.sets.iter().map(|s| s.cells.clone()).collect(),
            };
            let opts = RenderOptions { width, show_mesh: !no_mesh, ..RenderOptions::default() };
            let report = if no_ticks { None } else { Some(&model.report) };
            emit(&common.out, &render_svg(&flow.mesh, report, &chosen, &opts))?;
        }
        Command::Perturb { common, rounds, fraction } => {
            let flow = common.load_flow()?;
            let cfg = common.config();
            let mesh = perturb_mesh(&flow.mesh, &flow.field, &cfg, common.seed, rounds, fraction);
            emit(&common.out, &(serde_json::to_string(&mesh.to_file()).expect("serializable") + "\n"))?;
            let left = check_mesh(&mesh, &flow.field, &cfg).score();
            eprintln!("{left} undetermined cells after perturbation");
            if left > 0 {
                return Err(Rejected(format!("{left} cells still undetermined")).into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Rejected>() => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

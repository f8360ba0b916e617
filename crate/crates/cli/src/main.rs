//! Reporting CLI for group-lattice differential calculi.
//!
//! Subcommands: `analyze` (classification report), `dot` (Graphviz
//! export), `coset` (Schreier diagram, action table and reduction
//! relations), `ym` (Yang-Mills action of a gauge configuration file) and
//! `check` (seeded invariant suites). All JSON output has sorted keys, so
//! the same flags and seed give byte-identical bytes.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use glat::algebra::{matrix_from_json, MatrixFn};
use glat::checks;
use glat::coset::{build_coset_diagram, relations_to_json, CosetCalculus};
use glat::forms::Calculus;
use glat::gauge::GaugeField;
use glat::group::{build_group, GroupSpec};
use glat::lattice::GroupLattice;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "glat", version, about = "differential geometry on group lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct LatticeArgs {
    /// Group spec, e.g. "Z(4)", "S(3)", "A(5)", "Z(3)xZ(3)"
    #[arg(long)]
    group: String,
    /// Comma separated elements of S, e.g. "(12),(13),(23)" or "1,2"
    #[arg(long)]
    s: String,
    /// Comparison tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Highest grade with relation data
    #[arg(long, default_value_t = 4)]
    grade_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Classification report: S-split, polygons, cycles, 2-form counts
    Analyze {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Write output here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graphviz DOT export of the lattice
    Dot {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schreier coset diagram, action table and reduction relations
    Coset {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Comma separated subgroup elements, e.g. "e,(12)"
        #[arg(long)]
        h: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Yang-Mills action of a gauge configuration file
    Ym {
        /// JSON file: {group, S, m, W: {h: {site: matrix}}}
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded invariant suites
    Check {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Fiber dimension for the gauge suite
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Trials per suite
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_lattice(args: &LatticeArgs) -> anyhow::Result<GroupLattice> {
    let spec = GroupSpec::parse(&args.group)?;
    let group = build_group(&spec)?;
    let s = group
        .resolve_list(&args.s)
        .with_context(|| format!("while resolving S = {:?}", args.s))?;
    Ok(GroupLattice::new(group, &s)?)
}

fn build_calculus(args: &LatticeArgs) -> anyhow::Result<Calculus> {
    Ok(Calculus::with_options(
        build_lattice(args)?,
        args.tol,
        args.grade_cap,
    ))
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn cmd_analyze(args: &LatticeArgs, out: &Option<PathBuf>) -> anyhow::Result<()> {
    let cal = build_calculus(args)?;
    let lattice = cal.lattice();
    let polygons = lattice.polygons();
    let report = json!({
        "group": args.group,
        "order": lattice.order(),
        "sites": lattice.order(),
        "s": lattice.s().iter().map(|&h| lattice.group().label(h)).collect::<Vec<_>>(),
        "out_degree": lattice.s_len(),
        "bicovariant": lattice.is_bicovariant(),
        "universal_calculus": lattice.is_universal(),
        "connected_components": lattice.connected_components().len(),
        "biangles": polygons.biangles.len(),
        "triangles": polygons.triangles.len(),
        "quadrangle_classes": polygons.quadrangles.len(),
        "relations_2form": lattice.s2().len(),
        "independent_2forms": cal.independent_2form_words(),
        "classification": lattice.classification_json(),
    });
    emit_json(out, &report)
}

fn cmd_coset(
    args: &LatticeArgs,
    h: &str,
    format: Format,
    out: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let cal = build_calculus(args)?;
    let lattice = cal.lattice();
    let subgroup = lattice.group().resolve_list(h)?;
    let diagram = build_coset_diagram(lattice, &subgroup)?;
    match format {
        Format::Dot => emit(out, &diagram.to_dot(lattice)),
        Format::Json => {
            let rels = diagram.reduction_relations();
            let coset_cal = CosetCalculus::new(&cal, &diagram);
            let closed = coset_cal.relations_close_under_d(&rels)?;
            let mut report = diagram.to_json(lattice);
            let obj = report.as_object_mut().expect("object report");
            obj.insert(
                "reduction_relations".into(),
                relations_to_json(lattice, &diagram, &rels),
            );
            obj.insert("relations_closed_under_d".into(), json!(closed));
            obj.insert("num_cosets".into(), json!(diagram.num_cosets()));
            emit_json(out, &report)
        }
    }
}

fn cmd_ym(config: &PathBuf, tol: f64, out: &Option<PathBuf>) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("reading {}", config.display()))?;
    let value: Value = serde_json::from_str(&text)?;
    let group_spec = value
        .get("group")
        .and_then(Value::as_str)
        .ok_or_else(|| anyhow!("config needs a `group` string"))?;
    let s_list = value
        .get("S")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("config needs an `S` array"))?;
    let m = value.get("m").and_then(Value::as_u64).unwrap_or(1) as usize;
    let group = build_group(&GroupSpec::parse(group_spec)?)?;
    let s: Vec<_> = s_list
        .iter()
        .map(|v| {
            v.as_str()
                .ok_or_else(|| anyhow!("S entries must be strings"))
                .and_then(|l| Ok(group.resolve(l)?))
        })
        .collect::<anyhow::Result<_>>()?;
    let lattice = GroupLattice::new(group, &s)?;
    let cal = Calculus::with_options(lattice, tol, 4);
    let w_table = value
        .get("W")
        .and_then(Value::as_object)
        .ok_or_else(|| anyhow!("config needs a `W` object"))?;
    let n = cal.group().order();
    let mut links = Vec::new();
    for &h in cal.lattice().s() {
        let label = cal.group().label(h);
        let per_site = w_table
            .get(label)
            .and_then(Value::as_object)
            .ok_or_else(|| anyhow!("W is missing direction `{label}`"))?;
        let mut mats = Vec::with_capacity(n);
        for g in cal.group().elements() {
            let site_label = cal.group().label(g);
            let mat = per_site
                .get(site_label)
                .and_then(matrix_from_json)
                .ok_or_else(|| anyhow!("W[{label}] is missing site `{site_label}`"))?;
            if mat.nrows() != m || mat.ncols() != m {
                bail!("W[{label}][{site_label}] must be {m}x{m}");
            }
            mats.push(mat);
        }
        links.push(MatrixFn::from_values(mats));
    }
    let field = GaugeField::from_w(cal.lattice(), m, links)?;
    let ym = field.yang_mills(&cal);
    let report = json!({
        "S_YM": ym.total,
        "breakdown": {
            "biangle": ym.biangle,
            "triangle": ym.triangle,
            "quadrangle": ym.quadrangle,
        },
        "m": m,
        "unitary": field.is_unitary(tol.max(1e-9)),
    });
    emit_json(out, &report)
}

fn cmd_check(
    args: &LatticeArgs,
    m: usize,
    seed: u64,
    trials: usize,
    out: &Option<PathBuf>,
) -> anyhow::Result<bool> {
    let cal = build_calculus(args)?;
    let outcomes = checks::run_all(&cal, m, seed, trials)?;
    let pass = outcomes.iter().all(|o| o.pass);
    let report = json!({
        "group": args.group,
        "s": cal.lattice().s().iter().map(|&h| cal.group().label(h)).collect::<Vec<_>>(),
        "m": m,
        "seed": seed,
        "trials": trials,
        "tol": args.tol,
        "grade_cap": args.grade_cap,
        "suites": outcomes.iter().map(|o| o.to_json()).collect::<Vec<_>>(),
        "pass": pass,
    });
    emit_json(out, &report)?;
    Ok(pass)
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { lattice, out } => cmd_analyze(lattice, out),
        Command::Dot { lattice, out } => {
            build_lattice(lattice).and_then(|l| emit(out, &l.to_dot()))
        }
        Command::Coset {
            lattice,
            h,
            format,
            out,
        } => cmd_coset(lattice, h, *format, out),
        Command::Ym { config, tol, out } => cmd_ym(config, *tol, out),
        Command::Check {
            lattice,
            m,
            seed,
            trials,
            out,
        } => match cmd_check(lattice, *m, *seed, *trials, out) {
            Ok(true) => Ok(()),
            Ok(false) => std::process::exit(1),
            Err(e) => Err(e),
        },
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

//! The command-line surface: `synth`, `run`, `check`, and `bench`.
//!
//! `synth` reads a spec file — typedefs, synthesis tasks, hand-written
//! lenses — solves the tasks in order, and writes the results as a lens
//! file in the same syntax. `run` applies one lens from such a file to a
//! string. `check` validates a spec without synthesizing, and `bench`
//! sweeps a directory of specs under one search configuration, emitting
//! a CSV row per task.

use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::lens::{lens_get, lens_put, typecheck_lens, EvalError, Lens};
use crate::regex::{matches, strongly_unambiguous, Definitions, Regex};
use crate::specfile::{parse_spec, print_spec, SpecFile};
use crate::synth::{synth_lens, synth_lens_with_stats, LensLibrary, Mode};

/// Entry point behind `main`; returns the process exit code. Split out so
/// tests can drive the full argument surface in-process.
pub fn run(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match cli.cmd {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Bench(a) => cmd_bench(a),
    }
}

#[derive(Parser)]
#[command(
    name = "relens",
    version,
    about = "Bijective string lenses between regular-expression formats"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the synthesis tasks in a spec file and print the lenses
    Synth(SynthArgs),
    /// Apply a lens from a lens file to an input string
    Run(RunArgs),
    /// Report per-task validity of a spec file without synthesizing
    Check(CheckArgs),
    /// Run every spec in a directory, one CSV row per task
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Spec file to solve
    spec: PathBuf,
    /// Stop after this task; print only the lenses synthesized up to it
    task: Option<String>,
    /// Write the lens file here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
#[command(group(ArgGroup::new("direction").required(true).args(["get", "put"])))]
struct RunArgs {
    /// Lens file, as written by `synth`
    lens_file: PathBuf,
    /// Which lens to apply; may be omitted when the file declares only one
    #[arg(long)]
    lens: Option<String>,
    /// Map a source string forward to the target format
    #[arg(long)]
    get: bool,
    /// Map a target string backward to the source format
    #[arg(long)]
    put: bool,
    /// Input file; stdin when absent
    input: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Spec file to validate
    spec: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory holding `.lspec` files
    dir: PathBuf,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct SearchFlags {
    /// Which inference stages run: full, nofpe, noer, or noud
    #[arg(long, default_value_t = Mode::Full)]
    mode: Mode,
    /// Give up after this many queue pops
    #[arg(long)]
    budget_pops: Option<usize>,
    /// Give up after this much wall time
    #[arg(long)]
    budget_secs: Option<f64>,
}

impl SearchFlags {
    fn config(&self) -> crate::synth::SynthConfig {
        let mut cfg = self.mode.config();
        if let Some(p) = self.budget_pops {
            cfg.budget_pops = p;
        }
        if let Some(s) = self.budget_secs {
            cfg.budget = Duration::from_secs_f64(s);
        }
        cfg
    }
}

fn cmd_synth(a: SynthArgs) -> i32 {
    let spec = match parse_spec(&a.spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    if let Some(sel) = &a.task {
        if !spec.tasks.iter().any(|t| &t.name == sel) {
            eprintln!("no task named `{sel}` in {}", a.spec.display());
            return 1;
        }
    }
    let cfg = a.search.config();
    let mut lib = LensLibrary::new();
    if let Err(msg) = register_hand_lenses(&spec, &mut lib) {
        eprintln!("{msg}");
        return 1;
    }
    let mut out = SpecFile {
        definitions: spec.definitions.clone(),
        char_classes: Vec::new(),
        tasks: Vec::new(),
        lens_decls: spec.lens_decls.clone(),
    };
    for task in &spec.tasks {
        let t0 = Instant::now();
        match synth_lens(
            &task.source,
            &task.target,
            &task.examples,
            &lib,
            &spec.definitions,
            &cfg,
        ) {
            Ok((lens, stats)) => {
                eprintln!(
                    "task {}: pops={} expansions={} forced={} wall_ms={}",
                    task.name,
                    stats.pops,
                    stats.expansions_total,
                    stats.forced_expansions,
                    t0.elapsed().as_millis()
                );
                register_task_result(&mut lib, task.name.as_str(), &task.source, &task.target, &lens);
                out.lens_decls.push((task.name.clone(), lens));
            }
            Err(e) => {
                eprintln!("task {}: {e}", task.name);
                return 1;
            }
        }
        if a.task.as_deref() == Some(task.name.as_str()) {
            break;
        }
    }
    write_text(a.out.as_deref(), &print_spec(&out))
}

fn cmd_run(a: RunArgs) -> i32 {
    let spec = match parse_spec(&a.lens_file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    let names = || {
        spec.lens_decls
            .iter()
            .map(|(n, _)| n.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let (name, lens) = match &a.lens {
        Some(n) => match spec.lens_decls.iter().find(|(ln, _)| ln == n) {
            Some((ln, l)) => (ln.clone(), l.clone()),
            None => {
                eprintln!(
                    "no lens named `{n}` in {} (have: {})",
                    a.lens_file.display(),
                    names()
                );
                return 1;
            }
        },
        None => match spec.lens_decls.as_slice() {
            [(n, l)] => (n.clone(), l.clone()),
            [] => {
                eprintln!("{} declares no lenses", a.lens_file.display());
                return 1;
            }
            _ => {
                eprintln!(
                    "{} declares several lenses ({}); pick one with --lens",
                    a.lens_file.display(),
                    names()
                );
                return 1;
            }
        },
    };
    if let Err(e) = typecheck_lens(&lens, &spec.definitions) {
        eprintln!("lens {name}: {e}");
        return 1;
    }
    let mut text = match &a.input {
        Some(p) => match fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("reading {}: {e}", p.display());
                return 1;
            }
        },
        None => {
            let mut buf = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
                eprintln!("reading stdin: {e}");
                return 1;
            }
            buf
        }
    };
    if text.ends_with('\n') {
        text.pop();
        if text.ends_with('\r') {
            text.pop();
        }
    }
    let res = if a.get {
        lens_get(&lens, &spec.definitions, &text)
    } else {
        lens_put(&lens, &spec.definitions, &text)
    };
    match res {
        Ok(mapped) => {
            println!("{mapped}");
            0
        }
        Err(e @ (EvalError::InputNotInSource(_) | EvalError::InputNotInTarget(_))) => {
            eprintln!("{e}");
            2
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

fn cmd_check(a: CheckArgs) -> i32 {
    let spec = match parse_spec(&a.spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };
    for task in &spec.tasks {
        let resolvable = spec.definitions.resolve(&task.source).is_ok()
            && spec.definitions.resolve(&task.target).is_ok();
        let examples = if resolvable {
            let good = task
                .examples
                .iter()
                .filter(|(i, o)| {
                    matches(&task.source, i, &spec.definitions)
                        && matches(&task.target, o, &spec.definitions)
                })
                .count();
            format!("examples {good}/{}", task.examples.len())
        } else {
            "examples skipped".to_string()
        };
        println!(
            "{}: source {}, target {}, {}",
            task.name,
            format_verdict(&task.source, &spec.definitions),
            format_verdict(&task.target, &spec.definitions),
            examples
        );
    }
    0
}

fn cmd_bench(a: BenchArgs) -> i32 {
    let mut files: Vec<PathBuf> = match fs::read_dir(&a.dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "lspec"))
            .collect(),
        Err(e) => {
            eprintln!("reading {}: {e}", a.dir.display());
            return 1;
        }
    };
    files.sort();
    let cfg = a.search.config();
    let mut csv = String::from("task,mode,success,wall_ms,pops,expansions_total,expansions_forced\n");
    for path in files {
        let spec = match parse_spec(&path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let mut lib = LensLibrary::new();
        if let Err(msg) = register_hand_lenses(&spec, &mut lib) {
            eprintln!("skipping {}: {msg}", path.display());
            continue;
        }
        for task in &spec.tasks {
            let t0 = Instant::now();
            let (res, stats) = synth_lens_with_stats(
                &task.source,
                &task.target,
                &task.examples,
                &lib,
                &spec.definitions,
                &cfg,
            );
            let wall = t0.elapsed().as_millis();
            let ok = res.is_ok();
            if let Ok(lens) = res {
                register_task_result(&mut lib, task.name.as_str(), &task.source, &task.target, &lens);
            }
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                task.name,
                a.search.mode,
                ok,
                wall,
                stats.pops,
                stats.expansions_total,
                stats.forced_expansions
            ));
        }
    }
    write_text(a.out.as_deref(), &csv)
}

/// Hand-written lens declarations join the library whenever they connect
/// two named formats; anything else still parses and can be run, it just
/// cannot be reused at a name boundary.
fn register_hand_lenses(spec: &SpecFile, lib: &mut LensLibrary) -> Result<(), String> {
    for (name, l) in &spec.lens_decls {
        let ty = typecheck_lens(l, &spec.definitions).map_err(|e| format!("lens {name}: {e}"))?;
        if let (Regex::Var(s), Regex::Var(t)) = (&ty.src, &ty.tgt) {
            lib.register(s, t, Lens::reference(name.clone(), l.clone()));
        }
    }
    Ok(())
}

/// A solved task whose endpoints are both bare names becomes a library
/// correspondence, so later tasks can reuse it across that boundary.
fn register_task_result(lib: &mut LensLibrary, name: &str, src: &Regex, tgt: &Regex, lens: &Lens) {
    if let (Regex::Var(s), Regex::Var(t)) = (src, tgt) {
        lib.register(s, t, Lens::reference(name, lens.clone()));
    }
}

fn format_verdict(r: &Regex, defs: &Definitions) -> String {
    match defs.resolve(r) {
        Err(e) => format!("error ({e})"),
        Ok(_) => {
            if strongly_unambiguous(r, defs) {
                "ok".to_string()
            } else {
                "ambiguous".to_string()
            }
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> i32 {
    match path {
        None => {
            print!("{text}");
            0
        }
        Some(p) => match fs::write(p, text) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("writing {}: {e}", p.display());
                1
            }
        },
    }
}

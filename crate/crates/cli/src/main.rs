use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use archviz_core::archmeta::{parse_architecture, validate_architecture, ValidatedArchitecture};
use archviz_core::diagram::{layout, render_svg, synthesize, LayoutConfig};
use archviz_core::projmodel::{load_pm, save_pm, validate_pm};
use archviz_core::syntax::Diagnostic;
use archviz_core::viewctx::{restore_vcm, CtxError};
use archviz_core::vizmeta::{link_viz, parse_viz, ValidatedViz};
use archviz_core::ViewContext;
use archviz_extract::{extract, ExtractError, ExtractionConfig, ExtractorKind};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "archviz", version, about = "Architecture visualization: check models, extract projects, export and serve diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an architecture model and optionally a visualization on top of it.
    Check {
        model: PathBuf,
        viz: Option<PathBuf>,
    },
    /// Build a project model from a source tree.
    Extract {
        #[arg(long)]
        kind: ExtractorKind,
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        arch: PathBuf,
        /// Output file, `-` for stdout.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Project name recorded in the model (default: root directory name).
        #[arg(long)]
        name: Option<String>,
        /// Only files matching these globs (relative to the root).
        #[arg(long)]
        include: Vec<String>,
        /// Skip files matching these globs, in addition to the defaults.
        #[arg(long)]
        exclude: Vec<String>,
        /// Do not skip `.git`, `node_modules` and `target` directories.
        #[arg(long)]
        no_default_excludes: bool,
    },
    /// Render one view of a project to SVG.
    Export {
        #[arg(long)]
        arch: PathBuf,
        #[arg(long)]
        viz: PathBuf,
        #[arg(long)]
        pm: PathBuf,
        /// Saved view context to restore before rendering.
        #[arg(long)]
        vcm: Option<PathBuf>,
        #[arg(long)]
        view: String,
        /// Output file, `-` for stdout.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Serve the HTTP session API (and optionally the web front end).
    Serve {
        #[arg(long)]
        arch: PathBuf,
        #[arg(long)]
        viz: PathBuf,
        #[arg(long)]
        pm: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

/// Exit status classes.
#[derive(Debug)]
enum Failure {
    /// Validation or domain failure (exit 1).
    Domain(String),
    /// I/O failure (exit 2).
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Domain(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: error: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    if path == Path::new("-") {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: error: {e}", path.display())))
}

fn report(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", path.display());
    }
}

fn load_arch(path: &Path) -> Result<Arc<ValidatedArchitecture>, Failure> {
    let text = read(path)?;
    let failed = |diags: Vec<Diagnostic>| {
        report(path, &diags);
        Failure::Domain(format!("{}: architecture model has errors", path.display()))
    };
    let arch = validate_architecture(parse_architecture(&text).map_err(failed)?).map_err(failed)?;
    report(path, arch.warnings());
    Ok(Arc::new(arch))
}

fn load_viz(path: &Path, arch: Arc<ValidatedArchitecture>) -> Result<Arc<ValidatedViz>, Failure> {
    let text = read(path)?;
    let failed = |diags: Vec<Diagnostic>| {
        report(path, &diags);
        Failure::Domain(format!("{}: visualization has errors", path.display()))
    };
    let viz = link_viz(parse_viz(&text).map_err(failed)?, arch).map_err(failed)?;
    report(path, viz.warnings());
    Ok(Arc::new(viz))
}

fn load_models(
    arch: &Path,
    viz: &Path,
    pm: &Path,
) -> Result<(Arc<ValidatedViz>, Arc<archviz_core::projmodel::ProjectModel>), Failure> {
    let arch = load_arch(arch)?;
    let viz = load_viz(viz, arch.clone())?;
    let text = read(pm)?;
    let model = load_pm(&text, arch).map_err(|e| Failure::Domain(format!("{}: error: {e}", pm.display())))?;
    Ok((viz, Arc::new(model)))
}

fn check(model: &Path, viz: Option<&Path>) -> Outcome {
    let arch = load_arch(model)?;
    if let Some(viz) = viz {
        load_viz(viz, arch)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_extract(
    kind: ExtractorKind,
    root: PathBuf,
    arch: &Path,
    output: &Path,
    name: Option<String>,
    include: Vec<String>,
    exclude: Vec<String>,
    no_default_excludes: bool,
) -> Outcome {
    let arch = load_arch(arch)?;
    let mut cfg = ExtractionConfig::new(root, kind, arch);
    cfg.project_name = name;
    cfg.include = include;
    if no_default_excludes {
        cfg.exclude.clear();
    }
    cfg.exclude.extend(exclude);
    let out = extract(&cfg).map_err(|e| match e {
        ExtractError::RootMissing(_) | ExtractError::Io { .. } => Failure::Io(format!("error: {e}")),
        e => Failure::Domain(format!("error: {e}")),
    })?;
    for w in &out.warnings {
        eprintln!("{w}");
    }
    let validation = validate_pm(&out.pm);
    for f in &validation.errors {
        eprintln!("{}: error: {f}", output.display());
    }
    write(output, &save_pm(&out.pm))?;
    if validation.is_clean() {
        Ok(())
    } else {
        Err(Failure::Domain("error: extracted model does not validate".into()))
    }
}

fn export(arch: &Path, viz: &Path, pm: &Path, vcm: Option<&Path>, view: &str, output: &Path) -> Outcome {
    let (viz, pm) = load_models(arch, viz, pm)?;
    if viz.view_id(view).is_none() {
        return Err(Failure::Domain(format!(
            "error: unknown view `{view}`; available views: {}",
            viz.view_names().join(", ")
        )));
    }
    let ctx = match vcm {
        Some(path) => {
            let text = read(path)?;
            let (ctx, dropped) = restore_vcm(&text, pm, viz)
                .map_err(|e| Failure::Domain(format!("{}: error: {e}", path.display())))?;
            for id in &dropped.dropped_ids {
                eprintln!("{}: warning: instance `{id}` no longer exists, its states were dropped", path.display());
            }
            for name in &dropped.unknown_names {
                eprintln!("{}: warning: `{name}` is no longer declared, its states were dropped", path.display());
            }
            ctx
        }
        None => ViewContext::new(pm, viz).map_err(ctx_failure)?,
    };
    let graph = synthesize(&ctx, view).map_err(ctx_failure)?;
    write(output, &render_svg(&layout(&graph, &LayoutConfig::default())))
}

fn ctx_failure(e: CtxError) -> Failure {
    Failure::Domain(format!("error: {e}"))
}

fn serve(arch: &Path, viz: &Path, pm: &Path, host: &str, port: u16, ui_dir: Option<PathBuf>) -> Outcome {
    let (viz, pm) = load_models(arch, viz, pm)?;
    if let Some(dir) = &ui_dir {
        if !dir.is_dir() {
            return Err(Failure::Io(format!("{}: error: not a directory", dir.display())));
        }
    }
    let models = archviz_server::Models { arch: viz.arch().clone(), viz, pm };
    let config = archviz_server::ServerConfig { ui_dir, ..Default::default() };
    let state = archviz_server::AppState::new(models, config);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Io(format!("error: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::Domain(format!("error: cannot listen on {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Failure::Io(format!("error: {e}")))?;
        eprintln!("listening on http://{addr}");
        archviz_server::serve(listener, state).await.map_err(|e| Failure::Io(format!("error: {e}")))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    let outcome = match cli.command {
        Command::Check { model, viz } => check(&model, viz.as_deref()),
        Command::Extract { kind, root, arch, output, name, include, exclude, no_default_excludes } => {
            run_extract(kind, root, &arch, &output, name, include, exclude, no_default_excludes)
        }
        Command::Export { arch, viz, pm, vcm, view, output } => export(&arch, &viz, &pm, vcm.as_deref(), &view, &output),
        Command::Serve { arch, viz, pm, port, host, ui_dir } => serve(&arch, &viz, &pm, &host, port, ui_dir),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.code())
        }
    }
}

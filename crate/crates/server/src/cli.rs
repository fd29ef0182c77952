//! Command-line entry point. Usage errors exit 2, runtime failures exit 1.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use atlas_core::clustering::ClusterParams;
use atlas_core::data::{export, ingest, ExportFormat, Format, IngestOptions};
use atlas_core::query::{evaluate, Predicate, SelectionContext};
use atlas_render::{benchmark, BenchConfig};
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Deserialize;

use crate::cache::{Cache, DEFAULT_CACHE_DIR};
use crate::dataset::{prepare, DatasetSpec};
use crate::fetch::{fetch, parse_https_url};
use crate::pipeline::compute;
use crate::session::Session;

pub const DEFAULT_PORT: u16 = 5055;
pub const DEFAULT_HOST: &str = "127.0.0.1";

#[derive(Debug, Parser)]
#[command(name = "atlas", version, about = "Explore large 2D embeddings")]
pub struct Cli {
    /// Artifact cache directory.
    #[arg(long, global = true, env = "ATLAS_CACHE_DIR", default_value = DEFAULT_CACHE_DIR)]
    pub cache_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a CSV, JSON or Parquet file and make it the current dataset.
    Ingest(IngestArgs),
    /// Compute density, clusters, labels and indexes for the current dataset.
    Compute,
    /// Serve the HTTP/WebSocket API for the current dataset.
    Serve {
        #[arg(long, env = "ATLAS_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "ATLAS_HOST", default_value = DEFAULT_HOST)]
        host: String,
    },
    /// Write the rows matching a selection file.
    Export {
        /// JSON file with a predicate or a `{revision, entries}` selection.
        #[arg(long)]
        selection: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// csv or parquet; guessed from --out when omitted.
        #[arg(long)]
        format: Option<ExportFormat>,
    },
    /// Time the point rasterizer on a synthetic mixture.
    Bench(BenchArgs),
    /// Download a dataset file over HTTPS.
    Fetch {
        #[arg(value_parser = parse_https_url)]
        url: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub file: PathBuf,
    /// csv, json or parquet; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long, requires = "y")]
    pub x: Option<String>,
    #[arg(long, requires = "x")]
    pub y: Option<String>,
    #[arg(long)]
    pub vector: Option<String>,
    #[arg(long)]
    pub text: Option<String>,
    #[arg(long)]
    pub category: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = BenchConfig::default().points)]
    pub points: usize,
    #[arg(long, default_value_t = BenchConfig::default().categories)]
    pub categories: u32,
    #[arg(long, default_value_t = BenchConfig::default().frames)]
    pub frames: usize,
    #[arg(long, default_value = "bench_report.json")]
    pub out: PathBuf,
    #[arg(long, default_value_t = BenchConfig::default().width)]
    pub width: u32,
    #[arg(long, default_value_t = BenchConfig::default().height)]
    pub height: u32,
    #[arg(long, default_value_t = BenchConfig::default().seed)]
    pub seed: u64,
}

/// Parses and runs one command line, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // value errors print only a hint; usage errors always show the usage line
            if e.use_stderr() && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let cache = Cache::new(&cli.cache_dir);
    match cli.command {
        Command::Ingest(args) => ingest_file(&cache, &args),
        Command::Compute => compute_current(&cache),
        Command::Serve { port, host } => {
            let session = Arc::new(open_session(&cache)?);
            runtime()?.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("binding {host}:{port}"))?;
                println!("serving on http://{}", listener.local_addr()?);
                crate::serve(listener, session, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
                .context("server failed")
            })
        }
        Command::Export { selection, out, format } => export_selection(&cache, &selection, &out, format),
        Command::Bench(b) => run_bench(&b),
        Command::Fetch { url, out } => runtime()?.block_on(async move {
            let path = fetch(&url, out.as_deref()).await?;
            println!("{}", path.display());
            Ok(())
        }),
    }
}

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")
}

fn ingest_file(cache: &Cache, args: &IngestArgs) -> anyhow::Result<()> {
    let bytes = std::fs::read(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let format = match args.format {
        Some(f) => f,
        None => Format::from_path(&args.file).context("cannot tell the file format; pass --format")?,
    };
    let mut options = IngestOptions::default();
    if args.file.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")) {
        options.delimiter = b'\t';
    }
    let table = ingest(&bytes, format, &options)?;
    let spec = DatasetSpec {
        x: args.x.clone(),
        y: args.y.clone(),
        vector: args.vector.clone(),
        text: args.text.clone(),
        category: args.category.clone(),
    };
    let prepared = prepare(table, spec.clone())?;
    let manifest = cache.store(&args.file, &bytes, &spec, &prepared)?;
    println!(
        "ingested {} rows, {} columns as {}",
        manifest.row_count,
        manifest.columns.len(),
        manifest.key
    );
    Ok(())
}

fn compute_current(cache: &Cache) -> anyhow::Result<()> {
    let key = cache.current_key()?;
    let (_, prepared) = cache.load(&key)?;
    let artifacts = compute(&prepared, &ClusterParams::default())?;
    cache.store_artifacts(&key, &artifacts)?;
    tracing::info!(key, "artifacts stored");
    let counts: Vec<usize> = artifacts.clusters.levels.iter().map(|l| l.clusters.len()).collect();
    println!("computed {} cluster levels {:?}", counts.len(), counts);
    Ok(())
}

/// Loads the current dataset, computing and caching artifacts if they are missing.
pub fn open_session(cache: &Cache) -> anyhow::Result<Session> {
    let key = cache.current_key()?;
    let (_, prepared) = cache.load(&key)?;
    let artifacts = match cache.load_artifacts(&key)? {
        Some(a) => a,
        None => {
            tracing::info!(key, "no cached artifacts, computing");
            let a = compute(&prepared, &ClusterParams::default())?;
            cache.store_artifacts(&key, &a)?;
            a
        }
    };
    Ok(Session::from_prepared(prepared, artifacts)?)
}

/// Contents of an `export --selection` file.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SelectionFile {
    Context { entries: BTreeMap<String, Predicate> },
    Predicate(Predicate),
}

impl SelectionFile {
    pub fn resolve(self) -> Predicate {
        match self {
            SelectionFile::Context { entries } => {
                let mut context = SelectionContext::new();
                for (view, p) in entries {
                    context.set(view, p);
                }
                context.resolve(None)
            }
            SelectionFile::Predicate(p) => p,
        }
    }
}

fn export_selection(cache: &Cache, selection: &Path, out: &Path, format: Option<ExportFormat>) -> anyhow::Result<()> {
    let text = std::fs::read(selection).with_context(|| format!("reading {}", selection.display()))?;
    let file: SelectionFile =
        serde_json::from_slice(&text).with_context(|| format!("{} is not a predicate or selection", selection.display()))?;
    let format = match format {
        Some(f) => f,
        None => match out.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("parquet") || e.eq_ignore_ascii_case("pq") => ExportFormat::Parquet,
            _ => ExportFormat::Csv,
        },
    };
    let key = cache.current_key()?;
    let (_, prepared) = cache.load(&key)?;
    let mask = evaluate(&prepared.table, &file.resolve())?;
    let bytes = export(&prepared.table, &mask, format)?;
    std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
    println!("exported {} of {} rows", mask.count_ones(), prepared.table.row_count());
    Ok(())
}

fn run_bench(b: &BenchArgs) -> anyhow::Result<()> {
    let config = BenchConfig {
        points: b.points,
        categories: b.categories,
        frames: b.frames,
        width: b.width,
        height: b.height,
        seed: b.seed,
    };
    let report = benchmark(&config)?;
    std::fs::write(&b.out, report.to_json()).with_context(|| format!("writing {}", b.out.display()))?;
    println!("mean {:.1} fps, p5 {:.1} fps over {} frames", report.mean_fps, report.p5_fps, b.frames);
    Ok(())
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use walklab::experiments::{
    execute, ExperimentConfig, ExperimentKind, GraphSpec, Manifest, WalkMode, MANIFEST_FILE,
};
use walklab::generators::StandardKind;

#[derive(Parser)]
#[command(name = "walklab", version, about = "Random walk, growth and embedding experiments on graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file with its JSON sidecar.
    Gen(GenArgs),
    /// Mean squared displacement of the simple walk.
    Walk(WalkArgs),
    /// Threshold-map embedding ensembles.
    Embed(EmbedArgs),
    /// Scale scan around a root.
    Scan(ScanArgs),
    /// Superdiffusive window on stretched expanders with a torus control.
    Exceptional(ExceptionalArgs),
    /// Følner boxes and diffusive starts on planar grids.
    Planar(PlanarArgs),
    /// Speed-budget measurement over (n, λ, r) triples.
    Bound(BoundArgs),
    /// Summarize the manifests under the output directory.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
    Grid,
    Torus,
    Expander,
    Stretched,
    Hk,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, num_args = 1..=2)]
    dims: Vec<usize>,
    /// Expander size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    stretch: Option<usize>,
    /// Ceiling on the lazy walk's second eigenvalue for expanders.
    #[arg(long)]
    gap_threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n_sequence: Vec<usize>,
    #[arg(long, default_value = "graph")]
    name: String,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file in the text format.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Comma-separated times or inclusive ranges, e.g. `1..64,128`.
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    start: Option<usize>,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    root: Option<usize>,
    #[arg(long)]
    k0: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    ks: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    ells: Vec<u32>,
    /// Ask for the untruncated grid (refused when infeasible).
    #[arg(long)]
    full_grid: bool,
}

#[derive(Args)]
struct ExceptionalArgs {
    #[arg(long, value_delimiter = ',')]
    n_values: Vec<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    no_control: bool,
}

#[derive(Args)]
struct PlanarArgs {
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    t_values: Vec<usize>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, value_delimiter = ',')]
    n_values: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Vec<u64>,
    #[arg(long)]
    root: Option<usize>,
}

fn parse_times(spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.parse().with_context(|| format!("bad range start in `{part}`"))?;
            let b: usize = b.parse().with_context(|| format!("bad range end in `{part}`"))?;
            if a > b {
                bail!("empty range `{part}`");
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().with_context(|| format!("bad time `{part}`"))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn base_config(global: &Global, name: &str, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut config = match &global.config {
        Some(path) => {
            let c = ExperimentConfig::load(path).with_context(|| format!("reading config {}", path.display()))?;
            if c.experiment != kind {
                bail!("config {} describes a {:?} experiment, not {kind:?}", path.display(), c.experiment);
            }
            c
        }
        None => ExperimentConfig::new(name, kind),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(out) = &global.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn set_graph(config: &mut ExperimentConfig, arg: &GraphArg) {
    if let Some(path) = &arg.graph {
        config.graph = Some(GraphSpec::File { path: path.clone() });
    }
}

fn run_experiment(config: ExperimentConfig) -> Result<()> {
    let manifest = execute(&config).with_context(|| format!("experiment `{}` failed", config.name))?;
    println!(
        "{}: wrote {} files to {} ({:.2}s)",
        manifest.name,
        manifest.outputs.len(),
        config.output_dir.display(),
        manifest.wall_time_seconds
    );
    Ok(())
}

fn gen(global: &Global, args: &GenArgs) -> Result<()> {
    let spec = match args.kind {
        Kind::Path | Kind::Cycle | Kind::Grid | Kind::Torus => {
            let family = match args.kind {
                Kind::Path => StandardKind::Path,
                Kind::Cycle => StandardKind::Cycle,
                Kind::Grid => StandardKind::Grid,
                _ => StandardKind::Torus,
            };
            GraphSpec::Standard {
                family,
                dims: args.dims.clone(),
            }
        }
        Kind::Expander => GraphSpec::Expander {
            n: args.n.context("--n is required for expanders")?,
            gap_threshold: args.gap_threshold,
        },
        Kind::Stretched => {
            let n = args.n.context("--n is required for stretched expanders")?;
            GraphSpec::Stretched {
                n,
                stretch: args.stretch.unwrap_or(n),
                gap_threshold: args.gap_threshold,
            }
        }
        Kind::Hk => {
            if args.n_sequence.is_empty() {
                bail!("--n-sequence is required for hk");
            }
            GraphSpec::Hk {
                n_sequence: args.n_sequence.clone(),
            }
        }
    };
    let mut config = base_config(global, &args.name, ExperimentKind::Gen)?;
    config.name = args.name.clone();
    config.graph = Some(spec);
    run_experiment(config)
}

fn collect_manifests(dir: &Path, out: &mut Vec<(PathBuf, Manifest)>) -> Result<()> {
    let direct = dir.join(MANIFEST_FILE);
    if direct.exists() {
        let m: Manifest = serde_json::from_str(&fs::read_to_string(&direct)?)
            .with_context(|| format!("parsing {}", direct.display()))?;
        out.push((dir.to_path_buf(), m));
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        collect_manifests(&d, out)?;
    }
    Ok(())
}

fn report(global: &Global) -> Result<()> {
    let dir = global.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut manifests = Vec::new();
    collect_manifests(&dir, &mut manifests).with_context(|| format!("scanning {}", dir.display()))?;
    if manifests.is_empty() {
        bail!("no manifests under {}", dir.display());
    }
    println!("{:<32} {:<20} {:>10} {:<18} status", "name", "experiment", "seconds", "config");
    let mut failed = 0;
    for (path, m) in &manifests {
        println!(
            "{:<32} {:<20} {:>10.2} {:<18} {}",
            m.name,
            format!("{:?}", m.experiment),
            m.wall_time_seconds,
            &m.config_hash[..16],
            m.status
        );
        for f in &m.outputs {
            if !path.join(f).exists() {
                println!("  missing output {f}");
                failed += 1;
            }
        }
        failed += usize::from(!m.ok());
    }
    if failed > 0 {
        bail!("{failed} problem(s) found");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Gen(args) => gen(g, args),
        Command::Walk(args) => {
            let mut c = base_config(g, "walk", ExperimentKind::Walk)?;
            set_graph(&mut c, &args.graph);
            if let Some(t) = &args.t_grid {
                c.walk.t_grid = parse_times(t)?;
            }
            if let Some(mode) = args.mode {
                c.walk.mode = match mode {
                    Mode::Exact => WalkMode::Exact,
                    Mode::Mc => WalkMode::MonteCarlo,
                };
            }
            if let Some(s) = args.samples {
                c.walk.samples = s;
            }
            if args.start.is_some() {
                c.walk.start = args.start;
            }
            run_experiment(c)
        }
        Command::Embed(args) => {
            let mut c = base_config(g, "embed", ExperimentKind::Embed)?;
            set_graph(&mut c, &args.graph);
            if !args.tau.is_empty() {
                c.embed.taus = args.tau.clone();
            }
            if let Some(m) = args.m {
                c.embed.m = m;
            }
            run_experiment(c)
        }
        Command::Scan(args) => {
            let mut c = base_config(g, "scan", ExperimentKind::Scan)?;
            set_graph(&mut c, &args.graph);
            if args.root.is_some() {
                c.scan.root = args.root;
            }
            if let Some(k0) = args.k0 {
                c.scan.k0 = k0;
            }
            if !args.ks.is_empty() {
                c.scan.ks = args.ks.clone();
            }
            if !args.ells.is_empty() {
                c.scan.ells = args.ells.clone();
            }
            c.scan.full_grid |= args.full_grid;
            run_experiment(c)
        }
        Command::Exceptional(args) => {
            let mut c = base_config(g, "exceptional", ExperimentKind::Exceptional)?;
            if !args.n_values.is_empty() {
                c.exceptional.n_values = args.n_values.clone();
            }
            if let Some(s) = args.samples {
                c.exceptional.samples = s;
                c.exceptional.control_samples = s;
            }
            if let Some(f) = args.factor {
                c.exceptional.factor = f;
            }
            if args.no_control {
                c.exceptional.control = false;
            }
            run_experiment(c)
        }
        Command::Planar(args) => {
            let mut c = base_config(g, "planar", ExperimentKind::Planar)?;
            if !args.sizes.is_empty() {
                c.planar.sizes = args.sizes.clone();
            }
            if !args.t_values.is_empty() {
                c.planar.t_values = args.t_values.clone();
            }
            run_experiment(c)
        }
        Command::Bound(args) => {
            let mut c = base_config(g, "bound", ExperimentKind::DiffusiveVsBound)?;
            set_graph(&mut c, &args.graph);
            if !args.n_values.is_empty() {
                c.bound.n_values = args.n_values.clone();
            }
            if !args.lambdas.is_empty() {
                c.bound.lambdas = args.lambdas.clone();
            }
            if !args.radii.is_empty() {
                c.bound.radii = args.radii.clone();
            }
            if args.root.is_some() {
                c.bound.root = args.root;
            }
            run_experiment(c)
        }
        Command::Report => report(g),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_parsing() {
        assert_eq!(parse_times("1..4,8").unwrap(), vec![1, 2, 3, 4, 8]);
        assert_eq!(parse_times("16,4,4").unwrap(), vec![4, 16]);
        assert!(parse_times("5..1").is_err());
        assert!(parse_times("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diffgsp::bench::{run_bench, write_bench, FORMAT_VERSION};
use diffgsp::config::{parse_override, BenchConfig};
use diffgsp::data::{load_sensor_dataset, read_edge_list, read_matrix};
use diffgsp::export;
use diffgsp::{Error, Result};
use diffgsp_core::diffusion::{
    bgh_bandwidth, decompose, embedding, gaussian_affinity, median_bandwidth, pairwise_sq_distances, KernelSpec,
    TransitionMatrix,
};
use diffgsp_core::experiments::{lattice_demo, LatticeStep};
use diffgsp_core::gso::{build_gso, check_gso_properties, DmMode, FilterSpec, GsoKind, PropertyCheck, TikhonovSign};
use diffgsp_core::learning::{learn_pipeline, LearnMethod, LearnOptions, Pipeline};
use diffgsp_core::{build_graph, Graph};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (table format ", "1", ")");

#[derive(Parser)]
#[command(name = "diffgsp", version = VERSION, about = "Diffusion-map graph signal processing toolkit")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diffusion-map coordinates of the rows of a numeric CSV.
    Embed(EmbedArgs),
    /// Filter signals in a shift operator's Fourier basis.
    Filter(FilterArgs),
    /// Learn a graph from sensor signals.
    Learn(LearnArgs),
    /// Run a benchmark grid from a config file.
    Bench(BenchArgs),
    /// Spread a delta over a lattice by repeated filtering.
    DemoLattice(LatticeArgs),
    /// Check linearity, diagonalization and norm bounds of a shift operator.
    CheckGso(CheckArgs),
}

#[derive(Args)]
#[group(id = "bandwidth", required = true, multiple = false)]
struct Bandwidth {
    /// Fixed kernel bandwidth.
    #[arg(long)]
    sigma: Option<f64>,
    /// Median of pairwise distances.
    #[arg(long)]
    sigma_median: bool,
    /// Log-log slope scan.
    #[arg(long)]
    sigma_bgh: bool,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    bandwidth: Bandwidth,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 2)]
    l: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum GsoArg {
    A,
    L,
    P,
    Dm,
}

#[derive(Clone, Copy, ValueEnum)]
enum DmModeArg {
    Truncated,
    IdentityMinusPower,
}

#[derive(Args)]
struct GsoOpts {
    #[arg(long, value_enum, default_value = "dm")]
    gso: GsoArg,
    /// Diffusion time of the diffusion-map operator.
    #[arg(long, default_value_t = 1)]
    dm_t: u32,
    /// Diffusion-map truncation; defaults to n - 1.
    #[arg(long)]
    dm_l: Option<usize>,
    #[arg(long, value_enum, default_value = "truncated")]
    dm_mode: DmModeArg,
}

impl GsoOpts {
    fn kind(&self, n: usize) -> GsoKind {
        match self.gso {
            GsoArg::A => GsoKind::Adjacency,
            GsoArg::L => GsoKind::Laplacian,
            GsoArg::P => GsoKind::Markov,
            GsoArg::Dm => GsoKind::DiffusionMap {
                t: self.dm_t,
                l: self.dm_l.unwrap_or(n.saturating_sub(1)),
                mode: match self.dm_mode {
                    DmModeArg::Truncated => DmMode::TruncatedSpectral,
                    DmModeArg::IdentityMinusPower => DmMode::IdentityMinusPower,
                },
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Identity,
    Tikhonov,
    Heat,
    Ideal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Args)]
struct FilterOpts {
    #[arg(long, value_enum, default_value = "tikhonov")]
    filter: FilterArg,
    /// Tikhonov strength or heat time.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, value_enum, default_value = "plus")]
    tikhonov_sign: SignArg,
    /// Components kept by the ideal filter.
    #[arg(long, default_value_t = 1)]
    cutoff: usize,
}

impl FilterOpts {
    fn spec(&self) -> FilterSpec {
        match self.filter {
            FilterArg::Identity => FilterSpec::identity(),
            FilterArg::Tikhonov => FilterSpec::Tikhonov {
                tau: self.tau,
                sign: match self.tikhonov_sign {
                    SignArg::Plus => TikhonovSign::Plus,
                    SignArg::Minus => TikhonovSign::Minus,
                },
            },
            FilterArg::Heat => FilterSpec::Heat { t: self.tau },
            FilterArg::Ideal => FilterSpec::Ideal { cutoff: self.cutoff },
        }
    }
}

#[derive(Args)]
struct FilterArgs {
    /// Edge list `i,j,weight`.
    #[arg(long)]
    graph: PathBuf,
    /// Numeric CSV, one signal per row.
    #[arg(long)]
    signals: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    gso: GsoOpts,
    #[command(flatten)]
    filter: FilterOpts,
    /// Apply the filter this many times.
    #[arg(long, default_value_t = 1)]
    order: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mv,
    Tv,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    coords: PathBuf,
    #[arg(long)]
    signals: PathBuf,
    /// Radius of the reference graph that supplies the Fourier basis.
    #[arg(long, default_value_t = 50.0)]
    radius: f64,
    /// Edge list; a `.json` sidecar is written next to it.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    gso: GsoOpts,
    #[command(flatten)]
    filter: FilterOpts,
    /// Filter order.
    #[arg(long, default_value_t = 1)]
    t: u32,
    #[arg(long, value_enum, default_value = "mv")]
    method: MethodArg,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set tau_grid=0.1,0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeFilterArg {
    Identity,
    /// Multiply by the shift itself.
    Shift,
    Tikhonov,
    Heat,
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long, default_value_t = 11)]
    side: usize,
    #[arg(long, default_value_t = 10)]
    t_max: usize,
    #[arg(long, value_enum, default_value = "shift")]
    filter: LatticeFilterArg,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, value_enum, default_value = "p")]
    gso: GsoArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Edge list `i,j,weight`.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    gso: GsoOpts,
    #[arg(long, default_value_t = 1000)]
    probes: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, body: &str) -> Result<()> {
    match output {
        Some(p) => export::write_text(p, body),
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let (_, x) = read_matrix(&a.input)?;
    let d = pairwise_sq_distances(&x);
    let sigma = match (a.bandwidth.sigma, a.bandwidth.sigma_median, a.bandwidth.sigma_bgh) {
        (Some(s), _, _) => s,
        (_, true, _) => median_bandwidth(&x, 1.0)?,
        _ => {
            let est = bgh_bandwidth(&d)?;
            if est.at_boundary {
                log::warn!("bandwidth scan peaked at the edge of the grid");
            }
            // exp(-D / (4 eps)) matches exp(-D / (2 sigma^2)) at sigma^2 = 2 eps
            (2.0 * est.epsilon).sqrt()
        }
    };
    let w = gaussian_affinity(&d, &KernelSpec::gaussian(sigma)?);
    let g = build_graph(w, None)?;
    let dec = decompose(&TransitionMatrix::from_graph(&g)?)?;
    let emb = embedding(&dec, a.t, a.l)?;
    emit(a.output.as_deref(), &export::embedding_csv(&emb, sigma))
}

fn filter(a: &FilterArgs) -> Result<()> {
    let g = read_edge_list(&a.graph, None)?;
    let (_, x) = read_matrix(&a.signals)?;
    if x.ncols() != g.n() {
        return Err(diffgsp_core::Error::DimensionMismatch { expected: g.n(), found: x.ncols() }.into());
    }
    let s = build_gso(&g, a.gso.kind(g.n()))?;
    let h = s.filter_operator(&a.filter.spec(), a.order)?;
    emit(a.output.as_deref(), &export::signals_csv(&(x * h.transpose())))
}

fn learn(a: &LearnArgs) -> Result<()> {
    let d = load_sensor_dataset(&a.coords, &a.signals, a.radius)?;
    for s in &d.dropped {
        eprintln!("dropped station {s}: missing hours");
    }
    let pipeline = Pipeline {
        gso: a.gso.kind(d.graph.n()),
        filter: a.filter.spec(),
        filter_order: a.t,
        method: match a.method {
            MethodArg::Mv => LearnMethod::MarkovVariation,
            MethodArg::Tv => LearnMethod::TotalVariation { alpha: a.alpha },
        },
    };
    let opts = LearnOptions { max_iters: a.max_iters, ..Default::default() };
    let res = learn_pipeline(&d.signals, &d.graph, &pipeline, &opts)?;
    let settings = vec![
        ("stations".to_owned(), d.stations.join(",")),
        ("gso".to_owned(), format!("{:?}", pipeline.gso)),
        ("filter".to_owned(), format!("{:?}", pipeline.filter)),
        ("filter_order".to_owned(), a.t.to_string()),
        ("method".to_owned(), format!("{:?}", pipeline.method)),
    ];
    export::write_learn_result(&a.output, &res, settings)
}

fn bench(a: &BenchArgs, seed: Option<u64>) -> Result<()> {
    let mut overrides = a.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    if let Some(s) = seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(j) = a.jobs {
        overrides.push(("jobs".into(), j.to_string()));
    }
    if let Some(d) = &a.output_dir {
        overrides.push(("output_dir".into(), d.display().to_string()));
    }
    let cfg = BenchConfig::load(&a.config, &overrides)?;
    let out = run_bench(&cfg)?;
    for p in write_bench(&cfg, &out)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn demo_lattice(a: &LatticeArgs) -> Result<()> {
    let gso = GsoOpts { gso: a.gso, dm_t: 1, dm_l: None, dm_mode: DmModeArg::Truncated }.kind(a.side * a.side);
    let step = match a.filter {
        LatticeFilterArg::Identity => LatticeStep::Filter { gso, filter: FilterSpec::identity() },
        LatticeFilterArg::Shift => LatticeStep::Shift(gso),
        LatticeFilterArg::Tikhonov => LatticeStep::Filter { gso, filter: FilterSpec::tikhonov(a.tau) },
        LatticeFilterArg::Heat => LatticeStep::Filter { gso, filter: FilterSpec::Heat { t: a.tau } },
    };
    let frames = lattice_demo(a.side, &step, a.t_max)?;
    emit(a.output.as_deref(), &export::lattice_csv(&frames, a.side))
}

fn check_gso(a: &CheckArgs, seed: Option<u64>) -> Result<()> {
    let g: Graph = read_edge_list(&a.graph, None)?;
    let s = build_gso(&g, a.gso.kind(g.n()))?;
    let check = PropertyCheck { probes: a.probes, seed: seed.unwrap_or(0), ..Default::default() };
    let report = check_gso_properties(&s, &check);
    emit(a.output.as_deref(), &export::property_report_csv(&report))
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Embed(a) => embed(a),
        Command::Filter(a) => filter(a),
        Command::Learn(a) => learn(a),
        Command::Bench(a) => bench(a, cli.seed),
        Command::DemoLattice(a) => demo_lattice(a),
        Command::CheckGso(a) => check_gso(a, cli.seed),
    }
}

fn main() -> ExitCode {
    debug_assert_eq!(FORMAT_VERSION, 1, "keep VERSION in sync");
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

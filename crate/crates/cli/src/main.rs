#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use v2vgeo_core::bench::run_bench;
use v2vgeo_core::plos::{p_los_system, psr_bins, HeightModel, SensitivityTable};
use v2vgeo_core::relay::{build_graph, compare_techniques, PowerBasis, RelayTechnique, DEFAULT_X_MAX};
use v2vgeo_core::scenario::{load_scene, synth_highway, synth_urban, SpacingMode, UrbanSpec};
use v2vgeo_core::{ChannelModel, Environment, HighwaySpec, LinkClass, RangeConfig, Scene};

use output::{Format, Sink};

#[derive(Parser)]
#[command(name = "v2vgeo", version, about = "Geometry-based V2V channel simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scene file (JSON).
    #[arg(long, global = true)]
    scene: Option<PathBuf>,
    /// Full channel model configuration (JSON); flags below override it.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, allow_negative_numbers = true)]
    freq_hz: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tx_dbm: Option<f64>,
    /// Antenna gain applied at both ends.
    #[arg(long, global = true, allow_negative_numbers = true)]
    gain_dbi: Option<f64>,
    #[arg(long, global = true, value_enum)]
    env: Option<Env>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format (default csv); scenes are always JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Env {
    Highway,
    Urban,
}

#[derive(Subcommand)]
enum Command {
    /// Link class for every in-range pair.
    Classify,
    /// Large-scale and faded received power for every in-range pair.
    Power,
    /// System LOS probability against range.
    Plos(PlosArgs),
    /// Packet success rate per distance bin and data rate.
    Psr(PsrArgs),
    /// Compare relay techniques on a synthetic highway ensemble.
    Relay(RelayArgs),
    /// Time the pipeline on synthetic urban scenes of growing size.
    Bench(BenchArgs),
    /// Write a synthetic scene as JSON.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PlosArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,250,500,750")]
    ranges: Vec<f64>,
    /// Without --scene: number of synthetic highway scenes to average.
    #[arg(long, default_value_t = 10)]
    scenes: u64,
    #[command(flatten)]
    highway: HighwayArgs,
}

#[derive(Args)]
struct PsrArgs {
    /// Data rates in Mb/s.
    #[arg(long, value_delimiter = ',', default_value = "3,4.5,6,9,12,18,24,27")]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 50.0)]
    bin_width: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Technique {
    Farthest,
    MostNewNeighbors,
    Tvr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Basis {
    Faded,
    LargeScale,
}

#[derive(Args)]
struct RelayArgs {
    #[arg(long, default_value_t = 20)]
    scenes: u64,
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
    threshold_dbm: f64,
    #[arg(long, value_enum, default_value = "faded")]
    basis: Basis,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "farthest,most-new-neighbors,tvr")]
    techniques: Vec<Technique>,
    #[arg(long, default_value_t = DEFAULT_X_MAX)]
    x_max: f64,
    #[arg(long, default_value_t = 64)]
    hop_limit: usize,
    /// Lowest and highest transmit power of the per-scene sweep, in dBm.
    /// Ignored when --tx-dbm is given.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1.0, 20.0])]
    tx_sweep: Vec<f64>,
    /// Per-route log (CSV).
    #[arg(long)]
    routes: Option<PathBuf>,
    #[command(flatten)]
    highway: HighwayArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "3500,7000,14000,28000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    links: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    Highway,
    Urban,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    #[command(flatten)]
    highway: HighwayArgs,
    /// Urban: approximate object count (overrides --blocks).
    #[arg(long)]
    objects: Option<usize>,
    /// Urban grid size in blocks.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], default_values_t = [4, 4])]
    blocks: Vec<usize>,
}

#[derive(Args)]
struct HighwayArgs {
    #[arg(long, default_value_t = 12_500.0)]
    road_length: f64,
    #[arg(long, default_value_t = 4)]
    lanes: usize,
    /// Vehicles per km per lane; the A28 mean spacing when absent.
    #[arg(long)]
    density: Option<f64>,
    /// Measure spacing along the road instead of per lane.
    #[arg(long)]
    merged: bool,
    #[arg(long)]
    tall_fraction: Option<f64>,
}

impl HighwayArgs {
    fn spec(&self, seed: u64) -> HighwaySpec {
        let mut s = HighwaySpec::a28(seed);
        if let Some(d) = self.density {
            s = s.with_density(d);
        }
        s.road_length = self.road_length;
        s.lanes = self.lanes;
        if self.merged {
            s.spacing = SpacingMode::Merged;
        }
        if let Some(t) = self.tall_fraction {
            s.tall_fraction = t;
        }
        s
    }
}

/// Command-line misuse detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

impl Common {
    fn model(&self) -> Result<ChannelModel> {
        let mut m = match &self.model {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("invalid model configuration {}", p.display()))?
            }
            None => ChannelModel::default(),
        };
        if let Some(env) = self.env {
            m.ranges = RangeConfig::for_environment(match env {
                Env::Highway => Environment::Highway,
                Env::Urban => Environment::Urban,
            });
        }
        if let Some(f) = self.freq_hz {
            m.radio.frequency_hz = f;
        }
        if let Some(p) = self.tx_dbm {
            m.radio.tx_power_dbm = p;
        }
        if let Some(g) = self.gain_dbi {
            m.radio.tx_gain_dbi = g;
            m.radio.rx_gain_dbi = g;
        }
        m.fading.seed = self.seed;
        m.validate()?;
        Ok(m)
    }

    fn scene(&self) -> Result<Scene> {
        let path = self.scene.as_ref().ok_or_else(|| usage("--scene is required for this command"))?;
        Ok(load_scene(path)?)
    }

    fn sink(&self) -> Sink {
        Sink::new(self.out.clone(), self.format.unwrap_or(Format::Csv))
    }
}

#[derive(Serialize)]
struct ClassRow {
    tx: u64,
    rx: u64,
    distance: f64,
    class: &'static str,
    n_blockers: usize,
}

#[derive(Serialize)]
struct PowerRow {
    tx: u64,
    rx: u64,
    distance: f64,
    class: &'static str,
    large_scale_dbm: Option<f64>,
    sigma_db: f64,
    faded_dbm: Option<f64>,
}

#[derive(Serialize)]
struct PlosRow {
    range_m: f64,
    p_los: Option<f64>,
    n_scenes: usize,
}

#[derive(Serialize)]
struct PsrRow {
    data_rate_mbps: f64,
    sensitivity_dbm: f64,
    bin_lo_m: f64,
    bin_hi_m: f64,
    sent: usize,
    received: usize,
    psr: Option<f64>,
}

#[derive(Serialize)]
struct RouteRow {
    scene: usize,
    src: u64,
    dst: u64,
    technique: String,
    hops: Option<usize>,
    best: bool,
    relays: String,
}

fn cmd_classify(c: &Common) -> Result<()> {
    let scene = c.scene()?;
    let model = c.model()?;
    let rows: Vec<ClassRow> = model
        .evaluate_scene(&scene)
        .into_iter()
        .filter(|r| r.class != LinkClass::OutOfRange)
        .map(|r| ClassRow {
            tx: r.tx,
            rx: r.rx,
            distance: r.distance,
            class: r.class.as_str(),
            n_blockers: r.n_blockers(),
        })
        .collect();
    c.sink().rows(&rows, &["tx", "rx", "distance", "class", "n_blockers"])
}

fn cmd_power(c: &Common) -> Result<()> {
    let scene = c.scene()?;
    let model = c.model()?;
    let rows: Vec<PowerRow> = model
        .evaluate_scene(&scene)
        .into_iter()
        .filter(|r| r.class != LinkClass::OutOfRange)
        .map(|r| PowerRow {
            tx: r.tx,
            rx: r.rx,
            distance: r.distance,
            class: r.class.as_str(),
            large_scale_dbm: r.large_scale.dbm(),
            sigma_db: r.sigma_db,
            faded_dbm: r.faded.dbm(),
        })
        .collect();
    c.sink().rows(&rows, &["tx", "rx", "distance", "class", "large_scale_dbm", "sigma_db", "faded_dbm"])
}

fn cmd_plos(c: &Common, a: &PlosArgs) -> Result<()> {
    if a.ranges.iter().any(|r| !(*r > 0.0)) {
        return Err(usage("ranges must be positive"));
    }
    let lambda = c.model()?.radio.wavelength();
    let heights = HeightModel::default();
    let scenes: Vec<Scene> = match &c.scene {
        Some(_) => vec![c.scene()?],
        None => (0..a.scenes)
            .map(|i| synth_highway(&a.highway.spec(c.seed.wrapping_add(i))))
            .collect::<v2vgeo_core::Result<_>>()?,
    };
    let rows: Vec<PlosRow> = a
        .ranges
        .iter()
        .map(|&r| {
            let vals: Vec<f64> = scenes.iter().filter_map(|s| p_los_system(s, r, &heights, lambda)).collect();
            let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
            PlosRow { range_m: r, p_los: mean, n_scenes: vals.len() }
        })
        .collect();
    c.sink().rows(&rows, &["range_m", "p_los", "n_scenes"])
}

fn cmd_psr(c: &Common, a: &PsrArgs) -> Result<()> {
    if !(a.bin_width > 0.0) {
        return Err(usage("--bin-width must be positive"));
    }
    let scene = c.scene()?;
    let reports = c.model()?.evaluate_scene(&scene);
    let table = SensitivityTable::dsrc();
    let mut rows = Vec::new();
    for &rate in &a.rates {
        let sens = table.sensitivity(rate)?;
        for b in psr_bins(&reports, sens, a.bin_width) {
            rows.push(PsrRow {
                data_rate_mbps: rate,
                sensitivity_dbm: sens,
                bin_lo_m: b.lo,
                bin_hi_m: b.hi,
                sent: b.sent,
                received: b.received,
                psr: b.psr(),
            });
        }
    }
    c.sink().rows(&rows, &["data_rate_mbps", "sensitivity_dbm", "bin_lo_m", "bin_hi_m", "sent", "received", "psr"])
}

fn cmd_relay(c: &Common, a: &RelayArgs) -> Result<()> {
    if a.x_max < 0.0 {
        return Err(usage("--x-max must be non-negative"));
    }
    let base = c.model()?;
    let (lo, hi) = (a.tx_sweep[0], a.tx_sweep[1]);
    let graphs: Vec<_> = (0..a.scenes)
        .map(|i| -> Result<_> {
            let scene = synth_highway(&a.highway.spec(c.seed.wrapping_add(i)))?;
            let mut model = base.clone();
            model.fading.seed = c.seed.wrapping_add(i);
            if c.tx_dbm.is_none() {
                let steps = (hi - lo).round().max(0.0) as u64 + 1;
                model.radio.tx_power_dbm = lo + (i % steps) as f64;
            }
            let basis = match a.basis {
                Basis::Faded => PowerBasis::Faded,
                Basis::LargeScale => PowerBasis::LargeScale,
            };
            Ok(build_graph(&scene, &model, a.threshold_dbm, basis))
        })
        .collect::<Result<_>>()?;
    let techniques: Vec<RelayTechnique> = a
        .techniques
        .iter()
        .map(|t| match t {
            Technique::Farthest => RelayTechnique::Farthest,
            Technique::MostNewNeighbors => RelayTechnique::MostNewNeighbors,
            Technique::Tvr => RelayTechnique::Tvr { x_max: a.x_max },
        })
        .collect();
    let cmp = compare_techniques(&graphs, &techniques, a.pairs, c.seed, a.hop_limit);
    if let Some(path) = &a.routes {
        let rows: Vec<RouteRow> = cmp
            .routes
            .iter()
            .map(|r| RouteRow {
                scene: r.scene,
                src: r.src,
                dst: r.dst,
                technique: r.technique.clone(),
                hops: r.hops,
                best: r.best,
                relays: r.relays.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            })
            .collect();
        let file = output::create(path)?;
        output::write_csv(
            std::io::BufWriter::new(file),
            &rows,
            &["scene", "src", "dst", "technique", "hops", "best", "relays"],
        )
        .with_context(|| format!("writing {}", path.display()))?;
    }
    c.sink().rows(&cmp.summaries, &["technique", "best_route_pct", "success_pct", "mean_hops", "relay_usage_pct"])
}

fn cmd_bench(c: &Common, a: &BenchArgs) -> Result<()> {
    let mut model = c.model()?;
    if c.env.is_none() {
        model.ranges = RangeConfig::for_environment(Environment::Urban);
    }
    let rows = run_bench(&a.sizes, a.links, c.seed, &model, a.repeats)?;
    c.sink().rows(&rows, &["n_objects", "build_ms", "classify_ms", "refl_diffr_ms", "total_ms"])
}

fn cmd_synth(c: &Common, a: &SynthArgs) -> Result<()> {
    if c.format == Some(Format::Csv) {
        return Err(usage("synth writes JSON scenes"));
    }
    let scene = match a.kind {
        SynthKind::Highway => synth_highway(&a.highway.spec(c.seed))?,
        SynthKind::Urban => {
            let spec = match a.objects {
                Some(n) => UrbanSpec::with_object_count(n, c.seed),
                None => UrbanSpec::new(a.blocks[0], a.blocks[1], c.seed),
            };
            synth_urban(&spec)?
        }
    };
    let mut text = scene.to_json();
    text.push('\n');
    c.sink().text(&text)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<v2vgeo_core::Error>() {
            return if matches!(e, v2vgeo_core::Error::Io { .. }) { 4 } else { 3 };
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            if e.is_io_error() {
                return 4;
            }
        }
        if let Some(e) = cause.downcast_ref::<serde_json::Error>() {
            return if e.is_io() { 4 } else { 3 };
        }
    }
    3
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(
                |e| matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe),
            )
    })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("V2VGEO_THREADS") {
        let n: usize =
            v.trim().parse().map_err(|_| usage(format!("V2VGEO_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(usage("V2VGEO_THREADS must be a positive integer"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let c = &cli.common;
    match &cli.command {
        Command::Classify => cmd_classify(c),
        Command::Power => cmd_power(c),
        Command::Plos(a) => cmd_plos(c, a),
        Command::Psr(a) => cmd_psr(c, a),
        Command::Relay(a) => cmd_relay(c, a),
        Command::Bench(a) => cmd_bench(c, a),
        Command::Synth(a) => cmd_synth(c, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! The `hydra` command line: simulate, timing, sweep, train, quantize, trace.
//!
//! Every CSV report starts with a `# hydra <command> csv v1` line followed by
//! a header row.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::datapath::AfKind;
use crate::dataio::{to_input_vector, DataError, Dataset, FoldMode};
use crate::engine::{classify, run_batch, write_trace, Engine, EngineError, EngineMode};
use crate::fxp::{quantize, FxpError, QFormat, QValue, CHARACTERISED_WIDTHS};
use crate::model::{
    forward_float, load_params, parse_layer_sizes, quantize_params, save_params, train_minimal, AnyParams,
    ConfigLoadError, FloatParams, LayerParams, ModelError, NetworkConfig, Params, QuantParams, TrainOptions,
};
use crate::timing::{af_savings, t_parallel, t_reuse, throughput_report, TimingError, TimingInputs};

pub const CSV_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Args(#[from] clap::Error),
    #[error(transparent)]
    Config(#[from] ConfigLoadError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Fxp(#[from] FxpError),
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "hydra", version, about = "Cycle-accurate simulator for a layer-multiplexed DNN accelerator")]
pub struct RunSpec {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the engine over a dataset and report accuracy and cycles.
    Simulate {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100e6)]
        clock_hz: f64,
    },
    /// Closed-form and simulated cycle counts.
    Timing {
        #[command(flatten)]
        net: NetArgs,
        /// Explicit n list for the closed forms, e.g. 64:32:32:10.
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100e6)]
        clock_hz: f64,
    },
    /// Accuracy of float parameters quantized at several widths.
    Sweep {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Total bit widths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = CHARACTERISED_WIDTHS.map(u32::from))]
        widths: Vec<u32>,
    },
    /// Train float parameters with the deterministic SGD trainer.
    Train {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = TrainOptions::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = TrainOptions::default().lr)]
        lr: f64,
        #[arg(long, default_value_t = TrainOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = TrainOptions::default().batch_size)]
        batch_size: usize,
        #[arg(long, default_value_t = TrainOptions::default().logit_scale)]
        logit_scale: f64,
    },
    /// Convert a float parameter file to a quantized one.
    Quantize {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        bits: u32,
        #[arg(long, default_value_t = 3)]
        int_bits: u32,
    },
    /// Per-cycle controller log of one inference.
    Trace {
        #[command(flatten)]
        net: NetArgs,
        /// Without parameters, seeded random ones are used.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        images: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Image index within the dataset.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Network configuration and overrides shared by most commands.
#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    /// TOML network configuration; defaults to the benchmark topology.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long)]
    pub int_bits: Option<u32>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<EngineMode>,
    /// Activation of the hidden layers (the output layer keeps its own).
    #[arg(long, value_parser = parse_af)]
    pub af: Option<AfKind>,
    #[arg(long)]
    pub tiling: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Use at most this many images.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, default_value = "average", value_parser = parse_fold)]
    pub fold: FoldMode,
}

fn parse_mode(s: &str) -> Result<EngineMode, String> {
    s.parse()
}

fn parse_af(s: &str) -> Result<AfKind, String> {
    s.parse()
}

fn parse_fold(s: &str) -> Result<FoldMode, String> {
    s.parse()
}

impl NetArgs {
    /// Config file (or benchmark, or `layer_sizes` when given) plus overrides.
    fn resolve(&self, layer_sizes: Option<Vec<usize>>) -> Result<NetworkConfig, CliError> {
        let mut cfg = match (&self.config, layer_sizes) {
            (Some(path), _) => NetworkConfig::load(path)?,
            (None, Some(sizes)) => NetworkConfig::new(sizes, QFormat::Q8_3),
            (None, None) => NetworkConfig::benchmark(),
        };
        if self.bits.is_some() || self.int_bits.is_some() {
            let bits = self.bits.unwrap_or(cfg.qformat.total_bits());
            let int_bits = self.int_bits.unwrap_or(3);
            cfg.qformat = checked_format(bits, int_bits)?;
        }
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
        if let Some(af) = self.af {
            let layers = cfg.compute_layers();
            for l in 0..layers.saturating_sub(1).max(1).min(layers) {
                cfg.af_per_layer[l] = af;
            }
        }
        cfg.tiling |= self.tiling;
        cfg.validate().map_err(ConfigLoadError::from)?;
        Ok(cfg)
    }

    fn format_given(&self) -> bool {
        self.bits.is_some() || self.int_bits.is_some() || self.config.is_some()
    }
}

fn checked_format(bits: u32, int_bits: u32) -> Result<QFormat, CliError> {
    let fmt = QFormat::new(bits, int_bits)?;
    if !fmt.is_characterised() {
        log::warn!("{fmt} is outside the characterised widths {CHARACTERISED_WIDTHS:?}");
    }
    Ok(fmt)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match RunSpec::try_parse_from(args) {
        Ok(spec) => spec,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    execute(&spec)
}

pub fn execute(spec: &RunSpec) -> Result<(), CliError> {
    match &spec.command {
        Command::Simulate { net, params, data, out, clock_hz } => cmd_simulate(net, params, data, out.as_deref(), *clock_hz),
        Command::Timing { net, n_list, out, clock_hz } => cmd_timing(net, n_list.as_deref(), out.as_deref(), *clock_hz),
        Command::Sweep { net, params, data, out, widths } => cmd_sweep(net, params, data, out.as_deref(), widths),
        Command::Train { net, data, out, epochs, lr, seed, batch_size, logit_scale } => {
            let opts = TrainOptions {
                epochs: *epochs,
                lr: *lr,
                seed: *seed,
                batch_size: *batch_size,
                logit_scale: *logit_scale,
            };
            cmd_train(net, data, out, &opts)
        }
        Command::Quantize { params, out, bits, int_bits } => cmd_quantize(params, out, *bits, *int_bits),
        Command::Trace { net, params, images, labels, index, seed, out } => {
            cmd_trace(net, params.as_deref(), images.as_deref().zip(labels.as_deref()), *index, *seed, out.as_deref())
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.map_or("stdout".into(), |p| p.display().to_string()), source }
}

/// Summary lines go to stdout when the CSV goes to a file, stderr otherwise.
fn summary(to_file: bool, line: &str) {
    if to_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn csv_report(
    out: Option<&Path>,
    command: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut w = open_out(out)?;
    writeln!(w, "# hydra {command} csv v{CSV_VERSION}").map_err(io_err(out))?;
    {
        let mut csv = csv::Writer::from_writer(&mut w);
        csv.write_record(header)?;
        for row in rows {
            csv.write_record(row)?;
        }
        csv.flush().map_err(io_err(out))?;
    }
    w.flush().map_err(io_err(out))
}

/// Quantized parameters in the config's format; float files are quantized
/// on the fly.
fn quant_params_for(net: &NetArgs, params: AnyParams) -> Result<(NetworkConfig, QuantParams), CliError> {
    let mut cfg = net.resolve(Some(params.layer_sizes()))?;
    let q = match params {
        AnyParams::Float(p) => quantize_params(&p, cfg.qformat)?,
        AnyParams::Quant(q) => {
            if !net.format_given() {
                cfg.qformat = q.qformat();
                cfg.validate().map_err(ConfigLoadError::from)?;
            }
            q
        }
    };
    Ok((cfg, q))
}

fn load_dataset(data: &DataArgs) -> Result<Dataset, CliError> {
    Ok(Dataset::load(&data.images, &data.labels, data.fold, data.limit)?)
}

fn inputs_of(ds: &Dataset, fmt: QFormat) -> Vec<Vec<QValue>> {
    ds.images().par_iter().map(|img| to_input_vector(img, fmt)).collect()
}

/// Fraction of samples whose argmax matches the label.
pub fn accuracy(predictions: &[Option<usize>], labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = predictions.iter().zip(labels).filter(|(p, &l)| **p == Some(l as usize)).count();
    hits as f64 / labels.len() as f64
}

/// Engine predictions for every image of `ds`.
pub fn engine_predictions(cfg: &NetworkConfig, params: &QuantParams, ds: &Dataset) -> Result<Vec<Option<usize>>, CliError> {
    let results = run_batch(cfg, params, &inputs_of(ds, cfg.qformat))?;
    Ok(results.iter().map(|(out, _)| classify(out)).collect())
}

/// Float-model predictions, with the same tie rule as [`classify`].
pub fn float_predictions(cfg: &NetworkConfig, params: &FloatParams, ds: &Dataset) -> Result<Vec<Option<usize>>, CliError> {
    ds.images()
        .par_iter()
        .map(|img| {
            let out = forward_float(cfg, params, img.as_slice())?;
            Ok(out.iter().enumerate().fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
            .map(|(i, _)| i))
        })
        .collect()
}

fn cmd_simulate(net: &NetArgs, params: &Path, data: &DataArgs, out: Option<&Path>, clock_hz: f64) -> Result<(), CliError> {
    let (cfg, q) = quant_params_for(net, load_params(params)?)?;
    let ds = load_dataset(data)?;
    let inputs = inputs_of(&ds, cfg.qformat);
    let results = run_batch(&cfg, &q, &inputs)?;
    let predictions: Vec<Option<usize>> = results.iter().map(|(o, _)| classify(o)).collect();
    let rows: Vec<Vec<String>> = results
        .iter()
        .zip(&predictions)
        .zip(ds.labels())
        .enumerate()
        .map(|(i, (((_, report), pred), label))| {
            vec![
                i.to_string(),
                label.to_string(),
                pred.map_or(String::new(), |p| p.to_string()),
                report.total_cycles.to_string(),
            ]
        })
        .collect();
    csv_report(out, "simulate", &["index", "label", "prediction", "cycles"], &rows)?;

    if std::env::var("HYDRA_TRACE").as_deref() == Ok("1") {
        if let Some(x) = inputs.first() {
            let mut e = Engine::new(&cfg, &q)?;
            e.set_trace(true);
            e.run(x)?;
            write_trace(&mut io::stderr().lock(), e.trace()).map_err(io_err(None))?;
        }
    }

    let to_file = out.is_some();
    summary(to_file, &format!("images: {}  format: {}  mode: {}", ds.len(), cfg.qformat, cfg.mode));
    summary(to_file, &format!("accuracy: {:.4}", accuracy(&predictions, ds.labels())));
    let report = match results.first() {
        Some((_, r)) => r.clone(),
        None => Engine::new(&cfg, &q)?.run(&vec![cfg.qformat.zero(); cfg.input_size()])?.1,
    };
    let per_layer: Vec<String> = report.per_layer.iter().map(|t| t.layer_total.to_string()).collect();
    summary(to_file, &format!("cycles per inference: {}  (per layer {})", report.total_cycles, per_layer.join(" + ")));
    summary(to_file, &format!("fma utilization: {:.4}", report.fma_utilization));
    let tp = throughput_report(&report, clock_hz)?;
    summary(
        to_file,
        &format!("throughput @ {:.0} Hz: {:.4} GOPS, {:.1} inferences/s", clock_hz, tp.gops, tp.inferences_per_sec),
    );
    Ok(())
}

fn simulated_total(cfg: &NetworkConfig, mode: EngineMode) -> Result<Option<u64>, CliError> {
    let mut cfg = cfg.clone();
    cfg.mode = mode;
    if cfg.validate().is_err() {
        return Ok(None);
    }
    let zero = Params::filled(&cfg, cfg.qformat.zero());
    let (_, r) = Engine::new(&cfg, &zero)?.run(&vec![cfg.qformat.zero(); cfg.input_size()])?;
    Ok(Some(r.total_cycles))
}

fn cmd_timing(net: &NetArgs, n_list: Option<&str>, out: Option<&Path>, clock_hz: f64) -> Result<(), CliError> {
    let cfg = net.resolve(None)?;
    let join = |n: &[u64]| n.iter().map(u64::to_string).collect::<Vec<_>>().join(":");
    let mut lists = Vec::new();
    match n_list {
        Some(text) => {
            let n = parse_layer_sizes(text).map_err(CliError::Usage)?;
            lists.push(("custom", TimingInputs::new(n.into_iter().map(|v| v as u64).collect())?));
        }
        None => {
            lists.push(("with_input", TimingInputs::with_input(&cfg)?));
            lists.push(("compute_only", TimingInputs::compute_only(&cfg)?));
        }
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    let row = |metric: &str, n: String, value: String| vec![metric.to_string(), n, value];
    for (label, t) in &lists {
        let n = join(t.n());
        rows.push(row(&format!("t_parallel_{label}"), n.clone(), t_parallel(t).to_string()));
        rows.push(row(&format!("t_reuse_{label}"), n.clone(), t_reuse(t).to_string()));
        if t.is_degenerate() {
            log::warn!("single-layer n list {n}: T_R is degenerate");
            rows.push(row(&format!("degenerate_{label}"), n, "true".into()));
        }
    }
    let mut sf_report = None;
    for mode in [EngineMode::StoreAndForward, EngineMode::Streamed] {
        let value = match simulated_total(&cfg, mode)? {
            Some(total) => {
                if mode == EngineMode::StoreAndForward {
                    sf_report = Some(total);
                }
                total.to_string()
            }
            None => "unsupported".into(),
        };
        rows.push(row(&format!("simulated_{}", mode.name()), join(&to_u64(&cfg.layer_sizes)), value));
    }
    let savings = af_savings(&cfg);
    for (l, s) in savings.per_layer.iter().enumerate() {
        rows.push(row(&format!("af_saved_layer_{l}"), cfg.neurons(l).to_string(), s.to_string()));
    }
    rows.push(row("af_saved_total", join(&to_u64(cfg.compute_widths())), savings.network_total.to_string()));
    if let Some(total) = sf_report {
        let gops = 2.0 * cfg.mac_ops() as f64 * clock_hz / total as f64 / 1e9;
        rows.push(row("gops_store_and_forward", format!("{clock_hz:.0}"), format!("{gops:.6}")));
    }
    csv_report(out, "timing", &["metric", "n", "value"], &rows)
}

fn to_u64(v: &[usize]) -> Vec<u64> {
    v.iter().map(|&x| x as u64).collect()
}

fn cmd_sweep(net: &NetArgs, params: &Path, data: &DataArgs, out: Option<&Path>, widths: &[u32]) -> Result<(), CliError> {
    let float = match load_params(params)? {
        AnyParams::Float(p) => p,
        AnyParams::Quant(q) => return Err(ModelError::AlreadyQuantized(q.qformat()).into()),
    };
    let base = net.resolve(Some(float.layer_sizes()))?;
    let ds = load_dataset(data)?;
    let float_acc = accuracy(&float_predictions(&base, &float, &ds)?, ds.labels());
    let mut rows = vec![vec!["float".to_string(), String::new(), format!("{float_acc:.6}"), String::new()]];
    let int_bits = net.int_bits.unwrap_or(3);
    for &bits in widths {
        let mut cfg = base.clone();
        cfg.qformat = checked_format(bits, int_bits)?;
        if let Err(e) = cfg.validate() {
            return Err(ConfigLoadError::from(e).into());
        }
        let q = quantize_params(&float, cfg.qformat)?;
        let preds = engine_predictions(&cfg, &q, &ds)?;
        let cycles = simulated_total(&cfg, cfg.mode)?.expect("validated above");
        let acc = accuracy(&preds, ds.labels());
        summary(out.is_some(), &format!("{}: accuracy {acc:.4}, {cycles} cycles", cfg.qformat));
        rows.push(vec![bits.to_string(), int_bits.to_string(), format!("{acc:.6}"), cycles.to_string()]);
    }
    summary(out.is_some(), &format!("float: accuracy {float_acc:.4}"));
    csv_report(out, "sweep", &["bits", "int_bits", "accuracy", "cycles"], &rows)
}

fn cmd_train(net: &NetArgs, data: &DataArgs, out: &Path, opts: &TrainOptions) -> Result<(), CliError> {
    let cfg = net.resolve(None)?;
    let ds = load_dataset(data)?;
    let params = train_minimal(&ds, &cfg, opts)?;
    save_params(out, &AnyParams::Float(params))?;
    println!("trained {} samples, {} epochs, seed {} -> {}", ds.len(), opts.epochs, opts.seed, out.display());
    Ok(())
}

fn cmd_quantize(params: &Path, out: &Path, bits: u32, int_bits: u32) -> Result<(), CliError> {
    let fmt = checked_format(bits, int_bits)?;
    let q = match load_params(params)? {
        AnyParams::Float(p) => quantize_params(&p, fmt)?,
        AnyParams::Quant(q) => return Err(ModelError::AlreadyQuantized(q.qformat()).into()),
    };
    save_params(out, &AnyParams::Quant(q))?;
    println!("quantized {} -> {} at {fmt}", params.display(), out.display());
    Ok(())
}

/// Uniform weights in +-0.5 from a seeded generator.
fn seeded_params(cfg: &NetworkConfig, seed: u64) -> Result<QuantParams, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = (0..cfg.compute_layers())
        .map(|l| {
            let (n, i) = (cfg.neurons(l), cfg.inputs(l));
            let w = (0..n * i).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let b = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            LayerParams::new(n, i, w, b)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(quantize_params(&Params::new(layers)?, cfg.qformat)?)
}

fn cmd_trace(
    net: &NetArgs,
    params: Option<&Path>,
    data: Option<(&Path, &Path)>,
    index: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (cfg, q) = match params {
        Some(p) => quant_params_for(net, load_params(p)?)?,
        None => {
            let cfg = net.resolve(None)?;
            let q = seeded_params(&cfg, seed)?;
            (cfg, q)
        }
    };
    let input = match data {
        Some((images, labels)) => {
            let ds = Dataset::load(images, labels, FoldMode::Average, Some(index + 1))?;
            let img = ds.images().get(index).ok_or_else(|| CliError::Usage(format!("no image at index {index}")))?;
            to_input_vector(img, cfg.qformat)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            (0..cfg.input_size())
                .map(|_| quantize(rng.gen_range(0.0..1.0), cfg.qformat))
                .collect::<Result<_, _>>()?
        }
    };
    let mut e = Engine::new(&cfg, &q)?;
    e.set_trace(true);
    e.run(&input)?;
    let mut w = open_out(out)?;
    write_trace(&mut w, e.trace()).map_err(io_err(out))?;
    w.flush().map_err(io_err(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunSpec {
        RunSpec::try_parse_from(std::iter::once("hydra").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn overrides_apply() {
        let spec = parse(&["timing", "--bits", "16", "--mode", "stream", "--af", "sigmoid"]);
        let Command::Timing { net, .. } = spec.command else { panic!() };
        let cfg = net.resolve(None).unwrap();
        assert_eq!(cfg.qformat, QFormat::new(16, 3).unwrap());
        assert_eq!(cfg.mode, EngineMode::Streamed);
        assert_eq!(cfg.af_per_layer, vec![AfKind::SigmoidLut, AfKind::SigmoidLut, AfKind::SigmoidLut, AfKind::Identity]);
    }

    #[test]
    fn single_layer_af_override() {
        let net = NetArgs { config: None, bits: None, int_bits: None, mode: None, af: Some(AfKind::Relu), tiling: false };
        assert_eq!(net.resolve(Some(vec![4, 2])).unwrap().af_per_layer, vec![AfKind::Relu]);
    }

    #[test]
    fn bad_flags_are_rejected() {
        assert!(RunSpec::try_parse_from(["hydra", "timing", "--mode", "sideways"]).is_err());
        assert!(RunSpec::try_parse_from(["hydra", "simulate"]).is_err());
        let spec = parse(&["timing", "--bits", "2"]);
        let Command::Timing { net, .. } = spec.command else { panic!() };
        assert!(net.resolve(None).is_err());
    }

    #[test]
    fn accuracy_counts_matches() {
        assert_eq!(accuracy(&[Some(1), None, Some(2)], &[1, 0, 3]), 1.0 / 3.0);
        assert_eq!(accuracy(&[], &[]), 0.0);
    }
}

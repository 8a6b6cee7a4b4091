//! The layer-multiplexed control engine: one physical layer of `max_fma`
//! FMA units, a PISO and a single activation unit, sequenced cycle by cycle
//! through every layer of the network.
//!
//! Internally the datapath has two halves that run each cycle in a fixed
//! order: the serializer (PISO shift, AF, store to the output bank) first,
//! then the front end (bias preload, MAC steps, PISO load). In streamed mode
//! the front end starts the next layer as soon as the PISO has taken the
//! current layer's sums, and each MAC step consumes the activation stored in
//! the same cycle.

mod report;
mod trace;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datapath::{build_sigmoid_lut, ActivationUnit, AfKind, DatapathError, FmaUnit, PisoBuffer};
use crate::error::Fault;
use crate::fxp::{FxpError, QValue};
use crate::model::{ConfigErrors, ModelError, NetworkConfig, QuantParams};
use crate::timing::{AnalyticTiming, TimingError};

pub use report::{CycleReport, LayerTiming};
pub use trace::{write_trace, TraceRecord};

/// Whether layer `l + 1` waits for all of layer `l`'s outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineMode {
    #[default]
    #[serde(alias = "store")]
    StoreAndForward,
    #[serde(alias = "stream")]
    Streamed,
}

impl EngineMode {
    pub fn name(self) -> &'static str {
        match self {
            EngineMode::StoreAndForward => "store_and_forward",
            EngineMode::Streamed => "streamed",
        }
    }
}

impl fmt::Display for EngineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "store" | "store_and_forward" => Ok(EngineMode::StoreAndForward),
            "stream" | "streamed" => Ok(EngineMode::Streamed),
            other => Err(format!("unknown engine mode '{other}' (expected store or stream)")),
        }
    }
}

/// Controller state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    LoadBias,
    Mac(usize),
    PisoLoad,
    Serialize(usize),
    LayerDone,
    AnnDone,
}

impl Phase {
    pub fn can_enter(self, next: Phase) -> bool {
        use Phase::*;
        match (self, next) {
            (Idle, LoadBias) | (LoadBias, Mac(_)) | (Mac(_), PisoLoad) | (PisoLoad, Serialize(0)) => true,
            (Mac(a), Mac(b)) => b > a,
            (Serialize(a), Serialize(b)) => b == a + 1,
            (Serialize(_), LayerDone) | (LayerDone, LoadBias) | (LayerDone, AnnDone) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Idle => f.write_str("idle"),
            Phase::LoadBias => f.write_str("load_bias"),
            Phase::Mac(k) => write!(f, "mac[{k}]"),
            Phase::PisoLoad => f.write_str("piso_load"),
            Phase::Serialize(k) => write!(f, "serialize[{k}]"),
            Phase::LayerDone => f.write_str("layer_done"),
            Phase::AnnDone => f.write_str("ann_done"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    LayerStarted(usize),
    FirstOutput { layer: usize, cycle: u64 },
    LayerFinished(usize),
    AnnDone,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::LayerStarted(l) => write!(f, "layer_started({l})"),
            Event::FirstOutput { layer, cycle } => write!(f, "first_output({layer}@{cycle})"),
            Event::LayerFinished(l) => write!(f, "layer_finished({l})"),
            Event::AnnDone => f.write_str("ann_done"),
        }
    }
}

/// What happened during one clock cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub cycle: u64,
    pub phase: Phase,
    pub events: Vec<Event>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Datapath(#[from] DatapathError),
    #[error("control fault: {0}")]
    Fault(#[from] Fault),
    #[error(transparent)]
    Fxp(#[from] FxpError),
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error("input has {found} values, network expects {expected}")]
    InputLength { expected: usize, found: usize },
    #[error("engine stepped before an input was loaded")]
    NoInput,
}

impl EngineError {
    /// Internal contract violation rather than bad input.
    pub fn is_fault(&self) -> bool {
        matches!(self, EngineError::Fault(_) | EngineError::Datapath(DatapathError::Fault(_)))
    }
}

#[derive(Debug, Clone, Copy)]
struct FrontJob {
    layer: usize,
    pass: usize,
    ready_at: u64,
    next_step: usize,
}

#[derive(Debug, Clone, Copy)]
struct SerJob {
    layer: usize,
    pass: usize,
    stored: usize,
}

/// Cycle-accurate model of the accelerator.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: NetworkConfig,
    params: QuantParams,
    mode: EngineMode,
    phase: Phase,
    layer: usize,
    cycle: u64,
    fma_bank: Vec<FmaUnit>,
    piso: PisoBuffer,
    afu: ActivationUnit,
    /// Ping-pong activation banks: layer `l` reads `banks[l % 2]` and writes
    /// `banks[(l + 1) % 2]`.
    banks: [Vec<QValue>; 2],
    input_loaded: bool,
    front: Option<FrontJob>,
    ser: Option<SerJob>,
    latch: Option<QValue>,
    timings: Vec<LayerTiming>,
    trace: Option<Vec<TraceRecord>>,
    steps_at_start: u64,
    afs_at_start: u64,
}

impl Engine {
    pub fn new(cfg: &NetworkConfig, params: &QuantParams) -> Result<Self, EngineError> {
        cfg.validate()?;
        params.check_shape(cfg)?;
        params.check_format(cfg.qformat)?;
        let layout = cfg.acc_layout()?;
        let lut = if cfg.af_per_layer.contains(&AfKind::SigmoidLut) {
            Some(build_sigmoid_lut(cfg.qformat)?)
        } else {
            None
        };
        let afu = ActivationUnit::new(cfg.af(0), lut);
        let trace = (std::env::var("HYDRA_TRACE").as_deref() == Ok("1")).then(Vec::new);
        let mut engine = Self {
            cfg: cfg.clone(),
            params: params.clone(),
            mode: cfg.mode,
            phase: Phase::Idle,
            layer: 0,
            cycle: 0,
            fma_bank: (0..cfg.max_fma).map(|i| FmaUnit::new(i, layout)).collect(),
            piso: PisoBuffer::new(cfg.max_fma),
            afu,
            banks: [Vec::new(), Vec::new()],
            input_loaded: false,
            front: None,
            ser: None,
            latch: None,
            timings: Vec::new(),
            trace,
            steps_at_start: 0,
            afs_at_start: 0,
        };
        engine.reset();
        Ok(engine)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn layer_index(&self) -> usize {
        self.layer
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn fma_bank(&self) -> &[FmaUnit] {
        &self.fma_bank
    }

    pub fn gate_mask(&self) -> Vec<bool> {
        self.fma_bank.iter().map(FmaUnit::is_enabled).collect()
    }

    pub fn piso(&self) -> &PisoBuffer {
        &self.piso
    }

    pub fn afu(&self) -> &ActivationUnit {
        &self.afu
    }

    /// Inputs of the layer the controller is working on.
    pub fn in_buf(&self) -> &[QValue] {
        &self.banks[self.layer % 2]
    }

    /// Activations stored so far by the controller's current layer.
    pub fn out_buf(&self) -> &[QValue] {
        &self.banks[(self.layer + 1) % 2]
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::AnnDone
    }

    /// Recording starts empty; `HYDRA_TRACE=1` turns it on at construction.
    pub fn set_trace(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn set_mode(&mut self, mode: EngineMode) -> Result<(), EngineError> {
        if self.phase != Phase::Idle || self.cycle != 0 {
            return Err(Fault::NotIdle.into());
        }
        let mut cfg = self.cfg.clone();
        cfg.mode = mode;
        cfg.validate()?;
        self.cfg = cfg;
        self.mode = mode;
        Ok(())
    }

    /// Back to cycle 0, idle, every unit gated, no input.
    pub fn reset(&mut self) {
        self.phase = Phase::Idle;
        self.layer = 0;
        self.cycle = 0;
        for u in &mut self.fma_bank {
            u.gate();
        }
        self.piso = PisoBuffer::new(self.cfg.max_fma);
        self.banks = [Vec::new(), Vec::new()];
        self.input_loaded = false;
        self.front = None;
        self.ser = None;
        self.latch = None;
        self.timings = (0..self.cfg.compute_layers())
            .map(|l| LayerTiming {
                layer: l,
                inputs: self.cfg.inputs(l),
                neurons: self.cfg.neurons(l),
                passes: self.passes(l),
                start_cycle: 0,
                first_output_cycle: 0,
                end_cycle: 0,
                mac_cycles: 0,
                piso_load_cycles: 0,
                serialize_cycles: 0,
                layer_total: 0,
            })
            .collect();
        if let Some(t) = &mut self.trace {
            t.clear();
        }
        self.steps_at_start = self.fma_bank.iter().map(FmaUnit::total_steps).sum();
        self.afs_at_start = self.afu.invocations();
    }

    /// Places the input vector in the first activation bank.
    pub fn load_input(&mut self, input: &[QValue]) -> Result<(), EngineError> {
        if self.phase != Phase::Idle || self.cycle != 0 {
            return Err(Fault::NotIdle.into());
        }
        let expected = self.cfg.input_size();
        if input.len() != expected {
            return Err(EngineError::InputLength { expected, found: input.len() });
        }
        if let Some(v) = input.iter().find(|v| v.fmt() != self.cfg.qformat) {
            return Err(FxpError::FormatMismatch { expected: self.cfg.qformat, found: v.fmt() }.into());
        }
        self.banks[0] = input.to_vec();
        self.input_loaded = true;
        self.front = Some(FrontJob { layer: 0, pass: 0, ready_at: 1, next_step: 0 });
        Ok(())
    }

    fn passes(&self, l: usize) -> usize {
        self.cfg.neurons(l).div_ceil(self.cfg.max_fma)
    }

    /// First neuron and width of pass `p` of layer `l`.
    fn pass_span(&self, l: usize, p: usize) -> (usize, usize) {
        let offset = p * self.cfg.max_fma;
        (offset, self.cfg.max_fma.min(self.cfg.neurons(l) - offset))
    }

    fn serializer_busy(&self) -> bool {
        self.latch.is_some() || !self.piso.is_drained()
    }

    /// Advances the clock by one cycle.
    pub fn step(&mut self) -> Result<StepOutcome, EngineError> {
        if self.phase == Phase::AnnDone {
            return Err(Fault::SteppedAfterDone.into());
        }
        if !self.input_loaded {
            return Err(EngineError::NoInput);
        }
        self.cycle += 1;
        let c = self.cycle;
        let last_layer = self.cfg.compute_layers() - 1;
        let mut events = Vec::new();
        let mut phases = Vec::new();
        let mut active_fma = 0;

        // Serializer: store the latched activation, then shift the next one
        // through the activation unit.
        if let Some(v) = self.latch.take() {
            let job = self.ser.as_mut().expect("latch implies a serializer job");
            self.banks[(job.layer + 1) % 2].push(v);
            job.stored += 1;
            let job = *job;
            let (_, width) = self.pass_span(job.layer, job.pass);
            if job.stored == width {
                self.ser = None;
                phases.push(Phase::LayerDone);
                let final_pass = job.pass + 1 == self.passes(job.layer);
                if final_pass {
                    let t = &mut self.timings[job.layer];
                    t.end_cycle = c;
                    t.layer_total = c - t.start_cycle;
                    events.push(Event::LayerFinished(job.layer));
                }
                if final_pass && job.layer == last_layer {
                    phases.push(Phase::AnnDone);
                    events.push(Event::AnnDone);
                } else if self.mode == EngineMode::StoreAndForward {
                    let (layer, pass) = if final_pass { (job.layer + 1, 0) } else { (job.layer, job.pass + 1) };
                    self.front = Some(FrontJob { layer, pass, ready_at: c + 1, next_step: 0 });
                }
            }
        }
        if let Some(job) = self.ser {
            if !self.piso.is_drained() {
                let k = self.piso.shift_index();
                let v = self.piso.shift()?;
                self.latch = Some(self.afu.apply(v)?);
                self.timings[job.layer].serialize_cycles += 1 + u64::from(k == 0);
                phases.push(Phase::Serialize(k));
                if k == 0 && job.pass == 0 {
                    self.timings[job.layer].first_output_cycle = c;
                    events.push(Event::FirstOutput { layer: job.layer, cycle: c });
                }
            }
        }
        let hidden = self.serializer_busy();

        // Front end: bias preload and MAC steps, then the PISO load.
        if let Some(mut job) = self.front.filter(|j| j.ready_at <= c) {
            let l = job.layer;
            let inputs = self.cfg.inputs(l);
            let (offset, width) = self.pass_span(l, job.pass);
            if job.next_step < inputs {
                if let Some(&x) = self.banks[l % 2].get(job.next_step) {
                    let k = job.next_step;
                    let layer = &self.params.layers()[l];
                    if k == 0 {
                        for (j, unit) in self.fma_bank[..width].iter_mut().enumerate() {
                            unit.start(layer.biases()[offset + j], inputs)?;
                        }
                        if job.pass == 0 {
                            self.timings[l].start_cycle = c - 1;
                            events.push(Event::LayerStarted(l));
                        }
                    }
                    for (j, unit) in self.fma_bank[..width].iter_mut().enumerate() {
                        unit.step(x, layer.weight(offset + j, k), self.cfg.accumulation)?;
                    }
                    active_fma = width;
                    self.timings[l].mac_cycles += 1;
                    if !hidden {
                        let current = phases.last().copied().unwrap_or(self.phase);
                        if matches!(current, Phase::Idle | Phase::LayerDone) {
                            phases.push(Phase::LoadBias);
                            self.layer = l;
                        }
                        phases.push(Phase::Mac(k));
                    }
                    job.next_step += 1;
                }
                self.front = Some(job);
            } else {
                if self.serializer_busy() {
                    return Err(Fault::SerializerBusy.into());
                }
                let sums: Vec<QValue> = self.fma_bank[..width].iter().map(FmaUnit::output).collect();
                self.piso.load(sums)?;
                for unit in &mut self.fma_bank[..width] {
                    unit.gate();
                }
                self.afu.reconfigure(self.cfg.af(l))?;
                if job.pass == 0 {
                    self.banks[(l + 1) % 2].clear();
                }
                self.timings[l].piso_load_cycles += 1;
                phases.push(Phase::PisoLoad);
                self.layer = l;
                self.ser = Some(SerJob { layer: l, pass: job.pass, stored: 0 });
                self.front = None;
                if self.mode == EngineMode::Streamed && l < last_layer {
                    self.front = Some(FrontJob { layer: l + 1, pass: 0, ready_at: c + 1, next_step: 0 });
                }
            }
        }

        for next in phases {
            if !self.phase.can_enter(next) {
                return Err(Fault::IllegalTransition { from: self.phase, to: next }.into());
            }
            self.phase = next;
        }
        if let Some(t) = &mut self.trace {
            t.push(TraceRecord { cycle: c, phase: self.phase, layer: self.layer, active_fma, events: events.clone() });
        }
        Ok(StepOutcome { cycle: c, phase: self.phase, events })
    }

    /// Output activations of the last layer once the run is complete.
    pub fn output(&self) -> Option<&[QValue]> {
        self.is_done().then(|| self.banks[self.cfg.compute_layers() % 2].as_slice())
    }

    pub fn report(&self) -> Result<CycleReport, EngineError> {
        let mac_ops = self.fma_bank.iter().map(FmaUnit::total_steps).sum::<u64>() - self.steps_at_start;
        let total_cycles = self.cycle + self.cfg.softmax_cycles;
        let fma_utilization = if total_cycles == 0 {
            0.0
        } else {
            mac_ops as f64 / (self.cfg.max_fma as f64 * total_cycles as f64)
        };
        let hypothetical_load_cycles = self.cfg.input_size() as u64
            + self.timings.iter().map(|t| (t.passes * (t.inputs + 1)) as u64).sum::<u64>();
        Ok(CycleReport {
            mode: self.mode,
            max_fma: self.cfg.max_fma,
            per_layer: self.timings.clone(),
            total_cycles,
            mac_ops,
            af_invocations: self.afu.invocations() - self.afs_at_start,
            fma_utilization,
            softmax_cycles: self.cfg.softmax_cycles,
            hypothetical_load_cycles,
            analytic: AnalyticTiming::of(&self.cfg)?,
        })
    }

    /// Resets, loads `input` and clocks until ANN done.
    pub fn run(&mut self, input: &[QValue]) -> Result<(Vec<QValue>, CycleReport), EngineError> {
        self.reset();
        self.load_input(input)?;
        while !self.is_done() {
            self.step()?;
        }
        let out = self.output().expect("done").to_vec();
        Ok((out, self.report()?))
    }
}

/// One inference on a fresh engine.
pub fn run_inference(
    cfg: &NetworkConfig,
    params: &QuantParams,
    input: &[QValue],
) -> Result<(Vec<QValue>, CycleReport), EngineError> {
    Engine::new(cfg, params)?.run(input)
}

/// Runs every input on per-worker engines; results keep the input order.
pub fn run_batch(
    cfg: &NetworkConfig,
    params: &QuantParams,
    inputs: &[Vec<QValue>],
) -> Result<Vec<(Vec<QValue>, CycleReport)>, EngineError> {
    let proto = Engine::new(cfg, params)?;
    inputs.par_iter().map_init(|| proto.clone(), |e, x| e.run(x)).collect()
}

/// Index of the largest raw value; the lowest index wins ties.
pub fn classify(output: &[QValue]) -> Option<usize> {
    output
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, i64)>, (i, v)| match best {
            Some((_, raw)) if raw >= v.raw() => best,
            _ => Some((i, v.raw())),
        })
        .map(|(i, _)| i)
}

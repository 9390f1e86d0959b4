//! Fixed-step forward Euler and classical RK4, and the per-neuron simulation
//! loop driven by a binary input spike train.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec, NeuronState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Euler,
    Rk4,
}

impl SolverKind {
    pub const ALL: [SolverKind; 2] = [SolverKind::Euler, SolverKind::Rk4];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Euler => "euler",
            SolverKind::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" => Ok(SolverKind::Euler),
            "rk4" | "rk" => Ok(SolverKind::Rk4),
            other => Err(Error::InvalidParameter(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Current injected on a step that carries an input spike.
    pub input_amplitude: f64,
}

impl SimulationConfig {
    /// `dt = 0.1`, 150 steps and the model's default drive amplitude.
    pub fn for_model(kind: ModelKind) -> Self {
        Self {
            dt: 0.1,
            n_steps: 150,
            input_amplitude: default_input_amplitude(kind),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
        }
        if !(self.input_amplitude > 0.0) {
            return Err(Error::InvalidParameter("input_amplitude must be > 0".into()));
        }
        Ok(())
    }
}

pub fn default_input_amplitude(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Lif => 1.0,
        ModelKind::Fhn => 0.5,
        ModelKind::Izh => 10.0,
        ModelKind::Hh => 5.0,
    }
}

/// `state + dt * f(state)`, followed by the model's projection.
pub fn euler_step(spec: &ModelSpec, state: &NeuronState, i_in: f64, dt: f64) -> NeuronState {
    let slope = spec.derivative(state, i_in);
    spec.project(state.add_scaled(dt, &slope))
}

/// Classical RK4. Each increment `k_i` already carries the factor `dt`; the
/// input current is held for the whole step.
pub fn rk4_step(spec: &ModelSpec, state: &NeuronState, i_in: f64, dt: f64) -> NeuronState {
    let k1 = spec.derivative(state, i_in).scale(dt);
    let k2 = spec.derivative(&state.add_scaled(0.5, &k1), i_in).scale(dt);
    let k3 = spec.derivative(&state.add_scaled(0.5, &k2), i_in).scale(dt);
    let k4 = spec.derivative(&state.add_scaled(1.0, &k3), i_in).scale(dt);
    let next = state
        .add_scaled(1.0 / 6.0, &k1)
        .add_scaled(2.0 / 6.0, &k2)
        .add_scaled(2.0 / 6.0, &k3)
        .add_scaled(1.0 / 6.0, &k4);
    spec.project(next)
}

pub fn step(solver: SolverKind, spec: &ModelSpec, state: &NeuronState, i_in: f64, dt: f64) -> NeuronState {
    match solver {
        SolverKind::Euler => euler_step(spec, state, i_in, dt),
        SolverKind::Rk4 => rk4_step(spec, state, i_in, dt),
    }
}

/// Recorded simulation: one entry per step, states taken after threshold/reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembraneTrace {
    pub times: Vec<f64>,
    pub states: Vec<NeuronState>,
    pub inputs: Vec<bool>,
    pub spikes: Vec<bool>,
}

impl MembraneTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn potentials(&self) -> Vec<f64> {
        self.states.iter().map(NeuronState::v).collect()
    }

    /// Writes `t,v,<aux...>,input_spike,output_spike`, one row per step.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let kind = match self.states.first() {
            Some(s) => s.kind(),
            None => return writeln!(out, "t,v,input_spike,output_spike"),
        };
        let mut header = vec!["t", "v"];
        header.extend_from_slice(NeuronState::aux_names(kind));
        header.extend_from_slice(&["input_spike", "output_spike"]);
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            write!(out, "{}", self.times[i])?;
            for c in self.states[i].components() {
                write!(out, ",{c}")?;
            }
            writeln!(out, ",{},{}", u8::from(self.inputs[i]), u8::from(self.spikes[i]))?;
        }
        Ok(())
    }
}

fn check_input(input_spikes: &[bool], cfg: &SimulationConfig) -> Result<()> {
    cfg.validate()?;
    if input_spikes.len() != cfg.n_steps {
        return Err(Error::DimensionMismatch {
            what: "input spike train",
            expected: cfg.n_steps,
            actual: input_spikes.len(),
        });
    }
    Ok(())
}

/// Runs the step / threshold loop, handing each post-reset state to `visit`.
fn run_loop(
    spec: &ModelSpec,
    solver: SolverKind,
    input_spikes: &[bool],
    cfg: &SimulationConfig,
    mut visit: impl FnMut(usize, &NeuronState, bool),
) {
    let mut state = spec.initial_state();
    for (t, &spike_in) in input_spikes.iter().enumerate() {
        let i_in = if spike_in { cfg.input_amplitude } else { 0.0 };
        let advanced = step(solver, spec, &state, i_in, cfg.dt);
        let (next, fired) = spec.apply_threshold(advanced);
        state = next;
        visit(t, &state, fired);
    }
}

pub fn simulate_neuron(
    spec: &ModelSpec,
    solver: SolverKind,
    input_spikes: &[bool],
    cfg: &SimulationConfig,
) -> Result<MembraneTrace> {
    check_input(input_spikes, cfg)?;
    let n = cfg.n_steps;
    let mut trace = MembraneTrace {
        times: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        inputs: input_spikes.to_vec(),
        spikes: Vec::with_capacity(n),
    };
    run_loop(spec, solver, input_spikes, cfg, |t, state, fired| {
        trace.times.push(t as f64 * cfg.dt);
        trace.states.push(*state);
        trace.spikes.push(fired);
    });
    Ok(trace)
}

/// Output spike train only; same dynamics as [`simulate_neuron`].
pub fn simulate_spikes(
    spec: &ModelSpec,
    solver: SolverKind,
    input_spikes: &[bool],
    cfg: &SimulationConfig,
) -> Result<Vec<bool>> {
    check_input(input_spikes, cfg)?;
    let mut spikes = Vec::with_capacity(cfg.n_steps);
    run_loop(spec, solver, input_spikes, cfg, |_, _, fired| spikes.push(fired));
    Ok(spikes)
}

pub fn count_spikes(trace: &MembraneTrace) -> usize {
    trace.spikes.iter().filter(|&&s| s).count()
}

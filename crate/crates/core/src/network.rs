//! Membrane layer + linear synapse regression pipeline.
//!
//! Every collocation point owns one neuron. Its encoded input train drives the
//! neuron from the canonical initial state; the resulting output spike train is
//! the feature vector (one feature per time step) of a single trainable linear
//! readout with bias.

use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::{evaluate_target, sample_targets, Grid, NoiseSpec, RateEncoder, TargetFunction};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
pub use crate::raster::SpikeRaster;
use crate::solvers::{simulate_spikes, SimulationConfig, SolverKind};

/// Drives one neuron per raster row. Returns the output raster and its total
/// spike count.
pub fn membrane_forward(
    spec: &ModelSpec,
    solver: SolverKind,
    input: &SpikeRaster,
    cfg: &SimulationConfig,
) -> Result<(SpikeRaster, usize)> {
    if input.n_t() != cfg.n_steps {
        return Err(Error::DimensionMismatch {
            what: "input raster columns",
            expected: cfg.n_steps,
            actual: input.n_t(),
        });
    }
    let rows = (0..input.n_x())
        .into_par_iter()
        .map(|j| simulate_spikes(spec, solver, input.row(j), cfg))
        .collect::<Result<Vec<_>>>()?;
    let output = SpikeRaster::from_rows(rows)?;
    let total = output.total();
    Ok((output, total))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynapseWeights {
    pub w: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMethod {
    RidgeClosedForm,
    GradientDescent,
}

impl FromStr for TrainMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ridge" | "ridge_closed_form" | "closed_form" => Ok(TrainMethod::RidgeClosedForm),
            "gd" | "gradient_descent" => Ok(TrainMethod::GradientDescent),
            other => Err(Error::InvalidParameter(format!("unknown train method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub method: TrainMethod,
    /// Penalty on `|w|^2`; the bias is never penalized.
    pub ridge_lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: TrainMethod::RidgeClosedForm,
            ridge_lambda: 1.0,
            learning_rate: 1e-3,
            epochs: 2000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::InvalidParameter("ridge_lambda must be >= 0".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning_rate must be > 0".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

fn design_matrix(raster: &SpikeRaster) -> DMatrix<f64> {
    DMatrix::from_fn(
        raster.n_x(),
        raster.n_t(),
        |j, t| {
            if raster.get(j, t) {
                1.0
            } else {
                0.0
            }
        },
    )
}

/// Fits `w, bias` minimizing `sum_j (w . s_j + bias - y_j)^2 + lambda |w|^2`.
pub fn train_synapse(output: &SpikeRaster, targets: &[f64], cfg: &TrainConfig) -> Result<SynapseWeights> {
    cfg.validate()?;
    if targets.len() != output.n_x() {
        return Err(Error::DimensionMismatch {
            what: "targets",
            expected: output.n_x(),
            actual: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::InvalidParameter("no training points".into()));
    }
    let x = design_matrix(output);
    let y = DVector::from_column_slice(targets);
    match cfg.method {
        TrainMethod::RidgeClosedForm => ridge_closed_form(&x, &y, cfg.ridge_lambda),
        TrainMethod::GradientDescent => Ok(gradient_descent(&x, &y, cfg)),
    }
}

/// Centered normal equations: the unpenalized bias is eliminated by
/// subtracting column and target means, then `(Xc'Xc + lambda I) w = Xc'yc`
/// is solved by Cholesky.
fn ridge_closed_form(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<SynapseWeights> {
    let n = x.nrows() as f64;
    let p = x.ncols();
    let col_mean = DVector::from_iterator(p, x.column_iter().map(|c| c.sum() / n));
    let y_mean = y.sum() / n;

    let mut xc = x.clone();
    for (mut col, mean) in xc.column_iter_mut().zip(col_mean.iter()) {
        col.add_scalar_mut(-mean);
    }
    let yc = y.add_scalar(-y_mean);

    let mut gram = xc.tr_mul(&xc);
    for i in 0..p {
        gram[(i, i)] += lambda;
    }
    let rhs = xc.tr_mul(&yc);

    let scale = gram.diagonal().max().max(1.0);
    let chol = gram.cholesky().ok_or(Error::IllConditioned)?;
    if lambda == 0.0 {
        let l = chol.l_dirty();
        let min_pivot = (0..p).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot < 1e-10 * scale {
            return Err(Error::IllConditioned);
        }
    }
    let w = chol.solve(&rhs);
    let bias = y_mean - col_mean.dot(&w);
    Ok(SynapseWeights {
        w: w.iter().copied().collect(),
        bias,
    })
}

/// Full-batch gradient descent from zero on
/// `1/2 sum_j r_j^2 + lambda/2 |w|^2`, the same objective the closed form
/// minimizes.
fn gradient_descent(x: &DMatrix<f64>, y: &DVector<f64>, cfg: &TrainConfig) -> SynapseWeights {
    let mut w = DVector::<f64>::zeros(x.ncols());
    let mut bias = 0.0;
    let lr = cfg.learning_rate;
    for _ in 0..cfg.epochs {
        let mut residual = x * &w;
        residual.add_scalar_mut(bias);
        residual -= y;
        let grad_w = x.tr_mul(&residual) + &w * cfg.ridge_lambda;
        let grad_b = residual.sum();
        w -= grad_w * lr;
        bias -= lr * grad_b;
    }
    SynapseWeights {
        w: w.iter().copied().collect(),
        bias,
    }
}

/// `y_j = w . s_j + bias` for every raster row.
pub fn predict(weights: &SynapseWeights, output: &SpikeRaster) -> Result<Vec<f64>> {
    if weights.w.len() != output.n_t() {
        return Err(Error::DimensionMismatch {
            what: "synapse weights",
            expected: output.n_t(),
            actual: weights.w.len(),
        });
    }
    Ok((0..output.n_x())
        .map(|j| {
            output
                .row(j)
                .iter()
                .zip(&weights.w)
                .filter(|(&s, _)| s)
                .map(|(_, w)| w)
                .sum::<f64>()
                + weights.bias
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Error {
    /// `sum_j (pred_j - exact_j)^2`
    pub sum: f64,
    /// `sqrt(sum / sum_j exact_j^2)`
    pub relative: f64,
}

pub fn l2_error(y_pred: &[f64], y_exact: &[f64]) -> Result<L2Error> {
    if y_pred.len() != y_exact.len() {
        return Err(Error::DimensionMismatch {
            what: "prediction vector",
            expected: y_exact.len(),
            actual: y_pred.len(),
        });
    }
    let sum: f64 = y_pred.iter().zip(y_exact).map(|(p, e)| (p - e) * (p - e)).sum();
    let norm: f64 = y_exact.iter().map(|e| e * e).sum();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(L2Error {
        sum,
        relative: (sum / norm).sqrt(),
    })
}

/// Everything one regression run needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionSetup {
    pub model: ModelSpec,
    pub solver: SolverKind,
    pub function: TargetFunction,
    pub grid: Grid,
    pub encoder: RateEncoder,
    pub noise: NoiseSpec,
    pub sim: SimulationConfig,
    pub train: TrainConfig,
}

impl RegressionSetup {
    /// Default parameters for `model` on `function`, noiseless.
    pub fn defaults(model: crate::models::ModelKind, solver: SolverKind, function: TargetFunction) -> Self {
        Self {
            model: ModelSpec::default_for(model),
            solver,
            function,
            grid: Grid::default(),
            encoder: RateEncoder::default(),
            noise: NoiseSpec::off(),
            sim: SimulationConfig::for_model(model),
            train: TrainConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.grid.validate()?;
        self.encoder.validate()?;
        self.sim.validate()?;
        self.train.validate()?;
        if self.encoder.n_t != self.sim.n_steps {
            return Err(Error::DimensionMismatch {
                what: "encoder time steps",
                expected: self.sim.n_steps,
                actual: self.encoder.n_t,
            });
        }
        if !(self.noise.sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub x: Vec<f64>,
    pub y_exact: Vec<f64>,
    /// Targets the synapse was fitted to (noisy when noise is enabled).
    pub y_train: Vec<f64>,
    pub predictions: Vec<f64>,
    pub l2_sum: f64,
    pub l2_relative: f64,
    pub input_spike_count: usize,
    pub output_spike_count: usize,
    /// Encoding plus membrane simulation.
    pub sim_time: Duration,
    /// Synapse fit.
    pub train_time: Duration,
}

impl RegressionResult {
    /// Two columns `x,y_pred`.
    pub fn write_predictions<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_columns(out, "y_pred", &self.x, &self.predictions)
    }

    /// Two columns `x,y_exact`.
    pub fn write_exact<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_columns(out, "y_exact", &self.x, &self.y_exact)
    }
}

fn write_columns<W: Write>(mut out: W, name: &str, x: &[f64], y: &[f64]) -> std::io::Result<()> {
    writeln!(out, "x,{name}")?;
    for (a, b) in x.iter().zip(y) {
        writeln!(out, "{a},{b}")?;
    }
    Ok(())
}

/// encode -> membrane layer -> synapse fit on (possibly noisy) targets ->
/// predict -> error against the exact targets.
pub fn run_regression(setup: &RegressionSetup) -> Result<RegressionResult> {
    setup.validate()?;
    let x = setup.grid.points();
    let y_exact: Vec<f64> = x.iter().map(|&xi| evaluate_target(setup.function, xi)).collect();
    let y_train = sample_targets(setup.function, &setup.grid, &setup.noise)?;

    let t0 = Instant::now();
    let encoded = setup.encoder.encode_all(&setup.grid)?;
    let (output, output_spike_count) = membrane_forward(&setup.model, setup.solver, &encoded.raster, &setup.sim)?;
    let sim_time = t0.elapsed();

    let t1 = Instant::now();
    let weights = train_synapse(&output, &y_train, &setup.train)?;
    let train_time = t1.elapsed();

    let predictions = predict(&weights, &output)?;
    let err = l2_error(&predictions, &y_exact)?;
    Ok(RegressionResult {
        x,
        y_exact,
        y_train,
        predictions,
        l2_sum: err.sum,
        l2_relative: err.relative,
        input_spike_count: encoded.raster.total(),
        output_spike_count,
        sim_time,
        train_time,
    })
}

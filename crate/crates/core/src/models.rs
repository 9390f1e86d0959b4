//! Neuron models as parameterized vector fields with threshold/reset rules.
//!
//! Four models are provided:
//!
//! * LIF: `dV/dt = ±(V - V_rest)/RC + I`, spike and reset to `V_rest` at `V >= V_th`
//! * FitzHugh-Nagumo: `dV/dt = V - V^3/3 - W + I`, `dW/dt = (V + alpha - beta W)/gamma`
//! * Izhikevich: `dv/dt = 0.04 v^2 + 5 v + 140 - u + I`, `du/dt = a (b v - u)`,
//!   reset `v -> c`, `u -> u + d`
//! * Hodgkin-Huxley: four-variable conductance model with voltage-dependent
//!   gating rates.
//!
//! Nothing here knows about time stepping; see [`crate::solvers`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lif,
    Fhn,
    Izh,
    Hh,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Lif, ModelKind::Fhn, ModelKind::Izh, ModelKind::Hh];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lif => "lif",
            ModelKind::Fhn => "fhn",
            ModelKind::Izh => "izh",
            ModelKind::Hh => "hh",
        }
    }

    /// Number of state variables.
    pub fn dim(self) -> usize {
        match self {
            ModelKind::Lif => 1,
            ModelKind::Fhn | ModelKind::Izh => 2,
            ModelKind::Hh => 4,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lif" => Ok(ModelKind::Lif),
            "fhn" => Ok(ModelKind::Fhn),
            "izh" => Ok(ModelKind::Izh),
            "hh" => Ok(ModelKind::Hh),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

/// Sign of the linear drift term in the LIF equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifDrift {
    /// `+(V - V_rest)/RC`: the potential runs away from rest until it fires.
    Divergent,
    /// `-(V - V_rest)/RC`: the potential relaxes back towards rest.
    Leaky,
}

impl FromStr for LifDrift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "divergent" => Ok(LifDrift::Divergent),
            "leaky" => Ok(LifDrift::Leaky),
            other => Err(Error::InvalidParameter(format!("unknown LIF drift '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifSpec {
    /// Product R*C.
    pub rc: f64,
    pub v_rest: f64,
    pub v_th: f64,
    pub drift: LifDrift,
}

impl Default for LifSpec {
    fn default() -> Self {
        Self {
            rc: 0.2,
            v_rest: 0.0,
            v_th: 1.0,
            drift: LifDrift::Divergent,
        }
    }
}

impl LifSpec {
    pub fn leaky() -> Self {
        Self {
            drift: LifDrift::Leaky,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check(self.rc > 0.0, "lif.rc must be > 0")?;
        check(self.v_th > self.v_rest, "lif.v_th must exceed lif.v_rest")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhnSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub v_th: f64,
    pub v_reset: f64,
}

impl Default for FhnSpec {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            beta: 0.8,
            gamma: 12.5,
            v_th: 1.0,
            v_reset: 0.0,
        }
    }
}

impl FhnSpec {
    pub fn validate(&self) -> Result<()> {
        check(self.gamma > 0.0, "fhn.gamma must be > 0")?;
        check(self.v_reset < self.v_th, "fhn.v_reset must be below fhn.v_th")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IzhSpec {
    /// Recovery timescale (1/ms).
    pub a: f64,
    pub b: f64,
    /// After-spike membrane reset (mV).
    pub c: f64,
    /// After-spike recovery increment.
    pub d: f64,
    pub v_th: f64,
    pub v0: f64,
    pub u0: f64,
}

impl Default for IzhSpec {
    fn default() -> Self {
        Self {
            a: 0.02,
            b: 0.2,
            c: -50.0,
            d: 2.0,
            v_th: 30.0,
            v0: -70.0,
            u0: -14.0,
        }
    }
}

impl IzhSpec {
    pub fn validate(&self) -> Result<()> {
        check(self.a > 0.0, "izh.a must be > 0")?;
        check(self.c < self.v_th, "izh.c must be below izh.v_th")
    }
}

/// What a Hodgkin-Huxley spike resets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HhReset {
    /// Membrane potential and all three gates return to the initial state.
    Full,
    /// Only the membrane potential returns to `v0`; gates keep their values.
    MembraneOnly,
}

impl FromStr for HhReset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(HhReset::Full),
            "membrane_only" | "membrane" => Ok(HhReset::MembraneOnly),
            other => Err(Error::InvalidParameter(format!("unknown HH reset '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HhSpec {
    pub c_m: f64,
    pub g_l: f64,
    pub g_k: f64,
    pub g_na: f64,
    pub e_l: f64,
    pub e_k: f64,
    pub e_na: f64,
    pub v_th: f64,
    /// Rest potential; also the reference for the rate-constant argument.
    pub v0: f64,
    pub n0: f64,
    pub m0: f64,
    pub h0: f64,
    pub reset: HhReset,
}

impl Default for HhSpec {
    fn default() -> Self {
        Self {
            c_m: 1.0,
            g_l: 0.3,
            g_k: 36.0,
            g_na: 120.0,
            e_l: -54.0,
            e_k: -77.0,
            e_na: 50.0,
            v_th: 30.0,
            v0: -65.0,
            n0: 0.3177,
            m0: 0.0529,
            h0: 0.5960,
            reset: HhReset::Full,
        }
    }
}

impl HhSpec {
    pub fn validate(&self) -> Result<()> {
        check(self.c_m > 0.0, "hh.c_m must be > 0")?;
        check(
            self.g_l >= 0.0 && self.g_k >= 0.0 && self.g_na >= 0.0,
            "hh conductances must be >= 0",
        )?;
        check(self.v0 < self.v_th, "hh.v0 must be below hh.v_th")?;
        for (name, g) in [("n0", self.n0), ("m0", self.m0), ("h0", self.h0)] {
            check((0.0..=1.0).contains(&g), &format!("hh.{name} must lie in [0, 1]"))?;
        }
        Ok(())
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

/// Dynamical state of one neuron. Derivatives and RK4 increments use the same
/// shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NeuronState {
    Lif { v: f64 },
    Fhn { v: f64, w: f64 },
    Izh { v: f64, u: f64 },
    Hh { v: f64, n: f64, m: f64, h: f64 },
}

impl NeuronState {
    pub fn kind(&self) -> ModelKind {
        match self {
            NeuronState::Lif { .. } => ModelKind::Lif,
            NeuronState::Fhn { .. } => ModelKind::Fhn,
            NeuronState::Izh { .. } => ModelKind::Izh,
            NeuronState::Hh { .. } => ModelKind::Hh,
        }
    }

    /// Membrane potential.
    pub fn v(&self) -> f64 {
        match *self {
            NeuronState::Lif { v }
            | NeuronState::Fhn { v, .. }
            | NeuronState::Izh { v, .. }
            | NeuronState::Hh { v, .. } => v,
        }
    }

    /// All components, membrane potential first.
    pub fn components(&self) -> Vec<f64> {
        match *self {
            NeuronState::Lif { v } => vec![v],
            NeuronState::Fhn { v, w } => vec![v, w],
            NeuronState::Izh { v, u } => vec![v, u],
            NeuronState::Hh { v, n, m, h } => vec![v, n, m, h],
        }
    }

    /// Names of the non-potential components, in [`components`](Self::components) order.
    pub fn aux_names(kind: ModelKind) -> &'static [&'static str] {
        match kind {
            ModelKind::Lif => &[],
            ModelKind::Fhn => &["w"],
            ModelKind::Izh => &["u"],
            ModelKind::Hh => &["n", "m", "h"],
        }
    }

    /// Componentwise `f(self_i, other_i)`.
    ///
    /// Panics if the two states belong to different models.
    pub fn zip_with(&self, other: &NeuronState, f: impl Fn(f64, f64) -> f64) -> NeuronState {
        use NeuronState::*;
        match (*self, *other) {
            (Lif { v }, Lif { v: v2 }) => Lif { v: f(v, v2) },
            (Fhn { v, w }, Fhn { v: v2, w: w2 }) => Fhn {
                v: f(v, v2),
                w: f(w, w2),
            },
            (Izh { v, u }, Izh { v: v2, u: u2 }) => Izh {
                v: f(v, v2),
                u: f(u, u2),
            },
            (
                Hh { v, n, m, h },
                Hh {
                    v: v2,
                    n: n2,
                    m: m2,
                    h: h2,
                },
            ) => Hh {
                v: f(v, v2),
                n: f(n, n2),
                m: f(m, m2),
                h: f(h, h2),
            },
            (a, b) => panic!("state kind mismatch: {} vs {}", a.kind(), b.kind()),
        }
    }

    /// `self + scale * delta`.
    pub fn add_scaled(&self, scale: f64, delta: &NeuronState) -> NeuronState {
        self.zip_with(delta, |x, d| x + scale * d)
    }

    pub fn scale(&self, factor: f64) -> NeuronState {
        self.zip_with(self, |x, _| factor * x)
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|x| x.is_finite())
    }
}

/// Hodgkin-Huxley channel opening/closing rates (1/ms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub alpha_n: f64,
    pub beta_n: f64,
    pub alpha_m: f64,
    pub beta_m: f64,
    pub alpha_h: f64,
    pub beta_h: f64,
}

impl RateConstants {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.alpha_n,
            self.beta_n,
            self.alpha_m,
            self.beta_m,
            self.alpha_h,
            self.beta_h,
        ]
    }
}

/// `x / (e^x - 1)`, continuous through `x = 0` where it equals 1.
fn x_over_expm1(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - 0.5 * x + x * x / 12.0
    } else {
        x / x.exp_m1()
    }
}

/// Rates evaluated at the shifted potential `U = v_m - v0`.
///
/// `alpha_n` and `alpha_m` are written as `scale * x / (e^x - 1)`, so the
/// removable singularities at `U = 10` and `U = 25` take their limits 0.1 and 1.
pub fn hh_rate_constants(v_m: f64, v0: f64) -> RateConstants {
    let u = v_m - v0;
    RateConstants {
        // (0.1 - 0.01 U) / (e^(1 - 0.1 U) - 1)
        alpha_n: 0.1 * x_over_expm1(1.0 - 0.1 * u),
        beta_n: 0.125 * (-u / 80.0).exp(),
        // (2.5 - 0.1 U) / (e^(2.5 - 0.1 U) - 1)
        alpha_m: x_over_expm1(2.5 - 0.1 * u),
        beta_m: 4.0 * (-u / 18.0).exp(),
        alpha_h: 0.07 * (-u / 20.0).exp(),
        beta_h: 1.0 / (1.0 + (3.0 - u / 10.0).exp()),
    }
}

pub fn lif_derivative(v: f64, spec: &LifSpec, i_in: f64) -> f64 {
    let drift = (v - spec.v_rest) / spec.rc;
    match spec.drift {
        LifDrift::Divergent => drift + i_in,
        LifDrift::Leaky => -drift + i_in,
    }
}

pub fn fhn_derivative(v: f64, w: f64, spec: &FhnSpec, i_in: f64) -> (f64, f64) {
    (
        v - v * v * v / 3.0 - w + i_in,
        (v + spec.alpha - spec.beta * w) / spec.gamma,
    )
}

pub fn izh_derivative(v: f64, u: f64, spec: &IzhSpec, i_in: f64) -> (f64, f64) {
    // 0.04 v^2 as v^2 / 25 keeps (-70, -14) an exact fixed point.
    (v * v / 25.0 + 5.0 * v + 140.0 - u + i_in, spec.a * (spec.b * v - u))
}

/// Returns `(dV/dt, dn/dt, dm/dt, dh/dt)`.
pub fn hh_derivative(state: [f64; 4], spec: &HhSpec, i_in: f64) -> [f64; 4] {
    let [v, n, m, h] = state;
    let r = hh_rate_constants(v, spec.v0);
    let i_leak = spec.g_l * (v - spec.e_l);
    let i_k = spec.g_k * n.powi(4) * (v - spec.e_k);
    let i_na = spec.g_na * m.powi(3) * h * (v - spec.e_na);
    [
        (i_in - i_leak - i_k - i_na) / spec.c_m,
        r.alpha_n * (1.0 - n) - r.beta_n * n,
        r.alpha_m * (1.0 - m) - r.beta_m * m,
        r.alpha_h * (1.0 - h) - r.beta_h * h,
    ]
}

/// A neuron model together with its full parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Lif(LifSpec),
    Fhn(FhnSpec),
    Izh(IzhSpec),
    Hh(HhSpec),
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Lif => ModelSpec::Lif(LifSpec::default()),
            ModelKind::Fhn => ModelSpec::Fhn(FhnSpec::default()),
            ModelKind::Izh => ModelSpec::Izh(IzhSpec::default()),
            ModelKind::Hh => ModelSpec::Hh(HhSpec::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Lif(_) => ModelKind::Lif,
            ModelSpec::Fhn(_) => ModelKind::Fhn,
            ModelSpec::Izh(_) => ModelKind::Izh,
            ModelSpec::Hh(_) => ModelKind::Hh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Lif(s) => s.validate(),
            ModelSpec::Fhn(s) => s.validate(),
            ModelSpec::Izh(s) => s.validate(),
            ModelSpec::Hh(s) => s.validate(),
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            ModelSpec::Lif(s) => s.v_th,
            ModelSpec::Fhn(s) => s.v_th,
            ModelSpec::Izh(s) => s.v_th,
            ModelSpec::Hh(s) => s.v_th,
        }
    }

    /// Canonical start state of every simulation.
    pub fn initial_state(&self) -> NeuronState {
        match *self {
            ModelSpec::Lif(s) => NeuronState::Lif { v: s.v_rest },
            ModelSpec::Fhn(_) => NeuronState::Fhn { v: 0.0, w: 0.0 },
            ModelSpec::Izh(s) => NeuronState::Izh { v: s.v0, u: s.u0 },
            ModelSpec::Hh(s) => NeuronState::Hh {
                v: s.v0,
                n: s.n0,
                m: s.m0,
                h: s.h0,
            },
        }
    }

    /// Right-hand side of the model ODE at `state` with input current `i_in`.
    pub fn derivative(&self, state: &NeuronState, i_in: f64) -> NeuronState {
        match (self, *state) {
            (ModelSpec::Lif(s), NeuronState::Lif { v }) => NeuronState::Lif {
                v: lif_derivative(v, s, i_in),
            },
            (ModelSpec::Fhn(s), NeuronState::Fhn { v, w }) => {
                let (v, w) = fhn_derivative(v, w, s, i_in);
                NeuronState::Fhn { v, w }
            }
            (ModelSpec::Izh(s), NeuronState::Izh { v, u }) => {
                let (v, u) = izh_derivative(v, u, s, i_in);
                NeuronState::Izh { v, u }
            }
            (ModelSpec::Hh(s), NeuronState::Hh { v, n, m, h }) => {
                let [v, n, m, h] = hh_derivative([v, n, m, h], s, i_in);
                NeuronState::Hh { v, n, m, h }
            }
            (spec, st) => panic!("state kind {} does not match model {}", st.kind(), spec.kind()),
        }
    }

    /// Projection applied after each accepted integration step: HH gates are
    /// clamped to [0, 1], other models pass through.
    pub fn project(&self, state: NeuronState) -> NeuronState {
        match state {
            NeuronState::Hh { v, n, m, h } => NeuronState::Hh {
                v,
                n: n.clamp(0.0, 1.0),
                m: m.clamp(0.0, 1.0),
                h: h.clamp(0.0, 1.0),
            },
            other => other,
        }
    }

    /// Spike detection and reset. Returns the (possibly reset) state and
    /// whether a spike fired.
    pub fn apply_threshold(&self, state: NeuronState) -> (NeuronState, bool) {
        if state.v() < self.threshold() {
            return (state, false);
        }
        let reset = match (self, state) {
            (ModelSpec::Lif(s), NeuronState::Lif { .. }) => NeuronState::Lif { v: s.v_rest },
            (ModelSpec::Fhn(s), NeuronState::Fhn { w, .. }) => NeuronState::Fhn { v: s.v_reset, w },
            (ModelSpec::Izh(s), NeuronState::Izh { u, .. }) => NeuronState::Izh { v: s.c, u: u + s.d },
            (ModelSpec::Hh(s), NeuronState::Hh { n, m, h, .. }) => match s.reset {
                HhReset::Full => self.initial_state(),
                HhReset::MembraneOnly => NeuronState::Hh { v: s.v0, n, m, h },
            },
            (spec, st) => panic!("state kind {} does not match model {}", st.kind(), spec.kind()),
        };
        (reset, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lif_leaky_examples() {
        let s = LifSpec::leaky();
        assert_eq!(lif_derivative(0.0, &s, 0.0), 0.0);
        assert!(close(lif_derivative(1.0, &s, 0.0), -5.0, 1e-12));
        assert!(close(lif_derivative(0.0, &s, 1.0), 1.0, 1e-12));
    }

    #[test]
    fn lif_divergent_drift_flips_sign() {
        let s = LifSpec::default();
        assert!(close(lif_derivative(1.0, &s, 0.0), 5.0, 1e-12));
        assert!(close(lif_derivative(0.0, &s, 1.0), 1.0, 1e-12));
        assert_eq!(lif_derivative(0.0, &s, 0.0), 0.0);
    }

    #[test]
    fn fhn_examples() {
        let s = FhnSpec::default();
        let (dv, dw) = fhn_derivative(0.0, 0.0, &s, 0.0);
        assert_eq!(dv, 0.0);
        assert!(close(dw, 0.056, 1e-12));

        let (dv, dw) = fhn_derivative(0.0, 0.875, &s, 0.0);
        assert!(close(dv, -0.875, 1e-12));
        assert!(close(dw, 0.0, 1e-12));

        let (dv, dw) = fhn_derivative(1.0, 0.0, &s, 0.0);
        assert!(close(dv, 2.0 / 3.0, 1e-12));
        assert!(close(dw, 0.136, 1e-12));
    }

    #[test]
    fn izh_examples() {
        let s = IzhSpec::default();
        assert_eq!(izh_derivative(-70.0, -14.0, &s, 0.0), (0.0, 0.0));
        assert_eq!(izh_derivative(-70.0, -14.0, &s, 10.0), (10.0, 0.0));
        let (dv, du) = izh_derivative(-50.0, -14.0, &s, 0.0);
        assert!(close(dv, 4.0, 1e-12));
        assert!(close(du, 0.08, 1e-12));
    }

    #[test]
    fn hh_rates_at_reference() {
        let r = hh_rate_constants(-65.0, -65.0);
        assert!(close(r.alpha_n, 0.1 / (1f64.exp() - 1.0), 1e-14));
        assert!(close(r.alpha_n, 0.05820, 1e-5));
        assert!(close(r.beta_n, 0.125, 1e-15));
        assert!(close(r.alpha_m, 2.5 / (2.5f64.exp() - 1.0), 1e-14));
        assert!(close(r.alpha_m, 0.22356, 1e-5));
        assert!(close(r.beta_m, 4.0, 1e-15));
        assert!(close(r.alpha_h, 0.07, 1e-15));
        assert!(close(r.beta_h, 0.04743, 1e-5));
    }

    #[test]
    fn hh_rates_singular_points() {
        assert!(close(hh_rate_constants(10.0, 0.0).alpha_n, 0.1, 1e-12));
        assert!(close(hh_rate_constants(25.0, 0.0).alpha_m, 1.0, 1e-12));
        for du in [-1e-4, -1e-7, -1e-10, 0.0, 1e-10, 1e-7, 1e-4] {
            assert!((hh_rate_constants(10.0 + du, 0.0).alpha_n - 0.1).abs() < 1e-6);
            assert!((hh_rate_constants(25.0 + du, 0.0).alpha_m - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn hh_rest_derivative() {
        let s = HhSpec::default();
        let rest = [-65.0, 0.3177, 0.0529, 0.5960];
        let d0 = hh_derivative(rest, &s, 0.0);
        // direct evaluation: 3.3 - 36*0.3177^4*12 + 120*0.0529^3*0.596*115
        let oracle = 3.3 - 36.0 * 0.3177f64.powi(4) * 12.0 + 120.0 * 0.0529f64.powi(3) * 0.596 * 115.0;
        assert!(close(d0[0], oracle, 1e-12));
        assert!(d0[0].abs() < 0.12);
        for g in &d0[1..] {
            assert!(g.abs() < 1e-3);
        }
        let d5 = hh_derivative(rest, &s, 5.0);
        assert!(close(d5[0], d0[0] + 5.0, 1e-12));

        let closed = hh_derivative([-65.0, 0.0, 0.0, 0.0], &s, 0.0);
        assert!(close(closed[0], 3.3, 1e-12));
    }

    #[test]
    fn threshold_examples() {
        let lif = ModelSpec::Lif(LifSpec::default());
        let st = NeuronState::Lif { v: 0.5 };
        assert_eq!(lif.apply_threshold(st), (st, false));
        assert_eq!(
            lif.apply_threshold(NeuronState::Lif { v: 1.0 }),
            (NeuronState::Lif { v: 0.0 }, true)
        );

        let izh = ModelSpec::Izh(IzhSpec::default());
        assert_eq!(
            izh.apply_threshold(NeuronState::Izh { v: 35.0, u: -10.0 }),
            (NeuronState::Izh { v: -50.0, u: -8.0 }, true)
        );

        let fhn = ModelSpec::Fhn(FhnSpec::default());
        assert_eq!(
            fhn.apply_threshold(NeuronState::Fhn { v: 1.2, w: 0.3 }),
            (NeuronState::Fhn { v: 0.0, w: 0.3 }, true)
        );
    }

    #[test]
    fn hh_reset_policies() {
        let peak = NeuronState::Hh {
            v: 31.0,
            n: 0.4,
            m: 0.1,
            h: 0.5,
        };
        let membrane_only = ModelSpec::Hh(HhSpec {
            reset: HhReset::MembraneOnly,
            ..HhSpec::default()
        });
        assert_eq!(
            membrane_only.apply_threshold(peak),
            (
                NeuronState::Hh {
                    v: -65.0,
                    n: 0.4,
                    m: 0.1,
                    h: 0.5
                },
                true
            )
        );
        let full = ModelSpec::Hh(HhSpec::default());
        assert_eq!(full.apply_threshold(peak), (full.initial_state(), true));
    }

    #[test]
    fn reset_lands_below_threshold() {
        for kind in ModelKind::ALL {
            let spec = ModelSpec::default_for(kind);
            let above = match spec.initial_state() {
                NeuronState::Lif { .. } => NeuronState::Lif { v: 5.0 },
                NeuronState::Fhn { w, .. } => NeuronState::Fhn { v: 1.5, w },
                NeuronState::Izh { u, .. } => NeuronState::Izh { v: 40.0, u },
                NeuronState::Hh { n, m, h, .. } => NeuronState::Hh { v: 45.0, n, m, h },
            };
            let (after, fired) = spec.apply_threshold(above);
            assert!(fired, "{kind}");
            assert!(after.v() < spec.threshold(), "{kind}");
        }
    }

    #[test]
    fn hh_gates_clamped_by_projection() {
        let spec = ModelSpec::Hh(HhSpec::default());
        let st = spec.project(NeuronState::Hh {
            v: 0.0,
            n: 1.2,
            m: -0.1,
            h: 0.5,
        });
        assert_eq!(
            st,
            NeuronState::Hh {
                v: 0.0,
                n: 1.0,
                m: 0.0,
                h: 0.5
            }
        );
    }

    #[test]
    fn default_specs_validate() {
        for kind in ModelKind::ALL {
            ModelSpec::default_for(kind).validate().unwrap();
            assert_eq!(
                ModelSpec::default_for(kind).initial_state().components().len(),
                kind.dim()
            );
        }
        assert!(LifSpec {
            rc: 0.0,
            ..LifSpec::default()
        }
        .validate()
        .is_err());
        assert!(IzhSpec {
            c: 40.0,
            ..IzhSpec::default()
        }
        .validate()
        .is_err());
        assert!(HhSpec {
            g_k: -1.0,
            ..HhSpec::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn kind_parsing() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.as_str().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("morris-lecar".parse::<ModelKind>().is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rates_nonnegative_and_finite(v in -100.0f64..100.0) {
                for r in hh_rate_constants(v, -65.0).as_array() {
                    prop_assert!(r.is_finite() && r >= 0.0);
                }
            }

            #[test]
            fn threshold_is_identity_below(v in -80.0f64..29.999, u in -20.0f64..0.0) {
                let spec = ModelSpec::default_for(ModelKind::Izh);
                let st = NeuronState::Izh { v, u };
                prop_assert_eq!(spec.apply_threshold(st), (st, false));
            }

            #[test]
            fn derivatives_deterministic(v in -80.0f64..40.0, n in 0.0f64..1.0, m in 0.0f64..1.0, h in 0.0f64..1.0, i in 0.0f64..10.0) {
                let spec = HhSpec::default();
                let a = hh_derivative([v, n, m, h], &spec, i);
                let b = hh_derivative([v, n, m, h], &spec, i);
                prop_assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
            }
        }
    }
}

//! Named initial conditions with documented closed-form expectations.
//!
//! | preset | model | expectation |
//! |---|---|---|
//! | `single_peakon` | darboux:1 | node translates along the Reeb field at speed `h`; weight and `H = h^2/2` constant |
//! | `two_peakons` | darboux:1 | `+h`/`-h` pair approaching head-on along `z`, offset in `x`; `H` conserved |
//! | `circle` | darboux:1 | unit circle in the `xy` plane, `rho = h sin^2 s` |
//! | `transverse_circle` | darboux:1 | `(cos s, sin s, sin 2s / 4)`, `rho = h / 2 > 0`; `rho` conserved pointwise |
//! | `legendrian_unknot` | darboux:1 | `(cos s, -3 sin s cos s, sin^3 s)`, `rho = 0`; stays isotropic |
//! | `landmarks` | plane | two planar landmarks for the EPDiff comparison |

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{LoopDerivative, Topology, WeightedConfig};
use crate::contact::ContactModel;
use crate::epdiff::LandmarkConfig;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::ode::{IntegratorSpec, DEFAULT_DT, DEFAULT_OBSERVE_EVERY};

pub const PRESET_NAMES: [&str; 6] = [
    "single_peakon",
    "two_peakons",
    "circle",
    "transverse_circle",
    "legendrian_unknot",
    "landmarks",
];

/// Optional overrides accepted by every preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetParams {
    /// Weight scale.
    #[serde(default)]
    pub h: Option<f64>,
    /// Number of loop nodes.
    #[serde(default, alias = "N")]
    pub n: Option<usize>,
    #[serde(default, rename = "T")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub derivative: Option<LoopDerivative>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Weighted(WeightedConfig),
    Landmarks(LandmarkConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub initial: Initial,
    pub kernel: KernelSpec,
    pub integrator: IntegratorSpec,
    pub observe_every: usize,
}

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "single_peakon" => "one node at the origin of darboux:1 with weight h (default 3); moves by (0,0,h*T)",
        "two_peakons" => "weights +h/-h (default 1) at (-0.25,0,-1.5) and (0.25,0,1.5) in darboux:1",
        "circle" => "unit circle in darboux:1 with constant weight h (default 1); rho = h sin^2 s",
        "transverse_circle" => "loop (cos s, sin s, sin 2s/4) in darboux:1, weight h (default 0.2); rho = h/2",
        "legendrian_unknot" => "Legendrian loop (cos s, -3 sin s cos s, sin^3 s), weight h (default 0.2); rho = 0",
        "landmarks" => "two planar landmarks with momenta (h,0) and (-h,0) (default h = 1); the pair passes and deflects",
        _ => return None,
    })
}

fn loop_nodes(n: usize, curve: impl Fn(f64) -> Vec<f64>) -> Vec<Vec<f64>> {
    (0..n).map(|a| curve(2.0 * PI * a as f64 / n as f64)).collect()
}

pub fn build(name: &str, params: &PresetParams) -> Result<Preset> {
    let sigma = params.sigma.unwrap_or(1.0);
    let kernel = KernelSpec::gaussian(sigma)?;
    let dt = params.dt.unwrap_or(DEFAULT_DT);
    let d1 = ContactModel::Darboux(1);
    let (name, initial, t_final, derivative_default) = match name {
        "single_peakon" => {
            let h = params.h.unwrap_or(3.0);
            let c = WeightedConfig::new(d1, Topology::PointCloud(1), vec![vec![0.0; 3]], vec![h])?;
            ("single_peakon", Initial::Weighted(c), 2.0, LoopDerivative::Central4)
        }
        "two_peakons" => {
            let h = params.h.unwrap_or(1.0);
            let c = WeightedConfig::new(
                d1,
                Topology::PointCloud(2),
                vec![vec![-0.25, 0.0, -1.5], vec![0.25, 0.0, 1.5]],
                vec![h, -h],
            )?;
            ("two_peakons", Initial::Weighted(c), 10.0, LoopDerivative::Central4)
        }
        "circle" => {
            let n = params.n.unwrap_or(64);
            let h = params.h.unwrap_or(1.0);
            let c = WeightedConfig::new(d1, Topology::Loop(n), loop_nodes(n, |s| vec![s.cos(), s.sin(), 0.0]), vec![h; n])?;
            ("circle", Initial::Weighted(c), 1.0, LoopDerivative::Spectral)
        }
        "transverse_circle" => {
            let n = params.n.unwrap_or(128);
            let h = params.h.unwrap_or(0.2);
            let c = WeightedConfig::new(
                d1,
                Topology::Loop(n),
                loop_nodes(n, |s| vec![s.cos(), s.sin(), (2.0 * s).sin() / 4.0]),
                vec![h; n],
            )?;
            ("transverse_circle", Initial::Weighted(c), 1.0, LoopDerivative::Central4)
        }
        "legendrian_unknot" => {
            let n = params.n.unwrap_or(64);
            let h = params.h.unwrap_or(0.2);
            let c = WeightedConfig::new(
                d1,
                Topology::Loop(n),
                loop_nodes(n, |s| vec![s.cos(), -3.0 * s.sin() * s.cos(), s.sin().powi(3)]),
                vec![h; n],
            )?;
            ("legendrian_unknot", Initial::Weighted(c), 1.0, LoopDerivative::Spectral)
        }
        "landmarks" => {
            let h = params.h.unwrap_or(1.0);
            let l = LandmarkConfig::new(vec![([0.0, 0.0], [h, 0.0]), ([1.0, 0.5], [-h, 0.0])])?;
            ("landmarks", Initial::Landmarks(l), 5.0, LoopDerivative::Central4)
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let initial = match initial {
        Initial::Weighted(c) => Initial::Weighted(c.with_derivative(params.derivative.unwrap_or(derivative_default))),
        l => l,
    };
    let integrator = IntegratorSpec::rk4(dt, params.t_final.unwrap_or(t_final));
    integrator.validate()?;
    Ok(Preset {
        name,
        initial,
        kernel,
        integrator,
        observe_every: DEFAULT_OBSERVE_EVERY,
    })
}

impl Preset {
    pub fn weighted(&self) -> Option<&WeightedConfig> {
        match &self.initial {
            Initial::Weighted(c) => Some(c),
            Initial::Landmarks(_) => None,
        }
    }
}

//! The singular-solution flow on weighted embeddings.
//!
//! With `u = sum_b p_b K(., x_b)` the Hamiltonian vector field of
//! `H = 1/2 <J_L, K J_L>` moves every node by the lifted contact vector field of
//! `u`:
//!
//! ```text
//! dx_a/dt = X_u(x_a),    dh_a/dt = -h_a (E u)(x_a)
//! ```
//!
//! [`oracle_rhs`] recomputes the same vector field without any contact
//! geometry: finite differences of `H` and a per-node solve against the
//! symplectic form `mu_a d(t alpha)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigTangent, WeightedConfig};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::kernels::KernelSpec;
use crate::numeric::max_abs;
use crate::ode;

pub use crate::ode::{IntegratorSpec, Method, DEFAULT_DT, DEFAULT_OBSERVE_EVERY};

/// Hamiltonian vector field at `config`.
pub fn rhs(config: &WeightedConfig, kernel: &KernelSpec) -> Result<ConfigTangent> {
    let u = config.velocity_field(kernel);
    let model = config.model();
    let nodes: Vec<(Vec<f64>, f64)> = (0..config.len())
        .into_par_iter()
        .map(|a| {
            let x = config.position(a);
            let (value, grad) = u.value_and_gradient(x);
            let (xf, lambda) = model.contact_vector_from_jet(x, value, &grad)?;
            Ok((xf, -config.weights()[a] * lambda))
        })
        .collect::<Result<_>>()?;
    let tangent = ConfigTangent::from_nodes(config.dim(), nodes);
    if !tangent.max_abs().is_finite() {
        return Err(Error::Divergence {
            t: f64::NAN,
            what: "non-finite vector field".into(),
            last_valid: None,
        });
    }
    Ok(tangent)
}

/// Brute-force Hamiltonian vector field: `dH` by central differences of
/// [`WeightedConfig::hamiltonian`], then `i_xi (mu_a Omega_a) = -dH_a` solved
/// node by node, where `Omega_a` is the symplectization form at `(x_a, h_a)`.
pub fn oracle_rhs(config: &WeightedConfig, kernel: &KernelSpec) -> Result<ConfigTangent> {
    let d = config.dim();
    let n = config.len();
    let mu = config.quadrature();
    let model = config.model();
    let energy_at = |a: usize, k: usize, delta: f64| -> Result<f64> {
        let mut positions = config.positions().to_vec();
        let mut weights = config.weights().to_vec();
        if k < d {
            positions[a * d + k] += delta;
        } else {
            weights[a] += delta;
        }
        Ok(config.with_state_unchecked(positions, weights).hamiltonian(kernel))
    };
    let mut out = ConfigTangent::zeros(d, n);
    for a in 0..n {
        let mut dh = nalgebra::DVector::zeros(d + 1);
        for k in 0..=d {
            let orig = if k < d { config.position(a)[k] } else { config.weights()[a] };
            let step = 1e-5 * (1.0 + orig.abs());
            dh[k] = (energy_at(a, k, step)? - energy_at(a, k, -step)?) / (2.0 * step);
        }
        let omega = model.symplectization_omega(config.position(a), config.weights()[a])? * mu;
        // (i_xi omega)_j = sum_i xi_i omega_ij
        let xi = omega
            .transpose()
            .lu()
            .solve(&(-dh))
            .ok_or(Error::SingularSystem { context: "oracle block" })?;
        out.dx[a * d..(a + 1) * d].copy_from_slice(&xi.as_slice()[..d]);
        out.dh[a] = xi[d];
    }
    Ok(out)
}

/// Conserved-quantity monitors for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub energy: f64,
    pub rel_energy_drift: f64,
    pub rho: Vec<f64>,
    pub max_rho_drift: f64,
    pub total_weight: f64,
    pub min_separation: f64,
    /// False once the loop embedding check fails during the flow.
    pub embedded: bool,
}

/// Computes diagnostics, with drifts measured against `reference` when given.
pub fn diagnostics_snapshot(config: &WeightedConfig, kernel: &KernelSpec, reference: Option<&Diagnostics>) -> Diagnostics {
    let energy = config.hamiltonian(kernel);
    let rho = config.moment_right();
    let (rel_energy_drift, max_rho_drift) = match reference {
        Some(r) => {
            let scale = if r.energy != 0.0 { r.energy.abs() } else { 1.0 };
            let drift = rho.iter().zip(&r.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ((energy - r.energy).abs() / scale, drift)
        }
        None => (0.0, 0.0),
    };
    Diagnostics {
        energy,
        rel_energy_drift,
        rho,
        max_rho_drift,
        total_weight: config.total_weight(),
        min_separation: config.min_separation(),
        embedded: config.check_embedding(None).is_ok(),
    }
}

/// Snapshots of a solution curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<WeightedConfig>,
    pub diagnostics: Vec<Diagnostics>,
}

/// Scalar summary of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(rename = "H0")]
    pub h0: f64,
    #[serde(rename = "maxRelEnergyDrift")]
    pub max_rel_energy_drift: f64,
    #[serde(rename = "maxRhoDrift")]
    pub max_rho_drift: f64,
    #[serde(rename = "minSeparation")]
    pub min_separation: f64,
    /// Final minus initial mean node position.
    #[serde(rename = "meanDisplacement")]
    pub mean_displacement: Vec<f64>,
    #[serde(rename = "finalTime")]
    pub final_time: f64,
}

impl Trajectory {
    pub fn first(&self) -> &WeightedConfig {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &WeightedConfig {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    pub fn summary(&self) -> Summary {
        let d = self.first().dim();
        let mean = |c: &WeightedConfig| -> Vec<f64> {
            let n = c.len() as f64;
            (0..d).map(|k| (0..c.len()).map(|a| c.position(a)[k]).sum::<f64>() / n).collect()
        };
        let (m0, m1) = (mean(self.first()), mean(self.last()));
        Summary {
            h0: self.diagnostics[0].energy,
            max_rel_energy_drift: self.diagnostics.iter().map(|g| g.rel_energy_drift).fold(0.0, f64::max),
            max_rho_drift: self.diagnostics.iter().map(|g| g.max_rho_drift).fold(0.0, f64::max),
            min_separation: self.diagnostics.iter().map(|g| g.min_separation).fold(f64::INFINITY, f64::min),
            mean_displacement: m1.iter().zip(&m0).map(|(a, b)| a - b).collect(),
            final_time: *self.times.last().unwrap(),
        }
    }

    /// One row per node per snapshot: `t,node,x0..x{d-1},h,rho`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.first().dim();
        let mut header = String::from("t,node");
        for k in 0..d {
            header.push_str(&format!(",x{k}"));
        }
        header.push_str(",h,rho");
        writeln!(w, "{header}")?;
        for ((t, c), g) in self.times.iter().zip(&self.snapshots).zip(&self.diagnostics) {
            for a in 0..c.len() {
                let mut row = format!("{t},{a}");
                for x in c.position(a) {
                    row.push_str(&format!(",{x}"));
                }
                row.push_str(&format!(",{},{}", c.weights()[a], g.rho[a]));
                writeln!(w, "{row}")?;
            }
        }
        Ok(())
    }

    /// One JSON object per snapshot.
    pub fn write_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            t: f64,
            positions: Vec<&'a [f64]>,
            weights: &'a [f64],
            diagnostics: &'a Diagnostics,
        }
        for ((t, c), g) in self.times.iter().zip(&self.snapshots).zip(&self.diagnostics) {
            let line = Line {
                t: *t,
                positions: (0..c.len()).map(|a| c.position(a)).collect(),
                weights: c.weights(),
                diagnostics: g,
            };
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// RK4 integration of the flow with diagnostics every `observe_every` steps
/// (and at the final time). Aborts on non-finite states and on weights
/// crossing zero.
pub fn integrate(config: &WeightedConfig, kernel: &KernelSpec, spec: &IntegratorSpec, observe_every: usize) -> Result<Trajectory> {
    spec.validate()?;
    let observe_every = observe_every.max(1);
    let d = config.dim();
    let n = config.len();
    let split = d * n;
    let to_config = |y: &[f64]| -> Result<WeightedConfig> { config.with_state(y[..split].to_vec(), y[split..].to_vec()) };

    let d0 = diagnostics_snapshot(config, kernel, None);
    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![config.clone()],
        diagnostics: vec![d0.clone()],
    };
    let mut y0 = config.positions().to_vec();
    y0.extend_from_slice(config.weights());

    let field = |y: &[f64]| -> Result<Vec<f64>> {
        let c = config.with_state_unchecked(y[..split].to_vec(), y[split..].to_vec());
        let t = rhs(&c, kernel)?;
        let mut out = t.dx;
        out.extend(t.dh);
        Ok(out)
    };

    ode::integrate(y0, spec, field, |step| {
        if let Some(i) = step.after.iter().position(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                t: step.t_after,
                what: format!("state component {i} is not finite"),
                last_valid: Some(Box::new(to_config(step.before)?)),
            });
        }
        let (hb, ha) = (&step.before[split..], &step.after[split..]);
        if let Some(a) = (0..n).find(|&a| hb[a].signum() != ha[a].signum() || ha[a] == 0.0) {
            return Err(Error::ModelExit {
                node: a,
                t_before: step.t_before,
                t_after: step.t_after,
                last_valid: Box::new(to_config(step.before)?),
            });
        }
        if step.index % observe_every == 0 || step.last {
            let c = to_config(step.after)?;
            let g = diagnostics_snapshot(&c, kernel, Some(&d0));
            if !g.energy.is_finite() || g.rho.iter().any(|r| !r.is_finite()) {
                return Err(Error::Divergence {
                    t: step.t_after,
                    what: "non-finite diagnostics".into(),
                    last_valid: Some(Box::new(to_config(step.before)?)),
                });
            }
            traj.times.push(step.t_after);
            traj.snapshots.push(c);
            traj.diagnostics.push(g);
        }
        Ok(())
    })?;
    Ok(traj)
}

/// Largest relative deviation `max |a - b| / max |b|` between two tangents.
pub fn relative_deviation(a: &ConfigTangent, b: &ConfigTangent) -> f64 {
    let diff: Vec<f64> = a.dx.iter().zip(&b.dx).chain(a.dh.iter().zip(&b.dh)).map(|(x, y)| x - y).collect();
    let scale = b.max_abs();
    if scale == 0.0 {
        max_abs(&diff)
    } else {
        max_abs(&diff) / scale
    }
}

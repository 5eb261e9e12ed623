//! Classical RK4 on flat state vectors, with fixed steps or step-doubling
//! adaptivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    /// RK4 with step doubling: a step is compared with two half steps, `dt` is
    /// halved on rejection and doubled when the estimate is far below `tol`.
    Rk4Adaptive,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_OBSERVE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Integrate the negated vector field (time reversal).
    #[serde(default)]
    pub reverse: bool,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_tol() -> f64 {
    1e-10
}

impl IntegratorSpec {
    pub fn rk4(dt: f64, t_final: f64) -> Self {
        IntegratorSpec {
            method: Method::Rk4,
            dt,
            t_final,
            tol: default_tol(),
            reverse: false,
        }
    }

    pub fn adaptive(dt: f64, t_final: f64, tol: f64) -> Self {
        IntegratorSpec {
            method: Method::Rk4Adaptive,
            tol,
            ..Self::rk4(dt, t_final)
        }
    }

    pub fn reversed(self) -> Self {
        IntegratorSpec {
            reverse: !self.reverse,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be non-negative, got {}", self.t_final)));
        }
        if self.method == Method::Rk4Adaptive && !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One accepted step, as seen by the observer.
pub struct Step<'a> {
    pub index: usize,
    pub t_before: f64,
    pub t_after: f64,
    pub before: &'a [f64],
    pub after: &'a [f64],
    pub last: bool,
}

pub fn rk4_step<F>(y: &[f64], dt: f64, rhs: &mut F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let stage = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = rhs(y)?;
    let k2 = rhs(&stage(y, &k1, 0.5 * dt))?;
    let k3 = rhs(&stage(y, &k2, 0.5 * dt))?;
    let k4 = rhs(&stage(y, &k3, dt))?;
    Ok((0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates `y' = rhs(y)` (or `-rhs(y)` when reversed) from 0 to `T`,
/// calling `observe` after every accepted step. Returns the final state.
pub fn integrate<F, O>(y0: Vec<f64>, spec: &IntegratorSpec, mut rhs: F, mut observe: O) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
    O: FnMut(Step<'_>) -> Result<()>,
{
    spec.validate()?;
    let sign = if spec.reverse { -1.0 } else { 1.0 };
    let mut f = |y: &[f64]| -> Result<Vec<f64>> {
        let mut d = rhs(y)?;
        if sign < 0.0 {
            d.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(d)
    };
    let t_final = spec.t_final;
    let mut y = y0;
    let mut t = 0.0;
    let mut index = 0;
    match spec.method {
        Method::Rk4 => {
            let n_steps = (t_final / spec.dt - 1e-9).ceil().max(0.0) as usize;
            for i in 0..n_steps {
                let t_next = if i + 1 == n_steps { t_final } else { (i + 1) as f64 * spec.dt };
                let next = rk4_step(&y, t_next - t, &mut f)?;
                observe(Step {
                    index: i + 1,
                    t_before: t,
                    t_after: t_next,
                    before: &y,
                    after: &next,
                    last: i + 1 == n_steps,
                })?;
                y = next;
                t = t_next;
            }
        }
        Method::Rk4Adaptive => {
            let mut dt = spec.dt;
            let min_dt = 1e-14 * t_final.max(1.0);
            while t < t_final {
                let h = dt.min(t_final - t);
                let full = rk4_step(&y, h, &mut f)?;
                let half = rk4_step(&y, 0.5 * h, &mut f)?;
                let two = rk4_step(&half, 0.5 * h, &mut f)?;
                let err = two
                    .iter()
                    .zip(&full)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / 15.0;
                if !err.is_finite() || err > spec.tol {
                    dt = 0.5 * h;
                    if dt < min_dt {
                        return Err(Error::StepUnderflow { t, dt });
                    }
                    continue;
                }
                let t_next = if t_final - t - h <= 1e-12 * t_final { t_final } else { t + h };
                index += 1;
                observe(Step {
                    index,
                    t_before: t,
                    t_after: t_next,
                    before: &y,
                    after: &two,
                    last: t_next >= t_final,
                })?;
                y = two;
                t = t_next;
                if err < spec.tol / 32.0 {
                    dt = 2.0 * h;
                } else {
                    dt = h;
                }
            }
        }
    }
    Ok(y)
}

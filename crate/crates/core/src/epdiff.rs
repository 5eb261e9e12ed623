//! Comparison with planar landmark (EPDiff) dynamics.
//!
//! On `Projectivized2` (the projectivized cotangent bundle of `Q = R^2`) the
//! map `kappa(q, theta, t) = (q, t (cos theta, sin theta))` identifies the
//! symplectization with `T*Q` minus the zero section and pulls the canonical
//! 1-form back to `t alpha`. A planar vector field `Y` lifts to the contact
//! Hamiltonian `f_Y(q, theta) = cos(theta) Y_1(q) + sin(theta) Y_2(q)`, and the
//! moment maps match: `<J_L(Phi), f_Y> = sum_a p_a . Y(q_a)` for the pushed
//! forward landmarks.

use serde::{Deserialize, Serialize};

use crate::config::WeightedConfig;
use crate::contact::ContactModel;
use crate::error::{Error, Result};
use crate::field::{Polynomial, ScalarField};
use crate::kernels::KernelSpec;
use crate::numeric::KahanSum;
use crate::ode::{self, IntegratorSpec};

/// A covector `p` at `q`, with `p != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector2 {
    pub q: [f64; 2],
    pub p: [f64; 2],
}

/// `kappa(q, theta, t) = (q, t (cos theta, sin theta))`.
pub fn kappa(q: [f64; 2], theta: f64, t: f64) -> Result<Covector2> {
    if t == 0.0 {
        return Err(Error::InvalidParameter("kappa is undefined on the zero section (t = 0)".into()));
    }
    let (s, c) = theta.sin_cos();
    Ok(Covector2 { q, p: [t * c, t * s] })
}

/// A smooth planar vector field with its Jacobian `J[i][j] = d Y_i / d q_j`.
pub trait PlanarField: Send + Sync {
    fn value(&self, q: [f64; 2]) -> [f64; 2];
    fn jacobian(&self, q: [f64; 2]) -> [[f64; 2]; 2];
}

/// Planar field with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPlanar(pub Polynomial, pub Polynomial);

impl PolynomialPlanar {
    pub fn zero() -> Self {
        PolynomialPlanar(Polynomial::new(2), Polynomial::new(2))
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, degree: u32) -> Self {
        PolynomialPlanar(Polynomial::random(rng, 2, degree), Polynomial::random(rng, 2, degree))
    }
}

impl PlanarField for PolynomialPlanar {
    fn value(&self, q: [f64; 2]) -> [f64; 2] {
        [self.0.value(&q), self.1.value(&q)]
    }

    fn jacobian(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        let g0 = self.0.gradient(&q);
        let g1 = self.1.gradient(&q);
        [[g0[0], g0[1]], [g1[0], g1[1]]]
    }
}

/// The fiber-linear contact Hamiltonian of a planar field on `Projectivized2`.
pub struct LiftedHamiltonian<Y>(pub Y);

/// Lifts `Y` to `f_Y(q, theta) = cos(theta) Y_1(q) + sin(theta) Y_2(q)`; on the
/// symplectization the corresponding function is `t * f_Y`.
pub fn lift_hamiltonian<Y: PlanarField>(y: Y) -> LiftedHamiltonian<Y> {
    LiftedHamiltonian(y)
}

impl<Y: PlanarField> LiftedHamiltonian<Y> {
    /// `h(q, theta, t) = t f_Y(q, theta)`.
    pub fn fiber_linear(&self, q: [f64; 2], theta: f64, t: f64) -> f64 {
        t * self.value(&[q[0], q[1], theta])
    }
}

impl<Y: PlanarField> ScalarField for LiftedHamiltonian<Y> {
    fn value(&self, x: &[f64]) -> f64 {
        let (s, c) = x[2].sin_cos();
        let y = self.0.value([x[0], x[1]]);
        c * y[0] + s * y[1]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (s, c) = x[2].sin_cos();
        let q = [x[0], x[1]];
        let y = self.0.value(q);
        let j = self.0.jacobian(q);
        vec![c * j[0][0] + s * j[1][0], c * j[0][1] + s * j[1][1], -s * y[0] + c * y[1]]
    }
}

/// Landmarks `(q_a, p_a)` in `T*R^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkConfig {
    pub q: Vec<[f64; 2]>,
    pub p: Vec<[f64; 2]>,
}

/// What to do when the base projection of a configuration is not embedded
/// (two nodes over the same base point).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePolicy {
    #[default]
    Reject,
    Warn,
}

impl LandmarkConfig {
    pub fn new(nodes: Vec<([f64; 2], [f64; 2])>) -> Result<Self> {
        let (q, p): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
        let config = LandmarkConfig { q, p };
        if config.q.is_empty() {
            return Err(Error::InvalidConfig("landmark configuration needs at least one landmark".into()));
        }
        if !config.has_distinct_base_points() {
            return Err(Error::InvalidConfig("landmark base points must be distinct".into()));
        }
        Ok(config)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn has_distinct_base_points(&self) -> bool {
        let n = self.q.len();
        (0..n).all(|a| ((a + 1)..n).all(|b| self.q[a] != self.q[b]))
    }

    fn to_state(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).flat_map(|v| v.iter().copied()).collect()
    }

    fn from_state(y: &[f64]) -> Self {
        let n = y.len() / 4;
        let pair = |i: usize| [y[2 * i], y[2 * i + 1]];
        LandmarkConfig {
            q: (0..n).map(pair).collect(),
            p: (n..2 * n).map(pair).collect(),
        }
    }

    /// `H = 1/2 sum_{a,b} (p_a . p_b) k(q_a, q_b)`.
    pub fn hamiltonian(&self, kernel: &KernelSpec) -> f64 {
        let mut acc = KahanSum::new();
        for a in 0..self.len() {
            for b in 0..self.len() {
                let pp = self.p[a][0] * self.p[b][0] + self.p[a][1] * self.p[b][1];
                acc.add(pp * kernel.profile(sq(self.q[a], self.q[b])));
            }
        }
        0.5 * acc.value()
    }

    /// `<J_Sing, Y> = sum_a p_a . Y(q_a)`.
    pub fn pair_with(&self, y: &dyn PlanarField) -> f64 {
        self.q
            .iter()
            .zip(&self.p)
            .map(|(q, p)| {
                let v = y.value(*q);
                p[0] * v[0] + p[1] * v[1]
            })
            .collect::<KahanSum>()
            .value()
    }

    pub fn min_separation(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                best = best.min(sq(self.q[a], self.q[b]).sqrt());
            }
        }
        best
    }
}

fn sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Velocities `(dq_a, dp_a)` of the landmark equations.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkTangent {
    pub dq: Vec<[f64; 2]>,
    pub dp: Vec<[f64; 2]>,
}

/// `dq_a = sum_b p_b k(q_a, q_b)`, `dp_a = -sum_b (p_a . p_b) grad_1 k(q_a, q_b)`.
pub fn epdiff_rhs(config: &LandmarkConfig, kernel: &KernelSpec) -> LandmarkTangent {
    let n = config.len();
    let mut dq = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    for a in 0..n {
        let mut vq = [KahanSum::new(), KahanSum::new()];
        let mut vp = [KahanSum::new(), KahanSum::new()];
        for b in 0..n {
            let diff = [config.q[a][0] - config.q[b][0], config.q[a][1] - config.q[b][1]];
            let (k, c) = kernel.profile_and_slope(diff[0] * diff[0] + diff[1] * diff[1]);
            let pp = config.p[a][0] * config.p[b][0] + config.p[a][1] * config.p[b][1];
            for i in 0..2 {
                vq[i].add(config.p[b][i] * k);
                vp[i].add(-pp * c * diff[i]);
            }
        }
        dq.push([vq[0].value(), vq[1].value()]);
        dp.push([vp[0].value(), vp[1].value()]);
    }
    LandmarkTangent { dq, dp }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkTrajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<LandmarkConfig>,
    pub energies: Vec<f64>,
}

impl LandmarkTrajectory {
    pub fn max_rel_energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
        self.energies.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    /// One row per landmark per snapshot: `t,node,q0,q1,p0,p1`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,node,q0,q1,p0,p1")?;
        for (t, c) in self.times.iter().zip(&self.snapshots) {
            for a in 0..c.len() {
                writeln!(w, "{t},{a},{},{},{},{}", c.q[a][0], c.q[a][1], c.p[a][0], c.p[a][1])?;
            }
        }
        Ok(())
    }
}

/// RK4 integration of the landmark equations with the shared driver.
pub fn integrate_landmarks(
    config: &LandmarkConfig,
    kernel: &KernelSpec,
    spec: &IntegratorSpec,
    observe_every: usize,
) -> Result<LandmarkTrajectory> {
    let observe_every = observe_every.max(1);
    let mut traj = LandmarkTrajectory {
        times: vec![0.0],
        snapshots: vec![config.clone()],
        energies: vec![config.hamiltonian(kernel)],
    };
    let field = |y: &[f64]| -> Result<Vec<f64>> {
        let t = epdiff_rhs(&LandmarkConfig::from_state(y), kernel);
        Ok(t.dq.iter().chain(&t.dp).flat_map(|v| v.iter().copied()).collect())
    };
    ode::integrate(config.to_state(), spec, field, |step| {
        if step.after.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                t: step.t_after,
                what: "non-finite landmark state".into(),
                last_valid: None,
            });
        }
        if step.index % observe_every == 0 || step.last {
            let c = LandmarkConfig::from_state(step.after);
            traj.times.push(step.t_after);
            traj.energies.push(c.hamiltonian(kernel));
            traj.snapshots.push(c);
        }
        Ok(())
    })?;
    Ok(traj)
}

/// Node-wise image `(q_a, h_a mu_a (cos theta_a, sin theta_a))` of a
/// `Projectivized2` configuration. Under [`BasePolicy::Warn`] a non-embedded
/// base projection is accepted and reported through the returned flag.
pub fn pushforward(config: &WeightedConfig, policy: BasePolicy) -> Result<(LandmarkConfig, bool)> {
    if config.model() != ContactModel::Projectivized2 {
        return Err(Error::InvalidConfig(format!(
            "pushforward to T*R^2 needs projectivized2, got {}",
            config.model()
        )));
    }
    let mu = config.quadrature();
    let mut q = Vec::with_capacity(config.len());
    let mut p = Vec::with_capacity(config.len());
    for a in 0..config.len() {
        let x = config.position(a);
        let cv = kappa([x[0], x[1]], x[2], config.weights()[a] * mu)?;
        q.push(cv.q);
        p.push(cv.p);
    }
    let landmarks = LandmarkConfig { q, p };
    let embedded = landmarks.has_distinct_base_points();
    if !embedded && policy == BasePolicy::Reject {
        return Err(Error::InvalidConfig("base projection of the configuration is not embedded".into()));
    }
    Ok((landmarks, embedded))
}

/// `|<J_L(Phi), f_Y> - <J_Sing(kappa_* Phi), Y>|`.
pub fn check_diagram<Y: PlanarField + Clone>(config: &WeightedConfig, y: &Y) -> Result<f64> {
    let (landmarks, _) = pushforward(config, BasePolicy::Warn)?;
    let left = config.moment_left_pair(&lift_hamiltonian(y.clone()));
    let right = landmarks.pair_with(y);
    Ok((left - right).abs())
}

/// `|theta^{T*Q}(T kappa . v) - t alpha(v)|` at `(q, theta, t)` for
/// `v = (dq_1, dq_2, dtheta, dt)`, with `T kappa` by central differences.
pub fn check_theta_pullback(q: [f64; 2], theta: f64, t: f64, v: [f64; 4]) -> Result<f64> {
    let flat = |pt: [f64; 4]| -> Result<[f64; 4]> {
        let c = kappa([pt[0], pt[1]], pt[2], pt[3])?;
        Ok([c.q[0], c.q[1], c.p[0], c.p[1]])
    };
    let base = [q[0], q[1], theta, t];
    let h = 1e-6;
    let plus = flat(std::array::from_fn(|i| base[i] + h * v[i]))?;
    let minus = flat(std::array::from_fn(|i| base[i] - h * v[i]))?;
    let w: [f64; 4] = std::array::from_fn(|i| (plus[i] - minus[i]) / (2.0 * h));
    let image = kappa(q, theta, t)?;
    let canonical = image.p[0] * w[0] + image.p[1] * w[1];
    let liouville = t * ContactModel::Projectivized2.alpha_pair(&[q[0], q[1], theta], &v[..3])?;
    Ok((canonical - liouville).abs())
}

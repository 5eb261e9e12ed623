//! Discretized weighted embeddings `(phi, h)`: nodes in the contact manifold
//! carrying nowhere-vanishing weights, with the two moment maps and the
//! collective Hamiltonian.
//!
//! A node `a` has position `x_a`, weight `h_a` and quadrature weight `mu_a`
//! (1 for point clouds, `2 pi / N` on loops); its momentum weight is
//! `p_a = h_a mu_a`. Then
//!
//! * left moment map: `<J_L, f> = sum_a p_a f(x_a)`,
//! * right moment map (loops): `rho_a = h_a alpha(dphi/ds)(s_a)`, a density with
//!   respect to `ds`,
//! * Hamiltonian: `H = 1/2 sum_{a,b} p_a p_b K(x_a, x_b)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::contact::{wrap_angle, ContactModel};
use crate::error::{check_dim, Error, Result};
use crate::field::ScalarField;
use crate::kernels::KernelSpec;
use crate::numeric::{dot, max_abs, KahanSum};

/// Minimum loop size.
pub const MIN_LOOP_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum Topology {
    /// `N` isolated points, unit quadrature.
    PointCloud(usize),
    /// `S^1` sampled at `s_a = 2 pi a / N`, quadrature `2 pi / N`.
    Loop(usize),
}

impl Topology {
    pub fn len(&self) -> usize {
        match *self {
            Topology::PointCloud(n) | Topology::Loop(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_loop(&self) -> bool {
        matches!(self, Topology::Loop(_))
    }

    pub fn quadrature(&self) -> f64 {
        match *self {
            Topology::PointCloud(_) => 1.0,
            Topology::Loop(n) => 2.0 * PI / n as f64,
        }
    }

    /// Parameter value of node `a` (loops), or `a` for point clouds.
    pub fn parameter(&self, a: usize) -> f64 {
        match *self {
            Topology::PointCloud(_) => a as f64,
            Topology::Loop(n) => 2.0 * PI * a as f64 / n as f64,
        }
    }
}

/// Periodic differentiation scheme for loop samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopDerivative {
    /// Fourth-order central differences.
    #[default]
    Central4,
    /// Dense trigonometric (Fourier) differentiation matrix.
    Spectral,
}

impl LoopDerivative {
    /// Derivative in `s` of periodic samples on the uniform grid.
    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        let h = 2.0 * PI / n as f64;
        match self {
            LoopDerivative::Central4 => (0..n)
                .map(|a| {
                    let at = |k: isize| samples[(a as isize + k).rem_euclid(n as isize) as usize];
                    (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
                })
                .collect(),
            LoopDerivative::Spectral => {
                // circulant row: c_m = (-1)^m / 2 * cot(m h / 2) (even n), csc for odd n
                let c: Vec<f64> = (0..n)
                    .map(|m| {
                        if m == 0 {
                            return 0.0;
                        }
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        let half = m as f64 * h / 2.0;
                        if n % 2 == 0 {
                            0.5 * sign / half.tan()
                        } else {
                            0.5 * sign / half.sin()
                        }
                    })
                    .collect();
                // pair m with n - m (c_{n-m} = -c_m) so that the large weights
                // near the diagonal multiply small differences
                (0..n)
                    .map(|j| {
                        let mut acc = KahanSum::new();
                        for m in 1..=(n - 1) / 2 {
                            acc.add(c[m] * (samples[(j + n - m) % n] - samples[(j + m) % n]));
                        }
                        acc.value()
                    })
                    .collect()
            }
        }
    }

    /// Derivative of an angle-valued sample sequence: unwraps, removes the
    /// winding, differentiates the periodic part and adds the winding back.
    pub fn apply_angle(&self, samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        let mut unwrapped = Vec::with_capacity(n);
        let mut acc = samples[0];
        unwrapped.push(acc);
        for a in 1..n {
            acc += wrap_angle(samples[a] - samples[a - 1]);
            unwrapped.push(acc);
        }
        let total = acc + wrap_angle(samples[0] - samples[n - 1]) - samples[0];
        let winding = (total / (2.0 * PI)).round();
        let periodic: Vec<f64> = unwrapped
            .iter()
            .enumerate()
            .map(|(a, v)| v - winding * 2.0 * PI * a as f64 / n as f64)
            .collect();
        self.apply(&periodic).into_iter().map(|d| d + winding).collect()
    }
}

/// A weighted embedding. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedConfig {
    model: ContactModel,
    topology: Topology,
    positions: Vec<f64>,
    weights: Vec<f64>,
    derivative: LoopDerivative,
}

/// Per-node position velocity and weight velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigTangent {
    pub dim: usize,
    pub dx: Vec<f64>,
    pub dh: Vec<f64>,
}

impl ConfigTangent {
    pub fn zeros(dim: usize, n: usize) -> Self {
        ConfigTangent {
            dim,
            dx: vec![0.0; dim * n],
            dh: vec![0.0; n],
        }
    }

    pub fn from_nodes(dim: usize, nodes: Vec<(Vec<f64>, f64)>) -> Self {
        let mut t = ConfigTangent::zeros(dim, nodes.len());
        for (a, (dx, dh)) in nodes.into_iter().enumerate() {
            t.dx[a * dim..(a + 1) * dim].copy_from_slice(&dx);
            t.dh[a] = dh;
        }
        t
    }

    pub fn len(&self) -> usize {
        self.dh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dh.is_empty()
    }

    pub fn node_dx(&self, a: usize) -> &[f64] {
        &self.dx[a * self.dim..(a + 1) * self.dim]
    }

    pub fn scaled(&self, s: f64) -> Self {
        ConfigTangent {
            dim: self.dim,
            dx: self.dx.iter().map(|v| s * v).collect(),
            dh: self.dh.iter().map(|v| s * v).collect(),
        }
    }

    pub fn add(&self, other: &ConfigTangent) -> Result<Self> {
        self.check_shape(other.dim, other.len())?;
        Ok(ConfigTangent {
            dim: self.dim,
            dx: self.dx.iter().zip(&other.dx).map(|(a, b)| a + b).collect(),
            dh: self.dh.iter().zip(&other.dh).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.dx).max(max_abs(&self.dh))
    }

    pub fn check_shape(&self, dim: usize, n: usize) -> Result<()> {
        check_dim(dim, self.dim)?;
        check_dim(n, self.dh.len())?;
        check_dim(dim * n, self.dx.len())
    }
}

impl WeightedConfig {
    /// Builds a configuration, enforcing nonzero weights and the embedding
    /// check with the default tolerance.
    pub fn new(model: ContactModel, topology: Topology, positions: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = model.dim();
        if positions.len() != topology.len() {
            return Err(Error::InvalidConfig(format!(
                "topology has {} nodes but {} positions were given",
                topology.len(),
                positions.len()
            )));
        }
        let mut flat = Vec::with_capacity(dim * positions.len());
        for p in &positions {
            check_dim(dim, p.len())?;
            flat.extend_from_slice(p);
        }
        let config = Self::from_flat(model, topology, flat, weights)?;
        config.check_embedding(None)?;
        Ok(config)
    }

    /// Builds a configuration from flat positions, checking shapes, finiteness
    /// and nonzero weights but not the embedding condition.
    pub fn from_flat(model: ContactModel, topology: Topology, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = topology.len();
        if n == 0 {
            return Err(Error::InvalidConfig("configuration needs at least one node".into()));
        }
        if let Topology::Loop(n) = topology {
            if n < MIN_LOOP_NODES {
                return Err(Error::InvalidConfig(format!("loops need at least {MIN_LOOP_NODES} nodes, got {n}")));
            }
        }
        check_dim(n, weights.len())?;
        check_dim(n * model.dim(), positions.len())?;
        if positions.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite position or weight".into()));
        }
        if let Some(a) = weights.iter().position(|&h| h == 0.0) {
            return Err(Error::InvalidConfig(format!("weight of node {a} is zero")));
        }
        Ok(WeightedConfig {
            model,
            topology,
            positions,
            weights,
            derivative: LoopDerivative::default(),
        })
    }

    pub fn with_derivative(mut self, derivative: LoopDerivative) -> Self {
        self.derivative = derivative;
        self
    }

    /// Same topology and scheme, new state.
    pub fn with_state(&self, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Ok(Self::from_flat(self.model, self.topology, positions, weights)?.with_derivative(self.derivative))
    }

    /// Same topology and scheme, new state, no validation. For intermediate
    /// integrator stages.
    pub(crate) fn with_state_unchecked(&self, positions: Vec<f64>, weights: Vec<f64>) -> Self {
        WeightedConfig {
            model: self.model,
            topology: self.topology,
            positions,
            weights,
            derivative: self.derivative,
        }
    }

    pub fn model(&self) -> ContactModel {
        self.model
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn derivative(&self) -> LoopDerivative {
        self.derivative
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn position(&self, a: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[a * d..(a + 1) * d]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn quadrature(&self) -> f64 {
        self.topology.quadrature()
    }

    /// Momentum weights `p_a = h_a mu_a`.
    pub fn momentum_weights(&self) -> Vec<f64> {
        let mu = self.quadrature();
        self.weights.iter().map(|h| h * mu).collect()
    }

    /// Smallest distance over all node pairs (infinite for a single node).
    pub fn min_separation(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                best = best.min(self.model.distance(self.position(a), self.position(b)));
            }
        }
        best
    }

    /// Smallest distance over pairs that are not loop neighbours.
    pub fn min_nonadjacent_separation(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                let gap = b - a;
                if self.topology.is_loop() && (gap == 1 || gap == n - 1) {
                    continue;
                }
                best = best.min(self.model.distance(self.position(a), self.position(b)));
            }
        }
        best
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut d = 0.0_f64;
        for a in 0..n {
            for b in (a + 1)..n {
                d = d.max(self.model.distance(self.position(a), self.position(b)));
            }
        }
        d
    }

    /// Embedding proxy: distinct nodes, and for loops non-adjacent nodes more
    /// than `eps` apart (default `1e-6 * diameter`).
    pub fn check_embedding(&self, eps: Option<f64>) -> Result<()> {
        if self.len() > 1 && !(self.min_separation() > 0.0) {
            return Err(Error::InvalidConfig("two nodes coincide".into()));
        }
        if self.topology.is_loop() {
            let eps = eps.unwrap_or(1e-6 * self.diameter());
            let sep = self.min_nonadjacent_separation();
            if !(sep > eps) {
                return Err(Error::InvalidConfig(format!(
                    "loop is not embedded: non-adjacent nodes {sep:e} apart (tolerance {eps:e})"
                )));
            }
        }
        Ok(())
    }

    /// Discrete tangent `dphi/ds` at every node (loops only), flattened.
    pub fn tangents(&self) -> Result<Vec<f64>> {
        if !self.topology.is_loop() {
            return Err(Error::LoopRequired { op: "tangents" });
        }
        let d = self.dim();
        let n = self.len();
        let mut out = vec![0.0; d * n];
        for k in 0..d {
            let samples: Vec<f64> = (0..n).map(|a| self.positions[a * d + k]).collect();
            let deriv = if Some(k) == self.model.angle_index() {
                self.derivative.apply_angle(&samples)
            } else {
                self.derivative.apply(&samples)
            };
            for (a, v) in deriv.into_iter().enumerate() {
                out[a * d + k] = v;
            }
        }
        Ok(out)
    }

    /// Derivative in `s` of per-node scalar samples with this loop's scheme.
    pub fn differentiate(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if !self.topology.is_loop() {
            return Err(Error::LoopRequired { op: "differentiate" });
        }
        check_dim(self.len(), samples.len())?;
        Ok(self.derivative.apply(samples))
    }

    /// The contact Hamiltonian `u = sum_a p_a K(., x_a)` of the instantaneous
    /// geodesic velocity.
    pub fn velocity_field<'a>(&'a self, kernel: &'a KernelSpec) -> VelocityField<'a> {
        VelocityField {
            config: self,
            kernel,
            momenta: self.momentum_weights(),
        }
    }

    /// `<J_L(Phi), f> = sum_a p_a f(x_a)`.
    pub fn moment_left_pair(&self, f: &dyn ScalarField) -> f64 {
        let mu = self.quadrature();
        (0..self.len())
            .map(|a| self.weights[a] * mu * f.value(self.position(a)))
            .collect::<KahanSum>()
            .value()
    }

    /// Total momentum weight `sum_a p_a`, the pairing with `f = 1`.
    pub fn total_weight(&self) -> f64 {
        let mu = self.quadrature();
        self.weights.iter().map(|h| h * mu).collect::<KahanSum>().value()
    }

    /// `rho_a = h_a alpha_{x_a}(tau_a)`; zeros for point clouds.
    pub fn moment_right(&self) -> Vec<f64> {
        if !self.topology.is_loop() {
            return vec![0.0; self.len()];
        }
        let d = self.dim();
        let tau = self.tangents().expect("loop topology");
        (0..self.len())
            .map(|a| self.weights[a] * dot(&self.model.alpha(self.position(a)), &tau[a * d..(a + 1) * d]))
            .collect()
    }

    /// `H = 1/2 sum_a sum_b p_a p_b K(x_a, x_b)`, in index order with Kahan
    /// compensation.
    pub fn hamiltonian(&self, kernel: &KernelSpec) -> f64 {
        let p = self.momentum_weights();
        let mut acc = KahanSum::new();
        for a in 0..self.len() {
            for b in 0..self.len() {
                acc.add(p[a] * p[b] * kernel.eval_bundle(&self.model, self.position(a), self.position(b)));
            }
        }
        0.5 * acc.value()
    }

    /// True iff `max_a |rho_a| <= tol`.
    pub fn is_isotropic(&self, tol: f64) -> bool {
        max_abs(&self.moment_right()) <= tol
    }

    /// Relabels nodes: node `a` of the result is node `perm[a]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.len(), perm.len())?;
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let d = self.dim();
        let positions = perm.iter().flat_map(|&p| self.positions[p * d..(p + 1) * d].iter().copied()).collect();
        let weights = perm.iter().map(|&p| self.weights[p]).collect();
        self.with_state(positions, weights)
    }

    /// Trigonometric interpolation of a loop onto `n` nodes.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if !self.topology.is_loop() {
            return Err(Error::LoopRequired { op: "resample" });
        }
        let d = self.dim();
        let m = self.len();
        let mut positions = vec![0.0; n * d];
        for k in 0..d {
            let samples: Vec<f64> = (0..m).map(|a| self.positions[a * d + k]).collect();
            for (b, v) in trig_interpolate(&samples, n).into_iter().enumerate() {
                positions[b * d + k] = v;
            }
        }
        let weights = trig_interpolate(&self.weights, n);
        Ok(Self::from_flat(self.model, Topology::Loop(n), positions, weights)?.with_derivative(self.derivative))
    }
}

/// Evaluates the trigonometric interpolant of periodic samples on a new grid.
fn trig_interpolate(samples: &[f64], n: usize) -> Vec<f64> {
    let m = samples.len();
    let kmax = m / 2;
    // real DFT coefficients
    let mut coeffs = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let ang = 2.0 * PI * (k * j) as f64 / m as f64;
            re += v * ang.cos();
            im -= v * ang.sin();
        }
        coeffs.push((re / m as f64, im / m as f64));
    }
    (0..n)
        .map(|b| {
            let s = 2.0 * PI * b as f64 / n as f64;
            let mut v = coeffs[0].0;
            for (k, &(re, im)) in coeffs.iter().enumerate().skip(1) {
                // the Nyquist mode of an even grid is shared between +k and -k
                let w = if m % 2 == 0 && k == kmax { 1.0 } else { 2.0 };
                let ks = k as f64 * s;
                v += w * (re * ks.cos() - im * ks.sin());
            }
            v
        })
        .collect()
}

/// `u(y) = sum_a p_a K(y, x_a)` together with its gradient.
pub struct VelocityField<'a> {
    config: &'a WeightedConfig,
    kernel: &'a KernelSpec,
    momenta: Vec<f64>,
}

impl ScalarField for VelocityField<'_> {
    fn value(&self, y: &[f64]) -> f64 {
        let model = self.config.model;
        (0..self.config.len())
            .map(|a| self.momenta[a] * self.kernel.eval_bundle(&model, y, self.config.position(a)))
            .collect::<KahanSum>()
            .value()
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        self.value_and_gradient(y).1
    }

    fn value_and_gradient(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let model = self.config.model;
        let d = y.len();
        let mut scratch = vec![0.0; d];
        let mut value = KahanSum::new();
        let mut grad = vec![KahanSum::new(); d];
        for (a, &p) in self.momenta.iter().enumerate() {
            let k = self.kernel.grad1_bundle(&model, y, self.config.position(a), &mut scratch);
            value.add(p * k);
            for (g, s) in grad.iter_mut().zip(&scratch) {
                g.add(p * s);
            }
        }
        (value.value(), grad.iter().map(KahanSum::value).collect())
    }
}

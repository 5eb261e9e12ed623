//! Numerical checks of the dual-pair algebra on weighted configurations.
//!
//! Everything here returns a residual whose exact value is zero; what remains
//! is quadrature, differentiation or finite-difference error. Only the finite
//! inclusions are checked (generators of one action are orthogonal to the
//! generators of the other), not that the orthogonal complements coincide.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::config::{ConfigTangent, LoopDerivative, Topology, WeightedConfig};
use crate::contact::ContactModel;
use crate::error::{Error, Result};
use crate::epdiff::{lift_hamiltonian, PolynomialPlanar};
use crate::field::{Polynomial, ScalarField};
use crate::numeric::{max_abs, KahanSum};
use crate::ode::{self, IntegratorSpec};

/// A vector field `Z(s) d/ds` on the circle given by a trigonometric polynomial
/// `c0 + sum_k (a_k cos ks + b_k sin ks)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamField {
    pub c0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl ReparamField {
    pub fn constant(c: f64) -> Self {
        ReparamField { c0: c, cos: vec![], sin: vec![] }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `c0 + sum a_k cos ks + b_k sin ks`, `k = 1..`.
    pub fn trig(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        ReparamField { c0, cos, sin }
    }

    /// Random coefficients in `[-1, 1]` with `1/k^2` decay, up to `modes`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> Self {
        let mut coeff = |k: usize| rng.gen_range(-1.0..1.0) / (k * k) as f64;
        let c0 = coeff(1);
        let cos = (1..=modes).map(&mut coeff).collect();
        let sin = (1..=modes).map(&mut coeff).collect();
        ReparamField { c0, cos, sin }
    }

    pub fn value(&self, s: f64) -> f64 {
        let mut v = self.c0;
        for (k, a) in self.cos.iter().enumerate() {
            v += a * ((k + 1) as f64 * s).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            v += b * ((k + 1) as f64 * s).sin();
        }
        v
    }

    /// `Z'(s)`, the divergence of `Z` for the uniform density.
    pub fn derivative(&self, s: f64) -> f64 {
        let mut v = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let kf = (k + 1) as f64;
            v -= kf * a * (kf * s).sin();
        }
        for (k, b) in self.sin.iter().enumerate() {
            let kf = (k + 1) as f64;
            v += kf * b * (kf * s).cos();
        }
        v
    }
}

/// `sum_a mu_a Omega_a(a_node, b_node)` with `Omega_a` the symplectization
/// form `d(t alpha)` at `(x_a, h_a)`.
pub fn omega_pair(config: &WeightedConfig, a: &ConfigTangent, b: &ConfigTangent) -> Result<f64> {
    let d = config.dim();
    a.check_shape(d, config.len())?;
    b.check_shape(d, config.len())?;
    let mu = config.quadrature();
    let model = config.model();
    let mut acc = KahanSum::new();
    let mut va = vec![0.0; d + 1];
    let mut vb = vec![0.0; d + 1];
    for n in 0..config.len() {
        let omega = model.symplectization_omega(config.position(n), config.weights()[n])?;
        va[..d].copy_from_slice(a.node_dx(n));
        va[d] = a.dh[n];
        vb[..d].copy_from_slice(b.node_dx(n));
        vb[d] = b.dh[n];
        let mut s = KahanSum::new();
        for i in 0..=d {
            for j in 0..=d {
                s.add(va[i] * omega[(i, j)] * vb[j]);
            }
        }
        acc.add(mu * s.value());
    }
    Ok(acc.value())
}

/// Node-wise lifted contact vector field `(X_f(x_a), -h_a lambda_f(x_a))`.
pub fn generator_contact(config: &WeightedConfig, f: &dyn ScalarField) -> Result<ConfigTangent> {
    let model = config.model();
    let nodes = (0..config.len())
        .map(|a| model.lifted_generator(f, config.position(a), config.weights()[a]))
        .collect::<Result<_>>()?;
    Ok(ConfigTangent::from_nodes(config.dim(), nodes))
}

/// Infinitesimal reparametrization: `dx_a = tau_a Z(s_a)`,
/// `dh_a = (h Z)'(s_a)` with the loop's own differentiation scheme.
pub fn generator_reparam(config: &WeightedConfig, z: &ReparamField) -> Result<ConfigTangent> {
    if !config.topology().is_loop() {
        return Err(Error::LoopRequired { op: "generator_reparam" });
    }
    let d = config.dim();
    let topo = config.topology();
    let zs: Vec<f64> = (0..config.len()).map(|a| z.value(topo.parameter(a))).collect();
    let tau = config.tangents()?;
    let dx = tau.iter().enumerate().map(|(i, t)| t * zs[i / d]).collect();
    let hz: Vec<f64> = config.weights().iter().zip(&zs).map(|(h, z)| h * z).collect();
    let dh = config.differentiate(&hz)?;
    Ok(ConfigTangent { dim: d, dx, dh })
}

/// `omega(zeta_f, zeta_Z)`.
pub fn check_orthogonality(config: &WeightedConfig, f: &dyn ScalarField, z: &ReparamField) -> Result<f64> {
    let a = generator_contact(config, f)?;
    let b = generator_reparam(config, z)?;
    Ok(omega_pair(config, &a, &b)?.abs())
}

/// Step used for the directional derivative in [`check_moment_identity`].
pub const MOMENT_FD_STEP: f64 = 1e-5;

/// `|omega(zeta_f, probe) + D_probe <J_L, f>|`, the directional derivative by
/// central differences with step [`MOMENT_FD_STEP`].
pub fn check_moment_identity(config: &WeightedConfig, f: &dyn ScalarField, probe: &ConfigTangent) -> Result<f64> {
    probe.check_shape(config.dim(), config.len())?;
    let zeta = generator_contact(config, f)?;
    let omega = omega_pair(config, &zeta, probe)?;
    let shifted = |eps: f64| {
        let positions = config.positions().iter().zip(&probe.dx).map(|(x, v)| x + eps * v).collect();
        let weights = config.weights().iter().zip(&probe.dh).map(|(h, v)| h + eps * v).collect();
        config.with_state_unchecked(positions, weights).moment_left_pair(f)
    };
    let h = MOMENT_FD_STEP;
    let derivative = (shifted(h) - shifted(-h)) / (2.0 * h);
    Ok((omega + derivative).abs())
}

/// Flows every node by the lifted contact flow of `f` for `flow_time`
/// (`dx/dt = X_f`, `dh/dt = -h lambda_f`) and returns
/// `max_a |rho_a(after) - rho_a(before)|`.
pub fn check_jr_invariance(
    config: &WeightedConfig,
    f: &dyn ScalarField,
    flow_time: f64,
    integrator: &IntegratorSpec,
) -> Result<f64> {
    let flowed = contact_flow(config, f, flow_time, integrator)?;
    let before = config.moment_right();
    let after = flowed.moment_right();
    Ok(before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// The image of `config` under the lifted time-`flow_time` flow of `f`.
pub fn contact_flow(
    config: &WeightedConfig,
    f: &dyn ScalarField,
    flow_time: f64,
    integrator: &IntegratorSpec,
) -> Result<WeightedConfig> {
    if !config.topology().is_loop() {
        return Err(Error::LoopRequired { op: "check_jr_invariance" });
    }
    let d = config.dim();
    let n = config.len();
    let model = config.model();
    let spec = IntegratorSpec { t_final: flow_time, ..*integrator };
    let mut y0 = config.positions().to_vec();
    y0.extend_from_slice(config.weights());
    let field = |y: &[f64]| -> Result<Vec<f64>> {
        let mut out = vec![0.0; y.len()];
        for a in 0..n {
            let (xf, lambda) = model.contact_vector_field_and_factor(f, &y[a * d..(a + 1) * d])?;
            out[a * d..(a + 1) * d].copy_from_slice(&xf);
            out[n * d + a] = -y[n * d + a] * lambda;
        }
        Ok(out)
    };
    let y = ode::integrate(y0, &spec, field, |_| Ok(()))?;
    if max_abs(&y).is_nan() {
        return Err(Error::Divergence { t: flow_time, what: "contact flow".into(), last_valid: None });
    }
    let weights = y[n * d..].to_vec();
    let mut positions = y;
    positions.truncate(n * d);
    config.with_state(positions, weights)
}

/// Smooth embedded loops with trigonometric-polynomial coordinates: a unit
/// circle in the first two coordinates, plus small low-mode perturbations
/// everywhere. On `Projectivized2` the angle winds once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticLoop {
    pub model: ContactModel,
    pub coords: Vec<ReparamField>,
    pub weight: ReparamField,
}

impl AnalyticLoop {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, model: ContactModel) -> Self {
        let dim = model.dim();
        let small = |rng: &mut R| {
            let mut z = ReparamField::random(rng, 3);
            z.c0 = 0.0;
            for c in z.cos.iter_mut().chain(z.sin.iter_mut()) {
                *c *= 0.1;
            }
            z
        };
        let mut coords: Vec<ReparamField> = (0..dim).map(|_| small(rng)).collect();
        coords[0].cos[0] += 1.0;
        coords[1].sin[0] += 1.0;
        if model.dim() > 2 && model.angle_index().is_none() {
            // lift out of the plane so that rho is not identically special
            coords[dim - 1].sin.push(0.0);
            coords[dim - 1].sin[1] += rng.gen_range(0.1..0.4);
        }
        let mut weight = small(rng);
        weight.c0 = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        AnalyticLoop { model, coords, weight }
    }

    /// Samples the loop on `n` uniform nodes.
    pub fn sample(&self, n: usize, derivative: LoopDerivative) -> Result<WeightedConfig> {
        let dim = self.model.dim();
        let angle = self.model.angle_index();
        let mut positions = Vec::with_capacity(n * dim);
        let mut weights = Vec::with_capacity(n);
        for a in 0..n {
            let s = 2.0 * PI * a as f64 / n as f64;
            for (k, c) in self.coords.iter().enumerate() {
                let winding = if Some(k) == angle { s } else { 0.0 };
                positions.push(c.value(s) + winding);
            }
            weights.push(self.weight.value(s));
        }
        Ok(WeightedConfig::from_flat(self.model, Topology::Loop(n), positions, weights)?.with_derivative(derivative))
    }
}

/// A random smooth contact Hamiltonian on `model`: a polynomial of the given
/// degree, or on `Projectivized2` the lift of a random polynomial planar field
/// (polynomials in the angle are not functions on the bundle).
pub fn random_hamiltonian<R: Rng + ?Sized>(rng: &mut R, model: ContactModel, degree: u32) -> Box<dyn ScalarField> {
    match model {
        ContactModel::Projectivized2 => Box::new(lift_hamiltonian(PolynomialPlanar::random(rng, degree))),
        _ => Box::new(Polynomial::random(rng, model.dim(), degree)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Constant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle(n: usize, derivative: LoopDerivative) -> WeightedConfig {
        let positions = (0..n)
            .map(|a| {
                let s = 2.0 * PI * a as f64 / n as f64;
                vec![s.cos(), s.sin(), 0.0]
            })
            .collect();
        WeightedConfig::new(ContactModel::darboux(1).unwrap(), Topology::Loop(n), positions, vec![1.0; n])
            .unwrap()
            .with_derivative(derivative)
    }

    #[test]
    fn reparam_field_derivative_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = ReparamField::random(&mut rng, 4);
        for s in [0.0, 0.7, 2.0, 5.5] {
            let fd = (z.value(s + 1e-6) - z.value(s - 1e-6)) / 2e-6;
            assert!((z.derivative(s) - fd).abs() < 1e-8);
            assert!((z.value(s) - z.value(s + 2.0 * PI)).abs() < 1e-12);
        }
        assert_eq!(ReparamField::trig(0.0, vec![], vec![1.0]).derivative(0.0), 1.0);
    }

    #[test]
    fn omega_pair_examples() {
        let c = WeightedConfig::new(ContactModel::Rotational3, Topology::PointCloud(1), vec![vec![0.0; 3]], vec![1.0]).unwrap();
        let dx = ConfigTangent::from_nodes(3, vec![(vec![1.0, 0.0, 0.0], 0.0)]);
        let dy = ConfigTangent::from_nodes(3, vec![(vec![0.0, 1.0, 0.0], 0.0)]);
        assert_eq!(omega_pair(&c, &dx, &dx).unwrap(), 0.0);
        // d(t alpha) = dt ^ alpha + 2t dx ^ dy on the rotational model
        assert!((omega_pair(&c, &dx, &dy).unwrap() - 2.0).abs() < 1e-15);
        let d1 = WeightedConfig::new(ContactModel::darboux(1).unwrap(), Topology::PointCloud(1), vec![vec![0.0; 3]], vec![1.0]).unwrap();
        // dz - y dx: d alpha = dx ^ dy
        assert!((omega_pair(&d1, &dx, &dy).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(omega_pair(&d1, &dx.scaled(2.0), &dy).unwrap(), 2.0 * omega_pair(&d1, &dx, &dy).unwrap());
        let bad = ConfigTangent::zeros(3, 2);
        assert!(omega_pair(&d1, &bad, &dy).is_err());
    }

    #[test]
    fn generator_contact_examples() {
        let c = WeightedConfig::new(
            ContactModel::darboux(1).unwrap(),
            Topology::PointCloud(2),
            vec![vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 0.0]],
            vec![2.0, -1.0],
        )
        .unwrap();
        let g = generator_contact(&c, &Constant(1.0)).unwrap();
        assert_eq!(g.node_dx(0), &[0.0, 0.0, 1.0]);
        assert_eq!(g.dh, vec![0.0, 0.0]);
        let g = generator_contact(&c, &Polynomial::coordinate(3, 2)).unwrap();
        assert_eq!(g.node_dx(0), &[0.0, 2.0, 3.0]);
        assert_eq!(g.dh[0], -2.0);
        let sum = generator_contact(&c, &Polynomial::coordinate(3, 2).with_term(1.0, &[0, 0, 0])).unwrap();
        let parts = g.add(&generator_contact(&c, &Constant(1.0)).unwrap()).unwrap();
        assert!(sum.add(&parts.scaled(-1.0)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn generator_reparam_examples() {
        let c = circle(64, LoopDerivative::Spectral);
        assert_eq!(generator_reparam(&c, &ReparamField::zero()).unwrap().max_abs(), 0.0);
        let g = generator_reparam(&c, &ReparamField::constant(1.0)).unwrap();
        let g2 = generator_reparam(&c, &ReparamField::trig(0.0, vec![], vec![1.0])).unwrap();
        for a in 0..64 {
            let s = 2.0 * PI * a as f64 / 64.0;
            let dx = g.node_dx(a);
            assert!((dx[0] + s.sin()).abs() < 1e-12 && (dx[1] - s.cos()).abs() < 1e-12 && dx[2].abs() < 1e-12);
            assert!(g.dh[a].abs() < 1e-12);
            assert!((g2.dh[a] - s.cos()).abs() < 1e-12);
        }
        let cloud = WeightedConfig::new(ContactModel::Rotational3, Topology::PointCloud(1), vec![vec![0.0; 3]], vec![1.0]).unwrap();
        assert!(matches!(generator_reparam(&cloud, &ReparamField::zero()), Err(Error::LoopRequired { .. })));
    }

    #[test]
    fn orthogonality_on_random_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for model in [ContactModel::darboux(1).unwrap(), ContactModel::Rotational3, ContactModel::Projectivized2] {
            for _ in 0..3 {
                let lp = AnalyticLoop::random(&mut rng, model);
                let f = random_hamiltonian(&mut rng, model, 2);
                let z = ReparamField::random(&mut rng, 3);
                let coarse = check_orthogonality(&lp.sample(64, LoopDerivative::Spectral).unwrap(), &*f, &z).unwrap();
                let fine = check_orthogonality(&lp.sample(256, LoopDerivative::Spectral).unwrap(), &*f, &z).unwrap();
                assert!(fine <= 1e-8, "{model}: {fine:e}");
                assert!(fine <= (coarse / 100.0).max(1e-13), "{model}: {coarse:e} -> {fine:e}");
            }
        }
    }

    #[test]
    fn orthogonality_converges_with_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lp = AnalyticLoop::random(&mut rng, ContactModel::Rotational3);
        let f = Polynomial::random(&mut rng, 3, 2);
        let z = ReparamField::random(&mut rng, 3);
        let r: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| check_orthogonality(&lp.sample(n, LoopDerivative::Central4).unwrap(), &f, &z).unwrap())
            .collect();
        assert!(r[1] < r[0] / 8.0 && r[2] < r[1] / 8.0, "{r:?}");
    }

    #[test]
    fn moment_identity_on_random_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for model in [ContactModel::darboux(2).unwrap(), ContactModel::Rotational3, ContactModel::Projectivized2] {
            for _ in 0..5 {
                let d = model.dim();
                let positions = (0..3).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
                let weights = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
                let c = WeightedConfig::new(model, Topology::PointCloud(3), positions, weights).unwrap();
                let f = Polynomial::random(&mut rng, d, 3);
                let probe = ConfigTangent {
                    dim: d,
                    dx: (0..3 * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    dh: (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                };
                assert!(check_moment_identity(&c, &f, &probe).unwrap() <= 1e-7);
            }
        }
    }

    #[test]
    fn moment_identity_on_a_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lp = AnalyticLoop::random(&mut rng, ContactModel::Projectivized2);
        let c = lp.sample(32, LoopDerivative::Central4).unwrap();
        let f = Polynomial::random(&mut rng, 3, 2);
        let probe = generator_reparam(&c, &ReparamField::random(&mut rng, 2)).unwrap();
        assert!(check_moment_identity(&c, &f, &probe).unwrap() <= 1e-7);
    }

    #[test]
    fn jr_invariance_examples() {
        let c = circle(32, LoopDerivative::Spectral);
        let spec = IntegratorSpec::rk4(1e-2, 1.0);
        assert_eq!(check_jr_invariance(&c, &Constant(0.0), 1.0, &spec).unwrap(), 0.0);
        assert!(check_jr_invariance(&c, &Constant(1.0), 1.0, &spec).unwrap() <= 1e-12);
        let moved = contact_flow(&c, &Constant(1.0), 1.0, &spec).unwrap();
        assert!((moved.position(3)[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jr_invariance_for_a_nonlinear_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let lp = AnalyticLoop::random(&mut rng, ContactModel::Rotational3);
        let c = lp.sample(64, LoopDerivative::Spectral).unwrap();
        let f = Polynomial::random(&mut rng, 3, 2).with_term(0.0, &[0, 0, 0]);
        let f = crate::field::Scaled(0.2, f);
        assert!(check_jr_invariance(&c, &f, 0.5, &IntegratorSpec::rk4(1e-2, 0.5)).unwrap() <= 1e-8);
    }
}

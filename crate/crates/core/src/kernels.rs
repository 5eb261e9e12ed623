//! Radial positive-definite kernels standing in for the inverse inertia operator.
//!
//! Kernels see points through a [`ContactModel`] chart. The angle of
//! `Projectivized2` enters through its chord `2 sin(dtheta / 2)`, which keeps
//! the kernel smooth and positive definite on the circle (a wrapped difference
//! would have a kink at the antipode). Plain Euclidean evaluation is available
//! through [`KernelSpec::eval`].

use serde::{Deserialize, Serialize};

use crate::contact::ContactModel;
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// `exp(-r^2 / (2 sigma^2))`
    #[serde(rename = "gaussian")]
    Gaussian,
    /// `exp(-r / sigma)`; only C^0 on the diagonal.
    #[serde(rename = "exp")]
    ExponentialRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel")]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub sigma: f64,
}

#[derive(Deserialize)]
struct RawKernel {
    family: KernelFamily,
    sigma: f64,
}

impl TryFrom<RawKernel> for KernelSpec {
    type Error = Error;
    fn try_from(raw: RawKernel) -> Result<Self> {
        KernelSpec::new(raw.family, raw.sigma)
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            family: KernelFamily::Gaussian,
            sigma: 1.0,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernel sigma must be positive, got {sigma}")));
        }
        Ok(KernelSpec { family, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, sigma)
    }

    pub fn exponential(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::ExponentialRadial, sigma)
    }

    /// Kernel value from the squared distance.
    #[inline]
    pub fn profile(&self, r2: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-r2 / (2.0 * self.sigma * self.sigma)).exp(),
            KernelFamily::ExponentialRadial => (-r2.sqrt() / self.sigma).exp(),
        }
    }

    /// Kernel value and the factor `c` with `grad_x k(x, y) = c * (x - y)`.
    /// On the diagonal `c` is taken to be 0 for both families.
    #[inline]
    pub fn profile_and_slope(&self, r2: f64) -> (f64, f64) {
        let k = self.profile(r2);
        let c = match self.family {
            KernelFamily::Gaussian => -k / (self.sigma * self.sigma),
            KernelFamily::ExponentialRadial => {
                if r2 == 0.0 {
                    0.0
                } else {
                    -k / (self.sigma * r2.sqrt())
                }
            }
        };
        (k, c)
    }

    /// `k(x, y)` in Euclidean coordinates.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        Ok(self.profile(sq_dist(x, y)))
    }

    /// Gradient of `k(x, y)` in `x`, Euclidean coordinates.
    pub fn grad1(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_dim(x.len(), y.len())?;
        let (_, c) = self.profile_and_slope(sq_dist(x, y));
        Ok(x.iter().zip(y).map(|(a, b)| c * (a - b)).collect())
    }

    /// `k(x, y)` in the model's chart.
    pub fn eval_on(&self, model: &ContactModel, x: &[f64], y: &[f64]) -> f64 {
        self.profile(chart_sq_dist(model, x, y))
    }

    /// Gradient in `x` of `k(x, y)` in the model's chart, written to `out`;
    /// returns the value.
    pub fn grad1_on(&self, model: &ContactModel, x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
        let (k, c) = self.profile_and_slope(chart_sq_dist(model, x, y));
        for (i, ((o, a), b)) in out.iter_mut().zip(x).zip(y).enumerate() {
            // d/dx of 4 sin^2((x - y) / 2) is 2 sin(x - y)
            let d = if Some(i) == model.angle_index() { (a - b).sin() } else { a - b };
            *o = c * d;
        }
        k
    }
}

/// Squared chart distance, with `4 sin^2(dtheta / 2)` for an angle.
fn chart_sq_dist(model: &ContactModel, x: &[f64], y: &[f64]) -> f64 {
    let angle = model.angle_index();
    x.iter()
        .zip(y)
        .enumerate()
        .map(|(i, (a, b))| {
            if Some(i) == angle {
                let s = 2.0 * (0.5 * (a - b)).sin();
                s * s
            } else {
                (a - b) * (a - b)
            }
        })
        .sum()
}

impl KernelSpec {
    /// Kernel acting on sections of the contact line bundle. On
    /// `Projectivized2` the antipodal copy `(q, theta + pi)` enters with a minus
    /// sign, `K(x, y) = k(x, y) - k(x, iota y)`, so that a node `(q, theta, h)`
    /// and its representative `(q, theta + pi, -h)` produce the same field.
    /// Elsewhere `K = k`.
    pub fn eval_bundle(&self, model: &ContactModel, x: &[f64], y: &[f64]) -> f64 {
        match model {
            ContactModel::Projectivized2 => {
                let (iy, _) = model.antipode(y, 1.0);
                self.eval_on(model, x, y) - self.eval_on(model, x, &iy)
            }
            _ => self.eval_on(model, x, y),
        }
    }

    /// Gradient in `x` of [`KernelSpec::eval_bundle`], written to `out`;
    /// returns the value.
    pub fn grad1_bundle(&self, model: &ContactModel, x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
        let k = self.grad1_on(model, x, y, out);
        match model {
            ContactModel::Projectivized2 => {
                let (iy, _) = model.antipode(y, 1.0);
                let mut other = [0.0; 3];
                let k2 = self.grad1_on(model, x, &iy, &mut other);
                for (o, g) in out.iter_mut().zip(other) {
                    *o -= g;
                }
                k - k2
            }
            _ => k,
        }
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_examples() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert_eq!(g.eval(&[0.3, 1.0, -2.0], &[0.3, 1.0, -2.0]).unwrap(), 1.0);
        assert!((g.eval(&[1.0, 0.0, 0.0], &[0.0; 3]).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        let e = KernelSpec::exponential(2.0).unwrap();
        assert!((e.eval(&[2.0, 0.0], &[0.0, 0.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sigma_and_dimension() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::exponential(-1.0).is_err());
        assert!(KernelSpec::gaussian(f64::NAN).is_err());
        let g = KernelSpec::default();
        assert!(matches!(g.eval(&[0.0; 3], &[0.0; 2]), Err(Error::DimensionMismatch { .. })));
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"gaussian","sigma":-2}"#).is_err());
        let k: KernelSpec = serde_json::from_str(r#"{"family":"exp","sigma":0.5}"#).unwrap();
        assert_eq!(k.family, KernelFamily::ExponentialRadial);
    }

    #[test]
    fn grad1_examples() {
        for k in [KernelSpec::gaussian(1.0).unwrap(), KernelSpec::exponential(1.0).unwrap()] {
            assert_eq!(k.grad1(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
        }
        let g = KernelSpec::gaussian(1.0).unwrap();
        let gr = g.grad1(&[1.0, 0.0, 0.0], &[0.0; 3]).unwrap();
        assert!((gr[0] + (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(&gr[1..], &[0.0, 0.0]);
    }

    #[test]
    fn grad1_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [KernelSpec::gaussian(0.7).unwrap(), KernelSpec::exponential(1.3).unwrap()] {
            for _ in 0..50 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let g = k.grad1(&x, &y).unwrap();
                for i in 0..3 {
                    let mut e = [0.0; 3];
                    e[i] = 1.0;
                    let fd = crate::numeric::directional_fd(&x, &e, 1e-5, |p| k.eval(p, &y).unwrap());
                    assert!((g[i] - fd).abs() < 1e-7, "{:?}", k.family);
                }
            }
        }
    }

    #[test]
    fn gram_matrices_are_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for k in [KernelSpec::gaussian(1.0).unwrap(), KernelSpec::exponential(1.0).unwrap()] {
            for _ in 0..20 {
                let n = rng.gen_range(2..=32);
                let mut pts: Vec<Vec<f64>> = Vec::new();
                while pts.len() < n {
                    let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
                    if pts.iter().all(|q| sq_dist(q, &p).sqrt() >= 1e-3 * k.sigma) {
                        pts.push(p);
                    }
                }
                let gram = DMatrix::from_fn(n, n, |i, j| k.eval(&pts[i], &pts[j]).unwrap());
                assert!(gram.clone().cholesky().is_some(), "{:?} n={n}", k.family);
                assert_eq!(gram, gram.transpose());
            }
        }
    }

    #[test]
    fn angle_enters_through_its_chord() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let m = ContactModel::Projectivized2;
        let x = [0.0, 0.0, 0.1];
        let y = [0.0, 0.0, 2.0 * std::f64::consts::PI - 0.1];
        let chord2 = (2.0 * 0.1f64.sin()).powi(2);
        assert!((g.eval_on(&m, &x, &y) - (-chord2 / 2.0).exp()).abs() < 1e-14);
        let mut out = [0.0; 3];
        g.grad1_on(&m, &x, &y, &mut out);
        assert!(out[2] < 0.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_translation_invariant(
            x in prop::collection::vec(-3.0f64..3.0, 3),
            y in prop::collection::vec(-3.0f64..3.0, 3),
            sigma in 0.1f64..3.0,
            gaussian in any::<bool>(),
        ) {
            let k = if gaussian { KernelSpec::gaussian(sigma) } else { KernelSpec::exponential(sigma) }.unwrap();
            prop_assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
            let g1 = k.grad1(&x, &y).unwrap();
            let g2 = k.grad1(&y, &x).unwrap();
            for (a, b) in g1.iter().zip(&g2) {
                // grad in the second argument is minus grad in the first
                prop_assert_eq!(*a, -*b);
            }
        }
    }
}

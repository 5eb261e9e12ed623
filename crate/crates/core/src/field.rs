//! Scalar fields on the ambient chart: contact Hamiltonians and test functions.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::numeric::fd_step;

/// A smooth function on the chart of a contact model, with gradient.
pub trait ScalarField: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// Second derivatives. The default differentiates the gradient by central
    /// differences.
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let h = fd_step(x);
        let mut out = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + h;
            let gp = self.gradient(&xp);
            xp[j] = x[j] - h;
            let gm = self.gradient(&xp);
            xp[j] = x[j];
            for i in 0..n {
                out[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        // symmetrize away the FD noise
        (&out + out.transpose()) * 0.5
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).hessian(x)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for Box<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).hessian(x)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for Arc<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (**self).value_and_gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).hessian(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

/// A monomial `coeff * prod_i x_i^{exponents[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// Polynomial in the chart coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn with_term(mut self, coeff: f64, exponents: &[u32]) -> Self {
        assert_eq!(exponents.len(), self.dim, "exponent vector length");
        self.terms.push(Monomial {
            coeff,
            exponents: exponents.to_vec(),
        });
        self
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::new(dim).with_term(1.0, &e)
    }

    /// Random polynomial with at most `degree` total degree; coefficients
    /// uniform in [-1, 1], each monomial kept with probability 1/2.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, degree: u32) -> Self {
        let mut poly = Self::new(dim);
        let mut exps = vec![0u32; dim];
        loop {
            let total: u32 = exps.iter().sum();
            if total <= degree && (total == 0 || rng.gen_bool(0.5)) {
                poly.terms.push(Monomial {
                    coeff: rng.gen_range(-1.0..1.0),
                    exponents: exps.clone(),
                });
            }
            // odometer over exponent vectors with entries <= degree
            let mut i = 0;
            loop {
                if i == dim {
                    return poly;
                }
                exps[i] += 1;
                if exps[i] <= degree {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    fn eval_monomial(m: &Monomial, x: &[f64]) -> f64 {
        m.exponents
            .iter()
            .zip(x)
            .fold(m.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

impl ScalarField for Polynomial {
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|m| Self::eval_monomial(m, x)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for m in &self.terms {
            for (j, gj) in g.iter_mut().enumerate() {
                let ej = m.exponents[j];
                if ej == 0 {
                    continue;
                }
                let mut term = m.coeff * ej as f64;
                for (i, (&e, &xi)) in m.exponents.iter().zip(x).enumerate() {
                    let p = if i == j { e - 1 } else { e };
                    term *= xi.powi(p as i32);
                }
                *gj += term;
            }
        }
        g
    }
}

/// `amplitude * exp(-|x - center|^2 / (2 width^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
}

impl ScalarField for GaussianBump {
    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        self.amplitude * (-r2 / (2.0 * self.width * self.width)).exp()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let v = self.value(x);
        let s2 = self.width * self.width;
        x.iter().zip(&self.center).map(|(a, c)| -(a - c) / s2 * v).collect()
    }
}

/// Pointwise sum of fields.
pub struct Sum(pub Vec<Box<dyn ScalarField>>);

impl ScalarField for Sum {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|f| f.value(x)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for f in &self.0 {
            for (acc, gi) in g.iter_mut().zip(f.gradient(x)) {
                *acc += gi;
            }
        }
        g
    }
}

/// Scalar multiple of a field.
pub struct Scaled<F>(pub f64, pub F);

impl<F: ScalarField> ScalarField for Scaled<F> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0 * self.1.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.1.gradient(x).into_iter().map(|g| self.0 * g).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::directional_fd;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polynomial_value_and_gradient() {
        // 3 x^2 y - z
        let p = Polynomial::new(3)
            .with_term(3.0, &[2, 1, 0])
            .with_term(-1.0, &[0, 0, 1]);
        let x = [2.0, -1.0, 5.0];
        assert_eq!(p.value(&x), -12.0 - 5.0);
        assert_eq!(p.gradient(&x), vec![-12.0, 12.0, -1.0]);
    }

    #[test]
    fn polynomial_hessian_default_matches_exact() {
        let p = Polynomial::new(2).with_term(1.0, &[2, 1]);
        let h = p.hessian(&[1.5, -0.5]);
        // d2/dx2 = 2y, d2/dxdy = 2x, d2/dy2 = 0
        assert!((h[(0, 0)] - (-1.0)).abs() < 1e-8);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-8);
        assert!(h[(1, 1)].abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn gradients_match_central_differences(
            seed in any::<u64>(),
            x in prop::collection::vec(-1.5f64..1.5, 3),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = Polynomial::random(&mut rng, 3, 3);
            let bump = GaussianBump { center: vec![0.2, -0.1, 0.4], width: 0.8, amplitude: 1.3 };
            let fields: [&dyn ScalarField; 2] = [&poly, &bump];
            for f in fields {
                let g = f.gradient(&x);
                for i in 0..3 {
                    let mut e = [0.0; 3];
                    e[i] = 1.0;
                    let fd = directional_fd(&x, &e, 1e-5, |y| f.value(y));
                    prop_assert!((g[i] - fd).abs() <= 1e-7 * (1.0 + g[i].abs()));
                }
            }
        }
    }
}

//! Exemplar contact manifolds and pointwise contact geometry.
//!
//! Every model is described in a single global chart with a contact form
//! `alpha`. The symplectization `L*` minus the zero section is trivialized as
//! `P x R^x` through `(x, t) <-> t * alpha_x`, so that the Liouville form is
//! `t * alpha` and the symplectic form is `d(t * alpha) = dt ^ alpha + t d alpha`.
//!
//! Conventions:
//!
//! * `Darboux(n)`: coordinates `(x_1..x_n, y_1..y_n, z)`, `alpha = dz - sum y_i dx_i`.
//! * `Rotational3`: coordinates `(x, y, z)`, `alpha = dz + x dy - y dx`.
//! * `Projectivized2`: coordinates `(q_1, q_2, theta)` with `theta` periodic mod
//!   `2 pi`, `alpha = cos(theta) dq_1 + sin(theta) dq_2`. The trivialized line
//!   bundle carries the identification `(q, theta + pi, t) ~ (q, theta, -t)`.
//!
//! A contact Hamiltonian `f` determines the contact vector field `X_f` through
//! `alpha(X_f) = f` and `i_{X_f} d alpha = (E f) alpha - df`, with conformal factor
//! `lambda = E f`, i.e. `L_{X_f} alpha = lambda alpha`. The lift of `X_f` to the
//! symplectization preserves `t * alpha`, hence scales the fiber by `-t lambda`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::field::ScalarField;
use crate::numeric::{axpy, dot, fd_step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ContactModel {
    Darboux(usize),
    Rotational3,
    Projectivized2,
}

impl ContactModel {
    pub fn darboux(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("darboux model needs n >= 1".into()));
        }
        Ok(ContactModel::Darboux(n))
    }

    /// Ambient dimension `2n + 1`.
    pub fn dim(&self) -> usize {
        match *self {
            ContactModel::Darboux(n) => 2 * n + 1,
            ContactModel::Rotational3 | ContactModel::Projectivized2 => 3,
        }
    }

    /// Index of the periodic angle coordinate, if any.
    pub fn angle_index(&self) -> Option<usize> {
        match self {
            ContactModel::Projectivized2 => Some(2),
            _ => None,
        }
    }

    /// Coefficients of `alpha_x` in the coordinate basis.
    pub fn alpha(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            ContactModel::Darboux(n) => {
                let mut a = vec![0.0; 2 * n + 1];
                for i in 0..n {
                    a[i] = -x[n + i];
                }
                a[2 * n] = 1.0;
                a
            }
            ContactModel::Rotational3 => vec![-x[1], x[0], 1.0],
            ContactModel::Projectivized2 => vec![x[2].cos(), x[2].sin(), 0.0],
        }
    }

    /// Matrix `A_ij = d alpha(e_i, e_j)`.
    pub fn dalpha(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        match *self {
            ContactModel::Darboux(n) => {
                for i in 0..n {
                    m[(i, n + i)] = 1.0;
                    m[(n + i, i)] = -1.0;
                }
            }
            ContactModel::Rotational3 => {
                m[(0, 1)] = 2.0;
                m[(1, 0)] = -2.0;
            }
            ContactModel::Projectivized2 => {
                let (s, c) = x[2].sin_cos();
                // -sin dtheta^dq1 + cos dtheta^dq2
                m[(2, 0)] = -s;
                m[(0, 2)] = s;
                m[(2, 1)] = c;
                m[(1, 2)] = -c;
            }
        }
        m
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())
    }

    /// `alpha_x(v)`.
    pub fn alpha_pair(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        check_dim(self.dim(), v.len())?;
        Ok(dot(&self.alpha(x), v))
    }

    /// Reeb field: `alpha(E) = 1`, `i_E d alpha = 0`.
    pub fn reeb(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        match *self {
            ContactModel::Darboux(_) | ContactModel::Rotational3 => {
                let mut e = vec![0.0; self.dim()];
                e[self.dim() - 1] = 1.0;
                Ok(e)
            }
            ContactModel::Projectivized2 => self.reeb_by_solve(x),
        }
    }

    /// Reeb field from the bordered pointwise system, for any model.
    pub fn reeb_by_solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let d = self.dim();
        let mut rhs = DVector::zeros(d + 1);
        rhs[d] = 1.0;
        self.bordered_solve(x, rhs, "reeb")
    }

    /// Solves `[[A^T, a], [a^T, 0]] [X; c] = rhs`. For a contact form this matrix
    /// is invertible; the multiplier `c` vanishes on consistent right-hand sides.
    fn bordered_solve(&self, x: &[f64], rhs: DVector<f64>, context: &'static str) -> Result<Vec<f64>> {
        let d = self.dim();
        let a = self.alpha(x);
        let da = self.dalpha(x);
        let mut m = DMatrix::zeros(d + 1, d + 1);
        for i in 0..d {
            for j in 0..d {
                m[(j, i)] = da[(i, j)];
            }
            m[(i, d)] = a[i];
            m[(d, i)] = a[i];
        }
        let sol = m.lu().solve(&rhs).ok_or(Error::SingularSystem { context })?;
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { context });
        }
        Ok(sol.iter().take(d).copied().collect())
    }

    /// Contact vector field of the Hamiltonian `f` at `x`.
    pub fn contact_vector_field(&self, f: &dyn ScalarField, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        match *self {
            ContactModel::Darboux(n) => {
                let (value, grad) = f.value_and_gradient(x);
                check_dim(self.dim(), grad.len())?;
                Ok(darboux_contact_vector(n, x, value, &grad))
            }
            _ => self.contact_vector_field_generic(f, x),
        }
    }

    /// Contact vector field through the pointwise linear solve, for any model.
    pub fn contact_vector_field_generic(&self, f: &dyn ScalarField, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let (value, grad) = f.value_and_gradient(x);
        check_dim(self.dim(), grad.len())?;
        let lambda = dot(&self.reeb(x)?, &grad);
        let a = self.alpha(x);
        let d = self.dim();
        let mut rhs = DVector::zeros(d + 1);
        for j in 0..d {
            rhs[j] = lambda * a[j] - grad[j];
        }
        rhs[d] = value;
        self.bordered_solve(x, rhs, "contact vector field")
    }

    /// Conformal factor `lambda = E . grad f`, so that `L_{X_f} alpha = lambda alpha`.
    pub fn conformal_factor(&self, f: &dyn ScalarField, x: &[f64]) -> Result<f64> {
        let grad = f.gradient(x);
        check_dim(self.dim(), grad.len())?;
        Ok(dot(&self.reeb(x)?, &grad))
    }

    /// Fundamental vector field of the lifted contact action on `P x R` at `(x, t)`:
    /// `(X_f(x), -t lambda(x))`. Returns the base part and the fiber part.
    pub fn lifted_generator(&self, f: &dyn ScalarField, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
        let (xf, lambda) = self.contact_vector_field_and_factor(f, x)?;
        Ok((xf, -t * lambda))
    }

    /// `X_f(x)` together with `lambda(x)`, sharing one gradient evaluation.
    pub fn contact_vector_field_and_factor(&self, f: &dyn ScalarField, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check_point(x)?;
        let (value, grad) = f.value_and_gradient(x);
        self.contact_vector_from_jet(x, value, &grad)
    }

    /// `(X_f(x), lambda(x))` from the 1-jet `(f(x), grad f(x))`.
    pub fn contact_vector_from_jet(&self, x: &[f64], value: f64, grad: &[f64]) -> Result<(Vec<f64>, f64)> {
        check_dim(self.dim(), grad.len())?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence {
                t: f64::NAN,
                what: "non-finite Hamiltonian jet".into(),
                last_valid: None,
            });
        }
        let lambda = dot(&self.reeb(x)?, grad);
        let xf = match *self {
            ContactModel::Darboux(n) => darboux_contact_vector(n, x, value, grad),
            _ => {
                let a = self.alpha(x);
                let d = self.dim();
                let mut rhs = DVector::zeros(d + 1);
                for j in 0..d {
                    rhs[j] = lambda * a[j] - grad[j];
                }
                rhs[d] = value;
                self.bordered_solve(x, rhs, "contact vector field")?
            }
        };
        Ok((xf, lambda))
    }

    /// Coordinate matrix of `omega = d(t alpha)` on `P x R`, coordinates
    /// `(x_1, .., x_dim, t)`.
    pub fn symplectization_omega(&self, x: &[f64], t: f64) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let d = self.dim();
        let a = self.alpha(x);
        let da = self.dalpha(x);
        let mut m = DMatrix::zeros(d + 1, d + 1);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = t * da[(i, j)];
            }
            m[(d, i)] = a[i];
            m[(i, d)] = -a[i];
        }
        Ok(m)
    }

    /// Coordinate difference `x - y`, with the angle wrapped into `(-pi, pi]`.
    pub fn displacement_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
            *o = a - b;
        }
        if let Some(k) = self.angle_index() {
            out[k] = wrap_angle(out[k]);
        }
    }

    pub fn displacement(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.displacement_into(x, y, &mut out);
        out
    }

    /// Chart distance used for embedding checks and kernels.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, (a, b)) in x.iter().zip(y).enumerate() {
            let mut d = a - b;
            if Some(i) == self.angle_index() {
                d = wrap_angle(d);
            }
            acc += d * d;
        }
        acc.sqrt()
    }

    /// The antipodal representative `(q, theta + pi, -t)` of a point of the
    /// trivialized symplectization of `Projectivized2`. Other models have no
    /// identification and return the input.
    pub fn antipode(&self, x: &[f64], t: f64) -> (Vec<f64>, f64) {
        match self {
            ContactModel::Projectivized2 => {
                let mut y = x.to_vec();
                y[2] += PI;
                (y, -t)
            }
            _ => (x.to_vec(), t),
        }
    }
}

/// Closed form on `Darboux(n)`:
/// `X = sum_i (-f_{y_i}) d/dx_i + (y_i f_z + f_{x_i}) d/dy_i + (f - sum_i y_i f_{y_i}) d/dz`.
fn darboux_contact_vector(n: usize, x: &[f64], value: f64, grad: &[f64]) -> Vec<f64> {
    let fz = grad[2 * n];
    let mut out = vec![0.0; 2 * n + 1];
    let mut z = value;
    for i in 0..n {
        let y = x[n + i];
        let fx = grad[i];
        let fy = grad[n + i];
        out[i] = -fy;
        out[n + i] = y * fz + fx;
        z -= y * fy;
    }
    out[2 * n] = z;
    out
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(d: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = d.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

/// Residual of `L_{X_f} alpha = lambda alpha` evaluated on `v`, with the Lie
/// derivative taken by central differences:
/// `(L_X alpha)(v) = d/ds alpha_{x + sX}(v) + alpha_x(d/ds X(x + s v))`.
pub fn lie_derivative_residual(model: &ContactModel, f: &dyn ScalarField, x: &[f64], v: &[f64]) -> Result<f64> {
    model.check_point(x)?;
    check_dim(model.dim(), v.len())?;
    let h = fd_step(x);
    let (xf, lambda) = model.contact_vector_field_and_factor(f, x)?;
    let transport = {
        let p = model.alpha_pair(&axpy(x, h, &xf), v)?;
        let m = model.alpha_pair(&axpy(x, -h, &xf), v)?;
        (p - m) / (2.0 * h)
    };
    let xp = model.contact_vector_field(f, &axpy(x, h, v))?;
    let xm = model.contact_vector_field(f, &axpy(x, -h, v))?;
    let dxv: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let lie = transport + model.alpha_pair(x, &dxv)?;
    Ok((lie - lambda * model.alpha_pair(x, v)?).abs())
}

impl fmt::Display for ContactModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactModel::Darboux(n) => write!(f, "darboux:{n}"),
            ContactModel::Rotational3 => f.write_str("rotational3"),
            ContactModel::Projectivized2 => f.write_str("projectivized2"),
        }
    }
}

impl FromStr for ContactModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotational3" => Ok(ContactModel::Rotational3),
            "projectivized2" => Ok(ContactModel::Projectivized2),
            _ => match s.strip_prefix("darboux:") {
                Some(n) => {
                    let n = n
                        .parse()
                        .map_err(|_| Error::Schema(format!("bad darboux dimension in `{s}`")))?;
                    ContactModel::darboux(n)
                }
                None => Err(Error::Schema(format!("unknown contact model `{s}`"))),
            },
        }
    }
}

impl TryFrom<String> for ContactModel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ContactModel> for String {
    fn from(m: ContactModel) -> String {
        m.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Constant, Polynomial};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const D1: ContactModel = ContactModel::Darboux(1);

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn alpha_pair_examples() {
        assert_eq!(D1.alpha_pair(&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.0]).unwrap(), -2.0);
        assert_eq!(D1.alpha_pair(&[7.0, -4.0, 0.5], &[0.0, 0.0, 1.0]).unwrap(), 1.0);
        let p = ContactModel::Projectivized2;
        assert_eq!(p.alpha_pair(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn alpha_pair_rejects_wrong_dimension() {
        let err = D1.alpha_pair(&[0.0; 3], &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, got: 2 }));
    }

    // Reeb oracle: alpha and d alpha typed in from the closed-form 1-forms.
    fn reeb_conditions(model: ContactModel, x: &[f64], e: &[f64]) -> (f64, Vec<f64>) {
        let a = model.alpha(x);
        let da = model.dalpha(x);
        let ie: Vec<f64> = (0..e.len())
            .map(|j| (0..e.len()).map(|i| e[i] * da[(i, j)]).sum())
            .collect();
        (dot(&a, e), ie)
    }

    #[test]
    fn reeb_examples() {
        let d2 = ContactModel::Darboux(2);
        let x = [0.3, -1.0, 2.0, 0.7, 9.0];
        assert_eq!(d2.reeb(&x).unwrap(), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(close(&d2.reeb_by_solve(&x).unwrap(), &[0.0, 0.0, 0.0, 0.0, 1.0], 1e-14));

        let r = ContactModel::Rotational3;
        assert_eq!(r.reeb(&[5.0, -1.0, 0.0]).unwrap(), vec![0.0, 0.0, 1.0]);
        assert!(close(&r.reeb_by_solve(&[5.0, -1.0, 0.0]).unwrap(), &[0.0, 0.0, 1.0], 1e-14));

        let p = ContactModel::Projectivized2;
        assert!(close(&p.reeb(&[0.0, 0.0, 0.0]).unwrap(), &[1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn reeb_satisfies_defining_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for model in [ContactModel::Darboux(1), ContactModel::Darboux(3), ContactModel::Rotational3, ContactModel::Projectivized2] {
            for _ in 0..20 {
                let x: Vec<f64> = (0..model.dim()).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect();
                let e = model.reeb(&x).unwrap();
                let (ae, ie) = reeb_conditions(model, &x, &e);
                assert!((ae - 1.0).abs() <= 1e-14);
                assert!(ie.iter().all(|c| c.abs() <= 1e-10));
            }
        }
    }

    #[test]
    fn contact_vector_field_examples() {
        assert_eq!(D1.contact_vector_field(&Constant(1.0), &[0.4, 0.2, -1.0]).unwrap(), vec![0.0, 0.0, 1.0]);
        let fx = Polynomial::coordinate(3, 0);
        assert_eq!(D1.contact_vector_field(&fx, &[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0]);
        let fz = Polynomial::coordinate(3, 2);
        assert_eq!(D1.contact_vector_field(&fz, &[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 2.0, 3.0]);
    }

    #[test]
    fn conformal_factor_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(D1.conformal_factor(&Constant(1.0), &x).unwrap(), 0.0);
        assert_eq!(D1.conformal_factor(&Polynomial::coordinate(3, 2), &x).unwrap(), 1.0);
        assert_eq!(D1.conformal_factor(&Polynomial::coordinate(3, 0), &x).unwrap(), 0.0);
    }

    #[test]
    fn lifted_generator_examples() {
        let (v, dt) = D1.lifted_generator(&Constant(1.0), &[0.0; 3], 2.0).unwrap();
        assert_eq!((v, dt), (vec![0.0, 0.0, 1.0], 0.0));
        let (v, dt) = D1.lifted_generator(&Polynomial::coordinate(3, 2), &[1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!(v, vec![0.0, 2.0, 3.0]);
        assert_eq!(dt, -2.0);
        let f = Polynomial::new(3).with_term(0.5, &[1, 1, 1]).with_term(2.0, &[0, 0, 2]);
        let x = [0.3, 0.1, -0.7];
        let (v, dt) = D1.lifted_generator(&f, &x, 0.0).unwrap();
        assert_eq!(v, D1.contact_vector_field(&f, &x).unwrap());
        assert_eq!(dt, 0.0);
    }

    #[test]
    fn lifted_generator_is_hamiltonian_for_t_alpha() {
        // i_zeta omega = -d(t f) on P x R: the sign of the fiber component is
        // forced by this identity.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for model in [ContactModel::Darboux(1), ContactModel::Rotational3, ContactModel::Projectivized2] {
            let f = Polynomial::random(&mut rng, 3, 2);
            let x = [0.4, -0.3, 1.1];
            let t = 1.7;
            let (xf, ft) = model.lifted_generator(&f, &x, t).unwrap();
            let omega = model.symplectization_omega(&x, t).unwrap();
            let zeta = DVector::from_iterator(4, xf.iter().copied().chain([ft]));
            let lhs = omega.transpose() * zeta; // (i_zeta omega)_j = sum_i zeta_i omega_ij
            let (val, grad) = f.value_and_gradient(&x);
            for j in 0..3 {
                assert!((lhs[j] + t * grad[j]).abs() < 1e-12, "{model} j={j}");
            }
            assert!((lhs[3] + val).abs() < 1e-12);
        }
    }

    #[test]
    fn symplectization_omega_examples() {
        let m = D1.symplectization_omega(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(3, 2)], 1.0);
        assert_eq!(m[(3, 0)], 0.0);
        let m = D1.symplectization_omega(&[0.0, 5.0, 0.0], 1.0).unwrap();
        assert_eq!(m[(3, 0)], -5.0);
        for model in [ContactModel::Darboux(1), ContactModel::Darboux(2), ContactModel::Rotational3, ContactModel::Projectivized2] {
            let x: Vec<f64> = (0..model.dim()).map(|i| 0.3 * i as f64 - 0.2).collect();
            let m = model.symplectization_omega(&x, 0.0).unwrap();
            assert_eq!(m.determinant(), 0.0);
            let m = model.symplectization_omega(&x, 1.3).unwrap();
            assert!((&m + m.transpose()).amax() == 0.0);
            assert!(m.determinant().abs() > 1e-6);
        }
    }

    #[test]
    fn symplectization_omega_matches_exterior_derivative_of_t_alpha() {
        // omega_ij = d_i theta_j - d_j theta_i with theta = (t alpha, 0)
        for model in [ContactModel::Darboux(2), ContactModel::Rotational3, ContactModel::Projectivized2] {
            let d = model.dim();
            let pt: Vec<f64> = (0..=d).map(|i| 0.37 * i as f64 + 0.1).collect();
            let theta = |p: &[f64]| -> Vec<f64> {
                let mut th: Vec<f64> = model.alpha(&p[..d]).iter().map(|a| p[d] * a).collect();
                th.push(0.0);
                th
            };
            let h = 1e-5;
            let mut jac = DMatrix::zeros(d + 1, d + 1); // jac[(i, j)] = d_i theta_j
            for i in 0..=d {
                let mut p = pt.clone();
                p[i] += h;
                let tp = theta(&p);
                p[i] -= 2.0 * h;
                let tm = theta(&p);
                for j in 0..=d {
                    jac[(i, j)] = (tp[j] - tm[j]) / (2.0 * h);
                }
            }
            let fd = &jac - jac.transpose();
            let omega = model.symplectization_omega(&pt[..d], pt[d]).unwrap();
            assert!((fd - omega).amax() < 1e-9, "{model}");
        }
    }

    #[test]
    fn antipodal_identification_commutes() {
        let p = ContactModel::Projectivized2;
        let x = [0.3, -1.2, 0.8];
        let v = [0.5, 0.25, -2.0];
        let (y, t) = p.antipode(&x, 1.5);
        assert_eq!(t, -1.5);
        // t alpha is invariant
        let lhs = 1.5 * p.alpha_pair(&x, &v).unwrap();
        let rhs = t * p.alpha_pair(&y, &v).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
        // Reeb flips, so an odd Hamiltonian has the same contact vector field
        let e1 = p.reeb(&x).unwrap();
        let e2 = p.reeb(&y).unwrap();
        assert!(close(&e1, &e2.iter().map(|c| -c).collect::<Vec<_>>(), 1e-15));
        let f = crate::field::Sum(vec![
            Box::new(crate::field::Scaled(1.0, OddTheta)),
        ]);
        let a = p.contact_vector_field(&f, &x).unwrap();
        let b = p.contact_vector_field(&f, &y).unwrap();
        assert!(close(&a, &b, 1e-12));
    }

    struct OddTheta;
    impl ScalarField for OddTheta {
        fn value(&self, x: &[f64]) -> f64 {
            x[0] * x[2].cos() + x[1] * x[1] * x[2].sin()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![x[2].cos(), 2.0 * x[1] * x[2].sin(), -x[0] * x[2].sin() + x[1] * x[1] * x[2].cos()]
        }
    }

    #[test]
    fn model_ids_round_trip() {
        for s in ["darboux:1", "darboux:4", "rotational3", "projectivized2"] {
            assert_eq!(s.parse::<ContactModel>().unwrap().to_string(), s);
        }
        assert!("darboux:0".parse::<ContactModel>().is_err());
        assert!("sphere".parse::<ContactModel>().is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-0.1) + 0.1).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), PI);
    }

    proptest! {
        #[test]
        fn contact_hamiltonian_is_recovered(seed in any::<u64>(), which in 0usize..4) {
            let model = [ContactModel::Darboux(1), ContactModel::Darboux(2), ContactModel::Rotational3, ContactModel::Projectivized2][which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Polynomial::random(&mut rng, model.dim(), 3);
            let x: Vec<f64> = (0..model.dim()).map(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0)).collect();
            let xf = model.contact_vector_field(&f, &x).unwrap();
            prop_assert!((model.alpha_pair(&x, &xf).unwrap() - f.value(&x)).abs() <= 1e-10);
            let mut v: Vec<f64> = (0..model.dim()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
            let n = crate::numeric::norm(&v);
            v.iter_mut().for_each(|c| *c /= n);
            prop_assert!(lie_derivative_residual(&model, &f, &x, &v).unwrap() <= 1e-6 * 2.0);
            // d alpha(E, v) = 0
            let e = model.reeb(&x).unwrap();
            let da = model.dalpha(&x);
            let dev: f64 = (0..e.len()).flat_map(|i| (0..e.len()).map(move |j| (i, j))).map(|(i, j)| e[i] * da[(i, j)] * v[j]).sum();
            prop_assert!(dev.abs() <= 1e-10);
        }

        #[test]
        fn darboux_closed_form_matches_linear_solve(seed in any::<u64>(), n in 1usize..4) {
            let model = ContactModel::Darboux(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Polynomial::random(&mut rng, model.dim(), 2);
            let x: Vec<f64> = (0..model.dim()).map(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0)).collect();
            let closed = model.contact_vector_field(&f, &x).unwrap();
            let solved = model.contact_vector_field_generic(&f, &x).unwrap();
            let scale = 1.0 + crate::numeric::max_abs(&closed);
            prop_assert!(close(&closed, &solved, 1e-12 * scale));
        }
    }
}

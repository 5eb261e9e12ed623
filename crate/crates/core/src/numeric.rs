//! Small numerical helpers shared across modules.

/// Kahan-compensated accumulator. Summation order is the caller's order, so
/// results are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Default central finite-difference step at `x`: 1e-5 scaled by `1 + |x|`.
pub fn fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + norm(x))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `x + s * v`, allocated.
pub fn axpy(x: &[f64], s: f64, v: &[f64]) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a + s * b).collect()
}

/// Central difference of a scalar function along direction `v`.
pub fn directional_fd<F>(x: &[f64], v: &[f64], step: f64, mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let plus = f(&axpy(x, step, v));
    let minus = f(&axpy(x, -step, v));
    (plus - minus) / (2.0 * step)
}

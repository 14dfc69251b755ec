//! Second-order forward-mode numbers.
//!
//! A `Dual2` carries a value, its gradient and its (full, row-major) Hessian
//! with respect to `n` seed variables. Constants carry empty derivative
//! buffers and broadcast as zeros, so mixing them with seeded numbers is free.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl Dual2 {
    pub fn cst(v: f64) -> Self {
        Dual2 { v, g: Vec::new(), h: Vec::new() }
    }

    /// Seed variable `i` of `n` at value `v`.
    pub fn var(v: f64, i: usize, n: usize) -> Self {
        let mut g = vec![0.0; n];
        g[i] = 1.0;
        Dual2 { v, g, h: vec![0.0; n * n] }
    }

    pub fn seeds(p: &[f64]) -> Vec<Dual2> {
        let n = p.len();
        p.iter().enumerate().map(|(i, &x)| Dual2::var(x, i, n)).collect()
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Dual2 {
        let n = self.dim();
        if n == 0 {
            return Dual2::cst(f0);
        }
        let g: Vec<f64> = self.g.iter().map(|d| f1 * d).collect();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = f1 * self.h[i * n + j] + f2 * self.g[i] * self.g[j];
            }
        }
        Dual2 { v: f0, g, h }
    }

    pub fn exp(&self) -> Dual2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Dual2 {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sqrt(&self) -> Dual2 {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powf(&self, a: f64) -> Dual2 {
        let x = self.v;
        self.chain(x.powf(a), a * x.powf(a - 1.0), a * (a - 1.0) * x.powf(a - 2.0))
    }

    pub fn powi(&self, k: i32) -> Dual2 {
        let x = self.v;
        let kf = k as f64;
        self.chain(x.powi(k), kf * x.powi(k - 1), kf * (kf - 1.0) * x.powi(k - 2))
    }

    pub fn recip(&self) -> Dual2 {
        let x = self.v;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn sin(&self) -> Dual2 {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Dual2 {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(&self) -> Dual2 {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(&self) -> Dual2 {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn scale(&self, c: f64) -> Dual2 {
        Dual2 { v: c * self.v, g: self.g.iter().map(|x| c * x).collect(), h: self.h.iter().map(|x| c * x).collect() }
    }
}

fn zip_add(a: &[f64], b: &[f64], sb: f64) -> Vec<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => a.to_vec(),
        (true, false) => b.iter().map(|x| sb * x).collect(),
        (false, false) => a.iter().zip(b).map(|(x, y)| x + sb * y).collect(),
    }
}

impl Add for &Dual2 {
    type Output = Dual2;
    fn add(self, o: &Dual2) -> Dual2 {
        Dual2 { v: self.v + o.v, g: zip_add(&self.g, &o.g, 1.0), h: zip_add(&self.h, &o.h, 1.0) }
    }
}

impl Sub for &Dual2 {
    type Output = Dual2;
    fn sub(self, o: &Dual2) -> Dual2 {
        Dual2 { v: self.v - o.v, g: zip_add(&self.g, &o.g, -1.0), h: zip_add(&self.h, &o.h, -1.0) }
    }
}

impl Mul for &Dual2 {
    type Output = Dual2;
    fn mul(self, o: &Dual2) -> Dual2 {
        if o.g.is_empty() {
            return self.scale(o.v);
        }
        if self.g.is_empty() {
            return o.scale(self.v);
        }
        let n = self.dim();
        let g = (0..n).map(|i| self.v * o.g[i] + o.v * self.g[i]).collect();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = self.v * o.h[i * n + j] + o.v * self.h[i * n + j] + self.g[i] * o.g[j] + o.g[i] * self.g[j];
            }
        }
        Dual2 { v: self.v * o.v, g, h }
    }
}

impl Div for &Dual2 {
    type Output = Dual2;
    fn div(self, o: &Dual2) -> Dual2 {
        self * &o.recip()
    }
}

impl Neg for &Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Dual2 {
            type Output = Dual2;
            fn $m(self, o: Dual2) -> Dual2 { (&self).$m(&o) }
        }
        impl $tr<&Dual2> for Dual2 {
            type Output = Dual2;
            fn $m(self, o: &Dual2) -> Dual2 { (&self).$m(o) }
        }
        impl $tr<Dual2> for &Dual2 {
            type Output = Dual2;
            fn $m(self, o: Dual2) -> Dual2 { self.$m(&o) }
        }
        impl $tr<f64> for Dual2 {
            type Output = Dual2;
            fn $m(self, o: f64) -> Dual2 { (&self).$m(&Dual2::cst(o)) }
        }
        impl $tr<f64> for &Dual2 {
            type Output = Dual2;
            fn $m(self, o: f64) -> Dual2 { self.$m(&Dual2::cst(o)) }
        }
        impl $tr<Dual2> for f64 {
            type Output = Dual2;
            fn $m(self, o: Dual2) -> Dual2 { (&Dual2::cst(self)).$m(&o) }
        }
        impl $tr<&Dual2> for f64 {
            type Output = Dual2;
            fn $m(self, o: &Dual2) -> Dual2 { (&Dual2::cst(self)).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

pub fn sum(xs: &[Dual2]) -> Dual2 {
    xs.iter().fold(Dual2::cst(0.0), |a, b| &a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual2::var(2.0, 0, 2);
        let y = Dual2::var(3.0, 1, 2);
        let z = &x * &y;
        assert_eq!(z.v, 6.0);
        assert_eq!(z.g, vec![3.0, 2.0]);
        assert_eq!(z.h, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn quotient_and_pow() {
        let x = Dual2::var(1.5, 0, 1);
        let r = (&x * &x * &x) / (x.clone() + 1.0);
        // f = x^3/(x+1)
        let f = |t: f64| t.powi(3) / (t + 1.0);
        let d1 = (3.0 * 1.5f64.powi(2) * 2.5 - 1.5f64.powi(3)) / 2.5f64.powi(2);
        assert!((r.v - f(1.5)).abs() < 1e-14);
        assert!((r.g[0] - d1).abs() < 1e-13);
        let q = x.powf(-0.25);
        assert!((q.h[0] - (-0.25) * (-1.25) * 1.5f64.powf(-2.25)).abs() < 1e-14);
    }

    #[test]
    fn transcendental_second_derivatives() {
        let x = Dual2::var(0.7, 0, 1);
        assert!((x.sin().h[0] + 0.7f64.sin()).abs() < 1e-15);
        assert!((x.cosh().h[0] - 0.7f64.cosh()).abs() < 1e-15);
        assert!((x.ln().h[0] + 1.0 / 0.49).abs() < 1e-14);
        assert!((x.sqrt().h[0] + 0.25 * 0.7f64.powf(-1.5)).abs() < 1e-14);
    }
}

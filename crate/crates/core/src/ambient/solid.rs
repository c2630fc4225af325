//! Real solid harmonics `R_lm(x) = |x|^l Y_lm(x/|x|)` as exact polynomials.

use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Sparse polynomial in `(x, y, z)` keyed by exponent triple.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(c: f64, e: [u32; 3]) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(*e).or_insert(0.0) += c;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(1.0), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self, axis: usize) -> Poly {
        let mut out = Poly::default();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut d = *e;
                d[axis] -= 1;
                *out.terms.entry(d).or_insert(0.0) += c * e[axis] as f64;
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Solid harmonic matching the orthonormal real harmonic `Y_lm` on the unit sphere.
pub fn solid_harmonic(l: u32, m: i32) -> Poly {
    let k_abs = m.unsigned_abs();
    assert!(k_abs <= l, "|m| must not exceed l");
    let x = Poly::monomial(1.0, [1, 0, 0]);
    let y = Poly::monomial(1.0, [0, 1, 0]);
    let z = Poly::monomial(1.0, [0, 0, 1]);
    let r2 = x.mul(&x).add(&y.mul(&y)).add(&z.mul(&z));

    // Re/Im of (x + i y)^|m|
    let mut re = Poly::constant(1.0);
    let mut im = Poly::default();
    for _ in 0..k_abs {
        let nre = re.mul(&x).add(&im.mul(&y).scale(-1.0));
        let nim = re.mul(&y).add(&im.mul(&x));
        re = nre;
        im = nim;
    }
    let mut radial = Poly::default();
    let mut k = 0;
    while l as i64 - 2 * k as i64 - k_abs as i64 >= 0 {
        let p = l - 2 * k;
        let c = 2f64.powi(-(l as i32))
            * if k % 2 == 0 { 1.0 } else { -1.0 }
            * binomial(l, k)
            * binomial(2 * l - 2 * k, l)
            * factorial(p)
            / factorial(p - k_abs);
        radial = radial.add(&z.pow(p - k_abs).mul(&r2.pow(k)).scale(c));
        k += 1;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - k_abs) / factorial(l + k_abs)).sqrt();
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => radial.scale(norm),
        std::cmp::Ordering::Greater => re.mul(&radial).scale(norm * std::f64::consts::SQRT_2),
        std::cmp::Ordering::Less => im.mul(&radial).scale(norm * std::f64::consts::SQRT_2),
    }
}

/// Polynomial with its first and second derivative polynomials.
#[derive(Debug, Clone)]
pub struct PolyJet {
    pub p: Poly,
    pub d: [Poly; 3],
    pub dd: [[Poly; 3]; 3],
}

impl PolyJet {
    pub fn new(p: Poly) -> Self {
        let d = [p.derivative(0), p.derivative(1), p.derivative(2)];
        let dd = [0, 1, 2].map(|a| [0, 1, 2].map(|b| d[a].derivative(b)));
        Self { p, d, dd }
    }

    /// Value, gradient and Hessian of `P(x) |x|^{-k}`.
    pub fn eval_scaled(&self, x: &[f64; 3], k: f64) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let r = r2.sqrt();
        let rk = r.powf(-k);
        let rk2 = rk / r2;
        let rk4 = rk2 / r2;
        let p = self.p.eval(x);
        let dp = [0, 1, 2].map(|a| self.d[a].eval(x));
        let f = p * rk;
        let df = [0, 1, 2].map(|g| dp[g] * rk - k * p * x[g] * rk2);
        let mut ddf = [[0.0; 3]; 3];
        for g in 0..3 {
            for e in 0..3 {
                let delta = if g == e { 1.0 } else { 0.0 };
                ddf[g][e] = self.dd[g][e].eval(x) * rk
                    - k * (dp[g] * x[e] + dp[e] * x[g]) * rk2
                    - k * p * delta * rk2
                    + k * (k + 2.0) * p * x[g] * x[e] * rk4;
            }
        }
        (f, df, ddf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{sh_index, PointBasis};

    #[test]
    fn matches_angular_harmonics() {
        let (theta, phi): (f64, f64) = (0.83, 2.1);
        let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let basis = PointBasis::new(theta, phi, 4, 0);
        for l in 0..=4u32 {
            for m in -(l as i32)..=(l as i32) {
                let r = 2.7;
                let x = u.map(|c| c * r);
                let s = solid_harmonic(l, m).eval(&x) / r.powi(l as i32);
                let y = basis.eval(sh_index(l as usize, m as i64), 0, 0);
                assert!((s - y).abs() < 1e-13, "l={l} m={m}: {s} vs {y}");
            }
        }
    }

    #[test]
    fn solid_harmonics_are_harmonic() {
        for l in 0..=4u32 {
            for m in -(l as i32)..=(l as i32) {
                let p = solid_harmonic(l, m);
                let lap = (0..3).fold(Poly::default(), |acc, a| acc.add(&p.derivative(a).derivative(a)));
                assert!(lap.is_zero() || lap.eval(&[0.3, -1.2, 0.7]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaled_jet_matches_finite_differences() {
        let jet = PolyJet::new(solid_harmonic(3, -2));
        let x = [1.3, -0.4, 2.2];
        let k = 4.5;
        let (_, df, ddf) = jet.eval_scaled(&x, k);
        let h = 1e-5;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (fp, dfp, _) = jet.eval_scaled(&xp, k);
            let (fm, dfm, _) = jet.eval_scaled(&xm, k);
            assert!(((fp - fm) / (2.0 * h) - df[a]).abs() < 1e-8);
            for b in 0..3 {
                assert!(((dfp[b] - dfm[b]) / (2.0 * h) - ddf[b][a]).abs() < 1e-8);
            }
        }
    }
}

//! Multiplier spectra of bicritical maps and the conjugacy comparison.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::Serialize;

use crate::error::Error;
use crate::pullback::BicriticalCoefficients;

pub const DEFAULT_TOL: f64 = 1e-6;

/// `z -> (a z^d + b) / (c z^d + e)`; the normal form is `b = e = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneralBicritical {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub e: C64,
    pub degree: u64,
}

impl From<BicriticalCoefficients> for GeneralBicritical {
    fn from(f: BicriticalCoefficients) -> Self {
        let one = C64::new(1.0, 0.0);
        GeneralBicritical {
            a: f.a,
            b: one,
            c: f.b,
            e: one,
            degree: f.degree,
        }
    }
}

impl GeneralBicritical {
    /// Conjugate by `z -> lambda z`.
    pub fn scaled(&self, lambda: C64) -> Self {
        let ld = lambda.powu(self.degree as u32);
        GeneralBicritical {
            a: self.a * lambda,
            b: self.b * ld * lambda,
            c: self.c,
            e: self.e * ld,
            degree: self.degree,
        }
    }

    /// Conjugate by `z -> mu z` with `mu = b/e`, which moves the critical value
    /// of 0 to 1 and gives `b = e = 1`. `None` when 0 maps to 0 or infinity.
    pub fn normalized(&self) -> Option<Self> {
        let big = [self.a, self.b, self.c, self.e]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if self.b.norm() <= 1e-12 * big || self.e.norm() <= 1e-12 * big {
            return None;
        }
        let mu = self.b / self.e;
        let md = mu.powu(self.degree as u32);
        let one = C64::new(1.0, 0.0);
        Some(GeneralBicritical {
            a: self.a * md / self.b,
            b: one,
            c: self.c * md * mu / self.b,
            e: one,
            degree: self.degree,
        })
    }

    /// Conjugate by `z -> 1/z`, which swaps the critical points.
    pub fn inverted(&self) -> Self {
        GeneralBicritical {
            a: self.e,
            b: self.c,
            c: self.b,
            e: self.a,
            degree: self.degree,
        }
    }

    fn det(&self) -> C64 {
        self.a * self.e - self.b * self.c
    }

    /// `f(z)`, or `None` at a pole.
    fn eval(&self, z: C64) -> Option<C64> {
        let zd = z.powu(self.degree as u32);
        let den = self.c * zd + self.e;
        (den.norm() > 0.0).then(|| (self.a * zd + self.b) / den)
    }

    /// `f^n(z)` and its derivative, while the orbit stays finite.
    fn iterate(&self, mut z: C64, n: usize) -> Option<(C64, C64)> {
        let mut dz = C64::new(1.0, 0.0);
        for _ in 0..n {
            dz *= self.derivative(z)?;
            z = self.eval(z)?;
        }
        Some((z, dz))
    }

    /// Newton on `f^n(z) = z` with the map itself, which is better
    /// conditioned than the expanded polynomial. Steps that do not reduce the
    /// residual or that move far are refused.
    fn polish(&self, mut z: C64, n: usize) -> C64 {
        let residual = |z: C64| self.iterate(z, n).map(|(w, _)| (w - z).norm());
        for _ in 0..4 {
            let (Some((w, dw)), Some(r)) = (self.iterate(z, n), residual(z)) else {
                break;
            };
            let step = (w - z) / (dw - 1.0);
            let next = z - step;
            if !next.is_finite() || step.norm() > 1e-6 * (1.0 + z.norm()) {
                break;
            }
            match residual(next) {
                Some(rn) if rn < r => z = next,
                _ => break,
            }
        }
        z
    }

    fn derivative(&self, z: C64) -> Option<C64> {
        let d = self.degree;
        let den = self.c * z.powu(d as u32) + self.e;
        (den.norm() > 0.0)
            .then(|| z.powu(d as u32 - 1) * self.det() * d as f64 / (den * den))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierSpectrum {
    pub fixed: Vec<C64>,
    pub period_two: Vec<C64>,
}

/// Polynomial coefficients, lowest degree first.
type Poly = Vec<C64>;

fn poly_add(p: &mut Poly, q: &Poly, s: C64) {
    if p.len() < q.len() {
        p.resize(q.len(), C64::new(0.0, 0.0));
    }
    for (x, y) in p.iter_mut().zip(q) {
        *x += s * y;
    }
}

fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(p: &Poly, n: u64) -> Poly {
    (0..n).fold(vec![C64::new(1.0, 0.0)], |acc, _| poly_mul(&acc, p))
}

fn eval_poly(p: &Poly, z: C64) -> (C64, C64, f64) {
    let mut v = C64::new(0.0, 0.0);
    let mut dv = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
        scale = scale * z.norm() + c.norm();
    }
    (v, dv, scale)
}

/// Finite roots of `p` by companion-matrix eigenvalues, each polished by
/// one Newton step. Returns the roots and the number of roots at infinity
/// implied by leading coefficients that vanish.
pub fn roots(p: &Poly, nominal_degree: usize) -> Result<(Vec<C64>, usize), Error> {
    let big = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut n = p.len() - 1;
    while n > 0 && p[n].norm() <= 1e-13 * big {
        n -= 1;
    }
    let at_infinity = nominal_degree - n;
    if n == 0 {
        return Ok((Vec::new(), at_infinity));
    }
    // z = s w with s balancing the constant and leading coefficients
    let low = p.iter().position(|c| c.norm() > 1e-13 * big).unwrap_or(0);
    let s = if low < n {
        (p[low].norm() / p[n].norm()).powf(1.0 / (n - low) as f64)
    } else {
        1.0
    };
    let ps: Poly = (0..=n).map(|k| p[k] * s.powi(k as i32)).collect();
    let lead = ps[n];
    let m = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -ps[i] / lead
        } else if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let eig = m
        .schur()
        .eigenvalues()
        .ok_or(Error::RootFindingFailure(f64::INFINITY))?;
    let q: Poly = p[..=n].to_vec();
    let mut out = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for &w in eig.iter() {
        let z = w * s;
        let (v, dv, _) = eval_poly(&q, z);
        let z = if dv.norm() > 0.0 { z - v / dv } else { z };
        let (v, _, scale) = eval_poly(&q, z);
        worst = worst.max(v.norm() / scale.max(f64::MIN_POSITIVE));
        out.push(z);
    }
    if worst > 1e-8 {
        return Err(Error::RootFindingFailure(worst));
    }
    Ok((out, at_infinity))
}

/// Fixed-point multipliers (`d + 1` of them) and the multipliers of the
/// second iterate at the `d^2 - d` points of exact period 2.
pub fn spectrum_of(f: &GeneralBicritical) -> Result<MultiplierSpectrum, Error> {
    // the spectrum is a conjugacy invariant, so work in whichever normal form
    // has coefficients closer to unit size
    let size = |g: &GeneralBicritical| g.a.norm().ln().abs().max(g.c.norm().ln().abs());
    let f = [f.normalized(), f.inverted().normalized()]
        .into_iter()
        .flatten()
        .min_by(|x, y| size(x).total_cmp(&size(y)))
        .unwrap_or(*f);
    spectrum_in_coordinates(&f)
}

/// The spectrum computed directly in the coordinates of `f`.
pub fn spectrum_in_coordinates(f: &GeneralBicritical) -> Result<MultiplierSpectrum, Error> {
    let d = f.degree;
    let du = d as usize;
    let zero = C64::new(0.0, 0.0);
    let mono = |k: usize, s: C64| {
        let mut p = vec![zero; k + 1];
        p[k] = s;
        p
    };
    // N = a z^d + b, D = c z^d + e
    let mut num = mono(du, f.a);
    num[0] += f.b;
    let mut den = mono(du, f.c);
    den[0] += f.e;
    let z = mono(1, C64::new(1.0, 0.0));

    let mut fixed_poly = num.clone();
    poly_add(&mut fixed_poly, &poly_mul(&z, &den), -C64::new(1.0, 0.0));
    let (fixed_roots, fixed_inf) = roots(&fixed_poly, du + 1)?;
    let mut fixed: Vec<C64> = fixed_roots
        .iter()
        .map(|&r| f.derivative(f.polish(r, 1)).unwrap_or(zero))
        .collect();
    // infinity is critical, so a fixed point there is superattracting
    fixed.extend(std::iter::repeat_n(zero, fixed_inf));

    let nd = poly_pow(&num, d);
    let dd = poly_pow(&den, d);
    let mut two = vec![zero; du * du + 2];
    poly_add(&mut two, &nd, f.a);
    poly_add(&mut two, &dd, f.b);
    poly_add(&mut two, &poly_mul(&z, &nd), -f.c);
    poly_add(&mut two, &poly_mul(&z, &dd), -f.e);
    let (mut two_roots, mut two_inf) = roots(&two, du * du + 1)?;
    for r in &fixed_roots {
        if let Some((i, _)) = two_roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
        {
            two_roots.swap_remove(i);
        }
    }
    two_inf -= fixed_inf.min(two_inf);
    let mult = |r: C64| -> C64 {
        match (f.derivative(r), f.eval(r)) {
            (Some(d1), Some(w)) => d1 * f.derivative(w).unwrap_or(zero),
            _ => zero,
        }
    };
    let mut period_two: Vec<C64> = two_roots.into_iter().map(|r| mult(f.polish(r, 2))).collect();
    period_two.extend(std::iter::repeat_n(zero, two_inf));
    Ok(MultiplierSpectrum { fixed, period_two })
}

pub fn spectrum(coeffs: &BicriticalCoefficients) -> Result<MultiplierSpectrum, Error> {
    spectrum_of(&GeneralBicritical::from(*coeffs))
}

/// Bottleneck distance: the smallest `r` such that the two multisets can be
/// matched with every pair within `r`.
pub fn multiset_distance(x: &[C64], y: &[C64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len();
    let dist = Matrix::from_fn(n, n, |(i, j)| (x[i] - y[j]).norm());
    let mut levels: Vec<f64> = dist.values().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let perfect = |r: f64| {
        let w = Matrix::from_fn(n, n, |(i, j)| (dist[(i, j)] <= r) as i64);
        kuhn_munkres(&w).0 == n as i64
    };
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect(levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

pub fn spectrum_distance(s: &MultiplierSpectrum, t: &MultiplierSpectrum) -> f64 {
    multiset_distance(&s.fixed, &t.fixed).max(multiset_distance(&s.period_two, &t.period_two))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub equivalent: bool,
    pub spectrum_distance: f64,
    /// Distance between the normal forms after the best residual symmetry.
    pub normal_form_distance: f64,
}

/// Compares two normal forms. With both critical points labelled and the
/// critical value of 0 pinned at 1, the only Möbius map preserving the
/// normal form is the identity, so the normal forms must agree; the
/// spectra are compared as an independent check.
pub fn compare(
    c1: &BicriticalCoefficients,
    c2: &BicriticalCoefficients,
    tol: f64,
) -> Result<Comparison, Error> {
    if c1.degree != c2.degree {
        return Ok(Comparison {
            equivalent: false,
            spectrum_distance: f64::INFINITY,
            normal_form_distance: f64::INFINITY,
        });
    }
    let sd = spectrum_distance(&spectrum(c1)?, &spectrum(c2)?);
    let nd = (c1.a - c2.a).norm().max((c1.b - c2.b).norm());
    Ok(Comparison {
        equivalent: sd <= tol && nd <= tol,
        spectrum_distance: sd,
        normal_form_distance: nd,
    })
}

pub fn equivalent(c1: &BicriticalCoefficients, c2: &BicriticalCoefficients, tol: f64) -> bool {
    compare(c1, c2, tol).map(|c| c.equivalent).unwrap_or(false)
}

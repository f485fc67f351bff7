//! Centers of hyperbolic components of `z^d + c`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::angle::Angle;
use crate::error::Error;
use crate::lamination::{valid_pairs, CharacteristicPair};

pub const CENTER_TOL: f64 = 1e-12;
pub const MAX_NEWTON: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolySpec {
    pub degree: u64,
    pub period: usize,
    pub parameter: C64,
    pub source_pair: Option<CharacteristicPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonTrace {
    pub iterations: usize,
    pub residual: f64,
    /// `|g(c)|` before every step.
    pub history: Vec<f64>,
}

fn powi(z: C64, n: u64) -> C64 {
    z.powu(n as u32)
}

/// `f_c^n(0)` and its derivative with respect to `c`.
pub fn critical_orbit(c: C64, degree: u64, n: usize) -> (C64, C64) {
    let mut z = C64::new(0.0, 0.0);
    let mut dz = C64::new(0.0, 0.0);
    for _ in 0..n {
        dz = powi(z, degree - 1) * dz * degree as f64 + 1.0;
        z = powi(z, degree) + c;
    }
    (z, dz)
}

/// Newton's method on `c -> f_c^period(0)` from `seed`.
pub fn center_solve(degree: u64, period: usize, seed: C64) -> Result<(PolySpec, NewtonTrace), Error> {
    if degree < 2 || period == 0 {
        return Err(Error::InvalidInput("need degree >= 2 and period >= 1".into()));
    }
    let mut c = seed;
    let mut history = Vec::new();
    for it in 0..MAX_NEWTON {
        let (g, dg) = critical_orbit(c, degree, period);
        let r = g.norm();
        history.push(r);
        if r <= CENTER_TOL {
            let found = minimal_period(c, degree, period);
            if found != period {
                return Err(Error::PeriodMismatch {
                    expected: period,
                    found,
                });
            }
            return Ok((
                PolySpec {
                    degree,
                    period,
                    parameter: c,
                    source_pair: None,
                },
                NewtonTrace {
                    iterations: it,
                    residual: r,
                    history,
                },
            ));
        }
        if !r.is_finite() {
            break;
        }
        if dg.norm() < 1e-300 {
            return Err(Error::DerivativeVanished(it));
        }
        c -= g / dg;
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Smallest `q` dividing `period` with `|f_c^q(0)|` small relative to the
/// orbit scale.
pub fn minimal_period(c: C64, degree: u64, period: usize) -> usize {
    let tol = 1e-9 * (1.0 + c.norm());
    (1..=period)
        .filter(|q| period.is_multiple_of(*q))
        .find(|&q| critical_orbit(c, degree, q).0.norm() < tol)
        .unwrap_or(period)
}

/// Residual `|f_c^period(0)|` and whether no proper divisor of the period
/// already returns within `tol`.
pub fn verify_parameter(spec: &PolySpec) -> (f64, bool) {
    let r = critical_orbit(spec.parameter, spec.degree, spec.period).0.norm();
    let tol = 1e-4f64.max(r);
    let minimal = (1..spec.period)
        .filter(|q| spec.period.is_multiple_of(*q))
        .all(|q| critical_orbit(spec.parameter, spec.degree, q).0.norm() > tol);
    (r, minimal)
}

/// All centers of exact period `period`, by simultaneous (Aberth) iteration
/// on the degree `d^(p-1)` polynomial `f_c^p(0)`.
pub fn all_centers(degree: u64, period: usize) -> Result<Vec<C64>, Error> {
    let n = degree.pow(period as u32 - 1) as usize;
    let mut zs: Vec<C64> = (0..n)
        .map(|k| {
            let r = 1.5 + 0.1 * k as f64 / n as f64;
            C64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.3) / n as f64)
        })
        .collect();
    let mut converged = false;
    for _ in 0..500 {
        let mut mx: f64 = 0.0;
        let mut next = zs.clone();
        for i in 0..n {
            let (f, df) = critical_orbit(zs[i], degree, period);
            let r = f / df;
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| (zs[i] - zs[j]).inv()).sum();
            let w = r / (1.0 - r * s);
            next[i] = zs[i] - w;
            mx = mx.max(w.norm());
        }
        zs = next;
        if mx < 1e-14 {
            converged = true;
            break;
        }
    }
    let worst = zs
        .iter()
        .map(|&c| critical_orbit(c, degree, period).0.norm())
        .fold(0.0, f64::max);
    if !converged && worst > 1e-8 {
        return Err(Error::RootFindingFailure(worst));
    }
    Ok(zs
        .into_iter()
        .filter(|&c| minimal_period(c, degree, period) == period)
        .collect())
}

/// Follows the dynamical external ray of angle `theta` for `z^d + c` from
/// potential `log 1000` down to `g_min`.
pub fn trace_ray(c: C64, degree: u64, theta: Angle, g_min: f64) -> C64 {
    let d = degree as f64;
    let log_r = 1e3f64.ln();
    let mut g = log_r;
    let mut z = C64::from_polar(1e3, std::f64::consts::TAU * theta.to_f64());
    let shrink = d.powf(1.0 / 16.0);
    let mut n = 0usize;
    let mut t_n = theta;
    while g > g_min {
        g /= shrink;
        while d.powi(n as i32) * g < log_r {
            n += 1;
            t_n = t_n.mul(degree);
        }
        let target = C64::from_polar(
            (d.powi(n as i32) * g).exp(),
            std::f64::consts::TAU * t_n.to_f64(),
        );
        for _ in 0..60 {
            let mut w = z;
            let mut dw = C64::new(1.0, 0.0);
            for _ in 0..n {
                dw = powi(w, degree - 1) * dw * d;
                w = powi(w, degree) + c;
            }
            let step = (w - target) / dw;
            z -= step;
            if step.norm() < 1e-15 * z.norm().max(1.0) {
                break;
            }
        }
    }
    z
}

/// Newton on `f^p(z) = z` from `z`.
pub fn refine_periodic(c: C64, degree: u64, period: usize, mut z: C64) -> C64 {
    for _ in 0..100 {
        let mut w = z;
        let mut dw = C64::new(1.0, 0.0);
        for _ in 0..period {
            dw = powi(w, degree - 1) * dw * degree as f64;
            w = powi(w, degree) + c;
        }
        let step = (w - z) / (dw - 1.0);
        z -= step;
        if step.norm() < 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Landing point of a periodic dynamical ray.
pub fn landing_point(c: C64, degree: u64, theta: Angle) -> Result<C64, Error> {
    let p = theta.period(degree).ok_or(Error::NotPeriodic(theta, degree))?;
    Ok(refine_periodic(c, degree, p, trace_ray(c, degree, theta, 1e-6)))
}

fn rays_meet(c: C64, degree: u64, pair: &CharacteristicPair) -> bool {
    match (landing_point(c, degree, pair.minus), landing_point(c, degree, pair.plus)) {
        (Ok(a), Ok(b)) => (a - b).norm() < 1e-8,
        _ => false,
    }
}

/// The center whose characteristic rays are `pair`: the rays co-land for
/// every parameter in the wake, and the component itself is the one not
/// lying in a smaller wake of the same period.
pub fn center_for_pair(degree: u64, pair: &CharacteristicPair) -> Result<PolySpec, Error> {
    let period = pair
        .minus
        .period(degree)
        .ok_or(Error::NotPeriodic(pair.minus, degree))?;
    let nested: Vec<CharacteristicPair> = valid_pairs(degree, period)
        .into_iter()
        .filter(|q| q != pair && pair.nests(q))
        .collect();
    let found: Vec<C64> = all_centers(degree, period)?
        .into_iter()
        .filter(|&c| rays_meet(c, degree, pair))
        .filter(|&c| !nested.iter().any(|q| rays_meet(c, degree, q)))
        .collect();
    match found.as_slice() {
        [c] => Ok(PolySpec {
            degree,
            period,
            parameter: *c,
            source_pair: Some(*pair),
        }),
        _ => Err(Error::CenterNotFound(
            pair.minus,
            pair.plus,
            format!("{} candidate centers", found.len()),
        )),
    }
}

//! Checks the combinatorial star against the realized map: the invariant
//! internal rays of the critical-orbit Fatou components are traced
//! numerically and their counterclockwise order at the cluster point is read
//! off the picture.

use bicrit::mating::{Arm, MatingSpec, Plane};
use bicrit::pullback::{initial_configuration, iterate, BicriticalCoefficients, Label, Point};
use num_complex::Complex64 as C64;

struct Map {
    f: BicriticalCoefficients,
}

impl Map {
    /// f and f' at a finite point.
    fn step(&self, z: C64) -> (C64, C64) {
        let d = self.f.degree;
        let zd = z.powu(d as u32);
        let den = self.f.b * zd + 1.0;
        let w = (self.f.a * zd + 1.0) / den;
        let dw = z.powu(d as u32 - 1) * (self.f.a - self.f.b) * d as f64 / (den * den);
        (w, dw)
    }

    fn iterate(&self, mut z: C64, n: usize) -> (C64, C64) {
        let mut dz = C64::new(1.0, 0.0);
        for _ in 0..n {
            let (w, dw) = self.step(z);
            dz *= dw;
            z = w;
        }
        (z, dz)
    }
}

/// Local coordinate vanishing at the cycle point.
fn chart(center: Point, u: C64) -> (C64, C64) {
    match center {
        Point::Finite(c) => (u - c, C64::new(1.0, 0.0)),
        Point::Infinity => (u.inv(), -(u * u).inv()),
    }
}

fn unchart(center: Point, v: C64) -> C64 {
    match center {
        Point::Finite(c) => c + v,
        Point::Infinity => v.inv(),
    }
}

/// Traces the internal ray of angle `theta` of the component centered at
/// `center` (period `p` under the map), returning points for Böttcher radii
/// increasing to 1.
fn internal_ray(map: &Map, center: Point, p: usize, theta: f64) -> Vec<C64> {
    let d = map.f.degree as i32;
    // first return near the center: chart(f^p(u)) ~ a chart(u)^d
    let eps = 1e-4;
    let u = unchart(center, C64::new(eps, 0.0));
    let (w, _) = map.iterate(u, p);
    let a = chart(center, w).0 / C64::new(eps, 0.0).powi(d);
    let alpha = a.powf(1.0 / (d as f64 - 1.0));
    let mut out = Vec::new();
    let mut rho: f64 = 0.02;
    let mut z = unchart(center, C64::from_polar(rho, std::f64::consts::TAU * theta) / alpha);
    while 1.0 - rho > 1e-7 {
        let mut m: usize = 0;
        while rho.powi(d.pow(m as u32)) > 1e-3 {
            m += 1;
        }
        // j/(d-1) is fixed under multiplication by d
        let target = C64::from_polar(rho.powi(d.pow(m as u32)), std::f64::consts::TAU * theta);
        for _ in 0..100 {
            let (w, dw) = map.iterate(z, p * m);
            let (v, dv) = chart(center, w);
            let mut step = (alpha * v - target) / (alpha * dv * dw);
            let cap = 0.1 * z.norm().max(1.0);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
            if step.norm() < 1e-14 * z.norm().max(1.0) {
                break;
            }
        }
        out.push(z);
        rho = (rho * 1.25).min(1.0 - (1.0 - rho) * 0.85);
    }
    out
}

fn fixed_by_return(map: &Map, p: usize, mut z: C64) -> C64 {
    for _ in 0..50 {
        let (w, dw) = map.iterate(z, p);
        z -= (w - z) / (dw - 1.0);
    }
    z
}

/// Where the polyline first enters the disk of radius `r` about `x`.
fn crossing(ray: &[C64], x: C64, r: f64) -> Option<C64> {
    let i = ray.iter().position(|z| (z - x).norm() < r)?;
    if i == 0 {
        return Some(ray[0]);
    }
    let (a, b) = (ray[i - 1], ray[i]);
    let (da, db) = ((a - x).norm(), (b - x).norm());
    Some(a + (b - a) * ((da - r) / (da - db)))
}

/// Geometric star at the cluster point holding the first critical arm.
pub fn geometric_star(spec: &MatingSpec) -> Vec<Label> {
    let run = iterate(initial_configuration(spec).unwrap(), 1e-13, 1000).unwrap();
    let map = Map {
        f: run.coefficients.unwrap(),
    };
    let cfg = &run.configuration;
    let p = cfg.period;
    let d = map.f.degree;
    let mut landings = Vec::new();
    for (i, &label) in cfg.labels.iter().enumerate() {
        for j in 0..d - 1 {
            let theta = j as f64 / (d - 1) as f64;
            let ray = internal_ray(&map, cfg.positions[i], p, theta);
            let end = fixed_by_return(&map, p, *ray.last().unwrap());
            landings.push((label, ray, end));
        }
    }
    let first = match spec.first_critical {
        Plane::White => Label::White(0),
        Plane::Black => Label::Black(0),
    };
    let near = |a: C64, b: C64| (a - b).norm() < 1e-6;
    let mut best: Option<Vec<Label>> = None;
    for (l0, _, x) in landings.iter().filter(|e| e.0 == first) {
        let group: Vec<_> = landings.iter().filter(|e| near(e.2, *x)).collect();
        let has_white = group.iter().any(|e| matches!(e.0, Label::White(_)));
        let has_black = group.iter().any(|e| matches!(e.0, Label::Black(_)));
        if !(has_white && has_black) || group.iter().all(|e| e.0 != *l0) {
            continue;
        }
        let spread = group
            .iter()
            .map(|e| (e.1[e.1.len() / 2] - x).norm())
            .fold(f64::INFINITY, f64::min);
        let r = spread * 0.3;
        let mut at: Vec<(f64, Label)> = group
            .iter()
            .map(|e| ((crossing(&e.1, *x, r).unwrap() - x).arg(), e.0))
            .collect();
        at.sort_by(|a, b| a.0.total_cmp(&b.0));
        let labels: Vec<Label> = at.into_iter().map(|a| a.1).collect();
        if best.as_ref().is_none_or(|b| labels.len() > b.len()) {
            best = Some(labels);
        }
    }
    best.expect("no landing group with both planes")
}

pub fn arm_label(arm: &Arm, p: usize) -> Label {
    match arm.plane {
        Plane::White => Label::White(arm.index % p),
        Plane::Black => Label::Black(arm.index % p),
    }
}

pub fn same_cycle(a: &[Label], b: &[Label]) -> bool {
    a.len() == b.len() && (0..a.len()).any(|s| (0..a.len()).all(|i| a[(i + s) % a.len()] == b[i]))
}

/// Rotation number `(num, den)` and displacement of a fixed cluster, read
/// off the geometric star: the map advances every white arm by one label.
pub fn fixed_cluster_invariants(spec: &MatingSpec) -> ((usize, usize), usize) {
    let star = geometric_star(spec);
    let (c1, c2) = match spec.first_critical {
        Plane::White => (Label::White(0), Label::Black(0)),
        Plane::Black => (Label::Black(0), Label::White(0)),
    };
    let mine: Vec<Label> = star
        .iter()
        .copied()
        .filter(|l| matches!((l, c1), (Label::White(_), Label::White(_)) | (Label::Black(_), Label::Black(_))))
        .collect();
    let m = mine.len();
    let image = match c1 {
        Label::White(_) => Label::White(1),
        Label::Black(_) => Label::Black(1),
    };
    let at = |l: Label, v: &[Label]| v.iter().position(|&x| x == l).unwrap();
    let shift = (at(image, &mine) + m - at(c1, &mine)) % m;
    let g = gcd(shift, m);
    let n = star.len();
    ((shift / g, m / g), (at(c2, &star) + n - at(c1, &star)) % n)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

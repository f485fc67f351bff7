//! Thurston pullback on the postcritical set of a bicritical branched cover,
//! in the normal form `z -> (A z^d + 1) / (B z^d + 1)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

use crate::center::{center_for_pair, critical_orbit};
use crate::error::Error;
use crate::levy::levy_check;
use crate::mating::MatingSpec;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Distinct labels closer than this (chordally) count as colliding.
pub const COLLISION_DIST: f64 = 1e-8;
/// Consecutive colliding iterations before the run is declared obstructed.
pub const COLLISION_STREAK: usize = 5;
const AMBIGUITY: f64 = 1e-9;
const SINGULAR: f64 = 1e-10;
/// Radius at which the two polynomial planes are glued in the starting configuration.
const GLUE_RADIUS: f64 = 2.0;

/// Marked point: `White(k)` is the k-th point of the critical cycle through 0,
/// `Black(k)` the k-th point of the cycle through infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    White(usize),
    Black(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::White(k) => write!(f, "w{k}"),
            Label::Black(k) => write!(f, "b{k}"),
        }
    }
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(C64),
    Infinity,
}

impl Point {
    pub fn chordal(self, other: Point) -> f64 {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(a), Point::Infinity) | (Point::Infinity, Point::Finite(a)) => {
                1.0 / (1.0 + a.norm_sqr()).sqrt()
            }
            (Point::Finite(a), Point::Finite(b)) => {
                (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
            }
        }
    }

    pub fn finite(self) -> Option<C64> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Finite(z) => [z.re, z.im].serialize(s),
            Point::Infinity => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BicriticalCoefficients {
    #[serde(rename = "A")]
    pub a: C64,
    #[serde(rename = "B")]
    pub b: C64,
    pub degree: u64,
}

impl BicriticalCoefficients {
    pub fn new(a: C64, b: C64, degree: u64) -> Result<Self, Error> {
        if (a - b).norm() <= 1e-14 * a.norm().max(1.0) {
            return Err(Error::InvalidInput("A = B gives a constant map".into()));
        }
        Ok(BicriticalCoefficients { a, b, degree })
    }

    pub fn eval(&self, z: Point) -> Point {
        match z {
            Point::Infinity => {
                if self.b == C64::new(0.0, 0.0) {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.b)
                }
            }
            Point::Finite(z) => {
                let zd = z.powu(self.degree as u32);
                let den = self.b * zd + 1.0;
                if den == C64::new(0.0, 0.0) {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * zd + 1.0) / den)
                }
            }
        }
    }

    /// The `d` solutions of `f(z) = w`.
    pub fn preimages(&self, w: Point) -> Result<Vec<Point>, C64> {
        let rhs = match w {
            Point::Infinity => -self.b.inv(),
            Point::Finite(w) => {
                let den = self.a - w * self.b;
                if den.norm() <= 1e-14 * self.a.norm().max((w * self.b).norm()).max(1.0) {
                    return Err(den);
                }
                (w - 1.0) / den
            }
        };
        if !rhs.is_finite() {
            return Ok(vec![Point::Infinity; self.degree as usize]);
        }
        let d = self.degree as f64;
        let (r, th) = rhs.to_polar();
        Ok((0..self.degree)
            .map(|j| {
                Point::Finite(C64::from_polar(
                    r.powf(1.0 / d),
                    (th + std::f64::consts::TAU * j as f64) / d,
                ))
            })
            .collect())
    }
}

/// Postcritical set with its dynamics. Index `k` is `White(k)` and index
/// `period + k` is `Black(k)`; `White(0) = 0`, `Black(0) = inf` and
/// `White(1) = 1` are pinned.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkedConfiguration {
    pub degree: u64,
    pub period: usize,
    pub labels: Vec<Label>,
    pub positions: Vec<Point>,
    /// index of the image label
    pub image: Vec<usize>,
    pub local_degree: Vec<u64>,
    pub history: Vec<Vec<Point>>,
}

impl MarkedConfiguration {
    /// Builds the configuration from the free positions `White(1..p)` and
    /// `Black(1..p)`, rescaling so that `White(1) = 1`.
    pub fn new(degree: u64, white: &[C64], black: &[C64]) -> Result<Self, Error> {
        let p = white.len() + 1;
        if black.len() + 1 != p || p < 2 {
            return Err(Error::InvalidInput(
                "need equal critical periods of at least 2".into(),
            ));
        }
        let s = white[0];
        let mut labels = Vec::with_capacity(2 * p);
        let mut positions = Vec::with_capacity(2 * p);
        for k in 0..p {
            labels.push(Label::White(k));
            positions.push(match k {
                0 => Point::Finite(C64::new(0.0, 0.0)),
                1 => Point::Finite(C64::new(1.0, 0.0)),
                _ => Point::Finite(white[k - 1] / s),
            });
        }
        for k in 0..p {
            labels.push(Label::Black(k));
            positions.push(if k == 0 {
                Point::Infinity
            } else {
                Point::Finite(black[k - 1] / s)
            });
        }
        let image = (0..2 * p).map(|i| (i / p) * p + (i % p + 1) % p).collect();
        let local_degree = (0..2 * p).map(|i| if i % p == 0 { degree } else { 1 }).collect();
        Ok(MarkedConfiguration {
            degree,
            period: p,
            labels,
            positions,
            image,
            local_degree,
            history: Vec::new(),
        })
    }

    pub fn index(&self, l: Label) -> usize {
        match l {
            Label::White(k) => k,
            Label::Black(k) => self.period + k,
        }
    }

    pub fn position(&self, l: Label) -> Point {
        self.positions[self.index(l)]
    }

    pub fn sigma(&self, l: Label) -> Label {
        self.labels[self.image[self.index(l)]]
    }

    fn is_critical(&self, i: usize) -> bool {
        self.local_degree[i] > 1
    }

    /// Closest pair of distinct labels and their chordal distance.
    pub fn closest_pair(&self) -> (Label, Label, f64) {
        let mut best = (self.labels[0], self.labels[1], f64::INFINITY);
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                let d = self.positions[i].chordal(self.positions[j]);
                if d < best.2 {
                    best = (self.labels[i], self.labels[j], d);
                }
            }
        }
        best
    }

    /// Mapping conditions `f(z) = w`, one per label other than the critical
    /// point 0 (for which `f(0) = 1` holds by the normal form).
    pub fn conditions(&self) -> Vec<(Point, Point)> {
        (1..self.positions.len())
            .map(|i| (self.positions[i], self.positions[self.image[i]]))
            .collect()
    }

    /// The two conditions fixing the map: `inf -> Black(1)` and `1 -> White(2)`.
    pub fn defining_conditions(&self) -> Vec<(Point, Point)> {
        [Label::Black(0), Label::White(1)]
            .iter()
            .map(|&l| (self.position(l), self.position(self.sigma(l))))
            .collect()
    }
}

/// Row `(a, b; r)` of the linear condition `a A + b B = r`.
fn condition_row(z: Point, w: Point, d: u64) -> Option<[C64; 3]> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let row = match (z, w) {
        (Point::Infinity, Point::Finite(w)) => [one, -w, zero],
        (Point::Infinity, Point::Infinity) => [zero, one, zero],
        (Point::Finite(z), Point::Infinity) => [zero, z.powu(d as u32), -one],
        (Point::Finite(z), Point::Finite(w)) => {
            let zd = z.powu(d as u32);
            [zd, -w * zd, w - 1.0]
        }
    };
    let n = row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    (n > 0.0 && row[..2].iter().any(|x| x.norm() > 0.0)).then(|| row.map(|x| x / n))
}

fn solve_rows(rows: &[[C64; 3]], degree: u64) -> Result<BicriticalCoefficients, Error> {
    if rows.len() < 2 {
        return Err(Error::SingularSystem(0.0));
    }
    let m = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let r = DVector::from_fn(rows.len(), |i, _| rows[i][2]);
    let svd = m.svd(true, true);
    let (smax, smin) = (svd.singular_values[0], svd.singular_values[1]);
    let (smax, smin) = (smax.max(smin), smax.min(smin));
    if !(smin > SINGULAR * smax) {
        return Err(Error::SingularSystem(if smax > 0.0 { smin / smax } else { 0.0 }));
    }
    let x = svd.solve(&r, 0.0).map_err(|_| Error::SingularSystem(smin / smax))?;
    Ok(BicriticalCoefficients {
        a: x[0],
        b: x[1],
        degree,
    })
}

/// Least-squares solution of the linear conditions `A z^d - w B z^d = w - 1`
/// (and `A = w B` at infinity) over every marked pair.
pub fn solve_coefficients(config: &MarkedConfiguration) -> Result<BicriticalCoefficients, Error> {
    solve_conditions(&config.conditions(), config.degree)
}

pub fn solve_conditions(pairs: &[(Point, Point)], degree: u64) -> Result<BicriticalCoefficients, Error> {
    let rows: Vec<[C64; 3]> = pairs
        .iter()
        .filter_map(|&(z, w)| condition_row(z, w, degree))
        .collect();
    solve_rows(&rows, degree)
}

/// Lifts every non-critical marked point through `coeffs`, choosing the
/// preimage nearest its previous position, then restores `White(1) = 1`.
pub fn pullback_step(
    config: &MarkedConfiguration,
    coeffs: &BicriticalCoefficients,
) -> Result<MarkedConfiguration, Error> {
    let mut next = config.positions.clone();
    for i in 0..config.positions.len() {
        if config.is_critical(i) {
            continue;
        }
        let w = config.positions[config.image[i]];
        let cands = coeffs
            .preimages(w)
            .map_err(|_| Error::DegenerateImage(config.labels[i]))?;
        let prev = config.positions[i];
        let mut dist: Vec<(f64, usize)> = cands
            .iter()
            .enumerate()
            .map(|(j, c)| (c.chordal(prev), j))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        if dist.len() > 1 && dist[1].0 - dist[0].0 < AMBIGUITY {
            return Err(Error::BranchAmbiguity(config.labels[i]));
        }
        next[i] = cands[dist[0].1];
    }
    let s = next[1]
        .finite()
        .filter(|s| s.norm() > 0.0 && s.is_finite())
        .ok_or(Error::DegenerateImage(Label::White(1)))?;
    for p in next.iter_mut() {
        if let Point::Finite(z) = p {
            *z /= s;
        }
    }
    next[1] = Point::Finite(C64::new(1.0, 0.0));
    let mut out = config.clone();
    out.history.push(std::mem::replace(&mut out.positions, next));
    Ok(out)
}

/// Starting configuration for a mating: the critical orbits of the two
/// polynomials, the black one carried to a neighbourhood of infinity by
/// `z -> R^2 / z`.
pub fn initial_configuration(spec: &MatingSpec) -> Result<MarkedConfiguration, Error> {
    let spec = spec.validated()?;
    let report = levy_check(&spec)?;
    if report.obstructed {
        return Err(Error::Obstructed(format!("{:?}", report.witness)));
    }
    configuration_from_pairs(&spec)
}

/// Same as [`initial_configuration`] but without the obstruction test.
pub fn configuration_from_pairs(spec: &MatingSpec) -> Result<MarkedConfiguration, Error> {
    let d = spec.degree;
    let p = spec.period();
    if p < 2 {
        return Err(Error::InvalidInput("critical period 1 has no normal form".into()));
    }
    let cw = center_for_pair(d, &spec.white)?.parameter;
    let cb = center_for_pair(d, &spec.black)?.parameter;
    configuration_from_centers(d, p, cw, cb)
}

pub fn configuration_from_centers(
    degree: u64,
    period: usize,
    cw: C64,
    cb: C64,
) -> Result<MarkedConfiguration, Error> {
    let r2 = GLUE_RADIUS * GLUE_RADIUS;
    let white: Vec<C64> = (1..period).map(|k| critical_orbit(cw, degree, k).0).collect();
    let black: Vec<C64> = (1..period)
        .map(|k| r2 / critical_orbit(cb, degree, k).0)
        .collect();
    MarkedConfiguration::new(degree, &white, &black)
}

/// Both critical points of period 2 with the two critical values joined by
/// a short arc that stays away from the critical points, so that the
/// critical values share one cluster.
pub fn same_cluster_configuration(degree: u64) -> MarkedConfiguration {
    MarkedConfiguration::new(degree, &[C64::new(1.0, 0.0)], &[C64::new(2.0, 0.0)]).unwrap()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullbackTrace {
    pub iterations: usize,
    pub max_move: Vec<f64>,
    pub converged: bool,
    pub collision: Option<(Label, Label)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullbackRun {
    pub configuration: MarkedConfiguration,
    pub coefficients: Option<BicriticalCoefficients>,
    pub trace: PullbackTrace,
}

/// Iterates the pullback. Each step uses the map determined by the two
/// defining conditions; the reported coefficients are the least-squares
/// fit over all conditions of the final configuration.
pub fn iterate(
    config: MarkedConfiguration,
    tol: f64,
    max_iter: usize,
) -> Result<PullbackRun, Error> {
    let mut cfg = config;
    let mut trace = PullbackTrace {
        iterations: 0,
        max_move: Vec::new(),
        converged: false,
        collision: None,
    };
    let mut streak = 0;
    let collided = |cfg: MarkedConfiguration, trace: PullbackTrace, pair: (Label, Label)| {
        let mut trace = trace;
        trace.collision = Some(pair);
        Ok(PullbackRun {
            configuration: cfg,
            coefficients: None,
            trace,
        })
    };
    for _ in 0..max_iter {
        let (l1, l2, sep) = cfg.closest_pair();
        streak = if sep < COLLISION_DIST { streak + 1 } else { 0 };
        if streak >= COLLISION_STREAK {
            return collided(cfg, trace, (l1, l2));
        }
        let step = solve_conditions(&cfg.defining_conditions(), cfg.degree)
            .and_then(|c| pullback_step(&cfg, &c));
        let next = match step {
            Ok(n) => n,
            Err(Error::SingularSystem(_)) | Err(Error::DegenerateImage(_)) => {
                return collided(cfg, trace, (l1, l2));
            }
            Err(Error::BranchAmbiguity(_)) if streak > 0 => {
                return collided(cfg, trace, (l1, l2));
            }
            Err(e) => return Err(e),
        };
        let mv = next
            .positions
            .iter()
            .zip(&cfg.positions)
            .map(|(a, b)| a.chordal(*b))
            .fold(0.0, f64::max);
        cfg = next;
        trace.iterations += 1;
        trace.max_move.push(mv);
        if mv <= tol {
            trace.converged = true;
            break;
        }
    }
    let coefficients = if trace.converged {
        Some(solve_coefficients(&cfg)?)
    } else {
        None
    };
    Ok(PullbackRun {
        configuration: cfg,
        coefficients,
        trace,
    })
}

/// Realizes a mating as a rational map in normal form.
pub fn realize_mating(
    spec: &MatingSpec,
    tol: f64,
    max_iter: usize,
) -> Result<(BicriticalCoefficients, PullbackTrace), Error> {
    let run = iterate(initial_configuration(spec)?, tol, max_iter)?;
    finish(run)
}

pub fn finish(run: PullbackRun) -> Result<(BicriticalCoefficients, PullbackTrace), Error> {
    if let Some((a, b)) = run.trace.collision {
        return Err(Error::Obstructed(format!("marked points {a} and {b} collide")));
    }
    match run.coefficients {
        Some(c) => Ok((c, run.trace)),
        None => Err(Error::NoConvergence {
            iterations: run.trace.iterations,
            residual: run.trace.max_move.last().copied().unwrap_or(f64::NAN),
        }),
    }
}

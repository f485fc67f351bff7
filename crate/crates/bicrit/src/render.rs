//! Basin pictures of realized maps and escape-time pictures of the
//! unicritical parameter plane.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::pullback::{BicriticalCoefficients, Label, MarkedConfiguration, Point};

/// Default cap on `pixels * max_iterations`.
pub const DEFAULT_BUDGET: u128 = 1 << 34;
const BASIN_DIST: f64 = 1e-6;

const WHITE: [u8; 3] = [255, 255, 255];
const BLACK: [u8; 3] = [0, 0, 0];
const GRAY: [u8; 3] = [128, 128, 128];
const MARKER: [u8; 3] = [220, 30, 30];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coloring {
    Basin,
    EscapeTime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Target {
    /// A bicritical map with its two superattracting cycles.
    Rational {
        coefficients: BicriticalCoefficients,
        white_cycle: Vec<Point>,
        black_cycle: Vec<Point>,
    },
    /// `z^d + c`; its basins are the attracting cycle of 0 and infinity.
    Polynomial { degree: u64, c: C64 },
}

impl Target {
    /// Cycles are read off a (converged) marked configuration.
    pub fn from_configuration(coefficients: BicriticalCoefficients, cfg: &MarkedConfiguration) -> Self {
        let pick = |white: bool| {
            cfg.labels
                .iter()
                .zip(&cfg.positions)
                .filter(|(l, _)| matches!(l, Label::White(_)) == white)
                .map(|(_, p)| *p)
                .collect()
        };
        Target::Rational {
            coefficients,
            white_cycle: pick(true),
            black_cycle: pick(false),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenderJob {
    pub target: Target,
    pub center: C64,
    pub width: f64,
    pub pixels: (usize, usize),
    pub max_iterations: usize,
    pub coloring: Coloring,
    pub markers: Vec<C64>,
}

impl RenderJob {
    pub fn validate(&self, budget: u128) -> Result<(), Error> {
        let (w, h) = self.pixels;
        if w == 0 || h == 0 || !(self.width > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "resolution, width and iteration count must be positive".into(),
            ));
        }
        let work = w as u128 * h as u128 * self.max_iterations as u128;
        if work > budget {
            return Err(Error::UnboundedJob { work, budget });
        }
        Ok(())
    }

    /// Plane coordinate of the center of pixel `(x, y)`; row 0 is the top.
    pub fn pixel_to_plane(&self, x: usize, y: usize) -> C64 {
        let (w, h) = self.pixels;
        let height = self.width * h as f64 / w as f64;
        self.center
            + C64::new(
                self.width * ((x as f64 + 0.5) / w as f64 - 0.5),
                height * (0.5 - (y as f64 + 0.5) / h as f64),
            )
    }

    pub fn plane_to_pixel(&self, z: C64) -> Option<(usize, usize)> {
        let (w, h) = self.pixels;
        let height = self.width * h as f64 / w as f64;
        let u = (z - self.center).re / self.width + 0.5;
        let v = 0.5 - (z - self.center).im / height;
        let (x, y) = ((u * w as f64).floor(), (v * h as f64).floor());
        (x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64).then_some((x as usize, y as usize))
    }
}

/// RGB raster, row-major from the top-left pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn set(&mut self, x: usize, y: usize, c: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&c);
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.data)
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.data.len() + 20);
        self.write_ppm(&mut v).unwrap();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Basin {
    White,
    Black,
    Undecided,
}

/// Attracting cycle of `z^d + c` reached from the critical point, if any
/// is found within a few thousand iterations.
pub fn polynomial_cycle(c: C64, degree: u64) -> Vec<C64> {
    let step = |z: C64| z.powu(degree as u32) + c;
    let mut z = C64::new(0.0, 0.0);
    for _ in 0..4000 {
        z = step(z);
        if z.norm() > 1e6 {
            return Vec::new();
        }
    }
    let mut cycle = vec![z];
    let mut w = step(z);
    while (w - z).norm() > 1e-9 && cycle.len() < 4000 {
        cycle.push(w);
        w = step(w);
    }
    if cycle.len() >= 4000 {
        return Vec::new();
    }
    cycle
}

/// Decides basins for one target; precomputes what the pixels share.
pub struct Classifier<'a> {
    target: &'a Target,
    cycle: Vec<C64>,
}

impl<'a> Classifier<'a> {
    pub fn new(target: &'a Target) -> Self {
        let cycle = match target {
            Target::Polynomial { degree, c } => polynomial_cycle(*c, *degree),
            Target::Rational { .. } => Vec::new(),
        };
        Classifier { target, cycle }
    }

    /// Basin of `z` and the number of iterations needed to decide it.
    pub fn classify(&self, z: Point, max_iterations: usize) -> (Basin, usize) {
        match self.target {
            Target::Rational {
                coefficients,
                white_cycle,
                black_cycle,
            } => {
                let mut w = z;
                for n in 0..=max_iterations {
                    if white_cycle.iter().any(|p| p.chordal(w) < BASIN_DIST) {
                        return (Basin::White, n);
                    }
                    if black_cycle.iter().any(|p| p.chordal(w) < BASIN_DIST) {
                        return (Basin::Black, n);
                    }
                    w = coefficients.eval(w);
                }
                (Basin::Undecided, max_iterations)
            }
            Target::Polynomial { degree, c } => {
                let Point::Finite(mut w) = z else {
                    return (Basin::Black, 0);
                };
                let escape = 2f64.max(c.norm()) + 1.0;
                for n in 0..=max_iterations {
                    if self.cycle.iter().any(|q| (q - w).norm() < BASIN_DIST) {
                        return (Basin::White, n);
                    }
                    if w.norm() > escape {
                        return (Basin::Black, n);
                    }
                    w = w.powu(*degree as u32) + c;
                }
                (Basin::Undecided, max_iterations)
            }
        }
    }
}

pub fn classify(target: &Target, z: Point, max_iterations: usize) -> (Basin, usize) {
    Classifier::new(target).classify(z, max_iterations)
}

fn shade(basin: Basin, n: usize, max: usize, coloring: Coloring) -> [u8; 3] {
    match (coloring, basin) {
        (_, Basin::Undecided) => GRAY,
        (Coloring::Basin, Basin::White) => WHITE,
        (Coloring::Basin, Basin::Black) => BLACK,
        (Coloring::EscapeTime, b) => {
            let t = (n as f64 / max as f64).sqrt();
            let v = match b {
                Basin::White => 255.0 - 100.0 * t,
                _ => 100.0 * t,
            };
            let v = v.round() as u8;
            [v, v, v]
        }
    }
}

fn draw_markers(img: &mut Image, job: &RenderJob) {
    for &m in &job.markers {
        if let Some((x, y)) = job.plane_to_pixel(m) {
            for k in -3i64..=3 {
                for (dx, dy) in [(k, 0), (0, k)] {
                    let (px, py) = (x as i64 + dx, y as i64 + dy);
                    if px >= 0 && py >= 0 && (px as usize) < img.width && (py as usize) < img.height {
                        img.set(px as usize, py as usize, MARKER);
                    }
                }
            }
        }
    }
}

fn raster<F: Fn(C64) -> [u8; 3] + Sync>(job: &RenderJob, f: F) -> Image {
    let (w, h) = job.pixels;
    let rows: Vec<Vec<u8>> = (0..h)
        .into_par_iter()
        .map(|y| (0..w).flat_map(|x| f(job.pixel_to_plane(x, y))).collect())
        .collect();
    let mut img = Image {
        width: w,
        height: h,
        data: rows.concat(),
    };
    draw_markers(&mut img, job);
    img
}

/// Dynamical-plane picture coloured by basin.
pub fn render_dynamical(job: &RenderJob, budget: u128) -> Result<Image, Error> {
    job.validate(budget)?;
    let cl = Classifier::new(&job.target);
    Ok(raster(job, |z| {
        let (b, n) = cl.classify(Point::Finite(z), job.max_iterations);
        shade(b, n, job.max_iterations, job.coloring)
    }))
}

/// Number of iterations before `0` escapes under `z^d + c`, if it does.
pub fn escape_time(c: C64, degree: u64, max_iterations: usize) -> Option<usize> {
    let mut z = C64::new(0.0, 0.0);
    for n in 0..max_iterations {
        if z.norm_sqr() > 4.0 {
            return Some(n);
        }
        z = z.powu(degree as u32) + c;
    }
    None
}

/// Escape-time picture of the degree-`d` multibrot set with markers.
pub fn render_parameter(degree: u64, job: &RenderJob, budget: u128) -> Result<Image, Error> {
    if degree < 2 {
        return Err(Error::InvalidInput("degree must be at least 2".into()));
    }
    job.validate(budget)?;
    Ok(raster(job, |c| match escape_time(c, degree, job.max_iterations) {
        None => BLACK,
        Some(n) => {
            let t = (n as f64 / job.max_iterations as f64).sqrt();
            let v = (255.0 - 200.0 * t).round() as u8;
            [v, v, v]
        }
    }))
}

//! Exact rational angles on the circle R/Z and their orbits under t -> d*t.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A rational number mod 1, always kept in lowest terms with `0 <= num < den`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Angle {
    num: u64,
    den: u64,
}

impl Angle {
    pub const ZERO: Angle = Angle { num: 0, den: 1 };

    /// Builds `num/den mod 1`. Fails on a zero denominator.
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::InvalidAngle("zero denominator".into()));
        }
        Ok(Self::reduce(num as u128, den as u128))
    }

    /// Signed numerator convenience, `-1/3` becomes `2/3`.
    pub fn from_signed(num: i64, den: u64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::InvalidAngle("zero denominator".into()));
        }
        let r = num.rem_euclid(den as i64) as u64;
        Self::new(r, den)
    }

    fn reduce(num: u128, den: u128) -> Self {
        let num = num % den;
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        assert!(
            den <= u64::MAX as u128,
            "angle denominator {den} does not fit in 64 bits"
        );
        Angle {
            num: num as u64,
            den: den as u64,
        }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `d * self mod 1`.
    pub fn mul(self, d: u64) -> Angle {
        // num is prime to den, so gcd(d * num, den) = gcd(d, den)
        let g = gcd64(d % self.den, self.den).max(1);
        let den = self.den / g;
        let num = ((d / g) as u128 * self.num as u128 % den as u128) as u64;
        Angle { num, den }
    }

    /// `d^k * self mod 1`, by repeated multiplication so intermediates stay small.
    pub fn mul_pow(self, d: u64, k: usize) -> Angle {
        (0..k).fold(self, |t, _| t.mul(d))
    }

    /// The preimage `(self + a) / d` of self under multiplication by `d`.
    pub fn preimage(self, a: u64, d: u64) -> Angle {
        let num = self.num as u128 + a as u128 * self.den as u128;
        Self::reduce(num, self.den as u128 * d as u128)
    }

    pub fn add(self, other: Angle) -> Angle {
        let (a, b) = (self.den as u128, other.den as u128);
        let g = gcd(a, b);
        let den = a / g * b;
        let num = self.num as u128 * (den / a) + other.num as u128 * (den / b);
        Self::reduce(num, den)
    }

    pub fn neg(self) -> Angle {
        if self.num == 0 {
            self
        } else {
            Angle {
                num: self.den - self.num,
                den: self.den,
            }
        }
    }

    pub fn sub(self, other: Angle) -> Angle {
        self.add(other.neg())
    }

    /// True when `self` lies strictly inside the counterclockwise arc from `a` to `b`.
    pub fn in_open_arc(self, a: Angle, b: Angle) -> bool {
        let u = self.sub(a);
        u != Angle::ZERO && u < b.sub(a)
    }

    /// Length of the counterclockwise arc from `a` to `b`, in `[0, 1)`.
    pub fn arc(a: Angle, b: Angle) -> Angle {
        b.sub(a)
    }

    /// Exact period under `t -> d*t` if the angle is periodic.
    pub fn period(self, d: u64) -> Option<usize> {
        let o = angle_orbit(self, d);
        (o.preperiod == 0).then_some(o.period)
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::InvalidAngle(format!("cannot parse {s:?} as p/q"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: u64 = p.trim().parse().map_err(|_| bad())?;
                let q: u64 = q.trim().parse().map_err(|_| bad())?;
                Angle::new(p, q)
            }
            None => {
                let p: u64 = s.parse().map_err(|_| bad())?;
                Angle::new(p, 1)
            }
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Forward orbit of an angle, split into preperiodic and periodic parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AngleOrbit {
    pub angle: Angle,
    pub degree: u64,
    pub preperiod: usize,
    pub period: usize,
    /// `orbit[k] = d^k * angle` for `k < preperiod + period`.
    pub orbit: Vec<Angle>,
}

impl AngleOrbit {
    /// `d^k * angle` for any `k`, read off the stored cycle.
    pub fn at(&self, k: usize) -> Angle {
        if k < self.orbit.len() {
            self.orbit[k]
        } else {
            self.orbit[self.preperiod + (k - self.preperiod) % self.period]
        }
    }
}

/// Orbit of `t -> d*t mod 1`. After `k` steps the reduced denominator is
/// `q / gcd(q, d^k)`, so the preperiod is the number of divisions needed to
/// make it prime to `d`, and the period is the order of `d` modulo the rest.
pub fn angle_orbit(angle: Angle, degree: u64) -> AngleOrbit {
    let mut q = angle.den;
    let mut preperiod = 0;
    loop {
        let g = gcd64(q, degree);
        if g == 1 {
            break;
        }
        q /= g;
        preperiod += 1;
    }
    let q = q as u128;
    let step = degree as u128 % q;
    let mut x = step;
    let mut period = 1;
    while x != 1 % q {
        x = x * step % q;
        period += 1;
    }
    let mut orbit = Vec::with_capacity(preperiod + period);
    let mut t = angle;
    for _ in 0..preperiod + period {
        orbit.push(t);
        t = t.mul(degree);
    }
    AngleOrbit {
        angle,
        degree,
        preperiod,
        period,
        orbit,
    }
}

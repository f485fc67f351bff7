//! Characteristic angle pairs of unicritical polynomials and the itinerary
//! test deciding which periodic external rays share a landing point.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::angle::{angle_orbit, Angle};
use crate::error::Error;

/// Two chords `(a, b)` and `(x, y)` cross in the open disk.
pub fn linked(a: Angle, b: Angle, x: Angle, y: Angle) -> bool {
    if a == x || a == y || b == x || b == y {
        return false;
    }
    x.in_open_arc(a, b) != y.in_open_arc(a, b)
}

/// Every angle `k / (d^p - 1)`. These are the angles whose period divides `p`.
pub fn universe(degree: u64, period: usize) -> Vec<Angle> {
    let n = degree.pow(period as u32) - 1;
    (0..n).map(|k| Angle::new(k, n).unwrap()).collect()
}

/// Orbit portrait of a characteristic pair: the sets of angles landing at
/// each point of the root cycle.
fn portrait(d: u64, minus: Angle, plus: Angle, p: usize) -> Option<Vec<Vec<Angle>>> {
    let orb: Vec<Angle> = (0..p).map(|k| minus.mul_pow(d, k)).collect();
    if !orb.contains(&plus) {
        return Some(
            (0..p)
                .map(|i| {
                    let mut s = vec![orb[i], plus.mul_pow(d, i)];
                    s.sort();
                    s
                })
                .collect(),
        );
    }
    for q in 1..p {
        if !p.is_multiple_of(q) {
            continue;
        }
        let mut s0: Vec<Angle> = (0..p / q).map(|k| minus.mul_pow(d, k * q)).collect();
        s0.sort();
        s0.dedup();
        if !s0.contains(&plus) {
            continue;
        }
        let n = s0.len();
        let img: Vec<Angle> = s0.iter().map(|x| x.mul_pow(d, q)).collect();
        let shift = match s0.iter().position(|x| *x == img[0]) {
            Some(s) => s,
            None => continue,
        };
        if (0..n).any(|i| s0[(i + shift) % n] != img[i]) {
            continue;
        }
        return Some(
            (0..q)
                .map(|i| {
                    let mut s: Vec<Angle> = s0.iter().map(|x| x.mul_pow(d, i)).collect();
                    s.sort();
                    s
                })
                .collect(),
        );
    }
    None
}

fn majors(d: u64, minus: Angle, plus: Angle) -> Vec<(Angle, Angle)> {
    (0..d)
        .map(|a| (plus.preimage(a, d), minus.preimage(a + 1, d)))
        .collect()
}

fn check_pair(d: u64, minus: Angle, plus: Angle) -> Result<usize, String> {
    if minus == plus {
        return Err("angles coincide".into());
    }
    let p = minus.period(d).ok_or("first angle is not periodic")?;
    if plus.period(d) != Some(p) {
        return Err("angles have different periods".into());
    }
    let sets = portrait(d, minus, plus, p).ok_or("no admissible orbit portrait")?;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i].iter().any(|x| sets[j].contains(x)) {
                return Err("portrait sets overlap".into());
            }
            for (ai, &a) in sets[i].iter().enumerate() {
                for &b in &sets[i][ai + 1..] {
                    for (xi, &x) in sets[j].iter().enumerate() {
                        for &y in &sets[j][xi + 1..] {
                            if linked(a, b, x, y) {
                                return Err("portrait chords cross".into());
                            }
                        }
                    }
                }
            }
        }
    }
    let limit = Angle::new(1, d).unwrap();
    let mut gaps: Vec<(Angle, Angle, Angle)> = Vec::new();
    for s in &sets {
        let n = s.len();
        let mut widest = Angle::ZERO;
        for k in 0..n {
            let (x, y) = (s[k], s[(k + 1) % n]);
            let g = Angle::arc(x, y);
            widest = widest.max(g);
            gaps.push((g, x, y));
        }
        // the set must fit inside an arc shorter than 1/d
        if widest != Angle::ZERO && Angle::ZERO.sub(widest) >= limit {
            return Err("portrait set spans too wide an arc".into());
        }
    }
    gaps.retain(|g| g.0 != Angle::ZERO);
    let shortest = gaps.iter().map(|g| g.0).min().ok_or("empty portrait")?;
    let hits: Vec<_> = gaps.iter().filter(|g| g.0 == shortest).collect();
    if hits.len() != 1 || hits[0].1 != minus || hits[0].2 != plus {
        return Err("the pair does not bound the characteristic arc".into());
    }
    let maj = majors(d, minus, plus);
    for s in &sets {
        for (ai, &a) in s.iter().enumerate() {
            for &b in &s[ai + 1..] {
                if maj.iter().any(|&(x, y)| linked(a, b, x, y)) {
                    return Err("portrait chord crosses a major leaf".into());
                }
            }
        }
    }
    Ok(p)
}

/// The two angles landing at the root of the characteristic Fatou component.
/// The counterclockwise arc from `minus` to `plus` is the characteristic arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[Angle; 2]", into = "[Angle; 2]")]
pub struct CharacteristicPair {
    pub minus: Angle,
    pub plus: Angle,
}

impl CharacteristicPair {
    /// Unvalidated pair, ordered as given.
    pub fn raw(minus: Angle, plus: Angle) -> Self {
        CharacteristicPair { minus, plus }
    }

    /// Validates the pair in the given degree, accepting either order.
    pub fn new(a: Angle, b: Angle, degree: u64) -> Result<Self, Error> {
        if degree < 2 {
            return Err(Error::InvalidInput("degree must be at least 2".into()));
        }
        if a == b {
            return Err(Error::DegeneratePartition);
        }
        match check_pair(degree, a, b) {
            Ok(_) => Ok(CharacteristicPair { minus: a, plus: b }),
            Err(first) => match check_pair(degree, b, a) {
                Ok(_) => Ok(CharacteristicPair { minus: b, plus: a }),
                Err(_) => Err(Error::InvalidPair(a, b, degree, first)),
            },
        }
    }

    pub fn is_valid(&self, degree: u64) -> bool {
        check_pair(degree, self.minus, self.plus).is_ok()
    }

    /// Length of the characteristic arc.
    pub fn width(&self) -> Angle {
        Angle::arc(self.minus, self.plus)
    }

    /// `other` sits strictly inside the characteristic arc of `self`.
    pub fn nests(&self, other: &CharacteristicPair) -> bool {
        *self != *other
            && other.minus.in_open_arc(self.minus, self.plus)
            && other.plus.in_open_arc(self.minus, self.plus)
    }
}

impl TryFrom<[Angle; 2]> for CharacteristicPair {
    type Error = String;

    fn try_from(v: [Angle; 2]) -> Result<Self, String> {
        if v[0] == v[1] {
            return Err(Error::DegeneratePartition.to_string());
        }
        Ok(CharacteristicPair::raw(v[0], v[1]))
    }
}

impl From<CharacteristicPair> for [Angle; 2] {
    fn from(p: CharacteristicPair) -> Self {
        [p.minus, p.plus]
    }
}

/// All characteristic pairs of exact period `period` in the given degree.
pub fn valid_pairs(degree: u64, period: usize) -> Vec<CharacteristicPair> {
    let angs: Vec<Angle> = universe(degree, period)
        .into_iter()
        .filter(|t| t.period(degree) == Some(period))
        .collect();
    let mut out = Vec::new();
    for &a in &angs {
        for &b in &angs {
            if a != b && check_pair(degree, a, b).is_ok() {
                out.push(CharacteristicPair::raw(a, b));
            }
        }
    }
    out
}

/// Pieces of the circle cut out by the major leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Piece {
    /// Arc subtended by the major leaf with index `a`.
    Outer(u32),
    /// Arc of the critical gap following major `a`.
    Gap(u32),
    /// Exactly on a cut point.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Itinerary {
    pub symbols: Vec<Piece>,
    pub preperiod: usize,
    pub period: usize,
    /// The endpoints of the major leaves, in increasing order.
    pub partition: Vec<Angle>,
}

impl Itinerary {
    pub fn has_boundary(&self) -> bool {
        self.symbols.contains(&Piece::Boundary)
    }
}

/// Lamination data of one unicritical polynomial.
#[derive(Clone, Debug)]
pub struct Lamination {
    pub degree: u64,
    pub pair: CharacteristicPair,
    pub period: usize,
    /// Period of the root point of the characteristic component.
    pub root_period: usize,
    pub majors: Vec<(Angle, Angle)>,
    gap: Angle,
    periodic_major: u32,
    root_index: HashMap<Angle, usize>,
    minus_orbit: Vec<Angle>,
}

impl Lamination {
    pub fn new(pair: CharacteristicPair, degree: u64) -> Result<Self, Error> {
        if pair.minus == pair.plus {
            return Err(Error::DegeneratePartition);
        }
        let p = check_pair(degree, pair.minus, pair.plus)
            .map_err(|e| Error::InvalidPair(pair.minus, pair.plus, degree, e))?;
        let majors = majors(degree, pair.minus, pair.plus);
        let gap = Angle::new(pair.width().num(), pair.width().den() * degree)?;
        let last = pair.plus.mul_pow(degree, p - 1);
        let periodic_major = majors.iter().position(|m| m.0 == last).unwrap() as u32;
        let minus_orbit: Vec<Angle> = (0..p).map(|k| pair.minus.mul_pow(degree, k)).collect();
        let plus_orbit: Vec<Angle> = (0..p).map(|k| pair.plus.mul_pow(degree, k)).collect();

        let mut root_period = p;
        if minus_orbit.contains(&pair.plus) {
            for q in 1..p {
                if p % q != 0 {
                    continue;
                }
                let sets: Vec<Vec<Angle>> = (0..q)
                    .map(|i| {
                        let mut s: Vec<Angle> =
                            (0..p / q).map(|k| pair.minus.mul_pow(degree, i + k * q)).collect();
                        s.sort();
                        s.dedup();
                        s
                    })
                    .collect();
                if !sets[0].contains(&pair.plus) {
                    continue;
                }
                let s = &sets[0];
                let m = s.len();
                let im: Vec<usize> = s
                    .iter()
                    .map(|x| s.iter().position(|y| *y == x.mul_pow(degree, q)).unwrap())
                    .collect();
                if (0..m).any(|i| im[i] != (i + im[0]) % m) {
                    continue;
                }
                let crossing = (0..q).any(|i| {
                    (i + 1..q).any(|j| {
                        sets[i].iter().enumerate().any(|(ai, &a)| {
                            sets[i][ai + 1..].iter().any(|&b| {
                                sets[j].iter().enumerate().any(|(xi, &x)| {
                                    sets[j][xi + 1..].iter().any(|&y| linked(a, b, x, y))
                                })
                            })
                        })
                    })
                });
                if crossing {
                    continue;
                }
                root_period = q;
                break;
            }
        }
        let mut root_index = HashMap::new();
        for (i, (&m, &pl)) in minus_orbit.iter().zip(&plus_orbit).enumerate() {
            root_index.entry(m).or_insert(i % root_period);
            root_index.entry(pl).or_insert(i % root_period);
        }
        Ok(Lamination {
            degree,
            pair,
            period: p,
            root_period,
            majors,
            gap,
            periodic_major,
            root_index,
            minus_orbit,
        })
    }

    /// Piece containing `x`. With `side = 1` (or `-1`) the limit from the
    /// counterclockwise (clockwise) side is used on cut points.
    pub fn piece(&self, x: Angle, side: i8) -> Piece {
        for (a, &(start, end)) in self.majors.iter().enumerate() {
            let len = Angle::arc(start, end);
            let u = x.sub(start);
            if (u != Angle::ZERO && u < len)
                || (u == Angle::ZERO && side > 0)
                || (u == len && side < 0)
            {
                return Piece::Outer(a as u32);
            }
            let u = x.sub(end);
            if (u != Angle::ZERO && u < self.gap)
                || (u == Angle::ZERO && side > 0)
                || (u == self.gap && side < 0)
            {
                return Piece::Gap(a as u32);
            }
        }
        Piece::Boundary
    }

    pub fn itinerary(&self, x: Angle) -> Itinerary {
        let o = angle_orbit(x, self.degree);
        let mut partition: Vec<Angle> = self.majors.iter().flat_map(|m| [m.0, m.1]).collect();
        partition.sort();
        Itinerary {
            symbols: o.orbit.iter().map(|&y| self.piece(y, 0)).collect(),
            preperiod: o.preperiod,
            period: o.period,
            partition,
        }
    }

    /// Index of the root point that `x` lands on, if `x` lands on the root cycle.
    pub fn root_index(&self, x: Angle) -> Option<usize> {
        self.root_index.get(&x).copied()
    }

    pub fn co_lands(&self, x: Angle, y: Angle) -> Result<bool, Error> {
        let px = x.period(self.degree).ok_or(Error::NotPeriodic(x, self.degree))?;
        let py = y.period(self.degree).ok_or(Error::NotPeriodic(y, self.degree))?;
        if x == y {
            return Ok(true);
        }
        let (rx, ry) = (self.root_index(x), self.root_index(y));
        if rx.is_some() || ry.is_some() {
            return Ok(rx.is_some() && rx == ry);
        }
        let n = px / gcd(px, py) * py;
        let (mut s, mut t) = (x, y);
        for _ in 0..n {
            if self.piece(s, 0) != self.piece(t, 0) {
                return Ok(false);
            }
            s = s.mul(self.degree);
            t = t.mul(self.degree);
        }
        Ok(true)
    }

    /// Symbol word of the point on the boundary of the component with orbit
    /// index `k` (`k = period` is the critical component) at internal angle `j/(d-1)`.
    pub fn arm_word(&self, k: usize, j: u64) -> Vec<Piece> {
        let d = self.degree;
        (0..self.period)
            .map(|n| {
                let m = (k + n) % self.period;
                if m == 0 {
                    Piece::Gap(((self.periodic_major as u64 + j) % d) as u32)
                } else {
                    self.piece(self.minus_orbit[m - 1], 1)
                }
            })
            .collect()
    }

    /// Rays in `universe` landing at the endpoint of internal ray `j/(d-1)` of
    /// component `k`.
    pub fn arm_rays(&self, k: usize, j: u64, universe: &[Angle]) -> Vec<Angle> {
        if j == 0 {
            let want = (k + self.root_period - 1) % self.root_period;
            return universe
                .iter()
                .copied()
                .filter(|&x| self.root_index(x) == Some(want))
                .collect();
        }
        let word = self.arm_word(k, j);
        universe
            .iter()
            .copied()
            .filter(|&x| {
                self.root_index(x).is_none() && {
                    let it = self.itinerary(x);
                    it.preperiod == 0 && it.symbols == word
                }
            })
            .collect()
    }

    /// `d^k * minus`.
    pub fn minus_at(&self, k: usize) -> Angle {
        self.minus_orbit[k % self.period]
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Itinerary of `angle` relative to the partition cut by the majors of `pair`.
pub fn itinerary(angle: Angle, pair: (Angle, Angle), degree: u64) -> Result<Itinerary, Error> {
    if pair.0 == pair.1 {
        return Err(Error::DegeneratePartition);
    }
    let p = CharacteristicPair::new(pair.0, pair.1, degree)?;
    Ok(Lamination::new(p, degree)?.itinerary(angle))
}

/// Whether the external rays at `a` and `b` land together for the polynomial
/// with characteristic pair `pair`.
pub fn co_lands(a: Angle, b: Angle, pair: (Angle, Angle), degree: u64) -> Result<bool, Error> {
    if pair.0 == pair.1 {
        return Err(Error::DegeneratePartition);
    }
    let p = CharacteristicPair::new(pair.0, pair.1, degree)?;
    Lamination::new(p, degree)?.co_lands(a, b)
}

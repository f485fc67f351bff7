//! Formal matings of two unicritical polynomials: ray-equivalence classes,
//! cluster cycles and their combinatorial invariants.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::Error;
use crate::lamination::{universe, CharacteristicPair, Lamination, Piece};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    White,
    Black,
}

impl Plane {
    pub fn other(self) -> Plane {
        match self {
            Plane::White => Plane::Black,
            Plane::Black => Plane::White,
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plane::White => "white",
            Plane::Black => "black",
        })
    }
}

fn default_first() -> Plane {
    Plane::White
}

/// Degree plus the characteristic pairs of the two polynomials to be mated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatingSpec {
    pub degree: u64,
    pub white: CharacteristicPair,
    pub black: CharacteristicPair,
    #[serde(default = "default_first")]
    pub first_critical: Plane,
}

impl MatingSpec {
    /// Validates both pairs (normalizing their order) and checks the periods agree.
    pub fn new(
        degree: u64,
        white: (Angle, Angle),
        black: (Angle, Angle),
        first_critical: Plane,
    ) -> Result<Self, Error> {
        let w = CharacteristicPair::new(white.0, white.1, degree)?;
        let b = CharacteristicPair::new(black.0, black.1, degree)?;
        let pw = w.minus.period(degree).unwrap();
        let pb = b.minus.period(degree).unwrap();
        if pw != pb {
            return Err(Error::InvalidInput(format!(
                "critical orbits have different periods ({pw} and {pb})"
            )));
        }
        Ok(MatingSpec {
            degree,
            white: w,
            black: b,
            first_critical,
        })
    }

    /// Parses `"p/q"` strings; convenient in tests and examples.
    pub fn parse(degree: u64, white: [&str; 2], black: [&str; 2], first: Plane) -> Result<Self, Error> {
        let p = |s: &str| s.parse::<Angle>();
        MatingSpec::new(degree, (p(white[0])?, p(white[1])?), (p(black[0])?, p(black[1])?), first)
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let raw: MatingSpec =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        raw.validated()
    }

    /// Re-runs validation on a deserialized value.
    pub fn validated(&self) -> Result<Self, Error> {
        MatingSpec::new(
            self.degree,
            (self.white.minus, self.white.plus),
            (self.black.minus, self.black.plus),
            self.first_critical,
        )
    }

    pub fn period(&self) -> usize {
        self.white.minus.period(self.degree).unwrap()
    }

    pub fn pair(&self, plane: Plane) -> CharacteristicPair {
        match plane {
            Plane::White => self.white,
            Plane::Black => self.black,
        }
    }

    /// Same mating with the other critical point declared first.
    pub fn relabeled(&self) -> MatingSpec {
        MatingSpec {
            first_critical: self.first_critical.other(),
            ..self.clone()
        }
    }
}

/// Which critical orbit an arm or marked point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orbit {
    First,
    Second,
}

/// Angle-zero internal ray of the Fatou component `index` of one critical
/// orbit. `index == period` is the critical component itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Arm {
    pub orbit: Orbit,
    pub plane: Plane,
    pub index: usize,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.plane == Plane::White { "w" } else { "b" }, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RayClass {
    pub members: Vec<(Plane, Angle)>,
    pub closes_cluster: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarModel {
    pub cluster_period: usize,
    /// Arms in counterclockwise order around the cluster point.
    pub arms: Vec<Arm>,
    pub first_critical_arm: usize,
}

/// Rotation number `num/den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rho {
    pub num: usize,
    pub den: usize,
}

impl Rho {
    pub fn new(num: usize, den: usize) -> Rho {
        let g = gcd(num, den).max(1);
        Rho {
            num: num / g,
            den: den / g,
        }
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Rho {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterData {
    pub period: usize,
    pub rho: Rho,
    /// Missing when the image of the second critical point does not return
    /// to the cluster of the first one.
    pub delta: Option<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Landing {
    Root(usize),
    Word(Vec<Piece>),
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// One landing point in one plane together with all universe rays landing there.
#[derive(Clone, Debug)]
struct Vertex {
    side: usize,
    rays: Vec<Angle>,
}

/// Combinatorial model of a formal mating. Side 0 is the plane carrying the
/// first critical point.
pub struct MatingModel {
    pub degree: u64,
    pub period: usize,
    planes: [Plane; 2],
    lam: [Lamination; 2],
    universe: Vec<Angle>,
    index: HashMap<Angle, usize>,
    vertices: Vec<Vertex>,
    /// vertex id of `(side, universe index)`
    vertex_of: [Vec<usize>; 2],
    /// class id of each vertex
    class_of: Vec<usize>,
    n_classes: usize,
}

/// Cluster classes for one choice of internal ray normalization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterCycle {
    /// Internal angles `j/(d-1)` used for the arms of each side.
    pub internal: (u64, u64),
    /// Stars in orbit order: `stars[0]` holds the first critical arm and
    /// the map sends `stars[i]` to `stars[(i + 1) % n]`.
    pub stars: Vec<Vec<Arm>>,
}

impl MatingModel {
    pub fn new(spec: &MatingSpec) -> Result<Self, Error> {
        let spec = spec.validated()?;
        let d = spec.degree;
        let p = spec.period();
        let planes = [spec.first_critical, spec.first_critical.other()];
        let lam = [
            Lamination::new(spec.pair(planes[0]), d)?,
            Lamination::new(spec.pair(planes[1]), d)?,
        ];
        let universe = universe(d, p);
        let index: HashMap<Angle, usize> =
            universe.iter().enumerate().map(|(i, &t)| (t, i)).collect();

        let mut vertices = Vec::new();
        let mut vertex_of = [vec![0; universe.len()], vec![0; universe.len()]];
        for side in 0..2 {
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            let mut keys: HashMap<Landing, usize> = HashMap::new();
            for (i, &t) in universe.iter().enumerate() {
                let key = match lam[side].root_index(t) {
                    Some(r) => Landing::Root(r),
                    None => {
                        let mut w = Vec::with_capacity(p);
                        let mut s = t;
                        for _ in 0..p {
                            w.push(lam[side].piece(s, 0));
                            s = s.mul(d);
                        }
                        Landing::Word(w)
                    }
                };
                let n = keys.len();
                let g = *keys.entry(key).or_insert(n);
                groups.entry(g).or_default().push(i);
            }
            for members in groups.values() {
                let id = vertices.len();
                let mut rays: Vec<Angle> = members.iter().map(|&i| universe[i]).collect();
                rays.sort();
                for &i in members {
                    vertex_of[side][i] = id;
                }
                vertices.push(Vertex { side, rays });
            }
        }

        let mut uf = UnionFind::new(vertices.len());
        for (i, &t) in universe.iter().enumerate() {
            let j = index[&t.neg()];
            uf.union(vertex_of[0][i], vertex_of[1][j]);
        }
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut class_of = vec![0; vertices.len()];
        for (v, c) in class_of.iter_mut().enumerate() {
            let r = uf.find(v);
            let n = ids.len();
            *c = *ids.entry(r).or_insert(n);
        }
        Ok(MatingModel {
            degree: d,
            period: p,
            planes,
            lam,
            universe,
            index,
            vertices,
            vertex_of,
            class_of,
            n_classes: ids.len(),
        })
    }

    fn vertex(&self, side: usize, t: Angle) -> usize {
        self.vertex_of[side][self.index[&t]]
    }

    fn members(&self, class: usize) -> Vec<(Plane, Angle)> {
        let mut out: Vec<(Plane, Angle)> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(v, _)| self.class_of[*v] == class)
            .flat_map(|(_, vx)| vx.rays.iter().map(move |&t| (self.planes[vx.side], t)))
            .collect();
        out.sort();
        out
    }

    /// Classes whose landing-point graph contains a loop.
    pub fn loops(&self) -> Vec<Vec<(Plane, Angle)>> {
        let mut verts = vec![0usize; self.n_classes];
        let mut edges = vec![0usize; self.n_classes];
        for v in 0..self.vertices.len() {
            verts[self.class_of[v]] += 1;
        }
        // every universe angle of side 0 is one gluing edge
        for i in 0..self.universe.len() {
            edges[self.class_of[self.vertex_of[0][i]]] += 1;
        }
        (0..self.n_classes)
            .filter(|&c| edges[c] >= verts[c])
            .map(|c| self.members(c))
            .collect()
    }

    fn arm_vertex(&self, side: usize, k: usize, j: u64) -> Option<usize> {
        let rays = self.lam[side].arm_rays(k, j, &self.universe);
        rays.first().map(|&t| self.vertex(side, t))
    }

    fn arm(&self, side: usize, k: usize) -> Arm {
        Arm {
            orbit: if side == 0 { Orbit::First } else { Orbit::Second },
            plane: self.planes[side],
            index: k,
        }
    }

    /// Cluster classes for internal normalization `(j0, j1)`, as
    /// `(class, arms)` pairs in class order.
    fn clusters_for(&self, j: (u64, u64)) -> Vec<(usize, Vec<(usize, Arm)>)> {
        let mut by_class: BTreeMap<usize, Vec<(usize, Arm)>> = BTreeMap::new();
        for (side, js) in [(0, j.0), (1, j.1)] {
            for k in 1..=self.period {
                if let Some(v) = self.arm_vertex(side, k, js) {
                    by_class.entry(self.class_of[v]).or_default().push((v, self.arm(side, k)));
                }
            }
        }
        by_class
            .into_iter()
            .filter(|(_, arms)| {
                arms.iter().any(|a| a.1.orbit == Orbit::First)
                    && arms.iter().any(|a| a.1.orbit == Orbit::Second)
            })
            .collect()
    }

    /// Counterclockwise order of the arms around the collapsed class.
    fn star(&self, class: usize, arms: &[(usize, Arm)]) -> Vec<Arm> {
        let mut at: HashMap<(usize, usize), Arm> = HashMap::new();
        for &(v, arm) in arms {
            let side = if arm.orbit == Orbit::First { 0 } else { 1 };
            let g = &self.vertices[v].rays;
            let m = g.len();
            let r = self.lam[side].minus_at(arm.index - 1);
            for i in 0..m {
                let a = g[i];
                let b = g[(i + 1) % m];
                let len = if m == 1 { None } else { Some(Angle::arc(a, b)) };
                let u = r.sub(a);
                if len.is_none_or(|l| u < l) {
                    at.insert((v, i), arm);
                    break;
                }
            }
        }
        let start_v = (0..self.vertices.len())
            .find(|&v| self.class_of[v] == class)
            .unwrap();
        let start = (start_v, 0);
        let mut cur = start;
        let mut order = Vec::new();
        loop {
            if let Some(a) = at.get(&cur) {
                order.push(*a);
            }
            let (v, i) = cur;
            let vx = &self.vertices[v];
            let next_ray = vx.rays[(i + 1) % vx.rays.len()];
            let y = next_ray.neg();
            let w = self.vertex(1 - vx.side, y);
            let j = self.vertices[w].rays.iter().position(|&t| t == y).unwrap();
            cur = (w, j);
            if cur == start {
                break;
            }
        }
        order
    }

    /// The first internal normalization (in lexicographic order) producing a cluster cycle.
    pub fn cluster_cycle(&self) -> Result<ClusterCycle, Error> {
        let d = self.degree;
        for j0 in 0..d - 1 {
            for j1 in 0..d - 1 {
                let cl = self.clusters_for((j0, j1));
                if cl.is_empty() {
                    continue;
                }
                let p = self.period;
                let home = cl
                    .iter()
                    .position(|(_, arms)| arms.iter().any(|a| a.1 == self.arm(0, p)));
                let Some(home) = home else { continue };
                let n = p / cl[home].1.iter().filter(|a| a.1.orbit == Orbit::First).count();
                // order the stars along the cycle: star i holds first arms k = i (mod n)
                let mut stars = vec![Vec::new(); n];
                for (class, arms) in &cl {
                    let Some(k) = arms.iter().find(|a| a.1.orbit == Orbit::First).map(|a| a.1.index)
                    else {
                        continue;
                    };
                    stars[k % n] = self.star(*class, arms);
                }
                return Ok(ClusterCycle {
                    internal: (j0, j1),
                    stars,
                });
            }
        }
        Err(Error::NoCluster)
    }

    /// Classes through the landing points of the internal rays of the
    /// critical-orbit components.
    pub fn ray_classes(&self) -> Vec<RayClass> {
        let closing: Vec<usize> = match self.cluster_cycle() {
            Ok(c) => {
                let j = c.internal;
                self.clusters_for(j).into_iter().map(|c| c.0).collect()
            }
            Err(_) => Vec::new(),
        };
        let mut examined = vec![false; self.n_classes];
        for side in 0..2 {
            for j in 0..self.degree - 1 {
                for k in 1..=self.period {
                    if let Some(v) = self.arm_vertex(side, k, j) {
                        examined[self.class_of[v]] = true;
                    }
                }
            }
        }
        (0..self.n_classes)
            .filter(|&c| examined[c])
            .map(|c| RayClass {
                members: self.members(c),
                closes_cluster: closing.contains(&c),
            })
            .collect()
    }
}

/// Ray-equivalence classes (over angles with denominator `d^p - 1`) that
/// contain an arm of either critical orbit.
pub fn ray_classes(spec: &MatingSpec) -> Result<Vec<RayClass>, Error> {
    Ok(MatingModel::new(spec)?.ray_classes())
}

fn alternates(arms: &[Arm]) -> bool {
    let n = arms.len();
    n.is_multiple_of(2) && (0..n).all(|i| arms[i].orbit != arms[(i + 1) % n].orbit)
}

/// Cluster period, rotation number and critical displacement, plus the star
/// of the cluster holding the first critical point.
pub fn cluster_data(spec: &MatingSpec) -> Result<(ClusterData, StarModel), Error> {
    let model = MatingModel::new(spec)?;
    if let Some(class) = model.loops().first() {
        return Err(Error::Obstructed(format!(
            "ray class through {}{} contains a loop",
            if class[0].0 == Plane::White { "w" } else { "b" },
            class[0].1
        )));
    }
    let cycle = model.cluster_cycle()?;
    cluster_data_from(&model, &cycle)
}

pub fn cluster_data_from(
    model: &MatingModel,
    cycle: &ClusterCycle,
) -> Result<(ClusterData, StarModel), Error> {
    let p = model.period;
    let n = cycle.stars.len();
    let star = &cycle.stars[0];
    if !alternates(star) {
        return Err(Error::MalformedConfiguration(format!(
            "arms do not alternate: {}",
            star.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
        )));
    }
    let c1 = model.arm(0, p);
    let pos = |a: Arm| star.iter().position(|&x| x == a);
    let first: Vec<Arm> = star.iter().copied().filter(|a| a.orbit == Orbit::First).collect();
    let m = first.len();
    let missing = |a: Arm| Error::MalformedConfiguration(format!("arm {a} missing from the star"));
    let at = |a: Arm| first.iter().position(|&x| x == a).ok_or_else(|| missing(a));
    // first return sends component k to k + n
    let next = model.arm(0, n.min(p));
    let shift = (at(next)? + m - at(c1)?) % m;
    let rho = Rho::new(shift, m);

    let i0 = pos(c1).ok_or_else(|| missing(c1))?;
    let target = if n == 1 { model.arm(1, p) } else { model.arm(1, 1) };
    let delta = pos(target).map(|i| (i + star.len() - i0) % star.len());
    let rotated: Vec<Arm> = (0..star.len()).map(|k| star[(i0 + k) % star.len()]).collect();
    Ok((
        ClusterData {
            period: n,
            rho,
            delta,
        },
        StarModel {
            cluster_period: n,
            arms: rotated,
            first_critical_arm: 0,
        },
    ))
}

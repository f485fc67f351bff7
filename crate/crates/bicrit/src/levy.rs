//! Levy-cycle obstructions for formal matings with a cluster cycle, and the
//! twist-count arithmetic for annulus homeomorphisms.

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::Error;
use crate::mating::{MatingModel, MatingSpec, Orbit, Plane};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyWitness {
    /// A ray class whose landing graph contains a loop; a curve around the
    /// loop separates the postcritical set and maps to itself.
    RayLoop { class: Vec<(Plane, Angle)> },
    /// The boundary of a neighbourhood of the given cluster star, which
    /// contains both critical points.
    ClusterBoundary { cluster: usize, period: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevyReport {
    pub obstructed: bool,
    pub witness: Option<LevyWitness>,
}

impl LevyReport {
    fn clear() -> Self {
        LevyReport {
            obstructed: false,
            witness: None,
        }
    }
}

/// Placement data of a cluster cycle. Clusters are indexed along the
/// cycle, `first_cluster` and `second_cluster` hold the two critical points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfiguration {
    pub degree: u64,
    pub period: usize,
    pub arms_per_orbit: usize,
    pub first_cluster: usize,
    pub second_cluster: usize,
}

impl ClusterConfiguration {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::MalformedConfiguration(m.into()));
        if self.degree < 2 {
            return bad("degree must be at least 2");
        }
        if self.period == 0 {
            return bad("cluster period must be positive");
        }
        if self.arms_per_orbit == 0 {
            return bad("each cluster needs at least one arm per critical orbit");
        }
        if self.first_cluster >= self.period || self.second_cluster >= self.period {
            return bad("critical cluster index out of range");
        }
        Ok(())
    }
}

pub fn levy_check_configuration(cfg: &ClusterConfiguration) -> Result<LevyReport, Error> {
    cfg.validate()?;
    if cfg.period == 2 && cfg.first_cluster == cfg.second_cluster {
        return Ok(LevyReport {
            obstructed: true,
            witness: Some(LevyWitness::ClusterBoundary {
                cluster: cfg.first_cluster,
                period: cfg.period,
            }),
        });
    }
    Ok(LevyReport::clear())
}

/// Cluster configuration of a mating, or `None` when there is no cluster cycle.
pub fn configuration(spec: &MatingSpec) -> Result<Option<ClusterConfiguration>, Error> {
    let model = MatingModel::new(spec)?;
    configuration_of(&model)
}

fn configuration_of(model: &MatingModel) -> Result<Option<ClusterConfiguration>, Error> {
    let cycle = match model.cluster_cycle() {
        Ok(c) => c,
        Err(Error::NoCluster) => return Ok(None),
        Err(e) => return Err(e),
    };
    let p = model.period;
    let holding = |orbit: Orbit| {
        cycle
            .stars
            .iter()
            .position(|s| s.iter().any(|a| a.orbit == orbit && a.index == p))
    };
    let first = holding(Orbit::First).ok_or(Error::NoCluster)?;
    let second = holding(Orbit::Second).ok_or(Error::NoCluster)?;
    let arms = cycle.stars[first]
        .iter()
        .filter(|a| a.orbit == Orbit::First)
        .count();
    Ok(Some(ClusterConfiguration {
        degree: model.degree,
        period: cycle.stars.len(),
        arms_per_orbit: arms,
        first_cluster: first,
        second_cluster: second,
    }))
}

/// Obstruction test for a mating: loops in a ray class, then the
/// same-cluster period-2 configuration.
pub fn levy_check(spec: &MatingSpec) -> Result<LevyReport, Error> {
    let model = MatingModel::new(spec)?;
    if let Some(class) = model.loops().into_iter().next() {
        return Ok(LevyReport {
            obstructed: true,
            witness: Some(LevyWitness::RayLoop { class }),
        });
    }
    match configuration_of(&model)? {
        Some(cfg) => levy_check_configuration(&cfg),
        None => Ok(LevyReport::clear()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwistSolution {
    pub solvable: bool,
    pub k: Option<i64>,
}

/// Solves `discrepancy = d*k - k` for the twist count `k`.
pub fn twist_solvable(degree: u64, discrepancy: i64) -> TwistSolution {
    let m = degree as i64 - 1;
    if discrepancy % m == 0 {
        TwistSolution {
            solvable: true,
            k: Some(discrepancy / m),
        }
    } else {
        TwistSolution {
            solvable: false,
            k: None,
        }
    }
}

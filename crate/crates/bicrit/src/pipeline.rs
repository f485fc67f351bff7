//! Obstruction test, combinatorics, realization and invariants in one run.

use serde::Serialize;

use crate::error::Error;
use crate::levy::{levy_check, LevyReport};
use crate::mating::{cluster_data, ClusterData, MatingSpec, StarModel};
use crate::pullback::{
    finish, initial_configuration, iterate, BicriticalCoefficients, MarkedConfiguration,
    PullbackTrace,
};
use crate::spectrum::{spectrum, MultiplierSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    LevyCheck,
    ClusterData,
    Realize,
    Spectrum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageError {
    pub stage: Stage,
    #[serde(serialize_with = "as_string")]
    pub error: Error,
}

fn as_string<S: serde::Serializer>(e: &Error, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(e)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub spec: MatingSpec,
    pub levy: Option<LevyReport>,
    pub cluster: Option<ClusterData>,
    pub star: Option<StarModel>,
    pub coefficients: Option<BicriticalCoefficients>,
    pub trace: Option<PullbackTrace>,
    pub spectrum: Option<MultiplierSpectrum>,
    pub failure: Option<StageError>,
    #[serde(skip)]
    pub configuration: Option<MarkedConfiguration>,
}

impl PipelineReport {
    pub fn obstructed(&self) -> bool {
        self.levy.as_ref().is_some_and(|l| l.obstructed)
            || matches!(&self.failure, Some(StageError { error: Error::Obstructed(_), .. }))
    }
}

pub fn pipeline(spec: &MatingSpec, tol: f64, max_iter: usize) -> PipelineReport {
    let mut report = PipelineReport {
        spec: spec.clone(),
        levy: None,
        cluster: None,
        star: None,
        coefficients: None,
        trace: None,
        spectrum: None,
        failure: None,
        configuration: None,
    };
    let fail = |report: &mut PipelineReport, stage, error| {
        report.failure = Some(StageError { stage, error });
    };
    match levy_check(spec) {
        Ok(l) => {
            let stop = l.obstructed;
            report.levy = Some(l);
            if stop {
                return report;
            }
        }
        Err(e) => {
            fail(&mut report, Stage::LevyCheck, e);
            return report;
        }
    }
    match cluster_data(spec) {
        Ok((c, s)) => {
            report.cluster = Some(c);
            report.star = Some(s);
        }
        // a mating without a cluster cycle can still be realized
        Err(Error::NoCluster) => {}
        Err(e) => {
            fail(&mut report, Stage::ClusterData, e);
            return report;
        }
    }
    let run = match initial_configuration(spec).and_then(|c| iterate(c, tol, max_iter)) {
        Ok(r) => r,
        Err(e) => {
            fail(&mut report, Stage::Realize, e);
            return report;
        }
    };
    report.trace = Some(run.trace.clone());
    report.configuration = Some(run.configuration.clone());
    let coeffs = match finish(run) {
        Ok((c, _)) => c,
        Err(e) => {
            fail(&mut report, Stage::Realize, e);
            return report;
        }
    };
    report.coefficients = Some(coeffs);
    match spectrum(&coeffs) {
        Ok(s) => report.spectrum = Some(s),
        Err(e) => fail(&mut report, Stage::Spectrum, e),
    }
    report
}

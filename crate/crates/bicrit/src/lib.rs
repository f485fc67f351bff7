//! Combinatorics and numerics of bicritical rational maps: characteristic
//! angles, formal matings and their cluster cycles, hyperbolic centers,
//! Thurston pullback, conjugacy invariants and basin pictures.

pub mod angle;
pub mod center;
pub mod error;
pub mod lamination;
pub mod levy;
pub mod mating;
pub mod pipeline;
pub mod pullback;
pub mod render;
pub mod spectrum;

pub use angle::{angle_orbit, Angle, AngleOrbit};
pub use error::Error;
pub use lamination::{co_lands, itinerary, CharacteristicPair, Itinerary, Lamination, Piece};
pub use mating::{cluster_data, ray_classes, ClusterData, MatingSpec, Plane, RayClass, StarModel};
pub use center::{center_solve, verify_parameter, PolySpec};
pub use levy::{levy_check, levy_check_configuration, twist_solvable, ClusterConfiguration, LevyReport};
pub use pipeline::{pipeline, PipelineReport};
pub use pullback::{
    initial_configuration, pullback_step, realize_mating, solve_coefficients, BicriticalCoefficients,
    Label, MarkedConfiguration, Point, PullbackTrace,
};
pub use render::{render_dynamical, render_parameter, Image, RenderJob};
pub use spectrum::{compare, equivalent, spectrum, MultiplierSpectrum};

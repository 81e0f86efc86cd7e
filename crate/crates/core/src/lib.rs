//! Exact rank-one cutting-and-stacking transformations.
//!
//! [`column`] materializes constructions and computes height and descendant
//! sets, [`tower`] simulates the map on points and finite unions of levels,
//! [`analysis`] turns finite stages into certificates, [`gallery`] holds the
//! named constructions and [`oracle`] the independent brute-force checks.

pub mod analysis;
pub mod column;
pub mod error;
pub mod gallery;
pub mod intset;
pub mod oracle;
pub mod tower;

pub use column::{
    Budget, BuildContext, BuiltStage, HeightSet, Property, RankOneSpec, Spacers, Stage, StageRule,
    StageSpec,
};
pub use error::{Error, Result};
pub use gallery::Builder;
pub use intset::{sum_set, IntSet};
pub use tower::{LevelSet, Measure, Point};

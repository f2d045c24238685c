//! A virtual nadir camera for building geotagged aerial-image datasets from
//! static map imagery.
//!
//! The crate plans capture waypoints from a flight altitude and camera model
//! ([`mission`]), converts between ground meters, Web Mercator zoom levels and
//! UTM ([`geomath`], [`geodesy`]), acquires images ([`provider`]), post-processes
//! and scores them by entropy ([`imaging`]) and curates the result on disk
//! ([`dataset`]). [`pipeline::run_mission`] ties the steps together.

pub mod dataset;
pub mod error;
pub mod exec;
pub mod geodesy;
pub mod geomath;
pub mod imaging;
pub mod mission;
pub mod pipeline;
pub mod provider;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use geomath::{CameraSpec, GeoBBox, GeoPoint, ZoomSpec};
pub use mission::{MapType, MissionPlan, MissionSpec, Waypoint};

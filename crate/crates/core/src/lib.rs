//! Site-specific UWB propagation simulator for rack warehouses.
//!
//! The pipeline is: [`geometry::generate_warehouse`] builds the scene,
//! [`tracer::Tracer`] finds propagation paths for a transmitter,
//! [`band`] turns them into band-averaged received power and [`coverage`]
//! sweeps a receiver grid and summarizes it. [`scenario`] and [`output`]
//! handle configuration files and result encodings.

pub mod band;
pub mod coverage;
pub mod em;
pub mod error;
pub mod geometry;
pub mod output;
pub mod scenario;
pub mod tracer;

pub use error::{Error, Result};

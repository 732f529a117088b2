//! Finite-element model of a clamped piezoelectric bimorph plate harvester.

pub mod assembly;
pub mod clustering;
pub mod config;
pub mod discretization;
pub mod error;
pub mod events;
pub mod geometry;
pub mod materials;
pub mod frf;
pub mod modal;
pub mod nelder_mead;
pub mod optimize;
pub mod pso;
pub mod simulate;
pub mod sweep;
pub mod synthetic;

pub use error::{Error, Result};

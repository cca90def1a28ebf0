//! Exact rational geometry for extremality, stationarity and dual certificates
//! of set families and set-valued mappings.

pub mod error;
pub mod admissible;
pub mod certificate;
pub mod cone;
pub mod config;
pub mod corpus;
pub mod family;
pub mod interval;
pub mod linalg;
pub mod levelset;
pub mod lp;
pub mod mapping;
pub mod polyhedron;
pub mod pq;
pub mod preference;
pub mod problem;
pub mod qc;
pub mod rational;
pub mod scalar;
pub mod search;
pub mod set;
pub mod stationarity;
pub mod system;
pub mod vector;

pub use error::{CoreError, Result};
pub use rational::{q, ExtRat, Rat};
pub use vector::{NormContext, Vector};

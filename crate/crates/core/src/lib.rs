//! Simulator for a multi-tenant quantum mainframe built on a 3D topological
//! cluster-state lattice.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: cells, rectangular regions and the global partition map.
//! - [`gf2`]: bit-packed GF(2) linear algebra.
//! - [`stabilizer`]: graph-state tableau simulation plus a statevector oracle.
//! - [`resources`]: chip counts, logical capacity and the operations budget.
//! - [`allocator`]: the multi-tenant mainframe and its session lifecycle.
//! - [`protocol`]: trusted and secure session protocols and their wire formats.
//! - [`runner`]: scenarios, reports and the verification suites behind the CLI.

pub mod allocator;
pub mod geometry;
pub mod gf2;
pub mod protocol;
pub mod resources;
pub mod runner;
pub mod stabilizer;

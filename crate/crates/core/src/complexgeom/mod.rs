//! Complex-plane primitives shared by the whole pipeline: Moebius disk
//! automorphisms, the lattice disk grid, and Beltrami coefficients.

mod grid;
mod moebius;

pub use grid::{
    beltrami_from_map, compose_beltrami, dilation, face_derivatives, BeltramiField, DiskGrid,
};
pub use moebius::Moebius;

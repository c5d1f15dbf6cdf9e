#![allow(dead_code)]

use dsy_core::cascade::CascadeTree;
use dsy_core::samplers::RngStream;
use dsy_core::solution::{InitialData, RadialProfile};
use dsy_core::Params;

pub use dsy_core::checks::shapes;

pub fn tree_with_shape(p: &Params, internal: &[String], s: &mut RngStream) -> CascadeTree {
    dsy_core::checks::tree_with_shape(p, internal, s).unwrap()
}

pub fn gaussian_vortex() -> InitialData {
    InitialData::VortexRadial { profile: RadialProfile::Gaussian { amplitude: 1.5, width: 2.0 } }
}

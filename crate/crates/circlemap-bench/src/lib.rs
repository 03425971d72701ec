//! Shared fixtures for the kernel benchmarks.

use circlemap::LiftMap;

pub fn trig() -> LiftMap {
    LiftMap::trig_perturbed(2, 0.5).expect("valid benchmark map")
}

pub fn fs() -> LiftMap {
    LiftMap::fs_smooth(0.9, 4.0).expect("valid benchmark map")
}

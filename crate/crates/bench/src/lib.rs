//! Benchmark fixtures shared by the criterion targets.

use mesoheat_core::rational::ratio;
use mesoheat_core::{LatticeField, Rational, Scalar};

/// Ring of `cells` cells holding a deterministic saw-tooth of small rationals.
pub fn sawtooth_ring<T: Scalar>(cells: usize) -> LatticeField<T> {
    let values = (0..cells as i64)
        .map(|s| T::from_rational(&ratio((s * 37) % 101, 7)))
        .collect();
    LatticeField::ring(values).expect("cells >= 3")
}

pub fn rational_ring(cells: usize) -> LatticeField<Rational> {
    sawtooth_ring(cells)
}

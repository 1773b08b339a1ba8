//! Rational lines and r-planes on hypersurfaces over finite fields.

pub mod formring;
pub mod gf;
pub mod matrix;
pub mod projgeom;
pub mod rng;
pub mod bounds;
pub mod census;
pub mod fano;
pub mod smoothness;

/// A smooth cubic threefold over F_7 in `x0..x4` with exactly eight rational lines.
pub const GOLDEN_CUBIC: &str = include_str!("../data/golden_cubic.txt");

/// [`GOLDEN_CUBIC`] parsed over F_7.
pub fn golden_cubic() -> formring::Form {
    let field = gf::Field::prime(7).expect("7 is prime");
    formring::parse_form(GOLDEN_CUBIC, &field, 5).expect("embedded form parses")
}

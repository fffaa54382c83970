//! Exact arithmetic in `Q` and the class-number-one imaginary quadratic
//! fields `Q(sqrt(-d))`, `d ∈ {1, 2, 3, 7, 11}`, together with their places and
//! normalized absolute values.

pub mod arith;
mod field;
mod place;

pub use field::{FieldKind, KElem, NumberField, SUPPORTED_D};
pub use place::{
    abs_value, check_product_formula, content_vector, finite_place, infinite_place, places_over,
    support_primes, AbsValue, FinitePlace, Place, Splitting,
};
pub(crate) use place::mul_int;

/// `(2/π)^s · sqrt|D_K|`.
pub fn field_constant(k: NumberField) -> f64 {
    k.field_constant()
}

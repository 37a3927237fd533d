//! Dividing depth at desk scale.
//!
//! The dividing depth `DD(p)` of a partial type `p(x)` over `A` is the
//! supremum of the depths of dividing sequences in `p`. This crate makes the
//! notion checkable for small decidable theories:
//!
//! * [`ordinals`]: ordinals below ε₀ in Cantor normal form, and the signed
//!   values `α₊`, `α₋` with the operations `+̂` and `⊕̂` that bound ranks of
//!   pairs.
//! * [`logic`]: quantifier-free formulas in a small text syntax, and partial
//!   types built from them.
//! * [`theories`]: backends that decide consistency and quantifier-free types
//!   exactly (finite structures, the pure set, an equivalence relation with
//!   infinitely many infinite classes, the random graph).
//! * [`rank`]: certificates of dividing depth, their verification and
//!   conversions, a bounded search that is exhaustive within its bounds, and
//!   harnesses that test rank laws on seeded instances.
//!
//! ```
//! use ddrank::logic::PartialType;
//! use ddrank::rank::{atomic_alphabet, search_rank, SearchBounds};
//! use ddrank::theories::EquivalenceRelation;
//!
//! let eq = EquivalenceRelation::new();
//! let report = search_rank(
//!     &eq,
//!     &PartialType::trivial(1),
//!     &atomic_alphabet(&eq, 1),
//!     SearchBounds::new(4, 4, 64),
//! )
//! .unwrap();
//! assert_eq!(report.exact_value, Some(2));
//! ```

pub mod logic;
pub mod ordinals;
pub mod rank;
pub mod theories;

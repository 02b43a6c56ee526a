//! Exact p-adic computation toolkit for predicting Selmer corank growth
//! along the Z_p-extensions of an imaginary quadratic field.
//!
//! The crate works over the two-variable Iwasawa algebra Z_p[[X, Y]].  Each
//! direction (a : b) in P^1(Z_p) picks out a one-variable quotient
//! Z_p[[X, Y]]/(f_{a,b}) with f_{a,b} = (1+X)^a (1+Y)^b - 1, and the modules
//! here follow a two-variable p-adic L-function through that specialization:
//!
//! * [`padic`] — p-adic numbers with explicit precision tracking, canonical
//!   directions in P^1(Z_p), Kronecker symbols and other small number theory;
//! * [`series`] — truncated power series in one and two variables, binomial
//!   series (1+Z)^c, the family f_{a,b}, and the projection to each direction;
//! * [`weierstrass`] — Weierstrass division and preparation, cyclotomic
//!   factors of omega_n(T) = (1+T)^{p^n} - 1, and the corank growth formula
//!   r p^n + sum of phi(p^k) over cyclotomic zeros;
//! * [`growth`] — the cyclotomic-derivative criterion: derivative of the
//!   projected L-function at the origin, its closed form, nonvanishing
//!   certificates, Heegner-point hypothesis checks, and the full per-direction
//!   analysis pipeline;
//! * [`homology`] — finite-level group-ring oracles: brute-force linear
//!   algebra over (Z/p^m)[Z/p^n x Z/p^n] used as independent ground truth for
//!   torsion and corank claims, plus pseudo-nullity sufficient conditions;
//! * [`input`] / [`report`] — the structured document formats consumed and
//!   emitted by the command-line front end.
//!
//! Every computation is exact at a stated precision: numbers carry their known
//! digit range, series carry a coefficient precision and a total-degree bound,
//! and any question the precision cannot settle is reported as indeterminate
//! rather than guessed.  All types are immutable values; operations return new
//! values and are safe to share across threads.

pub mod error;
pub mod growth;
pub mod homology;
pub mod input;
pub mod padic;
pub mod report;
pub mod series;
pub mod weierstrass;

pub use error::{Error, Result};

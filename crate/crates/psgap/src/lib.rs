//! Desk-scale laboratory for prime-gap constructions around
//! Piatetski-Shapiro primes and their k-th powers.
//!
//! The pieces fit together like this:
//!
//! - [`primes`] — segmented sieve, primorials, pi/theta over arithmetic
//!   progressions, gap scanning. Everything else queries these tables.
//! - [`ps`] — the sequence `floor(l^c)` for fixed `c`: certified
//!   floor-power evaluation, membership, counting in progressions, and
//!   the two-term asymptotic comparison for those counts.
//! - [`characters`] — Dirichlet character groups with exact
//!   root-of-unity arithmetic, the theta orthogonality decomposition,
//!   and conductor/primitive-character computations.
//! - [`rankin`] — the covering construction: residue classes mod each
//!   prime `p < x` chosen so that `(m0+1)^k + u - 1` is composite for
//!   all `u` in a target interval outside a small exceptional set.
//! - [`matrix`] — the row/column laboratory built on a covering plan:
//!   row classification by prime and sequence membership of the row
//!   base, prime-avoidance window checks, and witness scans.
//! - [`sieve_fl`] — root counting for `w^k + v - 1` mod primes,
//!   truncated Moebius (beta-sieve) weight systems with their sign
//!   properties, and exact-vs-sieve upper bound comparisons.
//!
//! Every runnable capability also exists as an example under
//! `examples/`; start there. A thin `psgap` binary exposes the same
//! operations for scripting.

pub mod error;
pub mod hp;
pub mod primes;
pub mod ps;

pub use error::{Error, Result};
pub use hp::Real;
pub use primes::{coprimorial, is_prime_u64, primorial, GapRecord, PrimeTable, Primorial};
pub use ps::{ps_asymptotic_terms, ps_count_in_progression, ps_member, ps_primes_up_to, ps_value, PsParameters};

//! Random cusped hyperbolic surfaces with logarithmically large systole.
//!
//! Surfaces are assembled from ideal hyperbolic triangles glued with zero
//! shear. The combinatorics live in the trivalent ribbon graph dual to the
//! triangulation: non-backtracking paths carry turn words over the alphabet
//! `{L, R}`, and substituting the parabolic matrices for the letters turns a
//! closed curve into an exact integer trace, hence a geodesic length via
//! `2·acosh(tr/2)`.
//!
//! The crate provides:
//!
//! - [`words`]: exact arithmetic on `L/R` turn words, traces and lengths,
//!   and enumeration of all words in a trace window.
//! - [`surface`]: partially glued triangulated surfaces, left-hand-turn
//!   cycles, genus/cusp counts, permutation encodings and free generators
//!   of the fundamental group.
//! - [`geodesics`]: trace distance between boundary half-edges, complete
//!   enumeration of short closed geodesics, and exact systoles.
//! - [`process`]: the constrained random gluing process (plain and
//!   fixed-genus variants), safety detection, deterministic completion and
//!   the retry/sweep schedulers.
//! - [`covers`] and [`groups`]: random regular covers via uniform
//!   homomorphisms into `SL(2, F_p)` or symmetric groups, exact cover
//!   systoles with an explicit cover construction as oracle, and empirical
//!   statistics.
//! - [`database`]: canonical records for generated surfaces plus an
//!   independent verifier.

pub mod covers;
pub mod database;
pub mod geodesics;
pub mod groups;
pub mod process;
pub mod seeding;
pub mod surface;
pub mod words;

pub use geodesics::{enumerate_short_geodesics, systole, trace_distance, GeodesicCert};
pub use surface::{Slot, Surface, SurfaceError};
pub use words::{geodesic_length, Letter, Trace, Word};

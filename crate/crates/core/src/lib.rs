//! Pointed marked G-graphs, their norms, ideal edges, Whitehead moves and
//! star complexes, computed exactly at desk scale.

pub mod checks;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod freegroup;
pub mod ggraph;
pub mod group;
pub mod ideal;
pub mod marking;
pub mod moves;
pub mod norms;
pub mod random;
pub mod selftest;
pub mod star;

pub use error::{Error, Result};
pub use freegroup::{enumerate_classes, enumerate_words, ConjClass, FreeAutomorphism, Letter, Word};
pub use ggraph::{Dart, DartSet, EdgeOrbit, GGraph, InvariantForest, Vertex, Violation, ViolationKind};
pub use group::{FiniteGroup, Subgroup};
pub use marking::{EdgePath, MarkedGGraph, RealizationViolation};
pub use norms::{norm, Comparison, NormKind, NormVector, Norms};
pub use ideal::{compatible, crossing, d_set, enumerate_ideal_edges, inverse, pre_compatible, Crossing, IdealEdge};
pub use checks::Report;
pub use moves::{blow_up, greedy_reduce, max_reductive_pair, reductivity, whitehead, BlownUp, Reductivity, Verdict, WhiteheadMove};
pub use star::{reduced_homology, run_retractions, Family, Outcome, SimplicialComplex, Star, Trace};

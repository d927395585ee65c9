//! Combinatorial engine for rooted planar maps grown from random binary
//! trees: rotation-system maps, the closure bijection onto irreducible
//! quadrangulations of the hexagon, local growth rewrites, uniform-marginal
//! growth chains, the angular mapping to general rooted maps, and finite
//! truncations of the infinite-tree limit.

pub mod angular;
pub mod chain;
pub mod closure;
pub mod limit;
pub mod map;
pub mod tree;

//! The hardness constructions as executable game transformations: the copy
//! gadget, graphical games to action-graph games (general, forest-shaped
//! and single-type), and boolean circuits to games whose pure equilibria
//! exist exactly when the circuit is satisfiable.

mod circuit;
mod copy;
mod graphical;
mod symmetric;

pub use circuit::{circuit_to_agg, circuit_to_symmetric_agg, circuit_to_tw1_agg, BooleanCircuit, Gate};
pub use copy::{apply_copy_gadget, extract_subgame_profile, sparsify_to_tw1, CopyGadget};
pub use graphical::{graphical_to_agg, GraphicalGame};
pub use symmetric::{
    agents_per_pair, graphical_to_symmetric_agg, graphical_to_symmetric_agg_with_limit, phi_map_profile,
    symmetric_table_entries,
};

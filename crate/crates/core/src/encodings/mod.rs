//! Encodings between levels of the hierarchy: trees as words on paths,
//! arbitrary structures in grids, bounded-width structures as coloured
//! trees, and minors as parameter choices.

mod decomp;
mod grid;
mod minors;
mod treeword;

pub use decomp::{decomposition_encode, Catalogue, DecompositionCode, DecompositionCodeJson};
pub use grid::{
    grid_decode, grid_encode, grid_encode_incidence, grid_orient, grid_orient_transduction, GridCode, GridParams,
    Orientation, E0, E1,
};
pub use minors::{minor_apply, minor_param_masks, minor_sweep, minor_transduction, MinorParams};
pub use treeword::{
    decoded_structure, format_word, parse_word, tree_word_decode, tree_word_encode, tree_word_parents,
    tree_word_transduction, word_parameters,
};

//! Hermite diagram formulas, boolean characters of the linear-code model,
//! and noise stability of low-degree polynomials.

mod characters;
mod hermite;
mod poly;
mod symmetrize;

pub use characters::{
    all_character_indices, rlc_character_expectation, rlc_character_expectation_with_budget,
    CharacterExpectation, CharacterIndex, DEFAULT_CHARACTER_BUDGET,
};
pub use hermite::{
    diagram_expectation, diagram_expectation_with_cap, hermite_all, hermite_eval, DiagramSpec,
    DEFAULT_DIAGRAM_CAP,
};
pub use poly::{
    random_gss_poly, random_psp_poly, random_rlc_poly, stability_bound, stability_ratio,
    EdgePattern, HermiteIndex, PolySpec, StabilityRatio, DEFAULT_EMBEDDING_BUDGET,
};
pub use symmetrize::{
    random_fixing_permutation, symmetrize_check, EdgePolynomial, EdgeTerm, SymmetrizeReport,
    DEFAULT_PERMUTATIONS,
};

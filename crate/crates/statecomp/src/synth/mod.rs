//! Seeded ground-truth generators: low-rank chains (balanced and imbalanced),
//! aggregatable and lumpable chains with recorded partitions, near-uniform
//! perturbation families used as class-membership fixtures, and the
//! factorization machinery behind latent-state augmentation.

mod factorization;
mod fano;
mod generators;

pub use factorization::{augment_with_latent, kernel_power, LowRankFactorization};
pub use fano::{gen_fano_subspace_instances, gen_fano_transition_instances};
pub use generators::{
    gen_aggregatable_chain, gen_imbalanced_chain, gen_low_rank_chain, gen_lumpable_chain,
    GroundTruthChain,
};

"""pedlump: provably minimal lumped state spaces for pedigree inheritance HMMs.

The pipeline: parse a pedigree, prune meioses that can never affect IBD
among the individuals of interest, build the emission partition (identity
states coarsened by proper pedigree automorphisms), refine it to the unique
coarsest Markov-respecting partition, and run exact genotype likelihoods on
the reduced chain, cross-checked against the naive full-state recursion.
"""

from .bootstrap import (
    BootstrapStats,
    GeneratorError,
    bootstrap_maximum_ensemble,
    chain_isometries,
    couple_isometries,
    founder_isometries,
    known_isometries,
)
from .emission import (
    AlleleFrequencies,
    GenotypeData,
    emission_partition,
    emission_probability,
    proper_automorphisms,
    signature_emission,
)
from .ensemble import (
    AlgorithmError,
    MarkovWitness,
    bipartition,
    coefficient_vector,
    maximum_ensemble,
    verify_markov,
    verify_refines,
)
from .hmm import (
    ForwardStats,
    FullChain,
    ReducedHMM,
    build_reduced,
    forward_likelihood,
    full_transition,
    theta_from_distance,
    thetas_from_intervals,
)
from .inheritance import (
    IBDSignature,
    InheritanceGraph,
    Partition,
    ibd_signature,
    identity_states,
    inheritance_graph,
    interest_allele_labels,
    signature_index,
)
from .pedigree import (
    Individual,
    Meiosis,
    MeiosisCapError,
    Pedigree,
    PedigreeError,
    meiosis_order,
    parse_pedigree,
    prune_irrelevant,
    serialize_pedigree,
)
from .pipeline import Reduction, reduce_state_space
from .sim import simulate_genotypes, simulate_pedigree
from .symmetry import Isometry, compose, orbits, orbits_on_blocks

__version__ = "0.1.0"

__all__ = [
    "AlgorithmError",
    "AlleleFrequencies",
    "BootstrapStats",
    "ForwardStats",
    "FullChain",
    "GeneratorError",
    "GenotypeData",
    "IBDSignature",
    "Individual",
    "InheritanceGraph",
    "Isometry",
    "MarkovWitness",
    "Meiosis",
    "MeiosisCapError",
    "Partition",
    "Pedigree",
    "PedigreeError",
    "ReducedHMM",
    "Reduction",
    "bipartition",
    "bootstrap_maximum_ensemble",
    "build_reduced",
    "chain_isometries",
    "coefficient_vector",
    "compose",
    "couple_isometries",
    "emission_partition",
    "emission_probability",
    "forward_likelihood",
    "founder_isometries",
    "full_transition",
    "ibd_signature",
    "identity_states",
    "inheritance_graph",
    "interest_allele_labels",
    "known_isometries",
    "maximum_ensemble",
    "meiosis_order",
    "orbits",
    "orbits_on_blocks",
    "parse_pedigree",
    "proper_automorphisms",
    "prune_irrelevant",
    "reduce_state_space",
    "serialize_pedigree",
    "signature_emission",
    "signature_index",
    "simulate_genotypes",
    "simulate_pedigree",
    "theta_from_distance",
    "thetas_from_intervals",
    "verify_markov",
    "verify_refines",
]

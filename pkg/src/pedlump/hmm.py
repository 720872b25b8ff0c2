"""Full-state and reduced pedigree HMMs: transitions, stationary law,
forward likelihood.

The reduced model stores one integer coefficient vector per ordered block
pair; the transition probability between blocks is the polynomial
sum_k c_k theta^k (1-theta)^(n-k) evaluated on demand.  The naive full-state
recursion is kept deliberately simple (dense transition rows) because it is
the oracle the reduced model is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._bits import popcount, popcount_table
from .emission import AlleleFrequencies, GenotypeData, signature_emission
from .ensemble import coefficient_vector, verify_markov
from .inheritance import (
    IBDSignature,
    MAT_SIDE,
    PAT_SIDE,
    Partition,
    interest_allele_labels,
    signature_index,
)
from .pedigree import Pedigree


def theta_from_distance(d: float, rate: float = 1.0) -> float:
    """Recombination fraction over genetic distance d (Morgans):
    the probability of an odd number of crossovers, (1 - e^(-2*rate*d))/2."""
    if d < 0:
        raise ValueError(f"negative genetic distance {d}")
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return 0.5 * (1.0 - math.exp(-2.0 * rate * d))


def full_transition(x: int, y: int, theta: float, n: int) -> float:
    """Per-step transition probability theta^|x^y| (1-theta)^(n-|x^y|).

    Endpoints theta in {0, 0.5} are permitted: zero-distance duplicate
    markers and unlinked sites are both well-defined limits.
    """
    if not 0 <= theta <= 0.5:
        raise ValueError(f"theta must lie in [0, 0.5], got {theta}")
    for s in (x, y):
        if not 0 <= s < (1 << n):
            raise ValueError(f"state {s} out of range for n={n}")
    d = popcount(x ^ y)
    return theta**d * (1.0 - theta) ** (n - d)


@dataclass
class ForwardStats:
    """Operation counts for scaling assertions."""

    transition_ops: int = 0
    emission_ops: int = 0


@dataclass(frozen=True)
class FullChain:
    """Marker selecting the naive 2^n-state forward recursion."""

    n: int


@dataclass(frozen=True)
class ReducedHMM:
    partition: Partition
    n: int
    trans_coeffs: np.ndarray  # (k, k, n+1) int64
    stationary: np.ndarray  # (k,) float64, |block| / 2^n
    representatives: tuple[int, ...]  # smallest member per block

    @property
    def num_states(self) -> int:
        return self.partition.num_blocks

    def transition_matrix(self, theta: float) -> np.ndarray:
        """Row-stochastic block transition matrix at recombination fraction
        theta; exact polynomial evaluation of the stored coefficients."""
        if not 0 <= theta <= 0.5:
            raise ValueError(f"theta must lie in [0, 0.5], got {theta}")
        k = np.arange(self.n + 1)
        weights = theta**k * (1.0 - theta) ** (self.n - k)
        return self.trans_coeffs @ weights


def build_reduced(P: Partition, n: Optional[int] = None) -> ReducedHMM:
    """Construct the lumped chain over the blocks of a Markov partition.

    Requires verify_markov(P); the coefficient vectors computed from a
    block's smallest member are then provably identical for every member.
    """
    if n is not None and n != P.n:
        raise ValueError(f"partition width {P.n} != n={n}")
    n = P.n
    ok, witness = verify_markov(P)
    if not ok:
        raise ValueError(
            f"partition does not satisfy the Markov property; witness: "
            f"states {witness.x1} vs {witness.x2} against block {witness.block}"
        )
    blocks = P.blocks()
    k = len(blocks)
    reps = tuple(int(b[0]) for b in blocks)
    pc = popcount_table(n)
    coeffs = np.zeros((k, k, n + 1), dtype=np.int64)
    for i, rep in enumerate(reps):
        for j, members in enumerate(blocks):
            coeffs[i, j] = np.bincount(pc[members ^ rep], minlength=n + 1)
    sizes = P.block_sizes().astype(np.float64)
    return ReducedHMM(
        partition=P,
        n=n,
        trans_coeffs=coeffs,
        stationary=sizes / float(1 << n),
        representatives=reps,
    )


# -- emission vectors over signature classes ----------------------------------


def _class_codes(signatures: Sequence[IBDSignature], labels: Sequence[tuple[str, str]]) -> np.ndarray:
    slot = {label: i for i, label in enumerate(labels)}
    codes = np.zeros((len(signatures), len(labels)), dtype=np.int64)
    for d, sig in enumerate(signatures):
        for block in sig:
            rep = min(slot[label] for label in block)
            for label in block:
                codes[d, slot[label]] = rep
    return codes


def _site_class_emissions(
    codes: np.ndarray,
    labels: Sequence[tuple[str, str]],
    site: dict[str, Optional[tuple[str, str]]],
    freqs: AlleleFrequencies,
) -> np.ndarray:
    """Emission probability per signature class for one site (float path)."""
    D = codes.shape[0]
    observed = {ind: g for ind, g in site.items() if g is not None}
    if not observed:
        return np.ones(D)
    symbols = {s: i for i, s in enumerate(freqs.symbols())}
    fvec = np.array([float(f) for _, f in freqs.items()])
    het = sorted(ind for ind, g in observed.items() if g[0] != g[1])
    h = len(het)
    A = 1 << h
    assign = np.arange(A)

    obs_slots = [i for i, (ind, _) in enumerate(labels) if ind in observed]
    LO = len(obs_slots)
    values = np.empty((LO, A), dtype=np.int64)
    for row, i in enumerate(obs_slots):
        ind, side = labels[i]
        g = observed[ind]
        for allele in g:
            if allele not in symbols:
                raise KeyError(f"unknown allele symbol {allele!r}")
        if g[0] == g[1]:
            values[row] = symbols[g[0]]
        else:
            flip = (assign >> het.index(ind)) & 1
            a, b = symbols[g[0]], symbols[g[1]]
            pat, mat = np.where(flip == 0, a, b), np.where(flip == 0, b, a)
            values[row] = pat if side == PAT_SIDE else mat

    # First observed slot of each component, per class.
    sub = codes[:, obs_slots]
    rep = np.tile(np.arange(LO, dtype=np.int64), (D, 1))
    for j in range(LO):
        for i in range(j - 1, -1, -1):
            hit = (sub[:, i] == sub[:, j]) & (rep[:, j] == j)
            rep[hit, j] = i

    factors = np.ones((D, LO, A))
    is_rep = rep == np.arange(LO)
    rep_values = values[rep]  # (D, LO, A)
    same = values[None, :, :] == rep_values
    factors = np.where(is_rep[:, :, None], fvec[values][None, :, :], same.astype(float))
    return factors.prod(axis=1).sum(axis=1) / A


# -- forward recursion --------------------------------------------------------


def _check_thetas(thetas: Sequence[float], m: int) -> np.ndarray:
    arr = np.asarray(thetas, dtype=np.float64)
    if arr.shape != (max(m - 1, 0),):
        raise ValueError(f"need {m - 1} per-interval thetas, got {arr.shape}")
    if ((arr < 0) | (arr > 0.5)).any():
        raise ValueError("thetas must lie in [0, 0.5]")
    return arr


def forward_likelihood(
    model: Union[ReducedHMM, FullChain],
    ped: Pedigree,
    data: GenotypeData,
    freqs: AlleleFrequencies,
    thetas: Sequence[float],
    stats: Optional[ForwardStats] = None,
) -> float:
    """Log-likelihood of the genotype data under the given chain.

    Runs the scaled forward recursion (log-space total) with the uniform
    stationary initial law.  For a ReducedHMM the emission of a block is
    evaluated at its stored representative; the emission property guarantees
    this is exact, and under ``__debug__`` one other member per block is
    spot-checked per site.
    """
    thetas = _check_thetas(thetas, data.m)
    sig_idx, signatures = signature_index(ped)
    labels = interest_allele_labels(ped)
    codes = _class_codes(signatures, labels)
    interest = set(ped.interest_ids())
    for ind in data.ids:
        if ind not in interest:
            raise ValueError(f"genotyped individual {ind!r} is not in the interest set")

    site_emissions = [
        _site_class_emissions(codes, labels, data.site_map(t), freqs)
        for t in range(data.m)
    ]

    if isinstance(model, FullChain):
        if model.n != ped.n:
            raise ValueError(f"model width {model.n} != pedigree n={ped.n}")
        return _forward_full(ped.n, sig_idx, site_emissions, thetas, stats)
    if model.n != ped.n:
        raise ValueError(f"model width {model.n} != pedigree n={ped.n}")
    return _forward_reduced(model, sig_idx, site_emissions, thetas, stats)


def _forward_reduced(model, sig_idx, site_emissions, thetas, stats):
    blocks = model.partition.blocks()
    k = len(blocks)
    reps = np.array(model.representatives)
    rng = np.random.default_rng(0)
    log_total = 0.0
    f = model.stationary.copy()
    for t, class_e in enumerate(site_emissions):
        e = class_e[sig_idx[reps]]
        if __debug__:
            for b, members in enumerate(blocks):
                if members.size > 1:
                    other = int(members[1 + rng.integers(members.size - 1)])
                    assert math.isclose(
                        class_e[sig_idx[other]], e[b], rel_tol=1e-12, abs_tol=1e-300
                    ), "emission not constant within a block"
        if t > 0:
            f = f @ model.transition_matrix(float(thetas[t - 1]))
            if stats is not None:
                stats.transition_ops += k * k
        f = f * e
        total = f.sum()
        if total <= 0.0:
            return -math.inf
        f /= total
        log_total += math.log(total)
    return log_total


def _forward_full(n, sig_idx, site_emissions, thetas, stats):
    size = 1 << n
    pc = popcount_table(n)
    states = np.arange(size, dtype=np.int64)
    log_total = 0.0
    f = np.full(size, 1.0 / size)
    chunk = max(1, (1 << 22) // size)
    for t, class_e in enumerate(site_emissions):
        e = class_e[sig_idx]
        if t > 0:
            theta = float(thetas[t - 1])
            kk = np.arange(n + 1)
            w = theta**kk * (1.0 - theta) ** (n - kk)
            nxt = np.empty(size)
            for start in range(0, size, chunk):
                cols = states[start : start + chunk]
                nxt[start : start + chunk] = f @ w[pc[states[:, None] ^ cols[None, :]]]
            f = nxt
            if stats is not None:
                stats.transition_ops += size * size
        f = f * e
        total = f.sum()
        if total <= 0.0:
            return -math.inf
        f /= total
        log_total += math.log(total)
    return log_total


def thetas_from_intervals(distances: Sequence[float], rate: float = 1.0) -> tuple[float, ...]:
    """Map inter-site distances to per-interval recombination fractions."""
    return tuple(theta_from_distance(d, rate) for d in distances)

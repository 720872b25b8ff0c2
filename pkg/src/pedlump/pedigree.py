"""Pedigree data model, file parsing, meiosis indexing and pruning.

A pedigree is a parent -> child DAG.  Every non-founder contributes two
meioses (one per parent); the ordered meiosis list fixes the bit labelling of
inheritance states, so everything downstream depends on it being stable.

File format (one individual per line, whitespace separated)::

    id father mother sex genotyped interest

``0`` marks a missing parent (both or neither must be missing), sex is
``M``/``F``, the two flags are ``0``/``1``.  Lines starting with ``#`` and
blank lines are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

MALE = "M"
FEMALE = "F"
PATERNAL = "pat"
MATERNAL = "mat"
ROLES = (PATERNAL, MATERNAL)

DEFAULT_MEIOSIS_CAP = 20


class PedigreeError(ValueError):
    """Raised for malformed pedigree files or inconsistent structures."""


class MeiosisCapError(PedigreeError):
    """Raised when an exhaustive enumeration would exceed the meiosis cap."""


class Meiosis(NamedTuple):
    child: str
    role: str  # PATERNAL or MATERNAL

    def token(self) -> str:
        return f"{self.child}:{self.role}"

    @classmethod
    def from_token(cls, token: str) -> "Meiosis":
        child, sep, role = token.rpartition(":")
        if not sep or role not in ROLES:
            raise PedigreeError(f"bad meiosis token {token!r}; expected 'id:pat' or 'id:mat'")
        return cls(child, role)


@dataclass(frozen=True)
class Individual:
    id: str
    father: Optional[str]
    mother: Optional[str]
    sex: str
    genotyped: bool
    of_interest: bool

    @property
    def is_founder(self) -> bool:
        return self.father is None


class Pedigree:
    """Immutable pedigree with an ordered meiosis index.

    ``meioses`` may be a subset of the full child-parent edge set: pruning
    removes meioses from the index while leaving the graph intact.  Absent
    meioses are treated as fixed to the grand-paternal allele wherever an
    inheritance graph is built, which is exactly the claim pruning certifies.
    """

    def __init__(self, individuals: Iterable[Individual], meioses: Sequence[Meiosis]):
        inds: dict[str, Individual] = {}
        for ind in individuals:
            if ind.id in inds:
                raise PedigreeError(f"duplicate id {ind.id!r}")
            inds[ind.id] = ind
        self._individuals = inds
        self._validate_structure()
        self.meioses: tuple[Meiosis, ...] = tuple(meioses)
        seen = set()
        for m in self.meioses:
            ind = inds.get(m.child)
            if ind is None or ind.is_founder:
                raise PedigreeError(f"meiosis {m.token()} does not name a non-founder child")
            if m.role not in ROLES:
                raise PedigreeError(f"bad meiosis role {m.role!r}")
            if m in seen:
                raise PedigreeError(f"duplicate meiosis {m.token()}")
            seen.add(m)
        self._index = {m: j for j, m in enumerate(self.meioses)}
        self._children: dict[str, tuple[str, ...]] = self._build_children()
        self._topo: tuple[str, ...] = self._toposort()

    # -- construction checks --------------------------------------------

    def _validate_structure(self) -> None:
        for ind in self._individuals.values():
            if (ind.father is None) != (ind.mother is None):
                raise PedigreeError(f"individual {ind.id!r} has a single parent")
            if ind.sex not in (MALE, FEMALE):
                raise PedigreeError(f"individual {ind.id!r} has sex {ind.sex!r}")
            for parent_id, want_sex, label in (
                (ind.father, MALE, "father"),
                (ind.mother, FEMALE, "mother"),
            ):
                if parent_id is None:
                    continue
                parent = self._individuals.get(parent_id)
                if parent is None:
                    raise PedigreeError(
                        f"individual {ind.id!r} references missing {label} {parent_id!r}"
                    )
                if parent.sex != want_sex:
                    raise PedigreeError(
                        f"{label} {parent_id!r} of {ind.id!r} is not {want_sex}"
                    )

    def _build_children(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {i: [] for i in self._individuals}
        for ind in self._individuals.values():
            if ind.father is not None:
                out[ind.father].append(ind.id)
                out[ind.mother].append(ind.id)
        return {k: tuple(v) for k, v in out.items()}

    def _toposort(self) -> tuple[str, ...]:
        order: list[str] = []
        state: dict[str, int] = {}  # 0 = visiting, 1 = done

        def visit(root: str) -> None:
            stack = [(root, False)]
            while stack:
                node, processed = stack.pop()
                if processed:
                    state[node] = 1
                    order.append(node)
                    continue
                mark = state.get(node)
                if mark == 1:
                    continue
                if mark == 0:
                    raise PedigreeError(f"cycle detected through individual {node!r}")
                state[node] = 0
                stack.append((node, True))
                ind = self._individuals[node]
                for parent in (ind.mother, ind.father):
                    if parent is not None and state.get(parent) != 1:
                        if state.get(parent) == 0:
                            raise PedigreeError(f"cycle detected through individual {parent!r}")
                        stack.append((parent, False))

        for ind_id in self._individuals:
            visit(ind_id)
        return tuple(order)

    # -- accessors --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.meioses)

    @property
    def individuals(self) -> dict[str, Individual]:
        return dict(self._individuals)

    def individual(self, ind_id: str) -> Individual:
        return self._individuals[ind_id]

    def ids(self) -> tuple[str, ...]:
        return tuple(self._individuals)

    def topo_order(self) -> tuple[str, ...]:
        """Individual ids with every parent before its children."""
        return self._topo

    def children_of(self, ind_id: str) -> tuple[str, ...]:
        return self._children[ind_id]

    def founders(self) -> tuple[str, ...]:
        return tuple(i for i, ind in self._individuals.items() if ind.is_founder)

    def interest_ids(self) -> tuple[str, ...]:
        return tuple(sorted(i for i, ind in self._individuals.items() if ind.of_interest))

    def meiosis_index(self, meiosis: Meiosis) -> int:
        return self._index[meiosis]

    def has_meiosis(self, meiosis: Meiosis) -> bool:
        return meiosis in self._index

    def parent_of_meiosis(self, meiosis: Meiosis) -> str:
        ind = self._individuals[meiosis.child]
        parent = ind.father if meiosis.role == PATERNAL else ind.mother
        assert parent is not None
        return parent

    def all_edges(self) -> tuple[Meiosis, ...]:
        """Every child-parent edge in default order, pruned or not."""
        return tuple(
            Meiosis(ind_id, role)
            for ind_id in sorted(self._individuals)
            if not self._individuals[ind_id].is_founder
            for role in ROLES
        )

    def with_meioses(self, meioses: Sequence[Meiosis]) -> "Pedigree":
        return Pedigree(self._individuals.values(), meioses)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pedigree):
            return NotImplemented
        return (
            self._individuals == other._individuals
            and self.meioses == other.meioses
        )

    def __repr__(self) -> str:
        return f"Pedigree({len(self._individuals)} individuals, n={self.n})"


# -- file format ----------------------------------------------------------


def _parse_flag(token: str, what: str, line_no: int) -> bool:
    if token not in ("0", "1"):
        raise PedigreeError(f"line {line_no}: {what} must be 0 or 1, got {token!r}")
    return token == "1"


def parse_pedigree(text: str) -> Pedigree:
    """Parse pedigree file content and assign the default meiosis order.

    The default order sorts meioses by (child id, paternal before maternal),
    which makes bit labels deterministic across runs.
    """
    individuals: list[Individual] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 6:
            raise PedigreeError(
                f"line {line_no}: expected 6 fields "
                f"(id father mother sex genotyped interest), got {len(tokens)}"
            )
        ind_id, father, mother, sex, genotyped, interest = tokens
        if sex not in (MALE, FEMALE):
            raise PedigreeError(f"line {line_no}: sex must be M or F, got {sex!r}")
        individuals.append(
            Individual(
                id=ind_id,
                father=None if father == "0" else father,
                mother=None if mother == "0" else mother,
                sex=sex,
                genotyped=_parse_flag(genotyped, "genotyped", line_no),
                of_interest=_parse_flag(interest, "interest", line_no),
            )
        )
    if ind_id_cycle := next((i.id for i in individuals if i.id in (i.father, i.mother)), None):
        raise PedigreeError(f"cycle detected: individual {ind_id_cycle!r} is its own parent")
    ped = Pedigree(individuals, [])
    return ped.with_meioses(ped.all_edges())


def serialize_pedigree(ped: Pedigree) -> str:
    lines = []
    for ind in ped.individuals.values():
        lines.append(
            " ".join(
                [
                    ind.id,
                    ind.father or "0",
                    ind.mother or "0",
                    ind.sex,
                    "1" if ind.genotyped else "0",
                    "1" if ind.of_interest else "0",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def meiosis_order(ped: Pedigree, override: Optional[Sequence[Meiosis | str]] = None) -> Pedigree:
    """Reorder the meiosis index, or restore the default order.

    ``override`` must be a permutation of the pedigree's current meiosis set;
    string entries are parsed as ``child:pat`` / ``child:mat`` tokens.  The
    explicit override exists to reproduce published bit labellings.
    """
    if override is None:
        current = set(ped.meioses)
        return ped.with_meioses([m for m in ped.all_edges() if m in current])
    parsed = [m if isinstance(m, Meiosis) else Meiosis.from_token(m) for m in override]
    if sorted(parsed) != sorted(ped.meioses):
        raise PedigreeError("override is not a permutation of the meiosis set")
    return ped.with_meioses(parsed)


def prune_irrelevant(ped: Pedigree, cap: int = DEFAULT_MEIOSIS_CAP) -> Pedigree:
    """Drop every meiosis whose flip never changes any IBD signature.

    The check is exhaustive over all 2^n states (flip test), so it is exact
    but capped: pedigrees with more than ``cap`` meioses are rejected rather
    than silently half-checked.  Relative order of surviving meioses is kept.
    """
    if ped.n > cap:
        raise MeiosisCapError(
            f"pruning needs an exhaustive pass over 2^{ped.n} states; cap is {cap}"
        )
    if not ped.interest_ids():
        raise PedigreeError("cannot prune a pedigree with an empty interest set")
    from . import inheritance

    keep = inheritance.relevant_meiosis_mask(ped)
    return ped.with_meioses([m for m, k in zip(ped.meioses, keep) if k])

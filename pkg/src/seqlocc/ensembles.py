"""State ensembles, sequence ensembles and measurements.

Ensemble members are labelled ``1..n`` as in the usual notation for
discrimination problems; a sequence index is a tuple ``(c_1, ..., c_L)`` of
such labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .operators import (
    HermitianOperator,
    PartyStructure,
    StructureError,
    identity,
    min_eigenvalue,
    tensor,
)

PRIOR_TOL = 1e-9
RENORMALIZE_TOL = 1e-6
PSD_TOL = 1e-9

SequenceIndex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    structure: PartyStructure
    priors: tuple[float, ...]
    states: tuple[HermitianOperator, ...]
    label: str = ""

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=float).ravel()
        states = tuple(self.states)
        if len(priors) == 0:
            raise ValueError("an ensemble needs at least one state")
        if len(priors) != len(states):
            raise ValueError(f"{len(priors)} priors but {len(states)} states")
        if np.any(priors <= 0):
            raise ValueError("priors must be strictly positive")
        total = priors.sum()
        if abs(total - 1) > RENORMALIZE_TOL:
            raise ValueError(f"priors sum to {total!r}, expected 1")
        if abs(total - 1) > PRIOR_TOL:
            priors = priors / total
        for i, rho in enumerate(states, start=1):
            if rho.structure != self.structure:
                raise StructureError(f"state {i} has structure {rho.structure}")
            if abs(rho.trace() - 1) > PSD_TOL:
                raise ValueError(f"state {i} has trace {rho.trace()!r}")
            if min_eigenvalue(rho) < -PSD_TOL:
                raise ValueError(f"state {i} is not positive semidefinite")
        object.__setattr__(self, "priors", tuple(float(p) for p in priors))
        object.__setattr__(self, "states", states)

    @classmethod
    def from_arrays(cls, structure, priors, matrices, label: str = "") -> StateEnsemble:
        states = tuple(HermitianOperator.hermitized(structure, m) for m in matrices)
        return cls(structure, tuple(priors), states, label)

    def __len__(self) -> int:
        return len(self.priors)

    def item(self, i: int) -> tuple[float, HermitianOperator]:
        if not 1 <= i <= len(self):
            raise IndexError(f"label {i} outside 1..{len(self)}")
        return self.priors[i - 1], self.states[i - 1]

    def weighted(self, i: int) -> HermitianOperator:
        """``eta_i rho_i``."""
        p, rho = self.item(i)
        return rho * p

    def same_as(self, other: StateEnsemble, atol: float = 0.0) -> bool:
        """Entrywise comparison of priors and states."""
        if self.structure != other.structure or len(self) != len(other):
            return False
        if any(abs(a - b) > atol for a, b in zip(self.priors, other.priors)):
            return False
        return all(
            np.max(np.abs(a.matrix - b.matrix)) <= atol for a, b in zip(self.states, other.states)
        )


@dataclass(frozen=True, eq=False)
class SequenceEnsemble:
    """Tensor product of ``L`` ensembles; items are materialized on demand."""

    factors: tuple[StateEnsemble, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a sequence needs at least one step")
        dims = factors[0].structure.party_dims
        for l, e in enumerate(factors, start=1):
            if e.structure.party_dims != dims:
                raise StructureError(f"step {l} has party dims {e.structure.party_dims}")
        object.__setattr__(self, "factors", factors)
        # validates the combined dimension against the cap
        self.structure  # noqa: B018

    @classmethod
    def copies(cls, e: StateEnsemble, L: int) -> SequenceEnsemble:
        return cls((e,) * L)

    @property
    def L(self) -> int:
        return len(self.factors)

    @property
    def n(self) -> tuple[int, ...]:
        return tuple(len(e) for e in self.factors)

    @property
    def structure(self) -> PartyStructure:
        f = self.factors[0].structure
        return f.with_steps(sum(e.structure.steps for e in self.factors))

    def identical_steps(self) -> bool:
        first = self.factors[0]
        return all(e is first or e.same_as(first) for e in self.factors[1:])

    def check_index(self, c: Sequence[int]) -> SequenceIndex:
        c = tuple(int(x) for x in c)
        if len(c) != self.L:
            raise IndexError(f"index {c} has length {len(c)}, expected {self.L}")
        for l, (cl, nl) in enumerate(zip(c, self.n), start=1):
            if not 1 <= cl <= nl:
                raise IndexError(f"entry {cl} at step {l} outside 1..{nl}")
        return c

    def prior(self, c: Sequence[int]) -> float:
        c = self.check_index(c)
        return float(np.prod([e.priors[cl - 1] for e, cl in zip(self.factors, c)]))

    def state(self, c: Sequence[int]) -> HermitianOperator:
        c = self.check_index(c)
        return reduce(tensor, [e.states[cl - 1] for e, cl in zip(self.factors, c)])

    def weighted(self, c: Sequence[int]) -> HermitianOperator:
        return self.state(c) * self.prior(c)

    def indices(self) -> list[SequenceIndex]:
        return enumerate_indices(self.n)

    def flatten(self) -> StateEnsemble:
        idx = self.indices()
        return StateEnsemble(
            self.structure,
            tuple(self.prior(c) for c in idx),
            tuple(self.state(c) for c in idx),
        )


def sequence_item(se: SequenceEnsemble, c: Sequence[int]) -> tuple[float, HermitianOperator]:
    return se.prior(c), se.state(c)


def enumerate_indices(n: Sequence[int]) -> list[SequenceIndex]:
    """All sequence indices in lexicographic order."""
    return list(itertools.product(*(range(1, nl + 1) for nl in n)))


def iter_indices(n: Sequence[int]) -> Iterator[SequenceIndex]:
    return itertools.product(*(range(1, nl + 1) for nl in n))


def as_sequence(e: StateEnsemble | SequenceEnsemble) -> SequenceEnsemble:
    return e if isinstance(e, SequenceEnsemble) else SequenceEnsemble((e,))


# ---------------------------------------------------------------------------
# measurements


@dataclass(frozen=True, eq=False)
class Measurement:
    structure: PartyStructure
    operators: tuple[HermitianOperator, ...]

    def __post_init__(self):
        ops = tuple(self.operators)
        if not ops:
            raise ValueError("a measurement needs at least one operator")
        total = np.zeros((self.structure.dim, self.structure.dim), dtype=complex)
        for i, M in enumerate(ops, start=1):
            if M.structure != self.structure:
                raise StructureError(f"operator {i} has structure {M.structure}")
            if min_eigenvalue(M) < -PSD_TOL:
                raise ValueError(f"operator {i} is not positive semidefinite")
            total += M.matrix
        deviation = np.max(np.abs(total - np.eye(self.structure.dim)))
        if deviation > PSD_TOL:
            raise ValueError(f"operators do not sum to identity (deviation {deviation:.3e})")
        object.__setattr__(self, "operators", ops)

    @classmethod
    def from_arrays(cls, structure, matrices) -> Measurement:
        return cls(structure, tuple(HermitianOperator.hermitized(structure, m) for m in matrices))

    @classmethod
    def trivial(cls, structure: PartyStructure) -> Measurement:
        return cls(structure, (identity(structure),))

    def __len__(self) -> int:
        return len(self.operators)

    def is_product_basis_diagonal(self, atol: float = 1e-12) -> bool:
        """True when every operator is diagonal in the computational product basis.

        Such a measurement is realized by LOCC: every party measures its
        subsystems in the computational basis and the outcomes are combined
        classically.
        """
        for M in self.operators:
            off = M.matrix - np.diag(np.diag(M.matrix))
            if np.max(np.abs(off), initial=0.0) > atol:
                return False
        return True


def product_measurement(per_step: Sequence[Measurement]) -> Measurement:
    """Measurement on the sequence space indexed by ``enumerate_indices``."""
    if not per_step:
        raise ValueError("need at least one step measurement")
    dims = per_step[0].structure.party_dims
    for l, M in enumerate(per_step, start=1):
        if M.structure.party_dims != dims:
            raise StructureError(f"step {l} measurement has party dims {M.structure.party_dims}")
    ops = []
    for c in iter_indices([len(M) for M in per_step]):
        ops.append(reduce(tensor, [M.operators[cl - 1] for M, cl in zip(per_step, c)]))
    structure = per_step[0].structure.with_steps(sum(M.structure.steps for M in per_step))
    return Measurement(structure, tuple(ops))


def success_probability(
    e: StateEnsemble | SequenceEnsemble, M: Measurement
) -> float:
    """Average probability of guessing correctly, ``sum_i eta_i Tr(rho_i M_i)``."""
    if isinstance(e, SequenceEnsemble):
        idx = e.indices()
        if len(M) != len(idx):
            raise ValueError(f"measurement has {len(M)} outcomes, ensemble has {len(idx)}")
        if M.structure != e.structure:
            raise StructureError("measurement and ensemble structures differ")
        return float(sum(e.weighted(c).inner(Mc) for c, Mc in zip(idx, M.operators)))
    if len(M) != len(e):
        raise ValueError(f"measurement has {len(M)} outcomes, ensemble has {len(e)}")
    if M.structure != e.structure:
        raise StructureError("measurement and ensemble structures differ")
    return float(sum(p * rho.inner(Mi) for p, rho, Mi in zip(e.priors, e.states, M.operators)))


def max_prior(e: StateEnsemble | SequenceEnsemble) -> tuple[float, int | SequenceIndex]:
    """Largest prior and its first label (lexicographically first for sequences)."""
    if isinstance(e, SequenceEnsemble):
        picks = [max_prior(f) for f in e.factors]
        return float(np.prod([p for p, _ in picks])), tuple(i for _, i in picks)
    priors = list(e.priors)
    best = max(priors)
    return best, priors.index(best) + 1

"""Dense Hermitian operators on multi-party, multi-step Hilbert spaces.

Operators built step by step (one multi-party state per step) are stored in
*step-major* order: the subsystems are ``(step 1: A_1..A_m), (step 2: A_1..A_m), ...``.
Any separability question is asked with respect to the parties, so cone
routines first move to *party-major* order, ``(A_1: step 1..L), (A_2: ...), ...``,
where party ``k`` owns a single local space of dimension ``d_k ** L``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_ATOL = 1e-12
EIG_RESIDUAL_TOL = 1e-9

_dimension_cap = 4096


class StructureError(ValueError):
    """Raised for invalid or incompatible party structures."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


def dimension_cap() -> int:
    return _dimension_cap


def set_dimension_cap(cap: int) -> int:
    """Set the maximal total Hilbert-space dimension; returns the previous cap."""
    global _dimension_cap
    if cap < 1:
        raise ValueError("dimension cap must be positive")
    previous, _dimension_cap = _dimension_cap, int(cap)
    return previous


class Ordering(str, enum.Enum):
    STEP_MAJOR = "step-major"
    PARTY_MAJOR = "party-major"


@dataclass(frozen=True)
class PartyStructure:
    """Local dimensions of the ``m`` parties, the number of steps and the subsystem order."""

    party_dims: tuple[int, ...]
    steps: int = 1
    ordering: Ordering = Ordering.STEP_MAJOR

    def __post_init__(self):
        dims = tuple(int(d) for d in self.party_dims)
        object.__setattr__(self, "party_dims", dims)
        object.__setattr__(self, "ordering", Ordering(self.ordering))
        if len(dims) < 2:
            raise StructureError(f"need at least two parties, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise StructureError(f"local dimensions must be >= 2, got {dims}")
        if int(self.steps) < 1:
            raise StructureError(f"steps must be >= 1, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))
        # a single step has only one subsystem order
        if self.steps == 1 and self.ordering is not Ordering.STEP_MAJOR:
            object.__setattr__(self, "ordering", Ordering.STEP_MAJOR)
        if self.dim > _dimension_cap:
            raise StructureError(
                f"total dimension {self.dim} exceeds the dimension cap {_dimension_cap}"
            )

    @property
    def parties(self) -> int:
        return len(self.party_dims)

    @property
    def step_dim(self) -> int:
        return int(np.prod(self.party_dims))

    @property
    def dim(self) -> int:
        return self.step_dim**self.steps

    @property
    def local_dims(self) -> tuple[int, ...]:
        """Dimension of each party's space once all its steps are grouped together."""
        return tuple(d**self.steps for d in self.party_dims)

    @property
    def is_party_major(self) -> bool:
        return self.steps == 1 or self.ordering is Ordering.PARTY_MAJOR

    def with_steps(self, steps: int) -> PartyStructure:
        return PartyStructure(self.party_dims, steps, Ordering.STEP_MAJOR)

    def with_ordering(self, ordering: Ordering) -> PartyStructure:
        return PartyStructure(self.party_dims, self.steps, ordering)

    def subsystem_dims(self) -> list[int]:
        """Dimensions of the elementary subsystems in storage order."""
        m, L = self.parties, self.steps
        if self.ordering is Ordering.STEP_MAJOR:
            return [self.party_dims[k] for _ in range(L) for k in range(m)]
        return [self.party_dims[k] for k in range(m) for _ in range(L)]


def uniform(m: int, d: int, steps: int = 1) -> PartyStructure:
    return PartyStructure((d,) * m, steps)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    structure: PartyStructure
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex)
        n = self.structure.dim
        if a.shape != (n, n):
            raise StructureError(f"matrix shape {a.shape} does not match dimension {n}")
        deviation = np.max(np.abs(a - a.conj().T)) if n else 0.0
        if deviation > HERMITIAN_ATOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {deviation:.3e})")
        a = (a + a.conj().T) / 2
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @classmethod
    def hermitized(cls, structure: PartyStructure, matrix) -> HermitianOperator:
        """Build from a numerically computed matrix, symmetrizing first."""
        a = np.asarray(matrix, dtype=complex)
        return cls(structure, (a + a.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.structure.dim

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def inner(self, other: HermitianOperator) -> float:
        """Hilbert-Schmidt inner product ``Tr(A B)``."""
        _require_same_structure(self, other)
        return float(np.sum(self.matrix.T * other.matrix).real)

    def _like(self, matrix) -> HermitianOperator:
        return HermitianOperator.hermitized(self.structure, matrix)

    def __add__(self, other: HermitianOperator) -> HermitianOperator:
        _require_same_structure(self, other)
        return self._like(self.matrix + other.matrix)

    def __sub__(self, other: HermitianOperator) -> HermitianOperator:
        _require_same_structure(self, other)
        return self._like(self.matrix - other.matrix)

    def __neg__(self) -> HermitianOperator:
        return self._like(-self.matrix)

    def __mul__(self, scalar: float) -> HermitianOperator:
        return self._like(float(scalar) * self.matrix)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> HermitianOperator:
        return self._like(self.matrix / float(scalar))

    def allclose(self, other: HermitianOperator, atol: float = 1e-9) -> bool:
        return self.structure == other.structure and bool(
            np.max(np.abs(self.matrix - other.matrix), initial=0.0) <= atol
        )


def _require_same_structure(a: HermitianOperator, b: HermitianOperator) -> None:
    if a.structure != b.structure:
        raise StructureError(f"structure mismatch: {a.structure} vs {b.structure}")


@dataclass(frozen=True, eq=False)
class ProductPureState:
    """One unit vector per party, each on the party's grouped space ``C^(d_k^L)``."""

    vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vs = []
        for k, v in enumerate(self.vectors):
            v = np.array(v, dtype=complex).ravel()
            norm = np.linalg.norm(v)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"party {k} vector has norm {norm!r}, expected 1")
            v.setflags(write=False)
            vs.append(v)
        object.__setattr__(self, "vectors", tuple(vs))

    @classmethod
    def normalized(cls, vectors: Sequence[np.ndarray]) -> ProductPureState:
        return cls(tuple(np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in vectors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.vectors)

    def full_vector(self) -> np.ndarray:
        return reduce(np.kron, self.vectors)


# ---------------------------------------------------------------------------
# constructors


def identity(structure: PartyStructure) -> HermitianOperator:
    return HermitianOperator(structure, np.eye(structure.dim))


def zero(structure: PartyStructure) -> HermitianOperator:
    return HermitianOperator(structure, np.zeros((structure.dim, structure.dim)))


def ghz_vector(m: int, d: int) -> np.ndarray:
    v = np.zeros(d**m)
    stride = sum(d**k for k in range(m))  # index of |i...i> is i * stride
    v[np.arange(d) * stride] = 1 / np.sqrt(d)
    return v


def ghz(m: int, d: int) -> HermitianOperator:
    """Projector onto ``(1/sqrt(d)) sum_i |i...i>`` shared by ``m`` parties."""
    structure = uniform(m, d)
    v = ghz_vector(m, d)
    return HermitianOperator(structure, np.outer(v, v))


def basis_product_projector(m: int, d: int, i: int) -> HermitianOperator:
    """Diagonal projector onto ``|i>^(tensor m)``."""
    if not 0 <= i < d:
        raise IndexError(f"basis index {i} out of range for d={d}")
    structure = uniform(m, d)
    diag = np.zeros(structure.dim)
    diag[i * sum(d**k for k in range(m))] = 1.0
    return HermitianOperator(structure, np.diag(diag))


def tensor(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    """Kronecker product, appending the steps of ``b`` after those of ``a``."""
    sa, sb = a.structure, b.structure
    if sa.party_dims != sb.party_dims:
        raise StructureError(f"party dims differ: {sa.party_dims} vs {sb.party_dims}")
    if not (sa.ordering is Ordering.STEP_MAJOR and sb.ordering is Ordering.STEP_MAJOR):
        raise StructureError("tensor expects step-major operands")
    structure = sa.with_steps(sa.steps + sb.steps)
    return HermitianOperator(structure, np.kron(a.matrix, b.matrix))


def tensor_all(ops: Sequence[HermitianOperator]) -> HermitianOperator:
    if not ops:
        raise ValueError("need at least one operator")
    return reduce(tensor, ops)


# ---------------------------------------------------------------------------
# subsystem regrouping


def _regroup_perm(m: int, L: int) -> list[int]:
    # party-major position k*L + s holds step-major subsystem s*m + k
    return [s * m + k for k in range(m) for s in range(L)]


def _permute_subsystems(matrix: np.ndarray, dims: list[int], perm: list[int]) -> np.ndarray:
    n = len(dims)
    t = matrix.reshape(dims + dims)
    t = t.transpose(perm + [p + n for p in perm])
    side = matrix.shape[0]
    return t.reshape(side, side)


def regroup_step_major_to_party_major(op: HermitianOperator) -> HermitianOperator:
    s = op.structure
    if s.steps == 1:
        return op
    if s.ordering is not Ordering.STEP_MAJOR:
        raise StructureError("operator is already party-major")
    perm = _regroup_perm(s.parties, s.steps)
    matrix = _permute_subsystems(op.matrix, s.subsystem_dims(), perm)
    return HermitianOperator(s.with_ordering(Ordering.PARTY_MAJOR), matrix)


def regroup_party_major_to_step_major(op: HermitianOperator) -> HermitianOperator:
    s = op.structure
    if s.steps == 1:
        return op
    if s.ordering is not Ordering.PARTY_MAJOR:
        raise StructureError("operator is already step-major")
    perm = list(np.argsort(_regroup_perm(s.parties, s.steps)))
    matrix = _permute_subsystems(op.matrix, s.subsystem_dims(), perm)
    return HermitianOperator(s.with_ordering(Ordering.STEP_MAJOR), matrix)


def as_party_major(op: HermitianOperator) -> HermitianOperator:
    return op if op.structure.is_party_major else regroup_step_major_to_party_major(op)


def as_step_major(op: HermitianOperator) -> HermitianOperator:
    s = op.structure
    if s.steps == 1 or s.ordering is Ordering.STEP_MAJOR:
        return op
    return regroup_party_major_to_step_major(op)


def permute_steps(op: HermitianOperator, order: Sequence[int]) -> HermitianOperator:
    """Reorder whole steps of a step-major operator: new step ``j`` is old step ``order[j]``.

    Each party's local spaces are only shuffled among themselves, so the map
    preserves separability and block positivity with respect to the parties.
    """
    s = op.structure
    if s.ordering is not Ordering.STEP_MAJOR:
        raise StructureError("permute_steps expects a step-major operator")
    order = [int(j) for j in order]
    if sorted(order) != list(range(s.steps)):
        raise ValueError(f"{order} is not a permutation of the steps")
    m = s.parties
    perm = [order[j] * m + k for j in range(s.steps) for k in range(m)]
    return HermitianOperator(s, _permute_subsystems(op.matrix, s.subsystem_dims(), perm))


# ---------------------------------------------------------------------------
# product-state machinery


def _check_product_state(op: HermitianOperator, states: ProductPureState) -> None:
    if not op.structure.is_party_major:
        raise StructureError("operator must be party-major (regroup first)")
    if states.dims != op.structure.local_dims:
        raise StructureError(
            f"state dims {states.dims} do not match local dims {op.structure.local_dims}"
        )


def contract_all_but_one(
    op: HermitianOperator, states: ProductPureState, k: int
) -> np.ndarray:
    """Partial expectation ``<psi_j, j != k| op |psi_j, j != k>`` on party ``k``'s space."""
    _check_product_state(op, states)
    m = op.structure.parties
    if not 0 <= k < m:
        raise IndexError(f"party index {k} out of range for {m} parties")
    return _contract(op.matrix.reshape(op.structure.local_dims * 2), states.vectors, k)


def _contract(t: np.ndarray, vectors: Sequence[np.ndarray], k: int) -> np.ndarray:
    m = len(vectors)
    # contract from the last party down so remaining axis numbers stay valid
    for j in reversed(range(m)):
        if j == k:
            continue
        v = vectors[j]
        ket_axis = j
        bra_axis = t.ndim // 2 + j
        t = np.tensordot(t, v, axes=([bra_axis], [0]))
        t = np.tensordot(v.conj(), t, axes=([0], [ket_axis]))
    c = t  # shape (D_k, D_k)
    return (c + c.conj().T) / 2


def expectation(op: HermitianOperator, states: ProductPureState) -> float:
    """``<psi_1 ... psi_m| op |psi_1 ... psi_m>`` for a party-major operator."""
    _check_product_state(op, states)
    v = states.full_vector()
    return float(np.vdot(v, op.matrix @ v).real)


def eig_min(op: HermitianOperator | np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector."""
    a = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    w, v = np.linalg.eigh(a)
    value, vector = float(w[0]), v[:, 0]
    residual = float(np.linalg.norm(a @ vector - value * vector))
    if residual > EIG_RESIDUAL_TOL * max(1.0, np.abs(w).max(initial=0.0)):
        raise ConvergenceError("eigensolver residual too large", residual)
    return value, vector


def min_eigenvalue(op: HermitianOperator | np.ndarray) -> float:
    a = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    return float(np.linalg.eigvalsh(a)[0])


def is_psd(op: HermitianOperator | np.ndarray, atol: float = 1e-9) -> bool:
    return min_eigenvalue(op) >= -atol

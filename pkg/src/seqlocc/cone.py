"""Block positivity: certification by decomposition, refutation by see-saw search.

An operator is block positive when its expectation is non-negative on every
product state of the parties.  Deciding this is hard in general, so a query
ends in one of three verdicts:

* ``CERTIFIED`` -- a :class:`DecompositionCertificate` writes the operator as a
  non-negative combination of terms that are each block positive for a
  checkable reason (positive semidefinite, the registered
  identity-minus-GHZ primitive, or a product of separable factors);
* ``REFUTED`` -- a product pure state with expectation below ``-margin``;
* ``UNDECIDED`` -- neither was found.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .operators import (
    HermitianOperator,
    PartyStructure,
    ProductPureState,
    StructureError,
    _contract,
    as_party_major,
    as_step_major,
    expectation,
    identity,
    min_eigenvalue,
    permute_steps,
    uniform,
    ghz,
)

DEFAULT_SEED = 20240
DEFAULT_RESTARTS = 32
DEFAULT_ITERS = 200
DEFAULT_MARGIN = 1e-7
PSD_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-9
SWEEP_TOL = 1e-10

PRIMITIVE_NOTE = (
    "identity minus d' times the m-party GHZ projector on local dimension d'; "
    "block positive for all m, d' >= 2 (registered as a known result)"
)


class ConeStatus(str, enum.Enum):
    CERTIFIED = "CertifiedBlockPositive"
    REFUTED = "Refuted"
    UNDECIDED = "Undecided"


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True, eq=False)
class BlockPositiveFactor:
    """Operator on the first ``steps`` steps with a reason for block positivity.

    ``provenance`` is ``"psd"`` or ``"primitive"``.  A primitive over ``t``
    steps of local dimension ``d`` is ``1 - d^t GHZ_{d^t}`` once each party's
    ``t`` subsystems are grouped; ``t = 0`` is the scalar ``1 - 1 = 0``.
    """

    matrix: np.ndarray = field(repr=False)
    party_dims: tuple[int, ...]
    steps: int
    provenance: str

    def problems(self) -> list[str]:
        dims, t = self.party_dims, self.steps
        side = int(np.prod(dims)) ** t
        a = np.asarray(self.matrix)
        if a.shape != (side, side):
            return [f"matrix shape {a.shape}, expected {(side, side)}"]
        if self.provenance == "psd":
            if min_eigenvalue(a) < -PSD_TOL:
                return [f"claimed PSD but min eigenvalue is {min_eigenvalue(a):.3e}"]
            return []
        if self.provenance == "primitive":
            if len(set(dims)) != 1:
                return ["primitive needs equal local dimensions"]
            expected = primitive_over_steps(len(dims), dims[0], t)
            dev = float(np.max(np.abs(a - expected)))
            if dev > RECONSTRUCTION_TOL:
                return [f"does not match the registered primitive (deviation {dev:.3e})"]
            return []
        return [f"unknown provenance {self.provenance!r}"]


@dataclass(frozen=True, eq=False)
class SeparableFactor:
    """Single-step operator given explicitly as a sum of products of local PSD matrices."""

    products: tuple[tuple[np.ndarray, ...], ...] = field(repr=False)

    @property
    def party_dims(self) -> tuple[int, ...]:
        return tuple(np.asarray(x).shape[0] for x in self.products[0])

    @property
    def matrix(self) -> np.ndarray:
        return sum(reduce(np.kron, [np.asarray(x, dtype=complex) for x in p]) for p in self.products)

    def problems(self) -> list[str]:
        out = []
        if not self.products:
            return ["empty separable factor"]
        dims = self.party_dims
        for s, prod in enumerate(self.products):
            if tuple(np.asarray(x).shape[0] for x in prod) != dims:
                out.append(f"product {s} has inconsistent local dimensions")
                continue
            for k, x in enumerate(prod):
                x = np.asarray(x)
                if np.max(np.abs(x - x.conj().T)) > 1e-12 or min_eigenvalue(x) < -PSD_TOL:
                    out.append(f"product {s}, party {k}: local factor is not PSD")
        return out


def separable_from_diagonal(op: HermitianOperator | np.ndarray, party_dims=None) -> SeparableFactor:
    """Write a diagonal operator with non-negative diagonal as a sum of product projectors."""
    if isinstance(op, HermitianOperator):
        party_dims = op.structure.party_dims
        if op.structure.steps != 1:
            raise StructureError("separable factors cover a single step")
        a = op.matrix
    else:
        a = np.asarray(op)
    if party_dims is None:
        raise ValueError("party_dims required for raw matrices")
    diag = np.diag(a)
    if np.max(np.abs(a - np.diag(diag)), initial=0.0) > 1e-12:
        raise ValueError("operator is not diagonal in the product basis")
    if np.any(diag.real < -PSD_TOL):
        raise ValueError("diagonal has negative entries")
    products = []
    for flat in np.flatnonzero(np.abs(diag) > 0):
        digits = np.unravel_index(flat, party_dims)
        prod = []
        for k, dk in enumerate(party_dims):
            e = np.zeros((dk, dk))
            e[digits[k], digits[k]] = 1.0
            prod.append(e)
        prod[0] = prod[0] * float(diag[flat].real)
        products.append(tuple(prod))
    if not products:
        products.append(tuple(np.zeros((dk, dk)) for dk in party_dims))
    return SeparableFactor(tuple(products))


def separable_identity(party_dims: Sequence[int]) -> SeparableFactor:
    return SeparableFactor((tuple(np.eye(d) for d in party_dims),))


@dataclass(frozen=True, eq=False)
class DecompositionTerm:
    """``coefficient * (block-positive factor) (x) (separable factor) (x) ...`` in step order."""

    coefficient: float
    block_positive: BlockPositiveFactor | None
    separable: tuple[SeparableFactor, ...] = ()
    note: str = ""

    @property
    def steps(self) -> int:
        bp = self.block_positive.steps if self.block_positive is not None else 0
        return bp + len(self.separable)

    def matrix(self) -> np.ndarray:
        factors = []
        if self.block_positive is not None:
            factors.append(np.asarray(self.block_positive.matrix, dtype=complex))
        factors.extend(s.matrix for s in self.separable)
        if not factors:
            return np.array([[self.coefficient]], dtype=complex)
        return self.coefficient * reduce(np.kron, factors)

    def problems(self, party_dims: tuple[int, ...], steps: int) -> list[str]:
        out = []
        if not self.coefficient >= 0:
            out.append(f"negative coefficient {self.coefficient!r}")
        if self.steps != steps:
            out.append(f"term covers {self.steps} steps, target has {steps}")
        if self.block_positive is not None:
            if self.block_positive.party_dims != party_dims:
                out.append("block-positive factor has wrong party dims")
            out.extend(f"block-positive factor: {p}" for p in self.block_positive.problems())
        for l, s in enumerate(self.separable):
            ps = s.problems()
            if not ps and s.party_dims != party_dims:
                ps = ["wrong party dims"]
            out.extend(f"separable factor {l}: {p}" for p in ps)
        return out


@dataclass(frozen=True, eq=False)
class DecompositionCertificate:
    """Sum of block-positive terms claimed to equal ``target``.

    If ``step_order`` is given, the summed terms are reordered with
    :func:`permute_steps` before the comparison; whole-step permutations act
    locally on every party and so keep block positivity.
    """

    terms: tuple[DecompositionTerm, ...]
    target: HermitianOperator
    step_order: tuple[int, ...] | None = None

    def reconstruction(self) -> HermitianOperator:
        s = self.target.structure.with_steps(self.target.structure.steps)
        total = sum(t.matrix() for t in self.terms)
        op = HermitianOperator.hermitized(s, total)
        if self.step_order is not None:
            op = permute_steps(op, self.step_order)
        return op

    def reconstruction_error(self) -> float:
        target = as_step_major(self.target)
        return float(np.max(np.abs(self.reconstruction().matrix - target.matrix)))


def check_decomposition(cert: DecompositionCertificate) -> list[str]:
    """List everything wrong with a certificate; empty means it is valid."""
    s = cert.target.structure
    problems = []
    if not cert.terms:
        problems.append("certificate has no terms")
    for j, term in enumerate(cert.terms):
        problems.extend(f"term {j}: {p}" for p in term.problems(s.party_dims, s.steps))
    if problems:
        return problems
    try:
        err = cert.reconstruction_error()
    except (ValueError, StructureError) as exc:
        return [f"reconstruction failed: {exc}"]
    if err > RECONSTRUCTION_TOL:
        problems.append(f"terms do not sum to the target (max deviation {err:.3e})")
    return problems


def verify_decomposition(cert: DecompositionCertificate) -> bool:
    return not check_decomposition(cert)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True, eq=False)
class ConeVerdict:
    status: ConeStatus
    best_found: float | None = None
    witness: ProductPureState | None = None
    witness_value: float | None = None
    certificate: DecompositionCertificate | None = None
    method: str = ""

    @property
    def certified(self) -> bool:
        return self.status is ConeStatus.CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.status is ConeStatus.REFUTED


def known_primitive_bp(m: int, dprime: int) -> HermitianOperator:
    """``1 - d' GHZ`` on ``m`` parties of local dimension ``d'``."""
    if m < 2 or dprime < 2:
        raise ValueError("need m, d' >= 2")
    s = uniform(m, dprime)
    return identity(s) - ghz(m, dprime) * dprime


def primitive_over_steps(m: int, d: int, t: int) -> np.ndarray:
    """Step-major matrix of ``1 - d^t GHZ^{(x) t}``.

    Grouping each party's ``t`` subsystems turns the ``t``-fold GHZ power into
    the GHZ projector of local dimension ``d^t``, so this is the primitive of
    :func:`known_primitive_bp` written over ``t`` steps.
    """
    if t == 0:
        return np.zeros((1, 1))
    phi = ghz(m, d).matrix
    power = reduce(np.kron, [phi] * t)
    return np.eye(power.shape[0]) - d**t * power


def certify_psd(op: HermitianOperator) -> ConeVerdict:
    value = min_eigenvalue(op)
    if value < -PSD_TOL:
        return ConeVerdict(ConeStatus.UNDECIDED, method="psd-test")
    s = op.structure
    factor = BlockPositiveFactor(as_step_major(op).matrix, s.party_dims, s.steps, "psd")
    cert = DecompositionCertificate((DecompositionTerm(1.0, factor, (), "positive semidefinite"),), op)
    return ConeVerdict(ConeStatus.CERTIFIED, best_found=max(value, 0.0), certificate=cert, method="psd")


def certify_with_primitive(op: HermitianOperator) -> ConeVerdict:
    """Try ``op = c * primitive + (PSD remainder)`` with ``c > 0``."""
    s = op.structure
    if len(set(s.party_dims)) != 1:
        return ConeVerdict(ConeStatus.UNDECIDED, method="primitive")
    stepped = as_step_major(op)
    prim = primitive_over_steps(s.parties, s.party_dims[0], s.steps)
    c = float(np.sum(prim.conj() * stepped.matrix).real / np.sum(np.abs(prim) ** 2))
    if c <= 0:
        return ConeVerdict(ConeStatus.UNDECIDED, method="primitive")
    remainder = stepped.matrix - c * prim
    remainder = (remainder + remainder.conj().T) / 2
    if min_eigenvalue(remainder) < -PSD_TOL:
        return ConeVerdict(ConeStatus.UNDECIDED, method="primitive")
    terms = [
        DecompositionTerm(
            c,
            BlockPositiveFactor(prim, s.party_dims, s.steps, "primitive"),
            (),
            PRIMITIVE_NOTE,
        )
    ]
    if np.max(np.abs(remainder)) > 0:
        terms.append(
            DecompositionTerm(1.0, BlockPositiveFactor(remainder, s.party_dims, s.steps, "psd"))
        )
    cert = DecompositionCertificate(tuple(terms), op)
    if not verify_decomposition(cert):
        return ConeVerdict(ConeStatus.UNDECIDED, method="primitive")
    return ConeVerdict(ConeStatus.CERTIFIED, best_found=0.0, certificate=cert, method="primitive")


def certify_block_positive(op: HermitianOperator, allow_primitives: bool = True) -> ConeVerdict:
    verdict = certify_psd(op)
    if verdict.certified or not allow_primitives:
        return verdict
    return certify_with_primitive(op)


# ---------------------------------------------------------------------------
# see-saw search over product pure states


@dataclass(frozen=True, eq=False)
class SeesawResult:
    min_value: float
    state: ProductPureState
    restart: int
    sweeps: int


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def seesaw_descent(
    op: HermitianOperator, start: ProductPureState, iters: int = DEFAULT_ITERS
) -> tuple[ProductPureState, list[float]]:
    """Alternating minimization from ``start``.

    Returns the final state and the objective after every single-party update.
    """
    op = as_party_major(op)
    dims = op.structure.local_dims
    t = op.matrix.reshape(dims * 2)
    vectors = list(start.vectors)
    history = []
    previous = np.inf
    for _ in range(iters):
        for k in range(len(dims)):
            w, v = np.linalg.eigh(_contract(t, vectors, k))
            vectors[k] = v[:, 0] / np.linalg.norm(v[:, 0])
            history.append(float(w[0]))
        if previous - history[-1] < SWEEP_TOL:
            break
        previous = history[-1]
    return ProductPureState(tuple(vectors)), history


def seesaw_min_product(
    op: HermitianOperator,
    restarts: int = DEFAULT_RESTARTS,
    iters: int = DEFAULT_ITERS,
    seed: int = DEFAULT_SEED,
) -> SeesawResult:
    """Lowest product-state expectation found over independent random restarts."""
    op = as_party_major(op)
    dims = op.structure.local_dims
    best: SeesawResult | None = None
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(max(1, restarts))):
        rng = np.random.default_rng(child)
        start = ProductPureState(tuple(_random_unit(rng, d) for d in dims))
        state, history = seesaw_descent(op, start, iters)
        value = expectation(op, state)
        if best is None or value < best.min_value:
            best = SeesawResult(value, state, r, len(history) // len(dims))
    return best


def refute_block_positivity(
    op: HermitianOperator,
    restarts: int = DEFAULT_RESTARTS,
    iters: int = DEFAULT_ITERS,
    seed: int = DEFAULT_SEED,
    margin: float = DEFAULT_MARGIN,
) -> ConeVerdict:
    pm = as_party_major(op)
    found = seesaw_min_product(pm, restarts, iters, seed)
    # re-evaluate from scratch rather than trusting the search's bookkeeping
    value = expectation(pm, found.state)
    if value <= -margin:
        return ConeVerdict(
            ConeStatus.REFUTED,
            best_found=value,
            witness=found.state,
            witness_value=value,
            method="seesaw",
        )
    return ConeVerdict(ConeStatus.UNDECIDED, best_found=value, method="seesaw")


@dataclass(frozen=True)
class ConeParams:
    restarts: int = DEFAULT_RESTARTS
    iters: int = DEFAULT_ITERS
    seed: int = DEFAULT_SEED
    margin: float = DEFAULT_MARGIN
    allow_primitives: bool = True


def analyze_cone(op: HermitianOperator, params: ConeParams = ConeParams()) -> ConeVerdict:
    """Certify if possible, otherwise search for a refuting product state."""
    verdict = certify_block_positive(op, params.allow_primitives)
    if verdict.certified:
        return verdict
    return refute_block_positivity(op, params.restarts, params.iters, params.seed, params.margin)


# ---------------------------------------------------------------------------
# telescoping


@dataclass(frozen=True, eq=False)
class TelescopeTerm:
    prefix: tuple[np.ndarray, ...]
    difference: np.ndarray
    suffix: tuple[np.ndarray, ...]

    @property
    def factors(self) -> tuple[np.ndarray, ...]:
        return self.prefix + (self.difference,) + self.suffix

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, self.factors)


def _as_array(x) -> np.ndarray:
    return x.matrix if isinstance(x, HermitianOperator) else np.asarray(x)


def telescope(a_list: Sequence, b_list: Sequence) -> list[TelescopeTerm]:
    """Terms ``A_1..A_{j-1} (x) (A_j - B_j) (x) B_{j+1}..B_K`` summing to ``(x)A - (x)B``."""
    a = [_as_array(x) for x in a_list]
    b = [_as_array(x) for x in b_list]
    if len(a) != len(b) or not a:
        raise ValueError(f"need equal, non-zero lengths; got {len(a)} and {len(b)}")
    for j, (x, y) in enumerate(zip(a, b)):
        if x.shape != y.shape:
            raise StructureError(f"factor {j}: shapes {x.shape} and {y.shape} differ")
    return [
        TelescopeTerm(tuple(a[:j]), a[j] - b[j], tuple(b[j + 1 :])) for j in range(len(a))
    ]

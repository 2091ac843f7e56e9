"""Minimum-error discrimination with a checkable dual certificate.

The optimal guessing probability is the value of the semidefinite program

    maximize   sum_i Tr(A_i M_i)      subject to  M_i >= 0,  sum_i M_i = 1
    minimize   Tr(Y)                  subject to  Y - A_i >= 0

with ``A_i = eta_i rho_i``.  Any feasible measurement gives a lower bound and
any feasible ``Y`` an upper bound, so a pair with small ``Tr(Y) - value`` pins
the optimum down.  The pair is found with a log-barrier method on the dual:
on the central path ``M_i = (Y - A_i)^(-1) / t`` is an exact measurement
candidate and the duality gap equals ``n * dim / t``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .ensembles import Measurement, SequenceEnsemble, StateEnsemble
from .operators import ConvergenceError, HermitianOperator, min_eigenvalue

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000
DUAL_PSD_TOL = 1e-8
# the Newton system has (dim^2)^2 entries; cost grows like dim^6
SOLVER_MAX_DIM = 32


@dataclass(frozen=True, eq=False)
class PgResult:
    value: float
    measurement: Measurement
    dual: HermitianOperator
    gap: float
    iterations: int = 0

    @property
    def upper(self) -> float:
        return self.dual.trace()


def helstrom_two_state(e: StateEnsemble) -> float:
    """Closed form ``(1 + ||eta_1 rho_1 - eta_2 rho_2||_1) / 2``."""
    if len(e) != 2:
        raise ValueError(f"Helstrom formula needs exactly two states, got {len(e)}")
    diff = e.weighted(1).matrix - e.weighted(2).matrix
    return float((1 + np.abs(np.linalg.eigvalsh(diff)).sum()) / 2)


def _newton_direction(Zinv: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Solve ``sum_i Z_i^-1 dY Z_i^-1 = -G`` in row-major vectorized form."""
    dim = G.shape[0]
    # kron(Z, Z^T) summed over i
    K = np.einsum("iab,idc->acbd", Zinv, Zinv).reshape(dim * dim, dim * dim)
    K = (K + K.conj().T) / 2
    rhs = -G.reshape(-1)
    try:
        x = scipy.linalg.cho_solve(scipy.linalg.cho_factor(K), rhs)
    except np.linalg.LinAlgError:
        x = scipy.linalg.solve(K, rhs, assume_a="her")
    return x.reshape(dim, dim)


def _line_search(Y: np.ndarray, A: list[np.ndarray], dY: np.ndarray, t: float) -> float:
    """Exact minimizer of the barrier along ``Y + s dY``.

    With generalized eigenvalues ``mu`` of ``(dY, Y - A_i)`` the barrier changes by
    ``s t Tr(dY) - sum log(1 + s mu)``, which is evaluated without cancellation.
    """
    mus = np.concatenate([scipy.linalg.eigh(dY, Y - a, eigvals_only=True) for a in A])
    c = t * np.trace(dY).real

    def slope(s: float) -> float:
        return c - float(np.sum(mus / (1 + s * mus)))

    if slope(0.0) >= 0:
        return 0.0
    neg = mus[mus < 0]
    hi = 0.99 * float(np.min(-1 / neg)) if neg.size else 1.0
    if not neg.size:
        while slope(hi) < 0 and hi < 1e6:
            hi *= 2
    if slope(hi) <= 0:
        return hi
    return scipy.optimize.brentq(slope, 0.0, hi, xtol=1e-12 * hi, maxiter=500)


def _polish_measurement(mats: list[np.ndarray]) -> list[np.ndarray]:
    """Project onto the measurement set: clip negative eigenvalues, then renormalize."""
    clipped = []
    for m in mats:
        m = (m + m.conj().T) / 2
        w, v = np.linalg.eigh(m)
        clipped.append((v * np.clip(w, 0, None)) @ v.conj().T)
    w, v = np.linalg.eigh(sum(clipped))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    out = []
    for m in clipped:
        m = s_inv_half @ m @ s_inv_half
        out.append((m + m.conj().T) / 2)
    return out


def _tighten_dual(Y: np.ndarray, A: list[np.ndarray]) -> np.ndarray:
    """Shift ``Y`` by a multiple of the identity so that ``min_i lambda_min(Y - A_i) = 0``."""
    shift = min(np.linalg.eigvalsh(Y - a)[0] for a in A)
    return Y - shift * np.eye(Y.shape[0])


def solve_pg(
    e: StateEnsemble | SequenceEnsemble,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PgResult:
    """Optimal global guessing probability with primal measurement and dual witness.

    Raises ``ConvergenceError`` (carrying the best gap) if the certified gap
    cannot be brought below ``tol`` within ``max_iter`` Newton steps.
    """
    if isinstance(e, SequenceEnsemble):
        e = e.flatten()
    structure = e.structure
    dim, n = structure.dim, len(e)
    A = [e.weighted(i).matrix for i in range(1, n + 1)]

    if n == 1:
        return PgResult(1.0, Measurement.trivial(structure), e.weighted(1), 0.0)
    if dim > SOLVER_MAX_DIM:
        raise ValueError(f"solve_pg supports dimension <= {SOLVER_MAX_DIM}, got {dim}")

    # the barrier gap n*dim/t is driven well below tol; polishing costs a little
    target = max(tol * 1e-4, 1e-13)
    eye = np.eye(dim)
    Y = (max(np.linalg.eigvalsh(a)[-1] for a in A) + 1.0) * eye
    t = n * dim / max(np.trace(Y).real, 1.0)
    mu = 10.0
    iterations = 0
    while True:
        for _ in range(100):
            iterations += 1
            if iterations > max_iter:
                raise ConvergenceError(
                    f"barrier method exceeded {max_iter} Newton steps", residual=n * dim / t
                )
            Zinv = np.linalg.inv(np.stack([Y - a for a in A]))
            G = t * eye - Zinv.sum(axis=0)
            G = (G + G.conj().T) / 2
            dY = _newton_direction(Zinv, G)
            dY = (dY + dY.conj().T) / 2
            decrement = -float(np.sum(G.T * dY).real)
            if decrement / 2 <= 1e-12:
                break
            step = _line_search(Y, A, dY, t)
            if step == 0.0:
                break
            Y = Y + step * dY
            lam = np.sqrt(max(decrement, 0.0))
            if lam < 1e-7:
                break
        if n * dim / t <= target:
            break
        t *= mu

    Zinv = [np.linalg.inv(Y - a) for a in A]
    M = _polish_measurement([z / t for z in Zinv])
    value = float(sum(np.sum(a.T * m).real for a, m in zip(A, M)))

    candidates = [_tighten_dual(Y, A)]
    Yp = sum(a @ m for a, m in zip(A, M))
    candidates.append(_tighten_dual((Yp + Yp.conj().T) / 2, A))
    Y_best = min(candidates, key=lambda y: np.trace(y).real)
    gap = float(np.trace(Y_best).real - value)
    log.debug("solve_pg: n=%d dim=%d value=%.15f gap=%.3e iters=%d", n, dim, value, gap, iterations)
    if gap > tol:
        raise ConvergenceError(f"duality gap {gap:.3e} above tolerance {tol:.1e}", residual=gap)

    measurement = Measurement.from_arrays(structure, M)
    dual = HermitianOperator.hermitized(structure, Y_best)
    return PgResult(value, measurement, dual, max(gap, 0.0), iterations)


def dual_feasibility(result: PgResult, e: StateEnsemble) -> float:
    """Smallest eigenvalue over all ``Y - eta_i rho_i``; non-negative means feasible."""
    return min(min_eigenvalue(result.dual - e.weighted(i)) for i in range(1, len(e) + 1))


@dataclass(frozen=True)
class PgFactorization:
    sequence_value: float
    step_values: tuple[float, ...]
    product: float
    difference: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.difference <= self.tol


def check_pg_factorization(se: SequenceEnsemble, tol: float = DEFAULT_TOL) -> PgFactorization:
    """Compare the guessing probability of the whole sequence with the product over steps."""
    steps = [solve_pg(f, tol=tol) for f in se.factors]
    step_values = tuple(r.value for r in steps)
    product = float(np.prod(step_values))
    if se.L == 1:
        whole = step_values[0]
    else:
        whole = solve_pg(se.flatten(), tol=tol).value
    return PgFactorization(whole, step_values, product, abs(whole - product), tol)

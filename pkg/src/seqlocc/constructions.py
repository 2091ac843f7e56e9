"""Concrete operators and ensembles: the GHZ-based families and random instances."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .ensembles import Measurement, StateEnsemble
from .operators import (
    HermitianOperator,
    PartyStructure,
    basis_product_projector,
    ghz,
    identity,
    ghz_vector,
    tensor,
    uniform,
)


def identity_mix(m: int, d: int, weights: Sequence[float]) -> HermitianOperator:
    """``w_0 * (maximally mixed) + w_1 * GHZ``; weights must sum to 1."""
    w0, w1 = (float(w) for w in weights)
    if w0 < 0 or w1 < 0 or abs(w0 + w1 - 1) > 1e-12:
        raise ValueError(f"weights {weights} must be non-negative and sum to 1")
    s = uniform(m, d)
    return identity(s) * (w0 / s.dim) + ghz(m, d) * w1


# -- first family: two states, identity-plus-GHZ versus GHZ ---------------------


def example1_priors(m: int, d: int) -> tuple[float, float]:
    D = d**m
    return 2 * D / (d + 3 * D), (d + D) / (d + 3 * D)


def example1_state(m: int, d: int, which: int) -> HermitianOperator:
    if which == 1:
        return identity_mix(m, d, (0.5, 0.5))
    if which == 2:
        return ghz(m, d)
    raise ValueError(f"state label must be 1 or 2, got {which}")


def example1_ensemble(m: int, d: int) -> StateEnsemble:
    return StateEnsemble(
        uniform(m, d),
        example1_priors(m, d),
        (example1_state(m, d, 1), example1_state(m, d, 2)),
        label=f"example1(m={m},d={d})",
    )


def example1_witness_operator(m: int, d: int) -> HermitianOperator:
    """``(1 - d GHZ) (x) (1 + d^m GHZ)`` on two steps, step-major."""
    s = uniform(m, d)
    one, phi = identity(s), ghz(m, d)
    return tensor(one - phi * d, one + phi * d**m)


def example1_sigma(m: int, d: int) -> HermitianOperator:
    """Two-step product state in which every party holds a two-level-pair GHZ state.

    Built directly from ``(1/d^m) sum |I><J| (x) |I><J|`` over multi-indices
    ``I, J`` in step-major order.
    """
    D = d**m
    v = np.zeros(D * D)
    v[np.arange(D) * (D + 1)] = 1 / np.sqrt(D)
    return HermitianOperator(uniform(m, d, 2), np.outer(v, v))


def example1_sigma_party_vectors(m: int, d: int) -> list[np.ndarray]:
    """Per-party unit vectors of the same state (each a two-qudit GHZ vector)."""
    return [ghz_vector(2, d) for _ in range(m)]


# -- second family: d product basis states, their complement, and GHZ -----------


def example2_priors(m: int, d: int) -> tuple[float, ...]:
    D = d**m
    return (1 / (D + d),) * d + ((D - d) / (D + d), d / (D + d))


def _complement_projector(m: int, d: int) -> HermitianOperator:
    s = uniform(m, d)
    out = identity(s)
    for j in range(d):
        out = out - basis_product_projector(m, d, j)
    return out


def example2_state(m: int, d: int, which: int) -> HermitianOperator:
    D = d**m
    if 1 <= which <= d:
        return basis_product_projector(m, d, which - 1)
    if which == d + 1:
        return _complement_projector(m, d) / (D - d)
    if which == d + 2:
        return ghz(m, d)
    raise ValueError(f"state label must be in 1..{d + 2}, got {which}")


def example2_ensemble(m: int, d: int) -> StateEnsemble:
    return StateEnsemble(
        uniform(m, d),
        example2_priors(m, d),
        tuple(example2_state(m, d, i) for i in range(1, d + 3)),
        label=f"example2(m={m},d={d})",
    )


def example2_R(m: int, d: int, i: int) -> HermitianOperator:
    """``(d^m + d) eta_i rho_i``."""
    if 1 <= i <= d:
        return basis_product_projector(m, d, i - 1)
    if i == d + 1:
        return _complement_projector(m, d)
    if i == d + 2:
        return ghz(m, d) * d
    raise ValueError(f"label must be in 1..{d + 2}, got {i}")


def example2_measurement(m: int, d: int) -> Measurement:
    """Local computational-basis measurement, coarse-grained; never guesses GHZ."""
    s = uniform(m, d)
    ops = [basis_product_projector(m, d, i) for i in range(d)]
    ops.append(_complement_projector(m, d))
    ops.append(identity(s) * 0.0)
    return Measurement(s, tuple(ops))


# -- random instances -----------------------------------------------------------


def random_state(
    structure: PartyStructure, rng: np.random.Generator, rank: int | None = None
) -> HermitianOperator:
    """Density matrix ``G G^dag / Tr`` with a complex Gaussian ``dim x rank`` factor."""
    n = structure.dim
    r = n if rank is None else rank
    g = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    rho = g @ g.conj().T
    return HermitianOperator.hermitized(structure, rho / np.trace(rho).real)


def random_ensemble(
    structure: PartyStructure,
    n: int,
    rng: np.random.Generator,
    rank: int | None = None,
) -> StateEnsemble:
    priors = rng.dirichlet(np.ones(n))
    # keep priors away from zero so validation never trips on rounding
    priors = 0.9 * priors + 0.1 / n
    priors = priors / priors.sum()
    states = tuple(random_state(structure, rng, rank) for _ in range(n))
    return StateEnsemble(structure, tuple(priors), states, label="random")


def random_measurement(
    structure: PartyStructure, n: int, rng: np.random.Generator
) -> Measurement:
    """Random POVM via ``S^(-1/2) P_i S^(-1/2)`` with ``S = sum P_i``."""
    dim = structure.dim
    ps = []
    for _ in range(n):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ps.append(g @ g.conj().T)
    w, v = np.linalg.eigh(sum(ps))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return Measurement.from_arrays(structure, [s_inv_half @ p @ s_inv_half for p in ps])

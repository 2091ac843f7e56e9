"""Slow, loop-based reference implementations used to check the vectorized code."""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np


def ghz_vector(m: int, d: int) -> np.ndarray:
    v = np.zeros(d**m)
    for i in range(d):
        # |i i ... i> has flat index i * (1 + d + ... + d^(m-1))
        v[sum(i * d**k for k in range(m))] = 1.0
    return v / np.sqrt(d)


def ghz(m: int, d: int) -> np.ndarray:
    v = ghz_vector(m, d)
    return np.outer(v, v)


def step_to_party_index(flat: int, m: int, d: int, L: int) -> int:
    """Map a step-major flat index to the party-major flat index, digit by digit."""
    digits = []
    for _ in range(m * L):
        digits.append(flat % d)
        flat //= d
    digits = digits[::-1]  # digits[s*m + k] = digit of party k at step s
    party = [digits[s * m + k] for k in range(m) for s in range(L)]
    out = 0
    for x in party:
        out = out * d + x
    return out


def regroup(matrix: np.ndarray, m: int, d: int, L: int) -> np.ndarray:
    n = matrix.shape[0]
    perm = [step_to_party_index(i, m, d, L) for i in range(n)]
    out = np.zeros_like(matrix)
    for i in range(n):
        for j in range(n):
            out[perm[i], perm[j]] = matrix[i, j]
    return out


def helstrom(priors, states) -> float:
    diff = priors[0] * states[0] - priors[1] * states[1]
    return float(0.5 * (1 + np.abs(np.linalg.eigvalsh(diff)).sum()))


def sigma_step_major(m: int, d: int) -> np.ndarray:
    """``(1/d^m) sum_{I,J} |I><J| (x) |I><J|`` built entry by entry."""
    D = d**m
    out = np.zeros((D * D, D * D))
    for I, J in itertools.product(range(D), repeat=2):
        out[I * D + I, J * D + J] = 1 / D
    return out


def sigma_party_major(m: int, d: int) -> np.ndarray:
    """Tensor product over parties of the two-qudit GHZ projector."""
    return reduce(np.kron, [ghz(2, d)] * m)


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def telescope_sum(a_list, b_list) -> np.ndarray:
    """Direct evaluation of the sum of telescoping terms."""
    K = len(a_list)
    total = 0
    for j in range(K):
        factors = list(a_list[:j]) + [a_list[j] - b_list[j]] + list(b_list[j + 1 :])
        total = total + kron_all(factors)
    return total


def basis_projector(m: int, d: int, i: int) -> np.ndarray:
    v = np.zeros(d**m)
    v[sum(i * d**k for k in range(m))] = 1
    return np.diag(v)

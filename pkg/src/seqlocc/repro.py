"""Recompute the checkable numbers of the two GHZ-based example families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .cone import ConeParams, refute_block_positivity, seesaw_min_product
from .constructions import (
    example1_ensemble,
    example1_sigma,
    example1_witness_operator,
    example2_ensemble,
    example2_measurement,
)
from .discrimination import SOLVER_MAX_DIM, helstrom_two_state, solve_pg
from .ensembles import SequenceEnsemble, max_prior, product_measurement, success_probability
from .factorizability import (
    Factorizable,
    ReportOptions,
    assemble_report,
    build_example2_certificate,
    check_theorem1,
    verify_theorem4_certificate,
)
from .operators import as_party_major, expectation, ghz, identity, tensor, uniform


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    value: float | None = None
    expected: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _close(name: str, value: float, expected: float, tol: float) -> Check:
    err = abs(value - expected)
    return Check(name, bool(err <= tol), f"{value!r} vs {expected!r} (|diff| {err:.2e} <= {tol:g})", value, expected)


def sigma_traces(m: int, d: int) -> tuple[float, float, float]:
    """``Tr[s (GHZ x 1)]``, ``Tr[s (1 x GHZ)]``, ``Tr[s (GHZ x GHZ)]`` for the two-pair GHZ product ``s``."""
    s = example1_sigma(m, d)
    one, phi = identity(uniform(m, d)), ghz(m, d)
    return tuple(s.inner(tensor(a, b)) for a, b in ((phi, one), (one, phi), (phi, phi)))


def sigma_witness_value(m: int, d: int) -> float:
    return example1_sigma(m, d).inner(example1_witness_operator(m, d))


def _example1(d: int, m: int, L: int, params: ConeParams) -> list[Check]:
    D = d**m
    e = example1_ensemble(m, d)
    out = []

    t1 = check_theorem1(e, 1, params)
    pl = t1.values.get("p_L", float("nan"))
    c = _close("single-step p_L via theorem 1", pl, 2 * D / (d + 3 * D), 1e-9)
    c.passed = c.passed and t1.holds and t1.values.get("p_SEP") == pl
    out.append(c)

    for label, v in zip(("GHZ x 1", "1 x GHZ", "GHZ x GHZ"), sigma_traces(m, d)):
        out.append(_close(f"trace of sigma against {label}", v, 1 / D, 1e-9))
    w = sigma_witness_value(m, d)
    c = _close("witness expectation on sigma", w, 2 - d - 1 / d ** (m - 1), 1e-9)
    c.passed = c.passed and w < 0
    out.append(c)

    if D <= SOLVER_MAX_DIM:
        pg = solve_pg(e).value
        out.append(_close("p_G of one step (solver)", pg, (2 * D + d - 1) / (d + 3 * D), 1e-8))
        out.append(_close("p_G of one step (Helstrom)", helstrom_two_state(e), pg, 1e-8))

    if L >= 2:
        op = as_party_major(example1_witness_operator(m, d))
        found = seesaw_min_product(op, params.restarts, params.iters, params.seed)
        target = 2 - d - 1 / d ** (m - 1)
        out.append(
            Check(
                "see-saw minimum on the two-step witness",
                bool(found.min_value <= target + 1e-6),
                f"{found.min_value!r} <= {target!r} + 1e-6",
                found.min_value,
                target,
            )
        )
        verdict = refute_block_positivity(op, params.restarts, params.iters, params.seed, params.margin)
        again = expectation(op, verdict.witness) if verdict.witness is not None else float("nan")
        out.append(
            Check(
                "refutation witness re-evaluates negative",
                bool(verdict.refuted and again < 0),
                f"status {verdict.status.value}, recomputed {again!r}",
                again,
            )
        )
        se = SequenceEnsemble.copies(e, L)
        rep = assemble_report(se, ReportOptions(cone=params, compute_pg=D <= SOLVER_MAX_DIM))
        out.append(
            Check(
                f"{L}-step sequence is not factorizable",
                rep.factorizable is Factorizable.NO,
                f"factorizable = {rep.factorizable.value}",
            )
        )
        if D**L <= SOLVER_MAX_DIM:
            whole = solve_pg(se).value
            out.append(_close("p_G of the sequence factorizes", whole, ((2 * D + d - 1) / (d + 3 * D)) ** L, 1e-6))
    return out


def _example2(d: int, m: int, L: int, params: ConeParams) -> list[Check]:
    D = d**m
    e = example2_ensemble(m, d)
    se = SequenceEnsemble.copies(e, L)
    cert = build_example2_certificate(d, m, L)
    out = []

    t4 = verify_theorem4_certificate(se, cert)
    out.append(Check("separable certificate accepted", t4.holds, f"{t4.status.value}: {t4.reason}"))
    out.append(_close("trace of the dual operator", cert.H.trace(), (D / (D + d)) ** L, 1e-9))
    worst = max(abs(r) for r in cert.residuals.values())
    out.append(Check("slackness residuals", bool(worst <= 1e-12), f"max |residual| {worst:.2e} <= 1e-12", worst, 0.0))
    rec = max(c.reconstruction_error() for c in cert.evidence.values())
    out.append(Check("decompositions reproduce H - eta rho", bool(rec <= 1e-9), f"max deviation {rec:.2e} <= 1e-9", rec, 0.0))
    seq = success_probability(se, product_measurement(cert.measurements))
    out.append(_close("product measurement attains trace(H)", seq, cert.H.trace(), 1e-8))

    local = success_probability(e, example2_measurement(m, d))
    out.append(_close("single-step LOCC value", local, D / (D + d), 1e-12))
    out.append(_close("single-step max prior", max_prior(e)[0], (D - d) / (D + d), 1e-12))
    if D <= SOLVER_MAX_DIM:
        pg = solve_pg(e).value
        out.append(
            Check(
                "single-step p_G strictly above the LOCC value",
                bool(pg - D / (D + d) > 1e-4),
                f"{pg!r} - {D / (D + d)!r} > 1e-4",
                pg,
                D / (D + d),
            )
        )
    rep = assemble_report(
        se, ReportOptions(cone=params, run_theorem2=False, compute_pg=D <= SOLVER_MAX_DIM, certificate=cert)
    )
    c2 = rep.conditions.get("corollary2")
    out.append(
        Check(
            "strict sandwich for the sequence",
            bool(rep.factorizable is Factorizable.YES and c2 is not None and c2.holds),
            f"factorizable = {rep.factorizable.value}, corollary = {c2.status.value if c2 else 'not run'}",
        )
    )
    return out


RUNNERS: dict[str, Callable[..., list[Check]]] = {"example1": _example1, "example2": _example2}


def run(example: str, d: int, m: int, L: int, params: ConeParams = ConeParams()) -> list[Check]:
    if not (2 <= d <= 4 and 2 <= m <= 3 and 1 <= L <= 3):
        raise ValueError(f"need 2 <= d <= 4, 2 <= m <= 3, 1 <= L <= 3; got d={d}, m={m}, L={L}")
    if example not in RUNNERS:
        raise ValueError(f"unknown example {example!r}")
    return RUNNERS[example](d, m, L, params)


def all_passed(checks: list[Check]) -> bool:
    return all(c.passed for c in checks) and bool(checks)


__all__ = ["Check", "run", "all_passed", "sigma_traces", "sigma_witness_value"]

"""Decision procedures for factorizable LOCC discrimination of sequence ensembles.

Notation: ``p_L``, ``p_SEP`` and ``p_G`` are the optimal guessing probabilities
under LOCC, separable and unrestricted measurements.  They always satisfy

    max prior <= p_L <= p_SEP <= p_G,     p_L(sequence) >= prod_l p_L(step l),

and the sequence is *factorizable* when the last inequality is an equality.
Each checker below returns a :class:`ConditionResult`; cone questions are
answered through :mod:`seqlocc.cone`, so a ``FAILS`` verdict is only issued on
a sound witness and an unresolved cone query yields ``UNDECIDED``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Sequence

import numpy as np

from .cone import (
    BlockPositiveFactor,
    ConeParams,
    ConeStatus,
    ConeVerdict,
    DecompositionCertificate,
    DecompositionTerm,
    analyze_cone,
    certify_psd,
    check_decomposition,
    primitive_over_steps,
    separable_from_diagonal,
    separable_identity,
    telescope,
)
from .constructions import example2_R, example2_ensemble, example2_measurement
from .discrimination import PgResult, solve_pg
from .ensembles import (
    Measurement,
    SequenceEnsemble,
    SequenceIndex,
    StateEnsemble,
    as_sequence,
    enumerate_indices,
    max_prior,
    product_measurement,
    success_probability,
)
from .operators import (
    ConvergenceError,
    HermitianOperator,
    StructureError,
    as_party_major,
    as_step_major,
    expectation,
    identity,
    tensor,
)

log = logging.getLogger(__name__)

SLACKNESS_TOL = 1e-9
EQUALITY_TOL = 1e-6
STRICT_TOL = 1e-9
PRIOR_TOL = 1e-9


class Verdict(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNDECIDED = "Undecided"


class Factorizable(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNDECIDED = "Undecided"


@dataclass
class ConditionResult:
    name: str
    status: Verdict
    reason: str = ""
    # probabilities established by the condition, e.g. {"p_L": 4/7, "p_SEP": 4/7}
    values: dict[str, float] = field(default_factory=dict)
    evidence: dict[str, Any] = field(default_factory=dict)
    cone: dict[SequenceIndex, ConeVerdict] = field(default_factory=dict, repr=False)

    @property
    def holds(self) -> bool:
        return self.status is Verdict.HOLDS

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status.value,
            "reason": self.reason,
            "values": dict(self.values),
            "evidence": self.evidence,
        }


def _verdict_summary(c: SequenceIndex, v: ConeVerdict) -> dict:
    out = {"index": list(c), "status": v.status.value, "method": v.method}
    if v.best_found is not None:
        out["best_found"] = v.best_found
    if v.witness is not None:
        out["witness_value"] = v.witness_value
        out["witness"] = [[[z.real, z.imag] for z in vec] for vec in v.witness.vectors]
    if v.certificate is not None:
        out["certificate_terms"] = len(v.certificate.terms)
    return out


# ---------------------------------------------------------------------------
# guessing the most likely state


def _saturation_check(
    name: str,
    se: SequenceEnsemble,
    x: SequenceIndex,
    params: ConeParams,
    exhaustive: bool,
) -> ConditionResult:
    x = se.check_index(x)
    top = se.weighted(x)
    verdicts: dict[SequenceIndex, ConeVerdict] = {}
    for c in se.indices():
        if c == x:
            verdicts[c] = certify_psd(top - top)
            continue
        verdicts[c] = analyze_cone(top - se.weighted(c), params)
        if verdicts[c].refuted and not exhaustive:
            break
    refuted = [c for c, v in verdicts.items() if v.refuted]
    undecided = [c for c, v in verdicts.items() if v.status is ConeStatus.UNDECIDED]
    evidence = {
        "x": list(x),
        "checked": len(verdicts),
        "refuted": [list(c) for c in refuted],
        "undecided": [list(c) for c in undecided],
        "per_index": [_verdict_summary(c, v) for c, v in verdicts.items()],
    }
    eta = se.prior(x)
    if refuted:
        return ConditionResult(
            name,
            Verdict.FAILS,
            f"difference at {refuted[0]} is not block positive",
            {},
            evidence,
            verdicts,
        )
    if undecided:
        return ConditionResult(
            name, Verdict.UNDECIDED, f"{len(undecided)} differences unresolved", {}, evidence, verdicts
        )
    return ConditionResult(
        name,
        Verdict.HOLDS,
        "every difference is certified block positive",
        {"p_L": eta, "p_SEP": eta},
        evidence,
        verdicts,
    )


def check_theorem1(
    e: StateEnsemble, x: int, params: ConeParams = ConeParams(), exhaustive: bool = True
) -> ConditionResult:
    """``p_L = eta_x`` iff every ``eta_x rho_x - eta_i rho_i`` is block positive."""
    return _saturation_check("theorem1", as_sequence(e), (x,), params, exhaustive)


def check_theorem2(
    se: SequenceEnsemble,
    x: Sequence[int],
    params: ConeParams = ConeParams(),
    exhaustive: bool = True,
) -> ConditionResult:
    """Sequence version: on success ``p_L = p_SEP = eta_x`` and the sequence factorizes."""
    result = _saturation_check("theorem2", se, tuple(x), params, exhaustive)
    if result.holds:
        result.evidence["factorizable"] = True
    return result


def check_corollary1(e: StateEnsemble, atol: float = 1e-9) -> ConditionResult:
    """``p_L = 1/n`` iff priors are uniform and all states coincide."""
    n = len(e)
    uniform_priors = all(abs(p - 1 / n) <= atol for p in e.priors)
    first = e.states[0].matrix
    deviation = max((float(np.max(np.abs(s.matrix - first))) for s in e.states[1:]), default=0.0)
    evidence = {"uniform_priors": uniform_priors, "max_state_deviation": deviation}
    if uniform_priors and deviation <= atol:
        return ConditionResult("corollary1", Verdict.HOLDS, "", {"p_L": 1 / n}, evidence)
    reason = "priors are not uniform" if not uniform_priors else "states are not all equal"
    return ConditionResult("corollary1", Verdict.FAILS, reason, {}, evidence)


# ---------------------------------------------------------------------------
# LOCC equals global optimum per step


@dataclass(frozen=True)
class StepValue:
    """A per-step ``p_L`` value together with where its certificate came from."""

    value: float
    source: str


def check_theorem3(
    se: SequenceEnsemble,
    per_step_pl: Sequence[StepValue | None],
    per_step_pg: Sequence[PgResult] | None = None,
    tol: float = EQUALITY_TOL,
) -> ConditionResult:
    """``prod p_L = p_L(seq) = p_G(seq)`` iff ``p_L = p_G`` at every step."""
    if len(per_step_pl) != se.L:
        raise ValueError(f"need {se.L} per-step values, got {len(per_step_pl)}")
    if per_step_pg is None:
        per_step_pg = [solve_pg(f) for f in se.factors]
    pg = [r.value for r in per_step_pg]
    evidence = {"p_L": [None if v is None else v.value for v in per_step_pl], "p_G": pg}
    strict = [
        l
        for l, (v, r) in enumerate(zip(per_step_pl, per_step_pg))
        if v is not None and r.value - v.value > tol
    ]
    if strict:
        return ConditionResult(
            "theorem3", Verdict.FAILS, f"p_L < p_G at step {strict[0] + 1}", {}, evidence
        )
    if any(v is None for v in per_step_pl):
        return ConditionResult(
            "theorem3", Verdict.UNDECIDED, "some per-step p_L lacks a certificate", {}, evidence
        )
    product = float(np.prod(pg))
    return ConditionResult(
        "theorem3",
        Verdict.HOLDS,
        "p_L = p_G at every step",
        {"p_L": product, "p_G": product},
        evidence,
    )


# ---------------------------------------------------------------------------
# separable certificates


@dataclass(eq=False)
class SeparableCertificate:
    """Dual operator ``H`` plus per-step LOCC measurements and cone evidence per index.

    ``evidence[c]`` certifies ``H - eta_c rho_c`` block positive;
    ``residuals[c]`` records ``Tr[M_c (H - eta_c rho_c)]``.
    """

    H: HermitianOperator
    measurements: tuple[Measurement, ...]
    evidence: dict[SequenceIndex, DecompositionCertificate | ConeVerdict | None]
    residuals: dict[SequenceIndex, float] = field(default_factory=dict)
    ghz_counts: dict[SequenceIndex, int] = field(default_factory=dict)
    note: str = ""


def _slackness(se: SequenceEnsemble, H: HermitianOperator, measurements, c) -> float:
    """``Tr[M_c (H - eta_c rho_c)]`` with ``M_c`` the product of the step outcomes ``c_l``."""
    Mc = reduce(tensor, [M.operators[cl - 1] for M, cl in zip(measurements, c)])
    return (H - se.weighted(c)).inner(Mc)


def verify_theorem4_certificate(se: SequenceEnsemble, cert: SeparableCertificate) -> ConditionResult:
    """Check block positivity of ``H - eta_c rho_c`` and complementary slackness for all ``c``."""
    name = "theorem4"
    if cert.H.structure != se.structure:
        raise StructureError("certificate H does not act on the sequence space")
    if len(cert.measurements) != se.L or any(
        len(M) != nl for M, nl in zip(cert.measurements, se.n)
    ):
        raise StructureError("per-step measurement outcome counts do not match the ensemble")

    residuals = {c: _slackness(se, cert.H, cert.measurements, c) for c in se.indices()}
    worst = max(abs(r) for r in residuals.values())
    evidence: dict[str, Any] = {"max_slackness_residual": worst, "trace_H": cert.H.trace()}
    if worst > SLACKNESS_TOL:
        bad = max(residuals, key=lambda c: abs(residuals[c]))
        return ConditionResult(
            name, Verdict.FAILS, f"slackness residual {residuals[bad]:.3e} at {bad}", {}, evidence
        )

    missing, refuted, failed = [], [], []
    for c in se.indices():
        target = cert.H - se.weighted(c)
        ev = cert.evidence.get(c)
        if ev is None:
            missing.append(c)
        elif isinstance(ev, ConeVerdict):
            if ev.refuted and ev.witness is not None:
                if expectation(as_party_major(target), ev.witness) < 0:
                    refuted.append(c)
                    continue
            if not ev.certified or ev.certificate is None:
                missing.append(c)
            elif not _certifies(ev.certificate, target):
                failed.append(c)
        elif not _certifies(ev, target):
            failed.append(c)
    evidence.update(
        missing=[list(c) for c in missing],
        refuted=[list(c) for c in refuted],
        invalid=[list(c) for c in failed],
    )
    if refuted:
        return ConditionResult(name, Verdict.FAILS, f"H - eta rho refuted at {refuted[0]}", {}, evidence)
    if failed:
        return ConditionResult(
            name, Verdict.UNDECIDED, f"cone evidence invalid at {failed[0]}", {}, evidence
        )
    if missing:
        return ConditionResult(
            name, Verdict.UNDECIDED, f"no cone evidence at {missing[0]}", {}, evidence
        )
    if not all(M.is_product_basis_diagonal() for M in cert.measurements):
        return ConditionResult(
            name,
            Verdict.UNDECIDED,
            "LOCC realizability of the step measurements is not machine-checkable",
            {},
            evidence,
        )
    step_pl = [success_probability(f, M) for f, M in zip(se.factors, cert.measurements)]
    trace = cert.H.trace()
    evidence["step_p_L"] = step_pl
    return ConditionResult(
        name,
        Verdict.HOLDS,
        "H certifies the product of local measurements as optimal among separable ones",
        {"p_L": trace, "p_SEP": trace},
        evidence,
    )


def _certifies(cert: DecompositionCertificate, target: HermitianOperator) -> bool:
    if cert.target.structure != target.structure:
        return False
    if np.max(np.abs(as_step_major(cert.target).matrix - as_step_major(target).matrix)) > 1e-9:
        return False
    return not check_decomposition(cert)


# ---------------------------------------------------------------------------
# certificate builders


def _example2_terms(m: int, d: int, sorted_c: SequenceIndex, scale: float) -> tuple[list, int]:
    """Telescoped decomposition of ``scale * (1 - R_{c_1} (x) ... (x) R_{c_L})`` for sorted ``c``.

    The ``t`` leading GHZ labels are merged into one block ``d^t GHZ^{(x)t}``;
    the first telescoping term then carries the registered primitive and every
    later term is a product of diagonal PSD operators.
    """
    dims = (d,) * m
    t = sum(1 for ci in sorted_c if ci == d + 2)
    side = (d**m) ** t
    block_b = np.eye(1) if t == 0 else np.eye(side) - primitive_over_steps(m, d, t)
    a_list = [np.eye(side)] + [np.eye(d**m)] * (len(sorted_c) - t)
    b_list = [block_b] + [example2_R(m, d, ci).matrix for ci in sorted_c[t:]]
    pieces = telescope(a_list, b_list)

    def seps(mats):
        return tuple(separable_from_diagonal(x, dims) for x in mats)

    head = pieces[0]
    terms = [
        DecompositionTerm(
            scale,
            BlockPositiveFactor(head.difference, dims, t, "primitive"),
            seps(head.suffix),
            f"primitive over {t} steps",
        )
    ]
    for j, piece in enumerate(pieces[1:], start=1):
        prefix = (separable_identity(dims),) * t + seps(piece.prefix[1:])
        terms.append(
            DecompositionTerm(
                scale,
                None,
                prefix + seps((piece.difference,)) + seps(piece.suffix),
                f"separable tail at step {t + j}",
            )
        )
    return terms, t


def build_example2_certificate(d: int, m: int, L: int) -> SeparableCertificate:
    """Dual operator ``1/(d^m+d)^L``, local basis measurements and explicit decompositions."""
    e = example2_ensemble(m, d)
    se = SequenceEnsemble.copies(e, L)
    scale = 1.0 / (d**m + d) ** L
    H = identity(se.structure) * scale
    measurements = (example2_measurement(m, d),) * L
    evidence: dict[SequenceIndex, DecompositionCertificate] = {}
    counts: dict[SequenceIndex, int] = {}
    residuals: dict[SequenceIndex, float] = {}
    for c in se.indices():
        # stable sort puts GHZ labels (the largest) first
        idx = sorted(range(L), key=lambda p: -c[p])
        sorted_c = tuple(c[p] for p in idx)
        terms, t = _example2_terms(m, d, sorted_c, scale)
        order = tuple(int(k) for k in np.argsort(idx))
        evidence[c] = DecompositionCertificate(
            tuple(terms),
            H - se.weighted(c),
            None if order == tuple(range(L)) else order,
        )
        counts[c] = t
        residuals[c] = _slackness(se, H, measurements, c)
    return SeparableCertificate(
        H, measurements, evidence, residuals, counts, note=f"example2(d={d},m={m},L={L})"
    )


def _is_diagonal(op: HermitianOperator, atol: float = 1e-12) -> bool:
    a = op.matrix
    return float(np.max(np.abs(a - np.diag(np.diag(a))), initial=0.0)) <= atol


def diagonal_certificate(se: SequenceEnsemble) -> SeparableCertificate:
    """Certificate for ensembles diagonal in the product basis (a classical problem).

    Each step guesses the label with the largest weight on the observed basis
    vector; ``H`` is the tensor product of the per-step pointwise maxima.
    """
    if not all(_is_diagonal(rho) for f in se.factors for rho in f.states):
        raise ValueError("every state must be diagonal in the product basis")
    measurements, step_H = [], []
    for f in se.factors:
        w = np.array([np.diag(f.weighted(i).matrix).real for i in range(1, len(f) + 1)])
        best = np.argmax(w, axis=0)
        ops = [np.diag((best == i).astype(float)) for i in range(len(f))]
        measurements.append(Measurement.from_arrays(f.structure, ops))
        step_H.append(HermitianOperator(f.structure, np.diag(w.max(axis=0)).astype(complex)))
    H = reduce(tensor, step_H)
    evidence, residuals = {}, {}
    for c in se.indices():
        evidence[c] = certify_psd(H - se.weighted(c))
        residuals[c] = _slackness(se, H, measurements, c)
    return SeparableCertificate(H, tuple(measurements), evidence, residuals, note="diagonal")


def find_certificate(se: SequenceEnsemble) -> SeparableCertificate | None:
    """Return a candidate certificate for known ensemble families, else ``None``."""
    s = se.factors[0].structure
    dims = s.party_dims
    if (
        s.steps == 1
        and len(set(dims)) == 1
        and se.n[0] == dims[0] + 2
        and se.identical_steps()
    ):
        m, d = len(dims), dims[0]
        if se.factors[0].same_as(example2_ensemble(m, d), atol=1e-12):
            return build_example2_certificate(d, m, se.L)
    if all(_is_diagonal(rho) for f in se.factors for rho in f.states):
        return diagonal_certificate(se)
    return None


# ---------------------------------------------------------------------------
# report


@dataclass
class StepReport:
    step: int
    max_prior: float
    max_index: int
    theorem1: ConditionResult
    corollary1: ConditionResult
    p_G: float | None = None
    p_G_upper: float | None = None
    p_L: StepValue | None = None

    @property
    def p_G_gap(self) -> float | None:
        return None if self.p_G is None else self.p_G_upper - self.p_G

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "max_prior": self.max_prior,
            "max_index": self.max_index,
            "theorem1": self.theorem1.to_dict(),
            "corollary1": self.corollary1.to_dict(),
            "p_G": self.p_G,
            "p_G_upper": self.p_G_upper,
            "p_L": None if self.p_L is None else self.p_L.value,
            "p_L_source": None if self.p_L is None else self.p_L.source,
        }


@dataclass
class Bounds:
    max_prior: float
    step_product_lower: float
    p_L_lower: float
    p_L_upper: float
    p_SEP_lower: float
    p_SEP_upper: float
    p_G: float | None
    p_G_upper: float | None
    # p_L(sequence) exceeds the largest prior strictly
    p_L_strictly_above_max_prior: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ReportOptions:
    cone: ConeParams = field(default_factory=ConeParams)
    pg_tol: float = 1e-6
    compute_pg: bool = True
    run_theorem2: bool = True
    exhaustive: bool = False
    search_certificates: bool = True
    certificate: SeparableCertificate | None = None


@dataclass
class FactorizabilityReport:
    party_dims: tuple[int, ...]
    n: tuple[int, ...]
    steps: list[StepReport]
    conditions: dict[str, ConditionResult]
    bounds: Bounds
    factorizable: Factorizable
    diagnostics: list[str] = field(default_factory=list)
    certificate: SeparableCertificate | None = field(default=None, repr=False)

    @property
    def L(self) -> int:
        return len(self.steps)

    def invariant_violations(self, tol: float = 1e-8) -> list[str]:
        b = self.bounds
        out = []
        if b.max_prior > b.p_L_lower + tol:
            out.append("max prior exceeds p_L lower bound")
        if b.p_L_lower > b.p_L_upper + tol:
            out.append("p_L lower bound exceeds upper bound")
        if b.p_SEP_lower > b.p_SEP_upper + tol:
            out.append("p_SEP lower bound exceeds upper bound")
        if b.p_L_upper > b.p_SEP_upper + tol:
            out.append("p_L upper bound exceeds p_SEP upper bound")
        if b.p_G_upper is not None and b.p_SEP_upper > b.p_G_upper + tol:
            out.append("p_SEP upper bound exceeds p_G")
        if b.step_product_lower > b.p_L_lower + tol:
            out.append("product of step p_L lower bounds exceeds sequence p_L lower bound")
        return out

    def to_dict(self) -> dict:
        return {
            "party_dims": list(self.party_dims),
            "n": list(self.n),
            "steps": [s.to_dict() for s in self.steps],
            "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
            "bounds": self.bounds.to_dict(),
            "factorizable": self.factorizable.value,
            "diagnostics": list(self.diagnostics),
        }


def check_corollary2(se: SequenceEnsemble, report: FactorizabilityReport) -> ConditionResult:
    """Strict sandwich ``max prior < p_L < p_G`` for a factorizable sequence."""
    name = "corollary2"
    if report.factorizable is not Factorizable.YES:
        return ConditionResult(name, Verdict.UNDECIDED, "factorizability not established")
    left, right, unknown = [], [], False
    for s in report.steps:
        if s.p_L is None:
            unknown = True
            continue
        if s.p_L.value - s.max_prior > STRICT_TOL:
            left.append(s.step)
        if s.p_G is None:
            unknown = True
        elif s.p_G - s.p_L.value > s.p_G_gap + 1e-8:
            right.append(s.step)
    evidence = {"steps_above_max_prior": left, "steps_below_p_G": right}
    b = report.bounds
    if left and right:
        return ConditionResult(
            name,
            Verdict.HOLDS,
            "max prior < p_L < p_G for the sequence",
            {"max_prior": b.max_prior, "p_L": b.p_L_lower, "p_G": b.p_G},
            evidence,
        )
    if unknown:
        return ConditionResult(name, Verdict.UNDECIDED, "some step values are not certified", {}, evidence)
    reason = "no step has p_L above its max prior" if not left else "no step has p_L below p_G"
    return ConditionResult(name, Verdict.FAILS, reason, {}, evidence)


def _step_analysis(e: StateEnsemble, step: int, options: ReportOptions, diagnostics) -> StepReport:
    eta, x = max_prior(e)
    t1 = check_theorem1(e, x, options.cone, exhaustive=options.exhaustive)
    sr = StepReport(step, eta, x, t1, check_corollary1(e))
    if t1.holds:
        sr.p_L = StepValue(t1.values["p_L"], "theorem1")
    if options.compute_pg:
        try:
            r = solve_pg(e, tol=options.pg_tol)
            sr.p_G, sr.p_G_upper = r.value, r.upper
        except (ConvergenceError, ValueError) as exc:
            diagnostics.append(f"step {step}: p_G unavailable ({exc})")
    if sr.p_L is None and options.search_certificates:
        single = as_sequence(e)
        try:
            cert = find_certificate(single)
        except (ValueError, StructureError) as exc:
            cert = None
            diagnostics.append(f"step {step}: certificate search failed ({exc})")
        if cert is not None:
            t4 = verify_theorem4_certificate(single, cert)
            if t4.holds:
                sr.p_L = StepValue(t4.values["p_L"], "theorem4")
    return sr


def assemble_report(
    se: StateEnsemble | SequenceEnsemble, options: ReportOptions | None = None
) -> FactorizabilityReport:
    """Run every applicable checker and merge their conclusions into bounds and a verdict."""
    options = options or ReportOptions()
    se = as_sequence(se)
    diagnostics: list[str] = []

    steps: list[StepReport] = []
    for l, f in enumerate(se.factors, start=1):
        cached = next((s for s, g in zip(steps, se.factors) if g is f or g.same_as(f)), None)
        if cached is not None:
            sr = StepReport(**{**cached.__dict__, "step": l})
        else:
            sr = _step_analysis(f, l, options, diagnostics)
        steps.append(sr)

    conditions: dict[str, ConditionResult] = {}
    x = tuple(s.max_index for s in steps)
    if se.L == 1:
        conditions["theorem2"] = steps[0].theorem1
    elif options.run_theorem2:
        try:
            conditions["theorem2"] = check_theorem2(se, x, options.cone, options.exhaustive)
        except StructureError as exc:
            diagnostics.append(f"theorem2 skipped: {exc}")

    cert = options.certificate
    if cert is None and options.search_certificates:
        try:
            cert = find_certificate(se)
        except (ValueError, StructureError) as exc:
            diagnostics.append(f"certificate search failed: {exc}")
    if cert is not None:
        try:
            t4 = verify_theorem4_certificate(se, cert)
        except StructureError as exc:
            t4 = ConditionResult("theorem4", Verdict.UNDECIDED, f"certificate does not fit: {exc}")
        conditions["theorem4"] = t4
        if t4.holds:
            for s, v in zip(steps, t4.evidence["step_p_L"]):
                if s.p_L is None:
                    s.p_L = StepValue(v, "theorem4")

    pg_results = None
    if all(s.p_G is not None for s in steps):
        pg_results = [_PgView(s.p_G, s.p_G_upper) for s in steps]
        conditions["theorem3"] = check_theorem3(se, [s.p_L for s in steps], pg_results)

    bounds = _merge_bounds(se, steps, conditions)
    factorizable = _decide(se, steps, conditions, diagnostics)
    report = FactorizabilityReport(
        se.factors[0].structure.party_dims,
        se.n,
        steps,
        conditions,
        bounds,
        factorizable,
        diagnostics,
        cert,
    )
    if factorizable is Factorizable.YES:
        conditions["corollary2"] = check_corollary2(se, report)
    for v in report.invariant_violations():
        diagnostics.append(f"bound invariant violated: {v}")
    return report


@dataclass(frozen=True)
class _PgView:
    value: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.value


def _merge_bounds(se, steps: list[StepReport], conditions: dict[str, ConditionResult]) -> Bounds:
    top = float(np.prod([s.max_prior for s in steps]))
    step_lower = float(np.prod([s.p_L.value if s.p_L else s.max_prior for s in steps]))
    if all(s.p_G is not None for s in steps):
        # p_G of a product ensemble is the product of the step values
        pg = float(np.prod([s.p_G for s in steps]))
        pg_upper = float(np.prod([s.p_G_upper for s in steps]))
    else:
        pg = pg_upper = None
    ceiling = 1.0 if pg_upper is None else pg_upper

    exact_l = [c.values["p_L"] for c in conditions.values() if c.holds and "p_L" in c.values]
    exact_sep = [c.values["p_SEP"] for c in conditions.values() if c.holds and "p_SEP" in c.values]
    l_lower = max([top, step_lower] + exact_l)
    l_upper = min([ceiling] + exact_l + exact_sep)
    sep_lower = max([l_lower] + exact_sep)
    sep_upper = min([ceiling] + exact_sep)

    t2 = conditions.get("theorem2")
    strict = t2 is not None and t2.status is Verdict.FAILS and se.L > 0
    return Bounds(top, step_lower, l_lower, l_upper, sep_lower, sep_upper, pg, pg_upper, strict)


def _decide(se, steps, conditions, diagnostics) -> Factorizable:
    yes = [k for k in ("theorem2", "theorem3", "theorem4") if k in conditions and conditions[k].holds]
    no = False
    t2 = conditions.get("theorem2")
    if se.L > 1 and t2 is not None and t2.status is Verdict.FAILS:
        # p_L(seq) > eta_x, while theorem1 at every step pins the product to eta_x
        no = all(s.theorem1.holds for s in steps)
    if yes and no:
        diagnostics.append(f"conflicting evidence: {yes} hold but theorem2 fails with saturated steps")
        return Factorizable.UNDECIDED
    if yes:
        return Factorizable.YES
    if no:
        return Factorizable.NO
    return Factorizable.UNDECIDED

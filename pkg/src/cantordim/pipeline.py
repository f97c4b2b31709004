"""Problem files and the method-selection pipeline."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

from .degenerate import lyapunov_degenerate
from .digitsets import DigitPair, is_degenerate
from .errors import DegenerateMap, MethodInapplicable, NacFailed, ProblemParseError
from .measures import ProductMeasure, lebesgue
from .moebius import ConstantMap, IfsSystem, MoebiusMap
from .neumann import lyapunov_neumann, nac_report
from .oracle import mc_result
from .phisearch import DEFAULT_BUDGET, search_phi
from .recurring import find_affine_conjugator, lyapunov_recurring
from .result import LyapunovResult, Method

log = logging.getLogger(__name__)

DEFAULT_EPS = {
    Method.DEGENERATE: 1e-5,
    Method.RECURRING: 1e-10,
    Method.NEUMANN: 1e-10,
}


@dataclass(frozen=True)
class Problem:
    pair: DigitPair
    measure: ProductMeasure
    phi: Optional[MoebiusMap] = None

    @property
    def b(self) -> int:
        return self.pair.b

    def system(self) -> IfsSystem:
        return IfsSystem.from_pair(self.pair, self.measure)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "b": self.pair.b,
            "d1": list(self.pair.d1),
            "d2": list(self.pair.d2),
            "measure": list(self.measure.probs),
        }
        if self.phi is not None:
            out["phi"] = self.phi.to_list()
        return out


def _int_list(doc: dict, key: str) -> list[int]:
    value = doc.get(key)
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ProblemParseError(f"'{key}' must be a list of integers")
    return value


def parse_problem(doc: Any) -> Problem:
    if not isinstance(doc, dict):
        raise ProblemParseError("problem must be a JSON object")
    unknown = set(doc) - {"b", "d1", "d2", "measure", "phi"}
    if unknown:
        raise ProblemParseError(f"unknown keys: {sorted(unknown)}")
    b = doc.get("b")
    if not isinstance(b, int) or isinstance(b, bool):
        raise ProblemParseError("'b' must be an integer")
    try:
        pair = DigitPair.from_sets(b, _int_list(doc, "d1"), _int_list(doc, "d2"))
    except (TypeError, ValueError) as exc:
        raise ProblemParseError(str(exc)) from exc
    spec = doc.get("measure", "lebesgue")
    try:
        if spec == "lebesgue":
            measure = lebesgue(b)
        elif isinstance(spec, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in spec):
            measure = ProductMeasure(tuple(float(v) for v in spec))
        else:
            raise ProblemParseError("'measure' must be \"lebesgue\" or a list of reals")
        if measure.b != b:
            raise ProblemParseError(f"measure has {measure.b} weights, expected {b}")
    except ProblemParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ProblemParseError(f"bad measure: {exc}") from exc
    phi = None
    if doc.get("phi") is not None:
        raw = doc["phi"]
        if not isinstance(raw, list) or len(raw) != 4 or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
        ):
            raise ProblemParseError("'phi' must be a list of four reals [A, B, C, D]")
        try:
            phi = MoebiusMap(*(float(v) for v in raw))
        except (TypeError, ValueError) as exc:
            raise ProblemParseError(f"bad phi: {exc}") from exc
    return Problem(pair, measure, phi)


def load_problem(path: Union[str, Path]) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError(f"{path}: invalid JSON: {exc}") from exc
    return parse_problem(doc)


def uniqueness_warnings(sys: IfsSystem) -> list[str]:
    """Syntactic checks behind uniqueness of the stationary measure."""
    warnings = []
    if not any(all(e > 0 for row in sys.matrices[i] for e in row) for i in sys.valid):
        warnings.append("no mu-valid matrix is strictly positive; stationary measure uniqueness is not verified")
    if sys.zero_rows:
        warnings.append(f"matrices with a zero row: {list(sys.zero_rows)}")
    return warnings


def _eps(method: Method, eps: Optional[float]) -> float:
    return DEFAULT_EPS[method] if eps is None else eps


def _run_neumann(sys: IfsSystem, phi: Optional[MoebiusMap], eps: float, seed: int, budget: int) -> LyapunovResult:
    if phi is not None:
        report = nac_report(sys, phi)
        if report.passed:
            return lyapunov_neumann(sys, phi, eps, report)
        log.warning("supplied phi fails the admissibility condition (%s); searching", report.verdict.value)
    found = search_phi(sys, budget=budget, seed=seed)
    if found is None:
        raise NacFailed("no admissible phi supplied or found")
    res = lyapunov_neumann(sys, found.phi, eps, found.report)
    res.metadata["phi_search_evaluations"] = found.evaluations
    return res


def run_dim(
    problem: Problem,
    eps: Optional[float] = None,
    method: Optional[Union[str, Method]] = None,
    seed: int = 0,
    steps: int = 1_000_000,
    trials: int = 20,
    budget: int = DEFAULT_BUDGET,
) -> LyapunovResult:
    """Pick the first applicable exact method, or the one forced by ``method``."""
    sys = problem.system()
    for w in uniqueness_warnings(sys):
        log.warning(w)
    forced = Method(method) if method is not None else None

    if forced is Method.DEGENERATE:
        return lyapunov_degenerate(sys, eps=_eps(forced, eps))
    if forced is Method.RECURRING:
        return lyapunov_recurring(sys, eps=_eps(forced, eps))
    if forced is Method.NEUMANN:
        if sys.constant_indices():
            raise DegenerateMap("a mu-valid map is constant; the Neumann method does not apply")
        return _run_neumann(sys, problem.phi, _eps(forced, eps), seed, budget)
    if forced is Method.MONTE_CARLO:
        return mc_result(sys, steps, trials, seed)

    if is_degenerate(sys.matrices, sys.measure) is not None:
        return lyapunov_degenerate(sys, eps=_eps(Method.DEGENERATE, eps))
    data = find_affine_conjugator(sys)
    if data is not None:
        return lyapunov_recurring(sys, data, eps=_eps(Method.RECURRING, eps))
    try:
        return _run_neumann(sys, problem.phi, _eps(Method.NEUMANN, eps), seed, budget)
    except MethodInapplicable as exc:
        log.warning("no exact method applies (%s); falling back to Monte Carlo", exc)
    res = mc_result(sys, steps, trials, seed)
    res.metadata["fallback"] = True
    return res


def check_nac(problem: Problem, phi: Optional[MoebiusMap] = None) -> dict[str, Any]:
    phi = phi or problem.phi
    if phi is None:
        raise ProblemParseError("check-nac needs phi (in the problem file or via --phi)")
    sys = problem.system()
    if any(isinstance(sys.maps[i], ConstantMap) for i in sys.valid):
        raise DegenerateMap("a mu-valid map is constant")
    return nac_report(sys, phi).to_dict()


def run_search_phi(problem: Problem, budget: int = DEFAULT_BUDGET, seed: int = 0) -> dict[str, Any]:
    found = search_phi(problem.system(), budget=budget, seed=seed)
    if found is None:
        return {"found": False, "budget": budget, "seed": seed}
    return {
        "found": True,
        "phi": found.phi.to_list(),
        "evaluations": found.evaluations,
        "report": found.report.to_dict(),
    }


def run_oracle(problem: Problem, steps: int = 1_000_000, trials: int = 20, seed: int = 0) -> LyapunovResult:
    return mc_result(problem.system(), steps, trials, seed)


"""Imperfect detection, post-selection, and detection-loophole models.

Two pictures of an inefficient detector are implemented side by side:

* fair sampling -- each station clicks independently of everything with
  probability eta; :func:`apply_fair_sampling` pushes a binary behavior to
  the three-outcome alphabet and :func:`post_select` inverts it.

* strategy-dependent detection -- the hidden strategy may decide whether a
  station clicks.  :func:`construct_loophole_model` searches, by LP
  feasibility over all three-outcome deterministic local strategies, for a
  local model whose coincidence statistics reproduce a target behavior at
  a given efficiency.  In "strict" mode the model's click rates must also
  be eta for every setting, so from the observable singles and coincidence
  rates it is indistinguishable from a fair-sampling experiment.

:func:`critical_efficiency` bisects the efficiency axis against that
feasibility to find the threshold below which the loophole can mimic the
target.

The no-detection outcome is always the last outcome index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import lp
from .errors import (
    AlphabetMismatch,
    EfficiencyOutOfRange,
    SignallingTarget,
    ZeroCoincidence,
)
from .model import Behavior, Scenario, nonsignalling_defect
from .polytope import (
    DEFAULT_SIZE_LIMIT,
    DEFAULT_TOL,
    LocalModel,
    _check_limit,
    _solution_model,
    _vertex_data,
)

ConstraintMode = Literal["strict", "weak"]

BISECT_TOL_DEFAULT = 1e-3
BISECT_MAX_ITER = 30


@dataclass(frozen=True)
class DetectorSpec:
    """Detector efficiencies per side and the modelling assumption used."""

    eta_a: float
    eta_b: float
    mode: Literal["fair_sampling", "strategy_dependent"] = "fair_sampling"

    def __post_init__(self):
        _check_eta(self.eta_a)
        _check_eta(self.eta_b)
        if self.mode not in ("fair_sampling", "strategy_dependent"):
            raise ValueError(f"unknown detector mode {self.mode!r}")

    @classmethod
    def symmetric(cls, eta: float, mode: str = "fair_sampling") -> "DetectorSpec":
        return cls(eta, eta, mode)


@dataclass(frozen=True, eq=False)
class ThresholdResult:
    """Outcome of a critical-efficiency search.

    ``eta_star`` is the midpoint of the final bisection bracket (exactly 1.0
    for local targets); ``feasible_model`` is the loophole model found at
    the largest feasible probe.
    """

    eta_star: float
    mode: ConstraintMode
    feasible_model: LocalModel
    bisection_trace: tuple[tuple[float, bool], ...]


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise EfficiencyOutOfRange(f"efficiency {eta!r} outside [0, 1]")


def _require_binary_behavior(b: Behavior, what: str) -> None:
    if not b.scenario.is_binary():
        raise AlphabetMismatch(f"{what} must have binary outcomes on both sides")


def apply_fair_sampling(b: Behavior, eta_a: float, eta_b: float) -> Behavior:
    """Embed a binary behavior into the three-outcome alphabet.

    Each side clicks independently with its efficiency, regardless of
    setting and outcome; missed clicks land on the no-detection outcome.
    """
    _require_binary_behavior(b, "fair-sampling input")
    _check_eta(eta_a)
    _check_eta(eta_b)
    extended = b.scenario.with_no_click()
    table = np.zeros(extended.shape)
    marg_a = b.p.sum(axis=3)  # (alpha, beta, a)
    marg_b = b.p.sum(axis=2)  # (alpha, beta, b)
    table[:, :, :2, :2] = eta_a * eta_b * b.p
    table[:, :, :2, 2] = eta_a * (1.0 - eta_b) * marg_a
    table[:, :, 2, :2] = (1.0 - eta_a) * eta_b * marg_b
    table[:, :, 2, 2] = (1.0 - eta_a) * (1.0 - eta_b)
    return Behavior(extended, table)


def post_select(q: Behavior) -> tuple[Behavior, np.ndarray]:
    """Condition on both stations clicking.

    Returns the renormalized binary behavior plus the per-setting-pair
    coincidence rates.  Raises ZeroCoincidence when a setting pair has no
    coincidence mass to condition on.
    """
    ka = 2 if q.scenario.outcomes_a.size == 3 else q.scenario.outcomes_a.size
    kb = 2 if q.scenario.outcomes_b.size == 3 else q.scenario.outcomes_b.size
    joint = q.p[:, :, :ka, :kb]
    rates = joint.sum(axis=(2, 3))
    bad = np.argwhere(rates <= 1e-12)
    if bad.size:
        raise ZeroCoincidence(int(bad[0, 0]), int(bad[0, 1]))
    binary = Scenario(q.scenario.settings_a, q.scenario.settings_b)
    return Behavior(binary, joint / rates[:, :, None, None]), rates


def _loophole_lp(
    target: Behavior, eta: float, mode: ConstraintMode, limit: int | None
) -> LocalModel | None:
    extended = target.scenario.with_no_click()
    _check_limit(extended, limit)
    strategies, matrix = _vertex_data(extended)
    n = len(strategies)
    sa, sb = target.scenario.settings_a, target.scenario.settings_b

    # Coincidence block: model mass on (a, b) clicks equals eta^2 * target.
    cell_table = np.arange(sa * sb * 9).reshape(sa, sb, 3, 3)
    coincidence_cells = cell_table[:, :, :2, :2].ravel()
    rows = [matrix[:, coincidence_cells].T]
    rhs = [eta * eta * target.p.ravel()]

    if mode == "strict":
        # Observable click rates pinned to eta for every setting on each side.
        fa = np.array([s.f_a for s in strategies])
        fb = np.array([s.f_b for s in strategies])
        rows.append((fa != 2).T * 1.0)  # (settings_a, n)
        rhs.append(np.full(sa, eta))
        rows.append((fb != 2).T * 1.0)
        rhs.append(np.full(sb, eta))

    rows.append(np.ones((1, n)))
    rhs.append(np.ones(1))

    result = lp.solve_standard_form(
        np.vstack(rows), np.concatenate(rhs), feas_tol=DEFAULT_TOL
    )
    if result.status == lp.INFEASIBLE:
        return None
    return _solution_model(result.x, strategies)


def construct_loophole_model(
    target: Behavior,
    eta: float,
    mode: ConstraintMode = "strict",
    limit: int | None = DEFAULT_SIZE_LIMIT,
) -> LocalModel | None:
    """Local three-outcome model reproducing ``target`` after post-selection.

    The LP constrains the model's click-click block to eta^2 * target for
    every setting pair ("weak" mode); "strict" mode additionally pins each
    side's click probability to eta for every setting.  Returns None when
    no such model exists at this efficiency.
    """
    _require_binary_behavior(target, "loophole target")
    _check_eta(eta)
    if mode not in ("strict", "weak"):
        raise ValueError(f"unknown constraint mode {mode!r}")
    defect = nonsignalling_defect(target)
    if defect > DEFAULT_TOL:
        raise SignallingTarget(f"target defect {defect:.3g} exceeds {DEFAULT_TOL:.0e}")
    return _loophole_lp(target, eta, mode, limit)


def critical_efficiency(
    target: Behavior,
    mode: ConstraintMode = "strict",
    tol_eta: float = BISECT_TOL_DEFAULT,
    limit: int | None = DEFAULT_SIZE_LIMIT,
) -> ThresholdResult:
    """Bisect the efficiency threshold below which the loophole works.

    Validates the endpoints first: eta=0 is always feasible, and eta=1 is
    feasible exactly when the target itself is local (then the threshold is
    1 and no bisection runs).  The bracket is narrowed to ``tol_eta``,
    capped at 30 iterations.
    """
    if not 0.0 < tol_eta <= 0.1:
        raise ValueError(f"tol_eta {tol_eta!r} outside (0, 0.1]")
    trace: list[tuple[float, bool]] = []

    def probe(eta: float) -> LocalModel | None:
        model = construct_loophole_model(target, eta, mode, limit)
        trace.append((eta, model is not None))
        return model

    model_zero = probe(0.0)
    if model_zero is None:  # pragma: no cover - the never-click strategy always works
        raise ArithmeticError("loophole LP infeasible at eta=0")
    model_one = probe(1.0)
    if model_one is not None:
        return ThresholdResult(1.0, mode, model_one, tuple(trace))

    lo, hi = 0.0, 1.0
    best = model_zero
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= tol_eta:
            break
        mid = 0.5 * (lo + hi)
        model = probe(mid)
        if model is not None:
            lo, best = mid, model
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), mode, best, tuple(trace))


def threshold_to_json_dict(result: ThresholdResult) -> dict:
    """Serialize in the documented threshold file schema (model excluded)."""
    return {
        "eta_star": result.eta_star,
        "mode": result.mode,
        "trace": [[eta, feasible] for eta, feasible in result.bisection_trace],
    }

"""Simulated experimental runs: sampling, tallies, estimates, audits.

One run draws the two settings independently and uniformly, then the
outcome pair from the behavior's block, with synthetic timestamps: both
choices end before t=0 and the joint outcome is reported at t=T.

The random stream is NumPy's PCG64 (128-bit state, 64-bit output) seeded
through ``SeedSequence(seed, spawn_key=(stream,))``, so one seed yields
arbitrarily many statistically independent sub-streams via the ``stream``
id.  Identical (seed, stream, n_runs, behavior) reproduce the identical
record stream bit-for-bit within one build; cross-language bit-exactness
is not promised.  Draw order per simulation: alpha array, beta array,
outcome uniforms, choice-time uniforms for A, then for B.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    EmptySettingPair,
    MixedScenario,
    ScenarioMismatch,
    SchemaError,
)
from .model import Alphabet, Behavior, BellFunctional, Scenario, evaluate_functional

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class Geometry:
    """Spacetime configuration of one run: station separation and duration."""

    L: float
    T: float
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not (self.L > 0.0 and self.T > 0.0 and self.c > 0.0):
            raise ValueError(f"L, T, c must be positive, got {self.L}, {self.T}, {self.c}")


@dataclass(frozen=True)
class LocalityAudit:
    passed: bool
    margin_meters: float


def locality_audit(g: Geometry) -> LocalityAudit:
    """Check the strict spacelike-separation condition L > T*c."""
    margin = g.L - g.T * g.c
    return LocalityAudit(margin > 0.0, margin)


@dataclass(frozen=True)
class RunRecord:
    """One experimental run: settings, outcome symbols, timestamps."""

    index: int
    alpha: int
    beta: int
    a: str
    b: str
    t_choice_a: float
    t_choice_b: float
    t_report: float

    def __post_init__(self):
        if self.t_choice_a >= 0.0 or self.t_choice_b >= 0.0:
            raise ValueError("input choices must end before t=0")
        if self.t_report < 0.0:
            raise ValueError("outputs cannot be reported before t=0")


@dataclass(frozen=True, eq=False)
class RunLog:
    """Column-oriented run stream; iterating yields RunRecord values."""

    scenario: Scenario
    index: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    a_index: np.ndarray
    b_index: np.ndarray
    t_choice_a: np.ndarray
    t_choice_b: np.ndarray
    t_report: np.ndarray

    def __len__(self) -> int:
        return self.alpha.size

    def __iter__(self) -> Iterator[RunRecord]:
        sym_a = self.scenario.outcomes_a.symbols
        sym_b = self.scenario.outcomes_b.symbols
        for i in range(len(self)):
            yield RunRecord(
                int(self.index[i]),
                int(self.alpha[i]),
                int(self.beta[i]),
                sym_a[int(self.a_index[i])],
                sym_b[int(self.b_index[i])],
                float(self.t_choice_a[i]),
                float(self.t_choice_b[i]),
                float(self.t_report[i]),
            )


def simulate(b: Behavior, n_runs: int, seed: int, g: Geometry, stream: int = 0) -> RunLog:
    """Draw ``n_runs`` records from the behavior under the run protocol.

    Settings are i.i.d. uniform and independent across sides; outcomes come
    from the behavior's block at the drawn settings; choice times are
    uniform in [-T, 0) and every report lands exactly at t=T.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    sa, sb, ka, kb = b.scenario.shape
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))
    alpha = rng.integers(0, sa, size=n_runs)
    beta = rng.integers(0, sb, size=n_runs)
    u = rng.random(n_runs)
    tca = (rng.random(n_runs) - 1.0) * g.T
    tcb = (rng.random(n_runs) - 1.0) * g.T

    cum = b.p.reshape(sa, sb, ka * kb).cumsum(axis=-1)
    cum[:, :, -1] = 1.0  # guard the top edge against rounding
    flat = (u[:, None] >= cum[alpha, beta]).sum(axis=1)
    return RunLog(
        scenario=b.scenario,
        index=np.arange(n_runs),
        alpha=alpha,
        beta=beta,
        a_index=flat // kb,
        b_index=flat % kb,
        t_choice_a=tca,
        t_choice_b=tcb,
        t_report=np.full(n_runs, float(g.T)),
    )


@dataclass(frozen=True, eq=False)
class Tally:
    """Outcome counts per (alpha, beta, a, b); totals are per-block sums."""

    scenario: Scenario
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != self.scenario.shape:
            raise MixedScenario(
                f"count shape {counts.shape} does not match scenario shape {self.scenario.shape}"
            )
        if counts.min(initial=0) < 0 or not np.issubdtype(counts.dtype, np.integer):
            raise MixedScenario("counts must be nonnegative integers")
        counts = counts.astype(np.int64).copy()
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=(2, 3))

    def __add__(self, other: "Tally") -> "Tally":
        if not isinstance(other, Tally):
            return NotImplemented
        if self.scenario != other.scenario:
            raise MixedScenario("cannot add tallies from different scenarios")
        return Tally(self.scenario, self.counts + other.counts)


def empty_tally(scenario: Scenario) -> Tally:
    return Tally(scenario, np.zeros(scenario.shape, dtype=np.int64))


def tally(runs: RunLog | Iterable[RunRecord], scenario: Scenario | None = None) -> Tally:
    """Aggregate a run stream into counts; order-independent."""
    if isinstance(runs, RunLog):
        if scenario is None:
            scenario = runs.scenario
        elif scenario != runs.scenario:
            raise MixedScenario("run log scenario differs from the requested scenario")
        sa, sb, ka, kb = scenario.shape
        for values, top in ((runs.alpha, sa), (runs.beta, sb), (runs.a_index, ka), (runs.b_index, kb)):
            if values.size and (values.min() < 0 or values.max() >= top):
                raise MixedScenario("run log indices do not fit the scenario")
        flat = ((runs.alpha * sb + runs.beta) * ka + runs.a_index) * kb + runs.b_index
        counts = np.bincount(flat, minlength=sa * sb * ka * kb).reshape(scenario.shape)
        return Tally(scenario, counts)

    if scenario is None:
        raise ValueError("a scenario is required when tallying a bare record iterable")
    counts = np.zeros(scenario.shape, dtype=np.int64)
    for record in runs:
        if not (0 <= record.alpha < scenario.settings_a and 0 <= record.beta < scenario.settings_b):
            raise MixedScenario(f"record settings ({record.alpha}, {record.beta}) do not fit the scenario")
        counts[
            record.alpha,
            record.beta,
            scenario.outcomes_a.index(record.a),
            scenario.outcomes_b.index(record.b),
        ] += 1
    return Tally(scenario, counts)


def estimate(t: Tally) -> tuple[Behavior, np.ndarray]:
    """Relative frequencies per block plus their Wald standard errors."""
    totals = t.totals
    empty = np.argwhere(totals == 0)
    if empty.size:
        raise EmptySettingPair(int(empty[0, 0]), int(empty[0, 1]))
    denom = totals[:, :, None, None].astype(float)
    p_hat = t.counts / denom
    stderr = np.sqrt(p_hat * (1.0 - p_hat) / denom)
    return Behavior(t.scenario, p_hat), stderr


def functional_interval(t: Tally, f: BellFunctional) -> tuple[float, float]:
    """Point estimate of the functional and its propagated standard error.

    Blocks are treated as independent multinomials:
    sigma^2 = sum over blocks of (E[c^2] - E[c]^2) / N_block under the
    block's estimated distribution.
    """
    if f.scenario != t.scenario:
        raise ScenarioMismatch("functional and tally built for different scenarios")
    b_hat, _ = estimate(t)
    value = evaluate_functional(f, b_hat)
    mean = (f.coefficients * b_hat.p).sum(axis=(2, 3))
    second = (f.coefficients**2 * b_hat.p).sum(axis=(2, 3))
    block_var = np.maximum(second - mean**2, 0.0) / t.totals
    return value, float(math.sqrt(block_var.sum()))


@dataclass(frozen=True)
class RandomnessAudit:
    """Pearson chi-square checks of the settings histogram."""

    chi_square_uniformity: float
    dof_uniformity: int
    chi_square_independence: float
    dof_independence: int


def randomness_audit(t: Tally) -> RandomnessAudit:
    """Test the settings histogram against uniformity and independence."""
    h = t.totals.astype(float)
    total = h.sum()
    if total < 1:
        raise ValueError("randomness audit needs at least one run")
    sa, sb = h.shape
    expected_uniform = total / (sa * sb)
    chi_uniform = float(((h - expected_uniform) ** 2 / expected_uniform).sum())
    row = h.sum(axis=1, keepdims=True)
    col = h.sum(axis=0, keepdims=True)
    expected_product = row * col / total
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(expected_product > 0, (h - expected_product) ** 2 / expected_product, 0.0)
    return RandomnessAudit(
        chi_square_uniformity=chi_uniform,
        dof_uniformity=sa * sb - 1,
        chi_square_independence=float(terms.sum()),
        dof_independence=(sa - 1) * (sb - 1),
    )


# ---------------------------------------------------------------------------
# Run log (JSON Lines) and tally file formats
# ---------------------------------------------------------------------------

_RECORD_KEYS = {"i", "alpha", "beta", "a", "b", "tca", "tcb", "tr"}


def write_run_log(log: RunLog, path) -> None:
    sym_a = log.scenario.outcomes_a.symbols
    sym_b = log.scenario.outcomes_b.symbols
    with open(path, "w", encoding="utf-8") as handle:
        for i in range(len(log)):
            line = {
                "i": int(log.index[i]),
                "alpha": int(log.alpha[i]),
                "beta": int(log.beta[i]),
                "a": sym_a[int(log.a_index[i])],
                "b": sym_b[int(log.b_index[i])],
                "tca": float(log.t_choice_a[i]),
                "tcb": float(log.t_choice_b[i]),
                "tr": float(log.t_report[i]),
            }
            handle.write(json.dumps(line, separators=(",", ":")) + "\n")


def read_run_log(path) -> RunLog:
    """Parse a JSON Lines run log; the scenario is inferred from the records.

    Setting counts are the largest observed index plus one, and a side's
    alphabet is three-symbol exactly when the no-detection symbol appears.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(row, dict) or set(row) != _RECORD_KEYS:
                raise SchemaError(f"{path}:{lineno}: record fields must be {sorted(_RECORD_KEYS)}")
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: run log contains no records")
    try:
        index = np.array([int(r["i"]) for r in rows])
        alpha = np.array([int(r["alpha"]) for r in rows])
        beta = np.array([int(r["beta"]) for r in rows])
        sym_a = [str(r["a"]) for r in rows]
        sym_b = [str(r["b"]) for r in rows]
        tca = np.array([float(r["tca"]) for r in rows])
        tcb = np.array([float(r["tcb"]) for r in rows])
        tr = np.array([float(r["tr"]) for r in rows])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed record value: {exc}") from exc
    if alpha.min() < 0 or beta.min() < 0:
        raise SchemaError(f"{path}: negative setting index")
    scenario = Scenario(
        int(alpha.max()) + 1,
        int(beta.max()) + 1,
        _infer_alphabet(sym_a, path),
        _infer_alphabet(sym_b, path),
    )
    return RunLog(
        scenario=scenario,
        index=index,
        alpha=alpha,
        beta=beta,
        a_index=np.array([scenario.outcomes_a.index(s) for s in sym_a]),
        b_index=np.array([scenario.outcomes_b.index(s) for s in sym_b]),
        t_choice_a=tca,
        t_choice_b=tcb,
        t_report=tr,
    )


def _infer_alphabet(symbols: list[str], path) -> Alphabet:
    seen = set(symbols)
    if not seen <= {"+", "-", "0"}:
        raise SchemaError(f"{path}: unknown outcome symbols {sorted(seen - {'+', '-', '0'})}")
    return Alphabet.PLUS_MINUS_NULL if "0" in seen else Alphabet.PLUS_MINUS


_TALLY_KEYS = {"settings_a", "settings_b", "outcomes_a", "outcomes_b", "n", "totals"}


def tally_to_json_dict(t: Tally) -> dict:
    return {
        "settings_a": t.scenario.settings_a,
        "settings_b": t.scenario.settings_b,
        "outcomes_a": list(t.scenario.outcomes_a.symbols),
        "outcomes_b": list(t.scenario.outcomes_b.symbols),
        "n": t.counts.tolist(),
        "totals": t.totals.tolist(),
    }


def tally_from_json_dict(data: dict) -> Tally:
    if not isinstance(data, dict):
        raise SchemaError("tally document must be a JSON object")
    unknown = set(data) - _TALLY_KEYS
    if unknown:
        raise SchemaError(f"unknown fields in tally document: {sorted(unknown)}")
    missing = _TALLY_KEYS - set(data)
    if missing:
        raise SchemaError(f"missing fields in tally document: {sorted(missing)}")
    try:
        scenario = Scenario(
            int(data["settings_a"]),
            int(data["settings_b"]),
            Alphabet.from_symbols(data["outcomes_a"]),
            Alphabet.from_symbols(data["outcomes_b"]),
        )
        counts = np.asarray(data["n"], dtype=np.int64)
        totals = np.asarray(data["totals"], dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"malformed tally document: {exc}") from exc
    result = Tally(scenario, counts)
    if totals.shape != result.totals.shape or not np.array_equal(totals, result.totals):
        raise SchemaError("tally totals do not equal the block sums")
    return result

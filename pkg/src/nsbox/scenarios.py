"""Named reproductions of the worked two-qubit measurement families.

Each scenario pairs a (state, settings) generator with the closed-form
values its box is known to attain, so the whole Born-rule pipeline can be
audited against them at any parameter.  Scenario families:

    max-entangled            Bell state, x-y settings trading CHSH for steering
    schmidt-noisy-pr         Schmidt state -> isotropic noisy PR box
    schmidt-pr-settings      Schmidt state, tilted z-x settings (product remainder)
    schmidt-z-settings       Schmidt state, diagonal z-x settings (correlated remainder)
    schmidt-mermin           Schmidt state -> noisy Mermin box
    schmidt-mermin-tilted    Schmidt state, tilted settings (product remainder)
    schmidt-mermin-corr      Schmidt state, symmetric settings (correlated remainder)
    schmidt-bell-mermin      Schmidt state, both discords at once (x-y plane)
    schmidt-bell-mermin-xz   same discords, x-z plane, classical part appears
    werner-bell / werner-mermin / werner-bell-mermin
    colored-bell-iso / colored-bell-tilted / colored-mermin / colored-bell-mermin

Angle parameter t with cos t = 1/sqrt(1+s^2) tilts Bob's settings in the
tilted families; Schmidt states are parameterized by s = sin(2 theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boxes import Box
from .decompose import local_content
from .measures import MeasureReport, measure_report
from .quantum import (MeasurementSettings, OutOfRange, TwoQubitState, X_AXIS,
                      Y_AXIS, Z_AXIS, born_box, state_bell_psi_plus,
                      state_colored, state_schmidt, state_werner)

SQ2 = math.sqrt(2.0)

SWEEP_COLUMNS = ("param", "B00", "B01", "B10", "B11", "M00", "M01", "M10", "M11",
                 "G", "Q", "T", "C_signed", "C", "chsh_violated", "steering_violated",
                 "local_content", "max_abs_deviation")


@dataclass(frozen=True)
class ScenarioSpec:
    """One parameterized measurement family and its closed-form expectations.

    `expected` maps a parameter to the scalar report fields the family is
    known to attain (keys like "B00", "M11", "G", "Q", "T", "C");
    `expected_weights` gives the (PR, Mermin) weights of the canonical
    decomposition where those are known in closed form.
    """

    name: str
    param_name: str
    param_range: tuple[float, float]
    generator: Callable[[float], tuple[TwoQubitState, MeasurementSettings]]
    expected: Callable[[float], dict[str, float]]
    expected_weights: Callable[[float], tuple[float, float]] | None
    notes: str


@dataclass(frozen=True)
class ScenarioResult:
    param: float
    box: Box
    report: MeasureReport
    expected: dict[str, float]
    max_abs_deviation: float


def _check_param(spec: ScenarioSpec, param: float):
    lo, hi = spec.param_range
    if not (lo - 1e-12 <= param <= hi + 1e-12):
        raise OutOfRange(f"{spec.name}: {spec.param_name}={param:.12g} outside [{lo}, {hi}]")


def run_scenario(spec: ScenarioSpec, param: float) -> ScenarioResult:
    """Generate the box, measure it, and compare against the closed forms."""
    _check_param(spec, param)
    state, settings = spec.generator(param)
    box = born_box(state, settings)
    report = measure_report(box)
    expected = spec.expected(param)
    dev = max((abs(report.value(k) - v) for k, v in expected.items()), default=0.0)
    return ScenarioResult(param=float(param), box=box, report=report,
                          expected=expected, max_abs_deviation=float(dev))


def sweep(spec: ScenarioSpec, n_points: int) -> list[dict]:
    """Evaluate the scenario on an inclusive grid; rows ascend in the parameter."""
    if n_points < 2:
        raise OutOfRange(f"need at least 2 grid points, got {n_points}")
    lo, hi = spec.param_range
    rows = []
    for param in np.linspace(lo, hi, n_points):
        res = run_scenario(spec, float(param))
        r = res.report
        rows.append({
            "param": res.param,
            "B00": r.bell[0, 0], "B01": r.bell[0, 1], "B10": r.bell[1, 0], "B11": r.bell[1, 1],
            "M00": r.mermin[0, 0], "M01": r.mermin[0, 1], "M10": r.mermin[1, 0], "M11": r.mermin[1, 1],
            "G": r.g, "Q": r.q, "T": r.t, "C_signed": r.c_signed, "C": r.c,
            "chsh_violated": r.chsh_violated, "steering_violated": r.steering_violated,
            "local_content": local_content(res.box).objective,
            "max_abs_deviation": res.max_abs_deviation,
        })
    return rows


def sweep_csv(rows: list[dict]) -> str:
    """Deterministic CSV rendering of a sweep table (12 significant digits)."""
    def cell(v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        return f"{float(v):.12g}"

    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(cell(row[c]) for c in SWEEP_COLUMNS) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _schmidt(s: float) -> tuple[TwoQubitState, float]:
    theta = math.asin(min(max(s, 0.0), 1.0)) / 2.0
    return state_schmidt(theta), math.sqrt(max(1.0 - s * s, 0.0))


def _tilt(s: float) -> tuple[float, float]:
    ct = 1.0 / math.sqrt(1.0 + s * s)
    return ct, s * ct


def _gen_max_entangled(p):
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    return state_bell_psi_plus(), MeasurementSettings(
        X_AXIS, Y_AXIS, sp * X_AXIS - sq * Y_AXIS, sq * X_AXIS + sp * Y_AXIS)


def _xy_pr_settings() -> MeasurementSettings:
    return MeasurementSettings(X_AXIS, Y_AXIS, (X_AXIS - Y_AXIS) / SQ2, (X_AXIS + Y_AXIS) / SQ2)


def _mermin_settings() -> MeasurementSettings:
    return MeasurementSettings(X_AXIS, -Y_AXIS, Y_AXIS, X_AXIS)


def _gen_schmidt_noisy_pr(s):
    return _schmidt(s)[0], _xy_pr_settings()


def _gen_schmidt_pr_settings(s):
    ct, st = _tilt(s)
    return _schmidt(s)[0], MeasurementSettings(
        Z_AXIS, X_AXIS, ct * Z_AXIS + st * X_AXIS, ct * Z_AXIS - st * X_AXIS)


def _gen_schmidt_z(s):
    return _schmidt(s)[0], MeasurementSettings(
        Z_AXIS, X_AXIS, (Z_AXIS + X_AXIS) / SQ2, (Z_AXIS - X_AXIS) / SQ2)


def _gen_schmidt_mermin(s):
    return _schmidt(s)[0], _mermin_settings()


def _gen_schmidt_mermin_tilted(s):
    ct, st = _tilt(s)
    return _schmidt(s)[0], MeasurementSettings(
        (Z_AXIS + X_AXIS) / SQ2, (Z_AXIS - X_AXIS) / SQ2,
        ct * Z_AXIS - st * X_AXIS, ct * Z_AXIS + st * X_AXIS)


def _gen_schmidt_mermin_corr(s):
    return _schmidt(s)[0], MeasurementSettings(
        (Z_AXIS + X_AXIS) / SQ2, (Z_AXIS - X_AXIS) / SQ2,
        (Z_AXIS - X_AXIS) / SQ2, (Z_AXIS + X_AXIS) / SQ2)


def _gen_schmidt_bell_mermin(s):
    state, c = _schmidt(s)
    return state, MeasurementSettings(
        s * X_AXIS + c * Y_AXIS, c * X_AXIS - s * Y_AXIS,
        (X_AXIS + Y_AXIS) / SQ2, (X_AXIS - Y_AXIS) / SQ2)


def _gen_schmidt_bell_mermin_xz(s):
    state, c = _schmidt(s)
    return state, MeasurementSettings(
        c * X_AXIS + s * Z_AXIS, s * X_AXIS - c * Z_AXIS,
        (X_AXIS + Z_AXIS) / SQ2, (-X_AXIS + Z_AXIS) / SQ2)


def _gen_werner_bell(p):
    return state_werner(p), _xy_pr_settings()


def _gen_werner_mermin(p):
    return state_werner(p), _mermin_settings()


def _gen_werner_bell_mermin(p):
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    return state_werner(p), MeasurementSettings(
        sp * X_AXIS + sq * Y_AXIS, sq * X_AXIS - sp * Y_AXIS,
        (X_AXIS + Y_AXIS) / SQ2, (X_AXIS - Y_AXIS) / SQ2)


def _gen_colored_bell_iso(p):
    return state_colored(p), _xy_pr_settings()


def _gen_colored_bell_tilted(p):
    ct, st = _tilt(p)
    return state_colored(p), MeasurementSettings(
        Z_AXIS, X_AXIS, ct * Z_AXIS + st * X_AXIS, ct * Z_AXIS - st * X_AXIS)


def _gen_colored_mermin(p):
    ct, st = _tilt(p)
    return state_colored(p), MeasurementSettings(
        (Z_AXIS + X_AXIS) / SQ2, (Z_AXIS - X_AXIS) / SQ2,
        ct * Z_AXIS + st * X_AXIS, ct * Z_AXIS - st * X_AXIS)


def _gen_colored_bell_mermin(p):
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    return state_colored(p), MeasurementSettings(
        sp * Z_AXIS + sq * X_AXIS, sq * Z_AXIS - sp * X_AXIS,
        (Z_AXIS + X_AXIS) / SQ2, (Z_AXIS - X_AXIS) / SQ2)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _exp_max_entangled(p):
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    return {"B00": 2 * (sp + sq), "M11": 2 * sp, "G": 4 * sq,
            "Q": 2 * (sp - sq), "T": 2 * (sp + sq), "C": 0.0}


def _exp_schmidt_noisy_pr(s):
    return {"B00": 2 * SQ2 * s, "G": 2 * SQ2 * s, "T": 2 * SQ2 * s, "Q": 0.0, "C": 0.0}


def _exp_schmidt_pr_settings(s):
    g = 4 * s * s / math.sqrt(1 + s * s)
    return {"B00": 2 * math.sqrt(1 + s * s), "G": g, "T": g, "Q": 0.0, "C": 0.0}


def _exp_schmidt_z(s):
    return {"B00": SQ2 * (1 + s), "G": 2 * SQ2 * s, "T": SQ2 * s * (1 + s),
            "C": SQ2 * s * (1 - s), "Q": 0.0}


def _exp_schmidt_mermin(s):
    return {"M00": 2 * s, "Q": 2 * s, "T": 2 * s, "G": 0.0, "C": 0.0}


def _exp_schmidt_mermin_tilted(s):
    q = 2 * SQ2 * s * s / math.sqrt(1 + s * s)
    return {"M00": SQ2 * math.sqrt(1 + s * s), "Q": q, "T": q, "G": 0.0, "C": 0.0}


def _exp_schmidt_mermin_corr(s):
    return {"M00": 1 + s, "Q": 2 * s, "T": s * (1 + s), "C": s * (1 - s), "G": 0.0}


def _exp_schmidt_bell_mermin(s):
    c = math.sqrt(max(1.0 - s * s, 0.0))
    q = 2 * SQ2 * s * s if c > s else 2 * SQ2 * c * s
    t = 2 * SQ2 * s * s if s > c else 2 * SQ2 * c * s
    return {"G": 2 * SQ2 * s * abs(s - c), "Q": q, "T": t, "C": 0.0}


def _exp_schmidt_bell_mermin_xz(s):
    c = math.sqrt(max(1.0 - s * s, 0.0))
    q = 2 * SQ2 * s * s if c > s else 2 * SQ2 * c * s
    amp = s * s if s > c else c * s
    return {"G": 2 * SQ2 * s * abs(s - c), "Q": q,
            "T": SQ2 * amp * (1 + s), "C": SQ2 * amp * (1 - s)}


def _exp_werner_bell(p):
    return {"B00": 2 * SQ2 * p, "G": 2 * SQ2 * p, "T": 2 * SQ2 * p, "Q": 0.0, "C": 0.0}


def _exp_werner_mermin(p):
    return {"M00": 2 * p, "Q": 2 * p, "T": 2 * p, "G": 0.0, "C": 0.0}


def _exp_werner_bell_mermin(p):
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    q = 2 * p * math.sqrt(2 * p) if p <= 0.5 else 2 * p * math.sqrt(2 * (1 - p))
    t = 2 * p * math.sqrt(2 * (1 - p)) if p <= 0.5 else 2 * p * math.sqrt(2 * p)
    return {"G": 2 * SQ2 * p * abs(sp - sq), "Q": q, "T": t, "C": 0.0}


def _exp_colored_bell_iso(p):
    return {"G": 2 * SQ2 * p, "T": 2 * SQ2 * p, "Q": 0.0, "C": 0.0}


def _exp_colored_bell_tilted(p):
    root = math.sqrt(1 + p * p)
    return {"B00": 2 * root, "G": 4 * p * p / root, "T": 2 * root,
            "C": 2 * (1 - p * p) / root, "Q": 0.0}


def _exp_colored_mermin(p):
    root = math.sqrt(1 + p * p)
    return {"Q": 2 * SQ2 * p * p / root, "T": SQ2 * root, "C": SQ2 * (1 - p * p) / root, "G": 0.0}


def _exp_colored_bell_mermin(p):
    sp, sq = math.sqrt(p), math.sqrt(1.0 - p)
    q = 2 * p * math.sqrt(2 * p) if p <= 0.5 else 2 * p * math.sqrt(2 * (1 - p))
    t = (1 + p) * math.sqrt(2 * (1 - p)) if p <= 0.5 else (1 + p) * math.sqrt(2 * p)
    c = (1 - p) * math.sqrt(2 * (1 - p)) if p <= 0.5 else (1 - p) * math.sqrt(2 * p)
    return {"G": 2 * SQ2 * p * abs(sp - sq), "Q": q, "T": t, "C": c}


# canonical-decomposition weights (PR part, Mermin part) where known exactly
def _w(g_of, q_of):
    return lambda v: (g_of(v), q_of(v))


_WEIGHTS = {
    "max-entangled": _w(lambda p: math.sqrt(1 - p), lambda p: math.sqrt(p) - math.sqrt(1 - p)),
    "schmidt-noisy-pr": _w(lambda s: s / SQ2, lambda s: 0.0),
    "schmidt-pr-settings": _w(lambda s: s * s / math.sqrt(1 + s * s), lambda s: 0.0),
    "schmidt-z-settings": _w(lambda s: s / SQ2, lambda s: 0.0),
    "schmidt-mermin": _w(lambda s: 0.0, lambda s: s),
    "schmidt-mermin-tilted": _w(lambda s: 0.0, lambda s: SQ2 * s * s / math.sqrt(1 + s * s)),
    "schmidt-mermin-corr": _w(lambda s: 0.0, lambda s: s),
    "schmidt-bell-mermin": _w(lambda s: _exp_schmidt_bell_mermin(s)["G"] / 4,
                              lambda s: _exp_schmidt_bell_mermin(s)["Q"] / 2),
    "schmidt-bell-mermin-xz": _w(lambda s: _exp_schmidt_bell_mermin_xz(s)["G"] / 4,
                                 lambda s: _exp_schmidt_bell_mermin_xz(s)["Q"] / 2),
    "werner-bell": _w(lambda p: p / SQ2, lambda p: 0.0),
    "werner-mermin": _w(lambda p: 0.0, lambda p: p),
    "werner-bell-mermin": _w(lambda p: _exp_werner_bell_mermin(p)["G"] / 4,
                             lambda p: _exp_werner_bell_mermin(p)["Q"] / 2),
    "colored-bell-iso": _w(lambda p: p / SQ2, lambda p: 0.0),
    "colored-bell-tilted": _w(lambda p: p * p / math.sqrt(1 + p * p), lambda p: 0.0),
    "colored-mermin": _w(lambda p: 0.0, lambda p: SQ2 * p * p / math.sqrt(1 + p * p)),
    "colored-bell-mermin": _w(lambda p: _exp_colored_bell_mermin(p)["G"] / 4,
                              lambda p: _exp_colored_bell_mermin(p)["Q"] / 2),
}

_REGISTRY: list[ScenarioSpec] | None = None


def scenario_registry() -> list[ScenarioSpec]:
    """All 16 scenario families, in a stable order."""
    global _REGISTRY
    if _REGISTRY is not None:
        return list(_REGISTRY)
    entries = [
        ("max-entangled", "p", (0.5, 1.0), _gen_max_entangled, _exp_max_entangled,
         "Bell state; rotating Bob's x-y settings trades CHSH violation for steering; "
         "the nonlocal ensemble fraction scales as sqrt(2) times the PR weight"),
        ("schmidt-noisy-pr", "s", (0.0, 1.0), _gen_schmidt_noisy_pr, _exp_schmidt_noisy_pr,
         "Schmidt state on CHSH-optimal x-y settings: an isotropic noisy PR box"),
        ("schmidt-pr-settings", "s", (0.0, 1.0), _gen_schmidt_pr_settings, _exp_schmidt_pr_settings,
         "Schmidt state on the tilted z-x settings that violate CHSH for every s > 0"),
        ("schmidt-z-settings", "s", (0.0, 1.0), _gen_schmidt_z, _exp_schmidt_z,
         "Schmidt state on diagonal z-x settings; classical correlations split T from G"),
        ("schmidt-mermin", "s", (0.0, 1.0), _gen_schmidt_mermin, _exp_schmidt_mermin,
         "Schmidt state generating the noisy Mermin box"),
        ("schmidt-mermin-tilted", "s", (0.0, 1.0), _gen_schmidt_mermin_tilted, _exp_schmidt_mermin_tilted,
         "Schmidt state on tilted settings steering for every s > 0"),
        ("schmidt-mermin-corr", "s", (0.0, 1.0), _gen_schmidt_mermin_corr, _exp_schmidt_mermin_corr,
         "Schmidt state on symmetric diagonal settings; classical correlations split T from Q"),
        ("schmidt-bell-mermin", "s", (0.0, 1.0), _gen_schmidt_bell_mermin, _exp_schmidt_bell_mermin,
         "Schmidt state with both discords present at once (x-y plane)"),
        ("schmidt-bell-mermin-xz", "s", (0.0, 1.0), _gen_schmidt_bell_mermin_xz, _exp_schmidt_bell_mermin_xz,
         "x-z plane variant of schmidt-bell-mermin: same discords, extra classical part"),
        ("werner-bell", "p", (0.0, 1.0), _gen_werner_bell, _exp_werner_bell,
         "Werner state on CHSH-optimal settings"),
        ("werner-mermin", "p", (0.0, 1.0), _gen_werner_mermin, _exp_werner_mermin,
         "Werner state generating the noisy Mermin box"),
        ("werner-bell-mermin", "p", (0.0, 1.0), _gen_werner_bell_mermin, _exp_werner_bell_mermin,
         "Werner state with state-dependent settings mixing both discords"),
        ("colored-bell-iso", "p", (0.0, 1.0), _gen_colored_bell_iso, _exp_colored_bell_iso,
         "Bell state with colored noise on CHSH-optimal x-y settings"),
        ("colored-bell-tilted", "p", (0.0, 1.0), _gen_colored_bell_tilted, _exp_colored_bell_tilted,
         "colored noise on tilted z-x settings; CHSH violated for every p > 0"),
        ("colored-mermin", "p", (0.0, 1.0), _gen_colored_mermin, _exp_colored_mermin,
         "colored noise on diagonal/tilted settings; steering for every p > 0 "
         "(the maximal Mermin strength sits at label (0,1) for these settings)"),
        ("colored-bell-mermin", "p", (0.0, 1.0), _gen_colored_bell_mermin, _exp_colored_bell_mermin,
         "colored noise with state-dependent settings; classically correlated remainder"),
    ]
    _REGISTRY = [
        ScenarioSpec(name=name, param_name=pn, param_range=rng, generator=gen,
                     expected=exp, expected_weights=_WEIGHTS.get(name), notes=notes)
        for name, pn, rng, gen, exp, notes in entries
    ]
    return list(_REGISTRY)


def scenario_by_name(name: str) -> ScenarioSpec:
    for spec in scenario_registry():
        if spec.name == name:
            return spec
    known = ", ".join(s.name for s in scenario_registry())
    raise KeyError(f"unknown scenario '{name}'; known: {known}")

"""Bell and Mermin functions, discord and total-correlation measures.

The eight Bell functions B_abg and eight Mermin functions M_abg come in
antisymmetric pairs (g -> g^1 flips the sign), leaving four coordinates
B_ab = |B_ab0| in [0,4] and M_ab = |M_ab0| in [0,2].  The discords G and Q
minimize, over the three ways of pairing the four (a,b) labels, the
difference of in-pair gaps; T compares each B_ab against the same
expression evaluated on the product of the box's own marginals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .boxes import Box, correlators

VIOLATION_TOL = 1e-9
CHSH_LOCAL_BOUND = 2.0
STEERING_BOUND = np.sqrt(2.0)
MONOGAMY_BOUND = 4.0

# the three partitions of the labels {00,01,10,11} into two pairs
_PAIRINGS = (
    (((0, 0), (0, 1)), ((1, 0), (1, 1))),
    (((0, 0), (1, 0)), ((0, 1), (1, 1))),
    (((0, 0), (1, 1)), ((0, 1), (1, 0))),
)


def _signed_bell(e: np.ndarray, alpha: int, beta: int, gamma: int) -> float:
    return ((-1) ** gamma * e[0, 0]
            + (-1) ** (beta ^ gamma) * e[0, 1]
            + (-1) ** (alpha ^ gamma) * e[1, 0]
            + (-1) ** (alpha ^ beta ^ gamma ^ 1) * e[1, 1])


def _signed_mermin(e: np.ndarray, alpha: int, beta: int, gamma: int) -> float:
    # Each value is a signed sum of exactly two correlators; the pair
    # (A0B1, A1B0) serves the alpha^beta = 0 labels of the first branch and
    # (A0B0, A1B1) the others.
    cross = (-1) ** beta * e[0, 1] + (-1) ** alpha * e[1, 0]
    diag = (-1) ** gamma * e[0, 0] + (-1) ** (alpha ^ beta ^ gamma ^ 1) * e[1, 1]
    if (alpha, beta) in ((0, 0), (0, 1)):
        sel_cross, sel_diag = (alpha ^ beta ^ 1), (alpha ^ beta)
    else:
        sel_cross, sel_diag = (alpha ^ beta), (alpha ^ beta ^ 1)
    return sel_cross * (-1) ** gamma * cross + sel_diag * diag


def bell_function(box: Box, alpha: int, beta: int, gamma: int) -> float:
    """Signed Bell function B_abg; |B_abg| <= 2 on every local box."""
    return float(_signed_bell(correlators(box).e, alpha, beta, gamma))


def mermin_function(box: Box, alpha: int, beta: int, gamma: int) -> float:
    """Signed Mermin function M_abg; each is a sum of two correlators, |.| <= 2."""
    return float(_signed_mermin(correlators(box).e, alpha, beta, gamma))


def _bell_values(e: np.ndarray) -> np.ndarray:
    return np.array([[abs(_signed_bell(e, a, b, 0)) for b in (0, 1)] for a in (0, 1)])


def _mermin_values(e: np.ndarray) -> np.ndarray:
    return np.array([[abs(_signed_mermin(e, a, b, 0)) for b in (0, 1)] for a in (0, 1)])


def _product_bell_values(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _bell_values(np.outer(a, b))


def _pairing_min(values: np.ndarray) -> float:
    best = np.inf
    for (x1, x2), (y1, y2) in _PAIRINGS:
        best = min(best, abs(abs(values[x1] - values[x2]) - abs(values[y1] - values[y2])))
    return float(best)


def bell_discord(box: Box) -> float:
    """Pairing-minimized Bell measure G in [0, 4]; 0 on deterministic boxes, 4 on PR boxes."""
    return _pairing_min(_bell_values(correlators(box).e))


def mermin_discord(box: Box) -> float:
    """Pairing-minimized Mermin measure Q in [0, 2]; 0 on PR and deterministic boxes."""
    return _pairing_min(_mermin_values(correlators(box).e))


def product_bell(box: Box, alpha: int, beta: int) -> float:
    """B_ab evaluated on the product of the box's own marginal expectations."""
    c = correlators(box)
    return float(_product_bell_values(c.a, c.b)[alpha, beta])


def t_measure(box: Box) -> float:
    """Total-correlation measure: max_ab |B_ab - B^prod_ab|; zero iff product box."""
    c = correlators(box)
    return float(np.max(np.abs(_bell_values(c.e) - _product_bell_values(c.a, c.b))))


def classical_residual(g: float, q: float, t: float) -> tuple[float, float]:
    """Signed and absolute classical part of the additivity relation t = g + q +- c."""
    c_signed = t - (g + q)
    return float(c_signed), float(abs(c_signed))


def inequality_flags(bell: np.ndarray, mermin: np.ndarray, g: float, q: float,
                     tol: float = VIOLATION_TOL) -> tuple[bool, bool, float]:
    """CHSH and steering violation flags plus the nonlocality/contextuality trade-off lhs.

    The steering flag is evaluated unconditionally at box level; the
    operator compatibility side condition under which the bound sqrt(2) is
    derived has no box-level counterpart.
    """
    chsh = bool(np.max(bell) > CHSH_LOCAL_BOUND + tol)
    steering = bool(np.max(mermin) > STEERING_BOUND + tol)
    return chsh, steering, float(g + 2.0 * q)


@dataclass(frozen=True)
class MeasureReport:
    """All Bell/Mermin strengths, the three measures, and inequality flags for one box."""

    bell: np.ndarray          # B_ab = |B_ab0|, shape (2,2), range [0,4]
    mermin: np.ndarray        # M_ab = |M_ab0|, shape (2,2), range [0,2]
    bell_prod: np.ndarray     # B^prod_ab >= 0, shape (2,2)
    g: float
    q: float
    t: float
    c_signed: float
    c: float
    chsh_violated: bool
    steering_violated: bool
    monogamy_lhs: float

    def value(self, key: str) -> float:
        """Look up a scalar by sweep-column name (B00, M01, G, Q, T, C, ...)."""
        if key in ("G", "Q", "T", "C", "C_signed"):
            return {"G": self.g, "Q": self.q, "T": self.t, "C": self.c,
                    "C_signed": self.c_signed}[key]
        table = {"B": self.bell, "M": self.mermin}
        if len(key) == 3 and key[0] in table and key[1] in "01" and key[2] in "01":
            return float(table[key[0]][int(key[1]), int(key[2])])
        raise KeyError(key)

    def to_dict(self) -> dict:
        return {
            "bell": self.bell.tolist(),
            "mermin": self.mermin.tolist(),
            "bell_prod": self.bell_prod.tolist(),
            "g": self.g,
            "q": self.q,
            "t": self.t,
            "c_signed": self.c_signed,
            "c": self.c,
            "chsh_violated": self.chsh_violated,
            "steering_violated": self.steering_violated,
            "monogamy_lhs": self.monogamy_lhs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def measure_report(box: Box, tol: float = VIOLATION_TOL) -> MeasureReport:
    """Compute the full report for one box."""
    c = correlators(box)
    bell = _bell_values(c.e)
    mermin = _mermin_values(c.e)
    bell_prod = _product_bell_values(c.a, c.b)
    g = _pairing_min(bell)
    q = _pairing_min(mermin)
    t = float(np.max(np.abs(bell - bell_prod)))
    c_signed, c_abs = classical_residual(g, q, t)
    chsh, steering, monogamy = inequality_flags(bell, mermin, g, q, tol)
    bell.setflags(write=False)
    mermin.setflags(write=False)
    bell_prod.setflags(write=False)
    return MeasureReport(bell=bell, mermin=mermin, bell_prod=bell_prod,
                         g=g, q=q, t=t, c_signed=c_signed, c=c_abs,
                         chsh_violated=chsh, steering_violated=steering,
                         monogamy_lhs=monogamy)

"""Canonical convex decompositions and LP analysis on the local polytope.

Two kinds of structure extraction live here:

* bell_canonical / full_canonical peel the irreducible PR-box (and Mermin
  box) content off a box.  The weights are fixed by the measures
  (G/4 and Q/2); the construction orients the box so its dominant Bell
  coordinate sits at label (0,0,0), subtracts there, and pulls the
  components back.  The subtraction is not guaranteed to leave a valid
  box for every input; when it does not, ResidualInvalid reports the
  offending entry together with the weights rather than clamping.

* local_membership / local_content answer "is the box a mixture of the 16
  deterministic boxes" and "how much deterministic mixture fits under the
  box" with a small dense LP, solved by a self-contained two-phase
  simplex with Bland's anti-cycling rule (deterministic, reproducible).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .boxes import (Box, Lro, apply_lro, deterministic_vertices, mix, pr_box,
                    _permuted)
from .measures import bell_discord, mermin_discord

PIVOT_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
MAX_ITERATIONS = 10_000
DEGENERATE_TOL = 1e-9
RESIDUAL_ENTRY_TOL = 1e-7
RESIDUAL_PURITY_TOL = 1e-7


class SolverStalled(RuntimeError):
    """Iteration cap exceeded; signals a numerical pathology, not infeasibility."""


class Unbounded(RuntimeError):
    """Objective unbounded above.  Cannot occur for the polytope LPs here."""


class ResidualInvalid(RuntimeError):
    """The canonical subtraction does not leave a valid box.

    Carries the computed weights so callers can still inspect the
    measure-determined decomposition data.
    """

    def __init__(self, reason: str, g_weight: float, q_weight: float | None = None,
                 entry_index: tuple[int, ...] | None = None, entry_value: float | None = None):
        super().__init__(reason)
        self.g_weight = g_weight
        self.q_weight = q_weight
        self.entry_index = entry_index
        self.entry_value = entry_value


@dataclass(frozen=True)
class LpResult:
    """Outcome of one LP solve over the deterministic-vertex weights."""

    feasible: bool
    objective: float
    weights: np.ndarray
    iterations: int

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "objective": _sig12(self.objective),
            "weights": [_sig12(w) for w in self.weights],
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class ComponentTag(Enum):
    PR_PART = "PRPart"
    MERMIN_PART = "MerminPart"
    LOCAL_RESIDUAL = "LocalResidual"
    NOISE_PART = "NoisePart"


@dataclass(frozen=True)
class DecompositionTerm:
    weight: float
    component: Box
    tag: ComponentTag


@dataclass(frozen=True)
class Decomposition:
    """Convex decomposition: weights sum to 1 and the terms mix back to the source."""

    terms: tuple[DecompositionTerm, ...]
    degenerate: bool = False

    @property
    def weights(self) -> list[float]:
        return [t.weight for t in self.terms]

    def weight_of(self, tag: ComponentTag) -> float:
        return sum(t.weight for t in self.terms if t.tag is tag)

    def reconstruct(self) -> Box:
        return mix([t.component for t in self.terms], self.weights)

    def to_dict(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "terms": [
                {"weight": _sig12(t.weight), "tag": t.tag.value,
                 "component": {"probs": t.component.probs.tolist()}}
                for t in self.terms
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _sig12(x: float) -> float:
    return float(f"{float(x):.12g}")


# ---------------------------------------------------------------------------
# dense two-phase simplex
# ---------------------------------------------------------------------------

def lp_solve(objective: np.ndarray,
             eq_constraints: tuple[np.ndarray, np.ndarray] | None = None,
             ineq_constraints: tuple[np.ndarray, np.ndarray] | None = None,
             max_iterations: int = MAX_ITERATIONS) -> LpResult:
    """Maximize objective . x subject to A_eq x = b_eq, A_ub x <= b_ub, x >= 0.

    Dense two-phase tableau simplex with Bland's rule: the entering column
    is the lowest-index improving one and ratio-test ties choose the row
    whose basic variable has the lowest index, so runs are deterministic
    and cycling is impossible.  Redundant equality rows are tolerated
    (dropped when their artificial cannot be pivoted out).

    Raises SolverStalled past `max_iterations` pivots and Unbounded when a
    feasible improving ray exists.
    """
    c = np.asarray(objective, dtype=float).reshape(-1)
    n = c.size
    if n > 64:
        raise ValueError(f"solver is sized for dense problems with at most 64 variables, got {n}")

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    n_slack = 0
    slack_sign: list[int] = []
    if ineq_constraints is not None:
        A_ub, b_ub = ineq_constraints
        A_ub = np.asarray(A_ub, dtype=float).reshape(len(np.atleast_1d(b_ub)), n)
        b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
        n_slack = len(b_ub)
        for k in range(n_slack):
            rows.append(A_ub[k])
            rhs.append(float(b_ub[k]))
            slack_sign.append(1)
    if eq_constraints is not None:
        A_eq, b_eq = eq_constraints
        A_eq = np.asarray(A_eq, dtype=float).reshape(len(np.atleast_1d(b_eq)), n)
        b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
        for k in range(len(b_eq)):
            rows.append(A_eq[k])
            rhs.append(float(b_eq[k]))

    m = len(rows)
    if m == 0:
        raise ValueError("at least one constraint is required")

    # columns: n decision vars | n_slack slacks | m artificials | rhs
    width = n + n_slack + m
    T = np.zeros((m, width + 1))
    basis = np.full(m, -1, dtype=int)
    for k in range(m):
        row = np.zeros(width + 1)
        row[:n] = rows[k]
        if k < n_slack:
            row[n + k] = 1.0
        row[-1] = rhs[k]
        if row[-1] < 0:
            row = -row
        T[k] = row
        if k < n_slack and T[k, n + k] == 1.0:
            basis[k] = n + k

    iterations = 0

    def pivot(row: int, col: int):
        nonlocal iterations
        T[row] /= T[row, col]
        for r in range(m):
            if r != row and T[r, col] != 0.0:
                T[r] -= T[r, col] * T[row]
        obj[:] -= obj[col] * T[row]
        basis[row] = col
        iterations += 1

    def run(active_width: int):
        while True:
            if iterations > max_iterations:
                raise SolverStalled(f"no optimum after {max_iterations} pivots")
            enter = -1
            for j in range(active_width):
                if obj[j] < -PIVOT_TOL:
                    enter = j
                    break
            if enter < 0:
                return
            leave, best_ratio = -1, np.inf
            for r in range(m):
                a = T[r, enter]
                if a > PIVOT_TOL:
                    ratio = T[r, -1] / a
                    if ratio < best_ratio - PIVOT_TOL or (
                            abs(ratio - best_ratio) <= PIVOT_TOL
                            and (leave < 0 or basis[r] < basis[leave])):
                        leave, best_ratio = r, ratio
            if leave < 0:
                raise Unbounded("improving ray with no binding constraint")
            pivot(leave, enter)

    # phase 1: minimize the sum of artificials
    obj = np.zeros(width + 1)
    for k in range(m):
        if basis[k] < 0:
            art = n + n_slack + k
            T[k, art] = 1.0
            basis[k] = art
            obj -= T[k]
    obj[n + n_slack:width] += 1.0
    run(width)
    if -obj[-1] > FEASIBILITY_TOL:
        return LpResult(feasible=False, objective=0.0, weights=np.zeros(n), iterations=iterations)

    # drive leftover artificials out of the basis; drop rows that are redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n + n_slack:
            piv = -1
            for j in range(n + n_slack):
                if abs(T[r, j]) > PIVOT_TOL:
                    piv = j
                    break
            if piv >= 0:
                pivot(r, piv)
            else:
                keep[r] = False
    if not keep.all():
        T = T[keep]
        basis = basis[keep]
        m = len(basis)

    # phase 2: maximize the real objective (minimize -c)
    T = np.delete(T, np.s_[n + n_slack:width], axis=1)
    obj = np.zeros(T.shape[1])
    obj[:n] = -c
    for r in range(m):
        if obj[basis[r]] != 0.0:
            obj -= obj[basis[r]] * T[r]
    run(n + n_slack)

    x = np.zeros(n + n_slack)
    for r in range(m):
        x[basis[r]] = T[r, -1]
    weights = x[:n]
    return LpResult(feasible=True, objective=float(c @ weights),
                    weights=weights, iterations=iterations)


_DET_MATRIX: np.ndarray | None = None


def _det_matrix() -> np.ndarray:
    """16x16 matrix whose column l is the flattened deterministic box l = abge."""
    global _DET_MATRIX
    if _DET_MATRIX is None:
        _DET_MATRIX = np.stack([b.probs.reshape(16) for b in deterministic_vertices()], axis=1)
        _DET_MATRIX.setflags(write=False)
    return _DET_MATRIX


def local_membership(box: Box) -> LpResult:
    """Feasibility of P = sum_l q_l D_l with q in the probability simplex.

    Feasible exactly when the box lies in the local polytope; the witness
    weights are returned on success.
    """
    dets = _det_matrix()
    A_eq = np.vstack([dets, np.ones((1, 16))])
    b_eq = np.concatenate([box.probs.reshape(16), [1.0]])
    return lp_solve(np.zeros(16), eq_constraints=(A_eq, b_eq))


def local_content(box: Box) -> LpResult:
    """Maximal total weight of a deterministic mixture fitting under the box.

    max sum_l q_l subject to q >= 0 and sum_l q_l D_l <= P entrywise.  The
    objective lies in [0, 1] and equals 1 exactly when the box is local.
    """
    dets = _det_matrix()
    return lp_solve(np.ones(16), ineq_constraints=(dets, box.probs.reshape(16)))


# ---------------------------------------------------------------------------
# canonical decompositions
# ---------------------------------------------------------------------------

_SIGN = np.array([1.0, -1.0])


def _b000(p: np.ndarray) -> float:
    e = np.einsum("ijmn,m,n->ij", p, _SIGN, _SIGN)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def canonical_orientation(box: Box) -> Lro:
    """A relabeling moving the dominant signed Bell coordinate to label (0,0,0).

    Scans the full relabeling group in lexicographic encoding order and
    returns the first operation maximizing B_000 of the transformed box,
    so ties resolve deterministically (the identity wins on already
    canonical boxes).
    """
    best_val = -np.inf
    best = Lro.identity()
    for op in Lro.all():
        val = _b000(_permuted(box.probs, op))
        if val > best_val + 1e-12:
            best_val, best = val, op
    return best


def bell_canonical(box: Box) -> Decomposition:
    """Split a box into its irreducible PR-box part and a discord-free remainder.

    The PR weight is G/4 on the PR box aligned with the dominant Bell
    coordinate; the remainder (tag LocalResidual) must be a valid box with
    vanishing Bell discord, else ResidualInvalid is raised.
    """
    orient = canonical_orientation(box)
    oriented = apply_lro(box, orient)
    gw = bell_discord(oriented) / 4.0
    inv = orient.inverse()
    pr_component = apply_lro(pr_box(0, 0, 0), inv)

    if 1.0 - gw < DEGENERATE_TOL:
        return Decomposition(terms=(DecompositionTerm(1.0, pr_component, ComponentTag.PR_PART),),
                             degenerate=True)

    remainder = oriented.probs - gw * pr_box(0, 0, 0).probs
    _check_residual_entries(remainder, gw, None)
    residual = Box(remainder / (1.0 - gw), tol=RESIDUAL_ENTRY_TOL)
    g_res = bell_discord(residual)
    if g_res > RESIDUAL_PURITY_TOL:
        raise ResidualInvalid(f"residual keeps Bell discord {g_res:.3e}", gw)
    return Decomposition(terms=(
        DecompositionTerm(gw, pr_component, ComponentTag.PR_PART),
        DecompositionTerm(1.0 - gw, apply_lro(residual, inv), ComponentTag.LOCAL_RESIDUAL),
    ))


def full_canonical(box: Box) -> Decomposition:
    """Split a box into PR part, Mermin part and a discord-free local remainder.

    After canonical orientation the PR weight is G/4 on the (0,0,0) PR box
    and the Mermin weight Q/2 on (PR_000 + PR_11g)/2, with g chosen so the
    remainder's smallest entry is maximal (deterministic; recorded by the
    returned component).  Guaranteed only where the subtraction stays in
    the polytope; otherwise ResidualInvalid carries the weights and the
    offending entry.
    """
    orient = canonical_orientation(box)
    oriented = apply_lro(box, orient)
    gw = bell_discord(oriented) / 4.0
    qw = mermin_discord(oriented) / 2.0
    inv = orient.inverse()
    pr_component = apply_lro(pr_box(0, 0, 0), inv)

    after_pr = oriented.probs - gw * pr_box(0, 0, 0).probs
    candidates = []
    for gamma in (0, 1):
        mermin_probs = 0.5 * (pr_box(0, 0, 0).probs + pr_box(1, 1, gamma).probs)
        candidates.append((after_pr - qw * mermin_probs, mermin_probs))
    gamma_pick = int(np.argmax([cand.min() for cand, _ in candidates]))
    remainder, mermin_probs = candidates[gamma_pick]
    mermin_component = apply_lro(Box(mermin_probs), inv)

    if 1.0 - gw - qw < DEGENERATE_TOL:
        return Decomposition(terms=(
            DecompositionTerm(gw, pr_component, ComponentTag.PR_PART),
            DecompositionTerm(1.0 - gw, mermin_component, ComponentTag.MERMIN_PART),
        ), degenerate=True)

    _check_residual_entries(remainder, gw, qw)
    residual = Box(remainder / (1.0 - gw - qw), tol=RESIDUAL_ENTRY_TOL)
    g_res, q_res = bell_discord(residual), mermin_discord(residual)
    if max(g_res, q_res) > RESIDUAL_PURITY_TOL:
        raise ResidualInvalid(f"residual keeps discord G={g_res:.3e}, Q={q_res:.3e}", gw, qw)
    return Decomposition(terms=(
        DecompositionTerm(gw, pr_component, ComponentTag.PR_PART),
        DecompositionTerm(qw, mermin_component, ComponentTag.MERMIN_PART),
        DecompositionTerm(1.0 - gw - qw, apply_lro(residual, inv), ComponentTag.LOCAL_RESIDUAL),
    ))


def _check_residual_entries(remainder: np.ndarray, gw: float, qw: float | None):
    low = float(remainder.min())
    if low < -RESIDUAL_ENTRY_TOL:
        idx = tuple(int(v) for v in np.unravel_index(np.argmin(remainder), remainder.shape))
        raise ResidualInvalid(
            f"subtraction leaves entry {low:.6e} at [i,j,m,n]={list(idx)}",
            gw, qw, entry_index=idx, entry_value=low)

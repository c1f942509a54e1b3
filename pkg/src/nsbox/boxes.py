"""Two-party, two-input, two-output nonsignaling boxes.

A box is the table of 16 joint probabilities P(a_m, b_n | A_i, B_j) stored
in index order [i][j][m][n].  Outcome bit 0 corresponds to measurement
value +1, bit 1 to -1, so that

    P[i,j,m,n] = 1/4 * (1 + (-1)^m <A_i> + (-1)^n <B_j> + (-1)^(m^n) <A_i B_j>)

holds for every nonsignaling box.  The module provides the extremal boxes
of the nonsignaling polytope (8 PR boxes, 16 deterministic boxes), the
Mermin boxes and white noise as reference points, convex mixing, local
reversible operations (input/output relabelings plus party swap), and the
correlator parameterization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Iterator, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

_BITS = (0, 1)


class NotABox(ValueError):
    """A probability table violates a box invariant."""


class BadWeights(ValueError):
    """Convex-mixture weights are negative, unnormalized or mismatched."""


@dataclass(frozen=True)
class Box:
    """A nonsignaling behavior: validated, immutable 2x2x2x2 probability table.

    Construction clamps entries in [-tol, 0) to zero, renormalizes each
    input block, and verifies normalization, nonnegativity and the
    nonsignaling conditions.  Violations raise :class:`NotABox` with the
    offending invariant and indices.
    """

    probs: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (2, 2, 2, 2):
            raise NotABox(f"probability table must have shape (2,2,2,2), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise NotABox("probability table contains non-finite entries")
        tol = float(self.tol)
        if tol <= 0:
            raise NotABox("tolerance must be positive")

        if p.min() < -tol:
            idx = np.unravel_index(np.argmin(p), p.shape)
            raise NotABox(f"nonnegativity violated at [i,j,m,n]={list(idx)}: {p[idx]:.3e}")
        np.clip(p, 0.0, None, out=p)

        block_sums = p.sum(axis=(2, 3))
        if np.max(np.abs(block_sums - 1.0)) > 4 * tol:
            i, j = np.unravel_index(np.argmax(np.abs(block_sums - 1.0)), (2, 2))
            raise NotABox(f"normalization violated at block [i,j]=[{i},{j}]: sum={block_sums[i, j]:.12g}")
        p /= block_sums[:, :, None, None]

        # marginal of one party must not depend on the other party's input
        marg_a = p.sum(axis=3)  # [i, j, m]
        gap_a = np.max(np.abs(marg_a[:, 0, :] - marg_a[:, 1, :]))
        if gap_a > 2 * tol:
            i, m = np.unravel_index(np.argmax(np.abs(marg_a[:, 0, :] - marg_a[:, 1, :])), (2, 2))
            raise NotABox(f"nonsignaling violated for Alice at [i,m]=[{i},{m}]: gap={gap_a:.3e}")
        marg_b = p.sum(axis=2)  # [i, j, n]
        gap_b = np.max(np.abs(marg_b[0, :, :] - marg_b[1, :, :]))
        if gap_b > 2 * tol:
            j, n = np.unravel_index(np.argmax(np.abs(marg_b[0, :, :] - marg_b[1, :, :])), (2, 2))
            raise NotABox(f"nonsignaling violated for Bob at [j,n]=[{j},{n}]: gap={gap_b:.3e}")

        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "tol", tol)

    def allclose(self, other: "Box", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.probs, other.probs, rtol=0.0, atol=atol))

    def marginal_a(self) -> np.ndarray:
        """P_A(m | A_i), averaged over Bob's input (identical up to tol)."""
        return self.probs.sum(axis=3).mean(axis=1)

    def marginal_b(self) -> np.ndarray:
        """P_B(n | B_j), averaged over Alice's input."""
        return self.probs.sum(axis=2).mean(axis=0)

    def to_json(self) -> str:
        return json.dumps({"probs": self.probs.tolist(), "tol": self.tol})

    @classmethod
    def from_json(cls, text: str) -> "Box":
        data = json.loads(text)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "Box":
        if "probs" not in data:
            raise NotABox("box JSON must contain a 'probs' field")
        return cls(np.asarray(data["probs"], dtype=float), tol=float(data.get("tol", DEFAULT_TOL)))


@dataclass(frozen=True)
class CorrelatorForm:
    """The 8-parameter form of a box: <A_i>, <B_j>, and <A_i B_j>.

    Every component lies in [-1, 1]; not every such point reconstructs to a
    valid box (the reconstruction may leave the probability simplex).
    """

    a: np.ndarray  # shape (2,)
    b: np.ndarray  # shape (2,)
    e: np.ndarray  # shape (2, 2)

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(2)
        b = np.array(self.b, dtype=float).reshape(2)
        e = np.array(self.e, dtype=float).reshape(2, 2)
        for name, arr in (("a", a), ("b", b), ("e", e)):
            if np.max(np.abs(arr)) > 1 + 1e-9:
                raise NotABox(f"correlator component {name} outside [-1, 1]: max |.| = {np.max(np.abs(arr)):.12g}")
        for name, arr in (("a", a), ("b", b), ("e", e)):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "e", e)


class VertexKind(Enum):
    PR = "pr"
    DETERMINISTIC = "deterministic"
    MERMIN = "mermin"
    WHITE_NOISE = "white-noise"


@dataclass(frozen=True)
class VertexLabel:
    """Label of a reference box: PR/deterministic vertices, Mermin boxes, noise.

    epsilon is meaningful only for deterministic boxes (outputs
    m = alpha*i ^ beta, n = gamma*j ^ epsilon).
    """

    kind: VertexKind
    alpha: int = 0
    beta: int = 0
    gamma: int = 0
    epsilon: int | None = None

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) not in _BITS:
                raise ValueError(f"{name} must be a bit")
        if self.kind is VertexKind.DETERMINISTIC:
            if self.epsilon not in _BITS:
                raise ValueError("deterministic labels require an epsilon bit")
        elif self.epsilon is not None:
            raise ValueError(f"epsilon is only valid for deterministic labels, not {self.kind.value}")


def vertex(label: VertexLabel) -> Box:
    """Construct the reference box named by `label` (exact rational entries)."""
    p = np.zeros((2, 2, 2, 2))
    al, be, ga = label.alpha, label.beta, label.gamma
    if label.kind is VertexKind.PR:
        for i, j, m, n in product(_BITS, repeat=4):
            if (m ^ n) == ((i & j) ^ (al & i) ^ (be & j) ^ ga):
                p[i, j, m, n] = 0.5
    elif label.kind is VertexKind.DETERMINISTIC:
        for i, j in product(_BITS, repeat=2):
            p[i, j, (al & i) ^ be, (ga & j) ^ label.epsilon] = 1.0
    elif label.kind is VertexKind.MERMIN:
        # uniform on the i^j = beta input pairs, PR-like support on the rest
        for i, j in product(_BITS, repeat=2):
            if (i ^ j) == be:
                p[i, j] = 0.25
            else:
                for m, n in product(_BITS, repeat=2):
                    if (m ^ n) == ((i & j) ^ (al & i) ^ (be & j) ^ ga):
                        p[i, j, m, n] = 0.5
    else:
        p[:] = 0.25
    return Box(p)


def pr_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> Box:
    return vertex(VertexLabel(VertexKind.PR, alpha, beta, gamma))


def deterministic_box(alpha: int = 0, beta: int = 0, gamma: int = 0, epsilon: int = 0) -> Box:
    return vertex(VertexLabel(VertexKind.DETERMINISTIC, alpha, beta, gamma, epsilon))


def mermin_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> Box:
    return vertex(VertexLabel(VertexKind.MERMIN, alpha, beta, gamma))


def white_noise() -> Box:
    return vertex(VertexLabel(VertexKind.WHITE_NOISE))


def pr_vertices() -> list[Box]:
    return [pr_box(a, b, g) for a, b, g in product(_BITS, repeat=3)]


def deterministic_vertices() -> list[Box]:
    """The 16 local extremal boxes, indexed l = 8*alpha + 4*beta + 2*gamma + epsilon."""
    return [deterministic_box(a, b, g, e) for a, b, g, e in product(_BITS, repeat=4)]


def box_from_correlators(c: CorrelatorForm, tol: float = DEFAULT_TOL) -> Box:
    """Reconstruct the box with the given marginal and joint expectations.

    Raises NotABox when the correlator point lies outside the box body
    (some reconstructed probability below -tol).
    """
    p = np.empty((2, 2, 2, 2))
    for i, j, m, n in product(_BITS, repeat=4):
        p[i, j, m, n] = 0.25 * (1.0 + (-1) ** m * c.a[i] + (-1) ** n * c.b[j]
                                + (-1) ** (m ^ n) * c.e[i, j])
    return Box(p, tol=tol)


def correlators(box: Box) -> CorrelatorForm:
    """Marginal and joint expectation values of a box (inverse of the above)."""
    p = box.probs
    sign_m = np.array([1.0, -1.0])
    a = np.einsum("ijmn,m->i", p, sign_m) / 2.0   # mean over j; identical by nonsignaling
    b = np.einsum("ijmn,n->j", p, sign_m) / 2.0
    e = np.einsum("ijmn,m,n->ij", p, sign_m, sign_m)
    return CorrelatorForm(a, b, e)


def mix(boxes: Sequence[Box], weights: Sequence[float]) -> Box:
    """Entrywise convex combination of boxes (the nonsignaling set is convex)."""
    if len(boxes) == 0 or len(boxes) != len(weights):
        raise BadWeights(f"need equally many boxes and weights, got {len(boxes)} and {len(weights)}")
    w = np.asarray(weights, dtype=float)
    if w.min() < -DEFAULT_TOL:
        raise BadWeights(f"negative weight {w.min():.12g}")
    if abs(w.sum() - 1.0) > DEFAULT_TOL:
        raise BadWeights(f"weights sum to {w.sum():.12g}, expected 1")
    p = np.zeros((2, 2, 2, 2))
    for wi, box in zip(w, boxes):
        p += wi * box.probs
    return Box(p)


@dataclass(frozen=True)
class Lro:
    """A local reversible operation: relabelings plus optional party swap.

    Alice may flip her input (i -> i^1) and flip her output conditioned on
    the (new) input label (m -> m ^ out_a_alpha*i ^ out_a_beta); Bob likewise
    with out_b_gamma/out_b_epsilon.  The party swap exchanges the two sides
    after the relabelings.  The 128 such operations form a group.
    """

    flip_input_a: int = 0
    out_a_alpha: int = 0
    out_a_beta: int = 0
    flip_input_b: int = 0
    out_b_gamma: int = 0
    out_b_epsilon: int = 0
    swap_parties: bool = False

    def __post_init__(self):
        for name in ("flip_input_a", "out_a_alpha", "out_a_beta",
                     "flip_input_b", "out_b_gamma", "out_b_epsilon"):
            if getattr(self, name) not in _BITS:
                raise ValueError(f"{name} must be a bit")

    def encoding(self) -> tuple[int, ...]:
        return (self.flip_input_a, self.out_a_alpha, self.out_a_beta,
                self.flip_input_b, self.out_b_gamma, self.out_b_epsilon,
                int(self.swap_parties))

    @classmethod
    def identity(cls) -> "Lro":
        return cls()

    @classmethod
    def all(cls) -> Iterator["Lro"]:
        """All 128 operations in lexicographic order of their encodings."""
        for enc in product(_BITS, repeat=7):
            yield cls(*enc[:6], swap_parties=bool(enc[6]))

    def compose(self, other: "Lro") -> "Lro":
        """The operation equivalent to applying `self` first, then `other`."""
        ident = np.arange(16.0).reshape(2, 2, 2, 2)
        target = _permuted(_permuted(ident, self), other)
        for cand in Lro.all():
            if np.array_equal(_permuted(ident, cand), target):
                return cand
        raise AssertionError("relabeling group is closed; no composite found")

    def inverse(self) -> "Lro":
        ident = np.arange(16.0).reshape(2, 2, 2, 2)
        mine = _permuted(ident, self)
        for cand in Lro.all():
            if np.array_equal(_permuted(mine, cand), ident):
                return cand
        raise AssertionError("every relabeling has an inverse")


def _permuted(p: np.ndarray, op: Lro) -> np.ndarray:
    out = np.empty_like(p)
    for i, j, m, n in product(_BITS, repeat=4):
        out[i, j, m, n] = p[i ^ op.flip_input_a,
                            j ^ op.flip_input_b,
                            m ^ (op.out_a_alpha & i) ^ op.out_a_beta,
                            n ^ (op.out_b_gamma & j) ^ op.out_b_epsilon]
    if op.swap_parties:
        out = out.transpose(1, 0, 3, 2)
    return out


def apply_lro(box: Box, op: Lro) -> Box:
    """Relabel a box.  Pure permutation of entries: exact, invertible."""
    return Box(_permuted(box.probs, op), tol=box.tol)


def is_product(box: Box, tol: float = DEFAULT_TOL) -> bool:
    """True iff the box equals the product of its own marginals within tol."""
    pa = box.marginal_a()  # [i, m]
    pb = box.marginal_b()  # [j, n]
    prod = np.einsum("im,jn->ijmn", pa, pb)
    return bool(np.max(np.abs(box.probs - prod)) <= tol)


def random_box(rng: np.random.Generator) -> Box:
    """Sample a random nonsignaling box (covers local and nonlocal regions).

    Mixes three families: Dirichlet mixtures over all 24 extremal boxes,
    noisy PR boxes with a random local background, and Dirichlet mixtures
    over the deterministic vertices only.
    """
    verts = _vertex_stack()
    u = rng.random()
    if u < 0.4:
        w = rng.dirichlet(np.full(24, 0.3))
        p = np.tensordot(w, verts, axes=1)
    elif u < 0.8:
        k = int(rng.integers(8))
        lam = rng.random()
        w = rng.dirichlet(np.full(17, 0.4))  # 16 deterministic + noise
        local = np.tensordot(w[:16], verts[8:], axes=1) + w[16] * 0.25
        p = lam * verts[k] + (1 - lam) * local
    else:
        w = rng.dirichlet(np.full(16, 0.5))
        p = np.tensordot(w, verts[8:], axes=1)
    return Box(p)


def random_lro(rng: np.random.Generator, allow_swap: bool = True) -> Lro:
    bits = rng.integers(0, 2, size=7)
    swap = bool(bits[6]) if allow_swap else False
    return Lro(*(int(b) for b in bits[:6]), swap_parties=swap)


_VERTEX_CACHE: np.ndarray | None = None


def _vertex_stack() -> np.ndarray:
    """All 24 extremal boxes stacked (8 PR first, then 16 deterministic)."""
    global _VERTEX_CACHE
    if _VERTEX_CACHE is None:
        stack = np.stack([b.probs for b in pr_vertices() + deterministic_vertices()])
        stack.setflags(write=False)
        _VERTEX_CACHE = stack
    return _VERTEX_CACHE

"""Finite-support Lp vectors, windowed operators, and certified norm brackets.

Operators are finite matrices on declared atom windows and act as zero
outside them.  Operator norms are exact for p in {1, 2, inf} (and a few more
structured cases); for other exponents a certified [lower, upper] bracket is
returned: the lower end is a witness value, the upper end comes from
Riesz-Thorin interpolation, Hoelder row/column bounds, or, for entrywise
nonnegative matrices, a Collatz-Wielandt certificate that converges to the
true norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .measure import COUNTING, MeasureSpace, UnsupportedCombination, pairing, unpairing

INF = math.inf


def conjugate(p: float) -> float:
    """Conjugate exponent: 1/p + 1/p' = 1, with 1 and inf mutually conjugate."""
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def vector_pnorm(x: np.ndarray, p: float) -> float:
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    a = np.abs(x)
    if p == INF:
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.sqrt((a * a).sum()))
    return float((a**p).sum() ** (1.0 / p))


# ---------------------------------------------------------------------------
# Norm brackets


@dataclass(frozen=True)
class NormBracket:
    """Certified enclosure [lower, upper] of a nonnegative quantity."""

    lower: float
    upper: float

    def __post_init__(self):
        lo = max(0.0, float(self.lower))
        hi = float(self.upper)
        if hi < lo:
            # collapse tiny inversions caused by float roundoff
            if hi < lo - 1e-9 * max(1.0, lo):
                raise ValueError(f"invalid bracket [{lo}, {hi}]")
            hi = lo
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def exact(cls, v: float) -> "NormBracket":
        return cls(v, v)

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def scale(self, c: float) -> "NormBracket":
        c = abs(c)
        return NormBracket(self.lower * c, self.upper * c)

    def __mul__(self, other: "NormBracket") -> "NormBracket":
        return NormBracket(self.lower * other.lower, self.upper * other.upper)

    def hull(self, other: "NormBracket") -> "NormBracket":
        return NormBracket(min(self.lower, other.lower), max(self.upper, other.upper))

    def intersect(self, other: "NormBracket") -> "NormBracket":
        return NormBracket(max(self.lower, other.lower), min(self.upper, other.upper))

    def overlaps(self, other: "NormBracket", tol: float = 0.0) -> bool:
        return self.lower <= other.upper + tol and other.lower <= self.upper + tol

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= v <= self.upper + tol

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


def _psi(y: np.ndarray, p: float) -> np.ndarray:
    """Signed power map y -> |y|^(p-1) sign(y) (duality map of the lp norm)."""
    a = np.abs(y)
    s = np.sign(y) if not np.iscomplexobj(y) else np.where(a > 0, y / np.where(a > 0, a, 1.0), 0.0)
    return s * a ** (p - 1.0)


def _boyd_lower(M: np.ndarray, p: float, r: float, restarts: int = 20,
                iters: int = 500, tol: float = 1e-10, seed: int = 0) -> float:
    """Best witness value of ||Mx||_p / ||x||_r from power-type iteration."""
    n, m = M.shape
    rng = np.random.default_rng(seed)
    rp = conjugate(r)
    best = 0.0
    starts = [np.ones(m)]
    # column with the largest p-norm is often a good direction
    j = int(np.argmax([vector_pnorm(M[:, j], p) for j in range(m)]))
    e = np.zeros(m)
    e[j] = 1.0
    starts.append(e)
    for _ in range(max(0, restarts - 2)):
        starts.append(rng.standard_normal(m))
    for x in starts:
        x = np.asarray(x, dtype=float)
        nx = vector_pnorm(x, r)
        if nx == 0:
            continue
        x = x / nx
        prev = -1.0
        for _ in range(iters):
            y = M @ x
            val = vector_pnorm(y, p)
            best = max(best, val)
            if val == 0:
                break
            if p == INF or r == INF or p == 1:
                # duality maps degenerate; single evaluation only
                break
            z = M.T @ _psi(y, p)
            x_new = _psi(z, rp)  # Hoelder alignment back into the l_r ball
            nx = vector_pnorm(x_new, r)
            if nx == 0:
                break
            x = x_new / nx
            if abs(val - prev) <= tol * max(1.0, val):
                break
            prev = val
    return best


def _cw_bracket(M: np.ndarray, p: float, rtol: float = 1e-11,
                maxit: int = 5000) -> NormBracket:
    """Collatz-Wielandt bracket for ||M||_{p->p}, entrywise nonnegative M.

    For a positive matrix the map G(x) = psi_inv(M^T psi(Mx)) is order
    preserving and 1-homogeneous on the open cone, so for any x > 0 every
    cone eigenvalue mu satisfies mu <= max_i G(x)_i / x_i, and the norm is
    mu_*^{1/p'} for the eigenvalue mu_* attained at the maximizer.  Power
    iteration drives the gap between the witness value and the certificate
    to zero.
    """
    if np.any(M < 0):
        raise ValueError("Collatz-Wielandt bracket requires a nonnegative matrix")
    if not (1 < p < INF):
        raise ValueError("Collatz-Wielandt bracket requires 1 < p < inf")
    n, m = M.shape
    scale = M.max() if M.size else 0.0
    if scale == 0.0:
        return NormBracket.exact(0.0)
    # strictly positive perturbation keeps Perron iterates positive; by
    # entrywise monotonicity its norm still upper-bounds the original
    delta = 1e-13 * scale
    Mp = M + delta
    pp = conjugate(p)
    x = np.ones(m)
    lo = 0.0
    hi = INF
    for _ in range(maxit):
        y = Mp @ x
        lo = max(lo, vector_pnorm(M @ x, p) / vector_pnorm(x, p))
        z = Mp.T @ y ** (p - 1.0)
        g = z ** (1.0 / (p - 1.0))
        mu = float(np.max(g / x))
        hi = min(hi, mu ** (1.0 / pp))
        if hi - lo <= rtol * max(1.0, hi):
            break
        x = g / vector_pnorm(g, p)
    return NormBracket(lo, min(hi, _holder_upper(M, p, p)))


def _holder_upper(M: np.ndarray, p: float, r: float) -> float:
    """min of the Hoelder row bound and column bound for ||M||_{r->p}."""
    rp = conjugate(r)
    row = vector_pnorm(np.array([vector_pnorm(M[i, :], rp) for i in range(M.shape[0])]), p)
    col = vector_pnorm(np.array([vector_pnorm(M[:, j], p) for j in range(M.shape[1])]), rp)
    return min(row, col)


def _exact_norms_1_2_inf(M: np.ndarray) -> tuple[float, float, float]:
    n1 = max((vector_pnorm(M[:, j], 1) for j in range(M.shape[1])), default=0.0)
    n2 = float(np.linalg.svd(M, compute_uv=False)[0]) if M.size else 0.0
    ninf = max((vector_pnorm(M[i, :], 1) for i in range(M.shape[0])), default=0.0)
    return n1, n2, ninf


def opnorm_bracket(M: np.ndarray, p: float, r: float | None = None,
                   seed: int = 0, restarts: int = 20) -> NormBracket:
    """Bracket on the operator norm of M from unweighted l_r to l_p.

    Exact (lower == upper) whenever a closed form exists: r = 1 (max column
    p-norm), p = inf (max row r'-norm), r = p = 2 (largest singular value),
    r = inf with few columns (sign-vertex enumeration), and nonnegative
    matrices with r = p via the Collatz-Wielandt certificate.
    """
    if r is None:
        r = p
    M = np.asarray(M, dtype=float)
    if M.size == 0 or not np.any(M):
        return NormBracket.exact(0.0)
    if r == 1:
        return NormBracket.exact(max(vector_pnorm(M[:, j], p) for j in range(M.shape[1])))
    if M.shape[1] == 1:
        # one-dimensional domain: the norm is the p-norm of the single column
        return NormBracket.exact(vector_pnorm(M[:, 0], p))
    if M.shape[0] == 1:
        # one-dimensional codomain: the matrix acts as a functional, so the
        # norm is the dual r-norm of the row
        return NormBracket.exact(vector_pnorm(M[0, :], conjugate(r)))
    if p == INF:
        rp = conjugate(r)
        return NormBracket.exact(max(vector_pnorm(M[i, :], rp) for i in range(M.shape[0])))
    if r == 2 and p == 2:
        return NormBracket.exact(float(np.linalg.svd(M, compute_uv=False)[0]))
    if r == INF and M.shape[1] <= 16:
        # the l_inf ball is a cube; a convex max is attained at a vertex
        m = M.shape[1]
        best = 0.0
        for bits in range(1 << (m - 1)):
            s = np.array([1.0] + [1.0 if (bits >> i) & 1 else -1.0 for i in range(m - 1)])
            best = max(best, vector_pnorm(M @ s, p))
        return NormBracket.exact(best)
    if r == p:
        if np.all(M >= 0):
            return _cw_bracket(M, p)
        lower = _boyd_lower(M, p, r, restarts=restarts, seed=seed)
        n1, n2, ninf = _exact_norms_1_2_inf(M)
        if p < 2:
            th = 2.0 - 2.0 / p
            rt = n1 ** (1.0 - th) * n2**th
        else:
            th = 1.0 - 2.0 / p
            rt = n2 ** (1.0 - th) * ninf**th
        upper = min(rt, _holder_upper(M, p, r), _cw_bracket(np.abs(M), p).upper)
        return NormBracket(lower, max(lower, upper))
    lower = _boyd_lower(M, p, r, restarts=restarts, seed=seed)
    upper = _holder_upper(M, p, r)
    return NormBracket(lower, max(lower, upper))


# ---------------------------------------------------------------------------
# Vectors


@dataclass(frozen=True)
class LpVector:
    """Finite-support element of Lp over an atomic measure space."""

    space: MeasureSpace
    p: float
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {a: complex(v).real if complex(v).imag == 0 else complex(v)
                 for a, v in self.entries.items() if v != 0}
        for a in clean:
            if a not in self.space:
                raise ValueError(f"{a!r} outside the measure space")
        object.__setattr__(self, "entries", clean)

    @property
    def support(self) -> set:
        return set(self.entries)

    def __getitem__(self, atom):
        return self.entries.get(atom, 0.0)

    def norm(self) -> float:
        if not self.entries:
            return 0.0
        vals = np.array([abs(v) for v in self.entries.values()], dtype=float)
        if self.p == INF:
            return float(vals.max())
        w = np.array([self.space.weight(a) for a in self.entries], dtype=float)
        return float((w @ vals**self.p) ** (1.0 / self.p))

    def __add__(self, other: "LpVector") -> "LpVector":
        self._check_compatible(other)
        ent = dict(self.entries)
        for a, v in other.entries.items():
            ent[a] = ent.get(a, 0.0) + v
        return LpVector(self.space, self.p, ent)

    def __sub__(self, other: "LpVector") -> "LpVector":
        return self + (-1.0) * other

    def __rmul__(self, c) -> "LpVector":
        return LpVector(self.space, self.p, {a: c * v for a, v in self.entries.items()})

    def _check_compatible(self, other: "LpVector"):
        if self.p != other.p or self.space != other.space:
            raise ValueError("vectors live in different Lp spaces")

    def to_json(self) -> dict:
        return {"p": None if self.p == INF else self.p,
                "entries": {str(a): v for a, v in self.entries.items()}}

    @classmethod
    def from_json(cls, obj: dict, space: MeasureSpace = COUNTING) -> "LpVector":
        p = INF if obj.get("p") in (None, "inf") else float(obj["p"])
        ent = {int(a) if space.is_counting else a: float(v)
               for a, v in obj.get("entries", {}).items()}
        return cls(space, p, ent)


def lp_norm(v: LpVector) -> float:
    return v.norm()


def basis_vector(atom, p: float, space: MeasureSpace = COUNTING) -> LpVector:
    return LpVector(space, p, {atom: 1.0})


# ---------------------------------------------------------------------------
# Windowed operators


def _weights(space: MeasureSpace, atoms) -> np.ndarray:
    return np.array([space.weight(a) for a in atoms], dtype=float)


@dataclass(frozen=True)
class LpOperator:
    """Finite matrix acting on a declared window of the base space.

    The operator sends the span of the domain-window basis vectors into the
    span of the codomain window and annihilates everything else; it is the
    desk-scale stand-in for a bounded operator on Lp.
    """

    space: MeasureSpace
    p: float
    dom: tuple
    cod: tuple
    matrix: np.ndarray  # shape (len(cod), len(dom))

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.shape != (len(self.cod), len(self.dom)):
            if m.size == len(self.cod) * len(self.dom):
                m = m.reshape(len(self.cod), len(self.dom))
            else:
                raise ValueError("matrix shape does not fit the windows")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dom", tuple(self.dom))
        object.__setattr__(self, "cod", tuple(self.cod))

    @classmethod
    def identity(cls, window, p: float, space: MeasureSpace = COUNTING) -> "LpOperator":
        window = tuple(window)
        return cls(space, p, window, window, np.eye(len(window)))

    @classmethod
    def zero(cls, p: float, space: MeasureSpace = COUNTING) -> "LpOperator":
        return cls(space, p, (), (), np.zeros((0, 0)))

    @classmethod
    def rank_one(cls, out_vec: LpVector, in_atom, p: float,
                 space: MeasureSpace = COUNTING) -> "LpOperator":
        """Operator e_{in_atom} -> out_vec, zero elsewhere."""
        cod = tuple(sorted(out_vec.entries))
        col = np.array([[out_vec[a]] for a in cod], dtype=float)
        return cls(space, p, (in_atom,), cod, col)

    def apply(self, v: LpVector) -> LpVector:
        if v.p != self.p or v.space != self.space:
            raise ValueError("exponent or space mismatch")
        x = np.array([v[a] for a in self.dom]) if self.dom else np.zeros(0)
        y = self.matrix @ x
        ent = {}
        for a, val in zip(self.cod, y):
            if val != 0:
                ent[a] = ent.get(a, 0.0) + val
        return LpVector(self.space, self.p, ent)

    def apply_array(self, atoms: tuple, block: np.ndarray) -> tuple[tuple, np.ndarray]:
        """Apply to a stack of columns given as rows indexed by ``atoms``."""
        idx = {a: i for i, a in enumerate(atoms)}
        x = np.zeros((len(self.dom), block.shape[1]))
        for i, a in enumerate(self.dom):
            if a in idx:
                x[i] = block[idx[a]]
        return self.cod, self.matrix @ x

    def scaled_matrix(self) -> np.ndarray:
        """Diagonal weight reduction D_cod^{1/p} M D_dom^{-1/p}."""
        if self.space.is_counting or self.p == INF:
            return self.matrix
        wc = _weights(self.space, self.cod) ** (1.0 / self.p)
        wd = _weights(self.space, self.dom) ** (1.0 / self.p)
        return (self.matrix * wc[:, None]) / wd[None, :]

    def norm_bracket(self, seed: int = 0) -> NormBracket:
        m = self.scaled_matrix()
        if self.p == INF and not self.space.is_counting:
            # weights are irrelevant for the sup norm on both sides
            m = self.matrix
        return opnorm_bracket(m, self.p, seed=seed)

    def compose(self, other: "LpOperator") -> "LpOperator":
        """self after other."""
        self._check(other)
        mid = tuple(dict.fromkeys(list(other.cod) + list(self.dom)))
        a = self._window(self.cod, mid)
        b = other._window(mid, other.dom)
        return LpOperator(self.space, self.p, other.dom, self.cod, a @ b)

    def __add__(self, other: "LpOperator") -> "LpOperator":
        self._check(other)
        dom = tuple(dict.fromkeys(list(self.dom) + list(other.dom)))
        cod = tuple(dict.fromkeys(list(self.cod) + list(other.cod)))
        return LpOperator(self.space, self.p, dom, cod,
                          self._window(cod, dom) + other._window(cod, dom))

    def __rmul__(self, c: float) -> "LpOperator":
        return replace(self, matrix=c * self.matrix)

    def _window(self, rows: tuple, cols: tuple) -> np.ndarray:
        ri = {a: i for i, a in enumerate(self.cod)}
        ci = {a: i for i, a in enumerate(self.dom)}
        out = np.zeros((len(rows), len(cols)))
        for i, a in enumerate(rows):
            if a not in ri:
                continue
            for j, b in enumerate(cols):
                if b in ci:
                    out[i, j] = self.matrix[ri[a], ci[b]]
        return out

    def _check(self, other: "LpOperator"):
        if self.p != other.p or self.space != other.space:
            raise ValueError("exponent or space mismatch")

    def to_json(self) -> dict:
        return {"p": None if self.p == INF else self.p,
                "dom": list(self.dom), "cod": list(self.cod),
                "m": self.matrix.tolist()}

    @classmethod
    def from_json(cls, obj: dict, space: MeasureSpace = COUNTING) -> "LpOperator":
        p = INF if obj.get("p") in (None, "inf") else float(obj["p"])
        return cls(space, p, tuple(obj["dom"]), tuple(obj["cod"]),
                   np.asarray(obj["m"], dtype=float))


def operator_norm_bracket(a: LpOperator, seed: int = 0) -> NormBracket:
    return a.norm_bracket(seed=seed)


def proper_projection(window, p: float, space: MeasureSpace = COUNTING) -> LpOperator:
    """Coordinate-mask projection onto the atoms in ``window``."""
    return LpOperator.identity(tuple(window), p, space)


# ---------------------------------------------------------------------------
# Proper isometries


@dataclass(frozen=True)
class ProperIsometry:
    """Isometry e_j -> e_{sigma(j)} for an injective atom map sigma.

    The image is a coordinate subspace, so the isometry is proper; ``star``
    gives the associated coisometry (inverse on the image, zero elsewhere).
    The standard disjoint family is sigma = pairing(k, .).
    """

    forward: callable
    backward: callable  # atom -> preimage atom, or None if outside the image
    label: str = "I"

    @classmethod
    def standard(cls, k: int) -> "ProperIsometry":
        def back(i):
            a, b = unpairing(i)
            return b if a == k else None
        return cls(lambda j: pairing(k, j), back, label=f"I_{k}")

    def compose(self, other: "ProperIsometry") -> "ProperIsometry":
        def back(i):
            j = self.backward(i)
            return None if j is None else other.backward(j)
        return ProperIsometry(lambda j: self.forward(other.forward(j)), back,
                              label=f"{self.label}{other.label}")

    def apply(self, v: LpVector) -> LpVector:
        return LpVector(v.space, v.p, {self.forward(a): x for a, x in v.entries.items()})

    def star_apply(self, v: LpVector) -> LpVector:
        ent = {}
        for a, x in v.entries.items():
            j = self.backward(a)
            if j is not None:
                ent[j] = ent.get(j, 0.0) + x
        return LpVector(v.space, v.p, ent)

    def reindex(self, atoms) -> list:
        return [self.forward(a) for a in atoms]

    def as_operator(self, window, p: float) -> LpOperator:
        window = tuple(window)
        cod = tuple(self.forward(a) for a in window)
        return LpOperator(COUNTING, p, window, cod, np.eye(len(window)))

    def star_as_operator(self, window, p: float) -> LpOperator:
        window = tuple(window)
        cod = tuple(self.forward(a) for a in window)
        return LpOperator(COUNTING, p, cod, window, np.eye(len(window)))


def disjoint_isometries(count: int, space: MeasureSpace = COUNTING) -> list[ProperIsometry]:
    """The standard pairwise disjoint proper family I_k e_j = e_{pairing(k, j)}."""
    if not space.is_counting:
        raise UnsupportedCombination(
            "disjoint proper isometries need infinitely many atoms")
    return [ProperIsometry.standard(k) for k in range(count)]


def block_assemble(blocks, p: float, space: MeasureSpace = COUNTING) -> LpOperator:
    """Sum of Q_k S_k P_k over blocks (Q_k, S_k, P_k) with disjoint masks.

    The assembled operator norm is at most max_k ||S_k||.
    """
    seen_dom, seen_cod = set(), set()
    total = LpOperator.zero(p, space)
    for q, s, pr in blocks:
        dmask, cmask = set(pr.dom), set(q.dom)
        if dmask & seen_dom or cmask & seen_cod:
            raise ValueError("projection masks must be pairwise disjoint")
        seen_dom |= dmask
        seen_cod |= cmask
        total = total + q.compose(s).compose(pr)
    return total

"""Finite-dimensional normed spaces with norm and dual-norm oracles.

The workhorse family is weighted lq over a finite atomic space, where the
dual norm (under the plain coordinate pairing f(x) = sum f_i x_i) is exact
and Hoelder equality witnesses are available analytically.  Custom norms get
a bracketed dual built from sampled witnesses and an equivalence constant to
the Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lpcore import INF, NormBracket, conjugate, vector_pnorm


@dataclass(frozen=True)
class FiniteNormedSpace:
    dim: int
    family: str = "lq"  # "lq" or "custom"
    q: float = 2.0
    weights: tuple | None = None
    norm_fn: Callable[[np.ndarray], float] | None = None
    dual_samples: int = 400

    def __post_init__(self):
        if self.family == "lq":
            if self.weights is not None:
                w = tuple(float(x) for x in self.weights)
                if len(w) != self.dim or any(x <= 0 for x in w):
                    raise ValueError("need one positive weight per coordinate")
                object.__setattr__(self, "weights", w)
        elif self.family == "custom":
            if self.norm_fn is None:
                raise ValueError("custom space needs a norm callable")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    # -- primal norm --------------------------------------------------------

    def norm(self, x) -> float:
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of dimension {self.dim}")
        if self.family == "custom":
            return float(self.norm_fn(x))
        a = np.abs(x)
        if self.q == INF:
            return float(a.max()) if self.dim else 0.0
        if self.weights is None:
            return vector_pnorm(a, self.q)
        w = np.asarray(self.weights)
        return float((w @ a**self.q) ** (1.0 / self.q))

    # -- dual norm ----------------------------------------------------------

    def dual_norm(self, f) -> NormBracket:
        """Bracket on sup { |f(x)| : ||x|| <= 1 } under the plain pairing."""
        f = np.asarray(f, dtype=float)
        if self.family == "lq":
            qc = conjugate(self.q)
            if self.weights is None:
                return NormBracket.exact(vector_pnorm(f, qc))
            w = np.asarray(self.weights)
            if qc == INF:
                return NormBracket.exact(float(np.max(np.abs(f) / w)) if self.dim else 0.0)
            if self.q == INF:
                return NormBracket.exact(float(np.abs(f).sum()))
            return NormBracket.exact(
                float((w ** (1.0 - qc) @ np.abs(f) ** qc) ** (1.0 / qc)))
        # custom norm: witnesses from a fixed sample of directions give the
        # lower end; |f(x)| <= ||f||_2 ||x||_2 <= ||f||_2 ||x|| / c gives the
        # upper end, with c a sampled (heuristic) lower frame constant
        rng = np.random.default_rng(12345)
        lo = 0.0
        c = np.inf
        dirs = list(np.eye(self.dim)) + list(rng.standard_normal((self.dual_samples, self.dim)))
        for d in dirs:
            n = self.norm(d)
            if n == 0:
                continue
            lo = max(lo, abs(float(f @ d)) / n)
            c = min(c, n / vector_pnorm(d, 2))
        hi = vector_pnorm(f, 2) / c if c > 0 else np.inf
        return NormBracket(lo, max(lo, hi))

    def dual_witness(self, f) -> np.ndarray:
        """Unit vector x with f(x) = dual_norm(f); exact for the lq family."""
        f = np.asarray(f, dtype=float)
        if not np.any(f):
            x = np.zeros(self.dim)
            if self.dim:
                x[0] = 1.0
                x = x / self.norm(x)
            return x
        if self.family != "lq":
            # best sampled direction
            rng = np.random.default_rng(12345)
            best, bx = -1.0, None
            for d in list(np.eye(self.dim)) + list(rng.standard_normal((self.dual_samples, self.dim))):
                n = self.norm(d)
                if n == 0:
                    continue
                v = abs(float(f @ d)) / n
                if v > best:
                    best, bx = v, np.sign(f @ d) * d / n
            return bx
        w = np.ones(self.dim) if self.weights is None else np.asarray(self.weights)
        if self.q == 1:
            x = np.zeros(self.dim)
            j = int(np.argmax(np.abs(f) / w))
            x[j] = np.sign(f[j]) if f[j] != 0 else 1.0
            x[j] /= w[j]
            return x
        if self.q == INF:
            return np.sign(f)
        # Hoelder equality: x_i proportional to sign(f_i) (|f_i| / w_i)^{q'-1}
        qc = conjugate(self.q)
        x = np.sign(f) * (np.abs(f) / w) ** (qc - 1.0)
        n = self.norm(x)
        return x / n if n > 0 else x

    def conjugate_space(self) -> "FiniteNormedSpace":
        if self.family != "lq":
            raise ValueError("only the lq family has an explicit dual")
        qc = conjugate(self.q)
        if self.weights is None:
            return FiniteNormedSpace(self.dim, "lq", qc)
        w = np.asarray(self.weights)
        if qc == INF or self.q == INF:
            dw = tuple(1.0 / np.asarray(w))
        else:
            dw = tuple(w ** (1.0 - qc))
        return FiniteNormedSpace(self.dim, "lq", qc, dw)

    def to_json(self) -> dict:
        if self.family == "lq":
            out = {"family": "lq", "q": None if self.q == INF else self.q, "dim": self.dim}
            if self.weights is not None:
                out["weights"] = list(self.weights)
            return out
        return {"family": "custom", "dim": self.dim}

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteNormedSpace":
        if obj.get("family") != "lq":
            raise ValueError("only lq spaces can be rebuilt from JSON")
        q = INF if obj.get("q") in (None, "inf") else float(obj["q"])
        dim = int(obj.get("dim", len(obj.get("weights", []))))
        w = obj.get("weights")
        return cls(dim, "lq", q, None if w is None else tuple(w))


def lq_space(dim: int, q: float, weights=None) -> FiniteNormedSpace:
    return FiniteNormedSpace(dim, "lq", q, None if weights is None else tuple(weights))


def dual_norm(space: FiniteNormedSpace, f) -> NormBracket:
    return space.dual_norm(f)

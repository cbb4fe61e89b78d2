"""Bracketed projective tensor norm of a matrix between two lq-type spaces.

For u in A (x) B stored as a coefficient matrix M (rows = A coordinates,
columns = B coordinates) the projective norm inf { sum ||a_k|| ||b_k|| } is
exact when either factor is a weighted l1 space or both factors are Hilbert
(nuclear norm after diagonal scaling).  Otherwise the upper end comes from a
decomposition search (column start, SVD start, pairwise rotations) and the
lower end from duality: |<M, Phi>| over maps Phi : B -> A* of operator norm
at most one.
"""

from __future__ import annotations

import numpy as np

from .lpcore import INF, NormBracket, conjugate, opnorm_bracket, vector_pnorm
from .normed import FiniteNormedSpace


def _scaling(space: FiniteNormedSpace) -> np.ndarray:
    """W with ||x||_space = ||W x||_q (identity when q = inf)."""
    if space.family != "lq":
        raise ValueError("scaling defined for lq spaces only")
    if space.weights is None or space.q == INF:
        return np.ones(space.dim)
    return np.asarray(space.weights) ** (1.0 / space.q)


def operator_norm_between(M: np.ndarray, dom: FiniteNormedSpace,
                          cod: FiniteNormedSpace, seed: int = 0) -> NormBracket:
    """Bracket on ||M : dom -> cod|| for lq-family spaces."""
    wd = _scaling(dom)
    wc = _scaling(cod)
    scaled = (M * wc[:, None]) / wd[None, :]
    return opnorm_bracket(scaled, cod.q, r=dom.q, seed=seed)


def _decomposition_cost(terms, A: FiniteNormedSpace, B: FiniteNormedSpace) -> float:
    return sum(A.norm(a) * B.norm(b) for a, b in terms)


def _improve_rotations(terms, A, B, rng, passes: int = 4, angles: int = 24):
    """Greedy two-term remixing; rotations preserve the represented tensor."""
    terms = [(a.copy(), b.copy()) for a, b in terms]
    thetas = np.linspace(0.0, np.pi, angles, endpoint=False)
    for _ in range(passes):
        improved = False
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                a1, b1 = terms[i]
                a2, b2 = terms[j]
                base = A.norm(a1) * B.norm(b1) + A.norm(a2) * B.norm(b2)
                best = (base, None)
                for t in thetas[1:]:
                    c, s = np.cos(t), np.sin(t)
                    na1, na2 = c * a1 + s * a2, -s * a1 + c * a2
                    nb1, nb2 = c * b1 + s * b2, -s * b1 + c * b2
                    cost = A.norm(na1) * B.norm(nb1) + A.norm(na2) * B.norm(nb2)
                    if cost < best[0] - 1e-15:
                        best = (cost, (na1, nb1, na2, nb2))
                if best[1] is not None:
                    na1, nb1, na2, nb2 = best[1]
                    terms[i] = (na1, nb1)
                    terms[j] = (na2, nb2)
                    improved = True
        if not improved:
            break
    terms = [(a, b) for a, b in terms if A.norm(a) * B.norm(b) > 1e-15]
    return terms


def _upper_search(M, A, B, restarts: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    starts = []
    cols = [(M[:, j].copy(), e) for j, e in enumerate(np.eye(B.dim)) if np.any(M[:, j])]
    starts.append(cols)
    rows = [(e, M[i, :].copy()) for i, e in enumerate(np.eye(A.dim)) if np.any(M[i, :])]
    starts.append(rows)
    try:
        u, s, vt = np.linalg.svd(M)
        svd_terms = [(s[k] * u[:, k], vt[k, :]) for k in range(len(s)) if s[k] > 1e-14]
        starts.append(svd_terms)
    except np.linalg.LinAlgError:
        pass
    best = np.inf
    for k, terms in enumerate(starts):
        if not terms:
            continue
        best = min(best, _decomposition_cost(terms, A, B))
        improved = _improve_rotations(terms, A, B, rng)
        if improved:
            best = min(best, _decomposition_cost(improved, A, B))
    for _ in range(restarts):
        # random orthogonal remix of the SVD start
        terms = starts[-1] if starts[-1] else starts[0]
        n = len(terms)
        if n < 2:
            break
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        amat = np.stack([a for a, _ in terms])
        bmat = np.stack([b for _, b in terms])
        mixed = list(zip(q @ amat, np.linalg.inv(q).T @ bmat))
        mixed = _improve_rotations(mixed, A, B, rng, passes=2)
        if mixed:
            best = min(best, _decomposition_cost(mixed, A, B))
    return best if best < np.inf else 0.0


def _lower_duality(M, A, B, seed: int) -> float:
    """max |<M, Phi>| over Phi : B -> A^* with certified norm <= 1."""
    try:
        Adual = A.conjugate_space()
        Bdual = B.conjugate_space()
    except ValueError:
        return 0.0
    candidates = [M.copy(), np.sign(M)]
    try:
        u, s, vt = np.linalg.svd(M)
        r = max(1, int((s > 1e-14).sum()))
        candidates.append(u[:, :r] @ vt[:r, :])  # polar factor, exact for Hilbert pairs
    except np.linalg.LinAlgError:
        pass
    # rank-one alternation: Phi = fa (x) fb with fa in ball(A*), fb in ball(B*)
    rng = np.random.default_rng(seed)
    for start in range(4):
        fb = Bdual.dual_witness(M.sum(axis=0) if start == 0
                                else rng.standard_normal(B.dim))
        for _ in range(6):
            fa = Adual.dual_witness(M @ fb)
            fb = Bdual.dual_witness(M.T @ fa)
        candidates.append(np.outer(fa, fb))
    best = 0.0
    for phi in candidates:
        if phi is None or not np.any(phi):
            continue
        nb = operator_norm_between(phi, B, Adual)
        if nb.upper <= 0:
            continue
        best = max(best, abs(float((M * phi).sum())) / nb.upper)
    return best


def projective_norm_bracket(M: np.ndarray, A: FiniteNormedSpace,
                            B: FiniteNormedSpace, restarts: int = 10,
                            seed: int = 0) -> NormBracket:
    """Bracket on the projective norm of the tensor with coefficients M."""
    M = np.asarray(M, dtype=float)
    if M.shape != (A.dim, B.dim):
        raise ValueError("coefficient matrix does not match the factor dimensions")
    if not np.any(M):
        return NormBracket.exact(0.0)
    if A.family == "lq" and A.q == 1:
        w = np.ones(A.dim) if A.weights is None else np.asarray(A.weights)
        return NormBracket.exact(float(sum(w[i] * B.norm(M[i, :]) for i in range(A.dim))))
    if B.family == "lq" and B.q == 1:
        w = np.ones(B.dim) if B.weights is None else np.asarray(B.weights)
        return NormBracket.exact(float(sum(w[j] * A.norm(M[:, j]) for j in range(B.dim))))
    if (A.family == "lq" and B.family == "lq" and A.q == 2 and B.q == 2):
        scaled = _scaling(A)[:, None] * M * _scaling(B)[None, :]
        return NormBracket.exact(float(np.linalg.svd(scaled, compute_uv=False).sum()))
    upper = _upper_search(M, A, B, restarts, seed)
    lower = _lower_duality(M, A, B, seed)
    # cross-norm floor for rank-one tensors keeps elementary cases exact
    try:
        u, s, vt = np.linalg.svd(M)
        if (s > 1e-12 * s[0]).sum() == 1:
            # rank one: the projective norm is the cross-norm value
            return NormBracket.exact(A.norm(s[0] * u[:, 0]) * B.norm(vt[0, :]))
    except np.linalg.LinAlgError:
        pass
    return NormBracket(min(lower, upper), max(lower, upper))

"""Dense real-matrix kernel for few-qubit spin operators.

Conventions used throughout the package:

* computational z-basis, ``|up> -> bit 0``, ``|down> -> bit 1``;
* site 1 is the most significant bit (for a block, site 1 is the centre);
* everything is real. ``sigma^y`` only ever appears in pairs, so it is carried
  as the real matrix ``i sigma^y = [[0, 1], [-1, 0]]`` and the factor
  ``i * i = -1`` is folded in when two of them are multiplied.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ConvergenceError",
    "pauli",
    "embed",
    "two_site_coupling",
    "eigh_lowest",
    "partial_trace_pair",
    "projector",
    "projector_distance",
    "MAX_QUBITS",
]

MAX_QUBITS = 10
MAX_EIGH_DIM = 1024
JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-13

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, 1.0], [-1.0, 0.0]]),  # i * sigma^y
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi sweep cap is hit before convergence."""


def pauli(axis: str) -> tuple[np.ndarray, bool]:
    """Return ``(matrix, imaginary)`` for a Pauli axis.

    For ``x`` and ``z`` the matrix is the Pauli matrix itself and the flag is
    False. For ``y`` the matrix is ``i sigma^y`` and the flag is True, meaning
    the physical operator is ``-i`` times the returned matrix.
    """
    try:
        mat = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None
    return mat.copy(), axis == "y"


def embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Place a single-site 2x2 operator at ``site`` (1-based) of ``n`` qubits."""
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range for {n} qubits")
    left = np.eye(2 ** (site - 1))
    right = np.eye(2 ** (n - site))
    return np.kron(np.kron(left, op), right)


def two_site_coupling(axis: str, i: int, j: int, n: int) -> np.ndarray:
    """``sigma_i^axis sigma_j^axis`` on ``n`` qubits as a real dense matrix."""
    if not (1 <= i < j <= n <= MAX_QUBITS):
        raise ValueError(f"need 1 <= i < j <= n <= {MAX_QUBITS}, got i={i}, j={j}, n={n}")
    mat, imaginary = pauli(axis)
    op = np.kron(np.eye(2 ** (i - 1)), mat)
    op = np.kron(op, np.eye(2 ** (j - i - 1)))
    op = np.kron(op, mat)
    op = np.kron(op, np.eye(2 ** (n - j)))
    return -op if imaginary else op


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle-method schedule: every pair (p, q) once per sweep, disjoint within a round
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array(h, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    target = JACOBI_REL_TOL * np.linalg.norm(a)
    schedule = _round_robin(n)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = a - np.diag(a.diagonal())
        if np.linalg.norm(off) <= target:
            return a.diagonal().copy(), v
        for p, q in schedule:
            apq = a[p, q]
            # negligible against the diagonal: drop instead of rotating
            negligible = np.abs(apq) <= 1e-18 * (np.abs(a[p, p]) + np.abs(a[q, q]))
            a[p[negligible], q[negligible]] = 0.0
            a[q[negligible], p[negligible]] = 0.0
            apq = np.where(negligible, 0.0, apq)
            active = apq != 0.0
            if not active.any():
                continue
            tau = np.where(active, (a[q, q] - a[p, p]) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            atau = np.abs(tau)
            # hypot avoids overflow of tau**2 when a[p, q] is tiny
            t = np.where(tau >= 0.0, 1.0, -1.0) / (atau + np.hypot(1.0, atau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            cc, ss = c[:, None], s[:, None]
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = cc * rp - ss * rq
            a[q, :] = ss * rp + cc * rq
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    raise ConvergenceError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def eigh_lowest(h: np.ndarray, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs of a real symmetric matrix by cyclic Jacobi.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as columns. ``k=None`` returns the full spectrum.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    n = h.shape[0]
    if n > MAX_EIGH_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_EIGH_DIM}")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if np.abs(h - h.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for dimension {n}")
    w, v = _jacobi(h)
    order = np.argsort(w, kind="stable")[:k]
    return w[order], v[:, order]


def partial_trace_pair(state: np.ndarray, keep: tuple[int, int]) -> np.ndarray:
    """Reduced 4x4 density matrix of sites ``keep=(i, j)`` from a pure state.

    Site ``i`` is the first tensor factor of the result.
    """
    psi = np.asarray(state, dtype=float)
    n = int(round(np.log2(psi.size)))
    if psi.ndim != 1 or 2**n != psi.size or n < 2:
        raise ValueError("state length must be 2**n with n >= 2")
    i, j = keep
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= {n}, got {keep}")
    if abs(psi @ psi - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    t = psi.reshape((2,) * n)
    env = [k for k in range(n) if k not in (i - 1, j - 1)]
    rho = np.tensordot(t, t, axes=(env, env))  # axes: i, j, i', j'
    return rho.reshape(4, 4)


def projector(vectors: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal columns."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    return vectors @ vectors.T


def projector_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Frobenius distance between two orthogonal projectors."""
    for name, m in (("P", p), ("Q", q)):
        m = np.asarray(m, dtype=float)
        if np.abs(m - m.T).max() > 1e-8 or np.abs(m @ m - m).max() > 1e-8:
            raise ValueError(f"{name} is not a symmetric idempotent matrix")
    return float(np.linalg.norm(np.asarray(p) - np.asarray(q)))

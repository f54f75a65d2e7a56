"""Top-k eigensolver: Lanczos with full reorthogonalization.

The inner iteration (matvec + two-pass reorthogonalization against the whole
basis) is the hot kernel of every Monte Carlo experiment, so it comes in two
interchangeable implementations: a compiled Cython core
(``heavyedge.spectral._core``) and a pure-numpy twin. The compiled core is
selected at import when available; set ``HEAVYEDGE_PURE_PYTHON=1`` to force
the fallback. ``benchmarks/bench_lanczos.py`` compares the two.

Full (not selective) reorthogonalization is used: at desk scale (n <= 5000)
the O(n * iters^2) cost is acceptable and removes ghost-eigenvalue risk.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.linalg import eigh_tridiagonal

from ..errors import DomainError, InvalidParameterError

__all__ = [
    "OperatorHandle",
    "SpectralResult",
    "top_k_eigs",
    "operator_norm",
    "USING_COMPILED",
]

_FORCE_PY = os.environ.get("HEAVYEDGE_PURE_PYTHON", "") == "1"
_core = None
if not _FORCE_PY:
    try:
        from . import _core  # compiled extension; optional
    except ImportError:
        _core = None

USING_COMPILED = _core is not None

_DENSE_ORACLE_LIMIT = 2048


class OperatorHandle:
    """Matrix-vector product wrapper for the three operator layouts.

    ``kind`` is one of ``"dense"`` (symmetric ndarray), ``"csr"`` (full
    mirrored CSR), or ``"rect"`` (block symmetrization of a rectangular
    factor: x -> [scale * S x_2; scale * S^T x_1]).
    """

    def __init__(self, kind, n, payload):
        self.kind = kind
        self.n = n
        self.payload = payload

    @classmethod
    def dense(cls, a):
        a = np.ascontiguousarray(a, dtype=np.float64)
        if a.shape[0] != a.shape[1]:
            raise DomainError("dense operator must be square")
        return cls("dense", a.shape[0], a)

    @classmethod
    def csr(cls, mat):
        mat = scipy.sparse.csr_matrix(mat)
        mat.sort_indices()
        data = np.ascontiguousarray(mat.data, dtype=np.float64)
        indices = np.ascontiguousarray(mat.indices, dtype=np.int32)
        indptr = np.ascontiguousarray(mat.indptr, dtype=np.int32)
        return cls("csr", mat.shape[0], (mat, data, indices, indptr))

    @classmethod
    def rect(cls, s, scale):
        s = np.ascontiguousarray(s, dtype=np.float64)
        return cls("rect", s.shape[0] + s.shape[1], (s, float(scale)))

    def matvec(self, x):
        if self.kind == "dense":
            return self.payload @ x
        if self.kind == "csr":
            return self.payload[0] @ x
        s, scale = self.payload
        lrow = s.shape[0]
        out = np.empty(self.n)
        out[:lrow] = scale * (s @ x[lrow:])
        out[lrow:] = scale * (s.T @ x[:lrow])
        return out

    def to_dense(self):
        if self.kind == "dense":
            return self.payload
        if self.kind == "csr":
            return self.payload[0].toarray()
        s, scale = self.payload
        lrow, mcol = s.shape
        out = np.zeros((self.n, self.n))
        out[:lrow, lrow:] = scale * s
        out[lrow:, :lrow] = scale * s.T
        return out


@dataclass
class SpectralResult:
    """Descending top-k eigenpairs with explicit residuals."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    iterations: int
    converged: bool
    method: str

    def eigenvalue_gaps(self):
        return -np.diff(self.eigenvalues)


# ---------------------------------------------------------------------------
# Kernel twins
# ---------------------------------------------------------------------------


def _python_steps(handle, q_basis, alphas, betas, m_start, m_stop, breakdown_tol):
    """Pure-numpy Lanczos steps; mirrors the compiled core exactly."""
    for j in range(m_start, m_stop):
        qj = q_basis[:, j]
        u = handle.matvec(qj)
        alphas[j] = qj @ u
        u -= alphas[j] * qj
        if j > 0:
            u -= betas[j - 1] * q_basis[:, j - 1]
        basis = q_basis[:, : j + 1]
        u -= basis @ (basis.T @ u)
        u -= basis @ (basis.T @ u)
        b = np.linalg.norm(u)
        betas[j] = b
        if b <= breakdown_tol:
            return j + 1, True
        q_basis[:, j + 1] = u / b
    return m_stop, False


def _compiled_steps(handle, q_basis, alphas, betas, m_start, m_stop, breakdown_tol):
    if handle.kind == "dense":
        return _core.steps_dense(
            handle.payload, q_basis, alphas, betas, m_start, m_stop, breakdown_tol
        )
    if handle.kind == "csr":
        _, data, indices, indptr = handle.payload
        return _core.steps_csr(
            data, indices, indptr, q_basis, alphas, betas, m_start, m_stop, breakdown_tol
        )
    s, scale = handle.payload
    return _core.steps_rect(
        s, scale, q_basis, alphas, betas, m_start, m_stop, breakdown_tol
    )


_steps = _compiled_steps if USING_COMPILED else _python_steps


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def _ritz_top(alphas, betas, m, k):
    """Top-k Ritz values (descending) and residual estimates from T_m."""
    kk = min(k, m)
    w, s = eigh_tridiagonal(
        alphas[:m], betas[: m - 1], select="i", select_range=(m - kk, m - 1)
    )
    order = np.argsort(w)[::-1]
    w = w[order]
    s = s[:, order]
    res_est = np.abs(betas[m - 1]) * np.abs(s[m - 1, :])
    return w, s, res_est


def _orthonormalize_against(v, basis, rng, max_tries=5):
    for _ in range(max_tries):
        v -= basis @ (basis.T @ v)
        v -= basis @ (basis.T @ v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            return v / nrm
        v = rng.standard_normal(len(v))
    return None


def _lanczos(handle, k, tol, maxiter, rng, v0=None):
    n = handle.n
    maxiter = int(min(maxiter, n))
    q_basis = np.zeros((n, maxiter + 1), order="F")
    alphas = np.zeros(maxiter)
    betas = np.zeros(maxiter)
    if v0 is None:
        v0 = rng.standard_normal(n)
    v0 = np.asarray(v0, dtype=float)
    q_basis[:, 0] = v0 / np.linalg.norm(v0)

    chunk = max(16, k + 8)
    m = 0
    exhausted = False
    while m < maxiter:
        scale_guess = max(1.0, np.max(np.abs(alphas[:m])) if m else 1.0)
        btol = 1e-13 * scale_guess
        target = min(maxiter, m + chunk)
        m, broke = _steps(handle, q_basis, alphas, betas, m, target, btol)
        if broke:
            if m >= n:
                exhausted = True
            else:
                w = _orthonormalize_against(
                    rng.standard_normal(n), q_basis[:, :m], rng
                )
                if w is None:
                    exhausted = True
                else:
                    q_basis[:, m] = w
        if m >= max(k, 2):
            _, _, res_est = _ritz_top(alphas, betas, m, k)
            if len(res_est) >= k and np.all(res_est[:k] <= tol):
                break
        if exhausted:
            break

    kk = min(k, m)
    w, s, _ = _ritz_top(alphas, betas, m, kk)
    vecs = q_basis[:, :m] @ s
    vecs /= np.linalg.norm(vecs, axis=0)
    true_res = np.empty(kk)
    for i in range(kk):
        true_res[i] = np.linalg.norm(handle.matvec(vecs[:, i]) - w[i] * vecs[:, i])
    converged = bool(len(w) == k and np.all(true_res <= tol * np.maximum(1.0, np.abs(w))))
    return SpectralResult(
        eigenvalues=w,
        eigenvectors=vecs,
        residuals=true_res,
        iterations=m,
        converged=converged,
        method="lanczos_compiled" if USING_COMPILED else "lanczos_python",
    )


def _dense_solve(handle, k, want_vectors):
    a = handle.to_dense()
    if want_vectors:
        w, v = np.linalg.eigh(a)
        w_top = w[::-1][:k].copy()
        v_top = v[:, ::-1][:, :k].copy()
        v_top /= np.linalg.norm(v_top, axis=0)
        res = np.array(
            [np.linalg.norm(a @ v_top[:, i] - w_top[i] * v_top[:, i]) for i in range(k)]
        )
    else:
        w = np.linalg.eigvalsh(a)
        w_top = w[::-1][:k].copy()
        v_top = None
        res = np.zeros(k)
    return SpectralResult(
        eigenvalues=w_top,
        eigenvectors=v_top,
        residuals=res,
        iterations=0,
        converged=True,
        method="dense",
    )


def _resolve_handle(operand):
    if isinstance(operand, OperatorHandle):
        return operand
    if isinstance(operand, np.ndarray):
        return OperatorHandle.dense(operand)
    if scipy.sparse.issparse(operand):
        return OperatorHandle.csr(operand)
    if hasattr(operand, "operator"):
        return operand.operator()
    raise DomainError(f"cannot build an operator from {type(operand)!r}")


def top_k_eigs(operand, k, tol=1e-8, maxiter=None, rng=None, method="auto",
               want_vectors=True, v0=None):
    """Algebraically largest k eigenpairs of a symmetric operator.

    ``method``: "lanczos", "dense" (direct solve; also the oracle path), or
    "auto" (dense for small dense-materializable problems, Lanczos
    otherwise). Non-convergence returns a best-effort result flagged
    ``converged=False``. The start vector defaults to a draw from ``rng``
    (seeded from 0 when absent) so results are reproducible.
    """
    handle = _resolve_handle(operand)
    n = handle.n
    if not 1 <= k <= n:
        raise InvalidParameterError(f"k={k} must lie in [1, {n}]")
    if tol <= 0.0:
        raise InvalidParameterError("tolerance must be positive")
    if method not in ("auto", "lanczos", "dense"):
        raise InvalidParameterError(f"unknown method {method!r}")
    if method == "auto":
        if n <= 512 or 4 * k > n:
            method = "dense" if n <= _DENSE_ORACLE_LIMIT else "lanczos"
        else:
            method = "lanczos"
    if method == "dense":
        if n > _DENSE_ORACLE_LIMIT:
            raise DomainError(f"dense solve limited to n <= {_DENSE_ORACLE_LIMIT}")
        return _dense_solve(handle, k, want_vectors)
    if rng is None:
        rng = np.random.default_rng(0)
    if maxiter is None:
        maxiter = min(n, max(300, 20 * k))
    return _lanczos(handle, k, tol, maxiter, rng, v0=v0)


def operator_norm(operand, tol=1e-8, maxiter=5000, rng=None):
    """Spectral norm of a symmetric operator by power iteration.

    Iterates on the squared operator (robust to +/- paired spectra) and stops
    on the true residual ||A^2 v - mu v|| <= tol * max(1, mu), which bounds
    the eigenvalue error for symmetric operators.
    """
    handle = _resolve_handle(operand)
    if rng is None:
        rng = np.random.default_rng(0)
    v = rng.standard_normal(handle.n)
    nrm_v = np.linalg.norm(v)
    if nrm_v == 0.0:
        return 0.0
    v /= nrm_v
    mu = 0.0
    for _ in range(maxiter):
        y = handle.matvec(v)
        z = handle.matvec(y)
        mu = float(y @ y)
        if mu == 0.0:
            return 0.0
        res = np.linalg.norm(z - mu * v)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        v = z / nz
        if res <= tol * max(1.0, mu):
            break
    return math.sqrt(mu)

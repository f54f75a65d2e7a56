"""Sampleable matrix ensembles: dense/sparse Wigner, banded and regular-graph
weighted adjacencies, rectangular covariance factors and their block
symmetrization, plus deterministic spike planting.

Conventions
-----------
* Symmetric ensembles store each unordered site once (row <= col) either as
  triplets or as a dense payload; :meth:`EnsembleSample.materialize` is
  exactly symmetric.
* Entry values carry their scaling already (1/sqrt(p_n), 1/sqrt(k_n), ...);
  the ``scale`` field records the factor for provenance.
* Every sampler takes an explicit ``numpy.random.Generator`` and consumes it
  in a documented order, so identical (seed, parameters) give identical
  triplet lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse

from .errors import (
    DomainError,
    DuplicateSiteError,
    InvalidParameterError,
    RetryCapExceededError,
)

__all__ = [
    "EnsembleSample",
    "Adjacency",
    "sample_sparse_wigner",
    "sample_dense_wigner",
    "circulant_regular_adjacency",
    "matching_regular_adjacency",
    "sample_weighted_regular",
    "sample_covariance_factor",
    "symmetrize_covariance",
    "plant_spike",
    "write_matrix_market",
    "read_matrix_market",
]

_MATERIALIZE_LIMIT = 8192

_SYMMETRIC_KINDS = {
    "dense_wigner",
    "sparse_wigner",
    "band",
    "regular_graph",
    "symmetrized_covariance",
    "small_part",
    "large_part",
    "compensator",
    "large_above_cut",
    "large_below_cut",
    "reassembled",
    "imported_symmetric",
}


@dataclass
class EnsembleSample:
    """One matrix realization in sparse triplet or dense form.

    For symmetric kinds the triplets cover row <= col only. Covariance
    factors are rectangular and dense; their symmetrization keeps the factor
    and materializes the big block matrix only on demand.
    """

    kind: str
    shape: tuple[int, int]
    scale: float
    seed: int | None = None
    rows: np.ndarray | None = None
    cols: np.ndarray | None = None
    vals: np.ndarray | None = None
    dense: np.ndarray | None = None
    factor: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    # -- structure ----------------------------------------------------------

    @property
    def is_symmetric(self):
        return self.kind in _SYMMETRIC_KINDS

    @property
    def n(self):
        if self.shape[0] != self.shape[1]:
            raise DomainError("rectangular sample has no single dimension n")
        return self.shape[0]

    @property
    def nnz_upper(self):
        if self.vals is not None:
            return len(self.vals)
        if self.dense is not None and self.is_symmetric:
            iu = np.triu_indices(self.shape[0])
            return int(np.count_nonzero(self.dense[iu]))
        raise DomainError("sample has no explicit entry storage")

    def upper_entries(self):
        """(rows, cols, vals) over row <= col; requires a symmetric kind."""
        if not self.is_symmetric:
            raise DomainError(f"{self.kind} is not a symmetric ensemble")
        if self.vals is not None:
            return self.rows, self.cols, self.vals
        a = self.materialize()
        iu = np.triu_indices(self.shape[0])
        return iu[0], iu[1], a[iu]

    def materialize(self):
        """Dense ndarray of the full matrix (exactly symmetric for symmetric kinds)."""
        nrow, ncol = self.shape
        if max(nrow, ncol) > _MATERIALIZE_LIMIT:
            raise DomainError(
                f"refusing to materialize a {nrow}x{ncol} dense matrix; "
                "use .operator() instead"
            )
        if self.dense is not None:
            return self.dense
        if self.kind == "symmetrized_covariance":
            lrow, mcol = self.factor.shape
            out = np.zeros((lrow + mcol, lrow + mcol))
            block = self.factor * self.scale
            out[:lrow, lrow:] = block
            out[lrow:, :lrow] = block.T
            return out
        if self.vals is None:
            raise DomainError("sample has no entry storage to materialize")
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.vals
        if self.is_symmetric:
            off = self.rows != self.cols
            out[self.cols[off], self.rows[off]] = self.vals[off]
        return out

    def to_sparse(self):
        """Full (mirrored) scipy CSR matrix."""
        if self.dense is not None:
            return scipy.sparse.csr_matrix(self.dense)
        if self.kind == "symmetrized_covariance":
            raise DomainError("use .operator() for the symmetrized covariance")
        off = self.rows != self.cols
        rows = np.concatenate([self.rows, self.cols[off]])
        cols = np.concatenate([self.cols, self.rows[off]])
        vals = np.concatenate([self.vals, self.vals[off]])
        if not self.is_symmetric:
            rows, cols, vals = self.rows, self.cols, self.vals
        return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=self.shape)

    def operator(self):
        """Matvec-ready handle for the eigensolver."""
        from .spectral.lanczos import OperatorHandle

        if self.kind == "symmetrized_covariance":
            return OperatorHandle.rect(self.factor, self.scale)
        if self.dense is not None:
            return OperatorHandle.dense(self.dense)
        csr = self.to_sparse()
        return OperatorHandle.csr(csr)


# ---------------------------------------------------------------------------
# Wigner samplers
# ---------------------------------------------------------------------------


def _upper_offsets(n):
    return np.concatenate(([0], np.cumsum(n - np.arange(n))))


def _decode_upper(idx, n):
    offsets = _upper_offsets(n)
    rows = np.searchsorted(offsets, idx, side="right") - 1
    cols = rows + (idx - offsets[rows])
    return rows.astype(np.int64), cols.astype(np.int64)


def sample_sparse_wigner(n, p_n, law, rng, seed=None, diag_law=None):
    """Diluted Wigner sample: upper sites kept i.i.d. with probability p_n/n,
    kept site values a/sqrt(p_n) with a ~ law, mirrored below the diagonal.

    p_n = n keeps every site and reproduces the dense Wigner matrix with
    scale 1/sqrt(n). Draw order: site selection, then entry values row-major,
    then (optionally) diagonal redraws.
    """
    if not 0.0 < p_n <= n:
        raise InvalidParameterError("p_n must lie in (0, n]")
    scale = 1.0 / np.sqrt(p_n)
    m = n * (n + 1) // 2
    if p_n == n:
        vals = np.asarray(law.sample(rng, m)) * scale
        iu = np.triu_indices(n)
        a = np.zeros((n, n))
        a[iu] = vals
        a = a + np.triu(a, 1).T
        if diag_law is not None:
            d = np.asarray(diag_law.sample(rng, n)) * scale
            a[np.diag_indices(n)] = d
        return EnsembleSample(
            kind="dense_wigner", shape=(n, n), scale=scale, seed=seed, dense=a,
            meta={"p_n": float(p_n), "law": law},
        )
    count = int(rng.binomial(m, p_n / n))
    idx = np.sort(rng.choice(m, size=count, replace=False))
    rows, cols = _decode_upper(idx, n)
    vals = np.asarray(law.sample(rng, count)) * scale
    if diag_law is not None:
        on_diag = rows == cols
        vals[on_diag] = np.asarray(diag_law.sample(rng, int(on_diag.sum()))) * scale
    return EnsembleSample(
        kind="sparse_wigner", shape=(n, n), scale=scale, seed=seed,
        rows=rows, cols=cols, vals=vals,
        meta={"p_n": float(p_n), "law": law},
    )


def sample_dense_wigner(n, law, rng, seed=None, diag_law=None):
    return sample_sparse_wigner(n, n, law, rng, seed=seed, diag_law=diag_law)


# ---------------------------------------------------------------------------
# Regular-graph adjacencies
# ---------------------------------------------------------------------------


@dataclass
class Adjacency:
    """Structural nonzero pattern of a k-regular graph (upper sites, loops OK)."""

    n: int
    k: int
    rows: np.ndarray
    cols: np.ndarray
    tag: str

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.rows, 1)
        off = self.rows != self.cols
        np.add.at(deg, self.cols[off], 1)
        return deg


def circulant_regular_adjacency(n, k_n):
    """Periodic band: neighbors of i are the j with min(|i-j|, n-|i-j|) <= b,
    including the self loop, so that every row has exactly k_n = 2b+1 sites.
    """
    if k_n % 2 == 0:
        raise InvalidParameterError(
            "circulant band needs odd k_n = 2b+1; use matching_regular_adjacency"
        )
    if not 1 <= k_n <= n:
        raise InvalidParameterError("need 1 <= k_n <= n")
    b = (k_n - 1) // 2
    i = np.arange(n, dtype=np.int64)
    rows_list, cols_list = [i], [i]
    for d in range(1, b + 1):
        j = (i + d) % n
        rows_list.append(np.minimum(i, j))
        cols_list.append(np.maximum(i, j))
    rows = np.concatenate(rows_list)
    cols = np.concatenate(cols_list)
    code = np.unique(rows * n + cols)
    rows, cols = code // n, code % n
    adj = Adjacency(n=n, k=k_n, rows=rows, cols=cols, tag="band")
    if not np.all(adj.degrees() == k_n):
        raise RuntimeError("circulant construction lost regularity")
    return adj


def matching_regular_adjacency(n, k_n, rng, retry_cap=100):
    """Union of k_n independent uniform perfect matchings (no loops).

    A matching that collides with an already-placed edge is rejected and
    resampled, up to ``retry_cap`` attempts per matching.
    """
    if n % 2 != 0:
        raise InvalidParameterError("matching construction needs even n")
    if not 1 <= k_n <= n - 1:
        raise InvalidParameterError("need 1 <= k_n <= n-1")
    seen: set[int] = set()
    rows_list, cols_list = [], []
    for _ in range(k_n):
        for attempt in range(retry_cap + 1):
            perm = rng.permutation(n)
            a = np.minimum(perm[0::2], perm[1::2])
            b = np.maximum(perm[0::2], perm[1::2])
            codes = (a * n + b).tolist()
            if all(c not in seen for c in codes):
                seen.update(codes)
                rows_list.append(a)
                cols_list.append(b)
                break
        else:
            raise RetryCapExceededError(
                f"could not place matching after {retry_cap} retries; "
                "fall back to the circulant band"
            )
    rows = np.concatenate(rows_list)
    cols = np.concatenate(cols_list)
    order = np.argsort(rows * n + cols, kind="stable")
    adj = Adjacency(n=n, k=k_n, rows=rows[order], cols=cols[order], tag="regular_graph")
    if not np.all(adj.degrees() == k_n):
        raise RuntimeError("matching union lost regularity")
    return adj


def sample_weighted_regular(adj, law, rng, seed=None):
    """Weights g_ij * a_ij / sqrt(k_n) on the structural edges, mirrored."""
    scale = 1.0 / np.sqrt(adj.k)
    vals = np.asarray(law.sample(rng, len(adj.rows))) * scale
    return EnsembleSample(
        kind=adj.tag, shape=(adj.n, adj.n), scale=scale, seed=seed,
        rows=adj.rows.copy(), cols=adj.cols.copy(), vals=vals,
        meta={"k_n": int(adj.k), "law": law},
    )


# ---------------------------------------------------------------------------
# Covariance factors
# ---------------------------------------------------------------------------


def sample_covariance_factor(L, M, law, rng, seed=None):
    """Rectangular L x M factor with i.i.d. unit-variance entries (unscaled)."""
    if L < 1 or M < 1:
        raise InvalidParameterError("need L, M >= 1")
    s = np.asarray(law.sample(rng, (L, M)))
    return EnsembleSample(
        kind="covariance_factor", shape=(L, M), scale=1.0, seed=seed, dense=s,
        meta={"L": int(L), "M": int(M), "law": law},
    )


def symmetrize_covariance(sample):
    """Embed S/sqrt(L) into the off-diagonal blocks of an (L+M) x (L+M) matrix.

    The top eigenvalue of the result squares to lambda_1(S S* / L).
    """
    if sample.kind != "covariance_factor":
        raise DomainError("symmetrize_covariance expects a covariance_factor sample")
    L, M = sample.shape
    return EnsembleSample(
        kind="symmetrized_covariance", shape=(L + M, L + M),
        scale=1.0 / np.sqrt(L), seed=sample.seed, factor=sample.dense,
        meta=dict(sample.meta),
    )


# ---------------------------------------------------------------------------
# Spike planting and MatrixMarket I/O
# ---------------------------------------------------------------------------


def plant_spike(sample, placements):
    """Overwrite the listed sites (and mirrors, for symmetric kinds) with
    deterministic values; returns a new sample.
    """
    normalized = []
    for i, j, value in placements:
        i, j = int(i), int(j)
        if sample.is_symmetric and i > j:
            i, j = j, i
        normalized.append((i, j, float(value)))
    keys = [(i, j) for i, j, _ in normalized]
    if len(set(keys)) != len(keys):
        raise DuplicateSiteError("spike placements repeat a site")
    for i, j, _ in normalized:
        if not (0 <= i < sample.shape[0] and 0 <= j < sample.shape[1]):
            raise DomainError(f"site ({i}, {j}) outside {sample.shape}")

    meta = dict(sample.meta)
    meta["spikes"] = normalized
    if sample.kind == "symmetrized_covariance" or sample.factor is not None:
        factor = sample.factor.copy()
        for i, j, value in normalized:
            factor[i, j] = value
        out = EnsembleSample(
            kind=sample.kind, shape=sample.shape, scale=sample.scale,
            seed=sample.seed, factor=factor, meta=meta,
        )
        return out
    if sample.dense is not None:
        dense = sample.dense.copy()
        for i, j, value in normalized:
            dense[i, j] = value
            if sample.is_symmetric:
                dense[j, i] = value
        return EnsembleSample(
            kind=sample.kind, shape=sample.shape, scale=sample.scale,
            seed=sample.seed, dense=dense, meta=meta,
        )
    rows = sample.rows.copy()
    cols = sample.cols.copy()
    vals = sample.vals.copy()
    site_code = rows * sample.shape[1] + cols
    lookup = {int(c): pos for pos, c in enumerate(site_code)}
    add_r, add_c, add_v = [], [], []
    for i, j, value in normalized:
        code = i * sample.shape[1] + j
        if code in lookup:
            vals[lookup[code]] = value
        else:
            add_r.append(i)
            add_c.append(j)
            add_v.append(value)
    if add_r:
        rows = np.concatenate([rows, np.asarray(add_r, dtype=rows.dtype)])
        cols = np.concatenate([cols, np.asarray(add_c, dtype=cols.dtype)])
        vals = np.concatenate([vals, np.asarray(add_v)])
        order = np.argsort(rows * sample.shape[1] + cols, kind="stable")
        rows, cols, vals = rows[order], cols[order], vals[order]
    return EnsembleSample(
        kind=sample.kind, shape=sample.shape, scale=sample.scale,
        seed=sample.seed, rows=rows, cols=cols, vals=vals, meta=meta,
    )


def write_matrix_market(sample, path):
    """Export as MatrixMarket coordinate text (symmetric where applicable)."""
    if sample.kind == "symmetrized_covariance":
        mat = scipy.sparse.coo_matrix(sample.materialize())
        scipy.io.mmwrite(path, mat, symmetry="symmetric")
        return
    if sample.dense is not None and not sample.is_symmetric:
        scipy.io.mmwrite(path, scipy.sparse.coo_matrix(sample.dense), symmetry="general")
        return
    mat = sample.to_sparse().tocoo()
    scipy.io.mmwrite(path, mat, symmetry="symmetric" if sample.is_symmetric else "general")


def read_matrix_market(path):
    """Load a MatrixMarket file back into an EnsembleSample."""
    info = scipy.io.mminfo(path)
    symmetric = info[5] == "symmetric"
    mat = scipy.io.mmread(path).tocoo()
    if symmetric:
        # mmread mirrors symmetric files; keep each unordered pair once.
        keep = mat.row <= mat.col
        r = mat.row[keep]
        c = mat.col[keep]
        v = mat.data[keep]
        code = r.astype(np.int64) * mat.shape[1] + c
        _, first = np.unique(code, return_index=True)
        return EnsembleSample(
            kind="imported_symmetric", shape=mat.shape, scale=1.0,
            rows=r[first], cols=c[first], vals=v[first],
        )
    return EnsembleSample(
        kind="imported", shape=mat.shape, scale=1.0,
        rows=mat.row.astype(np.int64), cols=mat.col.astype(np.int64),
        vals=mat.data.astype(float),
    )

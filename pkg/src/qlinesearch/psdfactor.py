"""Symmetric indefinite factorization and eigenvalue-shift PSD modification.

``ldl_factor`` computes P A P^T = L B L^T with Bunch-Kaufman partial pivoting
(pivot constant alpha = (1 + sqrt(17))/8): L is unit lower triangular, B is
block diagonal with 1x1 and 2x2 blocks, and the inertia of B equals the
inertia of A.  ``psd_modify`` shifts every block eigenvalue below delta up to
delta, giving a positive definite A + E = P^T L (B + F) L^T P whose smallest
eigenvalue is approximately delta; when no eigenvalue is below delta the
input is returned untouched (E is exactly zero).

Everything here is dense and sized for small n (the solvers use n <= ~20);
clarity over blocking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_ALPHA = (1.0 + math.sqrt(17.0)) / 8.0
_EPS = float(np.finfo(float).eps)


def default_delta(A):
    """Eigenvalue floor used when none is supplied: sqrt(eps) * max(1, ||A||_inf)."""
    A = np.asarray(A, dtype=float)
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    return math.sqrt(_EPS) * max(1.0, scale)


def _check_symmetric(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym > 1e-10 * max(scale, 1e-300):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (A + A.T)


def _swap(W, perm, r1, r2):
    # Full row and column swap keeps the trailing block symmetric and permutes
    # the already-stored multiplier rows consistently.
    W[[r1, r2], :] = W[[r2, r1], :]
    W[:, [r1, r2]] = W[:, [r2, r1]]
    perm[r1], perm[r2] = perm[r2], perm[r1]


@dataclass
class FactorizationBundle:
    """P A P^T = L B L^T with B's blockwise spectral decomposition attached.

    ``permutation`` holds P as an index vector: (P x)[i] = x[permutation[i]].
    ``blocks`` lists B's diagonal blocks in order; ``block_eigenvectors`` is
    the block-diagonal orthogonal Q and ``block_eigenvalues`` the eigenvalues
    of B in block order.
    """

    permutation: np.ndarray
    lower_unit_triangular: np.ndarray
    blocks: list = field(default_factory=list)
    block_eigenvectors: np.ndarray = None
    block_eigenvalues: np.ndarray = None

    def block_diagonal(self):
        """B assembled as a dense matrix."""
        n = self.lower_unit_triangular.shape[0]
        B = np.zeros((n, n))
        j = 0
        for blk in self.blocks:
            s = blk.shape[0]
            B[j:j + s, j:j + s] = blk
            j += s
        return B

    def solve(self, rhs):
        """Solve A x = rhs through the factorization (blocks unmodified).

        Raises ``numpy.linalg.LinAlgError`` when a block eigenvalue vanishes.
        """
        lam = self.block_eigenvalues
        tiny = _EPS * max(1.0, float(np.max(np.abs(lam))))
        if np.any(np.abs(lam) <= tiny):
            raise np.linalg.LinAlgError("singular block in symmetric indefinite solve")
        return _factored_solve(self, lam, rhs)


def _forward_unit_lower(L, b):
    x = np.array(b, dtype=float, copy=True)
    for i in range(x.shape[0]):
        x[i] -= L[i, :i] @ x[:i]
    return x


def _backward_unit_upper(U, b):
    x = np.array(b, dtype=float, copy=True)
    for i in range(x.shape[0] - 1, -1, -1):
        x[i] -= U[i, i + 1:] @ x[i + 1:]
    return x


def _factored_solve(bundle, eigenvalues, rhs):
    # A = P^T L Q diag(eigenvalues) Q^T L^T P, so permute, two triangular
    # solves around a diagonal solve in the blocks' eigenbasis, unpermute.
    rhs = np.asarray(rhs, dtype=float)
    perm = bundle.permutation
    L = bundle.lower_unit_triangular
    Q = bundle.block_eigenvectors
    z = _forward_unit_lower(L, rhs[perm])
    w = Q @ ((Q.T @ z) / eigenvalues)
    y = _backward_unit_upper(L.T, w)
    x = np.empty_like(y)
    x[perm] = y
    return x


def ldl_factor(A):
    """Bunch-Kaufman factorization P A P^T = L B L^T of a symmetric matrix.

    The input is symmetrized first; asymmetry beyond 1e-10 * ||A||_inf is an
    error, as are non-finite entries.
    """
    W = _check_symmetric(A)
    n = W.shape[0]
    perm = np.arange(n)
    pivots = []
    k = 0
    while k < n:
        absakk = abs(W[k, k])
        if k + 1 < n:
            col = np.abs(W[k + 1:, k])
            imax = k + 1 + int(np.argmax(col))
            colmax = float(col[imax - k - 1])
        else:
            imax = k
            colmax = 0.0
        if max(absakk, colmax) == 0.0:
            # Zero column in the reduced matrix: 1x1 zero pivot, no update.
            pivots.append((k, 1))
            k += 1
            continue
        size = 1
        swap_to = None
        if absakk >= _ALPHA * colmax:
            pass  # 1x1 pivot, no interchange
        else:
            # rowmax: largest off-diagonal magnitude in row imax of the
            # trailing submatrix (read from the lower triangle).
            left = np.abs(W[imax, k:imax])
            below = np.abs(W[imax + 1:, imax])
            rowmax = float(max(left.max() if left.size else 0.0,
                               below.max() if below.size else 0.0))
            if absakk * rowmax >= _ALPHA * colmax * colmax:
                pass  # 1x1 pivot, no interchange
            elif abs(W[imax, imax]) >= _ALPHA * rowmax:
                swap_to = (k, imax)  # 1x1 pivot after interchange
            else:
                swap_to = (k + 1, imax)  # 2x2 pivot after interchange
                size = 2
        if swap_to is not None and swap_to[0] != swap_to[1]:
            _swap(W, perm, swap_to[0], swap_to[1])
        if size == 1:
            d = W[k, k]
            if k + 1 < n:
                colv = W[k + 1:, k].copy()
                mult = colv / d
                W[k + 1:, k + 1:] -= np.outer(mult, colv)
                W[k + 1:, k] = mult
            pivots.append((k, 1))
            k += 1
        else:
            if k + 2 < n:
                d11 = W[k, k]
                d21 = W[k + 1, k]
                d22 = W[k + 1, k + 1]
                det = d11 * d22 - d21 * d21
                C = W[k + 2:, k:k + 2].copy()
                # T = C @ inv([[d11, d21], [d21, d22]])
                T = np.column_stack(((C[:, 0] * d22 - C[:, 1] * d21) / det,
                                     (C[:, 1] * d11 - C[:, 0] * d21) / det))
                W[k + 2:, k + 2:] -= T @ C.T
                W[k + 2:, k:k + 2] = T
            pivots.append((k, 2))
            k += 2

    L = np.eye(n)
    blocks = []
    for (j, s) in pivots:
        if j + s < n:
            L[j + s:, j:j + s] = W[j + s:, j:j + s]
        if s == 1:
            blocks.append(np.array([[W[j, j]]]))
        else:
            blocks.append(np.array([[W[j, j], W[j + 1, j]],
                                    [W[j + 1, j], W[j + 1, j + 1]]]))
    Q, lam = block_spectral(blocks)
    return FactorizationBundle(permutation=perm,
                               lower_unit_triangular=L,
                               blocks=blocks,
                               block_eigenvectors=Q,
                               block_eigenvalues=lam)


def block_spectral(blocks):
    """Spectral decomposition B = Q diag(lam) Q^T of a 1x1/2x2 block diagonal.

    2x2 blocks use the closed-form symmetric eigensolver with eigenvalues in
    descending order; 1x1 blocks pass through.  Blocks larger than 2x2 are a
    contract violation.
    """
    n = sum(b.shape[0] for b in blocks)
    Q = np.zeros((n, n))
    lam = np.zeros(n)
    j = 0
    for blk in blocks:
        s = blk.shape[0]
        if s == 1:
            Q[j, j] = 1.0
            lam[j] = blk[0, 0]
        elif s == 2:
            a = blk[0, 0]
            b = blk[0, 1]
            c = blk[1, 1]
            if b == 0.0:
                Q[j, j] = 1.0
                Q[j + 1, j + 1] = 1.0
                lam[j] = a
                lam[j + 1] = c
            else:
                half = 0.5 * (a + c)
                disc = math.hypot(0.5 * (a - c), b)
                l1 = half + disc
                l2 = half - disc
                v = np.array([b, l1 - a])
                alt = np.array([l1 - c, b])
                if alt @ alt > v @ v:
                    v = alt
                v /= math.sqrt(v @ v)
                Q[j:j + 2, j] = v
                Q[j:j + 2, j + 1] = (-v[1], v[0])
                lam[j] = l1
                lam[j + 1] = l2
        else:
            raise ValueError(f"block of size {s} exceeds the 2x2 contract")
        j += s
    return Q, lam


@dataclass
class PsdModification:
    """Positive definite A + E together with the pieces needed to solve with it.

    ``shift_blocks`` lists the diagonal blocks of F = Q diag(tau) Q^T;
    ``modification_frobenius`` is ||E||_F and is exactly zero iff every block
    eigenvalue was already >= delta.
    """

    modified_matrix: np.ndarray
    shift_blocks: list
    delta: float
    modification_frobenius: float
    bundle: FactorizationBundle = None
    shifted_eigenvalues: np.ndarray = None

    def solve(self, rhs):
        """Solve (A + E) x = rhs reusing the factorization (never forms an inverse)."""
        return _factored_solve(self.bundle, self.shifted_eigenvalues, rhs)


def psd_modify(A, delta=None):
    """Shift the block eigenvalues of A's indefinite factorization up to delta.

    Returns the modified matrix and factorization data.  When every block
    eigenvalue is already >= delta, the (symmetrized) input comes back bitwise
    unchanged with a zero modification.
    """
    A_sym = _check_symmetric(A)
    if delta is None:
        delta = default_delta(A_sym)
    delta = float(delta)
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    bundle = ldl_factor(A_sym)
    lam = bundle.block_eigenvalues
    tau = np.where(lam < delta, delta - lam, 0.0)
    shifted = lam + tau

    n = A_sym.shape[0]
    Q = bundle.block_eigenvectors
    offsets = []
    j = 0
    for blk in bundle.blocks:
        offsets.append((j, blk.shape[0]))
        j += blk.shape[0]

    if not np.any(tau > 0.0):
        shift_blocks = [np.zeros((s, s)) for (_, s) in offsets]
        return PsdModification(modified_matrix=A_sym,
                               shift_blocks=shift_blocks,
                               delta=delta,
                               modification_frobenius=0.0,
                               bundle=bundle,
                               shifted_eigenvalues=shifted)

    F = Q @ np.diag(tau) @ Q.T
    shift_blocks = [F[j:j + s, j:j + s].copy() for (j, s) in offsets]
    L = bundle.lower_unit_triangular
    perm = bundle.permutation

    def unpermute(M):
        out = np.empty_like(M)
        out[np.ix_(perm, perm)] = M
        return out

    BF = Q @ np.diag(shifted) @ Q.T
    modified = unpermute(L @ BF @ L.T)
    modified = 0.5 * (modified + modified.T)
    E = unpermute(L @ F @ L.T)
    return PsdModification(modified_matrix=modified,
                           shift_blocks=shift_blocks,
                           delta=delta,
                           modification_frobenius=float(np.linalg.norm(E, "fro")),
                           bundle=bundle,
                           shifted_eigenvalues=shifted)

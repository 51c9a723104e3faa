"""Linear forward operators and column-major vectorization helpers."""

from __future__ import annotations

import numpy as np


def vec(mat) -> np.ndarray:
    """Stack the columns of a matrix into one vector."""
    mat = np.asarray(mat)
    if mat.ndim != 2:
        raise ValueError(f"vec expects a 2D array, got shape {mat.shape}")
    return mat.reshape(-1, order="F")


def unvec(v, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`vec` for an ``m x n`` matrix."""
    v = np.asarray(v)
    if v.size != m * n:
        raise ValueError(f"cannot reshape length {v.size} into {m}x{n}")
    return v.reshape((m, n), order="F")


class LinearOperator:
    """Matrix-free linear map ``R^N -> R^M``.

    Subclasses implement ``matvec`` and ``rmatvec`` (the exact adjoint).
    """

    shape: tuple

    def matvec(self, v):
        raise NotImplementedError

    def rmatvec(self, w):
        raise NotImplementedError

    def toarray(self) -> np.ndarray:
        n = self.shape[1]
        eye = np.eye(n)
        return np.column_stack([self.matvec(eye[:, j]) for j in range(n)])

    def gram(self) -> np.ndarray:
        """Dense ``A^T A``."""
        a = self.toarray()
        return a.T @ a

    def gram_eigen_bounds(self):
        """Return ``(lower, upper)`` bounds on the spectrum of ``A^T A``.

        The lower bound may be ``None`` when no cheap certificate exists.
        """
        ev = np.linalg.eigvalsh(self.gram())
        return float(ev[0]), float(ev[-1])

    def _check(self, v, n):
        v = np.asarray(v, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"expected vector of length {n}, got shape {v.shape}")
        return v

    def __matmul__(self, v):
        return self.matvec(v)


class IdentityOperator(LinearOperator):
    kind = "identity"

    def __init__(self, n: int):
        if int(n) != n or n < 1:
            raise ValueError(f"dimension must be a positive integer, got {n!r}")
        self.shape = (int(n), int(n))

    def matvec(self, v):
        return self._check(v, self.shape[1]).copy()

    def rmatvec(self, w):
        return self._check(w, self.shape[0]).copy()

    def toarray(self):
        return np.eye(self.shape[0])

    def gram(self):
        return np.eye(self.shape[0])

    def gram_eigen_bounds(self):
        return 1.0, 1.0


class DenseOperator(LinearOperator):
    kind = "dense"

    def __init__(self, matrix):
        self.matrix = np.array(matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise ValueError("dense operator needs a 2D matrix")
        self.matrix.setflags(write=False)
        self.shape = self.matrix.shape

    def matvec(self, v):
        return self.matrix @ self._check(v, self.shape[1])

    def rmatvec(self, w):
        return self.matrix.T @ self._check(w, self.shape[0])

    def toarray(self):
        return self.matrix.copy()


class KroneckerOperator(LinearOperator):
    """``A = A1 (x) A1`` acting on column-stacked ``n x n`` images.

    ``A vec(U) = vec(A1 U A1^T)``; the ``n^2 x n^2`` matrix is never formed.
    """

    kind = "kronecker"

    def __init__(self, factor):
        self.factor = np.array(factor, dtype=float)
        if self.factor.ndim != 2 or self.factor.shape[0] != self.factor.shape[1]:
            raise ValueError(f"Kronecker factor must be square, got shape {self.factor.shape}")
        self.factor.setflags(write=False)
        self.n = self.factor.shape[0]
        self.shape = (self.n * self.n, self.n * self.n)

    def _as_image(self, v):
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.size != self.n * self.n:
            root = np.sqrt(v.size)
            raise ValueError(
                f"length {v.size} does not match a {self.n}x{self.n} image"
                + ("" if root == int(root) else " (not a perfect square)")
            )
        return unvec(v, self.n, self.n)

    def matvec(self, v):
        u = self._as_image(v)
        return vec(self.factor @ u @ self.factor.T)

    def rmatvec(self, w):
        u = self._as_image(w)
        return vec(self.factor.T @ u @ self.factor)

    def toarray(self):
        return np.kron(self.factor, self.factor)

    def gram(self):
        g = self.factor.T @ self.factor
        return np.kron(g, g)

    def gram_eigen_bounds(self):
        ev = np.linalg.eigvalsh(self.factor.T @ self.factor)
        lo, hi = max(float(ev[0]), 0.0), float(ev[-1])
        return lo * lo, hi * hi


def identity_operator(n: int) -> IdentityOperator:
    return IdentityOperator(n)


def gaussian_blur_1d(n: int, gamma: float) -> DenseOperator:
    """Midpoint-rule Gaussian blur ``A[i, j] = h kappa(h (i - j))``, ``h = 1/n``.

    ``kappa(s) = exp(-s^2 / (2 gamma^2)) / (2 pi gamma^2)``. Note that this
    prefactor is the two-dimensional Gaussian normalization, so the rows of
    the one-dimensional operator sum to roughly ``1/(sqrt(2 pi) gamma)``
    rather than one.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not gamma > 0:
        raise ValueError(f"blur width must be positive, got {gamma!r}")
    h = 1.0 / n
    idx = np.arange(n)
    s = h * (idx[:, None] - idx[None, :])
    kappa = np.exp(-s * s / (2.0 * gamma * gamma)) / (2.0 * np.pi * gamma * gamma)
    return DenseOperator(h * kappa)


def kron_separable(factor) -> KroneckerOperator:
    return KroneckerOperator(factor)

"""Small dense matrix primitives.

Matrices are plain ``float64`` numpy arrays of shape ``(n, n)``.  Functions here
never mutate their arguments; :class:`MatrixSystem` stores read-only copies.

Singular values are computed with one-sided (Hestenes) Jacobi rotations.  This
is the cyclic Jacobi eigensolver for ``A^T A`` applied implicitly to the columns
of ``A``, which keeps full relative accuracy for the small singular values that
appear in long word products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from subpressure.errors import DimensionError, NotTriangularError, SingularMatrixError

SINGULAR_DET_RTOL = 1e-12
TRIANGULAR_TOL = 1e-9
SINGULAR_VALUE_FLOOR = 1e-14

_JACOBI_TOL = 1e-15
_JACOBI_MAX_SWEEPS = 100


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a square float matrix, raising on bad shapes."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError("matrix entries must be finite")
    return m


def is_nonsingular(a: np.ndarray) -> bool:
    a = as_matrix(a)
    n = a.shape[0]
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return False
    return abs(float(np.linalg.det(a))) > SINGULAR_DET_RTOL * scale**n


@dataclass(frozen=True)
class MatrixSystem:
    """A finite indexed family of non-singular ``n x n`` real matrices."""

    matrices: tuple[np.ndarray, ...]
    labels: tuple[str, ...] | None = None
    n: int = field(init=False)

    def __post_init__(self):
        if len(self.matrices) == 0:
            raise DimensionError("a matrix system needs at least one matrix")
        mats = []
        for idx, a in enumerate(self.matrices):
            m = as_matrix(a)
            if mats and m.shape != mats[0].shape:
                raise DimensionError(
                    f"matrix {idx} has shape {m.shape}, expected {mats[0].shape}"
                )
            if not is_nonsingular(m):
                raise SingularMatrixError(f"matrix {idx} is numerically singular")
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "n", mats[0].shape[0])
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != len(mats):
                raise DimensionError("one label per matrix is required")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_diagonals(
        cls, diagonals: Sequence[Sequence[float]], labels: Sequence[str] | None = None
    ) -> MatrixSystem:
        rows = [np.asarray(d, dtype=float) for d in diagonals]
        if any(r.ndim != 1 for r in rows):
            raise DimensionError("diagonal entries must be flat lists")
        return cls(tuple(np.diag(r) for r in rows), None if labels is None else tuple(labels))

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def count(self) -> int:
        return len(self.matrices)

    def stacked(self) -> np.ndarray:
        """All matrices as one ``(count, n, n)`` array."""
        return np.stack(self.matrices)

    def is_diagonal(self) -> bool:
        return all(np.count_nonzero(a - np.diag(np.diag(a))) == 0 for a in self.matrices)


def multiply(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def determinant(a) -> float:
    return float(np.linalg.det(as_matrix(a)))


def batched_singular_values(mats: np.ndarray) -> np.ndarray:
    """Descending singular values of every matrix in a ``(batch, n, n)`` stack.

    No singularity check is made; callers that need one use
    :func:`singular_values`.
    """
    u = np.array(mats, dtype=float, copy=True)
    if u.ndim != 3 or u.shape[1] != u.shape[2]:
        raise DimensionError(f"expected a (batch, n, n) stack, got {u.shape}")
    n = u.shape[1]
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                up = u[:, :, p]
                uq = u[:, :, q]
                alpha = np.einsum("bi,bi->b", up, up)
                beta = np.einsum("bi,bi->b", uq, uq)
                gamma = np.einsum("bi,bi->b", up, uq)
                active = np.abs(gamma) > _JACOBI_TOL * np.sqrt(alpha * beta)
                if not np.any(active):
                    continue
                rotated = True
                g = np.where(active, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c[:, None] * up - s[:, None] * uq
                new_q = s[:, None] * up + c[:, None] * uq
                u[:, :, p] = new_p
                u[:, :, q] = new_q
        if not rotated:
            break
    sv = np.sqrt(np.einsum("bij,bij->bj", u, u))
    return -np.sort(-sv, axis=1)


def singular_values(a) -> np.ndarray:
    """Singular values of ``a`` in descending order.

    >>> singular_values([[0.0, -2.0], [1.0, 0.0]])
    array([2., 1.])
    """
    m = as_matrix(a)
    sv = batched_singular_values(m[None])[0]
    if sv[0] == 0.0 or sv[-1] < SINGULAR_VALUE_FLOOR * sv[0]:
        raise SingularMatrixError("matrix is numerically singular")
    return sv


def is_upper_triangular(a, tol: float = TRIANGULAR_TOL) -> bool:
    m = as_matrix(a)
    return bool(np.all(np.abs(np.tril(m, -1)) <= tol))


def is_lower_triangular(a, tol: float = TRIANGULAR_TOL) -> bool:
    m = as_matrix(a)
    return bool(np.all(np.abs(np.triu(m, 1)) <= tol))


def is_contracting(a) -> bool:
    """True iff the operator norm (largest singular value) is below one."""
    return bool(singular_values(a)[0] < 1.0)


def conjugate(system: MatrixSystem, basis) -> list[np.ndarray]:
    """Return ``B^{-1} A_i B`` for every matrix of ``system``."""
    b = as_matrix(basis)
    if b.shape[0] != system.n:
        raise DimensionError(f"basis is {b.shape}, system dimension is {system.n}")
    if not is_nonsingular(b):
        raise SingularMatrixError("basis matrix is singular")
    return [np.linalg.solve(b, a @ b) for a in system.matrices]


def triangular_form(mats: Sequence[np.ndarray], tol: float = TRIANGULAR_TOL) -> str | None:
    """``"upper"`` or ``"lower"`` if every matrix has that shape, else None."""
    if all(is_upper_triangular(a, tol) for a in mats):
        return "upper"
    if all(is_lower_triangular(a, tol) for a in mats):
        return "lower"
    return None


def verify_conjugation_basis(system: MatrixSystem, basis, tol: float = TRIANGULAR_TOL) -> bool:
    """Check that ``basis`` simultaneously triangularises ``system``.

    Use :func:`conjugated_diagonals` to obtain the resulting diagonal data.
    """
    return triangular_form(conjugate(system, basis), tol) is not None


def conjugated_diagonals(system: MatrixSystem, basis, tol: float = TRIANGULAR_TOL) -> np.ndarray:
    """Absolute diagonals of ``B^{-1} A_i B`` as a ``(count, n)`` array.

    Raises :class:`~subpressure.errors.NotTriangularError` when the conjugated
    matrices are not all upper or all lower triangular.
    """
    mats = conjugate(system, basis)
    if triangular_form(mats, tol) is None:
        raise NotTriangularError("basis does not triangularise every matrix")
    return np.abs(np.array([np.diag(a) for a in mats]))

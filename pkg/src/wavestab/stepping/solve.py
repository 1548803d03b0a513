from __future__ import annotations

import logging
import warnings

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ..errors import SingularSystemError
from ..operators import ImplicitOperator

__all__ = ["LinearSolver", "solve_implicit", "RESIDUAL_TOL"]

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-11


class LinearSolver:
    """Dense LU factorization, computed once and reused for every right-hand side."""

    def __init__(self, matrix: npt.ArrayLike, *, name: str = "implicit system"):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.name = name
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError(f"{name} must be square, got shape {self.matrix.shape}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(self.matrix)
        if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
            raise SingularSystemError(
                f"{name} is singular", condition=float(np.linalg.cond(self.matrix))
            )
        self._factor = (lu, piv)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: npt.ArrayLike) -> npt.NDArray:
        b = np.asarray(rhs)
        if np.iscomplexobj(b):
            return self._solve_real(b.real) + 1j * self._solve_real(b.imag)
        return self._solve_real(b)

    def _solve_real(self, b: npt.NDArray) -> npt.NDArray[np.float64]:
        x = lu_solve(self._factor, b)
        scale = np.max(np.abs(b), initial=0.0)
        if scale > 0:
            residual = np.max(np.abs(self.matrix @ x - b))
            if residual > RESIDUAL_TOL * scale:
                logger.warning(
                    "%s: relative residual %.2e exceeds %.0e",
                    self.name,
                    residual / scale,
                    RESIDUAL_TOL,
                )
        return x


def solve_implicit(
    op: ImplicitOperator | npt.ArrayLike, rhs: npt.ArrayLike, *, periodic: bool = True
) -> npt.NDArray:
    """Solve ``op x = rhs``; an ImplicitOperator is assembled on ``len(rhs)`` points."""
    b = np.asarray(rhs)
    if isinstance(op, ImplicitOperator):
        matrix = op.matrix(b.shape[0], periodic=periodic)
    else:
        matrix = np.asarray(op)
    return LinearSolver(matrix).solve(b)

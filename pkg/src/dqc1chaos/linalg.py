"""Dense complex linear algebra on unitary matrices.

Everything downstream (ensembles, kicked top, the one-clean-qubit simulator)
passes unitaries around as :class:`UnitaryMatrix`, whose public constructor
verifies unitarity. Spectra are returned as :class:`EigenphaseSpectrum` with
the convention ``U |phi_j> = exp(-i phi_j) |phi_j>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-10
MAX_DIM = 4096


class DimensionError(ValueError):
    """Operands have incompatible or unsupported dimensions."""


class UnitarityError(ValueError):
    """A matrix failed the unitarity check."""


class EigenSolverError(ArithmeticError):
    """The eigenvalue solver did not converge."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def unitarity_defect(a: np.ndarray) -> float:
    """Return ``max |A^dagger A - I|`` entry-wise."""
    a = np.asarray(a)
    g = a.conj().T @ a
    g[np.diag_indices_from(g)] -= 1.0
    return float(np.max(np.abs(g))) if g.size else 0.0


class UnitaryMatrix:
    """Immutable dense N x N unitary.

    ``UnitaryMatrix(array)`` checks that the input is square, finite, of
    dimension at most :data:`MAX_DIM` and unitary to within ``tol`` in the
    max-norm. The entries are exposed read-only through :attr:`data`.
    """

    __slots__ = ("_data", "_cache")

    def __init__(self, array, tol: float = UNITARITY_TOL):
        a = np.asarray(array, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise DimensionError("dimension must be at least 1")
        if a.shape[0] > MAX_DIM:
            raise DimensionError(f"dimension {a.shape[0]} exceeds cap {MAX_DIM}")
        if not np.all(np.isfinite(a)):
            raise UnitarityError("matrix has non-finite entries")
        defect = unitarity_defect(a)
        if defect > tol:
            raise UnitarityError(f"||U^dagger U - I||_max = {defect:.3e} > {tol:.1e}")
        self._data = _frozen(a)
        self._cache = {}

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMatrix":
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def is_diagonal(self) -> bool:
        a = self._data
        return not np.any(a[~np.eye(a.shape[0], dtype=bool)])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data
        return self._data.astype(dtype)

    def __repr__(self) -> str:
        return f"UnitaryMatrix(dim={self.dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnitaryMatrix):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self._data, other._data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class EigenphaseSpectrum:
    """Sorted eigenphases in (-pi, pi] of an N-dimensional unitary."""

    phases: np.ndarray
    source_dim: int

    def __post_init__(self):
        p = np.array(self.phases, dtype=np.float64, copy=True).ravel()
        if p.size != self.source_dim:
            raise ValueError(f"{p.size} phases for source_dim {self.source_dim}")
        if np.any(p <= -np.pi) or np.any(p > np.pi):
            raise ValueError("phases must lie in (-pi, pi]")
        if np.any(np.diff(p) < 0):
            raise ValueError("phases must be sorted ascending")
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    @classmethod
    def from_phases(cls, phases) -> "EigenphaseSpectrum":
        """Build a spectrum from arbitrary real phases (wrapped and sorted)."""
        p = wrap_phase(np.asarray(phases, dtype=np.float64))
        return cls(np.sort(p), p.size)

    @property
    def dim(self) -> int:
        return self.source_dim

    def __len__(self) -> int:
        return self.source_dim


def wrap_phase(phi):
    """Map real angles onto the branch (-pi, pi]."""
    w = np.pi - np.mod(np.pi - np.asarray(phi, dtype=np.float64), 2 * np.pi)
    # mod can return exactly 2*pi for tiny negative arguments
    return np.where(w <= -np.pi, w + 2 * np.pi, w)


def _check_same_dim(a: UnitaryMatrix, b: UnitaryMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def mat_mul(a: UnitaryMatrix, b: UnitaryMatrix) -> UnitaryMatrix:
    """Matrix product ``a @ b``; the result is re-checked for unitarity."""
    _check_same_dim(a, b)
    return UnitaryMatrix(a.data @ b.data)


def adjoint(u: UnitaryMatrix) -> UnitaryMatrix:
    return UnitaryMatrix(u.data.conj().T)


def trace(u: UnitaryMatrix) -> complex:
    return complex(np.trace(u.data))


def mat_vec(u: UnitaryMatrix, v) -> np.ndarray:
    """Apply ``u`` to a vector (or to the columns of a 2-D block)."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[0] != u.dim:
        raise DimensionError(f"vector length {v.shape[0]} != matrix dim {u.dim}")
    return u.data @ v


def mat_power(u: UnitaryMatrix, n: int) -> UnitaryMatrix:
    """``u**n`` by repeated multiplication (n >= 0)."""
    if n < 0:
        raise ValueError("power must be non-negative")
    out = np.eye(u.dim, dtype=np.complex128)
    for _ in range(n):
        out = u.data @ out
    return UnitaryMatrix(out)


def eigenvalues(u: UnitaryMatrix) -> np.ndarray:
    """Eigenvalues of ``u`` from the Hessenberg/Schur QR iteration.

    Diagonal inputs are read off directly.

    Raises:
        EigenSolverError: if LAPACK reports non-convergence.
    """
    if u.is_diagonal():
        return np.diag(u.data).copy()
    try:
        lam = np.linalg.eigvals(u.data)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigenSolverError("eigen-solver returned non-finite values")
    return lam


def eigenphases(u: UnitaryMatrix) -> EigenphaseSpectrum:
    """Quasi-energies phi_j with eigenvalues ``exp(-i phi_j)``, sorted, in (-pi, pi].

    The result is memoized on ``u`` (the matrix is immutable).
    """
    spec = u._cache.get("eigenphases")
    if spec is None:
        phi = wrap_phase(-np.angle(eigenvalues(u)))
        spec = u._cache["eigenphases"] = EigenphaseSpectrum(np.sort(phi), u.dim)
    return spec


def direct_sum(*blocks: UnitaryMatrix) -> UnitaryMatrix:
    """Block-diagonal unitary ``blocks[0] (+) blocks[1] (+) ...``."""
    dim = sum(b.dim for b in blocks)
    if dim > MAX_DIM:
        raise DimensionError(f"dimension {dim} exceeds cap {MAX_DIM}")
    out = np.zeros((dim, dim), dtype=np.complex128)
    i = 0
    for b in blocks:
        out[i:i + b.dim, i:i + b.dim] = b.data
        i += b.dim
    return UnitaryMatrix(out)

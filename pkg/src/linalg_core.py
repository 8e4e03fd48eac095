"""
Dense Complex Linear Algebra
Rank-revealing SVD, subspace algebra, Kronecker/vectorization helpers and seeded randomness
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

logger = logging.getLogger(__name__)

DEFAULT_RELATIVE_TOL = 1e-10
NEAR_THRESHOLD_BAND = 100.0

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


class DqlsError(Exception):
    """Base class for every error raised by the toolkit"""
    pass


class InvalidMatrix(DqlsError):
    """Exception raised when a matrix is malformed or has non-finite entries"""
    pass


class DimensionMismatch(DqlsError):
    """Exception raised when operands live in incompatible spaces"""
    pass


class PreconditionFailed(DqlsError):
    """Exception raised when an operation's precondition does not hold"""
    pass


class TooLarge(DqlsError):
    """Exception raised when a dense computation exceeds its size ceiling"""
    pass


class ToleranceMode(Enum):
    """How a rank tolerance is turned into a singular-value threshold"""
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class RankTolerance:
    """Numerical rank cut-off shared by every SVD and eigenvalue decision"""
    mode: ToleranceMode = ToleranceMode.RELATIVE
    value: float = DEFAULT_RELATIVE_TOL

    def __post_init__(self):
        """Validate tolerance after initialization"""
        if not isinstance(self.mode, ToleranceMode):
            object.__setattr__(self, 'mode', ToleranceMode(self.mode))
        if not (math.isfinite(self.value) and self.value > 0):
            raise ValueError(f"Rank tolerance must be a positive finite number, got {self.value}")

    @classmethod
    def relative(cls, value: float = DEFAULT_RELATIVE_TOL) -> 'RankTolerance':
        return cls(ToleranceMode.RELATIVE, value)

    @classmethod
    def absolute(cls, value: float) -> 'RankTolerance':
        return cls(ToleranceMode.ABSOLUTE, value)

    def threshold(self, shape: Tuple[int, ...], sigma_max: float) -> float:
        """Effective cut-off for singular values of a matrix of the given shape"""
        if self.mode is ToleranceMode.ABSOLUTE:
            return self.value
        return self.value * max(shape) * sigma_max

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RankTolerance':
        return cls(ToleranceMode(data.get('mode', 'relative')), float(data.get('value', DEFAULT_RELATIVE_TOL)))

    def to_dict(self) -> Dict[str, Any]:
        return {'mode': self.mode.value, 'value': self.value}


def resolve_tol(tol: Optional[RankTolerance]) -> RankTolerance:
    return tol if tol is not None else RankTolerance()


# =============================================================================
# MATRIX VALIDATION AND SVD
# =============================================================================

def as_matrix(m: Any, name: str = "matrix") -> np.ndarray:
    """Coerce input to a finite 2-D complex array"""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidMatrix(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SVDResult:
    """Singular value decomposition together with its numerical rank"""
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    rank: int
    threshold: float


def rank_revealing_svd(m: Any, tol: Optional[RankTolerance] = None) -> SVDResult:
    """SVD with rank decided by the tolerance; vh is square whenever a kernel exists"""
    tol = resolve_tol(tol)
    a = as_matrix(m)
    rows, cols = a.shape

    if a.size == 0:
        return SVDResult(np.eye(rows, dtype=complex), np.zeros(0), np.eye(cols, dtype=complex), 0, 0.0)

    full = rows < cols
    try:
        u, s, vh = scipy.linalg.svd(a, full_matrices=full, lapack_driver='gesdd')
    except np.linalg.LinAlgError:
        logger.warning(f"gesdd did not converge on {rows}x{cols} matrix, retrying with gesvd")
        u, s, vh = scipy.linalg.svd(a, full_matrices=full, lapack_driver='gesvd')

    sigma_max = float(s[0]) if s.size else 0.0
    threshold = tol.threshold(a.shape, sigma_max)
    rank = int(np.sum(s > threshold))

    near = s[(s > threshold / NEAR_THRESHOLD_BAND) & (s <= threshold * NEAR_THRESHOLD_BAND)]
    if near.size and sigma_max > 0:
        logger.warning(
            f"Near-threshold singular value in {rows}x{cols} matrix: "
            f"sigma={near.min():.3e}, threshold={threshold:.3e}, condition={sigma_max / near.min():.3e}"
        )

    return SVDResult(u, s, vh, rank, threshold)


def svd_rank(m: Any, tol: Optional[RankTolerance] = None) -> int:
    """Numerical rank of a matrix"""
    return rank_revealing_svd(m, tol).rank


# =============================================================================
# SUBSPACES
# =============================================================================

@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal-column basis of a subspace of C^ambient_dim"""
    ambient_dim: int
    basis: np.ndarray
    tol: RankTolerance = field(default_factory=RankTolerance)

    def __post_init__(self):
        """Validate basis shape and orthonormality"""
        if self.ambient_dim < 1:
            raise DimensionMismatch(f"Ambient dimension must be positive, got {self.ambient_dim}")
        basis = np.asarray(self.basis, dtype=np.complex128)
        if basis.size == 0:
            basis = np.zeros((self.ambient_dim, 0), dtype=np.complex128)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f"Basis shape {basis.shape} does not match ambient dimension {self.ambient_dim}"
            )
        k = basis.shape[1]
        if k > self.ambient_dim:
            raise DimensionMismatch(f"Subspace of dimension {k} cannot live in C^{self.ambient_dim}")
        if k:
            gram_error = np.linalg.norm(basis.conj().T @ basis - np.eye(k))
            if gram_error > max(10 * self.tol.value, 1e-10):
                raise InvalidMatrix(f"Basis columns are not orthonormal (deviation {gram_error:.2e})")
        object.__setattr__(self, 'basis', basis)

    @classmethod
    def from_vectors(cls, vectors: Any, tol: Optional[RankTolerance] = None) -> 'Subspace':
        """Span of arbitrary column vectors, orthonormalized"""
        return range_space(as_matrix(vectors), tol)

    @classmethod
    def full(cls, ambient_dim: int, tol: Optional[RankTolerance] = None) -> 'Subspace':
        return cls(ambient_dim, np.eye(ambient_dim, dtype=np.complex128), resolve_tol(tol))

    @classmethod
    def zero(cls, ambient_dim: int, tol: Optional[RankTolerance] = None) -> 'Subspace':
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=np.complex128), resolve_tol(tol))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __len__(self) -> int:
        return self.dim

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> 'Subspace':
        return orthonormal_complement(self)

    def projector_distance(self, other: 'Subspace') -> float:
        """Spectral-norm distance between orthogonal projectors"""
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch(f"Ambient dimensions differ: {self.ambient_dim} vs {other.ambient_dim}")
        return float(np.linalg.norm(self.projector() - other.projector(), 2))

    def same_as(self, other: 'Subspace', atol: float = 1e-10) -> bool:
        return self.dim == other.dim and self.projector_distance(other) < atol

    def overlap(self, vector: Any) -> float:
        """Fraction of a vector's squared norm lying inside the subspace"""
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.ambient_dim:
            raise DimensionMismatch(f"Vector of length {v.shape[0]} is not in C^{self.ambient_dim}")
        norm_sq = float(np.vdot(v, v).real)
        if norm_sq == 0:
            return 1.0
        coeffs = self.basis.conj().T @ v
        return float(np.vdot(coeffs, coeffs).real) / norm_sq

    def contains(self, vector: Any, atol: float = 1e-9) -> bool:
        return self.overlap(vector) >= 1 - atol

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ambient_dim': self.ambient_dim,
            're': self.basis.real.tolist(),
            'im': self.basis.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], tol: Optional[RankTolerance] = None) -> 'Subspace':
        """Build from the shared JSON matrix format; columns need not be orthonormal"""
        try:
            re = np.asarray(data['re'], dtype=float)
            im = np.asarray(data.get('im', np.zeros_like(re)), dtype=float)
        except KeyError as e:
            raise ValueError(f"Missing required field in subspace data: {e}")
        if re.shape != im.shape:
            raise InvalidMatrix(f"Real and imaginary parts differ in shape: {re.shape} vs {im.shape}")
        vectors = re + 1j * im
        if vectors.ndim == 1:
            vectors = vectors.reshape(-1, 1)
        ambient = int(data.get('ambient_dim', vectors.shape[0]))
        if vectors.shape[0] != ambient:
            raise DimensionMismatch(f"Basis has {vectors.shape[0]} rows, expected {ambient}")
        return range_space(vectors, tol)


def range_space(m: Any, tol: Optional[RankTolerance] = None) -> Subspace:
    """Column space of a matrix"""
    tol = resolve_tol(tol)
    a = as_matrix(m)
    svd = rank_revealing_svd(a, tol)
    return Subspace(a.shape[0], svd.u[:, :svd.rank], tol)


def kernel(m: Any, tol: Optional[RankTolerance] = None) -> Subspace:
    """Right null space of a matrix"""
    tol = resolve_tol(tol)
    a = as_matrix(m)
    svd = rank_revealing_svd(a, tol)
    null_basis = svd.vh[svd.rank:, :].conj().T
    return Subspace(a.shape[1], null_basis, tol)


def cokernel(m: Any, tol: Optional[RankTolerance] = None) -> Subspace:
    """Left null space of a matrix"""
    return kernel(as_matrix(m).conj().T, tol)


def nullity(m: Any, tol: Optional[RankTolerance] = None) -> int:
    a = as_matrix(m)
    return a.shape[1] - svd_rank(a, tol)


def orthonormal_complement(subspace: Subspace) -> Subspace:
    if subspace.dim == 0:
        return Subspace.full(subspace.ambient_dim, subspace.tol)
    return cokernel(subspace.basis, subspace.tol)


def intersect(subspaces: Sequence[Subspace], tol: Optional[RankTolerance] = None) -> Subspace:
    """Intersection as the kernel of the stacked complement projectors"""
    if not subspaces:
        raise DimensionMismatch("Cannot intersect an empty list of subspaces")
    ambient = subspaces[0].ambient_dim
    for s in subspaces:
        if s.ambient_dim != ambient:
            raise DimensionMismatch(f"Ambient dimensions differ: {ambient} vs {s.ambient_dim}")
    tol = tol if tol is not None else subspaces[0].tol

    identity = np.eye(ambient, dtype=np.complex128)
    blocks = [identity - s.projector() for s in subspaces if s.dim < ambient]
    if not blocks:
        return Subspace.full(ambient, tol)
    return kernel(np.vstack(blocks), tol)


# =============================================================================
# KRONECKER AND VECTORIZATION
# =============================================================================

def kron(*matrices: Any) -> np.ndarray:
    if not matrices:
        raise DimensionMismatch("kron needs at least one operand")
    return reduce(np.kron, [np.asarray(m, dtype=np.complex128) for m in matrices])


def vec(m: Any) -> np.ndarray:
    """Stack columns: vec(A X B) == kron(B.T, A) @ vec(X)"""
    return np.asarray(m, dtype=np.complex128).reshape(-1, order='F')


def unvec(v: Any, rows: int, cols: Optional[int] = None) -> np.ndarray:
    cols = rows if cols is None else cols
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != rows * cols:
        raise DimensionMismatch(f"Vector of length {v.shape[0]} cannot be reshaped to {rows}x{cols}")
    return v.reshape((rows, cols), order='F')


def commutant_dimension(matrices: Sequence[Any], tol: Optional[RankTolerance] = None) -> int:
    """Dimension of {X : [X, M] = 0 for every M}"""
    mats = [as_matrix(m) for m in matrices]
    if not mats:
        raise DimensionMismatch("At least one matrix is required")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise DimensionMismatch(f"Expected {d}x{d} matrices, got {m.shape}")
    identity = np.eye(d, dtype=np.complex128)
    stacked = np.vstack([np.kron(m.T, identity) - np.kron(identity, m) for m in mats])
    return nullity(stacked, tol)


def krylov_matrix(a: Any, b: Any) -> np.ndarray:
    """Columns b, Ab, ..., A^{d-1} b"""
    a = as_matrix(a)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    d = a.shape[0]
    if a.shape != (d, d) or b.shape[0] != d:
        raise DimensionMismatch(f"Incompatible shapes {a.shape} and {b.shape}")
    columns = [b]
    for _ in range(d - 1):
        columns.append(a @ columns[-1])
    return np.column_stack(columns)


# =============================================================================
# SEEDED RANDOMNESS
# =============================================================================

def make_rng(seed: SeedLike = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(base_seed: int, count: int, key: Sequence[int] = ()) -> List[np.random.SeedSequence]:
    """Independent child seeds addressed by (key, index)"""
    return [np.random.SeedSequence(base_seed, spawn_key=tuple(key) + (i,)) for i in range(count)]


def random_gaussian_matrix(rows: int, cols: int, seed: SeedLike = None) -> np.ndarray:
    """I.i.d. standard complex Gaussian entries"""
    rng = make_rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-distributed unitary"""
    return unitary_group.rvs(d, random_state=make_rng(seed))

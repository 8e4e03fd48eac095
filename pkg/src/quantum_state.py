"""
Multipartite Pure States
Amplitude tensors, partial traces, Haar sampling and the named-state library
"""

import json
import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from linalg_core import (
    DqlsError, RankTolerance, SeedLike, Subspace, make_rng, range_space, resolve_tol
)

logger = logging.getLogger(__name__)

MAX_GRAPH_QUBITS = 8


class InvalidState(DqlsError):
    """Exception raised when amplitudes or density matrices are malformed"""
    pass


class InvalidIndexSet(DqlsError):
    """Exception raised for empty, duplicate or out-of-range subsystem indices"""
    pass


class InvalidName(DqlsError):
    """Exception raised for unknown named states or out-of-range parameters"""
    pass


def validate_index_set(n_subsystems: int, subset: Sequence[int], allow_full: bool = True) -> Tuple[int, ...]:
    """Return the sorted 1-based index tuple or raise InvalidIndexSet"""
    members = [int(i) for i in subset]
    if not members:
        raise InvalidIndexSet("Index set cannot be empty")
    if len(set(members)) != len(members):
        raise InvalidIndexSet(f"Index set {members} contains duplicates")
    for i in members:
        if i < 1 or i > n_subsystems:
            raise InvalidIndexSet(f"Index {i} outside 1..{n_subsystems}")
    if not allow_full and len(members) == n_subsystems:
        raise InvalidIndexSet(f"Index set {members} must be a proper subset")
    return tuple(sorted(members))


def _validate_dims(dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise InvalidState("dims cannot be empty")
    if any(d < 2 for d in dims):
        raise InvalidState(f"Every subsystem dimension must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector in row-major order, subsystem 1 slowest"""
    dims: Tuple[int, ...]
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        """Validate dims, length and finiteness"""
        dims = _validate_dims(self.dims)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        expected = int(np.prod(dims))
        if amps.shape[0] != expected:
            raise InvalidState(f"Expected {expected} amplitudes for dims {dims}, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise InvalidState("Amplitudes contain non-finite entries")
        if self.normalized and abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise InvalidState(f"State flagged normalized but has norm {np.linalg.norm(amps):.15f}")
        amps.setflags(write=False)
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'amplitudes', amps)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> 'PureState':
        norm = self.norm()
        if norm == 0:
            raise InvalidState("Cannot normalize the zero vector")
        return PureState(self.dims, self.amplitudes / norm, normalized=True)

    def scaled(self, factor: complex) -> 'PureState':
        return PureState(self.dims, self.amplitudes * factor)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def permute(self, order: Sequence[int]) -> 'PureState':
        """New subsystem k is old subsystem order[k] (1-based labels)"""
        order = [int(o) for o in order]
        if sorted(order) != list(range(1, self.n_subsystems + 1)):
            raise InvalidIndexSet(f"{order} is not a permutation of 1..{self.n_subsystems}")
        axes = [o - 1 for o in order]
        tensor = np.transpose(self.tensor(), axes)
        return PureState(tuple(self.dims[a] for a in axes), tensor.reshape(-1), self.normalized)

    def regroup(self, blocks: Sequence[Sequence[int]]) -> 'PureState':
        """Merge consecutive groups of subsystems (after reordering) into single factors"""
        order = [i for block in blocks for i in block]
        permuted = self.permute(order)
        new_dims = tuple(int(np.prod([self.dims[i - 1] for i in block])) for block in blocks)
        return PureState(new_dims, permuted.amplitudes, self.normalized)

    def bipartition_matrix(self, subset: Sequence[int]) -> np.ndarray:
        """Amplitudes as a (subset x complement) matrix, both sides in increasing subsystem order"""
        keep = validate_index_set(self.n_subsystems, subset)
        rest = [i for i in range(1, self.n_subsystems + 1) if i not in keep]
        axes = [i - 1 for i in keep] + [i - 1 for i in rest]
        d_keep = int(np.prod([self.dims[i - 1] for i in keep]))
        return np.transpose(self.tensor(), axes).reshape(d_keep, -1)

    def inner(self, other: 'PureState') -> complex:
        if other.dims != self.dims:
            raise InvalidState(f"Cannot take inner product of dims {self.dims} and {other.dims}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: 'PureState') -> float:
        """|<a|b>|^2 of the normalized vectors"""
        return abs(self.normalize().inner(other.normalize())) ** 2

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dims': list(self.dims),
            're': self.amplitudes.real.tolist(),
            'im': self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PureState':
        try:
            re = np.asarray(data['re'], dtype=float)
            im = np.asarray(data.get('im', np.zeros_like(re)), dtype=float)
            dims = data['dims']
        except KeyError as e:
            raise ValueError(f"Missing required field in state data: {e}")
        if re.shape != im.shape:
            raise InvalidState(f"re and im differ in length: {re.shape} vs {im.shape}")
        return cls(tuple(dims), re + 1j * im)

    @classmethod
    def load_json(cls, file_path: Path) -> 'PureState':
        """Load a state from the shared JSON format"""
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"State file not found: {file_path}")
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in state file {file_path}: {e}")
        return cls.from_dict(data)

    def save_json(self, file_path: Path):
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator"""
    dims: Tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        """Validate Hermiticity, positivity and trace"""
        dims = _validate_dims(self.dims)
        m = np.asarray(self.matrix, dtype=np.complex128)
        d = int(np.prod(dims))
        if m.shape != (d, d):
            raise InvalidState(f"Density matrix must be {d}x{d} for dims {dims}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidState("Density matrix contains non-finite entries")
        if np.linalg.norm(m - m.conj().T) >= 1e-10:
            raise InvalidState("Density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > 1e-10:
            raise InvalidState(f"Density matrix trace is {np.trace(m).real:.12f}, expected 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise InvalidState("Density matrix has negative eigenvalues")
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'matrix', m)

    @classmethod
    def from_pure(cls, state: PureState) -> 'DensityMatrix':
        psi = state.normalize().amplitudes
        return cls(state.dims, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> 'DensityMatrix':
        d = int(np.prod(dims))
        return cls(tuple(dims), np.eye(d, dtype=np.complex128) / d)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def support(self, tol: Optional[RankTolerance] = None) -> Subspace:
        return range_space(self.matrix, tol)

    def rank(self, tol: Optional[RankTolerance] = None) -> int:
        return self.support(tol).dim

    def is_full_rank(self, tol: Optional[RankTolerance] = None) -> bool:
        return self.rank(tol) == self.dimension


# =============================================================================
# PARTIAL OPERATIONS
# =============================================================================

def partial_trace(s: PureState, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on the kept subsystems"""
    keep = validate_index_set(s.n_subsystems, keep)
    if s.norm() == 0:
        raise InvalidState("Cannot reduce the zero vector")
    m = s.bipartition_matrix(keep) / s.norm()
    rho = m @ m.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(tuple(s.dims[i - 1] for i in keep), rho)


def partial_inner(s: PureState, subsystem: int, basis_index: int) -> PureState:
    """<i|_b psi> on the remaining subsystems, unnormalized"""
    if s.n_subsystems < 2:
        raise InvalidIndexSet("Cannot contract the only subsystem of a state")
    (b,) = validate_index_set(s.n_subsystems, [subsystem])
    if not 0 <= basis_index < s.dims[b - 1]:
        raise InvalidIndexSet(f"Basis index {basis_index} outside 0..{s.dims[b - 1] - 1}")
    sliced = np.take(s.tensor(), basis_index, axis=b - 1)
    remaining = tuple(d for i, d in enumerate(s.dims) if i != b - 1)
    return PureState(remaining, sliced.reshape(-1))


def schmidt_coefficients(s: PureState, subset: Sequence[int]) -> np.ndarray:
    return np.linalg.svd(s.bipartition_matrix(subset), compute_uv=False)


def schmidt_rank(s: PureState, subset: Sequence[int], tol: Optional[RankTolerance] = None) -> int:
    return range_space(s.bipartition_matrix(subset), resolve_tol(tol)).dim


# =============================================================================
# SAMPLING AND NAMED STATES
# =============================================================================

def random_state(dims: Sequence[int], seed: SeedLike = None) -> PureState:
    """Fubini-Study uniform state from i.i.d. complex Gaussian amplitudes"""
    dims = _validate_dims(dims)
    rng = make_rng(seed)
    n = int(np.prod(dims))
    amps = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(dims, amps / np.linalg.norm(amps), normalized=True)


def product_state(dims: Sequence[int], indices: Optional[Sequence[int]] = None) -> PureState:
    dims = _validate_dims(dims)
    indices = [0] * len(dims) if indices is None else list(indices)
    amps = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    amps[np.ravel_multi_index(tuple(indices), dims)] = 1
    return PureState(dims, amps, normalized=True)


def ghz_state(n: int, d: int = 2) -> PureState:
    if n < 2 or d < 2:
        raise InvalidName(f"GHZ needs n >= 2 and d >= 2, got n={n}, d={d}")
    dims = (d,) * n
    amps = np.zeros(d ** n, dtype=np.complex128)
    for k in range(d):
        amps[np.ravel_multi_index((k,) * n, dims)] = 1
    return PureState(dims, amps / np.sqrt(d), normalized=True)


def dicke_state(n: int, k: int) -> PureState:
    if n < 2 or not 0 <= k <= n:
        raise InvalidName(f"Dicke state needs n >= 2 and 0 <= k <= n, got n={n}, k={k}")
    dims = (2,) * n
    amps = np.zeros(2 ** n, dtype=np.complex128)
    for ones in combinations(range(n), k):
        bits = [1 if i in ones else 0 for i in range(n)]
        amps[np.ravel_multi_index(tuple(bits), dims)] = 1
    return PureState(dims, amps / np.linalg.norm(amps), normalized=True)


def w_state(n: int) -> PureState:
    if n < 2:
        raise InvalidName(f"W state needs n >= 2, got {n}")
    return dicke_state(n, 1)


def graph_state(adjacency: Any) -> PureState:
    """Controlled-Z over every edge applied to |+>^n"""
    adj = np.asarray(adjacency)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise InvalidName(f"Adjacency matrix must be square, got shape {adj.shape}")
    n = adj.shape[0]
    if not 2 <= n <= MAX_GRAPH_QUBITS:
        raise InvalidName(f"Graph states are limited to 2..{MAX_GRAPH_QUBITS} qubits, got {n}")
    if not np.array_equal(adj, adj.T) or np.any(np.diag(adj) != 0) or not np.isin(adj, (0, 1)).all():
        raise InvalidName("Adjacency matrix must be symmetric 0/1 with zero diagonal")

    bits = np.array(np.unravel_index(np.arange(2 ** n), (2,) * n)).T
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if adj[i, j]]
    parity = np.zeros(2 ** n, dtype=int)
    for i, j in edges:
        parity += bits[:, i] * bits[:, j]
    amps = (-1.0) ** parity / np.sqrt(2 ** n)
    return PureState((2,) * n, amps.astype(np.complex128), normalized=True)


def ring_adjacency(n: int) -> np.ndarray:
    adj = np.zeros((n, n), dtype=int)
    for i in range(n):
        j = (i + 1) % n
        adj[i, j] = adj[j, i] = 1
    return adj


def omega_state(d: int) -> PureState:
    """Unnormalized maximally entangled state sum_k |kk>"""
    return PureState((d, d), np.eye(d, dtype=np.complex128).reshape(-1))


NAMED_STATES = {
    'ghz': ghz_state,
    'w': w_state,
    'dicke': dicke_state,
    'graph': graph_state,
    'ring': lambda n: graph_state(ring_adjacency(n)),
    'product': lambda n, d=2: product_state((d,) * n),
}


def named_state(name: str, *args, **kwargs) -> PureState:
    """Look up a named construction: ghz(n, d), w(n), dicke(n, k), graph(adjacency), ring(n), product(n, d)"""
    key = name.lower()
    if key not in NAMED_STATES:
        raise InvalidName(f"Unknown state '{name}'. Available: {', '.join(sorted(NAMED_STATES))}")
    try:
        return NAMED_STATES[key](*args, **kwargs)
    except TypeError as e:
        raise InvalidName(f"Bad parameters for '{name}': {e}")


def parse_named_state(descriptor: str) -> PureState:
    """Parse 'ghz:3', 'ghz:3,3', 'dicke:4,2', 'ring:4' style descriptors"""
    name, _, params = descriptor.partition(':')
    args: List[int] = []
    if params:
        try:
            args = [int(p) for p in params.split(',')]
        except ValueError:
            raise InvalidName(f"State parameters must be integers: '{descriptor}'")
    return named_state(name, *args)

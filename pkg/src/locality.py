"""
Neighborhood Structures
Locality constraints over subsystems {1..N} and the index-permuted embedding of local objects
"""

import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from linalg_core import DimensionMismatch, DqlsError

logger = logging.getLogger(__name__)


class ConstructionError(DqlsError):
    """Exception raised when a neighborhood structure violates its invariants"""
    pass


class InvalidParameter(DqlsError):
    """Exception raised for out-of-range structural parameters"""
    pass


@dataclass(frozen=True, order=True)
class Neighborhood:
    """Sorted 1-based member indices"""
    members: Tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(int(i) for i in self.members))
        if not members:
            raise ConstructionError("Neighborhood cannot be empty")
        if len(set(members)) != len(members):
            raise ConstructionError(f"Neighborhood {members} has repeated members")
        if members[0] < 1:
            raise ConstructionError(f"Neighborhood indices are 1-based, got {members}")
        object.__setattr__(self, 'members', members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, index: int) -> bool:
        return index in self.members

    def issubset(self, other: 'Neighborhood') -> bool:
        return set(self.members) <= set(other.members)

    def complement(self, n_subsystems: int) -> Tuple[int, ...]:
        return tuple(i for i in range(1, n_subsystems + 1) if i not in self.members)

    def local_dim(self, dims: Sequence[int]) -> int:
        return int(np.prod([dims[i - 1] for i in self.members]))

    def label(self) -> str:
        return "{" + ",".join(str(i) for i in self.members) + "}"


@dataclass(frozen=True)
class NeighborhoodStructure:
    """Complete collection of proper neighborhoods over N subsystems"""
    n_subsystems: int
    neighborhoods: Tuple[Neighborhood, ...] = field(default_factory=tuple)

    def __post_init__(self):
        """Canonicalize and enforce properness and completeness"""
        n = int(self.n_subsystems)
        if n < 2:
            raise ConstructionError(f"A neighborhood structure needs at least 2 subsystems, got {n}")
        canonical = sorted({nb if isinstance(nb, Neighborhood) else Neighborhood(tuple(nb))
                            for nb in self.neighborhoods})
        if not canonical:
            raise ConstructionError("A neighborhood structure needs at least one neighborhood")
        for nb in canonical:
            if nb.members[-1] > n:
                raise ConstructionError(f"Neighborhood {nb.label()} exceeds N={n}")
            if len(nb) == n:
                raise ConstructionError(f"Neighborhood {nb.label()} is not a proper subset of 1..{n}")
        covered = set().union(*(nb.members for nb in canonical))
        missing = sorted(set(range(1, n + 1)) - covered)
        if missing:
            raise ConstructionError(f"Neighborhood structure is incomplete; uncovered subsystems {missing}")
        object.__setattr__(self, 'n_subsystems', n)
        object.__setattr__(self, 'neighborhoods', tuple(canonical))

    @classmethod
    def from_lists(cls, n_subsystems: int, neighborhoods: Iterable[Sequence[int]]) -> 'NeighborhoodStructure':
        return cls(n_subsystems, tuple(Neighborhood(tuple(nb)) for nb in neighborhoods))

    def __len__(self) -> int:
        return len(self.neighborhoods)

    def __iter__(self):
        return iter(self.neighborhoods)

    def __contains__(self, members: Sequence[int]) -> bool:
        return Neighborhood(tuple(members)) in self.neighborhoods

    def complement(self, j: int) -> Tuple[int, ...]:
        return self.neighborhoods[j].complement(self.n_subsystems)

    def as_lists(self) -> List[List[int]]:
        return [list(nb.members) for nb in self.neighborhoods]

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n_subsystems, 'neighborhoods': self.as_lists()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NeighborhoodStructure':
        try:
            return cls.from_lists(int(data['n']), data['neighborhoods'])
        except KeyError as e:
            raise ValueError(f"Missing required field in neighborhood structure: {e}")

    @classmethod
    def load_json(cls, file_path: Path) -> 'NeighborhoodStructure':
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"Neighborhood file not found: {file_path}")
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in neighborhood file {file_path}: {e}")
        return cls.from_dict(data)

    def save_json(self, file_path: Path):
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)


def complement(ns: NeighborhoodStructure, j: int) -> Tuple[int, ...]:
    return ns.complement(j)


def is_coarse_graining(fine: NeighborhoodStructure, coarse: NeighborhoodStructure) -> bool:
    """True iff every fine neighborhood sits inside some coarse neighborhood"""
    if fine.n_subsystems != coarse.n_subsystems:
        raise DimensionMismatch(
            f"Structures over different systems: N={fine.n_subsystems} vs N={coarse.n_subsystems}"
        )
    return all(any(nb.issubset(big) for big in coarse) for nb in fine)


# =============================================================================
# STANDARD STRUCTURES
# =============================================================================

def chain(n: int, k: int = 2) -> NeighborhoodStructure:
    """Sliding windows of k consecutive subsystems"""
    if not 1 <= k < n:
        raise InvalidParameter(f"Chain windows need 1 <= k < n, got n={n}, k={k}")
    return NeighborhoodStructure.from_lists(n, [range(i, i + k) for i in range(1, n - k + 2)])


def ring(n: int, k: int = 2) -> NeighborhoodStructure:
    """Periodic windows of k consecutive subsystems"""
    if not 1 <= k < n:
        raise InvalidParameter(f"Ring windows need 1 <= k < n, got n={n}, k={k}")
    return NeighborhoodStructure.from_lists(
        n, [[(i + j) % n + 1 for j in range(k)] for i in range(n)]
    )


def all_k_body(n: int, k: int) -> NeighborhoodStructure:
    if not 1 <= k < n:
        raise InvalidParameter(f"k-body neighborhoods need 1 <= k < n, got n={n}, k={k}")
    return NeighborhoodStructure.from_lists(n, combinations(range(1, n + 1), k))


def tripartite_structure() -> NeighborhoodStructure:
    return NeighborhoodStructure.from_lists(3, [[1, 2], [2, 3]])


@dataclass(frozen=True)
class TripartiteGrouping:
    """Grouping of N qudits into blocks a, b, c with overlapping neighborhoods ab and bc"""
    dims: Tuple[int, int, int]
    block_a: Tuple[int, ...]
    block_b: Tuple[int, ...]
    block_c: Tuple[int, ...]
    structure: NeighborhoodStructure

    @property
    def neighborhood_ab(self) -> Neighborhood:
        return Neighborhood(self.block_a + self.block_b)

    @property
    def neighborhood_bc(self) -> Neighborhood:
        return Neighborhood(self.block_b + self.block_c)


def tripartite_grouping(n: int, d: int) -> TripartiteGrouping:
    """Split N qudits of dimension d into (a, b, c) so both neighborhoods stay small"""
    if n <= 3:
        raise InvalidParameter(f"Grouping needs N > 3, got N={n}")
    if d < 2:
        raise InvalidParameter(f"Local dimension must be >= 2, got d={d}")

    if n % 2 == 0:
        size_a, size_b = (n - 2) // 2, 2
    elif d > 2:
        size_a, size_b = (n - 1) // 2, 1
    else:
        size_a, size_b = (n - 3) // 2, 2

    block_a = tuple(range(1, size_a + 1))
    block_b = tuple(range(size_a + 1, size_a + size_b + 1))
    block_c = tuple(range(size_a + size_b + 1, n + 1))
    dims = (d ** len(block_a), d ** len(block_b), d ** len(block_c))
    structure = NeighborhoodStructure.from_lists(n, [block_a + block_b, block_b + block_c])
    return TripartiteGrouping(dims, block_a, block_b, block_c, structure)


# =============================================================================
# EMBEDDING LOCAL OBJECTS
# =============================================================================

def _permutation(members: Sequence[int], dims: Sequence[int]) -> Tuple[List[int], List[int], int, int]:
    n = len(dims)
    local_axes = [i - 1 for i in members]
    rest_axes = [i for i in range(n) if i not in local_axes]
    order = local_axes + rest_axes
    d_local = int(np.prod([dims[a] for a in local_axes]))
    d_rest = int(np.prod([dims[a] for a in rest_axes])) if rest_axes else 1
    return order, list(np.argsort(order)), d_local, d_rest


def embed_vectors(basis: np.ndarray, members: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Columns of basis tensored with the identity on the complement, in the global layout"""
    order, inverse, d_local, d_rest = _permutation(members, dims)
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.shape[0] != d_local:
        raise DimensionMismatch(f"Local basis has {basis.shape[0]} rows, neighborhood dimension is {d_local}")
    k = basis.shape[1]
    extended = np.kron(basis, np.eye(d_rest, dtype=np.complex128))
    n = len(dims)
    tensor = extended.reshape([dims[a] for a in order] + [k * d_rest])
    tensor = np.transpose(tensor, inverse + [n])
    return tensor.reshape(int(np.prod(dims)), k * d_rest)


def embed_operator(op: np.ndarray, members: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Local operator tensored with the identity on the complement, in the global layout"""
    order, inverse, d_local, d_rest = _permutation(members, dims)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (d_local, d_local):
        raise DimensionMismatch(f"Local operator has shape {op.shape}, neighborhood dimension is {d_local}")
    n = len(dims)
    full = np.kron(op, np.eye(d_rest, dtype=np.complex128))
    permuted_dims = [dims[a] for a in order]
    tensor = full.reshape(permuted_dims + permuted_dims)
    tensor = np.transpose(tensor, inverse + [n + a for a in inverse])
    d = int(np.prod(dims))
    return tensor.reshape(d, d)

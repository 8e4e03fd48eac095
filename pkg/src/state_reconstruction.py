"""
State Reconstruction
Recover a global pure state from the supports of its neighborhood marginals
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from dqls_engine import schmidt_span
from linalg_core import (
    DimensionMismatch, DqlsError, RankTolerance, SeedLike, Subspace, intersect, make_rng, resolve_tol
)
from locality import Neighborhood, NeighborhoodStructure, embed_vectors, tripartite_grouping
from quantum_state import PureState, dicke_state, ghz_state, random_state, w_state

logger = logging.getLogger(__name__)

SOUNDNESS_TOL = 1e-8


class IncompleteNeighborhoods(DqlsError):
    """Exception raised when the input neighborhoods do not cover every subsystem"""
    pass


class ReconstructionStatus(Enum):
    UNIQUE = "Unique"
    NOT_UNIQUE = "NotUnique"
    INCONSISTENT = "Inconsistent"


@dataclass(frozen=True, eq=False)
class SupportInput:
    """Support of one neighborhood marginal, a subspace of the neighborhood factor space"""
    neighborhood: Neighborhood
    support: Subspace

    def check_dims(self, dims: Sequence[int]):
        expected = self.neighborhood.local_dim(dims)
        if self.support.ambient_dim != expected:
            raise DimensionMismatch(
                f"Support on {self.neighborhood.label()} lives in C^{self.support.ambient_dim}, expected C^{expected}"
            )

    @classmethod
    def from_state(cls, s: PureState, members: Sequence[int], tol: Optional[RankTolerance] = None) -> 'SupportInput':
        nb = Neighborhood(tuple(members))
        return cls(nb, schmidt_span(s, nb.members, tol))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], tol: Optional[RankTolerance] = None) -> 'SupportInput':
        try:
            members = data['neighborhood']
            support = data['support']
        except KeyError as e:
            raise ValueError(f"Missing required field in support data: {e}")
        return cls(Neighborhood(tuple(members)), Subspace.from_dict(support, tol))

    @classmethod
    def load_json(cls, file_path: Path, tol: Optional[RankTolerance] = None) -> 'SupportInput':
        with open(file_path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f), tol)

    def to_dict(self) -> Dict[str, Any]:
        return {'neighborhood': list(self.neighborhood.members), 'support': self.support.to_dict()}

    def save_json(self, file_path: Path):
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    status: ReconstructionStatus
    candidate_space: Subspace
    state: Optional[PureState] = None
    fidelity_to_truth: Optional[float] = None

    @property
    def candidate_dim(self) -> int:
        return self.candidate_space.dim

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'status': self.status.value,
            'candidate_dim': self.candidate_dim,
            'fidelity_to_truth': self.fidelity_to_truth,
        }
        if self.state is not None:
            result['state'] = self.state.to_dict()
        return result


def fix_global_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive"""
    v = np.asarray(v, dtype=np.complex128)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v
    return v * (np.conj(v[k]) / abs(v[k]))


def reconstruct(dims: Sequence[int], inputs: Sequence[SupportInput], tol: Optional[RankTolerance] = None,
                truth: Optional[PureState] = None) -> ReconstructionResult:
    """Intersect the extended supports; a one-dimensional intersection pins down the state"""
    tol = resolve_tol(tol)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if not inputs:
        raise IncompleteNeighborhoods("No supports given")
    for item in inputs:
        if item.neighborhood.members[-1] > n:
            raise DimensionMismatch(f"Neighborhood {item.neighborhood.label()} exceeds {n} subsystems")
        item.check_dims(dims)
    covered = set().union(*(item.neighborhood.members for item in inputs))
    missing = sorted(set(range(1, n + 1)) - covered)
    if missing:
        raise IncompleteNeighborhoods(f"Subsystems {missing} are not covered by any support")

    total = int(np.prod(dims))
    extended = [Subspace(total, embed_vectors(item.support.basis, item.neighborhood.members, dims), tol)
                for item in inputs]
    candidates = intersect(extended, tol)

    if candidates.dim == 0:
        return ReconstructionResult(ReconstructionStatus.INCONSISTENT, candidates)
    if candidates.dim > 1:
        logger.debug(f"Supports leave a {candidates.dim}-dimensional candidate space")
        return ReconstructionResult(ReconstructionStatus.NOT_UNIQUE, candidates)

    state = PureState(dims, fix_global_phase(candidates.basis[:, 0])).normalize()
    fidelity = state.fidelity(truth) if truth is not None else None
    return ReconstructionResult(ReconstructionStatus.UNIQUE, candidates, state, fidelity)


def supports_of(s: PureState, neighborhoods: Sequence[Sequence[int]],
                tol: Optional[RankTolerance] = None) -> List[SupportInput]:
    return [SupportInput.from_state(s, members, tol) for members in neighborhoods]


def pairwise_outcomes(s: PureState, ns: NeighborhoodStructure,
                      tol: Optional[RankTolerance] = None) -> List[Dict[str, Any]]:
    """Reconstruction outcome for every pair of neighborhoods that jointly covers the system"""
    everything = set(range(1, s.n_subsystems + 1))
    outcomes = []
    for first, second in combinations(ns.neighborhoods, 2):
        if set(first.members) | set(second.members) != everything:
            continue
        result = reconstruct(s.dims, supports_of(s, [first.members, second.members], tol), tol, truth=s)
        outcomes.append({
            'pair': [list(first.members), list(second.members)],
            'status': result.status.value,
            'candidate_dim': result.candidate_dim,
            'fidelity_to_truth': result.fidelity_to_truth,
        })
    return outcomes


# =============================================================================
# TAXONOMY BATTERY
# =============================================================================

def uda_battery(seed: SeedLike = 0, tol: Optional[RankTolerance] = None) -> List[Dict[str, Any]]:
    """Reference states from each region of the DQLS / UDA inclusion picture"""
    tol = resolve_tol(tol)
    rng = make_rng(seed)
    five = tripartite_grouping(5, 2)
    cases = [
        ('dicke(4,2)', dicke_state(4, 2), [[1, 2, 3], [2, 3, 4]], ReconstructionStatus.UNIQUE, None),
        ('w(3)', w_state(3), [[1, 2], [2, 3]], ReconstructionStatus.NOT_UNIQUE,
         "supports alone do not determine W; recovery from full marginal values is out of scope"),
        ('ghz(3)', ghz_state(3), [[1, 2], [2, 3]], ReconstructionStatus.NOT_UNIQUE, None),
        ('random 4-qubit', random_state((2,) * 4, rng), [[1, 2, 3], [2, 3, 4]], ReconstructionStatus.UNIQUE, None),
        ('random 5-qubit', random_state((2,) * 5, rng),
         [list(five.neighborhood_ab.members), list(five.neighborhood_bc.members)], ReconstructionStatus.UNIQUE, None),
    ]

    report = []
    for name, state, neighborhoods, expected, note in cases:
        result = reconstruct(state.dims, supports_of(state, neighborhoods, tol), tol, truth=state)
        entry = {
            'state': name,
            'neighborhoods': neighborhoods,
            'status': result.status.value,
            'candidate_dim': result.candidate_dim,
            'expected': expected.value,
            'as_expected': result.status is expected,
            'fidelity_to_truth': result.fidelity_to_truth,
        }
        if note:
            entry['note'] = note
        if result.status is not expected:
            logger.warning(f"UDA battery: {name} gave {result.status.value}, expected {expected.value}")
        report.append(entry)
    return report

"""
DQLS Engine
Schmidt spans, extended spans, the DQLS subspace and the operator-equation membership test
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from linalg_core import (
    DimensionMismatch, DqlsError, RankTolerance, SeedLike, Subspace, TooLarge,
    intersect, make_rng, random_gaussian_matrix, range_space, resolve_tol, svd_rank
)
from locality import Neighborhood, NeighborhoodStructure, embed_vectors
from quantum_state import PureState, validate_index_set

logger = logging.getLogger(__name__)

MAX_AMBIENT_DIM = 4096
CONTAINMENT_TOL = 1e-9


class SingularSLOCC(DqlsError):
    """Exception raised when a local operator of an SLOCC map is not invertible"""
    pass


class DqlsMethod(Enum):
    """How the dimension of the DQLS subspace was obtained"""
    GEOMETRIC = "geometric"
    TRIPARTITE_ALGEBRAIC = "tripartite-algebraic"
    DETERMINANT = "determinant"


@dataclass(frozen=True, eq=False)
class DqlsVerdict:
    """DQLS subspace of a target state and the resulting verdict"""
    dim_h0: int
    h0_basis: Subspace
    is_dqls: bool
    method: DqlsMethod
    tol_used: RankTolerance
    target_overlap: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dim_h0': self.dim_h0,
            'is_dqls': self.is_dqls,
            'method': self.method.value,
            'tol': self.tol_used.to_dict(),
            'target_overlap': self.target_overlap,
        }


def schmidt_span(s: PureState, subset: Sequence[int], tol: Optional[RankTolerance] = None) -> Subspace:
    """Support of the reduced state on subset, read off the Schmidt decomposition"""
    validate_index_set(s.n_subsystems, subset)
    return range_space(s.bipartition_matrix(subset), resolve_tol(tol))


def extended_schmidt_span(s: PureState, subset: Sequence[int],
                          tol: Optional[RankTolerance] = None) -> Subspace:
    """Schmidt span on subset tensored with the full complement space"""
    tol = resolve_tol(tol)
    members = validate_index_set(s.n_subsystems, subset)
    span = schmidt_span(s, members, tol)
    if span.dim == span.ambient_dim:
        return Subspace.full(s.dimension, tol)
    return Subspace(s.dimension, embed_vectors(span.basis, members, s.dims), tol)


def _check_structure(s: PureState, ns: NeighborhoodStructure, max_dim: int):
    if ns.n_subsystems != s.n_subsystems:
        raise DimensionMismatch(
            f"Structure is over {ns.n_subsystems} subsystems, state has {s.n_subsystems}"
        )
    if s.dimension > max_dim:
        raise TooLarge(f"Ambient dimension {s.dimension} exceeds the dense ceiling {max_dim}")


def intersect_extended_spans(s: PureState, neighborhoods: Sequence[Neighborhood],
                             tol: Optional[RankTolerance] = None) -> Subspace:
    """Intersection of extended Schmidt spans over arbitrary neighborhoods"""
    tol = resolve_tol(tol)
    spans = [extended_schmidt_span(s, nb.members, tol) for nb in neighborhoods]
    return intersect(spans, tol)


def dqls_subspace(s: PureState, ns: NeighborhoodStructure, tol: Optional[RankTolerance] = None,
                  max_dim: int = MAX_AMBIENT_DIM) -> DqlsVerdict:
    """H0 = intersection over neighborhoods of the extended Schmidt spans"""
    tol = resolve_tol(tol)
    _check_structure(s, ns, max_dim)

    h0 = intersect_extended_spans(s, ns.neighborhoods, tol)
    overlap = h0.overlap(s.amplitudes)
    if overlap < 1 - CONTAINMENT_TOL:
        logger.warning(f"Target overlap with H0 is {overlap:.12f}; rank tolerance may be too tight")

    logger.debug(f"dqls_subspace dims={s.dims} ns={ns.as_lists()} dim_h0={h0.dim}")
    return DqlsVerdict(
        dim_h0=h0.dim,
        h0_basis=h0,
        is_dqls=h0.dim == 1,
        method=DqlsMethod.GEOMETRIC,
        tol_used=tol,
        target_overlap=overlap,
    )


# =============================================================================
# SLOCC
# =============================================================================

def slocc_transform(s: PureState, ops: Sequence[Any], tol: Optional[RankTolerance] = None) -> PureState:
    """Apply the product of invertible local operators; output is unnormalized"""
    if len(ops) != s.n_subsystems:
        raise DimensionMismatch(f"Need {s.n_subsystems} local operators, got {len(ops)}")
    tensor = s.tensor()
    for axis, (op, d) in enumerate(zip(ops, s.dims)):
        op = np.asarray(op, dtype=np.complex128)
        if op.shape != (d, d):
            raise DimensionMismatch(f"Operator on subsystem {axis + 1} has shape {op.shape}, expected {(d, d)}")
        if svd_rank(op, tol) < d:
            raise SingularSLOCC(f"Operator on subsystem {axis + 1} is not invertible")
        tensor = np.moveaxis(np.tensordot(op, tensor, axes=([1], [axis])), 0, axis)
    return PureState(s.dims, tensor.reshape(-1))


def random_local_invertibles(dims: Sequence[int], seed: SeedLike = None) -> List[np.ndarray]:
    """Gaussian local operators, invertible with probability one"""
    rng = make_rng(seed)
    return [random_gaussian_matrix(d, d, rng) for d in dims]


# =============================================================================
# MEMBERSHIP WITNESSES
# =============================================================================

@dataclass(frozen=True)
class NotMember:
    """Failure of the operator equation on one neighborhood"""
    neighborhood: Neighborhood
    residual: float

    def __bool__(self) -> bool:
        return False


def membership_witnesses(s: PureState, s_prime: PureState, ns: NeighborhoodStructure,
                         tol: Optional[RankTolerance] = None) -> Union[List[np.ndarray], NotMember]:
    """Operators X on each complement with (I_N (x) X)|s> = |s_prime>, or NotMember"""
    tol = resolve_tol(tol)
    if s.dims != s_prime.dims:
        raise DimensionMismatch(f"States have different dims: {s.dims} vs {s_prime.dims}")
    if ns.n_subsystems != s.n_subsystems:
        raise DimensionMismatch(f"Structure is over {ns.n_subsystems} subsystems, state has {s.n_subsystems}")

    target_norm = max(s_prime.norm(), np.finfo(float).tiny)
    witnesses = []
    for nb in ns:
        psi = s.bipartition_matrix(nb.members)
        psi_prime = s_prime.bipartition_matrix(nb.members)
        cutoff = tol.value * max(psi.shape)
        # Psi X^T = Psi', minimum-norm solution
        x_transposed, _, _, _ = scipy.linalg.lstsq(psi, psi_prime, cond=cutoff)
        residual = float(np.linalg.norm(psi @ x_transposed - psi_prime)) / target_norm
        if residual >= cutoff:
            logger.debug(f"No witness on {nb.label()}: residual {residual:.3e}")
            return NotMember(nb, residual)
        witnesses.append(x_transposed.T)
    return witnesses

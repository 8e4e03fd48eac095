"""
Parent Hamiltonians
Canonical frustration-free quasi-local parent Hamiltonians and ground-space checks
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from dqls_engine import MAX_AMBIENT_DIM, intersect_extended_spans, schmidt_span
from linalg_core import (
    DimensionMismatch, InvalidMatrix, PreconditionFailed, RankTolerance, Subspace, TooLarge,
    resolve_tol, svd_rank
)
from locality import Neighborhood, NeighborhoodStructure, embed_operator
from quantum_state import PureState

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HamiltonianTerm:
    """Hermitian operator on the factor space of one neighborhood"""
    neighborhood: Neighborhood
    matrix: np.ndarray

    def rank(self, tol: Optional[RankTolerance] = None) -> int:
        return svd_rank(self.matrix, tol)


@dataclass(eq=False)
class QLHamiltonian:
    """Sum of quasi-local terms, each shifted so its smallest eigenvalue is zero"""
    dims: Tuple[int, ...]
    terms: List[HamiltonianTerm]
    max_dim: int = MAX_AMBIENT_DIM
    energy_shifts: List[float] = field(default_factory=list)
    _assembled: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        """Validate and zero-shift each term"""
        self.dims = tuple(int(d) for d in self.dims)
        shifted = []
        self.energy_shifts = []
        for term in self.terms:
            nb = term.neighborhood if isinstance(term.neighborhood, Neighborhood) else Neighborhood(tuple(term.neighborhood))
            if nb.members[-1] > len(self.dims):
                raise DimensionMismatch(f"Term on {nb.label()} exceeds {len(self.dims)} subsystems")
            m = np.asarray(term.matrix, dtype=np.complex128)
            d_local = nb.local_dim(self.dims)
            if m.shape != (d_local, d_local):
                raise DimensionMismatch(f"Term on {nb.label()} has shape {m.shape}, expected {(d_local, d_local)}")
            if np.linalg.norm(m - m.conj().T) > 1e-10:
                raise InvalidMatrix(f"Term on {nb.label()} is not Hermitian")
            ground = float(np.linalg.eigvalsh(m).min())
            self.energy_shifts.append(ground)
            shifted.append(HamiltonianTerm(nb, m - ground * np.eye(d_local)))
        self.terms = shifted

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    @property
    def neighborhoods(self) -> List[Neighborhood]:
        unique = []
        for term in self.terms:
            if term.neighborhood not in unique:
                unique.append(term.neighborhood)
        return unique

    def embedded_terms(self) -> List[np.ndarray]:
        self._check_size()
        return [embed_operator(t.matrix, t.neighborhood.members, self.dims) for t in self.terms]

    def assembled(self) -> np.ndarray:
        """Full matrix, built on first use"""
        if self._assembled is None:
            self._check_size()
            total = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
            for term in self.embedded_terms():
                total += term
            self._assembled = total
        return self._assembled

    def term_ranks(self, tol: Optional[RankTolerance] = None) -> List[int]:
        return [t.rank(tol) for t in self.terms]

    def _check_size(self):
        if self.dimension > self.max_dim:
            raise TooLarge(f"Assembled Hamiltonian of dimension {self.dimension} exceeds ceiling {self.max_dim}")

    def to_dict(self, tol: Optional[RankTolerance] = None) -> Dict[str, Any]:
        return {
            'dims': list(self.dims),
            'neighborhoods': [list(t.neighborhood.members) for t in self.terms],
            'term_ranks': self.term_ranks(tol),
            'energy_shifts': list(self.energy_shifts),
        }


def parent_hamiltonian(s: PureState, ns: NeighborhoodStructure, tol: Optional[RankTolerance] = None,
                       max_dim: int = MAX_AMBIENT_DIM) -> QLHamiltonian:
    """Terms I - projector onto the Schmidt span of each neighborhood"""
    tol = resolve_tol(tol)
    if ns.n_subsystems != s.n_subsystems:
        raise DimensionMismatch(f"Structure is over {ns.n_subsystems} subsystems, state has {s.n_subsystems}")
    if s.dimension > max_dim:
        raise TooLarge(f"Ambient dimension {s.dimension} exceeds ceiling {max_dim}")

    terms = []
    for nb in ns:
        span = schmidt_span(s, nb.members, tol)
        terms.append(HamiltonianTerm(nb, np.eye(span.ambient_dim) - span.projector()))
    return QLHamiltonian(s.dims, terms, max_dim=max_dim)


def _spectrum(h: QLHamiltonian, tol: RankTolerance) -> Tuple[np.ndarray, np.ndarray, float]:
    eigenvalues, eigenvectors = scipy.linalg.eigh(h.assembled())
    scale = float(np.abs(eigenvalues).max()) if eigenvalues.size else 0.0
    return eigenvalues, eigenvectors, tol.threshold((h.dimension, h.dimension), scale)


def ground_kernel(h: QLHamiltonian, tol: Optional[RankTolerance] = None) -> Subspace:
    """Zero-energy eigenspace of the assembled Hamiltonian"""
    tol = resolve_tol(tol)
    eigenvalues, eigenvectors, threshold = _spectrum(h, tol)
    return Subspace(h.dimension, eigenvectors[:, np.abs(eigenvalues) <= threshold], tol)


def frustration_free_check(h: QLHamiltonian, tol: Optional[RankTolerance] = None) -> bool:
    """True iff the ground space of H is annihilated by every term"""
    tol = resolve_tol(tol)
    eigenvalues, eigenvectors, threshold = _spectrum(h, tol)
    ground = eigenvectors[:, eigenvalues <= eigenvalues.min() + threshold]
    for term in h.embedded_terms():
        residual = float(np.linalg.norm(term @ ground))
        if residual > max(threshold, tol.value):
            logger.debug(f"Ground space not annihilated by a term: residual {residual:.3e}")
            return False
    return True


def ground_containment_check(h: QLHamiltonian, s: PureState, tol: Optional[RankTolerance] = None) -> bool:
    """H0 of s relative to the term neighborhoods lies in the kernel of H"""
    tol = resolve_tol(tol)
    if s.dims != h.dims:
        raise DimensionMismatch(f"State dims {s.dims} differ from Hamiltonian dims {h.dims}")
    assembled = h.assembled()
    _, _, threshold = _spectrum(h, tol)
    cutoff = max(threshold, tol.value)

    psi = s.normalize().amplitudes
    if np.linalg.norm(assembled @ psi) > cutoff:
        raise PreconditionFailed("State is not a zero-energy ground state of the Hamiltonian")
    if not h.terms:
        return True

    h0 = intersect_extended_spans(s, h.neighborhoods, tol)
    residuals = np.linalg.norm(assembled @ h0.basis, axis=0)
    return bool(np.all(residuals <= cutoff))

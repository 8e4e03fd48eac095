"""
Tripartite Analysis
Slice matrices, SLOCC canonical form, the Kronecker coefficient matrix, no-go and determinant
tests, and closed-form dimension predictions for a x b x c systems
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from dqls_engine import MAX_AMBIENT_DIM, dqls_subspace
from linalg_core import (
    DqlsError, PreconditionFailed, RankTolerance, nullity, resolve_tol, svd_rank
)
from locality import tripartite_structure
from quantum_state import InvalidState, PureState, schmidt_rank

logger = logging.getLogger(__name__)

DEFAULT_DETERMINANT_THRESHOLD = 1e-8


class SloccDegenerate(DqlsError):
    """Exception raised when the first slice lacks the rank needed for the canonical form"""
    pass


class Prediction(Enum):
    """Closed-form verdict for generic states of given dimensions"""
    DQLS = "DQLS"
    NOT_DQLS = "notDQLS"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DimensionPrediction:
    """Predicted verdict with the rule that produced it"""
    verdict: Prediction
    rule: str
    conjectural: bool = False
    predicted_dim: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verdict': self.verdict.value,
            'rule': self.rule,
            'conjectural': self.conjectural,
            'predicted_dim': self.predicted_dim,
        }


@dataclass(frozen=True, eq=False)
class SloccCanonicalForm:
    """Slices after M_a (x) M_c, with the first slice equal to [I | 0]"""
    slices: List[np.ndarray]
    m_a: np.ndarray
    m_c: np.ndarray


@dataclass(eq=False)
class TripartiteReport:
    """Every tripartite measurement of one state, oriented so that d_a <= d_c"""
    dims: Tuple[int, int, int]
    swapped: bool
    a_slices: List[np.ndarray]
    slocc_applied: bool
    nogo_applies: bool
    predicted: DimensionPrediction
    m_a: Optional[np.ndarray] = None
    m_c: Optional[np.ndarray] = None
    coeff_nullity: Optional[int] = None
    dim_h0_algebraic: Optional[int] = None
    dim_h0_geometric: Optional[int] = None
    dim_h0_nogo: Optional[int] = None
    determinant_value: Optional[float] = None
    determinant_threshold: float = DEFAULT_DETERMINANT_THRESHOLD
    notes: List[str] = field(default_factory=list)

    @property
    def d_bar(self) -> int:
        return self.dims[2] - self.dims[0]

    @property
    def dim_h0(self) -> Optional[int]:
        """Best available measurement: geometric, then algebraic, then no-go"""
        for value in (self.dim_h0_geometric, self.dim_h0_algebraic, self.dim_h0_nogo):
            if value is not None:
                return value
        return None

    @property
    def is_dqls(self) -> Optional[bool]:
        if self.dim_h0 is not None:
            return self.dim_h0 == 1
        if self.determinant_value is not None:
            return self.determinant_value > self.determinant_threshold
        return None

    def disagreements(self) -> List[str]:
        """Cross-method inconsistencies; empty when every method that ran agrees"""
        issues = []
        measured = [(name, value) for name, value in (
            ('geometric', self.dim_h0_geometric),
            ('algebraic', self.dim_h0_algebraic),
            ('nogo', self.dim_h0_nogo),
        ) if value is not None]
        for name, value in measured[1:]:
            if value != measured[0][1]:
                issues.append(f"{measured[0][0]} dim {measured[0][1]} != {name} dim {value}")
        if self.determinant_value is not None and measured:
            det_says = self.determinant_value > self.determinant_threshold
            if det_says != (measured[0][1] == 1):
                issues.append(
                    f"determinant value {self.determinant_value:.3e} disagrees with dim {measured[0][1]}"
                )
        return issues

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dims': list(self.dims),
            'd_bar': self.d_bar,
            'swapped': self.swapped,
            'slocc_applied': self.slocc_applied,
            'nogo_applies': self.nogo_applies,
            'coeff_nullity': self.coeff_nullity,
            'dim_h0_algebraic': self.dim_h0_algebraic,
            'dim_h0_geometric': self.dim_h0_geometric,
            'dim_h0_nogo': self.dim_h0_nogo,
            'dim_h0': self.dim_h0,
            'is_dqls': self.is_dqls,
            'determinant_value': self.determinant_value,
            'predicted': self.predicted.to_dict(),
            'disagreements': self.disagreements(),
            'notes': list(self.notes),
        }


# =============================================================================
# SLICES AND CANONICAL FORM
# =============================================================================

def orient(s: PureState) -> Tuple[PureState, bool]:
    """Swap subsystems 1 and 3 when d_a > d_c"""
    if s.n_subsystems != 3:
        raise InvalidState(f"Tripartite analysis needs exactly 3 subsystems, got {s.n_subsystems}")
    if s.dims[0] > s.dims[2]:
        return s.permute([3, 2, 1]), True
    return s, False


def build_slices(s: PureState) -> List[np.ndarray]:
    """A_i[h, j] = psi[h, i, j], one d_a x d_c matrix per basis state of b"""
    if s.n_subsystems != 3:
        raise InvalidState(f"Slices need exactly 3 subsystems, got {s.n_subsystems}")
    tensor = s.tensor()
    return [np.array(tensor[:, i, :]) for i in range(s.dims[1])]


def slocc_canonical(slices: Sequence[np.ndarray], tol: Optional[RankTolerance] = None) -> SloccCanonicalForm:
    """Local transforms mapping the first slice to [I | 0]"""
    a0 = np.asarray(slices[0], dtype=np.complex128)
    d_a, d_c = a0.shape
    u, mu, vh_full = scipy.linalg.svd(a0, full_matrices=True)
    rank = int(np.sum(mu > resolve_tol(tol).threshold(a0.shape, float(mu[0]))))
    if rank < d_a:
        raise SloccDegenerate(f"First slice has rank {rank} < {d_a}")

    m_a = np.diag(1 / mu[:d_a]) @ u[:, :d_a].conj().T
    m_c = vh_full.conj()
    new_slices = [m_a @ np.asarray(a, dtype=np.complex128) @ m_c.T for a in slices]
    return SloccCanonicalForm(new_slices, m_a, m_c)


def coefficient_matrix(slices: Sequence[np.ndarray]) -> np.ndarray:
    """Stacked rows [A_i^T (x) I_a, -(I_c (x) A_i)] acting on (vec X_a, vec X_c^T)"""
    d_a, d_c = np.asarray(slices[0]).shape
    eye_a, eye_c = np.eye(d_a), np.eye(d_c)
    blocks = [np.hstack([np.kron(a.T, eye_a), -np.kron(eye_c, a)]) for a in map(np.asarray, slices)]
    return np.vstack(blocks)


def coefficient_nullity(slices: Sequence[np.ndarray], tol: Optional[RankTolerance] = None) -> int:
    """Dimension of the solution space of X_a A_i = A_i X_c^T"""
    return nullity(coefficient_matrix(slices), tol)


def coefficient_rank(slices: Sequence[np.ndarray], tol: Optional[RankTolerance] = None) -> int:
    return svd_rank(coefficient_matrix(slices), tol)


def central_qubit_system(canonical: SloccCanonicalForm) -> np.ndarray:
    """
    Reduced homogeneous system for d_b = 2 once A_0 = [I | 0] and A_1 = [A_00 | A_0c].

    Unknowns are stacked as (vec X_aa, vec X_cc, vec X_ca); for generic A_1 with
    0 < d_c - d_a < d_a the matrix has full row rank, leaving (d_c - d_a)^2 solutions.
    """
    if len(canonical.slices) != 2:
        raise PreconditionFailed(f"Central qubit system needs two slices, got {len(canonical.slices)}")
    a1 = np.asarray(canonical.slices[1], dtype=np.complex128)
    d_a, d_c = a1.shape
    d_bar = d_c - d_a
    if d_bar < 1:
        raise PreconditionFailed(f"Central qubit system needs d_c > d_a, got {a1.shape}")
    a00, a0c = a1[:, :d_a], a1[:, d_a:]
    eye_a, eye_bar = np.eye(d_a), np.eye(d_bar)
    upper = np.hstack([
        np.kron(a0c.T, eye_a), -np.kron(eye_bar, a0c), np.zeros((d_bar * d_a, d_bar * d_a)),
    ])
    lower = np.hstack([
        np.kron(a00.T, eye_a) - np.kron(eye_a, a00.T), np.zeros((d_a * d_a, d_bar * d_bar)),
        -np.kron(eye_a, a0c),
    ])
    return np.vstack([upper, lower])


def nogo_check(dims: Sequence[int]) -> Tuple[bool, Optional[int]]:
    """d_a * d_b <= d_c forces dim H0 = d_a^2 for generic states"""
    d_a, d_b, d_c = dims
    if d_a * d_b <= d_c:
        return True, d_a * d_a
    return False, None


# =============================================================================
# DETERMINANT TEST
# =============================================================================

def _local_generator_images(psi: np.ndarray, dims: Tuple[int, int, int]) -> np.ndarray:
    """Columns (X_a (x) I (x) I)psi over a basis of X_a, then (I (x) I (x) X_c)psi over X_c"""
    d_a, d_b, d_c = dims
    psi_a = psi.reshape(d_a, d_b * d_c)
    psi_c = psi.reshape(d_a * d_b, d_c)
    return np.hstack([np.kron(np.eye(d_a), psi_a.T), np.kron(psi_c, np.eye(d_c))])


def _generator_gram(dims: Tuple[int, int, int]) -> np.ndarray:
    """Frobenius Gram matrix of the operators E_kl (x) I (x) I and I (x) I (x) E_mn"""
    d_a, d_b, d_c = dims
    n_a, n_c = d_a * d_a, d_c * d_c
    gram = np.zeros((n_a + n_c, n_a + n_c))
    gram[:n_a, :n_a] = np.eye(n_a) * d_b * d_c
    gram[n_a:, n_a:] = np.eye(n_c) * d_a * d_b
    diag_a = np.eye(d_a).reshape(-1)
    diag_c = np.eye(d_c).reshape(-1)
    cross = d_b * np.outer(diag_a, diag_c)
    gram[:n_a, n_a:] = cross
    gram[n_a:, :n_a] = cross.T
    return gram


def determinant_test(s: PureState, tol: Optional[RankTolerance] = None) -> float:
    """Smallest singular value of M(psi)^T V, with V an isometry onto the local generator span"""
    tol = resolve_tol(tol)
    if s.n_subsystems != 3:
        raise InvalidState(f"Determinant test needs exactly 3 subsystems, got {s.n_subsystems}")
    d_a, d_b, d_c = s.dims
    if not (d_a * d_b > d_c and d_a <= d_c):
        raise PreconditionFailed(f"Determinant test needs d_a*d_b > d_c and d_a <= d_c, got {s.dims}")

    psi = s.normalize().amplitudes
    images = _local_generator_images(psi, s.dims)

    # orthonormalize the span of the generators without forming d^2-length vectors
    eigenvalues, eigenvectors = scipy.linalg.eigh(_generator_gram(s.dims))
    keep = eigenvalues > tol.threshold((len(eigenvalues),) * 2, float(eigenvalues.max()))
    isometry_coords = eigenvectors[:, keep] / np.sqrt(eigenvalues[keep])
    reduced = images @ isometry_coords

    rows, cols = reduced.shape
    if cols > rows:
        return 0.0
    singular_values = scipy.linalg.svd(reduced, compute_uv=False)
    return float(singular_values.min())


# =============================================================================
# PREDICTIONS
# =============================================================================

def predict(dims: Sequence[int]) -> DimensionPrediction:
    """Closed-form verdict for generic states; outer dimensions may come in either order"""
    d_a, d_b, d_c = (int(d) for d in dims)
    if d_a > d_c:
        d_a, d_c = d_c, d_a
    return _predict(d_a, d_b, d_c)


@lru_cache(maxsize=None)
def _proven(d_a: int, d_b: int, d_c: int) -> Optional[Tuple[Prediction, str, Optional[int]]]:
    """Verdicts that follow from proven rules, or None"""
    if d_a > d_c:
        d_a, d_c = d_c, d_a
    if d_b == 1:
        return None

    if d_a * d_b <= d_c:
        return Prediction.NOT_DQLS, "no-go: d_a*d_b <= d_c gives dim H0 = d_a^2", d_a * d_a

    if d_b == 2:
        if d_c == d_a:
            return Prediction.NOT_DQLS, "central qubit, d_c = d_a: dim H0 = d_a", d_a
        if d_c == d_a + 1:
            return Prediction.DQLS, "central qubit, d_c = d_a + 1", 1
        d_bar = d_c - d_a
        return Prediction.NOT_DQLS, "central qubit: dim H0 = min(d_a^2, d_bar^2)", min(d_a * d_a, d_bar * d_bar)

    if d_c == d_a:
        return Prediction.DQLS, "d_c = d_a with d_b > 2", 1
    if d_c == d_a + 1:
        return Prediction.DQLS, "d_c = d_a + 1 with d_b > 2", 1
    if d_c % d_a == 0 and 1 < d_c // d_a < d_b:
        return Prediction.DQLS, "d_c = n*d_a with 1 < n < d_b", 1

    d_bar = d_c - d_a
    if 0 < d_bar < d_a * (d_b - 1):
        reduced = _proven(d_a, d_b - 1, d_bar)
        if reduced is not None and reduced[0] is Prediction.DQLS:
            return Prediction.DQLS, f"block reduction from ({min(d_a, d_bar)},{d_b - 1},{max(d_a, d_bar)})", 1

    lifted = _proven(d_a, d_b - 1, d_c)
    if lifted is not None and lifted[0] is Prediction.DQLS:
        return Prediction.DQLS, f"dimension lift from ({d_a},{d_b - 1},{d_c})", 1
    return None


def _predict(d_a: int, d_b: int, d_c: int) -> DimensionPrediction:
    proven = _proven(d_a, d_b, d_c)
    if proven is not None:
        verdict, rule, dim = proven
        return DimensionPrediction(verdict, rule, conjectural=False, predicted_dim=dim)

    if d_a <= d_b:
        if d_c < d_a * d_b:
            return DimensionPrediction(Prediction.DQLS, "conjecture: d_c < d_a*d_b", conjectural=True, predicted_dim=1)
        return DimensionPrediction(Prediction.NOT_DQLS, "conjecture: d_c >= d_a*d_b", conjectural=True)

    bound = d_a * d_b - d_a // d_b
    if d_c < bound - 1:
        return DimensionPrediction(
            Prediction.DQLS, "conjecture: d_c < d_a*d_b - floor(d_a/d_b)", conjectural=True, predicted_dim=1
        )
    if d_c == bound - 1:
        return DimensionPrediction(
            Prediction.UNKNOWN, "conjecture boundary: within one of d_a*d_b - floor(d_a/d_b)", conjectural=True
        )
    return DimensionPrediction(
        Prediction.NOT_DQLS, "conjecture: exceptional band d_a*d_b - floor(d_a/d_b) <= d_c", conjectural=True
    )


# =============================================================================
# FULL PIPELINE
# =============================================================================

def analyze(s: PureState, tol: Optional[RankTolerance] = None,
            geometric_max_dim: int = MAX_AMBIENT_DIM,
            determinant_threshold: float = DEFAULT_DETERMINANT_THRESHOLD,
            run_determinant: bool = True) -> TripartiteReport:
    """Run every applicable tripartite method and collect the results"""
    tol = resolve_tol(tol)
    state, swapped = orient(s)
    dims = state.dims
    d_a, d_b, d_c = dims
    slices = build_slices(state)
    nogo, _ = nogo_check(dims)

    report = TripartiteReport(
        dims=dims,
        swapped=swapped,
        a_slices=slices,
        slocc_applied=False,
        nogo_applies=nogo,
        predicted=predict(dims),
        determinant_threshold=determinant_threshold,
    )
    if swapped:
        report.notes.append("subsystems 1 and 3 swapped so that d_a <= d_c")

    rank_a = schmidt_rank(state, [1], tol)
    rank_c = schmidt_rank(state, [3], tol)
    outer_full_rank = rank_a == d_a and rank_c == d_c

    try:
        canonical = slocc_canonical(slices, tol)
        report.a_slices = canonical.slices
        report.m_a, report.m_c = canonical.m_a, canonical.m_c
        report.slocc_applied = True
    except SloccDegenerate as e:
        report.notes.append(f"SLOCC canonical form skipped: {e}")

    # raw slices: the canonical transform can be ill-conditioned
    report.coeff_nullity = coefficient_nullity(slices, tol)
    if outer_full_rank:
        report.dim_h0_algebraic = report.coeff_nullity
    else:
        report.notes.append(f"algebraic dimension not applicable: outer ranks ({rank_a}, {rank_c})")

    if nogo and schmidt_rank(state, [1, 2], tol) == d_a * d_b:
        report.dim_h0_nogo = d_a * rank_a

    if run_determinant and d_a * d_b > d_c and outer_full_rank:
        report.determinant_value = determinant_test(state, tol)

    if state.dimension <= geometric_max_dim:
        report.dim_h0_geometric = dqls_subspace(state, tripartite_structure(), tol).dim_h0

    issues = report.disagreements()
    if issues:
        logger.warning(f"Cross-method disagreement at dims {dims}: {'; '.join(issues)}")
    return report

"""
Dissipative Dynamics
Quasi-local Lindblad generators, spectral stability certificates, master-equation
integration and the approximate GHZ stabilization experiment
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from dqls_engine import dqls_subspace, schmidt_span
from linalg_core import (
    DimensionMismatch, DqlsError, PreconditionFailed, RankTolerance, SeedLike, TooLarge,
    kernel, make_rng, random_unitary, resolve_tol, unvec, vec
)
from locality import Neighborhood, NeighborhoodStructure, embed_operator
from quantum_state import DensityMatrix, PureState, ghz_state

logger = logging.getLogger(__name__)

MAX_SUPEROPERATOR_DIM = 64
DEFAULT_MAX_RESAMPLES = 10
CERTIFICATE_TOL = 1e-8
DT_SAFETY = 0.1
TRACE_DRIFT_LIMIT = 1e-6


class NotDQLSTarget(DqlsError):
    """Exception raised when asked to stabilize a state whose DQLS subspace is not one-dimensional"""
    pass


class CertificateFailed(DqlsError):
    """Exception raised when no sampled generator passes the spectral certificate"""
    pass


class IntegrationUnstable(DqlsError):
    """Exception raised when the integrated trajectory drifts off unit trace"""
    pass


@dataclass(frozen=True, eq=False)
class LindbladTerm:
    """Noise operator acting on one neighborhood"""
    neighborhood: Neighborhood
    operator: np.ndarray


def dissipator(l_op: np.ndarray) -> np.ndarray:
    """Column-stacked superoperator of rho -> L rho L^dag - {L^dag L, rho}/2"""
    d = l_op.shape[0]
    eye = np.eye(d)
    ldl = l_op.conj().T @ l_op
    return np.kron(l_op.conj(), l_op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    eye = np.eye(d)
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


@dataclass(eq=False)
class Liouvillian:
    """Dense superoperator with the terms it was assembled from"""
    dims: Tuple[int, ...]
    superop: np.ndarray
    lindblad_terms: List[LindbladTerm]
    hamiltonian: Optional[np.ndarray] = None
    target: Optional[PureState] = None
    certificate: Optional['GasCertificate'] = None

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @classmethod
    def assemble(cls, dims: Sequence[int], lindblad_terms: Sequence[LindbladTerm],
                 hamiltonian: Optional[np.ndarray] = None, target: Optional[PureState] = None,
                 max_dim: int = MAX_SUPEROPERATOR_DIM) -> 'Liouvillian':
        dims = tuple(int(d) for d in dims)
        d = int(np.prod(dims))
        if d > max_dim:
            raise TooLarge(f"Superoperator for dimension {d} exceeds ceiling {max_dim}")
        superop = np.zeros((d * d, d * d), dtype=np.complex128)
        if hamiltonian is not None:
            hamiltonian = np.asarray(hamiltonian, dtype=np.complex128)
            if hamiltonian.shape != (d, d):
                raise DimensionMismatch(f"Hamiltonian shape {hamiltonian.shape} does not match dimension {d}")
            superop += hamiltonian_superop(hamiltonian)
        for term in lindblad_terms:
            superop += dissipator(embed_operator(term.operator, term.neighborhood.members, dims))
        return cls(dims, superop, list(lindblad_terms), hamiltonian, target)

    def embedded_operators(self) -> List[np.ndarray]:
        return [embed_operator(t.operator, t.neighborhood.members, self.dims) for t in self.lindblad_terms]

    def trace_preservation_residual(self) -> float:
        return float(np.linalg.norm(vec(np.eye(self.dim)).conj() @ self.superop))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.superop @ vec(rho), self.dim)


@dataclass(frozen=True)
class GasCertificate:
    """Spectral evidence that the target is the unique attracting steady state"""
    kernel_dim: int
    spectral_abscissa: float
    spectral_gap: float
    zero_eig_nondegenerate: bool
    steady_state_fidelity: float

    @property
    def passes(self) -> bool:
        return (
            self.kernel_dim == 1
            and self.spectral_abscissa <= CERTIFICATE_TOL
            and self.spectral_gap > CERTIFICATE_TOL
            and self.steady_state_fidelity >= 1 - CERTIFICATE_TOL
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kernel_dim': self.kernel_dim,
            'spectral_abscissa': self.spectral_abscissa,
            'spectral_gap': self.spectral_gap,
            'zero_eig_nondegenerate': self.zero_eig_nondegenerate,
            'steady_state_fidelity': self.steady_state_fidelity,
            'passes': self.passes,
        }


def certify(l: Liouvillian, target: PureState, tol: Optional[RankTolerance] = None) -> GasCertificate:
    """Kernel dimension, spectral abscissa, gap and steady-state fidelity of a generator"""
    tol = resolve_tol(tol)
    steady = kernel(l.superop, tol)
    kernel_dim = steady.dim
    eigenvalues = scipy.linalg.eigvals(l.superop)

    by_magnitude = np.argsort(np.abs(eigenvalues))
    rest = eigenvalues[by_magnitude[max(kernel_dim, 1):]]
    abscissa = float(eigenvalues.real.max())
    gap = float(-rest.real.max()) if rest.size else math.inf

    fidelity = 0.0
    if kernel_dim >= 1:
        rho = unvec(steady.basis[:, 0], l.dim)
        trace = np.trace(rho)
        if abs(trace) > 0:
            rho = rho / trace
            rho = (rho + rho.conj().T) / 2
            psi = target.normalize().amplitudes
            fidelity = float(np.clip(np.vdot(psi, rho @ psi).real, 0.0, 1.0))

    return GasCertificate(
        kernel_dim=kernel_dim,
        spectral_abscissa=abscissa,
        spectral_gap=gap,
        zero_eig_nondegenerate=kernel_dim == 1,
        steady_state_fidelity=fidelity,
    )


# =============================================================================
# STABILIZER CONSTRUCTION
# =============================================================================

def _sweep_terms(s: PureState, ns: NeighborhoodStructure, rng: np.random.Generator,
                 tol: RankTolerance) -> List[LindbladTerm]:
    """|eta_j><w_jk| for each neighborhood, with eta_j random inside the Schmidt span"""
    terms = []
    for nb in ns:
        span = schmidt_span(s, nb.members, tol)
        outside = span.complement()
        if outside.dim == 0:
            continue
        coeffs = rng.standard_normal(span.dim) + 1j * rng.standard_normal(span.dim)
        eta = span.basis @ (coeffs / np.linalg.norm(coeffs))
        for k in range(outside.dim):
            terms.append(LindbladTerm(nb, np.outer(eta, outside.basis[:, k].conj())))
    return terms


def build_stabilizer(s: PureState, ns: NeighborhoodStructure, seed: SeedLike = None,
                     tol: Optional[RankTolerance] = None, max_resamples: int = DEFAULT_MAX_RESAMPLES,
                     max_dim: int = MAX_SUPEROPERATOR_DIM, require_dqls: bool = True) -> Liouvillian:
    """Purely dissipative quasi-local generator in standard form for the target state"""
    tol = resolve_tol(tol)
    if s.dimension > max_dim:
        raise TooLarge(f"Superoperator for dimension {s.dimension} exceeds ceiling {max_dim}")

    verdict = dqls_subspace(s, ns, tol)
    if not verdict.is_dqls and require_dqls:
        raise NotDQLSTarget(f"Target has a {verdict.dim_h0}-dimensional DQLS subspace; no QL generator can make it GAS")

    rng = make_rng(seed)
    target = s.normalize()
    last_certificate = None
    for attempt in range(max_resamples + 1):
        terms = _sweep_terms(target, ns, rng, tol)
        l = Liouvillian.assemble(target.dims, terms, target=target, max_dim=max_dim)
        if not require_dqls:
            return l
        last_certificate = certify(l, target, tol)
        if last_certificate.passes:
            l.certificate = last_certificate
            if attempt:
                logger.info(f"Stabilizer certified after {attempt} resample(s)")
            return l
        logger.warning(f"Stabilizer attempt {attempt} failed certification: {last_certificate.to_dict()}")

    raise CertificateFailed(
        f"No certified generator after {max_resamples} resamples; last spectrum summary: {last_certificate.to_dict()}"
    )


def standard_form_check(l: Liouvillian, s: PureState, tol: Optional[RankTolerance] = None) -> bool:
    """Every noise operator annihilates s and s is an eigenvector of H"""
    tol = resolve_tol(tol)
    psi = s.normalize().amplitudes
    for op in l.embedded_operators():
        if np.linalg.norm(op @ psi) > tol.value * max(1.0, np.linalg.norm(op, 2)) * len(psi):
            return False
    if l.hamiltonian is not None:
        h_psi = l.hamiltonian @ psi
        energy = np.vdot(psi, h_psi)
        if np.linalg.norm(h_psi - energy * psi) > tol.value * max(1.0, np.linalg.norm(l.hamiltonian, 2)) * len(psi):
            return False
    return True


def gauge_transform(l: Liouvillian, shifts: Sequence[complex]) -> Liouvillian:
    """L_k -> L_k + c_k I with the compensating Hamiltonian; the generator is unchanged"""
    if len(shifts) != len(l.lindblad_terms):
        raise DimensionMismatch(f"Need {len(l.lindblad_terms)} shifts, got {len(shifts)}")
    d = l.dim
    hamiltonian = np.zeros((d, d), dtype=np.complex128) if l.hamiltonian is None else l.hamiltonian.copy()
    new_terms = []
    for term, c in zip(l.lindblad_terms, shifts):
        full = embed_operator(term.operator, term.neighborhood.members, l.dims)
        hamiltonian -= 0.5j * (np.conj(c) * full - c * full.conj().T)
        local_eye = np.eye(term.operator.shape[0])
        new_terms.append(LindbladTerm(term.neighborhood, term.operator + c * local_eye))
    return Liouvillian.assemble(l.dims, new_terms, hamiltonian, target=l.target, max_dim=max(d, MAX_SUPEROPERATOR_DIM))


# =============================================================================
# INTEGRATION
# =============================================================================

@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    fidelity: float
    trace: float
    min_eigenvalue: float


@dataclass
class Trajectory:
    """Sampled solution of the master equation"""
    points: List[TrajectoryPoint]
    substeps: int
    final_state: np.ndarray

    @property
    def final_fidelity(self) -> float:
        return self.points[-1].fidelity

    @property
    def max_trace_drift(self) -> float:
        return max(abs(p.trace - self.points[0].trace) for p in self.points)

    def to_rows(self) -> List[List[float]]:
        return [[p.t, p.fidelity, p.trace, p.min_eigenvalue] for p in self.points]


def rk4_propagator(superop: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of a linear system as a matrix"""
    step = h * superop
    identity = np.eye(superop.shape[0], dtype=np.complex128)
    propagator = identity.copy()
    term = identity
    for k in range(1, 5):
        term = term @ step / k
        propagator = propagator + term
    return propagator


def evolve(l: Liouvillian, rho0: DensityMatrix, t_final: float, dt: float,
           target: Optional[PureState] = None, record_every: int = 1) -> Trajectory:
    """Fixed-step fourth-order integration of d rho/dt = L[rho]"""
    if dt <= 0 or t_final < dt:
        raise PreconditionFailed(f"Need dt > 0 and t_final >= dt, got dt={dt}, t_final={t_final}")
    target = target if target is not None else l.target
    if target is None:
        raise PreconditionFailed("A target state is required to report fidelities")
    if rho0.dimension != l.dim:
        raise DimensionMismatch(f"Initial state dimension {rho0.dimension} does not match generator dimension {l.dim}")

    norm = float(np.linalg.norm(l.superop, 2))
    substeps = max(1, math.ceil(dt * norm / DT_SAFETY)) if norm > 0 else 1
    propagator = np.linalg.matrix_power(rk4_propagator(l.superop, dt / substeps), substeps)
    psi = target.normalize().amplitudes

    def sample(t: float, v: np.ndarray) -> TrajectoryPoint:
        rho = unvec(v, l.dim)
        hermitian = (rho + rho.conj().T) / 2
        return TrajectoryPoint(
            t=t,
            fidelity=float(np.vdot(psi, rho @ psi).real),
            trace=float(np.trace(rho).real),
            min_eigenvalue=float(np.linalg.eigvalsh(hermitian).min()),
        )

    v = vec(rho0.matrix)
    points = [sample(0.0, v)]
    n_steps = int(round(t_final / dt))
    for step in range(1, n_steps + 1):
        v = propagator @ v
        if step % record_every == 0 or step == n_steps:
            point = sample(step * dt, v)
            if abs(point.trace - points[0].trace) > TRACE_DRIFT_LIMIT:
                raise IntegrationUnstable(
                    f"Trace drifted to {point.trace:.10f} at t={point.t:.4g}; try a smaller dt"
                )
            points.append(point)
    return Trajectory(points, substeps, unvec(v, l.dim))


# =============================================================================
# APPROXIMATE GHZ STABILIZATION
# =============================================================================

class RootMode(Enum):
    """How the small unitary rotation of GHZ is produced"""
    EXPONENTIAL = "exponential"
    INTEGER_ROOT = "integer-root"


@dataclass(frozen=True)
class PracticalStabilizationReport:
    """Outcome of perturbing GHZ_4 into a nearby DQLS state"""
    epsilon: float
    seed: Optional[int]
    mode: RootMode
    effective_epsilon: float
    h_norm: float
    fidelity: float
    bound: Optional[float]
    bound_satisfied: Optional[bool]
    target_was_dqls: bool
    dim_h0: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'epsilon': self.epsilon,
            'seed': self.seed,
            'mode': self.mode.value,
            'effective_epsilon': self.effective_epsilon,
            'h_norm': self.h_norm,
            'fidelity': self.fidelity,
            'bound': self.bound,
            'bound_satisfied': self.bound_satisfied,
            'target_was_dqls': self.target_was_dqls,
            'dim_h0': self.dim_h0,
        }


def fidelity_bound(epsilon: float, h_norm: float) -> Optional[float]:
    """|1 - x/(1-x)|^2 with x = epsilon*||H||, meaningful only while x < 1/2"""
    x = epsilon * h_norm
    if x >= 0.5:
        return None
    return (1 - x / (1 - x)) ** 2


def principal_log_hamiltonian(u: np.ndarray) -> np.ndarray:
    """Hermitian H with U = exp(iH) and eigenvalues in [0, 2*pi)"""
    t, z = scipy.linalg.schur(u, output='complex')
    phases = np.mod(np.angle(np.diag(t)), 2 * np.pi)
    h = z @ np.diag(phases) @ z.conj().T
    return (h + h.conj().T) / 2


def unitary_power(u: np.ndarray, exponent: float) -> np.ndarray:
    """U**exponent = exp(i*exponent*H) on the principal branch of the logarithm"""
    return scipy.linalg.expm(1j * exponent * principal_log_hamiltonian(u))


def practical_stabilization_experiment(epsilon: float, seed: Optional[int] = None,
                                       tol: Optional[RankTolerance] = None,
                                       mode: RootMode = RootMode.EXPONENTIAL) -> PracticalStabilizationReport:
    """Rotate GHZ_4 by a small random unitary and check the image is DQLS and close to GHZ_4"""
    if not 0 <= epsilon <= 0.2:
        raise PreconditionFailed(f"epsilon must lie in [0, 0.2], got {epsilon}")
    tol = resolve_tol(tol)
    rng = make_rng(seed)
    ghz = ghz_state(4)
    ns = NeighborhoodStructure.from_lists(4, [[1, 2, 3], [2, 3, 4]])

    u = random_unitary(16, rng)
    h = principal_log_hamiltonian(u)
    h_norm = float(np.linalg.norm(h, 2))
    if mode is RootMode.INTEGER_ROOT and epsilon > 0:
        effective = 1.0 / math.ceil(1.0 / epsilon)
    else:
        effective = float(epsilon)

    psi = unitary_power(u, effective) @ ghz.amplitudes
    perturbed = PureState(ghz.dims, psi).normalize()
    fidelity = abs(np.vdot(ghz.amplitudes, perturbed.amplitudes)) ** 2
    bound = fidelity_bound(effective, h_norm)
    verdict = dqls_subspace(perturbed, ns, tol)

    report = PracticalStabilizationReport(
        epsilon=float(epsilon),
        seed=seed,
        mode=mode,
        effective_epsilon=effective,
        h_norm=h_norm,
        fidelity=float(fidelity),
        bound=bound,
        bound_satisfied=None if bound is None else bool(fidelity >= bound - 1e-12),
        target_was_dqls=verdict.is_dqls,
        dim_h0=verdict.dim_h0,
    )
    if epsilon > 0 and not verdict.is_dqls:
        logger.warning(f"Perturbed GHZ state is not DQLS (seed={seed}, dim H0={verdict.dim_h0})")
    return report

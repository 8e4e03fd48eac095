"""
Multipartite Decision Procedure
Extended no-go test and the four-step reduction to tripartite certificates
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dqls_engine import MAX_AMBIENT_DIM, dqls_subspace, intersect_extended_spans
from linalg_core import DimensionMismatch, RankTolerance, resolve_tol
from locality import Neighborhood, NeighborhoodStructure
from quantum_state import PureState, schmidt_rank
from tripartite import analyze

logger = logging.getLogger(__name__)


class Outcome(Enum):
    """Result of the decision procedure"""
    DQLS = "DQLS"
    NOT_DQLS = "notDQLS"
    INCONCLUSIVE = "inconclusive"


@dataclass
class DecisionTrace:
    """Record of every step the decision procedure applied"""
    ignored_neighborhoods: List[Tuple[int, ...]] = field(default_factory=list)
    leftover_subsystems: Tuple[int, ...] = ()
    pair_found: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    coarse_grained_pair: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    outcome: Outcome = Outcome.INCONCLUSIVE
    reasons: List[str] = field(default_factory=list)
    dim_h0: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ignored_neighborhoods': [list(nb) for nb in self.ignored_neighborhoods],
            'leftover_subsystems': list(self.leftover_subsystems),
            'pair_found': [list(nb) for nb in self.pair_found] if self.pair_found else None,
            'coarse_grained_pair': [list(nb) for nb in self.coarse_grained_pair] if self.coarse_grained_pair else None,
            'outcome': self.outcome.value,
            'reasons': list(self.reasons),
            'dim_h0': self.dim_h0,
        }


def _check(s: PureState, ns: NeighborhoodStructure):
    if ns.n_subsystems != s.n_subsystems:
        raise DimensionMismatch(f"Structure is over {ns.n_subsystems} subsystems, state has {s.n_subsystems}")


def spans_everything(s: PureState, nb: Neighborhood, tol: Optional[RankTolerance] = None) -> bool:
    """Reduced state on nb has full rank, so its extended span is the whole space"""
    return schmidt_rank(s, nb.members, tol) == nb.local_dim(s.dims)


def extended_nogo(s: PureState, ns: NeighborhoodStructure, tol: Optional[RankTolerance] = None) -> bool:
    """True iff every neighborhood is no larger than its complement and has a full-rank reduced state"""
    _check(s, ns)
    total = s.dimension
    for nb in ns:
        d_local = nb.local_dim(s.dims)
        if d_local > total // d_local:
            return False
        if not spans_everything(s, nb, tol):
            return False
    return True


# =============================================================================
# PAIR CERTIFICATES
# =============================================================================

def pair_dimension(s: PureState, first: Sequence[int], second: Sequence[int],
                   tol: Optional[RankTolerance] = None,
                   max_dim: int = MAX_AMBIENT_DIM) -> Tuple[Optional[int], str]:
    """dim H0 relative to two neighborhoods covering every subsystem, or None if unmeasurable"""
    tol = resolve_tol(tol)
    first, second = set(first), set(second)
    block_a = sorted(first - second)
    block_b = sorted(first & second)
    block_c = sorted(second - first)

    if not block_b:
        if s.dimension > max_dim:
            return None, "disjoint pair beyond the dense ceiling"
        h0 = intersect_extended_spans(s, [Neighborhood(tuple(first)), Neighborhood(tuple(second))], tol)
        return h0.dim, "direct intersection of a disjoint pair"

    grouped = s.regroup([block_a, block_b, block_c])
    report = analyze(grouped, tol, geometric_max_dim=max_dim, run_determinant=False)
    label = f"tripartite grouping {tuple(block_a)}|{tuple(block_b)}|{tuple(block_c)} with dims {report.dims}"
    if report.disagreements():
        logger.warning(f"Methods disagree for {label}: {report.disagreements()}")
        return None, f"{label}: methods disagree"
    return report.dim_h0, label


def two_block_coarse_grainings(neighborhoods: Sequence[Neighborhood],
                               n_subsystems: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """All (A, B) obtained by splitting the neighborhoods into two groups and taking unions"""
    everything = set(range(1, n_subsystems + 1))
    seen = set()
    pairs = []
    for labels in product((0, 1), repeat=len(neighborhoods)):
        if labels[0] == 1 or len(set(labels)) < 2:
            continue
        block_a = set().union(*(nb.members for nb, g in zip(neighborhoods, labels) if g == 0))
        block_b = set().union(*(nb.members for nb, g in zip(neighborhoods, labels) if g == 1))
        if block_a == everything or block_b == everything or block_a | block_b != everything:
            continue
        key = tuple(sorted((tuple(sorted(block_a)), tuple(sorted(block_b)))))
        if key not in seen:
            seen.add(key)
            pairs.append(key)
    return pairs


# =============================================================================
# DECISION PROCEDURE
# =============================================================================

def decide(s: PureState, ns: NeighborhoodStructure, tol: Optional[RankTolerance] = None,
           max_dim: int = MAX_AMBIENT_DIM) -> DecisionTrace:
    """Four-step reduction with a direct fallback for small systems"""
    tol = resolve_tol(tol)
    _check(s, ns)
    trace = DecisionTrace()
    everything = set(range(1, s.n_subsystems + 1))

    # step (i)
    remaining = []
    for nb in ns:
        d_local = nb.local_dim(s.dims)
        if d_local <= s.dimension // d_local and spans_everything(s, nb, tol):
            trace.ignored_neighborhoods.append(nb.members)
        else:
            remaining.append(nb)
    if trace.ignored_neighborhoods:
        trace.reasons.append(
            f"step (i): ignored {len(trace.ignored_neighborhoods)} neighborhood(s) with full-rank reduced states"
        )
    if not remaining:
        trace.outcome = Outcome.NOT_DQLS
        trace.dim_h0 = s.dimension
        trace.reasons.append("step (i): extended no-go, every extended span is the whole space")
        return trace

    # step (ii)
    for first, second in combinations(remaining, 2):
        if set(first.members) | set(second.members) != everything:
            continue
        dim, label = pair_dimension(s, first.members, second.members, tol, max_dim)
        logger.debug(f"step (ii) pair {first.label()} {second.label()}: dim {dim} via {label}")
        if dim == 1:
            trace.pair_found = (first.members, second.members)
            trace.outcome = Outcome.DQLS
            trace.dim_h0 = 1
            trace.reasons.append(f"step (ii): pair {first.label()},{second.label()} is DQLS by {label}")
            return trace

    # step (iii)
    covered = set().union(*(nb.members for nb in remaining))
    trace.leftover_subsystems = tuple(sorted(everything - covered))
    if trace.leftover_subsystems:
        trace.outcome = Outcome.NOT_DQLS
        trace.reasons.append(
            f"step (iii): subsystems {list(trace.leftover_subsystems)} are only constrained by ignored neighborhoods"
        )
        return trace

    # step (iv)
    for block_a, block_b in two_block_coarse_grainings(remaining, s.n_subsystems):
        dim, label = pair_dimension(s, block_a, block_b, tol, max_dim)
        if dim is not None and dim > 1:
            trace.coarse_grained_pair = (block_a, block_b)
            trace.outcome = Outcome.NOT_DQLS
            trace.reasons.append(
                f"step (iv): coarse-grained pair {list(block_a)},{list(block_b)} has dim H0 = {dim} by {label}"
            )
            return trace

    if s.dimension <= max_dim:
        verdict = dqls_subspace(s, ns, tol, max_dim)
        trace.dim_h0 = verdict.dim_h0
        trace.outcome = Outcome.DQLS if verdict.is_dqls else Outcome.NOT_DQLS
        trace.reasons.append(f"fallback: direct computation gives dim H0 = {verdict.dim_h0}")
        return trace

    trace.reasons.append("no step certified a verdict and the system exceeds the dense ceiling")
    return trace

"""Classification of operators against a cone: preserving/improving maps,
operator domination, ergodicity, and the semigroup-generator classes.

All tests reduce to the operator's matrix in the cone's generator basis.  A
map preserves the cone iff that matrix is real with nonnegative entries, and
improves it iff the entries are strictly positive; both follow from linearity
over the generators.  Ergodicity and irreducibility are digraph reachability
on the support pattern of that matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .cones import SelfDualCone
from .errors import InputNotInClass, NotPreserving, NotRealForm
from .numerics import DEFAULT_TOL, LinearOperator, hermitian_eig

Witness = tuple[int, int, complex]


@dataclass(frozen=True)
class PositivityReport:
    """Outcome of classifying one operator against one cone."""

    preserving: bool
    improving: bool
    real_form: bool
    witness: Witness | None = None

    def to_payload(self) -> dict:
        out = {
            "preserving": self.preserving,
            "improving": self.improving,
            "real_form": self.real_form,
        }
        if self.witness is not None:
            i, j, v = self.witness
            out["witness"] = {"row": i, "col": j, "re": v.real, "im": v.imag}
        return out


def classify(op: LinearOperator, cone: SelfDualCone, tol: float = DEFAULT_TOL) -> PositivityReport:
    """Decide whether an operator preserves / improves the cone.

    Tested on generators only: the matrix M of the operator in the generator
    basis must be real and entrywise >= -tol*scale to preserve, and entrywise
    >= +tol*scale to improve.  Entries inside the +-tol*scale band block
    `improving` without voiding `preserving`.
    """
    m = cone.operator_coords(op)
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return PositivityReport(preserving=True, improving=False, real_form=True)
    thresh = tol * scale

    imax = np.unravel_index(np.argmax(np.abs(m.imag)), m.shape)
    real_form = bool(np.abs(m.imag).max() <= thresh)
    rmin = np.unravel_index(np.argmin(m.real), m.shape)
    preserving = real_form and bool(m.real.min() >= -thresh)
    improving = real_form and bool(m.real.min() >= thresh)

    witness: Witness | None = None
    if not real_form:
        witness = (int(imax[0]), int(imax[1]), complex(m[imax]))
    elif not preserving or not improving:
        witness = (int(rmin[0]), int(rmin[1]), complex(m[rmin]))
    return PositivityReport(preserving, improving, real_form, witness)


def dominates(a: LinearOperator, b: LinearOperator, cone: SelfDualCone,
              tol: float = DEFAULT_TOL) -> bool:
    """Operator order A >= B: both fix the real form and A-B preserves the cone."""
    for name, op in (("first", a), ("second", b)):
        m = cone.operator_coords(op)
        scale = max(float(np.abs(m).max()), 1e-300)
        if np.abs(m.imag).max() > tol * scale:
            raise NotRealForm(f"{name} operand does not preserve the real form")
    return classify(a - b, cone, tol).preserving


def _reach_table(out_edges: list[list[int]], n: int) -> np.ndarray:
    """k_table[i, j] = least walk length from j to i, or -1 if unreachable."""
    table = -np.ones((n, n), dtype=int)
    for j in range(n):
        table[j, j] = 0
        queue = deque([j])
        while queue:
            v = queue.popleft()
            for w in out_edges[v]:
                if table[w, j] < 0:
                    table[w, j] = table[v, j] + 1
                    queue.append(w)
    return table


@dataclass(frozen=True)
class ErgodicityReport:
    """Reachability structure of a cone-preserving operator.

    ``k_table[i, j]`` is the least k with <u_i|A^k u_j> > 0 (BFS distance in
    the support digraph, k=0 on the diagonal), or -1 when no power connects
    the pair.  ``borderline`` lists entries whose magnitude fell inside the
    edge threshold band and were therefore not counted as edges.
    """

    ergodic: bool
    k_table: np.ndarray
    failing_pair: tuple[int, int] | None = None
    borderline: tuple[Witness, ...] = ()

    @property
    def max_k(self) -> int:
        return int(self.k_table.max())

    def to_payload(self) -> dict:
        out: dict = {"ergodic": self.ergodic, "max_k": self.max_k}
        if self.failing_pair is not None:
            out["failing_pair"] = list(self.failing_pair)
        if self.borderline:
            out["borderline"] = [
                {"row": i, "col": j, "re": v.real, "im": v.imag}
                for i, j, v in self.borderline
            ]
        n = self.k_table.shape[0]
        if n <= 16:
            out["k_table"] = [[int(k) for k in row] for row in self.k_table]
        return out


def is_ergodic(op: LinearOperator, cone: SelfDualCone, tol: float = DEFAULT_TOL) -> ErgodicityReport:
    """Ergodicity of a cone-preserving operator.

    Builds the digraph with an edge j->i whenever the generator-basis entry
    M[i, j] clears tol*max|M|, then BFS-checks that every ordered generator
    pair is connected by some power; walk lengths never need to exceed dim-1.
    """
    report = classify(op, cone, tol)
    if not report.preserving:
        raise NotPreserving("ergodicity is defined for cone-preserving operators only")
    m = cone.operator_coords(op).real
    n = m.shape[0]
    scale = float(np.abs(m).max())
    thresh = tol * scale
    out_edges = [list(np.nonzero(m[:, j] > thresh)[0]) for j in range(n)]
    borderline = tuple(
        (int(i), int(j), complex(m[i, j]))
        for i, j in zip(*np.nonzero((m > 0.0) & (m <= thresh)))
    )
    table = _reach_table(out_edges, n)
    missing = np.argwhere(table < 0)
    failing = (int(missing[0][0]), int(missing[0][1])) if missing.size else None
    return ErgodicityReport(failing is None, table, failing, borderline)


def _metzler_offdiag_ok(m: np.ndarray, thresh: float) -> tuple[bool, Witness | None]:
    off = m.real.copy()
    np.fill_diagonal(off, -np.inf)
    worst = np.unravel_index(np.argmax(off), off.shape)
    if off[worst] > thresh:
        return False, (int(worst[0]), int(worst[1]), complex(m[worst]))
    return True, None


def generates_positive_semigroup(h: LinearOperator, cone: SelfDualCone,
                                 tol: float = DEFAULT_TOL) -> bool:
    """Whether exp(-beta*H) preserves the cone for every beta >= 0.

    Criterion: H is real in the generator basis with no off-diagonal entry
    above +tol*scale, i.e. -H is Metzler there.  Equivalent to resolvent
    positivity (H+s)^{-1} >= 0 for all s above the spectral bound.
    """
    h.require_hermitian()
    m = cone.operator_coords(h)
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return True
    if np.abs(m.imag).max() > tol * scale:
        return False
    ok, _ = _metzler_offdiag_ok(m, tol * scale)
    return ok


def generates_improving_semigroup(h: LinearOperator, cone: SelfDualCone,
                                  tol: float = DEFAULT_TOL) -> bool:
    """Whether (H+s)^{-1} improves the cone for every s above the bound.

    On top of the Metzler criterion this needs the off-diagonal support
    digraph of -H to be strongly connected; reducible generators leave some
    generator pair forever uncoupled.
    """
    if not generates_positive_semigroup(h, cone, tol):
        return False
    m = cone.operator_coords(h).real
    n = m.shape[0]
    if n == 1:
        return True
    scale = float(np.abs(m).max())
    coupling = -m
    np.fill_diagonal(coupling, 0.0)
    out_edges = [list(np.nonzero(coupling[:, j] > tol * scale)[0]) for j in range(n)]
    return bool((_reach_table(out_edges, n) >= 0).all())


def positive_combination(h: LinearOperator, h_prime: LinearOperator,
                         s: float, t: float, cone: SelfDualCone,
                         tol: float = DEFAULT_TOL) -> LinearOperator:
    """s*H + t*H' for positive weights, staying in the positive-semigroup class."""
    if s <= 0 or t <= 0:
        raise ValueError("weights must be positive")
    for name, op in (("first", h), ("second", h_prime)):
        if not generates_positive_semigroup(op, cone, tol):
            raise InputNotInClass(f"{name} operand does not generate a positive semigroup")
    combo = LinearOperator(h.space, float(s) * h.mat + float(t) * h_prime.mat)
    if not generates_positive_semigroup(combo, cone, tol):
        raise InputNotInClass("combination unexpectedly left the class")
    return combo


@dataclass(frozen=True)
class GroundState:
    """Lowest eigenvector of a Hamiltonian, oriented toward a cone."""

    energy: float
    gap01: float
    simple: bool
    vector: np.ndarray
    strictly_positive: bool


def ground_state(h: LinearOperator, cone: SelfDualCone, tol: float = DEFAULT_TOL) -> GroundState:
    """Spectrum-derived ground-state record with cone diagnostics.

    `simple` applies the relative gap threshold used everywhere for refusing
    degenerate ground states.  The eigenvector's global sign is flipped when
    its generator coordinates sum negative, so that the representative lying
    in the cone (when one exists) is the one reported.
    """
    spec = hermitian_eig(h)
    scale = max(h.norm(), 1e-300)
    simple = spec.gap01 > 1e-8 * scale
    psi = spec.ground_vector
    if cone.coords(psi).real.sum() < 0.0:
        psi = -psi
    strict = cone.strictly_positive(psi, tol)
    return GroundState(spec.ground_energy, spec.gap01, simple, psi, strict)

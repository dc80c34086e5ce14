"""Isometric embeddings between spaces, inheritance of cones along them,
conditional expectations, the ordered-pair relation between Hamiltonians,
and verification of whole chains of such pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .cones import SelfDualCone
from .errors import ArrowFailed, DimMismatch, LinkFailed
from .numerics import DEFAULT_TOL, LinearOperator, _freeze
from .positivity import classify, generates_improving_semigroup, ground_state

NNLS_TOL = 1e-8
ISOMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Embedding:
    """Isometry between two spaces, with its induced orthogonal projection."""

    from_space: str
    to_space: str
    isometry: np.ndarray  # shape (dim_to, dim_from), columns orthonormal

    def __post_init__(self):
        tau = _freeze(self.isometry)
        if tau.ndim != 2 or tau.shape[0] < tau.shape[1]:
            raise DimMismatch(f"isometry shape {tau.shape} cannot embed")
        gram = tau.conj().T @ tau
        if np.abs(gram - np.eye(tau.shape[1])).max() > ISOMETRY_TOL:
            raise ValueError("isometry columns are not orthonormal")
        object.__setattr__(self, "isometry", tau)

    @property
    def dim_from(self) -> int:
        return self.isometry.shape[1]

    @property
    def dim_to(self) -> int:
        return self.isometry.shape[0]

    def push(self, x: np.ndarray) -> np.ndarray:
        return self.isometry @ x

    def pull(self, x: np.ndarray) -> np.ndarray:
        return self.isometry.conj().T @ x

    def projection(self) -> LinearOperator:
        """pi = tau tau^*, the orthogonal projection onto the embedded copy."""
        return LinearOperator(self.to_space, self.isometry @ self.isometry.conj().T)

    def compress(self, a: LinearOperator) -> LinearOperator:
        """tau^* A tau, the block of A seen from the smaller space."""
        if a.dim != self.dim_to:
            raise DimMismatch("operator does not act on the target space")
        return LinearOperator(self.from_space, self.isometry.conj().T @ a.mat @ self.isometry)

    def extend(self, a: LinearOperator) -> LinearOperator:
        """tau A tau^*: the operator acting as A on the embedded copy, 0 elsewhere."""
        if a.dim != self.dim_from:
            raise DimMismatch("operator does not act on the source space")
        return LinearOperator(self.to_space, self.isometry @ a.mat @ self.isometry.conj().T)


def identity_embedding(space: str, dim: int) -> Embedding:
    return Embedding(space, space, np.eye(dim))


def append_factor_embedding(from_space: str, to_space: str, dim: int,
                            vec: np.ndarray) -> Embedding:
    """phi -> phi (x) v for a fixed unit vector v on the appended factor."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1, 1)
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > ISOMETRY_TOL:
        raise ValueError("appended vector must be normalized")
    return Embedding(from_space, to_space, np.kron(np.eye(dim), v))


def compose(first: Embedding, second: Embedding) -> Embedding:
    """second after first, as a single embedding."""
    if first.to_space != second.from_space or first.dim_to != second.dim_from:
        raise DimMismatch("embeddings do not compose")
    return Embedding(first.from_space, second.to_space,
                     second.isometry @ first.isometry)


def conditional_expectation(emb: Embedding, a: LinearOperator) -> LinearOperator:
    """pi A pi + (1-pi) A (1-pi): the block-diagonal part of A w.r.t. ran(pi)."""
    if a.dim != emb.dim_to:
        raise DimMismatch("operator does not act on the embedding's target space")
    pi = emb.projection().mat
    perp = np.eye(emb.dim_to) - pi
    return LinearOperator(a.space, pi @ a.mat @ pi + perp @ a.mat @ perp)


def inherits_positivity(p1: SelfDualCone, p2: SelfDualCone, emb: Embedding,
                        tol: float = NNLS_TOL) -> bool:
    """Whether the small cone is exactly the projection of the big one.

    Three conditions: the projection preserves the big cone; every projected
    generator of the big cone lands in the small cone; and every generator of
    the small cone is a nonnegative combination of those projections, which a
    nonnegative-least-squares solve certifies up to residual tol per unit
    norm.
    """
    if emb.dim_from != p1.dim or emb.dim_to != p2.dim:
        raise DimMismatch("embedding does not match the two cones")
    if not classify(emb.projection(), p2, tol).preserving:
        return False
    pulled = emb.isometry.conj().T @ p2.generators  # tau^* g_j as columns
    for j in range(pulled.shape[1]):
        if not p1.contains(pulled[:, j], tol):
            return False
    stacked = np.vstack([pulled.real, pulled.imag])
    for i in range(p1.dim):
        u = p1.generator(i)
        target = np.concatenate([u.real, u.imag])
        _, residual = nnls(stacked, target)
        if residual > tol:
            return False
    return True


@dataclass(frozen=True)
class ArrowResult:
    """Outcome of checking (H1, P1) -> (H2, P2); falsy when any part failed."""

    ok: bool
    reasons: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_arrow(h1: LinearOperator, p1: SelfDualCone,
                h2: LinearOperator, p2: SelfDualCone,
                emb: Embedding, tol: float = DEFAULT_TOL) -> ArrowResult:
    """Verify the ordered pair: both Hamiltonians improving-class on their
    cones, and the small cone inherited through the embedding."""
    reasons = []
    try:
        if not generates_improving_semigroup(h1, p1, tol):
            reasons.append("source Hamiltonian is not improving-class on its cone")
        if not generates_improving_semigroup(h2, p2, tol):
            reasons.append("target Hamiltonian is not improving-class on its cone")
        if not inherits_positivity(p1, p2, emb):
            reasons.append("cone inheritance failed")
    except DimMismatch as exc:
        reasons.append(f"dimension mismatch: {exc}")
    return ArrowResult(not reasons, tuple(reasons))


@dataclass(frozen=True)
class OverlapReport:
    overlap: float
    improving_ok: bool


def ground_overlap(h1: LinearOperator, p1: SelfDualCone,
                   h2: LinearOperator, p2: SelfDualCone,
                   emb: Embedding, tol: float = DEFAULT_TOL) -> OverlapReport:
    """Strict-positivity propagation across one verified pair.

    Reports the inner product of the source ground state with the projected
    target ground state (strictly positive for a genuine pair) and whether
    the compressed ground-state projector improves the small cone.
    """
    arrow = check_arrow(h1, p1, h2, p2, emb, tol)
    if not arrow:
        raise ArrowFailed("; ".join(arrow.reasons))
    g1 = ground_state(h1, p1, tol)
    g2 = ground_state(h2, p2, tol)
    pulled = emb.pull(g2.vector)
    overlap = complex(np.vdot(g1.vector, pulled))
    compressed = LinearOperator(emb.from_space, np.outer(pulled, pulled.conj()))
    improving = classify(compressed, p1, tol).improving
    if abs(overlap.imag) > tol * max(1.0, abs(overlap.real)):
        return OverlapReport(float(overlap.real), False)
    return OverlapReport(float(overlap.real), improving)


@dataclass(frozen=True, eq=False)
class ChainNode:
    """One Hamiltonian in a chain with its outgoing and incoming cones.

    ``cone`` is used when this node is the source of the next link; ``cone_in``
    (defaulting to ``cone``) when it is the target of the previous one.
    """

    hamiltonian: LinearOperator
    cone: SelfDualCone
    cone_in: SelfDualCone = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.cone_in is None:
            object.__setattr__(self, "cone_in", self.cone)


@dataclass(frozen=True, eq=False)
class ArrowChain:
    """A finite chain of ordered pairs realized by explicit embeddings."""

    nodes: tuple[ChainNode, ...]
    embeddings: tuple[Embedding, ...]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        embs = tuple(self.embeddings)
        if not nodes:
            raise ValueError("a chain needs at least one node")
        if len(embs) != len(nodes) - 1:
            raise DimMismatch("need exactly one embedding per consecutive node pair")
        for j, emb in enumerate(embs):
            if emb.dim_from != nodes[j].hamiltonian.dim:
                raise DimMismatch(f"embedding {j} does not start at node {j}")
            if emb.dim_to != nodes[j + 1].hamiltonian.dim:
                raise DimMismatch(f"embedding {j} does not end at node {j + 1}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "embeddings", embs)

    def __len__(self) -> int:
        return len(self.nodes)

    def mu_cone(self, j: int) -> SelfDualCone:
        """A cone on which node j was (or will be) verified improving-class."""
        if j == len(self.nodes) - 1 and len(self.nodes) > 1:
            return self.nodes[j].cone_in
        return self.nodes[j].cone


def concatenate(first: ArrowChain, second: ArrowChain) -> ArrowChain:
    """Join two chains whose boundary Hamiltonians coincide."""
    tail = first.nodes[-1]
    head = second.nodes[0]
    if tail.hamiltonian.dim != head.hamiltonian.dim or not np.allclose(
            tail.hamiltonian.mat, head.hamiltonian.mat):
        raise DimMismatch("chains do not share their boundary Hamiltonian")
    return ArrowChain(first.nodes[:-1] + second.nodes,
                      first.embeddings + second.embeddings)


@dataclass(frozen=True)
class ChainReport:
    """Per-link overlaps of a fully verified chain."""

    overlaps: tuple[float, ...]
    improving_ok: tuple[bool, ...]
    product: float = field(init=False)

    def __post_init__(self):
        prod = 1.0
        for o in self.overlaps:
            prod *= o
        object.__setattr__(self, "product", prod)

    def to_payload(self) -> dict:
        return {
            "links": len(self.overlaps),
            "overlaps": list(self.overlaps),
            "improving_ok": list(self.improving_ok),
            "overlap_product": self.product,
        }


def verify_chain(chain: ArrowChain, tol: float = DEFAULT_TOL) -> ChainReport:
    """Check every link of the chain; raise LinkFailed at the first bad one.

    A link passes when its arrow verifies, the projected ground-state overlap
    is strictly positive, and the compressed ground projector improves the
    source cone.
    """
    overlaps = []
    improving = []
    for j in range(len(chain.nodes) - 1):
        src = chain.nodes[j]
        dst = chain.nodes[j + 1]
        arrow = check_arrow(src.hamiltonian, src.cone,
                            dst.hamiltonian, dst.cone_in,
                            chain.embeddings[j], tol)
        if not arrow:
            raise LinkFailed(j, "; ".join(arrow.reasons))
        rep = ground_overlap(src.hamiltonian, src.cone,
                             dst.hamiltonian, dst.cone_in,
                             chain.embeddings[j], tol)
        if rep.overlap <= tol:
            raise LinkFailed(j, f"ground overlap {rep.overlap!r} is not strictly positive")
        if not rep.improving_ok:
            raise LinkFailed(j, "compressed ground projector does not improve the cone")
        overlaps.append(rep.overlap)
        improving.append(rep.improving_ok)
    return ChainReport(tuple(overlaps), tuple(improving))

"""Simplicial self-dual cones: membership, strict positivity, the natural
antilinear involution, and Jordan-type decompositions.

A cone here is given by an orthonormal generator basis {u_i}; its members are
exactly the nonnegative real combinations of the generators.  For this class
membership and duality are coordinate tests, and tensor products stay in the
class, which is all the constructions downstream ever need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotReal
from .numerics import DEFAULT_TOL, LinearOperator, _freeze, product_space

GENERATOR_ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SelfDualCone:
    """Self-dual cone spanned by an orthonormal generator basis.

    ``generators`` stacks the generators as columns; the stack must be unitary,
    which is what makes the cone self-dual and the coordinate tests exact.
    """

    space: str
    generators: np.ndarray
    label: str = ""

    def __post_init__(self):
        gen = _freeze(self.generators)
        if gen.ndim != 2 or gen.shape[0] != gen.shape[1]:
            raise DimMismatch(f"generator stack must be square, got {gen.shape}")
        gram = gen.conj().T @ gen
        if np.abs(gram - np.eye(gen.shape[0])).max() > GENERATOR_ORTHO_TOL:
            raise ValueError("generators are not orthonormal")
        object.__setattr__(self, "generators", gen)

    @property
    def dim(self) -> int:
        return self.generators.shape[0]

    def generator(self, i: int) -> np.ndarray:
        return self.generators[:, i]

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Coordinates <u_i|x> of a vector in the generator basis."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.dim,):
            raise DimMismatch(f"vector shape {x.shape} on cone of dim {self.dim}")
        return self.generators.conj().T @ x

    def from_coords(self, c: np.ndarray) -> np.ndarray:
        return self.generators @ np.asarray(c, dtype=np.complex128)

    def operator_coords(self, op: LinearOperator) -> np.ndarray:
        """Matrix of an operator expressed in the generator basis."""
        if op.dim != self.dim or op.space != self.space:
            raise DimMismatch(
                f"operator on {op.space!r} (dim {op.dim}) vs cone on "
                f"{self.space!r} (dim {self.dim})"
            )
        return self.generators.conj().T @ op.mat @ self.generators

    def contains(self, x: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        """Membership: all generator coordinates real and >= -tol*|x|."""
        c = self.coords(x)
        scale = float(np.linalg.norm(x))
        if scale == 0.0:
            return True
        return bool(
            (c.real >= -tol * scale).all() and (np.abs(c.imag) <= tol * scale).all()
        )

    def strictly_positive(self, x: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        """Strict positivity: every generator coordinate >= +tol*|x|.

        Every nonzero cone member dominates a positive multiple of some
        generator, so pairing strictly with all generators is equivalent to
        pairing strictly with every nonzero member.  The zero vector is a
        member but never strictly positive.
        """
        c = self.coords(x)
        scale = float(np.linalg.norm(x))
        if scale == 0.0:
            return False
        return bool(
            (c.real >= tol * scale).all() and (np.abs(c.imag) <= tol * scale).all()
        )

    def involution(self, x: np.ndarray) -> np.ndarray:
        """The unique antilinear involution fixing the cone pointwise.

        Conjugates coordinates in the generator basis; fixes every generator
        and squares to the identity.
        """
        return self.from_coords(self.coords(x).conjugate())

    def jordan_decompose(self, x: np.ndarray, tol: float = 1e-10) -> "JordanParts":
        """Split an involution-fixed vector as plus - minus with both parts in
        the cone and orthogonal to each other."""
        c = self.coords(x)
        scale = max(float(np.linalg.norm(x)), 1e-300)
        if np.abs(c.imag).max() > tol * scale:
            raise NotReal("vector is not fixed by the cone involution")
        pos = np.clip(c.real, 0.0, None)
        neg = np.clip(-c.real, 0.0, None)
        return JordanParts(self.from_coords(pos), self.from_coords(neg))

    def span_decompose(self, u: np.ndarray):
        """Write any vector as v1 - v2 + i(w1 - w2) with all four parts in the
        cone and <v1|v2> = <w1|w2> = 0."""
        c = self.coords(u)
        v1 = self.from_coords(np.clip(c.real, 0.0, None))
        v2 = self.from_coords(np.clip(-c.real, 0.0, None))
        w1 = self.from_coords(np.clip(c.imag, 0.0, None))
        w2 = self.from_coords(np.clip(-c.imag, 0.0, None))
        return v1, v2, w1, w2


@dataclass(frozen=True, eq=False)
class JordanParts:
    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "plus", _freeze(self.plus))
        object.__setattr__(self, "minus", _freeze(self.minus))

    def recompose(self) -> np.ndarray:
        return self.plus - self.minus

    def absolute(self) -> np.ndarray:
        return self.plus + self.minus


def orthant(space: str, n: int, label: str = "") -> SelfDualCone:
    """The nonnegative orthant: standard-basis generators e_1..e_n."""
    if n < 1:
        raise ValueError("orthant dimension must be >= 1")
    return SelfDualCone(space, np.eye(n), label or f"R+^{n}")


def tensor_cone(p: SelfDualCone, q: SelfDualCone, label: str = "") -> SelfDualCone:
    """Conical hull of {u_i (x) v_j}: the self-dual cone of the product space.

    Generator order follows the Kronecker convention, (i, j) -> i*dim(q)+j.
    """
    gen = np.kron(p.generators, q.generators)
    space = product_space(p.space, q.space)
    return SelfDualCone(space, gen, label or f"{p.label or p.space}(x){q.label or q.space}")

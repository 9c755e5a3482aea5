"""Matrix Lie algebra and group numerics.

An algebra is given by a basis of d x d real matrices.  Structure constants
are fitted by least squares against the basis; every operation that lands a
matrix back in the algebra (brackets, conjugation) re-expands it the same way
and checks the residual, so non-orthonormal and user-supplied bases work
uniformly.  Group elements are plain invertible matrices; curves through the
group are synthesized from the exponential, never from a logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ClosureViolation, SingularMatrix

__all__ = [
    "MatrixLieAlgebra",
    "AlgebraElement",
    "GroupElement",
    "bracket",
    "exp",
    "adjoint",
    "fiber_quotient",
    "builtin_algebra",
    "BUILTIN_ALGEBRAS",
]

_CLOSURE_TOL = 1e-10
_JACOBI_TOL = 1e-10
_DET_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixLieAlgebra:
    """Matrix Lie algebra with basis ``E_1..E_k`` of d x d matrices and
    structure constants ``c[a, b, e]`` defined by
    ``[E_a, E_b] = sum_e c[a, b, e] E_e``."""

    d: int
    k: int
    basis: tuple  # k matrices, each a (d, d) ndarray
    structure: np.ndarray  # (k, k, k)
    name: str = "custom"
    # pseudo-inverse of the (d*d, k) basis stack, for coefficient expansion
    _basis_pinv: np.ndarray = field(repr=False, compare=False, default=None)

    @staticmethod
    def from_basis(basis, name: str = "custom") -> "MatrixLieAlgebra":
        mats = tuple(np.array(b, dtype=float) for b in basis)
        if not mats:
            raise ValueError("basis must contain at least one matrix")
        d = mats[0].shape[0]
        for i, b in enumerate(mats, start=1):
            if b.shape != (d, d):
                raise ValueError(f"basis matrix {i} is not {d}x{d}")
        k = len(mats)
        stack = np.column_stack([b.reshape(-1) for b in mats])  # (d*d, k)
        if np.linalg.matrix_rank(stack) < k:
            raise ValueError("basis matrices are linearly dependent")
        pinv = np.linalg.pinv(stack)
        scale = max(1.0, max(float(np.abs(b).max()) for b in mats))
        structure = np.zeros((k, k, k))
        for a in range(k):
            for b in range(a + 1, k):
                comm = mats[a] @ mats[b] - mats[b] @ mats[a]
                coeffs, residual = _fit(pinv, stack, comm)
                if residual > _CLOSURE_TOL * scale * scale:
                    raise ClosureViolation(
                        f"[E{a + 1}, E{b + 1}] leaves the span of the basis "
                        f"(residual {residual:.3e})"
                    )
                structure[a, b] = coeffs
                structure[b, a] = -coeffs
        _check_jacobi(structure)
        structure.setflags(write=False)
        return MatrixLieAlgebra(d, k, mats, structure, name, pinv)

    def element(self, coeffs) -> "AlgebraElement":
        return AlgebraElement(self, coeffs)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, np.zeros(self.k))

    def identity_group(self) -> "GroupElement":
        return GroupElement(np.eye(self.d))

    def expand(self, matrix: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        """Coefficients of ``matrix`` in the basis, raising
        :class:`ClosureViolation` when the least-squares residual exceeds
        ``tol`` scaled by the matrix magnitude."""
        stack = np.column_stack([b.reshape(-1) for b in self.basis])
        coeffs, residual = _fit(self._pinv(), stack, np.asarray(matrix, dtype=float))
        scale = max(1.0, float(np.abs(matrix).max()))
        if residual > tol * scale:
            raise ClosureViolation(
                f"matrix leaves the span of the algebra basis "
                f"(residual {residual:.3e}, tolerance {tol * scale:.1e})"
            )
        return coeffs

    def _pinv(self) -> np.ndarray:
        if self._basis_pinv is not None:
            return self._basis_pinv
        stack = np.column_stack([b.reshape(-1) for b in self.basis])
        pinv = np.linalg.pinv(stack)
        object.__setattr__(self, "_basis_pinv", pinv)
        return pinv


def _fit(pinv, stack, matrix):
    target = matrix.reshape(-1)
    coeffs = pinv @ target
    residual = float(np.abs(stack @ coeffs - target).max())
    return coeffs, residual


def _check_jacobi(c: np.ndarray) -> None:
    # sum_e ( c[a,b,e] c[e,g,h] + c[b,g,e] c[e,a,h] + c[g,a,e] c[e,b,h] ) = 0
    cyc = (
        np.einsum("abe,egh->abgh", c, c)
        + np.einsum("bge,eah->abgh", c, c)
        + np.einsum("gae,ebh->abgh", c, c)
    )
    worst = float(np.abs(cyc).max())
    if worst > _JACOBI_TOL:
        raise ClosureViolation(
            f"structure constants violate the Jacobi identity "
            f"(residual {worst:.3e})"
        )


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Element of a matrix Lie algebra, stored as basis coefficients."""

    algebra: MatrixLieAlgebra
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape != (self.algebra.k,):
            raise ValueError(
                f"expected {self.algebra.k} coefficients, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def matrix(self) -> np.ndarray:
        out = np.zeros((self.algebra.d, self.algebra.d))
        for c, e in zip(self.coeffs, self.algebra.basis):
            if c != 0.0:
                out += c * e
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_algebra(self, other)
        return AlgebraElement(self.algebra, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_algebra(self, other)
        return AlgebraElement(self.algebra, self.coeffs - other.coeffs)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, -self.coeffs)

    def scaled(self, factor: float) -> "AlgebraElement":
        return AlgebraElement(self.algebra, factor * self.coeffs)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Invertible d x d matrix; the determinant must stay clear of zero."""

    g: np.ndarray

    def __post_init__(self):
        mat = np.array(self.g, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("group element must be a square matrix")
        det = float(np.linalg.det(mat))
        if abs(det) < _DET_FLOOR:
            raise SingularMatrix(
                f"matrix is numerically singular (|det| = {abs(det):.3e})"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "g", mat)

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.g))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.g @ other.g)


def _same_algebra(x: AlgebraElement, y: AlgebraElement) -> None:
    if x.algebra is not y.algebra and not (
        x.algebra.d == y.algebra.d
        and x.algebra.k == y.algebra.k
        and all(np.array_equal(a, b) for a, b in zip(x.algebra.basis, y.algebra.basis))
    ):
        raise ValueError("elements belong to different algebras")


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Matrix commutator ``XY - YX`` re-expanded in the basis."""
    _same_algebra(x, y)
    xm = x.matrix
    ym = y.matrix
    return AlgebraElement(x.algebra, x.algebra.expand(xm @ ym - ym @ xm, _CLOSURE_TOL))


def exp(x: AlgebraElement) -> GroupElement:
    """Matrix exponential (scaling-and-squaring Pade, order 13)."""
    return GroupElement(scipy.linalg.expm(x.matrix))


def adjoint(g: GroupElement, x: AlgebraElement) -> AlgebraElement:
    """Conjugation ``g X g^{-1}`` re-expanded in the basis."""
    ginv = np.linalg.inv(g.g)
    return AlgebraElement(x.algebra, x.algebra.expand(g.g @ x.matrix @ ginv))


def fiber_quotient(g: GroupElement, h: GroupElement) -> GroupElement:
    """The unique group element ``q`` with ``g q = h``, i.e. ``g^{-1} h``."""
    return GroupElement(np.linalg.solve(g.g, h.g))


def _so2_basis():
    return (np.array([[0.0, -1.0], [1.0, 0.0]]),)


def _so3_basis():
    e1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    e2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    e3 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    return (e1, e2, e3)


def _sl2_basis():
    h = np.array([[1.0, 0.0], [0.0, -1.0]])
    e = np.array([[0.0, 1.0], [0.0, 0.0]])
    f = np.array([[0.0, 0.0], [1.0, 0.0]])
    return (h, e, f)


BUILTIN_ALGEBRAS = {
    "so2": _so2_basis,
    "so3": _so3_basis,
    "sl2": _sl2_basis,
}


_ALGEBRA_ALIASES = {
    "so2": "so2",
    "so(2)": "so2",
    "so3": "so3",
    "so(3)": "so3",
    "sl2": "sl2",
    "sl(2)": "sl2",
    "sl2r": "sl2",
    "sl(2,r)": "sl2",
}


def builtin_algebra(name: str) -> MatrixLieAlgebra:
    """One of the bundled algebras: ``so2`` (abelian), ``so3`` (compact,
    [E1,E2] = E3 cyclically), ``sl2`` (non-compact, [H,E] = 2E)."""
    key = _ALGEBRA_ALIASES.get(name.strip().lower().replace(" ", ""))
    if key is None:
        known = ", ".join(sorted(BUILTIN_ALGEBRAS))
        raise ValueError(f"unknown algebra {name!r} (built in: {known})")
    return MatrixLieAlgebra.from_basis(BUILTIN_ALGEBRAS[key](), name=key)

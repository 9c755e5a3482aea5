"""Non-linear connections on a trivialized fiber bundle patch.

A patch is ``U x F`` with ``U`` open in ``R^m`` (coordinates ``x1..xm``) and
fiber ``F = R^n`` (coordinates ``f1..fn``).  A connection is stored through
its generalized Christoffel symbols ``Gamma^a_mu(x, f)``: the field of
projections onto the vertical distribution acts on a tangent vector with base
part ``a`` and fiber part ``b`` by

    P(a, b)^a = b^a + sum_mu Gamma^a_mu(x, f) * a^mu,

so the horizontal lift of ``d/dx^mu`` is ``d/dx^mu - sum_a Gamma^a_mu d/df^a``.
Curvature is the obstruction to horizontal subspaces closing under the Lie
bracket:

    R(X, Y) = -P[(id - P)X, (id - P)Y],

a vertical vector, with coordinate coefficients

    R^a_{mu nu} = dGamma^a_nu/dx^mu - dGamma^a_mu/dx^nu
                  + sum_b (Gamma^b_nu dGamma^a_mu/df^b
                           - Gamma^b_mu dGamma^a_nu/df^b).

All value types are immutable; base indices ``mu`` are 1-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _symbolic
from .errors import IndexOutOfRange, InternalDisagreement
from .exprdsl import Expression, max_indices, parse
from .numcore import EvalPoint, evaluate, gradient, partial

__all__ = [
    "BundlePatch",
    "ChristoffelField",
    "TotalTangent",
    "VerticalVector",
    "Section",
    "TotalVectorField",
    "FiberBundleMorphism",
    "ParallelMorphismReport",
    "project",
    "embed",
    "horizontal_lift",
    "covariant_derivative",
    "lie_bracket",
    "vertical_projection_field",
    "horizontal_part_field",
    "nijenhuis_curvature",
    "curvature_coefficients",
    "pushforward",
    "is_parallel_morphism",
]


@dataclass(frozen=True)
class BundlePatch:
    """A trivialized patch: base dimension, fiber dimension, optional
    coordinate labels (purely cosmetic)."""

    base_dim: int
    fiber_dim: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.base_dim < 1 or self.fiber_dim < 1:
            raise ValueError(
                f"patch dimensions must be positive, got "
                f"({self.base_dim}, {self.fiber_dim})"
            )

    @property
    def dims(self) -> tuple[int, int]:
        return (self.base_dim, self.fiber_dim)


def _check_bound(e: Expression, patch: BundlePatch, where: str) -> None:
    mx, mf = max_indices(e)
    if mx > patch.base_dim:
        raise IndexOutOfRange(
            f"{where} references x{mx} but the patch base dimension is {patch.base_dim}"
        )
    if mf > patch.fiber_dim:
        raise IndexOutOfRange(
            f"{where} references f{mf} but the patch fiber dimension is {patch.fiber_dim}"
        )


def _check_base_only(e: Expression, where: str) -> None:
    _, mf = max_indices(e)
    if mf > 0:
        raise ValueError(f"{where} must not reference fiber variables")


@dataclass(frozen=True)
class ChristoffelField:
    """Generalized Christoffel symbols ``gamma[a-1][mu-1] = Gamma^a_mu(x, f)``
    of a (generally non-linear) connection on ``patch``."""

    patch: BundlePatch
    gamma: tuple[tuple[Expression, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.gamma)
        object.__setattr__(self, "gamma", rows)
        m, n = self.patch.dims
        if len(rows) != n or any(len(row) != m for row in rows):
            raise ValueError(
                f"gamma must be {n} rows of {m} expressions for patch dims {self.patch.dims}"
            )
        for a, row in enumerate(rows, start=1):
            for mu, e in enumerate(row, start=1):
                _check_bound(e, self.patch, f"Gamma^{a}_{mu}")

    @classmethod
    def from_strings(cls, patch: BundlePatch, rows) -> "ChristoffelField":
        parsed = tuple(
            tuple(parse(src, patch.dims) for src in row) for row in rows
        )
        return cls(patch, parsed)


@dataclass(frozen=True)
class TotalTangent:
    """Tangent vector of the total space at ``at``: base part ``a`` (length
    m), fiber part ``b`` (length n)."""

    at: EvalPoint
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))


@dataclass(frozen=True)
class VerticalVector:
    """Vertical tangent vector at ``at`` with fiber components ``w``."""

    at: EvalPoint
    w: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))


@dataclass(frozen=True)
class Section:
    """A section ``x -> (x, comps(x))``; components are base-only
    expressions."""

    patch: BundlePatch
    comps: tuple[Expression, ...]

    def __post_init__(self):
        comps = tuple(self.comps)
        object.__setattr__(self, "comps", comps)
        if len(comps) != self.patch.fiber_dim:
            raise ValueError(
                f"section needs {self.patch.fiber_dim} components, got {len(comps)}"
            )
        for i, e in enumerate(comps, start=1):
            _check_bound(e, self.patch, f"section component {i}")
            _check_base_only(e, f"section component {i}")

    @classmethod
    def from_strings(cls, patch: BundlePatch, sources) -> "Section":
        return cls(patch, tuple(parse(s, patch.dims) for s in sources))

    def value(self, x) -> tuple[float, ...]:
        p = EvalPoint.of(x)
        return tuple(evaluate(c, p) for c in self.comps)


@dataclass(frozen=True)
class TotalVectorField:
    """Vector field on the total space with expression components: ``a`` over
    base directions, ``b`` over fiber directions, all functions of (x, f)."""

    patch: BundlePatch
    a: tuple[Expression, ...]
    b: tuple[Expression, ...]

    def __post_init__(self):
        a = tuple(self.a)
        b = tuple(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        m, n = self.patch.dims
        if len(a) != m or len(b) != n:
            raise ValueError(
                f"field needs {m} base and {n} fiber components, got "
                f"({len(a)}, {len(b)})"
            )
        for i, e in enumerate(a, start=1):
            _check_bound(e, self.patch, f"base component {i}")
        for i, e in enumerate(b, start=1):
            _check_bound(e, self.patch, f"fiber component {i}")

    @classmethod
    def from_strings(cls, patch: BundlePatch, a_sources, b_sources) -> "TotalVectorField":
        dims = patch.dims
        return cls(
            patch,
            tuple(parse(s, dims) for s in a_sources),
            tuple(parse(s, dims) for s in b_sources),
        )

    @classmethod
    def coordinate(cls, patch: BundlePatch, mu: int) -> "TotalVectorField":
        """The coordinate base field d/dx^mu."""
        m, n = patch.dims
        one = _symbolic.const(1.0)
        zero = _symbolic.const(0.0)
        return cls(
            patch,
            tuple(one if i == mu else zero for i in range(1, m + 1)),
            (zero,) * n,
        )


@dataclass(frozen=True)
class FiberBundleMorphism:
    """A base-preserving bundle morphism ``(x, f) -> (x, comps(x, f))`` from
    ``source`` to ``target`` (same base dimension required)."""

    source: BundlePatch
    target: BundlePatch
    comps: tuple[Expression, ...]

    def __post_init__(self):
        comps = tuple(self.comps)
        object.__setattr__(self, "comps", comps)
        if self.source.base_dim != self.target.base_dim:
            raise ValueError("morphism must preserve the base dimension")
        if len(comps) != self.target.fiber_dim:
            raise ValueError(
                f"morphism needs {self.target.fiber_dim} fiber components, "
                f"got {len(comps)}"
            )
        for i, e in enumerate(comps, start=1):
            _check_bound(e, self.source, f"morphism component {i}")

    @classmethod
    def from_strings(cls, source: BundlePatch, target: BundlePatch, sources):
        return cls(source, target, tuple(parse(s, source.dims) for s in sources))

    def value(self, p: EvalPoint) -> tuple[float, ...]:
        return tuple(evaluate(c, p) for c in self.comps)


@dataclass(frozen=True)
class ParallelMorphismReport:
    """Outcome of :func:`is_parallel_morphism`: per-sample residuals of the
    projected pushforwards of horizontal lifts."""

    residuals: tuple[float, ...]
    max_residual: float
    tolerance: float
    parallel: bool
    samples: tuple[EvalPoint, ...] = field(repr=False, default=())


# ---------------------------------------------------------------------------
# pointwise operations


def project(field: ChristoffelField, t: TotalTangent) -> VerticalVector:
    """Apply the projection field: ``w^a = b^a + sum_mu Gamma^a_mu * a^mu``."""
    p = t.at
    w = []
    for row, b in zip(field.gamma, t.b):
        acc = b
        for e, a in zip(row, t.a):
            acc += evaluate(e, p) * a
        w.append(acc)
    return VerticalVector(p, tuple(w))


def embed(v: VerticalVector) -> TotalTangent:
    """A vertical vector regarded as a total-space tangent (zero base part)."""
    return TotalTangent(v.at, (0.0,) * len(v.at.x), v.w)


def horizontal_lift(field: ChristoffelField, p: EvalPoint, xi) -> TotalTangent:
    """Horizontal lift of the base vector ``xi`` to ``p``:
    base part ``xi``, fiber part ``-sum_mu Gamma^a_mu(p) xi^mu``."""
    xi = tuple(float(v) for v in xi)
    if len(xi) != field.patch.base_dim:
        raise ValueError(f"xi must have length {field.patch.base_dim}")
    b = []
    for row in field.gamma:
        acc = 0.0
        for e, comp in zip(row, xi):
            acc -= evaluate(e, p) * comp
        b.append(acc)
    return TotalTangent(p, xi, tuple(b))


def covariant_derivative(
    field: ChristoffelField, section: Section, mu: int, x
) -> VerticalVector:
    """Covariant derivative of ``section`` along ``d/dx^mu`` at base point
    ``x``: components ``ds^a/dx^mu + Gamma^a_mu(x, s(x))``."""
    m = field.patch.base_dim
    if not 1 <= mu <= m:
        raise ValueError(f"mu must be in 1..{m}, got {mu}")
    base_pt = EvalPoint.of(x)
    svals = tuple(evaluate(c, base_pt) for c in section.comps)
    at = EvalPoint(base_pt.x, svals)
    w = tuple(
        partial(c, base_pt, ("x", mu)) + evaluate(row[mu - 1], at)
        for c, row in zip(section.comps, field.gamma)
    )
    return VerticalVector(at, w)


def lie_bracket(V: TotalVectorField, W: TotalVectorField, p: EvalPoint) -> TotalTangent:
    """Lie bracket ``[V, W]`` at ``p``, over all m+n coordinates:
    ``[V,W]^i = sum_j (V^j dW^i/dz^j - W^j dV^i/dz^j)``."""
    if V.patch.dims != W.patch.dims:
        raise ValueError("bracket operands must live on the same patch")
    m, n = V.patch.dims
    comps_V = V.a + V.b
    comps_W = W.a + W.b
    vals_V = []
    grads_V = []
    for c in comps_V:
        val, grad = gradient(c, p)
        vals_V.append(val)
        grads_V.append(grad)
    vals_W = []
    grads_W = []
    for c in comps_W:
        val, grad = gradient(c, p)
        vals_W.append(val)
        grads_W.append(grad)
    width = m + n
    out = []
    for i in range(width):
        gW = grads_W[i]
        gV = grads_V[i]
        acc = 0.0
        for j in range(width):
            acc += vals_V[j] * gW[j] - vals_W[j] * gV[j]
        out.append(acc)
    return TotalTangent(p, tuple(out[:m]), tuple(out[m:]))


# ---------------------------------------------------------------------------
# expression-level projection of vector fields


def _vertical_component_exprs(field: ChristoffelField, V: TotalVectorField):
    """Fiber components of P(V) as expressions: b^a + sum_mu Gamma^a_mu a^mu."""
    out = []
    for row, b in zip(field.gamma, V.b):
        acc = b
        for e, a in zip(row, V.a):
            acc = _symbolic.add(acc, _symbolic.mul(e, a))
        out.append(acc)
    return tuple(out)


def vertical_projection_field(field: ChristoffelField, V: TotalVectorField) -> TotalVectorField:
    """P(V) as a vector field (zero base part, projected fiber part)."""
    zero = _symbolic.const(0.0)
    return TotalVectorField(
        V.patch,
        (zero,) * field.patch.base_dim,
        _vertical_component_exprs(field, V),
    )


def horizontal_part_field(field: ChristoffelField, V: TotalVectorField) -> TotalVectorField:
    """(id - P)(V): base part kept, fiber part ``-sum_mu Gamma^a_mu a^mu``
    (independent of V's own fiber part)."""
    out = []
    for row in field.gamma:
        acc = _symbolic.const(0.0)
        for e, a in zip(row, V.a):
            acc = _symbolic.add(acc, _symbolic.mul(e, a))
        out.append(_symbolic.neg(acc))
    return TotalVectorField(V.patch, V.a, tuple(out))


def nijenhuis_curvature(
    field: ChristoffelField,
    V: TotalVectorField,
    W: TotalVectorField,
    p: EvalPoint,
    consistency_tol: float = 1e-9,
) -> VerticalVector:
    """Curvature ``R(V, W) = -P[(id-P)V, (id-P)W]`` at ``p``.

    Also evaluates the equivalent four-term expansion
    ``-P[V,W] + P[V,PW] + P[PV,W] - [PV,PW]`` and raises
    :class:`InternalDisagreement` if the two routes differ by more than
    ``consistency_tol`` in any component.  The two-term value is returned.
    """
    hV = horizontal_part_field(field, V)
    hW = horizontal_part_field(field, W)
    two = [-w for w in project(field, lie_bracket(hV, hW, p)).w]

    PV = vertical_projection_field(field, V)
    PW = vertical_projection_field(field, W)
    t1 = project(field, lie_bracket(V, W, p)).w
    t2 = project(field, lie_bracket(V, PW, p)).w
    t3 = project(field, lie_bracket(PV, W, p)).w
    t4 = lie_bracket(PV, PW, p).b
    four = [-a + b + c - d for a, b, c, d in zip(t1, t2, t3, t4)]

    worst = max((abs(a - b) for a, b in zip(two, four)), default=0.0)
    if worst > consistency_tol:
        raise InternalDisagreement(
            f"two-term and four-term curvature differ by {worst:.3e} "
            f"(tolerance {consistency_tol:.1e}) at {p}"
        )
    return VerticalVector(p, tuple(two))


def curvature_coefficients(field: ChristoffelField, p: EvalPoint) -> np.ndarray:
    """Coordinate curvature tensor ``R[a-1, mu-1, nu-1] = R^a_{mu nu}(p)``,
    shape (n, m, m), antisymmetric in the last two slots."""
    m, n = field.patch.dims
    vals = np.empty((n, m))
    gx = np.empty((n, m, m))
    gf = np.empty((n, m, n))
    for a in range(n):
        for mu in range(m):
            val, grad = gradient(field.gamma[a][mu], p)
            vals[a, mu] = val
            gx[a, mu, :] = grad[:m]
            gf[a, mu, :] = grad[m:]
    R = np.zeros((n, m, m))
    for a in range(n):
        for mu in range(m):
            for nu in range(m):
                acc = gx[a, nu, mu] - gx[a, mu, nu]
                for b in range(n):
                    acc += vals[b, nu] * gf[a, mu, b] - vals[b, mu] * gf[a, nu, b]
                R[a, mu, nu] = acc
    return R


# ---------------------------------------------------------------------------
# morphisms


def pushforward(phi: FiberBundleMorphism, t: TotalTangent) -> TotalTangent:
    """Differential of ``phi`` applied to ``t``; the result sits at
    ``(x, phi(x, f))`` on the target patch."""
    p = t.at
    m = phi.source.base_dim
    values = []
    bhat = []
    comps = t.a + t.b
    for c in phi.comps:
        val, grad = gradient(c, p)
        values.append(val)
        bhat.append(sum(g * v for g, v in zip(grad, comps)))
    return TotalTangent(EvalPoint(p.x[:m], tuple(values)), t.a, tuple(bhat))


def is_parallel_morphism(
    phi: FiberBundleMorphism,
    field: ChristoffelField,
    field_hat: ChristoffelField,
    samples,
    tol: float = 1e-9,
) -> ParallelMorphismReport:
    """Test whether ``phi`` maps ``field``-horizontal to ``field_hat``-horizontal.

    At each sample point the horizontal lifts of all coordinate directions are
    pushed forward and projected with ``field_hat``; the residual is the
    largest absolute fiber component.  ``samples`` is a sequence of
    :class:`EvalPoint` on the source patch.
    """
    samples = tuple(samples)
    m = field.patch.base_dim
    residuals = []
    for p in samples:
        worst = 0.0
        for mu in range(1, m + 1):
            xi = tuple(1.0 if i == mu else 0.0 for i in range(1, m + 1))
            lifted = horizontal_lift(field, p, xi)
            pushed = pushforward(phi, lifted)
            res = project(field_hat, pushed)
            worst = max(worst, max(abs(v) for v in res.w))
        residuals.append(worst)
    max_res = max(residuals, default=0.0)
    return ParallelMorphismReport(
        residuals=tuple(residuals),
        max_residual=max_res,
        tolerance=tol,
        parallel=max_res <= tol,
        samples=samples,
    )

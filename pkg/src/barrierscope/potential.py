"""Barrier geometry: the potential V(x) on [0, L] plus flat exterior levels.

A Potential owns an ordered list of segments tiling [0, L] exactly.  Segments
are half-open [a, b) with the final one closed at L; at a discontinuity,
evaluation returns the right-limit value.  Exterior levels v_left (entry
side) and v_right (exit side) are flat and default to 0.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from . import dsl
from .errors import DomainError, PotentialParseError

# relative tolerance on segment endpoint bookkeeping
_COVER_RTOL = 1e-12


@dataclass(frozen=True)
class Constant:
    """V(x) = value on the segment."""

    value: float

    def __call__(self, x):
        return self.value

    def values(self, xs):
        return np.full(np.shape(xs), self.value, dtype=float)

    def render(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Polynomial:
    """V(x) = sum(coeffs[k] * x**k); coefficients in ascending order."""

    coeffs: tuple

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def values(self, xs):
        return np.polynomial.polynomial.polyval(np.asarray(xs, dtype=float), self.coeffs)

    def render(self):
        # Horner form mirrors the evaluation order, so parsing the rendered
        # text reproduces values bit-for-bit even near roots
        if len(self.coeffs) == 1:
            return repr(float(self.coeffs[0]))
        text = repr(float(self.coeffs[-1]))
        for c in reversed(self.coeffs[:-1]):
            c = float(c)
            sign = "+" if c >= 0 else "-"
            text = f"({text})*x {sign} {repr(abs(c))}"
        return text


@dataclass(frozen=True)
class Expression:
    """V(x) given by a parsed arithmetic tree; keeps its source text."""

    tree: tuple
    text: str

    def __call__(self, x):
        return float(dsl.eval_tree(self.tree, x))

    def values(self, xs):
        out = dsl.eval_tree(self.tree, np.asarray(xs, dtype=float))
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(xs)).copy()

    def render(self):
        return self.text

    @classmethod
    def parse(cls, text):
        return cls(dsl.parse_expression(text), text.strip())


@dataclass(frozen=True)
class Segment:
    """One piece of the barrier on [a, b) with its functional form."""

    a: float
    b: float
    form: object

    def __post_init__(self):
        if not (self.a < self.b):
            raise DomainError(f"segment needs a < b, got [{self.a}, {self.b})")


@dataclass(frozen=True)
class Potential:
    """The scattering geometry: V(x) on [0, L] plus flat exterior levels."""

    length: float
    segments: tuple
    v_left: float = 0.0
    v_right: float = 0.0

    def __post_init__(self):
        if not (self.length > 0.0 and math.isfinite(self.length)):
            raise DomainError(f"barrier length must be positive, got {self.length!r}")
        if not self.segments:
            raise DomainError("a potential needs at least one segment")
        tol = _COVER_RTOL * self.length
        segs = sorted(self.segments, key=lambda s: s.a)
        if abs(segs[0].a) > tol:
            raise PotentialParseError(f"coverage gap: first segment starts at {segs[0].a}, not 0")
        for prev, cur in zip(segs, segs[1:]):
            if cur.a - prev.b > tol:
                raise PotentialParseError(f"coverage gap between x={prev.b} and x={cur.a}")
            if prev.b - cur.a > tol:
                raise PotentialParseError(f"segments overlap between x={cur.a} and x={prev.b}")
        if abs(segs[-1].b - self.length) > tol:
            raise PotentialParseError(
                f"coverage gap: segments end at {segs[-1].b}, potential length is {self.length}"
            )
        object.__setattr__(self, "segments", tuple(segs))

    def _segment_at(self, x):
        # right-limit convention: the segment starting at x owns x
        lo, hi = 0, len(self.segments) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.segments[mid].a <= x:
                lo = mid
            else:
                hi = mid - 1
        return self.segments[lo]

    def evaluate(self, x):
        """V(x) for 0 <= x <= L; x = L maps to the last segment's right limit."""
        if not (0.0 <= x <= self.length):
            raise DomainError(f"x={x} outside the barrier domain [0, {self.length}]")
        seg = self._segment_at(x) if x < self.length else self.segments[-1]
        return float(seg.form(x))

    def values(self, xs):
        """Vectorized evaluate over an array of positions inside [0, L]."""
        xs = np.asarray(xs, dtype=float)
        if xs.size and (xs.min() < 0.0 or xs.max() > self.length):
            raise DomainError("positions outside the barrier domain")
        out = np.empty(xs.shape, dtype=float)
        starts = np.array([s.a for s in self.segments])
        idx = np.searchsorted(starts, xs, side="right") - 1
        idx[xs >= self.length] = len(self.segments) - 1
        for j, seg in enumerate(self.segments):
            mask = idx == j
            if np.any(mask):
                out[mask] = seg.form.values(xs[mask])
        return out

    def render(self):
        """Canonical text form; parse_potential round-trips it."""
        lines = [f"left = {repr(float(self.v_left))}", f"right = {repr(float(self.v_right))}"]
        for seg in self.segments:
            lines.append(f"on [{repr(float(seg.a))},{repr(float(seg.b))}): {seg.form.render()}")
        return "\n".join(lines) + "\n"


def _validate_sampling(p):
    for seg in p.segments:
        xs = np.linspace(seg.a, seg.b, 129)
        try:
            with np.errstate(all="ignore"):
                vals = seg.form.values(xs)
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise PotentialParseError(f"segment [{seg.a},{seg.b}) fails to evaluate: {exc}")
        if not np.all(np.isfinite(vals)):
            bad = xs[~np.isfinite(vals)][0]
            raise PotentialParseError(
                f"segment [{seg.a},{seg.b}) evaluates non-finite near x={bad:.6g}"
            )
    return p


def parse_potential(text):
    """Parse potential source text into a validated Potential.

    Accepts either a builtin invocation (square, parabola, double_barrier,
    arbitrary) or a clause list; see the dsl module docstring for the
    grammar.  Raises PotentialParseError with line/column on syntax errors,
    coverage gaps or overlaps, and non-finite evaluation found by sampling.
    """
    parsed = dsl.parse_source(text)
    if parsed[0] == "builtin":
        _, name, params, line = parsed
        ctor = BUILTINS.get(name)
        if ctor is None:
            raise PotentialParseError(
                f"unknown builtin {name!r}; expected one of {sorted(BUILTINS)}", line, 1
            )
        try:
            return ctor(**params)
        except TypeError as exc:
            raise PotentialParseError(f"bad parameters for {name!r}: {exc}", line, 1)
    _, left, right, clauses = parsed
    segments = []
    for a, b, tree, expr_text, line in clauses:
        if not a < b:
            raise PotentialParseError(f"clause needs a < b, got [{a},{b})", line, 1)
        if tree[0] == "num":
            form = Constant(tree[1])
        else:
            form = Expression(tree, expr_text)
        segments.append(Segment(a, b, form))
    length = max(s.b for s in segments)
    pot = Potential(
        length=length,
        segments=tuple(segments),
        v_left=left if left is not None else 0.0,
        v_right=right if right is not None else 0.0,
    )
    return _validate_sampling(pot)


def builtin_square(height=1.0, width=1.0):
    """Rectangular barrier of the given height (eV) and width (nm)."""
    return Potential(width, (Segment(0.0, width, Constant(height)),))


def builtin_parabolic(height=10.0, width=2.0):
    """Truncated parabola height*((x-w/2)/(w/2))^2 on [0, width].

    The defaults give V(x) = 10 (x-1)^2 on [0, 2]: a 10 eV parabolic
    barrier enclosing a harmonic well with curvature 10 eV/nm^2.
    """
    half = width / 2.0
    c2 = height / half**2
    coeffs = (height, -2.0 * c2 * half, c2)
    return Potential(width, (Segment(0.0, width, Polynomial(coeffs)),))


def builtin_double_barrier(height=5.0, width=0.4, gap=1.2):
    """Two rectangular walls separated by a flat well (resonant structure)."""
    total = 2.0 * width + gap
    segs = (
        Segment(0.0, width, Constant(height)),
        Segment(width, width + gap, Constant(0.0)),
        Segment(width + gap, total, Constant(height)),
    )
    return Potential(total, segs)


_ARBITRARY_TEXT = "7.2*exp(-((x-0.85)/0.45)^2) + 5.3*exp(-((x-1.75)/0.3)^2)"


def builtin_arbitrary():
    """A smooth, asymmetric two-hump barrier used for demonstrations.

    This is a stand-in: it is NOT the barrier any published figure was
    computed from (no analytic form was ever given for that one), it just
    has the same flavor -- smooth, lopsided, with a dip between humps.
    Maximum is about 7.2 eV on [0, 2.6].
    """
    return Potential(2.6, (Segment(0.0, 2.6, Expression.parse(_ARBITRARY_TEXT)),))


BUILTINS = {
    "square": builtin_square,
    "parabola": builtin_parabolic,
    "double_barrier": builtin_double_barrier,
    "arbitrary": builtin_arbitrary,
}


def mirrored(p):
    """The potential reflected through x -> L - x, with exterior levels swapped.

    One-dimensional scattering is reciprocal: for equal exterior levels the
    transmission of the mirrored barrier equals the original's.
    """
    length_text = repr(float(p.length))
    segs = []
    for seg in p.segments:
        if isinstance(seg.form, Constant):
            form = seg.form
        else:
            text = re.sub(r"\bx\b", f"({length_text} - x)", seg.form.render())
            form = Expression.parse(text)
        segs.append(Segment(p.length - seg.b, p.length - seg.a, form))
    return Potential(p.length, tuple(segs), v_left=p.v_right, v_right=p.v_left)

"""Per-edge Kelvin-Voigt damping coefficients and the node hypotheses on them.

A coefficient a(x) on an edge is zero (purely elastic edge), a positive
constant, or a piecewise polynomial that is nonnegative and strictly positive
on the interior of each nonzero piece.  Piecewise polynomials keep assembly
quadrature exact and make one-sided derivative values at the vertices exact,
which is what the node inequality checks need.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import InvalidDampingProfile, OutOfDomain
from .graph import MetricGraph, adjacent_edges, interior_vertices

_REL_SLACK = 1e-12  # domain-boundary slack, relative to edge length
_JUMP_RTOL = 1e-9  # relative tolerance for detecting jumps at interior breaks


class DampingProfile:
    """Damping coefficient on one edge, with exact derivative access.

    Construct via :meth:`zero`, :meth:`constant`, :meth:`piecewise`, or
    :meth:`from_config`.  Instances are immutable.
    """

    __slots__ = ("kind", "length", "value", "breaks", "coeffs")

    def __init__(self, kind: str, length: float, value: float = 0.0,
                 breaks: np.ndarray | None = None,
                 coeffs: tuple[np.ndarray, ...] | None = None):
        self.kind = kind
        self.length = float(length)
        self.value = float(value)
        self.breaks = breaks
        self.coeffs = coeffs

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, length: float) -> "DampingProfile":
        """a == 0 on [0, length]: a purely elastic edge."""
        _check_length(length)
        return cls("zero", length)

    @classmethod
    def constant(cls, value: float, length: float) -> "DampingProfile":
        """a == value > 0 on [0, length].  value = 0 degrades to the zero profile."""
        _check_length(length)
        if value < 0:
            raise InvalidDampingProfile(f"constant damping must be >= 0, got {value}")
        if value == 0:
            return cls.zero(length)
        breaks = np.array([0.0, float(length)])
        coeffs = (np.array([float(value)]),)
        return cls("constant", length, value=value, breaks=breaks, coeffs=coeffs)

    @classmethod
    def piecewise(cls, breaks: Iterable[float], coeffs: Iterable[Iterable[float]]) -> "DampingProfile":
        """Piecewise polynomial on [breaks[0]=0, breaks[-1]=length].

        `coeffs` holds one row per piece, ascending powers of the local
        coordinate measured from the piece's left endpoint.  Each piece must
        be identically zero or strictly positive on its open interior.
        """
        b = np.asarray(list(breaks), dtype=float)
        rows = tuple(np.trim_zeros(np.atleast_1d(np.asarray(list(r), dtype=float)), "b")
                     for r in coeffs)
        rows = tuple(r if r.size else np.zeros(1) for r in rows)
        if b.ndim != 1 or b.size < 2:
            raise InvalidDampingProfile("breaks must list at least [0, length]")
        if abs(b[0]) > _REL_SLACK * max(1.0, abs(b[-1])):
            raise InvalidDampingProfile(f"breaks must start at 0, got {b[0]}")
        b[0] = 0.0
        if np.any(np.diff(b) <= 0):
            raise InvalidDampingProfile("breaks must be strictly increasing")
        if len(rows) != b.size - 1:
            raise InvalidDampingProfile(
                f"{b.size - 1} pieces but {len(rows)} coefficient rows"
            )
        length = float(b[-1])
        _check_length(length)
        for i, row in enumerate(rows):
            _check_piece_admissible(row, b[i + 1] - b[i], i)
        if all(np.all(r == 0.0) for r in rows):
            return cls.zero(length)
        return cls("pp", length, breaks=b, coeffs=rows)

    @classmethod
    def from_config(cls, cfg: Mapping, length: float) -> "DampingProfile":
        """Build from the JSON form {"kind": "zero"|"constant"|"pp", ...}."""
        kind = cfg.get("kind")
        if kind == "zero":
            return cls.zero(length)
        if kind == "constant":
            return cls.constant(cfg["value"], length)
        if kind == "pp":
            prof = cls.piecewise(cfg["breaks"], cfg["coeffs"])
            if abs(prof.length - length) > _REL_SLACK * max(1.0, length):
                raise InvalidDampingProfile(
                    f"pp profile covers [0, {prof.length}] but edge has length {length}"
                )
            return prof
        raise InvalidDampingProfile(f"unknown damping kind {kind!r}")

    # -- queries ----------------------------------------------------------

    @property
    def is_elastic(self) -> bool:
        return self.kind == "zero"

    @property
    def degree(self) -> int:
        """Maximal polynomial degree over the pieces (0 for zero/constant)."""
        if self.is_elastic:
            return 0
        return max(len(r) - 1 for r in self.coeffs)

    @property
    def interior_breaks(self) -> np.ndarray:
        """Breakpoints strictly inside (0, length)."""
        if self.is_elastic or self.breaks is None:
            return np.empty(0)
        return self.breaks[1:-1].copy()

    def eval(self, x):
        """a(x); one-sided at interior breakpoints (right piece, left at x=length)."""
        return self._eval_deriv(x, 0)

    def eval_d1(self, x):
        """a'(x), piecewise-analytic derivative with the same one-sided rule."""
        return self._eval_deriv(x, 1)

    def eval_d2(self, x):
        """a''(x), same convention."""
        return self._eval_deriv(x, 2)

    def _eval_deriv(self, x, order: int):
        scalar = np.isscalar(x)
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        slack = _REL_SLACK * max(1.0, self.length)
        if np.any(xa < -slack) or np.any(xa > self.length + slack):
            raise OutOfDomain(f"evaluation point outside [0, {self.length}]")
        if self.is_elastic:
            out = np.zeros_like(xa)
        else:
            idx = np.searchsorted(self.breaks, xa, side="right") - 1
            idx = np.clip(idx, 0, len(self.coeffs) - 1)
            out = np.empty_like(xa)
            for i in np.unique(idx):
                row = npp.polyder(self.coeffs[i], order) if order else self.coeffs[i]
                sel = idx == i
                out[sel] = npp.polyval(xa[sel] - self.breaks[i], row)
        return float(out[0]) if scalar else out

    def integral(self, x0: float, x1: float) -> float:
        """Exact integral of a over [x0, x1] (antiderivative difference per piece)."""
        if self.is_elastic:
            return 0.0
        total = 0.0
        for i, row in enumerate(self.coeffs):
            lo, hi = self.breaks[i], self.breaks[i + 1]
            a, b = max(x0, lo), min(x1, hi)
            if b <= a:
                continue
            anti = npp.polyint(row)
            total += npp.polyval(b - lo, anti) - npp.polyval(a - lo, anti)
        return float(total)

    def sup_abs(self, order: int = 0) -> float:
        """sup over [0, length] of |a| (order 0), |a'| (1), or |a''| (2).

        Returns inf when the requested derivative is not an L-infinity
        function: order 1 if a jumps at an interior breakpoint, order 2 if a'
        does (a kink puts a Dirac mass into a'').
        """
        if self.is_elastic:
            return 0.0
        if order >= 1 and self._has_interior_jump(order - 1):
            return float(np.inf)
        sup = 0.0
        for i, row in enumerate(self.coeffs):
            piece_len = self.breaks[i + 1] - self.breaks[i]
            drow = npp.polyder(row, order) if order else row
            sup = max(sup, _poly_sup_abs(drow, piece_len))
        return sup

    def _has_interior_jump(self, order: int) -> bool:
        """True if the order-th derivative jumps at some interior breakpoint."""
        scale = max(1.0, self.sup_abs(0))
        for i in range(len(self.coeffs) - 1):
            left_row = npp.polyder(self.coeffs[i], order) if order else self.coeffs[i]
            right_row = npp.polyder(self.coeffs[i + 1], order) if order else self.coeffs[i + 1]
            left = npp.polyval(self.breaks[i + 1] - self.breaks[i], left_row)
            right = npp.polyval(0.0, right_row)
            if abs(left - right) > _JUMP_RTOL * scale:
                return True
        return False

    def to_config(self) -> dict:
        """JSON-serializable form accepted by :meth:`from_config`."""
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {
            "kind": "pp",
            "breaks": [float(b) for b in self.breaks],
            "coeffs": [[float(c) for c in row] for row in self.coeffs],
        }

    def mirrored(self) -> "DampingProfile":
        """The profile seen from the opposite orientation: a~(x) = a(length - x)."""
        if self.is_elastic:
            return DampingProfile.zero(self.length)
        if self.kind == "constant":
            return DampingProfile.constant(self.value, self.length)
        new_breaks = self.length - self.breaks[::-1]
        new_breaks[0] = 0.0
        new_rows = []
        for i in reversed(range(len(self.coeffs))):
            piece_len = self.breaks[i + 1] - self.breaks[i]
            p = np.polynomial.Polynomial(self.coeffs[i])
            flipped = p(np.polynomial.Polynomial([piece_len, -1.0]))
            new_rows.append(np.atleast_1d(flipped.coef))
        return DampingProfile.piecewise(new_breaks, new_rows)

    def __repr__(self) -> str:
        if self.kind == "constant":
            return f"DampingProfile.constant({self.value}, length={self.length})"
        if self.kind == "zero":
            return f"DampingProfile.zero(length={self.length})"
        return f"DampingProfile.piecewise(<{len(self.coeffs)} pieces>, length={self.length})"


DampingAssignment = Mapping[int, DampingProfile]


@dataclass(frozen=True)
class EdgeDerivativeBounds:
    """L-infinity bounds of a, a', a'' on one edge (inf flags non-membership)."""

    sup_a: float
    sup_da: float
    sup_d2a: float

    @property
    def finite(self) -> bool:
        return np.isfinite(self.sup_da) and np.isfinite(self.sup_d2a)


@dataclass(frozen=True)
class PropertyReport:
    """Result of the damping-regularity and node-inequality check."""

    mode: str
    edge_bounds: Mapping[int, EdgeDerivativeBounds]
    node_values: Mapping[int, float]
    node_satisfied: Mapping[int, bool]
    overall: bool
    tol: float
    messages: tuple[str, ...]


@dataclass(frozen=True)
class ContinuityReport:
    """Damping-coefficient endpoint values at every interior vertex."""

    node_values: Mapping[int, tuple[float, ...]]
    node_continuous: Mapping[int, bool]
    case: str  # "I" (continuous at every inner node) | "II"
    tol: float


def check_property_P(
    g: MetricGraph, damping: DampingAssignment, tol: float | None = None
) -> PropertyReport:
    """Check derivative regularity plus the signed node inequality on a'.

    In tree mode the value at an interior vertex is
    ``a'_parent(length) - sum(a'_child(0))`` and must be <= tol.  In graph
    mode the value is the incidence-signed sum of inward derivatives of a at
    the vertex and must be >= -tol.  The two forms agree vertex by vertex on
    trees oriented away from the root.
    """
    bounds: dict[int, EdgeDerivativeBounds] = {}
    messages: list[str] = []
    for e in g.edges:
        prof = damping[e.id]
        eb = EdgeDerivativeBounds(prof.sup_abs(0), prof.sup_abs(1), prof.sup_abs(2))
        bounds[e.id] = eb
        if not np.isfinite(eb.sup_da):
            messages.append(
                f"edge {g.edge_labels.get(e.id, e.id)}: a jumps inside the edge, "
                "a' is not in L-infinity (split the edge at the jump)"
            )
        elif not np.isfinite(eb.sup_d2a):
            messages.append(
                f"edge {g.edge_labels.get(e.id, e.id)}: a' has an interior kink, "
                "a'' is not in L-infinity"
            )
    sup_a_global = max((b.sup_a for b in bounds.values()), default=0.0)
    eff_tol = tol if tol is not None else 1e-12 * max(1.0, sup_a_global)

    node_values: dict[int, float] = {}
    node_ok: dict[int, bool] = {}
    for v in sorted(interior_vertices(g)):
        incident = adjacent_edges(g, v)
        if g.mode == "tree":
            parents = [eid for eid, s in incident if s == 1]
            children = [eid for eid, s in incident if s == -1]
            val = damping[parents[0]].eval_d1(g.edge(parents[0]).length)
            val -= sum(damping[eid].eval_d1(0.0) for eid in children)
            ok = val <= eff_tol
        else:
            # inward derivative of a at the vertex, summed over incident edges
            val = 0.0
            for eid, sign in incident:
                x = g.edge(eid).length if sign == 1 else 0.0
                val += -sign * damping[eid].eval_d1(x)
            ok = val >= -eff_tol
        node_values[v] = float(val)
        node_ok[v] = bool(ok)
        if not ok:
            messages.append(
                f"node inequality violated at vertex {g.vertex_labels.get(v, v)} "
                f"(value {val:.6g})"
            )

    overall = all(b.finite for b in bounds.values()) and all(node_ok.values())
    return PropertyReport(
        mode=g.mode,
        edge_bounds=bounds,
        node_values=node_values,
        node_satisfied=node_ok,
        overall=bool(overall),
        tol=eff_tol,
        messages=tuple(messages),
    )


def classify_continuity(
    g: MetricGraph, damping: DampingAssignment, tol: float | None = None
) -> ContinuityReport:
    """Classify the damping coefficient as continuous (case I) or not (case II)
    across interior vertices.  Elastic edges contribute the endpoint value 0."""
    sup_a_global = max((damping[e.id].sup_abs(0) for e in g.edges), default=0.0)
    eff_tol = tol if tol is not None else 1e-12 * max(1.0, sup_a_global)

    values: dict[int, tuple[float, ...]] = {}
    cont: dict[int, bool] = {}
    for v in sorted(interior_vertices(g)):
        vals = []
        for eid, sign in adjacent_edges(g, v):
            x = g.edge(eid).length if sign == 1 else 0.0
            vals.append(float(damping[eid].eval(x)))
        values[v] = tuple(vals)
        cont[v] = (max(vals) - min(vals)) <= eff_tol if vals else True
    case = "I" if all(cont.values()) else "II"
    return ContinuityReport(node_values=values, node_continuous=cont, case=case, tol=eff_tol)


# -- helpers ---------------------------------------------------------------


def _check_length(length: float) -> None:
    if not length > 0:
        raise InvalidDampingProfile(f"profile length must be > 0, got {length}")


def _poly_sup_abs(row: np.ndarray, piece_len: float) -> float:
    """Exact sup of |p| over [0, piece_len] via endpoint and critical values."""
    candidates = [0.0, piece_len]
    if len(row) > 2:
        der = npp.polyder(row)
        roots = npp.polyroots(der) if np.any(der != 0) else np.empty(0)
        for r in roots:
            if abs(r.imag) < 1e-9 * max(1.0, abs(r.real)) and 0.0 < r.real < piece_len:
                candidates.append(float(r.real))
    return float(max(abs(npp.polyval(np.array(candidates), row))))


def _check_piece_admissible(row: np.ndarray, piece_len: float, index: int) -> None:
    """Reject pieces that go negative or vanish strictly inside their interval."""
    if np.all(row == 0.0):
        return
    vals = npp.polyval(np.array([0.0, piece_len]), row)
    if min(vals) < -1e-12 * max(1.0, float(np.max(np.abs(row)))):
        raise InvalidDampingProfile(f"piece {index}: negative at an endpoint")
    roots = npp.polyroots(row) if len(row) > 1 else np.empty(0)
    tol = 1e-12 * max(1.0, piece_len)
    for r in roots:
        if abs(r.imag) < 1e-9 * max(1.0, abs(r.real)) and tol < r.real < piece_len - tol:
            raise InvalidDampingProfile(
                f"piece {index}: vanishes or changes sign at x={r.real:.6g} "
                "inside the piece (split the edge instead)"
            )

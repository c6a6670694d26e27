"""Conforming P1 finite elements on a metric graph.

Continuity of the displacement across a vertex is built into the DOF map
(every edge endpoint meeting at a vertex shares one DOF) and the damped flux
balance at interior vertices is natural for the weak form, so neither
transmission condition is imposed explicitly.  Dirichlet vertices are
eliminated.  The semi-discrete system is

    M u'' + K_a u' + K u = 0,

with consistent mass M, stiffness K, and damped stiffness K_a whose entries
are integrals of a(x) against P1 gradients, computed with Gauss-Legendre
quadrature that is exact for the piecewise-polynomial coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .damping import DampingAssignment
from .errors import (
    InvalidNetwork,
    QuadratureDegreeOverflow,
    ResolutionTooCoarse,
    SingularMass,
)
from .graph import MetricGraph

_MAX_DAMPING_DEGREE = 20
_DENSE_CHECK_LIMIT = 4000  # skip dense SPD certification above this DOF count


@dataclass(frozen=True)
class EdgeMesh:
    """Uniform grid on one edge (damping breakpoints inserted as nodes)."""

    edge_id: int
    nodes: np.ndarray  # coordinates, nodes[0] = 0, nodes[-1] = length
    dofs: np.ndarray  # global DOF per node, -1 where Dirichlet-eliminated


@dataclass(frozen=True)
class Mesh:
    """Global P1 mesh: per-edge grids plus the vertex-identified DOF map."""

    graph: MetricGraph
    edge_meshes: tuple[EdgeMesh, ...]
    vertex_dof: Mapping[int, int]  # -1 for Dirichlet vertices
    n_dofs: int

    @property
    def h_min(self) -> float:
        return min(float(np.min(np.diff(em.nodes))) for em in self.edge_meshes)

    @property
    def h_max(self) -> float:
        return max(float(np.max(np.diff(em.nodes))) for em in self.edge_meshes)


def build_mesh(
    g: MetricGraph,
    resolution: int | Mapping[int, int],
    damping: DampingAssignment | None = None,
) -> Mesh:
    """Mesh every edge with at least 2 cells.

    `resolution` is either cells per unit length (int) or a per-edge cell
    count mapping.  When a damping assignment is passed, interior breakpoints
    of each profile are inserted as mesh nodes so that assembly quadrature is
    exact across pieces.
    """
    edge_nodes: list[np.ndarray] = []
    for e in g.edges:
        if isinstance(resolution, Mapping):
            try:
                cells = int(resolution[e.id])
            except KeyError:
                raise InvalidNetwork(f"no cell count for edge {e.id}") from None
        else:
            cells = int(round(resolution * e.length))
        if cells < 2:
            raise ResolutionTooCoarse(
                f"edge {g.edge_labels.get(e.id, e.id)}: {cells} cells (need >= 2)"
            )
        nodes = np.linspace(0.0, e.length, cells + 1)
        if damping is not None and e.id in damping:
            extra = [
                b for b in damping[e.id].interior_breaks
                if np.min(np.abs(nodes - b)) > 1e-9 * e.length
            ]
            if extra:
                nodes = np.sort(np.concatenate([nodes, extra]))
        edge_nodes.append(nodes)

    vertex_dof: dict[int, int] = {}
    next_dof = 0
    for v in g.vertices:
        if v in g.dirichlet:
            vertex_dof[v] = -1
        else:
            vertex_dof[v] = next_dof
            next_dof += 1

    edge_meshes: list[EdgeMesh] = []
    for e, nodes in zip(g.edges, edge_nodes):
        dofs = np.empty(len(nodes), dtype=np.int64)
        dofs[0] = vertex_dof[e.tail]
        dofs[-1] = vertex_dof[e.head]
        n_int = len(nodes) - 2
        dofs[1:-1] = np.arange(next_dof, next_dof + n_int)
        next_dof += n_int
        edge_meshes.append(EdgeMesh(e.id, nodes, dofs))

    # sanity: sum(cells+1) - identifications - |dirichlet| == n_dofs
    expected = (
        sum(len(n) for n in edge_nodes)
        - sum(g.degree(v) - 1 for v in g.vertices)
        - len(g.dirichlet)
    )
    assert expected == next_dof, "DOF bookkeeping mismatch"
    return Mesh(g, tuple(edge_meshes), vertex_dof, next_dof)


@lru_cache(maxsize=32)
def _gauss_rule(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_points)
    return x, w


class DiscreteSystem:
    """Assembled matrices of one network; immutable after construction.

    Attributes
    ----------
    M, K, Ka : scipy.sparse.csr_matrix
        Consistent mass, stiffness, damped stiffness.  M and K are symmetric
        positive definite, Ka symmetric positive semidefinite with sparsity
        contained in K's.
    n : int
        Number of free DOFs.
    """

    def __init__(self, mesh: Mesh, M, K, Ka, damping: DampingAssignment):
        self.mesh = mesh
        self.graph = mesh.graph
        self.M = M
        self.K = K
        self.Ka = Ka
        self.n = M.shape[0]
        self.damping = damping
        self._cache: dict[str, object] = {}

    @property
    def is_damped(self) -> bool:
        return self.Ka.nnz > 0

    def energy_inner(self, za, zb) -> complex | float:
        """Energy inner product <z, z~> = u^T K conj(u~) + v^T M conj(v~)."""
        n = self.n
        ua, va = za[:n], za[n:]
        ub, vb = zb[:n], zb[n:]
        out = np.vdot(ub, self.K @ ua) + np.vdot(vb, self.M @ va)
        return out if np.iscomplexobj(za) or np.iscomplexobj(zb) else float(out.real if np.iscomplexobj(out) else out)

    def energy(self, u, v) -> float:
        """E = (u^T K u + v^T M v) / 2."""
        return 0.5 * (float(u @ (self.K @ u)) + float(v @ (self.M @ v)))

    def dissipation(self, v) -> float:
        """Instantaneous dissipation rate v^T K_a v."""
        return float(v @ (self.Ka @ v))

    def _cached(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def mass_solver(self):
        def build():
            try:
                lu = spla.splu(self.M.tocsc())
            except RuntimeError as exc:  # pragma: no cover - assembly bug guard
                raise SingularMass(str(exc)) from exc
            return lu
        return self._cached("mass_solver", build)

    def solve_mass(self, b):
        """M^{-1} b for real or complex right-hand sides."""
        lu = self.mass_solver
        if np.iscomplexobj(b):
            return lu.solve(b.real) + 1j * lu.solve(b.imag)
        return lu.solve(b)

    @property
    def dense_generator(self) -> np.ndarray:
        """First-order block matrix [[0, I], [-M^{-1}K, -M^{-1}K_a]] (dense)."""
        def build():
            n = self.n
            A = np.zeros((2 * n, 2 * n))
            A[:n, n:] = np.eye(n)
            rhs = np.hstack([self.K.toarray(), self.Ka.toarray()])
            sol = la.solve(self.M.toarray(), rhs, assume_a="pos")
            A[n:, :n] = -sol[:, :n]
            A[n:, n:] = -sol[:, n:]
            return A
        return self._cached("dense_generator", build)

    @property
    def energy_weighting(self) -> np.ndarray:
        """Upper-triangular F with F^T F = blockdiag(K, M); ||F z|| is the energy norm."""
        def build():
            n = self.n
            FK = la.cholesky(self.K.toarray(), lower=False)
            FM = la.cholesky(self.M.toarray(), lower=False)
            F = np.zeros((2 * n, 2 * n))
            F[:n, :n] = FK
            F[n:, n:] = FM
            return F
        return self._cached("energy_weighting", build)

    @property
    def weighted_generator(self) -> np.ndarray:
        """F A F^{-1}: the generator expressed in energy-norm coordinates."""
        def build():
            F = self.energy_weighting
            tmp = la.solve_triangular(F, self.dense_generator.T, lower=False, trans="T").T
            return F @ tmp
        return self._cached("weighted_generator", build)


def assemble(mesh: Mesh, damping: DampingAssignment) -> DiscreteSystem:
    """Assemble M, K, K_a over the mesh with the given damping assignment.

    Element integrals of a(x) use Gauss-Legendre with ceil((deg+2)/2) points
    on each cell-piece overlap, exact for polynomial a against the constant
    P1 gradients.  Dirichlet rows/columns are never created.
    """
    g = mesh.graph
    rows_m, cols_m, vals_m = [], [], []
    rows_k, cols_k, vals_k = [], [], []
    rows_a, cols_a, vals_a = [], [], []
    min_cell_integral = 0.0

    for em in mesh.edge_meshes:
        prof = damping[em.edge_id]
        if prof.degree > _MAX_DAMPING_DEGREE:
            raise QuadratureDegreeOverflow(
                f"edge {em.edge_id}: damping degree {prof.degree} > {_MAX_DAMPING_DEGREE}"
            )
        n_q = max(1, int(np.ceil((prof.degree + 2) / 2)))
        xq, wq = _gauss_rule(n_q)
        nodes, dofs = em.nodes, em.dofs
        for c in range(len(nodes) - 1):
            x0, x1 = nodes[c], nodes[c + 1]
            h = x1 - x0
            me = (h / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
            ke = (1.0 / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
            pair = (dofs[c], dofs[c + 1])
            _scatter(rows_m, cols_m, vals_m, pair, me)
            _scatter(rows_k, cols_k, vals_k, pair, ke)
            if prof.is_elastic:
                continue
            s = _integrate_profile(prof, x0, x1, xq, wq)
            min_cell_integral = min(min_cell_integral, s)
            if s != 0.0:
                _scatter(rows_a, cols_a, vals_a, pair, (s / h**2) * np.array([[1.0, -1.0], [-1.0, 1.0]]))

    n = mesh.n_dofs
    M = sp.coo_matrix((vals_m, (rows_m, cols_m)), shape=(n, n)).tocsr()
    K = sp.coo_matrix((vals_k, (rows_k, cols_k)), shape=(n, n)).tocsr()
    Ka = sp.coo_matrix((vals_a, (rows_a, cols_a)), shape=(n, n)).tocsr()
    Ka.eliminate_zeros()

    # PSD certificate for Ka: every element contribution is s/h^2 * [[1,-1],[-1,1]]
    # with s = integral of a >= 0, so the sum is PSD whenever no s went negative.
    if min_cell_integral < -1e-14 * max(1.0, Ka.max() if Ka.nnz else 0.0):
        raise InvalidNetwork("negative damping integral; profile admissibility is broken")

    if n <= _DENSE_CHECK_LIMIT:
        try:
            la.cholesky(M.toarray())
        except la.LinAlgError as exc:
            raise SingularMass(f"mass matrix not positive definite: {exc}") from exc
        try:
            la.cholesky(K.toarray())
        except la.LinAlgError as exc:
            raise InvalidNetwork(f"stiffness not positive definite: {exc}") from exc

    return DiscreteSystem(mesh, M, K, Ka, damping)


def _scatter(rows, cols, vals, pair, elem) -> None:
    for i in range(2):
        if pair[i] < 0:
            continue
        for j in range(2):
            if pair[j] < 0:
                continue
            rows.append(pair[i])
            cols.append(pair[j])
            vals.append(elem[i, j])


def _integrate_profile(prof, x0: float, x1: float, xq, wq) -> float:
    """Integral of a over [x0, x1], split at profile breakpoints for exactness."""
    cuts = [x0, x1]
    for b in prof.interior_breaks:
        if x0 < b < x1:
            cuts.append(float(b))
    cuts.sort()
    total = 0.0
    for a0, a1 in zip(cuts[:-1], cuts[1:]):
        mid, half = 0.5 * (a0 + a1), 0.5 * (a1 - a0)
        # evaluate strictly inside the segment so the one-sided rule is moot
        total += half * float(wq @ prof.eval(mid + half * xq))
    return total


class GeneratorAction:
    """Matrix-free action (u, v) -> (v, -M^{-1}(K u + K_a v)) with cached mass factor."""

    def __init__(self, sys: DiscreteSystem):
        self.sys = sys
        self.shape = (2 * sys.n, 2 * sys.n)

    def apply(self, u, v):
        sys = self.sys
        return v.copy(), -sys.solve_mass(sys.K @ u + sys.Ka @ v)

    def apply_state(self, z):
        n = self.sys.n
        du, dv = self.apply(z[:n], z[n:])
        return np.concatenate([du, dv])

    __call__ = apply_state

    def apply_adjoint_state(self, z):
        """Transpose action, used by norm estimation."""
        sys = self.sys
        n = sys.n
        x, y = z[:n], z[n:]
        w = sys.solve_mass(y)
        return np.concatenate([-(sys.K @ w), x - sys.Ka @ w])


def generator(sys: DiscreteSystem) -> GeneratorAction:
    """First-order generator of the semi-discrete evolution; factorizes M once."""
    sys.mass_solver  # force factorization so SingularMass surfaces here
    return GeneratorAction(sys)


def operator_norm_estimate(sys: DiscreteSystem, iters: int = 20) -> float:
    """Deterministic power-iteration estimate of ||A||_2 (matrix-free)."""
    act = GeneratorAction(sys)
    z = np.ones(2 * sys.n) / np.sqrt(2 * sys.n)
    est = 1.0
    for _ in range(iters):
        w = act.apply_adjoint_state(act.apply_state(z))
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        est = np.sqrt(nrm)
        z = w / nrm
    return float(est)


@dataclass(frozen=True)
class WellPosedness:
    """Discrete counterparts of the generation hypotheses: invertibility of the
    generator and of (I - A), and dissipativity in the energy inner product."""

    zero_in_resolvent: bool
    one_in_resolvent: bool
    dissipative: bool
    cond_generator: float
    cond_shifted: float
    max_identity_residual: float


def check_generator_wellposed(
    sys: DiscreteSystem,
    n_states: int = 100,
    seed: int = 0,
    cond_limit: float = 1e12,
) -> WellPosedness:
    """Verify 0 and 1 lie in the resolvent set of the discrete generator and
    that Re<A z, z>_E = -v^T K_a v <= 0 on random unit-energy states."""
    A = sys.dense_generator
    svals = la.svdvals(A)
    cond_a = float(svals[0] / svals[-1]) if svals[-1] > 0 else np.inf
    anorm = float(svals[0])
    svals_shift = la.svdvals(np.eye(2 * sys.n) - A)
    cond_s = float(svals_shift[0] / svals_shift[-1]) if svals_shift[-1] > 0 else np.inf

    rng = np.random.default_rng(seed)
    tol = 1e-12 * max(1.0, anorm)
    max_resid = 0.0
    dissipative = True
    n = sys.n
    for _ in range(n_states):
        z = rng.standard_normal(2 * n)
        z /= np.sqrt(sys.energy_inner(z, z))
        az = A @ z
        re = float(sys.energy_inner(az, z))
        rhs = -sys.dissipation(z[n:])
        max_resid = max(max_resid, abs(re - rhs))
        if re > tol or abs(re - rhs) > tol:
            dissipative = False
    return WellPosedness(
        zero_in_resolvent=cond_a < cond_limit,
        one_in_resolvent=cond_s < cond_limit,
        dissipative=dissipative,
        cond_generator=cond_a,
        cond_shifted=cond_s,
        max_identity_residual=max_resid,
    )


def dump_matrices(sys: DiscreteSystem, directory, prefix: str = "") -> list:
    """Write M, K, K_a in MatrixMarket coordinate format; returns the paths."""
    from pathlib import Path
    from scipy.io import mmwrite

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, mat in (("M", sys.M), ("K", sys.K), ("K_a", sys.Ka)):
        path = directory / f"{prefix}{name}.mtx"
        mmwrite(path, mat.tocoo())
        paths.append(path)
    return paths

"""Assembly and solution of the stationary pressurized-crack problem.

The mesh pattern is rescaled to the current crack length, the crack face is
loaded with the net pressure (and optionally the wall shear traction), the
symmetric half-widths follow from the face displacements.  Dirichlet and
tie constraints are applied through a sparse transformation so the reduced
system stays symmetric positive definite; it is factorized once per
(geometry, material-assignment) signature and reused across the coupling
iterations of a time step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import InputError, NumericalError, PhysicalStateError
from ..materials import ConfiningStress, MaterialField
from .elements import (GAUSS_2X2, QUAD8_GRADS, QUAD8_SHAPES, corner_fan_bmatrices,
                       infinite5_bmatrices, plane_strain_d)
from .mesh import FemMesh

__all__ = ["FemSolution", "CrackSolver", "solve_crack", "extract_opening",
           "extract_sif", "principal_stresses"]

_FACE_GAUSS_N = 6
_TIP_GAUSS_N = 24


@dataclass
class FemSolution:
    """Displacement solution on a rescaled mesh with its inputs."""

    mesh: FemMesh
    material: MaterialField
    confine: ConfiningStress
    u: np.ndarray  # (n_nodes, 2)
    residual: float


def _quad8_b_matrices(coords, quad8):
    """B matrices of the 8-node quads at the 2x2 Gauss points.

    Axis-aligned rectangles with centered midsides (the bulk of the mesh)
    are handled vectorized with their constant diagonal Jacobian; the few
    distorted elements (quarter-point midsides at the tip) go through the
    general isoparametric path.  Returns (B, detJ, xq): B is
    (nelem, 4, 3, 16), detJ (nelem, 4), xq the quadrature x coordinates
    (nelem, 4) for material lookup.
    """
    xy = coords[quad8]  # (E, 8, 2)
    hx = xy[:, 1, 0] - xy[:, 0, 0]
    hy = xy[:, 3, 1] - xy[:, 0, 1]
    if np.any(hx <= 0) or np.any(hy <= 0):
        raise NumericalError("non-positive element extent")
    mid_expect = 0.5 * (xy[:, [0, 1, 2, 3]] + xy[:, [1, 2, 3, 0]])
    scale = np.maximum(hx, hy)[:, None, None]
    regular = np.all(np.abs(xy[:, 4:] - mid_expect) <= 1e-12 * scale, axis=(1, 2))

    E = len(quad8)
    B = np.zeros((E, 4, 3, 16))
    det = np.empty((E, 4))
    det[:] = ((hx / 2) * (hy / 2))[:, None]
    for g in range(4):
        gx = QUAD8_GRADS[g][:, 0][None, :] * (2.0 / hx)[:, None]  # (E, 8)
        gy = QUAD8_GRADS[g][:, 1][None, :] * (2.0 / hy)[:, None]
        B[:, g, 0, 0::2] = gx
        B[:, g, 1, 1::2] = gy
        B[:, g, 2, 0::2] = gy
        B[:, g, 2, 1::2] = gx
    xc = 0.5 * (xy[:, 0, 0] + xy[:, 1, 0])
    xq = xc[:, None] + np.array([g[0] for g in GAUSS_2X2])[None, :] * (hx / 2)[:, None]

    for e in np.nonzero(~regular)[0]:
        for g in range(4):
            dN = QUAD8_GRADS[g]
            J = xy[e].T @ dN
            dj = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            if dj <= 0:
                raise NumericalError("non-positive Jacobian in distorted element")
            grad = dN @ np.linalg.inv(J)
            B[e, g] = 0.0
            B[e, g, 0, 0::2] = grad[:, 0]
            B[e, g, 1, 1::2] = grad[:, 1]
            B[e, g, 2, 0::2] = grad[:, 1]
            B[e, g, 2, 1::2] = grad[:, 0]
            det[e, g] = dj
            xq[e, g] = QUAD8_SHAPES[g] @ xy[e, :, 0]
    return B, det, xq


def _material_tables(material: MaterialField, xq):
    """Constitutive matrices per (element, gauss point) plus a signature of
    the layer assignment (factorization reuse key)."""
    idx = material.layer_index(xq)
    mats = [plane_strain_d(layer.youngs_modulus, layer.poissons_ratio)
            for layer in material.layers]
    D = np.stack(mats)[idx]
    return D, idx.tobytes()


def _assemble(mesh: FemMesh, material: MaterialField):
    coords = mesh.coords
    ndof = 2 * mesh.n_nodes

    B, det, xq = _quad8_b_matrices(coords, mesh.quad8)
    D, signature = _material_tables(material, xq)
    # K_e = sum_g B^T D B * detJ (unit Gauss weights for 2x2)
    K_e = np.einsum("egki,egkl,eglj,eg->eij", B, D, B, det, optimize=True)

    dofs = np.empty((len(mesh.quad8), 16), dtype=int)
    dofs[:, 0::2] = 2 * mesh.quad8
    dofs[:, 1::2] = 2 * mesh.quad8 + 1
    rows = np.repeat(dofs, 16, axis=1).ravel()
    cols = np.tile(dofs, (1, 16)).ravel()
    data = K_e.ravel()

    if len(mesh.inf4):
        r2, c2, d2, sig2 = _assemble_infinite(mesh, material)
        rows = np.concatenate([rows, r2])
        cols = np.concatenate([cols, c2])
        data = np.concatenate([data, d2])
        signature += sig2

    K = sp.coo_matrix((data, (rows, cols)), shape=(ndof, ndof)).tocsr()
    return K, signature


def _assemble_infinite(mesh: FemMesh, material: MaterialField):
    coords = mesh.coords
    rows, cols, data = [], [], []
    xq_all = []
    for k, conn in enumerate(mesh.inf4):
        mid = mesh.inf_mid[k] if mesh.inf_mid is not None else -1
        if mid >= 0:
            ids = np.array([conn[0], mid, conn[1], conn[2], conn[3]])
            B, det, xq, wq = infinite5_bmatrices(coords[ids])
        else:
            ids = np.asarray(conn)
            B, det, xq, wq = corner_fan_bmatrices(coords[ids])
        if np.any(det <= 0):
            raise NumericalError("non-positive Jacobian in infinite element")
        idx = material.layer_index(xq[:, 0])
        n = 2 * len(ids)
        Ke = np.zeros((n, n))
        for g in range(len(wq)):
            layer = material.layers[idx[g]]
            D = plane_strain_d(layer.youngs_modulus, layer.poissons_ratio)
            Ke += B[g].T @ D @ B[g] * (det[g] * wq[g])
        dof = np.empty(n, dtype=int)
        dof[0::2] = 2 * ids
        dof[1::2] = 2 * ids + 1
        rows.append(np.repeat(dof, n))
        cols.append(np.tile(dof, n))
        data.append(Ke.ravel())
        xq_all.append(idx)
    return (np.concatenate(rows), np.concatenate(cols), np.concatenate(data),
            np.concatenate(xq_all).tobytes())


def _constraint_transform(mesh: FemMesh):
    """Sparse map from reduced to full DOFs: Dirichlet DOFs dropped, tied
    DOFs expressed by quadratic weights on their master nodes."""
    ndof = 2 * mesh.n_nodes
    fixed = set()
    for n in mesh.fix_x:
        fixed.add(2 * int(n))
    for n in mesh.fix_y:
        fixed.add(2 * int(n) + 1)
    slaves = {}
    for slave, weights in mesh.ties:
        for comp in (0, 1):
            slaves[2 * int(slave) + comp] = [(2 * int(m) + comp, w) for m, w in weights]
    keep = [d for d in range(ndof) if d not in fixed and d not in slaves]
    red_index = {d: i for i, d in enumerate(keep)}

    rows, cols, data = [], [], []
    for d in keep:
        rows.append(d)
        cols.append(red_index[d])
        data.append(1.0)
    for d, weights in slaves.items():
        for m, w in weights:
            if m in red_index:
                rows.append(d)
                cols.append(red_index[m])
                data.append(w)
    T = sp.coo_matrix((data, (rows, cols)), shape=(ndof, len(keep))).tocsr()
    return T


class CrackSolver:
    """Stationary-crack FEM solver with factorization reuse.

    The stiffness of the rescaled pattern is scale invariant for a
    homogeneous material (plane strain), so the factorization is computed
    once; for layered domains it is refreshed whenever rescaling moves a
    quadrature point across a layer boundary.
    """

    RESIDUAL_TOL = 1e-10

    def __init__(self, mesh: FemMesh, material: MaterialField,
                 confine: ConfiningStress = None):
        self.pattern = mesh
        self.material = material
        self.confine = confine if confine is not None else ConfiningStress()
        self._T = _constraint_transform(mesh)
        self._factor = None
        self._signature = None
        self._K = None

    def _refresh(self, mesh):
        K, signature = _assemble(mesh, self.material)
        if signature != self._signature:
            K_red = (self._T.T @ K @ self._T).tocsc()
            # symmetric Jacobi equilibration tames the condition number the
            # extreme element aspect ratios would otherwise hand to the
            # factorization
            s = 1.0 / np.sqrt(K_red.diagonal())
            S = sp.diags(s)
            self._factor = splu((S @ K_red @ S).tocsc())
            self._equil = s
            self._K_red = K_red
            self._signature = signature

    def _solve_linear(self, f_red):
        s = self._equil
        y = self._factor.solve(s * f_red)
        return s * y

    def solve(self, a, pressure, shear=None) -> FemSolution:
        """Solve with the pattern rescaled to crack length ``a``.

        ``pressure`` (and optionally ``shear``) load the crack face; each is
        either a field object exposing ``regular_at``/``log_coef`` (or
        ``tip_coef``), a plain callable of the normalized coordinate, or a
        nodal array on the crack-face nodes.
        """
        from .mesh import rescale_mesh

        mesh = rescale_mesh(self.pattern, a)
        self._refresh(mesh)
        f = crack_face_loads(mesh, pressure, shear)
        f_red = self._T.T @ f
        K_red = self._K_red
        u_red = self._solve_linear(f_red)
        res = self._residual(K_red, f_red, u_red)
        for _ in range(2):  # iterative refinement for the last digits
            if res <= self.RESIDUAL_TOL:
                break
            u_red = u_red + self._solve_linear(f_red - K_red @ u_red)
            res = self._residual(K_red, f_red, u_red)
        if not np.isfinite(res) or res > self.RESIDUAL_TOL:
            raise NumericalError(f"linear solve residual {res:.2e} above tolerance")
        u = (self._T @ u_red).reshape(-1, 2)
        return FemSolution(mesh, self.material, self.confine, u, res)

    @staticmethod
    def _residual(K_red, f_red, u_red):
        # normwise backward error |Ku - f| / (|K||u| + |f|): the naive
        # |Ku-f|/|f| is floored by rounding of K@u itself at these
        # condition numbers
        r = K_red @ u_red - f_red
        denom = np.linalg.norm(abs(K_red) @ np.abs(u_red)) + np.linalg.norm(f_red)
        return float(np.linalg.norm(r) / max(denom, 1e-300))


def solve_crack(mesh: FemMesh, material: MaterialField, pressure, shear=None,
                confine: ConfiningStress = None) -> FemSolution:
    """One-shot solve on an already rescaled mesh (see :class:`CrackSolver`
    for the reusing variant employed by the coupling loop)."""
    solver = CrackSolver(mesh, material, confine)
    return solver.solve(mesh.scale, pressure, shear)


# -- crack-face loading -------------------------------------------------------


def _load_split(load, crack_xt):
    """Normalize a face load into (regular callable, singular coefficient,
    kind) with kind 'log' (pressure) or 'invsqrt' (shear)."""
    if load is None:
        return None
    if hasattr(load, "regular_at") and hasattr(load, "log_coef"):
        return load.regular_at, float(load.log_coef), "log"
    if hasattr(load, "regular_at") and hasattr(load, "tip_coef"):
        return load.regular_at, float(load.tip_coef), "invsqrt"
    if callable(load):
        return load, 0.0, "log"
    values = np.asarray(load, dtype=float)
    if values.shape != crack_xt.shape:
        raise InputError("nodal face load does not match the crack-face nodes")
    from scipy.interpolate import CubicSpline

    spline = CubicSpline(crack_xt, values)
    return (lambda x: spline(np.clip(x, 0.0, 1.0))), 0.0, "log"


def _gauss_on(a_, b_, n):
    pts, wts = np.polynomial.legendre.leggauss(n)
    return 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * pts, 0.5 * (b_ - a_) * wts


def _face_shape(t):
    """Quadratic shapes of a 3-node face in t in [-1, 1] (left, mid, right)."""
    return np.array([0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)])


def _face_dshape(t):
    """d/dt of the quadratic face shapes."""
    return np.array([t - 0.5, -2.0 * t, t + 0.5])


def crack_face_loads(mesh: FemMesh, pressure, shear=None):
    """Consistent nodal loads of the face tractions.

    The normal load is the net pressure (opening positive y on the quarter
    model); the tangential load acts along the flow direction.  Faces are
    integrated isoparametrically (the tip face has its midside at the
    quarter position); on the tip face the logarithmic (pressure) and
    inverse-square-root (shear) parts are integrated with the substitution
    ``1 - t = mu**2``, which removes the singularity from the integrand.
    """
    crack = mesh.crack_nodes
    crack_xt = mesh.crack_xt
    p_split = _load_split(pressure, crack_xt)
    s_split = _load_split(shear, crack_xt) if shear is not None else None

    f = np.zeros(2 * mesh.n_nodes)
    a = mesh.scale
    n_face = (len(crack) - 1) // 2
    for k in range(n_face):
        ids = crack[2 * k: 2 * k + 3]
        xn = crack_xt[2 * k: 2 * k + 3]
        is_tip_face = k == n_face - 1

        for split, comp in ((p_split, 1), (s_split, 0)):
            if split is None:
                continue
            reg, coef, kind = split

            def face_integral(tq, wq, traction):
                shp = _face_shape(tq)
                xq = shp.T @ xn
                jac = (_face_dshape(tq).T @ xn) * a
                return shp @ (traction(xq) * jac * wq)

            tq, wq = _gauss_on(-1.0, 1.0, _FACE_GAUSS_N)
            contrib = face_integral(tq, wq, lambda x: np.asarray(reg(x), dtype=float))
            if coef and not is_tip_face:
                if kind == "log":
                    contrib += face_integral(tq, wq, lambda x: coef * np.log1p(-x))
                else:
                    contrib += face_integral(tq, wq, lambda x: coef / np.sqrt(1.0 - x))
            elif coef and is_tip_face:
                mu, wmu = _gauss_on(0.0, np.sqrt(2.0), _TIP_GAUSS_N)
                t = 1.0 - mu**2
                shp = _face_shape(t)
                xq = shp.T @ xn
                jac = (_face_dshape(t).T @ xn) * a
                one_minus = np.maximum(1.0 - xq, 1e-300)
                if kind == "log":
                    sing = coef * np.log(one_minus)
                else:
                    sing = coef / np.sqrt(one_minus)
                contrib += shp @ (sing * jac * 2.0 * mu * wmu)
            f[2 * ids + comp] += contrib
    return f


# -- extraction ---------------------------------------------------------------


def extract_opening(solution: FemSolution):
    """Crack opening on the face nodes: twice the face-normal displacement
    (quarter symmetry).  Raises on interpenetration beyond rounding."""
    mesh = solution.mesh
    w = 2.0 * solution.u[mesh.crack_nodes, 1]
    w[-1] = 0.0  # tip node is constrained
    w_max = np.max(np.abs(w)) if len(w) else 0.0
    if np.any(w < -1e-12 * max(w_max, 1e-300)):
        raise PhysicalStateError("crack faces interpenetrate")
    return w


def extract_sif(solution: FemSolution, n_tip=6):
    """Mode-I stress intensity factor by displacement correlation: fit of the
    face opening over the ``n_tip`` nodes nearest the tip against
    ``w = (4K/E')*sqrt(2(a-x)/pi) + c*(a-x)`` with the tip-side layer
    modulus; the linear term absorbs the leading regular contribution.

    The two nodes nearest the tip (inside and adjacent to the singular
    quarter-point element) are excluded from the correlation window.
    """
    mesh = solution.mesh
    w = extract_opening(solution)
    a = mesh.scale
    x = mesh.coords[mesh.crack_nodes, 0]
    usable = np.arange(len(w) - 3 - n_tip, len(w) - 3)
    if len(usable) < 3:
        raise InputError("SIF fit requires at least 3 usable nodes")
    layer = solution.material.layer_at(a)
    eprime = layer.youngs_modulus / (1.0 - layer.poissons_ratio**2)
    d = np.maximum(a - x[usable], 0.0)
    s = (4.0 / eprime) * np.sqrt(2.0 * d / np.pi)
    A = np.column_stack([s, d / a])
    coef, *_ = np.linalg.lstsq(A, w[usable], rcond=None)
    return float(coef[0])


def principal_stresses(solution: FemSolution, window, shape=(120, 60)):
    """Stresses recovered on a regular output grid.

    ``window`` is ``(x_max, y_max)`` in normalized coordinates.  Quadrature
    stresses are extrapolated to element corners, averaged per node, and
    linearly interpolated on the grid; the predefined confining stress is
    superposed.  Returns ``(X, Y, s11, s22, s33)`` in physical coordinates.
    """
    mesh = solution.mesh
    if window[0] <= 0 or window[1] <= 0:
        raise InputError("window must be positive")
    pat = mesh.nodes
    if window[0] > pat[:, 0].max() or window[1] > pat[:, 1].max():
        raise InputError("window outside the computational domain")

    coords = mesh.coords
    B, det, xq = _quad8_b_matrices(coords, mesh.quad8)
    D, _ = _material_tables(solution.material, xq)
    u_el = solution.u.reshape(-1)[
        (2 * mesh.quad8[:, :, None] + np.arange(2)[None, None, :]).reshape(len(mesh.quad8), 16)
    ]
    stress_gp = np.einsum("egkl,egli,ei->egk", D, B, u_el, optimize=True)

    # bilinear extrapolation from the 2x2 points to the corners
    r = np.sqrt(3.0)
    ext = np.empty((4, 4))
    for c, (xi, eta) in enumerate([(-1, -1), (1, -1), (1, 1), (-1, 1)]):
        for g, (gx, gy) in enumerate(GAUSS_2X2):
            ext[c, g] = 0.25 * (1 + r * gx * xi) * (1 + r * gy * eta)
    stress_corner = np.einsum("cg,egk->eck", ext, stress_gp)

    accum = np.zeros((mesh.n_nodes, 3))
    count = np.zeros(mesh.n_nodes)
    corners = mesh.quad8[:, :4]
    for c in range(4):
        np.add.at(accum, corners[:, c], stress_corner[:, c, :])
        np.add.at(count, corners[:, c], 1.0)
    have = count > 0
    accum[have] /= count[have, None]

    conf = solution.confine
    s11 = accum[:, 0] - conf.sigma_h
    s22 = accum[:, 1] - conf.sigma_v
    nu_node = np.array(
        [solution.material.layer_at(xv).poissons_ratio for xv in coords[:, 0]]
    )
    s33 = nu_node * (accum[:, 0] + accum[:, 1]) - conf.sigma_out

    from scipy.interpolate import LinearNDInterpolator

    pts = coords[have][:, :2]
    a = mesh.scale
    gx = np.linspace(0.0, window[0] * a, shape[0])
    gy = np.linspace(0.0, window[1] * a, shape[1])
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    out = []
    for comp in (s11, s22, s33):
        interp = LinearNDInterpolator(pts, comp[have])
        out.append(interp(X, Y))
    return X, Y, out[0], out[1], out[2]

"""Element kernels: 8-node serendipity quadrilaterals with 2x2 reduced Gauss
integration and 4-node mapped-decay infinite elements.

The infinite element maps the strip ``eta in [-1, 1)`` onto ``[near, inf)``
with geometry factors ``-2*eta/(1-eta)`` (near) and ``(1+eta)/(1-eta)``
(far); displacements decay like ``1/r`` and ``1/r**2`` through the shape
pair ``2*rho**2 - rho`` / ``4*rho*(1-rho)`` with ``rho = (1-eta)/2``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "GAUSS_2X2",
    "quad8_shape",
    "quad8_gradients",
    "infinite5_bmatrices",
    "corner_fan_bmatrices",
    "plane_strain_d",
]

_G = 1.0 / np.sqrt(3.0)
GAUSS_2X2 = [(-_G, -_G), (_G, -_G), (_G, _G), (-_G, _G)]

# serendipity corner/midside local coordinates
_XI = np.array([-1.0, 1.0, 1.0, -1.0, 0.0, 1.0, 0.0, -1.0])
_ETA = np.array([-1.0, -1.0, 1.0, 1.0, -1.0, 0.0, 1.0, 0.0])


def quad8_shape(xi, eta):
    """Shape functions of the 8-node serendipity quad."""
    n = np.empty(8)
    for k in range(4):
        n[k] = 0.25 * (1 + _XI[k] * xi) * (1 + _ETA[k] * eta) * (_XI[k] * xi + _ETA[k] * eta - 1)
    n[4] = 0.5 * (1 - xi**2) * (1 - eta)
    n[5] = 0.5 * (1 + xi) * (1 - eta**2)
    n[6] = 0.5 * (1 - xi**2) * (1 + eta)
    n[7] = 0.5 * (1 - xi) * (1 - eta**2)
    return n


def quad8_gradients(xi, eta):
    """(8, 2) array of dN/d(xi, eta)."""
    g = np.empty((8, 2))
    for k in range(4):
        xk, ek = _XI[k], _ETA[k]
        g[k, 0] = 0.25 * xk * (1 + ek * eta) * (2 * xk * xi + ek * eta)
        g[k, 1] = 0.25 * ek * (1 + xk * xi) * (xk * xi + 2 * ek * eta)
    g[4] = [-xi * (1 - eta), -0.5 * (1 - xi**2)]
    g[5] = [0.5 * (1 - eta**2), -eta * (1 + xi)]
    g[6] = [-xi * (1 + eta), 0.5 * (1 - xi**2)]
    g[7] = [-0.5 * (1 - eta**2), -eta * (1 - xi)]
    return g


QUAD8_GRADS = np.stack([quad8_gradients(xi, eta) for xi, eta in GAUSS_2X2])
QUAD8_SHAPES = np.stack([quad8_shape(xi, eta) for xi, eta in GAUSS_2X2])


def plane_strain_d(E, nu):
    """Plane-strain isotropic constitutive matrix (3x3, engineering shear)."""
    c = E / ((1 + nu) * (1 - 2 * nu))
    return c * np.array(
        [
            [1 - nu, nu, 0.0],
            [nu, 1 - nu, 0.0],
            [0.0, 0.0, 0.5 * (1 - 2 * nu)],
        ]
    )


def _lin(xi):
    return np.array([0.5 * (1 - xi), 0.5 * (1 + xi)])


def _dlin():
    return np.array([-0.5, 0.5])


_XI3, _WXI3 = np.polynomial.legendre.leggauss(3)
_ETA5, _WETA5 = np.polynomial.legendre.leggauss(5)


def _quad3(xi):
    return np.array([0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)])


def _dquad3(xi):
    return np.array([xi - 0.5, -2.0 * xi, xi + 0.5])


def _infinite_mapping(near, far, xi, eta):
    """Geometry of the mapped strip and its Jacobian at one point.

    ``near``/``far`` are the (2, 2) ray endpoint pairs aligned index-wise;
    the far point sits at twice the pole distance, so the map is radial
    from the implied pole and reaches infinity at eta -> 1.
    """
    L = _lin(xi)
    dL = _dlin()
    m1 = -2.0 * eta / (1 - eta)
    m2 = (1 + eta) / (1 - eta)
    dm1 = -2.0 / (1 - eta) ** 2
    dm2 = 2.0 / (1 - eta) ** 2
    x = m1 * (L @ near) + m2 * (L @ far)
    J = np.array([m1 * (dL @ near) + m2 * (dL @ far),
                  dm1 * (L @ near) + dm2 * (L @ far)]).T
    return x, J


def infinite5_bmatrices(xy):
    """Strain-displacement matrices of a 5-node mapped infinite element.

    ``xy`` rows: ``(near_a, near_mid, near_b, far_b, far_a)``.  The near
    edge is quadratic (conforming with the interior serendipity edges), the
    decay pair is ``2*rho**2 - rho`` (near) / ``4*rho*(1 - rho)`` (far) with
    ``rho = (1 - eta)/2``, spanning 1/r and 1/r^2.  Quadrature is 3x5,
    exact for the rational integrands of the strip.  Returns
    ``(B, detJ, xq, wq)``.
    """
    near = xy[[0, 2]]
    far = xy[[4, 3]]
    Bs, dets, xqs, wts = [], [], [], []
    for i, xi in enumerate(_XI3):
        Q = _quad3(xi)
        dQ = _dquad3(xi)
        L = _lin(xi)
        dL = _dlin()
        for j, eta in enumerate(_ETA5):
            rho = 0.5 * (1 - eta)
            x, J = _infinite_mapping(near, far, xi, eta)
            det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            Jinv = np.linalg.inv(J)
            p1, p2 = 2 * rho**2 - rho, 4 * rho * (1 - rho)
            dp1, dp2 = -0.5 * (4 * rho - 1), -0.5 * (4 - 8 * rho)
            # rows follow connectivity: near_a, near_mid, near_b, far_b, far_a
            dshp = np.empty((5, 2))
            dshp[0] = [p1 * dQ[0], dp1 * Q[0]]
            dshp[1] = [p1 * dQ[1], dp1 * Q[1]]
            dshp[2] = [p1 * dQ[2], dp1 * Q[2]]
            dshp[3] = [p2 * dL[1], dp2 * L[1]]
            dshp[4] = [p2 * dL[0], dp2 * L[0]]
            grad = dshp @ Jinv
            B = np.zeros((3, 10))
            B[0, 0::2] = grad[:, 0]
            B[1, 1::2] = grad[:, 1]
            B[2, 0::2] = grad[:, 1]
            B[2, 1::2] = grad[:, 0]
            Bs.append(B)
            dets.append(det)
            xqs.append(x)
            wts.append(_WXI3[i] * _WETA5[j])
    return np.stack(Bs), np.asarray(dets), np.stack(xqs), np.asarray(wts)


def corner_fan_bmatrices(xy):
    """Collapsed 4-node infinite fan covering a corner wedge.

    ``xy`` rows: ``(c, c, far_b, far_a)`` with both near slots on the block
    corner; the far pair spans the wedge directions.
    """
    near = xy[:2]
    far = xy[2:][::-1]
    perm = [0, 1, 3, 2]
    Bs, dets, xqs, wts = [], [], [], []
    for i, xi in enumerate(_XI3):
        L = _lin(xi)
        dL = _dlin()
        for j, eta in enumerate(_ETA5):
            rho = 0.5 * (1 - eta)
            x, J = _infinite_mapping(near, far, xi, eta)
            det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            Jinv = np.linalg.inv(J)
            p1, p2 = 2 * rho**2 - rho, 4 * rho * (1 - rho)
            dp1, dp2 = -0.5 * (4 * rho - 1), -0.5 * (4 - 8 * rho)
            dshp = np.empty((4, 2))
            dshp[:2, 0] = p1 * dL
            dshp[:2, 1] = dp1 * L
            dshp[2:, 0] = p2 * dL
            dshp[2:, 1] = dp2 * L
            grad = (dshp @ Jinv)[perm]
            B = np.zeros((3, 8))
            B[0, 0::2] = grad[:, 0]
            B[1, 1::2] = grad[:, 1]
            B[2, 0::2] = grad[:, 1]
            B[2, 1::2] = grad[:, 0]
            Bs.append(B)
            dets.append(det)
            xqs.append(x)
            wts.append(_WXI3[i] * _WETA5[j])
    return np.stack(Bs), np.asarray(dets), np.stack(xqs), np.asarray(wts)

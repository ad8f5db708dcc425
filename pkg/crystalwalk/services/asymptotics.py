"""
Closed-form limit objects: drifts, fluctuation matrices, limiting brackets

Two independent evaluations live here. `ice_summary` / `graphite_summary`
use explicit component formulas in the horizontal rates;
`summary_from_class_moments` recovers the same objects from the brute-force
per-class moments of the kernel (signed class averages, stationary bracket
average, Gamma = P^T Lambda P). The verifier compares the two.
"""

import logging
import math
from typing import Dict, Optional

import numpy as np

from crystalwalk.core.errors import DomainError
from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import LatticeKind
from crystalwalk.models.summary import AsymptoticSummary, DerivedRates
from crystalwalk.services import kernels
from crystalwalk.services.lattice import vertex_classes

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
CANCELLATION_BAND = 1e-9

# Sign patterns over the graphite classes in table order V00, V10, V01, V11
_I = np.array([1.0, -1.0, 1.0, -1.0])
_J = np.array([1.0, 1.0, -1.0, -1.0])
_K = np.array([1.0, -1.0, -1.0, 1.0])
_ONE = np.ones(4)


def derived_rates(table: TransitionTable) -> DerivedRates:
    """u = p_1 + p_2, v = p_1 - p_2 per row, and s, t on graphite"""
    rows = np.asarray(table.horizontal, dtype=float)
    u = rows[..., 1] + rows[..., 2]
    v = rows[..., 1] - rows[..., 2]
    if table.kind is LatticeKind.ICE:
        return DerivedRates(kind=table.kind, u=u, v=v)
    return DerivedRates(kind=table.kind, u=u, v=v, s=u * (1.0 - u), t=v * (u - 1.0))


def lln_rate_bound(n: int) -> float:
    """
    Rate log(n)/n of the squared law-of-large-numbers error

    Raises:
        DomainError: If n < 2
    """
    if n < 2:
        raise DomainError(f"lln_rate_bound needs n >= 2, got {n}")
    return math.log(n) / n


def _sym(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.outer(x, y) + np.outer(y, x)


def _symmetric_matrix(xx, yy, zz, xy, xz, yz) -> np.ndarray:
    return np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])


def ice_summary(table: TransitionTable) -> AsymptoticSummary:
    """
    Closed-form limits of the ice walk

    Args:
        table: Validated ice table

    Returns:
        AsymptoticSummary with the 4x4 bracket matrix
    """
    a, h = table.geometry.a, table.geometry.h
    p, alpha = table.p, table.alpha
    rates = derived_rates(table)
    u0, u1 = rates.u
    v0, v1 = rates.v
    stay = 1.0 - p
    z_drift = h * p * (2.0 * alpha - 1.0)

    mu = np.array([0.75 * a * (u1 - u0), a * SQRT3 / 4.0 * (v0 - v1), z_drift])
    theta = np.array([a * (stay - 0.75 * (u0 + u1)), a * SQRT3 / 4.0 * (v0 + v1), 0.0])
    zeta = np.array([0.0, 0.0, z_drift])

    xx_lin = 3.0 * stay - 0.75
    sigma2 = _symmetric_matrix(
        xx=a**2 * (stay - stay**2 + xx_lin * (u0 + u1) / 2.0 - 9.0 / 8.0 * (u0**2 + u1**2)),
        yy=3.0 * a**2 / 8.0 * (u0 + u1 - v0**2 - v1**2),
        zz=h**2 * p * (1.0 - p * (2.0 * alpha - 1.0) ** 2),
        xy=a**2 * SQRT3 / 8.0 * (-(1.0 + 2.0 * stay) * (v0 + v1) + 3.0 * (u0 * v0 + u1 * v1)),
        xz=-mu[2] * mu[0],
        yz=-mu[2] * mu[1],
    )
    nu = _symmetric_matrix(
        xx=a**2 * (xx_lin * (u0 - u1) / 2.0 - 9.0 / 8.0 * (u0**2 - u1**2)),
        yy=3.0 * a**2 / 8.0 * (u0 - u1 - v0**2 + v1**2),
        zz=0.0,
        xy=a**2 * SQRT3 / 8.0 * (-(1.0 + 2.0 * stay) * (v0 - v1) + 3.0 * (u0 * v0 - u1 * v1)),
        xz=-mu[2] * theta[0],
        yz=-mu[2] * theta[1],
    )

    if p == 1.0:
        Gamma = sigma2.copy()
    else:
        Gamma = sigma2 - (p / (1.0 - p)) * np.outer(theta, theta)

    Lambda = np.zeros((4, 4))
    Lambda[:3, :3] = sigma2
    Lambda[:3, 3] = -2.0 * p * theta
    Lambda[3, :3] = -2.0 * p * theta
    Lambda[3, 3] = 4.0 * p * (1.0 - p)

    flag = 1.0 - CANCELLATION_BAND < p < 1.0
    if flag:
        logger.warning(f"p={p!r} is within {CANCELLATION_BAND} of 1: Gamma may lose precision to cancellation")

    return AsymptoticSummary(
        kind=LatticeKind.ICE,
        p=p,
        alpha=alpha,
        geometry=table.geometry,
        mu=mu,
        theta=theta,
        sigma2=sigma2,
        nu=nu,
        zeta=zeta,
        lln_limit=mu.copy(),
        Gamma=Gamma,
        Lambda=Lambda,
        counter_limits=np.array([1.0 if p == 1.0 else 0.0]),
        cancellation_flag=flag,
    )


def graphite_summary(table: TransitionTable) -> AsymptoticSummary:
    """
    Closed-form limits of the graphite walk

    Args:
        table: Validated graphite table

    Returns:
        AsymptoticSummary with the 5x5 bracket matrix
    """
    a, h = table.geometry.a, table.geometry.h
    p, alpha = table.p, table.alpha
    rates = derived_rates(table)
    # flatten [i, j] into class order V00, V10, V01, V11
    u = rates.u.T.reshape(4)
    v = rates.v.T.reshape(4)
    s = rates.s.T.reshape(4)
    t = rates.t.T.reshape(4)
    u00, u10 = u[0], u[1]
    v00, v10 = v[0], v[1]
    z_drift = h * p * (2.0 * alpha - 1.0)
    vertical_var = h**2 * p * (1.0 - p * (2.0 * alpha - 1.0) ** 2)

    mu = np.array([3.0 * a / 8.0 * (u[1] - u[0] + u[3] - u[2]), a * SQRT3 / 8.0 * (v[0] - v[1] + v[2] - v[3]), z_drift / 2.0])
    theta = np.array([a * (1.0 - p / 2.0 - 3.0 * u.sum() / 8.0), a * SQRT3 / 8.0 * v.sum(), 0.0])
    m = np.array([3.0 * a / 8.0 * (u[1] - u[0] + u[2] - u[3]), a * SQRT3 / 8.0 * (v[0] - v[1] - v[2] + v[3]), z_drift / 2.0])
    rho = np.array(
        [-a * p / 2.0 - 3.0 * a / 8.0 * (u[0] + u[1] - u[2] - u[3]), a * SQRT3 / 8.0 * (v[0] + v[1] - v[2] - v[3]), 0.0]
    )
    zeta = np.array([0.0, 0.0, z_drift])

    w = u - v**2
    jump_v = np.array([v00, v10, 0.0, 0.0])

    def block(pattern: np.ndarray, zz: float, xz: float, yz: float, keep_const: bool) -> np.ndarray:
        const = 2.0 * p * (1.0 - p) if keep_const else 0.0
        xx = a**2 / 4.0 * (const - 3.0 * p * (u00 + pattern[1] * u10) + 9.0 / 4.0 * pattern @ s)
        yy = 3.0 * a**2 / 16.0 * (pattern @ w)
        xy = a**2 * SQRT3 / 16.0 * (3.0 * pattern @ t + 2.0 * p * (pattern @ jump_v))
        return _symmetric_matrix(xx=xx, yy=yy, zz=zz, xy=xy, xz=xz, yz=yz)

    xz_even = 3.0 * a * z_drift / 8.0 * (u00 - u10)
    yz_even = -a * SQRT3 * z_drift / 8.0 * (v00 - v10)
    xz_odd = a * z_drift / 8.0 * (-4.0 * (1.0 - p) + 3.0 * (u00 + u10))
    yz_odd = -a * SQRT3 * z_drift / 8.0 * (v00 + v10)

    sigma2 = block(_ONE, vertical_var / 2.0, xz_even, yz_even, keep_const=True)
    nu = block(_I, 0.0, xz_odd, yz_odd, keep_const=False)
    gamma = block(_J, vertical_var / 2.0, xz_even, yz_even, keep_const=True)
    delta = block(_K, 0.0, xz_odd, yz_odd, keep_const=False)

    Lambda = np.zeros((5, 5))
    if p > 0.0:
        q = 2.0 - p
        lln_limit = mu + (p / q) * m
        drift_c = zeta - p * (mu + m)
        Gamma = (
            sigma2
            + (p / q) * gamma
            + (2.0 / q**2) * _sym(drift_c, m)
            + (2.0 / q) * _sym(theta + rho, rho)
            + (4.0 * p * (1.0 - p) / q**3) * np.outer(m, m)
            + (4.0 * (1.0 - p) / (p * q)) * np.outer(rho, rho)
        )
        Lambda[:3, :3] = sigma2 + (p / q) * gamma
        Lambda[:3, 3] = Lambda[3, :3] = 2.0 * drift_c / q
        Lambda[:3, 4] = Lambda[4, :3] = 2.0 * p * (theta + rho) / q
        Lambda[3, 3] = Lambda[4, 4] = 4.0 * p * (1.0 - p) / q
        counter_limits = np.array([0.0, p / q, 0.0])
    else:
        # K_n = n + 1 when nothing jumps, so delta enters the limits in full
        lln_limit = mu + rho
        Gamma = sigma2 + delta
        Lambda[:3, :3] = Gamma
        counter_limits = np.array([0.0, 0.0, 1.0])

    return AsymptoticSummary(
        kind=LatticeKind.GRAPHITE,
        p=p,
        alpha=alpha,
        geometry=table.geometry,
        mu=mu,
        theta=theta,
        sigma2=sigma2,
        nu=nu,
        zeta=zeta,
        lln_limit=lln_limit,
        Gamma=Gamma,
        Lambda=Lambda,
        counter_limits=counter_limits,
        m=m,
        rho=rho,
        gamma=gamma,
        delta=delta,
    )


def summarize(table: TransitionTable) -> AsymptoticSummary:
    """Validate a table and evaluate its closed-form summary"""
    kernels.validate(table)
    if table.kind is LatticeKind.ICE:
        return ice_summary(table)
    return graphite_summary(table)


def helper_vectors(summary: AsymptoticSummary) -> Dict[str, Optional[np.ndarray]]:
    """
    Coefficients turning the sign martingales into position fluctuations

    theta_p = theta / (2(1-p)) on ice (p < 1); m_p = m / (2-p) and
    rho_p = rho / p on graphite (p > 0). Undefined entries are None.
    """
    p = summary.p
    if summary.kind is LatticeKind.ICE:
        return {"theta_p": summary.theta / (2.0 * (1.0 - p)) if p < 1.0 else None}
    return {
        "m_p": summary.m / (2.0 - p),
        "rho_p": summary.rho / p if p > 0.0 else None,
    }


def projection_matrix(summary: AsymptoticSummary) -> np.ndarray:
    """Stack of I_3 and the helper vectors; undefined helpers give zero rows"""
    rows = [np.eye(3)]
    for vec in helper_vectors(summary).values():
        rows.append(np.zeros((1, 3)) if vec is None else vec.reshape(1, 3))
    return np.vstack(rows)


def gamma_from_lambda(summary: AsymptoticSummary) -> np.ndarray:
    """Gamma = P^T Lambda P"""
    P = projection_matrix(summary)
    return P.T @ summary.Lambda @ P


def stationary_weights(kind: LatticeKind, counter_limits: np.ndarray) -> np.ndarray:
    """
    Long-run share of time spent in each vertex class, started at the origin

    Recovered from the counter limits: the sign basis (1, i, j, k) is
    orthogonal over the classes.
    """
    classes = vertex_classes(kind)
    weights = np.empty(len(classes))
    for c, vc in enumerate(classes):
        weights[c] = (1.0 + np.dot(vc.signs, counter_limits)) / len(classes)
    return weights


def _counter_limits(kind: LatticeKind, p: float) -> np.ndarray:
    if kind is LatticeKind.ICE:
        return np.array([1.0 if p == 1.0 else 0.0])
    if p > 0.0:
        return np.array([0.0, p / (2.0 - p), 0.0])
    return np.array([0.0, 0.0, 1.0])


def summary_from_class_moments(table: TransitionTable) -> AsymptoticSummary:
    """
    Second evaluation of every limit object from brute-force kernel moments

    Coefficient vectors and matrices are signed averages of the per-class
    conditional means and covariances. Lambda is the long-run average of
    the per-step joint bracket increments, the law-of-large-numbers limit
    the long-run average of conditional means, and Gamma = P^T Lambda P.
    """
    kernels.validate(table)
    kind, p = table.kind, table.p
    classes = vertex_classes(kind)
    means = np.array([kernels.conditional_mean(table, vc) for vc in classes])
    covs = np.array([kernels.conditional_covariance(table, vc) for vc in classes])
    moments = [kernels.sign_moments(table, vc) for vc in classes]

    # sign basis: (1, eps) on ice, (1, i, j, k) on graphite
    basis = np.array([[1.0, *vc.signs] for vc in classes])
    count = len(classes)
    vectors = basis.T @ means / count
    matrices = np.einsum("cq,crs->qrs", basis, covs) / count

    # zeta from E[xi' s'] at the origin class, s = eps on ice and j on graphite
    tracked = [0] if kind is LatticeKind.ICE else [1, 2]
    origin_cross = moments[0].cross[:, tracked[0]]
    zeta = (origin_cross + means[0]) / 2.0

    counter_limits = _counter_limits(kind, p)
    weights = stationary_weights(kind, counter_limits)
    lln_limit = weights @ means

    size = 3 + len(tracked)
    Lambda = np.zeros((size, size))
    for c in range(count):
        joint = np.zeros((size, size))
        joint[:3, :3] = covs[c]
        cross_cov = moments[c].cross - np.outer(means[c], moments[c].mean)
        joint[:3, 3:] = cross_cov[:, tracked]
        joint[3:, :3] = cross_cov[:, tracked].T
        joint[3:, 3:] = moments[c].covariance[np.ix_(tracked, tracked)]
        Lambda += weights[c] * joint

    fields = {
        "kind": kind,
        "p": p,
        "alpha": table.alpha,
        "geometry": table.geometry,
        "mu": vectors[0],
        "theta": vectors[1],
        "sigma2": matrices[0],
        "nu": matrices[1],
        "zeta": zeta,
        "lln_limit": lln_limit,
        "Lambda": Lambda,
        "counter_limits": counter_limits,
        "Gamma": np.zeros((3, 3)),
    }
    if kind is LatticeKind.GRAPHITE:
        fields.update(m=vectors[2], rho=vectors[3], gamma=matrices[2], delta=matrices[3])
    else:
        fields["cancellation_flag"] = 1.0 - CANCELLATION_BAND < p < 1.0
    partial = AsymptoticSummary(**fields)
    fields["Gamma"] = gamma_from_lambda(partial)
    return AsymptoticSummary(**fields)

"""Analytical observables: velocity decomposition, source assembly, norm
functionals, and the incompressible-limit error metrics.

Throughout, ``u := v - V`` is the difference between the compressible
velocity and the incompressible reference, split as ``u = Pu + Qu`` by the
Leray/compressible projections.  Norms of tuples mean sums of norms.  Time
derivatives of snapshot data are centered differences (one-sided at the
endpoints), so every diagnostic is decoupled from solver internals and
matches the scheme's second order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bands import BesovIndex, DyadicBands, besov_norm, split_low_high
from .calculus import advect, compressible_project, leray_project
from .solvers import PhysicalParams, Trajectory
from .spectral import (
    SpectralField,
    SpectralError,
    dealias,
    divergence,
    forward_transform,
    gradient,
    inv_laplacian,
    inverse_transform,
    laplacian,
    product_dealiased,
    zeros,
)


def effective_velocity(a: SpectralField, u: SpectralField, nu: float) -> SpectralField:
    """``w = Qu + nu^-1 (-Lap)^-1 grad a`` (``a`` must be mean-free)."""
    if nu <= 0:
        raise SpectralError(f"effective_velocity needs nu > 0, got {nu}")
    w = compressible_project(u)
    corr = inv_laplacian(gradient(a))
    return w + corr * (1.0 / nu)


def _times_density(a: SpectralField, f: SpectralField) -> SpectralField:
    """Dealiased ``(1 + a) f``."""
    return f + product_dealiased(a, f)


def _k_minus_a(a: SpectralField, gamma: float) -> SpectralField:
    """``k(a) - a`` with ``k(a) = (1+a)^(gamma-1) - 1`` (zero for gamma = 2)."""
    grid = a.grid
    if gamma == 2.0:
        return zeros(grid)
    s = inverse_transform(dealias(a))
    if gamma == 1.0:
        vals = -s
    else:
        vals = (1.0 + s) ** (gamma - 1.0) - 1.0 - s
    return dealias(forward_transform(vals, grid))


def h1_terms(a, u, V, Vt, Put, Qut, params: PhysicalParams, bands: DyadicBands):
    """The three tagged source terms of the compressible part.

    ``Vt``, ``Put``, ``Qut`` are the caller's time derivatives of the
    reference velocity, the solenoidal difference, and the compressible
    difference; the damped combination ``Qu_t + grad a`` is formed here.
    """
    for f in (u, V, Vt, Put, Qut):
        if f.grid != a.grid:
            raise SpectralError("h1_terms requires a shared grid")
    tsum = Vt + Put + Qut + gradient(a)
    t1 = product_dealiased(a, tsum)
    upV = u + V
    t2 = _times_density(a, advect(upV, upV))
    t3 = product_dealiased(_k_minus_a(a, params.gamma), gradient(a))
    return t1, t2, t3


def assemble_H1(a, u, V, Vt, Put, Qut, params: PhysicalParams,
                bands: DyadicBands) -> SpectralField:
    t1, t2, t3 = h1_terms(a, u, V, Vt, Put, Qut, params, bands)
    return t1 + t2 + t3


def h2_terms(a, u, V, Vt, Put, Qut, params: PhysicalParams, bands: DyadicBands):
    """The six tagged source terms of the solenoidal part."""
    for f in (u, V, Vt, Put, Qut):
        if f.grid != a.grid:
            raise SpectralError("h2_terms requires a shared grid")
    Pu = leray_project(u)
    Qu = compressible_project(u)
    upV = u + V
    t1 = product_dealiased(a, Vt + Put + Qut + gradient(a))
    t2 = _times_density(a, advect(Pu, V + Qu))
    t3 = product_dealiased(a, advect(upV, Pu))
    t4 = advect(upV, Pu)
    t5 = _times_density(a, advect(V, Qu) + advect(Qu, V))
    t6 = product_dealiased(a, advect(Qu, Qu) + advect(V, V))
    return t1, t2, t3, t4, t5, t6


def assemble_H2(a, u, V, Vt, Put, Qut, params: PhysicalParams,
                bands: DyadicBands) -> SpectralField:
    terms = h2_terms(a, u, V, Vt, Put, Qut, params, bands)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def _time_derivatives(times, fields):
    """Centered differences; second-order one-sided at the endpoints (plain
    one-sided when only two snapshots exist), so the truncation error matches
    the scheme order throughout."""
    n = len(times)
    if n < 2:
        raise SpectralError("time derivatives need at least 2 snapshots")
    if n == 2:
        d = (fields[1] - fields[0]) * (1.0 / (times[1] - times[0]))
        return [d, d]
    def uniform(i0, i1):
        h0 = times[i0 + 1] - times[i0]
        h1 = times[i1 + 1] - times[i1]
        return abs(h1 - h0) <= 1e-9 * max(abs(h0), abs(h1))

    out = []
    for i in range(n):
        if i == 0:
            dt = times[1] - times[0]
            if uniform(0, 1):
                d = (fields[0] * (-1.5) + fields[1] * 2.0
                     + fields[2] * (-0.5)) * (1.0 / dt)
            else:
                d = (fields[1] - fields[0]) * (1.0 / dt)
        elif i == n - 1:
            dt = times[-1] - times[-2]
            if uniform(n - 3, n - 2):
                d = (fields[-1] * 1.5 + fields[-2] * (-2.0)
                     + fields[-3] * 0.5) * (1.0 / dt)
            else:
                d = (fields[-1] - fields[-2]) * (1.0 / dt)
        else:
            dt = times[i + 1] - times[i - 1]
            d = (fields[i + 1] - fields[i - 1]) * (1.0 / dt)
        out.append(d)
    return out


def _shared_times(traj_cns: Trajectory, traj_ins: Trajectory):
    ta = np.asarray(traj_cns.times)
    tb = np.asarray(traj_ins.times)
    n = min(len(ta), len(tb))
    if n < 2 or np.max(np.abs(ta[:n] - tb[:n])) > 1e-9:
        raise SpectralError("trajectories do not share snapshot times")
    return ta[:n], n


@dataclass
class DecompositionResidual:
    times: np.ndarray
    mass: np.ndarray       # density equation of the compressible part
    longitudinal: np.ndarray
    solenoidal: np.ndarray


def decomposition_residual(traj_cns: Trajectory, traj_ins: Trajectory,
                           params: PhysicalParams, bands: DyadicBands,
                           p: float = 2.0) -> DecompositionResidual:
    """Evaluate both compressible-part equations and the solenoidal equation
    on the numerical fields; returns per-time Besov-norm residuals (index
    ``-1 + d/p``, and ``d/p`` for the scalar mass equation)."""
    times, n = _shared_times(traj_cns, traj_ins)
    d = bands.grid.d
    idx_v = BesovIndex(-1.0 + d / p, p, 1.0)
    idx_a = BesovIndex(d / p, p, 1.0)

    a_list = [traj_cns.states[i].a for i in range(n)]
    u_list = [traj_cns.states[i].v - traj_ins.states[i].v for i in range(n)]
    V_list = [traj_ins.states[i].v for i in range(n)]
    Qu_list = [compressible_project(u) for u in u_list]
    Pu_list = [leray_project(u) for u in u_list]

    a_t = _time_derivatives(times, a_list)
    Qu_t = _time_derivatives(times, Qu_list)
    Pu_t = _time_derivatives(times, Pu_list)
    V_t = _time_derivatives(times, V_list)

    r_mass = np.empty(n)
    r_long = np.empty(n)
    r_sol = np.empty(n)
    mu, nu = params.mu, params.nu
    for i in range(n):
        a, u, V = a_list[i], u_list[i], V_list[i]
        Qu, Pu = Qu_list[i], Pu_list[i]
        h1 = assemble_H1(a, u, V, V_t[i], Pu_t[i], Qu_t[i], params, bands)
        h2 = assemble_H2(a, u, V, V_t[i], Pu_t[i], Qu_t[i], params, bands)
        res1 = a_t[i] + divergence(Qu) + divergence(product_dealiased(a, u + V))
        res2 = Qu_t[i] - laplacian(Qu) * nu + gradient(a) + compressible_project(h1)
        res3 = Pu_t[i] - laplacian(Pu) * mu + leray_project(h2)
        r_mass[i] = besov_norm(res1, idx_a, bands)
        r_long[i] = besov_norm(res2, idx_v, bands)
        r_sol[i] = besov_norm(res3, idx_v, bands)
    return DecompositionResidual(times, r_mass, r_long, r_sol)


def _besov_split(f: SpectralField, nu: float, bands: DyadicBands,
                 idx_low: BesovIndex, idx_high: BesovIndex):
    low, high = split_low_high(f, nu, bands)
    return besov_norm(low, idx_low, bands), besov_norm(high, idx_high, bands)


def _trapezoid_running(times, values):
    """Running integral of sampled values (trapezoid), same length as input."""
    out = np.zeros(len(times))
    for i in range(1, len(times)):
        out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (
            values[i] + values[i - 1])
    return out


@dataclass
class NormLedger:
    """Time-resolved functionals of the decomposition, each entry the value
    over ``[0, T_i]`` for snapshot time ``T_i``.

    ``X``/``Z`` (and the sup parts generally) are running maxima, the
    ``Y``/``W`` blocks running trapezoidal time integrals, so every column
    is nondecreasing by construction.  ``Vcal`` is the same three-block
    functional of the reference flow whose full-horizon value is ``M``:
    a sup of the ``-1 + d/p`` norm plus time integrals of the ``1 + d/p``
    norm (weighted by ``mu``) and of the ``-1 + d/p`` norm of the time
    derivative.  ``smallness_lhs``/``smallness_rhs`` report the two sides of
    the data-smallness threshold (with unit constants); they are reported,
    never enforced.
    """

    times: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    W: np.ndarray
    Vcal: np.ndarray
    M: float
    smallness_lhs: float
    smallness_rhs: float


def norm_ledger(traj_cns: Trajectory, traj_ins: Trajectory,
                params: PhysicalParams, p: float,
                bands: DyadicBands) -> NormLedger:
    """Evaluate the X/Y/Z/W/Vcal functionals along shared snapshots.

    The integrability index ``p`` should satisfy ``2 <= p <= min(4, 2d/(d-2))``
    (strict at 4 when d = 2); values outside that range are computed anyway
    with a warning.
    """
    d = bands.grid.d
    p_cap = 4.0 if d == 2 else min(4.0, 2.0 * d / (d - 2.0))
    if p < 2 or p > p_cap or (d == 2 and p >= 4.0):
        warnings.warn(f"integrability p={p} outside the supported range "
                      f"[2, {p_cap}) for d={d}; computing anyway",
                      stacklevel=2)
    times, n = _shared_times(traj_cns, traj_ins)
    nu, mu = params.nu, params.mu

    low2 = BesovIndex(-1.0 + d / 2.0, 2.0, 1.0)     # low-frequency base index
    low2_hi = BesovIndex(1.0 + d / 2.0, 2.0, 1.0)   # low-frequency smoothing
    low2_mid = BesovIndex(d / 2.0, 2.0, 1.0)
    hp = BesovIndex(d / p, p, 1.0)                  # high-frequency density
    vp = BesovIndex(-1.0 + d / p, p, 1.0)
    vp_hi = BesovIndex(1.0 + d / p, p, 1.0)

    a_list = [traj_cns.states[i].a for i in range(n)]
    u_list = [traj_cns.states[i].v - traj_ins.states[i].v for i in range(n)]
    V_list = [traj_ins.states[i].v for i in range(n)]
    Qu_list = [compressible_project(u) for u in u_list]
    Pu_list = [leray_project(u) for u in u_list]
    Qu_t = _time_derivatives(times, Qu_list)
    Pu_t = _time_derivatives(times, Pu_list)
    V_t = _time_derivatives(times, V_list)

    x_snap = np.empty(n)
    y_rate = np.empty(n)
    z_snap = np.empty(n)
    w_rate = np.empty(n)
    v_sup_snap = np.empty(n)
    v_rate = np.empty(n)
    m_rate = np.empty(n)
    for i in range(n):
        a, Qu, Pu, V = a_list[i], Qu_list[i], Pu_list[i], V_list[i]
        grad_a = gradient(a)
        a_lo, a_hi = _besov_split(a, nu, bands, low2, hp)
        ga_lo, _ = _besov_split(grad_a, nu, bands, low2, hp)
        qu_lo, qu_hi = _besov_split(Qu, nu, bands, low2, vp)
        x_snap[i] = (a_lo + nu * ga_lo + qu_lo) + nu * a_hi + qu_hi

        a_lo_h, a_hi_l1 = _besov_split(a, nu, bands, low2_hi, hp)
        ga_lo_h, _ = _besov_split(grad_a, nu, bands, low2_hi, hp)
        qu_lo_h, qu_hi_h = _besov_split(Qu, nu, bands, low2_hi, vp_hi)
        damped = Qu_t[i] + grad_a
        dmp_lo, dmp_hi = _besov_split(damped, nu, bands, low2, vp)
        y_rate[i] = (nu * a_lo_h + nu**2 * ga_lo_h + nu * qu_lo_h
                     + a_hi_l1 + nu * qu_hi_h + dmp_lo + dmp_hi)

        z_snap[i] = besov_norm(Pu, vp, bands)
        w_rate[i] = besov_norm(Pu_t[i], vp, bands) + besov_norm(Pu, vp_hi, bands)

        v_sup_snap[i] = besov_norm(V, vp, bands)
        v_rate[i] = (besov_norm(V_t[i], vp, bands)
                     + besov_norm(V, vp_hi, bands))
        m_rate[i] = (besov_norm(V_t[i], vp, bands)
                     + mu * besov_norm(V, vp_hi, bands))

    X = np.maximum.accumulate(x_snap)
    Y = _trapezoid_running(times, y_rate)
    Z = np.maximum.accumulate(z_snap)
    W = _trapezoid_running(times, w_rate)
    Vcal = np.maximum.accumulate(v_sup_snap) + _trapezoid_running(times, v_rate)
    M = float(np.max(v_sup_snap) + _trapezoid_running(times, m_rate)[-1])

    a0, v0 = a_list[0], traj_cns.states[0].v
    Qv0 = compressible_project(v0)
    a0_lo, a0_hi = _besov_split(a0, nu, bands, low2, hp)
    a0_lo_mid, _ = _besov_split(a0, nu, bands, low2_mid, hp)
    q0_lo, q0_hi = _besov_split(Qv0, nu, bands, low2, vp)
    lhs = a0_lo + nu * a0_lo_mid + nu * a0_hi + q0_lo + q0_hi + M**2 + mu**2
    rhs = math.sqrt(mu * nu) * math.exp(-(M + M**2))
    return NormLedger(times, X, Y, Z, W, Vcal, M, lhs, rhs)


@dataclass
class LimitError:
    """The four metric blocks of the convergence display, separately:
    scaled density sup, velocity-error sup, weighted gradient integral, and
    time-derivative integral."""

    err_density: float
    err_sup: float
    err_grad_l1: float
    err_dt_l1: float

    def as_tuple(self):
        return (self.err_density, self.err_sup, self.err_grad_l1, self.err_dt_l1)


def limit_error(traj_cns: Trajectory, traj_ins: Trajectory, p: float,
                bands: DyadicBands, mu: float, nu: float) -> LimitError:
    """Evaluate the convergence metrics between a compressible run and the
    incompressible reference.

    Blocks: ``sqrt(nu/mu) sup_t ||a||_{B^{d/p}_{p,1}}``,
    ``sup_t ||Pv - V||_{B^{-1+d/p}_{p,1}}``,
    ``mu int ||Pv - V||_{B^{1+d/p}_{p,1}} dt`` and
    ``int ||Pv_t - V_t||_{B^{-1+d/p}_{p,1}} dt``.  Requires ``a_0 = 0`` in
    the compressible run and shared snapshot times.
    """
    times, n = _shared_times(traj_cns, traj_ins)
    d = bands.grid.d
    hp = BesovIndex(d / p, p, 1.0)
    vp = BesovIndex(-1.0 + d / p, p, 1.0)
    vp_hi = BesovIndex(1.0 + d / p, p, 1.0)

    a0 = traj_cns.states[0].a
    if besov_norm(a0, hp, bands) > 1e-12:
        raise SpectralError("limit_error requires a_0 = 0 in the compressible run")

    Pu_list = [leray_project(traj_cns.states[i].v) - traj_ins.states[i].v
               for i in range(n)]
    Pu_t = _time_derivatives(times, Pu_list)

    dens = np.array([besov_norm(traj_cns.states[i].a, hp, bands) for i in range(n)])
    sups = np.array([besov_norm(pu, vp, bands) for pu in Pu_list])
    grads = np.array([besov_norm(pu, vp_hi, bands) for pu in Pu_list])
    dts = np.array([besov_norm(put, vp, bands) for put in Pu_t])

    return LimitError(
        err_density=math.sqrt(nu / mu) * float(np.max(dens)),
        err_sup=float(np.max(sups)),
        err_grad_l1=mu * float(np.trapezoid(grads, times)),
        err_dt_l1=float(np.trapezoid(dts, times)),
    )


@dataclass
class SweepResult:
    nu_values: list
    errors: list           # LimitError per nu, ordered as nu_values
    slope: float
    fit_residual: float
    excluded: list         # (nu, reason) for members dropped from the fit


def fit_rate(nu_values, errors):
    """Least-squares slope of ``log(error)`` against ``log(nu)``.

    Needs at least 3 strictly increasing values spanning 1.5 decades and
    positive errors; returns ``(slope, rms_residual)``.
    """
    nu_values = np.asarray(nu_values, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if len(nu_values) < 3:
        raise SpectralError("rate fit needs at least 3 viscosity values")
    if np.any(np.diff(nu_values) <= 0):
        raise SpectralError("viscosity values must be strictly increasing")
    if nu_values[-1] / nu_values[0] < 10**1.5:
        raise SpectralError("viscosity values must span at least 1.5 decades")
    if np.any(errors <= 1e-13):
        raise SpectralError("rate fit needs errors above roundoff scale")
    logx = np.log(nu_values)
    logy = np.log(errors)
    slope, intercept = np.polyfit(logx, logy, 1)
    resid = logy - (slope * logx + intercept)
    return float(slope), float(np.sqrt(np.mean(resid**2)))

"""Time integration: compressible flow, incompressible reference, heat flow.

All three steppers propagate the constant-coefficient linear part exactly in
Fourier space and treat the dealiased nonlinear remainder with explicit
second-order Runge-Kutta (Heun) through the integrating factor, so the time
step is limited by advection (and by the variable-coefficient viscous
remainder of the compressible system), never by acoustics or by the
dominant viscosity.

Compressible system, nonconservative form (momentum equation divided by the
density ``1 + a``, pressure normalized so ``P'(1) = 1``):

    a_t = -div v - div(a v)
    v_t = -grad a + mu Lap v + (mu + lam) grad div v
          - (v . grad) v
          - ((k(a) - a)/(1 + a)) grad a
          - (a/(1 + a)) (mu Lap v + (mu + lam) grad div v)

with ``k(a) = P'(1+a) - 1``.  The first line of the velocity equation is the
exact linear propagator: transverse modes decay by ``exp(-mu |k|^2 dt)`` and
each longitudinal pair ``(a_k, (k.v_k)/|k|)`` evolves by the exact matrix
exponential of ``[[0, -i|k|], [-i|k|, -nu |k|^2]]`` with ``nu = lam + 2 mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .calculus import advect, leray_project
from .spectral import (
    Grid,
    SpectralField,
    SpectralError,
    dealias,
    divergence,
    forward_transform,
    gradient,
    inv_laplacian,
    inverse_transform,
    laplacian,
    lp_norm,
    product_dealiased,
)


class BlowupError(RuntimeError):
    """Raised when a run leaves the regime the scheme can represent."""

    def __init__(self, t: float, reason: str):
        super().__init__(f"blow-up at t={t:.6g}: {reason}")
        self.t = t
        self.reason = reason


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosities and the barotropic pressure law ``P(rho) = (rho^gamma - 1)/gamma``.

    The family satisfies ``P(1) = 0`` and ``P'(1) = 1`` identically, and
    ``k(a) = P'(1+a) - 1 = (1+a)^(gamma-1) - 1``.
    """

    mu: float
    lam: float
    gamma: float = 2.0

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise SpectralError(f"shear viscosity mu={self.mu} must be > 0")
        if self.nu <= 0:
            raise SpectralError(f"nu = lam + 2 mu = {self.nu} must be > 0")
        if self.gamma < 1:
            raise SpectralError(f"pressure exponent gamma={self.gamma} must be >= 1")

    @property
    def nu(self) -> float:
        return self.lam + 2.0 * self.mu

    @classmethod
    def from_nu(cls, mu: float, nu: float, gamma: float = 2.0) -> "PhysicalParams":
        return cls(mu=mu, lam=nu - 2.0 * mu, gamma=gamma)


@dataclass(frozen=True)
class FlowState:
    """Density deviation ``a = rho - 1``, velocity ``v``, time ``t``."""

    a: SpectralField
    v: SpectralField
    t: float


@dataclass(frozen=True)
class StepperConfig:
    cfl: float = 0.4
    dt_max: float = 0.05
    snapshot_stride: int = 1
    a_inf_max: float = 0.9
    vacuum_floor: float = 0.1
    field_max: float = 1e8
    fixed_dt: float | None = None
    linear_only: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.cfl < 1:
            raise SpectralError(f"cfl={self.cfl} must lie in (0, 1)")


@dataclass
class Trajectory:
    times: list
    states: list
    events: list
    terminated: str = "horizon"

    def final(self) -> FlowState:
        return self.states[-1]


def pressure_terms(a: SpectralField, gamma: float):
    """Pressure ``((1+a)^gamma - 1)/gamma`` and ``k(a) = (1+a)^(gamma-1) - 1``,
    evaluated pointwise in physical space and dealiased."""
    s = inverse_transform(a)
    dens = 1.0 + s
    if np.min(dens) <= 0.0:
        raise BlowupError(0.0, f"vacuum: min density {np.min(dens):.3e}")
    grid = a.grid
    if gamma == 1.0:
        p = s
        k = np.zeros_like(s)
    elif gamma == 2.0:
        p = s + 0.5 * s * s
        k = s
    else:
        p = (dens**gamma - 1.0) / gamma
        k = dens ** (gamma - 1.0) - 1.0
    return (dealias(forward_transform(p, grid)),
            dealias(forward_transform(k, grid)))


def _sinhc(z: np.ndarray) -> np.ndarray:
    """``sinh(z)/z`` with a series fallback near 0 (complex-safe)."""
    out = np.ones_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 + zs**2 / 6.0 + zs**4 / 120.0
    zb = z[~small]
    out[~small] = np.sinh(zb) / zb
    return out


def acoustic_propagator(k2: np.ndarray, nu: float, dt: float):
    """Exact exponential of ``dt * [[0, -i|k|], [-i|k|, -nu |k|^2]]`` per mode.

    Returns the four entry arrays ``(E11, E12, E21, E22)``; the eigenvalues
    of the matrix are ``lam_pm = (-nu k^2 +- sqrt(nu^2 k^4 - 4 k^2)) / 2``.
    Both have nonpositive real part, so everything is assembled from
    ``exp(lam_pm dt)`` directly and stays finite for arbitrarily stiff
    modes.
    """
    k2c = np.asarray(k2, dtype=np.complex128)
    kmag = np.sqrt(k2c)
    m = -0.5 * nu * k2c
    delta = np.sqrt(0.25 * nu**2 * k2c**2 - k2c)
    ep = np.exp((m + delta) * dt)
    em = np.exp((m - delta) * dt)
    cosh_term = 0.5 * (ep + em)
    # sinh(delta dt)/delta * exp(m dt), with a series for nearly equal
    # eigenvalues
    z = delta * dt
    small = np.abs(z) < 1e-4
    s_term = np.empty_like(k2c)
    denom = 2.0 * delta[~small]
    s_term[~small] = (ep[~small] - em[~small]) / denom
    s_term[small] = dt * np.exp(m[small] * dt) * _sinhc(z[small])
    e11 = cosh_term + s_term * (0.5 * nu * k2c)
    e12 = s_term * (-1j * kmag)
    e22 = cosh_term - s_term * (0.5 * nu * k2c)
    return e11, e12, e12.copy(), e22


class _LinearPropagator:
    """Per-grid tables applying the exact linear flow for one time step."""

    def __init__(self, grid: Grid, mu: float, nu: float, dt: float):
        self.grid = grid
        self.transverse = np.exp(-mu * grid.k2 * dt)
        self.e11, self.e12, self.e21, self.e22 = acoustic_propagator(grid.k2, nu, dt)
        kmag = grid.kmag.copy()
        kmag[(0,) * grid.d] = 1.0
        self.khat = [grid.k[ax] / kmag for ax in range(grid.d)]

    def __call__(self, a_coeffs: np.ndarray, v_coeffs: np.ndarray):
        g = self.grid
        vlong = sum(self.khat[ax] * v_coeffs[ax] for ax in range(g.d))
        a_new = self.e11 * a_coeffs + self.e12 * vlong
        vlong_new = self.e21 * a_coeffs + self.e22 * vlong
        v_new = np.empty_like(v_coeffs)
        for ax in range(g.d):
            perp = v_coeffs[ax] - self.khat[ax] * vlong
            v_new[ax] = self.transverse * perp + self.khat[ax] * vlong_new
        return a_new, v_new


def _viscous_terms(v: SpectralField, mu: float, lam: float) -> SpectralField:
    """``mu Lap v + (mu + lam) grad div v`` (exact Fourier multipliers)."""
    return laplacian(v) * mu + gradient(divergence(v)) * (mu + lam)


def _cns_tendency(a: SpectralField, v: SpectralField, params: PhysicalParams):
    """Dealiased nonlinear remainder of the nonconservative system."""
    grid = a.grid
    av = product_dealiased(a, v)
    na = -divergence(av)

    nv = -advect(v, v)
    a_s = inverse_transform(dealias(a))
    dens = 1.0 + a_s
    ratio = forward_transform(a_s / dens, grid)
    visc = _viscous_terms(v, params.mu, params.lam)
    nv = nv - product_dealiased(ratio, visc)
    if params.gamma != 2.0:
        if params.gamma == 1.0:
            coeff = -a_s / dens
        else:
            coeff = (dens ** (params.gamma - 1.0) - 1.0 - a_s) / dens
        nv = nv - product_dealiased(forward_transform(coeff, grid), gradient(a))
    return na.coeffs, nv.coeffs


def _check_cns_state(a: SpectralField, v: SpectralField, t: float,
                     config: StepperConfig) -> np.ndarray:
    """Blow-up guards; returns the density-deviation samples for reuse."""
    a_s = inverse_transform(a)
    if not np.all(np.isfinite(a_s)) or not np.all(np.isfinite(v.coeffs)):
        raise BlowupError(t, "non-finite field values")
    amax = float(np.max(np.abs(a_s)))
    if amax > config.a_inf_max:
        raise BlowupError(t, f"density deviation {amax:.3e} > {config.a_inf_max}")
    if float(1.0 + np.min(a_s)) <= config.vacuum_floor:
        raise BlowupError(t, f"density {1.0 + np.min(a_s):.3e} at vacuum guard")
    if lp_norm(v, math.inf) > config.field_max:
        raise BlowupError(t, "velocity magnitude overflow")
    return a_s


def step_cns(state: FlowState, params: PhysicalParams, dt: float,
             config: StepperConfig = StepperConfig()) -> FlowState:
    """One Heun step of the compressible system through the exact linear flow.

    The spatial mean of ``a`` is conserved to roundoff: the nonlinear density
    tendency is a divergence and the zero mode of the linear propagator is
    the identity.
    """
    grid = state.a.grid
    _check_cns_state(state.a, state.v, state.t, config)
    prop = _LinearPropagator(grid, params.mu, params.nu, dt)
    pa, pv = prop(state.a.coeffs, state.v.coeffs)
    if config.linear_only:
        return FlowState(SpectralField(grid, pa), SpectralField(grid, pv),
                         state.t + dt)
    k1a, k1v = _cns_tendency(state.a, state.v, params)
    p1a, p1v = prop(k1a, k1v)
    mid_a = SpectralField(grid, pa + dt * p1a)
    mid_v = SpectralField(grid, pv + dt * p1v)
    k2a, k2v = _cns_tendency(mid_a, mid_v, params)
    a_new = SpectralField(grid, pa + 0.5 * dt * (p1a + k2a))
    v_new = SpectralField(grid, pv + 0.5 * dt * (p1v + k2v))
    return FlowState(a_new, v_new, state.t + dt)


def _ins_tendency(V: SpectralField) -> np.ndarray:
    return leray_project(-advect(V, V)).coeffs


def step_ins(state: FlowState, mu: float, dt: float,
             config: StepperConfig = StepperConfig()) -> FlowState:
    """One Heun step of the incompressible system with exact viscous decay.

    The input velocity must be divergence-free; the output remains so
    because both the integrating factor and the projected nonlinearity
    preserve the constraint.
    """
    grid = state.v.grid
    div_norm = lp_norm(divergence(state.v), 2)
    v_norm = lp_norm(state.v, 2)
    if div_norm > 1e-12 * max(v_norm, 1e-300):
        raise SpectralError(f"step_ins needs div V = 0 (got {div_norm:.3e})")
    decay = np.exp(-mu * grid.k2 * dt)
    pv = decay * state.v.coeffs
    if config.linear_only:
        return replace(state, v=SpectralField(grid, pv), t=state.t + dt)
    k1 = _ins_tendency(state.v)
    mid = SpectralField(grid, pv + dt * decay * k1)
    k2 = _ins_tendency(mid)
    v_new = SpectralField(grid, pv + 0.5 * dt * (decay * k1 + k2))
    return replace(state, v=v_new, t=state.t + dt)


def ins_pressure(V: SpectralField) -> SpectralField:
    """Pressure of the incompressible flow: ``(-Lap)^-1 div(V . grad V)``."""
    return inv_laplacian(divergence(advect(V, V)))


def step_heat(u: SpectralField, mu: float, dt: float, forcing=None) -> SpectralField:
    """Heat step: exact integrating factor plus trapezoidal Duhamel term.

    ``forcing`` is ``None`` or a pair ``(f_start, f_end)`` of fields sampling
    the source at both ends of the step.
    """
    grid = u.grid
    decay = np.exp(-mu * grid.k2 * dt)
    out = decay * u.coeffs
    if forcing is not None:
        f0, f1 = forcing
        out = out + 0.5 * dt * (decay * f0.coeffs + f1.coeffs)
    return SpectralField(grid, out)


def kinetic_energy(v: SpectralField) -> float:
    """``0.5 * mean |v|^2`` (mean-value normalization)."""
    return 0.5 * lp_norm(v, 2) ** 2


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """Divergence-free Taylor-Green velocity (2D closed-form test flow,
    standard 3D variant)."""
    xs = grid.meshes()
    N = grid.N
    if grid.d == 2:
        x, y = xs[0] + np.zeros(grid.shape), xs[1] + np.zeros(grid.shape)
        vx = amplitude * np.cos(x) * np.sin(y)
        vy = -amplitude * np.sin(x) * np.cos(y)
        return forward_transform(np.stack([vx, vy]), grid)
    x = xs[0] + np.zeros(grid.shape)
    y = xs[1] + np.zeros(grid.shape)
    z = xs[2] + np.zeros(grid.shape)
    vx = amplitude * np.sin(x) * np.cos(y) * np.cos(z)
    vy = -amplitude * np.cos(x) * np.sin(y) * np.cos(z)
    vz = np.zeros((N,) * 3)
    return forward_transform(np.stack([vx, vy, vz]), grid)


def _adaptive_dt(state: FlowState, params: PhysicalParams | None,
                 config: StepperConfig, system: str) -> float:
    if config.fixed_dt is not None:
        return config.fixed_dt
    grid = state.v.grid
    vmax = lp_norm(state.v, math.inf)
    dt_adv = grid.dx / vmax if vmax > 0 else math.inf
    dt_visc = math.inf
    if system == "cns" and not config.linear_only and params is not None:
        a_s = inverse_transform(state.a)
        amax = float(np.max(np.abs(a_s / (1.0 + a_s))))
        if amax > 0:
            # explicit Heun stability for the variable-coefficient viscous
            # remainder ~ (a/(1+a)) nu Lap v on the dealiased band
            k2max = float(np.max(grid.k2[grid.dealias_mask]))
            dt_visc = 2.0 / (params.nu * amax * k2max)
    return config.cfl * min(dt_adv, config.dt_max, dt_visc)


def run(initial: FlowState, params: PhysicalParams | None,
        config: StepperConfig, horizon: float, system: str = "cns",
        snap_times=None) -> Trajectory:
    """Advance to ``horizon`` with adaptive steps, recording snapshots.

    ``system`` selects the compressible ("cns") or incompressible ("ins")
    stepper; for "ins" the density component of the state is carried along
    unchanged.  When ``snap_times`` is given, steps are clipped so states are
    recorded exactly at those times (shared-time comparisons across runs);
    otherwise snapshots are taken every ``config.snapshot_stride`` steps.
    Returns the trajectory with a termination cause of "horizon" or
    "blowup"; blow-ups are recorded as events, not raised.
    """
    if system not in ("cns", "ins"):
        raise SpectralError(f"unknown system '{system}'")
    state = initial
    times = [state.t]
    states = [state]
    events = [(state.t, "start")]
    if snap_times is not None:
        pending = [s for s in sorted(snap_times) if s > state.t + 1e-13]
    else:
        pending = None
    steps = 0
    terminated = "horizon"
    while state.t < horizon - 1e-12:
        dt = _adaptive_dt(state, params, config, system)
        dt = min(dt, horizon - state.t)
        if pending:
            dt = min(dt, pending[0] - state.t)
        dt = float(dt)
        try:
            if system == "cns":
                state = step_cns(state, params, dt, config)
            else:
                state = step_ins(state, params.mu if params else 1.0, dt, config)
        except BlowupError as exc:
            events.append((state.t, f"blowup:{exc.reason}"))
            terminated = "blowup"
            break
        steps += 1
        record = False
        if pending is not None:
            if pending and abs(state.t - pending[0]) < 1e-10:
                pending.pop(0)
                record = True
        elif steps % config.snapshot_stride == 0:
            record = True
        if record or state.t >= horizon - 1e-12:
            if abs(state.t - times[-1]) > 1e-13:
                times.append(state.t)
                states.append(state)
    events.append((state.t, f"end:{terminated}"))
    return Trajectory(times, states, events, terminated)

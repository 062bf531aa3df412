"""Independent reference solver working directly on the velocity profile.

Method of lines on the periodic unit interval: spectral derivatives, 2/3
dealiasing of the quadratic terms, classical RK4 in time.  This route
knows nothing about the label-space formulation, which makes it a genuine
cross-check while solutions stay smooth, and a demonstration of the
failure mode the label-space solver avoids: as the slope steepens the
profile leaves the resolvable class and the run is cut off by the slope
cap rather than continued.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import PeriodicGrid


@dataclass
class EulerianTrajectory:
    n: int
    dt: float
    times: np.ndarray
    states: list[np.ndarray]
    slope_max: np.ndarray
    blowup: bool = False
    blowup_time: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _dealias_mask(n: int) -> np.ndarray:
    k = np.arange(n // 2 + 1)
    return (k <= n // 3).astype(float)


def eulerian_rhs(grid: PeriodicGrid, u: np.ndarray, dealias: bool = True) -> np.ndarray:
    """Tendency of the velocity profile: -u u_x - d/dx of the smoothed source."""
    ux = grid.deriv(u)
    if dealias:
        mask = _dealias_mask(grid.n)
        u = np.fft.irfft(np.fft.rfft(u) * mask, n=grid.n)
        ux = np.fft.irfft(np.fft.rfft(ux) * mask, n=grid.n)
    adv = u * ux
    q = u * u + 0.5 * ux * ux
    if dealias:
        mask = _dealias_mask(grid.n)
        adv = np.fft.irfft(np.fft.rfft(adv) * mask, n=grid.n)
        q = np.fft.irfft(np.fft.rfft(q) * mask, n=grid.n)
    return -adv - grid.deriv(grid.helmholtz_inverse(q))


def eulerian_evolve(
    u0: np.ndarray,
    dt: float,
    t_end: float,
    snapshot_stride: int = 100,
    slope_cap: float = 1e3,
    dealias: bool = True,
) -> EulerianTrajectory:
    """March the profile to t_end, or to the step where it stops resolving.

    The run is flagged as a blowup when max|u_x| passes slope_cap or the
    state goes non-finite; times/states then end at the last step before
    the threshold, and blowup_time reports where the cap was crossed.
    """
    u = np.asarray(u0, dtype=float).copy()
    grid = PeriodicGrid(u.size)
    steps = max(1, round(t_end / dt))
    times = [0.0]
    states = [u.copy()]
    slopes = [float(np.max(np.abs(grid.deriv(u))))]
    blowup = False
    blowup_time = None
    for i in range(1, steps + 1):
        k1 = eulerian_rhs(grid, u, dealias)
        k2 = eulerian_rhs(grid, u + 0.5 * dt * k1, dealias)
        k3 = eulerian_rhs(grid, u + 0.5 * dt * k2, dealias)
        k4 = eulerian_rhs(grid, u + dt * k3, dealias)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = i * dt
        if not np.isfinite(u).all():
            blowup, blowup_time = True, t
            break
        smax = float(np.max(np.abs(grid.deriv(u))))
        if smax > slope_cap:
            blowup, blowup_time = True, t
            break
        if i % snapshot_stride == 0 or i == steps:
            times.append(t)
            states.append(u.copy())
            slopes.append(smax)
    return EulerianTrajectory(
        n=grid.n,
        dt=dt,
        times=np.array(times),
        states=states,
        slope_max=np.array(slopes),
        blowup=blowup,
        blowup_time=blowup_time,
    )


def profile_distance(u_a: np.ndarray, u_b: np.ndarray) -> tuple[float, float]:
    """Grid L2 and max-norm distance between two profiles on the same grid."""
    a = np.asarray(u_a, dtype=float)
    b = np.asarray(u_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"profile shapes differ: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.mean(d * d))), float(np.max(np.abs(d)))


def resample_profile(u: np.ndarray, m: int) -> np.ndarray:
    """Trigonometric interpolation of a periodic profile onto m nodes."""
    n = u.size
    if m == n:
        return np.asarray(u, dtype=float).copy()
    spec = np.fft.rfft(u)
    out = np.zeros(m // 2 + 1, dtype=complex)
    keep = min(spec.size, out.size)
    out[:keep] = spec[:keep]
    if m < n:
        out[-1] = out[-1].real
    return np.fft.irfft(out, m) * (m / n)


def sample_trajectory(traj: EulerianTrajectory, t: float) -> np.ndarray:
    """Profile at time t, linear in time between stored snapshots."""
    times = traj.times
    if not (times[0] <= t <= times[-1]):
        raise ValueError(f"t = {t} outside the reference trajectory")
    if times.size == 1:
        return traj.states[0].copy()
    j = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2))
    th = (t - times[j]) / (times[j + 1] - times[j])
    return (1.0 - th) * traj.states[j] + th * traj.states[j + 1]


def compare(record, mu: float, traj: EulerianTrajectory, t: float, m: int) -> tuple[float, float]:
    """Distance at time t between the reconstructed velocity and this solver's.

    Both trajectories are sampled at t (linear in time between snapshots)
    and brought onto a common m-node physical grid.  Times beyond either
    trajectory, in particular past a reported blowup, are rejected.
    """
    from .reconstruct import eulerian_velocity, state_at

    if t > float(record.series.t[-1]):
        raise ValueError(f"t = {t} beyond the recorded run")
    st = state_at(record, t)
    grid = PeriodicGrid(st.rho.size)
    fld = eulerian_velocity(grid, st, mu, m=m)
    u_ref = resample_profile(sample_trajectory(traj, t), m)
    return profile_distance(fld.u, u_ref)

"""Independent ground truth: classical time integration of the truncated
Fourier ODE system.

In the rotating frame a(n,t) = e^{in^3 t} u_hat(n,t) the mean-subtracted
flow reads

    da(n)/dt = -(in/3) sum*_{n1+n2+n3=n} e^{i sigma t} a(n1) a(n2) a(n3)
               + i n a(n) a(-n) a(n),

with the star excluding triples where some n_j equals n, while the plain
equation drops the mean subtraction and keeps the full derivative-weighted
convolution.  All convolution sums are restricted to modes in [-N, N]
(inputs and outputs), which is exactly the system the power series with
projected internal modes expands; series-versus-oracle comparisons
therefore have no modeling gap.

The oscillatory phase e^{i sigma t} factors into per-mode cubic phases, so
each right-hand side costs two dense convolutions instead of a triple
loop; the triple loop survives in the tests as the oracle's own oracle.
Time stepping is classical RK4 on the rotating-frame variables with the
phases evaluated from absolute time (no per-step phase accumulation), and
the state update is compensated to keep round-off from random-walking
across long runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import CoeffSeq, l2_mass

__all__ = [
    "OracleConfig",
    "Trajectory",
    "oracle_rhs",
    "oracle_solve",
    "invariant_drift",
    "picard_iterate",
    "cumulative_simpson",
]

_EQUATIONS = ("modified_mkdv", "mkdv")


@dataclass(frozen=True)
class OracleConfig:
    """Time-integration parameters for the truncated system."""

    N: int
    dt: float
    equation: str = "modified_mkdv"
    steps: int = 0

    def __post_init__(self):
        if self.equation not in _EQUATIONS:
            raise ValueError(f"equation must be one of {_EQUATIONS}")
        if self.N < 0 or self.dt <= 0 or self.steps < 0:
            raise ValueError("bad oracle configuration")

    @property
    def dt_limit(self) -> float:
        """Step-size guard 0.5 / (1 + N^3) for the nonlinear phases."""
        return 0.5 / (1.0 + self.N**3)


@dataclass(frozen=True)
class Trajectory:
    """Rotating-frame coefficients at successive times; values[i] is the
    state at times[i], modes ordered -N..N."""

    cutoff: int
    times: np.ndarray
    values: np.ndarray

    def at(self, i: int) -> CoeffSeq:
        return CoeffSeq(self.cutoff, self.values[i].copy())

    @property
    def final(self) -> CoeffSeq:
        return self.at(len(self.times) - 1)

    def to_csv(self) -> str:
        lines = ["t,n,re,im"]
        modes = np.arange(-self.cutoff, self.cutoff + 1)
        for t, row in zip(self.times, self.values):
            for n, z in zip(modes, row):
                lines.append(f"{t!r},{n},{z.real!r},{z.imag!r}")
        return "\n".join(lines) + "\n"


def _rhs_arrays(values: np.ndarray, t: float, N: int, equation: str) -> np.ndarray:
    modes = np.arange(-N, N + 1)
    cubes = modes.astype(float) ** 3
    ph = np.exp(-1j * cubes * t)          # e^{-in^3 t}
    b = ph * values                        # frame-unrotated coefficients
    if equation == "mkdv":
        conv = np.convolve(np.convolve(b, b), modes * b)
        full = conv[2 * N : 4 * N + 1]
        return -1j * np.conj(ph) * full
    # mean-subtracted flow: symmetrized star sum plus the resonant diagonal
    conv3 = np.convolve(np.convolve(b, b), b)[2 * N : 4 * N + 1]
    pair_mass = np.dot(b, b[::-1])         # sum_k b(k) b(-k)
    star = conv3 - 3.0 * b * pair_mass + 3.0 * b**2 * b[::-1]
    star[N] -= b[N] ** 3                   # triple overlap exists only at n=0
    resonant = 1j * modes * values * values[::-1] * values
    return (-1j / 3.0) * modes * np.conj(ph) * star + resonant


def oracle_rhs(a: CoeffSeq, equation: str = "modified_mkdv", t: float = 0.0) -> CoeffSeq:
    """Right-hand side of the rotating-frame system at absolute time t."""
    if equation not in _EQUATIONS:
        raise ValueError(f"equation must be one of {_EQUATIONS}")
    return a.with_values(_rhs_arrays(a.values, t, a.cutoff, equation))


def oracle_solve(a0: CoeffSeq, cfg: OracleConfig, t: float) -> Trajectory:
    """Integrate the truncated system with classical RK4 over cfg.steps
    fixed steps; requires t = steps * dt and dt below the stability guard."""
    if a0.cutoff != cfg.N:
        raise ValueError("initial data cutoff must match the configuration")
    if cfg.dt > cfg.dt_limit:
        raise ValueError(
            f"dt {cfg.dt} exceeds the stability guard {cfg.dt_limit:.3e}"
        )
    if not np.isclose(cfg.steps * cfg.dt, t, rtol=1e-12, atol=1e-15):
        raise ValueError("t must equal steps * dt")
    N, dt, eq = cfg.N, cfg.dt, cfg.equation
    width = 2 * N + 1
    out = np.empty((cfg.steps + 1, width), dtype=np.complex128)
    times = np.arange(cfg.steps + 1) * dt
    a = a0.values.copy()
    comp = np.zeros_like(a)                # Kahan carry for the state sum
    out[0] = a
    for m in range(cfg.steps):
        tm = m * dt
        k1 = _rhs_arrays(a, tm, N, eq)
        k2 = _rhs_arrays(a + 0.5 * dt * k1, tm + 0.5 * dt, N, eq)
        k3 = _rhs_arrays(a + 0.5 * dt * k2, tm + 0.5 * dt, N, eq)
        k4 = _rhs_arrays(a + dt * k3, tm + dt, N, eq)
        incr = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y = incr - comp
        s = a + y
        comp = (s - a) - y
        a = s
        out[m + 1] = a
    return Trajectory(N, times, out)


def oracle_solve_increment(a0: CoeffSeq, cfg: OracleConfig, t: float) -> Trajectory:
    """Like :func:`oracle_solve`, but integrates the increment
    y(t) = a(t) - a(0) and returns y.

    Exactly equivalent in real arithmetic; in floating point the increment
    stays on its own (small) scale instead of being quantized at the scale
    of the initial data, which matters when comparing two solvers whose
    difference sits near one ulp of the solution values.
    """
    if a0.cutoff != cfg.N:
        raise ValueError("initial data cutoff must match the configuration")
    if cfg.dt > cfg.dt_limit:
        raise ValueError(
            f"dt {cfg.dt} exceeds the stability guard {cfg.dt_limit:.3e}"
        )
    if not np.isclose(cfg.steps * cfg.dt, t, rtol=1e-12, atol=1e-15):
        raise ValueError("t must equal steps * dt")
    N, dt, eq = cfg.N, cfg.dt, cfg.equation
    base = a0.values
    out = np.empty((cfg.steps + 1, 2 * N + 1), dtype=np.complex128)
    times = np.arange(cfg.steps + 1) * dt
    y = np.zeros_like(base)
    comp = np.zeros_like(base)
    out[0] = y
    for m in range(cfg.steps):
        tm = m * dt
        k1 = _rhs_arrays(base + y, tm, N, eq)
        k2 = _rhs_arrays(base + (y + 0.5 * dt * k1), tm + 0.5 * dt, N, eq)
        k3 = _rhs_arrays(base + (y + 0.5 * dt * k2), tm + 0.5 * dt, N, eq)
        k4 = _rhs_arrays(base + (y + dt * k3), tm + dt, N, eq)
        incr = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        yy = incr - comp
        s = y + yy
        comp = (s - y) - yy
        y = s
        out[m + 1] = y
    return Trajectory(N, times, out)


def invariant_drift(traj: Trajectory) -> float:
    """Largest deviation of sum |a(n)|^2 from its initial value."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    mass = np.sum(np.abs(traj.values) ** 2, axis=1)
    return float(np.max(np.abs(mass - mass[0])))


def mass_of(a: CoeffSeq) -> float:
    return l2_mass(a)


# ---------------------------------------------------------------------------
# quadrature-based Picard iteration of the integral equation
# ---------------------------------------------------------------------------


def cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral of samples on a uniform grid.

    Even endpoints use composite Simpson; odd endpoints add the integral of
    the quadratic through the last three points.  Matches the classical
    cumulative-Simpson construction to O(dx^4).  Integrates along axis 0.
    """
    T = y.shape[0]
    if T < 3:
        raise ValueError("need at least 3 samples")
    out = np.zeros_like(y)
    out[1] = dx * (5.0 * y[0] + 8.0 * y[1] - y[2]) / 12.0
    for j in range(2, T, 2):
        out[j] = out[j - 2] + dx * (y[j - 2] + 4.0 * y[j - 1] + y[j]) / 3.0
    for j in range(3, T, 2):
        out[j] = out[j - 1] + dx * (-y[j - 2] + 8.0 * y[j - 1] + 5.0 * y[j]) / 12.0
    return out


def _uniform_spacing(times: np.ndarray) -> float:
    diffs = np.diff(times)
    if diffs.size == 0 or np.max(np.abs(diffs - diffs[0])) > 1e-12 * max(diffs[0], 1e-30):
        raise ValueError("a uniform time grid is required")
    return float(diffs[0])


def picard_iterate(a0: CoeffSeq, times: np.ndarray, iterations: int,
                   equation: str = "modified_mkdv") -> Trajectory:
    """Successive substitution of the integral equation, starting from the
    constant-in-time trajectory.

    Each sweep evaluates the right-hand side on the whole grid and applies
    the cumulative Simpson rule, so the result is independent of the tree
    machinery; it is the anti-drift oracle for the series pipeline.
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        raise ValueError("the grid must start at t = 0")
    if len(times) < 9:
        raise ValueError("grid too coarse: need at least 9 points")
    dx = _uniform_spacing(times)
    N = a0.cutoff
    traj = np.tile(a0.values, (len(times), 1))
    for _ in range(iterations):
        rhs = np.empty_like(traj)
        for i, t in enumerate(times):
            rhs[i] = _rhs_arrays(traj[i], t, N, equation)
        traj = a0.values[None, :] + cumulative_simpson(rhs, dx)
    return Trajectory(N, times, traj)

"""Deterministic and probabilistic Adams integrators.

The stepper uses the conditional laws derived in :mod:`gpadams.gpcond`: the
mean update is the classical AB (or AM predictor-corrector) step, and in
probabilistic mode a Gaussian perturbation with standard deviation
``C * h**(s+1) * |alpha|`` is added per dimension, with ``alpha`` estimated
from a backward difference of stored derivative values.

States may carry a leading batch axis, ``y.shape == (n, d)``; the arithmetic
is elementwise, so replicate ``r`` of a batch is bit-identical to a single
run with the same noise stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .coeffs import bd_coefficients
from .gpcond import ConditionalLaw, conditional_law
from .polybasis import MAX_AB_STEPS, Family


class Scheme(str, Enum):
    AB = "ab"
    AM_PC = "am_pc"


class AlphaMode(str, Enum):
    BACKWARD_DIFFERENCE = "backward_difference"
    FIXED = "fixed"
    ZERO = "zero"


class DivergenceError(FloatingPointError):
    """Non-finite state produced; ``trajectory`` holds the points computed so far."""

    def __init__(self, step_index: int, trajectory: Trajectory | None = None):
        super().__init__(f"non-finite state at step {step_index}")
        self.step_index = step_index
        self.trajectory = trajectory


class StateError(RuntimeError):
    pass


@dataclass(frozen=True)
class OdeSystem:
    """``dy/dt = rhs(y, t)``; ``rhs`` must accept arrays with extra leading axes."""

    dimension: int
    rhs: Callable[[np.ndarray, float], np.ndarray]
    name: str = "system"

    def __call__(self, y: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.rhs(y, t), dtype=float)


class CountingSystem:
    """Wraps an OdeSystem and counts right-hand-side evaluations."""

    def __init__(self, system: OdeSystem):
        self.system = system
        self.dimension = system.dimension
        self.name = system.name
        self.calls = 0

    def __call__(self, y, t):
        self.calls += 1
        return self.system(y, t)


@dataclass(frozen=True)
class SolverConfig:
    s: int
    h: float
    t_end: float
    y0: Sequence[float]
    t0: float = 0.0
    family: Scheme = Scheme.AB
    probabilistic: bool = True
    seed: int = 0
    alpha_mode: AlphaMode = AlphaMode.BACKWARD_DIFFERENCE
    alpha_value: Sequence[float] | float | None = None
    rk_substeps: int = 8

    def __post_init__(self):
        object.__setattr__(self, "family", Scheme(self.family))
        object.__setattr__(self, "alpha_mode", AlphaMode(self.alpha_mode))
        object.__setattr__(self, "y0", tuple(float(v) for v in np.atleast_1d(self.y0)))
        if not 1 <= self.s <= MAX_AB_STEPS:
            raise ValueError(f"s must be in [1, {MAX_AB_STEPS}], got {self.s}")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")
        span = (self.t_end - self.t0) / self.h
        n = round(span)
        if abs(span - n) > 1e-9 * max(1.0, span):
            raise ValueError(f"(t_end - t0) / h = {span} is not an integer number of steps")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.alpha_mode is AlphaMode.FIXED and self.alpha_value is None:
            raise ValueError("alpha_mode 'fixed' needs alpha_value")

    @property
    def n_steps(self) -> int:
        return round((self.t_end - self.t0) / self.h)

    @property
    def dimension(self) -> int:
        return len(self.y0)

    @property
    def noise_active(self) -> bool:
        return self.probabilistic and self.alpha_mode is not AlphaMode.ZERO

    @property
    def window_length(self) -> int:
        """Stored derivative values: s for the mean, one more for the alpha stencil."""
        if self.noise_active and self.alpha_mode is AlphaMode.BACKWARD_DIFFERENCE:
            return self.s + 1
        return self.s

    def time(self, k: int) -> float:
        return self.t0 + k * self.h

    def laws(self) -> tuple[ConditionalLaw, ConditionalLaw | None]:
        predictor = conditional_law(Family.AB, self.s, True)
        if self.family is Scheme.AB:
            return predictor, None
        return predictor, conditional_law(Family.AM, self.s + 1, True)


@dataclass(frozen=True)
class StepperState:
    t: float
    y: np.ndarray
    f_window: tuple[np.ndarray, ...]  # most recent first
    h: float
    step_index: int
    t0: float = 0.0
    sd: np.ndarray | None = None
    alpha: np.ndarray | None = None


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (N+1, d), or (n, N+1, d) for ensembles
    sds: np.ndarray
    alphas: np.ndarray
    derivs: np.ndarray
    config: SolverConfig
    seed: int
    warmup_points: int
    step_evaluations: int = 0
    diverged_at: np.ndarray | None = field(default=None, repr=False)
    seeds: list[int] | None = None


class NoiseStream:
    """Standard-normal draws from one Generator per replicate.

    Draws are taken in blocks; numpy Generators produce the same sequence
    whether values are requested one vector at a time or as a block.
    """

    def __init__(self, rngs: np.random.Generator | Sequence[np.random.Generator], dimension: int,
                 block: int = 1024):
        self.single = isinstance(rngs, np.random.Generator)
        self.rngs = [rngs] if self.single else list(rngs)
        self.dimension = dimension
        self.block = block
        self._buf = None
        self._pos = block

    def draw(self) -> np.ndarray:
        if self._pos == self.block:
            self._buf = np.stack([g.standard_normal((self.block, self.dimension)) for g in self.rngs], axis=1)
            self._pos = 0
        z = self._buf[self._pos]
        self._pos += 1
        return z[0] if self.single else z


def replicate_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def replicate_seeds(seed: int, n: int) -> list[int]:
    """Per-replicate 64-bit seeds spawned from ``seed``.

    Replicate ``r`` of an ensemble is reproduced exactly by a single
    :func:`solve` with ``seed=replicate_seeds(seed, n)[r]``.
    """
    return [int(c.generate_state(1, np.uint64)[0]) for c in np.random.SeedSequence(seed).spawn(n)]


def _as_noise(rng, dimension: int) -> NoiseStream | None:
    if rng is None or isinstance(rng, NoiseStream):
        return rng
    # unbuffered, so repeated single-step calls consume the stream in order
    return NoiseStream(rng, dimension, block=1)


@lru_cache(maxsize=None)
def _float_weights(law: ConditionalLaw) -> tuple[tuple[float, ...], float]:
    return tuple(float(w) for w in law.f_weights), float(law.sd_constant)


@lru_cache(maxsize=None)
def _float_bd(order: int) -> tuple[float, ...]:
    return tuple(float(d) for d in bd_coefficients(order))


def _backward_difference(values: Sequence[np.ndarray], order: int, h: float) -> np.ndarray:
    delta = _float_bd(order)
    if len(values) < order + 1:
        raise StateError(f"need {order + 1} derivative values for the alpha stencil, have {len(values)}")
    acc = delta[0] * values[0]
    for d, v in zip(delta[1:], values[1:order + 1]):
        acc = acc + d * v
    return acc / h**order


def estimate_alpha(state: StepperState, s: int, f_next: np.ndarray | None = None) -> np.ndarray:
    """``h**-s * sum_k delta_k f_{i-k}``, componentwise.

    With ``f_next`` (the predictor derivative at t_{i+1}) the stencil is
    shifted one node forward and raised one order, as used by the AM corrector.
    """
    if f_next is None:
        return _backward_difference(state.f_window, s, state.h)
    return _backward_difference((f_next,) + tuple(state.f_window), s + 1, state.h)


def _rk4_step(system: OdeSystem, y, t, h, substeps):
    dt = h / substeps
    for m in range(substeps):
        tm = t + m * dt
        k1 = system(y, tm)
        k2 = system(y + 0.5 * dt * k1, tm + 0.5 * dt)
        k3 = system(y + 0.5 * dt * k2, tm + 0.5 * dt)
        k4 = system(y + dt * k3, tm + dt)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def rk_warmup(system: OdeSystem, config: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Grid values y_0..y_{w-1} and their derivatives, w = ``config.window_length``.

    Classical RK4 with ``config.rk_substeps`` substeps per grid interval.
    """
    w = min(config.window_length, config.n_steps + 1)
    y = np.array(config.y0, dtype=float)
    ys, fs = [y], [system(y, config.t0)]
    for k in range(1, w):
        y = _rk4_step(system, y, config.time(k - 1), config.h, config.rk_substeps)
        ys.append(y)
        fs.append(system(y, config.time(k)))
    return np.array(ys), np.array(fs)


def rk_init(system: OdeSystem, config: SolverConfig) -> StepperState:
    ys, fs = rk_warmup(system, config)
    k = len(ys) - 1
    return StepperState(
        t=config.time(k),
        y=ys[-1],
        f_window=tuple(fs[::-1]),
        h=config.h,
        step_index=k,
        t0=config.t0,
    )


def _alpha(state: StepperState, config: SolverConfig, order: int, f_next=None):
    if config.alpha_mode is AlphaMode.FIXED:
        return np.broadcast_to(np.asarray(config.alpha_value, dtype=float), state.y.shape)
    if config.alpha_mode is AlphaMode.BACKWARD_DIFFERENCE:
        return estimate_alpha(state, order, f_next)
    return np.zeros_like(state.y)


def _advance(system, state, y_new, sd, alpha, strict):
    if strict and not np.all(np.isfinite(y_new)):
        raise DivergenceError(state.step_index + 1)
    k = state.step_index + 1
    t_new = state.t0 + k * state.h
    f_new = system(y_new, t_new)
    window = (f_new,) + state.f_window[:-1]
    return StepperState(t_new, y_new, window, state.h, k, state.t0, sd, alpha)


def _mean_increment(weights, values):
    acc = weights[0] * values[0]
    for w, v in zip(weights[1:], values[1:]):
        acc = acc + w * v
    return acc


def step_ab(system: OdeSystem, state: StepperState, law: ConditionalLaw, config: SolverConfig,
            rng=None, strict: bool = True) -> StepperState:
    """One s-step AB update: mean from ``law``, then the Gaussian perturbation."""
    weights, C = _float_weights(law)
    s = len(weights)
    y_new = state.y + state.h * _mean_increment(weights, state.f_window[:s])
    if config.noise_active:
        alpha = _alpha(state, config, s)
        sd = C * state.h ** (s + 1) * np.abs(alpha)
        y_new = y_new + sd * _as_noise(rng, config.dimension).draw()
    else:
        alpha, sd = np.zeros_like(y_new), np.zeros_like(y_new)
    return _advance(system, state, y_new, sd, alpha, strict)


def step_am_pc(system: OdeSystem, state: StepperState, predictor_law: ConditionalLaw,
               corrector_law: ConditionalLaw, config: SolverConfig, rng=None,
               strict: bool = True) -> StepperState:
    """AB(s) predictor, derivative at the prediction, then the AM(s+1) corrector.

    Exactly two evaluations of ``system`` per call.
    """
    pw, _ = _float_weights(predictor_law)
    cw, C = _float_weights(corrector_law)
    s = len(pw)
    h = state.h
    y_pred = state.y + h * _mean_increment(pw, state.f_window[:s])
    f_star = system(y_pred, state.t0 + (state.step_index + 1) * h)
    y_new = state.y + h * _mean_increment(cw, (f_star,) + state.f_window[:s])
    if config.noise_active:
        alpha = _alpha(state, config, s, f_star)
        sd = C * h ** (s + 2) * np.abs(alpha)
        y_new = y_new + sd * _as_noise(rng, config.dimension).draw()
    else:
        alpha, sd = np.zeros_like(y_new), np.zeros_like(y_new)
    return _advance(system, state, y_new, sd, alpha, strict)


def _integrate(system: OdeSystem, config: SolverConfig, noise: NoiseStream | None,
               n_batch: int | None) -> Trajectory:
    d = config.dimension
    N = config.n_steps
    ys, fs = rk_warmup(system, config)
    w = len(ys)
    batch = () if n_batch is None else (n_batch,)

    def alloc():
        return np.zeros((N + 1,) + batch + (d,))

    states, sds, alphas, derivs = alloc(), alloc(), alloc(), alloc()
    states[:w] = ys[:, None, :] if batch else ys
    derivs[:w] = fs[:, None, :] if batch else fs
    times = config.t0 + np.arange(N + 1) * config.h

    if batch:
        ys = np.broadcast_to(ys[:, None, :], (w, n_batch, d)).copy()
        fs = np.broadcast_to(fs[:, None, :], (w, n_batch, d)).copy()
    state = StepperState(config.time(w - 1), ys[-1], tuple(fs[::-1]), config.h, w - 1, config.t0)

    predictor, corrector = config.laws()
    strict = not batch
    diverged = np.full(n_batch, -1) if batch else None
    counter = CountingSystem(system)
    traj = Trajectory(times, states, sds, alphas, derivs, config, config.seed, w, 0, diverged)

    with np.errstate(all="ignore" if batch else "warn"):
        for k in range(w, N + 1):
            try:
                if corrector is None:
                    state = step_ab(counter, state, predictor, config, noise, strict)
                else:
                    state = step_am_pc(counter, state, predictor, corrector, config, noise, strict)
            except DivergenceError as exc:
                traj.times, traj.states = times[:k], states[:k]
                traj.sds, traj.alphas, traj.derivs = sds[:k], alphas[:k], derivs[:k]
                traj.step_evaluations = counter.calls
                exc.trajectory = traj
                raise
            states[k], sds[k], alphas[k], derivs[k] = state.y, state.sd, state.alpha, state.f_window[0]
            if batch:
                bad = (diverged < 0) & ~np.all(np.isfinite(state.y), axis=-1)
                diverged[bad] = k
    traj.step_evaluations = counter.calls
    return traj


def solve(system: OdeSystem, config: SolverConfig, rng: np.random.Generator | None = None) -> Trajectory:
    """Integrate from t0 to t_end; deterministic given (system, config).

    ``rng`` defaults to the stream derived from ``config.seed``.
    """
    noise = None
    if config.noise_active:
        noise = NoiseStream(rng if rng is not None else replicate_rng(config.seed), config.dimension)
    return _integrate(system, config, noise, None)


def solve_ensemble(system: OdeSystem, config: SolverConfig, n: int,
                   seeds: Sequence[int] | None = None) -> Trajectory:
    """``n`` independent realisations, vectorised over a leading replicate axis.

    Replicate ``r`` uses ``replicate_seeds(config.seed, n)[r]`` unless explicit
    per-replicate ``seeds`` are given.  Non-finite replicates are recorded in
    ``diverged_at`` (first bad step index, -1 if never) instead of raising.
    The returned arrays have shape (n, N+1, d).
    """
    if n < 1:
        raise ValueError("n must be positive")
    noise = None
    if config.noise_active:
        if seeds is None:
            seeds = replicate_seeds(config.seed, n)
        elif len(seeds) != n:
            raise ValueError("need one seed per replicate")
        rngs = [replicate_rng(sd) for sd in seeds]
        noise = NoiseStream(rngs, config.dimension)
    traj = _integrate(system, config, noise, n)
    traj.seeds = list(seeds) if seeds is not None else None
    for name in ("states", "sds", "alphas", "derivs"):
        setattr(traj, name, np.ascontiguousarray(np.swapaxes(getattr(traj, name), 0, 1)))
    return traj


def with_config(config: SolverConfig, **changes) -> SolverConfig:
    return replace(config, **changes)

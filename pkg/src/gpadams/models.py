"""Model registry for the experiment harness.

Register further models with :func:`register_model`; a model needs a
vectorised right-hand side (leading axes are replicates) and a default
initial value.  Models without a closed form get their ground truth from a
high-order deterministic predictor-corrector solve on a much finer grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .solver import OdeSystem, Scheme, SolverConfig, solve

REFERENCE_REFINEMENT = 50
REFERENCE_STEPS = 5  # AB5 predictor + AM6 corrector


@dataclass(frozen=True)
class ModelSpec:
    name: str
    system: OdeSystem
    parameters: dict = field(default_factory=dict)
    y0: tuple[float, ...] = ()
    exact: Callable[[float], np.ndarray] | None = None
    description: str = ""

    def reference(self, t: float, h_min: float, t0: float = 0.0) -> tuple[np.ndarray, float]:
        """Ground-truth state at ``t`` and an estimate of its own error.

        For models without a closed form the reference is the deterministic
        AM predictor-corrector at ``h_min / REFERENCE_REFINEMENT``; the error
        estimate compares it with the same solve at twice that step.
        """
        if self.exact is not None:
            value = np.asarray(self.exact(t), dtype=float)
            return value, float(np.finfo(float).eps * np.max(np.abs(value)))
        h_ref = h_min / REFERENCE_REFINEMENT
        fine = self._reference_solve(t, h_ref, t0)
        coarse = self._reference_solve(t, 2 * h_ref, t0)
        floor = np.max(np.abs(fine - coarse))
        floor = max(float(floor), 1e-14 * max(1.0, float(np.max(np.abs(fine)))))
        return fine, floor

    def _reference_solve(self, t, h, t0):
        config = SolverConfig(
            s=REFERENCE_STEPS, h=h, t_end=t, t0=t0, y0=self.y0,
            family=Scheme.AM_PC, probabilistic=False,
        )
        return solve(self.system, config).states[-1]


MODELS: dict[str, ModelSpec] = {}


def register_model(spec: ModelSpec) -> ModelSpec:
    if spec.name in MODELS:
        raise ValueError(f"model {spec.name!r} is already registered")
    MODELS[spec.name] = spec
    return spec


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; registered models: {', '.join(sorted(MODELS))}") from None


def linear_test() -> ModelSpec:
    return ModelSpec(
        name="linear_test",
        system=OdeSystem(1, lambda y, t: -y, "linear_test"),
        y0=(1.0,),
        exact=lambda t: np.array([np.exp(-t)]),
        description="y' = -y, y(0) = 1",
    )


def lotka_volterra(alpha=1.0, beta=0.3, gamma=1.0, delta=0.7, y0=(1.0, 3.0)) -> ModelSpec:
    def rhs(y, t):
        x, p = y[..., 0], y[..., 1]
        return np.stack([alpha * x - beta * x * p, gamma * x * p - delta * p], axis=-1)

    return ModelSpec(
        name="lotka_volterra",
        system=OdeSystem(2, rhs, "lotka_volterra"),
        parameters=dict(alpha=alpha, beta=beta, gamma=gamma, delta=delta),
        y0=tuple(y0),
        description="x' = alpha x - beta x y, y' = gamma x y - delta y",
    )


def chua(alpha=-1.4157, beta=0.02944201, gamma=0.322673579,
         h1=-0.0197557699, h3=-0.0609273571, y0=(0.0, 0.003, 0.005)) -> ModelSpec:
    """Cubic Chua circuit, attractor CE96."""

    def rhs(y, t):
        x, v, z = y[..., 0], y[..., 1], y[..., 2]
        # x*x*x rather than x**3: keeps batch and single runs bit-identical
        return np.stack([
            alpha * (v - (1.0 + h1) * x - h3 * (x * x * x)),
            x - v + z,
            -beta * v - gamma * z,
        ], axis=-1)

    return ModelSpec(
        name="chua",
        system=OdeSystem(3, rhs, "chua"),
        parameters=dict(alpha=alpha, beta=beta, gamma=gamma, h1=h1, h3=h3),
        y0=tuple(y0),
        description="x' = alpha (y - (1 + h1) x - h3 x^3), y' = x - y + z, z' = -beta y - gamma z",
    )


for _factory in (linear_test, lotka_volterra, chua):
    register_model(_factory())

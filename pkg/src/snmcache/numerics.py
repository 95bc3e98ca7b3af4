from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from scipy.integrate import quad

from .errors import NumericsError


@dataclass(frozen=True)
class NumericsConfig:
    """Tolerances for every quadrature and root search in the package."""

    quad_rel_tol: float = 1e-9
    quad_abs_tol: float = 1e-12
    root_rel_tol: float = 1e-8
    truncation_horizon_factor: float = 60.0
    max_subdivisions: int = 200

    def __post_init__(self):
        for name in ("quad_rel_tol", "quad_abs_tol", "root_rel_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.truncation_horizon_factor >= 10:
            raise ValueError("truncation_horizon_factor must be >= 10")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_NUMERICS = NumericsConfig()

# quad may flag roundoff while still being well inside tolerance; only a
# reported error this far above the request counts as nonconvergence.
_SLACK = 1e3


def integrate_with_error(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    points: Iterable[float] | None = None,
) -> tuple[float, float]:
    """Adaptive quadrature of ``f`` over ``[a, b]``; returns ``(value, abserr)``.

    ``points`` are interior breakpoints (kinks of the integrand); those
    outside the open interval are dropped.
    """
    if not b > a:
        return 0.0, 0.0
    pts = sorted({p for p in (points or ()) if a < p < b})
    res = quad(
        f,
        a,
        b,
        epsabs=cfg.quad_abs_tol,
        epsrel=cfg.quad_rel_tol,
        limit=max(cfg.max_subdivisions, len(pts) + 2),
        points=pts or None,
        full_output=1,
    )
    value, abserr = float(res[0]), float(res[1])
    if len(res) > 3:
        tol = max(cfg.quad_abs_tol, cfg.quad_rel_tol * abs(value))
        if abserr > _SLACK * tol:
            raise NumericsError(
                f"quadrature on [{a:g}, {b:g}] did not converge: {res[3]}",
                partial=value,
                abserr=abserr,
            )
    return value, abserr


def integrate(f, a, b, cfg=DEFAULT_NUMERICS, points=None) -> float:
    return integrate_with_error(f, a, b, cfg, points)[0]

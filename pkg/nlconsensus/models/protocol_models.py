from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import integrate

from nlconsensus.core.config import settings

# linear:    h(w) = alpha * w
# linsin:    h(w) = alpha * w + sin(w)
# piecewise: h(w) = w^2 (w > 1), sqrt(w) (0 < w <= 1), -sqrt(-w) (-1 < w <= 0), -w^2 (w <= -1)
# table:     monotone piecewise-linear interpolation of (w, h) samples,
#            extended linearly past both ends with the end-segment slopes
ProtocolKind = Literal["linear", "linsin", "piecewise", "table"]


class Protocol(BaseModel):
    """Scalar coupling function h applied to every agent state."""

    model_config = ConfigDict(frozen=True)

    kind: ProtocolKind
    alpha: Optional[float] = None
    table_w: Tuple[float, ...] = ()
    table_h: Tuple[float, ...] = ()
    declared_sector_bound: Optional[float] = None

    @model_validator(mode="after")
    def check_definition(self) -> "Protocol":
        if self.kind in ("linear", "linsin"):
            if self.alpha is None or not np.isfinite(self.alpha):
                raise ValueError(f"{self.kind} protocol needs a finite alpha")
            if self.kind == "linear" and self.alpha <= 0:
                raise ValueError("linear protocol needs alpha > 0 to be strictly increasing")
        if self.kind == "table":
            w = np.asarray(self.table_w, dtype=float)
            h = np.asarray(self.table_h, dtype=float)
            if w.size < 2 or w.size != h.size:
                raise ValueError("table protocol needs at least two (w, h) pairs of equal length")
            if not (np.all(np.diff(w) > 0) and np.all(np.diff(h) > 0)):
                raise ValueError("table columns must be strictly increasing")
        if self.declared_sector_bound is not None and self.declared_sector_bound <= 0:
            raise ValueError("declared_sector_bound must be positive")
        h0 = float(self.evaluate(0.0))
        if abs(h0) > settings.H_ZERO_TOL:
            raise ValueError(f"protocol must satisfy h(0) = 0, got h(0) = {h0!r}")
        return self

    @property
    def label(self) -> str:
        if self.kind in ("linear", "linsin"):
            return f"{self.kind}:{self.alpha:g}"
        return self.kind

    def evaluate(self, w):
        """h(w), elementwise for arrays."""
        w = np.asarray(w, dtype=float)
        if self.kind == "linear":
            return self.alpha * w
        if self.kind == "linsin":
            return self.alpha * w + np.sin(w)
        if self.kind == "piecewise":
            b = np.abs(w)
            return np.sign(w) * np.where(b > 1.0, b * b, np.sqrt(b))
        return self._interpolate(w)

    def antiderivative(self, a):
        """F(a) = integral of h from 0 to a, elementwise for arrays."""
        a = np.asarray(a, dtype=float)
        if self.kind == "linear":
            return 0.5 * self.alpha * a * a
        if self.kind == "linsin":
            return 0.5 * self.alpha * a * a + 1.0 - np.cos(a)
        if self.kind == "piecewise":
            # h is odd, so F is even
            b = np.abs(a)
            return np.where(b > 1.0, 2.0 / 3.0 + (b ** 3 - 1.0) / 3.0, (2.0 / 3.0) * b ** 1.5)
        return np.vectorize(self._table_integral, otypes=[float])(a)

    def _interpolate(self, w: np.ndarray) -> np.ndarray:
        xs = np.asarray(self.table_w)
        ys = np.asarray(self.table_h)
        lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        y = np.interp(w, xs, ys)
        y = np.where(w < xs[0], ys[0] + lo_slope * (w - xs[0]), y)
        return np.where(w > xs[-1], ys[-1] + hi_slope * (w - xs[-1]), y)

    def _table_integral(self, a: float) -> float:
        if a == 0.0:
            return 0.0
        lo, hi = min(0.0, a), max(0.0, a)
        breaks = [p for p in self.table_w if lo < p < hi]
        value, _ = integrate.quad(
            lambda s: float(self._interpolate(np.asarray(s))),
            lo,
            hi,
            points=breaks or None,
            epsrel=settings.QUAD_REL_TOL,
            epsabs=0.0,
            limit=max(50, 4 * len(breaks) + 10),
        )
        return value if a > 0 else -value

    def segment_slopes(self) -> np.ndarray:
        """Slopes of the table segments (table protocols only)."""
        return np.diff(np.asarray(self.table_h)) / np.diff(np.asarray(self.table_w))


class MonotonicityReport(BaseModel):
    """Sampled certificate: a report on a grid, not a proof."""

    model_config = ConfigDict(frozen=True)

    monotone_on_range: bool
    witness: Optional[Tuple[float, float]] = None
    estimated_sector_bound: float
    lo: float
    hi: float
    grid_points: int

    @model_validator(mode="after")
    def check_witness(self) -> "MonotonicityReport":
        if not self.monotone_on_range and self.witness is None:
            raise ValueError("a failed monotonicity report must carry a witness")
        return self

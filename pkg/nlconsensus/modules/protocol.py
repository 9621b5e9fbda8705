"""
Protocol Module
===============
Builds coupling functions h, evaluates them, and certifies monotonicity and
sector bounds by sampling difference quotients on a grid.

Certification is sampled: a passing report covers the grid, not the real
line. Callers pick the range from the states the run can visit.
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from nlconsensus.core.config import settings
from nlconsensus.core.exceptions import NonMonotone, ProtocolSpecError
from nlconsensus.core.logger import logger
from nlconsensus.models.protocol_models import MonotonicityReport, Protocol


class ProtocolModule:

    def __init__(self, samples: Optional[int] = None, padding: Optional[float] = None):
        self.samples = samples or settings.MONOTONE_SAMPLES
        self.padding = settings.RANGE_PADDING if padding is None else padding

    # ==================== CONSTRUCTORS ====================

    def linear(self, alpha: float) -> Protocol:
        return Protocol(kind="linear", alpha=alpha, declared_sector_bound=alpha)

    def linear_plus_sine(self, alpha: float) -> Protocol:
        # h' = alpha + cos(w) >= alpha - 1
        bound = alpha - 1.0 if alpha > 1.0 else None
        return Protocol(kind="linsin", alpha=alpha, declared_sector_bound=bound)

    def piecewise_power_root(self) -> Protocol:
        # h' >= 1/2, attained approaching w = +-1 from inside
        return Protocol(kind="piecewise", declared_sector_bound=0.5)

    def table(self, w: Sequence[float], h: Sequence[float]) -> Protocol:
        probe = Protocol(kind="table", table_w=tuple(w), table_h=tuple(h))
        return Protocol(
            kind="table",
            table_w=probe.table_w,
            table_h=probe.table_h,
            declared_sector_bound=float(np.min(probe.segment_slopes())),
        )

    def load_table(self, path: str) -> Protocol:
        """Read 'w h(w)' pairs, one per line; blank lines and '#' comments skipped."""
        p = Path(path)
        if not p.exists():
            raise ProtocolSpecError(f"protocol table not found: {path}")
        ws, hs = [], []
        for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ProtocolSpecError(f"{path}:{lineno}: expected 'w h' pair, got {raw!r}")
            try:
                ws.append(float(parts[0]))
                hs.append(float(parts[1]))
            except ValueError as e:
                raise ProtocolSpecError(f"{path}:{lineno}: {e}") from e
        try:
            return self.table(ws, hs)
        except ValidationError as e:
            raise ProtocolSpecError(f"{path}: invalid protocol table: {e.errors()[0]['msg']}") from e

    def parse_spec(self, spec: str, base_dir: Optional[Path] = None) -> Protocol:
        """
        Protocol strings: linear:<alpha>, linsin:<alpha>, piecewise, table:<path>.
        Relative table paths resolve against base_dir when given.
        """
        kind, _, arg = spec.strip().partition(":")
        kind = kind.lower()
        try:
            if kind == "piecewise" and not arg:
                return self.piecewise_power_root()
            if kind in ("linear", "linsin"):
                alpha = float(arg)
                return self.linear(alpha) if kind == "linear" else self.linear_plus_sine(alpha)
            if kind == "table" and arg:
                path = Path(arg)
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                return self.load_table(str(path))
        except ValueError as e:
            # pydantic ValidationError is a ValueError
            raise ProtocolSpecError(f"invalid protocol spec {spec!r}: {e}") from e
        raise ProtocolSpecError(
            f"unknown protocol spec {spec!r} (expected linear:<a>, linsin:<a>, piecewise, table:<path>)"
        )

    # ==================== EVALUATION ====================

    def evaluate(self, p: Protocol, w: float) -> float:
        return float(p.evaluate(w))

    def state_range(self, x0: Sequence[float]) -> Tuple[float, float]:
        """Hull of the initial values padded on both sides; the run stays inside it."""
        x0 = np.asarray(x0, dtype=float)
        lo, hi = float(np.min(x0)), float(np.max(x0))
        span = hi - lo
        pad = self.padding * span if span > 0 else self.padding * max(1.0, abs(lo))
        return lo - pad, hi + pad

    # ==================== CERTIFICATION ====================

    def _grid(self, lo: float, hi: float, samples: int) -> np.ndarray:
        base = np.linspace(lo, hi, samples)
        grid = np.empty(2 * samples - 1)
        grid[0::2] = base
        grid[1::2] = 0.5 * (base[:-1] + base[1:])
        return grid

    def check_monotone(
        self, p: Protocol, range_: Tuple[float, float], samples: Optional[int] = None
    ) -> MonotonicityReport:
        lo, hi = range_
        samples = samples or self.samples
        if not lo < hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        if samples < 2:
            raise ValueError("samples must be at least 2")

        grid = self._grid(lo, hi, samples)
        values = p.evaluate(grid)
        quotients = np.diff(values) / np.diff(grid)
        k = int(np.argmin(quotients))
        bound = float(quotients[k])

        witness = None
        monotone = bool(np.all(quotients > 0))
        if not monotone:
            bad = int(np.flatnonzero(quotients <= 0)[0])
            witness = (float(grid[bad]), float(grid[bad + 1]))
            logger.warning(
                f"Protocol {p.label} is not increasing on [{lo:g}, {hi:g}]: "
                f"quotient {quotients[bad]:.4g} on {witness}"
            )
        elif p.declared_sector_bound is not None and bound < p.declared_sector_bound - 1e-9:
            logger.warning(
                f"Protocol {p.label}: sampled sector bound {bound:.6g} is below the declared "
                f"{p.declared_sector_bound:.6g}"
            )

        return MonotonicityReport(
            monotone_on_range=monotone,
            witness=witness,
            estimated_sector_bound=bound,
            lo=lo,
            hi=hi,
            grid_points=grid.size,
        )

    def sector_bound(
        self, p: Protocol, range_: Tuple[float, float], samples: Optional[int] = None
    ) -> float:
        report = self.check_monotone(p, range_, samples)
        if report.estimated_sector_bound <= 0:
            raise NonMonotone(
                f"protocol {p.label} has sampled sector bound {report.estimated_sector_bound:.4g} "
                f"on [{report.lo:g}, {report.hi:g}]"
            )
        return report.estimated_sector_bound


# Singleton instance
protocol_module = ProtocolModule()

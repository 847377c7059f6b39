"""Energy imbalance bookkeeping, EoS call accounting and secant statistics."""
from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass, field

import numpy as np

RIEMANN = "riemann"
AUXILIARY = "auxiliary"
SECANT = "secant"
CATEGORIES = (RIEMANN, AUXILIARY, SECANT)

# One call = one point evaluation of state_from, energy_derivatives,
# the internal-energy map E(rho, phi), or a pressure/sound-speed check.
COST_MODEL = ("one call per element-wise evaluation of a thermodynamic state, "
              "energy derivative pair, internal energy or admissibility check")


class EosCallCounters:
    """Per-category counts of EoS point evaluations.

    Thread safe; totals do not depend on the order of :meth:`record` calls.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._counts = dict.fromkeys(CATEGORIES, 0)

    def record(self, category: str, n: int = 1) -> None:
        if category not in self._counts:
            raise KeyError(f"unknown EoS call category {category!r}")
        with self._lock:
            self._counts[category] += int(n)

    @property
    def riemann_calls(self) -> int:
        return self._counts[RIEMANN]

    @property
    def auxiliary_calls(self) -> int:
        return self._counts[AUXILIARY]

    @property
    def secant_calls(self) -> int:
        return self._counts[SECANT]

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def as_dict(self) -> dict:
        out = {f"{k}_calls": v for k, v in self._counts.items()}
        out["total_calls"] = self.total
        return out


def fmt(value) -> str:
    """17-significant-digit decimal, so every double survives a CSV round trip."""
    return format(float(value), ".17g")


def record(counters: EosCallCounters | None, category: str, n: int) -> None:
    if counters is not None:
        counters.record(category, n)


class ImbalanceLedger:
    """Running dimensionless total-energy imbalance ``I(t)``.

    ``I(t) = [int E_t(t) - int E_t(0) + int_0^t (F_right - F_left) dt]
    / (C_domain * int E_t(0))`` with ``C_domain`` the domain length.
    """

    def __init__(self, initial_total: float, domain_volume: float):
        if initial_total == 0:
            raise ValueError("initial total energy must be nonzero")
        self.initial_total = float(initial_total)
        self.domain_volume = float(domain_volume)
        self.boundary_integral = 0.0
        self.t = 0.0
        self.history: list[tuple[float, float]] = [(0.0, 0.0)]

    def imbalance(self, current_total: float) -> float:
        return ((current_total - self.initial_total + self.boundary_integral)
                / (self.domain_volume * self.initial_total))

    def record_step(self, dt: float, flux_left: float, flux_right: float,
                    current_total: float) -> float:
        self.boundary_integral += dt * (flux_right - flux_left)
        self.t += dt
        value = self.imbalance(current_total)
        self.history.append((self.t, value))
        return value

    @property
    def final(self) -> float:
        return self.history[-1][1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "I_Et"])
            for t, v in self.history:
                w.writerow([fmt(t), fmt(v)])


@dataclass
class SecantStats:
    average: float
    max: int
    histogram: dict[int, int]
    samples: int
    not_converged: int = 0
    flat_accepted: int = 0

    def as_dict(self) -> dict:
        return {"average_iterations": self.average, "max_iterations": self.max,
                "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "samples": self.samples, "not_converged": self.not_converged,
                "flat_accepted": self.flat_accepted,
                "convention": "accepted initial guess counts as one iteration"}


@dataclass
class SecantAccumulator:
    """Streaming histogram of per-cell secant iteration counts."""

    counts: dict[int, int] = field(default_factory=dict)
    not_converged: int = 0
    flat_accepted: int = 0

    def add(self, report) -> None:
        it = np.maximum(np.asarray(report.iterations), 1)
        values, freq = np.unique(it, return_counts=True)
        for v, f in zip(values.tolist(), freq.tolist()):
            self.counts[v] = self.counts.get(v, 0) + f
        flat = np.asarray(report.flat)
        self.not_converged += int(np.count_nonzero(~np.asarray(report.converged) & ~flat))
        self.flat_accepted += int(np.count_nonzero(flat))

    def stats(self) -> SecantStats:
        n = sum(self.counts.values())
        if n == 0:
            return SecantStats(average=0.0, max=0, histogram={}, samples=0)
        avg = sum(k * v for k, v in self.counts.items()) / n
        return SecantStats(average=avg, max=max(self.counts), histogram=dict(self.counts),
                           samples=n, not_converged=self.not_converged,
                           flat_accepted=self.flat_accepted)


def summarize_secant(reports) -> SecantStats:
    acc = SecantAccumulator()
    for r in reports:
        acc.add(r)
    return acc.stats()


def write_summary(path, **sections) -> None:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o))

    with open(path, "w") as fh:
        json.dump(sections, fh, indent=2, sort_keys=True, default=default)

"""Domain types and bid-structure predicates for the SoC-dependent market.

All types are immutable after construction (frozen dataclasses holding
read-only numpy arrays), so instances can be shared freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BreakpointViolation,
    DimensionMismatch,
    MonotonicityViolation,
    OutOfRange,
    SpreadViolation,
)

#: absolute tolerance on $/MWh when testing the equal-decremental-cost-ratio condition
EDCR_TOL = 1e-9
#: required margin for the strict bid spread c^c_1/eta < c^d_K
SPREAD_MARGIN = 1e-9
#: absolute MWh tolerance when locating a SoC inside the breakpoint span
SOC_TOL = 1e-9


def _freeze(values, dtype=float) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=dtype)).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SocBid:
    """Piecewise-constant SoC-dependent price schedule.

    ``breakpoints`` has K+1 nondecreasing SoC values; segment k (1-based)
    covers ``[breakpoints[k-1], breakpoints[k])`` with the last segment
    closed at the top. ``charge_prices`` are marginal charging benefits and
    ``discharge_prices`` marginal discharging costs, both $/MWh per segment.
    """

    breakpoints: np.ndarray
    charge_prices: np.ndarray
    discharge_prices: np.ndarray
    efficiency: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", _freeze(self.breakpoints))
        object.__setattr__(self, "charge_prices", _freeze(self.charge_prices))
        object.__setattr__(self, "discharge_prices", _freeze(self.discharge_prices))
        object.__setattr__(self, "efficiency", float(self.efficiency))
        if self.charge_prices.shape != self.discharge_prices.shape:
            raise BreakpointViolation("charge and discharge price vectors differ in length")
        if self.breakpoints.size != self.charge_prices.size + 1:
            raise BreakpointViolation("need K+1 breakpoints for K price segments")
        if self.charge_prices.size < 1:
            raise BreakpointViolation("at least one segment required")
        if not (0.0 < self.efficiency <= 1.0):
            raise BreakpointViolation(f"efficiency must be in (0, 1], got {self.efficiency}")

    @property
    def num_segments(self) -> int:
        return self.charge_prices.size

    @property
    def soc_min(self) -> float:
        return float(self.breakpoints[0])

    @property
    def soc_max(self) -> float:
        return float(self.breakpoints[-1])

    def scaled(self, factor: float) -> "SocBid":
        """Same schedule with all prices multiplied by ``factor``."""
        return SocBid(self.breakpoints, factor * self.charge_prices,
                      factor * self.discharge_prices, self.efficiency)


def flat_bid(charge_price: float, discharge_price: float, soc_min: float,
             soc_max: float, efficiency: float = 1.0, segments: int = 1) -> SocBid:
    """SoC-independent bid: one price pair replicated over ``segments`` equal segments."""
    e = np.linspace(soc_min, soc_max, segments + 1)
    return SocBid(e, np.full(segments, float(charge_price)),
                  np.full(segments, float(discharge_price)), efficiency)


def validate_bid(bid: SocBid, spread_margin: float = SPREAD_MARGIN) -> None:
    """Check the monotonic SoC-dependent bid conditions, raising on the first failure.

    Raises
    ------
    BreakpointViolation
        Breakpoints decrease somewhere.
    MonotonicityViolation
        A price sequence increases along the SoC axis.
    SpreadViolation
        Top charge benefit over efficiency is not below the bottom discharge cost.
    """
    e = bid.breakpoints
    if np.any(np.diff(e) < 0):
        raise BreakpointViolation(f"breakpoints must be nondecreasing, got {e}")
    if not np.all(np.isfinite(e)):
        raise BreakpointViolation("breakpoints must be finite")
    for name, prices in (("charge", bid.charge_prices), ("discharge", bid.discharge_prices)):
        if not np.all(np.isfinite(prices)):
            raise MonotonicityViolation(f"{name} prices must be finite")
        if np.any(np.diff(prices) > 0):
            raise MonotonicityViolation(f"{name} prices must be nonincreasing in SoC, got {prices}")
    if bid.charge_prices[0] / bid.efficiency > bid.discharge_prices[-1] - spread_margin:
        raise SpreadViolation(
            f"require c^c_1/eta < c^d_K: {bid.charge_prices[0]}/{bid.efficiency} "
            f"vs {bid.discharge_prices[-1]}")


def is_edcr(bid: SocBid, tol: float = EDCR_TOL) -> bool:
    """True iff consecutive price decrements satisfy dc^c_k = eta * dc^d_k.

    Checked in difference form so flat stretches (both decrements zero) pass.
    Vacuously true for single-segment bids.
    """
    dcc = -np.diff(bid.charge_prices)
    dcd = -np.diff(bid.discharge_prices)
    return bool(np.all(np.abs(dcc - bid.efficiency * dcd) <= tol))


def segment_index(bid: SocBid, e: float, tol: float = SOC_TOL) -> int:
    """1-based segment containing SoC ``e``.

    Segments are half-open ``[E_k, E_{k+1})`` with the last closed, so the
    lookup is single-valued at interior breakpoints; zero-width segments are
    skipped. Raises :class:`OutOfRange` outside the span beyond ``tol``.
    """
    e_arr = bid.breakpoints
    if e < e_arr[0] - tol or e > e_arr[-1] + tol:
        raise OutOfRange(f"SoC {e} outside [{e_arr[0]}, {e_arr[-1]}]")
    k = int(np.searchsorted(e_arr, e, side="right")) - 1
    return min(max(k, 0), bid.num_segments - 1) + 1


@dataclass(frozen=True)
class StorageAsset:
    """Physical storage data plus its submitted bid.

    ``dispatch_fraction_up``/``down`` are the expected fractions of cleared
    regulation capacity actually exercised, per interval; a length-1 array
    broadcasts over the horizon.
    """

    bid: SocBid
    soc_min: float
    soc_max: float
    charge_cap: float
    discharge_cap: float
    regdown_cap: float
    regup_cap: float
    initial_soc: float
    dispatch_fraction_up: np.ndarray = field(default_factory=lambda: np.ones(1))
    dispatch_fraction_down: np.ndarray = field(default_factory=lambda: np.ones(1))
    bus: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dispatch_fraction_up", _freeze(self.dispatch_fraction_up))
        object.__setattr__(self, "dispatch_fraction_down", _freeze(self.dispatch_fraction_down))
        for name in ("soc_min", "soc_max", "charge_cap", "discharge_cap",
                     "regdown_cap", "regup_cap", "initial_soc"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.soc_min - SOC_TOL <= self.initial_soc <= self.soc_max + SOC_TOL):
            raise OutOfRange(f"initial SoC {self.initial_soc} outside "
                             f"[{self.soc_min}, {self.soc_max}]")
        for name in ("charge_cap", "discharge_cap", "regdown_cap", "regup_cap"):
            if getattr(self, name) < 0:
                raise DimensionMismatch(f"{name} must be nonnegative")
        if abs(self.bid.soc_min - self.soc_min) > SOC_TOL or \
           abs(self.bid.soc_max - self.soc_max) > SOC_TOL:
            raise BreakpointViolation(
                f"bid breakpoints span [{self.bid.soc_min}, {self.bid.soc_max}] "
                f"but asset SoC range is [{self.soc_min}, {self.soc_max}]")
        gammas = np.concatenate([self.dispatch_fraction_up, self.dispatch_fraction_down])
        if np.any(gammas < 0) or np.any(gammas > 1):
            raise DimensionMismatch("dispatch fractions must lie in [0, 1]")

    def gamma_up(self, t: int) -> float:
        g = self.dispatch_fraction_up
        return float(g[t] if g.size > 1 else g[0])

    def gamma_down(self, t: int) -> float:
        g = self.dispatch_fraction_down
        return float(g[t] if g.size > 1 else g[0])

    def with_bid(self, bid: SocBid) -> "StorageAsset":
        """Copy of this asset submitting a different bid."""
        return StorageAsset(bid, self.soc_min, self.soc_max, self.charge_cap,
                            self.discharge_cap, self.regdown_cap, self.regup_cap,
                            self.initial_soc, self.dispatch_fraction_up,
                            self.dispatch_fraction_down, self.bus)

    def with_initial_soc(self, s: float) -> "StorageAsset":
        return StorageAsset(self.bid, self.soc_min, self.soc_max, self.charge_cap,
                            self.discharge_cap, self.regdown_cap, self.regup_cap,
                            s, self.dispatch_fraction_up, self.dispatch_fraction_down,
                            self.bus)


@dataclass(frozen=True)
class Generator:
    """Linear-cost generator offering energy and regulation capacity.

    ``output_max`` may be a scalar or a per-interval vector (time-varying
    capacity, e.g. solar); ``output_min`` is a scalar. Optional regulation
    caps of ``None`` mean uncapped.
    """

    energy_price: float
    regup_price: float = 0.0
    regdown_price: float = 0.0
    output_max: np.ndarray = field(default_factory=lambda: np.zeros(1))
    output_min: float = 0.0
    regup_capacity_max: Optional[float] = None
    regdown_capacity_max: Optional[float] = None
    bus: int = 0

    def __post_init__(self):
        object.__setattr__(self, "output_max", _freeze(self.output_max))
        object.__setattr__(self, "output_min", float(self.output_min))
        if np.any(self.output_max < self.output_min - 1e-12):
            raise DimensionMismatch("output_max below output_min")
        for cap in (self.regup_capacity_max, self.regdown_capacity_max):
            if cap is not None and cap < 0:
                raise DimensionMismatch("regulation caps must be nonnegative")

    def cap(self, t: int) -> float:
        g = self.output_max
        return float(g[t] if g.size > 1 else g[0])


@dataclass(frozen=True)
class Network:
    """DC network as a shift-factor matrix over buses with directed line limits.

    ``shift_factors`` has one row per monitored line direction (2B rows for B
    branches) and one column per bus; single-bus systems use B = 0.
    """

    bus_count: int = 1
    shift_factors: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))
    line_limits: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        sf = np.asarray(self.shift_factors, dtype=float).reshape(-1, self.bus_count).copy()
        sf.setflags(write=False)
        object.__setattr__(self, "shift_factors", sf)
        ll = np.atleast_1d(np.asarray(self.line_limits, dtype=float)).copy()
        ll.setflags(write=False)
        object.__setattr__(self, "line_limits", ll)
        if self.shift_factors.shape[0] != self.line_limits.size:
            raise DimensionMismatch(
                f"{self.shift_factors.shape[0]} shift-factor rows vs "
                f"{self.line_limits.size} line limits")


@dataclass(frozen=True)
class MarketInstance:
    """One multi-interval energy-reserve clearing problem."""

    horizon: int
    interval_length: float
    demand: np.ndarray                      # (T, M) MW
    regup_requirement: np.ndarray           # (T,) MW
    regdown_requirement: np.ndarray         # (T,) MW
    generators: Tuple[Generator, ...]
    storages: Tuple[StorageAsset, ...]
    network: Network = field(default_factory=Network)

    def __post_init__(self):
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "interval_length", float(self.interval_length))
        d = np.asarray(self.demand, dtype=float)
        if d.ndim == 1:
            d = d.reshape(-1, 1)
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "demand", d)
        object.__setattr__(self, "regup_requirement", _freeze(self.regup_requirement))
        object.__setattr__(self, "regdown_requirement", _freeze(self.regdown_requirement))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "storages", tuple(self.storages))
        validate_instance(self)

    @property
    def num_buses(self) -> int:
        return self.network.bus_count

    def with_storage_bids(self, bids: Sequence[SocBid]) -> "MarketInstance":
        """Copy with each storage submitting the corresponding bid."""
        if len(bids) != len(self.storages):
            raise DimensionMismatch("one bid per storage required")
        storages = tuple(a.with_bid(b) for a, b in zip(self.storages, bids))
        return MarketInstance(self.horizon, self.interval_length, self.demand,
                              self.regup_requirement, self.regdown_requirement,
                              self.generators, storages, self.network)


def validate_instance(inst: MarketInstance) -> None:
    """Shape and sign checks tying the instance parts together."""
    T, M = inst.horizon, inst.num_buses
    if T < 1:
        raise DimensionMismatch("horizon must be at least 1")
    if inst.interval_length <= 0:
        raise DimensionMismatch("interval length must be positive")
    if inst.demand.shape != (T, M):
        raise DimensionMismatch(f"demand shape {inst.demand.shape} != ({T}, {M})")
    for name, req in (("regup", inst.regup_requirement), ("regdown", inst.regdown_requirement)):
        if req.size != T:
            raise DimensionMismatch(f"{name} requirement length {req.size} != horizon {T}")
        if np.any(req < 0):
            raise DimensionMismatch(f"{name} requirement must be nonnegative")
    for g in inst.generators:
        if not 0 <= g.bus < M:
            raise DimensionMismatch(f"generator bus {g.bus} outside 0..{M - 1}")
        if g.output_max.size not in (1, T):
            raise DimensionMismatch("generator output_max must be scalar or length-T")
    for s in inst.storages:
        if not 0 <= s.bus < M:
            raise DimensionMismatch(f"storage bus {s.bus} outside 0..{M - 1}")
        for g in (s.dispatch_fraction_up, s.dispatch_fraction_down):
            if g.size not in (1, T):
                raise DimensionMismatch("dispatch fractions must be scalar or length-T")


@dataclass(frozen=True)
class Trajectory:
    """Intra-interval regulation mileage and the fine-grained SoC path it induces."""

    sub_interval_length: float              # delta, hours
    mileage_up: np.ndarray                  # (J,) MW
    mileage_down: np.ndarray                # (J,) MW
    fine_soc: np.ndarray                    # (J+1,) MWh

    def __post_init__(self):
        object.__setattr__(self, "sub_interval_length", float(self.sub_interval_length))
        object.__setattr__(self, "mileage_up", _freeze(self.mileage_up))
        object.__setattr__(self, "mileage_down", _freeze(self.mileage_down))
        object.__setattr__(self, "fine_soc", _freeze(self.fine_soc))
        if self.sub_interval_length <= 0:
            raise DimensionMismatch("sub-interval length must be positive")
        if self.mileage_up.shape != self.mileage_down.shape:
            raise DimensionMismatch("mileage vectors differ in length")
        if self.fine_soc.size != self.mileage_up.size + 1:
            raise DimensionMismatch("fine SoC path needs J+1 points for J sub-intervals")

    @property
    def sub_count(self) -> int:
        return self.mileage_up.size

    @property
    def up_total(self) -> float:
        """Total regulation-up energy, MWh."""
        return float(np.sum(self.mileage_up) * self.sub_interval_length)

    @property
    def down_total(self) -> float:
        """Total regulation-down energy, MWh."""
        return float(np.sum(self.mileage_down) * self.sub_interval_length)

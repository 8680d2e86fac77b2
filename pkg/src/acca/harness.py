"""Trajectory runner, late-time averages and the (k_mid, k_noise, epsilon, topology) sweep."""

from __future__ import annotations

import logging
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .circle import PI, Kind, Topology, wrap_pi
from .dynamics import StepParams, make_rng
from .errors import UsageError
from .observables import _weights, ideal_winding

log = logging.getLogger(__name__)

UNIFORM = "uniform"
WINDING = "winding"

DEFAULT_STEPS = 10**6
DEFAULT_FRACTION = 0.2
DEFAULT_REPLICATES = 8
FLIP_WINDOW = 50
FLIP_BAND = 0.5


@dataclass(frozen=True)
class SimulationParams:
    n: int = 100
    topology: Kind = Kind.RING
    epsilon: float = 0.0
    k_mid: int = 1
    k_noise: int = 1
    steps: int = DEFAULT_STEPS
    record_stride: int | None = None  # None means one record every n steps
    seed: int = 0
    init: str = UNIFORM
    winding: int = 0
    alpha: float = 0.0
    snapshot_times: tuple[int, ...] = ()
    keep_frames: bool = False
    stop_r: float | None = None  # stop after the first record with R above this

    def __post_init__(self):
        object.__setattr__(self, "topology", Kind.parse(self.topology))
        object.__setattr__(self, "snapshot_times", tuple(sorted(int(t) for t in self.snapshot_times)))

    @property
    def topo(self) -> Topology:
        return Topology(self.topology, self.n)

    @property
    def stride(self) -> int:
        return self.n if self.record_stride is None else self.record_stride

    @property
    def step_params(self) -> StepParams:
        return StepParams(self.epsilon, self.k_mid, self.k_noise)

    def validate(self) -> "SimulationParams":
        topo = self.topo
        self.step_params.validate(topo)
        if self.steps < 0:
            raise UsageError("steps must be non-negative")
        if self.stride < 1:
            raise UsageError("record_stride must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.init not in (UNIFORM, WINDING):
            raise UsageError(f"unknown initializer {self.init!r}")
        if self.init == WINDING and not topo.is_ring:
            raise UsageError("the winding initializer is only meaningful on the ring")
        if self.init == WINDING and 2 * abs(self.winding) >= self.n:
            raise UsageError(f"winding {self.winding} is too large for {self.n} sites")
        if any(t < 0 or t > self.steps for t in self.snapshot_times):
            raise UsageError("snapshot times must lie in [0, steps]")
        if self.stop_r is not None and not 0.0 < self.stop_r < 1.0:
            raise UsageError("stop_r must lie in (0, 1)")
        return self


@dataclass
class TimeSeries:
    topology: Topology
    t: np.ndarray
    r: np.ndarray
    psi: np.ndarray  # nan where undefined
    y: np.ndarray
    tau1: np.ndarray
    w: np.ndarray | None  # rounded winding numbers; None on the path
    final: np.ndarray
    steps_run: int
    frames: np.ndarray | None = None
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.size


def initial_configuration(params: SimulationParams, rng: np.random.Generator) -> np.ndarray:
    if params.init == WINDING:
        return ideal_winding(params.n, params.winding, params.alpha)[1]
    return wrap_pi(rng.uniform(-PI, PI, size=params.n))


def run_simulation(params: SimulationParams) -> TimeSeries:
    """Run ``params.steps`` parallel steps from the chosen initial condition.

    The generator is seeded once; the uniform initializer draws ``n`` angles
    from it before the first step.
    """
    params.validate()
    topo = params.topo
    rng = make_rng(params.seed)
    theta = np.ascontiguousarray(initial_configuration(params, rng), dtype=np.float64)
    w, den = _weights(params.n)
    snap_t = np.array(params.snapshot_times, dtype=np.int64)
    t, obs, frames, snaps, steps_run = _kernels.run(
        theta, topo.is_ring, float(params.epsilon), params.k_mid, params.k_noise,
        params.steps, params.stride, rng, w, den, params.keep_frames, snap_t,
        0.0 if params.stop_r is None else float(params.stop_r),
    )
    winding = None
    if topo.is_ring:
        winding = np.rint(obs[:, 4]).astype(np.int64)
    snapshots = {int(s): snaps[k].copy() for k, s in enumerate(params.snapshot_times) if s <= steps_run}
    return TimeSeries(
        topology=topo, t=t, r=obs[:, 0].copy(), psi=obs[:, 1].copy(), y=obs[:, 2].copy(),
        tau1=obs[:, 3].copy(), w=winding, final=theta, steps_run=int(steps_run),
        frames=frames if params.keep_frames else None, snapshots=snapshots,
    )


def derive_seed(base_seed: int, *key: int) -> int:
    """Stable 64-bit seed for a (base seed, key...) tuple."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def run_conditioned(params: SimulationParams, target_w: int, burn_in: int, max_attempts: int = 100):
    """Rerun with derived seeds until the winding number after ``burn_in`` steps equals ``target_w``.

    Returns ``(series, attempt)``.
    """
    if params.topology is not Kind.RING:
        raise UsageError("conditioning on the winding number needs the ring")
    if not 0 <= burn_in <= params.steps:
        raise UsageError("burn_in must lie in [0, steps]")
    for attempt in range(max_attempts):
        trial = replace(params, seed=derive_seed(params.seed, attempt))
        probe = run_simulation(replace(trial, steps=burn_in, record_stride=max(burn_in, 1),
                                       snapshot_times=(), keep_frames=False, stop_r=None))
        if probe.w[-1] == target_w:
            return run_simulation(trial), attempt
    raise RuntimeError(f"no run reached winding {target_w} within {max_attempts} attempts")


@dataclass(frozen=True)
class LateTimeSummary:
    mean_r: float
    mean_abs_y: float
    mean_abs_tau1: float
    records: int


def late_time_average(ts: TimeSeries, fraction: float = DEFAULT_FRACTION) -> LateTimeSummary:
    """Means of R, |Y| and |tau1| over the final ``fraction`` of the records."""
    if not 0.0 < fraction <= 1.0:
        raise UsageError("fraction must lie in (0, 1]")
    k = math.ceil(fraction * len(ts))
    if k < 2:
        raise UsageError(f"late-time window holds {k} record(s); need at least 2")
    return LateTimeSummary(
        float(np.mean(ts.r[-k:])), float(np.mean(np.abs(ts.y[-k:]))),
        float(np.mean(np.abs(ts.tau1[-k:]))), k,
    )


def count_flips(y, window: int = FLIP_WINDOW, band: float = FLIP_BAND) -> int:
    """Sign changes of the smoothed Y series between plateaus with |Y| > band.

    The series is smoothed by a ``window``-record moving average; the state
    only changes when the smoothed value leaves the band on the other side.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size < window:
        return 0
    smooth = np.convolve(y, np.ones(window) / window, mode="valid")
    state = 0
    flips = 0
    for v in smooth:
        new = 1 if v > band else -1 if v < -band else state
        if state and new != state:
            flips += 1
        state = new
    return flips


@dataclass(frozen=True)
class Cell:
    topology: Kind
    epsilon: float
    k_mid: int
    k_noise: int

    def key(self) -> tuple[int, ...]:
        (bits,) = struct.unpack("<Q", struct.pack("<d", float(self.epsilon)))
        return (0 if self.topology is Kind.PATH else 1, bits, self.k_mid, self.k_noise)


@dataclass(frozen=True)
class SweepGrid:
    k_mid: tuple[int, ...]
    k_noise: tuple[int, ...]
    epsilon: tuple[float, ...]
    topology: tuple[Kind, ...]

    def __post_init__(self):
        object.__setattr__(self, "topology", tuple(Kind.parse(k) for k in self.topology))
        if not all((self.k_mid, self.k_noise, self.epsilon, self.topology)):
            raise UsageError("every sweep axis needs at least one value")

    def cells(self) -> list[Cell]:
        return [Cell(topo, eps, km, kn) for topo in self.topology for eps in self.epsilon
                for km in self.k_mid for kn in self.k_noise]


DEFAULT_GRID = SweepGrid((1, 10, 20, 40), (0, 1, 10, 20, 40), (0.002, 0.02), (Kind.PATH, Kind.RING))


@dataclass(frozen=True)
class CellResult:
    cell: Cell
    replicates: int
    mean_r: float = math.nan
    se_r: float | None = None
    mean_abs_y: float = math.nan
    se_abs_y: float | None = None
    mean_abs_tau1: float = math.nan
    se_abs_tau1: float | None = None
    error: str | None = None


@dataclass
class SweepResult:
    grid: SweepGrid
    replicates: int
    cells: dict[Cell, CellResult]

    @property
    def failed(self) -> list[CellResult]:
        return [c for c in self.cells.values() if c.error is not None]


def _mean_se(values: list[float]) -> tuple[float, float | None]:
    arr = np.asarray(values)
    if arr.size < 2:
        return float(arr.mean()), None
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def _cell_params(base: SimulationParams, cell: Cell, replicate: int) -> SimulationParams:
    return replace(base, topology=cell.topology, epsilon=cell.epsilon, k_mid=cell.k_mid,
                   k_noise=cell.k_noise, seed=derive_seed(base.seed, *cell.key(), replicate),
                   snapshot_times=(), keep_frames=False, stop_r=None)


def _replicate(args) -> tuple[float, float, float]:
    params, fraction = args
    s = late_time_average(run_simulation(params), fraction)
    return s.mean_r, s.mean_abs_y, s.mean_abs_tau1


def sweep(grid: SweepGrid, replicates: int = DEFAULT_REPLICATES, base: SimulationParams | None = None,
          workers: int = 1, fraction: float = DEFAULT_FRACTION) -> SweepResult:
    """Late-time means and standard errors of R, |Y|, |tau1| for every grid cell.

    Replicate seeds are derived from (base seed, cell values, replicate index),
    so results do not depend on grid order, worker count or scheduling.
    Invalid cells are reported in their result and do not stop the others.
    """
    if replicates < 1:
        raise UsageError("replicates must be at least 1")
    base = base or SimulationParams()
    cells = grid.cells()
    results: dict[Cell, CellResult] = {}
    tasks = []
    for cell in cells:
        try:
            _cell_params(base, cell, 0).validate()
        except UsageError as exc:
            results[cell] = CellResult(cell, replicates, error=str(exc))
            continue
        tasks.extend((cell, (_cell_params(base, cell, r), fraction)) for r in range(replicates))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_replicate, [a for _, a in tasks], chunksize=1))
    else:
        outs = [_replicate(a) for _, a in tasks]

    per_cell: dict[Cell, list[tuple[float, float, float]]] = {}
    for (cell, _), out in zip(tasks, outs):
        per_cell.setdefault(cell, []).append(out)
    for cell, rows in per_cell.items():
        r, y, tau = zip(*rows)
        mr, sr = _mean_se(list(r))
        my, sy = _mean_se(list(y))
        mt, st = _mean_se(list(tau))
        results[cell] = CellResult(cell, replicates, mr, sr, my, sy, mt, st)
        log.debug("cell %s done", cell)
    return SweepResult(grid, replicates, {c: results[c] for c in cells})

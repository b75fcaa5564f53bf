"""Execute an experiment: one simulated frame per (sweep value, seed).

Each planned run simulates one frame and passes it through every configured
equalizer mode, yielding one result row per mode. Runs are independent, so
they can be spread over worker processes. Rows always come back in plan
order.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..metrics import BerResult, RunLengthHistogram, welch_spectrum
from ..signal import Waveform
from .config import apply_override
from .pipeline import equalize, front_end, simulate_link

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlannedRun:
    index: int
    sweep_value: object
    seed: int


@dataclass(frozen=True)
class RunResult:
    """One row of the results table: a (sweep value, seed, mode) triple."""

    run_index: int
    sweep_value: object
    seed: int
    mode: str
    status: str
    error: str = ""
    eq: BerResult = None
    mlse: BerResult = None
    eq_runs: RunLengthHistogram = field(default_factory=RunLengthHistogram)
    mlse_runs: RunLengthHistogram = field(default_factory=RunLengthHistogram)
    mlse_memory: int = 0
    pf_alpha: float = float("nan")
    runtime_s: float = 0.0

    @property
    def ok(self):
        return self.status == "ok"


@dataclass(frozen=True)
class SpectrumResult:
    run_index: int
    stage: str
    mode: str
    freqs: np.ndarray
    power_db: np.ndarray


@dataclass
class ResultTable:
    """Rows of an experiment plus the config that produced them."""

    config: object
    rows: list = field(default_factory=list)
    spectra: list = field(default_factory=list)

    @property
    def failed(self):
        return [r for r in self.rows if not r.ok]


def plan_runs(cfg):
    """All (sweep value, seed) pairs, sweep-major, in deterministic order."""
    values = cfg.sweep.values if cfg.sweep.axis else (None,)
    runs = []
    for v in values:
        for s in cfg.seeds:
            runs.append(PlannedRun(len(runs), v, s))
    return runs


def run_config(cfg, planned):
    """Config of a single planned run, with the sweep value applied."""
    if cfg.sweep.axis:
        return apply_override(cfg, cfg.sweep.axis, planned.sweep_value)
    return cfg


def _spectrum(x, cfg, run_index, stage, mode):
    seg = min(cfg.spectrum.segment, x.size)
    w = Waveform(np.asarray(x, dtype=np.float64), cfg.link.symbol_rate)
    f, db, _ = welch_spectrum(w, segment=seg, overlap=cfg.spectrum.overlap)
    return SpectrumResult(run_index, stage, mode, f, db)


def execute_run(cfg, planned):
    """Simulate one frame and equalize it with every mode.

    Failures are caught and reported as rows with ``status = "failed"``; a
    failure before equalization fails the rows of every mode.

    Returns
    -------
    (list of RunResult, list of SpectrumResult)
    """
    t0 = time.perf_counter()
    rows, spectra = [], []
    stages = cfg.spectrum.stages

    def failed(mode, exc):
        logger.error("run %d (sweep=%r, seed=%d, mode=%s) failed: %s",
                     planned.index, planned.sweep_value, planned.seed, mode, exc)
        return RunResult(planned.index, planned.sweep_value, planned.seed, mode, "failed",
                         error=f"{type(exc).__name__}: {exc}",
                         runtime_s=time.perf_counter() - t0)

    try:
        rc = run_config(cfg, planned)
        received = simulate_link(rc.channel, rc.frame, rc.link, planned.seed)
        x = front_end(received, rc.equalizer, rc.frame)
    except Exception as exc:  # noqa: BLE001 - a run failure must not abort the sweep
        return [failed(m, exc) for m in cfg.modes], spectra
    if "received" in stages:
        spectra.append(_spectrum(received.samples, rc, planned.index, "received", ""))
    if "pnle" in stages:
        spectra.append(_spectrum(x, rc, planned.index, "pnle", ""))
    for mode in cfg.modes:
        t_mode = time.perf_counter()
        try:
            out = equalize(x, received.symbols, rc.equalizer, rc.frame, mode)
        except Exception as exc:  # noqa: BLE001
            rows.append(failed(mode, exc))
            continue
        if mode in stages:
            spectra.append(_spectrum(out.soft, rc, planned.index, mode, mode))
        if "mlse" in stages:
            spectra.append(_spectrum(out.mlse_input, rc, planned.index, "mlse", mode))
        rows.append(RunResult(
            planned.index, planned.sweep_value, planned.seed, mode, "ok",
            eq=out.eq_errors, mlse=out.mlse_errors, eq_runs=out.eq_runs,
            mlse_runs=out.mlse_runs, mlse_memory=rc.equalizer.mlse_memory,
            pf_alpha=out.pf_alpha, runtime_s=time.perf_counter() - t_mode))
    return rows, spectra


def _execute(args):
    return execute_run(*args)


def run_experiment(cfg, workers=None):
    """Run every planned (sweep value, seed) pair of ``cfg``.

    Parameters
    ----------
    cfg : ExperimentConfig
    workers : int, optional
        Process count; defaults to ``cfg.workers``. With one worker the runs
        execute in the calling process.

    Returns
    -------
    ResultTable
    """
    plan = plan_runs(cfg)
    n_workers = cfg.workers if workers is None else int(workers)
    logger.info("%s: %d planned runs, %d mode(s), %d worker(s)",
                cfg.name, len(plan), len(cfg.modes), n_workers)
    tasks = [(cfg, p) for p in plan]
    if n_workers <= 1 or len(plan) <= 1:
        outputs = [_execute(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            # map preserves submission order whatever the completion order
            outputs = list(pool.map(_execute, tasks))
    table = ResultTable(cfg)
    for rows, spectra in outputs:
        table.rows.extend(rows)
        table.spectra.extend(spectra)
    return table

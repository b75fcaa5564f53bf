"""Write a :class:`ResultTable` to disk.

Layout of an output directory::

    results.csv            one row per (sweep value, seed, mode)
    histograms/run_NNNN_<mode>.csv
    spectra.csv            only when spectrum stages were requested
    timings.csv            wall-clock runtime per row
    manifest.toml          resolved config, loadable by load_config

Everything except ``timings.csv`` is a pure function of the config.
"""

import csv
import math
from pathlib import Path

from .config import dumps_config

RESULT_COLUMNS = (
    "run_index",
    "sweep_axis",
    "sweep_value",
    "seed",
    "mode",
    "status",
    "bits_compared",
    "bit_errors_eq",
    "ber_eq",
    "q_db_eq",
    "max_run_eq",
    "single_error_fraction_eq",
    "bit_errors_mlse",
    "ber_mlse",
    "q_db_mlse",
    "max_run_mlse",
    "single_error_fraction_mlse",
    "mlse_memory",
    "pf_alpha",
    "histogram_file",
    "error",
)
HISTOGRAM_COLUMNS = ("stage", "run_length", "count", "pdf", "cdf")
SPECTRUM_COLUMNS = ("run_index", "stage", "mode", "frequency_hz", "power_db")
TIMING_COLUMNS = ("run_index", "mode", "runtime_s")


def fmt(x):
    """Stable text form of a CSV cell; floats keep 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    if hasattr(x, "item"):
        return fmt(x.item())
    return str(x)


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def histogram_name(row):
    return f"histograms/run_{row.run_index:04d}_{row.mode}.csv"


def result_record(row, axis):
    """Mapping from :data:`RESULT_COLUMNS` to the cell values of one row."""
    rec = dict.fromkeys(RESULT_COLUMNS, "")
    rec.update(run_index=row.run_index, sweep_axis=axis, sweep_value=row.sweep_value,
               seed=row.seed, mode=row.mode, status=row.status, error=row.error)
    if row.ok:
        rec.update(
            bits_compared=row.eq.bits_compared,
            bit_errors_eq=row.eq.bit_errors, ber_eq=row.eq.ber, q_db_eq=row.eq.q_db,
            max_run_eq=row.eq_runs.max_length,
            single_error_fraction_eq=row.eq_runs.fraction(1),
            bit_errors_mlse=row.mlse.bit_errors, ber_mlse=row.mlse.ber,
            q_db_mlse=row.mlse.q_db, max_run_mlse=row.mlse_runs.max_length,
            single_error_fraction_mlse=row.mlse_runs.fraction(1),
            mlse_memory=row.mlse_memory, pf_alpha=row.pf_alpha,
            histogram_file=histogram_name(row),
        )
    return rec


def _write_histogram(path, row):
    fh, w = _writer(path)
    with fh:
        w.writerow(HISTOGRAM_COLUMNS)
        for stage, hist in (("eq", row.eq_runs), ("mlse", row.mlse_runs)):
            pdf, cdf = hist.pdf(), hist.cdf()
            for k in sorted(hist.counts):
                w.writerow([stage, k, hist.counts[k], fmt(pdf[k]), fmt(cdf[k])])


def emit_results(table, path):
    """Write results, histograms, spectra, timings and the manifest under ``path``.

    Returns
    -------
    dict
        Maps ``"results"``, ``"manifest"``, ``"timings"`` and, when present,
        ``"spectra"`` to the written paths.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    cfg = table.config
    axis = cfg.sweep.axis
    written = {}

    fh, w = _writer(out / "results.csv")
    with fh:
        w.writerow(RESULT_COLUMNS)
        for row in table.rows:
            rec = result_record(row, axis)
            w.writerow([fmt(rec[c]) for c in RESULT_COLUMNS])
    written["results"] = out / "results.csv"

    ok_rows = [r for r in table.rows if r.ok]
    if ok_rows:
        (out / "histograms").mkdir(exist_ok=True)
    for row in ok_rows:
        _write_histogram(out / histogram_name(row), row)

    if table.spectra:
        fh, w = _writer(out / "spectra.csv")
        with fh:
            w.writerow(SPECTRUM_COLUMNS)
            for sp in table.spectra:
                for f, p in zip(sp.freqs, sp.power_db):
                    w.writerow([sp.run_index, sp.stage, sp.mode, fmt(float(f)), fmt(float(p))])
        written["spectra"] = out / "spectra.csv"

    fh, w = _writer(out / "timings.csv")
    with fh:
        w.writerow(TIMING_COLUMNS)
        for row in table.rows:
            w.writerow([row.run_index, row.mode, f"{row.runtime_s:.6f}"])
    written["timings"] = out / "timings.csv"

    (out / "manifest.toml").write_text(dumps_config(cfg), encoding="utf-8")
    written["manifest"] = out / "manifest.toml"
    return written

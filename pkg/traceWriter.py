# traceWriter.py
"""Artifact writer for simulation runs: CSV trace, design report, error
plot, resolved scenario and DoS signal."""

import os
import csv
import logging
from dataclasses import replace
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from quantrack.analysis import DesignReport
from quantrack.quantizers import encode_codewords
from quantrack.sim import SimTrace

logger = logging.getLogger('TraceWriter')

TRACE_FILE = "trace.csv"
REPORT_FILE = "report.txt"
PLOT_FILE = "errors.svg"
SCENARIO_FILE = "scenario.json5"
DOS_FILE = "dos.txt"


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _cw(codewords) -> str:
    raw = encode_codewords(codewords)
    return ":".join(raw[i:i + 8].hex() for i in range(0, len(raw), 8))


def trace_header(trace: SimTrace) -> List[str]:
    N = trace.errors.shape[1]
    n_v = trace.v.shape[1]
    header = ["k", "t", "jam"]
    header += [f"err_{i + 1}" for i in range(N)]
    header += ["theta", "omega_inf", "max_q_arg"]
    header += [f"sat_{i + 1}" for i in range(N)]
    header += [f"v_{c + 1}" for c in range(n_v)]
    for i, xi in enumerate(trace.x):
        header += [f"x_{i + 1}_{c + 1}" for c in range(xi.shape[1])]
    header += [f"zbar_{i + 1}_{c + 1}" for i in range(N) for c in range(n_v)]
    header += [f"zhat_{i + 1}_{c + 1}" for i in range(N) for c in range(n_v)]
    header += [f"vhat_{c + 1}" for c in range(n_v)]
    header += [f"omega_{c + 1}" for c in range(n_v)]
    header += [f"fcw_{i + 1}" for i in range(N)]
    header += ["lcw"]
    return header


def trace_rows(trace: SimTrace) -> Iterator[List[str]]:
    """Rows of the CSV trace as strings; floats keep full double precision"""
    N = trace.errors.shape[1]
    for k in range(len(trace.t)):
        row = [str(k), _f(trace.t[k]), str(int(trace.jam[k]))]
        row += [_f(e) for e in trace.errors[k]]
        row += [_f(trace.theta[k]), _f(np.max(np.abs(trace.omega[k]))),
                _f(np.max(np.abs(trace.q_args[k])))]
        row += [str(int(s)) for s in trace.saturated[k]]
        row += [_f(x) for x in trace.v[k]]
        for xi in trace.x:
            row += [_f(x) for x in xi[k]]
        row += [_f(x) for x in trace.z_bar[k].reshape(-1)]
        row += [_f(x) for x in trace.z_hat[k].reshape(-1)]
        row += [_f(x) for x in trace.v_hat[k]]
        row += [_f(x) for x in trace.omega[k]]
        row += [_cw(trace.follower_codewords[k, i]) for i in range(N)]
        row += [_cw(trace.leader_codewords[k])]
        yield row


class TraceWriter:
    """Writes the artifacts of one run into a run directory"""

    def __init__(self, no_plots: bool = False):
        self.no_plots = no_plots
        self.logger = logging.getLogger('TraceWriter')

    def write_trace(self, trace: SimTrace, path: str) -> str:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(trace_header(trace))
            for row in trace_rows(trace):
                writer.writerow(row)
        return path

    def write_report(self, report: DesignReport, path: str) -> str:
        with open(path, "w") as f:
            f.write(report.to_text())
        return path

    def plot_errors(self, trace: SimTrace, path: str, title: Optional[str] = None) -> str:
        """Tracking errors on a log axis with jammed steps shaded"""
        fig, ax = plt.subplots(figsize=(8, 4))
        for i in range(trace.errors.shape[1]):
            ax.semilogy(trace.t, np.maximum(trace.errors[:, i], 1e-300), lw=1.0, label=f"agent {i + 1}")
        half = 0.5 * (trace.t[1] - trace.t[0]) if len(trace.t) > 1 else 0.05
        for start, stop in _runs(trace.jam):
            ax.axvspan(trace.t[start] - half, trace.t[stop] + half, color="tab:red", alpha=0.15, lw=0)
        ax.set_xlabel("time [s]")
        ax.set_ylabel("|y_i - v|")
        ax.set_title(title or f"tracking errors ({trace.verdict.value})")
        ax.legend(loc="upper right", fontsize="small")
        ax.grid(True, which="both", alpha=0.3)
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
        return path

    def write_scenario(self, trace: SimTrace, run_dir: str) -> Dict[str, str]:
        """Write the DoS signal and a config that replays this exact run"""
        scenario = trace.scenario
        config = scenario.config
        dos_path = os.path.join(run_dir, DOS_FILE)
        scenario.dos.save(dos_path)
        resolved = replace(config, dos=replace(config.dos, signal_file=DOS_FILE, target=None))
        scenario_path = os.path.join(run_dir, SCENARIO_FILE)
        with open(scenario_path, "w") as f:
            f.write(resolved.dumps())
        return {"scenario": scenario_path, "dos": dos_path}

    def write_run(self, trace: SimTrace, report: DesignReport, run_dir: str) -> Dict[str, str]:
        """Write every artifact of a run; returns their paths by kind"""
        os.makedirs(run_dir, exist_ok=True)
        paths = {
            "trace": self.write_trace(trace, os.path.join(run_dir, TRACE_FILE)),
            "report": self.write_report(report, os.path.join(run_dir, REPORT_FILE)),
        }
        paths.update(self.write_scenario(trace, run_dir))
        if not self.no_plots:
            paths["plot"] = self.plot_errors(trace, os.path.join(run_dir, PLOT_FILE),
                                             title=trace.scenario.config.name)
        self.logger.info(f"Wrote run artifacts to {run_dir}")
        return paths

    def write_sweep(self, rows: Sequence[Dict[str, str]], path: str, columns: Sequence[str]) -> str:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(columns))
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        return path


def _runs(flags: np.ndarray):
    """(first, last) index pairs of consecutive True runs"""
    idx = np.flatnonzero(flags)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    stops = np.concatenate([idx[breaks], [idx[-1]]])
    return list(zip(starts, stops))


def read_trace(path: str) -> List[List[str]]:
    """Header row followed by data rows, as written"""
    with open(path, newline="") as f:
        return [row for row in csv.reader(f)]

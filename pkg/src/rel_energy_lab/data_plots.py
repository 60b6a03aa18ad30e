#%% Relevant packages

import io
import json
import logging
import re
from typing import Any, Dict, Iterable, Mapping, Tuple

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

#%% Custom packages

from .diagnostics import GronwallReport
from .fv_solver import Trajectory

logger = logging.getLogger(__name__)

#%% Constants

FLOAT_FORMAT = '%.17g'
GRONWALL_COLUMNS = ['tau', 'lhs', 'rhs', 'residual', 'c1_norm']
_TRAILER = re.compile(r'(\w+)=(\S+)')

#%% CSV reports

def write_table(rows: Iterable[Mapping[str, Any]], filepath: str) -> str:
    ''' One CSV row per mapping, columns in first-seen order '''
    pd.DataFrame(list(rows)).to_csv(filepath, index=False, float_format=FLOAT_FORMAT)
    return filepath


def write_gronwall_csv(report: GronwallReport, filepath: str) -> str:
    '''
    Gronwall report with the columns tau,lhs,rhs,residual,c1_norm.

    Parameters
    ----------
    report : GronwallReport
        Evaluated inequality.
    filepath : str
        Target file.

    Returns
    -------
    str
        filepath.

    '''
    df = pd.DataFrame({
        'tau': report.times,
        'lhs': report.lhs,
        'rhs': report.rhs,
        'residual': report.residual,
        'c1_norm': report.c1_norm_trace,
    }, columns=GRONWALL_COLUMNS)
    df.to_csv(filepath, index=False, float_format=FLOAT_FORMAT)
    return filepath


def write_speed_csv(
        times: np.ndarray,
        radii: np.ndarray,
        speed: float,
        intercept: float,
        c_bound: float,
        filepath: str) -> str:
    ''' Columns t,radius followed by the trailer line speed=<s> intercept=<b> c_bound=<C> '''
    buffer = io.StringIO()
    pd.DataFrame({'t': times, 'radius': radii}).to_csv(buffer, index=False, float_format=FLOAT_FORMAT)
    buffer.write(f"speed={speed!r} intercept={intercept!r} c_bound={c_bound!r}\n")
    with open(filepath, 'w', encoding='utf-8', newline='') as handle:
        handle.write(buffer.getvalue())
    return filepath


def read_speed_csv(filepath: str) -> Tuple[pd.DataFrame, Dict[str, float]]:
    ''' Inverse of write_speed_csv: the t,radius table and the trailer values '''
    with open(filepath, 'r', encoding='utf-8') as handle:
        lines = [line for line in handle.read().splitlines() if line.strip()]
    if not lines or not lines[-1].startswith('speed='):
        raise ValueError(f"'{filepath}' has no speed trailer.")
    trailer = {key: float(value) for key, value in _TRAILER.findall(lines[-1])}
    df = pd.read_csv(io.StringIO('\n'.join(lines[:-1])), float_precision='round_trip')
    return df, trailer


def write_summary(summary: Mapping[str, Any], filepath: str) -> str:
    with open(filepath, 'w', encoding='utf-8') as handle:
        json.dump(_jsonable(summary), handle, indent=2)
        handle.write('\n')
    return filepath


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # json has no inf or nan
        return value if np.isfinite(value) else str(value)
    return value

#%% Plots

def _save(fig: Figure, filepath: str) -> str:
    fig.tight_layout()
    fig.savefig(filepath, dpi=120)
    logger.debug(f"Saved figure {filepath}.")
    return filepath


def plot_gronwall(report: GronwallReport, filepath: str, title: str = '') -> str:
    ''' Both sides of the Gronwall inequality over tau '''
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    ax.plot(report.times, report.lhs, 'o-', label='lhs  E(tau)')
    ax.plot(report.times, report.rhs, 's--', label='rhs')
    ax.set_xlabel('tau')
    ax.set_ylabel('localized relative energy')
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, filepath)


def plot_support(times: np.ndarray, radii: np.ndarray, speed: float, intercept: float, c_bound: float,
                 filepath: str) -> str:
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    ax.plot(times, radii, 'o', label='support radius')
    ax.plot(times, intercept + speed * np.asarray(times), '-', label=f'fit, speed {speed:.4g}')
    ax.plot(times, radii[0] + c_bound * (np.asarray(times) - times[0]), ':', label=f'bound, C {c_bound:.4g}')
    ax.set_xlabel('t')
    ax.set_ylabel('radius')
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, filepath)


def plot_profiles(traj: Trajectory, filepath: str, max_curves: int = 6) -> str:
    ''' Density and velocity of up to max_curves evenly spread snapshots '''
    fig = Figure(figsize=(8, 6))
    ax_rho, ax_vel = fig.subplots(2, 1, sharex=True)
    x = traj.grid.centers
    picks = np.unique(np.linspace(0, len(traj) - 1, min(max_curves, len(traj))).astype(int))
    for k in picks:
        f = traj[k]
        ax_rho.plot(x, f.rho, label=f't={f.time:.3g}')
        ax_vel.plot(x, f.velocity(traj.config.vacuum_eps))
    ax_rho.set_ylabel('rho')
    ax_vel.set_ylabel('u')
    ax_vel.set_xlabel('x')
    ax_rho.legend(fontsize='small')
    return _save(fig, filepath)


def plot_series(x: np.ndarray, ys: Dict[str, np.ndarray], filepath: str, xlabel: str, ylabel: str,
                log: bool = False) -> str:
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    for label, y in ys.items():
        ax.plot(x, y, 'o-', label=label)
    if log:
        ax.set_xscale('log')
        ax.set_yscale('log')
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, filepath)

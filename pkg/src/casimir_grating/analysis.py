"""Reduction of measured pressure curves and comparison with theory.

Pressures are stored in Pa and distances in nm; the CSV readers and writers
convert from and to mPa.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

CSV_FIELDS = ("d_nm", "pressure_mPa", "random_err_mPa", "systematic_err_mPa")
RATIO_FIELDS = ("ratio", "ratio_err")


@dataclass(frozen=True)
class MeasuredCurve:
    """Pressure-distance data with separate error channels.

    ``distance_error`` defaults to zeros; all error arrays must be >= 0 and
    ``d`` strictly increasing.
    """

    d: np.ndarray
    pressure: np.ndarray
    random_error: np.ndarray
    systematic_error: np.ndarray
    distance_error: np.ndarray = field(default=None)

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        n = d.shape[0] if d.ndim == 1 else -1
        object.__setattr__(self, "d", d)
        for name in ("pressure", "random_error", "systematic_error", "distance_error"):
            val = getattr(self, name)
            arr = np.zeros_like(d) if val is None else np.asarray(val, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have the same length as d")
            object.__setattr__(self, name, arr)
        if n > 1 and np.any(np.diff(d) <= 0):
            raise ValueError("distances must be strictly increasing")
        for name in ("random_error", "systematic_error", "distance_error"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be non-negative")

    def __len__(self):
        return self.d.shape[0]

    def shifted(self, offset: float) -> "MeasuredCurve":
        """Same data with a constant added to every distance (nm)."""
        return replace(self, d=self.d + offset)


@dataclass(frozen=True)
class BinSchedule:
    """Window length as a function of distance.

    ``n_short`` points below ``d_breakpoint``, growing linearly to ``n_long``
    at ``d_max`` and constant beyond; fractional values round half up.
    """

    n_short: int = 10
    n_long: int = 35
    d_breakpoint: float = 300.0
    d_max: float = 1000.0

    def __post_init__(self):
        if not 1 <= self.n_short <= self.n_long:
            raise ValueError("need 1 <= n_short <= n_long")
        if not self.d_breakpoint < self.d_max:
            raise ValueError("need d_breakpoint < d_max")

    def n_at(self, d: float) -> int:
        if d < self.d_breakpoint:
            return self.n_short
        if d >= self.d_max:
            return self.n_long
        t = (d - self.d_breakpoint) / (self.d_max - self.d_breakpoint)
        return int(math.floor(self.n_short + t * (self.n_long - self.n_short) + 0.5))

    @classmethod
    def constant(cls, n: int) -> "BinSchedule":
        return cls(n, n, 0.0, 1.0)


def weighted_mean(values, errors):
    """Inverse-variance mean and its error, [sum delta^-2]^(-1/2)."""
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        raise ValueError("zero random error in window (infinite weight)")
    w = errors**-2.0
    return float(np.sum(w * np.asarray(values, dtype=float)) / np.sum(w)), float(np.sum(w) ** -0.5)


def rolling_weighted_average(curve: MeasuredCurve, sched: BinSchedule = BinSchedule()) -> MeasuredCurve:
    """Inverse-variance rolling average, windows advancing one point at a time.

    The window starting at point i holds ``sched.n_at(d_i)`` consecutive
    points; windows that would run past the last point are dropped. The output
    distance is the window mean, its distance error the standard deviation of
    the window distances, and its systematic error the window mean of the
    systematic channel (fully correlated, so not reduced by averaging).
    """
    rows = []
    size = len(curve)
    for i in range(size):
        n = sched.n_at(curve.d[i])
        if i + n > size:
            break
        sl = slice(i, i + n)
        if np.any(curve.random_error[sl] == 0):
            raise ValueError(f"window starting at d = {curve.d[i]} nm contains a zero random error")
        p, err = weighted_mean(curve.pressure[sl], curve.random_error[sl])
        dd = curve.d[sl]
        rows.append((dd.mean(), p, err, curve.systematic_error[sl].mean(), dd.std()))
    if not rows:
        raise ValueError("not enough points for a single window")
    # n(d) is non-decreasing, so window means are strictly increasing
    return MeasuredCurve(*np.array(rows).T)


def combine_errors(random, systematic, mode: str = "linear"):
    """Total error: plain sum (default) or quadrature sum of the two channels."""
    random = np.asarray(random, dtype=float)
    systematic = np.asarray(systematic, dtype=float)
    if np.any(random < 0) or np.any(systematic < 0):
        raise ValueError("errors must be non-negative")
    if mode == "linear":
        out = random + systematic
    elif mode == "quadrature":
        out = np.hypot(random, systematic)
    else:
        raise ValueError(f"unknown error mode {mode!r}")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RatioCurve:
    d: np.ndarray
    ratio: np.ndarray
    ratio_err: np.ndarray
    source: MeasuredCurve


def normalize_by_pfa(curve: MeasuredCurve, g=None, m=None, env=None, *, pfa_values=None,
                     error_mode: str = "linear") -> RatioCurve:
    """Pointwise P / P_PFA(d) with the total relative error carried over.

    ``pfa_values`` (Pa, one per point) skip the PFA evaluation; otherwise
    they are computed from the geometry, material and environment.
    """
    if pfa_values is None:
        from .materials import Environment, MaterialModel
        from .modal import GratingGeometry
        from .pfa import pfa_pressure

        g = g or GratingGeometry()
        m = m or MaterialModel()
        env = env or Environment()
        pfa_values = [pfa_pressure(float(d), g, m, env) for d in curve.d]
    pfa_values = np.asarray(pfa_values, dtype=float)
    ratio = curve.pressure / pfa_values
    total = combine_errors(curve.random_error, curve.systematic_error, error_mode)
    return RatioCurve(curve.d.copy(), ratio, np.abs(total / pfa_values), curve)


def scaling_transform(curve: MeasuredCurve, p_from: float, p_to: float) -> MeasuredCurve:
    """Map a curve measured on period ``p_from`` onto a similar grating of period ``p_to``.

    All lengths stretch by s = p_to/p_from and pressures scale by s^-4, so a
    d^-n law picks up the factor (p_from/p_to)^(4-n) at equal distance.
    """
    if not (p_from > 0 and p_to > 0):
        raise ValueError("periods must be positive")
    s = p_to / p_from
    f = s**-4.0
    return MeasuredCurve(curve.d * s, curve.pressure * f, curve.random_error * f,
                         curve.systematic_error * f, curve.distance_error * s)


def local_power_law(curve: MeasuredCurve, window: int = 5):
    """Exponent n of |P| ~ d^-n from log-log regression over rolling windows.

    Returns (d_center, n) with d_center the geometric mean of each window.
    """
    if window < 3:
        raise ValueError("window must hold at least 3 points")
    if len(curve) < window:
        raise ValueError("curve shorter than the window")
    if np.any(curve.pressure == 0) or np.any(curve.d <= 0):
        raise ValueError("power law needs non-zero pressures and positive distances")
    x = np.log(curve.d)
    y = np.log(np.abs(curve.pressure))
    centres, exps = [], []
    for i in range(len(curve) - window + 1):
        xs, ys = x[i:i + window], y[i:i + window]
        if np.ptp(xs) == 0:
            raise ValueError("degenerate window (no distance spread)")
        slope = np.polyfit(xs, ys, 1)[0]
        centres.append(math.exp(xs.mean()))
        exps.append(-slope)
    return np.array(centres), np.array(exps)


def read_curve_csv(path, distance_offset: float = 0.0) -> MeasuredCurve:
    """Read ``d_nm,pressure_mPa,random_err_mPa,systematic_err_mPa`` (header required)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header[:4]) != CSV_FIELDS:
            raise ValueError(f"{path}: expected header {','.join(CSV_FIELDS)}")
        rows = [[float(v) for v in row[:4]] for row in reader if row and row[0].strip()]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    a = np.array(rows)
    return MeasuredCurve(a[:, 0] + distance_offset, a[:, 1] * 1e-3, a[:, 2] * 1e-3, a[:, 3] * 1e-3)


def curve_rows(curve: MeasuredCurve, ratio: RatioCurve | None = None):
    """Rows (dicts keyed by the CSV schema) for writing; pressures in mPa."""
    rows = []
    for i in range(len(curve)):
        row = {"d_nm": curve.d[i], "pressure_mPa": curve.pressure[i] * 1e3,
               "random_err_mPa": curve.random_error[i] * 1e3,
               "systematic_err_mPa": curve.systematic_error[i] * 1e3}
        if ratio is not None:
            row["ratio"] = ratio.ratio[i]
            row["ratio_err"] = ratio.ratio_err[i]
        rows.append(row)
    return rows

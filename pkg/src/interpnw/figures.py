"""Curve tables for the one-dimensional interpolation figures."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from interpnw import svg
from interpnw.datagen import make_scenario, sample_dataset
from interpnw.errors import DataFormatError, InputError, UnsupportedDimension
from interpnw.estimator import Dataset, fit, predict_many
from interpnw.kernels import KernelSpec

# figure id -> (kernel name, binary labels?)
FIGURES = {
    "interp-singular": ("singular-indicator", False),
    "interp-truncpoly": ("singular-truncpoly", False),
    "epanechnikov": ("epanechnikov", False),
    "gaussian": ("gaussian", False),
    "binary-truncpoly": ("singular-truncpoly", True),
    "binary-gaussian": ("gaussian", True),
}
DEFAULT_A = 0.49
COMPACT_H = (0.05, 0.1, 0.2)
GAUSSIAN_H = (0.02, 0.05, 0.1)


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    kernel: KernelSpec
    h_list: tuple[float, ...]
    n: int = 20
    seed: int = 1
    grid_resolution: int = 512

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise InputError(f"unknown figure {self.figure_id!r}; expected one of {', '.join(FIGURES)}")
        hs = tuple(float(h) for h in self.h_list)
        if not hs or not all(h > 0 and np.isfinite(h) for h in hs):
            raise InputError("h_list must be a non-empty list of positive bandwidths")
        object.__setattr__(self, "h_list", hs)
        if self.n < 1 or self.grid_resolution < 2:
            raise InputError("need n >= 1 and grid_resolution >= 2")

    @property
    def binary(self) -> bool:
        return FIGURES[self.figure_id][1]

    @classmethod
    def default(cls, figure_id: str, a: float | None = None, h_list=None, **kw) -> "FigureSpec":
        if figure_id not in FIGURES:
            raise InputError(f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURES)}")
        name = FIGURES[figure_id][0]
        kernel = KernelSpec.from_name(name, DEFAULT_A if a is None else a)
        if h_list is None:
            h_list = GAUSSIAN_H if name == "gaussian" else COMPACT_H
        return cls(figure_id, kernel, tuple(h_list), **kw)


@dataclass(frozen=True, eq=False)
class CurveTable:
    """Long-form table: per bandwidth, f_n on the grid plus the data sites."""

    figure_id: str
    kernel: KernelSpec
    data: Dataset
    curves: dict[float, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    HEADER = ("kind", "h", "x", "value")

    def rows(self) -> Iterator[tuple[str, str, str, str]]:
        for h, (xs, fs) in self.curves.items():
            for x, f in zip(xs, fs):
                yield "curve", repr(h), repr(float(x)), repr(float(f))
        for x, y in zip(self.data.points[:, 0], self.data.responses):
            yield "data", "", repr(float(x)), repr(float(y))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.HEADER)
            w.writerows(self.rows())

    def to_svg(self) -> str:
        panels = [
            svg.Panel(f"{self.figure_id}: {self.kernel}, h={h:g}", xs, fs,
                      self.data.points[:, 0], self.data.responses)
            for h, (xs, fs) in self.curves.items()
        ]
        return svg.render(panels)


def read_curve_csv(path):
    """Parse a curve table back into ``({h: (x, f)}, (x_data, y_data))``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CurveTable.HEADER:
        raise DataFormatError("curve table header must be kind,h,x,value", row=1)
    curves: dict[float, tuple[list, list]] = {}
    dx, dy = [], []
    for i, row in enumerate(rows[1:], start=2):
        try:
            kind, h, x, v = row
            if kind == "curve":
                xs, fs = curves.setdefault(float(h), ([], []))
                xs.append(float(x))
                fs.append(float(v))
            elif kind == "data":
                dx.append(float(x))
                dy.append(float(v))
            else:
                raise ValueError(kind)
        except ValueError as exc:
            raise DataFormatError(f"bad curve row: {exc}", row=i) from None
    out = {h: (np.array(xs), np.array(fs)) for h, (xs, fs) in curves.items()}
    return out, (np.array(dx), np.array(dy))


def figure_dataset(spec: FigureSpec) -> Dataset:
    """Seeded 1-D data: noisy sine for regression, +-1 labels for binary figures."""
    if spec.binary:
        scenario = make_scenario("binary-sine", 1)
    else:
        scenario = make_scenario("smooth-sine", 1, {"sigma": 0.2})
    return sample_dataset(scenario, spec.n, spec.seed)


def emit_interpolation_curves(spec: FigureSpec, out_dir=None, write_svg: bool = False,
                              dataset: Dataset | None = None) -> CurveTable:
    """Fit one interpolator per bandwidth and tabulate it.

    Each curve is evaluated on ``grid_resolution`` equispaced points of
    [0, 1] together with the data locations, sorted by x.  With
    ``out_dir`` the table is written to ``figure_<id>.csv`` (and
    ``figure_<id>.svg`` when ``write_svg``).
    """
    data = figure_dataset(spec) if dataset is None else dataset
    if data.dim != 1:
        raise UnsupportedDimension(f"figures are one-dimensional, got d={data.dim}")
    xs = np.concatenate([np.linspace(0.0, 1.0, spec.grid_resolution), data.points[:, 0]])
    xs = xs[np.argsort(xs, kind="stable")]
    table = CurveTable(spec.figure_id, spec.kernel, data)
    for h in spec.h_list:
        model = fit(data, spec.kernel, h)
        table.curves[h] = (xs, predict_many(model, xs[:, None]).values)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table.write_csv(out / f"figure_{spec.figure_id}.csv")
        if write_svg:
            (out / f"figure_{spec.figure_id}.svg").write_text(table.to_svg(), encoding="utf-8")
    return table

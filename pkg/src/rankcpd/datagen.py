"""Synthetic piecewise-i.i.d. series and CSV/label file I/O."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError, ParseError


@dataclass(frozen=True)
class SegmentSpec:
    """One segment: ``length`` i.i.d. rows of ``N(mean, covariance_scale * I)`` or zeros."""

    length: int
    mean: tuple
    covariance_scale: float = 1.0
    kind: str = "gaussian"

    def __post_init__(self):
        if self.length < 1:
            raise InvalidArgumentError(f"segment length must be positive, got {self.length}")
        if self.covariance_scale < 0:
            raise InvalidArgumentError("covariance_scale must be non-negative")
        if self.kind not in ("gaussian", "zeros"):
            raise InvalidArgumentError(f"unknown segment kind {self.kind!r}")
        object.__setattr__(self, "mean", tuple(float(v) for v in np.ravel(self.mean)))

    @property
    def dim(self):
        return len(self.mean)

    @classmethod
    def zeros(cls, length, dim):
        return cls(length, (0.0,) * dim, 0.0, "zeros")

    @classmethod
    def from_dict(cls, d):
        return cls(
            length=int(d["length"]),
            mean=d["mean"],
            covariance_scale=float(d.get("covariance_scale", 1.0)),
            kind=d.get("kind", "gaussian"),
        )

    def as_dict(self):
        return {
            "length": self.length,
            "mean": list(self.mean),
            "covariance_scale": self.covariance_scale,
            "kind": self.kind,
        }


@dataclass(frozen=True, eq=False)
class GroundTruth:
    change_points: tuple
    series_length: int | None = None

    def __post_init__(self):
        cps = tuple(int(c) for c in self.change_points)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise InvalidArgumentError("change points must be strictly increasing")
        if cps and cps[0] < 0:
            raise InvalidArgumentError("change points must be non-negative")
        if self.series_length is not None and cps and cps[-1] >= self.series_length:
            raise InvalidArgumentError("change point beyond the end of the series")
        object.__setattr__(self, "change_points", cps)

    def __len__(self):
        return len(self.change_points)


@dataclass(frozen=True, eq=False)
class LabeledSeries:
    series: np.ndarray
    truth: GroundTruth
    seed: int
    specs: tuple = field(default=())


def generate_segments(specs, seed):
    """Concatenate segments; change points are the segment start indices after the first.

    Randomness comes from numpy's PCG64. Segment ``i`` draws from its own
    stream ``SeedSequence(seed, spawn_key=(i,))``, so appending segments or
    editing one segment's parameters leaves the other segments' rows unchanged.
    """
    specs = tuple(specs)
    if not specs:
        raise InvalidArgumentError("at least one segment is required")
    dim = specs[0].dim
    for s in specs:
        if s.dim != dim:
            raise DimensionMismatchError(f"segment dimensions differ: {dim} vs {s.dim}")
    blocks = []
    for i, s in enumerate(specs):
        if s.kind == "zeros":
            blocks.append(np.zeros((s.length, dim)))
            continue
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))
        noise = rng.standard_normal((s.length, dim))
        blocks.append(np.asarray(s.mean) + np.sqrt(s.covariance_scale) * noise)
    series = np.vstack(blocks)
    bounds = np.cumsum([s.length for s in specs])[:-1]
    truth = GroundTruth(tuple(int(b) for b in bounds), series.shape[0])
    return LabeledSeries(series=series, truth=truth, seed=seed, specs=specs)


FIG1_GAUSSIANS = (
    ((2.0, 2.0, 2.0), 1.0),
    ((0.0, 0.0, 0.0), 4.0),
    ((-2.0, -2.0, -2.0), 0.25),
)


def fig1_specs(segment_length=500, tiny_scale=0.001, gaussians=FIG1_GAUSSIANS):
    """Zero baseline, tiny-covariance Gaussian, large-change Gaussians, tiny, zero."""
    dim = len(gaussians[0][0])
    tiny = SegmentSpec(segment_length, (0.0,) * dim, tiny_scale)
    middle = [SegmentSpec(segment_length, mean, scale) for mean, scale in gaussians]
    return (
        SegmentSpec.zeros(segment_length, dim),
        tiny,
        *middle,
        tiny,
        SegmentSpec.zeros(segment_length, dim),
    )


def fig1_preset(segment_length=500, seed=0, tiny_scale=0.001, gaussians=FIG1_GAUSSIANS):
    """Toy benchmark with small changes next to zero baselines.

    Layout ``[zeros, N(0, tiny I), G1, G2, G3, N(0, tiny I), zeros]``; the
    boundaries between the baselines and the tiny-covariance segments are the
    subtle changes, the others are large.
    """
    return generate_segments(fig1_specs(segment_length, tiny_scale, gaussians), seed)


def mean_shift_specs(n_segments=5, segment_length=500, dim=3, shift=1.0):
    """Unit-covariance segments whose means step by ``shift`` in every coordinate."""
    return tuple(
        SegmentSpec(segment_length, (k * shift,) * dim, 1.0) for k in range(n_segments)
    )


def load_csv(path, has_header=False):
    """Read a comma-separated numeric table into a ``(T, d)`` array."""
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if lineno == 1 and has_header:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(
                    f"expected {width} columns, found {len(record)}", path, lineno
                )
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"non-numeric cell {cell!r}", path, lineno, col) from None
            rows.append(values)
    if not rows:
        raise ParseError("file has no data rows", path)
    data = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise ParseError("non-finite value", path, int(bad[0]) + 1 + int(has_header), int(bad[1]) + 1)
    return data


def load_labels(path, series_length=None):
    """Read one non-negative integer change point per line."""
    path = Path(path)
    points = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError:
                raise ParseError(f"not an integer: {text!r}", path, lineno) from None
            if value < 0:
                raise ParseError(f"negative change point {value}", path, lineno)
            points.append(value)
    try:
        return GroundTruth(tuple(points), series_length)
    except InvalidArgumentError as exc:
        raise ParseError(str(exc), path) from None


def write_csv(path, values, header=None):
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header:
            writer.writerow(header)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def write_labels(path, change_points):
    with Path(path).open("w") as fh:
        for c in change_points:
            fh.write(f"{int(c)}\n")

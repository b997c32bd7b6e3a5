"""Time-stepped diffusion: complex random walk, real random walk, heat flow.

Complex features travel in a split real layout: an (n, 2f) array whose first
f columns are real parts and last f columns the matching imaginary parts.
Every process here is the unit-step Euler discretization of its flow; one
step of the complex walk is X <- P X evaluated on the split layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import GraphFormatError, NumericError, ShapeError
from .graphs import ComplexWeightedGraph, SparseReal, TransitionMatrix, phase_of, transition_matrix


@dataclass(frozen=True)
class FeatureMatrix:
    """n x f complex node features stored as an (n, 2f) real array."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] % 2:
            raise ShapeError("split layout requires an (n, 2f) array")
        if not np.isfinite(self.data).all():
            raise NumericError("feature matrix contains non-finite entries")

    @classmethod
    def from_array(cls, data):
        return cls(np.ascontiguousarray(data, dtype=np.float64))

    @classmethod
    def from_complex(cls, values):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim == 1:
            values = values[:, None]
        return cls(np.ascontiguousarray(np.hstack([values.real, values.imag])))

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def f(self):
        return self.data.shape[1] // 2

    @property
    def re(self):
        return self.data[:, : self.f]

    @property
    def im(self):
        return self.data[:, self.f :]

    def to_complex(self):
        return self.re + 1j * self.im

    def channel_phases(self, channel=0):
        return phase_of(self.re[:, channel], self.im[:, channel])


@dataclass(frozen=True)
class Trajectory:
    """Recorded diffusion states: (step, FeatureMatrix) snapshots, step 0 first.

    ``phase_track`` optionally holds the channel-0 phase of every node at
    every step (not only snapshot steps), shaped (steps + 1, n).
    """

    snapshots: list
    phase_track: np.ndarray | None = None

    def __post_init__(self):
        steps = [s for s, _ in self.snapshots]
        if not steps or steps[0] != 0 or any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("snapshot steps must start at 0 and strictly increase")

    @property
    def final(self) -> FeatureMatrix:
        return self.snapshots[-1][1]


def euler_step_complex(p: TransitionMatrix, x: FeatureMatrix) -> FeatureMatrix:
    """One complex walk step P @ X on the split layout."""
    if x.n != p.n:
        raise ShapeError(f"feature rows {x.n} != transition size {p.n}")
    out = kernels.complex_coo_matmat(p.rows, p.cols, p.p_re, p.p_im, x.data, p.n)
    return FeatureMatrix(out)


def run_diffusion(p: TransitionMatrix, x0: FeatureMatrix, steps, record_every=None,
                  track_phases=False) -> Trajectory:
    """Iterate the complex walk, recording snapshots.

    Snapshots are taken at multiples of ``record_every`` plus the final step;
    the default density is 1 for n <= 100 and 10 above. Non-finite values
    abort with the first offending step named.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if record_every is None:
        record_every = 1 if p.n <= 100 else 10
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    snapshots = [(0, x0)]
    phases = [x0.channel_phases()] if track_phases else None
    x = x0
    for t in range(1, steps + 1):
        data = kernels.complex_coo_matmat(p.rows, p.cols, p.p_re, p.p_im, x.data, p.n)
        if not np.isfinite(data).all():
            raise NumericError(f"non-finite features first appeared at step {t}")
        x = FeatureMatrix(data)
        if track_phases:
            phases.append(x.channel_phases())
        if t % record_every == 0 or t == steps:
            snapshots.append((t, x))
    return Trajectory(snapshots=snapshots, phase_track=np.array(phases) if track_phases else None)


def heat_step(lap_complement: SparseReal, x: np.ndarray) -> np.ndarray:
    """One heat step (I - Laplacian) @ X for real features."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.shape[0] != lap_complement.n:
        raise ShapeError(f"feature rows {x.shape[0]} != operator size {lap_complement.n}")
    out = lap_complement.matmat(np.ascontiguousarray(x))
    return out[:, 0] if squeeze else out


def real_transition_matrix(g: ComplexWeightedGraph, degree_floor=0.0) -> TransitionMatrix:
    """Transition matrix of a real random walk (symmetric signed weights).

    The graph must carry purely real weights; the result reuses the complex
    storage with a zero imaginary part.
    """
    if np.abs(g.w_im).max(initial=0.0) > 0.0:
        raise GraphFormatError("real random walk requires real edge weights")
    return transition_matrix(g, degree_floor=degree_floor)

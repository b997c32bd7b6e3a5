"""Text file formats: graphs, complex weights, labels, features, splits, CSVs.

All formats are UTF-8 with LF line endings. Writes are atomic
(temp-file-then-rename) so partial files never appear at the target path.

 - ``*.edges``     one edge per line ``i j`` (0-based); ``#`` starts a comment;
                   an optional ``# n=<count>`` header pins the node count
                   (otherwise max index + 1).
 - ``*.cweights``  stored half of a Hermitian weight matrix: ``i j re im``
                   with i <= j; self-loops as ``i i re 0``.
 - ``*.labels``    one integer per line, line index = node index.
 - features CSV    headerless comma-separated rows; complex features use the
                   split layout (first half of the columns real, second half
                   imaginary).
 - splits JSON     ``[{"train": [...], "val": [...], "test": [...]}, ...]``
                   with 0-based node indices.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import GraphFormatError
from .graphs import ComplexWeightedGraph, Graph


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_edges(path) -> Graph:
    n_header = None
    edges = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped[1:].strip()
                if body.startswith("n="):
                    try:
                        n_header = int(body[2:])
                    except ValueError as exc:
                        raise GraphFormatError(f"{path}:{lineno}: bad node-count header") from exc
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'i j', got {stripped!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: non-integer endpoint") from exc
    if n_header is not None:
        n = n_header
    elif edges:
        n = max(max(e) for e in edges) + 1
    else:
        raise GraphFormatError(f"{path}: empty graph file without an 'n=' header")
    return Graph.from_edges(n, edges)


def write_edges(path, graph: Graph):
    lines = [f"# n={graph.n}"]
    lines += [f"{i} {j}" for i, j in zip(graph.edge_i, graph.edge_j)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_cweights(path, n) -> ComplexWeightedGraph:
    edges, weights = [], []
    loops = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 4:
                raise GraphFormatError(f"{path}:{lineno}: expected 'i j re im'")
            try:
                i, j = int(parts[0]), int(parts[1])
                re, im = float(parts[2]), float(parts[3])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: bad entry") from exc
            if i > j:
                raise GraphFormatError(f"{path}:{lineno}: stored half must have i <= j")
            if i == j:
                if im != 0.0:
                    raise GraphFormatError(f"{path}:{lineno}: self-loops must be real")
                loops[i] = re
            else:
                edges.append((i, j))
                weights.append(complex(re, im))
    self_loops = loops if loops else None
    return ComplexWeightedGraph.from_edges(n, edges, weights, self_loops=self_loops)


def write_cweights(path, g: ComplexWeightedGraph):
    lines = []
    for i, j, re, im in zip(g.edge_i, g.edge_j, g.w_re, g.w_im):
        lines.append(f"{i} {j} {re!r} {im!r}")
    if g.self_loops is not None:
        for i in np.flatnonzero(g.self_loops != 0.0):
            lines.append(f"{i} {i} {g.self_loops[i]!r} 0")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_labels(path) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                values.append(int(stripped))
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: non-integer label") from exc
    return np.asarray(values, dtype=np.int64)


def write_labels(path, labels):
    atomic_write_text(path, "\n".join(str(int(v)) for v in labels) + "\n")


def read_features_csv(path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise GraphFormatError(f"{path}: malformed features CSV ({exc})") from exc
    return data


def write_features_csv(path, features):
    features = np.asarray(features, dtype=np.float64)
    lines = [",".join(repr(v) for v in row) for row in features]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_splits_json(path):
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, list):
        raise GraphFormatError(f"{path}: splits JSON must be a list")
    return data


def write_json(path, payload):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")


def steady_state_csv(values, phases, labels=None):
    """CSV body ``node,re,im,phase,magnitude,class`` (class blank when absent)."""
    lines = ["node,re,im,phase,magnitude,class"]
    for idx, v in enumerate(values):
        cls = "" if labels is None else str(int(labels[idx]))
        lines.append(
            f"{idx},{v.real!r},{v.imag!r},{phases[idx]!r},{abs(v)!r},{cls}"
        )
    return "\n".join(lines) + "\n"


def trajectory_csv(trajectory, channel=0):
    """CSV body ``step,node,re,im,phase`` for one channel of each snapshot."""
    lines = ["step,node,re,im,phase"]
    for step, fm in trajectory.snapshots:
        phases = fm.channel_phases(channel)
        re = fm.re[:, channel]
        im = fm.im[:, channel]
        for node in range(fm.n):
            lines.append(f"{step},{node},{re[node]!r},{im[node]!r},{phases[node]!r}")
    return "\n".join(lines) + "\n"

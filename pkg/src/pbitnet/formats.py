"""Network, model and table file formats, and atomic CSV output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .network import NetworkSpec, SpecError

ARTIFACT_VERSION = "1"


class FormatError(SpecError):
    """Malformed input file."""


def _loads(text: str, what: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{what}: top level must be an object")
    return data


def _field(data, key, what, default=...):
    if key in data:
        return data[key]
    if default is ...:
        raise FormatError(f"{what}: missing field {key!r}")
    return default


def parse_network(text: str) -> NetworkSpec:
    """Parse the JSON network format; symmetry is checked against the data."""
    data = _loads(text, "network")
    n = _field(data, "n", "network")
    if not isinstance(n, int) or isinstance(n, bool):
        raise FormatError("network: field 'n' must be an integer")
    weights = _field(data, "weights", "network", [])
    for k, entry in enumerate(weights):
        if not (isinstance(entry, list) and len(entry) == 3):
            raise FormatError(f"network: weights[{k}] must be an [i, j, w] triplet")
    clamps = _field(data, "clamps", "network", [])
    for k, entry in enumerate(clamps):
        if not (isinstance(entry, list) and len(entry) == 2):
            raise FormatError(f"network: clamps[{k}] must be an [i, value] pair")
    biases = _field(data, "biases", "network", [0.0] * n)
    try:
        return NetworkSpec(n=n, weights=tuple(map(tuple, weights)), biases=tuple(biases),
                           clamps=tuple(map(tuple, clamps)),
                           symmetric=bool(_field(data, "symmetric", "network", True)),
                           convention=_field(data, "convention", "network", "bipolar"),
                           labels=data.get("labels"))
    except SpecError as exc:
        raise FormatError(f"network: {exc}") from None


def serialize_network(spec: NetworkSpec) -> str:
    data = {
        "n": spec.n,
        "weights": [[i, j, w] for i, j, w in spec.weights],
        "biases": list(spec.biases),
        "clamps": [[i, v] for i, v in spec.clamps],
        "symmetric": spec.symmetric,
    }
    if spec.convention != "bipolar":
        data["convention"] = spec.convention
    if spec.labels is not None:
        data["labels"] = list(spec.labels)
    return json.dumps(data, indent=1) + "\n"


def read_network(path) -> NetworkSpec:
    return parse_network(Path(path).read_text())


def parse_quantum_model(text: str, n_replicas: int | None = None):
    from .annealing import QuantumIsingSpec
    data = _loads(text, "quantum model")
    n = _field(data, "n", "quantum model")
    kw = dict(gamma=float(_field(data, "gamma", "quantum model")),
              beta=float(_field(data, "beta", "quantum model")),
              n_replicas=int(n_replicas or data.get("n_replicas", 10)))
    try:
        return QuantumIsingSpec.from_triplets(n, _field(data, "J", "quantum model", []),
                                              h_z=data.get("h_z"), **kw)
    except SpecError as exc:
        raise FormatError(f"quantum model: {exc}") from None


def parse_truth_table(text: str, input_bits: int | None = None):
    """CSV of 0/1 rows with a header naming the bits, inputs first."""
    from .logic import TruthTable
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise FormatError("truth table: need a header and at least one row")
    header = [h.strip() for h in rows[0]]
    body = []
    for k, r in enumerate(rows[1:], start=2):
        try:
            body.append(tuple(int(v) for v in r))
        except ValueError:
            raise FormatError(f"truth table: line {k} has a non-integer entry") from None
    if input_bits is None:
        input_bits = int(round(np.log2(len(body))))
    return TruthTable(input_bits, len(header) - input_bits, tuple(body), tuple(header))


def read_matrix_csv(path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_binary_rows(path) -> np.ndarray:
    """0/1 CSV rows (an optional non-numeric header is skipped) as bipolar."""
    lines = [l for l in Path(path).read_text().splitlines() if l.strip() and not l.startswith("#")]
    rows = []
    for k, line in enumerate(lines):
        cells = line.split(",")
        try:
            rows.append([int(c) for c in cells])
        except ValueError:
            if k == 0:
                continue
            raise FormatError(f"{path}: line {k + 1} is not numeric") from None
    arr = np.array(rows)
    if arr.size == 0 or not np.isin(arr, (0, 1)).all():
        raise FormatError(f"{path}: entries must be 0 or 1")
    return 2 * arr - 1


def config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def format_csv(header, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def atomic_write(path, text: str):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def histogram_rows(counts):
    counts = np.asarray(counts)
    total = counts.sum()
    return [(k, int(c), c / total) for k, c in enumerate(counts)]

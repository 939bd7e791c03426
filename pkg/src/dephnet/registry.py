"""Builtin circuit registry and the circuit definition file format.

A circuit file is plain text, one circuit per file, whitespace
insensitive, with ``#`` starting a comment anywhere on a line:

    # optional comments
    label: pentagon
    n: 5
    edges: 0-1 1-2 2-3 3-4 0-4
    source: 0
    sink: 2

The calibrated topologies ship as files with their calibration
provenance embedded as comments; constructors that depend on a
completed calibration look for the ``calibration-status: validated``
marker among the comments and refuse to build without it.
"""
from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .errors import CalibrationNotRunError, CircuitFileError, GraphConstructionError, UnknownCircuitError
from .graphs import Circuit, build_graph, make_wire

CALIBRATION_MARKER = "calibration-status: validated"

_FILE_BY_NAME = {
    "pentagon": "pentagon.circuit",
    "additivity-a": "additivity_a.circuit",
    "additivity-b": "additivity_b.circuit",
    "triangle": "triangle_funnel.circuit",
}
_ALIASES = {"funnel": "triangle"}
_WIRE_RE = re.compile(r"^wire(\d+)$")


def parse_circuit_text(text: str, origin: str = "<string>") -> tuple[Circuit, list[str]]:
    """Parse a circuit definition, returning the circuit and its comments."""
    fields: dict[str, str] = {}
    comments: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("#")
        comment = comment.strip()
        if comment:
            comments.append(comment)
        line = line.strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise CircuitFileError(
                f"{origin}:{lineno}: expected 'key: value', got {raw!r}")
        key = key.strip().lower()
        if key in fields:
            raise CircuitFileError(f"{origin}:{lineno}: duplicate field {key!r}")
        fields[key] = value.strip()

    for required in ("n", "edges", "source", "sink"):
        if required not in fields:
            raise CircuitFileError(f"{origin}: missing field {required!r}")
    unknown = set(fields) - {"n", "edges", "source", "sink", "label"}
    if unknown:
        raise CircuitFileError(f"{origin}: unknown fields {sorted(unknown)}")

    try:
        n = int(fields["n"])
        source = int(fields["source"])
        sink = int(fields["sink"])
    except ValueError as exc:
        raise CircuitFileError(f"{origin}: non-integer field: {exc}") from exc
    edges = []
    for token in fields["edges"].split():
        m = re.fullmatch(r"(\d+)-(\d+)", token)
        if not m:
            raise CircuitFileError(
                f"{origin}: bad edge token {token!r}, expected 'i-j'")
        edges.append((int(m.group(1)), int(m.group(2))))
    try:
        circuit = Circuit(build_graph(n, edges), source, sink,
                          label=fields.get("label", ""))
    except GraphConstructionError as exc:
        raise CircuitFileError(f"{origin}: {exc}") from exc
    return circuit, comments


def parse_circuit_file(path) -> tuple[Circuit, list[str]]:
    path = Path(path)
    return parse_circuit_text(path.read_text(encoding="utf-8"), origin=str(path))


def format_circuit(c: Circuit, comments: list[str] | None = None) -> str:
    """Render a circuit in the definition file format (the exporter)."""
    lines = [f"# {comment}" for comment in (comments or [])]
    if c.label:
        lines.append(f"label: {c.label}")
    lines.append(f"n: {c.graph.n}")
    lines.append("edges: " + " ".join(f"{i}-{j}" for i, j in c.graph.edges))
    lines.append(f"source: {c.source}")
    lines.append(f"sink: {c.sink}")
    return "\n".join(lines) + "\n"


def write_circuit_file(c: Circuit, path, comments: list[str] | None = None) -> None:
    Path(path).write_text(format_circuit(c, comments), encoding="utf-8")


def builtin_names() -> list[str]:
    """Registered names (the wireN family is matched by pattern)."""
    return sorted(_FILE_BY_NAME) + sorted(_ALIASES) + ["wire<N>"]


def _read_builtin(name: str) -> tuple[Circuit, list[str]]:
    fname = _FILE_BY_NAME[name]
    text = resources.files(__package__).joinpath("circuits", fname).read_text(
        encoding="utf-8")
    return parse_circuit_text(text, origin=f"builtin:{name}")


def load_builtin(name: str) -> Circuit:
    """Resolve a builtin circuit name. Unknown names are an error,
    never silently empty."""
    key = _ALIASES.get(name, name)
    wire = _WIRE_RE.match(key)
    if wire:
        return make_wire(int(wire.group(1)))
    if key in _FILE_BY_NAME:
        return _read_builtin(key)[0]
    raise UnknownCircuitError(
        f"unknown builtin circuit {name!r}; known: {', '.join(builtin_names())}")


def load_calibrated(name: str) -> Circuit:
    """Load a builtin that must carry a completed-calibration record."""
    key = _ALIASES.get(name, name)
    if key not in _FILE_BY_NAME:
        raise UnknownCircuitError(f"no calibrated circuit named {name!r}")
    circuit, comments = _read_builtin(key)
    if not any(CALIBRATION_MARKER in comment for comment in comments):
        raise CalibrationNotRunError(
            f"circuit {name!r} has no {CALIBRATION_MARKER!r} record; "
            "run the calibration search before using this constructor")
    return circuit


def resolve_circuit(spec: str) -> Circuit:
    """CLI-facing resolution: a path to a circuit file, or a builtin name."""
    path = Path(spec)
    if path.suffix == ".circuit" or path.exists():
        if not path.exists():
            raise CircuitFileError(f"circuit file not found: {spec}")
        return parse_circuit_file(path)[0]
    return load_builtin(spec)

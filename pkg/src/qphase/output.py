"""CSV and JSON writers with deterministic formatting and a run manifest."""
from __future__ import annotations

import hashlib
import json
import subprocess
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return FLOAT_FMT % float(x)


def write_csv(path: Path, header: list[str], columns) -> Path:
    """Write equal-length columns; floats keep 17 significant digits."""
    cols = [np.asarray(c) for c in columns]
    n = {c.shape[0] for c in cols}
    if len(n) != 1:
        raise ValueError("columns must share a length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_matrix(path: Path, matrix: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [",".join(fmt(v) for v in row) for row in np.asarray(matrix)]
    path.write_text("\n".join(rows) + "\n")
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_json(path: Path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")
    return path


def config_hash(config: dict) -> str:
    blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def git_describe(cwd: Path | None = None) -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=cwd, capture_output=True,
                             text=True, timeout=10, check=True)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def write_manifest(outdir: Path, command: str, config: dict, tolerances: dict, outputs: list[Path],
                   summary: dict | None = None) -> Path:
    """manifest.json next to the outputs; no timestamps so reruns are byte-identical."""
    from . import __version__

    outdir = Path(outdir)
    doc = {
        "command": command,
        "config": config,
        # the output location does not change the numbers, so it is left out of the hash
        "config_sha256": config_hash({k: v for k, v in config.items() if k != "out"}),
        "git_describe": git_describe(Path(__file__).resolve().parent),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "tolerances": tolerances,
        "outputs": sorted(p.name for p in outputs),
        "summary": summary or {},
    }
    return write_json(outdir / "manifest.json", doc)

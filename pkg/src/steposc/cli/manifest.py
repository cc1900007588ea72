"""Run manifests: what ran, with which versions, and a checksum for every output."""
from __future__ import annotations

import hashlib
import json
import platform
import time
from pathlib import Path
from typing import Dict, List

import numpy as np
import scipy

from .. import __version__, kernels
from ..errors import IngestionError
from .config import config_hash

MANIFEST = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    """Collects outputs of one command and writes ``manifest.json`` beside them."""

    def __init__(self, out_dir, command: str, cfg: dict):
        self.out_dir = Path(out_dir)
        self.command = command
        self.cfg = cfg
        self.files: List[Path] = []
        self.timings: Dict[str, float] = {}
        self._t0 = time.perf_counter()

    def add(self, path) -> Path:
        p = Path(path)
        if p not in self.files:
            self.files.append(p)
        return p

    def time(self, label: str, seconds: float):
        self.timings[label] = round(float(seconds), 6)

    def as_dict(self) -> dict:
        files = []
        for p in sorted(self.files, key=lambda q: str(q)):
            files.append({"path": str(p.relative_to(self.out_dir)),
                          "sha256": sha256_file(p), "bytes": p.stat().st_size})
        self.timings.setdefault("total", round(time.perf_counter() - self._t0, 6))
        return {
            "command": self.command,
            "config_hash": config_hash(self.cfg),
            "config": self.cfg,
            "versions": {"steposc": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version(),
                         "kernel_backend": kernels.BACKEND},
            "seed": self.cfg.get("seed"),
            "files": files,
            "timings": self.timings,
        }

    def write(self) -> Path:
        path = self.out_dir / MANIFEST
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")
        return path


def load_manifest(bundle_dir) -> dict:
    path = Path(bundle_dir) / MANIFEST
    if not path.is_file():
        raise IngestionError(f"{bundle_dir}: no {MANIFEST}; not an output bundle")
    try:
        return json.loads(path.read_text())
    except ValueError as exc:
        raise IngestionError(f"{path}: unreadable manifest ({exc})") from exc


def verify_file(bundle_dir, name: str, manifest: dict = None) -> Path:
    """Check a bundle member against its recorded checksum."""
    manifest = load_manifest(bundle_dir) if manifest is None else manifest
    entry = {f["path"]: f for f in manifest.get("files", [])}.get(name)
    path = Path(bundle_dir) / name
    if entry is None or "sha256" not in entry:
        raise IngestionError(f"{path}: no checksum in the bundle manifest")
    if not path.is_file():
        raise IngestionError(f"{path}: listed in the manifest but missing")
    if sha256_file(path) != entry["sha256"]:
        raise IngestionError(f"{path}: checksum mismatch")
    return path

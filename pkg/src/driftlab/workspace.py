"""On-disk workspace: artifacts plus an append-only manifest with content hashes."""
from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path

from . import __version__

MANIFEST = "manifest.json"
SCHEMA_VERSION = 1
ENV_ROOT = "DRIFTLAB_WORKSPACE"


class MissingArtifact(LookupError):
    pass


class HashMismatch(RuntimeError):
    pass


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def dump_json(obj, path: str | Path) -> None:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


@dataclass
class Workspace:
    root: Path

    @classmethod
    def open(cls, root: str | Path | None = None) -> "Workspace":
        root = Path(root or os.environ.get(ENV_ROOT) or "driftlab-workspace")
        root.mkdir(parents=True, exist_ok=True)
        return cls(root)

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST

    def manifest(self) -> dict:
        if not self.manifest_path.exists():
            return {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "entries": []}
        return json.loads(self.manifest_path.read_text(encoding="utf-8"))

    def path(self, rel: str) -> Path:
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def record(self, command: str, rel_paths: list[str], params: dict) -> None:
        """Append one entry per produced file."""
        man = self.manifest()
        seq = len(man["entries"])
        for rel in rel_paths:
            man["entries"].append(
                {
                    "seq": seq,
                    "command": command,
                    "path": rel,
                    "sha256": sha256(self.root / rel),
                    "params": params,
                    "tool_version": __version__,
                }
            )
            seq += 1
        dump_json(man, self.manifest_path)

    def latest(self) -> dict[str, dict]:
        """Most recent manifest entry per path."""
        out: dict[str, dict] = {}
        for entry in self.manifest()["entries"]:
            out[entry["path"]] = entry
        return out

    def require(self, rel: str) -> Path:
        """Resolve a recorded artifact, verifying that it exists and is unmodified."""
        entry = self.latest().get(rel)
        p = self.root / rel
        if entry is None or not p.exists():
            raise MissingArtifact(rel)
        if sha256(p) != entry["sha256"]:
            raise HashMismatch(rel)
        return p

    def find(self, prefix: str, suffix: str = "") -> list[str]:
        return sorted(
            (rel for rel in self.latest() if rel.startswith(prefix) and rel.endswith(suffix)),
            key=_natural_key,
        )


def _natural_key(rel: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", rel)]

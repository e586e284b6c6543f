"""Deterministic run manifests and CSV emission.

Every CSV starts with a comment line carrying the manifest hash and a
versioned schema name, then the header row.  Identical configs and master
seeds reproduce identical bytes: floats are rendered with repr and row
order is fixed by the caller.
"""

from __future__ import annotations

import hashlib
import json
import os

from .. import __version__

__all__ = ["config_hash", "write_csv", "read_csv", "write_manifest", "file_sha256"]


def config_hash(config: dict, master_seed: int) -> str:
    blob = json.dumps({"config": config, "master_seed": master_seed},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, schema: str, columns: list[str], rows, manifest_hash: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"# manifest={manifest_hash} schema={schema}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Reads one of our CSVs back: (columns, string rows), comment skipped."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        return [], []
    cols = lines[0].split(",")
    return cols, [ln.split(",") for ln in lines[1:] if ln]


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, kind: str, config: dict, master_seed: int,
                   outputs: list[str], failures: list[dict] | None = None) -> dict:
    doc = {
        "kind": kind,
        "code_version": __version__,
        "master_seed": master_seed,
        "config": config,
        "config_hash": config_hash(config, master_seed),
        "outputs": {
            name: file_sha256(os.path.join(out_dir, name)) for name in sorted(outputs)
        },
        "failures": failures or [],
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc

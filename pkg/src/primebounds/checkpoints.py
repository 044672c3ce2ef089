"""Append-only checkpoint store: one JSON record per line.

Floats are written as hexfloats so a resumed scan is bit-identical to an
uninterrupted one.  The exact fixed-point theta/psi sums ride along as hex
integers because resuming needs them, not their rounded float images.
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from .sieve import PrimeCheckpoint

VERSION = 1
CHECKPOINT_ENV = "PRIMEBOUNDS_CHECKPOINT_DIR"


class CheckpointError(RuntimeError):
    """A checkpoint could not be written or read back intact."""

    def __init__(self, message: str, last_durable: PrimeCheckpoint | None = None):
        super().__init__(message)
        self.last_durable = last_durable


def _checksum(fields: dict) -> str:
    body = json.dumps(fields, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode()).hexdigest()[:16]


def encode(cp: PrimeCheckpoint) -> str:
    fields = {
        "version": VERSION,
        "x": cp.x,
        "pi_x": cp.pi_x,
        "theta_x": cp.theta_x.hex(),
        "psi_x": cp.psi_x.hex(),
        "theta_err": cp.theta_err.hex(),
        "max_gap": cp.max_gap,
        "last_prime": cp.last_prime,
        "theta_fixed": hex(cp.theta_fixed),
        "psi_fixed": hex(cp.psi_fixed),
    }
    fields["checksum"] = _checksum(fields)
    return json.dumps(fields, sort_keys=True)


def decode(line: str) -> PrimeCheckpoint:
    fields = json.loads(line)
    checksum = fields.pop("checksum", None)
    if checksum != _checksum(fields):
        raise CheckpointError(f"checksum mismatch in record at x={fields.get('x')}")
    if fields["version"] != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {fields['version']}")
    return PrimeCheckpoint(
        x=fields["x"],
        pi_x=fields["pi_x"],
        theta_x=float.fromhex(fields["theta_x"]),
        psi_x=float.fromhex(fields["psi_x"]),
        theta_err=float.fromhex(fields["theta_err"]),
        max_gap=fields["max_gap"],
        last_prime=fields["last_prime"],
        theta_fixed=int(fields["theta_fixed"], 16),
        psi_fixed=int(fields["psi_fixed"], 16),
    )


class CheckpointStore:
    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._records: list[PrimeCheckpoint] = []
        if self.path.exists():
            with self.path.open() as fh:
                for line in fh:
                    if line.strip():
                        self._records.append(decode(line))
        self._records.sort(key=lambda cp: cp.x)

    @classmethod
    def in_dir(cls, directory: str | os.PathLike | None = None, name: str = "checkpoints.jsonl") -> "CheckpointStore":
        directory = directory or os.environ.get(CHECKPOINT_ENV) or "."
        Path(directory).mkdir(parents=True, exist_ok=True)
        return cls(Path(directory) / name)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def append(self, cp: PrimeCheckpoint) -> None:
        if any(r.x == cp.x for r in self._records):
            return
        try:
            with self.path.open("a") as fh:
                fh.write(encode(cp) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise CheckpointError(f"could not write checkpoint x={cp.x}: {exc}", self.latest()) from exc
        self._records.append(cp)
        self._records.sort(key=lambda r: r.x)

    def latest(self, at_most: int | None = None) -> PrimeCheckpoint | None:
        best = None
        for cp in self._records:
            if at_most is None or cp.x <= at_most:
                best = cp
        return best

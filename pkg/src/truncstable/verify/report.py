"""Machine-readable experiment reports.

A report is the single artifact an experiment produces: the scenario echo,
one record per named check (both compared numbers, the slack used, and the
verdict), the supporting Monte Carlo estimates with their standard errors,
and the run metadata (seed, toolkit version, wall time).

Reproducibility contract: the canonical JSON body excludes the wall-time
field and serializes with sorted keys and fixed separators, so re-running a
scenario with the same seed yields byte-identical bodies regardless of
thread count or host.  Files are written atomically (temp file + rename in
the target directory).
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable

from ..errors import ConfigError

__all__ = ["CheckRecord", "EstimateRecord", "Report", "CSV_COLUMNS"]

#: Flattened-CSV column order for check records (fixed interface).
CSV_COLUMNS = ("check_id", "lhs", "rhs", "tolerance", "pass")


@dataclass(frozen=True)
class CheckRecord:
    """One named verification check.

    ``lhs`` and ``rhs`` are the two compared numbers and ``tolerance`` the
    slack applied between them; the comparison direction is part of the
    check's definition and restated in ``detail``.  ``passed`` is the
    verdict actually used for the exit code, so a record is self-contained
    even when the direction convention is not known to the reader.
    """

    check_id: str
    detail: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "detail": self.detail,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
        }


@dataclass(frozen=True)
class EstimateRecord:
    """A labelled Monte Carlo estimate carried along for inspection."""

    label: str
    mean: float
    stderr: float
    n: int
    censored_fraction: float

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "mean": float(self.mean),
            "stderr": float(self.stderr),
            "n": int(self.n),
            "censored_fraction": float(self.censored_fraction),
        }


def check_le(check_id: str, detail: str, lhs: float, rhs: float, tol: float = 0.0) -> CheckRecord:
    """Record passing iff ``lhs <= rhs + tol``."""
    return CheckRecord(check_id, detail, lhs, rhs, tol, bool(lhs <= rhs + tol))


def check_ge(check_id: str, detail: str, lhs: float, rhs: float, tol: float = 0.0) -> CheckRecord:
    """Record passing iff ``lhs >= rhs - tol``."""
    return CheckRecord(check_id, detail, lhs, rhs, tol, bool(lhs >= rhs - tol))


def check_eq(check_id: str, detail: str, lhs: float, rhs: float, tol: float = 0.0) -> CheckRecord:
    """Record passing iff ``|lhs - rhs| <= tol``."""
    return CheckRecord(check_id, detail, lhs, rhs, tol, bool(abs(lhs - rhs) <= tol))


@dataclass(frozen=True)
class Report:
    """Complete result of one experiment run."""

    scenario: dict
    seed: int
    version: str
    checks: tuple[CheckRecord, ...]
    estimates: tuple[EstimateRecord, ...]
    wall_time: float

    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def body_dict(self) -> dict:
        """Everything except the wall-time field (the reproducible part)."""
        return {
            "scenario": self.scenario,
            "seed": int(self.seed),
            "version": self.version,
            "checks": [c.as_dict() for c in self.checks],
            "estimates": [e.as_dict() for e in self.estimates],
        }

    def body_bytes(self) -> bytes:
        """Canonical serialization of the reproducible body."""
        return json.dumps(
            self.body_dict(), sort_keys=True, separators=(",", ":")
        ).encode()

    def to_json(self) -> str:
        full = self.body_dict()
        full["wall_time"] = float(self.wall_time)
        return json.dumps(full, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(CSV_COLUMNS) + "\n")
        for c in self.checks:
            out.write(
                f"{c.check_id},{c.lhs!r},{c.rhs!r},{c.tolerance!r},"
                f"{'true' if c.passed else 'false'}\n"
            )
        return out.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ConfigError(f"unknown report format {fmt!r} (expected csv or json)")

    def write(self, path: str, fmt: str = "json") -> None:
        """Atomically write the rendered report to ``path``."""
        text = self.render(fmt)
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def summary_lines(self) -> Iterable[str]:
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            yield (
                f"{mark} {c.check_id}: lhs={c.lhs:.6g} rhs={c.rhs:.6g} "
                f"tol={c.tolerance:.3g} -- {c.detail}"
            )

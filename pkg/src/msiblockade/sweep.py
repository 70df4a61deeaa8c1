"""Parameter-sweep engine: config parsing, grid execution, CSV output.

A sweep is one or two axes over SystemParams fields (plus the compound
aliases ``delta``, ``kappa``, ``eps`` that move both cavities together),
evaluated on any subset of the four model tiers. Row order is row-major
over the axes and fixed regardless of execution parallelism; CSV floats
use shortest round-trip formatting so identical specs give byte-identical
files.
"""

from __future__ import annotations

import dataclasses
import difflib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from .analytic import amplitude_steady_states, g2_analytic
from .fock import make_space
from .liouvillian import build_liouvillian, mode_statistics, steady_state
from .model import SystemParams, build_collapse_ops, build_effective_hamiltonian, build_full_hamiltonian
from .semiclassical import reduced_fixed_point

TIERS = ("analytic", "master_effective", "master_full", "semiclassical")

# compound axis names that sweep both cavities at once
AXIS_ALIASES = {
    "delta": ("delta_c", "delta_e"),
    "kappa": ("kappa_c", "kappa_e"),
    "eps": ("eps_c", "eps_e"),
}

PARAM_FIELDS = tuple(
    f.name for f in dataclasses.fields(SystemParams) if f.name not in ("n_th", "t_bath")
)
AXIS_NAMES = PARAM_FIELDS + tuple(AXIS_ALIASES)


class ConfigError(ValueError):
    """A sweep configuration failed validation."""


def _suggest(key: str, valid) -> str:
    close = difflib.get_close_matches(key, list(valid), n=1)
    hint = f" (did you mean {close[0]!r}?)" if close else ""
    return f"unknown key {key!r}{hint}"


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(_suggest(self.name, AXIS_NAMES))
        if self.count < 2:
            raise ConfigError(f"axis {self.name!r}: count must be >= 2, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis {self.name!r}: scale must be linear or log, got {self.scale!r}")
        if self.scale == "log" and (self.min <= 0 or self.max <= 0):
            raise ConfigError(f"axis {self.name!r}: log scale requires positive range")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.min), math.log10(self.max), self.count)
        return np.linspace(self.min, self.max, self.count)

    def param_updates(self, value: float) -> dict:
        names = AXIS_ALIASES.get(self.name, (self.name,))
        return {n: float(value) for n in names}


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[AxisSpec, ...]
    fixed: SystemParams = SystemParams()
    tiers: tuple[str, ...] = ("analytic",)
    trunc_effective: tuple[int, int] = (6, 6)
    trunc_full: tuple[int, int, int] = (4, 4, 8)
    output: str | None = None

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError(f"need 1 or 2 axes, got {len(self.axes)}")
        for t in self.tiers:
            if t not in TIERS:
                raise ConfigError(_suggest(t, TIERS))
        if not self.tiers:
            raise ConfigError("need at least one tier")

    def grid(self):
        """Row-major iteration over the axis product."""
        if len(self.axes) == 1:
            for v in self.axes[0].values():
                yield (float(v),)
        else:
            for v1 in self.axes[0].values():
                for v2 in self.axes[1].values():
                    yield (float(v1), float(v2))

    def point_params(self, values) -> SystemParams:
        updates = {}
        for ax, v in zip(self.axes, values):
            updates.update(ax.param_updates(v))
        return self.fixed.with_(**updates)


@dataclass(frozen=True)
class SweepRow:
    axis_values: tuple[float, ...]
    tier: str
    g2_c: float | None
    g2_e: float | None
    n_c: float | None
    n_e: float | None
    status: str
    residual: float | None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]

    def to_csv(self) -> str:
        header = [ax.name for ax in self.spec.axes] + [
            "tier", "g2_c", "g2_e", "n_c", "n_e", "status", "residual",
        ]
        lines = [",".join(header)]
        for r in self.rows:
            cells = [_fmt(v) for v in r.axis_values]
            cells += [r.tier, _fmt(r.g2_c), _fmt(r.g2_e), _fmt(r.n_c), _fmt(r.n_e), r.status, _fmt(r.residual)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())

    def tier_rows(self, tier: str) -> list[SweepRow]:
        return [r for r in self.rows if r.tier == tier]

    @property
    def hard_errors(self) -> int:
        return sum(1 for r in self.rows if r.status.startswith("error"))


def _fmt(v) -> str:
    """Shortest round-trip decimal; empty cell for missing/non-finite."""
    if v is None:
        return ""
    v = float(v)
    if not math.isfinite(v):
        return ""
    return repr(v)


# -- per-point tier evaluation ---------------------------------------------


def _eval_analytic(p: SystemParams) -> SweepRow:
    res = g2_analytic(p)
    status_parts = []
    if res.status_c.value != "ok":
        status_parts.append(f"c:{res.status_c.value}")
    if res.status_e.value != "ok":
        status_parts.append(f"e:{res.status_e.value}")
    n_c = n_e = None
    if p.eps_c == p.eps_e:
        amps = amplitude_steady_states(p)
        if amps.status.value == "ok":
            n_c, n_e = amps.occupations()
        elif amps.status.value not in " ".join(status_parts):
            status_parts.append(f"amps:{amps.status.value}")
    status = ";".join(status_parts) if status_parts else "ok"
    g2_c = res.g2_c if math.isfinite(res.g2_c) else None
    g2_e = res.g2_e if math.isfinite(res.g2_e) else None
    return SweepRow((), "analytic", g2_c, g2_e, n_c, n_e, status, None)


def _eval_master(p: SystemParams, trunc, full: bool) -> SweepRow:
    tier = "master_full" if full else "master_effective"
    space = make_space(trunc)
    if full:
        H = build_full_hamiltonian(p, space)
        ops = build_collapse_ops(p, space, "displacement_modified")
    else:
        H = build_effective_hamiltonian(p, space)
        ops = build_collapse_ops(p, space, "standard")
    res = steady_state(build_liouvillian(H, ops, "sandwich"))
    n_c, g2_c = mode_statistics(res.state, 0)
    n_e, g2_e = mode_statistics(res.state, 1)
    status = "ok" if not res.notes else ";".join(res.notes)
    g2_c = g2_c if math.isfinite(g2_c) else None
    g2_e = g2_e if math.isfinite(g2_e) else None
    return SweepRow((), tier, g2_c, g2_e, n_c, n_e, status, res.residual)


def _eval_semiclassical(p: SystemParams) -> SweepRow:
    ac, ae, ok = reduced_fixed_point(p)
    status = "ok" if ok else "no_convergence"
    return SweepRow((), "semiclassical", None, None, abs(ac) ** 2, abs(ae) ** 2, status, None)


def _evaluate_point(spec: SweepSpec, values) -> list[SweepRow]:
    p = spec.point_params(values)
    rows = []
    for tier in TIERS:
        if tier not in spec.tiers:
            continue
        try:
            if tier == "analytic":
                row = _eval_analytic(p)
            elif tier == "master_effective":
                row = _eval_master(p, spec.trunc_effective, full=False)
            elif tier == "master_full":
                row = _eval_master(p, spec.trunc_full, full=True)
            else:
                row = _eval_semiclassical(p)
        except Exception as exc:  # per-point failures are recorded, never fatal
            row = SweepRow((), tier, None, None, None, None, f"error:{type(exc).__name__}:{exc}", None)
        rows.append(dataclasses.replace(row, axis_values=tuple(values)))
    return rows


def _eval_star(args):
    return _evaluate_point(*args)


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate every grid point on every requested tier.

    Points are independent; with ``threads > 1`` they run in a process
    pool, but rows are aggregated in fixed row-major grid order either way.
    """
    points = list(spec.grid())
    if threads > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, len(points) // (8 * threads))
            per_point = list(pool.map(_eval_star, [(spec, v) for v in points], chunksize=chunk))
    else:
        per_point = [_evaluate_point(spec, v) for v in points]
    rows = tuple(row for rows in per_point for row in rows)
    return SweepResult(spec, rows)


# -- configuration ----------------------------------------------------------

_TOP_KEYS = ("axes", "fixed", "tiers", "truncations", "output")
_AXIS_KEYS = ("name", "min", "max", "count", "scale")
_TRUNC_KEYS = ("effective", "full")


def _check_keys(mapping, valid, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(mapping).__name__}")
    for key in mapping:
        if key not in valid:
            raise ConfigError(f"in {where}: " + _suggest(str(key), valid))


def parse_config(text: str) -> SweepSpec:
    """Parse and fully validate a YAML sweep configuration.

    Unknown keys are rejected with a nearest-match hint; all missing
    required fields are reported in a single error.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    _check_keys(raw, _TOP_KEYS, "config")

    missing = []
    if "axes" not in raw or not raw["axes"]:
        missing.append("axes (list of {name, min, max, count[, scale]})")
    if missing:
        raise ConfigError("missing required fields: " + "; ".join(missing))

    axes = []
    for i, ax in enumerate(raw["axes"]):
        _check_keys(ax, _AXIS_KEYS, f"axes[{i}]")
        ax_missing = [k for k in ("name", "min", "max", "count") if k not in ax]
        if ax_missing:
            raise ConfigError(f"axes[{i}] missing required fields: {', '.join(ax_missing)}")
        axes.append(
            AxisSpec(
                name=str(ax["name"]),
                min=float(ax["min"]),
                max=float(ax["max"]),
                count=int(ax["count"]),
                scale=str(ax.get("scale", "linear")),
            )
        )

    fixed_raw = raw.get("fixed", {}) or {}
    _check_keys(fixed_raw, PARAM_FIELDS + ("n_th", "t_bath"), "fixed")
    fixed = SystemParams(**{k: float(v) for k, v in fixed_raw.items()})

    tiers_raw = raw.get("tiers", ["analytic"])
    if not isinstance(tiers_raw, list):
        raise ConfigError("tiers must be a list")
    for t in tiers_raw:
        if t not in TIERS:
            raise ConfigError("in tiers: " + _suggest(str(t), TIERS))
    # canonical tier order regardless of config order
    tiers = tuple(t for t in TIERS if t in tiers_raw)

    trunc_raw = raw.get("truncations", {}) or {}
    _check_keys(trunc_raw, _TRUNC_KEYS, "truncations")
    trunc_eff = tuple(int(x) for x in trunc_raw.get("effective", (6, 6)))
    trunc_full = tuple(int(x) for x in trunc_raw.get("full", (4, 4, 8)))
    if len(trunc_eff) != 2:
        raise ConfigError("truncations.effective needs exactly 2 mode levels")
    if len(trunc_full) != 3:
        raise ConfigError("truncations.full needs exactly 3 mode levels")

    output = raw.get("output")
    return SweepSpec(
        axes=tuple(axes),
        fixed=fixed,
        tiers=tiers,
        trunc_effective=trunc_eff,
        trunc_full=trunc_full,
        output=str(output) if output is not None else None,
    )


def serialize(spec: SweepSpec) -> str:
    """Canonical YAML text for a spec; parse(serialize(parse(x))) is stable."""
    doc = {
        "axes": [
            {"name": ax.name, "min": ax.min, "max": ax.max, "count": ax.count, "scale": ax.scale}
            for ax in spec.axes
        ],
        "fixed": {k: getattr(spec.fixed, k) for k in PARAM_FIELDS},
        "tiers": list(spec.tiers),
        "truncations": {"effective": list(spec.trunc_effective), "full": list(spec.trunc_full)},
    }
    if spec.output is not None:
        doc["output"] = spec.output
    return yaml.safe_dump(doc, sort_keys=False)

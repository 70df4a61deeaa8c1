"""Sweep configuration, grid execution, CSV determinism."""

import textwrap

import numpy as np
import pytest

from msiblockade.model import SystemParams
from msiblockade.sweep import (
    AxisSpec,
    ConfigError,
    SweepSpec,
    parse_config,
    run_sweep,
    serialize,
)

MINIMAL = textwrap.dedent(
    """
    axes:
      - name: delta
        min: -5.0e5
        max: 5.0e5
        count: 5
    """
)

FULL = textwrap.dedent(
    """
    axes:
      - name: delta_c
        min: -2.0e5
        max: 2.0e5
        count: 3
      - name: delta_e
        min: -2.0e5
        max: 2.0e5
        count: 3
    fixed:
      g_omega: 200.0
      g_kappa: 500.0
      J: 2.0e5
      eps_c: 5.0e3
      eps_e: 5.0e3
    tiers: [analytic, semiclassical]
    truncations:
      effective: [5, 5]
      full: [3, 3, 6]
    """
)


class TestAxisSpec:
    def test_linear_values(self):
        ax = AxisSpec("delta", -5.0e5, 5.0e5, 401)
        vals = ax.values()
        assert len(vals) == 401
        # exact-arithmetic grid: the blockade points are exact multiples
        assert vals[120] == -2.0e5
        assert vals[200] == 0.0

    def test_log_values(self):
        ax = AxisSpec("kappa", 1.0, 1.0e4, 5, "log")
        assert np.allclose(ax.values(), [1.0, 10.0, 100.0, 1000.0, 10000.0])

    def test_alias_updates_both_cavities(self):
        ax = AxisSpec("delta", -1.0, 1.0, 2)
        assert ax.param_updates(0.5) == {"delta_c": 0.5, "delta_e": 0.5}

    def test_unknown_name_suggests(self):
        with pytest.raises(ConfigError, match="did you mean 'kappa_c'"):
            AxisSpec("kapa_c", 0.0, 1.0, 3)

    def test_count_and_log_validation(self):
        with pytest.raises(ConfigError, match="count"):
            AxisSpec("delta", 0.0, 1.0, 1)
        with pytest.raises(ConfigError, match="log"):
            AxisSpec("kappa", -1.0, 1.0, 3, "log")


class TestParseConfig:
    def test_minimal_with_defaults(self):
        spec = parse_config(MINIMAL)
        assert spec.tiers == ("analytic",)
        assert spec.trunc_effective == (6, 6)
        assert spec.trunc_full == (4, 4, 8)
        assert spec.fixed == SystemParams()

    def test_full_config(self):
        spec = parse_config(FULL)
        assert len(spec.axes) == 2
        assert spec.fixed.J == 2.0e5
        assert spec.tiers == ("analytic", "semiclassical")
        assert spec.trunc_effective == (5, 5)

    def test_unknown_top_key(self):
        with pytest.raises(ConfigError, match="unknown key 'axis_specs'"):
            parse_config(MINIMAL + "\naxis_specs: []\n")

    def test_unknown_fixed_key_suggests(self):
        bad = MINIMAL + "fixed:\n  kapa_c: 100.0\n"
        with pytest.raises(ConfigError, match="did you mean 'kappa_c'"):
            parse_config(bad)

    def test_missing_axes_reported(self):
        with pytest.raises(ConfigError, match="missing required fields: axes"):
            parse_config("tiers: [analytic]\n")

    def test_missing_axis_fields_listed_exhaustively(self):
        with pytest.raises(ConfigError, match="min, max, count"):
            parse_config("axes:\n  - name: delta\n")

    def test_unknown_tier(self):
        with pytest.raises(ConfigError, match="master_effective"):
            parse_config(MINIMAL + "tiers: [master_efective]\n")

    def test_round_trip_idempotent(self):
        spec = parse_config(FULL)
        text = serialize(spec)
        again = parse_config(text)
        assert again == spec
        assert serialize(again) == text

    def test_not_yaml(self):
        with pytest.raises(ConfigError, match="YAML"):
            parse_config("axes: [unclosed\n  - ]broken")


class TestRunSweep:
    def test_analytic_three_rows(self):
        spec = SweepSpec(
            axes=(AxisSpec("delta", -1.0e5, 1.0e5, 3),),
            fixed=SystemParams(g_omega=200.0, g_kappa=500.0, J=2.0e5, eps_c=5e3, eps_e=5e3),
        )
        result = run_sweep(spec)
        assert len(result.rows) == 3
        for row in result.rows:
            assert row.g2_c is not None or row.status != "ok"

    def test_two_axis_row_major_order(self):
        spec = SweepSpec(
            axes=(AxisSpec("delta_c", 0.0, 2.0, 3), AxisSpec("delta_e", 10.0, 11.0, 2)),
            fixed=SystemParams(eps_c=1.0, eps_e=1.0, J=100.0, g_omega=1.0),
        )
        result = run_sweep(spec)
        assert len(result.rows) == 6
        assert [r.axis_values for r in result.rows] == [
            (0.0, 10.0), (0.0, 11.0), (1.0, 10.0), (1.0, 11.0), (2.0, 10.0), (2.0, 11.0),
        ]

    def test_pole_rows_flagged_not_fatal(self):
        # the grid crosses delta = -J (D_J pole) and delta = 0
        spec = SweepSpec(
            axes=(AxisSpec("delta", -2.0e5, 0.0, 3),),
            fixed=SystemParams(g_omega=200.0, g_kappa=500.0, J=2.0e5, eps_c=5e3, eps_e=5e3),
        )
        result = run_sweep(spec)
        statuses = [r.status for r in result.rows]
        assert any("pole" in s for s in statuses)
        assert result.hard_errors == 0

    def test_per_point_errors_recorded_in_row(self):
        # master_full with kappa_c = 0 cannot build the displacement-modified
        # collapse operator; the failure must land in the row, not abort
        spec = SweepSpec(
            axes=(AxisSpec("delta", -1.0, 1.0, 2),),
            fixed=SystemParams(kappa_c=0.0, g_kappa=500.0, g_omega=200.0, eps_c=1.0, eps_e=1.0),
            tiers=("master_full",),
            trunc_full=(2, 2, 2),
        )
        result = run_sweep(spec)
        assert len(result.rows) == 2
        assert all(r.status.startswith("error") for r in result.rows)
        assert result.hard_errors == 2

    def test_csv_schema_and_empty_cells(self):
        spec = SweepSpec(
            axes=(AxisSpec("delta", -2.0e5, 0.0, 3),),
            fixed=SystemParams(g_omega=200.0, g_kappa=500.0, J=2.0e5, eps_c=5e3, eps_e=5e3),
        )
        csv_text = run_sweep(spec).to_csv()
        lines = csv_text.strip().split("\n")
        assert lines[0] == "delta,tier,g2_c,g2_e,n_c,n_e,status,residual"
        # the delta = -J row hits the g2_e bunching pole -> empty cell + status
        pole_line = [l for l in lines if "pole_JplusDeltaC" in l]
        assert pole_line and ",," in pole_line[0]

    def test_determinism_byte_identical(self):
        spec = parse_config(FULL)
        a = run_sweep(spec).to_csv()
        b = run_sweep(spec).to_csv()
        assert a == b

    def test_parallel_matches_serial(self):
        spec = SweepSpec(
            axes=(AxisSpec("delta", -3.0e5, 3.0e5, 7),),
            fixed=SystemParams(g_omega=200.0, g_kappa=500.0, J=2.0e5, eps_c=5e3, eps_e=5e3),
            tiers=("analytic", "master_effective"),
            trunc_effective=(4, 4),
        )
        serial = run_sweep(spec, threads=1).to_csv()
        parallel = run_sweep(spec, threads=3).to_csv()
        assert serial == parallel

    def test_master_effective_tier_values(self):
        spec = SweepSpec(
            axes=(AxisSpec("delta", -1.0e5, -1.0e5 + 1.0, 2),),
            fixed=SystemParams(g_omega=200.0, g_kappa=500.0, J=2.0e5, eps_c=5e3, eps_e=5e3),
            tiers=("master_effective",),
        )
        rows = run_sweep(spec).rows
        for r in rows:
            assert r.status == "ok"
            assert r.residual is not None and r.residual < 1e-10
            assert 0.9 < r.g2_c < 1.1  # flat region of the detuning sweep
            assert 0.0 < r.n_c < 1e-3

"""Bundled data: provenance, validity, and converter round-trip."""

import json

import pytest

from gridsched import (align_scenarios, load_system, peak_penetration,
                       validate_system)
from gridsched.data import bundled
from gridsched.rtscsv import convert_rts_csv
from gridsched.scenarios import (build_scenario_set, load_scenario_set,
                                 scenario_set_to_list, synth_wind_profiles)
from gridsched.topology import find_bridges


class TestToy3:
    def test_loads_and_validates(self):
        sys_obj = load_system(bundled("toy3.json"))
        assert validate_system(sys_obj).ok
        assert sys_obj.horizon == 4

    def test_scenarios_load_and_block_is_noop(self):
        raw = load_scenario_set(bundled("toy3_scenarios.json"), block_len=1)
        blocked = load_scenario_set(bundled("toy3_scenarios.json"), block_len=3)
        assert raw == blocked  # profiles are already block-constant


class TestRts24:
    def test_case_matches_csv_conversion(self):
        doc = convert_rts_csv(
            bus_csv=bundled("rts24_bus.csv"),
            branch_csv=bundled("rts24_branch.csv"),
            gen_csv=bundled("rts24_gen.csv"),
            res_csv=bundled("rts24_res.csv"),
            load_profile_csv=bundled("rts24_load_profile.csv"),
        )
        committed = json.loads(bundled("rts24.json").read_text())
        assert doc == committed

    def test_case_shape_and_validity(self):
        sys_obj = load_system(bundled("rts24.json"))
        assert validate_system(sys_obj).ok
        assert len(sys_obj.buses) == 24
        assert len(sys_obj.lines) == 38
        assert len(sys_obj.generators) == 32
        assert {w.bus_id for w in sys_obj.res_units} == {12, 16, 22}
        assert sys_obj.horizon == 24
        # the only radial branch is the one serving bus 7
        assert find_bridges(sys_obj) == {11}

    def test_scenarios_match_seeded_synthesis(self):
        profiles = synth_wind_profiles(seed=7, n_scenarios=5, horizon=24,
                                       res_ids=["w12", "w16", "w22"],
                                       mean_mw=295.0, amplitude_mw=170.0)
        scen = build_scenario_set(profiles, [1, 1, 1, 1, 1], block_len=3)
        committed = json.loads(bundled("rts24_scenarios.json").read_text())
        assert scenario_set_to_list(scen) == committed

    def test_base_case_penetration_near_thirty_percent(self):
        sys_obj = load_system(bundled("rts24.json"))
        scen = align_scenarios(
            sys_obj, load_scenario_set(bundled("rts24_scenarios.json")))
        assert 0.25 <= peak_penetration(sys_obj, scen) <= 0.35

    def test_peak_load_level(self):
        sys_obj = load_system(bundled("rts24.json"))
        peak = max(sys_obj.demand.system_load(t) for t in range(1, 25))
        assert peak == pytest.approx(2270, rel=0.01)


def test_missing_bundled_file():
    with pytest.raises(FileNotFoundError):
        bundled("nope.json")

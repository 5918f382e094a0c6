import math

import pytest

from rydberg_wkb.errors import ConfigurationError, ParameterError
from rydberg_wkb.params import (DATA_ENV_VAR, Channel, CoreRow, ModelParams, channels_for,
                                check_shipped_ratios, default_params_path, load_params,
                                parse_params)

GOOD = default_params_path().read_text()


def test_shipped_file_loads(rb):
    assert rb.Z == 37
    assert rb.alpha_c == pytest.approx(9.076)
    assert rb.alpha_fs == pytest.approx(1 / 137.036, rel=1e-6)
    assert len(rb.rows) == 4


def test_cutoffs_match_tabulated_products(rb):
    assert rb.rows[1].r_c == pytest.approx(0.0442825 / 0.029483, rel=1e-4)
    assert rb.rows[2].r_c == pytest.approx(0.2495720 / 0.051262, rel=1e-4)


def test_a3_scaling_applied_once(rb):
    assert rb.row(0).a3 == pytest.approx(0.814 * rb.rows[0].a3, rel=1e-15)
    assert rb.row(2).a3 == pytest.approx(0.914 * rb.rows[2].a3, rel=1e-15)
    assert rb.row(1).a3 == rb.rows[1].a3
    assert rb.row(3).a3 == rb.rows[3].a3


def test_high_l_uses_last_row(rb):
    assert rb.row(7) == rb.row(3)


def test_with_merges_scaling(rb):
    p = rb.with_(a3_scale={0: 1.0})
    assert p.row(0).a3 == p.rows[0].a3
    assert p.a3_scale[2] == 0.914
    assert rb.a3_scale[0] == 0.814  # original untouched


def test_params_hashable_and_equal(rb):
    again = load_params()
    assert again == rb and hash(again) == hash(rb)
    assert rb.with_(alpha_fs=0.0) != rb


def test_missing_cutoff_names_l(rb):
    with pytest.raises(ConfigurationError, match="l=3"):
        rb.cutoff(3)


def test_unknown_key_is_named():
    bad = GOOD.replace("a4 = 0.19579987", "a5 = 0.19579987")
    with pytest.raises(ParameterError, match="'a5'.*l=0"):
        parse_params(bad)


def test_unparsable_number_is_named():
    bad = GOOD.replace("alpha_c = 9.0760", "alpha_c = nine")
    with pytest.raises(ParameterError, match="alpha_c"):
        parse_params(bad)


def test_missing_key_is_named():
    bad = GOOD.replace("r_c = 4.86851938", "")
    with pytest.raises(ParameterError, match="r_c.*l=2"):
        parse_params(bad)


def test_cutoff_window_enforced():
    bad = GOOD.replace("l2 = 0.2495720", "l2 = 0.5")
    with pytest.raises(ParameterError, match="window"):
        parse_params(bad)


def test_ratio_check_on_shipped_file(tmp_path):
    bad = GOOD.replace("l1 = 0.0442825", "l1 = 0.05")
    params = parse_params(bad)
    with pytest.raises(ParameterError, match="ratio"):
        check_shipped_ratios(params)
    # an explicit path skips the shipped-file ratio check
    path = tmp_path / "custom.ini"
    path.write_text(bad)
    assert load_params(path).cutoff(1) == 0.05


def test_unreadable_file_reports_path(tmp_path):
    with pytest.raises(ParameterError, match="missing.ini"):
        load_params(tmp_path / "missing.ini")


def test_data_dir_env_var(tmp_path, monkeypatch):
    (tmp_path / "rb87.ini").write_text(GOOD)
    monkeypatch.setenv(DATA_ENV_VAR, str(tmp_path))
    assert default_params_path() == tmp_path / "rb87.ini"
    assert load_params() == parse_params(GOOD)


@pytest.mark.parametrize("kwargs", [
    dict(Z=0),
    dict(alpha_c=-1.0),
    dict(alpha_fs=1.5),
    dict(rows=(CoreRow(1, 1, 0, 0, 0.0),)),
])
def test_invariants(kwargs):
    base = dict(Z=37, rows=(CoreRow(1, 1, 0, 0, 1.0),), alpha_c=1.0)
    base.update(kwargs)
    with pytest.raises(ParameterError):
        ModelParams(**base)


def test_pure_coulomb_override():
    h = ModelParams.pure_coulomb()
    assert h.Z == 1 and h.alpha_c == 0
    assert h.cutoff(3) > 0


class TestChannel:
    def test_labels(self):
        assert Channel(0, 0.5).label == "S1/2"
        assert Channel(2, 2.5).label == "D5/2"

    def test_so_default_per_l(self):
        assert not Channel(0, 0.5, include_so=True).include_so
        assert Channel(1, 0.5).include_so and Channel(2, 1.5).include_so
        assert not Channel(3, 2.5).include_so
        assert Channel(3, 2.5, include_so=True).include_so

    @pytest.mark.parametrize("l,j", [(0, 1.5), (1, 1.0), (2, 0.5), (-1, 0.5)])
    def test_rejects_bad_quantum_numbers(self, l, j):
        with pytest.raises(ConfigurationError):
            Channel(l, j)

    def test_channels_for(self):
        assert [c.j for c in channels_for(0)] == [0.5]
        assert [c.j for c in channels_for(2)] == [1.5, 2.5]
        assert all(not c.langer for c in channels_for(1, langer=False))


def test_alpha_default():
    p = ModelParams(Z=1, rows=(CoreRow(1, 1, 0, 0, 1.0),), alpha_c=0.0)
    assert math.isclose(p.alpha_fs, 1 / 137.036)

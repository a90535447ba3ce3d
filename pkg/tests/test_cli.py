import json

import pytest

from flagopp import cli, spectra


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_quotient_report_contains_matrix(capsys, tmp_path):
    code, out = run_cli(capsys, "quotient", "A:3:2", "--no-cache")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["status"] == "pass"
    byname = {c["name"]: c for c in rep["checks"]}
    assert byname["closed_form_matrix"]["actual"] == [
        [0, 0, 0, 64], [0, 0, 32, 32], [0, 16, 16, 32], [8, 8, 16, 32]]
    assert byname["closed_form_matrix"]["provenance"] == "paper"
    assert byname["empirical_equals_closed_form"]["status"] == "pass"


def test_reports_are_byte_identical(capsys):
    code1, out1 = run_cli(capsys, "eigvec", "B:2:2:2:sp", "--no-cache")
    code2, out2 = run_cli(capsys, "eigvec", "B:2:2:2:sp", "--no-cache")
    assert code1 == code2 == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert rep["timing_s"] is None


def test_timing_flag(capsys):
    _, out = run_cli(capsys, "enumerate", "A:3:2", "--no-cache", "--timing")
    assert json.loads(out)["timing_s"] is not None


def test_multiplicity_discrepancy_surface(capsys):
    code, out = run_cli(capsys, "multiplicity", "B:2:2:2:sp", "--empirical",
                        "--no-cache")
    assert code == 0
    byname = {c["name"]: c for c in json.loads(out)["checks"]}
    assert byname["closed_form_total"]["actual"] == 18
    assert byname["table4_total"]["actual"]["value"] == 36
    assert byname["table4_agrees_with_theorem"]["status"] == "flagged"
    assert byname["empirical_nullity"]["actual"] == 18
    assert byname["empirical_matches_a_source"]["actual"] == "theorem"


def test_csv_format(capsys):
    code, out = run_cli(capsys, "scheme", "A:3:2", "--format", "csv", "--no-cache")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "instance,suite,check,status,expected,actual,provenance"
    assert any(line.startswith("A:3:2,scheme,rank_E1_equals_generic_degree,pass")
               for line in lines)


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out = run_cli(capsys, "spanning", "B:2:2:2:sp", "--no-cache",
                        "--out", str(target))
    assert code == 0 and out == ""
    rep = json.loads(target.read_text())
    byname = {c["name"]: c for c in rep["checks"]}
    assert byname["spanning_rank"]["actual"] == 18


def test_usage_errors(capsys):
    assert cli.main(["quotient", "Z:1:1"]) == 1
    assert cli.main(["quotient", "B:2:9:2:sp"]) == 1
    assert cli.main(["nonsense", "A:3:2"]) == 1
    assert cli.main(["quotient", "D:4:2", "--jobs", "0"]) == 1
    # empirical nullity beyond the dense budget is a parameter error
    capsys.readouterr()


def test_check_failure_exit_code(capsys, monkeypatch):
    # sabotage the closed form so the empirical comparison fails honestly
    original = spectra._quotient_closed

    def wrong(g):
        rows = [list(r) for r in original(g)]
        rows[0][-1] += 1
        return tuple(tuple(r) for r in rows)

    monkeypatch.setattr(spectra, "_quotient_closed", wrong)
    code, out = run_cli(capsys, "quotient", "A:3:2", "--no-cache")
    assert code == 2
    assert json.loads(out)["status"] == "fail"


def test_cache_roundtrip(capsys, tmp_path):
    cache = tmp_path / "cache"
    code, out1 = run_cli(capsys, "enumerate", "B:2:4:2:ell",
                         "--cache-dir", str(cache))
    assert code == 0
    files = list(cache.glob("flags-*.npz"))
    assert len(files) == 1
    # second run loads from the sidecar and reproduces the report
    from flagopp.geometry import _GEOMETRY_CACHE
    _GEOMETRY_CACHE.pop("B:2:4:2:ell", None)
    code, out2 = run_cli(capsys, "enumerate", "B:2:4:2:ell",
                         "--cache-dir", str(cache))
    assert code == 0 and out1 == out2


def test_report_all_small(capsys):
    code, out = run_cli(capsys, "report-all", "B:2:4:2:ell", "--no-cache")
    assert code == 0
    rep = json.loads(out)
    names = [c["name"] for c in rep["checks"]]
    for expected in ("point_count", "empirical_equals_closed_form",
                     "lifted_eigen_identity", "spanning_rank",
                     "closed_form_total"):
        assert expected in names
    assert rep["status"] == "pass"


def test_jobs_recorded(capsys):
    _, out = run_cli(capsys, "enumerate", "A:3:2", "--no-cache", "--jobs", "3")
    assert json.loads(out)["jobs"] == 3

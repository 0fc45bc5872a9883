import json

import numpy as np
import pytest

from ebrank.channel import transpose_z
from ebrank.cli import main
from ebrank.io import channel_to_json, vector_to_json
from ebrank.sic import Fiducial, weyl_orbit

S3 = np.sqrt(3)
FID2 = np.array([np.sqrt(3 + S3), np.exp(1j * np.pi / 4) * np.sqrt(3 - S3)]) / np.sqrt(6)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_verify_sic_closed_form_fiducial(tmp_path, capsys):
    path = write(tmp_path, "f.json", {"d": 2, "fiducial": vector_to_json(FID2)})
    code, rep = run(capsys, "verify-sic", path)
    assert code == 0 and rep["pass"]
    assert rep["results"]["angles"]["angle_check"]["tol"] == 1e-8
    assert set(rep) >= {"command", "params", "results", "toolkit_version", "seed", "wall_time_ms"}


def test_verify_sic_perturbed_fails(tmp_path, capsys):
    rng = np.random.default_rng(0)
    w = FID2 + 1e-3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    w /= np.linalg.norm(w)
    path = write(tmp_path, "p.json", {"fiducial": vector_to_json(w)})
    code, rep = run(capsys, "verify-sic", path)
    assert code == 1
    assert rep["results"]["angles"]["max_angle_dev"] > 1e-5


def test_verify_sic_non_unit_fiducial_is_failure_not_crash(tmp_path, capsys):
    path = write(tmp_path, "n.json", {"fiducial": vector_to_json(1.01 * FID2)})
    code, rep = run(capsys, "verify-sic", path)
    assert code == 1
    assert rep["results"]["symmetric_decomposition"]["pass"] is False


def test_verify_sic_vector_list(tmp_path, capsys):
    vs = weyl_orbit(Fiducial(2, FID2)).vectors
    path = write(tmp_path, "v.json", {"vectors": [vector_to_json(v) for v in vs]})
    code, _ = run(capsys, "verify-sic", path, "--d", "2")
    assert code == 0


def test_verify_sic_input_errors(tmp_path, capsys):
    bad = write(tmp_path, "b.json", {"vectors": [vector_to_json(FID2)] * 3})
    assert run(capsys, "verify-sic", bad)[0] == 2
    assert run(capsys, "verify-sic", str(tmp_path / "missing.json"))[0] == 2
    junk = tmp_path / "j.json"
    junk.write_text("[1, 2")
    assert run(capsys, "verify-sic", str(junk))[0] == 2
    good = write(tmp_path, "g.json", {"fiducial": vector_to_json(FID2)})
    assert run(capsys, "verify-sic", good, "--d", "3")[0] == 2


def test_scan_d2(capsys):
    code, rep = run(capsys, "scan", "--d", "2", "--t-max", "1/3", "--steps", "34")
    assert code == 0
    rows = rep["results"]["rows"]
    assert len(rows) == 34 and rep["results"]["mode"] == "closed_form"
    assert max(r["choi_distance"]["value"] for r in rows) <= 1e-9
    assert set(rows[0]) >= {"t", "choi_distance", "tp_residual", "angle_min", "angle_max"}
    assert rows[-1]["angle_max"] == pytest.approx(1 / 3, abs=1e-9)


def test_scan_d3(capsys):
    code, rep = run(capsys, "scan", "--d", "3", "--t-max", "1/4", "--steps", "26")
    assert code == 0
    assert max(r["choi_distance"]["value"] for r in rep["results"]["rows"]) <= 1e-9


def test_scan_d4_search_mode(capsys):
    code, rep = run(capsys, "scan", "--d", "4", "--t-min", "1/5", "--t-max", "1/5", "--steps", "1",
                    "--restarts", "2")
    assert rep["results"]["mode"] == "search"
    row = rep["results"]["rows"][0]
    assert row["K"] == 16
    assert code == (0 if row["choi_distance"]["pass"] else 1)


def test_scan_invalid_range(capsys):
    assert run(capsys, "scan", "--d", "2", "--t-min", "0.2", "--t-max", "0.1")[0] == 2
    assert run(capsys, "scan", "--d", "2", "--t-max", "0.5")[0] == 2
    assert run(capsys, "scan", "--d", "2", "--steps", "0")[0] == 2
    assert run(capsys, "scan", "--d", "2", "--t-max", "abc")[0] == 2
    assert run(capsys, "scan", "--d", "5", "--t-min", "0.1", "--t-max", "0.1", "--k", "0")[0] == 2


def test_mub(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, rep = run(capsys, "mub", "--d", "3", "--out-witness", str(out))
    assert code == 0
    assert rep["results"]["witness_size"]["value"] == 12
    assert rep["results"]["channel_distance"]["value"] <= 1e-9
    assert len(json.loads(out.read_text())["witness"]["pairs"]) == 12
    assert run(capsys, "mub", "--d", "4")[0] == 2


def test_channel_info_tz3(capsys):
    code, rep = run(capsys, "channel-info", "TZ:3")
    assert code == 0
    assert rep["results"]["choi_rank"] == 6 and rep["results"]["ppt"] is True


def test_channel_info_depolarizing(capsys):
    _, rep = run(capsys, "channel-info", "depolarizing:2:0.5")
    assert rep["results"]["classification"]["is_eb"] is False
    _, rep = run(capsys, "channel-info", "depolarizing:2:1/3")
    assert rep["results"]["classification"] == {"is_channel": True, "is_transpose_channel": True, "is_eb": True}
    _, rep = run(capsys, "channel-info", "depolarizing:2:-1/2")
    assert rep["results"]["completely_positive"] is False


def test_channel_info_from_file(tmp_path, capsys):
    path = write(tmp_path, "c.json", channel_to_json(transpose_z(2)))
    code, rep = run(capsys, "channel-info", path)
    assert code == 0 and rep["results"]["choi_rank"] == 3


@pytest.mark.parametrize("spec", ["Z", "Z:x", "depolarizing:2", "TZ:1", "nothing"])
def test_bad_named_channels(capsys, spec):
    assert run(capsys, "channel-info", spec)[0] == 2


def test_decompose(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, rep = run(capsys, "decompose", "Z:2", "--k", "4", "--trace", str(trace))
    assert code == 0
    res = rep["results"]
    assert res["residual"]["value"] <= 1e-8
    assert res["equiangular"]["angle_check"]["pass"]
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    assert lines and {"iter", "objective", "step"} <= set(lines[0])


def test_decompose_failure_exit_code(capsys):
    code, rep = run(capsys, "decompose", "Z:2", "--k", "3", "--restarts", "2")
    assert code == 1 and rep["results"]["converged"] is False


def test_decompose_non_psd_target(capsys):
    assert run(capsys, "decompose", "depolarizing:2:-0.9", "--k", "4")[0] == 2


def test_fiducial(capsys):
    code, rep = run(capsys, "fiducial", "--d", "3")
    assert code == 0
    assert rep["results"]["verify_sic"]["sic_povm"]["pass"]


def test_reports_are_reproducible(capsys, tmp_path):
    out = tmp_path / "r.json"
    _, a = run(capsys, "decompose", "Z:2", "--k", "4", "--seed", "9", "--out", str(out))
    _, b = run(capsys, "decompose", "Z:2", "--k", "4", "--seed", "9")
    a.pop("wall_time_ms"), b.pop("wall_time_ms")
    assert a == b
    assert json.loads(out.read_text())["results"] == a["results"]
    assert a["seed"] == 9


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["bogus"]) == 2
    assert main(["mub"]) == 2
    assert main(["decompose", "Z:2", "--restarts", "0"]) == 2
    capsys.readouterr()

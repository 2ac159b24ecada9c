import io
import json
import subprocess
import sys

import pytest

from ncpb.cli import run


def call(argv, stdin_text=""):
    out = io.StringIO()
    code = run(argv, stdin=io.StringIO(stdin_text), stdout=out)
    return code, json.loads(out.getvalue())


def body(report):
    return {k: v for k, v in report.items() if k != "timing"}


def gallery_json(name, *params):
    argv = ["gallery", name]
    for p in params:
        argv += ["--param", p]
    code, rep = call(argv)
    assert code == 0
    return json.dumps(rep)


def test_gallery_heisenberg_pipeline():
    code, rep = call(["check-ncp"], gallery_json("heisenberg"))
    assert code == 0
    assert rep["verdict"] == "ncp" and rep["trivial"] == "not-trivial"
    assert rep["certificate"]["shift"] == [1, 0]
    assert rep["gallery"] == "heisenberg"
    assert rep["schema_version"] == 1 and len(rep["inputs"]["sha256"]) == 64
    assert rep["provenance"]["verdict"] == "exact"


def test_pipeline_through_real_processes():
    g = subprocess.run([sys.executable, "-m", "ncpb.cli", "gallery", "heisenberg"], capture_output=True, check=True)
    c = subprocess.run([sys.executable, "-m", "ncpb.cli", "check-ncp"], input=g.stdout, capture_output=True)
    assert c.returncode == 0
    rep = json.loads(c.stdout)
    assert (rep["verdict"], rep["trivial"]) == ("ncp", "not-trivial")


def test_invert_monomial():
    code, rep = call(["invert"], '{"coeffs":[{"k":[0,0],"re":1,"im":0}]}')
    assert code == 0 and rep["tag"] == "invertible"
    assert rep["certificate"]["kind"] == "monomial"


def test_invert_unknown_exit_two():
    code, rep = call(["invert"], '{"coeffs":[{"k":[1,0],"re":1,"im":0},{"k":[0,1],"re":1,"im":0}]}')
    assert code == 2 and rep["tag"] == "unknown"


def test_malformed_json_reports_position():
    text = '{"coeffs": [\n  {"k": [0, 0], "re": 1\n}'
    code, rep = call(["invert"], text)
    assert code == 1
    pos = rep["error"]["position"]
    assert (pos["line"], pos["column"], pos["offset"]) == (3, 2, len(text))
    code, rep = call(["invert"], '{"coeffs": [\n  {"k": [0 0]}]}')
    assert rep["error"]["position"]["line"] == 2 and rep["error"]["position"]["column"] == 12


def test_missing_field_is_input_error():
    code, rep = call(["mul"], '{"a": {"coeffs": []}}')
    assert code == 1 and "error" in rep


def test_localize_zero_weight(tmp_path):
    system = tmp_path / "system.json"
    system.write_text(gallery_json("circle-qt-bundle"))
    zero = tmp_path / "zero.json"
    zero.write_text('{"values": [0, 0, 0, 0, 0, 0]}')
    code, rep = call(["localize", "--f", str(zero), str(system)])
    assert code == 0 and rep["zero_system"] is True
    one = tmp_path / "one.json"
    one.write_text('{"values": [1, 1, 1, 1, 1, 1]}')
    code, rep = call(["localize", "--f", str(one), str(system)])
    assert code == 0 and rep["zero_system"] is False and rep["support"] == [0, 1, 2, 3, 4, 5]


def test_localize_algebra_element(tmp_path):
    from ncpb.findim import dual_numbers

    alg = json.dumps(dual_numbers().to_json())
    el = tmp_path / "eps.json"
    el.write_text("[0, 1]")
    code, rep = call(["localize", "--element", str(el)], alg)
    assert code == 0 and rep["spectrum"] == [] and rep["zero_system"]


def test_mul_star_act():
    a = {"coeffs": [{"k": [1, 0], "re": 1, "im": 0}]}
    b = {"coeffs": [{"k": [0, 1], "re": 1, "im": 0}]}
    code, rep = call(["mul"], json.dumps({"theta": "1/4", "a": a, "b": b}))
    assert code == 0
    assert rep["product"]["coeffs"] == [{"k": [1, 1], "re": 1.0, "im": 0.0}]
    code, rep = call(["mul"], json.dumps({"theta": "1/4", "a": b, "b": a}))
    (c,) = rep["product"]["coeffs"]
    assert abs(c["re"]) < 1e-15 and abs(c["im"] + 1) < 1e-15
    code, rep = call(["star"], json.dumps({"theta": "1/4", **a}))
    assert rep["star"]["coeffs"] == [{"k": [-1, 0], "re": 1.0, "im": 0.0}]
    code, rep = call(["act"], json.dumps({"t": ["1/2", 0], "element": {"theta": "1/3", **a}}))
    assert rep["result"]["coeffs"][0]["re"] == -1.0


def test_radical_and_characters():
    from ncpb.findim import diagonal_algebra, dual_numbers

    code, rep = call(["radical"], json.dumps(dual_numbers().to_json()))
    assert code == 0 and rep["radical_dim"] == 1 and rep["quotient_dim"] == 1 and rep["provenance"] == "exact"
    code, rep = call(["characters"], json.dumps(diagonal_algebra(3).to_json()))
    assert code == 0 and rep["count"] == 3


def test_cover_and_dot():
    code, rep = call(["cover", "--dot"], gallery_json("c2-swap"))
    assert code == 0 and rep["sheets"] == 2 and rep["components"] == 1
    assert rep["monodromy"][0]["perm"] == [1, 0]
    assert rep["dot"].startswith("graph covering")


def test_homology_and_abelianize():
    code, rep = call(["h"], gallery_json("qt-bundle"))
    assert code == 0
    assert [g["betti"] for g in rep["homology"]] == [1, 2, 1]
    heis = {"generators": 3, "relators": [[2, 3, -2, -3], [1, 2, -1, -3, -2], [1, 3, -1, -3]], "names": ["t", "a", "b"]}
    code, rep = call(["abelianize"], json.dumps(heis))
    assert rep["abelianization"] == {"rank": 2, "torsion": []}
    code, rep = call(["abelianize"], gallery_json("heisenberg"))
    assert rep["abelianization"]["rank"] == 2


def test_check_trivial_exit_codes():
    code, rep = call(["check-trivial"], gallery_json("nctorus"))
    assert code == 0 and rep["verdict"] == "trivial"
    code, rep = call(["check-trivial"], gallery_json("chern-qt-bundle"))
    assert code == 0 and rep["verdict"] == "not-trivial" and rep["certificate"]["h2_pairings"] == [[1, 0]]


def test_unknown_verdict_exit_two():
    from ncpb import simbase
    from ncpb.bundle import FlatAlgebraBundle, NcTorusFiber, PhaseLattice
    from ncpb.exactnum import PhaseQ
    from ncpb.nctorus import ThetaMatrix

    th = ThetaMatrix.zero(2)
    g = PhaseLattice(((-1, 0), (0, 1)), (PhaseQ("1/5"), PhaseQ("1/2")), th)
    B = FlatAlgebraBundle(simbase.circle(4), NcTorusFiber(th, [[0, 1]]), {(3, 0): g})
    code, rep = call(["check-trivial"], json.dumps(B.to_json()))
    assert code == 2 and rep["verdict"] == "unknown"


def test_reconstruct():
    code, rep = call(["reconstruct"], gallery_json("heisenberg"))
    assert code == 0 and rep["free"] and rep["abelianization"]["rank"] == 2


def test_gallery_params_and_listing():
    code, rep = call(["gallery"])
    assert "heisenberg" in rep["available"]
    code, rep = call(["check-trivial"], gallery_json("circle-qt-bundle", 'holonomy=["1/2", "0"]'))
    assert rep["verdict"] == "not-trivial"
    code, rep = call(["gallery", "nope"])
    assert code == 1


def test_seed_flag_and_env(monkeypatch):
    code, rep = call(["--seed", "7", "gallery", "heisenberg"])
    assert rep["seed"] == 7
    monkeypatch.setenv("NCPB_SEED", "11")
    code, rep = call(["gallery", "heisenberg"])
    assert rep["seed"] == 11
    code, rep = call(["gallery", "heisenberg", "--seed", "3"])
    assert rep["seed"] == 3


def test_tol_flag():
    code, rep = call(["--tol", "1e-6", "invert"], '{"coeffs":[{"k":[0,0],"re":2,"im":0}]}')
    assert rep["tol"] == 1e-6
    from ncpb.exactnum import tolerance

    assert tolerance() == 1e-9


@pytest.mark.parametrize("argv", [["check-ncp"], ["cover"], ["reconstruct"]])
def test_seeded_determinism(argv):
    name = "c2-swap" if argv == ["cover"] else "heisenberg"
    src = gallery_json(name)
    _, a = call(argv, src)
    _, b = call(argv, src)
    assert json.dumps(body(a)) == json.dumps(body(b))


def test_reports_reparse_to_equal_values():
    for argv, name in [(["check-ncp"], "chern-qt-bundle"), (["cover"], "c2-swap"), (["gallery", "equivariant"], None)]:
        _, rep = call(argv, gallery_json(name) if name else "")
        text = json.dumps(rep)
        assert json.loads(text) == rep
    # gallery output rebuilds the same system
    from ncpb.speclocal import system_from_json

    rep = json.loads(gallery_json("chern-qt-bundle"))
    assert system_from_json(rep["system"]).to_json() == rep["system"]

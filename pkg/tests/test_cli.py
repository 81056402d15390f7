import json
import subprocess
import sys

import numpy as np
import pytest

from fktorsion import serialize, testing
from fktorsion.cli import main
from fktorsion.errors import ParseError
from fktorsion.hilbert_complex import conformal_family
from fktorsion.index_density import form, form_matrix, zero_form_matrix
from fktorsion.vn_core import make_algebra, module, op


@pytest.fixture
def run(capsys):
    def _run(argv):
        rc = main(argv)
        return rc, capsys.readouterr().out
    return _run


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(serialize.canonical_dumps(obj))
    return str(p)


def diag_op(values, factors=((1, 1.0),)):
    alg = make_algebra(list(factors))
    m = module(alg, [len(values)])
    return op(m, m, [np.diag(np.asarray(values, dtype=complex))])


# ------------------------------------------------------- canonical writer

def test_canonical_dumps_floats_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = float(rng.standard_normal() * 10.0 ** rng.integers(-12, 12))
        assert float(json.loads(serialize.canonical_dumps(x))) == x


def test_canonical_dumps_sorts_keys_and_types():
    text = serialize.canonical_dumps({"b": 1, "a": 2.0, "c": [True, None, "x"]})
    assert text == '{"a":2.0,"b":1,"c":[true,null,"x"]}'


def test_canonical_dumps_rejects_non_finite():
    from fktorsion.errors import ValidationError
    with pytest.raises(ValidationError):
        serialize.canonical_dumps(float("nan"))


def test_loads_parse_error():
    with pytest.raises(ParseError):
        serialize.loads("{bad json")


# ------------------------------------------------------------ round trips

def test_op_round_trip():
    rng = np.random.default_rng(2)
    alg = testing.random_algebra(rng)
    dom = testing.random_module(rng, alg)
    cod = testing.random_module(rng, alg)
    t = testing.random_op(rng, dom, cod)
    back = serialize.op_from_json(json.loads(serialize.canonical_dumps(serialize.op_to_json(t))))
    assert back.domain == t.domain and back.codomain == t.codomain
    for a, b in zip(back.blocks, t.blocks):
        assert np.array_equal(a, b)


def test_complex_round_trip_with_metric():
    rng = np.random.default_rng(3)
    c, _ = testing.random_complex(rng, max_degrees=3, max_mult=3)
    mf = testing.random_exp_family(rng, c, scale=0.5)
    d = json.loads(serialize.canonical_dumps(serialize.complex_to_json(c, mf)))
    c2, mf2 = serialize.complex_from_json(d)
    assert c2.degrees == c.degrees and c2.p == c.p
    for a, b in zip(c2.diffs, c.diffs):
        for x, y in zip(a.blocks, b.blocks):
            assert np.array_equal(x, y)
    for a, b in zip(mf2.generators, mf.generators):
        for x, y in zip(a.blocks, b.blocks):
            assert np.array_equal(x, y)


def test_complex_without_metric_round_trip():
    rng = np.random.default_rng(4)
    c, _ = testing.random_complex(rng, max_degrees=2, max_mult=2)
    c2, mf2 = serialize.complex_from_json(json.loads(
        serialize.canonical_dumps(serialize.complex_to_json(c))))
    assert mf2 is None and c2.degrees == c.degrees


def test_holonomy_round_trip():
    rng = np.random.default_rng(5)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    gens = [testing.random_positive_invertible(rng, m) for _ in range(2)]
    rel = [[(0, 1), (1, -1)]]
    g2, r2 = serialize.holonomy_from_json(json.loads(
        serialize.canonical_dumps(serialize.holonomy_to_json(gens, rel))))
    assert r2 == [[(0, 1), (1, -1)]]
    assert np.array_equal(g2[0].blocks[0], gens[0].blocks[0])


def test_form_matrix_round_trip():
    w = form(4, {(1, 2): 1.5 + 0.5j, (3, 4): -2.0})
    z = form(4, {})
    fm = form_matrix(4, [[z, w], [-1.0 * w, z]])
    fm2 = serialize.form_matrix_from_json(json.loads(
        serialize.canonical_dumps(serialize.form_matrix_to_json(fm))))
    assert fm2.dim2n == 4 and fm2.size == 2
    assert fm2.entries[0][1].distance(w) == 0.0


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("factors"),
    lambda d: d.pop("mults"),
    lambda d: d.pop("blocks"),
    lambda d: d["blocks"].append([]),
    lambda d: d["blocks"][0].append([[1.0, 0.0]]),
    lambda d: d["factors"].append([2]),
])
def test_op_schema_violations(mutate):
    t = diag_op([4.0, 9.0])
    d = json.loads(serialize.canonical_dumps(serialize.op_to_json(t)))
    mutate(d)
    with pytest.raises(ParseError):
        serialize.op_from_json(d)


def test_metric_type_must_be_exp():
    rng = np.random.default_rng(6)
    c, _ = testing.random_complex(rng, max_degrees=2, max_mult=2)
    mf = testing.random_exp_family(rng, c)
    d = serialize.complex_to_json(c, mf)
    d["metric"]["type"] = "polynomial"
    with pytest.raises(ParseError):
        serialize.complex_from_json(d)


# ------------------------------------------------------------ cli basics

def test_fkdet_example(run, tmp_path):
    path = write(tmp_path, "op.json", serialize.op_to_json(diag_op([4.0, 9.0])))
    rc, out = run(["fkdet", "--in", path])
    assert rc == 0
    assert json.loads(out) == {"det": 36.0}


def test_fkdet_singular_exits_2(run, tmp_path):
    path = write(tmp_path, "op.json", serialize.op_to_json(diag_op([4.0, 0.0])))
    rc, _ = run(["fkdet", "--in", path])
    assert rc == 2


def test_parse_failure_exits_2(run, tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    rc, _ = run(["fkdet", "--in", str(p)])
    assert rc == 2


def test_randol_c_record(run):
    rc, out = run(["randol", "--genus", "2", "--what", "C"])
    assert rc == 0
    rec = json.loads(out)
    assert abs(rec["value"] - (-0.338)) < 0.005
    assert rec["est_error"] < 1e-10 and rec["panels"] >= 10


def test_randol_zeta_flags(run):
    rc, out = run(["randol", "--genus", "2", "--what", "zeta", "--s", "0.0"])
    assert rc == 0
    assert abs(json.loads(out)["value"] + 1.0 / 3.0) < 1e-10


def test_randol_small_rmax_exits_3(run):
    rc, _ = run(["randol", "--genus", "2", "--what", "C", "--rmax", "2.6"])
    assert rc == 3


def test_randol_bad_genus_exits_2(run):
    rc, _ = run(["randol", "--genus", "0", "--what", "C"])
    assert rc == 2


def test_detline_metric_coefficient(run, tmp_path):
    path = write(tmp_path, "met.json",
                 serialize.op_to_json(diag_op([4.0, 1.0], factors=((2, 0.5),))))
    rc, out = run(["detline", "--in", path])
    assert rc == 0
    assert json.loads(out)["coefficient"] == pytest.approx(2.0 ** -0.5, rel=1e-14)


def _complex_instance(tmp_path, seed=0, scale=0.4):
    rng = np.random.default_rng(seed)
    c, _ = testing.random_complex(rng, max_degrees=3, max_mult=3)
    mf = testing.random_exp_family(rng, c, scale=scale)
    return write(tmp_path, "cx%d.json" % seed, serialize.complex_to_json(c, mf)), c, mf


def test_complex_validate(run, tmp_path):
    path, _, _ = _complex_instance(tmp_path)
    rc, out = run(["complex-validate", "--in", path])
    assert rc == 0
    rec = json.loads(out)
    assert rec["ok"] is True and rec["max_violation"] < 1e-10


def test_complex_validate_broken_exits_2(run, tmp_path):
    alg = make_algebra([(1, 1.0)])
    mods = [[1], [1], [1]]
    one = [[[[1.0, 0.0]]]]
    data = {"algebra": {"factors": [[1, 1.0]]}, "degrees": mods,
            "diffs": [one, one], "p": 0}
    p = tmp_path / "broken.json"
    p.write_text(json.dumps(data))
    rc, out = run(["complex-validate", "--in", str(p)])
    assert rc == 2
    assert json.loads(out)["ok"] is False


def test_torsion_sweep_rows_and_order(run, tmp_path):
    path, _, _ = _complex_instance(tmp_path)
    rc, out = run(["torsion", "--in", path,
                   "--u-min", "-0.5", "--u-max", "0.5", "--steps", "11"])
    assert rc == 0
    rows = [json.loads(line) for line in out.strip().split("\n")]
    assert len(rows) == 11
    us = [r["u"] for r in rows]
    assert us == sorted(us) and us[0] == -0.5 and us[-1] == 0.5
    assert all(set(r) == {"u", "zeta_prime0", "torsion_coeff", "anomaly"} for r in rows)


def test_constant_family_sweep_rows_identical(run, tmp_path):
    rng = np.random.default_rng(9)
    c, _ = testing.random_complex(rng, max_degrees=3, max_mult=3)
    from fktorsion.hilbert_complex import constant_family
    mf = constant_family(c.degrees)
    path = write(tmp_path, "const.json", serialize.complex_to_json(c, mf))
    rc, out = run(["torsion", "--in", path,
                   "--u-min", "-1.0", "--u-max", "1.0", "--steps", "5"])
    assert rc == 0
    lines = out.strip().split("\n")
    bodies = {line.split('"u"')[0] for line in lines}
    assert len(bodies) == 1  # all non-u fields byte-identical


def test_vary_gap_small(run, tmp_path):
    path, _, _ = _complex_instance(tmp_path, seed=1)
    rc, out = run(["vary", "--in", path, "--u", "0.1", "--h-step", "1e-4"])
    assert rc == 0
    rec = json.loads(out)
    assert rec["gap"] < 1e-6


def test_relative_sweep_constant_ratio(run, tmp_path):
    rng = np.random.default_rng(12)
    c1, _ = testing.random_complex(rng, max_degrees=3, max_mult=3)
    mults = [list(m.mults) for m in c1.degrees]
    c2, _ = testing.random_complex(rng, algebra=c1.algebra, mults=mults)
    data = {
        "first": serialize.complex_to_json(c1, conformal_family(c1.degrees, 0.6)),
        "second": serialize.complex_to_json(c2, conformal_family(c2.degrees, 0.6)),
    }
    path = write(tmp_path, "rel.json", data)
    rc, out = run(["relative", "--in", path,
                   "--u-min", "-0.5", "--u-max", "0.5", "--steps", "11"])
    assert rc == 0
    rows = [json.loads(line) for line in out.strip().split("\n")]
    assert len(rows) == 11
    assert [r["u"] for r in rows] == sorted(r["u"] for r in rows)
    ratios = [r["ratio"] for r in rows]
    assert max(ratios) - min(ratios) < 1e-6 * abs(ratios[0])


def test_holonomy_cli(run, tmp_path):
    rng = np.random.default_rng(14)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    g = testing.random_positive_invertible(rng, m)
    path = write(tmp_path, "hol.json",
                 serialize.holonomy_to_json([g, g], [[(0, 1), (1, -1)]]))
    rc, out = run(["holonomy", "--in", path])
    assert rc == 0
    rec = json.loads(out)
    assert rec["consistent"] is True and len(rec["values"]) == 2
    assert rec["values"][0] == rec["values"][1]


def test_density_cli_conventions(run, tmp_path):
    w2 = form(2, {(1, 2): 1.7})
    data = {
        "D": serialize.form_matrix_to_json(zero_form_matrix(2, 2)),
        "L": serialize.form_matrix_to_json(form_matrix(2, [[w2]])),
        "z_trace": 2.0,
        "r": 0.5,
    }
    path = write(tmp_path, "den.json", data)
    rc, out = run(["density", "--in", path, "--convention", "limit"])
    assert rc == 0
    assert json.loads(out)["value"] == [3.4, 0.0]
    rc, out = run(["density", "--in", path])
    assert rc == 0
    re_im = json.loads(out)["value"]
    import math
    pref = (2.0 / 1j) ** 0.5 * (4.0 * math.pi * 0.5) ** -0.5
    want = 2.0 * pref * 0.5 * 1.7
    assert abs(complex(re_im[0], re_im[1]) - want) < 1e-14


def test_output_files_byte_identical(run, tmp_path):
    path, _, _ = _complex_instance(tmp_path, seed=2)
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    for out in (out1, out2):
        rc, _ = run(["vary", "--in", path, "--u-min", "-0.2", "--u-max", "0.2",
                     "--steps", "5", "--out", str(out)])
        assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_csv_mirrors_numeric_fields(run, tmp_path):
    path, _, _ = _complex_instance(tmp_path, seed=3)
    rc, out = run(["torsion", "--in", path, "--u-min", "0.0", "--u-max", "0.2",
                   "--steps", "3", "--format", "csv"])
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "anomaly,torsion_coeff,u,zeta_prime0"
    assert len(lines) == 4
    assert all(len(line.split(",")) == 4 for line in lines[1:])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fktorsion", "randol", "--genus", "2", "--what", "C"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert abs(json.loads(proc.stdout)["value"] + 0.338) < 0.005

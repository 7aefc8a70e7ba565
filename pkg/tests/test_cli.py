import json

import numpy as np
import pytest

from oocdet.cli import main, parse_size

from conftest import random_spd, write_matrix

jsonschema = pytest.importorskip("jsonschema")

MEMDET_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "logabsdet", "sign", "n_b", "b",
                 "blocks_read", "blocks_written", "scratch_slots",
                 "wall_seconds"],
    "properties": {
        "schema_version": {"const": 1},
        "logabsdet": {"type": "number"},
        "sign": {"enum": [-1, 0, 1]},
        "n_b": {"type": "integer", "minimum": 1},
        "b": {"type": "integer", "minimum": 1},
        "blocks_read": {"type": "integer", "minimum": 0},
        "blocks_written": {"type": "integer", "minimum": 0},
        "scratch_slots": {"type": "integer", "minimum": 0},
        "wall_seconds": {"type": "number", "minimum": 0},
    },
}

FLODANCE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "c0", "nu", "sigma_hat", "L_hat",
                 "logdet_hat"],
    "properties": {
        "c0": {"type": "number"},
        "nu": {"type": "array", "items": {"type": "number"}},
        "sigma_hat": {"type": "number", "minimum": 0},
    },
}

PIPELINE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "command", "inputs", "outputs", "timing"],
    "properties": {
        "command": {"const": "pipeline"},
        "outputs": {
            "type": "object",
            "required": ["matrix", "memdet", "flodance", "rel_error"],
        },
    },
}


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize("text,expect", [
    ("1024", 1024), ("4K", 4096), ("2M", 2 << 20), ("1G", 1 << 30),
    ("8m", 8 << 20), ("1.5K", 1536), ("32MB", 32 << 20),
])
def test_parse_size(text, expect):
    assert parse_size(text) == expect


def test_gen_and_memdet_json(tmp_path, capsys):
    out = tmp_path / "m.mdm"
    code, gen = run_json(capsys, ["gen", "--kind", "spd-random", "--n", "48",
                                  "--seed", "3", "--out", str(out), "--json"])
    assert code == 0 and gen["m"] == 48 and gen["symmetry"] == "spd"
    code, payload = run_json(capsys, ["memdet", "--in", str(out), "--assume",
                                      "spd", "--num-blocks", "4", "--json"])
    assert code == 0
    jsonschema.validate(payload, MEMDET_SCHEMA)
    assert (payload["blocks_read"], payload["blocks_written"]) == (18, 8)
    assert payload["scratch_slots"] == 6


def test_memdet_max_mem_suffix(tmp_path, capsys, rng):
    path = tmp_path / "g.mdm"
    write_matrix(path, random_spd(rng, 64), "spd")
    code, payload = run_json(capsys, ["memdet", "--in", str(path), "--assume",
                                      "spd", "--max-mem", "4K", "--json"])
    assert code == 0
    assert payload["n_b"] > 1


def test_memdet_json_deterministic_apart_from_timing(tmp_path, capsys, rng):
    path = tmp_path / "g.mdm"
    write_matrix(path, random_spd(rng, 32), "spd")
    argv = ["memdet", "--in", str(path), "--assume", "spd",
            "--num-blocks", "3", "--json"]
    _, one = run_json(capsys, argv)
    _, two = run_json(capsys, argv)
    one.pop("wall_seconds"), two.pop("wall_seconds")
    assert one == two


def test_flodance_roundtrip(tmp_path, capsys, rng):
    path = tmp_path / "s.mdm"
    write_matrix(path, random_spd(rng, 80), "spd")
    prefix = tmp_path / "s.pfx"
    code = main(["memdet", "--in", str(path), "--assume", "spd",
                 "--num-blocks", "2", "--prefix-out", str(prefix)])
    capsys.readouterr()
    assert code == 0 and prefix.exists()
    code, payload = run_json(capsys, [
        "flodance", "--prefix", str(prefix), "--d", "1", "--n0", "5",
        "--ns", "70", "--q", "1", "--predict", "80",
        "--interval", "0.9", "--json"])
    assert code == 0
    jsonschema.validate(payload, FLODANCE_SCHEMA)
    assert payload["interval"]["lower"] <= payload["logdet_hat"] \
        <= payload["interval"]["upper"]


def test_flodance_trace_out(tmp_path, capsys, rng):
    path = tmp_path / "s.mdm"
    write_matrix(path, random_spd(rng, 40), "spd")
    prefix = tmp_path / "s.pfx"
    main(["memdet", "--in", str(path), "--assume", "spd", "--num-blocks", "1",
          "--prefix-out", str(prefix)])
    trace = tmp_path / "trace.csv"
    code = main(["flodance", "--prefix", str(prefix), "--d", "1", "--n0", "2",
                 "--ns", "35", "--q", "0", "--predict", "40",
                 "--trace-out", str(trace)])
    capsys.readouterr()
    assert code == 0
    lines = trace.read_text().strip().splitlines()
    assert lines[0] == "n,log_ratio"
    assert len(lines) == 40  # header + n = 2..40


def test_slq_and_blockdiag_json(tmp_path, capsys, rng):
    path = tmp_path / "s.mdm"
    write_matrix(path, random_spd(rng, 36), "spd")
    code, payload = run_json(capsys, ["slq", "--in", str(path), "--lanczos",
                                      "12", "--samples", "8", "--seed", "4",
                                      "--json"])
    assert code == 0 and "logdet_estimate" in payload
    code, payload = run_json(capsys, ["blockdiag", "--in", str(path),
                                      "--d", "6", "--json"])
    assert code == 0 and "logabsdet_estimate" in payload


def test_cost_examples(capsys):
    code, payload = run_json(capsys, ["cost", "--m", "12", "--nb", "3",
                                      "--case", "gen", "--json"])
    assert code == 0 and payload["total_flops"] == 506
    code, payload = run_json(capsys, ["cost", "--m", "12", "--nb", "4",
                                      "--case", "sym", "--json"])
    assert code == 0 and payload["scratch_slots"] == 6


def test_identity_pipeline(tmp_path, capsys):
    # zero length-scale RBF degenerates to the identity: exact zero error
    code, payload = run_json(capsys, [
        "pipeline", "--kind", "rbf", "--n", "60", "--alpha", "0",
        "--seed", "1", "--out", str(tmp_path / "i.mdm"), "--assume", "spd",
        "--num-blocks", "1", "--n0", "2", "--ns", "50", "--q", "0", "--json"])
    assert code == 0
    jsonschema.validate(payload, PIPELINE_SCHEMA)
    assert payload["outputs"]["flodance"]["logdet_hat"] == 0.0
    assert payload["outputs"]["rel_error"] == 0.0


def test_pipeline_lmc_reports_error(tmp_path, capsys):
    code, payload = run_json(capsys, [
        "pipeline", "--kind", "matern-lmc", "--n", "100", "--d", "2",
        "--alpha", "0.1", "--nu", "1.5", "--seed", "2",
        "--out", str(tmp_path / "l.mdm"), "--assume", "sym",
        "--num-blocks", "2", "--n0", "10", "--ns", "80", "--q", "1", "--json"])
    assert code == 0
    assert payload["outputs"]["rel_error"] < 0.5


class TestExitCodes:
    def test_usage_error_is_2(self, capsys):
        assert main(["cost", "--m", "10", "--nb", "3"]) == 2
        capsys.readouterr()

    def test_numerical_error_is_3(self, tmp_path, capsys, rng):
        mat = rng.standard_normal((12, 12))
        mat = np.tril(mat) + np.tril(mat, -1).T - 20 * np.eye(12)
        path = tmp_path / "neg.mdm"
        write_matrix(path, mat, "spd")
        assert main(["memdet", "--in", str(path), "--assume", "spd",
                     "--num-blocks", "1"]) == 3
        capsys.readouterr()

    def test_io_error_is_4(self, tmp_path, capsys):
        assert main(["memdet", "--in", str(tmp_path / "missing.mdm"),
                     "--assume", "gen", "--num-blocks", "1"]) == 4
        capsys.readouterr()

    def test_prefix_out_rejected_for_generic(self, tmp_path, capsys, rng):
        path = tmp_path / "g.mdm"
        write_matrix(path, rng.standard_normal((8, 8)), "generic")
        assert main(["memdet", "--in", str(path), "--assume", "gen",
                     "--num-blocks", "1", "--prefix-out",
                     str(tmp_path / "p.pfx")]) == 2
        capsys.readouterr()

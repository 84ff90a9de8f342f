import json
import subprocess
import sys

import numpy as np
import pytest

from levyflow import cli
from levyflow.flow_model import write_flow_long


@pytest.fixture(scope="module")
def synth(tmp_path_factory):
    src = tmp_path_factory.mktemp("synth")
    assert cli.main(["synth", "--n", "40", "--moves", "100000", "--seed", "2", "--out", str(src)]) == 0
    return src


def geo(src):
    return ["--registry", str(src / "registry.csv"), "--distance", str(src / "distance.csv")]


def test_synth_outputs(synth):
    for name in ("registry.csv", "distance.csv", "flows.csv"):
        assert (synth / name).read_text().startswith("# levyflow-schema: ")
    assert json.loads((synth / "spec.json").read_text())["n_moves"] == 100000


def test_fit(tmp_path, synth, capsys):
    out = tmp_path / "o"
    rc = cli.main(["fit", *geo(synth), "--flow", f"{synth / 'flows.csv'},type=refugees,year=2010",
                   "--out", str(out), "--method", "loglog", "--width", "1000"])
    assert rc == 0
    doc = json.loads((out / "refugees_2010.fit.json").read_text())
    assert doc["method"] == "loglog-ols" and doc["width"] == 1000 and doc["year"] == 2010
    assert "beta=" in capsys.readouterr().out


def test_global_flags_before_subcommand(tmp_path, synth):
    out = tmp_path / "o"
    assert cli.main(["--width", "250", *geo(synth), "fit", "--flow", str(synth / "flows.csv"), "--out", str(out)]) == 0
    assert json.loads((out / "flows.fit.json").read_text())["width"] == 250


def test_out_env_var(tmp_path, synth, monkeypatch):
    monkeypatch.setenv("LEVYFLOW_OUT", str(tmp_path / "envout"))
    assert cli.main(["fit", *geo(synth), "--flow", str(synth / "flows.csv")]) == 0
    assert (tmp_path / "envout" / "flows.binned.csv").exists()


def test_missing_distance_exit_2(tmp_path, synth, capsys):
    rc = cli.main(["fit", "--registry", str(synth / "registry.csv"), "--distance", str(tmp_path / "no.csv"),
                   "--flow", str(synth / "flows.csv"), "--out", str(tmp_path)])
    assert rc == 2
    assert "distance matrix not found" in capsys.readouterr().err


def test_unknown_country_exit_2(tmp_path, synth, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("origin,destination,value\nC000,ZZZ,5\nC000,C001,3\n")
    args = ["fit", *geo(synth), "--flow", str(bad), "--out", str(tmp_path / "o")]
    assert cli.main(args) == 2
    assert "ZZZ" in capsys.readouterr().err


def test_computation_error_exit_1(tmp_path, synth, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("origin,destination,value\nC000,C001,0\n")
    assert cli.main(["fit", *geo(synth), "--flow", str(empty), "--out", str(tmp_path)]) == 1
    assert "total flow is zero" in capsys.readouterr().err


def test_series_and_extrapolation(tmp_path, synth):
    from levyflow import load_flow_matrix, load_registry

    reg = load_registry(synth / "registry.csv")
    base = load_flow_matrix(synth / "flows.csv", reg)
    specs = []
    for k, year in enumerate((2000, 2001, 2002, 2003)):
        p = tmp_path / f"m{year}.csv"
        write_flow_long(base.replace(values=base.values * (1.1 ** k)), p)
        specs += ["--flow", f"{p},type=migrants,year={year}"]
    out = tmp_path / "o"
    rc = cli.main(["series", *geo(synth), *specs, "--cutoff", "3000", "--extrapolate", "2010", "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "migrants.series.json").read_text())
    assert summary["cutoff_km"] == 3000 and summary["share_sd"] == pytest.approx(0.0, abs=1e-12)
    trend = json.loads((out / "migrants.exptrend.json").read_text())
    assert trend["k"] == pytest.approx(np.log(1.1), rel=1e-9)
    assert trend["extrapolations"][0]["year"] == 2010


def test_scenarios(tmp_path, synth):
    pop = tmp_path / "pop.csv"
    reg_codes = [ln for ln in (synth / "registry.csv").read_text().splitlines()[2:]]
    pop.write_text("country,pop\n" + "".join(f"{c},{i + 1}\n" for i, c in enumerate(reg_codes)))
    out = tmp_path / "o"
    base = ["scenarios", *geo(synth), "--flow", str(synth / "flows.csv"), "--out", str(out)]
    assert cli.main(base) == 0
    kinds = [c["kind"] for c in json.loads((out / "comparison.json").read_text())["scenarios"]]
    assert kinds == ["strict-flat", "dyad-distance"]
    assert cli.main([*base, "--population", str(pop), "--pop-weight", "product"]) == 0
    assert (out / "scenario_population.csv").exists()
    assert cli.main([*base, "--scenarios", "population"]) == 2


def test_index(tmp_path, synth):
    out = tmp_path / "o"
    f = synth / "flows.csv"
    rc = cli.main(["index", "--registry", str(synth / "registry.csv"), "--thm", f"{f},type=migrants",
                   "--thm", f"{f},type=tourists", "--thc", f"{f},type=phone,units=minutes",
                   "--weights", "3,2", "--out", str(out)])
    assert rc == 0
    prov = json.loads((out / "THA.provenance.json").read_text())
    assert prov["weights"] == [0.6, 0.4]
    assert cli.main(["index", "--registry", str(synth / "registry.csv"), "--thc", str(f), "--weights", "1",
                     "--out", str(out)]) == 2


def test_smooth(tmp_path, synth):
    out = tmp_path / "o"
    assert cli.main(["smooth", *geo(synth), "--flow", str(synth / "flows.csv"), "--bandwidth", "800",
                     "--grid-points", "150", "--out", str(out)]) == 0
    doc = json.loads((out / "flows.smooth-fit.json").read_text())
    assert doc["bandwidth"] == 800 and doc["degree"] == 2
    assert len((out / "flows.smooth.csv").read_text().splitlines()) == 152


def test_config_file_and_flag_override(tmp_path, synth):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(
        f"registry: {synth / 'registry.csv'}\n"
        f"distance: {synth / 'distance.csv'}\n"
        "width: 1000\nmethod: loglog\n"
        f"out: {tmp_path / 'cfgout'}\n"
        f"inputs:\n  - path: {synth / 'flows.csv'}\n    type: refugees\n    year: 2011\n"
    )
    assert cli.main(["fit", "--config", str(cfg), "--width", "500"]) == 0
    doc = json.loads((tmp_path / "cfgout" / "refugees_2011.fit.json").read_text())
    assert doc["width"] == 500 and doc["method"] == "loglog-ols"
    cfg.write_text("width: [1, 2\n")
    assert cli.main(["fit", "--config", str(cfg)]) == 2


def test_bad_config_values(tmp_path, synth):
    assert cli.main(["fit", *geo(synth), "--flow", str(synth / "flows.csv"), "--width", "-1"]) == 2
    assert cli.main(["fit", *geo(synth), "--flow", f"{synth / 'flows.csv'},colour=red"]) == 2
    assert cli.main(["fit", "--distance", str(synth / "distance.csv"), "--flow", str(synth / "flows.csv")]) == 2


def test_byte_reproducible_all_commands(tmp_path, synth):
    def run(out):
        common = [*geo(synth), "--flow", f"{synth / 'flows.csv'},type=t,year=2000", "--out", str(out)]
        for cmd in ("fit", "smooth", "scenarios"):
            assert cli.main([cmd, *common]) == 0
        assert cli.main(["synth", "--n", "20", "--moves", "999", "--out", str(out / "s")]) == 0
        return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}

    a, b = run(tmp_path / "a"), run(tmp_path / "b")
    assert a == b and len(a) > 10


def test_module_entry_point(synth):
    r = subprocess.run([sys.executable, "-m", "levyflow", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "levyflow" in r.stdout
    r = subprocess.run([sys.executable, "-m", "levyflow", "fit", "--registry", "nope.csv"], capture_output=True, text=True)
    assert r.returncode == 2

import importlib.util
import json
from pathlib import Path

import pytest

from sepmix import cli

ROOT = Path(__file__).resolve().parents[1]


def load(name):
    spec = importlib.util.spec_from_file_location(name, ROOT / "scripts" / f"{name}.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


@pytest.mark.parametrize("name,argv", [
    ("werner_sweep", ["--steps", "4"]),
    ("hidden_entanglement_demo", ["--runs", "2000"]),
    ("typicality_table", ["--m", "5,10"]),
])
def test_script_runs(name, argv, capsys):
    load(name).main(argv)
    assert capsys.readouterr().out


@pytest.mark.parametrize("name,verdict", [
    ("phi_mix", "ImproperlySeparable"),
    ("product_mix", "ProperlySeparable"),
    ("reduced_phi_mix", "SeparableUnknownComposition"),
])
def test_bundled_scenarios(name, verdict, capsys):
    assert cli.main(["scenario", str(ROOT / "scenarios" / f"{name}.json")]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == verdict

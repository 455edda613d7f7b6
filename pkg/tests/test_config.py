import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinlayer.config import ConfigError, ExperimentConfig

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
BASE = json.loads((CONFIGS / "coated_disk.json").read_text())


def _with(**changes):
    data = json.loads(json.dumps(BASE))
    data.update(changes)
    return data


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_bundled_configs_load(path):
    cfg = ExperimentConfig.load(path)
    assert cfg.build_curve().n_nodes == cfg.n_nodes


positive = st.floats(0.2, 5.0, allow_nan=False)
coefficients = st.lists(st.floats(-0.2, 0.2), max_size=3)


@given(
    mean=positive,
    cos=coefficients,
    n_half=st.integers(16, 128),
    ladder=st.lists(st.floats(1e-3, 0.5), min_size=2, max_size=5, unique=True),
    matrix=st.lists(st.lists(st.floats(-2, 2), min_size=2, max_size=2), min_size=2, max_size=2),
    tasks=st.lists(st.sampled_from(["solve", "certify_thm11", "check_jumps"]), min_size=1, max_size=3),
)
def test_round_trip(mean, cos, n_half, ladder, matrix, tasks):
    data = _with(thickness={"mean": mean, "cos": cos, "sin": []}, n_nodes=2 * n_half, epsilon_ladder=ladder,
                 background_field={"kind": "linear", "matrix": matrix, "offset": [0.0, 0.0]}, tasks=tasks)
    cfg = ExperimentConfig.from_dict(data)
    again = ExperimentConfig.from_dict(json.loads(cfg.dumps()))
    assert again == cfg and again.dumps() == cfg.dumps()


def test_round_trip_through_file(tmp_path):
    cfg = ExperimentConfig.load(CONFIGS / "kite_theorem11.json")
    (tmp_path / "c.json").write_text(cfg.dumps())
    assert ExperimentConfig.load(tmp_path / "c.json") == cfg


@pytest.mark.parametrize("data, field", [
    ({k: v for k, v in BASE.items() if k != "curve"}, "curve"),
    (_with(curve={"kind": "square"}), "curve.kind"),
    (_with(curve={"kind": "circle", "side": 2}), "curve"),
    (_with(epsilon_ladder=[0.1]), "epsilon_ladder"),
    (_with(epsilon_ladder=[0.1, -0.05]), "epsilon_ladder"),
    (_with(colour="red"), "<root>"),
    (_with(thresholds={"slope": 1.0}), "thresholds.slope"),
    (_with(materials={"background": [1, 1], "core": [3, 0.5], "layer": [5, 4]}), "materials"),
    (_with(materials={"background": [1, 1], "core": [1, -1], "layer": [5, 4]}), "materials.core"),
    (_with(n_nodes=129), "n_nodes"),
    (_with(tasks=["fly"]), "tasks[0]"),
    (_with(probes={"kind": "annulus", "inner": 0.5}), "probes.inner"),
    (_with(thickness={"mean": 0.0}), "thickness.mean"),
    (_with(background_field={"kind": "kelvin_point_source", "source": [3, 0], "column": 2}),
     "background_field.column"),
    (_with(n_nodes_per_epsilon=[64, 64]), "n_nodes_per_epsilon"),
])
def test_invalid_fields_are_named(data, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(data)
    assert str(info.value).startswith(f"{field}:")


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.load(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        ExperimentConfig.load(tmp_path / "bad.json")


def test_radial_amplitude_detection():
    assert ExperimentConfig.from_dict(BASE).radial_amplitude() == 1.0
    scaled = _with(background_field={"kind": "linear", "matrix": [[2, 0], [0, 2]]})
    assert ExperimentConfig.from_dict(scaled).radial_amplitude() == 2.0
    for change in (dict(curve={"kind": "circle", "radius": 1.0, "center": [0.1, 0.0]}),
                   dict(thickness={"mean": 1.0, "cos": [0.2]}),
                   dict(background_field={"kind": "linear", "matrix": [[1, 0.5], [0.5, 1]]}),
                   dict(curve={"kind": "ellipse", "a": 1.0, "b": 0.8})):
        assert ExperimentConfig.from_dict(_with(**change)).radial_amplitude() is None


def test_defaults_and_node_ladder():
    cfg = ExperimentConfig.from_dict(_with(n_nodes_per_epsilon=[64, 64, 128, 128]))
    assert cfg.node_ladder == {0.1: 64, 0.05: 64, 0.025: 128, 0.0125: 128}
    assert cfg.threshold("oracle") == 1e-8 and cfg.solve_epsilon == 0.2
    assert ExperimentConfig.from_dict(_with(epsilon=None)).solve_epsilon == 0.1
    assert cfg.material_triple().require_contrast
    trivial = _with(materials={"background": [2, 1.5], "core": [2, 1.5], "layer": [2, 1.5]})
    assert not ExperimentConfig.from_dict(trivial).material_triple().require_contrast


def test_schema_documents_every_field_and_threshold():
    from dataclasses import fields

    from thinlayer.config import DEFAULT_THRESHOLDS
    schema = json.loads((CONFIGS.parent / "docs" / "config_schema.json").read_text())
    assert set(schema["properties"]) == {f.name for f in fields(ExperimentConfig)}
    documented = schema["properties"]["thresholds"]["properties"]
    assert {k: v["default"] for k, v in documented.items()} == DEFAULT_THRESHOLDS

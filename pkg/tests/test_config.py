import json

import pytest

from twfront import config
from twfront.exceptions import ConfigError


def _err(text):
    with pytest.raises(ConfigError) as info:
        config.build_problem(config.loads(text))
    return info.value


def test_defaults_filled():
    cfg = config.loads("p: 2\ntheta: 0.5\n")
    assert cfg["diffusion"] == {"d0": 1.0, "alpha": 0.0, "beta": 0.0}
    assert cfg["reaction"]["g0"] == 1.0
    assert cfg["convection"]["coeffs"] == [0.0]


def test_reference_file(configs_dir):
    prob, cfg = config.load(configs_dir / "reference.yaml")
    assert prob.p == 2.0 and prob.theta == 0.5 and cfg["reaction"]["g0"] == 2.0


def test_json_is_accepted():
    cfg = config.loads(json.dumps({"p": 3, "theta": 0.4, "convection": {"coeffs": 0.2}}))
    assert cfg["convection"]["coeffs"] == [0.2]


def test_round_trip():
    cfg = config.loads("p: 2\ntheta: 0.5\nreaction: {g0: 3}\n")
    assert config.loads(config.dumps(cfg)) == cfg


@pytest.mark.parametrize(
    "text, key",
    [
        ("theta: 0.5\n", "p"),
        ("p: 2\n", "theta"),
        ("p: two\ntheta: 0.5\n", "p"),
        ("p: 2\ntheta: 0.5\ndiffusion: {d0: x}\n", "diffusion.d0"),
        ("p: 2\ntheta: 0.5\ndiffusion: {delta: 1}\n", "diffusion.delta"),
        ("p: 2\ntheta: 0.5\nreaction: 3\n", "reaction"),
        ("p: 2\ntheta: 0.5\nconvection: {coeffs: [1, a]}\n", "convection.coeffs[1]"),
        ("p: 2\ntheta: 0.5\nconvection: {coeffs: []}\n", "convection.coeffs"),
        ("p: 2\ntheta: 0.5\nextra: 1\n", "extra"),
        ("p: 0.5\ntheta: 0.5\n", "p"),
        ("p: 2\ntheta: 1.5\n", "theta"),
        ("p: 2\ntheta: 0.5\ndiffusion: {d0: -1}\n", "diffusion.d0"),
        ("p: 2\ntheta: 0.5\nreaction: {g0: -1}\n", "reaction.g0"),
        ("[1, 2]\n", "<root>"),
        ("p: [\n", "line"),
    ],
)
def test_errors_name_the_key(text, key):
    err = _err(text)
    assert err.key.startswith(key)
    assert key in str(err)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        config.load(tmp_path / "absent.yaml")
    assert info.value.key == "--config"

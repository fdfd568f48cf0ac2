import math
import pathlib

import numpy as np
import pytest

import dirachom

ROOT = pathlib.Path(__file__).resolve().parents[2]
QUICK = str(ROOT / "configs" / "quick.ini")


def test_shapes_and_mass():
    disk = dirachom.Shape.disk(1.0)
    assert disk.area() == pytest.approx(math.pi, rel=1e-12)
    assert dirachom.Shape.unit_square().area() == pytest.approx(1.0, rel=1e-12)
    m = dirachom.calibrated_mass(0.25, 1.0, disk, c=0.25)
    # m |D| = m_star |Y|
    assert m["m_value"] * m["inclusion_area"] == pytest.approx(0.25**2, rel=1e-12)


def test_free_fiber_matches_symbol():
    eps, m, theta = 0.5, 1.2, np.array([0.7, -1.1])
    ev = dirachom.free_fiber_eigenvalues(eps, m, theta, 2)
    expected = []
    for n1 in range(-2, 3):
        for n2 in range(-2, 3):
            k = theta + 2 * math.pi / eps * np.array([n1, n2])
            lam = math.sqrt(k @ k + m * m)
            expected += [lam, -lam]
    np.testing.assert_allclose(np.sort(ev), np.sort(expected), rtol=1e-12)
    h = dirachom.fiber_matrix(eps, m, dirachom.Shape.disk(1.0), 0.25, theta, 2)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-12)


def test_abstract_scheme_identity_and_bound():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    d = (a + a.conj().T) / 2
    same = dirachom.abstract_scheme(d, d)
    assert same["c"] == 0.0 and same["pass"]
    r = dirachom.abstract_scheme(d, d + 0.01 * np.eye(4))
    assert r["pass"] and r["difference"] <= r["bound"]


def test_fit_rate():
    eps = [0.5, 0.25, 0.125]
    fit = dirachom.fit_rate(eps, [e**2 for e in eps], [1.0, 1.0, 1.0])
    assert fit["slope"] == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(dirachom.FitError):
        dirachom.fit_rate([0.5], [0.1], [1.0])


def test_config_errors():
    cfg = dirachom.parse_config("[solver]\nN = 5\n")
    assert cfg["solver"]["N"] == "5"
    with pytest.raises(dirachom.ConfigError):
        dirachom.parse_config("[solver]\nbogus = 1\n")


def test_sweep_and_replay(tmp_path):
    csv = dirachom.run_sweep(QUICK, str(tmp_path / "sweep"))
    assert len(csv.strip().splitlines()) == 4
    identical, message = dirachom.replay(str(tmp_path / "sweep" / "manifest.json"), str(tmp_path / "again"))
    assert identical, message


def test_bound_helpers():
    disk = dirachom.Shape.disk(1.0)
    assert dirachom.payne_weinberger_bound(disk) == pytest.approx(math.pi**2 / 4)
    assert dirachom.steklov_lower_bound(1.0, 1.0) > 0

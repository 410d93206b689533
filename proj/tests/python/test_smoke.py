import math

import pytest

import retflow as rf


def kconv(m):
    return 10.0 * math.exp(-2.0 * m)


def test_constitutive_round_trip():
    fluid = rf.PowerLawFluid(k=1.0, m=0.5)
    assert rf.rate_from_stress(2.0, fluid) == pytest.approx(8.0)
    assert rf.stress_from_rate(8.0, fluid) == pytest.approx(2.0)
    for m in (0.3, 1.0, 2.0):
        f = rf.PowerLawFluid(k=0.7, m=m)
        for s in (-10.0, -0.1, 0.0, 3.0):
            back = rf.stress_from_rate(rf.rate_from_stress(s, f), f)
            assert back == pytest.approx(s, abs=1e-12, rel=1e-12)


def test_analytic_values():
    assert rf.a_coeff(m=0.7, k=kconv(0.7)) == pytest.approx(
        0.37070666172513556, rel=1e-13
    )
    assert rf.case1_solution(m=0.7, k=kconv(0.7), sigma0=1.0, tbar=1.0) == (
        pytest.approx(0.7088949897656233, rel=1e-12)
    )
    assert rf.extinction_time(m=2.0, k=kconv(2.0), sigma0=1.0) == pytest.approx(
        1.2104755722850149, rel=1e-12
    )
    assert rf.case1_solution(m=2.0, k=kconv(2.0), sigma0=1.0, tbar=2.0) == 0.0
    fluid = rf.PowerLawFluid(k=kconv(0.7), m=0.7)
    assert rf.steady_sigma(0.1, fluid) == pytest.approx(
        0.3996489963363718, rel=1e-12
    )
    assert rf.maxwell_comparator(0.1, 1.0, 0.1) == pytest.approx(
        1.0 - math.exp(-1.0)
    )


def test_simulate_homogeneous_reaches_steady_state():
    mat = rf.Material(tau0=0.1, fluid=rf.PowerLawFluid(k=kconv(0.7), m=0.7))
    traj = rf.simulate_homogeneous(mat, rate=0.1, sigma0=0.0, F0=1.0, t_end=6.0)
    assert traj.status == "ok"
    assert traj.sigma[-1] == pytest.approx(0.3996489963363718, abs=1e-6)
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(6.0)
    slack = 10 * (1e-10 + 1e-8 * 0.4)  # plateau wobble at tolerance scale
    assert all(b >= a - slack for a, b in zip(traj.sigma, traj.sigma[1:]))
    assert traj.stats["steps"] > 0
    # dense output interpolates between the recorded nodes
    mid = traj.sample_sigma(3.0)
    assert 0.0 < mid <= 0.39965

    ratios = rf.superexp_ratios(traj, 0.3996489963363718, n_samples=10)
    assert len(ratios) >= 3
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_python_callable_protocol():
    mat = rf.Material(tau0=0.1, fluid=rf.PowerLawFluid(k=kconv(0.7), m=0.7))
    g0 = 0.1
    traj = rf.simulate_homogeneous(
        mat, rate=lambda t: g0 / (1.0 + g0 * t), t_end=2.0
    )
    assert traj.status == "ok"
    assert traj.F[-1] == pytest.approx(1.2, rel=1e-6)


def test_char_speeds():
    mat = rf.Material(
        elastic=rf.LinearElastic(modulus=1.0),
        tau0=1.0,
        fluid=rf.PowerLawFluid(k=1.0, m=1.0),
    )
    lo, zero, hi = rf.char_speeds(0.0, 1.0, 0.0, mat)
    assert zero == 0.0
    assert hi == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert lo == -hi


def test_run_scenario(tmp_path):
    cfg = tmp_path / "mini.cfg"
    cfg.write_text(
        """[scenario]
kind = case1
t_end = 2
samples = 51
out_prefix = mini

[material]
m = 0.7
k_convention = on

[case1]
sigma0 = 1

[output]
csv = on
"""
    )
    assert rf.run_scenario(str(cfg), out_dir=str(tmp_path)) == 0
    assert (tmp_path / "mini.csv").exists()
    assert (tmp_path / "mini_resolved.cfg").exists()
    header = (tmp_path / "mini.csv").read_text().splitlines()[0]
    assert header == "tbar,m=0.7"


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario]\nkind = case1\n[material]\nm = 0.7\n")
    assert rf.run_scenario(str(bad), out_dir=str(tmp_path)) == 2

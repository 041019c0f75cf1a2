import cmath
import json
import math

import _fockspec as fk


def test_version():
    assert fk.__version__


def test_flat_rho():
    w = fk.Weight.radial_power(2.0)
    want = 1.0 / (2.0 * math.sqrt(math.pi))
    for z in (0j, 1 + 0j, 2j, -1 - 1j):
        assert abs(fk.rho(w, z) - want) < 1e-8


def test_flat_spectrum_is_constant():
    w = fk.Weight.radial_power(2.0)
    s = fk.spectrum(w, [0j, 1 + 0j], 40)
    assert len(s) == 41
    for v in s:
        assert abs(v - 1.0 / math.sqrt(2.0)) < 1e-9


def test_gaussian_kernel_value():
    w = fk.Weight.radial_power(2.0)
    z, zeta = 1.0 + 0j, 0.5 - 0.25j
    value, reliable = fk.kernel(w, 80, z, zeta)
    assert reliable
    want = (2.0 / math.pi) * cmath.exp(2.0 * z * zeta.conjugate())
    assert abs(value - want) / abs(want) < 1e-8


def test_critical_exponent():
    p_star, kind = fk.critical_exponent(4.0, 1)
    assert kind == "THRESHOLD"
    assert abs(p_star - 4.0) < 1e-12
    p_star, kind = fk.critical_exponent(4.0, 2)
    assert kind == "NEVER"
    assert math.isinf(p_star)


def test_classify_report():
    w = fk.Weight.radial_power(4.0)
    report = json.loads(fk.classify_json(w, [0j, 1 + 0j], [3.0, 5.0], 600))
    assert report["p_star"]["kind"] == "THRESHOLD"
    assert abs(report["p_star"]["value"] - 4.0) < 1e-12
    verdicts = {v["p"]: v["verdict"] for v in report["per_p"]}
    assert verdicts[3.0] == "DIVERGES"
    assert verdicts[5.0] == "CONVERGES"
    assert report["hs_verdict"] == "DIVERGES"


def test_schatten_partial_flat_diverges():
    s = [1.0 / math.sqrt(2.0)] * 2001
    assert fk.schatten_partial(s, 2.0) == "DIVERGES"

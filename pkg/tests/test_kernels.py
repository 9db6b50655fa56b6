"""The compiled kernels and their pure-Python twins must agree bitwise."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from pointjump import _kernels
from pointjump._kernels import _fallback
from pointjump import manybody, profiles


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")
    assert set(_kernels.PROFILE_IDS) == {"tanh", "algebraic", "smoothstep"}


@pytest.mark.parametrize("prof_name", ["tanh", "algebraic", "smoothstep"])
def test_rk4_backends_agree_bitwise(prof_name):
    pid = _kernels.PROFILE_IDS[prof_name]
    args = (pid, 0.02, 0.5, 1.3, 1e-4, 2000, 100)
    xs0, ps0, ws0 = _kernels.rk4_duality(*args)
    xs1, ps1, ws1 = _fallback.rk4_duality(*args)
    assert np.array_equal(xs0, xs1)
    assert np.array_equal(ps0, ps1)
    assert np.array_equal(ws0, ws1)


def test_rk4_is_fourth_order():
    # step halving: endpoint error against a fine reference shrinks ~16x
    pid = _kernels.PROFILE_IDS["tanh"]
    xf = 0.512
    ref = _kernels.rk4_duality(pid, 0.02, 0.5, 1.0, xf / 16384, 16384, 16384)[1][-1]
    errs = []
    for n in (256, 512):
        p_end = _kernels.rk4_duality(pid, 0.02, 0.5, 1.0, xf / n, n, n)[1][-1]
        errs.append(abs(p_end - ref))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.2)


def test_rk4_matches_potential_definition():
    # one coarse step from the origin against a hand-rolled RK4 on eval_potential
    prof = profiles.make_profile("algebraic")
    p = profiles.duality_potential(prof, 0.05, 0.3)
    k = 1.1

    def v(x):
        return float(profiles.eval_potential(p, x))

    h = 1e-3
    y = np.array([0.0, 1.0])

    def rhs(x, y):
        return np.array([y[1], (v(x) - k * k) * y[0]])

    k1 = rhs(0.0, y)
    k2 = rhs(h / 2, y + h / 2 * k1)
    k3 = rhs(h / 2, y + h / 2 * k2)
    k4 = rhs(h, y + h * k3)
    y1 = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    pid = _kernels.PROFILE_IDS["algebraic"]
    _, ps, ws = _kernels.rk4_duality(pid, 0.05, 0.3, k, h, 1, 1)
    assert ps[1] == pytest.approx(y1[0], rel=1e-12)
    assert ws[1] == pytest.approx(y1[1], rel=1e-12)


def test_rk4_rejects_misaligned_recording():
    with pytest.raises(ValueError):
        _kernels.rk4_duality(0, 0.02, 0.5, 1.0, 1e-3, 100, 7)


def _e2_inputs(M=16, N=2, a=1.5, beta=0.1, L=2.0):
    spec = manybody.LatticeSpec(M=M, L=L, N=N)
    state = manybody.fermi_sea(N, M)
    p = profiles.duality_potential("tanh", a, beta)
    vt = manybody.interaction_transform(p, M, spec.kappa)
    n_idx = state.n_indices
    occ_h = np.sort(np.mod(2 * n_idx, 2 * M)).astype(np.int64)
    occ_mask = np.zeros(2 * M, dtype=np.uint8)
    occ_mask[occ_h] = 1
    return occ_h, occ_mask, vt, M, spec.kappa, L


def test_e2_backends_agree_bitwise():
    args = _e2_inputs()
    acc0, bad0 = _kernels.e2_lattice_sum(*args)
    acc1, bad1 = _fallback.e2_lattice_sum(*args)
    assert acc0 == acc1
    assert bad0 is None and bad1 is None


def test_pure_env_forces_fallback():
    code = ("import pointjump._kernels as k;"
            "print(k.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={**os.environ, "POINTJUMP_PURE": "1"},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_pure_env_reproduces_pipeline_numbers():
    # a full lattice_pt call through the fallback gives the same floats
    code = """
import json, os
import pointjump._kernels as kk
from pointjump import manybody, profiles
spec = manybody.LatticeSpec(M=32, L=2.0, N=3)
out = manybody.lattice_pt(spec, manybody.fermi_sea(3, 32),
                          profiles.duality_potential("tanh", 0.7, 0.2))
print(json.dumps({"backend": kk.BACKEND, "e0": out.e0.hex(),
                  "e1": out.e1.hex(), "e2": out.e2.hex()}))
"""
    out = subprocess.run([sys.executable, "-c", code],
                         env={**os.environ, "POINTJUMP_PURE": "1"},
                         capture_output=True, text=True, check=True)
    got = json.loads(out.stdout)
    spec = manybody.LatticeSpec(M=32, L=2.0, N=3)
    here = manybody.lattice_pt(spec, manybody.fermi_sea(3, 32),
                               profiles.duality_potential("tanh", 0.7, 0.2))
    assert got["backend"] == "python"
    assert got["e0"] == here.e0.hex()
    assert got["e1"] == here.e1.hex()
    assert got["e2"] == here.e2.hex()

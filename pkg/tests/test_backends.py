"""The compiled and pure-Python kernels must agree outcome for outcome."""

import math

import numpy as np
import pytest

from bellsim import _kernel_py

try:
    from bellsim import _kernel
except ImportError:
    _kernel = None

needs_compiled = pytest.mark.skipif(_kernel is None, reason="compiled kernel not built")


def _random_inputs(rng, n, contextual):
    v = rng.uniform(0.0, math.pi, n)
    moduli = np.full(n, 1.0)
    if rng.random() < 0.3:
        moduli = rng.uniform(0.2, 1.6, n)  # custom law: exercises 0/double fires
    set_a = rng.uniform(0.0, math.pi, n)
    set_b = rng.uniform(0.0, math.pi, n)
    master = rng.integers(0, 2, n, dtype=np.uint8)
    g = rng.uniform(1e-4, 0.9)
    mem0 = np.array([g, 1.0 - g, g, 1.0 - g])
    return v, moduli, set_a, set_b, master, 1.0, contextual, mem0


def _run(kernel, args):
    v = args[0]
    out_a = np.empty(len(v), dtype=np.int8)
    out_b = np.empty(len(v), dtype=np.int8)
    kernel.simulate_slots(*args, out_a, out_b)
    return out_a, out_b


@needs_compiled
@pytest.mark.parametrize("contextual", [True, False])
def test_backends_bit_identical(contextual):
    rng = np.random.default_rng(404)
    for _ in range(20):
        args = _random_inputs(rng, 2000, contextual)
        a1, b1 = _run(_kernel, args)
        a2, b2 = _run(_kernel_py, args)
        assert np.array_equal(a1, a2)
        assert np.array_equal(b1, b2)


@needs_compiled
def test_backends_bit_identical_on_engine_style_run(rng):
    # the exact array shapes and angle values the engine produces
    from bellsim import RunConfig, PairSourceConfig, SettingsSchedule, run
    import bellsim.backend as backend

    config = RunConfig(
        n_slots=50_000,
        angles=(0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8),
        threshold_u=1.0,
        source=PairSourceConfig(seed=5150),
        schedule=SettingsSchedule.block(50_000),
    )
    log = run(config)
    set_a, set_b = log.applied_settings()
    t = log.hv_trace
    master = config.role_policy.master_is_b(config.n_slots)
    args = (t.angles, t.moduli, set_a, set_b, master, 1.0, True, t.initial_memories)
    a1, b1 = _run(_kernel, args)
    a2, b2 = _run(_kernel_py, args)
    assert np.array_equal(a1, a2)
    assert np.array_equal(b1, b2)
    assert np.array_equal(a1, log.outcome_a)
    assert np.array_equal(b1, log.outcome_b)


def test_env_override_selects_backend(tmp_path):
    import subprocess
    import sys

    code = "import bellsim; print(bellsim.KERNEL_BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "BELLSIM_KERNEL": "python"},
        capture_output=True,
        text=True,
        cwd=str(tmp_path),
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "python"


def test_bad_env_override_rejected(tmp_path):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import bellsim"],
        env={"PATH": "/usr/bin:/bin", "BELLSIM_KERNEL": "fortran"},
        capture_output=True,
        text=True,
        cwd=str(tmp_path),
    )
    assert out.returncode != 0
    assert "BELLSIM_KERNEL" in out.stderr

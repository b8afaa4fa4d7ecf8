import os
import subprocess
import sys


def test_pure_python_fallback_agrees():
    """The env-selected no-JIT path produces the same answers (subprocess)."""
    code = (
        "import numpy as np\n"
        "from palmpc._kernels import NUMBA_ENABLED\n"
        "assert not NUMBA_ENABLED\n"
        "from palmpc.mpc import solve_mpc\n"
        "from palmpc.ampc import solve_ampc\n"
        "from palmpc.oracle import oracle_maximal_palindromes\n"
        "rng = np.random.default_rng(3)\n"
        "s = rng.integers(0, 3, 120).astype(np.int64)\n"
        "want = oracle_maximal_palindromes(s)\n"
        "assert solve_mpc(s, 0.5, seed=1).table == want\n"
        "assert solve_ampc(s, 0.75, seed=1).table == want\n"
        "print('fallback-ok')\n"
    )
    env = dict(os.environ, PALMPC_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, timeout=120)
    assert out.returncode == 0, out.stderr
    assert "fallback-ok" in out.stdout

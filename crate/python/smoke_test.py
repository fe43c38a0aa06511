#!/usr/bin/env python3
"""Smoke test for the bic_shg_py extension module.

Builds the cdylib with cargo if needed, loads it from the workspace target
directory, and checks a few headline numbers end to end.
"""

import math
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def ensure_module():
    here = Path(__file__).resolve().parent
    ext = here / "bic_shg_py.so"
    lib = ROOT / "target" / "release" / "libbic_shg_py.so"
    if not lib.exists():
        print("building bic-shg-py (release)...")
        subprocess.run(
            ["cargo", "build", "--release", "-p", "bic-shg-py"],
            cwd=ROOT,
            check=True,
        )
    if not ext.exists() or lib.stat().st_mtime > ext.stat().st_mtime:
        shutil.copy2(lib, ext)
    sys.path.insert(0, str(here))


def approx(a, b, tol):
    return abs(a - b) <= tol


def main():
    ensure_module()
    import bic_shg_py

    s = bic_shg_py.Structure(radius=0.1, eps_c=2.0, chi_c=1e-4, kx=0.0)

    # Scattering phase at the first diffraction threshold.
    d0 = s.scattering_phase(2 * math.pi)
    assert approx(d0, (2 * math.pi * 0.1) ** 2 / 4, 1e-12), d0
    print(f"delta0(2pi)          = {d0:.6f}")

    # Channel bookkeeping: one open fundamental, three open second-harmonic.
    k = 0.95 * 2 * math.pi
    open_f = sum(1 for (_, _, _, o) in s.channels(k, 0.0, 3) if o)
    open_sh = sum(1 for (_, _, _, o) in s.channels(2 * k, 0.0, 3) if o)
    assert (open_f, open_sh) == (1, 3), (open_f, open_sh)
    print(f"open channels        = {open_f} fundamental, {open_sh} second harmonic")

    # First bound state of the headline geometry.
    bs = s.bound_states(1)[0]
    assert approx(bs["h_b"], 0.259, 0.02), bs
    assert 0.95 * 2 * math.pi <= bs["k_b"] <= 2 * math.pi, bs
    print(f"h_b(1), k_b(1)       = {bs['h_b']:.6f}, {bs['k_b']:.6f}")

    # Resonance width vanishes at the bound state and is positive nearby.
    kr, gamma = s.resonance(bs["h_b"] + 2e-3, parity=1)
    assert gamma > 0 and kr < 2 * math.pi, (kr, gamma)
    print(f"Gamma(h_b + 2e-3)    = {gamma:.3e}")

    # Nonlinear solve on the curve: implicit-relation consistency.
    sol = s.solve_fields(bs["h_b"] + 1e-3)
    assert sol["valid"] and sol["e1_abs"] > 1.0, sol
    print(f"|E1+|(h_b + 1e-3)    = {sol['e1_abs']:.3f}")

    # Conversion efficiency of the first bound state.
    eff = s.efficiency(1)
    assert 0.0 < eff["sigma2_max_exact"] <= 1.0, eff
    print(f"sigma2_max (exact)   = {eff['sigma2_max_exact']:.4f}")
    print(f"sigma2_max (leading) = {eff['sigma2_max_leading']:.4f}")

    # Optimal distance: sweep argmax agrees with the closed-form condition.
    opt = s.optimal_distance(1)
    gap = abs(opt["sweep_argmax_h"] - opt["h_opt"][1]) / opt["delta_h"]
    assert gap < 0.05, opt
    assert abs(opt["conservation_residual"]) < 1e-6, opt
    print(f"delta_h(opt)         = {opt['delta_h']:.4e} (sweep gap {100*gap:.2f}%)")

    # Headline geometry of the conversion estimate.
    s15 = bic_shg_py.Structure(radius=0.15, eps_c=2.0)
    eff15 = s15.efficiency(1)
    assert approx(eff15["sigma2_max_m0"], 0.44, 0.05), eff15
    print(f"sigma0_2,max (R=.15) = {eff15['sigma2_max_m0']:.4f}")

    print("smoke test: OK")


if __name__ == "__main__":
    main()

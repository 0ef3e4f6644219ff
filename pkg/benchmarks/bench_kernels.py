"""Timing comparison of the compiled and pure-NumPy kernel backends.

Times the two hot paths (dense kernel-matrix assembly and matrix-free
grid evaluation) for both backends on the same inputs and reports the
speedup.  Run from the repository root:

    python3 benchmarks/bench_kernels.py [--nodes 512] [--targets 20000]
"""

import argparse
import timeit

import numpy as np

from helecloak import _core_py
from helecloak import geometry

try:
    from helecloak import _core_cy
except ImportError:
    _core_cy = None


def bench(fn, repeat=5):
    times = timeit.repeat(fn, number=1, repeat=repeat)
    return min(times)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=512)
    parser.add_argument("--targets", type=int, default=20000)
    args = parser.parse_args()

    mesh = geometry.build_kite(n=args.nodes)
    sx = np.ascontiguousarray(mesh.points[:, 0])
    sy = np.ascontiguousarray(mesh.points[:, 1])
    nx = np.ascontiguousarray(mesh.normals[:, 0])
    ny = np.ascontiguousarray(mesh.normals[:, 1])
    w = np.ascontiguousarray(mesh.weights)
    dens = np.cos(3.0 * mesh.params)

    rng = np.random.default_rng(0)
    ang = rng.uniform(0.0, 2.0 * np.pi, args.targets)
    rad = rng.uniform(2.0, 5.0, args.targets)
    tx = np.ascontiguousarray(rad * np.cos(ang))
    ty = np.ascontiguousarray(rad * np.sin(ang))

    cases = [
        ("slp matrix  (n x n)", lambda m: m.slp_matrix(sx, sy, w, sx + 3.0, sy)),
        ("adn matrix  (n x n)", lambda m: m.adn_matrix(sx, sy, w, sx + 3.0, sy, nx, ny)),
        ("grad matrices", lambda m: m.slp_grad_matrices(sx, sy, w, tx[: args.nodes], ty[: args.nodes])),
        ("apply on grid", lambda m: m.slp_apply(sx, sy, w, dens, tx, ty)),
        ("grad apply on grid", lambda m: m.slp_grad_apply(sx, sy, w, dens, tx, ty)),
        ("nearest node", lambda m: m.nearest_node(sx, sy, tx, ty)),
    ]

    print(f"nodes={args.nodes}  targets={args.targets}")
    header = f"{'kernel':<22}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_py = bench(lambda: call(_core_py)) * 1e3
        if _core_cy is None:
            print(f"{name:<22}{t_py:>12.2f}{'n/a':>13}{'n/a':>9}")
            continue
        if not same(call(_core_py), call(_core_cy)):
            raise AssertionError(f"backend results disagree for {name}")
        t_cy = bench(lambda: call(_core_cy)) * 1e3
        print(f"{name:<22}{t_py:>12.2f}{t_cy:>13.2f}{t_py / t_cy:>8.1f}x")
    if _core_cy is None:
        print("compiled backend unavailable; build it with: pip install -e . --no-build-isolation")


if __name__ == "__main__":
    main()

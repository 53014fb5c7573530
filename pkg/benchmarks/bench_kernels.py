"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--h 0.01] [--dense 300] [--repeat 5]

Timings exclude the first (compiling) numba call.
"""
import argparse
import time

import numpy as np

from robin_shapes import kernels
from robin_shapes.geometry import square_with_slit
from robin_shapes.mesh import triangulate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--h", type=float, default=0.01)
    parser.add_argument("--dense", type=int, default=300)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    mesh = triangulate(square_with_slit(), args.h)
    rng = np.random.default_rng(0)
    a = rng.standard_normal((args.dense, args.dense))
    a = a @ a.T + args.dense * np.eye(args.dense)
    print(f"mesh: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles; dense n = {args.dense}")

    jobs = {
        "p1_triplets": lambda k: k.p1_triplets(mesh.nodes, mesh.triangles),
        "edge_mass_triplets": lambda k: k.edge_mass_triplets(mesh.nodes, mesh.boundary_edges),
        "cholesky_lower": lambda k: k.cholesky_lower(a),
        "householder_tridiagonal": lambda k: k.householder_tridiagonal(a),
        "tridiagonal_eigenvalues": lambda k: k.tridiagonal_eigenvalues(np.diag(a).copy(), np.append(np.diag(a, 1), 0.0)),
    }
    names = ["numpy"]
    try:
        kernels.backend("numba")
        names.append("numba")
    except ImportError:
        print("numba unavailable; numpy only")
    print(f"{'kernel':<26}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, job in jobs.items():
        row = []
        for name in names:
            mod = kernels.backend(name)
            job(mod)  # warm up / compile
            row.append(best_of(lambda: job(mod), args.repeat))
        line = f"{label:<26}" + "".join(f"{t * 1e3:10.2f}ms" for t in row)
        if len(row) == 2:
            line += f"{row[0] / row[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()

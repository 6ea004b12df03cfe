"""Time the orbit kernels on both backends.

    python3 benchmarks/bench_kernels.py --points 2000 --repeat 3
"""

import argparse
import json
import time
from importlib import resources

import numpy as np

from planarsym import kernels
from planarsym.dynamics import disk_samples
from planarsym.maps import MapSpec, map_from_json_dict


def bundled(name: str) -> MapSpec:
    text = resources.files("planarsym").joinpath("data", f"{name}.json").read_text("utf-8")
    return map_from_json_dict(json.loads(text))


def workloads():
    return [
        bundled("figure1"),
        bundled("z3_rotscale"),
        bundled("so2_radial"),
        MapSpec.expr("exp(-x^2)*x/2 + tanh(y)/3", "-y/2 + sin(x)/4", name="transcendental"),
    ]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    pts = disk_samples(args.points, 3.0, args.seed)
    xs, ys = pts[:, 0].copy(), pts[:, 1].copy()
    backends = {"python": kernels.get_backend("python")}
    try:
        backends["cython"] = kernels.get_backend("cython")
    except ImportError:
        print("compiled backend unavailable; timing the pure-Python kernels only")

    orbit = (args.iters, 1e6, 1e-8, 1e-9, 20, 10)
    print(f"{'map':<16}{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for m in workloads():
        for label, run in (
            ("eval_points", lambda mod, cm: mod.eval_points(cm, xs, ys)),
            ("classify_orbits", lambda mod, cm: mod.classify_orbits(cm, xs, ys, *orbit)),
        ):
            secs = {}
            results = {}
            for name, mod in backends.items():
                cm = kernels.compile_map(m, mod)
                results[name] = run(mod, cm)
                secs[name] = best_of(lambda: run(mod, cm), args.repeat)
            if len(results) == 2:
                for a, b in zip(results["python"], results["cython"]):
                    assert np.array_equal(a, b), f"backend mismatch on {m.name}/{label}"
            speed = secs["python"] / secs["cython"] if "cython" in secs else float("nan")
            cols = "".join(f"{secs[b] * 1e3:>10.1f}ms" for b in backends)
            print(f"{m.name:<16}{label:<18}{cols}{speed:>9.1f}x")


if __name__ == "__main__":
    main()

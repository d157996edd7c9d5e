"""Benchmark the compiled evaluation kernel against the numpy fallback.

Builds representative inner subproblems (the eavesdropper-outage maximin
model, which exercises every atom kind) at M in {2, 5}, then times the three
kernel entry points and one complete barrier solve per backend.

Run:  python benchmarks/kernel_benchmark.py
"""

import os
import time

import numpy as np

from secbeam import algorithms as alg
from secbeam import rates
from secbeam.kernels import _ref, pack_model
from secbeam.model import Regime, Scenario, sample_channels
from secbeam.solver import solve
from secbeam.surrogates import ExpansionState

try:
    from secbeam.kernels import _fast
except ImportError:
    _fast = None


def build_model(M):
    sc = Scenario.default(M=M, P=20.0, regime=Regime.EV_OUTAGE)
    ch = sample_channels(sc, 1)
    W = alg._interior_power(alg.init_mrt(sc, ch), sc)
    r = np.array([rates.eve_outage_sinr(W, ch, sc, i) for i in range(M)])
    cfg = alg.AlgorithmConfig()
    # assemble through the algorithm's own builders for a faithful workload
    st = ExpansionState.at(W, ch, sc, r=r)
    from secbeam.atoms import Layout, affine_expr

    lay = Layout(sc.M, sc.Nt, with_r=True, epigraph=True)
    terms, cons = alg._ev_terms(st, ch, sc, lay, cfg)
    t_row = lay.unit(lay.t_index)
    cons += [affine_expr(t_row) - term for term in terms]
    x0 = alg._epigraph_start(lay, terms, lay.stack(W, r=r * 1.0000001, t=0.0))
    from secbeam.solver import SubproblemModel

    model = SubproblemModel(lay.n, affine_expr(t_row), cons, x0)
    return model


def time_fn(fn, *args, repeat=2000):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_kernels(model, impl):
    pm = pack_model(model.objective, model.constraints, model.n)
    x = model.x0
    t = 10.0
    return {
        "values": time_fn(impl.eval_values, pm, x),
        "barrier": time_fn(impl.eval_barrier, pm, x, t),
        "barrier_full": time_fn(impl.eval_barrier_full, pm, x, t, repeat=500),
    }


def bench_solve(model, backend):
    os.environ["SECBEAM_KERNEL"] = backend
    # re-select the backend inside the solver path
    import importlib

    import secbeam.kernels as kern
    import secbeam.solver as slv

    importlib.reload(kern)
    importlib.reload(slv)
    t0 = time.perf_counter()
    out = slv.solve(model)
    dt = time.perf_counter() - t0
    os.environ.pop("SECBEAM_KERNEL", None)
    importlib.reload(kern)
    importlib.reload(slv)
    return dt, out.objective, out.iterations


def main():
    print(f"compiled kernel available: {_fast is not None}")
    for M in (2, 5):
        model = build_model(M)
        print(f"\nM={M}: n={model.n} variables, {len(model.constraints)} constraints")
        ref = bench_kernels(model, _ref)
        rows = [("python", ref)]
        if _fast is not None:
            rows.append(("compiled", bench_kernels(model, _fast)))
        hdr = f"{'backend':<10}" + "".join(f"{k:>16}" for k in ref)
        print(hdr)
        for name, res in rows:
            print(f"{name:<10}" + "".join(f"{v * 1e6:>13.1f} us" for v in res.values()))
        if _fast is not None:
            speed = {k: ref[k] / rows[1][1][k] for k in ref}
            print("speedup   " + "".join(f"{v:>14.1f}x" for v in speed.values()))
        t_py, obj_py, it_py = bench_solve(model, "python")
        print(f"full solve, python   backend: {t_py * 1e3:7.1f} ms "
              f"({it_py} newton steps, objective {obj_py:.6f})")
        if _fast is not None:
            t_cy, obj_cy, it_cy = bench_solve(model, "")
            print(f"full solve, compiled backend: {t_cy * 1e3:7.1f} ms "
                  f"({it_cy} newton steps, objective {obj_cy:.6f})")
            print(f"solve speedup: {t_py / t_cy:.1f}x "
                  f"(objective agreement {abs(obj_py - obj_cy):.2e})")


if __name__ == "__main__":
    main()

"""Kernel benchmark: same closed-loop workload on every available backend."""

from __future__ import annotations

import time

from . import kernels
from .refgen import ReferenceVector
from .vehicle import Vehicle


def run_bench(config, seconds: float = 5.0) -> dict:
    """Drive the full reference->cascade->physics loop for each backend.

    Returns per-backend wall time, physics-step rate, and the final position
    so callers can confirm the backends agree bit-for-bit.
    """
    ticks = round(seconds * config.timing.reference_hz)
    weave = [ReferenceVector(0.4, -0.3, 0.2, -0.1), ReferenceVector(-0.2, 0.5, -0.4, 0.3)]
    results = {}
    for backend in kernels.available_backends():
        v = Vehicle(config, backend)
        v.set_pose((0.0, 0.0, 1.0))
        t0 = time.perf_counter()
        for k in range(ticks):
            v.reference_tick(weave[k % 2])
        wall = time.perf_counter() - t0
        results[backend] = {
            "wall_s": wall,
            "sim_s": seconds,
            "physics_steps": v.physics_steps,
            "steps_per_s": v.physics_steps / wall if wall > 0 else float("inf"),
            "realtime_factor": seconds / wall if wall > 0 else float("inf"),
            "final_pos": v.state.position,
        }
    return results


def format_bench(results: dict) -> str:
    lines = [f"{'backend':<10} {'wall s':>9} {'steps/s':>12} {'x realtime':>11}"]
    for name, r in results.items():
        lines.append(f"{name:<10} {r['wall_s']:>9.4f} {r['steps_per_s']:>12.0f} "
                     f"{r['realtime_factor']:>11.1f}")
    if len(results) == 2:
        names = list(results)
        ratio = results[names[1]]["wall_s"] / results[names[0]]["wall_s"]
        lines.append(f"speedup {names[0]} over {names[1]}: {ratio:.1f}x")
        agree = results[names[0]]["final_pos"] == results[names[1]]["final_pos"]
        lines.append(f"final positions bit-identical: {'yes' if agree else 'NO'}")
    return "\n".join(lines)

"""Throughput comparison of the compiled kernel vs the pure-Python twin.

Run: python benchmarks/bench_backends.py [--slots N]
"""

import argparse
import math
import time

import numpy as np

from beamband import _core_py
from beamband.envsim import default_params
from beamband.scenarios import default_scenario_env

try:
    from beamband import _core
except ImportError:
    _core = None


def build(module, params):
    b = params.budget
    return module.EnvCore(
        cx=params.center_m[0], cy=params.center_m[1], radius=params.radius_m,
        bs_x=params.bs_position_m[0], bs_y=params.bs_position_m[1],
        tx_dbm=b.tx_power_dbm, fc_db=20.0 * math.log10(b.carrier_ghz),
        noise_floor_dbm=b.noise_power_dbm, block_db=b.block_loss_db,
        se_cap=b.se_cap_bps_hz, bandwidth_hz=b.bandwidth_hz,
        sidelobe_dbi=b.sidelobe_gain_dbi, ue_omni_dbi=params.ue_omni_gain_dbi,
        el_bw_deg=params.el_beamwidth_deg, n_ue=params.ue_sectors,
        ue_gain_dbi=params.ue_codebook().mainlobe_gain_dbi,
        substep_s=params.substep_s,
        heading_noise_rad=math.radians(params.heading_noise_deg_sqrt_s),
        min_dist_m=params.min_distance_m)


def bench_slots(core, slots, n_bs=256, period_s=0.04):
    """Full slots: one sweep plus one data phase each, like Scenario I."""
    rng = np.random.default_rng(0)
    w = np.array([21.21, 21.21, 0.3, 7.5, 1.0, 0.05])
    swept = np.arange(n_bs, dtype=np.int64)
    snr1 = np.empty(n_bs)
    snr2 = np.empty(16)
    noise = rng.standard_normal((slots, 161))
    data_s = period_s - (n_bs + 16) * 10e-6
    start = time.perf_counter()
    for t in range(slots):
        bb, bu, _ = core.sweep(w, n_bs, swept, False, 0.5, snr1, snr2)
        core.data_phase(w, period_s, data_s, n_bs, bb, bu, False, 0.5, noise[t])
    return slots / (time.perf_counter() - start)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--slots", type=int, default=3000)
    args = parser.parse_args()

    params = default_scenario_env(1)
    rows = []
    if _core is not None:
        rows.append(("compiled (c)", bench_slots(build(_core, params), args.slots)))
    else:
        print("compiled core not built; benchmarking the fallback only")
    py_slots = max(100, args.slots // 20)
    rows.append(("pure python", bench_slots(build(_core_py, params), py_slots)))

    print(f"\n{'backend':>14}  {'slots/s':>12}")
    for name, rate in rows:
        print(f"{name:>14}  {rate:>12.0f}")
    if len(rows) == 2:
        print(f"\nspeedup: {rows[0][1] / rows[1][1]:.1f}x "
              f"(40 ms slots, 256-sector sweeps)")


if __name__ == "__main__":
    main()

# %% [markdown]
# # Phase-only versus linear measurements
#
# A reduced phase-transition sweep: 20 trials per cell instead of 100. The
# full-size run is `pocs phase-transition --out results/`.

# %%
import math
from pathlib import Path

from pocs.experiments import (
    CS,
    PO_CS,
    ExperimentConfig,
    emit_results,
    run_noise_sweep,
    run_phase_transition,
    snr_slope,
    transition_point,
)

cfg = ExperimentConfig(trials=20, master_seed=1)
result = run_phase_transition(cfg)
for arm in (PO_CS, CS):
    rates = " ".join(f"{r.success_rate:.2f}" for r in sorted(result.rows_for(arm=arm), key=lambda r: r.m))
    print(f"{arm:>6}: {rates}")

# %%
po, cs = transition_point(result, PO_CS), transition_point(result, CS)
print(f"50% success at m={po:.1f} (phase only) vs m={cs:.1f} (linear), ratio {po / cs:.2f}")

# %% [markdown]
# The phase-only arm needs more measurements, but not dramatically more.
# Next, the SNR under phase noise at a fixed budget of 60 measurements.

# %%
noisy = run_noise_sweep(
    ExperimentConfig(m_grid=(60,), tau_grid=tuple(math.pi * t for t in (1e-1, 1e-2, 1e-3)), trials=20, master_seed=1)
)
for row in sorted(noisy.rows, key=lambda r: -r.tau):
    print(f"tau/pi={row.tau / math.pi:.0e}  mean SNR {row.mean_snr_db:5.1f} dB")
print(f"slope: {snr_slope(noisy, 60):.1f} dB per decade of noise")

# %%
out = Path("demo-output")
for path in emit_results(result, out) + emit_results(noisy, out):
    print("wrote", path)

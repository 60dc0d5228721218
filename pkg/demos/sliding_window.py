"""
Averaging overlapping context windows
=====================================

Every window of w frames produces a mask for all w frames; each frame's final mask
is the mean over the windows that covered it.
"""
import numpy as np

from slidemask.context import combine, coverage_counts, frame_windows, latency

T, w = 10, 4
print("windows:", T - w + 1)
print("estimates per frame:", coverage_counts(T, w))

# if every window returns its own frame index, the average must reproduce it
idx = np.arange(T, dtype=float)[:, None]
est = frame_windows(idx, w)
print("combined:", combine(est, T, w).ravel())

# the price is latency: the newest frame must wait for w-1 more hops
for w in (1, 3, 8, 13):
    print(f"w={w:>2}: {1000 * latency(w, 0.004):.0f} ms")

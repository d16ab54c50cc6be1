"""Golden band-pass design and filtfilt output from scipy.

The library places f_lo/f_hi at the -3 dB points. scipy's cheby2 takes
stopband edges, so they are derived here: the prototype -3 dB point lies at
1/ws of its stopband edge, ws = cosh(acosh(1/eps)/N), which widens the
pre-warped bandwidth by ws around the same geometric centre.
"""
import math

import numpy as np
from scipy import signal

FS, LO, HI, N, RS = 360.0, 0.5, 48.0, 4, 40.0


def warp(f):
    return 4.0 * math.tan(math.pi * (2.0 * f / FS) / 2.0)


def unwarp(w):
    return 2.0 / math.pi * math.atan(w / 4.0)


eps = 1.0 / math.sqrt(10 ** (0.1 * RS) - 1.0)
ws = math.cosh(math.acosh(1.0 / eps) / N)
lo, hi = warp(LO), warp(HI)
bw, p = (hi - lo) * ws, lo * hi
w_hi = (bw + math.sqrt(bw * bw + 4 * p)) / 2
w_lo = w_hi - bw
b, a = signal.cheby2(N, RS, [unwarp(w_lo), unwarp(w_hi)], btype="bandpass")
sos = signal.cheby2(N, RS, [unwarp(w_lo), unwarp(w_hi)], btype="bandpass", output="sos")

t = np.arange(400)
x = np.sin(2 * np.pi * 5 * t / FS) + 0.5 * np.sin(2 * np.pi * 0.1 * t / FS) + 0.2 * np.cos(2 * np.pi * 90 * t / FS)
# The library filters through second-order sections; the expanded b/a form
# of this design loses digits (its own filtfilt drifts by ~1e-7).
y = signal.sosfiltfilt(sos, x)

_, h = signal.freqz(b, a, worN=[10.0, 30.0, 0.05], fs=FS)

print("b", ", ".join(f"{v:.17g}" for v in b))
print("a", ", ".join(f"{v:.17g}" for v in a))
print("sosfiltfilt[0,50,100,199,300,399]", ", ".join(f"{y[i]:.17g}" for i in (0, 50, 100, 199, 300, 399)))
print("|H| at 10, 30, 0.05 Hz", ", ".join(f"{abs(v):.17g}" for v in h))

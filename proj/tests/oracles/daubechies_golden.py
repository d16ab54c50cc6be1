"""Daubechies scaling filters (reconstruction low-pass) from PyWavelets."""
import numpy as np
import pywt

for n in (2, 6):
    print(f"db{n}", ", ".join(f"{v:.17g}" for v in pywt.Wavelet(f"db{n}").rec_lo))


def denoise_gain(n=2048, f=1.0, levels=9, seed=11):
    """SNR gain of db6 soft universal thresholding on a sine at 5 dB SNR."""
    t = np.arange(n)
    clean = np.sin(2 * np.pi * f * t / 360)
    noisy = clean + np.random.default_rng(seed).normal(0, np.sqrt(0.5 / 10**0.5), n)

    def snr(y):
        return 10 * np.log10((clean**2).sum() / ((y - clean) ** 2).sum())

    c = pywt.wavedec(noisy, "db6", level=levels, mode="periodization")
    lam = np.median(np.abs(c[-1])) / 0.6745 * np.sqrt(2 * np.log(n))
    c = [c[0]] + [pywt.threshold(d, lam, "soft") for d in c[1:]]
    return snr(pywt.waverec(c, "db6", mode="periodization")[:n]) - snr(noisy)


if __name__ == "__main__":
    print("denoise gain 1 Hz", denoise_gain())

"""Two-dimensional wavelet scattering transform.

Order-0/1/2 coefficients from a directional Morlet filter bank and a
Gaussian low-pass: convolve, take the modulus, low-pass, decimate by 2^J.
Second-order paths are restricted to strictly increasing scales (j1 < j2);
coarser-to-finer paths carry negligible energy after the first modulus.

The band-pass filters are rescaled so the Littlewood-Paley sum
|phi|^2 + sum |psi|^2 stays <= 1 at every frequency, which makes the whole
transform non-expansive: perturbing the input never grows in the output.
The low-pass keeps unit DC gain, so a constant image c yields an order-0
channel of c and (exactly zero-mean wavelets) vanishing higher orders.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ..errors import ParameterError
from ..raster import Raster
from ._pad import pad_reflect
from .params import WstParams
from .stack import FeatureStack

_ALIAS_RANGE = 2  # spectral periods summed to model spatial sampling


def _gauss_bump(h: int, w: int, sigma: float, theta: float, slant: float,
                xi: float) -> np.ndarray:
    """Anisotropic Gaussian in the Fourier domain, centered at xi along theta.

    Evaluated on the DFT frequency grid with alias folding, so it matches
    the DFT of the sampled spatial-domain Gabor envelope. Peak value is 1.
    """
    fy = 2.0 * np.pi * np.fft.fftfreq(h)[:, None]
    fx = 2.0 * np.pi * np.fft.fftfreq(w)[None, :]
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cx, cy = xi * cos_t, xi * sin_t
    sig_par = sigma
    sig_perp = sigma / slant

    out = np.zeros((h, w), dtype=np.float64)
    rng = range(-_ALIAS_RANGE, _ALIAS_RANGE + 1)
    for my in rng:
        oy = fy + 2.0 * np.pi * my - cy
        for mx in rng:
            ox = fx + 2.0 * np.pi * mx - cx
            par = ox * cos_t + oy * sin_t
            perp = -ox * sin_t + oy * cos_t
            out += np.exp(-0.5 * ((sig_par * par) ** 2 + (sig_perp * perp) ** 2))
    return out


def _morlet_hat(h: int, w: int, sigma: float, theta: float, slant: float,
                xi: float) -> np.ndarray:
    """Fourier transform of a zero-mean Morlet wavelet (real-valued)."""
    gabor = _gauss_bump(h, w, sigma, theta, slant, xi)
    envelope = _gauss_bump(h, w, sigma, theta, slant, 0.0)
    kappa = gabor[0, 0] / envelope[0, 0]
    return gabor - kappa * envelope


class FilterBank(NamedTuple):
    psi: np.ndarray                 # (J*L, H, W) real Fourier filters
    phi: np.ndarray                 # (H, W) low-pass, unit DC gain
    scales: np.ndarray              # (J*L,) scale index j per filter
    pairs: tuple[tuple[int, int], ...]  # (j, l) per filter, lexicographic


@lru_cache(maxsize=8)
def filter_bank(h: int, w: int, J: int, L: int) -> FilterBank:
    """Morlet bank at dyadic scales 0..J-1, L orientations over [0, pi)."""
    slant = 4.0 / L
    psi = np.empty((J * L, h, w), dtype=np.float64)
    scales = np.empty(J * L, dtype=np.int64)
    pairs = []
    for j in range(J):
        sigma = 0.8 * 2.0 ** j
        xi = (3.0 * np.pi / 4.0) / 2.0 ** j
        for l in range(L):
            theta = np.pi * l / L
            psi[j * L + l] = _morlet_hat(h, w, sigma, theta, slant, xi)
            scales[j * L + l] = j
            pairs.append((j, l))

    phi = _gauss_bump(h, w, 0.8 * 2.0 ** J, 0.0, 1.0, 0.0)
    phi /= phi[0, 0]

    # Littlewood-Paley rescale: largest c with phi^2 + c^2*sum(psi^2) <= 1.
    lp = np.sum(psi * psi, axis=0)
    headroom = 1.0 - phi * phi
    mask = lp > 1e-8
    if mask.any():
        c2 = np.min(np.maximum(headroom[mask], 0.0) / lp[mask])
        scale = min(1.0, np.sqrt(c2))
        psi *= scale

    psi.setflags(write=False)
    phi.setflags(write=False)
    scales.setflags(write=False)
    return FilterBank(psi, phi, scales, tuple(pairs))


def wst_channel_count(J: int, L: int) -> int:
    return 1 + J * L + L * L * (J * (J - 1)) // 2


def wst(r: Raster, params: WstParams | None = None) -> FeatureStack:
    """Scattering coefficient stack; channels are (H/2^J, W/2^J) each.

    Inputs whose dimensions are not divisible by 2^J are reflection-padded
    up to the next multiple before transforming.
    """
    p = params or WstParams()
    if not r.is_normalized():
        raise ParameterError("wst expects a normalized raster (values in [0, 1])")

    step = 2 ** p.J
    pad_h = (-r.height) % step
    pad_w = (-r.width) % step
    v = r.values.astype(np.float64)
    if pad_h or pad_w:
        v = pad_reflect(v, 0, pad_h, 0, pad_w)
    h, w = v.shape

    bank = filter_bank(h, w, p.J, p.L)
    phi = bank.phi

    def low_pass_decimated(field_hat: np.ndarray) -> np.ndarray:
        smooth = np.fft.ifft2(field_hat * phi).real
        return smooth[..., ::step, ::step]

    channels = []
    labels = []

    x_hat = np.fft.fft2(v)
    channels.append(low_pass_decimated(x_hat))
    labels.append("s0")

    u1 = np.abs(np.fft.ifft2(x_hat[None, :, :] * bank.psi, axes=(-2, -1)))
    u1_hat = np.fft.fft2(u1, axes=(-2, -1))
    s1 = low_pass_decimated(u1_hat)
    for idx, (j, l) in enumerate(bank.pairs):
        channels.append(s1[idx])
        labels.append(f"s1[j={j},l={l}]")

    for idx1, (j1, l1) in enumerate(bank.pairs):
        sel = np.nonzero(bank.scales > j1)[0]
        if sel.size == 0:
            continue
        u2 = np.abs(np.fft.ifft2(u1_hat[idx1][None, :, :] * bank.psi[sel],
                                 axes=(-2, -1)))
        s2 = low_pass_decimated(np.fft.fft2(u2, axes=(-2, -1)))
        for k, idx2 in enumerate(sel):
            j2, l2 = bank.pairs[idx2]
            channels.append(s2[k])
            labels.append(f"s2[j1={j1},l1={l1},j2={j2},l2={l2}]")

    stack = np.maximum(np.stack(channels, axis=0), 0.0).astype(np.float32)
    return FeatureStack(stack, tuple(labels))

"""Doubly-selective channels on the delay-Doppler lattice.

A channel is a sparse set of taps (delay_bin, doppler_bin, gain).  Two
discrete application modes are provided:

``cyclic``
    The whole block (no prefixes) is treated as one period: delay shifts
    wrap modulo M*N samples and the Doppler phase ramp runs over the
    block.  This is the mode under which the delay-Doppler input-output
    relation is an exact twisted circular convolution, so it is the mode
    the operator-level oracles use.

``per_slot_cp``
    Practical mode: the transmitted stream carries a cyclic prefix per
    slot, delays act linearly on the stream, and every delay bin must
    fit inside the prefix.  The Doppler phase clock advances over body
    samples only and holds at the slot's first body index during the
    prefix (the prefix samples are discarded by the receiver, so only
    their role as a delay reservoir matters).

Both modes implement, on body samples,

    r[s] = sum_taps gain * x[s - l] * exp(2j*pi*k*(s - l)/(M*N)) + noise

with s the body-sample index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, GuardError
from .frame import FrameParams, MappingMatrix, TimeSignal
from .transforms import basis_waveform, dft_matrix, wigner

#: refuse to build coupling tensors above this many grid points
COUPLING_GUARD = 512
#: refuse to build effective matrices above this many grid points
EFFECTIVE_GUARD = 4096


class ChannelTap(NamedTuple):
    delay_bin: int
    doppler_bin: int
    gain: complex


@dataclass(frozen=True)
class DDChannelSpec:
    """Sparse delay-Doppler channel: a tuple of (delay, Doppler, gain) taps."""

    taps: tuple

    def __post_init__(self):
        taps = tuple(ChannelTap(int(l), int(k), complex(g)) for (l, k, g) in self.taps)
        object.__setattr__(self, "taps", taps)
        if not taps:
            raise ValueError("channel must have at least one tap")
        seen = set()
        for t in taps:
            if t.delay_bin < 0:
                raise ValueError(f"delay bin must be >= 0, got {t.delay_bin}")
            if (t.delay_bin, t.doppler_bin) in seen:
                raise ValueError(f"duplicate tap position {(t.delay_bin, t.doppler_bin)}")
            seen.add((t.delay_bin, t.doppler_bin))

    @property
    def L_max(self) -> int:
        """Delay spread in bins: 1 + largest delay bin."""
        return 1 + max(t.delay_bin for t in self.taps)

    @property
    def V_max(self) -> int:
        """Doppler spread in bins: 1 + largest |doppler bin|."""
        return 1 + max(abs(t.doppler_bin) for t in self.taps)


def received_power(ch: DDChannelSpec) -> float:
    """Total tap power sum_i |gain_i|^2."""
    return float(sum(abs(t.gain) ** 2 for t in ch.taps))


def random_channel(
    L_max: int,
    V_max: int,
    rng: np.random.Generator,
    power_profile="uniform",
) -> DDChannelSpec:
    """Draw a random channel on the full delay x Doppler tap grid.

    Taps cover delay bins [0, L_max) and Doppler bins (-V_max, V_max)
    (centered on zero), gains i.i.d. circular complex Gaussian weighted
    by ``power_profile`` and rescaled so the realised received power is
    exactly 1.

    ``power_profile`` is ``"uniform"`` or a nonnegative array of shape
    (L_max, 2*V_max - 1) of relative tap powers.
    """
    if L_max < 1 or V_max < 1:
        raise ValueError(f"spreads must be >= 1, got L_max={L_max} V_max={V_max}")
    dopplers = np.arange(-(V_max - 1), V_max)
    shape = (L_max, dopplers.size)
    if isinstance(power_profile, str):
        if power_profile != "uniform":
            raise ValueError(f"unknown power profile {power_profile!r}")
        weights = np.full(shape, 1.0 / (shape[0] * shape[1]))
    else:
        weights = np.asarray(power_profile, dtype=float)
        if weights.shape != shape:
            raise ValueError(f"power profile shape {weights.shape} != tap grid {shape}")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("power profile must be nonnegative with positive sum")
        weights = weights / weights.sum()
    g = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    g *= np.sqrt(weights / 2.0)
    g /= np.linalg.norm(g)
    taps = [
        (l, int(dopplers[j]), g[l, j])
        for l in range(L_max)
        for j in range(dopplers.size)
    ]
    return DDChannelSpec(taps=tuple(taps))


def _check_taps(ch: DDChannelSpec, params: FrameParams) -> None:
    for t in ch.taps:
        if t.delay_bin >= params.M:
            raise ValueError(f"delay bin {t.delay_bin} >= M={params.M}")
        if abs(t.doppler_bin) > params.N / 2:
            raise ValueError(f"|doppler bin| {abs(t.doppler_bin)} > N/2={params.N / 2}")


def apply_channel(
    sig: TimeSignal,
    ch: DDChannelSpec,
    params: FrameParams,
    noise_var: float = 0.0,
    rng: np.random.Generator | None = None,
    mode: str = "per_slot_cp",
) -> TimeSignal:
    """Pass a time signal through the channel and add complex AWGN.

    ``noise_var`` is the per-complex-sample noise variance (split evenly
    between quadratures).  See the module docstring for the two modes.
    """
    _check_taps(ch, params)
    if sig.num_slots != params.N or sig.body_len != params.M:
        raise ValueError("signal geometry does not match frame parameters")
    if noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    if noise_var > 0 and rng is None:
        raise ValueError("rng required when noise_var > 0")
    S = params.dof
    x = sig.samples

    if mode == "cyclic":
        if sig.cp_len != 0:
            raise ConfigError("cyclic mode requires a prefix-free signal (cp_len == 0)")
        s_idx = np.arange(S)
        r = np.zeros(S, dtype=np.complex128)
        for l, k, g in ch.taps:
            r += g * np.roll(x, l) * np.exp(2j * np.pi * k * (s_idx - l) / S)
    elif mode == "per_slot_cp":
        cp = sig.cp_len
        for t in ch.taps:
            if t.delay_bin > cp:
                raise ConfigError(
                    f"delay bin {t.delay_bin} exceeds cyclic prefix {cp} in per-slot mode"
                )
        slot_len = sig.slot_len
        total = sig.samples.size
        q = np.arange(slot_len)
        clock = (
            np.arange(params.N)[:, None] * params.M + np.maximum(0, q[None, :] - cp)
        ).reshape(-1)
        r = np.zeros(total, dtype=np.complex128)
        for l, k, g in ch.taps:
            delayed = np.concatenate([np.zeros(l, dtype=np.complex128), x[: total - l]])
            r += g * delayed * np.exp(2j * np.pi * k * (clock - l) / S)
    else:
        raise ConfigError(f"unknown channel mode {mode!r}")

    if noise_var > 0:
        scale = np.sqrt(noise_var / 2.0)
        r = r + rng.normal(scale=scale, size=r.shape) + 1j * rng.normal(
            scale=scale, size=r.shape
        )
    return TimeSignal(
        samples=r, cp_len=sig.cp_len, sample_rate=sig.sample_rate, num_slots=sig.num_slots
    )


# ---------------------------------------------------------------------------
# analytic channel views
# ---------------------------------------------------------------------------


def tf_channel(ch: DDChannelSpec, params: FrameParams) -> np.ndarray:
    """Per-cell time-frequency response H[m, n] (M x N).

    H[m, n] = sum_taps gain * exp(-2j*pi*(m*l/M - n*k/N)) * exp(-2j*pi*l*k/(M*N))

    Under the ideal-pulse approximation each grid cell sees the scalar
    gain H[m, n]; a delay-only channel is constant across slots and a
    Doppler-only channel constant across subcarriers.
    """
    _check_taps(ch, params)
    m = np.arange(params.M)[:, None]
    n = np.arange(params.N)[None, :]
    H = np.zeros((params.M, params.N), dtype=np.complex128)
    for l, k, g in ch.taps:
        cross = np.exp(-2j * np.pi * l * k / params.dof)
        H += g * cross * np.exp(-2j * np.pi * (m * l / params.M - n * k / params.N))
    return H


def twisted_gains(ch: DDChannelSpec, params: FrameParams) -> tuple:
    """Taps with the delay-Doppler cross phase folded in.

    Returns ``(l, k, gain * exp(-2j*pi*l*k/(M*N)))`` per tap — the form in
    which the response factors through plain DFT matrices.
    """
    _check_taps(ch, params)
    return tuple(
        ChannelTap(l, k, g * np.exp(-2j * np.pi * l * k / params.dof))
        for l, k, g in ch.taps
    )


def tf_channel_factored(ch: DDChannelSpec, params: FrameParams) -> np.ndarray:
    """Time-frequency response built as sqrt(M*N) * F_M @ G @ F_N^H.

    G is the sparse M x N grid of twisted gains placed via identity-column
    embeddings at (delay bin, doppler bin mod N).  Requires M >= L_max and
    N >= V_max so the distinct taps occupy distinct grid cells.
    """
    _check_taps(ch, params)
    if params.M < ch.L_max:
        raise ValueError(f"M={params.M} < delay spread {ch.L_max}")
    if params.N < ch.V_max:
        raise ValueError(f"N={params.N} < Doppler spread {ch.V_max}")
    tw = twisted_gains(ch, params)
    delays = sorted({t.delay_bin for t in tw})
    rows = sorted({t.doppler_bin % params.N for t in tw})
    small = np.zeros((len(delays), len(rows)), dtype=np.complex128)
    for l, k, g in tw:
        small[delays.index(l), rows.index(k % params.N)] += g
    P_delay = MappingMatrix(params.M, tuple(delays)).dense()
    P_doppler = MappingMatrix(params.N, tuple(rows)).dense()
    G = P_delay @ small @ P_doppler.T
    F_M = dft_matrix(params.M)
    F_N = dft_matrix(params.N)
    return np.sqrt(params.dof) * (F_M @ G @ F_N.conj().T)


def windowed_dd_channel(ch: DDChannelSpec, params: FrameParams) -> np.ndarray:
    """Delay-Doppler response seen through the full rectangular lattice window.

    The discretized window — a full M x N sum of lattice phases — equals
    M*N at lattice-aligned offsets and 0 elsewhere, so convolving the taps
    with it and applying the delay-Doppler cross phase collapses to

        h_w[k mod N, l] = M*N * gain * exp(-2j*pi*l*k/(M*N))

    at tap positions and 0 elsewhere.  Returned as an (N, M) grid indexed
    [doppler row, delay bin]; the cross phase uses the signed Doppler bin.
    """
    _check_taps(ch, params)
    out = np.zeros((params.N, params.M), dtype=np.complex128)
    for l, k, g in ch.taps:
        out[k % params.N, l] += params.dof * g * np.exp(-2j * np.pi * l * k / params.dof)
    return out


def dd_domain_operator(ch: DDChannelSpec, params: FrameParams) -> np.ndarray:
    """Analytic delay-Doppler input-output operator (M*N x M*N).

    Built purely from :func:`windowed_dd_channel` — never by running the
    modulation chain — as the twisted circular convolution

        y[n_o, m_o] = (1/(M*N)) * sum_{n_i, m_i} x[n_i, m_i]
                        * h_w[(n_o - n_i) mod N, (m_o - m_i) mod M]
                        * exp(2j*pi*k*m_o/(M*N)) * wrap(m_o, m_i, n_i)

    where k is the signed Doppler offset recovered from the row difference
    (centered convention), the per-output-column phase completes the tap's
    Doppler ramp, and ``wrap`` is the quasi-periodic boundary factor
    exp(-2j*pi*n_i/N) applied when the delay shift wraps past the block
    edge (1 otherwise).  Vectorization is row-major over (doppler, delay),
    matching :func:`effective_matrix`.
    """
    M, N = params.M, params.N
    MN = params.dof
    hw = windowed_dd_channel(ch, params)
    idx = np.arange(MN)
    n_out, m_out = np.divmod(idx, M)
    dn = (n_out[:, None] - n_out[None, :]) % N
    dm = (m_out[:, None] - m_out[None, :]) % M
    k_signed = np.where(dn <= N // 2, dn, dn - N)
    base = hw[dn, dm] / MN
    twist = np.exp(2j * np.pi * k_signed * m_out[:, None] / MN)
    wrap = np.where(
        m_out[:, None] >= dm,
        1.0,
        np.exp(-2j * np.pi * n_out[None, :] / N),
    )
    return base * twist * wrap


# ---------------------------------------------------------------------------
# numerical ground truth: operators composed from the real signal chain
# ---------------------------------------------------------------------------


def chain_matrix(tx, rx, dim: int) -> np.ndarray:
    """Matrix of the linear map rx(channel(tx(e_c))) over all unit impulses.

    ``tx`` maps a length-``dim`` coefficient vector to a TimeSignal (or
    anything ``rx`` accepts); ``rx`` maps it back to a coefficient vector.
    The caller bakes the channel into one of the two closures.
    """
    cols = []
    e = np.zeros(dim, dtype=np.complex128)
    for c in range(dim):
        e[c] = 1.0
        cols.append(np.asarray(rx(tx(e)), dtype=np.complex128).reshape(-1))
        e[c] = 0.0
    return np.column_stack(cols)


def effective_matrix(cfg, ch: DDChannelSpec, mode: str = "cyclic") -> np.ndarray:
    """Composed end-to-end operator of modulate -> channel -> demodulate.

    Ground-truth numerical construction: each unit impulse on the scheme's
    input grid is pushed through the real chain (noiseless) and the
    responses are collected as columns.  Input/output vectorization is
    row-major over the scheme's grid — for the delay-Doppler schemes that
    is (doppler, delay) order.

    ``cfg`` is a :class:`~otfsim.modem.SchemeConfig`; refuses grids larger
    than ``EFFECTIVE_GUARD`` points.
    """
    from . import modem  # local import: modem does not import channel

    params = cfg.params
    if params.dof > EFFECTIVE_GUARD:
        raise GuardError(
            f"effective matrix for {params.dof} grid points exceeds guard {EFFECTIVE_GUARD}"
        )
    shape = modem.payload_shape(cfg)

    def tx(v):
        return modem.modulate(cfg, v.reshape(shape))

    def rx(sig):
        return modem.demodulate(cfg, apply_channel(sig, ch, params, 0.0, None, mode))

    return chain_matrix(tx, rx, params.dof)


def coupling_tensor(
    ch: DDChannelSpec,
    params: FrameParams,
    cp_len: int | None = None,
    mode: str = "per_slot_cp",
) -> np.ndarray:
    """Cross-symbol coupling H[m, n, m', n'] between lattice basis pulses.

    Entry (m, n, m', n') is the response on receive pulse (m, n) to a unit
    transmit pulse at (m', n'), measured by passing each basis waveform
    through the noiseless channel and correlating against the receive
    bank.  By linearity, contracting the tensor with any transmit grid
    reproduces the chain's receive grid exactly.

    Diagnostic (cost grows as (M*N)^2 * M): refuses frames larger than
    ``COUPLING_GUARD`` points.  ``cp_len`` defaults to the smallest prefix
    covering the channel in per-slot mode, 0 in cyclic mode.
    """
    _check_taps(ch, params)
    if params.dof > COUPLING_GUARD:
        raise GuardError(
            f"coupling tensor for {params.dof} grid points exceeds guard {COUPLING_GUARD}"
        )
    if cp_len is None:
        cp_len = 0 if mode == "cyclic" else max(t.delay_bin for t in ch.taps)
    H = np.zeros((params.M, params.N, params.M, params.N), dtype=np.complex128)
    for mp in range(params.M):
        for np_ in range(params.N):
            pulse = basis_waveform(mp, np_, params, cp_len=cp_len)
            r = apply_channel(pulse, ch, params, 0.0, None, mode)
            H[:, :, mp, np_] = wigner(r, params)
    return H

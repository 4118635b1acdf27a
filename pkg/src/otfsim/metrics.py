"""Symbol mappings and link-quality metrics.

Constellations are unit-energy and Gray-labeled; the exact labelings are
part of the library contract:

* BPSK:   bit 0 -> +1, bit 1 -> -1
* QPSK:   bits (b0, b1) -> ((1-2*b0) + 1j*(1-2*b1)) / sqrt(2), so
  ``00 -> (1+1j)/sqrt(2)``; the real axis carries the first bit.
* 16QAM:  bits (b0, b1, b2, b3) -> I from (b0, b1), Q from (b2, b3),
  per-axis Gray levels 00, 01, 11, 10 -> -3, -1, +1, +3, scaled 1/sqrt(10).

The symbol index of a bit group is its big-endian integer value, and
``Constellation.points[index]`` is the mapped symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frame import TimeSignal


@dataclass(frozen=True, eq=False)
class Constellation:
    name: str
    points: np.ndarray
    bits_per_symbol: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        object.__setattr__(self, "points", pts)
        if pts.size != 2 ** self.bits_per_symbol:
            raise ValueError(
                f"{self.name}: {pts.size} points but {self.bits_per_symbol} bits/symbol"
            )

    @property
    def size(self) -> int:
        return self.points.size


def _gray_axis_levels() -> np.ndarray:
    # two-bit Gray code 00, 01, 11, 10 mapped onto the 4-PAM levels
    levels = np.empty(4)
    levels[0b00], levels[0b01], levels[0b11], levels[0b10] = -3.0, -1.0, 1.0, 3.0
    return levels


def _build(name: str) -> Constellation:
    if name == "BPSK":
        return Constellation("BPSK", np.array([1.0, -1.0], dtype=complex), 1)
    if name == "QPSK":
        pts = np.array(
            [(1 - 2 * b0 + 1j * (1 - 2 * b1)) / np.sqrt(2) for b0 in (0, 1) for b1 in (0, 1)]
        )
        return Constellation("QPSK", pts, 2)
    if name == "16QAM":
        lv = _gray_axis_levels()
        pts = np.array(
            [(lv[i] + 1j * lv[q]) / np.sqrt(10) for i in range(4) for q in range(4)]
        )
        return Constellation("16QAM", pts, 4)
    raise ValueError(f"unknown constellation {name!r}, expected BPSK, QPSK or 16QAM")


_CONSTELLATIONS = {name: _build(name) for name in ("BPSK", "QPSK", "16QAM")}


def get_constellation(name: str) -> Constellation:
    try:
        return _CONSTELLATIONS[name]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}, expected BPSK, QPSK or 16QAM") from None


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Map a flat 0/1 array (length divisible by bits/symbol) to symbols."""
    bits = np.asarray(bits)
    bps = constellation.bits_per_symbol
    if bits.ndim != 1 or bits.size % bps != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {bps}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    groups = bits.reshape(-1, bps)
    idx = groups @ (1 << np.arange(bps - 1, -1, -1))
    return constellation.points[idx]


def symbol_indices(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Nearest-point hard decision, returned as constellation indices."""
    symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    d = np.abs(symbols[:, None] - constellation.points[None, :])
    return np.argmin(d, axis=1)


def slice_symbols(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Hard-decide symbols back to the flat bit array (inverse of map_bits)."""
    idx = symbol_indices(symbols, constellation)
    bps = constellation.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).reshape(-1).astype(np.int64)


def papr_samples(x: np.ndarray) -> float:
    """Peak-to-average power ratio (linear) of a sample array."""
    x = np.asarray(x)
    power = np.abs(x) ** 2
    mean = power.mean()
    if mean == 0:
        raise ValueError("PAPR of an all-zero signal is undefined")
    return float(power.max() / mean)


def papr(sig: TimeSignal) -> float:
    """PAPR of a block at critical sampling, prefixes excluded."""
    return papr_samples(sig.body)


def count_errors(tx_bits: np.ndarray, rx_bits: np.ndarray, bits_per_symbol: int = 1):
    """(bit errors, symbol errors) between two equal-length bit arrays."""
    tx_bits = np.asarray(tx_bits)
    rx_bits = np.asarray(rx_bits)
    if tx_bits.shape != rx_bits.shape:
        raise ValueError(f"shape mismatch {tx_bits.shape} vs {rx_bits.shape}")
    if tx_bits.size % bits_per_symbol != 0:
        raise ValueError(f"bit count {tx_bits.size} not divisible by {bits_per_symbol}")
    wrong = tx_bits != rx_bits
    bit_errors = int(wrong.sum())
    symbol_errors = int(wrong.reshape(-1, bits_per_symbol).any(axis=1).sum())
    return bit_errors, symbol_errors


@dataclass(frozen=True, eq=False)
class LinkResult:
    """Mergeable accumulator for one (scheme, SNR) simulation point."""

    scheme: str
    snr_db: float
    trials: int = 0
    bit_errors: int = 0
    symbol_errors: int = 0
    total_bits: int = 0
    total_symbols: int = 0
    papr_values: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def ber(self) -> float:
        return self.bit_errors / self.total_bits if self.total_bits else 0.0

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.total_symbols if self.total_symbols else 0.0

    @property
    def papr_mean(self) -> float:
        return float(np.mean(self.papr_values)) if self.papr_values.size else 0.0

    @property
    def papr_p99(self) -> float:
        return float(np.percentile(self.papr_values, 99)) if self.papr_values.size else 0.0

    def merge(self, other: "LinkResult") -> "LinkResult":
        """Combine two partial results for the same point (associative)."""
        if (self.scheme, self.snr_db) != (other.scheme, other.snr_db):
            raise ValueError(
                f"cannot merge {self.scheme}@{self.snr_db} with {other.scheme}@{other.snr_db}"
            )
        return LinkResult(
            scheme=self.scheme,
            snr_db=self.snr_db,
            trials=self.trials + other.trials,
            bit_errors=self.bit_errors + other.bit_errors,
            symbol_errors=self.symbol_errors + other.symbol_errors,
            total_bits=self.total_bits + other.total_bits,
            total_symbols=self.total_symbols + other.total_symbols,
            papr_values=np.concatenate([self.papr_values, other.papr_values]),
        )

"""Scenario-driven Monte-Carlo link simulation.

Determinism contract
--------------------
Every random draw in a simulation belongs to the stream of exactly one
(seed, snr_index, trial_index) triple, generated by the counter-based
Philox engine::

    Generator(Philox(key=seed, counter=[0, trial_index, snr_index, 0]))

Within a trial the draw order is fixed (channel, then bits, then noise),
so results are bit-identical for any worker partition of the trial range
and any execution order.  Auxiliary system randomness (e.g. a Gaussian
spreading matrix, a single channel draw for inspection) uses reserved
counter blocks that no trial stream can reach.

Scenario files are strict JSON: every key is validated and unknown keys
are rejected with an error naming the offending key.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from . import modem, multiuser
from .channel import (
    DDChannelSpec,
    apply_channel,
    effective_matrix,
    chain_matrix,
    random_channel,
    tf_channel,
    windowed_dd_channel,
)
from .equalizer import ML_GUARD_BITS, ml_detect, mmse_filter, one_tap_tf
from .errors import ConfigError
from .frame import FrameParams, make_frame
from .metrics import (
    LinkResult,
    count_errors,
    get_constellation,
    map_bits,
    papr,
    slice_symbols,
)
from .modem import SchemeConfig
from .transforms import heisenberg, wigner

EQUALIZERS = ("one_tap_tf", "mmse_dd", "ml")
CHANNEL_MODES = ("cyclic", "per_slot_cp")
CSV_HEADER = "scheme,snr_db,trials,ber,ser,papr_mean,papr_p99"


@dataclass(frozen=True)
class MultiuserSetup:
    mode: str
    K_d: int
    K_D: int
    mapping: str = "localized"
    spreader: str = "dft"
    power_budget: float | None = None


@dataclass(frozen=True)
class Scenario:
    """Full description of one simulation run (plain data, picklable)."""

    M: int
    N: int
    delta_f_hz: float
    cp_len: int
    scheme: str
    constellation: str
    channel_taps: tuple | None
    channel_random: tuple | None
    channel_mode: str
    equalizer: str
    snr_db_list: tuple
    trials: int
    seed: int
    multiuser: MultiuserSetup | None = None

    @property
    def params(self) -> FrameParams:
        return make_frame(self.M, self.N, self.delta_f_hz)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _take(d: dict, ctx: str, key: str, required: bool = True, default=None):
    if key not in d:
        if required:
            raise ConfigError(f"missing key {key!r} in {ctx}")
        return default
    return d.pop(key)


def _no_extras(d: dict, ctx: str):
    if d:
        raise ConfigError(f"unknown key {sorted(d)[0]!r} in {ctx}")


def _parse_channel(raw, ctx: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{ctx} must be an object")
    raw = dict(raw)
    taps = _take(raw, ctx, "taps", required=False)
    rand = _take(raw, ctx, "random", required=False)
    _no_extras(raw, ctx)
    if (taps is None) == (rand is None):
        raise ConfigError(f"{ctx} needs exactly one of 'taps' or 'random'")
    if taps is not None:
        parsed = []
        for i, t in enumerate(taps):
            t = dict(t)
            tctx = f"{ctx}.taps[{i}]"
            l = _take(t, tctx, "delay_bin")
            k = _take(t, tctx, "doppler_bin")
            re = _take(t, tctx, "re")
            im = _take(t, tctx, "im")
            _no_extras(t, tctx)
            parsed.append((int(l), int(k), float(re), float(im)))
        if not parsed:
            raise ConfigError(f"{ctx}.taps must not be empty")
        return tuple(parsed), None
    rand = dict(rand)
    rctx = f"{ctx}.random"
    L = int(_take(rand, rctx, "L_max"))
    V = int(_take(rand, rctx, "V_max"))
    _no_extras(rand, rctx)
    return None, (L, V)


def _parse_multiuser(raw, ctx: str) -> MultiuserSetup:
    if not isinstance(raw, dict):
        raise ConfigError(f"{ctx} must be an object")
    raw = dict(raw)
    mode = _take(raw, ctx, "mode")
    K_d = int(_take(raw, ctx, "K_d"))
    K_D = int(_take(raw, ctx, "K_D"))
    mapping = _take(raw, ctx, "mapping", required=False, default="localized")
    spreader = _take(raw, ctx, "spreader", required=False, default="dft")
    budget = _take(raw, ctx, "power_budget", required=False)
    _no_extras(raw, ctx)
    if mode not in multiuser.DOWNLINK_MODES:
        raise ConfigError(f"{ctx}.mode must be one of {multiuser.DOWNLINK_MODES}")
    if mapping not in ("localized", "interleaved"):
        raise ConfigError(f"{ctx}.mapping must be 'localized' or 'interleaved'")
    if spreader not in ("dft", "gaussian"):
        raise ConfigError(f"{ctx}.spreader must be 'dft' or 'gaussian'")
    return MultiuserSetup(
        mode=mode,
        K_d=K_d,
        K_D=K_D,
        mapping=mapping,
        spreader=spreader,
        power_budget=None if budget is None else float(budget),
    )


def scenario_from_dict(raw: dict) -> Scenario:
    """Build and validate a Scenario from parsed JSON (strict keys)."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    raw = dict(raw)
    frame = _take(raw, "scenario", "frame")
    if not isinstance(frame, dict):
        raise ConfigError("'frame' must be an object")
    frame = dict(frame)
    M = int(_take(frame, "frame", "M"))
    N = int(_take(frame, "frame", "N"))
    delta_f = float(_take(frame, "frame", "delta_f_hz", required=False, default=15e3))
    cp_len = int(_take(frame, "frame", "cp_len", required=False, default=0))
    _no_extras(frame, "frame")

    scheme = _take(raw, "scenario", "scheme")
    constellation = _take(raw, "scenario", "constellation")
    taps, rand = _parse_channel(_take(raw, "scenario", "channel"), "channel")
    channel_mode = _take(raw, "scenario", "channel_mode", required=False, default="per_slot_cp")
    equalizer = _take(raw, "scenario", "equalizer", required=False, default="one_tap_tf")
    snr_list = _take(raw, "scenario", "snr_db_list")
    trials = int(_take(raw, "scenario", "trials"))
    seed = int(_take(raw, "scenario", "seed"))
    mu_raw = _take(raw, "scenario", "multiuser", required=False)
    _no_extras(raw, "scenario")

    if channel_mode not in CHANNEL_MODES:
        raise ConfigError(f"channel_mode must be one of {CHANNEL_MODES}")
    if equalizer not in EQUALIZERS:
        raise ConfigError(f"equalizer must be one of {EQUALIZERS}")
    if not isinstance(snr_list, (list, tuple)) or not snr_list:
        raise ConfigError("snr_db_list must be a nonempty list")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    if seed < 0:
        raise ConfigError("seed must be a nonnegative integer")

    sc = Scenario(
        M=M,
        N=N,
        delta_f_hz=delta_f,
        cp_len=cp_len,
        scheme=scheme,
        constellation=constellation,
        channel_taps=taps,
        channel_random=rand,
        channel_mode=channel_mode,
        equalizer=equalizer,
        snr_db_list=tuple(float(s) for s in snr_list),
        trials=trials,
        seed=seed,
        multiuser=None if mu_raw is None else _parse_multiuser(mu_raw, "multiuser"),
    )
    _validate_scenario(sc)
    return sc


def _validate_scenario(sc: Scenario) -> None:
    try:
        params = sc.params
        get_constellation(sc.constellation)
        SchemeConfig(sc.scheme, params, cp_len=sc.cp_len)
        if sc.channel_taps is not None:
            _fixed_channel(sc)
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e)) from e
    bits_total = params.dof * get_constellation(sc.constellation).bits_per_symbol
    if sc.equalizer == "ml" and bits_total > ML_GUARD_BITS:
        raise ConfigError(
            f"equalizer 'ml' with {bits_total} bits per block exceeds the "
            f"{ML_GUARD_BITS}-bit exhaustive-search guard"
        )
    if sc.multiuser is not None:
        mu = sc.multiuser
        if sc.M % mu.K_d or sc.N % mu.K_D:
            raise ConfigError(
                f"multiuser tiling {mu.K_d}x{mu.K_D} does not divide frame {sc.M}x{sc.N}"
            )
        if sc.equalizer == "ml":
            raise ConfigError("equalizer 'ml' is not supported with multiuser scenarios")
        if mu.power_budget is not None and mu.mode != "tf_alloc":
            raise ConfigError("power_budget applies to multiuser mode 'tf_alloc' only")
        if mu.power_budget is not None and sc.equalizer == "mmse_dd":
            raise ConfigError(
                "power_budget is incompatible with equalizer 'mmse_dd' "
                "(joint MMSE assumes unit power weights)"
            )


def load_scenario(path) -> Scenario:
    """Load a strict-JSON scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {path}: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"scenario file {path} is not valid JSON: {e}") from e
    return scenario_from_dict(raw)


def _fixed_channel(sc: Scenario) -> DDChannelSpec:
    return DDChannelSpec(
        taps=tuple((l, k, complex(re, im)) for (l, k, re, im) in sc.channel_taps)
    )


# ---------------------------------------------------------------------------
# deterministic RNG streams
# ---------------------------------------------------------------------------


def trial_rng(seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    """The per-trial stream of the determinism contract."""
    return np.random.Generator(
        np.random.Philox(key=seed, counter=[0, trial_index, snr_index, 0])
    )


def system_rng(seed: int, slot: int) -> np.random.Generator:
    """Reserved streams for per-run (not per-trial) randomness."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, int(slot)]))


# ---------------------------------------------------------------------------
# trial execution
# ---------------------------------------------------------------------------


class _SingleUserEngine:
    """Precomputes everything noise-independent for a fixed channel."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.params = sc.params
        self.cfg = SchemeConfig(sc.scheme, self.params, cp_len=sc.cp_len)
        self.const = get_constellation(sc.constellation)
        self.fixed = None if sc.channel_taps is None else _fixed_channel(sc)
        self._cache = {}

    def channel_for_trial(self, rng) -> DDChannelSpec:
        if self.fixed is not None:
            return self.fixed
        L, V = self.sc.channel_random
        return random_channel(L, V, rng)

    def detector(self, ch: DDChannelSpec, noise_var: float):
        """Returns payload_hat = f(received TimeSignal)."""
        sc, cfg, params = self.sc, self.cfg, self.params
        key = (id(ch), noise_var) if ch is self.fixed else None
        if key in self._cache:
            return self._cache[key]
        if sc.equalizer == "one_tap_tf":
            H = tf_channel(ch, params)

            def detect(sig):
                Y = wigner(sig, params)
                return modem.payload_from_tf(cfg, one_tap_tf(Y, H, noise_var))

        elif sc.equalizer == "mmse_dd":
            H_eff = effective_matrix(cfg, ch, mode=sc.channel_mode)
            W = mmse_filter(H_eff, noise_var)
            shape = modem.payload_shape(cfg)

            def detect(sig):
                y = modem.demodulate(cfg, sig).reshape(-1)
                return (W @ y).reshape(shape)

        else:  # ml
            H_eff = effective_matrix(cfg, ch, mode=sc.channel_mode)
            shape = modem.payload_shape(cfg)

            def detect(sig):
                y = modem.demodulate(cfg, sig).reshape(-1)
                return ml_detect(y, H_eff, self.const).reshape(shape)

        if key is not None:
            self._cache[key] = detect
        return detect

    def run_trial(self, rng, noise_var: float):
        ch = self.channel_for_trial(rng)
        detect = self.detector(ch, noise_var)
        bps = self.const.bits_per_symbol
        n_sym = self.params.dof
        bits = rng.integers(0, 2, size=n_sym * bps)
        payload = map_bits(bits, self.const).reshape(modem.payload_shape(self.cfg))
        sig = modem.modulate(self.cfg, payload)
        papr_val = papr(sig)
        rx = apply_channel(sig, ch, self.params, noise_var, rng, mode=self.sc.channel_mode)
        est = detect(rx)
        rx_bits = slice_symbols(est.reshape(-1), self.const)
        be, se = count_errors(bits, rx_bits, bps)
        return be, se, bits.size, n_sym, papr_val


class _MultiuserEngine:
    """Downlink superposition of an orthogonal user grid, detected per user."""

    def __init__(self, sc: Scenario):
        from .frame import interleaved_allocation, localized_allocation

        self.sc = sc
        self.params = sc.params
        self.const = get_constellation(sc.constellation)
        self.fixed = None if sc.channel_taps is None else _fixed_channel(sc)
        mu = sc.multiuser
        alloc_fn = localized_allocation if mu.mapping == "localized" else interleaved_allocation
        self.alloc = alloc_fn(self.params, mu.K_d, mu.K_D)
        self.M_d = sc.M // mu.K_d
        self.N_D = sc.N // mu.K_D
        if mu.mode == "tf_spread":
            # one reserved stream, drawn sequentially so users differ
            gauss_rng = system_rng(sc.seed, 1) if mu.spreader == "gaussian" else None
            self.users = [
                self._make_pair(fmap, tmap, gauss_rng) for fmap, tmap in self.alloc.users
            ]
        else:
            self.users = list(self.alloc.users)
        self._cache = {}

    def _make_pair(self, fmap, tmap, rng):
        if self.sc.multiuser.spreader == "dft":
            return multiuser.dft_spreading_pair(fmap, tmap)

        def gauss(rows, cols):
            S = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
            return S / np.linalg.norm(S, axis=0, keepdims=True)

        return multiuser.SpreadingPair(
            S_A=gauss(self.params.M, self.M_d), S_B=gauss(self.params.N, self.N_D)
        )

    def _beta(self, ch: DDChannelSpec, noise_var: float):
        mu = self.sc.multiuser
        if mu.power_budget is None:
            return None, np.ones(len(self.users))
        H = tf_channel(ch, self.params)
        gains = np.array(
            [
                np.mean(np.abs(H[np.ix_(list(f.selected), list(t.selected))]) ** 2)
                for f, t in self.alloc.users
            ]
        )
        p = multiuser.water_fill(gains, mu.power_budget, noise_var)
        amp = np.sqrt(p / (self.M_d * self.N_D))
        beta = [np.full(self.N_D, a) for a in amp]
        return beta, amp

    def channel_for_trial(self, rng) -> DDChannelSpec:
        if self.fixed is not None:
            return self.fixed
        L, V = self.sc.channel_random
        return random_channel(L, V, rng)

    def _despread(self, X_hat, user_idx):
        mu = self.sc.multiuser
        if mu.mode == "tf_spread":
            return multiuser.despread_user(X_hat, pair=self.users[user_idx])
        fmap, tmap = self.users[user_idx]
        if mu.mode == "dd_mapped":
            return multiuser.despread_user(X_hat, freq_map=fmap, time_map=tmap, domain="dd")
        # tf_alloc: the placement adjoint is plain cell selection
        return X_hat[np.ix_(list(fmap.selected), list(tmap.selected))].T

    def _mmse_stack(self, ch: DDChannelSpec, noise_var: float):
        """Joint MMSE over the stacked per-user symbol vector."""
        key = (id(ch), noise_var)
        if key in self._cache:
            return self._cache[key]
        sc, params = self.sc, self.params
        block = self.M_d * self.N_D
        dim = block * len(self.users)

        def tx(v):
            blocks = [
                v[u * block : (u + 1) * block].reshape(self.N_D, self.M_d)
                for u in range(len(self.users))
            ]
            X = multiuser.downlink_superpose(blocks, self.users, sc.multiuser.mode)
            return heisenberg(X, params, cp_len=sc.cp_len)

        def rx(sig):
            return wigner(
                apply_channel(sig, ch, params, 0.0, None, sc.channel_mode), params
            ).reshape(-1)

        A = chain_matrix(tx, rx, dim)
        W = mmse_filter(A, noise_var)
        self._cache[key] = W
        return W

    def run_trial(self, rng, noise_var: float):
        sc = self.sc
        ch = self.channel_for_trial(rng)
        beta, amp = self._beta(ch, noise_var)
        counted = amp > 1e-12  # users given zero power carry no data
        bps = self.const.bits_per_symbol
        block = self.M_d * self.N_D
        K = len(self.users)
        bits = rng.integers(0, 2, size=K * block * bps)
        symbols = map_bits(bits, self.const)
        blocks = [
            symbols[u * block : (u + 1) * block].reshape(self.N_D, self.M_d)
            for u in range(K)
        ]
        X = multiuser.downlink_superpose(blocks, self.users, sc.multiuser.mode, beta=beta)
        sig = heisenberg(X, self.params, cp_len=sc.cp_len)
        papr_val = papr(sig)
        rx_sig = apply_channel(sig, ch, self.params, noise_var, rng, mode=sc.channel_mode)

        if sc.equalizer == "mmse_dd":
            if beta is not None:
                raise ConfigError("mmse_dd multiuser detection assumes unit power weights")
            W = self._mmse_stack(ch, noise_var)
            est_stack = W @ wigner(rx_sig, self.params).reshape(-1)
            per_user = [
                est_stack[u * block : (u + 1) * block].reshape(self.N_D, self.M_d)
                for u in range(K)
            ]
        else:
            H = tf_channel(ch, self.params)
            X_hat = one_tap_tf(wigner(rx_sig, self.params), H, noise_var)
            per_user = [self._despread(X_hat, u) for u in range(K)]

        be = se = nb = ns = 0
        for u in range(K):
            if not counted[u]:
                continue
            est = per_user[u].reshape(-1) / (amp[u] if beta is not None else 1.0)
            rx_bits = slice_symbols(est, self.const)
            tx_bits = bits[u * block * bps : (u + 1) * block * bps]
            dbe, dse = count_errors(tx_bits, rx_bits, bps)
            be += dbe
            se += dse
            nb += tx_bits.size
            ns += block
        return be, se, nb, ns, papr_val


def _make_engine(sc: Scenario):
    return _SingleUserEngine(sc) if sc.multiuser is None else _MultiuserEngine(sc)


def run_trial_range(sc: Scenario, snr_index: int, start: int, stop: int) -> LinkResult:
    """Run trials [start, stop) of one SNR point; mergeable partial result."""
    engine = _make_engine(sc)
    snr_db = sc.snr_db_list[snr_index]
    noise_var = 10.0 ** (-snr_db / 10.0)  # unit-energy symbols
    be = se = nb = ns = 0
    paprs = []
    for t in range(start, stop):
        rng = trial_rng(sc.seed, snr_index, t)
        dbe, dse, dnb, dns, pv = engine.run_trial(rng, noise_var)
        be += dbe
        se += dse
        nb += dnb
        ns += dns
        paprs.append(pv)
    return LinkResult(
        scheme=sc.scheme,
        snr_db=snr_db,
        trials=stop - start,
        bit_errors=be,
        symbol_errors=se,
        total_bits=nb,
        total_symbols=ns,
        papr_values=np.array(paprs),
    )


def _worker(args):
    sc, snr_index, start, stop = args
    return run_trial_range(sc, snr_index, start, stop)


def run(sc: Scenario, workers: int = 1) -> list:
    """Run the full scenario; one LinkResult per SNR point.

    Results are independent of ``workers``: trials are partitioned into
    contiguous ranges and merged in order, and every trial owns its RNG
    stream.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    results = []
    for si in range(len(sc.snr_db_list)):
        if workers == 1 or sc.trials == 1:
            results.append(run_trial_range(sc, si, 0, sc.trials))
            continue
        n_chunks = min(workers, sc.trials)
        bounds = np.linspace(0, sc.trials, n_chunks + 1).astype(int)
        jobs = [(sc, si, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_worker, jobs))
        results.append(reduce(lambda a, b: a.merge(b), parts))
    return results


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def format_csv(results) -> str:
    """Fixed-schema CSV with floats at 12 significant digits."""
    lines = [CSV_HEADER]
    for r in results:
        lines.append(
            f"{r.scheme},{r.snr_db:.12g},{r.trials},{r.ber:.12g},{r.ser:.12g},"
            f"{r.papr_mean:.12g},{r.papr_p99:.12g}"
        )
    return "\n".join(lines) + "\n"


def write_csv(results, path) -> None:
    Path(path).write_text(format_csv(results))


# ---------------------------------------------------------------------------
# channel inspection and PAPR CCDF
# ---------------------------------------------------------------------------


def _scenario_channel(sc: Scenario) -> DDChannelSpec:
    if sc.channel_taps is not None:
        return _fixed_channel(sc)
    L, V = sc.channel_random
    return random_channel(L, V, system_rng(sc.seed, 2))


def inspect_channel(sc: Scenario, out_dir) -> list:
    """Write channel diagnostics as CSV files; returns the written paths.

    * ``tf_channel_db.csv`` — M x N grid of per-cell gains in dB
    * ``windowed_dd_abs.csv`` — N x M delay-Doppler window response magnitudes
    * ``taps.csv`` — the tap listing
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ch = _scenario_channel(sc)
    params = sc.params
    H = tf_channel(ch, params)
    with np.errstate(divide="ignore"):
        H_db = np.maximum(20.0 * np.log10(np.abs(H)), -300.0)
    hw = np.abs(windowed_dd_channel(ch, params))
    paths = []

    def grid_csv(name, grid):
        p = out / name
        rows = [",".join(f"{v:.12g}" for v in row) for row in np.atleast_2d(grid)]
        p.write_text("\n".join(rows) + "\n")
        paths.append(p)

    grid_csv("tf_channel_db.csv", H_db)
    grid_csv("windowed_dd_abs.csv", hw)
    tap_lines = ["delay_bin,doppler_bin,re,im"]
    for l, k, g in ch.taps:
        tap_lines.append(f"{l},{k},{g.real:.12g},{g.imag:.12g}")
    (out / "taps.csv").write_text("\n".join(tap_lines) + "\n")
    paths.append(out / "taps.csv")
    return paths


def papr_ccdf(sc: Scenario) -> str:
    """CCDF of per-block PAPR (dB) for the scenario's transmit chain.

    Blocks are generated with the trial streams of SNR index 0 but never
    touched by channel or noise.  Returns CSV text ``papr_db,ccdf``.
    """
    engine = _make_engine(sc)
    const = engine.const
    vals = []
    for t in range(sc.trials):
        rng = trial_rng(sc.seed, 0, t)
        engine.channel_for_trial(rng)  # keep draw order aligned with simulate
        if sc.multiuser is None:
            bits = rng.integers(0, 2, size=sc.params.dof * const.bits_per_symbol)
            payload = map_bits(bits, const).reshape(modem.payload_shape(engine.cfg))
            sig = modem.modulate(engine.cfg, payload)
        else:
            block = engine.M_d * engine.N_D
            K = len(engine.users)
            bits = rng.integers(0, 2, size=K * block * const.bits_per_symbol)
            symbols = map_bits(bits, const)
            blocks = [
                symbols[u * block : (u + 1) * block].reshape(engine.N_D, engine.M_d)
                for u in range(K)
            ]
            X = multiuser.downlink_superpose(blocks, engine.users, sc.multiuser.mode)
            sig = heisenberg(X, sc.params, cp_len=sc.cp_len)
        vals.append(10.0 * math.log10(papr(sig)))
    vals = np.array(vals)
    hi = float(np.ceil(vals.max() * 4) / 4) if vals.size else 0.0
    thresholds = np.arange(0.0, hi + 0.25, 0.25)
    lines = ["papr_db,ccdf"]
    for th in thresholds:
        ccdf = float(np.mean(vals > th))
        lines.append(f"{th:.12g},{ccdf:.12g}")
    return "\n".join(lines) + "\n"

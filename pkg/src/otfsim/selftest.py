"""Built-in invariant suite backing the CLI ``selftest`` subcommand.

Each check re-derives an algebraic identity the library is supposed to
satisfy and measures the worst deviation on deterministic random data.
Checks call through the module namespaces (not frozen local references),
so a deliberately broken function is caught — the test suite exercises
that with an injected sign error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel, modem, multiuser, transforms
from .frame import interleaved_map, localized_map, make_frame
from .modem import SchemeConfig

_SEED = 20240915
_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_unitarity() -> CheckResult:
    rng = np.random.default_rng(_SEED)
    worst = 0.0
    for M, N in [(4, 4), (8, 2), (16, 8), (1, 8), (8, 1)]:
        params = make_frame(M, N)
        x = rng.normal(size=(N, M)) + 1j * rng.normal(size=(N, M))
        X = transforms.isfft(x)
        worst = max(worst, np.max(np.abs(transforms.sfft(X) - x)))
        worst = max(worst, abs(np.linalg.norm(X) - np.linalg.norm(x)))
        sig = transforms.heisenberg(X, params, cp_len=2 if M > 2 else 0)
        worst = max(worst, np.max(np.abs(transforms.wigner(sig, params) - X)))
    return CheckResult("transform_unitarity", worst < _TOL, f"max deviation {worst:.3e}")


def _check_reductions() -> CheckResult:
    rng = np.random.default_rng(_SEED + 1)
    M = 16
    params1 = make_frame(M, 1)
    x = rng.normal(size=M) + 1j * rng.normal(size=M)
    a = modem.modulate(SchemeConfig("OTFS", params1), x[None, :]).samples
    b = modem.modulate(SchemeConfig("SCFDMA", params1), x).samples
    worst = np.max(np.abs(a - b))
    c = modem.modulate(SchemeConfig("OSTF", params1), x[:, None]).samples
    d = modem.modulate(SchemeConfig("OFDM", params1), x).samples
    worst = max(worst, np.max(np.abs(c - d)))
    params = make_frame(8, 4)
    g = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
    e = modem.modulate(SchemeConfig("OTFS", params, identity_isfft=True), g).samples
    f = modem.modulate(SchemeConfig("OSTF", params), g.T).samples
    worst = max(worst, np.max(np.abs(e - f)))
    return CheckResult("scheme_reductions", worst < _TOL, f"max deviation {worst:.3e}")


def _check_channel_oracle() -> CheckResult:
    rng = np.random.default_rng(_SEED + 2)
    worst = 0.0
    for M, N in [(8, 4), (4, 8)]:
        params = make_frame(M, N)
        ch = channel.random_channel(3, max(1, N // 4), rng)
        A = channel.effective_matrix(
            SchemeConfig("OTFS", params), ch, mode="cyclic"
        )
        T = channel.dd_domain_operator(ch, params)
        worst = max(worst, np.max(np.abs(A - T)))
    return CheckResult("channel_dd_oracle", worst < 1e-9, f"max deviation {worst:.3e}")


def _check_tf_views() -> CheckResult:
    rng = np.random.default_rng(_SEED + 3)
    params = make_frame(16, 8)
    ch = channel.random_channel(4, 3, rng)
    d = np.max(np.abs(channel.tf_channel(ch, params) - channel.tf_channel_factored(ch, params)))
    return CheckResult("tf_channel_factored", d < _TOL, f"max deviation {d:.3e}")


def _check_mui_nulls() -> CheckResult:
    rng = np.random.default_rng(_SEED + 4)
    params = make_frame(16, 8)
    worst = 0.0
    for map_fn in (localized_map, interleaved_map):
        fmaps = [map_fn(params.M, 4, u) for u in range(4)]
        tmaps = [map_fn(params.N, 2, u) for u in range(4)]
        blocks = [rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4)) for _ in range(4)]
        X = sum(
            multiuser.uplink_map_dd(b, f, t) for b, f, t in zip(blocks, fmaps, tmaps)
        )
        for u in range(4):
            est = multiuser.despread_user(X, freq_map=fmaps[u], time_map=tmaps[u], domain="dd")
            worst = max(worst, np.max(np.abs(est - blocks[u])))
    return CheckResult("multiuser_interference_null", worst < _TOL, f"max deviation {worst:.3e}")


def _check_kron() -> CheckResult:
    rng = np.random.default_rng(_SEED + 5)
    fmap = interleaved_map(8, 4, 1)
    tmap = localized_map(4, 2, 0)
    pair = multiuser.dft_spreading_pair(fmap, tmap)
    x = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    lhs = multiuser.kron_spreader(pair) @ multiuser.vec_dd(x)
    rhs = multiuser.vec_tf(multiuser.tf_spread(x, pair))
    d = np.max(np.abs(lhs - rhs))
    return CheckResult("kron_vec_identity", d < _TOL, f"max deviation {d:.3e}")


_CHECKS = (
    _check_unitarity,
    _check_reductions,
    _check_channel_oracle,
    _check_tf_views,
    _check_mui_nulls,
    _check_kron,
)


def run_selftest() -> list:
    """Run all invariant checks; never raises on check failure."""
    results = []
    for fn in _CHECKS:
        try:
            results.append(fn())
        except Exception as e:  # a crash is a failure, not an abort
            name = fn.__name__.lstrip("_").replace("check_", "", 1)
            results.append(CheckResult(name, False, f"raised {type(e).__name__}: {e}"))
    return results

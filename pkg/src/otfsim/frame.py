"""Frame geometry: grid dimensions, resolutions, time signals and index maps.

A frame is an M x N time-frequency lattice (M subcarriers spaced delta_f,
N slots of duration T = 1/delta_f) carrying M*N degrees of freedom.  The
same frame viewed on the delay-Doppler lattice is an N x M grid whose
rows are Doppler bins (resolution 1/(N*T)) and whose columns are delay
bins (resolution 1/(M*delta_f)).

Array conventions used throughout the library:

* delay-Doppler grid  ``x_dd``: shape (N, M), ``x_dd[doppler_bin, delay_bin]``
* time-frequency grid ``x_tf``: shape (M, N), ``x_tf[subcarrier, slot]``
* time signal: one block of N slots, each slot = cp_len prefix samples +
  M body samples at critical sampling rate M*delta_f.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllocationError


@dataclass(frozen=True)
class FrameParams:
    """Dimensions and spacing of one transmission block."""

    M: int
    N: int
    delta_f: float = 15e3

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"grid dims must be >= 1, got M={self.M} N={self.N}")
        if self.delta_f <= 0:
            raise ValueError(f"subcarrier spacing must be positive, got {self.delta_f}")

    @property
    def T(self) -> float:
        """Slot duration in seconds."""
        return 1.0 / self.delta_f

    @property
    def bandwidth(self) -> float:
        return self.M * self.delta_f

    @property
    def block_duration(self) -> float:
        return self.N * self.T

    @property
    def delay_resolution(self) -> float:
        """Delay bin width, 1/(M*delta_f) seconds."""
        return 1.0 / (self.M * self.delta_f)

    @property
    def doppler_resolution(self) -> float:
        """Doppler bin width, 1/(N*T) Hz."""
        return 1.0 / (self.N * self.T)

    @property
    def dof(self) -> int:
        """Complex degrees of freedom per block."""
        return self.M * self.N


def make_frame(M: int, N: int, delta_f: float = 15e3) -> FrameParams:
    """Validate and build FrameParams."""
    return FrameParams(M=int(M), N=int(N), delta_f=float(delta_f))


@dataclass(frozen=True)
class TimeSignal:
    """One block of baseband samples at critical sampling.

    ``samples`` holds ``num_slots`` slots of ``cp_len + M`` samples each;
    the body (post-prefix) samples are the information-bearing part.
    """

    samples: np.ndarray
    cp_len: int
    sample_rate: float
    num_slots: int

    def __post_init__(self):
        if self.samples.ndim != 1:
            raise ValueError("TimeSignal.samples must be 1-D")
        if self.cp_len < 0:
            raise ValueError("cp_len must be >= 0")
        if self.num_slots < 1:
            raise ValueError("num_slots must be >= 1")
        if self.samples.size % self.num_slots != 0:
            raise ValueError(
                f"sample count {self.samples.size} not divisible by num_slots {self.num_slots}"
            )
        if self.slot_len <= self.cp_len:
            raise ValueError("slot shorter than its cyclic prefix")

    @property
    def slot_len(self) -> int:
        return self.samples.size // self.num_slots

    @property
    def body_len(self) -> int:
        """Body samples per slot (slot minus prefix)."""
        return self.slot_len - self.cp_len

    @property
    def body(self) -> np.ndarray:
        """All body samples, prefixes stripped, concatenated in time order."""
        if self.cp_len == 0:
            return self.samples
        blocks = self.samples.reshape(self.num_slots, self.slot_len)
        return blocks[:, self.cp_len:].reshape(-1)


def check_dd_grid(x: np.ndarray, params: FrameParams) -> np.ndarray:
    """Validate a delay-Doppler grid (N rows of Doppler, M columns of delay)."""
    x = np.asarray(x)
    if x.shape != (params.N, params.M):
        raise ValueError(f"expected DD grid of shape {(params.N, params.M)}, got {x.shape}")
    return x.astype(np.complex128, copy=False)


def check_tf_grid(x: np.ndarray, params: FrameParams) -> np.ndarray:
    """Validate a time-frequency grid (M rows of subcarriers, N slot columns)."""
    x = np.asarray(x)
    if x.shape != (params.M, params.N):
        raise ValueError(f"expected TF grid of shape {(params.M, params.N)}, got {x.shape}")
    return x.astype(np.complex128, copy=False)


@dataclass(frozen=True)
class MappingMatrix:
    """A resource-mapping matrix: ``size`` columns of the ``ambient``-dim identity.

    Stored as the tuple of selected indices; ``dense()`` materialises the
    (ambient x size) 0/1 matrix for algebraic checks.  Applying the map
    embeds a small vector into the ambient space; ``extract`` is the
    transpose (a selection).
    """

    ambient: int
    selected: tuple
    kind: str = "custom"

    def __post_init__(self):
        sel = tuple(int(i) for i in self.selected)
        object.__setattr__(self, "selected", sel)
        if len(sel) == 0:
            raise AllocationError("mapping selects no indices")
        if len(set(sel)) != len(sel):
            raise AllocationError(f"mapping indices repeat: {sel}")
        if min(sel) < 0 or max(sel) >= self.ambient:
            raise AllocationError(
                f"mapping indices {sel} out of range for ambient dim {self.ambient}"
            )

    @property
    def size(self) -> int:
        return len(self.selected)

    def dense(self) -> np.ndarray:
        """The (ambient x size) matrix whose i-th column is e_{selected[i]}."""
        P = np.zeros((self.ambient, self.size))
        P[list(self.selected), np.arange(self.size)] = 1.0
        return P


def localized_map(ambient: int, block: int, user: int) -> MappingMatrix:
    """Contiguous allocation: user k gets indices k*block ... k*block+block-1."""
    if block < 1 or ambient % block != 0:
        raise AllocationError(f"block size {block} does not tile ambient dim {ambient}")
    num_users = ambient // block
    if not 0 <= user < num_users:
        raise AllocationError(f"user {user} out of range for {num_users} users")
    sel = tuple(range(user * block, (user + 1) * block))
    return MappingMatrix(ambient, sel, kind="localized")


def interleaved_map(ambient: int, block: int, user: int) -> MappingMatrix:
    """Comb allocation: user k gets indices k, k+K, k+2K, ... with K = ambient/block."""
    if block < 1 or ambient % block != 0:
        raise AllocationError(f"block size {block} does not tile ambient dim {ambient}")
    num_users = ambient // block
    if not 0 <= user < num_users:
        raise AllocationError(f"user {user} out of range for {num_users} users")
    sel = tuple(user + i * num_users for i in range(block))
    return MappingMatrix(ambient, sel, kind="interleaved")


def custom_map(ambient: int, indices) -> MappingMatrix:
    return MappingMatrix(ambient, tuple(indices), kind="custom")


def apply_map(mapping: MappingMatrix, v: np.ndarray) -> np.ndarray:
    """Embed ``v`` (length mapping.size) into the ambient space."""
    v = np.asarray(v)
    if v.shape != (mapping.size,):
        raise ValueError(f"expected vector of length {mapping.size}, got shape {v.shape}")
    out = np.zeros(mapping.ambient, dtype=np.result_type(v.dtype, np.complex128))
    out[list(mapping.selected)] = v
    return out


def extract_map(mapping: MappingMatrix, v: np.ndarray) -> np.ndarray:
    """Select the mapped entries back out of an ambient-space vector."""
    v = np.asarray(v)
    if v.shape != (mapping.ambient,):
        raise ValueError(f"expected vector of length {mapping.ambient}, got shape {v.shape}")
    return v[list(mapping.selected)]


def embed_rows(mapping: MappingMatrix, A: np.ndarray) -> np.ndarray:
    """Place the rows of A at the mapped row positions of a taller zero matrix."""
    A = np.atleast_2d(np.asarray(A))
    if A.shape[0] != mapping.size:
        raise ValueError(f"expected {mapping.size} rows, got {A.shape[0]}")
    out = np.zeros((mapping.ambient, A.shape[1]), dtype=np.complex128)
    out[list(mapping.selected), :] = A
    return out


def embed_cols(mapping: MappingMatrix, A: np.ndarray) -> np.ndarray:
    """Place the columns of A at the mapped column positions of a wider zero matrix."""
    A = np.atleast_2d(np.asarray(A))
    if A.shape[1] != mapping.size:
        raise ValueError(f"expected {mapping.size} columns, got {A.shape[1]}")
    out = np.zeros((A.shape[0], mapping.ambient), dtype=np.complex128)
    out[:, list(mapping.selected)] = A
    return out


@dataclass(frozen=True)
class UserAllocation:
    """Orthogonal partition of the frame among K_d x K_D users.

    ``users[k]`` is a (frequency map, time map) pair; frequency maps
    partition the M subcarrier/delay indices into K_d blocks of
    M_d = M/K_d, time maps partition the N slots into K_D blocks of
    N_D = N/K_D.  Exact tiling is required.
    """

    K_d: int
    K_D: int
    users: tuple = field(default=())

    def __post_init__(self):
        if not self.users:
            raise AllocationError("allocation has no users")
        # orthogonality: every (freq, time) resource claimed at most once
        seen = set()
        for fmap, tmap in self.users:
            for i in fmap.selected:
                for j in tmap.selected:
                    if (i, j) in seen:
                        raise AllocationError(f"resource {(i, j)} allocated twice")
                    seen.add((i, j))

    @property
    def num_users(self) -> int:
        return len(self.users)


def _tiled_alloc(params: FrameParams, K_d: int, K_D: int, map_fn) -> UserAllocation:
    if K_d < 1 or params.M % K_d != 0:
        raise AllocationError(f"K_d={K_d} does not tile M={params.M}")
    if K_D < 1 or params.N % K_D != 0:
        raise AllocationError(f"K_D={K_D} does not tile N={params.N}")
    M_d = params.M // K_d
    N_D = params.N // K_D
    users = tuple(
        (map_fn(params.M, M_d, kf), map_fn(params.N, N_D, kt))
        for kf in range(K_d)
        for kt in range(K_D)
    )
    return UserAllocation(K_d=K_d, K_D=K_D, users=users)


def localized_allocation(params: FrameParams, K_d: int, K_D: int) -> UserAllocation:
    """All K_d*K_D users with contiguous frequency and time blocks."""
    return _tiled_alloc(params, K_d, K_D, localized_map)


def interleaved_allocation(params: FrameParams, K_d: int, K_D: int) -> UserAllocation:
    """All K_d*K_D users with comb-interleaved frequency and time blocks."""
    return _tiled_alloc(params, K_d, K_D, interleaved_map)

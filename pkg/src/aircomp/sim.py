"""Monte-Carlo link simulation for coded (and uncoded) digital AirComp.

A trial draws K information blocks with digits uniform on [0, p-1], encodes
each with the shared NB-LDPC code, maps the codewords onto the cubic lattice,
superposes them over the channel and decodes the modulo-q sum codeword.
Because K(p-1) <= q-1, the information part of that codeword is the natural
digit-wise sum.

Each trial owns a generator seeded from ``(seed, point_index, trial_index)``,
so results do not depend on chunk size or on the number of workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, fields, replace
from functools import lru_cache
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

from .bp import BatchDecoder
from .channel import ChannelParams, draw_impairments, sigma_from_snr, superpose
from .codec import unpack_block
from .demod import _per_dim_loglik, codeword_llrs, fold, gamma_profile, PriorProfile
from .field import PrimeField, check_no_wrap, smallest_valid_q
from .lattice import LatticeConfig, demap_hard, desegment, map_point, segment
from .ldpc import Encoder, ParityCheckMatrix, random_code, read_alist_file

CSV_COLUMNS = (
    "mode", "p", "q", "K", "D", "theta", "snr_db",
    "trials", "block_errors", "bler", "mean_iterations", "seed",
)

DEFAULT_CODE = "random:48,96,3"


class ConfigError(ValueError):
    pass


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("aircomp") / "data" / name))


@dataclass(frozen=True)
class SimConfig:
    p: int = 2
    q: int = 0  # 0 selects the smallest prime allowed for (K, p)
    K: int = 2
    D: int = 1
    l: int = 6
    code: str = DEFAULT_CODE  # "alist:<path>" or "random:M,N,w[,seed]"
    snr_db: tuple[float, ...] = (10.0,)
    theta_max: tuple[float, ...] = (0.0,)
    max_iterations: int = 20
    trials: int = 10_000
    max_block_errors: int | None = 200
    mode: str = "coded"
    seed: int = 0
    out: str | None = None
    metric: str = "full"
    folded: bool = True
    phase_per_symbol: bool = False
    chunk_size: int = 1000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        object.__setattr__(self, "theta_max", tuple(float(t) for t in np.atleast_1d(self.theta_max)))

    @property
    def field_order(self) -> int:
        return self.q if self.q else smallest_valid_q(self.K, self.p)

    @property
    def grid(self) -> list[tuple[float, float]]:
        return [(s, t) for s in self.snr_db for t in self.theta_max]

    def link_key(self) -> "SimConfig":
        """The parts of the config that fix the code and the decoder."""
        return replace(self, snr_db=(0.0,), theta_max=(0.0,), trials=1, max_block_errors=None,
                       out=None, chunk_size=1, workers=1, seed=0)


def parse_code_spec(spec: str) -> tuple[str, tuple]:
    kind, _, arg = spec.partition(":")
    if kind == "alist" and arg:
        return "alist", (arg,)
    if kind == "random" and arg:
        try:
            nums = [int(x) for x in arg.split(",")]
        except ValueError:
            raise ConfigError(f"bad random code spec {spec!r}") from None
        if len(nums) == 3:
            nums.append(1)
        if len(nums) != 4:
            raise ConfigError("random code spec is random:M,N,w[,seed]")
        return "random", tuple(nums)
    raise ConfigError(f"code must be alist:<path> or random:M,N,w[,seed]; got {spec!r}")


@dataclass(frozen=True, eq=False)
class Link:
    """Everything a trial needs that does not change between trials."""

    cfg: SimConfig
    field: PrimeField
    H: ParityCheckMatrix
    encoder: Encoder
    lattice: LatticeConfig
    profile: PriorProfile
    decoder: BatchDecoder = dc_field(repr=False)

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def B(self) -> int:
        return self.H.B

    @property
    def n_tx(self) -> int:
        """Symbols per transmitted block."""
        return self.H.N if self.cfg.mode == "coded" else self.H.B

    @property
    def n_check(self) -> int:
        """Positions that must match for a block to count as correct."""
        return self.B if (self.cfg.metric == "info" or self.cfg.mode == "uncoded") else self.H.N


def validate(cfg: SimConfig) -> None:
    if cfg.mode not in ("coded", "uncoded"):
        raise ConfigError(f"mode must be 'coded' or 'uncoded', got {cfg.mode!r}")
    if cfg.metric not in ("full", "info"):
        raise ConfigError(f"metric must be 'full' or 'info', got {cfg.metric!r}")
    if cfg.D not in (1, 2):
        raise ConfigError(f"D must be 1 or 2, got {cfg.D}")
    if cfg.p < 2 or cfg.K < 1 or cfg.l < 1:
        raise ConfigError("need p >= 2, K >= 1, l >= 1")
    try:
        PrimeField(cfg.field_order)
        check_no_wrap(cfg.K, cfg.p, cfg.field_order)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.max_iterations < 1 or cfg.trials < 1 or cfg.chunk_size < 1:
        raise ConfigError("max_iterations, trials and chunk_size must be positive")
    if any(t < 0 for t in cfg.theta_max):
        raise ConfigError("theta must be >= 0")
    if cfg.D != 2 and any(t > 0 for t in cfg.theta_max):
        raise ConfigError("phase shift requires D=2")
    if any(math.isnan(s) or s == -math.inf for s in cfg.snr_db):
        raise ConfigError("snr_db must be finite or +inf")
    parse_code_spec(cfg.code)


@lru_cache(maxsize=32)
def _build_link(key: SimConfig) -> Link:
    validate(key)
    fld = PrimeField(key.field_order)
    kind, args = parse_code_spec(key.code)
    if kind == "alist":
        H = read_alist_file(args[0], fld)
    else:
        M, N, w, code_seed = args
        H = random_code(M, N, w, fld, seed=code_seed)
    n_tx = H.N if key.mode == "coded" else H.B
    if n_tx % key.D:
        raise ConfigError(f"block length {n_tx} not divisible by D={key.D}")
    if H.B % key.l:
        raise ConfigError(f"information length {H.B} not divisible by l={key.l}")
    profile = gamma_profile(key.K, key.p, fld.q).with_layout(
        H.B if key.mode == "coded" else n_tx, n_tx
    )
    return Link(
        cfg=key,
        field=fld,
        H=H,
        encoder=Encoder(H),
        lattice=LatticeConfig(key.D, fld.q),
        profile=profile,
        decoder=BatchDecoder(H, key.max_iterations),
    )


def build_link(cfg: SimConfig) -> Link:
    return _build_link(cfg.link_key())


def trial_rng(seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, point_index, trial_index])


@dataclass(frozen=True)
class TrialBatch:
    info: np.ndarray  # (T, K, B) digits per transmitter
    true_sum: np.ndarray  # (T, n_tx) modulo-q sum of transmitted blocks
    estimate: np.ndarray  # (T, n_tx) decoded sum
    correct: np.ndarray  # (T,) bool
    iterations: np.ndarray  # (T,)


@dataclass(frozen=True)
class TrialOutcome:
    block_correct: bool
    iterations_used: int
    info: np.ndarray
    true_sum: np.ndarray
    estimate: np.ndarray


def _run_trials(cfg: SimConfig, snr_db: float, theta: float, point_index: int,
                trial_indices: Sequence[int]) -> TrialBatch:
    link = build_link(cfg)
    K, B, D = cfg.K, link.B, cfg.D
    I = link.n_tx // D
    params = ChannelParams(K=K, sigma_w=0.0, theta_max=theta, D=D,
                           phase_per_symbol=cfg.phase_per_symbol)
    T = len(trial_indices)
    info = np.empty((T, K, B), dtype=np.int64)
    u = np.empty((T, K, I) if cfg.phase_per_symbol else (T, K))
    z = np.empty((T, I, D))
    for j, t in enumerate(trial_indices):
        rng = trial_rng(cfg.seed, point_index, t)
        info[j] = rng.integers(0, cfg.p, size=(K, B))
        u[j], z[j] = draw_impairments(rng, params, I)

    blocks = link.encoder.encode_array(info) if cfg.mode == "coded" else info
    sigma = sigma_from_snr(snr_db, K, link.q, D)
    x = map_point(segment(blocks, D), link.lattice)
    y = superpose(x, theta * u if theta else None, z, sigma)
    true_sum = blocks.sum(axis=1) % link.q

    if cfg.mode == "coded":
        llrs = codeword_llrs(y, link.profile, sigma, link.lattice, folded=cfg.folded)
        res = link.decoder.decode(llrs)
        est, iters = res.estimates, res.iterations
    else:
        est = desegment(demap_hard(fold(y), link.lattice))
        iters = np.zeros(T, dtype=np.int64)
    n = link.n_check
    correct = np.all(est[:, :n] == true_sum[:, :n], axis=1)
    return TrialBatch(info, true_sum, est, correct, iters)


def run_trial(cfg: SimConfig, trial_index: int, point_index: int = 0) -> TrialOutcome:
    """One trial at grid point ``point_index`` (SNR-major over ``cfg.grid``)."""
    snr, theta = cfg.grid[point_index]
    b = _run_trials(cfg, snr, theta, point_index, [trial_index])
    return TrialOutcome(bool(b.correct[0]), int(b.iterations[0]), b.info[0], b.true_sum[0], b.estimate[0])


def recovered_sums(cfg: SimConfig, estimate: np.ndarray) -> list[int]:
    """Natural-integer sums carried by the information part of a decoded block."""
    link = build_link(cfg)
    return unpack_block(np.asarray(estimate)[..., : link.B], cfg.p, cfg.l)


@dataclass(frozen=True)
class BlerRecord:
    mode: str
    p: int
    q: int
    K: int
    D: int
    theta: float
    snr_db: float
    trials: int
    block_errors: int
    bler: float
    mean_iterations: float
    seed: int
    wall_time: float = dc_field(default=0.0, compare=False)

    def csv_row(self) -> list[str]:
        return [v if isinstance(v, str) else repr(v) for v in (getattr(self, c) for c in CSV_COLUMNS)]


def _chunk_job(args) -> tuple[np.ndarray, np.ndarray]:
    cfg, snr, theta, point_index, start, stop = args
    b = _run_trials(cfg, snr, theta, point_index, range(start, stop))
    return b.correct, b.iterations


def run_point(cfg: SimConfig, point_index: int, executor: ProcessPoolExecutor | None = None) -> BlerRecord:
    validate(cfg)
    snr, theta = cfg.grid[point_index]
    t0 = time.perf_counter()
    starts = list(range(0, cfg.trials, cfg.chunk_size))
    jobs = [(cfg, snr, theta, point_index, s, min(s + cfg.chunk_size, cfg.trials)) for s in starts]
    wave = max(1, cfg.workers)
    cap = cfg.max_block_errors or 0
    trials = errors = iters = 0
    done = False
    for w in range(0, len(jobs), wave):
        batch = jobs[w : w + wave]
        results = executor.map(_chunk_job, batch) if executor else map(_chunk_job, batch)
        for correct, it in results:
            if done:
                continue
            err = ~correct
            if cap and errors + err.sum() >= cap:
                # stop at the trial that produced the cap-th error
                cut = int(np.flatnonzero(np.cumsum(err) == cap - errors)[0]) + 1
                correct, it, err = correct[:cut], it[:cut], err[:cut]
                done = True
            trials += correct.size
            errors += int(err.sum())
            iters += int(it.sum())
        if done:
            break
    link = build_link(cfg)
    return BlerRecord(
        mode=cfg.mode, p=cfg.p, q=link.q, K=cfg.K, D=cfg.D, theta=theta, snr_db=snr,
        trials=trials, block_errors=errors, bler=errors / trials,
        mean_iterations=iters / trials, seed=cfg.seed,
        wall_time=time.perf_counter() - t0,
    )


def records_to_csv(records: Sequence[BlerRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def run_sweep(cfg: SimConfig) -> list[BlerRecord]:
    validate(cfg)
    out_fh = None
    if cfg.out:
        try:
            out_fh = open(cfg.out, "w", encoding="ascii", newline="")
        except OSError as exc:
            raise OSError(f"cannot write output {cfg.out!r}: {exc}") from exc
    build_link(cfg)
    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as ex:
                records = [run_point(cfg, i, ex) for i in range(len(cfg.grid))]
        else:
            records = [run_point(cfg, i) for i in range(len(cfg.grid))]
        if out_fh:
            out_fh.write(records_to_csv(records))
    finally:
        if out_fh:
            out_fh.close()
    return records


# ---------------------------------------------------------------------------
# brute-force joint decoding baseline
# ---------------------------------------------------------------------------

ORACLE_LIMIT = 10**6


class JointMapOracle:
    """Exhaustive decoder over every joint choice of the K transmitters' blocks.

    Each joint tuple is scored by the folded-Gaussian likelihood of the
    received block given its modulo-q sum codeword.  ``rule="sum"`` adds up
    tuples that produce the same sum codeword (block-MAP on the sum);
    ``rule="tuple"`` keeps the single most likely tuple.
    """

    def __init__(self, encoder: Encoder, K: int, p: int, lattice: LatticeConfig, folded: bool = True):
        H = encoder.H
        n_tuples = p ** (K * H.B)
        if n_tuples > ORACLE_LIMIT:
            raise ValueError(f"oracle limited to desk scale ({n_tuples} joint candidates)")
        if H.N % lattice.D:
            raise ValueError("codeword length not divisible by D")
        self.H, self.K, self.p, self.lattice, self.folded = H, K, p, lattice, folded
        infos = np.array(list(product(range(p), repeat=H.B)), dtype=np.int64)
        codewords = encoder.encode_array(infos)
        idx = np.array(list(product(range(len(infos)), repeat=K)), dtype=np.int64)
        sums = codewords[idx].sum(axis=1) % H.q
        self.candidates, self.multiplicity = np.unique(sums, axis=0, return_counts=True)

    def scores(self, received, sigma_w: float, rule: str = "sum") -> np.ndarray:
        t = fold(np.asarray(received, dtype=float))
        lg = _per_dim_loglik(t, self.H.q, max(sigma_w, 1e-9), self.folded)
        lg = lg.reshape(self.H.N, self.H.q)
        ll = lg[np.arange(self.H.N)[None, :], self.candidates].sum(axis=1)
        if rule == "sum":
            return ll + np.log(self.multiplicity)
        if rule == "tuple":
            return ll
        raise ValueError(f"unknown rule {rule!r}")

    def decode(self, received, sigma_w: float, rule: str = "sum") -> np.ndarray:
        return self.candidates[int(np.argmax(self.scores(received, sigma_w, rule)))].copy()


def oracle_decode(received, encoder: Encoder, K: int, p: int, sigma_w: float,
                  lattice: LatticeConfig, rule: str = "sum") -> np.ndarray:
    return JointMapOracle(encoder, K, p, lattice).decode(received, sigma_w, rule)


def complexity_table(p: int, K_range: Sequence[int]) -> list[tuple[int, int, int]]:
    """Per K: (K, states per symbol of the sum decoder, joint transmitter states)."""
    K_range = list(K_range)
    if not K_range:
        raise ValueError("K_range is empty")
    return [(K, smallest_valid_q(K, p), p**K) for K in K_range]

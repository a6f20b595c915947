"""Fast invariant checks behind ``aircomp selftest``."""

from __future__ import annotations

from itertools import product

import numpy as np

from .bp import box_plus, probs_from_llrv
from .field import PrimeField, smallest_valid_q
from .lattice import LatticeConfig, map_point, mod1
from .sim import SimConfig, complexity_table, run_trial


def _field_inverses() -> bool:
    for q in (3, 5, 7, 11):
        F = PrimeField(q)
        if any((F(a) * F(a).inverse()).value != 1 for a in range(1, q)):
            return False
    return True


def _lattice_linearity() -> bool:
    for D, K in product((1, 2), range(1, 5)):
        cfg = LatticeConfig(D, 3)
        for us in product(cfg.labels(), repeat=K):
            u = np.array(us)
            lhs = mod1(map_point(u, cfg).sum(axis=0))
            if not np.allclose(lhs, map_point(u.sum(axis=0) % 3, cfg), atol=1e-12):
                return False
    return True


def _box_plus_oracle() -> bool:
    rng = np.random.default_rng(0)
    for q in (3, 5, 7):
        for _ in range(50):
            L1, L2 = rng.uniform(-8, 8, (2, q - 1))
            P1, P2 = probs_from_llrv(L1), probs_from_llrv(L2)
            a1, a2 = rng.integers(1, q, 2)
            conv = np.zeros(q)
            for x, y in product(range(q), repeat=2):
                conv[(a1 * x + a2 * y) % q] += P1[x] * P2[y]
            got = probs_from_llrv(box_plus(L1, L2, int(a1), int(a2)))
            if not np.allclose(got, conv, rtol=1e-9, atol=0):
                return False
    return True


def _noiseless_pipeline() -> bool:
    for p, K, D in [(2, 2, 1), (3, 2, 2), (2, 4, 1)]:
        cfg = SimConfig(p=p, K=K, D=D, snr_db=(float("inf"),), trials=5)
        if not all(run_trial(cfg, t).block_correct for t in range(5)):
            return False
    return True


def _complexity() -> bool:
    return complexity_table(2, range(1, 8)) == [(K, smallest_valid_q(K, 2), 2**K) for K in range(1, 8)]


CHECKS = [
    ("field inverses", _field_inverses),
    ("lattice linearity", _lattice_linearity),
    ("box-plus vs convolution", _box_plus_oracle),
    ("noiseless pipeline", _noiseless_pipeline),
    ("complexity table", _complexity),
]


def run_all(verbose: bool = True) -> bool:
    ok = True
    for name, check in CHECKS:
        passed = bool(check())
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'} {name}")
    return ok

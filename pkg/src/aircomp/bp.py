"""Log-domain belief propagation for non-binary LDPC codes over Z_q.

Messages are LLR vectors (LLRVs): for a q-ary variable ``v`` the array
``L[alpha - 1] = ln P(v = alpha) / P(v = 0)`` for ``alpha = 1 .. q-1``; the
value 0 carries an implicit LLR of 0.  Every message is clamped to
``[-L_MAX, L_MAX]``.

Two decoders share these semantics:

* :class:`DecoderState` / :func:`decode` walk check and variable nodes one at a
  time through :func:`box_plus` and :func:`permute`.  Slow, easy to audit.
* :class:`BatchDecoder` runs the same flooding schedule vectorised over all
  rows and over a batch of independent codewords.  The simulator uses this.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .field import FieldElement
from .ldpc import ParityCheckMatrix, syndrome

L_MAX = 30.0


def _clamp(x: np.ndarray) -> np.ndarray:
    return np.clip(x, -L_MAX, L_MAX)


def _coef(a, q: int) -> int:
    a = a.value if isinstance(a, FieldElement) else int(a)
    a %= q
    if a == 0:
        raise ValueError("coefficient must be non-zero")
    return a


@lru_cache(maxsize=None)
def _shift_index(q: int) -> np.ndarray:
    """``idx[alpha, beta] = (beta - alpha) mod q``."""
    a = np.arange(q)
    return (a[None, :] - a[:, None]) % q


def _full(L: np.ndarray) -> np.ndarray:
    """Prepend the implicit zero LLR of value 0."""
    zeros = np.zeros(L.shape[:-1] + (1,), dtype=float)
    return np.concatenate([zeros, L], axis=-1)


def _exp_full(L: np.ndarray) -> np.ndarray:
    out = np.empty(L.shape[:-1] + (L.shape[-1] + 1,))
    out[..., 0] = 1.0
    np.exp(L, out=out[..., 1:])
    return out


def _log_conv_llrv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """LLRV of ``v1 + v2`` for independent v1, v2 with LLRVs a, b.

    Exact log-sum-exp over the q^2 value pairs, evaluated as log of a sum of
    products of exponentials.  Inputs must be clamped: with |L| <= L_MAX every
    product lies in [exp(-2 L_MAX), exp(2 L_MAX)], far from double-precision
    underflow or overflow.  Broadcasts over leading dimensions.
    """
    q = a.shape[-1] + 1
    conv = np.einsum("...a,...ab->...b", _exp_full(a), _exp_full(b)[..., _shift_index(q)])
    lc = np.log(conv)
    return _clamp(lc[..., 1:] - lc[..., :1])


def llrv_from_probs(probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise ValueError("negative probability")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log(probs)
        L = logp[1:] - logp[0]
    # 0/0 ratios carry no information
    L = np.where(np.isnan(L), 0.0, L)
    return _clamp(L)


def probs_from_llrv(L) -> np.ndarray:
    full = _full(np.asarray(L, dtype=float))
    full = full - full.max(axis=-1, keepdims=True)
    p = np.exp(full)
    return p / p.sum(axis=-1, keepdims=True)


def uniform_llrv(q: int) -> np.ndarray:
    return np.zeros(q - 1)


def pinned_llrv(value: int, q: int) -> np.ndarray:
    """LLRV concentrating (up to the clamp) all mass on ``value``."""
    if value == 0:
        return np.full(q - 1, -L_MAX)
    L = np.zeros(q - 1)
    L[value - 1] = L_MAX
    return L


def permute(L, a, q: int | None = None) -> np.ndarray:
    """LLRV of ``w = a v`` given the LLRV of ``v``."""
    L = np.asarray(L, dtype=float)
    q = q or L.shape[-1] + 1
    a = _coef(a, q)
    a_inv = pow(a, q - 2, q)
    src = (a_inv * np.arange(1, q)) % q
    return L[..., src - 1]


def box_plus(L1, L2, A1, A2) -> np.ndarray:
    """LLRV of ``A1 v1 + A2 v2`` (mod q) for independent v1, v2."""
    L1 = _clamp(np.asarray(L1, dtype=float))
    L2 = _clamp(np.asarray(L2, dtype=float))
    q = L1.shape[-1] + 1
    if L2.shape[-1] != q - 1:
        raise ValueError("LLRVs over different fields")
    return _log_conv_llrv(permute(L1, A1, q), permute(L2, A2, q))


def hard_decision(L_post: np.ndarray) -> np.ndarray:
    """Most likely value per symbol; ties go to the smallest value."""
    return np.argmax(_full(L_post), axis=-1)


# ---------------------------------------------------------------------------
# reference decoder, node by node
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecodeResult:
    codeword_estimate: np.ndarray
    converged: bool
    iterations_used: int
    posterior: np.ndarray | None = dc_field(default=None, repr=False)


@dataclass
class DecoderState:
    H: ParityCheckMatrix
    channel_llrs: np.ndarray
    max_iterations: int = 20
    messages_v2c: np.ndarray = dc_field(init=False, repr=False)
    messages_c2v: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        self.channel_llrs = np.asarray(self.channel_llrs, dtype=float)
        if self.channel_llrs.shape != (self.H.N, self.H.q - 1):
            raise ValueError(
                f"channel LLRs must have shape {(self.H.N, self.H.q - 1)}, "
                f"got {self.channel_llrs.shape}"
            )
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        self.reset()

    def reset(self) -> None:
        self.messages_v2c = self.channel_llrs[self.H.cols].copy()
        self.messages_c2v = np.zeros((self.H.n_edges, self.H.q - 1))

    def posterior(self) -> np.ndarray:
        post = self.channel_llrs.copy()
        np.add.at(post, self.H.cols, self.messages_c2v)
        return post


def check_node_update(state: DecoderState, m: int) -> None:
    H, q = state.H, state.H.q
    edges = H.row_edges(m)
    d = edges.size
    coefs = [int(H.vals[e]) for e in edges]
    if d == 1:
        state.messages_c2v[edges[0]] = pinned_llrv(0, q)
        return
    incoming = [state.messages_v2c[e] for e in edges]
    fwd = [permute(incoming[0], coefs[0], q)]
    for l in range(1, d):
        fwd.append(box_plus(fwd[-1], incoming[l], 1, coefs[l]))
    bwd = [None] * d
    bwd[d - 1] = permute(incoming[d - 1], coefs[d - 1], q)
    for l in range(d - 2, -1, -1):
        bwd[l] = box_plus(bwd[l + 1], incoming[l], 1, coefs[l])
    for k, e in enumerate(edges):
        if k == 0:
            rest = bwd[1]
        elif k == d - 1:
            rest = fwd[d - 2]
        else:
            rest = box_plus(fwd[k - 1], bwd[k + 1], 1, 1)
        # h_k c_k = -(rest)  =>  c_k = -h_k^{-1} rest
        neg_inv = (-pow(coefs[k], q - 2, q)) % q
        state.messages_c2v[e] = permute(rest, neg_inv, q)


def variable_node_update(state: DecoderState, n: int) -> None:
    edges = state.H.col_edges(n)
    incoming = state.messages_c2v[edges]
    for i, e in enumerate(edges):
        others = np.delete(incoming, i, axis=0)
        state.messages_v2c[e] = _clamp(state.channel_llrs[n] + others.sum(axis=0))


def decode(state: DecoderState, early_stop: bool = True) -> DecodeResult:
    H = state.H
    state.reset()
    post = state.posterior()
    est = hard_decision(post)
    if early_stop and not syndrome(H, est).any():
        return DecodeResult(est, True, 0, post)
    for it in range(1, state.max_iterations + 1):
        for m in range(H.M):
            check_node_update(state, m)
        post = state.posterior()
        est = hard_decision(post)
        if early_stop and not syndrome(H, est).any():
            return DecodeResult(est, True, it, post)
        for n in range(H.N):
            variable_node_update(state, n)
    return DecodeResult(est, not syndrome(H, est).any(), state.max_iterations, post)


# ---------------------------------------------------------------------------
# vectorised decoder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchResult:
    estimates: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    posterior: np.ndarray


_RATIO_MIN, _RATIO_MAX = np.exp(-L_MAX), np.exp(L_MAX)


def _prob_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exponential-domain counterpart of :func:`_log_conv_llrv`.

    ``a`` and ``b`` hold ``[1, exp(L)]`` along axis 0 (value-major, any
    trailing shape).  The result is renormalised the same way, with ratios
    clipped to ``exp(+-L_MAX)``.
    """
    q = a.shape[0]
    out = np.empty_like(a)
    for beta in range(q):
        acc = a[0] * b[beta]
        for alpha in range(1, q):
            acc += a[alpha] * b[(beta - alpha) % q]
        out[beta] = acc
    out[1:] /= out[0]
    out[0] = 1.0
    np.maximum(out[1:], _RATIO_MIN, out=out[1:])
    np.minimum(out[1:], _RATIO_MAX, out=out[1:])
    return out


class BatchDecoder:
    """Flooding BP over a batch of codewords sharing one parity-check matrix.

    Internally messages are laid out ``(edge, value, trial)`` so that every
    arithmetic step runs over long contiguous trial vectors.  The check pass
    works in the exponential domain: an LLRV ``L`` is held as ``[1, exp(L)]``
    and each partial box-plus result is renormalised to a leading 1 with its
    ratios clipped to ``exp(+-L_MAX)``, the same clamp as the reference
    decoder.
    """

    def __init__(self, H: ParityCheckMatrix, max_iterations: int = 20):
        if max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        self.H = H
        self.max_iterations = max_iterations
        q, E, M = H.q, H.n_edges, H.M
        qm = q - 1
        deg = H.row_degrees
        self.dmax = int(deg.max())
        starts = np.concatenate([[0], np.cumsum(deg)[:-1]])
        slot = np.arange(self.dmax)
        valid = slot[None, :] < deg[:, None]
        # pad slots reuse the row's first edge; their results are discarded
        row_idx = np.where(valid, starts[:, None] + slot[None, :], starts[:, None])
        self.row_deg = deg[:, None]
        self.single_rows = np.flatnonzero(deg == 1)

        beta = np.arange(1, q)
        h = H.vals
        # permute(L, h_e) on the way in, permute(., -h_e^{-1}) on the way out
        in_perm = ((H.field.inverse_table[h][:, None] * beta[None, :]) % q) - 1
        out_perm = ((-h[:, None] * beta[None, :]) % q) - 1
        # in_gather[l, j, m]: flat (edge, value) index feeding slot l of row m
        e_lm = row_idx.T  # (dmax, M)
        self.in_gather = e_lm[:, None, :] * qm + in_perm[e_lm].transpose(0, 2, 1)
        # out_gather[e, j]: flat (slot, value, row) index of the result for edge e
        edge_slot = np.arange(E) - starts[H.rows]
        self.out_gather = (edge_slot[:, None] * qm + out_perm) * M + H.rows[:, None]

        col_deg = H.col_degrees
        wmax = int(col_deg.max())
        order = np.argsort(H.cols, kind="stable")
        col_starts = np.concatenate([[0], np.cumsum(col_deg)[:-1]])
        cslot = np.arange(wmax)
        cvalid = cslot[None, :] < col_deg[:, None]
        # pad slots point at an extra all-zero message at index E
        self.col_idx = np.where(
            cvalid, order[np.minimum(col_starts[:, None] + cslot[None, :], E - 1)], E
        )
        self.Hdense_T = H.dense.T.copy()

    def _check_pass(self, v2c: np.ndarray) -> np.ndarray:
        """(E, q-1, T) variable-to-check LLRVs -> check-to-variable LLRVs."""
        T = v2c.shape[-1]
        q, M, dmax = self.H.q, self.H.M, self.dmax
        d = self.row_deg
        X = v2c.reshape(-1, T)[self.in_gather]  # (dmax, q-1, M, T)
        EX = np.empty((dmax, q, M, T))
        EX[:, 0] = 1.0
        np.exp(X, out=EX[:, 1:])
        fwd = np.empty_like(EX)
        bwd = np.empty_like(EX)
        fwd[0] = EX[0]
        for l in range(1, dmax):
            fwd[l] = np.where(l < d, _prob_conv(fwd[l - 1], EX[l]), fwd[l - 1])
        bwd[dmax - 1] = EX[dmax - 1]
        for l in range(dmax - 2, -1, -1):
            bwd[l] = np.where(l == d - 1, EX[l], _prob_conv(bwd[l + 1], EX[l]))
        R = np.empty((dmax, q - 1, M, T))
        for k in range(dmax):
            if k == 0:
                if dmax == 1:
                    R[0] = -L_MAX
                    continue
                P = bwd[1]
            elif k + 1 == dmax:
                P = fwd[k - 1]
            else:
                P = np.where(k == d - 1, fwd[k - 1], _prob_conv(fwd[k - 1], bwd[k + 1]))
            np.log(P[1:], out=R[k])
        if self.single_rows.size:
            R[0][:, self.single_rows] = -L_MAX
        return R.reshape(-1, T)[self.out_gather]

    def _column_sums(self, c2v: np.ndarray) -> np.ndarray:
        ext = np.concatenate([c2v, np.zeros((1,) + c2v.shape[1:])], axis=0)
        return ext[self.col_idx].sum(axis=1)

    def _decide(self, post: np.ndarray) -> np.ndarray:
        """(N, q-1, T) posteriors -> (T, N) hard decisions, ties to the smaller value."""
        full = np.concatenate([np.zeros((post.shape[0], 1, post.shape[2])), post], axis=1)
        return np.argmax(full, axis=1).T

    def _syndrome_ok(self, est: np.ndarray) -> np.ndarray:
        return ~((est @ self.Hdense_T) % self.H.q).any(axis=1)

    def decode(self, channel_llrs: np.ndarray, early_stop: bool = True) -> BatchResult:
        """Decode ``channel_llrs`` of shape (T, N, q-1) (or (N, q-1))."""
        H = self.H
        L_in = np.asarray(channel_llrs, dtype=float)
        if L_in.ndim == 2:
            L_in = L_in[None]
        if L_in.shape[1:] != (H.N, H.q - 1):
            raise ValueError(f"channel LLRs must have shape (T, {H.N}, {H.q - 1})")
        T = L_in.shape[0]
        estimates = hard_decision(L_in)
        posterior = L_in.copy()
        iterations = np.zeros(T, dtype=np.int64)
        converged = self._syndrome_ok(estimates)
        active = np.flatnonzero(~converged) if early_stop else np.arange(T)
        L_ch = np.ascontiguousarray(L_in[active].transpose(1, 2, 0))  # (N, q-1, T)
        v2c = L_ch[H.cols]
        for it in range(1, self.max_iterations + 1):
            if active.size == 0:
                break
            c2v = self._check_pass(v2c)
            post = L_ch + self._column_sums(c2v)
            est = self._decide(post)
            ok = self._syndrome_ok(est)
            estimates[active] = est
            posterior[active] = post.transpose(2, 0, 1)
            iterations[active] = it
            converged[active] = ok
            if early_stop and ok.any():
                keep = ~ok
                active = active[keep]
                c2v, post, L_ch = c2v[..., keep], post[..., keep], L_ch[..., keep]
                if active.size == 0:
                    break
            v2c = _clamp(post[H.cols] - c2v)
        return BatchResult(estimates, converged, iterations, posterior)

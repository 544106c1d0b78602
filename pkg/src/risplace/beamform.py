"""Joint beamformer/reflection solver for the equal-weight sum-rate problem.

The rate objective is lifted to a surrogate f(alpha, beta, W, theta) via a
Lagrangian-dual transform (auxiliaries alpha) and a quadratic transform
(auxiliaries beta).  Each iteration updates the blocks in turn:

  alpha, beta : closed-form maximizers (jointly, inside solve),
  W           : one projected gradient step with exact Lipschitz step size,
                optionally from a Nesterov-extrapolated point,
  phi         : one backtracked gradient-ascent step on the phase vector.

The surrogate, like the reported rate, is in base-2 logs: the natural-log
expression is scaled by 1/ln(2) throughout, which moves no stationary point
and makes the surrogate equal the weighted sum rate at the (alpha, beta)
optimum.  Every accepted step keeps the surrogate nondecreasing, and because
solve() drives the auxiliaries to their joint fixed point, the rate history
is nondecreasing as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from typing import Optional, Union

import numpy as np

from .channel import ChannelSet, RfParams, all_sinr, effective_rows, wsr
from .errors import NonFiniteObjective

LOG2E = 1.0 / math.log(2.0)
_ASCENT_SLACK = 1e-12  # relative slack when testing "did not decrease"
_MAX_BACKTRACKS = 80


@dataclass
class SolverConfig:
    """Iteration limits, tolerances and step-control knobs."""

    max_iters: int = 500
    rel_tol: float = 1e-4
    extrapolation: Union[str, float] = "nesterov"  # "nesterov" | "none" | fixed float
    kappa0: Optional[float] = None  # None: curvature-bound start for the phase step
    backtrack_factor: float = 2.0


@dataclass
class FpState:
    """Solver state: beamformer, phases, auxiliaries and history."""

    w: np.ndarray  # (M, K) complex beamformer
    phi: np.ndarray  # (N,) real phases; reflection coefficients are e^{j phi}
    alpha: np.ndarray  # (K,) >= 0
    beta: np.ndarray  # (K,) complex
    zeta: np.ndarray  # (K,) auxiliary of the alpha update
    mu: np.ndarray  # (K,) auxiliary of the beta update
    iteration: int = 0
    objective_history: list = dfield(default_factory=list)  # WSR per iteration
    surrogate_history: list = dfield(default_factory=list)
    w_prev: np.ndarray | None = None
    eta: float = 1.0  # Nesterov momentum sequence
    lipschitz: float = 0.0  # last W-step Lipschitz constant
    _phi_version: int = dfield(default=0, repr=False, compare=False)
    _rows_cache: tuple | None = dfield(default=None, repr=False, compare=False)

    @property
    def theta(self) -> np.ndarray:
        """Unit-modulus reflection coefficients (exact by construction)."""
        return np.exp(1j * self.phi)

    def set_phi(self, phi: np.ndarray) -> None:
        self.phi = phi
        self._phi_version += 1
        self._rows_cache = None


def _rows(state: FpState, cs: ChannelSet) -> np.ndarray:
    """Effective row channels for the current phases, cached per phi version."""
    cache = state._rows_cache
    if cache is not None and cache[0] == state._phi_version and cache[1] is cs:
        return cache[2]
    rows = effective_rows(cs, state.theta)
    state._rows_cache = (state._phi_version, cs, rows)
    return rows


def _mu_of_alpha(alpha: np.ndarray, k_users: int) -> np.ndarray:
    return np.sqrt((1.0 + alpha) / k_users)


def surrogate_f(state: FpState, cs: ChannelSet, sigma2: float) -> float:
    """Surrogate objective at the current state, in base-2 units."""
    k_users = cs.n_users
    gains = _rows(state, cs) @ state.w  # (K, K)
    diag = np.diag(gains)
    denom = (np.abs(gains) ** 2).sum(axis=1) + sigma2
    mu = _mu_of_alpha(state.alpha, k_users)
    f_nat = (
        (np.log1p(state.alpha) - state.alpha).sum() / k_users
        + 2.0 * (mu * (state.beta.conj() * diag).real).sum()
        - (np.abs(state.beta) ** 2 * denom).sum()
    )
    return LOG2E * f_nat


def update_alpha(state: FpState, cs: ChannelSet) -> np.ndarray:
    """Closed-form alpha update; stores the zeta auxiliaries on the state."""
    rows = _rows(state, cs)
    s = np.einsum("km,mk->k", rows, state.w)
    zeta = math.sqrt(cs.n_users) * (state.beta.conj() * s).real
    state.zeta = zeta
    state.alpha = 0.5 * (zeta**2 + zeta * np.sqrt(zeta**2 + 4.0))
    return state.alpha


def update_beta(state: FpState, cs: ChannelSet, sigma2: float) -> np.ndarray:
    """Closed-form beta update; stores the mu auxiliaries on the state."""
    gains = _rows(state, cs) @ state.w
    denom = (np.abs(gains) ** 2).sum(axis=1) + sigma2
    mu = _mu_of_alpha(state.alpha, cs.n_users)
    state.mu = mu
    state.beta = mu * np.diag(gains) / denom
    return state.beta


def update_aux_joint(state: FpState, cs: ChannelSet, sigma2: float) -> None:
    """Jump to the joint (alpha, beta) fixed point for the current (W, phi).

    Alternating the two closed-form updates converges to alpha_k equal to the
    SINR of user k; writing that limit directly makes the surrogate tight to
    the rate, which in turn keeps the rate history nondecreasing across the
    W and phase steps.
    """
    gains = _rows(state, cs) @ state.w
    s = np.diag(gains)
    denom = (np.abs(gains) ** 2).sum(axis=1) + sigma2
    sig = np.abs(s) ** 2
    gamma = sig / (denom - sig)
    state.alpha = gamma
    mu = _mu_of_alpha(gamma, cs.n_users)
    state.mu = mu
    state.beta = mu * s / denom
    state.zeta = math.sqrt(cs.n_users) * (state.beta.conj() * s).real


def _w_part(gains: np.ndarray, beta: np.ndarray, mu: np.ndarray) -> float:
    """W-dependent part of the surrogate (constants in W dropped)."""
    diag = np.diag(gains)
    quad = (np.abs(beta) ** 2 * (np.abs(gains) ** 2).sum(axis=1)).sum()
    return LOG2E * (2.0 * (mu * (beta.conj() * diag).real).sum() - quad)


def _w_quad_lin(rows: np.ndarray, beta: np.ndarray, mu: np.ndarray):
    """Quadratic form matrix and linear term of the surrogate as a function of W."""
    hbar = rows.conj()
    b2 = np.abs(beta) ** 2
    a_mat = (hbar * b2[:, None]).T @ hbar.conj()  # (M, M) Hermitian PSD
    lin = (2.0 * mu * beta)[None, :] * hbar.T  # (M, K) matched-filter term
    return a_mat, lin


def w_gradient(state: FpState, cs: ChannelSet) -> np.ndarray:
    """Surrogate gradient with respect to the beamformer, as an (M, K) array.

    Complex convention: for direction v, the directional derivative is
    Re{<grad, v>}, i.e. the real/imaginary parts of the gradient are the
    partials with respect to the real/imaginary parts of W.
    """
    rows = _rows(state, cs)
    mu = _mu_of_alpha(state.alpha, cs.n_users)
    a_mat, lin = _w_quad_lin(rows, state.beta, mu)
    return LOG2E * (lin - 2.0 * a_mat @ state.w)


def _phi_terms(state: FpState, cs: ChannelSet):
    """Reflected-gain tensors entering the phase objective and its gradient."""
    k_users, n = cs.n_users, cs.n_elements
    b = cs.h_bu.conj() @ state.w  # (K, K): direct-link part of every gain
    v = (cs._cascades_flat @ state.w).reshape(k_users, n, k_users)
    idx = np.arange(k_users)
    vdiag = v[idx, :, idx]  # (K, N): reflected gain of each user's own beam
    return b, v, vdiag


def _phi_gradient_at(t, b, v, vdiag, beta, mu) -> np.ndarray:
    s = b + np.tensordot(t, v, axes=(0, 1))
    b2 = np.abs(beta) ** 2
    weighted = np.tensordot(b2[:, None] * s.conj(), v, axes=([0, 1], [0, 2]))
    matched = (mu * beta.conj()) @ vdiag
    return LOG2E * 2.0 * (t * (weighted - matched)).imag


def phi_gradient(state: FpState, cs: ChannelSet) -> np.ndarray:
    """Surrogate gradient with respect to the phase vector, length N."""
    b, v, vdiag = _phi_terms(state, cs)
    mu = _mu_of_alpha(state.alpha, cs.n_users)
    return _phi_gradient_at(state.theta, b, v, vdiag, state.beta, mu)


def update_w(
    state: FpState, cs: ChannelSet, p_max: float, cfg: SolverConfig
) -> np.ndarray:
    """Projected gradient step on the beamformer from an extrapolated point.

    The step size is the inverse of the exact Lipschitz constant of the
    quadratic gradient; if the extrapolated step would decrease the
    surrogate, the plain (non-extrapolated) step is taken instead, which is
    an ascent step by the descent lemma.
    """
    rows = _rows(state, cs)
    mu = _mu_of_alpha(state.alpha, cs.n_users)
    a_mat, lin = _w_quad_lin(rows, state.beta, mu)
    lip = LOG2E * 2.0 * float(np.linalg.eigvalsh(a_mat)[-1])
    state.lipschitz = lip
    if lip <= 1e-300:
        # beta and the gradient vanish together; nothing to move
        state.w_prev = state.w.copy()
        return state.w

    def grad(w):
        return LOG2E * (lin - 2.0 * a_mat @ w)

    def project(w):
        total = float((np.abs(w) ** 2).sum())
        if total > p_max:
            return w * math.sqrt(p_max / total)
        return w

    if isinstance(cfg.extrapolation, (int, float)):
        eps = float(cfg.extrapolation)
        eta_new = state.eta
    elif cfg.extrapolation == "none":
        eps, eta_new = 0.0, state.eta
    else:  # nesterov
        eta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * state.eta**2))
        eps = (state.eta - 1.0) / eta_new

    w_prev = state.w_prev if state.w_prev is not None else state.w
    current_val = _w_part(rows @ state.w, state.beta, mu)

    w_hat = state.w + eps * (state.w - w_prev)
    cand = project(w_hat + grad(w_hat) / lip)
    cand_val = _w_part(rows @ cand, state.beta, mu)
    slack = _ASCENT_SLACK * max(1.0, abs(current_val))
    if not (cand_val >= current_val - slack):
        # extrapolation overshot: fall back to the safe step and restart momentum
        cand = project(state.w + grad(state.w) / lip)
        eta_new = 1.0

    state.eta = eta_new
    state.w_prev = state.w.copy()
    state.w = cand
    return state.w


def _phi_part(
    t: np.ndarray, b: np.ndarray, v: np.ndarray, beta: np.ndarray, mu: np.ndarray
) -> float:
    """Phase-dependent part of the surrogate; v has layout (K, N, K_beams)."""
    s = b + np.tensordot(t, v, axes=(0, 1))  # (K, K)
    diag = np.diag(s)
    quad = (np.abs(beta) ** 2 * (np.abs(s) ** 2).sum(axis=1)).sum()
    return LOG2E * (2.0 * (mu * (beta.conj() * diag).real).sum() - quad)


def _phi_curvature_bound(
    b: np.ndarray, v: np.ndarray, vdiag: np.ndarray, beta: np.ndarray, mu: np.ndarray
) -> float:
    """Upper bound on the spectral norm of the phase-objective Hessian.

    Every gain is affine in each reflection coefficient, so the Hessian
    entries are bounded by |v| products; a row-sum (Gershgorin) bound over
    the worst phase gives a global curvature constant valid for all phases.
    """
    vabs = np.abs(v)  # (K, N, K)
    b2 = np.abs(beta) ** 2
    vsum = vabs.sum(axis=1)  # (K, K)
    smax = np.abs(b) + vsum
    lin = 2.0 * ((mu * np.abs(beta)) @ np.abs(vdiag))  # (N,)
    quad = 2.0 * np.tensordot(b2[:, None] * (vsum + smax), vabs, axes=([0, 1], [0, 2]))
    return LOG2E * float((lin + quad).max())


def update_theta(state: FpState, cs: ChannelSet, cfg: SolverConfig) -> np.ndarray:
    """Backtracked gradient-ascent step on the phase vector.

    The trial step is grad/kappa with kappa grown geometrically until the
    phase part of the surrogate does not decrease; the search starts well
    below a global curvature bound, so a safe step always exists and the
    accepted step is usually much longer than the worst-case one.  Phases
    are updated in place of the reflection coefficients, so unit modulus is
    preserved exactly.
    """
    b, v, vdiag = _phi_terms(state, cs)
    mu = _mu_of_alpha(state.alpha, cs.n_users)
    t = state.theta
    grad = _phi_gradient_at(t, b, v, vdiag, state.beta, mu)

    if not grad.any():
        return state.phi

    if cfg.kappa0 is not None:
        kappa = cfg.kappa0
    else:
        curv = _phi_curvature_bound(b, v, vdiag, state.beta, mu)
        if curv <= 0.0:
            return state.phi
        kappa = curv / 64.0  # aggressive start; 1/curv is always acceptable
    current_val = _phi_part(t, b, v, state.beta, mu)
    slack = _ASCENT_SLACK * max(1.0, abs(current_val))
    for _ in range(_MAX_BACKTRACKS):
        phi_new = state.phi + grad / kappa
        if _phi_part(np.exp(1j * phi_new), b, v, state.beta, mu) >= current_val - slack:
            state.set_phi(phi_new)
            return state.phi
        kappa *= cfg.backtrack_factor
    return state.phi  # step underflow: keep current phases


def _cophase_start(cs: ChannelSet, p_max: float, sigma2: float) -> np.ndarray:
    """Initial phases: align the reflected path for the most helped user.

    The strong line-of-sight component makes the BS-to-surface link close to
    rank one, so the reflection can cleanly boost roughly one user at a time.
    Estimate, for every user, the full-power rate through a perfectly
    co-phased reflection versus the direct link alone, and co-phase for the
    user with the largest gain.  Gradient ascent from an all-zero phase start
    routinely misses this basin when the winning user's direct link is blocked.
    """
    n = cs.n_elements
    bridge = cs.h_br.conj().T @ cs.h_br
    if not bridge.any():
        return np.zeros(n)
    v1 = np.linalg.eigh(bridge)[1][:, -1]  # dominant transmit direction
    contrib = cs.cascades @ v1  # (K, N): per-element reflected gains
    coherent = np.abs(contrib).sum(axis=1)
    direct = np.abs(cs.h_bu.conj() @ v1)
    snr_scale = p_max / sigma2
    gain = np.log1p(snr_scale * coherent**2) - np.log1p(
        snr_scale * (cs.h_bu * cs.h_bu.conj()).real.sum(axis=1)
    )
    best = int(np.argmax(gain))
    if coherent[best] == 0.0:
        return np.zeros(n)
    anchor = np.angle(direct[best]) if direct[best] > 0 else 0.0
    phases = anchor - np.angle(contrib[best])
    phases[np.abs(contrib[best]) == 0.0] = 0.0
    return phases


def initial_state(cs: ChannelSet, p_max: float, sigma2: float) -> FpState:
    """Deterministic start: co-phased reflection, regularized inverse beams.

    Plain matched filters collide badly here: every user served through the
    reflection shares one transmit direction, so equal-power matched beams
    start deep in mutual interference.  Regularized zero-forcing directions
    at equal per-user power avoid that and converge far faster.
    """
    k_users, m, _ = cs.n_users, cs.m_antennas, cs.n_elements
    phi = _cophase_start(cs, p_max, sigma2)
    rows = effective_rows(cs, np.exp(1j * phi))
    hbar = rows.conj().T  # (M, K): effective column channels
    gram = hbar @ hbar.conj().T + (k_users * sigma2 / p_max) * np.eye(m)
    dirs = np.linalg.solve(gram, hbar)
    w = np.zeros((m, k_users), dtype=complex)
    norms = np.linalg.norm(dirs, axis=0)
    scale = math.sqrt(p_max / k_users)
    for k in range(k_users):
        if norms[k] > 0:
            w[:, k] = scale * dirs[:, k] / norms[k]
    return FpState(
        w=w,
        phi=phi,
        alpha=np.zeros(k_users),
        beta=np.zeros(k_users, dtype=complex),
        zeta=np.zeros(k_users),
        mu=np.full(k_users, math.sqrt(1.0 / k_users)),
        w_prev=w.copy(),
    )


def _wsr_cached(state: FpState, cs: ChannelSet, sigma2: float) -> float:
    gains = _rows(state, cs) @ state.w
    sig = np.abs(np.diag(gains)) ** 2
    denom = (np.abs(gains) ** 2).sum(axis=1) + sigma2
    return float(np.log2(1.0 + sig / (denom - sig)).mean())


def solve(
    cs: ChannelSet,
    rf: RfParams,
    cfg: SolverConfig | None = None,
    rng_seed: int | None = None,
) -> FpState:
    """Run the block-update loop until the rate stalls or max_iters is hit.

    rng_seed is accepted for interface uniformity; the default
    initialization is deterministic and does not consume it.
    """
    del rng_seed
    cfg = cfg or SolverConfig()
    sigma2, p_max = rf.sigma2, rf.p_max
    state = initial_state(cs, p_max, sigma2)
    prev = _wsr_cached(state, cs, sigma2)
    prev_rel = 0.0  # first iteration can never count as a decaying stall
    for it in range(1, cfg.max_iters + 1):
        update_aux_joint(state, cs, sigma2)
        update_w(state, cs, p_max, cfg)
        update_theta(state, cs, cfg)
        cur = _wsr_cached(state, cs, sigma2)
        cur_f = surrogate_f(state, cs, sigma2)
        if not (math.isfinite(cur) and math.isfinite(cur_f)):
            raise NonFiniteObjective(f"objective became non-finite at iteration {it}")
        state.iteration = it
        state.objective_history.append(cur)
        state.surrogate_history.append(cur_f)
        rel = abs(cur - prev) / max(abs(prev), 1e-12)
        if rel == 0.0:
            break  # exact fixed point (e.g. all-zero channels)
        # momentum warms up slowly from good starts: per-iteration progress
        # first grows, then decays; a stall is sub-tolerance AND decaying
        if rel < cfg.rel_tol and rel <= prev_rel:
            break
        prev, prev_rel = cur, rel
    return state


def min_sinr(cs: ChannelSet, state: FpState, sigma2: float) -> float:
    """Smallest per-user SINR under the state's beamformer and phases."""
    return float(all_sinr(cs, state.w, state.theta, sigma2).min())

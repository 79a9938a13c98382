"""PPO math: GAE, the clipped surrogate loss with exact analytic gradients,
Adam, and action selection.

Everything runs in float64 numpy. The loss gradient is assembled by hand
(softmax/log-prob/entropy derivatives through the network's backward pass) so
it can be checked against central finite differences coordinate by
coordinate. ppo_loss expects the caller to have normalized advantages; it
does not normalize internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBatch, ShapeError
from .hazards import ActionPair
from .nets import PolicyValueNet, log_softmax, softmax


def compute_gae(rewards: np.ndarray, values: np.ndarray, terminals: np.ndarray,
                gamma: float, gae_lambda: float) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimation over one trajectory slice.

    values must have one extra trailing entry: the bootstrap value for the
    state after the last step (ignored when that step is terminal).
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    terminals = np.asarray(terminals, dtype=float)
    t = len(rewards)
    if len(terminals) != t or len(values) != t + 1:
        raise ShapeError(
            f"GAE shapes: rewards {t}, terminals {len(terminals)}, "
            f"values {len(values)} (want {t + 1})")
    advantages = np.zeros(t)
    acc = 0.0
    for i in range(t - 1, -1, -1):
        nonterminal = 1.0 - terminals[i]
        delta = rewards[i] + gamma * values[i + 1] * nonterminal - values[i]
        acc = delta + gamma * gae_lambda * nonterminal * acc
        advantages[i] = acc
    return advantages, advantages + values[:-1]


@dataclass
class Batch:
    obs: np.ndarray          # (n, obs_dim)
    actions: np.ndarray      # (n, n_branches) integer indices
    old_logp: np.ndarray     # (n,)
    advantages: np.ndarray   # (n,) already normalized by the caller
    returns: np.ndarray      # (n,)


def joint_log_prob(logits: list[np.ndarray], actions: np.ndarray) -> np.ndarray:
    """Sum of per-branch log softmax probabilities of the chosen actions."""
    n = len(actions)
    rows = np.arange(n)
    total = np.zeros(n)
    for k, lg in enumerate(logits):
        total += log_softmax(lg)[rows, actions[:, k]]
    return total


def joint_entropy(logits: list[np.ndarray]) -> np.ndarray:
    total = np.zeros(len(logits[0]))
    for lg in logits:
        p = softmax(lg)
        logp = log_softmax(lg)
        total += -(p * logp).sum(axis=1)
    return total


def ppo_loss(net: PolicyValueNet, params: np.ndarray, batch: Batch,
             clip_epsilon: float, entropy_coeff: float,
             value_coeff: float) -> tuple[float, np.ndarray]:
    """Clipped-surrogate PPO loss and its exact gradient.

    loss = -mean(min(rho*A, clip(rho)*A)) + value_coeff*mean((v - ret)^2)
           - entropy_coeff*mean(entropy)
    """
    n = len(batch.obs)
    if n == 0:
        raise EmptyBatch("ppo_loss needs at least one sample")
    logits, values, cache = net.forward(params, batch.obs)
    logp = joint_log_prob(logits, batch.actions)
    rho = np.exp(logp - batch.old_logp)
    adv = batch.advantages

    clipped = np.clip(rho, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    surr_unclipped = rho * adv
    surr_clipped = clipped * adv
    surrogate = np.minimum(surr_unclipped, surr_clipped)

    v_err = values - batch.returns
    entropy = joint_entropy(logits)
    loss = (-surrogate.mean()
            + value_coeff * (v_err ** 2).mean()
            - entropy_coeff * entropy.mean())

    # d loss / d logp: only where the unclipped term is active (ties included,
    # matching the subgradient of min); elsewhere the clip freezes rho
    unclipped_active = surr_unclipped <= surr_clipped
    in_band = (rho > 1.0 - clip_epsilon) & (rho < 1.0 + clip_epsilon)
    dlogp = np.where(unclipped_active | in_band, -rho * adv, 0.0) / n

    rows = np.arange(n)
    dlogits = []
    for k, lg in enumerate(logits):
        p = softmax(lg)
        onehot = np.zeros_like(p)
        onehot[rows, batch.actions[:, k]] = 1.0
        dk = dlogp[:, None] * (onehot - p)
        # entropy term: dH/dz_j = -p_j (log p_j + H_k)
        logp_k = log_softmax(lg)
        h_k = -(p * logp_k).sum(axis=1, keepdims=True)
        dk += (entropy_coeff / n) * p * (logp_k + h_k)
        dlogits.append(dk)

    dvalue = value_coeff * 2.0 * v_err / n
    grad = net.backward(params, cache, dlogits, dvalue)
    return float(loss), grad


@dataclass
class Adam:
    """Standard Adam with bias correction, state in flat float64 vectors."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    def update(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.step += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.step)
        v_hat = self.v / (1.0 - self.beta2 ** self.step)
        return params - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def act_batch(net: PolicyValueNet, params: np.ndarray, obs: np.ndarray,
              mode: str = "sample", rng: np.random.Generator | None = None):
    """Actions for a batch of observations.

    Returns (actions (n, n_branches), log-probs (n,), values (n,)).
    Greedy mode takes the per-branch argmax (ties resolve to the first index).
    """
    logits, values, _ = net.forward(params, obs)
    n = len(values)
    actions = np.zeros((n, len(logits)), dtype=np.int64)
    for k, lg in enumerate(logits):
        if mode == "greedy":
            actions[:, k] = lg.argmax(axis=1)
        elif mode == "sample":
            if rng is None:
                raise ValueError("sample mode needs an rng")
            p = softmax(lg)
            u = rng.random((n, 1))
            actions[:, k] = (p.cumsum(axis=1) < u).sum(axis=1)
        else:
            raise ValueError(f"unknown act mode: {mode!r}")
    return actions, joint_log_prob(logits, actions), values


def act(net: PolicyValueNet, params: np.ndarray, obs: np.ndarray,
        mode: str = "sample", rng: np.random.Generator | None = None) -> ActionPair:
    actions, _, _ = act_batch(net, params, np.atleast_2d(obs), mode, rng)
    return ActionPair(horizontal=int(actions[0, 0]), vertical=int(actions[0, 1]))

"""Curriculum PPO training over a scenario: parallel mutually-invisible
agents, rollout collection, minibatch Adam updates, metrics, checkpoints.

The trainer owns a single RNG stream and steps agents in ascending id order,
so a fixed seed reproduces the metrics stream bit for bit, and a checkpoint
written at an update boundary resumes the exact same stream. Checkpoints use
a versioned binary layout with float32 tensors for portability plus a
float64 extension block so resumed runs lose no precision.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import CheckpointError, IncompatiblePolicy, TrainingDiverged
from .hazards import ActionPair, AgentState, step_agent, training_fire_field
from .nets import NetworkConfig, PolicyValueNet
from .perception import OBS_DIM, observe_batch
from .ppo import (
    Adam,
    Batch,
    act_batch,
    compute_gae,
    joint_entropy,
    joint_log_prob,
    ppo_loss,
)
from .rewards import (
    CurriculumState,
    RewardConfig,
    choose_spawn,
    record_episode,
    step_reward,
)
from .world import Scenario, default_pedestrian_type, validate

CHECKPOINT_MAGIC = b"METIS-PPO"
CHECKPOINT_VERSION = 1
_F64_MARKER = b"F64X"


@dataclass(frozen=True)
class TrainerConfig:
    gamma: float = 0.995
    learning_rate: float = 0.0003
    clip_epsilon: float = 0.2
    gae_lambda: float = 0.95
    rollout_horizon: int = 256
    minibatch_size: int = 1024
    epochs_per_update: int = 3
    entropy_coeff: float = 0.005
    value_coeff: float = 0.5
    num_parallel_agents: int = 60
    total_steps: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 < self.clip_epsilon < 1.0):
            raise ValueError("clip_epsilon must be in (0, 1)")


class EvacEnv:
    """All parallel training agents in one shared world.

    Hazards are the static stand-in fires; touching one ends the episode at
    -1. Agents respawn immediately through the curriculum sampler, and every
    per-tick loop runs in ascending agent id order so the RNG stream replays.
    """

    def __init__(self, scenario: Scenario, reward_cfg: RewardConfig,
                 curriculum: CurriculumState, rng: np.random.Generator,
                 n_agents: int, snapshot: list[dict] | None = None):
        self.scenario = scenario
        self.reward_cfg = reward_cfg
        self.curriculum = curriculum
        self.rng = rng
        self.fires = training_fire_field(scenario)
        self.exit_centers = np.array([d.center for _, d in scenario.exits()],
                                     dtype=float)
        self.exit_doors = [d for _, d in scenario.exits()]
        self.ped_type = default_pedestrian_type(scenario)
        self.agents: list[AgentState] = []
        self.areas: list[int] = []
        if snapshot is not None:
            # resume path: no RNG draws, the stream must replay exactly
            self.restore(snapshot)
        else:
            for i in range(n_agents):
                agent, area = self._spawn(i)
                self.agents.append(agent)
                self.areas.append(area)

    def _spawn(self, agent_id: int) -> tuple[AgentState, int]:
        area, pos = choose_spawn(self.curriculum, self.scenario, self.rng)
        heading = self._initial_heading(pos)
        agent = AgentState(id=agent_id, type=self.ped_type, position=pos,
                           heading=heading, health=self.ped_type.health)
        return agent, area.order

    def _initial_heading(self, pos) -> tuple[float, float]:
        center = self.exit_centers[self._nearest_exit_index(pos)]
        dx, dz = center[0] - pos[0], center[1] - pos[1]
        n = float(np.hypot(dx, dz))
        return (dx / n, dz / n) if n > 1e-12 else (1.0, 0.0)

    def _nearest_exit_index(self, pos) -> int:
        d = np.hypot(self.exit_centers[:, 0] - pos[0],
                     self.exit_centers[:, 1] - pos[1])
        return int(d.argmin())  # ties resolve to the lowest exit index

    def exit_for(self, agent: AgentState):
        return self.exit_doors[self._nearest_exit_index(agent.position)]

    def observe(self) -> np.ndarray:
        positions = np.array([a.position for a in self.agents])
        headings = np.array([a.heading for a in self.agents])
        exits = self.exit_centers[
            [self._nearest_exit_index(a.position) for a in self.agents]]
        return observe_batch(self.scenario, self.fires, positions, headings, exits)

    def step(self, actions: np.ndarray):
        """Advance every agent one tick. Returns (rewards, dones,
        finished_episode_returns); terminal agents are respawned in place."""
        n = len(self.agents)
        rewards = np.zeros(n)
        dones = np.zeros(n)
        finished: list[float] = []
        for i in range(n):
            agent = self.agents[i]
            action = ActionPair(int(actions[i, 0]), int(actions[i, 1]))
            stepped, outcome = step_agent(self.scenario, self.fires, agent, action)
            exit_door = self.exit_for(stepped)
            r = step_reward(self.reward_cfg, stepped, exit_door,
                            self.scenario, outcome)
            terminal = outcome.entered_safe_area or outcome.touched_fire
            truncated = (not terminal
                         and stepped.step_count >= self.reward_cfg.max_step)
            rewards[i] = r
            stepped = replace(stepped,
                              cumulative_reward=agent.cumulative_reward + r)
            if terminal or truncated:
                dones[i] = 1.0
                ep_return = stepped.cumulative_reward
                self.curriculum = record_episode(self.curriculum,
                                                 self.areas[i], ep_return)
                finished.append(ep_return)
                stepped, self.areas[i] = self._spawn(i)
            self.agents[i] = stepped
        return rewards, dones, finished

    def snapshot(self) -> list[dict]:
        return [{
            "id": a.id,
            "position": list(a.position),
            "heading": list(a.heading),
            "health": a.health,
            "status": a.status,
            "step_count": a.step_count,
            "cumulative_reward": a.cumulative_reward,
            "area": self.areas[i],
        } for i, a in enumerate(self.agents)]

    def restore(self, snapshot: list[dict]):
        self.agents = []
        self.areas = []
        for row in snapshot:
            self.agents.append(AgentState(
                id=int(row["id"]), type=self.ped_type,
                position=tuple(row["position"]), heading=tuple(row["heading"]),
                health=float(row["health"]), status=row["status"],
                step_count=int(row["step_count"]),
                cumulative_reward=float(row["cumulative_reward"])))
            self.areas.append(int(row["area"]))


@dataclass
class TrainerState:
    net_config: NetworkConfig
    trainer_config: TrainerConfig
    reward_config: RewardConfig
    params: np.ndarray
    adam: Adam
    curriculum: CurriculumState
    rng: np.random.Generator
    global_step: int = 0
    recent_returns: list[float] = field(default_factory=list)
    agent_snapshot: list[dict] | None = None


def init_trainer(scenario: Scenario, reward_cfg: RewardConfig,
                 trainer_cfg: TrainerConfig,
                 net_cfg: NetworkConfig | None = None) -> TrainerState:
    net_cfg = net_cfg or NetworkConfig()
    rng = np.random.default_rng(trainer_cfg.seed)
    net = PolicyValueNet(net_cfg)
    params = net.init_params(rng)
    curriculum = CurriculumState(area_count=max(1, len(scenario.spawn_areas)))
    return TrainerState(
        net_config=net_cfg, trainer_config=trainer_cfg, reward_config=reward_cfg,
        params=params, adam=Adam(learning_rate=trainer_cfg.learning_rate),
        curriculum=curriculum, rng=rng)


def metrics_record(state: TrainerState, stats: dict) -> dict:
    window = state.recent_returns
    return {
        "step": state.global_step,
        "mean_return_20": (sum(window) / len(window)) if len(window) == 20 else None,
        "unlocked_areas": state.curriculum.unlocked_count,
        "policy_loss": stats["policy_loss"],
        "value_loss": stats["value_loss"],
        "entropy": stats["entropy"],
    }


def train(scenario: Scenario, reward_cfg: RewardConfig,
          trainer_cfg: TrainerConfig, *, state: TrainerState | None = None,
          on_metrics=None, target_return: float | None = None,
          ) -> tuple[TrainerState, list[dict]]:
    """Run curriculum PPO until total_steps (or the return target) is reached.

    Resumable: pass the TrainerState from a loaded checkpoint to continue an
    earlier run; the combined metrics stream equals one uninterrupted run.
    Raises TrainingDiverged (carrying the last good checkpoint) if the loss
    stops being finite.
    """
    issues = validate(scenario)
    if issues:
        raise ValueError(f"scenario invalid: {[i.code for i in issues]}")
    if not scenario.spawn_areas:
        raise ValueError("training needs at least one spawn area")

    if state is None:
        state = init_trainer(scenario, reward_cfg, trainer_cfg)
    cfg = state.trainer_config
    net = PolicyValueNet(state.net_config)
    env = EvacEnv(scenario, state.reward_config, state.curriculum, state.rng,
                  cfg.num_parallel_agents, snapshot=state.agent_snapshot)

    n = cfg.num_parallel_agents
    t_max = cfg.rollout_horizon
    obs_buf = np.empty((t_max, n, OBS_DIM))
    act_buf = np.empty((t_max, n, len(state.net_config.branch_sizes)), dtype=np.int64)
    logp_buf = np.empty((t_max, n))
    val_buf = np.empty((t_max, n))
    rew_buf = np.empty((t_max, n))
    done_buf = np.empty((t_max, n))

    metrics: list[dict] = []
    last_good: bytes | None = None

    while state.global_step < cfg.total_steps:
        for t in range(t_max):
            obs = env.observe()
            actions, logp, values = act_batch(net, state.params, obs,
                                              "sample", state.rng)
            rewards, dones, finished = env.step(actions)
            obs_buf[t] = obs
            act_buf[t] = actions
            logp_buf[t] = logp
            val_buf[t] = values
            rew_buf[t] = rewards
            done_buf[t] = dones
            for ep in finished:
                state.recent_returns.append(ep)
                if len(state.recent_returns) > 20:
                    state.recent_returns.pop(0)
            state.global_step += n

        _, bootstrap, _ = net.forward(state.params, env.observe())
        adv = np.empty((t_max, n))
        ret = np.empty((t_max, n))
        for i in range(n):
            values_col = np.concatenate([val_buf[:, i], [bootstrap[i]]])
            adv[:, i], ret[:, i] = compute_gae(
                rew_buf[:, i], values_col, done_buf[:, i],
                cfg.gamma, cfg.gae_lambda)

        flat_obs = obs_buf.reshape(t_max * n, OBS_DIM)
        flat_act = act_buf.reshape(t_max * n, -1)
        flat_logp = logp_buf.reshape(-1)
        flat_adv = adv.reshape(-1)
        flat_ret = ret.reshape(-1)
        flat_adv = (flat_adv - flat_adv.mean()) / (flat_adv.std() + 1e-8)

        stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0}
        count = 0
        total = t_max * n
        for _ in range(cfg.epochs_per_update):
            order = state.rng.permutation(total)
            for lo in range(0, total, cfg.minibatch_size):
                idx = order[lo:lo + cfg.minibatch_size]
                batch = Batch(obs=flat_obs[idx], actions=flat_act[idx],
                              old_logp=flat_logp[idx],
                              advantages=flat_adv[idx], returns=flat_ret[idx])
                loss, grad = ppo_loss(net, state.params, batch,
                                      cfg.clip_epsilon, cfg.entropy_coeff,
                                      cfg.value_coeff)
                if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                    raise TrainingDiverged(
                        f"non-finite loss at step {state.global_step}",
                        last_good_checkpoint=last_good)
                state.params = state.adam.update(state.params, grad)
                parts = _loss_parts(net, state.params, batch, cfg)
                for k in stats:
                    stats[k] += parts[k]
                count += 1
        for k in stats:
            stats[k] /= max(1, count)

        state.curriculum = env.curriculum
        state.agent_snapshot = env.snapshot()
        record = metrics_record(state, stats)
        metrics.append(record)
        if on_metrics is not None:
            on_metrics(record)
        last_good = save_checkpoint(state)

        if (target_return is not None and record["mean_return_20"] is not None
                and record["mean_return_20"] >= target_return):
            break

    state.curriculum = env.curriculum
    state.agent_snapshot = env.snapshot()
    return state, metrics


def _loss_parts(net: PolicyValueNet, params: np.ndarray, batch: Batch,
                cfg: TrainerConfig) -> dict:
    """Post-update loss components for the metrics stream (no gradient)."""
    logits, values, _ = net.forward(params, batch.obs)
    logp = joint_log_prob(logits, batch.actions)
    rho = np.exp(logp - batch.old_logp)
    clipped = np.clip(rho, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon)
    surrogate = np.minimum(rho * batch.advantages, clipped * batch.advantages)
    return {
        "policy_loss": float(-surrogate.mean()),
        "value_loss": float(((values - batch.returns) ** 2).mean()),
        "entropy": float(joint_entropy(logits).mean()),
    }


# ---------------------------------------------------------------------------
# checkpoint format

def save_checkpoint(state: TrainerState) -> bytes:
    """Versioned binary checkpoint; save -> load -> save is byte-identical.

    Layout: magic, version, layer-dimension table, float32 parameters and
    Adam moments (little-endian, declared order), a JSON block with the
    curriculum / RNG state / configs / counters, then a float64 extension
    block holding the same tensors at full precision for exact resume.
    """
    net = PolicyValueNet(state.net_config)
    m = state.adam.m if state.adam.m is not None else np.zeros_like(state.params)
    v = state.adam.v if state.adam.v is not None else np.zeros_like(state.params)

    out = bytearray()
    out += CHECKPOINT_MAGIC
    out += struct.pack("<I", CHECKPOINT_VERSION)
    out += struct.pack("<I", len(net.shapes))
    for _, shape in net.shapes:
        out += struct.pack("<I", len(shape))
        for dim in shape:
            out += struct.pack("<I", dim)
    for arr in (state.params, m, v):
        out += arr.astype("<f4").tobytes()

    meta = {
        "net_config": asdict(state.net_config),
        "trainer_config": asdict(state.trainer_config),
        "reward_config": asdict(state.reward_config),
        "curriculum": state.curriculum.to_dict(),
        "rng_state": _encode_rng(state.rng),
        "adam": {"step": state.adam.step, "learning_rate": state.adam.learning_rate,
                 "beta1": state.adam.beta1, "beta2": state.adam.beta2,
                 "eps": state.adam.eps},
        "global_step": state.global_step,
        "recent_returns": list(state.recent_returns),
        "agent_snapshot": state.agent_snapshot,
    }
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    out += struct.pack("<I", len(blob))
    out += blob

    out += _F64_MARKER
    for arr in (state.params, m, v):
        out += arr.astype("<f8").tobytes()
    return bytes(out)


def load_checkpoint(data: bytes) -> TrainerState:
    """Inverse of save_checkpoint; raises CheckpointError on any corruption."""
    view = memoryview(data)
    pos = 0

    def take(nbytes: int) -> memoryview:
        nonlocal pos
        if pos + nbytes > len(view):
            raise CheckpointError("truncated checkpoint")
        chunk = view[pos:pos + nbytes]
        pos += nbytes
        return chunk

    if bytes(take(len(CHECKPOINT_MAGIC))) != CHECKPOINT_MAGIC:
        raise CheckpointError("bad magic")
    (version,) = struct.unpack("<I", take(4))
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")

    (n_tensors,) = struct.unpack("<I", take(4))
    shapes = []
    for _ in range(n_tensors):
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        shapes.append(tuple(dims))
    n_params = sum(int(np.prod(s)) for s in shapes)

    f32 = []
    for _ in range(3):
        f32.append(np.frombuffer(take(4 * n_params), dtype="<f4").astype(float))

    (blob_len,) = struct.unpack("<I", take(4))
    try:
        meta = json.loads(bytes(take(blob_len)).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt metadata block: {e}") from None

    net_cfg = NetworkConfig(
        input_dim=int(meta["net_config"]["input_dim"]),
        hidden_width=int(meta["net_config"]["hidden_width"]),
        hidden_depth=int(meta["net_config"]["hidden_depth"]),
        branch_sizes=tuple(meta["net_config"]["branch_sizes"]))
    net = PolicyValueNet(net_cfg)
    if [s for _, s in net.shapes] != [tuple(s) for s in shapes]:
        raise CheckpointError("layer table does not match declared network config")

    params, m, v = f32
    if pos < len(view):
        if bytes(take(len(_F64_MARKER))) != _F64_MARKER:
            raise CheckpointError("unknown trailing block")
        arrs = []
        for _ in range(3):
            arrs.append(np.frombuffer(take(8 * n_params), dtype="<f8").copy())
        params, m, v = arrs

    a = meta["adam"]
    adam = Adam(learning_rate=float(a["learning_rate"]), beta1=float(a["beta1"]),
                beta2=float(a["beta2"]), eps=float(a["eps"]),
                step=int(a["step"]), m=m, v=v)
    if adam.step == 0 and not np.any(m) and not np.any(v):
        adam.m = None
        adam.v = None

    rng = _decode_rng(meta["rng_state"])
    tc = meta["trainer_config"]
    rc = meta["reward_config"]
    return TrainerState(
        net_config=net_cfg,
        trainer_config=TrainerConfig(**tc),
        reward_config=RewardConfig(**rc),
        params=params,
        adam=adam,
        curriculum=CurriculumState.from_dict(meta["curriculum"]),
        rng=rng,
        global_step=int(meta["global_step"]),
        recent_returns=[float(x) for x in meta["recent_returns"]],
        agent_snapshot=meta["agent_snapshot"],
    )


def _encode_rng(rng: np.random.Generator) -> dict:
    state = rng.bit_generator.state
    return {
        "bit_generator": state["bit_generator"],
        "state": str(state["state"]["state"]),
        "inc": str(state["state"]["inc"]),
        "has_uint32": int(state["has_uint32"]),
        "uinteger": int(state["uinteger"]),
    }


def _decode_rng(d: dict) -> np.random.Generator:
    if d["bit_generator"] != "PCG64":
        raise CheckpointError(f"unsupported rng {d['bit_generator']!r}")
    bg = np.random.PCG64()
    bg.state = {
        "bit_generator": "PCG64",
        "state": {"state": int(d["state"]), "inc": int(d["inc"])},
        "has_uint32": int(d["has_uint32"]),
        "uinteger": int(d["uinteger"]),
    }
    return np.random.Generator(bg)


# ---------------------------------------------------------------------------
# inference helper for the simulation engine

@dataclass
class Policy:
    """Frozen policy: a network plus parameters, greedy or sampled actions."""

    net: PolicyValueNet
    params: np.ndarray

    def act_batch(self, obs: np.ndarray, mode: str = "greedy",
                  rng: np.random.Generator | None = None) -> np.ndarray:
        actions, _, _ = act_batch(self.net, self.params, obs, mode, rng)
        return actions


def policy_from_checkpoint(data: bytes) -> Policy:
    state = load_checkpoint(data)
    if state.net_config.input_dim != OBS_DIM:
        raise IncompatiblePolicy(
            f"policy expects {state.net_config.input_dim} inputs, "
            f"observations carry {OBS_DIM}")
    return Policy(net=PolicyValueNet(state.net_config), params=state.params)


def random_policy(seed: int = 0, net_cfg: NetworkConfig | None = None) -> Policy:
    """Untrained policy with seeded init; lets simulations run standalone."""
    net_cfg = net_cfg or NetworkConfig()
    net = PolicyValueNet(net_cfg)
    return Policy(net=net, params=net.init_params(np.random.default_rng(seed)))

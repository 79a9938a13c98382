"""Train an evacuation policy from scratch in the small room, then watch it.

Takes ~15 s on a laptop CPU. Run:  python3 demos/04_train_small_room.py
"""

from pathlib import Path

import numpy as np

from metis.engine import EndCondition, run
from metis.rewards import POTENTIAL, RewardConfig
from metis.trainer import (
    TrainerConfig,
    load_checkpoint,
    policy_from_checkpoint,
    save_checkpoint,
    train,
)
from metis.world import load_sample

scenario = load_sample("small_room")

reward_cfg = RewardConfig(shaping_mode=POTENTIAL)
# the rolling mean clears 0.9 after ~10k steps; the extra budget hardens the
# greedy policy well past that point
trainer_cfg = TrainerConfig(num_parallel_agents=8, total_steps=30_000, seed=0)


def show(record):
    mean = record["mean_return_20"]
    print(f"step {record['step']:>7}  "
          f"mean return (20 ep): {'-' if mean is None else f'{mean:.3f}'}  "
          f"entropy {record['entropy']:.3f}")


state, metrics = train(scenario, reward_cfg, trainer_cfg, on_metrics=show)
print(f"\ntrained for {state.global_step} environment steps")

ckpt = Path("small_room.ckpt")
ckpt.write_bytes(save_checkpoint(state))
print(f"checkpoint: {ckpt} ({ckpt.stat().st_size} bytes)")

# checkpoints carry everything: reloading and saving again is byte-identical
assert save_checkpoint(load_checkpoint(ckpt.read_bytes())) == ckpt.read_bytes()

# drive a simulation with the trained policy: greedy actions, no exploration
from metis.world import PedestrianPlacement

policy = policy_from_checkpoint(ckpt.read_bytes())
wins = 0
for seed in range(10):
    sim_scenario = load_sample("small_room")
    rng = np.random.default_rng(seed)
    sim_scenario.pedestrians = [
        PedestrianPlacement(type="adult",
                            position=(float(rng.uniform(1.0, 4.5)),
                                      float(rng.uniform(1.0, 4.0))))
        for _ in range(4)]
    results, _ = run(sim_scenario, policy,
                     [EndCondition("all_resolved"),
                      EndCondition("time_limit", seconds=30.0)], seed=seed)
    wins += results.survived
    print(f"seed {seed}: {results.survived}/4 evacuated "
          f"in {results.elapsed_ticks} ticks ({results.end_reason})")
print(f"\ntotal evacuated: {wins}/40")
ckpt.unlink()

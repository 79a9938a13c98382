"""What an agent actually sees: the three ray sensors and the manual features.

Run:  python3 demos/02_perception_sweeps.py
"""

import numpy as np

from metis.hazards import fire_field_from_scenario
from metis.perception import SENSORS, observe_batch
from metis.world import load_sample, nearest_exit

scenario = load_sample("one_room")
field = fire_field_from_scenario(scenario)
field.sources[0].current_radius = 1.0  # light the sample's fire source

position = (5.0, 3.0)
heading = (-1.0, 0.0)  # facing the fire at (2, 5)
_, exit_door = nearest_exit(scenario, position)

obs = observe_batch(scenario, field, [position], [heading],
                    [exit_door.center])[0]
print("observation length:", len(obs))

blocks = {"A (fire/objects, 15 m, 140 deg)": obs[0:20],
          "B (doors/walls, 25 m, 80 deg)": obs[20:40],
          "C (doors/walls, 50 m, 140 deg)": obs[40:64]}
for name, feats in blocks.items():
    bar = "".join(" .:-=+*#%@"[min(9, int(f * 10))] for f in feats)
    print(f"{name:36s} [{bar}]  min={feats.min():.3f}")

print("normalized exit  :", np.round(obs[64:66], 3))
print("normalized self  :", np.round(obs[66:68], 3))
print("direction to exit:", np.round(obs[68:70], 3))

# 1.0 means "nothing detected on this ray". Sensor A sees the burning disc
# ahead; B and C report the walls and the exit door instead, and they ignore
# fire entirely.
a_hits = (obs[0:20] < 1.0).sum()
print(f"sensor A rays with a detection: {a_hits}/20")

# Walk toward the exit and watch the manual features update: the direction
# stays unit length and the normalized distance shrinks to zero at the door.
for x in (6.8, 7.4, 8.0):
    pos = (x, 3.0)
    _, door = nearest_exit(scenario, pos)
    row = observe_batch(scenario, field, [pos], [(1.0, 0.0)], [door.center])[0]
    d = np.hypot(*(row[64:66] - row[66:68]))
    print(f"x={x:4.1f}  normalized distance to exit={d:.3f}  "
          f"dir={np.round(row[68:70], 2)}")

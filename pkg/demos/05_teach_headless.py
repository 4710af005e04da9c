#!/usr/bin/env python3
"""The full teaching loop, driven by a script instead of a human.

The script plays the human role: look at an object, confirm it, name it,
repeat. The service runs the same state machine the interactive WebSocket
client drives (gaze -> segment -> propose -> select -> name -> record),
appending each finished session to the dataset. Identical script + seed
always reproduces the dataset byte for byte.
"""

import json
import tempfile
from pathlib import Path

from gazeteach.config import TeachConfig, config_from_dict
from gazeteach.scene import random_tabletop_scene
from gazeteach.service import run_scripted

scene = random_tabletop_scene(seed=12, n_objects=3)
work = Path(tempfile.mkdtemp(prefix="gazeteach_teach_"))

script = work / "lesson.txt"
script.write_text(
    "# look at object 0, confirm, name it\n"
    "gaze_object 0 0.003\n"
    "wait 0.2\n"
    "select\n"
    f"class {scene.primitives[0].class_name}\n"
    "# second object\n"
    "gaze_object 1 0.003\n"
    "select\n"
    f"class {scene.primitives[1].class_name}\n"
)
print(f"script:\n{script.read_text()}")

config = config_from_dict(
    {
        "orbit_samples": 60,
        "wrist_intrinsics": {"fx_px": 463.3, "fy_px": 463.3, "cx_px": 320.0,
                             "cy_px": 180.0, "width_px": 640, "height_px": 360},
        "segmentation": {"ransac_inlier_threshold": 0.005},
    }
)
report = run_scripted(script, scene, work / "dataset", config=config, seed=4)
print("report:")
print(json.dumps(report, indent=2, sort_keys=True))
print(f"\ndataset at {report['dataset_root']}")
print("equivalent CLI: gazeteach teach --script lesson.txt --scene scene.yaml "
      "--out dataset/ --seed 4")

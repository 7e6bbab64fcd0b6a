"""Watch the frame-budget controller settle under a synthetic cost model.

Run: python3 demos/controller_trace.py
"""

import voxslice as vx

ctl = vx.FrameBudgetController()
print(f"budget {ctl.budget_ms} ms, ladder {ctl.ladder}")
print("frame  scale  cost_ms  ema_ms")
for i in range(60):
    s = ctl.scale
    cost = 33.0 * s * s          # quadratic in scale: full res is over budget
    ctl.update(cost)
    mark = " <-- over budget" if cost > ctl.budget_ms else ""
    print(f"{i:5d}  {s:5.2f}  {cost:7.2f}  {ctl.ema_ms:6.2f}{mark}")

# The full construction on the three shipped demos, then a look at one report.
import json
import tempfile
from pathlib import Path

from cellular_attractors.pipeline import DEMOS, PipelineConfig, emit_report, run_pipeline

results = {}
for name in sorted(DEMOS):
    res = run_pipeline(PipelineConfig(demo=name, epsilon=0.2))
    rep = res.report
    results[name] = res
    print(f"{name:14s} R^{res.demo.points.shape[1]} -> R^{res.f.dim}  m={res.m:3d}  rho={res.h.rho:.4f}"
          f"  conjugacy={rep.conjugacy_error:.1e}  invariance violations={rep.positive_invariance_violations}"
          f"  rate violations={rep.rate_check['violations']}")

# The rate phi(r) = max(r - m rho, r / 2^m, R) against sampled block norms.
for row in results["disk_rotation"].report.rate_check["rows"]:
    print("  r=%.1f  phi=%.4f  observed max %.4f / %.2e" % (row["radius"], row["phi"], row["max_x"], row["max_y"]))

out = Path(tempfile.mkdtemp()) / "disk"
path = emit_report(results["disk_rotation"], out)
body = json.loads(path.read_text())["body"]
print("report sections:", sorted(body))
print("files:", sorted(p.name for p in out.iterdir()))

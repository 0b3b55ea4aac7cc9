"""Full pipeline on HCl / STO-6G with a dense reference comparison.

Writes the usual output files to ``demo-out/hcl`` and prints the match
report.  Run with ``python3 demos/hcl_spectrum.py``.
"""

from pathlib import Path

from subspectra import load_config, run_pipeline

root = Path(__file__).resolve().parents[1]
cfg = load_config(root / "configs" / "hcl_sto6g_97.ini", **{"output-dir": "demo-out/hcl"})
res = run_pipeline(cfg)

print(f"E0 = {res.e0:.8f} Ha, max dim S_x = {res.manifest['subspaces']['max_dim']}")
rep = res.comparison
print(f"{len(rep.matched)} levels matched, {len(rep.merged)} merged, {len(rep.misses)} missed, "
      f"{len(rep.spurious)} spurious peaks")
for gap, weight, peak, err in rep.matched:
    print(f"  gap {gap:.5f}  weight {weight:.4f}  peak {peak:.5f}  error {err:.1e}")
print("files:", ", ".join(res.outputs))

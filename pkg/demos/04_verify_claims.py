"""
Checking the stated values
==========================

Run every registered claim, then look at the few that do not hold.
The same report is available from the command line via ``bellchains verify``.
"""

# %%
from collections import Counter

from bellchains import claims
from bellchains.claims import Verdict, emit_report

report = claims.verify_all(restarts=16, trials=20, length=500)
print(Counter(r.verdict.value for r in report.records))
print("exit code:", report.exit_code)

# %%
# Refuted and ambiguous records carry a note explaining what was computed.
for r in report.records:
    if r.verdict is not Verdict.CONFIRMED:
        print(f"{r.verdict.value:9s} {r.id:32s} stated={r.paper:<8.4g} computed={r.computed:.6f}")

# %%
# Per-pair readings pair the exact index with a Monte Carlo estimate.
print(emit_report(report, "text").split("pair readings", 1)[-1][:1200])

# Auditing a model that runs in another process
#
# The model in scenarios/model.py is meant to say "A" on (0, 1) and "B"
# elsewhere, but it mislabels a thin sliver near 0.71. The scenario file
# declares the intended sets and launches the model over stdin/stdout.

# In[1]:

from pathlib import Path

from domstab import emit_report, parse_scenario, run_scenario

here = Path(__file__).resolve().parent
sc = parse_scenario(here / "scenarios" / "external_model.json")
try:
    report = run_scenario(sc)
finally:
    sc.close()

# The condition check finds the sliver, and every verdict is marked untrusted
# rather than aborting the run.

# In[2]:

ax = report.data["axioms"]
print("conditions hold:", ax["passed"])
for v in ax["violations"]:
    print(" clause", v["clause"], v["detail"], v["witnesses"][:2])
print("trusted:", report.data["trusted"])

# In[3]:

for line in emit_report(report, "csv-summary").splitlines()[170:175]:
    print(line)

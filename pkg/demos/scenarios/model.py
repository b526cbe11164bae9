"""A toy model over the line: answers 'A' on (0, 1) except a mislabelled sliver."""
import sys

for line in sys.stdin:
    x = float(line.split()[0])
    label = "A" if 0.0 < x < 1.0 and not 0.70 <= x < 0.72 else "B"
    print(label, flush=True)

"""Writes the synthetic drug table used by the yellowcard fixtures."""
import csv
import random
import sys

rng = random.Random(20240615)
rows = []
for i in range(120):
    cluster = i % 15
    years = rng.choice([4, 6, 8, 10, 12, 15, 20, 25, 30])
    total = int(rng.lognormvariate(7.0, 1.1)) + 20
    # Cluster-level tilt plus drug-level noise on the amnesia share.
    share = min(0.4, max(0.001, rng.lognormvariate(-3.6 + 0.08 * (cluster % 5), 0.7)))
    amnesia = sum(1 for _ in range(total) if rng.random() < share)
    rows.append((f"drug_{i + 1:03d}", amnesia, total - amnesia, years, cluster))

out = csv.writer(open(sys.argv[1], "w", newline=""), lineterminator="\n")
out.writerow(["name", "amnesia_count", "other_count", "years", "cluster"])
out.writerows(rows)

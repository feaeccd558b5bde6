"""Assertions on a report.json produced by the command-line tool."""
import argparse
import json
import sys

parser = argparse.ArgumentParser()
parser.add_argument("report")
parser.add_argument("--points", type=int, help="expected number of gap points")
parser.add_argument("--far-pairs", type=int, help="expected number of points with |Im E| > 1")
args = parser.parse_args()

with open(args.report) as f:
    report = json.load(f)
points = report["spectrum"]["points"]
problems = []
if not report["symmetry"]["passed"]:
    problems.append("symmetry check failed")
if args.points is not None and len(points) != args.points:
    problems.append(f"{len(points)} gap points, expected {args.points}")
if args.far_pairs is not None:
    far = [p for p in points if abs(p["value"]["im"]) > 1]
    if len(far) != args.far_pairs:
        problems.append(f"{len(far)} points with |Im E| > 1, expected {args.far_pairs}")
for p in problems:
    print(p)
sys.exit(1 if problems else 0)

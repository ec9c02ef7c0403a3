"""Random Turán numbers at desk scale.

Runs G^(3)(n, p) over a small p grid with nested samples, computes the
largest K_{2,2}^{(3)}-free subgraph exactly, and prints the CSV rows and
the per-cell summary.
"""

from kstexp.random_turan import records_csv, run_experiment, summary_json


def main():
    records, summary = run_experiment([8], [0.1, 0.25, 0.5], s=2, t=2, trials=3, seed=0)
    print(records_csv(records))
    print(summary_json(summary))


if __name__ == "__main__":
    main()

"""Exponent bookkeeping for K_{s,t} expansions.

Prints the r-density of a few expansions (checked by brute force over
edge subsets), the threshold report for K_{3,3}^{(3)}, and the ell chosen
on each k range for n = 10^8.
"""

from kstexp.params import FormulaConfig, ell_breakpoints, select_ell, thresholds
from kstexp.patterns import complete_bipartite, expand, kst_r_density, r_density


def main():
    print("r-densities (brute force vs closed form)")
    for s, t, r in [(2, 2, 3), (2, 3, 3), (3, 3, 3), (3, 3, 4), (2, 4, 5)]:
        brute = r_density(expand(complete_bipartite(s, t), r))
        closed, _ = kst_r_density(s, t, r)
        print(f"  K_{{{s},{t}}}^({r}): {brute}  closed form {closed}")

    print()
    print(thresholds(3, 3, 3).to_text())

    n, s, t = 1e8, 3, 3
    cfg = FormulaConfig(k_log_exponent=0.0)
    print(f"ell selection for s=t=3, n={n:g}")
    for x in ell_breakpoints(s, t):
        k = n ** float(x) * 0.5
        ch = select_ell(k, n, s, t, cfg)
        print(f"  k={k:.3g}: range {ch.range_id}, ell={ch.ell:.4g}, window valid {ch.valid}, mu<=pi {ch.mu_le_pi}")


if __name__ == "__main__":
    main()

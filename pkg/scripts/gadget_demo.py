"""Hardness gadget and support-count reduction on small examples.

Takes the single ONE2 constraint (not block-rank-1 at split (1, 2)), builds
the graph gadget for a few graphs and compares Z(I_G) with Z_A(G); then
recovers support sizes through the replication/Vandermonde reduction.
"""

import argparse
import random

from wcsp import Instance
from wcsp.fixtures import EQW, ONE2, eqw_chain, language, random_instance, random_language
from wcsp.oracle import partition_function, relation_of
from wcsp.reductions import Graph, count_support, gadget_matrix, graph_partition_function, hardness_gadget, value_set

GRAPHS = {
    "edge": Graph(2, ((1, 2),)),
    "loop": Graph(1, ((1, 1),)),
    "path3": Graph(3, ((1, 2), (2, 3))),
    "triangle": Graph(3, ((1, 2), (2, 3), (3, 1))),
    "star": Graph(4, ((1, 2), (1, 3), (1, 4))),
}


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random", type=int, default=10, help="random support-count checks")
    args = p.parse_args()

    I = Instance(language(ONE2), 2, (("ONE2", (1, 2)),))
    A = gadget_matrix(I, 1, 2)
    print("A =", [[str(x) for x in row] for row in A.tolist()])
    for name, G in GRAPHS.items():
        IG = hardness_gadget(I, 1, 2, G)
        z, za = partition_function(IG), graph_partition_function(A, G)
        print(f"{name:<9} n={IG.n:<2} m={IG.m:<2} Z(I_G)={str(z):<6} Z_A(G)={str(za):<6} {'ok' if z == za else 'MISMATCH'}")

    print()
    for label, J in [("EQW edge", Instance(language(EQW), 2, (("EQW", (1, 2)),))), ("EQW chain", eqw_chain())]:
        print(f"{label:<9} values={[str(v) for v in value_set(J).values]} |R|={count_support(J)}")
    rng = random.Random(args.seed)
    for _ in range(args.random):
        lang = random_language(rng, 2, arities=(1, 2))
        J = random_instance(rng, lang, rng.randint(1, 4), rng.randint(0, 3))
        got, want = count_support(J), len(relation_of(J))
        print(f"random    n={J.n} m={J.m} |Value|={len(value_set(J)):<3} |R|={got:<3} {'ok' if got == want else 'MISMATCH'}")


if __name__ == "__main__":
    main()

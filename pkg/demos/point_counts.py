"""Point counts of X_h and X_h^1 over a few extensions, split by stratum."""
from artifact import variety as V
from artifact.parahoric import GroupParams

for case, M in [((2, 2, 0, 2), 1), ((2, 2, 0, 2), 3), ((2, 3, 0, 1), 2), ((2, 2, 1, 2), 1)]:
    P = GroupParams.from_q(*case)
    _, lab = V.enumerate_points(P, "Xh", M, budget=1 << 24)
    print(f"(q,n,kappa,h)={case} M={M}: #Xh={len(lab):6d} strata={V.stratum_histogram(lab)}"
          f"  #Xh1={V.count_Xh1(P, M=M)}")

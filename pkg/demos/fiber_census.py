"""Fibers of X_h^+ over the level h-1 base, and their sum compared with #X_h."""
from artifact import fibers as fb
from artifact.parahoric import GroupParams

for case, M in [((2, 2, 0, 2), 1), ((2, 2, 0, 2), 3), ((2, 3, 0, 2), 1)]:
    cen = fb.fiber_census(GroupParams.from_q(*case), M)
    print(case, "M =", M, "fibers by stratum:", cen["by_stratum"], "total:", cen["total"])

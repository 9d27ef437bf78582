"""alpha* as a function of the actuator limit, for the reference O_inf."""
import numpy as np

from setguard.design import design_sets
from setguard.invariant import AttenuationError, attenuate

if __name__ == "__main__":
    sets = design_sets()
    print("u_max,alpha")
    for u in np.linspace(0, 40, 21):
        try:
            print(f"{u:g},{attenuate(sets.o_inf, sets.plant, u).alpha:.9f}")
        except AttenuationError:
            print(f"{u:g},infeasible")

# %% [markdown]
# Two-additive laws and hybrid Fibonacci polynomials
#
# On the lattice N = a^n a 2-additive law is a polynomial in the closure
# parameters (x, y).  This script builds the polynomials, checks them
# against the recurrence and the Binet form, then runs the feasibility
# checks on a couple of closures.

# %%
from fractions import Fraction

from qadditive import ScalingModel, oracle_eval
from qadditive.analysis import check_2additive_feasibility
from qadditive.fibonacci import HybridFibonacci, binet_check, fibonacci_2additive_eval, fibonacci_hybrid

# %%
for n in range(1, 7):
    print(n, HybridFibonacci.of(n).terms)

# %% [markdown]
# x = y = 1 gives back the ordinary Fibonacci numbers.

# %%
print([fibonacci_hybrid(n, 1, 1) for n in range(15)])

# %%
x, y = Fraction(-2), Fraction(3)      # exponents 1 and 0 on base 2
e, f = Fraction(1, 2), Fraction(7, 4)
m = ScalingModel(2, (e, f), closure=(x, y))
for n in range(1, 8):
    print(2 ** n, fibonacci_2additive_eval(e, f, x, y, n), oracle_eval(m, n))

print("Binet residual at n=20:", binet_check(20, x, y))

# %%
for closure in [(-2, 3), (-4, 3)]:
    report = check_2additive_feasibility(1.0, 1.5, *closure)
    print(closure, [(c.name, c.satisfied, c.margin) for c in report])

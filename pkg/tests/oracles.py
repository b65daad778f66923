"""Independent reference implementations used as test oracles.

These are deliberately naive and share no code with the package beyond the
plain data classes.
"""

import itertools

from nkphase.core import LocalFitness, NKInstance


def naive_value(f: LocalFitness, a) -> int:
    bits = [a[f.main_var]] + [a[v] for v in f.neighborhood]
    r = 0
    for b in bits:
        r = 2 * r + b
    return f.table[r]


def naive_evaluate(inst: NKInstance, a) -> int:
    return sum(naive_value(f, a) for f in inst.functions)


def all_assignments(n):
    return itertools.product((0, 1), repeat=n)


def clause_ok(clause, a) -> bool:
    for x in clause:
        v = abs(x) - 1
        if (x > 0 and a[v] == 1) or (x < 0 and a[v] == 0):
            return True
    return False


def formula_ok(clauses, a) -> bool:
    return all(clause_ok(c, a) for c in clauses)


def cnf_satisfiable(num_vars, clauses) -> bool:
    return any(formula_ok(clauses, a) for a in all_assignments(num_vars))


def nk_soluble(inst: NKInstance) -> bool:
    return any(naive_evaluate(inst, a) == inst.n for a in all_assignments(inst.n))


def closure_components(n, edges):
    """Connected components via an O(n^3) transitive closure."""
    reach = [[i == j for j in range(n)] for i in range(n)]
    for i, j in edges:
        reach[i][j] = reach[j][i] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return {frozenset(j for j in range(n) if reach[i][j]) for i in range(n)}


def random_instance(rng, n, k, zero_prob=None, zeros=None) -> NKInstance:
    """Instance built with Python's ``random``; either i.i.d. zero entries or
    a fixed number of zero rows per table."""
    rows = 2 ** (k + 1)
    funcs = []
    for i in range(n):
        nbrs = rng.sample([v for v in range(n) if v != i], k)
        if zeros is not None:
            zs = set(rng.sample(range(rows), zeros))
            table = tuple(0 if r in zs else 1 for r in range(rows))
        else:
            table = tuple(0 if rng.random() < zero_prob else 1 for _ in range(rows))
        funcs.append(LocalFitness(i, tuple(nbrs), table))
    return NKInstance(n, k, tuple(funcs))

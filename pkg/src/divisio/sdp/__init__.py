"""
Semidefinite programs over complex Hermitian blocks.

Problems are assembled with [SdpBuilder][divisio.sdp.SdpBuilder], which lowers
matrix equalities and inequalities to scalar rows, and solved with
[solve][divisio.sdp.solve]. Every optimisation in divisio is one call here.

```python
import numpy as np
from divisio.sdp import SdpBuilder, Sense, Term, solve

builder = SdpBuilder(Sense.maximize)
x = builder.block(2)
builder.equal([Term(x, lambda m: np.trace(m).reshape(1, 1))], [[1]])
builder.objective([Term(x)], weight=np.diag([1, -1]))
assert abs(solve(builder.build()).primal_value - 1) < 1e-7
```
"""

from divisio.sdp.dump import dump_problem, load_problem
from divisio.sdp.problem import (
    Block,
    ConstraintBatch,
    FreeHermitian,
    MalformedProblem,
    Relation,
    Scalar,
    SdpBuilder,
    SdpProblem,
    Sense,
    Term,
    hermitian_basis,
)
from divisio.sdp.solver import (
    SdpError,
    SdpSolution,
    SdpStatus,
    SolveOptions,
    embed_complex,
    solve,
)

__all__ = [
    "Block",
    "ConstraintBatch",
    "FreeHermitian",
    "MalformedProblem",
    "Relation",
    "Scalar",
    "SdpBuilder",
    "SdpError",
    "SdpProblem",
    "SdpSolution",
    "SdpStatus",
    "Sense",
    "SolveOptions",
    "Term",
    "dump_problem",
    "embed_complex",
    "hermitian_basis",
    "load_problem",
    "solve",
]

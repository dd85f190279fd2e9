"""
Divisibility of two-step dynamics.

Given ``Λ_{1|0}`` (``first``) and ``Λ_{2|0}`` (``target``), the quantifiers
here find the intermediate map ``Λ_{2|1}`` that best satisfies
``Λ_{2|0} = Λ_{2|1} ∘ Λ_{1|0}`` in diamond norm. A zero distance means the
dynamics is CP-divisible ([cp_distance][divisio.divisibility.cp_distance]) or,
for qubits, P-divisible ([p_distance_qubit][divisio.divisibility.p_distance_qubit]).
No invertibility of ``Λ_{1|0}`` is needed.

```python
from divisio.channels import collisional_pair
from divisio.divisibility import cp_distance

first, target = collisional_pair(0.75)
report = cp_distance(target, first)
assert not report.is_divisible()
```
"""

from divisio.divisibility.quantifiers import (
    AbsoluteFlag,
    DivisibilityError,
    DivisibilityKind,
    DivisibilityReport,
    Feasibility,
    MultiStepSummary,
    TrivialBoundViolation,
    UnsupportedDimension,
    WitnessPair,
    classify_absolute,
    composition_adjoint,
    composition_map,
    cp_distance,
    cp_feasible,
    extract_witness,
    multi_step,
    p_distance_qubit,
)
from divisio.divisibility.report import (
    DivisibilityReportModel,
    WitnessModel,
    report_json,
    write_report,
)

__all__ = [
    "AbsoluteFlag",
    "DivisibilityError",
    "DivisibilityKind",
    "DivisibilityReport",
    "DivisibilityReportModel",
    "Feasibility",
    "MultiStepSummary",
    "TrivialBoundViolation",
    "UnsupportedDimension",
    "WitnessModel",
    "WitnessPair",
    "classify_absolute",
    "composition_adjoint",
    "composition_map",
    "cp_distance",
    "cp_feasible",
    "extract_witness",
    "multi_step",
    "p_distance_qubit",
    "report_json",
    "write_report",
]

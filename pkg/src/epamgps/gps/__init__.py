from .objects import Calc, FeatureSet, GpsObject, Term, Var, match, render
from .solver import (
    BudgetExhausted,
    Difference,
    Goal,
    Inapplicable,
    InvalidPlan,
    NoSolution,
    Operator,
    PlanStep,
    SearchBudget,
    Spec,
    Trace,
    apply_operator,
    detect_differences,
    score_successor,
    select_operators,
    solve,
    validate_plan,
)

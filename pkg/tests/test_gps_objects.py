import pytest

from epamgps.gps.objects import (
    Calc,
    FeatureSet,
    Term,
    Var,
    atom,
    contains,
    evaluate,
    guard_holds,
    instantiate,
    match,
    render,
    replace_at,
    subterms,
    variables,
)


def fs(**kw):
    return FeatureSet(tuple((k, atom(v)) for k, v in kw.items()))


def t(head, *args):
    return Term(head, tuple(a if isinstance(a, (Term, Var)) else atom(a) for a in args))


def test_featureset_sorted_and_unique():
    a = FeatureSet((("b", atom(1)), ("a", atom(2))))
    assert a.keys() == ["a", "b"]
    assert a == FeatureSet((("a", atom(2)), ("b", atom(1))))
    with pytest.raises(ValueError):
        FeatureSet((("a", atom(1)), ("a", atom(2))))


def test_featureset_update_and_get():
    a = fs(a=0, b=3)
    assert a.updated(fs(a=4)) == fs(a=4, b=3)
    assert a.get("b") == atom(3)
    assert a.get("c") is None


def test_featureset_pattern_matches_a_subset():
    assert match(fs(a=0), fs(a=0, b=3)) == {}
    assert match(fs(a=1), fs(a=0, b=3)) is None
    pat = FeatureSet((("a", Var("x")),))
    assert match(pat, fs(a=0, b=3)) == {"x": atom(0)}
    assert match(fs(c=0), fs(a=0)) is None


def test_term_match_binds_consistently():
    pat = t("and", Var("x"), Var("x"))
    assert match(pat, t("and", "p", "p")) == {"x": atom("p")}
    assert match(pat, t("and", "p", "q")) is None
    assert match(t("not", Var("x")), t("not", t("not", "p"))) == {"x": t("not", "p")}
    assert match(t("f", "a"), t("f", "a", "b")) is None
    assert match(Var("x"), fs(a=1)) == {"x": fs(a=1)}


def test_variables_in_first_occurrence_order():
    pat = t("f", Var("y"), t("g", Var("x"), Var("y")))
    assert variables(pat) == ["y", "x"]


def test_arithmetic_and_guards():
    b = {"x": atom(4), "y": atom(1)}
    assert evaluate(Term("-", (Var("x"), Term("min", (Var("x"), Term("-", (atom(3), Var("y"))))))), b) == 2
    assert evaluate(Term("-", (atom(5),)), {}) == -5
    assert evaluate(Term("*", (atom(2), atom(3), atom(4))), {}) == 24
    assert guard_holds(Term("<", (Var("y"), atom(3))), b)
    assert not guard_holds(Term(">=", (Var("y"), Var("x"))), b)
    assert guard_holds(Term("!=", (Var("x"), atom("p"))), b)
    # ordering a symbol against a number never holds
    assert not guard_holds(Term("<", (atom("p"), atom(3))), b)


def test_instantiate_with_calc():
    template = FeatureSet((("a", Calc(Term("+", (Var("x"), atom(1))))),))
    assert instantiate(template, {"x": atom(2)}) == fs(a=3)
    assert instantiate(t("g", Var("x")), {"x": atom("p")}) == t("g", "p")


def test_subterms_are_pre_order():
    obj = t("and", t("not", "p"), t("or", "q", "r"))
    got = [(path, render(s)) for path, s in subterms(obj)]
    assert got == [
        ((), "(and (not p) (or q r))"),
        ((0,), "(not p)"),
        ((0, 0), "p"),
        ((1,), "(or q r)"),
        ((1, 0), "q"),
        ((1, 1), "r"),
    ]


def test_replace_at_and_contains():
    obj = t("and", t("not", "p"), "q")
    assert replace_at(obj, (0,), atom("r")) == t("and", "r", "q")
    assert replace_at(obj, (), atom("r")) == atom("r")
    assert contains(obj, t("not", Var("x")))
    assert not contains(obj, t("or", Var("x"), Var("y")))


def test_render():
    assert render(fs(b=1, a="p")) == "((a p) (b 1))"
    assert render(atom(2)) == "2"
    assert render(Calc(Term("+", (Var("x"), atom(1))))) == "(calc (+ ?x 1))"

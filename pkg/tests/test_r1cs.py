import pytest
from conftest import AFFINE_SOURCE, TAUTOLOGY_SOURCE

from pouw.circuit import parse_circuit, synthetic_chain_circuit
from pouw.errors import (
    ArityMismatch,
    FieldMismatch,
    LengthMismatch,
    MixedFields,
    NoConstraints,
    UnsatisfiedAssertion,
)
from pouw.field import PrimeField
from pouw.r1cs import (
    R1CS,
    Witness,
    check_satisfaction,
    compile_circuit,
    constraint_count,
    evaluate_locals,
    fit_linear_cost,
    generate_witness,
    measure_check_cost,
)


def test_factor_layout(factor_r1cs):
    assert constraint_count(factor_r1cs) == 2
    assert factor_r1cs.n_public == 2
    # ONE, two publics, two privates, one inverse helper for the != assert
    assert factor_r1cs.n_vars == 6


def test_factor_witness(factor_circuit, factor_r1cs):
    witness = generate_witness(factor_circuit, factor_r1cs, [15, 7], [3, 5])
    assert witness.values[0] == 1
    assert witness.public_values(2) == (15, 7)
    assert check_satisfaction(factor_r1cs, witness)


def test_wrong_product(factor_circuit, factor_r1cs):
    with pytest.raises(UnsatisfiedAssertion) as info:
        generate_witness(factor_circuit, factor_r1cs, [16, 7], [3, 5])
    assert info.value.statement_index == 1
    witness = generate_witness(factor_circuit, factor_r1cs, [16, 7], [3, 5], check=False)
    assert not check_satisfaction(factor_r1cs, witness)


def test_zero_integrity(factor_circuit, factor_r1cs):
    with pytest.raises(UnsatisfiedAssertion) as info:
        generate_witness(factor_circuit, factor_r1cs, [15, 0], [3, 5])
    assert info.value.statement_index == 0
    witness = generate_witness(factor_circuit, factor_r1cs, [15, 0], [3, 5], check=False)
    assert not check_satisfaction(factor_r1cs, witness)


def test_arity(factor_circuit, factor_r1cs):
    with pytest.raises(ArityMismatch):
        generate_witness(factor_circuit, factor_r1cs, [15], [3, 5])
    with pytest.raises(ArityMismatch):
        generate_witness(factor_circuit, factor_r1cs, [15, 7], [3])


def test_inputs_from_another_field(factor_circuit, factor_r1cs):
    other = PrimeField(251)
    with pytest.raises(MixedFields):
        generate_witness(factor_circuit, factor_r1cs, [15, 7], [other(3), other(5)])


def test_witness_length_checked(factor_r1cs, field):
    with pytest.raises(LengthMismatch):
        check_satisfaction(factor_r1cs, Witness(field, (1, 2, 3)))


def test_no_constraints(field):
    with pytest.raises(NoConstraints):
        compile_circuit(parse_circuit("def main(public field x) -> bool { return true; }"), field)


def test_literal_must_fit_field(f11):
    circuit = parse_circuit("def main(public field x) -> bool { assert(x == 12); return true; }")
    with pytest.raises(FieldMismatch):
        compile_circuit(circuit, f11)


def test_tautology_accepts_anything(field):
    circuit = parse_circuit(TAUTOLOGY_SOURCE)
    r1cs = compile_circuit(circuit, field)
    assert constraint_count(r1cs) == 1
    for x in (0, 1, 12345):
        assert check_satisfaction(r1cs, generate_witness(circuit, r1cs, [x], []))


def test_constant_products_stay_linear(field):
    circuit = parse_circuit(
        "def main(public field x, public field y) -> bool { assert(3 * x == y); return true; }"
    )
    r1cs = compile_circuit(circuit, field)
    assert constraint_count(r1cs) == 1
    assert r1cs.n_vars == 3
    assert check_satisfaction(r1cs, generate_witness(circuit, r1cs, [4, 12], []))


def test_constrained_define_gets_a_variable(field):
    plain = parse_circuit(
        "def main(private field a) -> bool { field b = a + 1; assert(b != 0); return true; }"
    )
    bound = parse_circuit(
        "def main(private field a) -> bool { field b <== a + 1; assert(b != 0); return true; }"
    )
    r_plain = compile_circuit(plain, field)
    r_bound = compile_circuit(bound, field)
    assert constraint_count(r_bound) == constraint_count(r_plain) + 1
    assert r_bound.n_vars == r_plain.n_vars + 1
    assert check_satisfaction(r_bound, generate_witness(bound, r_bound, [], [4]))


def test_small_field_wraps(f11):
    circuit = parse_circuit(
        "def main(private field a, private field b, public field c) -> bool {"
        " assert(a * b == c); return true; }"
    )
    r1cs = compile_circuit(circuit, f11)
    # 4 * 6 = 24 = 2 mod 11
    assert check_satisfaction(r1cs, generate_witness(circuit, r1cs, [2], [4, 6]))


def test_evaluate_locals(field):
    circuit = parse_circuit(AFFINE_SOURCE)
    assert evaluate_locals(circuit, field, [0], [2, 3, 4]) == {"out_y": 10}
    with pytest.raises(UnsatisfiedAssertion):
        evaluate_locals(circuit, field, [10], [2, 3, 4])
    assert evaluate_locals(circuit, field, [10], [2, 3, 4], check=False) == {"out_y": 10}


def test_json_round_trip(factor_r1cs):
    restored = R1CS.from_json(factor_r1cs.to_json())
    assert restored == factor_r1cs
    assert restored.digest() == factor_r1cs.digest()


def test_row_elements(factor_r1cs, field):
    a, b, c = factor_r1cs.row_elements(1)
    assert set(a) == {3}
    assert set(b) == {4}
    assert c == {1: field.one}


def test_out_of_range_variable(field):
    with pytest.raises(ValueError):
        R1CS(field, 2, 0, ((((5, 1),), (), ()),))


def test_synthetic_chain_sizes(field):
    for n in (1, 5, 40):
        circuit = synthetic_chain_circuit(n)
        r1cs = compile_circuit(circuit, field)
        assert constraint_count(r1cs) == n
        assert check_satisfaction(r1cs, generate_witness(circuit, r1cs, [], [3, 5]))


def test_fit_linear_cost():
    a, b, r2 = fit_linear_cost([1, 2, 3, 4], [3.0, 5.0, 7.0, 9.0])
    assert a == pytest.approx(2.0)
    assert b == pytest.approx(1.0)
    assert r2 == pytest.approx(1.0)
    with pytest.raises(LengthMismatch):
        fit_linear_cost([1], [1.0])


def test_measure_check_cost():
    times = measure_check_cost([10, 20], repeats=1)
    assert len(times) == 2
    assert all(t >= 0 for t in times)


def test_triple_product_needs_two_constraints(field):
    circuit = parse_circuit(
        "def main(private field a, private field b, private field c, public field d) -> bool {"
        " assert(a * b * c == d); return true; }"
    )
    r1cs = compile_circuit(circuit, field)
    assert constraint_count(r1cs) == 2
    assert check_satisfaction(r1cs, generate_witness(circuit, r1cs, [24], [2, 3, 4]))
    with pytest.raises(UnsatisfiedAssertion):
        generate_witness(circuit, r1cs, [25], [2, 3, 4])


def test_compile_is_deterministic(field):
    for source in (AFFINE_SOURCE, TAUTOLOGY_SOURCE):
        first = compile_circuit(parse_circuit(source), field)
        second = compile_circuit(parse_circuit(source), field)
        assert first.to_json() == second.to_json()
        assert first.digest() == second.digest()
    chain = synthetic_chain_circuit(200)
    assert compile_circuit(chain, field).to_json() == compile_circuit(chain, field).to_json()


@pytest.mark.slow
def test_check_cost_is_linear():
    sizes = [1_000, 10_000, 100_000]
    _, _, r2 = fit_linear_cost(sizes, measure_check_cost(sizes, repeats=3))
    assert r2 >= 0.95

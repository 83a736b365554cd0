import pytest

import weylrods as w


@pytest.fixture(scope="session")
def n2_solution():
    """Unbalanced two-family equal-rod solution, period 2."""
    return w.build_solution(w.equal_rod_diagram(2, 2))


@pytest.fixture(scope="session")
def n2_balanced(n2_solution):
    sol, _ = w.balance_solution(n2_solution)
    return sol


@pytest.fixture(scope="session")
def n3_solution():
    return w.build_solution(w.equal_rod_diagram(3, 1))


@pytest.fixture(scope="session")
def n3_balanced(n3_solution):
    sol, _ = w.balance_solution(n3_solution)
    return sol


@pytest.fixture(scope="session")
def four_rod_diagram():
    """The e1,e2,e1,e3 period (two rods of family 1), equal lengths, L=4."""
    return w.diagram_from_families(3, 4, [1, 2, 1, 3])


@pytest.fixture(scope="session")
def four_rod_solution(four_rod_diagram):
    return w.build_solution(four_rod_diagram)


@pytest.fixture(scope="session")
def five_rod_diagram():
    """The e1,e2,e1,e3,e4 period, equal fifths, L=5."""
    return w.diagram_from_families(4, 5, [1, 2, 1, 3, 4])


@pytest.fixture(scope="session")
def five_rod_solution(five_rod_diagram):
    return w.build_solution(five_rod_diagram)


@pytest.fixture(scope="session")
def uneven_diagram():
    """Non-equal rod lengths: one long rod, reflection swaps families 2 and 3."""
    return w.diagram_from_families(3, 2, [1, 2, 3], ["1/2", "1/4", "1/4"])


@pytest.fixture(scope="session")
def uneven_solution(uneven_diagram):
    return w.build_solution(uneven_diagram)


@pytest.fixture(scope="session")
def flat_solution():
    """n=1 full-axis diagnostic: flat space up to a cone angle."""
    return w.build_solution(w.full_axis_diagram(2))

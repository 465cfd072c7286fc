"""Supernodal analysis by inspection, with an exact MNA cross-check."""

from .assembly import ReducedSystem, build_reduced_system
from .controlled import build_system
from .errors import AnalysisError
from .netlist import Circuit, bind_values, load_netlist, parse_netlist, validate_circuit
from .symbolic import AffineForm, Poly, parse_poly
from .verify import check_solution, differential_check, mna_solve, mna_system, solve_circuit

__all__ = [
    "AffineForm",
    "AnalysisError",
    "Circuit",
    "Poly",
    "ReducedSystem",
    "bind_values",
    "build_reduced_system",
    "build_system",
    "check_solution",
    "differential_check",
    "load_netlist",
    "mna_solve",
    "mna_system",
    "parse_netlist",
    "parse_poly",
    "solve_circuit",
    "validate_circuit",
]
